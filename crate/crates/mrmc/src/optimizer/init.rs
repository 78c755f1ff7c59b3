//! Initial precoders and codes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::linalg::{c, crandn, CMat};
use crate::scenario::{ChannelSet, SystemConfig};
use crate::signal_model::PrecoderSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    Deterministic,
    Random,
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InitMode::Deterministic => "deterministic",
            InitMode::Random => "random",
        })
    }
}

/// First `d` right singular vectors of `h` (columns of `V`, largest first).
pub fn dominant_right_vectors(h: &CMat, d: usize) -> CMat {
    let n = h.ncols();
    let mut padded = CMat::zeros(h.nrows().max(n), n);
    padded.view_mut((0, 0), h.shape()).copy_from(h);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut v = CMat::zeros(n, d);
    for (dst, &src) in idx.iter().take(d).enumerate() {
        v.set_column(dst, &vt.row(src).adjoint());
    }
    v
}

/// Orthonormal columns spanning the first `d` left singular directions of `m`.
fn orthonormal(m: &CMat) -> CMat {
    let d = m.ncols();
    let qr = m.clone().qr();
    qr.q().columns(0, d).into_owned()
}

/// `{P}⁰`: orthonormal directions scaled so every stream gets `P_U/Du` (UL)
/// or `P_B/(J·Dd)` (DL). Deterministic mode uses channel right singular
/// vectors; random mode orthonormalizes CN(0, 1) draws.
pub fn init_precoders(cfg: &SystemConfig, ch: &ChannelSet, mode: InitMode, seed: u64) -> PrecoderSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pre = PrecoderSet::zeros(cfg);
    for i in 0..cfg.num_ul {
        let s = c((cfg.p_u / cfg.du[i] as f64).sqrt(), 0.0);
        for k in 0..cfg.k {
            let dir = match mode {
                InitMode::Deterministic => dominant_right_vectors(&ch.h_ub[i], cfg.du[i]),
                InitMode::Random => orthonormal(&crandn(&mut rng, cfg.nu[i], cfg.du[i])),
            };
            pre.p_u[i][k] = dir * s;
        }
    }
    for j in 0..cfg.num_dl {
        let s = c((cfg.p_b / (cfg.num_dl * cfg.dd[j]) as f64).sqrt(), 0.0);
        for k in 0..cfg.k {
            let dir = match mode {
                InitMode::Deterministic => dominant_right_vectors(&ch.h_bd[j], cfg.dd[j]),
                InitMode::Random => orthonormal(&crandn(&mut rng, cfg.m_c, cfg.dd[j])),
            };
            pre.p_d[j][k] = dir * s;
        }
    }
    pre
}

/// `sqrt(P_r/K)` in every entry: unit PAR and exact column energy.
pub fn uncoded_code(cfg: &SystemConfig) -> CMat {
    CMat::from_fn(cfg.k, cfg.m_r, |_, m| c((cfg.p_r[m] / cfg.k as f64).sqrt(), 0.0))
}
