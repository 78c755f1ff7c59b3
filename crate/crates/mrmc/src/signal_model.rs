//! Transmit signals, target factorization and every receive covariance.
//!
//! Radar receivers observe `y[k] = s_t[k]ᵀ h_t[k] + interference` at the CUT,
//! with `s_t[k] = [a[k]; s_Bt[k]]`. The slow-time target response is exactly
//! low rank: `h_t = L z` with `z ~ CN(0, I)`, so `Σ_t = L L†` and the stacked
//! operator gives `R_t = S_t Σ_t S_t† = G G†` with `G = S_t L`.

use std::f64::consts::PI;

use crate::error::Result;
use crate::linalg::{c, cis, hermitize, CMat, CVec, C64};
use crate::scenario::{generate_channels, ChannelSet, RadarLink, SystemConfig};

/// UL precoders `p_u[i][k]` (Nu_i × Du_i) and DL precoders `p_d[j][k]` (M_c × Dd_j).
#[derive(Clone, Debug, PartialEq)]
pub struct PrecoderSet {
    pub p_u: Vec<Vec<CMat>>,
    pub p_d: Vec<Vec<CMat>>,
}

impl PrecoderSet {
    pub fn zeros(cfg: &SystemConfig) -> Self {
        Self {
            p_u: (0..cfg.num_ul)
                .map(|i| vec![CMat::zeros(cfg.nu[i], cfg.du[i]); cfg.k])
                .collect(),
            p_d: (0..cfg.num_dl)
                .map(|j| vec![CMat::zeros(cfg.m_c, cfg.dd[j]); cfg.k])
                .collect(),
        }
    }

    /// Multiply every precoder by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<Vec<CMat>>| v.iter().map(|r| r.iter().map(|m| m.scale(s)).collect()).collect();
        Self { p_u: f(&self.p_u), p_d: f(&self.p_d) }
    }
}

/// Radar code matrix (K × M_r, row k is `a[k]ᵀ`) and communication precoders.
#[derive(Clone, Debug, PartialEq)]
pub struct Design {
    pub code: CMat,
    pub precoders: PrecoderSet,
}

impl Design {
    pub fn zeros(cfg: &SystemConfig) -> Self {
        Self {
            code: CMat::zeros(cfg.k, cfg.m_r),
            precoders: PrecoderSet::zeros(cfg),
        }
    }

    /// Per-PRI code vector `a[k]`.
    pub fn a(&self, k: usize) -> CVec {
        self.code.row(k).transpose()
    }

    pub fn set_a(&mut self, k: usize, a: &CVec) {
        self.code.set_row(k, &a.transpose());
    }
}

/// `K · max|a_k|² / ‖a‖²` of one code column.
pub fn column_par(col: &CVec) -> f64 {
    let energy = col.norm_squared();
    if energy == 0.0 {
        return f64::INFINITY;
    }
    let peak = col.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    col.len() as f64 * peak / energy
}

/// Column energies equal `p_r` (1e-10 rel.) and column PARs are within `gamma`.
pub fn code_feasible(code: &CMat, p_r: &[f64], gamma: &[f64]) -> bool {
    (0..code.ncols()).all(|m| {
        let col: CVec = code.column(m).into();
        let e = col.norm_squared();
        let peak = col.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        (e - p_r[m]).abs() <= 1e-10 * p_r[m] && code.nrows() as f64 * peak / p_r[m] <= gamma[m] + 1e-10
    })
}

/// Per-PRI factor blocks `L_k` (M × (M_r + 1)) of the target response.
///
/// Column `m_r` carries the radar path `η e^{j2πk f}` at row `m_r`; the last
/// column carries the BS-to-target path `η_Bt e^{j2πk f_Bt} conj(a_T)` on the
/// DL rows. Only the first `n_est` columns belong to the estimated target;
/// without cooperation the last column is interference.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetFactor {
    pub blocks: Vec<CMat>,
    pub n_est: usize,
}

impl TargetFactor {
    pub fn new(cfg: &SystemConfig, link: &RadarLink, steer_bt: &CVec) -> Self {
        let (m_r, m) = (cfg.m_r, cfg.m_total());
        let blocks = (0..cfg.k)
            .map(|k| {
                let mut l = CMat::zeros(m, m_r + 1);
                for mr in 0..m_r {
                    l[(mr, mr)] = cis(2.0 * PI * k as f64 * link.f_rt[mr]) * link.eta2_rt[mr].sqrt();
                }
                let ph = cis(2.0 * PI * k as f64 * link.f_bt) * link.eta2_bt.sqrt();
                for cc in 0..cfg.m_c {
                    l[(m_r + cc, m_r)] = ph * steer_bt[cc];
                }
                l
            })
            .collect();
        Self {
            blocks,
            n_est: if cfg.cooperation { m_r + 1 } else { m_r },
        }
    }

    pub fn r_full(&self) -> usize {
        self.blocks[0].ncols()
    }

    /// Stacked `KM × cols` factor using the first `cols` columns.
    pub fn stacked(&self, cols: usize) -> CMat {
        let (k, m) = (self.blocks.len(), self.blocks[0].nrows());
        let mut l = CMat::zeros(k * m, cols);
        for (kk, b) in self.blocks.iter().enumerate() {
            l.view_mut((kk * m, 0), (m, cols)).copy_from(&b.columns(0, cols));
        }
        l
    }

    /// Estimated-target factor `L` (KM × n_est).
    pub fn l_est(&self) -> CMat {
        self.stacked(self.n_est)
    }

    /// `Σ_t = L L†` (KM × KM).
    pub fn sigma_t(&self) -> CMat {
        let l = self.l_est();
        hermitize(&(&l * l.adjoint()))
    }

    /// `G` (K × r_full) with rows `s_t[k]ᵀ L_k`.
    pub fn g_matrix(&self, s_t: &[CVec]) -> CMat {
        let r = self.r_full();
        let mut g = CMat::zeros(s_t.len(), r);
        for (k, s) in s_t.iter().enumerate() {
            let row = s.transpose() * &self.blocks[k];
            g.set_row(k, &row);
        }
        g
    }
}

/// A configuration, one channel realization and the derived target factors.
#[derive(Clone, Debug)]
pub struct Model {
    pub cfg: SystemConfig,
    pub ch: ChannelSet,
    pub factors: Vec<TargetFactor>,
}

impl Model {
    pub fn new(cfg: SystemConfig, ch: ChannelSet) -> Self {
        let factors = ch
            .radar
            .iter()
            .map(|link| TargetFactor::new(&cfg, link, &ch.steer_bt))
            .collect();
        Self { cfg, ch, factors }
    }

    pub fn generate(cfg: &SystemConfig, seed: u64) -> Result<Self> {
        let ch = generate_channels(cfg, seed)?;
        Ok(Self::new(cfg.clone(), ch))
    }

    /// Same channels with cooperation switched.
    pub fn with_cooperation(&self, on: bool) -> Self {
        let mut cfg = self.cfg.clone();
        cfg.cooperation = on;
        Self::new(cfg, self.ch.clone())
    }
}

/// DL signal at symbol `l`: `Σ_j P_d[j][k] d_d[j][k][l]`.
pub fn s_b(model: &Model, pre: &PrecoderSet, k: usize, l: usize) -> CVec {
    let mut s = CVec::zeros(model.cfg.m_c);
    for (j, p) in pre.p_d.iter().enumerate() {
        s += &p[k] * &model.ch.d_d[j][k][l];
    }
    s
}

/// Training symbol echoed by the target, `s_Bt[k] = s_B[k, 0]`.
pub fn s_bt(model: &Model, pre: &PrecoderSet, k: usize) -> CVec {
    s_b(model, pre, k, model.cfg.l_bt())
}

/// DL symbol on the direct path at the CUT.
pub fn s_bm(model: &Model, pre: &PrecoderSet, k: usize) -> CVec {
    s_b(model, pre, k, model.cfg.l_bm())
}

/// UL symbol of user `i` arriving at the CUT.
pub fn x_ul(model: &Model, pre: &PrecoderSet, i: usize, k: usize) -> CVec {
    &pre.p_u[i][k] * &model.ch.d_u[i][k][model.cfg.l_ul()]
}

/// `s_t[k] = [a[k]; s_Bt[k]]`.
pub fn s_t(model: &Model, design: &Design, k: usize) -> CVec {
    let (m_r, m_c) = (model.cfg.m_r, model.cfg.m_c);
    let mut s = CVec::zeros(m_r + m_c);
    s.rows_mut(0, m_r).copy_from(&design.a(k));
    s.rows_mut(m_r, m_c).copy_from(&s_bt(model, &design.precoders, k));
    s
}

/// Block-diagonal stacked transmit operator `S_t` (K × KM), row k holds `s_t[k]ᵀ`.
pub fn stacked_operator(model: &Model, design: &Design) -> CMat {
    let (k, m) = (model.cfg.k, model.cfg.m_total());
    let mut s = CMat::zeros(k, k * m);
    for kk in 0..k {
        let v = s_t(model, design, kk);
        s.view_mut((kk, kk * m), (1, m)).copy_from(&v.transpose());
    }
    s
}

fn doppler_phase(eta2: f64, f: f64, m: usize, l: usize) -> C64 {
    cis(2.0 * PI * (m as f64 - l as f64) * f) * eta2
}

/// `Σ_rt^{(m,ℓ)}`: diagonal, entry `η² e^{j2π(m−ℓ)f}` per radar transmitter.
pub fn sigma_rt_block(link: &RadarLink, m: usize, l: usize) -> CMat {
    let n = link.eta2_rt.len();
    CMat::from_diagonal(&CVec::from_iterator(
        n,
        (0..n).map(|i| doppler_phase(link.eta2_rt[i], link.f_rt[i], m, l)),
    ))
}

/// `Σ_Bt^{(m,ℓ)} = η_Bt² e^{j2π(m−ℓ)f_Bt} conj(a_T) a_Tᵀ`.
pub fn sigma_bt_block(link: &RadarLink, steer_bt: &CVec, m: usize, l: usize) -> CMat {
    (steer_bt * steer_bt.adjoint()) * doppler_phase(link.eta2_bt, link.f_bt, m, l)
}

/// `Σ_Bm^{(m,ℓ)} = η² e^{j2π(m−ℓ)f_Bm} I`.
pub fn sigma_bm_block(link: &RadarLink, m_c: usize, m: usize, l: usize) -> CMat {
    CMat::identity(m_c, m_c) * doppler_phase(link.eta2_bm, link.f_bm, m, l)
}

/// `Σ_i^{(m,ℓ)}` of the direct path from UL user `i`.
pub fn sigma_ul_block(link: &RadarLink, i: usize, nu: usize, m: usize, l: usize) -> CMat {
    CMat::identity(nu, nu) * doppler_phase(link.eta2_ul[i], link.f_ul[i], m, l)
}

/// Slow-time covariance of a direct path with `Σ^{(m,ℓ)} = η² e^{j2π(m−ℓ)f} I`:
/// `R(m,ℓ) = η² e^{j2π(m−ℓ)f} x[m]ᵀ x[ℓ]*`, `x` given as rows of `rows` (K × n).
pub fn doppler_gram(rows: &CMat, eta2: f64, f: f64) -> CMat {
    let k = rows.nrows();
    let d = CMat::from_diagonal(&CVec::from_iterator(k, (0..k).map(|m| cis(2.0 * PI * m as f64 * f))));
    let z = d * rows;
    hermitize(&((&z * z.adjoint()) * c(eta2, 0.0)))
}

fn rows_of(vs: &[CVec]) -> CMat {
    let n = vs.first().map_or(0, |v| v.len());
    let mut m = CMat::zeros(vs.len(), n);
    for (k, v) in vs.iter().enumerate() {
        m.set_row(k, &v.transpose());
    }
    m
}

fn all_s_t(model: &Model, design: &Design) -> Vec<CVec> {
    (0..model.cfg.k).map(|k| s_t(model, design, k)).collect()
}

/// Target covariance of receiver `n_r` with the stacked operator and `Σ_t`.
pub fn build_target_cov(model: &Model, design: &Design, n_r: usize) -> (CMat, CMat, CMat) {
    let f = &model.factors[n_r];
    let g = f.g_matrix(&all_s_t(model, design));
    let ge = g.columns(0, f.n_est);
    let r_t = hermitize(&(&ge * ge.adjoint()));
    (r_t, stacked_operator(model, design), f.sigma_t())
}

/// `R_c = A Σ_c A†`.
pub fn build_clutter_cov(code: &CMat, sigma_c: &CMat) -> CMat {
    hermitize(&(code * sigma_c * code.adjoint()))
}

/// `R_in = R_c + R_Bm + R_UL (+ R_Bt without cooperation) + σ_r² I`.
pub fn build_radar_interference_cov(model: &Model, design: &Design, n_r: usize) -> CMat {
    let g = model.factors[n_r].g_matrix(&all_s_t(model, design));
    radar_interference_from_g(model, design, n_r, &g)
}

fn radar_interference_from_g(model: &Model, design: &Design, n_r: usize, g: &CMat) -> CMat {
    let cfg = &model.cfg;
    let link = &model.ch.radar[n_r];
    let pre = &design.precoders;
    let mut r = build_clutter_cov(&design.code, &link.sigma_c);
    let bm: Vec<CVec> = (0..cfg.k).map(|k| s_bm(model, pre, k)).collect();
    r += doppler_gram(&rows_of(&bm), link.eta2_bm, link.f_bm);
    for i in 0..cfg.num_ul {
        let x: Vec<CVec> = (0..cfg.k).map(|k| x_ul(model, pre, i, k)).collect();
        r += doppler_gram(&rows_of(&x), link.eta2_ul[i], link.f_ul[i]);
    }
    let f = &model.factors[n_r];
    if f.n_est < f.r_full() {
        let gb = g.columns(f.n_est, f.r_full() - f.n_est);
        r += &gb * gb.adjoint();
    }
    for kk in 0..cfg.k {
        r[(kk, kk)] += c(cfg.sigma2_r, 0.0);
    }
    hermitize(&r)
}

fn outer(h: &CMat, p: &CMat) -> CMat {
    let hp = h * p;
    &hp * hp.adjoint()
}

/// BS receive covariance: `(R_u, R_in_u, R_iB)` for UL user `i` in frame `k`.
pub fn build_uplink_cov(model: &Model, design: &Design, i: usize, k: usize) -> (CMat, CMat, CMat) {
    let (cfg, ch, pre) = (&model.cfg, &model.ch, &design.precoders);
    let sig = hermitize(&outer(&ch.h_ub[i], &pre.p_u[i][k]));
    let mut r_in = CMat::identity(cfg.n_c, cfg.n_c) * c(cfg.sigma2_b, 0.0);
    for q in (0..cfg.num_ul).filter(|&q| q != i) {
        r_in += outer(&ch.h_ub[q], &pre.p_u[q][k]);
    }
    for j in 0..cfg.num_dl {
        r_in += outer(&ch.h_bb, &pre.p_d[j][k]);
    }
    let ra = &ch.h_rb * design.a(k);
    r_in += &ra * ra.adjoint();
    let r_in = hermitize(&r_in);
    let total = hermitize(&(&r_in + &sig));
    (total, r_in, sig)
}

/// DL receive covariance: `(R_d, R_in_d, R_DLj)` for DL user `j` in frame `k`.
pub fn build_downlink_cov(model: &Model, design: &Design, j: usize, k: usize) -> (CMat, CMat, CMat) {
    let (cfg, ch, pre) = (&model.cfg, &model.ch, &design.precoders);
    let sig = hermitize(&outer(&ch.h_bd[j], &pre.p_d[j][k]));
    let mut r_in = CMat::identity(cfg.nd[j], cfg.nd[j]) * c(cfg.sigma2_d, 0.0);
    for g in (0..cfg.num_dl).filter(|&g| g != j) {
        r_in += outer(&ch.h_bd[j], &pre.p_d[g][k]);
    }
    for i in 0..cfg.num_ul {
        r_in += outer(&ch.h_ud[i][j], &pre.p_u[i][k]);
    }
    let ra = &ch.h_rd[j] * design.a(k);
    r_in += &ra * ra.adjoint();
    let r_in = hermitize(&r_in);
    let total = hermitize(&(&r_in + &sig));
    (total, r_in, sig)
}

/// `(P_B[k], [P_u,i[k]])`: total DL power and per-user UL power in frame `k`.
pub fn transmit_powers(pre: &PrecoderSet, k: usize) -> (f64, Vec<f64>) {
    let dl = pre.p_d.iter().map(|p| p[k].norm_squared()).sum();
    let ul = pre.p_u.iter().map(|p| p[k].norm_squared()).collect();
    (dl, ul)
}

/// Radar covariances of one receiver.
#[derive(Clone, Debug)]
pub struct RadarCov {
    /// `G = S_t L` over all factor columns (K × r_full).
    pub g: CMat,
    pub r_t: CMat,
    pub r_in: CMat,
}

/// Signal, interference-plus-noise and total covariance at one comm receiver.
#[derive(Clone, Debug)]
pub struct CommCov {
    pub sig: CMat,
    pub r_in: CMat,
    pub total: CMat,
}

/// Every receive covariance for one design.
#[derive(Clone, Debug)]
pub struct CovarianceBundle {
    pub radar: Vec<RadarCov>,
    /// `[i][k]`
    pub ul: Vec<Vec<CommCov>>,
    /// `[j][k]`
    pub dl: Vec<Vec<CommCov>>,
}

pub fn radar_covariances(model: &Model, design: &Design) -> Vec<RadarCov> {
    let s = all_s_t(model, design);
    model
        .factors
        .iter()
        .enumerate()
        .map(|(n_r, f)| {
            let g = f.g_matrix(&s);
            let ge = g.columns(0, f.n_est);
            let r_t = hermitize(&(&ge * ge.adjoint()));
            let r_in = radar_interference_from_g(model, design, n_r, &g);
            RadarCov { g, r_t, r_in }
        })
        .collect()
}

/// UL covariances of frame `k`, one entry per user.
pub fn uplink_covariances(model: &Model, design: &Design, k: usize) -> Vec<CommCov> {
    (0..model.cfg.num_ul)
        .map(|i| {
            let (total, r_in, sig) = build_uplink_cov(model, design, i, k);
            CommCov { sig, r_in, total }
        })
        .collect()
}

/// DL covariances of frame `k`, one entry per user.
pub fn downlink_covariances(model: &Model, design: &Design, k: usize) -> Vec<CommCov> {
    (0..model.cfg.num_dl)
        .map(|j| {
            let (total, r_in, sig) = build_downlink_cov(model, design, j, k);
            CommCov { sig, r_in, total }
        })
        .collect()
}

pub fn covariances(model: &Model, design: &Design) -> CovarianceBundle {
    let cfg = &model.cfg;
    let per_k_ul: Vec<Vec<CommCov>> = (0..cfg.k).map(|k| uplink_covariances(model, design, k)).collect();
    let per_k_dl: Vec<Vec<CommCov>> = (0..cfg.k).map(|k| downlink_covariances(model, design, k)).collect();
    let ul = (0..cfg.num_ul)
        .map(|i| (0..cfg.k).map(|k| per_k_ul[k][i].clone()).collect())
        .collect();
    let dl = (0..cfg.num_dl)
        .map(|j| (0..cfg.k).map(|k| per_k_dl[k][j].clone()).collect())
        .collect();
    CovarianceBundle {
        radar: radar_covariances(model, design),
        ul,
        dl,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{crandn, frob, min_eig, rel_err};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_design(model: &Model, seed: u64) -> Design {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = &model.cfg;
        let mut d = Design::zeros(cfg);
        d.code = crandn(&mut rng, cfg.k, cfg.m_r).scale(0.05);
        for i in 0..cfg.num_ul {
            for k in 0..cfg.k {
                d.precoders.p_u[i][k] = crandn(&mut rng, cfg.nu[i], cfg.du[i]).scale(0.05);
            }
        }
        for j in 0..cfg.num_dl {
            for k in 0..cfg.k {
                d.precoders.p_d[j][k] = crandn(&mut rng, cfg.m_c, cfg.dd[j]).scale(0.05);
            }
        }
        d
    }

    fn model(seed: u64) -> Model {
        Model::generate(&SystemConfig::reference_defaults(), seed).unwrap()
    }

    #[test]
    fn zero_transmit_gives_zero_target() {
        let m = model(0);
        let d = Design::zeros(&m.cfg);
        let (r_t, _, _) = build_target_cov(&m, &d, 0);
        assert_eq!(frob(&r_t), 0.0);
        let r_in = build_radar_interference_cov(&m, &d, 0);
        assert!(rel_err(&r_in, &(CMat::identity(8, 8) * c(m.cfg.sigma2_r, 0.0))) < 1e-15);
    }

    #[test]
    fn scalar_target() {
        let mut cfg = SystemConfig::reference_defaults();
        cfg.k = 1;
        cfg.m_r = 1;
        cfg.p_r = vec![2.0];
        cfg.gamma = vec![1.0];
        cfg.cooperation = false;
        cfg.channel.eta2_rt = 0.7;
        let m = Model::generate(&cfg, 3).unwrap();
        let mut d = Design::zeros(&cfg);
        d.code[(0, 0)] = c(2f64.sqrt(), 0.0);
        let (r_t, _, _) = build_target_cov(&m, &d, 0);
        assert!((r_t[(0, 0)] - c(2.0 * 0.7, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn factored_form_matches_operator() {
        let m = model(4);
        let d = random_design(&m, 5);
        let (r_t, s, sig) = build_target_cov(&m, &d, 1);
        let via_op = &s * &sig * s.adjoint();
        assert!(rel_err(&via_op, &r_t) < 1e-12);
    }

    #[test]
    fn clutter_identity_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = crandn(&mut rng, 8, 4);
        let sc = CMat::identity(4, 4) * c(0.3, 0.0);
        let r = build_clutter_cov(&a, &sc);
        assert!(rel_err(&r, &((&a * a.adjoint()) * c(0.3, 0.0))) < 1e-14);
        assert_eq!(frob(&build_clutter_cov(&CMat::zeros(8, 4), &sc)), 0.0);
    }

    #[test]
    fn interference_noise_floor() {
        for seed in 0..10 {
            let m = model(seed);
            let d = random_design(&m, seed + 100);
            for n_r in 0..m.cfg.n_r {
                let r = build_radar_interference_cov(&m, &d, n_r);
                assert!(min_eig(&r) >= m.cfg.sigma2_r - 1e-9);
            }
        }
    }

    #[test]
    fn hermitian_exactly() {
        let m = model(2);
        let d = random_design(&m, 9);
        let b = covariances(&m, &d);
        for rc in &b.radar {
            assert_eq!(frob(&(&rc.r_t - rc.r_t.adjoint())), 0.0);
            assert_eq!(frob(&(&rc.r_in - rc.r_in.adjoint())), 0.0);
        }
        for cc in b.ul.iter().chain(&b.dl).flatten() {
            assert_eq!(frob(&(&cc.total - cc.total.adjoint())), 0.0);
            assert_eq!(frob(&(&cc.r_in - cc.r_in.adjoint())), 0.0);
        }
    }

    #[test]
    fn radar_to_comm_rank_one() {
        let m = model(6);
        let mut d = Design::zeros(&m.cfg);
        d.code = random_design(&m, 1).code;
        let (_, r_in, _) = build_uplink_cov(&m, &d, 0, 3);
        let noise_free = &r_in - CMat::identity(4, 4) * c(m.cfg.sigma2_b, 0.0);
        let (vals, _) = crate::linalg::hermitian_eigen(&noise_free);
        assert!(vals[1].abs() < 1e-12 * vals[0].max(1e-300));
    }

    #[test]
    fn single_users_without_others_see_noise() {
        let mut cfg = SystemConfig::reference_defaults();
        cfg.num_ul = 1;
        cfg.num_dl = 1;
        cfg.nu = vec![2];
        cfg.du = vec![2];
        cfg.nd = vec![2];
        cfg.dd = vec![2];
        cfg.alpha_u = vec![0.2];
        cfg.alpha_d = vec![0.2];
        let m = Model::generate(&cfg, 0).unwrap();
        let mut d = random_design(&m, 3);
        d.code.fill(c(0.0, 0.0));
        for k in 0..cfg.k {
            d.precoders.p_d[0][k].fill(c(0.0, 0.0));
        }
        let (_, r_in, _) = build_uplink_cov(&m, &d, 0, 0);
        assert!(rel_err(&r_in, &(CMat::identity(4, 4) * c(cfg.sigma2_b, 0.0))) < 1e-15);
        let mut d = random_design(&m, 4);
        d.code.fill(c(0.0, 0.0));
        for k in 0..cfg.k {
            d.precoders.p_u[0][k].fill(c(0.0, 0.0));
        }
        let (_, r_in, _) = build_downlink_cov(&m, &d, 0, 0);
        assert!(rel_err(&r_in, &(CMat::identity(2, 2) * c(cfg.sigma2_d, 0.0))) < 1e-15);
    }

    #[test]
    fn power_audit() {
        let cfg = SystemConfig::reference_defaults();
        let mut pre = PrecoderSet::zeros(&cfg);
        assert_eq!(transmit_powers(&pre, 0), (0.0, vec![0.0, 0.0]));
        for j in 0..2 {
            pre.p_d[j][0] = CMat::identity(4, 2);
        }
        assert_eq!(transmit_powers(&pre, 0).0, 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = crandn(&mut rng, 2, 2);
        pre.p_u[1][0] = p.clone();
        let sv: f64 = p.singular_values().iter().map(|s| s * s).sum();
        assert!((transmit_powers(&pre, 0).1[1] - sv).abs() < 1e-12);
    }

    #[test]
    fn sigma_blocks_hermitian_pairs() {
        let m = model(7);
        let link = &m.ch.radar[0];
        for (a, b) in [(0, 3), (2, 5), (7, 1)] {
            let x = sigma_rt_block(link, a, b);
            assert_eq!(x, sigma_rt_block(link, b, a).adjoint());
            let y = sigma_bt_block(link, &m.ch.steer_bt, a, b);
            assert!(frob(&(&y - sigma_bt_block(link, &m.ch.steer_bt, b, a).adjoint())) < 1e-15);
        }
    }
}
