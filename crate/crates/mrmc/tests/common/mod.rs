#![allow(dead_code)]

use mrmc::linalg::{c, crandn, hermitize, CMat};
use mrmc::objective::{FilterSet, WeightSet};
use mrmc::optimizer::SylvesterSystem;
use mrmc::scenario::SystemConfig;
use mrmc::signal_model::{Design, Model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Small configuration: three-antenna terminals, K = 4.
pub fn small_config(variant: usize) -> SystemConfig {
    let mut cfg = SystemConfig::reference_defaults();
    cfg.k = 4;
    cfg.m_r = 3;
    cfg.n_r = 2;
    cfg.m_c = 3;
    cfg.n_c = 3;
    let (users, ant, streams) = if variant % 2 == 0 { (1, 3, 2) } else { (3, 1, 1) };
    cfg.num_ul = users;
    cfg.num_dl = users;
    cfg.nu = vec![ant; users];
    cfg.nd = vec![ant; users];
    cfg.du = vec![streams; users];
    cfg.dd = vec![streams; users];
    let w = 1.0 / (cfg.n_r + 2 * users) as f64;
    cfg.alpha_r = vec![w; cfg.n_r];
    cfg.alpha_u = vec![w; users];
    cfg.alpha_d = vec![w; users];
    cfg.p_r = vec![cfg.p_r[0]; cfg.m_r];
    cfg.gamma = vec![cfg.gamma[0]; cfg.m_r];
    cfg.refresh_qos_floors();
    cfg
}

pub fn random_design(model: &Model, seed: u64, scale: f64) -> Design {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = &model.cfg;
    let mut d = Design::zeros(cfg);
    d.code = crandn(&mut rng, cfg.k, cfg.m_r).scale(scale);
    for i in 0..cfg.num_ul {
        for k in 0..cfg.k {
            d.precoders.p_u[i][k] = crandn(&mut rng, cfg.nu[i], cfg.du[i]).scale(scale);
        }
    }
    for j in 0..cfg.num_dl {
        for k in 0..cfg.k {
            d.precoders.p_d[j][k] = crandn(&mut rng, cfg.m_c, cfg.dd[j]).scale(scale);
        }
    }
    d
}

fn psd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let b = crandn(rng, n, n);
    hermitize(&(&b * b.adjoint() / c(n as f64, 0.0)))
}

/// Random filters and random Hermitian PSD weights.
pub fn random_filters_weights(model: &Model, seed: u64) -> (FilterSet, WeightSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = &model.cfg;
    let km = cfg.k * cfg.m_total();
    let f = FilterSet {
        u_r: (0..cfg.n_r).map(|_| crandn(&mut rng, km, cfg.k)).collect(),
        u_u: (0..cfg.num_ul).map(|i| (0..cfg.k).map(|_| crandn(&mut rng, cfg.du[i], cfg.n_c)).collect()).collect(),
        u_d: (0..cfg.num_dl).map(|j| (0..cfg.k).map(|_| crandn(&mut rng, cfg.dd[j], cfg.nd[j])).collect()).collect(),
    };
    let w = WeightSet {
        w_r: (0..cfg.n_r).map(|_| psd(&mut rng, km)).collect(),
        w_u: (0..cfg.num_ul).map(|i| (0..cfg.k).map(|_| psd(&mut rng, cfg.du[i])).collect()).collect(),
        w_d: (0..cfg.num_dl).map(|j| (0..cfg.k).map(|_| psd(&mut rng, cfg.dd[j])).collect()).collect(),
    };
    (f, w)
}

/// Central-difference `∂f/∂X*` of a real function of a complex matrix.
pub fn fd_conj_gradient(x: &CMat, h: f64, mut f: impl FnMut(&CMat) -> f64) -> CMat {
    let mut g = CMat::zeros(x.nrows(), x.ncols());
    for idx in 0..x.len() {
        let mut d = [0.0; 2];
        for (slot, dir) in [c(h, 0.0), c(0.0, h)].into_iter().enumerate() {
            let mut xp = x.clone();
            xp[idx] += dir;
            let mut xm = x.clone();
            xm[idx] -= dir;
            d[slot] = (f(&xp) - f(&xm)) / (2.0 * h);
        }
        g[idx] = c(d[0] / 2.0, d[1] / 2.0);
    }
    g
}

/// Random design meeting every power budget with equality and a PAR-feasible code.
pub fn feasible_design(model: &Model, seed: u64) -> Design {
    let cfg = &model.cfg;
    let mut d = random_design(model, seed, 1.0);
    for i in 0..cfg.num_ul {
        for p in d.precoders.p_u[i].iter_mut() {
            let s = (cfg.p_u / p.norm_squared()).sqrt();
            *p *= c(s, 0.0);
        }
    }
    for k in 0..cfg.k {
        let total: f64 = (0..cfg.num_dl).map(|j| d.precoders.p_d[j][k].norm_squared()).sum();
        let s = (cfg.p_b / total).sqrt();
        for j in 0..cfg.num_dl {
            d.precoders.p_d[j][k] *= c(s, 0.0);
        }
    }
    d.code = mrmc::optimizer::par_project_code(&d.code, &cfg.p_r, &cfg.gamma);
    d
}

/// Random Hermitian PSD matrix with unit-order eigenvalues.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    psd(rng, n)
}

/// Operator matrix built column by column from `apply` on basis matrices.
pub fn dense_operator(sys: &SylvesterSystem) -> CMat {
    let (p, q) = sys.c.shape();
    let mut m = CMat::zeros(p * q, p * q);
    for col in 0..p * q {
        let mut e = CMat::zeros(p, q);
        e[col] = c(1.0, 0.0);
        let y = sys.apply(&e);
        for row in 0..p * q {
            m[(row, col)] = y[row];
        }
    }
    m
}
