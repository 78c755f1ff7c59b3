//! Whitened Neyman-Pearson detector and its Monte Carlo ROC.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MrmcError, Result};
use crate::linalg::{c, hermitian_eigen, hermitize, inv_hpd, CMat, CVec, REGULARIZATION};
use crate::optimizer::par::par_project_code;
use crate::scenario::SystemConfig;
use crate::signal_model::{radar_covariances, Design, Model};

/// Default Monte Carlo size per hypothesis.
pub const DEFAULT_TRIALS: usize = 100_000;
/// Number of thresholds in the default grid.
pub const GRID_POINTS: usize = 200;
/// Trials per independent random substream.
const CHUNK: usize = 4096;

/// Whitened target covariance of one radar receiver and its eigen-decomposition.
#[derive(Clone, Debug)]
pub struct ReceiverInstance {
    /// `R_in^{-1/2} R_t R_in^{-1/2}`
    pub g: CMat,
    /// Eigenvalues of `g`, descending and clamped at zero.
    pub delta: Vec<f64>,
    pub v: CMat,
}

/// One [`ReceiverInstance`] per radar receiver.
#[derive(Clone, Debug)]
pub struct DetectionInstance {
    pub receivers: Vec<ReceiverInstance>,
}

impl DetectionInstance {
    pub fn new(receivers: Vec<ReceiverInstance>) -> Self {
        Self { receivers }
    }

    /// Detector built from the radar covariances of `design`.
    pub fn from_design(model: &Model, design: &Design) -> Result<Self> {
        radar_covariances(model, design)
            .iter()
            .map(|rc| whitened_instance(&rc.r_t, &rc.r_in))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// All eigenvalues over every receiver.
    pub fn deltas(&self) -> impl Iterator<Item = f64> + '_ {
        self.receivers.iter().flat_map(|r| r.delta.iter().copied())
    }
}

/// Inverse Hermitian square root of an HPD matrix.
fn inv_sqrt_hpd(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigen(m);
    let top = vals.first().copied().unwrap_or(0.0);
    let floor = REGULARIZATION * top.abs().max(1.0);
    if vals.iter().any(|v| !v.is_finite()) || vals.last().copied().unwrap_or(1.0) <= -floor {
        return Err(MrmcError::DegenerateCovariance("interference covariance is not positive definite".into()));
    }
    let d = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(1.0 / v.max(floor).sqrt(), 0.0)),
    ));
    Ok(hermitize(&(&vecs * d * vecs.adjoint())))
}

/// Whiten `R_t` by `R_in` and eigen-decompose the result.
pub fn whitened_instance(r_t: &CMat, r_in: &CMat) -> Result<ReceiverInstance> {
    if r_t.shape() != r_in.shape() || !r_t.is_square() {
        return Err(MrmcError::InvalidArgument(format!(
            "R_t {:?} and R_in {:?} must be square and equal in size",
            r_t.shape(),
            r_in.shape()
        )));
    }
    let w = inv_sqrt_hpd(r_in)?;
    let g = hermitize(&(&w * r_t * &w));
    let (vals, v) = hermitian_eigen(&g);
    let delta = vals.into_iter().map(|d| d.max(0.0)).collect();
    Ok(ReceiverInstance { g, delta, v })
}

/// `T = Σ_receivers Σ_k δ_k |ŷ_k|² / (1 + δ_k)` with `ŷ = V† ȳ` given per receiver.
pub fn test_statistic(y_hat: &[CVec], inst: &DetectionInstance) -> f64 {
    inst.receivers
        .iter()
        .zip(y_hat)
        .map(|(r, y)| {
            r.delta
                .iter()
                .zip(y.iter())
                .map(|(&d, yk)| d / (1.0 + d) * yk.norm_sqr())
                .sum::<f64>()
        })
        .sum()
}

/// The same statistic before diagonalization, `Σ ȳ†(I − (G + I)⁻¹)ȳ`.
pub fn test_statistic_whitened(y_bar: &[CVec], inst: &DetectionInstance) -> Result<f64> {
    let mut t = 0.0;
    for (r, y) in inst.receivers.iter().zip(y_bar) {
        let n = r.g.nrows();
        let q = CMat::identity(n, n) - inv_hpd(&(&r.g + CMat::identity(n, n)))?;
        t += (y.adjoint() * q * y)[(0, 0)].re;
    }
    Ok(t)
}

/// `ŷ = V† ȳ` for every receiver.
pub fn rotate(y_bar: &[CVec], inst: &DetectionInstance) -> Vec<CVec> {
    inst.receivers.iter().zip(y_bar).map(|(r, y)| r.v.adjoint() * y).collect()
}

/// Monte Carlo samples of `T` under both hypotheses.
///
/// In the eigenbasis `|ŷ_k|²` is exponential with mean 1 under H0 and
/// `1 + δ_k` under H1, so each trial needs one unit exponential per eigenvalue.
/// Trials are split into fixed chunks, each with its own ChaCha stream, so the
/// samples do not depend on the number of worker threads.
#[derive(Clone, Debug)]
pub struct StatisticSamples {
    pub h0: Vec<f64>,
    pub h1: Vec<f64>,
}

fn unit_exp(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(Exp1)
}

pub fn sample_statistics(inst: &DetectionInstance, n_trials: usize, seed: u64) -> StatisticSamples {
    let deltas: Vec<f64> = inst.deltas().filter(|&d| d > 0.0).collect();
    let w0: Vec<f64> = deltas.iter().map(|&d| d / (1.0 + d)).collect();
    let chunks: Vec<(usize, usize)> = (0..n_trials)
        .step_by(CHUNK)
        .enumerate()
        .map(|(id, start)| (id, CHUNK.min(n_trials - start)))
        .collect();
    let parts: Vec<(Vec<f64>, Vec<f64>)> = chunks
        .par_iter()
        .map(|&(id, len)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id as u64);
            let mut h0 = Vec::with_capacity(len);
            let mut h1 = Vec::with_capacity(len);
            for _ in 0..len {
                let t0: f64 = w0.iter().map(|w| w * unit_exp(&mut rng)).sum();
                // under H1, δ/(1+δ)·(1+δ)·e = δ·e
                let t1: f64 = deltas.iter().map(|d| d * unit_exp(&mut rng)).sum();
                h0.push(t0);
                h1.push(t1);
            }
            (h0, h1)
        })
        .collect();
    let mut out = StatisticSamples { h0: Vec::with_capacity(n_trials), h1: Vec::with_capacity(n_trials) };
    for (a, b) in parts {
        out.h0.extend(a);
        out.h1.extend(b);
    }
    out
}

/// Empirical ROC over a threshold grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub nu: Vec<f64>,
    pub pfa: Vec<f64>,
    pub pd: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Fraction of `sorted_samples` strictly above `nu`.
fn exceedance(sorted_samples: &[f64], nu: f64) -> f64 {
    if sorted_samples.is_empty() {
        return 0.0;
    }
    let below = sorted_samples.partition_point(|&t| t <= nu);
    (sorted_samples.len() - below) as f64 / sorted_samples.len() as f64
}

/// Empirical `q`-quantile (nearest rank) of sorted samples.
fn quantile(sorted_samples: &[f64], q: f64) -> f64 {
    let n = sorted_samples.len();
    if n == 0 {
        return 0.0;
    }
    let idx = ((q * n as f64 - 1e-9).ceil() as usize).clamp(1, n) - 1;
    sorted_samples[idx]
}

/// `GRID_POINTS` log-spaced thresholds between the 0.001 and 0.999 H0 quantiles.
pub fn default_threshold_grid(h0: &[f64]) -> Vec<f64> {
    let s = sorted(h0);
    let lo = quantile(&s, 0.001).max(f64::MIN_POSITIVE);
    let hi = quantile(&s, 0.999).max(lo);
    if hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..GRID_POINTS)
        .map(|i| (a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect()
}

/// ROC from samples already drawn; `nu_grid = None` uses [`default_threshold_grid`].
pub fn roc_from_samples(samples: &StatisticSamples, nu_grid: Option<&[f64]>, seed: u64) -> RocCurve {
    let nu: Vec<f64> = match nu_grid {
        Some(g) => g.to_vec(),
        None => default_threshold_grid(&samples.h0),
    };
    let (s0, s1) = (sorted(&samples.h0), sorted(&samples.h1));
    RocCurve {
        pfa: nu.iter().map(|&v| exceedance(&s0, v)).collect(),
        pd: nu.iter().map(|&v| exceedance(&s1, v)).collect(),
        nu,
        n_trials: samples.h0.len(),
        seed,
    }
}

pub fn simulate_roc(inst: &DetectionInstance, n_trials: usize, nu_grid: Option<&[f64]>, seed: u64) -> Result<RocCurve> {
    if n_trials == 0 {
        return Err(MrmcError::InvalidArgument("n_trials must be at least 1".into()));
    }
    let samples = sample_statistics(inst, n_trials, seed);
    Ok(roc_from_samples(&samples, nu_grid, seed))
}

/// Detection probability at a target false-alarm rate, thresholding at the
/// empirical `1 − pfa` quantile of the H0 samples.
pub fn pd_at_pfa(samples: &StatisticSamples, pfa: f64) -> f64 {
    let s0 = sorted(&samples.h0);
    let nu = quantile(&s0, 1.0 - pfa);
    exceedance(&sorted(&samples.h1), nu)
}

/// Baseline radar codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Uncoded,
    Random,
}

/// Uncoded `sqrt(P_r/K)·1` or, for `Random`, columns of a Haar unitary scaled
/// to `P_r` and PAR-projected.
pub fn baseline_codes(cfg: &SystemConfig, kind: CodeKind, seed: u64) -> CMat {
    match kind {
        CodeKind::Uncoded => crate::optimizer::init::uncoded_code(cfg),
        CodeKind::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z = crate::linalg::crandn(&mut rng, cfg.k, cfg.k);
            let qr = z.qr();
            let (q, r) = (qr.q(), qr.r());
            let mut code = CMat::zeros(cfg.k, cfg.m_r);
            for m in 0..cfg.m_r {
                // phase fix of the QR factor makes the draw Haar distributed
                let col = m % cfg.k;
                let d = r[(col, col)];
                let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
                let u = q.column(col) * ph;
                code.set_column(m, &(u * c(cfg.p_r[m].sqrt(), 0.0)));
            }
            par_project_code(&code, &cfg.p_r, &cfg.gamma)
        }
    }
}
