//! Mutual informations, MSE matrices, WMMSE receive filters and weights, rates
//! and the two scalar objectives (CWSM and weighted-sum MSE).
//!
//! All logarithms are natural. Radar quantities live on `range(L)`, the exact
//! support of the target covariance `Σ_t = L L†`; the KM × KM radar MSE is
//! singular off that subspace so its inverse and determinant are taken there.

use crate::error::{MrmcError, Result};
use crate::linalg::{c, hermitize, inv_hpd, logdet_hpd, range_basis, trace, CMat};
use crate::signal_model::{covariances, CovarianceBundle, Design, Model};

const RANGE_RTOL: f64 = 1e-10;

/// Linear receive filters: `u_r[n_r]` (KM × K), `u_u[i][k]` (Du × N_c), `u_d[j][k]` (Dd × Nd).
#[derive(Clone, Debug, PartialEq)]
pub struct FilterSet {
    pub u_r: Vec<CMat>,
    pub u_u: Vec<Vec<CMat>>,
    pub u_d: Vec<Vec<CMat>>,
}

/// Hermitian PSD MSE weights, shaped like the MSE matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSet {
    pub w_r: Vec<CMat>,
    pub w_u: Vec<Vec<CMat>>,
    pub w_d: Vec<Vec<CMat>>,
}

/// MSE matrices `E_r[n_r]` (KM × KM), `E_u[i][k]`, `E_d[j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MseSet {
    pub e_r: Vec<CMat>,
    pub e_u: Vec<Vec<CMat>>,
    pub e_d: Vec<Vec<CMat>>,
}

/// Achievable rates in nats: radar per receiver, UL `[i][k]`, DL `[j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates {
    pub r_r: Vec<f64>,
    pub r_u: Vec<Vec<f64>>,
    pub r_d: Vec<Vec<f64>>,
}

impl Rates {
    /// Weighted sum with the configured CWSM weights.
    pub fn weighted_sum(&self, model: &Model) -> f64 {
        let cfg = &model.cfg;
        let r: f64 = self.r_r.iter().zip(&cfg.alpha_r).map(|(r, a)| a * r).sum();
        let u: f64 = self.r_u.iter().zip(&cfg.alpha_u).map(|(r, a)| a * r.iter().sum::<f64>()).sum();
        let d: f64 = self.r_d.iter().zip(&cfg.alpha_d).map(|(r, a)| a * r.iter().sum::<f64>()).sum();
        r + u + d
    }
}

/// Weighted-sum MSE and its radar/UL/DL parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedMse {
    pub total: f64,
    pub ul: f64,
    pub dl: f64,
    pub radar: f64,
}

/// `log|I + U R_sig U† (U R_in U†)⁻¹|`, evaluated on the column space of `U`.
///
/// For a tall filter `U R_in U†` is rank deficient; restricting to
/// `range(U)` gives the same value as the determinant ratio on that subspace.
pub fn mutual_information(u: &CMat, r_sig: &CMat, r_in: &CMat) -> Result<f64> {
    let q = range_basis(u, RANGE_RTOL);
    if q.ncols() == 0 {
        return Ok(0.0);
    }
    let t = if q.ncols() == u.nrows() { u.clone() } else { q.adjoint() * u };
    let inner = hermitize(&(&t * r_in * t.adjoint()));
    let total = hermitize(&(&inner + &t * r_sig * t.adjoint()));
    let degenerate = |_| MrmcError::DegenerateFilter("U R_in U† is not invertible".into());
    let li = logdet_hpd(&inner).map_err(degenerate)?;
    let lt = logdet_hpd(&total).map_err(degenerate)?;
    Ok((lt - li).max(0.0))
}

/// Radar MI of one receiver.
pub fn radar_mi(u_r: &CMat, r_t: &CMat, r_in: &CMat) -> Result<f64> {
    mutual_information(u_r, r_t, r_in)
}

/// MI of one communication link.
pub fn comm_mi(u: &CMat, r_sig: &CMat, r_in: &CMat) -> Result<f64> {
    mutual_information(u, r_sig, r_in)
}

/// `I_CWSM = Σ α_r I_r + Σ_k Σ_i α_u I_u[k] + Σ_k Σ_j α_d I_d[k]`.
pub fn cwsm(model: &Model, filters: &FilterSet, bundle: &CovarianceBundle) -> Result<f64> {
    let cfg = &model.cfg;
    let mut total = 0.0;
    for (n, rc) in bundle.radar.iter().enumerate() {
        total += cfg.alpha_r[n] * radar_mi(&filters.u_r[n], &rc.r_t, &rc.r_in)?;
    }
    for (i, links) in bundle.ul.iter().enumerate() {
        for (k, cc) in links.iter().enumerate() {
            total += cfg.alpha_u[i] * comm_mi(&filters.u_u[i][k], &cc.sig, &cc.r_in)?;
        }
    }
    for (j, links) in bundle.dl.iter().enumerate() {
        for (k, cc) in links.iter().enumerate() {
            total += cfg.alpha_d[j] * comm_mi(&filters.u_d[j][k], &cc.sig, &cc.r_in)?;
        }
    }
    Ok(total)
}

/// `E = I − U H P − (U H P)† + U R U†` for a communication link.
pub fn comm_mse(u: &CMat, h: &CMat, p: &CMat, r_total: &CMat) -> CMat {
    let uhp = u * h * p;
    let d = uhp.nrows();
    hermitize(&(CMat::identity(d, d) - &uhp - uhp.adjoint() + u * r_total * u.adjoint()))
}

/// `E_r = Σ_t − U S_t Σ_t − Σ_t S_t† U† + U R_r U†` using `S_t Σ_t = G L†`.
pub fn radar_mse(model: &Model, n_r: usize, u: &CMat, bundle: &CovarianceBundle) -> CMat {
    let f = &model.factors[n_r];
    let l = f.l_est();
    let rc = &bundle.radar[n_r];
    let g = rc.g.columns(0, f.n_est);
    let cross = u * g * l.adjoint();
    let r_r = &rc.r_t + &rc.r_in;
    hermitize(&(&l * l.adjoint() - &cross - cross.adjoint() + u * r_r * u.adjoint()))
}

pub fn mse_matrices(model: &Model, design: &Design, filters: &FilterSet, bundle: &CovarianceBundle) -> MseSet {
    let (cfg, ch, pre) = (&model.cfg, &model.ch, &design.precoders);
    MseSet {
        e_r: (0..cfg.n_r).map(|n| radar_mse(model, n, &filters.u_r[n], bundle)).collect(),
        e_u: (0..cfg.num_ul)
            .map(|i| {
                (0..cfg.k)
                    .map(|k| comm_mse(&filters.u_u[i][k], &ch.h_ub[i], &pre.p_u[i][k], &bundle.ul[i][k].total))
                    .collect()
            })
            .collect(),
        e_d: (0..cfg.num_dl)
            .map(|j| {
                (0..cfg.k)
                    .map(|k| comm_mse(&filters.u_d[j][k], &ch.h_bd[j], &pre.p_d[j][k], &bundle.dl[j][k].total))
                    .collect()
            })
            .collect(),
    }
}

/// MMSE receive filters `U_r = Σ_t S_t† R_r⁻¹`, `U_u = P† H† R_u⁻¹`, `U_d = P† H† R_d⁻¹`.
pub fn wmmse_filters(model: &Model, design: &Design, bundle: &CovarianceBundle) -> Result<FilterSet> {
    let (cfg, ch, pre) = (&model.cfg, &model.ch, &design.precoders);
    let mut u_r = Vec::with_capacity(cfg.n_r);
    for (n, rc) in bundle.radar.iter().enumerate() {
        let f = &model.factors[n];
        let r_inv = inv_hpd(&(&rc.r_t + &rc.r_in))?;
        u_r.push(f.l_est() * rc.g.columns(0, f.n_est).adjoint() * r_inv);
    }
    let link = |h: &CMat, p: &CMat, r: &CMat| -> Result<CMat> {
        Ok(p.adjoint() * h.adjoint() * inv_hpd(r)?)
    };
    let u_u = (0..cfg.num_ul)
        .map(|i| (0..cfg.k).map(|k| link(&ch.h_ub[i], &pre.p_u[i][k], &bundle.ul[i][k].total)).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    let u_d = (0..cfg.num_dl)
        .map(|j| (0..cfg.k).map(|k| link(&ch.h_bd[j], &pre.p_d[j][k], &bundle.dl[j][k].total)).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    Ok(FilterSet { u_r, u_u, u_d })
}

/// `L⁺ = (L† L)⁻¹ L†`.
pub fn factor_pinv(l: &CMat) -> Result<CMat> {
    Ok(inv_hpd(&(l.adjoint() * l))? * l.adjoint())
}

/// Inverse of a radar MSE on `range(L)`: `W = L⁺† (L⁺ E L⁺†)⁻¹ L⁺`.
pub fn radar_weight(l: &CMat, e_r: &CMat) -> Result<CMat> {
    let lp = factor_pinv(l)?;
    let core = hermitize(&(&lp * e_r * lp.adjoint()));
    let inv = inv_hpd(&core).map_err(|_| MrmcError::Singular("radar MSE is singular on the target subspace".into()))?;
    Ok(hermitize(&(lp.adjoint() * inv * lp)))
}

/// `W* = (E*)⁻¹` (radar inverse taken on the target subspace).
pub fn optimal_weights(model: &Model, mse: &MseSet) -> Result<WeightSet> {
    let inv = |e: &CMat| inv_hpd(e).map_err(|_| MrmcError::Singular("MSE matrix is singular".into()));
    Ok(WeightSet {
        w_r: mse
            .e_r
            .iter()
            .enumerate()
            .map(|(n, e)| radar_weight(&model.factors[n].l_est(), e))
            .collect::<Result<_>>()?,
        w_u: mse.e_u.iter().map(|v| v.iter().map(inv).collect()).collect::<Result<_>>()?,
        w_d: mse.e_d.iter().map(|v| v.iter().map(inv).collect()).collect::<Result<_>>()?,
    })
}

fn comm_rate(sig: &CMat, r_in: &CMat) -> Result<f64> {
    Ok((logdet_hpd(&(r_in + sig))? - logdet_hpd(r_in)?).max(0.0))
}

/// `log|I + R_sig R_in⁻¹|` for every link. The radar form uses `log|I + G† R_in⁻¹ G|`.
pub fn achievable_rates(model: &Model, bundle: &CovarianceBundle) -> Result<Rates> {
    let r_r = bundle
        .radar
        .iter()
        .enumerate()
        .map(|(n, rc)| {
            let g = rc.g.columns(0, model.factors[n].n_est).into_owned();
            let x = g.adjoint() * inv_hpd(&rc.r_in)? * &g;
            let d = x.nrows();
            Ok(logdet_hpd(&hermitize(&(CMat::identity(d, d) + x)))?.max(0.0))
        })
        .collect::<Result<Vec<_>>>()?;
    let per = |links: &Vec<Vec<crate::signal_model::CommCov>>| -> Result<Vec<Vec<f64>>> {
        links
            .iter()
            .map(|v| v.iter().map(|cc| comm_rate(&cc.sig, &cc.r_in)).collect())
            .collect()
    };
    Ok(Rates { r_r, r_u: per(&bundle.ul)?, r_d: per(&bundle.dl)? })
}

/// Rates from MMSE matrices: `log|(E*)⁻¹|`, radar on the target subspace.
pub fn rates_from_mse(model: &Model, mse: &MseSet) -> Result<Rates> {
    let r_r = mse
        .e_r
        .iter()
        .enumerate()
        .map(|(n, e)| {
            let lp = factor_pinv(&model.factors[n].l_est())?;
            Ok(-logdet_hpd(&hermitize(&(&lp * e * lp.adjoint())))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let per = |v: &Vec<Vec<CMat>>| -> Result<Vec<Vec<f64>>> {
        v.iter().map(|x| x.iter().map(|e| Ok(-logdet_hpd(e)?)).collect()).collect()
    };
    Ok(Rates { r_r, r_u: per(&mse.e_u)?, r_d: per(&mse.e_d)? })
}

fn tr_we(w: &CMat, e: &CMat) -> f64 {
    trace(&(w * e)).re
}

/// `Ξ_wmse = Σ α tr{W E}` over all receivers and frames.
pub fn weighted_sum_mse(model: &Model, weights: &WeightSet, mse: &MseSet) -> WeightedMse {
    let cfg = &model.cfg;
    let radar = (0..cfg.n_r).map(|n| cfg.alpha_r[n] * tr_we(&weights.w_r[n], &mse.e_r[n])).sum();
    let sum = |w: &Vec<Vec<CMat>>, e: &Vec<Vec<CMat>>, a: &[f64]| -> f64 {
        w.iter()
            .zip(e)
            .zip(a)
            .map(|((ws, es), a)| a * ws.iter().zip(es).map(|(w, e)| tr_we(w, e)).sum::<f64>())
            .sum()
    };
    let ul = sum(&weights.w_u, &mse.e_u, &cfg.alpha_u);
    let dl = sum(&weights.w_d, &mse.e_d, &cfg.alpha_d);
    WeightedMse { total: radar + ul + dl, ul, dl, radar }
}

/// `Ξ_wmse` of `design` with filters and weights held fixed.
pub fn xi_wmse_at(model: &Model, filters: &FilterSet, weights: &WeightSet, design: &Design) -> f64 {
    let bundle = covariances(model, design);
    weighted_sum_mse(model, weights, &mse_matrices(model, design, filters, &bundle)).total
}

/// `Ξ'_wmse = Ξ_wmse − Σ α (log|W| + d)`; the radar term uses `log|L† W L| + r`,
/// the determinant of `W` on the target subspace together with `pdet Σ_t`.
///
/// At the MMSE filters and weights this equals `−I_CWSM`.
pub fn xi_prime(model: &Model, weights: &WeightSet, mse: &MseSet) -> Result<f64> {
    let cfg = &model.cfg;
    let mut xi = weighted_sum_mse(model, weights, mse).total;
    for n in 0..cfg.n_r {
        let l = model.factors[n].l_est();
        let core = hermitize(&(l.adjoint() * &weights.w_r[n] * &l));
        xi -= cfg.alpha_r[n] * (logdet_hpd(&core)? + l.ncols() as f64);
    }
    let sub = |w: &Vec<Vec<CMat>>, a: &[f64]| -> Result<f64> {
        let mut s = 0.0;
        for (ws, a) in w.iter().zip(a) {
            for wk in ws {
                s += a * (logdet_hpd(wk)? + wk.nrows() as f64);
            }
        }
        Ok(s)
    };
    xi -= sub(&weights.w_u, &cfg.alpha_u)?;
    xi -= sub(&weights.w_d, &cfg.alpha_d)?;
    Ok(xi)
}

/// Everything evaluated at the MMSE receivers for one design.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub bundle: CovarianceBundle,
    pub filters: FilterSet,
    pub mse: MseSet,
    pub weights: WeightSet,
    pub rates: Rates,
    pub cwsm: f64,
}

/// Covariances, MMSE filters, MSEs, optimal weights, rates and CWSM of `design`.
pub fn evaluate(model: &Model, design: &Design) -> Result<Evaluation> {
    let bundle = covariances(model, design);
    let filters = wmmse_filters(model, design, &bundle)?;
    let mse = mse_matrices(model, design, &filters, &bundle);
    let weights = optimal_weights(model, &mse)?;
    let rates = achievable_rates(model, &bundle)?;
    let cwsm = rates.weighted_sum(model);
    Ok(Evaluation { bundle, filters, mse, weights, rates, cwsm })
}

/// CWSM at the MMSE receivers, i.e. the weighted sum of achievable rates.
pub fn optimal_cwsm(model: &Model, design: &Design) -> Result<f64> {
    Ok(achievable_rates(model, &covariances(model, design))?.weighted_sum(model))
}

/// `W = I` in every slot, shaped for `model`.
pub fn identity_weights(model: &Model) -> WeightSet {
    let cfg = &model.cfg;
    let km = cfg.k * cfg.m_total();
    WeightSet {
        w_r: vec![CMat::identity(km, km); cfg.n_r],
        w_u: (0..cfg.num_ul).map(|i| vec![CMat::identity(cfg.du[i], cfg.du[i]); cfg.k]).collect(),
        w_d: (0..cfg.num_dl).map(|j| vec![CMat::identity(cfg.dd[j], cfg.dd[j]); cfg.k]).collect(),
    }
}

impl WeightSet {
    pub fn scaled(&self, s: f64) -> Self {
        let f = |v: &Vec<Vec<CMat>>| v.iter().map(|r| r.iter().map(|m| m * c(s, 0.0)).collect()).collect();
        Self {
            w_r: self.w_r.iter().map(|m| m * c(s, 0.0)).collect(),
            w_u: f(&self.w_u),
            w_d: f(&self.w_d),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::crandn;
    use crate::scenario::SystemConfig;
    use crate::signal_model::Design;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn design(model: &Model, seed: u64) -> Design {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = &model.cfg;
        let mut d = Design::zeros(cfg);
        d.code = crandn(&mut rng, cfg.k, cfg.m_r).scale(0.04);
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

    #[test]
    fn scalar_mi() {
        let one = CMat::identity(1, 1);
        let s = &one * c(3.0, 0.0);
        let n = &one * c(0.5, 0.0);
        assert!((mutual_information(&one, &s, &n).unwrap() - (1.0f64 + 6.0).ln()).abs() < 1e-12);
        assert_eq!(mutual_information(&one, &(&one * c(0.0, 0.0)), &n).unwrap(), 0.0);
    }

    #[test]
    fn cwsm_equals_negative_xi_prime() {
        for seed in 0..3 {
            let model = Model::generate(&SystemConfig::reference_defaults(), seed).unwrap();
            let d = design(&model, seed + 10);
            let ev = evaluate(&model, &d).unwrap();
            let at_filters = cwsm(&model, &ev.filters, &ev.bundle).unwrap();
            assert!((at_filters - ev.cwsm).abs() < 1e-9 * ev.cwsm.max(1.0), "{at_filters} {}", ev.cwsm);
            let xp = xi_prime(&model, &ev.weights, &ev.mse).unwrap();
            assert!((xp + ev.cwsm).abs() < 1e-9 * ev.cwsm.max(1.0), "{xp} {}", ev.cwsm);
        }
    }

    #[test]
    fn dual_rate_forms_agree() {
        let model = Model::generate(&SystemConfig::reference_defaults(), 5).unwrap();
        let d = design(&model, 6);
        let ev = evaluate(&model, &d).unwrap();
        let other = rates_from_mse(&model, &ev.mse).unwrap();
        for (a, b) in ev.rates.r_r.iter().zip(&other.r_r) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in ev.rates.r_u.iter().flatten().zip(other.r_u.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
        for (a, b) in ev.rates.r_d.iter().flatten().zip(other.r_d.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_design_has_zero_cwsm() {
        let model = Model::generate(&SystemConfig::reference_defaults(), 1).unwrap();
        let d = Design::zeros(&model.cfg);
        assert_eq!(optimal_cwsm(&model, &d).unwrap(), 0.0);
    }
}
