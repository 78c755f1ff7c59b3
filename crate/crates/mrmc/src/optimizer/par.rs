//! Nearest vector with prescribed energy and bounded peak-to-average ratio.

use crate::linalg::{c, CMat, CVec};

/// Closest `a` to `z` with `‖a‖² = p_r` and `K·max|a_k|²/p_r ≤ gamma`.
///
/// Entries are `min(δ, s|z_k|)` with their phases kept, `δ = sqrt(γ p_r/K)`.
/// The largest entries are clipped first; among equal magnitudes the lower
/// index counts as smaller. Energy left for all-zero entries is spread evenly.
pub fn par_project(z: &CVec, p_r: f64, gamma: f64) -> CVec {
    let k = z.len();
    let delta = (gamma / k as f64).sqrt();
    if gamma <= 1.0 {
        return z.map(|v| unit_phase(v) * delta) * c(p_r.sqrt(), 0.0);
    }
    let mags: Vec<f64> = z.iter().map(|v| v.norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(b.cmp(&a)));

    let mut out = CVec::zeros(k);
    let mut rest_energy: f64 = mags.iter().map(|m| m * m).sum();
    for clipped in 0..=k {
        let budget = (1.0 - clipped as f64 * delta * delta).max(0.0);
        if clipped == k {
            for &i in &order {
                out[i] = unit_phase(z[i]) * delta;
            }
            break;
        }
        let head = order[clipped];
        if rest_energy <= 0.0 {
            let level = (budget / (k - clipped) as f64).sqrt();
            for (pos, &i) in order.iter().enumerate() {
                out[i] = if pos < clipped { unit_phase(z[i]) * delta } else { unit_phase(z[i]) * level };
            }
            break;
        }
        let scale = (budget / rest_energy).sqrt();
        if scale * mags[head] <= delta {
            for (pos, &i) in order.iter().enumerate() {
                out[i] = if pos < clipped { unit_phase(z[i]) * delta } else { z[i] * scale };
            }
            break;
        }
        rest_energy -= mags[head] * mags[head];
        if rest_energy < 1e-300 {
            rest_energy = 0.0;
        }
    }
    out * c(p_r.sqrt(), 0.0)
}

fn unit_phase(z: crate::linalg::C64) -> crate::linalg::C64 {
    let m = z.norm();
    if m > 0.0 {
        z / m
    } else {
        c(1.0, 0.0)
    }
}

/// Apply [`par_project`] to every column.
pub fn par_project_code(code: &CMat, p_r: &[f64], gamma: &[f64]) -> CMat {
    let mut out = code.clone();
    for m in 0..code.ncols() {
        let col: CVec = code.column(m).into();
        out.set_column(m, &par_project(&col, p_r[m], gamma[m]));
    }
    out
}
