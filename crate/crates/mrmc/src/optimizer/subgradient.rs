//! Projected subgradient on the Lagrange dual of one precoder block.

use std::f64::consts::LN_2;

use crate::error::Result;
use crate::linalg::{c, hermitize, logdet_hpd, CMat};
use crate::optimizer::gradients::{
    get_block, linearized_rate_gradients, set_block, Block, BlockQuadratic, RateGradients,
};
use crate::optimizer::sylvester::SylvesterSystem;
use crate::signal_model::{build_downlink_cov, build_uplink_cov, Design, Model};

/// Lagrange multipliers: powers `λ_u[i][k]`, `λ_d[k]`; rates `μ_u[i][k]`, `μ_d[j][k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    pub lambda_u: Vec<Vec<f64>>,
    pub lambda_d: Vec<f64>,
    pub mu_u: Vec<Vec<f64>>,
    pub mu_d: Vec<Vec<f64>>,
}

impl DualState {
    /// Every multiplier at `value`.
    pub fn filled(num_ul: usize, num_dl: usize, k: usize, value: f64) -> Self {
        Self {
            lambda_u: vec![vec![value; k]; num_ul],
            lambda_d: vec![value; k],
            mu_u: vec![vec![value; k]; num_ul],
            mu_d: vec![vec![value; k]; num_dl],
        }
    }

    pub fn mu_frame(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        (
            self.mu_u.iter().map(|v| v[k]).collect(),
            self.mu_d.iter().map(|v| v[k]).collect(),
        )
    }

    pub fn all_nonnegative(&self) -> bool {
        self.lambda_u.iter().flatten().chain(&self.lambda_d).chain(self.mu_u.iter().flatten()).chain(self.mu_d.iter().flatten()).all(|&v| v >= 0.0)
    }
}

/// Polyak step `(Ξ_t − Ξ_min + 0.1^t)/violation²` for iteration `t ≥ 1`;
/// zero when the violation is below `1e-15`.
pub fn polyak_step(xi_t: f64, xi_min: f64, t: usize, violation: f64) -> f64 {
    if violation.abs() < 1e-15 {
        return 0.0;
    }
    (xi_t - xi_min + 0.1f64.powi(t as i32)) / (violation * violation)
}

/// Result of one subgradient run.
#[derive(Clone, Debug)]
pub struct SubgradientOutcome {
    pub x_best: CMat,
    pub xi_start: f64,
    pub xi_best: f64,
    /// Multipliers of the best iterate.
    pub lambda: f64,
    pub mu: f64,
    /// Multipliers after the last update; these are stored in the [`DualState`].
    pub final_lambda: f64,
    pub final_mu: f64,
    pub max_residual: f64,
    pub solves: usize,
    pub history: Vec<SubgradientStep>,
}

/// One subgradient iteration: multipliers used, then the resulting iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubgradientStep {
    pub lambda: f64,
    pub mu: f64,
    pub power: f64,
    pub rate: f64,
    pub xi: f64,
}

/// Constraint data of a precoder block.
struct Constraints {
    p_max: f64,
    /// Power of the other blocks sharing the budget.
    p_other: f64,
    r_min: f64,
    h: CMat,
    r_in: CMat,
    logdet_in: f64,
}

impl Constraints {
    fn new(model: &Model, design: &Design, block: Block) -> Result<Self> {
        let cfg = &model.cfg;
        let (p_max, p_other, r_min, h, r_in) = match block {
            Block::Ul { i, k } => {
                let (_, r_in, _) = build_uplink_cov(model, design, i, k);
                (cfg.p_u, 0.0, cfg.r_ul * LN_2, model.ch.h_ub[i].clone(), r_in)
            }
            Block::Dl { j, k } => {
                let other = (0..cfg.num_dl)
                    .filter(|&g| g != j)
                    .map(|g| design.precoders.p_d[g][k].norm_squared())
                    .sum();
                let (_, r_in, _) = build_downlink_cov(model, design, j, k);
                (cfg.p_b, other, cfg.r_dl * LN_2, model.ch.h_bd[j].clone(), r_in)
            }
            Block::Code { .. } => unreachable!("the code block has no subgradient run"),
        };
        let logdet_in = logdet_hpd(&r_in)?;
        Ok(Self { p_max, p_other, r_min, h, r_in, logdet_in })
    }

    fn power(&self, x: &CMat) -> f64 {
        self.p_other + x.norm_squared()
    }

    fn rate(&self, x: &CMat) -> Result<f64> {
        let hx = &self.h * x;
        Ok(logdet_hpd(&hermitize(&(&self.r_in + &hx * hx.adjoint())))? - self.logdet_in)
    }

    /// Any `λ ≥ ‖C‖/sqrt(P_max − P_other)` already satisfies the power
    /// budget because the quadratic operator is PSD, so the dual optimum lies below it.
    fn lambda_cap(&self, rhs: &CMat) -> f64 {
        let avail = self.p_max - self.p_other;
        if avail <= 0.0 {
            return f64::INFINITY;
        }
        rhs.norm() / avail.sqrt()
    }

    fn power_ok(&self, x: &CMat) -> bool {
        self.power(x) <= self.p_max * (1.0 + 1e-9)
    }
}

fn own_index(block: Block) -> (bool, usize) {
    match block {
        Block::Ul { i, .. } => (true, i),
        Block::Dl { j, .. } => (false, j),
        Block::Code { .. } => unreachable!(),
    }
}

fn weighted_mu(rg: &RateGradients, dual: &DualState, block: Block, own_mu: f64) -> CMat {
    let (mut mu_u, mut mu_d) = dual.mu_frame(block.frame());
    let (is_ul, idx) = own_index(block);
    if is_ul {
        mu_u[idx] = own_mu;
    } else {
        mu_d[idx] = own_mu;
    }
    rg.weighted(&mu_u, &mu_d)
}

/// Run `t_max` subgradient iterations on one UL or DL precoder and write the
/// best power-feasible iterate (lowest `Ξ_wmse`) back into `design`.
///
/// The block's own multipliers are warm-started from `dual` and their final
/// values are written back; other users' rate multipliers are read from
/// `dual`. The Taylor anchor of the rate constraints is the best iterate so far.
pub fn subgradient_block(
    model: &Model,
    quad: &BlockQuadratic,
    design: &mut Design,
    dual: &mut DualState,
    t_max: usize,
) -> Result<SubgradientOutcome> {
    let block = quad.block;
    let cons = Constraints::new(model, design, block)?;
    let x0 = get_block(design, block);
    let xi_start = quad.value(&x0);
    let (mut lambda, mut mu) = match block {
        Block::Ul { i, k } => (dual.lambda_u[i][k], dual.mu_u[i][k]),
        Block::Dl { j, k } => (dual.lambda_d[k], dual.mu_d[j][k]),
        Block::Code { .. } => unreachable!(),
    };
    let (mut best_lambda, mut best_mu) = (lambda, mu);
    let mut best = x0.clone();
    let mut xi_best = if cons.power_ok(&x0) { xi_start } else { f64::INFINITY };
    let mut xi_min = xi_start;
    let mut anchor_grads = linearized_rate_gradients(model, design, block)?;
    let mut anchor_dirty = false;
    let mut scratch = design.clone();
    let mut max_residual: f64 = 0.0;
    let mut solves = 0;
    let mut history = Vec::with_capacity(t_max);

    for t in 1..=t_max {
        if anchor_dirty {
            set_block(&mut scratch, block, &best);
            anchor_grads = linearized_rate_gradients(model, &scratch, block)?;
            anchor_dirty = false;
        }
        let n = quad.system.a.nrows();
        let rhs = &quad.system.c + weighted_mu(&anchor_grads, dual, block, mu);
        lambda = lambda.min(cons.lambda_cap(&rhs));
        let sys = SylvesterSystem::new(
            &quad.system.a + CMat::identity(n, n) * c(lambda, 0.0),
            quad.system.terms.clone(),
            rhs,
        );
        let (x, res) = sys.solve()?;
        max_residual = max_residual.max(res);
        solves += 1;

        let p = cons.power(&x);
        let r = cons.rate(&x)?;
        let xi_t = quad.value(&x);
        history.push(SubgradientStep { lambda, mu, power: p, rate: r, xi: xi_t });
        if xi_t < xi_best && cons.power_ok(&x) {
            xi_best = xi_t;
            best = x;
            best_lambda = lambda;
            best_mu = mu;
            anchor_dirty = true;
        }
        xi_min = xi_min.min(xi_t);
        // Polyak gap: the larger of best feasible value minus the block
        // Lagrangian and current minus lowest iterate value.
        let lagrangian = xi_t + lambda * (p - cons.p_max) + mu * (cons.r_min - r);
        let dual_gap = if xi_best.is_finite() { xi_best - lagrangian } else { f64::NEG_INFINITY };
        let (upper, lower) = if dual_gap > xi_t - xi_min { (xi_best, lagrangian) } else { (xi_t, xi_min) };
        let beta = polyak_step(upper, lower, t, p - cons.p_max);
        lambda = (lambda + beta * (p - cons.p_max)).max(0.0);
        let eps = polyak_step(upper, lower, t, r - cons.r_min);
        mu = (mu + eps * (cons.r_min - r)).max(0.0);
    }

    set_block(design, block, &best);
    let k = block.frame();
    match block {
        Block::Ul { i, .. } => {
            dual.lambda_u[i][k] = lambda;
            dual.mu_u[i][k] = mu;
        }
        Block::Dl { j, .. } => {
            dual.lambda_d[k] = lambda;
            dual.mu_d[j][k] = mu;
        }
        Block::Code { .. } => {}
    }
    Ok(SubgradientOutcome { x_best: best, xi_start, xi_best, lambda: best_lambda, mu: best_mu, final_lambda: lambda, final_mu: mu, max_residual, solves, history })
}

/// Code update `(A_r + F_r) a = c_r` with the stored rate multipliers.
///
/// If the multiplier-weighted solution would increase `Ξ_wmse`, the plain
/// minimizer (all `μ = 0`) is used instead, so the update never increases it.
/// Returns the new block, the largest residual and whether the weighted solution was kept.
pub fn code_update(model: &Model, quad: &BlockQuadratic, design: &mut Design, dual: &DualState) -> Result<(CMat, f64, bool)> {
    let block = quad.block;
    let (mu_u, mu_d) = dual.mu_frame(block.frame());
    let rg = linearized_rate_gradients(model, design, block)?;
    let sys = SylvesterSystem::new(quad.system.a.clone(), Vec::new(), &quad.system.c + rg.weighted(&mu_u, &mu_d));
    let (a, res) = sys.solve()?;
    let cur = get_block(design, block);
    let v_cur = quad.value(&cur);
    if quad.value(&a) <= v_cur {
        set_block(design, block, &a);
        return Ok((a, res, true));
    }
    let (plain, res2) = quad.system.solve()?;
    let out = if quad.value(&plain) <= v_cur { plain } else { cur };
    set_block(design, block, &out);
    Ok((out, res.max(res2), false))
}
