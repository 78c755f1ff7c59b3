//! WMMSE-MRMC passes and the outer BCD-AP loop.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::Result;
use crate::objective::{evaluate, optimal_cwsm, weighted_sum_mse, xi_wmse_at, Evaluation, FilterSet, WeightSet};
use crate::optimizer::gradients::{Block, BlockQuadratic, WmmseContext};
use crate::optimizer::par::par_project_code;
use crate::optimizer::subgradient::{code_update, subgradient_block, DualState};
use crate::signal_model::{code_feasible, transmit_powers, Design, Model};

/// Iteration caps and which blocks are optimized.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BcdOptions {
    pub t_u_max: usize,
    pub t_d_max: usize,
    pub iota_max: usize,
    pub ell_max: usize,
    pub optimize_ul: bool,
    pub optimize_dl: bool,
    pub optimize_code: bool,
    /// Relative CWSM change below which an iteration counts as stalled.
    pub tol: f64,
    /// Consecutive stalled iterations that declare convergence.
    pub patience: usize,
    /// Never let the post-projection CWSM decrease (see [`StepKind`]).
    pub monotone: bool,
}

impl BcdOptions {
    pub fn from_config(cfg: &crate::scenario::SystemConfig) -> Self {
        Self {
            t_u_max: cfg.t_u_max,
            t_d_max: cfg.t_d_max,
            iota_max: cfg.iota_max,
            ell_max: cfg.ell_max,
            optimize_ul: true,
            optimize_dl: true,
            optimize_code: true,
            tol: 1e-6,
            patience: 5,
            monotone: true,
        }
    }
}

/// Per-pass bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct PassReport {
    pub xi_start: f64,
    pub xi_end: f64,
    /// Largest increase of `Ξ_wmse` over any single block update.
    pub max_step_increase: f64,
    pub max_residual: f64,
    pub solves: usize,
    pub code_accepted: usize,
    pub code_rejected: usize,
}

/// One WMMSE-MRMC pass with filters and weights fixed: for each frame, UL and
/// DL subgradient runs followed by the code update, repeated `iota_max` times.
pub fn wmmse_mrmc_pass(
    model: &Model,
    filters: &FilterSet,
    weights: &WeightSet,
    design: &mut Design,
    dual: &mut DualState,
    opts: &BcdOptions,
) -> Result<PassReport> {
    let cfg = &model.cfg;
    let ctx = WmmseContext::new(model, filters, weights);
    let mut rep = PassReport {
        xi_start: xi_wmse_at(model, filters, weights, design),
        ..Default::default()
    };
    let note = |rep: &mut PassReport, before: f64, after: f64| {
        rep.max_step_increase = rep.max_step_increase.max(after - before);
    };
    for _ in 0..opts.iota_max {
        for k in 0..cfg.k {
            if opts.optimize_ul {
                for i in 0..cfg.num_ul {
                    let q = BlockQuadratic::new(model, &ctx, design, Block::Ul { i, k });
                    let out = subgradient_block(model, &q, design, dual, opts.t_u_max)?;
                    note(&mut rep, out.xi_start, out.xi_best);
                    rep.max_residual = rep.max_residual.max(out.max_residual);
                    rep.solves += out.solves;
                }
            }
            if opts.optimize_dl {
                for j in 0..cfg.num_dl {
                    let q = BlockQuadratic::new(model, &ctx, design, Block::Dl { j, k });
                    let out = subgradient_block(model, &q, design, dual, opts.t_d_max)?;
                    note(&mut rep, out.xi_start, out.xi_best);
                    rep.max_residual = rep.max_residual.max(out.max_residual);
                    rep.solves += out.solves;
                }
            }
            if opts.optimize_code {
                let q = BlockQuadratic::new(model, &ctx, design, Block::Code { k });
                let (_, res, accepted) = code_update(model, &q, design, dual)?;
                rep.max_residual = rep.max_residual.max(res);
                rep.solves += 1;
                if accepted {
                    rep.code_accepted += 1;
                } else {
                    rep.code_rejected += 1;
                }
            }
        }
    }
    rep.xi_end = xi_wmse_at(model, filters, weights, design);
    Ok(rep)
}

/// One outer-iteration record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub ell: usize,
    /// CWSM after the PAR projection and filter refresh.
    pub cwsm_nats: f64,
    /// CWSM at the MMSE filters before the PAR projection.
    pub cwsm_pre: f64,
    /// `Ξ_wmse` at the refreshed filters and weights.
    pub xi_wmmse: f64,
    pub xi_pass_start: f64,
    pub xi_pass_end: f64,
    pub max_step_increase: f64,
    pub max_power_violation: f64,
    /// Smallest rate margin over the QoS floors, bits.
    pub min_rate_margin: f64,
    pub par_feasible: bool,
    pub max_sylvester_residual: f64,
    pub step: StepKind,
}

/// What happened to the iterate at the end of an outer iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Pass result with the projected code.
    Accepted,
    /// New precoders with the previous (feasible) code.
    KeptCode,
    /// Both candidates lowered the CWSM; the previous iterate was kept.
    Reverted,
}

/// Output of [`bcd_ap`].
#[derive(Clone, Debug)]
pub struct BcdResult {
    pub design: Design,
    pub evaluation: Evaluation,
    pub dual: DualState,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

/// Relative power excess and rate margin (bits) of a design.
pub fn constraint_audit(model: &Model, ev: &Evaluation, design: &Design) -> (f64, f64) {
    let cfg = &model.cfg;
    let mut viol: f64 = 0.0;
    for k in 0..cfg.k {
        let (pd, pu) = transmit_powers(&design.precoders, k);
        viol = viol.max((pd - cfg.p_b) / cfg.p_b);
        for p in pu {
            viol = viol.max((p - cfg.p_u) / cfg.p_u);
        }
    }
    let mut margin = f64::INFINITY;
    for r in ev.rates.r_u.iter().flatten() {
        margin = margin.min(r / LN_2 - cfg.r_ul);
    }
    for r in ev.rates.r_d.iter().flatten() {
        margin = margin.min(r / LN_2 - cfg.r_dl);
    }
    (viol.max(0.0), margin)
}

/// BCD-AP: WMMSE-MRMC pass, PAR projection of every code column, filter and
/// weight refresh. With `monotone` set, an iterate whose post-projection CWSM
/// falls below the previous one is replaced by the pass precoders with the
/// previous code, or by the previous iterate. Stops when the relative CWSM change stays below `tol` for
/// `patience` consecutive iterations or at `ell_max`.
pub fn bcd_ap(model: &Model, initial: Design, opts: &BcdOptions) -> Result<BcdResult> {
    let cfg = &model.cfg;
    let mut design = initial;
    let mut ev = evaluate(model, &design)?;
    let mut dual = DualState::filled(cfg.num_ul, cfg.num_dl, cfg.k, 1.0);
    let mut trace = Vec::with_capacity(opts.ell_max);
    let mut stalled = 0;
    let mut converged = false;
    for ell in 1..=opts.ell_max {
        let previous = design.clone();
        let rep = wmmse_mrmc_pass(model, &ev.filters, &ev.weights, &mut design, &mut dual, opts)?;
        let cwsm_pre = optimal_cwsm(model, &design)?;
        if opts.optimize_code {
            design.code = par_project_code(&design.code, &cfg.p_r, &cfg.gamma);
        }
        let prev = ev.cwsm;
        let mut step = StepKind::Accepted;
        let mut next = evaluate(model, &design)?;
        if opts.monotone && next.cwsm < prev {
            let mut keep_code = design.clone();
            keep_code.code = previous.code.clone();
            let alt = evaluate(model, &keep_code)?;
            if alt.cwsm >= prev {
                design = keep_code;
                next = alt;
                step = StepKind::KeptCode;
            } else {
                design = previous;
                next = ev.clone();
                step = StepKind::Reverted;
            }
        }
        ev = next;
        let xi = weighted_sum_mse(model, &ev.weights, &ev.mse).total;
        let (viol, margin) = constraint_audit(model, &ev, &design);
        trace.push(TraceRow {
            ell,
            cwsm_nats: ev.cwsm,
            cwsm_pre,
            xi_wmmse: xi,
            xi_pass_start: rep.xi_start,
            xi_pass_end: rep.xi_end,
            max_step_increase: rep.max_step_increase,
            max_power_violation: viol,
            min_rate_margin: margin,
            par_feasible: code_feasible(&design.code, &cfg.p_r, &cfg.gamma),
            max_sylvester_residual: rep.max_residual,
            step,
        });
        let rel = (ev.cwsm - prev).abs() / prev.abs().max(1e-12);
        stalled = if rel < opts.tol { stalled + 1 } else { 0 };
        if stalled >= opts.patience {
            converged = true;
            break;
        }
    }
    Ok(BcdResult { design, evaluation: ev, dual, trace, converged })
}
