//! Weighted-sum MSE gradients, their quadratic (Sylvester) structure and the
//! linearized QoS-rate gradients.
//!
//! Gradients follow `∂f/∂X*`, so `df = 2 Re tr(∇† dX)`. With filters and
//! weights fixed, `Ξ_wmse` is a convex quadratic in every design block `X`:
//! `Ξ(X) = Re tr(X† H(X)) − 2 Re tr(C₀† X) + const`, where
//! `H(X) = A X + Σ F X B` and `∇Ξ = H(X) − C₀`.

use std::f64::consts::PI;

use crate::linalg::{c, cis, hermitize, inv_hpd, CMat, CVec, C64};
use crate::error::Result;
use crate::objective::{FilterSet, WeightSet};
use crate::optimizer::sylvester::SylvesterSystem;
use crate::signal_model::{
    downlink_covariances, s_bm, s_t, uplink_covariances, x_ul, Design, Model,
};

/// One design block.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// `P_u[i][k]`
    Ul { i: usize, k: usize },
    /// `P_d[j][k]`
    Dl { j: usize, k: usize },
    /// `a[k]`, stored as an `M_r × 1` matrix.
    Code { k: usize },
}

impl Block {
    pub fn frame(&self) -> usize {
        match *self {
            Block::Ul { k, .. } | Block::Dl { k, .. } | Block::Code { k } => k,
        }
    }
}

pub fn get_block(design: &Design, block: Block) -> CMat {
    match block {
        Block::Ul { i, k } => design.precoders.p_u[i][k].clone(),
        Block::Dl { j, k } => design.precoders.p_d[j][k].clone(),
        Block::Code { k } => CMat::from_column_slice(design.code.ncols(), 1, design.a(k).as_slice()),
    }
}

pub fn set_block(design: &mut Design, block: Block, x: &CMat) {
    match block {
        Block::Ul { i, k } => design.precoders.p_u[i][k] = x.clone(),
        Block::Dl { j, k } => design.precoders.p_d[j][k] = x.clone(),
        Block::Code { k } => design.set_a(k, &x.column(0).into_owned()),
    }
}

/// Filter/weight products that stay fixed while the design changes.
#[derive(Clone, Debug)]
pub struct WmmseContext {
    /// `Σ_i α_i U_i† W_i U_i` per frame (N_c × N_c).
    pub xi_ul: Vec<CMat>,
    /// `α_j U_j† W_j U_j`, `[j][k]`.
    pub xi_dl: Vec<Vec<CMat>>,
    /// `α_i H_iB† U_i† W_i`, `[i][k]`.
    pub lin_ul: Vec<Vec<CMat>>,
    /// `α_j H_Bj† U_j† W_j`, `[j][k]`.
    pub lin_dl: Vec<Vec<CMat>>,
    /// `Ψ = α_r U_r† W_r U_r` (K × K) per radar receiver.
    pub psi: Vec<CMat>,
    /// `α_r L† W_r U_r` (n_est × K) per radar receiver.
    pub ylin: Vec<CMat>,
}

impl WmmseContext {
    pub fn new(model: &Model, filters: &FilterSet, weights: &WeightSet) -> Self {
        let (cfg, ch) = (&model.cfg, &model.ch);
        let quad = |u: &CMat, w: &CMat, a: f64| hermitize(&(u.adjoint() * w * u * c(a, 0.0)));
        let xi_ul = (0..cfg.k)
            .map(|k| {
                let mut s = CMat::zeros(cfg.n_c, cfg.n_c);
                for i in 0..cfg.num_ul {
                    s += quad(&filters.u_u[i][k], &weights.w_u[i][k], cfg.alpha_u[i]);
                }
                s
            })
            .collect();
        let xi_dl = (0..cfg.num_dl)
            .map(|j| (0..cfg.k).map(|k| quad(&filters.u_d[j][k], &weights.w_d[j][k], cfg.alpha_d[j])).collect())
            .collect();
        let lin_ul = (0..cfg.num_ul)
            .map(|i| {
                (0..cfg.k)
                    .map(|k| ch.h_ub[i].adjoint() * filters.u_u[i][k].adjoint() * &weights.w_u[i][k] * c(cfg.alpha_u[i], 0.0))
                    .collect()
            })
            .collect();
        let lin_dl = (0..cfg.num_dl)
            .map(|j| {
                (0..cfg.k)
                    .map(|k| ch.h_bd[j].adjoint() * filters.u_d[j][k].adjoint() * &weights.w_d[j][k] * c(cfg.alpha_d[j], 0.0))
                    .collect()
            })
            .collect();
        let psi = (0..cfg.n_r)
            .map(|n| quad(&filters.u_r[n], &weights.w_r[n], cfg.alpha_r[n]))
            .collect();
        let ylin = (0..cfg.n_r)
            .map(|n| model.factors[n].l_est().adjoint() * &weights.w_r[n] * &filters.u_r[n] * c(cfg.alpha_r[n], 0.0))
            .collect();
        Self { xi_ul, xi_dl, lin_ul, lin_dl, psi, ylin }
    }
}

fn omega(f: f64, k: usize) -> C64 {
    cis(2.0 * PI * k as f64 * f)
}

/// `η² Σ_m conj(ω^k) ω^m Ψ(k,m) x[m]` over `m ≠ k` (or all `m`).
fn direct_path_sum(psi: &CMat, eta2: f64, f: f64, xs: &[CVec], k: usize, skip_self: bool) -> CVec {
    let mut out = CVec::zeros(xs[0].len());
    let wk = omega(f, k).conj();
    for (m, x) in xs.iter().enumerate() {
        if skip_self && m == k {
            continue;
        }
        out += x * (wk * omega(f, m) * psi[(k, m)] * eta2);
    }
    out
}

fn all_g(model: &Model, design: &Design) -> Vec<CMat> {
    let s: Vec<CVec> = (0..model.cfg.k).map(|k| s_t(model, design, k)).collect();
    model.factors.iter().map(|f| f.g_matrix(&s)).collect()
}

/// Radar-side gradient with respect to the full `s_t[k]` (M entries).
fn radar_grad_st(model: &Model, ctx: &WmmseContext, g_full: &[CMat], k: usize) -> CVec {
    let m = model.cfg.m_total();
    let mut out = CVec::zeros(m);
    for (n, f) in model.factors.iter().enumerate() {
        let lk = &f.blocks[k];
        let pg = ctx.psi[n].row(k) * &g_full[n];
        out += lk.map(|z| z.conj()) * pg.transpose();
        let y = lk.columns(0, f.n_est) * ctx.ylin[n].column(k);
        out -= y.map(|z| z.conj());
    }
    out
}

/// `∇Ξ_wmse` with respect to one block, `∂Ξ/∂X*`.
pub fn gradient(model: &Model, ctx: &WmmseContext, design: &Design, block: Block) -> CMat {
    let (cfg, ch, pre) = (&model.cfg, &model.ch, &design.precoders);
    let x = get_block(design, block);
    let hq = comm_hessian(model, ctx, block);
    let mut g = &hq * &x;
    match block {
        Block::Ul { i, k } => {
            g -= &ctx.lin_ul[i][k];
            let xs: Vec<CVec> = (0..cfg.k).map(|m| x_ul(model, pre, i, m)).collect();
            let d = &ch.d_u[i][k][cfg.l_ul()];
            for (n, link) in ch.radar.iter().enumerate() {
                let v = direct_path_sum(&ctx.psi[n], link.eta2_ul[i], link.f_ul[i], &xs, k, false);
                g += v * d.adjoint();
            }
        }
        Block::Dl { j, k } => {
            g -= &ctx.lin_dl[j][k];
            let gf = all_g(model, design);
            let st = radar_grad_st(model, ctx, &gf, k);
            let d0 = &ch.d_d[j][k][cfg.l_bt()];
            g += st.rows(cfg.m_r, cfg.m_c) * d0.adjoint();
            let bm: Vec<CVec> = (0..cfg.k).map(|m| s_bm(model, pre, m)).collect();
            let dbm = &ch.d_d[j][k][cfg.l_bm()];
            for (n, link) in ch.radar.iter().enumerate() {
                let v = direct_path_sum(&ctx.psi[n], link.eta2_bm, link.f_bm, &bm, k, false);
                g += v * dbm.adjoint();
            }
        }
        Block::Code { k } => {
            let gf = all_g(model, design);
            let st = radar_grad_st(model, ctx, &gf, k);
            g += st.rows(0, cfg.m_r);
            for (n, link) in ch.radar.iter().enumerate() {
                let pa = ctx.psi[n].row(k) * &design.code;
                g += link.sigma_c.transpose() * pa.transpose();
            }
        }
    }
    g
}

/// Communication-side quadratic coefficient of a block (the `A` of its Sylvester system).
fn comm_hessian(model: &Model, ctx: &WmmseContext, block: Block) -> CMat {
    let (cfg, ch) = (&model.cfg, &model.ch);
    let sand = |h: &CMat, xi: &CMat| hermitize(&(h.adjoint() * xi * h));
    match block {
        Block::Ul { i, k } => {
            let mut a = sand(&ch.h_ub[i], &ctx.xi_ul[k]);
            for j in 0..cfg.num_dl {
                a += sand(&ch.h_ud[i][j], &ctx.xi_dl[j][k]);
            }
            a
        }
        Block::Dl { k, .. } => {
            let mut a = sand(&ch.h_bb, &ctx.xi_ul[k]);
            for g in 0..cfg.num_dl {
                a += sand(&ch.h_bd[g], &ctx.xi_dl[g][k]);
            }
            a
        }
        Block::Code { k } => {
            let mut a = sand(&ch.h_rb, &ctx.xi_ul[k]);
            for j in 0..cfg.num_dl {
                a += sand(&ch.h_rd[j], &ctx.xi_dl[j][k]);
            }
            a
        }
    }
}

/// Quadratic operator `H(X) = A X + Σ F X B` of `Ξ_wmse` in one block.
/// The returned system has `C = 0`.
pub fn hessian(model: &Model, ctx: &WmmseContext, block: Block) -> SylvesterSystem {
    let (cfg, ch) = (&model.cfg, &model.ch);
    let mut a = comm_hessian(model, ctx, block);
    let mut terms = Vec::new();
    let psi_kk = |n: usize, k: usize| ctx.psi[n][(k, k)].re;
    match block {
        Block::Ul { i, k } => {
            let s: f64 = ch.radar.iter().enumerate().map(|(n, l)| l.eta2_ul[i] * psi_kk(n, k)).sum();
            let d = &ch.d_u[i][k][cfg.l_ul()];
            terms.push((CMat::identity(cfg.nu[i], cfg.nu[i]) * c(s, 0.0), d * d.adjoint()));
        }
        Block::Dl { j, k } => {
            let mut f1 = CMat::zeros(cfg.m_c, cfg.m_c);
            for (n, f) in model.factors.iter().enumerate() {
                let lb = f.blocks[k].rows(cfg.m_r, cfg.m_c);
                f1 += lb.map(|z| z.conj()) * lb.transpose() * c(psi_kk(n, k), 0.0);
            }
            let d0 = &ch.d_d[j][k][cfg.l_bt()];
            terms.push((hermitize(&f1), d0 * d0.adjoint()));
            let s: f64 = ch.radar.iter().enumerate().map(|(n, l)| l.eta2_bm * psi_kk(n, k)).sum();
            let dbm = &ch.d_d[j][k][cfg.l_bm()];
            terms.push((CMat::identity(cfg.m_c, cfg.m_c) * c(s, 0.0), dbm * dbm.adjoint()));
        }
        Block::Code { k } => {
            for (n, f) in model.factors.iter().enumerate() {
                let lr = f.blocks[k].rows(0, cfg.m_r);
                let fr = lr.map(|z| z.conj()) * lr.transpose() + ch.radar[n].sigma_c.transpose();
                a += fr * c(psi_kk(n, k), 0.0);
            }
            a = hermitize(&a);
        }
    }
    let cols = match block {
        Block::Ul { i, .. } => cfg.du[i],
        Block::Dl { j, .. } => cfg.dd[j],
        Block::Code { .. } => 1,
    };
    let rows = a.nrows();
    SylvesterSystem::new(a, terms, CMat::zeros(rows, cols))
}

/// Local model of `Ξ_wmse` in one block with everything else fixed.
#[derive(Clone, Debug)]
pub struct BlockQuadratic {
    pub block: Block,
    /// `H` with `C = C₀`, the unconstrained stationarity system.
    pub system: SylvesterSystem,
}

impl BlockQuadratic {
    pub fn new(model: &Model, ctx: &WmmseContext, design: &Design, block: Block) -> Self {
        let mut system = hessian(model, ctx, block);
        let x = get_block(design, block);
        system.c = system.apply(&x) - gradient(model, ctx, design, block);
        Self { block, system }
    }

    /// `Ξ(X)` up to a block-independent constant.
    pub fn value(&self, x: &CMat) -> f64 {
        let hx = self.system.apply(x);
        (x.adjoint() * hx).trace().re - 2.0 * (self.system.c.adjoint() * x).trace().re
    }

    pub fn gradient(&self, x: &CMat) -> CMat {
        self.system.apply(x) - &self.system.c
    }
}

/// `∂R/∂X*` for every rate of frame `k` with respect to one block,
/// evaluated at `design`. Rates in nats.
#[derive(Clone, Debug)]
pub struct RateGradients {
    /// `∂R_u,q[k]/∂X*` per UL user.
    pub ul: Vec<CMat>,
    /// `∂R_d,j[k]/∂X*` per DL user.
    pub dl: Vec<CMat>,
}

impl RateGradients {
    /// `Σ_q μ_u[q] ∇R_u,q + Σ_j μ_d[j] ∇R_d,j`.
    pub fn weighted(&self, mu_u: &[f64], mu_d: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.ul.first().or(self.dl.first()).map_or(0, |m| m.nrows()), self.ul.first().or(self.dl.first()).map_or(0, |m| m.ncols()));
        for (g, m) in self.ul.iter().zip(mu_u) {
            out += g * c(*m, 0.0);
        }
        for (g, m) in self.dl.iter().zip(mu_d) {
            out += g * c(*m, 0.0);
        }
        out
    }
}

/// Rate gradient for `X` entering through `G X X† G†`: signal when `own`,
/// interference otherwise.
fn rate_grad(g: &CMat, x: &CMat, total: &CMat, r_in: &CMat, own: bool) -> Result<CMat> {
    let t = inv_hpd(total)?;
    let m = if own { t } else { t - inv_hpd(r_in)? };
    Ok(g.adjoint() * m * g * x)
}

/// Gradients of all frame-`k` rates with respect to `block`, at `design`.
pub fn linearized_rate_gradients(model: &Model, design: &Design, block: Block) -> Result<RateGradients> {
    let (cfg, ch) = (&model.cfg, &model.ch);
    let k = block.frame();
    let x = get_block(design, block);
    let ul_cov = uplink_covariances(model, design, k);
    let dl_cov = downlink_covariances(model, design, k);
    let mut ul = Vec::with_capacity(cfg.num_ul);
    let mut dl = Vec::with_capacity(cfg.num_dl);
    for (q, cc) in ul_cov.iter().enumerate() {
        let (g, own) = match block {
            Block::Ul { i, .. } => (&ch.h_ub[i], i == q),
            Block::Dl { .. } => (&ch.h_bb, false),
            Block::Code { .. } => (&ch.h_rb, false),
        };
        ul.push(rate_grad(g, &x, &cc.total, &cc.r_in, own)?);
    }
    for (j, cc) in dl_cov.iter().enumerate() {
        let (g, own) = match block {
            Block::Ul { i, .. } => (&ch.h_ud[i][j], false),
            Block::Dl { j: jj, .. } => (&ch.h_bd[j], jj == j),
            Block::Code { .. } => (&ch.h_rd[j], false),
        };
        dl.push(rate_grad(g, &x, &cc.total, &cc.r_in, own)?);
    }
    Ok(RateGradients { ul, dl })
}
