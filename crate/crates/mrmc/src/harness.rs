//! Experiment runner: convergence traces, detection ROCs and parameter sweeps
//! for the proposed design and its baselines.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::detector::{baseline_codes, pd_at_pfa, roc_from_samples, sample_statistics, CodeKind, DetectionInstance, RocCurve};
use crate::error::{MrmcError, Result};
use crate::linalg::{c, db_to_linear, linear_to_db, null_space, CMat};
use crate::objective::evaluate;
use crate::optimizer::bcd::{bcd_ap, BcdOptions, TraceRow};
use crate::optimizer::init::{dominant_right_vectors, init_precoders, uncoded_code, InitMode};
use crate::scenario::{ChannelSet, SystemConfig};
use crate::signal_model::{Design, Model, PrecoderSet};

/// `git describe` of the build, or `unknown`.
pub const BUILD: &str = env!("MRMC_BUILD");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Converge,
    Roc,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrR,
    SnrUl,
    Cnr,
}

/// Methods compared by the harness.
///
/// `Uncoded` and `Random` replace the code of the proposed design; the
/// precoder baselines fix one link and optimize the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Uncoded,
    Random,
    UniformUl,
    BdDl,
    NspDl,
    Proposed,
}

impl Method {
    pub const ALL: [Method; 6] =
        [Method::Uncoded, Method::Random, Method::UniformUl, Method::BdDl, Method::NspDl, Method::Proposed];

    pub fn name(self) -> &'static str {
        match self {
            Method::Uncoded => "uncoded",
            Method::Random => "random",
            Method::UniformUl => "uniform_ul",
            Method::BdDl => "bd_dl",
            Method::NspDl => "nsp_dl",
            Method::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn parse_by_serde<T: for<'de> Deserialize<'de>>(s: &str, what: &str) -> Result<T> {
    serde_json::from_value(Value::String(s.trim().to_ascii_lowercase()))
        .map_err(|_| MrmcError::Parse(format!("unknown {what} '{s}'")))
}

impl FromStr for Method {
    type Err = MrmcError;
    fn from_str(s: &str) -> Result<Self> {
        parse_by_serde(s, "method")
    }
}

impl FromStr for Mode {
    type Err = MrmcError;
    fn from_str(s: &str) -> Result<Self> {
        parse_by_serde(s, "mode")
    }
}

impl FromStr for SweepAxis {
    type Err = MrmcError;
    fn from_str(s: &str) -> Result<Self> {
        parse_by_serde(s, "sweep axis")
    }
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SnrR => "snr_r",
            SweepAxis::SnrUl => "snr_ul",
            SweepAxis::Cnr => "cnr",
        }
    }
}

/// Interference coupling used by sweeps: `SNR_r = rb·SNR_rB`,
/// `SNR_r = rd·SNR_rd`, `SNR_ur = ur·SNR_u`, `SNR_ud = ud·SNR_u` and, on the
/// CNR axis, `SNR_rB = SNR_rd = cnr·CNR`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CouplingRatios {
    pub rb: f64,
    pub rd: f64,
    pub ur: f64,
    pub ud: f64,
    pub cnr: f64,
}

impl Default for CouplingRatios {
    fn default() -> Self {
        Self { rb: 0.8, rd: 0.6, ur: 0.7, ud: 0.8, cnr: 0.5 }
    }
}

fn rescale_rician(mu: &mut f64, eta2: &mut f64, kappa: f64, second_moment: f64) {
    let cur = (*mu * *mu + *eta2) / (kappa + 1.0);
    if cur > 0.0 {
        let s = second_moment / cur;
        *mu *= s.sqrt();
        *eta2 *= s;
    } else {
        *eta2 = second_moment * (kappa + 1.0);
    }
}

impl CouplingRatios {
    /// Tie the interference statistics of `cfg` to the swept quantity:
    /// radar-to-comm links on the radar SNR and CNR axes, UE-to-radar and
    /// UE-to-UE links on the UL SNR axis.
    pub fn apply(&self, cfg: &mut SystemConfig, axis: SweepAxis) {
        let p_r = cfg.p_r[0];
        let (s2b, s2d, s2r) = (cfg.sigma2_b, cfg.sigma2_d, cfg.sigma2_r);
        let (snr_r, snr_ul, cnr, p_u) = (cfg.snr_r(), cfg.snr_ul(), cfg.cnr, cfg.p_u);
        let ch = &mut cfg.channel;
        let radar_links = match axis {
            SweepAxis::SnrR => Some((snr_r / self.rb, snr_r / self.rd)),
            SweepAxis::Cnr => Some((self.cnr * cnr, self.cnr * cnr)),
            SweepAxis::SnrUl => None,
        };
        if let Some((snr_rb, snr_rd)) = radar_links {
            rescale_rician(&mut ch.mu_rb, &mut ch.eta2_rb, ch.kappa, snr_rb * s2b / p_r);
            rescale_rician(&mut ch.mu_rd, &mut ch.eta2_rd, ch.kappa, snr_rd * s2d / p_r);
        } else {
            ch.eta2_ur = self.ur * snr_ul * s2r / p_u;
            ch.ul_dl_gain = self.ud * snr_ul * s2d / p_u;
        }
    }
}

/// Settings of an experiment that are not part of the system model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSettings {
    pub experiment_id: String,
    pub methods: Vec<Method>,
    pub init_modes: Vec<InitMode>,
    pub axis: SweepAxis,
    /// Sweep grid in dB.
    pub grid_db: Vec<f64>,
    pub n_trials: usize,
    pub pfa: f64,
    pub coupling: CouplingRatios,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            experiment_id: "mrmc".into(),
            methods: Method::ALL.to_vec(),
            init_modes: vec![InitMode::Deterministic],
            axis: SweepAxis::SnrR,
            grid_db: (-4..=4).map(|i| 5.0 * i as f64).collect(),
            n_trials: crate::detector::DEFAULT_TRIALS,
            pfa: 1e-3,
            coupling: CouplingRatios::default(),
        }
    }
}

/// A validated experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub config: SystemConfig,
    pub seeds: Vec<u64>,
    pub mode: Mode,
    pub settings: ExperimentSettings,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn new(config: SystemConfig, seeds: Vec<u64>, mode: Mode, settings: ExperimentSettings, out_dir: impl Into<PathBuf>) -> Result<Self> {
        let spec = Self { config, seeds, mode, settings, out_dir: out_dir.into() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.seeds.is_empty() {
            errs.push("seed list is empty".to_string());
        }
        if self.settings.methods.is_empty() {
            errs.push("method list is empty".to_string());
        }
        if self.settings.init_modes.is_empty() {
            errs.push("init mode list is empty".to_string());
        }
        if self.mode == Mode::Sweep {
            let g = &self.settings.grid_db;
            if g.is_empty() || g.windows(2).any(|w| w[0] >= w[1]) || g.iter().any(|x| !x.is_finite()) {
                errs.push("sweep grid must be nonempty, finite and strictly increasing".to_string());
            }
        }
        if self.settings.n_trials == 0 {
            errs.push("n_trials must be at least 1".to_string());
        }
        if !(self.settings.pfa > 0.0 && self.settings.pfa < 1.0) {
            errs.push(format!("pfa must lie in (0, 1), got {}", self.settings.pfa));
        }
        crate::scenario::validate_config(&self.config).err().into_iter().for_each(|e| errs.push(e.to_string()));
        if errs.is_empty() {
            Ok(())
        } else {
            Err(MrmcError::InvalidConfig(errs))
        }
    }
}

/// Read a scenario document whose optional `experiment` table holds the
/// [`ExperimentSettings`]; everything else is the [`SystemConfig`].
pub fn load_experiment(path: &Path) -> Result<(SystemConfig, ExperimentSettings)> {
    let text = fs::read_to_string(path)?;
    let is_toml = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let mut doc: Value = if is_toml {
        toml::from_str(&text).map_err(|e| MrmcError::Parse(e.to_string()))?
    } else {
        serde_json::from_str(&text).map_err(|e| MrmcError::Parse(e.to_string()))?
    };
    let settings = match doc.as_object_mut().and_then(|m| m.remove("experiment")) {
        Some(v) => serde_json::from_value(v).map_err(|e| MrmcError::Parse(format!("experiment: {e}")))?,
        None => ExperimentSettings::default(),
    };
    Ok((SystemConfig::from_document(doc)?, settings))
}

/// Fixed precoder patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecoderKind {
    UniformUl,
    BdDl,
    NspDl,
}

fn stacked_rows(mats: &[&CMat]) -> CMat {
    let cols = mats.first().map_or(0, |m| m.ncols());
    let rows = mats.iter().map(|m| m.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut r = 0;
    for m in mats {
        out.view_mut((r, 0), m.shape()).copy_from(*m);
        r += m.nrows();
    }
    out
}

/// Baseline precoders. `UniformUl` fills the UL slots with `sqrt(P_U/Du)·[I; 0]`;
/// `BdDl` puts each DL user in the null space of the other DL users' channels
/// with matched beamforming and `P_B/J` per user; `NspDl` projects the BD
/// precoders away from the radar (`H_rB†`) and renormalizes. Slots of the
/// other link are left at zero.
pub fn baseline_precoders(cfg: &SystemConfig, ch: &ChannelSet, kind: PrecoderKind) -> Result<PrecoderSet> {
    let mut pre = PrecoderSet::zeros(cfg);
    match kind {
        PrecoderKind::UniformUl => {
            for i in 0..cfg.num_ul {
                let s = (cfg.p_u / cfg.du[i] as f64).sqrt();
                let p = CMat::from_fn(cfg.nu[i], cfg.du[i], |r, col| if r == col { c(s, 0.0) } else { c(0.0, 0.0) });
                pre.p_u[i] = vec![p; cfg.k];
            }
        }
        PrecoderKind::BdDl | PrecoderKind::NspDl => {
            let radar = if kind == PrecoderKind::NspDl { Some(radar_protecting_projector(cfg, ch)) } else { None };
            for j in 0..cfg.num_dl {
                let others: Vec<&CMat> = (0..cfg.num_dl).filter(|&g| g != j).map(|g| &ch.h_bd[g]).collect();
                let basis = if others.is_empty() {
                    CMat::identity(cfg.m_c, cfg.m_c)
                } else {
                    null_space(&stacked_rows(&others), 1e-10)
                };
                if basis.ncols() < cfg.dd[j] {
                    return Err(MrmcError::NullSpace(format!(
                        "DL user {j}: BD null space has dimension {} but {} streams are needed (M_c = {}, other users' antennas = {})",
                        basis.ncols(),
                        cfg.dd[j],
                        cfg.m_c,
                        others.iter().map(|m| m.nrows()).sum::<usize>()
                    )));
                }
                let v = dominant_right_vectors(&(&ch.h_bd[j] * &basis), cfg.dd[j]);
                let mut p = &basis * v;
                if let Some(proj) = &radar {
                    p = proj * p;
                }
                let norm2 = p.norm_squared();
                if norm2 < 1e-20 {
                    return Err(MrmcError::NullSpace(format!("DL user {j}: NSP projection removed the precoder")));
                }
                let p = p * c((cfg.p_b / cfg.num_dl as f64 / norm2).sqrt(), 0.0);
                pre.p_d[j] = vec![p; cfg.k];
            }
        }
    }
    Ok(pre)
}

/// Projector onto the null space of `H_rB†`; when that space has fewer than
/// `max Dd` dimensions, onto the `max Dd` right singular directions of `H_rB†`
/// with the smallest gains.
fn radar_protecting_projector(cfg: &SystemConfig, ch: &ChannelSet) -> CMat {
    let h = ch.h_rb.adjoint();
    let need = cfg.dd.iter().copied().max().unwrap_or(1);
    let ns = null_space(&h, 1e-10);
    let basis = if ns.ncols() >= need {
        ns
    } else {
        let n = h.ncols();
        let all = dominant_right_vectors(&h, n);
        all.columns(n - need, need).into_owned()
    };
    &basis * basis.adjoint()
}

/// Optimized design plus bookkeeping for one (seed, method).
#[derive(Clone, Debug)]
pub struct MethodRun {
    pub label: String,
    pub method: Method,
    pub design: Design,
    pub trace: Vec<TraceRow>,
    pub converged: bool,
}

fn init_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1)
}

fn code_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(2)
}

/// Run BCD-AP from the standard starting point (init precoders, uncoded code).
pub fn run_proposed(model: &Model, mode: InitMode, seed: u64) -> Result<crate::optimizer::BcdResult> {
    let cfg = &model.cfg;
    let initial = Design { code: uncoded_code(cfg), precoders: init_precoders(cfg, &model.ch, mode, init_seed(seed)) };
    bcd_ap(model, initial, &BcdOptions::from_config(cfg))
}

/// Masked BCD-AP with one link held at a baseline pattern.
pub fn run_precoder_baseline(model: &Model, kind: PrecoderKind, seed: u64) -> Result<crate::optimizer::BcdResult> {
    let cfg = &model.cfg;
    let base = baseline_precoders(cfg, &model.ch, kind)?;
    let mut pre = init_precoders(cfg, &model.ch, InitMode::Deterministic, init_seed(seed));
    let mut opts = BcdOptions::from_config(cfg);
    if kind == PrecoderKind::UniformUl {
        pre.p_u = base.p_u;
        opts.optimize_ul = false;
    } else {
        pre.p_d = base.p_d;
        opts.optimize_dl = false;
    }
    bcd_ap(model, Design { code: uncoded_code(cfg), precoders: pre }, &opts)
}

/// Designs of every requested method for one model. The proposed design is
/// computed whenever a code baseline needs its precoders.
pub fn run_methods(model: &Model, settings: &ExperimentSettings, seed: u64) -> Vec<(String, Method, Result<MethodRun>)> {
    let mut out = Vec::new();
    let methods = &settings.methods;
    let need_proposed = methods.iter().any(|m| matches!(m, Method::Proposed | Method::Uncoded | Method::Random));
    let multi_init = settings.init_modes.len() > 1;
    let mut reference: Option<Design> = None;
    if need_proposed {
        for (n, &im) in settings.init_modes.iter().enumerate() {
            let label = if multi_init { format!("proposed_{im}") } else { "proposed".to_string() };
            let run = run_proposed(model, im, seed).map(|r| MethodRun {
                label: label.clone(),
                method: Method::Proposed,
                design: r.design,
                trace: r.trace,
                converged: r.converged,
            });
            if n == 0 {
                reference = run.as_ref().ok().map(|r| r.design.clone());
            }
            if methods.contains(&Method::Proposed) {
                out.push((label, Method::Proposed, run));
            }
        }
    }
    for &m in methods {
        let kind = match m {
            Method::Proposed => continue,
            Method::Uncoded | Method::Random => {
                let code_kind = if m == Method::Uncoded { CodeKind::Uncoded } else { CodeKind::Random };
                let run = match &reference {
                    Some(d) => Ok(MethodRun {
                        label: m.name().into(),
                        method: m,
                        design: Design { code: baseline_codes(&model.cfg, code_kind, code_seed(seed)), precoders: d.precoders.clone() },
                        trace: Vec::new(),
                        converged: true,
                    }),
                    None => Err(MrmcError::InvalidArgument("proposed design unavailable".into())),
                };
                out.push((m.name().into(), m, run));
                continue;
            }
            Method::UniformUl => PrecoderKind::UniformUl,
            Method::BdDl => PrecoderKind::BdDl,
            Method::NspDl => PrecoderKind::NspDl,
        };
        let run = run_precoder_baseline(model, kind, seed).map(|r| MethodRun {
            label: m.name().into(),
            method: m,
            design: r.design,
            trace: r.trace,
            converged: r.converged,
        });
        out.push((m.name().into(), m, run));
    }
    out
}

/// One long-format result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment_id: String,
    pub seed: u64,
    pub method: String,
    pub axis_value: f64,
    pub metric_name: String,
    pub value: f64,
    pub build: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    /// Rows of one method and metric, in seed order.
    pub fn values(&self, method: &str, metric: &str) -> Vec<f64> {
        self.rows.iter().filter(|r| r.method == method && r.metric_name == metric).map(|r| r.value).collect()
    }

    /// Mean over rows of one method and metric (`None` when there are none).
    pub fn mean(&self, method: &str, metric: &str) -> Option<f64> {
        let v = self.values(method, metric);
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    fn sort(&mut self) {
        self.rows.sort_by(|a, b| {
            a.axis_value
                .total_cmp(&b.axis_value)
                .then(a.seed.cmp(&b.seed))
                .then(a.method.cmp(&b.method))
                .then(a.metric_name.cmp(&b.metric_name))
        });
    }
}

/// Everything produced for one (seed, axis point).
#[derive(Default)]
struct JobOutput {
    rows: Vec<ResultRow>,
    traces: Vec<(String, u64, Vec<TraceRow>)>,
    rocs: Vec<(String, RocCurve)>,
}

fn job(spec: &ExperimentSpec, cfg: &SystemConfig, seed: u64, axis_value: f64) -> JobOutput {
    let s = &spec.settings;
    let mut out = JobOutput::default();
    let push = |rows: &mut Vec<ResultRow>, method: &str, metric: &str, value: f64| {
        rows.push(ResultRow {
            experiment_id: s.experiment_id.clone(),
            seed,
            method: method.to_string(),
            axis_value,
            metric_name: metric.to_string(),
            value: if value.is_finite() { value } else { 0.0 },
            build: BUILD.to_string(),
        });
    };
    let model = match Model::generate(cfg, seed) {
        Ok(m) => m,
        Err(_) => {
            for m in &s.methods {
                push(&mut out.rows, m.name(), "failed", 1.0);
            }
            return out;
        }
    };
    for (label, _, run) in run_methods(&model, s, seed) {
        let run = match run {
            Ok(r) => r,
            Err(_) => {
                push(&mut out.rows, &label, "failed", 1.0);
                continue;
            }
        };
        let ev = match evaluate(&model, &run.design) {
            Ok(ev) => ev,
            Err(_) => {
                push(&mut out.rows, &label, "failed", 1.0);
                continue;
            }
        };
        push(&mut out.rows, &label, "cwsm", ev.cwsm);
        push(&mut out.rows, &label, "i_r", ev.rates.r_r.iter().sum());
        push(&mut out.rows, &label, "i_u", ev.rates.r_u.iter().flatten().sum());
        push(&mut out.rows, &label, "i_d", ev.rates.r_d.iter().flatten().sum());
        push(&mut out.rows, &label, "converged", if run.converged { 1.0 } else { 0.0 });
        push(&mut out.rows, &label, "iterations", run.trace.len() as f64);
        if spec.mode == Mode::Roc {
            match DetectionInstance::from_design(&model, &run.design) {
                Ok(inst) => {
                    let samples = sample_statistics(&inst, s.n_trials, seed);
                    push(&mut out.rows, &label, "pd_at_pfa", pd_at_pfa(&samples, s.pfa));
                    out.rocs.push((label.clone(), roc_from_samples(&samples, None, seed)));
                }
                Err(_) => push(&mut out.rows, &label, "failed", 1.0),
            }
            if model.cfg.cooperation {
                let off = model.with_cooperation(false);
                match DetectionInstance::from_design(&off, &run.design) {
                    Ok(inst) => {
                        let samples = sample_statistics(&inst, s.n_trials, seed);
                        push(&mut out.rows, &label, "pd_at_pfa_no_coop", pd_at_pfa(&samples, s.pfa));
                        out.rocs.push((format!("{label}_no_coop"), roc_from_samples(&samples, None, seed)));
                    }
                    Err(_) => push(&mut out.rows, &label, "failed", 1.0),
                }
            }
        }
        if spec.mode == Mode::Converge && !run.trace.is_empty() {
            out.traces.push((label.clone(), seed, run.trace));
        }
    }
    out
}

/// Configuration at one sweep point (`x_db` in dB on `axis`).
pub fn sweep_config(base: &SystemConfig, axis: SweepAxis, x_db: f64, coupling: &CouplingRatios) -> SystemConfig {
    let mut cfg = base.clone();
    let x = db_to_linear(x_db);
    match axis {
        SweepAxis::SnrR => cfg.set_snr_r(x),
        SweepAxis::SnrUl => cfg.set_snr_ul(x),
        SweepAxis::Cnr => cfg.cnr = x,
    }
    coupling.apply(&mut cfg, axis);
    cfg.refresh_qos_floors();
    cfg
}

fn write_csv<S: Serialize>(path: &Path, rows: impl IntoIterator<Item = S>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RocRecord {
    nu: f64,
    pfa: f64,
    pd: f64,
    n_trials: usize,
    seed: u64,
}

fn write_trace(path: &Path, method: &str, seed: u64, trace: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "seed", "method", "ell", "cwsm_nats", "cwsm_pre", "xi_wmmse", "xi_pass_start", "xi_pass_end",
        "max_step_increase", "max_power_violation", "min_rate_margin", "par_feasible", "max_sylvester_residual", "step",
    ])?;
    for r in trace {
        let step = serde_json::to_value(r.step)?;
        w.write_record([
            seed.to_string(),
            method.to_string(),
            r.ell.to_string(),
            r.cwsm_nats.to_string(),
            r.cwsm_pre.to_string(),
            r.xi_wmmse.to_string(),
            r.xi_pass_start.to_string(),
            r.xi_pass_end.to_string(),
            r.max_step_increase.to_string(),
            r.max_power_violation.to_string(),
            r.min_rate_margin.to_string(),
            r.par_feasible.to_string(),
            r.max_sylvester_residual.to_string(),
            step.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Run every (seed, axis point) job, write the CSVs and `manifest.json`
/// into `spec.out_dir`, and return the long-format table.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    spec.validate()?;
    let s = &spec.settings;
    let points: Vec<(f64, SystemConfig)> = match spec.mode {
        Mode::Sweep => s.grid_db.iter().map(|&x| (x, sweep_config(&spec.config, s.axis, x, &s.coupling))).collect(),
        _ => vec![(linear_to_db(spec.config.snr_r()), spec.config.clone())],
    };
    let jobs: Vec<(usize, u64)> = (0..points.len()).flat_map(|p| spec.seeds.iter().map(move |&sd| (p, sd))).collect();
    let outputs: Vec<JobOutput> = jobs.par_iter().map(|&(p, seed)| job(spec, &points[p].1, seed, points[p].0)).collect();

    fs::create_dir_all(&spec.out_dir)?;
    let mut table = ResultTable::default();
    let mut traces = Vec::new();
    let mut rocs: Vec<(String, RocCurve)> = Vec::new();
    for o in outputs {
        table.rows.extend(o.rows);
        traces.extend(o.traces);
        rocs.extend(o.rocs);
    }
    table.sort();
    let mut files = vec!["results.csv".to_string()];
    write_csv(&spec.out_dir.join("results.csv"), &table.rows)?;
    for (label, seed, trace) in &traces {
        let name = format!("trace_{label}_{seed}.csv");
        write_trace(&spec.out_dir.join(&name), label, *seed, trace)?;
        files.push(name);
    }
    if spec.mode == Mode::Roc {
        rocs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.seed.cmp(&b.1.seed)));
        let mut labels: Vec<&String> = rocs.iter().map(|(l, _)| l).collect();
        labels.dedup();
        for label in labels {
            let name = format!("roc_{label}.csv");
            let recs = rocs.iter().filter(|(l, _)| l == label).flat_map(|(_, r)| {
                (0..r.nu.len()).map(move |i| RocRecord { nu: r.nu[i], pfa: r.pfa[i], pd: r.pd[i], n_trials: r.n_trials, seed: r.seed })
            });
            write_csv(&spec.out_dir.join(&name), recs)?;
            files.push(name);
        }
    }
    if spec.mode == Mode::Sweep {
        let name = format!("sweep_{}.csv", s.axis.name());
        write_csv(&spec.out_dir.join(&name), &table.rows)?;
        files.push(name);
    }
    files.sort();
    let manifest = serde_json::json!({
        "experiment_id": s.experiment_id,
        "mode": spec.mode,
        "seeds": spec.seeds,
        "caps": {
            "t_u_max": spec.config.t_u_max,
            "t_d_max": spec.config.t_d_max,
            "iota_max": spec.config.iota_max,
            "ell_max": spec.config.ell_max,
        },
        "settings": s,
        "config": spec.config,
        "build": BUILD,
        "files": files,
    });
    fs::write(spec.out_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(table)
}

/// Parse a half-open seed range `a..b` or a single seed.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || MrmcError::Parse(format!("seeds must look like 'a..b' or 'n', got '{s}'"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().parse().map_err(|_| bad())?;
            if b <= a {
                return Err(MrmcError::Parse(format!("empty seed range '{s}'")));
            }
            Ok((a..b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}
