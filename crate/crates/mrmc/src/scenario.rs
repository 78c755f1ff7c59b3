//! Problem configuration, validation and seeded channel synthesis.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{MrmcError, Result};
use crate::linalg::{c, cis, crandn, db_to_linear, CMat, CVec};

/// Second-order channel statistics that are scenario inputs rather than draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChannelParams {
    /// Target reflectivity variance seen by every radar path (not stated numerically in the model; 1.0 by default).
    pub eta2_rt: f64,
    /// Variance of the BS-to-target-to-radar path used when the DL cooperates.
    pub eta2_bt: f64,
    /// Direct-path BS-to-radar gain variance.
    pub eta2_bm: f64,
    /// Direct-path UL-UE-to-radar gain variance.
    pub eta2_ur: f64,
    /// Radar-to-BS Rician variance and mean.
    pub eta2_rb: f64,
    pub mu_rb: f64,
    /// Radar-to-DL-UE Rician variance and mean.
    pub eta2_rd: f64,
    pub mu_rd: f64,
    /// Rician factor of the radar-to-comm links.
    pub kappa: f64,
    /// Rician factor of the self-interference channel.
    pub k_b: f64,
    /// Power scale of the UL-to-DL cross channels.
    pub ul_dl_gain: f64,
    /// Normalized Doppler range.
    pub doppler_min: f64,
    pub doppler_max: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            eta2_rt: 1.0,
            eta2_bt: 1.0,
            eta2_bm: 1.0,
            eta2_ur: 1.0,
            eta2_rb: 0.3,
            mu_rb: 0.1,
            eta2_rd: 0.5,
            mu_rd: 0.05,
            kappa: 1.0,
            k_b: 1.0,
            ul_dl_gain: 1.0,
            doppler_min: 0.05,
            doppler_max: 0.325,
        }
    }
}

/// Dimensions, budgets, weights and iteration caps of one co-design problem.
///
/// Powers and variances are linear. Rate floors are in bits/s/Hz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    pub m_r: usize,
    pub n_r: usize,
    pub m_c: usize,
    pub n_c: usize,
    pub num_ul: usize,
    pub num_dl: usize,
    pub nu: Vec<usize>,
    pub nd: Vec<usize>,
    pub du: Vec<usize>,
    pub dd: Vec<usize>,
    pub k: usize,
    pub n: usize,
    pub n_t: usize,
    pub n_rb: usize,
    pub n_rd: usize,
    /// Delay (in symbols) of the BS-to-radar direct path relative to the CUT.
    pub n_bm: usize,
    /// Delay (in symbols) of the UL-UE-to-radar direct paths relative to the CUT.
    pub n_u: usize,
    pub p_b: f64,
    pub p_u: f64,
    pub p_r: Vec<f64>,
    pub gamma: Vec<f64>,
    pub sigma2_r: f64,
    pub sigma2_b: f64,
    pub sigma2_d: f64,
    pub cnr: f64,
    pub r_ul: f64,
    pub r_dl: f64,
    pub alpha_r: Vec<f64>,
    pub alpha_u: Vec<f64>,
    pub alpha_d: Vec<f64>,
    pub t_u_max: usize,
    pub t_d_max: usize,
    pub iota_max: usize,
    pub ell_max: usize,
    pub rng_seed: u64,
    /// DL-radar cooperation: the BS-to-target echo is part of the radar signal.
    pub cooperation: bool,
    pub channel: ChannelParams,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self::reference_defaults()
    }
}

impl SystemConfig {
    /// Four radar and four BS antennas, two UL and two DL users with two antennas
    /// and two streams each, K = 8, N = 32, 10 dB SNRs, 20 dB CNR, 3 dB PAR.
    pub fn reference_defaults() -> Self {
        let sigma2 = 1e-3;
        let snr = 10.0;
        let (m_r, n_r, i, j) = (4, 4, 2, 2);
        let w = 1.0 / (i + j + n_r) as f64;
        let mut cfg = Self {
            m_r,
            n_r,
            m_c: 4,
            n_c: 4,
            num_ul: i,
            num_dl: j,
            nu: vec![2; i],
            nd: vec![2; j],
            du: vec![2; i],
            dd: vec![2; j],
            k: 8,
            n: 32,
            n_t: 4,
            n_rb: 2,
            n_rd: 3,
            n_bm: 1,
            n_u: 2,
            p_b: snr * sigma2,
            p_u: snr * sigma2,
            p_r: vec![snr * sigma2; m_r],
            gamma: vec![10f64.powf(0.3); m_r],
            sigma2_r: sigma2,
            sigma2_b: sigma2,
            sigma2_d: sigma2,
            cnr: 100.0,
            r_ul: 0.0,
            r_dl: 0.0,
            alpha_r: vec![w; n_r],
            alpha_u: vec![w; i],
            alpha_d: vec![w; j],
            t_u_max: 50,
            t_d_max: 50,
            iota_max: 1,
            ell_max: 200,
            rng_seed: 0,
            cooperation: true,
            channel: ChannelParams::default(),
        };
        cfg.refresh_qos_floors();
        cfg
    }

    /// Iteration caps of the original evaluation (200/200/1/2000).
    pub fn with_full_caps(mut self) -> Self {
        self.t_u_max = 200;
        self.t_d_max = 200;
        self.iota_max = 1;
        self.ell_max = 2000;
        self
    }

    pub fn snr_r(&self) -> f64 {
        self.p_r[0] / self.sigma2_r
    }

    pub fn snr_ul(&self) -> f64 {
        self.p_u / self.sigma2_b
    }

    pub fn snr_dl(&self) -> f64 {
        self.p_b / self.sigma2_d
    }

    /// Set radar power per transmitter from a linear SNR.
    pub fn set_snr_r(&mut self, snr: f64) {
        self.p_r = vec![snr * self.sigma2_r; self.m_r];
    }

    pub fn set_snr_ul(&mut self, snr: f64) {
        self.p_u = snr * self.sigma2_b;
    }

    pub fn set_snr_dl(&mut self, snr: f64) {
        self.p_b = snr * self.sigma2_d;
    }

    /// Recompute `r_ul`/`r_dl` from the current SNRs.
    pub fn refresh_qos_floors(&mut self) {
        let (u, d) = qos_floors(self, self.snr_r(), self.snr_ul(), self.snr_dl());
        self.r_ul = u;
        self.r_dl = d;
    }

    /// `M = M_r + M_c`, the per-PRI transmit dimension seen by a radar receiver.
    pub fn m_total(&self) -> usize {
        self.m_r + self.m_c
    }

    /// Clutter variance `CNR · σ_r²`.
    pub fn sigma2_c(&self) -> f64 {
        self.cnr * self.sigma2_r
    }

    /// Symbol index of the training symbol echoed by the target.
    pub fn l_bt(&self) -> usize {
        0
    }

    /// Symbol index of the DL signal arriving over the direct path at the CUT.
    pub fn l_bm(&self) -> usize {
        self.n_t - self.n_bm
    }

    /// Symbol index of the UL signals arriving at the CUT.
    pub fn l_ul(&self) -> usize {
        self.n_t - self.n_u
    }

    /// Read a JSON or TOML document (by extension) whose keys mirror the field names.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let is_toml = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("toml"))
            .unwrap_or(false);
        if is_toml {
            Self::from_toml_str(&text)
        } else {
            Self::from_json_str(&text)
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text).map_err(|e| MrmcError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: Value = toml::from_str(text).map_err(|e| MrmcError::Parse(e.to_string()))?;
        Self::from_document(doc)
    }

    /// Build a config from a parsed document.
    ///
    /// Missing keys take the defaults; per-device vectors may be given as one
    /// scalar. The `units` key (`"db"` or `"linear"`, default linear) says how
    /// `cnr`, `gamma` and the optional `snr_r`/`snr_ul`/`snr_dl` keys are written.
    /// SNR keys set the matching powers. Absent rate floors are recomputed.
    pub fn from_document(doc: Value) -> Result<Self> {
        let Value::Object(mut doc) = doc else {
            return Err(MrmcError::Parse("config root must be a table/object".into()));
        };
        let units = match doc.remove("units") {
            None => "linear".to_string(),
            Some(Value::String(s)) => s.to_ascii_lowercase(),
            Some(other) => return Err(MrmcError::Parse(format!("units must be a string, got {other}"))),
        };
        let db = match units.as_str() {
            "db" => true,
            "linear" => false,
            other => return Err(MrmcError::Parse(format!("unknown units '{other}'"))),
        };
        let to_lin = |v: &Value| -> Result<Value> {
            let conv = |x: &Value| -> Result<Value> {
                let f = x
                    .as_f64()
                    .ok_or_else(|| MrmcError::Parse(format!("expected number, got {x}")))?;
                Ok(Value::from(if db { db_to_linear(f) } else { f }))
            };
            match v {
                Value::Array(a) => Ok(Value::Array(a.iter().map(conv).collect::<Result<_>>()?)),
                x => conv(x),
            }
        };
        for key in ["cnr", "gamma"] {
            if let Some(v) = doc.get(key) {
                let lin = to_lin(v)?;
                doc.insert(key.into(), lin);
            }
        }
        let mut snrs = [None, None, None];
        for (slot, key) in snrs.iter_mut().zip(["snr_r", "snr_ul", "snr_dl"]) {
            if let Some(v) = doc.remove(key) {
                *slot = Some(
                    to_lin(&v)?
                        .as_f64()
                        .ok_or_else(|| MrmcError::Parse(format!("{key} must be a number")))?,
                );
            }
        }
        let has_floor = [doc.contains_key("r_ul"), doc.contains_key("r_dl")];

        let defaults = Self::reference_defaults();
        let mut merged = match serde_json::to_value(&defaults)? {
            Value::Object(m) => m,
            _ => unreachable!("struct serializes to an object"),
        };
        let vector_keys = [
            ("p_r", "m_r"),
            ("gamma", "m_r"),
            ("alpha_r", "n_r"),
            ("nu", "num_ul"),
            ("du", "num_ul"),
            ("alpha_u", "num_ul"),
            ("nd", "num_dl"),
            ("dd", "num_dl"),
            ("alpha_d", "num_dl"),
        ];
        for (k, v) in doc.iter() {
            if k == "channel" {
                if let (Some(Value::Object(dst)), Value::Object(src)) = (merged.get_mut("channel"), v) {
                    for (ck, cv) in src {
                        dst.insert(ck.clone(), cv.clone());
                    }
                    continue;
                }
            }
            merged.insert(k.clone(), v.clone());
        }
        let dim = |m: &Map<String, Value>, key: &str| m.get(key).and_then(Value::as_u64).unwrap_or(0) as usize;
        let weights_follow_dims =
            !doc.contains_key("alpha_r") && !doc.contains_key("alpha_u") && !doc.contains_key("alpha_d");
        for (key, dim_key) in vector_keys {
            let len = dim(&merged, dim_key);
            let fill = match merged.get(key) {
                Some(Value::Array(a)) if doc.contains_key(key) => {
                    if a.len() == 1 {
                        Some(a[0].clone())
                    } else {
                        None
                    }
                }
                Some(Value::Array(a)) => a.first().cloned(),
                Some(x) => Some(x.clone()),
                None => None,
            };
            if let Some(x) = fill {
                merged.insert(key.into(), Value::Array(vec![x; len]));
            }
        }
        if weights_follow_dims {
            let w = 1.0 / (dim(&merged, "num_ul") + dim(&merged, "num_dl") + dim(&merged, "n_r")).max(1) as f64;
            for (key, dim_key) in [("alpha_r", "n_r"), ("alpha_u", "num_ul"), ("alpha_d", "num_dl")] {
                let len = dim(&merged, dim_key);
                merged.insert(key.into(), Value::Array(vec![Value::from(w); len]));
            }
        }
        let mut cfg: SystemConfig =
            serde_json::from_value(Value::Object(merged)).map_err(|e| MrmcError::Parse(e.to_string()))?;
        if let Some(s) = snrs[0] {
            cfg.set_snr_r(s);
        }
        if let Some(s) = snrs[1] {
            cfg.set_snr_ul(s);
        }
        if let Some(s) = snrs[2] {
            cfg.set_snr_dl(s);
        }
        if cfg.p_r.len() != cfg.m_r && !cfg.p_r.is_empty() && !doc.contains_key("p_r") {
            cfg.p_r = vec![cfg.p_r[0]; cfg.m_r];
        }
        let (u, d) = qos_floors(&cfg, cfg.snr_r(), cfg.snr_ul(), cfg.snr_dl());
        if !has_floor[0] {
            cfg.r_ul = u;
        }
        if !has_floor[1] {
            cfg.r_dl = d;
        }
        Ok(cfg)
    }
}

/// Check every invariant of `cfg`, naming each violation.
pub fn validate_config(cfg: &SystemConfig) -> Result<()> {
    let mut errs = Vec::new();
    let counts = [
        ("m_r", cfg.m_r),
        ("n_r", cfg.n_r),
        ("m_c", cfg.m_c),
        ("n_c", cfg.n_c),
        ("num_ul", cfg.num_ul),
        ("num_dl", cfg.num_dl),
        ("k", cfg.k),
        ("n", cfg.n),
    ];
    for (name, v) in counts {
        if v == 0 {
            errs.push(format!("{name} must be at least 1"));
        }
    }
    let lens = [
        ("nu", cfg.nu.len(), cfg.num_ul),
        ("du", cfg.du.len(), cfg.num_ul),
        ("alpha_u", cfg.alpha_u.len(), cfg.num_ul),
        ("nd", cfg.nd.len(), cfg.num_dl),
        ("dd", cfg.dd.len(), cfg.num_dl),
        ("alpha_d", cfg.alpha_d.len(), cfg.num_dl),
        ("p_r", cfg.p_r.len(), cfg.m_r),
        ("gamma", cfg.gamma.len(), cfg.m_r),
        ("alpha_r", cfg.alpha_r.len(), cfg.n_r),
    ];
    let mut lengths_ok = true;
    for (name, got, want) in lens {
        if got != want {
            errs.push(format!("{name} has {got} entries, expected {want}"));
            lengths_ok = false;
        }
    }
    if lengths_ok {
        let sum_nd: usize = cfg.nd.iter().sum();
        let sum_nu: usize = cfg.nu.iter().sum();
        if cfg.m_c < sum_nd {
            errs.push(format!("M_c < ΣNd ({} < {sum_nd})", cfg.m_c));
        }
        if cfg.n_c < sum_nu {
            errs.push(format!("N_c < ΣNu ({} < {sum_nu})", cfg.n_c));
        }
        for i in 0..cfg.num_ul {
            if cfg.nu[i] == 0 || cfg.du[i] == 0 {
                errs.push(format!("UL user {i} needs at least one antenna and stream"));
            }
            if cfg.du[i] > cfg.nu[i] {
                errs.push(format!("Du[{i}] > Nu[{i}]"));
            }
        }
        for j in 0..cfg.num_dl {
            if cfg.nd[j] == 0 || cfg.dd[j] == 0 {
                errs.push(format!("DL user {j} needs at least one antenna and stream"));
            }
            if cfg.dd[j] > cfg.nd[j] {
                errs.push(format!("Dd[{j}] > Nd[{j}]"));
            }
        }
        for (m, &g) in cfg.gamma.iter().enumerate() {
            if g < 1.0 {
                errs.push(format!("PAR below 1 for transmitter {m} ({g})"));
            } else if g > cfg.k as f64 {
                errs.push(format!("PAR above K for transmitter {m} ({g})"));
            }
        }
        for (m, &p) in cfg.p_r.iter().enumerate() {
            if !(p > 0.0) {
                errs.push(format!("nonpositive radar power for transmitter {m}"));
            }
        }
        let weights = cfg.alpha_r.iter().chain(&cfg.alpha_u).chain(&cfg.alpha_d);
        if weights.into_iter().any(|&w| !(w > 0.0)) {
            errs.push("weights must be strictly positive".into());
        }
    }
    for (name, v) in [
        ("p_b", cfg.p_b),
        ("p_u", cfg.p_u),
        ("sigma2_r", cfg.sigma2_r),
        ("sigma2_b", cfg.sigma2_b),
        ("sigma2_d", cfg.sigma2_d),
    ] {
        if !(v > 0.0) {
            errs.push(format!("nonpositive power or variance {name}"));
        }
    }
    if !(cfg.cnr >= 0.0) {
        errs.push("negative CNR".into());
    }
    for (name, idx) in [("n_t", cfg.n_t), ("n_rb", cfg.n_rb), ("n_rd", cfg.n_rd)] {
        if idx >= cfg.n {
            errs.push(format!("{name} = {idx} outside [0, N-1]"));
        }
    }
    if cfg.n_bm > cfg.n_t || cfg.n_u > cfg.n_t {
        errs.push("direct-path delays must not exceed the CUT index".into());
    }
    let ch = &cfg.channel;
    if !(ch.doppler_min <= ch.doppler_max) {
        errs.push("doppler_min > doppler_max".into());
    }
    if errs.is_empty() {
        Ok(())
    } else {
        Err(MrmcError::InvalidConfig(errs))
    }
}

/// Second-order statistics of everything one radar receiver sees.
#[derive(Clone, Debug, PartialEq)]
pub struct RadarLink {
    /// Per transmitter target gain variance and normalized Doppler.
    pub eta2_rt: Vec<f64>,
    pub f_rt: Vec<f64>,
    pub eta2_bt: f64,
    pub f_bt: f64,
    pub eta2_bm: f64,
    pub f_bm: f64,
    /// Per UL user direct-path variance and Doppler.
    pub eta2_ul: Vec<f64>,
    pub f_ul: Vec<f64>,
    /// Clutter covariance (M_r × M_r).
    pub sigma_c: CMat,
}

/// One channel realization plus the known pilot symbols.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    /// UL channels `H_iB` (N_c × Nu_i).
    pub h_ub: Vec<CMat>,
    /// DL channels `H_Bj` (Nd_j × M_c).
    pub h_bd: Vec<CMat>,
    /// Self-interference `H_BB` (N_c × M_c).
    pub h_bb: CMat,
    /// UL-to-DL cross channels `H_ij` (Nd_j × Nu_i), indexed `[i][j]`.
    pub h_ud: Vec<Vec<CMat>>,
    /// Radar-to-BS channel `H_rB` (N_c × M_r).
    pub h_rb: CMat,
    /// Radar-to-DL channels `H_rj` (Nd_j × M_r).
    pub h_rd: Vec<CMat>,
    /// Angle of the target as seen from the BS array.
    pub theta_bt: f64,
    /// Response vector of the BS-to-target path, `conj(a_T(θ))`.
    pub steer_bt: CVec,
    pub radar: Vec<RadarLink>,
    /// UL pilots `d_u[i][k][l]`.
    pub d_u: Vec<Vec<Vec<CVec>>>,
    /// DL pilots `d_d[j][k][l]`.
    pub d_d: Vec<Vec<Vec<CVec>>>,
}

/// Half-wavelength ULA steering vector.
pub fn steering_vector(n: usize, theta: f64) -> CVec {
    CVec::from_iterator(n, (0..n).map(|i| cis(PI * i as f64 * theta.sin())))
}

fn qpsk<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_iterator(
        n,
        (0..n).map(|_| {
            let re = if rng.random::<bool>() { s } else { -s };
            let im = if rng.random::<bool>() { s } else { -s };
            c(re, im)
        }),
    )
}

fn rician<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, mean: f64, var: f64) -> CMat {
    crandn(rng, rows, cols).map(|z| z * var.sqrt() + c(mean, 0.0))
}

/// Draw every channel and statistic from `(cfg, seed)`; a pure function of both.
pub fn generate_channels(cfg: &SystemConfig, seed: u64) -> Result<ChannelSet> {
    validate_config(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = &cfg.channel;
    let h_ub: Vec<CMat> = cfg.nu.iter().map(|&nu| crandn(&mut rng, cfg.n_c, nu)).collect();
    let h_bd: Vec<CMat> = cfg.nd.iter().map(|&nd| crandn(&mut rng, nd, cfg.m_c)).collect();
    let kb = p.k_b;
    let h_bb = rician(&mut rng, cfg.n_c, cfg.m_c, (kb / (1.0 + kb)).sqrt(), 1.0 / (1.0 + kb));
    let g = p.ul_dl_gain.sqrt();
    let h_ud: Vec<Vec<CMat>> = cfg
        .nu
        .iter()
        .map(|&nu| {
            cfg.nd
                .iter()
                .map(|&nd| crandn(&mut rng, nd, nu).scale(g))
                .collect()
        })
        .collect();
    let kap = p.kappa;
    let h_rb = rician(
        &mut rng,
        cfg.n_c,
        cfg.m_r,
        (1.0 / (kap + 1.0)).sqrt() * p.mu_rb,
        p.eta2_rb / (kap + 1.0),
    );
    let h_rd: Vec<CMat> = cfg
        .nd
        .iter()
        .map(|&nd| {
            rician(
                &mut rng,
                nd,
                cfg.m_r,
                (1.0 / (kap + 1.0)).sqrt() * p.mu_rd,
                p.eta2_rd / (kap + 1.0),
            )
        })
        .collect();
    let theta_bt = rng.random_range(-PI / 2.0..PI / 2.0);
    let steer_bt = steering_vector(cfg.m_c, theta_bt).map(|z| z.conj());
    let doppler = |rng: &mut ChaCha8Rng| {
        if p.doppler_max > p.doppler_min {
            rng.random_range(p.doppler_min..p.doppler_max)
        } else {
            p.doppler_min
        }
    };
    let sigma_c = CMat::identity(cfg.m_r, cfg.m_r).scale(cfg.sigma2_c());
    let radar = (0..cfg.n_r)
        .map(|_| RadarLink {
            eta2_rt: vec![p.eta2_rt; cfg.m_r],
            f_rt: (0..cfg.m_r).map(|_| doppler(&mut rng)).collect(),
            eta2_bt: p.eta2_bt,
            f_bt: doppler(&mut rng),
            eta2_bm: p.eta2_bm,
            f_bm: doppler(&mut rng),
            eta2_ul: vec![p.eta2_ur; cfg.num_ul],
            f_ul: (0..cfg.num_ul).map(|_| doppler(&mut rng)).collect(),
            sigma_c: sigma_c.clone(),
        })
        .collect();
    let d_u = cfg
        .du
        .iter()
        .map(|&d| (0..cfg.k).map(|_| (0..cfg.n).map(|_| qpsk(&mut rng, d)).collect()).collect())
        .collect();
    let d_d = cfg
        .dd
        .iter()
        .map(|&d| (0..cfg.k).map(|_| (0..cfg.n).map(|_| qpsk(&mut rng, d)).collect()).collect())
        .collect();
    Ok(ChannelSet {
        h_ub,
        h_bd,
        h_bb,
        h_ud,
        h_rb,
        h_rd,
        theta_bt,
        steer_bt,
        radar,
        d_u,
        d_d,
    })
}

/// Bistatic Doppler `(v_x/λ)(cos θ + cos φ) + (v_y/λ)(sin θ + sin φ)`.
pub fn doppler_from_geometry(v_x: f64, v_y: f64, theta_tx: f64, phi_rx: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(MrmcError::InvalidArgument(format!("wavelength must be positive, got {lambda}")));
    }
    Ok(v_x / lambda * (theta_tx.cos() + phi_rx.cos()) + v_y / lambda * (theta_tx.sin() + phi_rx.sin()))
}

/// UL and DL rate floors in bits/s/Hz from linear SNRs.
pub fn qos_floors(cfg: &SystemConfig, snr_r: f64, snr_ul: f64, snr_dl: f64) -> (f64, f64) {
    let (i, j, m_r) = (cfg.num_ul as f64, cfg.num_dl as f64, cfg.m_r as f64);
    let guard = |num: f64, den: f64| {
        if den < 1e-12 {
            (1.0 + num).log2()
        } else {
            (1.0 + num / den).log2()
        }
    };
    let r_u = guard(snr_ul, m_r * snr_r + snr_dl + (i - 1.0) * snr_ul);
    let r_d = guard(snr_dl / j, m_r * snr_r + snr_dl * (j - 1.0) / j + i * snr_ul);
    (r_u, r_d)
}
