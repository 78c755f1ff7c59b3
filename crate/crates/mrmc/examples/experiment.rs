//! Run a small SNR_r sweep through the harness and print the mean metrics.

use std::collections::BTreeMap;

use mrmc::harness::{run_experiment, ExperimentSettings, ExperimentSpec, Method, Mode, SweepAxis};
use mrmc::scenario::SystemConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = SystemConfig::reference_defaults();
    cfg.ell_max = 20;
    let settings = ExperimentSettings {
        methods: vec![Method::Proposed, Method::Uncoded],
        axis: SweepAxis::SnrR,
        grid_db: vec![-10.0, 0.0, 10.0],
        n_trials: 20_000,
        ..Default::default()
    };
    let out = std::env::temp_dir().join("mrmc_experiment_example");
    let spec = ExperimentSpec::new(cfg, vec![0, 1], Mode::Sweep, settings, &out)?;
    let table = run_experiment(&spec)?;
    // mean over seeds for each (method, SNR_r, metric)
    let mut acc: BTreeMap<(String, i64, String), (f64, usize)> = BTreeMap::new();
    for r in &table.rows {
        let e = acc.entry((r.method.clone(), r.axis_value.round() as i64, r.metric_name.clone())).or_default();
        e.0 += r.value;
        e.1 += 1;
    }
    for ((method, snr, metric), (sum, n)) in &acc {
        println!("{method:>9} {snr:>4} dB {metric:<14} {:.4}", sum / *n as f64);
    }
    println!("files in {}", out.display());
    Ok(())
}
