//! Monte Carlo ROC of the NP detector for the optimized, uncoded and random
//! codes, with and without DL cooperation.

use mrmc::detector::{baseline_codes, pd_at_pfa, sample_statistics, CodeKind, DetectionInstance};
use mrmc::harness::run_proposed;
use mrmc::optimizer::InitMode;
use mrmc::scenario::SystemConfig;
use mrmc::signal_model::{Design, Model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = SystemConfig::reference_defaults();
    cfg.set_snr_r(1.0);
    let seed = 2;
    let model = Model::generate(&cfg, seed)?;
    let proposed = run_proposed(&model, InitMode::Deterministic, seed)?.design;
    let with_code = |code| Design { code, precoders: proposed.precoders.clone() };
    let designs = [
        ("proposed", proposed.clone()),
        ("uncoded", with_code(baseline_codes(&cfg, CodeKind::Uncoded, seed))),
        ("random", with_code(baseline_codes(&cfg, CodeKind::Random, seed))),
    ];
    let n_trials = 100_000;
    for (coop, m) in [("on", model.clone()), ("off", model.with_cooperation(false))] {
        for (name, d) in &designs {
            let inst = DetectionInstance::from_design(&m, d)?;
            let s = sample_statistics(&inst, n_trials, seed);
            let pd: Vec<String> = [1e-1, 1e-2, 1e-3].iter().map(|&pfa| format!("{:.4}", pd_at_pfa(&s, pfa))).collect();
            println!("cooperation {coop:>3}, {name:>8}: sum delta {:>9.3}, Pd at Pfa 1e-1/1e-2/1e-3 = {}", inst.deltas().sum::<f64>(), pd.join(" / "));
        }
    }
    Ok(())
}
