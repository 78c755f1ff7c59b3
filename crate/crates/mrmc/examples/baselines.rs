//! Compare the proposed design with the uniform-UL, BD and NSP precoder
//! baselines on a few realizations.

use mrmc::harness::{run_methods, ExperimentSettings, Method};
use mrmc::objective::evaluate;
use mrmc::scenario::SystemConfig;
use mrmc::signal_model::Model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SystemConfig::reference_defaults();
    let settings = ExperimentSettings { methods: vec![Method::Proposed, Method::UniformUl, Method::BdDl, Method::NspDl], ..Default::default() };
    for seed in 0..3 {
        let model = Model::generate(&cfg, seed)?;
        let mut line = format!("seed {seed}:");
        for (label, _, run) in run_methods(&model, &settings, seed) {
            let ev = evaluate(&model, &run?.design)?;
            line.push_str(&format!(" {label} {:.3}", ev.cwsm));
        }
        println!("{line}");
    }
    Ok(())
}
