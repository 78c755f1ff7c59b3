//! Evaluate the CWSM of a design and confirm that the weighted MSE at the
//! MMSE filters and optimal weights reproduces it exactly.

use mrmc::objective::{evaluate, xi_prime};
use mrmc::optimizer::{init_precoders, uncoded_code, InitMode};
use mrmc::scenario::SystemConfig;
use mrmc::signal_model::{Design, Model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SystemConfig::reference_defaults();
    for seed in 0..5 {
        let model = Model::generate(&cfg, seed)?;
        let design = Design { code: uncoded_code(&cfg), precoders: init_precoders(&cfg, &model.ch, InitMode::Random, seed) };
        let ev = evaluate(&model, &design)?;
        let xp = xi_prime(&model, &ev.weights, &ev.mse)?;
        let radar: f64 = ev.rates.r_r.iter().sum();
        let ul: f64 = ev.rates.r_u.iter().flatten().sum();
        let dl: f64 = ev.rates.r_d.iter().flatten().sum();
        println!(
            "seed {seed}: CWSM {:.4} nats, Xi' {:.4}, gap {:.1e}; radar MI {radar:.3}, UL {ul:.3}, DL {dl:.3}",
            ev.cwsm,
            xp,
            (ev.cwsm + xp).abs()
        );
    }
    Ok(())
}
