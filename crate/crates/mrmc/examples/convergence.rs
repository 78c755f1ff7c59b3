//! Run the joint optimizer on one realization and print its trace.
//!
//! `cargo run --release --example convergence -- [seed] [ell_max]`

use mrmc::optimizer::{bcd_ap, init_precoders, uncoded_code, BcdOptions, InitMode};
use mrmc::scenario::SystemConfig;
use mrmc::signal_model::{Design, Model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let cfg = SystemConfig::reference_defaults();
    let mut opts = BcdOptions::from_config(&cfg);
    if let Some(ell) = args.next() {
        opts.ell_max = ell.parse()?;
    }
    let model = Model::generate(&cfg, seed)?;
    let init = Design { code: uncoded_code(&cfg), precoders: init_precoders(&cfg, &model.ch, InitMode::Deterministic, 0) };

    let t = std::time::Instant::now();
    let res = bcd_ap(&model, init, &opts)?;
    println!("ell  cwsm_nats  xi_wmmse  power_viol  rate_margin  step");
    for row in &res.trace {
        if row.ell < 10 || row.ell % 10 == 0 || row.ell + 1 == res.trace.len() {
            println!(
                "{:>3}  {:>9.5}  {:>8.4}  {:>10.1e}  {:>11.4}  {:?}",
                row.ell, row.cwsm_nats, row.xi_wmmse, row.max_power_violation, row.min_rate_margin, row.step
            );
        }
    }
    println!("{} iterations, converged {}, {:.1} s", res.trace.len(), res.converged, t.elapsed().as_secs_f64());
    Ok(())
}
