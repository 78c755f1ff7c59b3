//! Assemble every receive covariance for a full-power design and check the
//! noise floors and the factored target covariance.

use mrmc::linalg::{min_eig, rel_err};
use mrmc::optimizer::{init_precoders, uncoded_code, InitMode};
use mrmc::scenario::SystemConfig;
use mrmc::signal_model::{build_target_cov, covariances, transmit_powers, Design, Model};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SystemConfig::reference_defaults();
    let model = Model::generate(&cfg, 3)?;
    let design = Design { code: uncoded_code(&cfg), precoders: init_precoders(&cfg, &model.ch, InitMode::Deterministic, 0) };

    let (p_dl, p_ul) = transmit_powers(&design.precoders, 0);
    println!("frame 0 powers: BS {p_dl:.3e} (budget {:.3e}), UL {p_ul:?}", cfg.p_b);

    let bundle = covariances(&model, &design);
    for (n_r, r) in bundle.radar.iter().enumerate() {
        let (r_t, s_t, sigma_t) = build_target_cov(&model, &design, n_r);
        let factored = &s_t * sigma_t * s_t.adjoint();
        println!(
            "radar Rx {n_r}: tr R_t = {:.3e}, min eig R_in = {:.3e} (noise {:.1e}), factored form rel err {:.1e}",
            r.r_t.trace().re,
            min_eig(&r.r_in),
            cfg.sigma2_r,
            rel_err(&factored, &r_t)
        );
    }
    for (i, c) in bundle.ul.iter().enumerate() {
        println!("UL user {i}, frame 0: tr signal {:.3e}, tr interference {:.3e}", c[0].sig.trace().re, c[0].r_in.trace().re);
    }
    for (j, c) in bundle.dl.iter().enumerate() {
        println!("DL user {j}, frame 0: tr signal {:.3e}, tr interference {:.3e}", c[0].sig.trace().re, c[0].r_in.trace().re);
    }
    Ok(())
}
