//! Build the default scenario, draw one channel realization and print the
//! link budget it implies.

use mrmc::scenario::{generate_channels, SystemConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SystemConfig::reference_defaults();
    println!("radar {}x{}, BS {}x{}, {} UL / {} DL users, K = {}", cfg.m_r, cfg.n_r, cfg.m_c, cfg.n_c, cfg.num_ul, cfg.num_dl, cfg.k);
    println!(
        "SNR_r {:.2} dB, SNR_UL {:.2} dB, SNR_DL {:.2} dB",
        10.0 * cfg.snr_r().log10(),
        10.0 * cfg.snr_ul().log10(),
        10.0 * cfg.snr_dl().log10()
    );
    println!("QoS floors: UL {:.4} bits, DL {:.4} bits", cfg.r_ul, cfg.r_dl);

    let ch = generate_channels(&cfg, 7)?;
    println!("target angle from the BS: {:.3} rad", ch.theta_bt);
    for (i, h) in ch.h_ub.iter().enumerate() {
        println!("UL user {i}: ||H_iB||_F^2 = {:.3e}", h.norm_squared());
    }
    for (j, h) in ch.h_bd.iter().enumerate() {
        println!("DL user {j}: ||H_Bj||_F^2 = {:.3e}", h.norm_squared());
    }
    println!("self-interference ||H_BB||_F^2 = {:.3e}", ch.h_bb.norm_squared());
    println!("radar-to-BS ||H_rB||_F^2 = {:.3e}", ch.h_rb.norm_squared());
    Ok(())
}
