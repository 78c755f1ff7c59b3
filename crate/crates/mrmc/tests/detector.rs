mod common;

use common::{feasible_design, random_psd};
use mrmc::detector::*;
use mrmc::linalg::{c, cn01, crandn, hermitian_power, rel_err, CMat, CVec};
use mrmc::scenario::SystemConfig;
use mrmc::signal_model::{code_feasible, radar_covariances, Model};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar(delta: f64) -> DetectionInstance {
    let r = whitened_instance(&CMat::from_element(1, 1, c(delta, 0.0)), &CMat::identity(1, 1)).unwrap();
    DetectionInstance::new(vec![r])
}

fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn scalar_roc_matches_exponential_closed_form() {
    let n = 100_000;
    for (delta, seed) in [(1.0, 1u64), (4.0, 2), (20.0, 3)] {
        let inst = scalar(delta);
        let grid: Vec<f64> = (1..=20).map(|i| 0.25 * i as f64).collect();
        let roc = simulate_roc(&inst, n, Some(&grid), seed).unwrap();
        for (i, &nu) in roc.nu.iter().enumerate() {
            // the statistic is δ/(1+δ)·|ŷ|², |ŷ|² ~ Exp(1) or Exp(1+δ)
            let pfa = (-nu * (1.0 + delta) / delta).exp();
            let pd = (-nu / delta).exp();
            assert!((roc.pfa[i] - pfa).abs() <= 3.0 * binomial_sigma(pfa, n).max(1.0 / n as f64), "δ {delta} ν {nu}: pfa {} vs {pfa}", roc.pfa[i]);
            assert!((roc.pd[i] - pd).abs() <= 3.0 * binomial_sigma(pd, n).max(1.0 / n as f64), "δ {delta} ν {nu}: pd {} vs {pd}", roc.pd[i]);
        }
    }
}

fn design_instance(seed: u64) -> DetectionInstance {
    let model = Model::generate(&SystemConfig::reference_defaults(), seed).unwrap();
    let design = feasible_design(&model, seed + 1);
    DetectionInstance::from_design(&model, &design).unwrap()
}

#[test]
fn roc_is_monotone_and_dominates_chance() {
    let inst = design_instance(4).receivers.into_iter().take(1).collect();
    let inst = DetectionInstance::new(inst);
    let n = 20_000;
    let roc = simulate_roc(&inst, n, None, 9).unwrap();
    assert_eq!(roc.nu.len(), GRID_POINTS);
    for w in 0..roc.nu.len() - 1 {
        assert!(roc.nu[w] < roc.nu[w + 1]);
        assert!(roc.pfa[w] >= roc.pfa[w + 1]);
        assert!(roc.pd[w] >= roc.pd[w + 1]);
    }
    for (pf, pd) in roc.pfa.iter().zip(&roc.pd) {
        assert!(pd + 3.0 * binomial_sigma(*pf, n) >= *pf);
    }
}

#[test]
fn whitening_reconstructs_and_scales() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let r_t = random_psd(&mut rng, 6);
        let r_in = random_psd(&mut rng, 6) + CMat::identity(6, 6) * c(0.2, 0.0);
        let inst = whitened_instance(&r_t, &r_in).unwrap();
        let lam = CMat::from_diagonal(&CVec::from_iterator(6, inst.delta.iter().map(|&d| c(d, 0.0))));
        assert!(rel_err(&(&inst.v * lam * inst.v.adjoint()), &inst.g) < 1e-10);
        // G is similar to R_in⁻¹ R_t
        let w = hermitian_power(&r_in, -0.5, 0.0);
        assert!(rel_err(&(&w * &r_t * &w), &inst.g) < 1e-10);
        let doubled = whitened_instance(&(&r_t * c(2.0, 0.0)), &r_in).unwrap();
        for (a, b) in inst.delta.iter().zip(&doubled.delta) {
            assert!(*b >= *a - 1e-12);
        }
    }
}

#[test]
fn statistic_dual_forms_agree() {
    let inst = design_instance(7);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let y: Vec<CVec> = inst.receivers.iter().map(|r| crandn(&mut rng, r.g.nrows(), 1).column(0).into_owned()).collect();
        let direct = test_statistic_whitened(&y, &inst).unwrap();
        let eigen = test_statistic(&rotate(&y, &inst), &inst);
        assert!((direct - eigen).abs() < 1e-10 * direct.abs().max(1.0), "{direct} {eigen}");
    }
}

#[test]
fn eigenbasis_sampling_matches_gaussian_draws() {
    let r_t = random_psd(&mut ChaCha8Rng::seed_from_u64(12), 4);
    let inst = DetectionInstance::new(vec![whitened_instance(&r_t, &CMat::identity(4, 4)).unwrap()]);
    let n = 40_000;
    let s = sample_statistics(&inst, n, 13);
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let g_half = hermitian_power(&(&inst.receivers[0].g + CMat::identity(4, 4)), 0.5, 0.0);
    let mut raw0 = Vec::with_capacity(n);
    let mut raw1 = Vec::with_capacity(n);
    for _ in 0..n {
        let w = CVec::from_fn(4, |_, _| cn01(&mut rng));
        raw0.push(test_statistic_whitened(std::slice::from_ref(&w), &inst).unwrap());
        raw1.push(test_statistic_whitened(&[&g_half * &w], &inst).unwrap());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let sd = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
    };
    let want0: f64 = inst.deltas().map(|d| d / (1.0 + d)).sum();
    let want1: f64 = inst.deltas().sum();
    for (samples, want) in [(&s.h0, want0), (&raw0, want0), (&s.h1, want1), (&raw1, want1)] {
        let tol = 4.0 * sd(samples) / (n as f64).sqrt();
        assert!((mean(samples) - want).abs() < tol, "{} vs {want}", mean(samples));
    }
    let pick = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v[n / 2]
    };
    assert!((pick(&s.h1) - pick(&raw1)).abs() < 0.05 * pick(&raw1));
}

#[test]
fn random_codes_are_feasible() {
    let cfg = SystemConfig::reference_defaults();
    for seed in 0..100 {
        let code = baseline_codes(&cfg, CodeKind::Random, seed);
        assert!(code_feasible(&code, &cfg.p_r, &cfg.gamma), "seed {seed}");
    }
    let a = baseline_codes(&cfg, CodeKind::Random, 1);
    assert_eq!(a, baseline_codes(&cfg, CodeKind::Random, 1));
    assert_ne!(a, baseline_codes(&cfg, CodeKind::Random, 2));
    assert!(code_feasible(&baseline_codes(&cfg, CodeKind::Uncoded, 0), &cfg.p_r, &cfg.gamma));
}

#[test]
fn seeds_agree_statistically() {
    let inst = scalar(3.0);
    let n = 1_000_000;
    let nu = [2.0];
    let a = simulate_roc(&inst, n, Some(&nu), 100).unwrap();
    let b = simulate_roc(&inst, n, Some(&nu), 200).unwrap();
    let sigma = binomial_sigma(a.pd[0], n) * 2f64.sqrt();
    assert!((a.pd[0] - b.pd[0]).abs() < 3.0 * sigma);
    assert_ne!(a.pd[0], b.pd[0]);
    let again = simulate_roc(&inst, n, Some(&nu), 100).unwrap();
    assert_eq!(a, again);
}

#[test]
fn pd_at_pfa_uses_h0_quantile() {
    let inst = scalar(5.0);
    let s = sample_statistics(&inst, 200_000, 5);
    let pfa = 1e-3;
    let pd = pd_at_pfa(&s, pfa);
    // ν = −δ/(1+δ)·ln pfa, P_d = pfa^(1/(1+δ))
    let want = pfa.powf(1.0 / 6.0);
    assert!((pd - want).abs() < 4.0 * binomial_sigma(want, 200_000) + 0.01, "{pd} vs {want}");
}

#[test]
fn cooperation_moves_bs_path_into_target() {
    let model = Model::generate(&SystemConfig::reference_defaults(), 2).unwrap();
    let design = feasible_design(&model, 3);
    let on = radar_covariances(&model, &design);
    let off = radar_covariances(&model.with_cooperation(false), &design);
    for (a, b) in on.iter().zip(&off) {
        // R_t + R_in is the same total receive covariance either way
        assert!(rel_err(&(&a.r_t + &a.r_in), &(&b.r_t + &b.r_in)) < 1e-10);
    }
    let d_on: f64 = DetectionInstance::from_design(&model, &design).unwrap().deltas().sum();
    let d_off: f64 = DetectionInstance::from_design(&model.with_cooperation(false), &design).unwrap().deltas().sum();
    assert!(d_on > d_off);
}

#[test]
fn zero_trials_rejected() {
    assert!(simulate_roc(&scalar(1.0), 0, None, 0).is_err());
}
