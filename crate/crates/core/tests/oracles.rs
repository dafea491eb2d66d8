use std::f64::consts::PI;

use harmcrit_core::poly::polyspectrum_from_values;
use harmcrit_core::rng::split_seed;
use harmcrit_core::theory::lemma_integral;
use harmcrit_core::{
    build_grid, empirical_jet_covariance, polyspectrum_variance_exact, sample_field,
    sigma_and_cholesky, DirectSynth,
};
use proptest::prelude::*;

#[test]
fn jet_covariance_matches_sigma() {
    let ell = 12;
    let emp = empirical_jet_covariance(ell, 4000, 41).unwrap();
    let (sigma, _) = sigma_and_cholesky(ell).unwrap();
    for i in 0..5 {
        for k in 0..5 {
            let (e, s, se) = (emp.sigma[i][k], sigma[i][k], emp.sigma_stderr[i][k]);
            assert!((e - s).abs() <= 4.5 * se, "[{i}][{k}]: {e} vs {s} (se {se})");
            let id = if i == k { 1.0 } else { 0.0 };
            assert!((emp.whitened[i][k] - id).abs() < 0.1, "whitened [{i}][{k}] = {}", emp.whitened[i][k]);
        }
    }
}

#[test]
fn polyspectrum_variances_match_the_exact_oracle() {
    let ell = 6;
    let n = 3000;
    let grid = build_grid(ell, 4).unwrap();
    let mut samples = [Vec::new(), Vec::new(), Vec::new()];
    for r in 0..n {
        let f = sample_field(ell, split_seed(29, ell, r)).unwrap();
        let v = grid.values(&f, &mut DirectSynth);
        for (k, q) in (2..=4).enumerate() {
            samples[k].push(polyspectrum_from_values(&v, q, &grid).unwrap());
        }
    }
    // Higher orders are heavier tailed; the bands are a few sampling sds of
    // the variance estimate.
    for (k, tol) in [(0usize, 0.1), (1, 0.15), (2, 0.2)] {
        let xs = &samples[k];
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let want = polyspectrum_variance_exact(ell, k as u32 + 2).unwrap();
        assert!((var / want - 1.0).abs() < tol, "q={}: {var} vs {want}", k + 2);
    }
}

proptest! {
    #[test]
    fn q2_oracle_is_closed_form(ell in 2u32..=200) {
        let got = polyspectrum_variance_exact(ell, 2).unwrap();
        let want = (4.0 * PI).powi(2) * 2.0 / (2.0 * f64::from(ell) + 1.0);
        prop_assert!((got / want - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lemma_integral_panels_match_exact_rule(ell in 2u32..=150, r1 in 0u8..=2, r2 in 0u8..=2) {
        let v = lemma_integral(ell, r1, r2).unwrap();
        prop_assert!((v.value / v.exact - 1.0).abs() < 1e-8, "{} vs {}", v.value, v.exact);
        let w = lemma_integral(ell, r2, r1).unwrap();
        prop_assert!((v.exact / w.exact - 1.0).abs() < 1e-12);
    }
}
