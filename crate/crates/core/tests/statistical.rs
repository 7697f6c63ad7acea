// Sampling checks with fixed seeds; thresholds are several standard errors
// wide.

use tmsel_core::bootstrap::{
    draw_resample_indices, replicate_estimates, select_ci_full, select_ci_shortcut, variances_from_replicates,
    ResamplePlan,
};
use tmsel_core::dgp::{generate, true_effect, ScenarioConfig};
use tmsel_core::estimands::*;
use tmsel_core::normal::std_normal_cdf;
use tmsel_core::rng;
use tmsel_core::selection::evaluate_criteria;

#[test]
fn observational_propensity_matches_design() {
    let s = generate(&ScenarioConfig::default_for(Scenario::Observational, 0.0, 1)).unwrap();
    let st = empirical_strata(&s).unwrap();
    let p = st.p_hat(1, 1).unwrap();
    let n1 = st.n_x(1) as f64;
    let se = (0.7 * 0.3 / n1).sqrt();
    assert!((p - 0.7).abs() < 3.0 * se, "p_hat(1,1) = {p}, se = {se}");
}

#[test]
fn proxy_dim_near_truth() {
    let truth = true_effect(Scenario::Proxy, 0.0).theta0;
    assert!((truth - 0.5 * (std_normal_cdf(1.0) - 0.5)).abs() < 1e-15);
    let s = generate(&ScenarioConfig::default_for(Scenario::Proxy, 0.0, 7)).unwrap();
    let recs = s.as_proxy().unwrap();
    let arm = |t: u8| recs.iter().filter(|r| r.t == t).map(|r| r.y).collect::<Vec<_>>();
    let var = |v: &[f64]| {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64 / v.len() as f64
    };
    let se = (var(&arm(1)) + var(&arm(0))).sqrt();
    let dim = diff_in_means(&s).unwrap();
    assert!((dim - truth).abs() < 3.0 * se, "dim = {dim}, truth = {truth}, se = {se}");
}

#[test]
fn resample_indices_are_multinomial() {
    let n = 100_000;
    let idx = draw_resample_indices(n, &mut rng::stream(2, &[]));
    let mut counts = vec![0u32; n];
    for i in idx {
        counts[i] += 1;
    }
    // Pearson statistic with expected count 1 per cell; df = n − 1 is large
    // enough for the normal approximation. p > 1e−6 one-sided is z < 4.75.
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - 1.0).powi(2)).sum();
    let df = (n - 1) as f64;
    let z = (chi2 - df) / (2.0 * df).sqrt();
    assert!(z.abs() < 4.75, "chi2 = {chi2}, z = {z}");
    assert_eq!(draw_resample_indices(1, &mut rng::stream(5, &[])), vec![0]);
}

#[test]
fn overlap_candidate_usually_has_lower_risk() {
    let fam = scenario_family(Scenario::Observational, &default_weights(Scenario::Observational)).unwrap();
    let mut wins = 0;
    for seed in 0..50 {
        let s = generate(&ScenarioConfig::default_for(Scenario::Observational, 0.0, 3 + seed)).unwrap();
        let m = replicate_estimates(&fam, &s, &ResamplePlan::seeded(100, 1000 + seed)).unwrap();
        let t = evaluate_criteria(&fam, &s, &variances_from_replicates(&m), None).unwrap();
        if t.rows[10].mod_risk < t.rows[0].mod_risk {
            wins += 1;
        }
    }
    assert!(wins > 25, "{wins} of 50");
}

#[test]
fn full_bootstrap_width_close_to_shortcut() {
    let fam = scenario_family(Scenario::Proxy, &default_weights(Scenario::Proxy)).unwrap();
    let (mut short, mut full) = (0.0, 0.0);
    for seed in 0..50 {
        let s = generate(&ScenarioConfig::default_for(Scenario::Proxy, 0.0, seed)).unwrap();
        let plan = ResamplePlan::seeded(100, 500 + seed);
        let (_, a) = select_ci_shortcut(&fam, &s, &plan, 0.95).unwrap();
        let b = select_ci_full(&fam, &s, &plan, &ResamplePlan::seeded(100, 900 + seed), 0.95).unwrap();
        short += a.width();
        full += b.width();
    }
    let ratio = full / short;
    assert!((0.9..=1.1).contains(&ratio), "width ratio {ratio}");
}
