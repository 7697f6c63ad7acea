mod common;

use common::*;
use tmsel_core::bootstrap::{
    percentile_interval, replicate_estimates, select_ci_full, select_ci_shortcut, variances_from_replicates,
    ReplicateMatrix, ResamplePlan,
};
use tmsel_core::estimands::*;
use tmsel_core::selection::{
    argmin_with_tiebreak, cv_risk, evaluate_criteria, make_folds, modified_risk, raw_risk, FoldPlan,
    VarianceEstimates,
};
use tmsel_core::CandidateFamily;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-10
}

#[test]
fn estimator_goldens() {
    assert!(close(aipw_ate(&obs8()).unwrap(), OBS8_ATE));
    assert!(close(aipw_overlap(&obs8()).unwrap(), OBS8_OVERLAP));
    assert!(close(aipw_ate(&obs9()).unwrap(), OBS9_ATE));
    assert!(close(aipw_overlap(&obs9()).unwrap(), OBS9_OVERLAP));
    assert!(close(iv_ratio(&iv6()).unwrap(), IV6_RATIO));
    assert!(close(ols_slope(&iv6()).unwrap(), IV6_OLS));
    assert!(close(ols_slope(&ols6()).unwrap(), OLS6_SLOPE));
    assert!(close(diff_in_means(&proxy8()).unwrap(), PROXY8_DIM));
    assert!(close(product_estimator(&proxy8()).unwrap(), PROXY8_PRODUCT));
}

#[test]
fn iv_ratio_equals_one_when_y_is_t() {
    let s = iv(&[(Some(0.4), 1.0, 1.0), (Some(-1.3), -0.2, -0.2), (Some(2.2), 3.1, 3.1), (Some(0.0), 0.5, 0.5)]);
    assert!(close(iv_ratio(&s).unwrap(), 1.0));
}

#[test]
fn shrinkage_examples() {
    let fam = CandidateFamily::constants(&[2.0, 4.0]).unwrap();
    assert_eq!(fam.evaluate_all(&proxy8()).unwrap(), vec![2.0, 4.0]);
    let a: Evaluator = std::sync::Arc::new(|_: &_| Ok(2.0));
    let b: Evaluator = std::sync::Arc::new(|_: &_| Ok(4.0));
    let mid = shrinkage_family(a, b, &[0.0, 0.5], None).unwrap();
    assert_eq!(mid.evaluate(1, &proxy8()).unwrap(), 3.0);
    let grid = scenario_family(Scenario::Proxy, &default_weights(Scenario::Proxy)).unwrap();
    assert_eq!(grid.len(), 11);
    assert_eq!(grid.evaluate(0, &proxy8()).unwrap(), diff_in_means(&proxy8()).unwrap());
}

#[test]
fn risk_examples() {
    assert!(close(raw_risk(0.04, 0.01, 0.02), 0.05));
    assert_eq!(raw_risk(0.0, 0.0, 0.3), 0.3);
    assert!(close(raw_risk(0.005, 0.02, 0.01), -0.005));
    assert_eq!(modified_risk(0.005, 0.02, 0.01), 0.01);
    assert!(close(modified_risk(0.04, 0.01, 0.02), 0.05));
    assert_eq!(modified_risk(0.0, 0.0, 0.0), 0.0);
    assert_eq!(argmin_with_tiebreak(&[0.05, 0.03, 0.07], &[0.0, 0.0, 0.0]), 1);
    assert_eq!(argmin_with_tiebreak(&[0.03, 0.03], &[0.0, 0.01]), 0);
    assert_eq!(argmin_with_tiebreak(&[1.0, 1.0, 1.0], &[0.2, 0.2, 0.2]), 0);
}

#[test]
fn fold_and_cv_examples() {
    let mut rng = tmsel_core::rng::stream(1, &[]);
    let ten = values(&[0.0; 10]);
    let plan = make_folds(&ten, 5, &mut tmsel_core::rng::stream(1, &[])).unwrap();
    assert_eq!(plan.fold_sizes(), vec![2; 5]);
    // IV folds are stratified by completeness only: one stratum here.
    let eleven = iv(&(0..11).map(|k| (Some(k as f64), k as f64, 0.0)).collect::<Vec<_>>());
    let mut sizes = make_folds(&eleven, 5, &mut rng).unwrap().fold_sizes();
    sizes.sort();
    assert_eq!(sizes, vec![2, 2, 2, 2, 3]);

    let four = values(&[1.0, 2.0, 3.0, 4.0]);
    let folds = FoldPlan::from_assignment(2, vec![0, 0, 1, 1]).unwrap();
    let fam = CandidateFamily::from_evaluators(vec!["a".into(), "b".into()], vec![mean_y(), mean_y()]).unwrap();
    assert!(close(cv_risk(&fam, 1, &four, &folds).unwrap(), 4.0));
    let consts = CandidateFamily::constants(&[2.0, 5.0]).unwrap();
    assert_eq!(cv_risk(&consts, 1, &four, &folds).unwrap(), 9.0);
    assert_eq!(cv_risk(&consts, 0, &four, &folds).unwrap(), 0.0);
}

#[test]
fn criteria_examples() {
    let fam = CandidateFamily::constants(&[2.0, 3.0]).unwrap();
    let v = VarianceEstimates::injected(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
    let t = evaluate_criteria(&fam, &proxy8(), &v, None).unwrap();
    assert_eq!(t.rows.iter().map(|r| r.raw_risk).collect::<Vec<_>>(), vec![0.0, 1.0]);
    assert_eq!(t.rows.iter().map(|r| r.mod_risk).collect::<Vec<_>>(), vec![0.0, 1.0]);
    let single = CandidateFamily::constants(&[2.0]).unwrap();
    let v = VarianceEstimates::injected(vec![0.0], vec![0.7]).unwrap();
    let t = evaluate_criteria(&single, &proxy8(), &v, None).unwrap();
    assert_eq!(t.rows.len(), 1);
    assert_eq!(t.rows[0].mod_risk, 0.7);
}

#[test]
fn bootstrap_examples() {
    let consts = CandidateFamily::constants(&[2.0, 5.0]).unwrap();
    let m = replicate_estimates(&consts, &proxy8(), &ResamplePlan::seeded(3, 4)).unwrap();
    assert!(m.rows().iter().all(|r| r == &vec![2.0, 5.0]));

    let s = proxy8();
    let identity = ResamplePlan::explicit(vec![(0..8).collect(); 4]);
    let fam = scenario_family(Scenario::Proxy, &default_weights(Scenario::Proxy)).unwrap();
    let orig = fam.evaluate_all(&s).unwrap();
    let m = replicate_estimates(&fam, &s, &identity).unwrap();
    assert!(m.rows().iter().all(|r| r == &orig));

    let two = values(&[0.0, 2.0]);
    let base = CandidateFamily::from_evaluators(vec!["mean".into()], vec![mean_y()]).unwrap();
    let plan = ResamplePlan::explicit(vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    assert_eq!(replicate_estimates(&base, &two, &plan).unwrap().column(0), vec![0.0, 1.0, 2.0]);

    let m = ReplicateMatrix::from_rows(vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 4.0]], vec!["a".into(), "b".into()]);
    let v = variances_from_replicates(&m);
    assert_eq!(v.var_g, vec![1.0, 4.0]);
    assert_eq!(v.var_diff, vec![0.0, 1.0]);
    let flat = ReplicateMatrix::from_rows(vec![vec![3.0, 1.0]; 5], vec!["a".into(), "b".into()]);
    let v = variances_from_replicates(&flat);
    assert_eq!((v.var_g, v.var_diff), (vec![0.0, 0.0], vec![0.0, 0.0]));
}

#[test]
fn percentile_examples() {
    let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
    let ci = percentile_interval(&hundred, 0.95).unwrap();
    assert_eq!((ci.lower, ci.upper), (3.0, 98.0));
    let forty: Vec<f64> = (1..=40).map(f64::from).collect();
    let ci = percentile_interval(&forty, 0.9).unwrap();
    assert_eq!((ci.lower, ci.upper), (2.0, 38.0));
    let ci = percentile_interval(&[1.5; 9], 0.95).unwrap();
    assert_eq!((ci.lower, ci.upper), (1.5, 1.5));
}

#[test]
fn degenerate_intervals() {
    let consts = CandidateFamily::constants(&[2.0, 5.0]).unwrap();
    let plan = ResamplePlan::seeded(50, 1);
    let (sel, ci) = select_ci_shortcut(&consts, &proxy8(), &plan, 0.95).unwrap();
    assert_eq!((sel.estimate, ci.lower, ci.upper), (2.0, 2.0, 2.0));
    let full = select_ci_full(&consts, &proxy8(), &plan, &ResamplePlan::seeded(10, 2), 0.95).unwrap();
    assert_eq!((full.lower, full.upper), (2.0, 2.0));

    // A single-candidate family reduces to the plain percentile bootstrap.
    let s = values(&[0.3, 1.2, -0.5, 2.2, 0.9, 1.1, -1.0, 0.4]);
    let base = CandidateFamily::from_evaluators(vec!["mean".into()], vec![mean_y()]).unwrap();
    let (_, ci) = select_ci_shortcut(&base, &s, &plan, 0.9).unwrap();
    let plain = percentile_interval(&replicate_estimates(&base, &s, &plan).unwrap().column(0), 0.9).unwrap();
    assert_eq!(ci, plain);
    let full = select_ci_full(&base, &s, &plan, &ResamplePlan::seeded(10, 2), 0.9).unwrap();
    assert_eq!(full, plain);
}
