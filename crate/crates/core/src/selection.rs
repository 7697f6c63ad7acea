//! Risk criteria and the selection rule.
//!
//! For candidate `g` with estimate `θ̂_g` and baseline `θ̂₀`:
//!
//! ```text
//! raw risk       R̂(g)    = (θ̂_g − θ̂₀)² − V̂ar(θ̂_g − θ̂₀) + V̂ar(θ̂_g)
//! modified risk  R̂ᵐᵒᵈ(g) = max((θ̂_g − θ̂₀)² − V̂ar(θ̂_g − θ̂₀), 0) + V̂ar(θ̂_g)
//! K-fold CV      R̃(g)    = (1/K) Σₖ (θ̂_g(D ∖ Dₖ) − θ̂₀(Dₖ))²
//! ```
//!
//! Selection minimizes the requested criterion. Exact ties go to the
//! candidate closest to the baseline (smallest squared gap), remaining ties to
//! the smallest index. No tolerance is applied when comparing.

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::estimands::{CandidateFamily, EstimationError, ScenarioSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectionError {
    #[error("estimator failed{}: {source}", fold_suffix(*.fold))]
    Estimation {
        fold: Option<usize>,
        #[source]
        source: EstimationError,
    },
    #[error("fold count must be at least 2, got {0}")]
    InvalidFoldCount(usize),
    #[error("stratum {stratum} has {count} records, fewer than the {k} folds requested")]
    TooFewRecords { stratum: usize, count: usize, k: usize },
    #[error("fold plan covers {plan} records but the sample has {sample}")]
    FoldPlanMismatch { plan: usize, sample: usize },
    #[error("fold {0} is empty")]
    EmptyFold(usize),
    #[error("variance estimates cover {variances} candidates, family has {family}")]
    VarianceMismatch { variances: usize, family: usize },
    #[error("variance estimates must be finite and nonnegative with var_diff[0] = 0")]
    InvalidVariance,
    #[error("the cv_risk column was not computed")]
    MissingCvColumn,
}

fn fold_suffix(fold: Option<usize>) -> String {
    fold.map(|k| format!(" on fold {k}")).unwrap_or_default()
}

impl From<EstimationError> for SelectionError {
    fn from(source: EstimationError) -> Self {
        SelectionError::Estimation { fold: None, source }
    }
}

/// `diff_sq − var_diff + var_g`; may be negative.
pub fn raw_risk(diff_sq: f64, var_diff: f64, var_g: f64) -> f64 {
    diff_sq - var_diff + var_g
}

/// `max(diff_sq − var_diff, 0) + var_g`.
pub fn modified_risk(diff_sq: f64, var_diff: f64, var_g: f64) -> f64 {
    (diff_sq - var_diff).max(0.0) + var_g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceSource {
    Bootstrap,
    Injected,
}

/// `var_diff[g]` estimates `Var(θ̂_g − θ̂₀)`, `var_g[g]` estimates `Var(θ̂_g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceEstimates {
    pub var_diff: Vec<f64>,
    pub var_g: Vec<f64>,
    pub source: VarianceSource,
}

impl VarianceEstimates {
    /// Externally supplied variances (closed form, or known exactly).
    pub fn injected(var_diff: Vec<f64>, var_g: Vec<f64>) -> Result<Self, SelectionError> {
        let v = Self { var_diff, var_g, source: VarianceSource::Injected };
        v.validate()?;
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.var_g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.var_g.is_empty()
    }

    pub(crate) fn validate(&self) -> Result<(), SelectionError> {
        let ok = self.var_diff.len() == self.var_g.len()
            && self.var_diff.first().is_none_or(|&v| v == 0.0)
            && self
                .var_diff
                .iter()
                .chain(&self.var_g)
                .all(|v| v.is_finite() && *v >= 0.0);
        if ok {
            Ok(())
        } else {
            Err(SelectionError::InvalidVariance)
        }
    }
}

/// Assignment of records to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignment: Vec<usize>,
}

impl FoldPlan {
    /// Plan from an explicit record → fold map; every fold must be used.
    pub fn from_assignment(k: usize, assignment: Vec<usize>) -> Result<Self, SelectionError> {
        if k < 2 {
            return Err(SelectionError::InvalidFoldCount(k));
        }
        let mut sizes = vec![0usize; k];
        for &f in &assignment {
            if f >= k {
                return Err(SelectionError::InvalidFoldCount(k));
            }
            sizes[f] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&c| c == 0) {
            return Err(SelectionError::EmptyFold(empty));
        }
        Ok(Self { k, assignment })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }

    /// Indices of fold `k` (held out) and of its complement (training).
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut held = Vec::new();
        let mut train = Vec::new();
        for (idx, &f) in self.assignment.iter().enumerate() {
            if f == fold {
                held.push(idx);
            } else {
                train.push(idx);
            }
        }
        (held, train)
    }
}

/// Random balanced fold assignment, stratified by
/// [`ScenarioSample::fold_strata`].
///
/// Records of each stratum are shuffled and dealt to folds round-robin with a
/// running offset, so fold sizes differ by at most one both overall and
/// within every stratum.
pub fn make_folds<R: Rng + ?Sized>(
    sample: &ScenarioSample,
    k: usize,
    rng: &mut R,
) -> Result<FoldPlan, SelectionError> {
    if k < 2 {
        return Err(SelectionError::InvalidFoldCount(k));
    }
    let strata = sample.fold_strata();
    let n_strata = strata.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n_strata];
    for (idx, &s) in strata.iter().enumerate() {
        groups[s].push(idx);
    }
    let mut assignment = vec![0usize; strata.len()];
    let mut cursor = 0usize;
    for (stratum, group) in groups.iter_mut().enumerate() {
        if group.is_empty() {
            continue;
        }
        if group.len() < k {
            return Err(SelectionError::TooFewRecords { stratum, count: group.len(), k });
        }
        group.shuffle(rng);
        for &idx in group.iter() {
            assignment[idx] = cursor % k;
            cursor += 1;
        }
    }
    FoldPlan::from_assignment(k, assignment)
}

/// Mean of squared gaps over `(candidate_on_training, baseline_on_held_out)`
/// pairs.
pub fn cv_from_fold_estimates(pairs: &[(f64, f64)]) -> f64 {
    pairs.iter().map(|(c, b)| (c - b) * (c - b)).sum::<f64>() / pairs.len() as f64
}

fn check_plan(sample: &ScenarioSample, folds: &FoldPlan) -> Result<(), SelectionError> {
    if folds.assignment.len() != sample.len() {
        return Err(SelectionError::FoldPlanMismatch { plan: folds.assignment.len(), sample: sample.len() });
    }
    Ok(())
}

/// Cross-validation criterion of candidate `g`: the candidate is fit on the
/// training part `D ∖ Dₖ`, the baseline on the held-out fold `Dₖ`.
pub fn cv_risk(
    family: &CandidateFamily,
    g: usize,
    sample: &ScenarioSample,
    folds: &FoldPlan,
) -> Result<f64, SelectionError> {
    check_plan(sample, folds)?;
    let mut pairs = Vec::with_capacity(folds.k);
    for fold in 0..folds.k {
        let (held, train) = folds.split(fold);
        let tag = |source| SelectionError::Estimation { fold: Some(fold), source };
        let cand = family.evaluate(g, &sample.subset(&train)).map_err(tag)?;
        let base = family.evaluate(0, &sample.subset(&held)).map_err(tag)?;
        pairs.push((cand, base));
    }
    Ok(cv_from_fold_estimates(&pairs))
}

/// [`cv_risk`] for every candidate at once, evaluating each fold's training
/// and held-out subsamples a single time. Folds are accumulated in fold order.
pub fn cv_risks(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    folds: &FoldPlan,
) -> Result<Vec<f64>, SelectionError> {
    check_plan(sample, folds)?;
    let mut train_est = Vec::with_capacity(folds.k);
    let mut base_est = Vec::with_capacity(folds.k);
    for fold in 0..folds.k {
        let (held, train) = folds.split(fold);
        let tag = |source| SelectionError::Estimation { fold: Some(fold), source };
        train_est.push(family.evaluate_all(&sample.subset(&train)).map_err(tag)?);
        base_est.push(family.evaluate(0, &sample.subset(&held)).map_err(tag)?);
    }
    Ok((0..family.len())
        .map(|g| {
            let pairs: Vec<(f64, f64)> =
                train_est.iter().zip(&base_est).map(|(t, &b)| (t[g], b)).collect();
            cv_from_fold_estimates(&pairs)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskRow {
    pub label: String,
    pub estimate: f64,
    pub diff_sq: f64,
    pub var_diff: f64,
    pub var_g: f64,
    pub raw_risk: f64,
    pub mod_risk: f64,
    pub cv_risk: Option<f64>,
}

/// Per-candidate criteria; row `g` belongs to candidate `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskTable {
    pub rows: Vec<RiskRow>,
}

impl RiskTable {
    /// Assembles the table from point estimates (baseline first), variance
    /// estimates and optionally precomputed CV values.
    pub fn from_estimates(
        labels: &[String],
        estimates: &[f64],
        variances: &VarianceEstimates,
        cv: Option<&[f64]>,
    ) -> Self {
        let base = estimates[0];
        let rows = estimates
            .iter()
            .enumerate()
            .map(|(g, &est)| {
                let diff_sq = if g == 0 { 0.0 } else { (est - base) * (est - base) };
                let (vd, vg) = (variances.var_diff[g], variances.var_g[g]);
                RiskRow {
                    label: labels[g].clone(),
                    estimate: est,
                    diff_sq,
                    var_diff: vd,
                    var_g: vg,
                    raw_risk: raw_risk(diff_sq, vd, vg),
                    mod_risk: modified_risk(diff_sq, vd, vg),
                    cv_risk: cv.map(|c| c[g]),
                }
            })
            .collect();
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_cv(&self) -> bool {
        self.rows.iter().all(|r| r.cv_risk.is_some())
    }

    pub fn column(&self, criterion: Criterion) -> Option<Vec<f64>> {
        match criterion {
            Criterion::ModifiedRisk => Some(self.rows.iter().map(|r| r.mod_risk).collect()),
            Criterion::CvRisk => self.rows.iter().map(|r| r.cv_risk).collect(),
        }
    }

    pub fn diff_sq(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.diff_sq).collect()
    }
}

/// Computes every criterion for `family` on `sample`; the `cv_risk` column is
/// filled only when `folds` is given.
pub fn evaluate_criteria(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    variances: &VarianceEstimates,
    folds: Option<&FoldPlan>,
) -> Result<RiskTable, SelectionError> {
    if variances.len() != family.len() {
        return Err(SelectionError::VarianceMismatch { variances: variances.len(), family: family.len() });
    }
    variances.validate()?;
    let estimates = family.evaluate_all(sample)?;
    let cv = folds.map(|f| cv_risks(family, sample, f)).transpose()?;
    Ok(RiskTable::from_estimates(family.labels(), &estimates, variances, cv.as_deref()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    ModifiedRisk,
    CvRisk,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub selected_g: usize,
    pub selected_label: String,
    pub estimate: f64,
    pub criterion: Criterion,
    pub table: RiskTable,
}

/// Index minimizing `values`; exact ties go to the smallest `diff_sq`, then
/// to the smallest index.
pub fn argmin_with_tiebreak(values: &[f64], diff_sq: &[f64]) -> usize {
    let mut best = 0;
    for g in 1..values.len() {
        let (v, d) = (values[g], diff_sq[g]);
        if v < values[best] || (v == values[best] && d < diff_sq[best]) {
            best = g;
        }
    }
    best
}

/// Picks the candidate minimizing `criterion`.
pub fn select(table: &RiskTable, criterion: Criterion) -> Result<SelectionResult, SelectionError> {
    let values = table.column(criterion).ok_or(SelectionError::MissingCvColumn)?;
    let g = argmin_with_tiebreak(&values, &table.diff_sq());
    Ok(SelectionResult {
        selected_g: g,
        selected_label: table.rows[g].label.clone(),
        estimate: table.rows[g].estimate,
        criterion,
        table: table.clone(),
    })
}

impl SelectionResult {
    /// CSV rendering: `g,label,estimate,diff_sq,var_diff,var_g,raw_risk,mod_risk,cv_risk,selected`.
    pub fn to_csv(&self) -> String {
        crate::io::risk_table_csv(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimands::{IvRecord, ObsRecord};
    use crate::rng::stream;

    fn table(mod_risk: &[f64], diff_sq: &[f64]) -> RiskTable {
        RiskTable {
            rows: mod_risk
                .iter()
                .zip(diff_sq)
                .enumerate()
                .map(|(g, (&m, &d))| RiskRow {
                    label: format!("g{g}"),
                    estimate: g as f64,
                    diff_sq: d,
                    var_diff: 0.0,
                    var_g: 0.0,
                    raw_risk: m,
                    mod_risk: m,
                    cv_risk: None,
                })
                .collect(),
        }
    }

    fn iv_sample(n: usize) -> ScenarioSample {
        ScenarioSample::iv_fusion(
            (0..n).map(|k| IvRecord { y: k as f64, t: k as f64, i: Some(k as f64) }).collect(),
        )
        .unwrap()
    }

    #[test]
    fn raw_risk_formula() {
        assert!((raw_risk(0.04, 0.01, 0.02) - 0.05).abs() < 1e-15);
        assert_eq!(raw_risk(0.0, 0.0, 0.7), 0.7);
        assert!((raw_risk(0.005, 0.02, 0.01) + 0.005).abs() < 1e-15);
    }

    #[test]
    fn modified_risk_formula() {
        assert_eq!(modified_risk(0.005, 0.02, 0.01), 0.01);
        assert!((modified_risk(0.04, 0.01, 0.02) - 0.05).abs() < 1e-15);
        assert_eq!(modified_risk(0.0, 0.0, 0.0), 0.0);
    }

    #[test]
    fn selection_examples() {
        assert_eq!(select(&table(&[0.05, 0.03, 0.07], &[0.0, 0.1, 0.2]), Criterion::ModifiedRisk).unwrap().selected_g, 1);
        assert_eq!(select(&table(&[0.03, 0.03], &[0.0, 0.01]), Criterion::ModifiedRisk).unwrap().selected_g, 0);
        assert_eq!(select(&table(&[0.1, 0.1, 0.1], &[0.2, 0.2, 0.2]), Criterion::ModifiedRisk).unwrap().selected_g, 0);
        // later candidate closer to the baseline wins an exact tie
        assert_eq!(select(&table(&[0.2, 0.1, 0.1], &[0.0, 0.3, 0.2]), Criterion::ModifiedRisk).unwrap().selected_g, 2);
        assert_eq!(
            select(&table(&[0.1], &[0.0]), Criterion::CvRisk).unwrap_err(),
            SelectionError::MissingCvColumn
        );
    }

    #[test]
    fn folds_balanced() {
        let plan = make_folds(&iv_sample(10), 5, &mut stream(1, &[])).unwrap();
        assert_eq!(plan.fold_sizes(), vec![2; 5]);
        let plan = make_folds(&iv_sample(11), 5, &mut stream(1, &[])).unwrap();
        let mut sizes = plan.fold_sizes();
        sizes.sort();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
        let again = make_folds(&iv_sample(11), 5, &mut stream(1, &[])).unwrap();
        assert_eq!(plan, again);
        assert_eq!(make_folds(&iv_sample(4), 5, &mut stream(1, &[])).unwrap_err(),
            SelectionError::TooFewRecords { stratum: 0, count: 4, k: 5 });
        assert_eq!(make_folds(&iv_sample(4), 1, &mut stream(1, &[])).unwrap_err(), SelectionError::InvalidFoldCount(1));
    }

    #[test]
    fn iv_folds_keep_completeness_ratio() {
        let mut recs: Vec<IvRecord> = (0..23).map(|k| IvRecord { y: 0.0, t: k as f64, i: Some(1.0) }).collect();
        recs.extend((0..17).map(|k| IvRecord { y: 0.0, t: k as f64, i: None }));
        let s = ScenarioSample::iv_fusion(recs).unwrap();
        let plan = make_folds(&s, 4, &mut stream(3, &[])).unwrap();
        for fold in 0..4 {
            let (held, _) = plan.split(fold);
            let complete = held.iter().filter(|&&i| i < 23).count();
            assert!((5..=6).contains(&complete), "complete {complete}");
            assert!((4..=5).contains(&(held.len() - complete)));
        }
    }

    #[test]
    fn obs_folds_spread_every_cell() {
        let recs: Vec<ObsRecord> = (0..60)
            .map(|k| ObsRecord { y: k as f64, t: (k % 3 == 0) as u8, x: (k % 2) as u8 })
            .collect();
        let s = ScenarioSample::observational(recs).unwrap();
        let plan = make_folds(&s, 10, &mut stream(5, &[])).unwrap();
        let strata = s.fold_strata();
        for fold in 0..10 {
            let (held, _) = plan.split(fold);
            for cell in 0..4 {
                assert!(held.iter().any(|&i| strata[i] == cell));
            }
        }
    }

    #[test]
    fn cv_risk_constants() {
        let s = iv_sample(4);
        let plan = FoldPlan::from_assignment(2, vec![0, 0, 1, 1]).unwrap();
        let f = CandidateFamily::constants(&[2.0, 2.0]).unwrap();
        assert_eq!(cv_risk(&f, 1, &s, &plan).unwrap(), 0.0);
        let f = CandidateFamily::constants(&[2.0, 5.0]).unwrap();
        assert_eq!(cv_risk(&f, 1, &s, &plan).unwrap(), 9.0);
        assert_eq!(cv_risks(&f, &s, &plan).unwrap(), vec![0.0, 9.0]);
    }

    #[test]
    fn cv_risk_hand_enumeration() {
        // θ̂₀ = mean of y over {1, 2, 3, 4}; folds {1,2} | {3,4}
        let s = ScenarioSample::iv_fusion(
            (1..=4).map(|k| IvRecord { y: k as f64, t: 0.0, i: Some(0.0) }).collect(),
        )
        .unwrap();
        let mean: crate::estimands::Evaluator = std::sync::Arc::new(|s: &ScenarioSample| {
            let r = s.as_iv().unwrap();
            Ok(r.iter().map(|r| r.y).sum::<f64>() / r.len() as f64)
        });
        let f = CandidateFamily::from_evaluators(vec!["m0".into(), "m1".into()], vec![mean.clone(), mean]).unwrap();
        let plan = FoldPlan::from_assignment(2, vec![0, 0, 1, 1]).unwrap();
        assert_eq!(cv_risk(&f, 1, &s, &plan).unwrap(), 4.0);
    }

    #[test]
    fn criteria_assembly() {
        let s = iv_sample(3);
        let f = CandidateFamily::constants(&[1.0]).unwrap();
        let v = VarianceEstimates::injected(vec![0.0], vec![0.3]).unwrap();
        let t = evaluate_criteria(&f, &s, &v, None).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.rows[0].mod_risk, 0.3);
        assert!(!t.has_cv());

        let f = CandidateFamily::constants(&[2.0, 3.0]).unwrap();
        let v = VarianceEstimates::injected(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let t = evaluate_criteria(&f, &s, &v, None).unwrap();
        assert_eq!(t.rows.iter().map(|r| r.raw_risk).collect::<Vec<_>>(), vec![0.0, 1.0]);
        assert_eq!(t.rows.iter().map(|r| r.mod_risk).collect::<Vec<_>>(), vec![0.0, 1.0]);

        let plan = FoldPlan::from_assignment(3, vec![0, 1, 2]).unwrap();
        let t = evaluate_criteria(&f, &s, &v, Some(&plan)).unwrap();
        assert_eq!(t.column(Criterion::CvRisk).unwrap(), vec![0.0, 1.0]);

        let bad = VarianceEstimates { var_diff: vec![0.1, 0.0], var_g: vec![0.0, 0.0], source: VarianceSource::Injected };
        assert_eq!(evaluate_criteria(&f, &s, &bad, None).unwrap_err(), SelectionError::InvalidVariance);
    }
}
