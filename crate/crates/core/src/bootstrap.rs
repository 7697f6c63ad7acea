//! Nonparametric bootstrap: replicate matrices, variance terms, percentile
//! intervals and confidence intervals for the selected estimate.
//!
//! All candidates are evaluated on the same `B` resamples, giving a `B × (G+1)`
//! [`ReplicateMatrix`]. Both variance terms of the risk criteria come from
//! that matrix, and the shortcut interval reuses it as well: each replicate
//! re-runs the selection rule with the variance terms held fixed and
//! contributes the estimate it selects.

use rand::Rng;
use thiserror::Error;

use crate::estimands::{CandidateFamily, EstimationError, ScenarioSample};
use crate::rng::{self, purpose};
use crate::selection::{
    argmin_with_tiebreak, modified_risk, select, Criterion, RiskTable, SelectionError,
    SelectionResult, VarianceEstimates, VarianceSource,
};

/// Attempts per replicate before giving up.
pub const MAX_ATTEMPTS: usize = 100;

/// Default replicate count for variance estimation.
pub const DEFAULT_B_VAR: usize = 100;
/// Default replicate count for confidence intervals.
pub const DEFAULT_B_CI: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BootstrapError {
    #[error("invalid resample plan: {0}")]
    InvalidPlan(String),
    #[error("estimator fails on the original sample: {0}")]
    Original(#[source] EstimationError),
    #[error("replicate {replicate} failed {attempts} consecutive draws (last error: {last})")]
    ReplicateExhausted { replicate: usize, attempts: usize, last: EstimationError },
    #[error("explicit replicate {replicate} failed: {source}")]
    ExplicitReplicateFailed {
        replicate: usize,
        #[source]
        source: EstimationError,
    },
    #[error("confidence level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),
    #[error("percentile interval needs at least 2 values, got {0}")]
    TooFewValues(usize),
    #[error(transparent)]
    Selection(#[from] SelectionError),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexSource {
    /// Indices drawn from the stream keyed by `(seed, replicate, attempt)`.
    SeededRng,
    /// One index list per replicate, each of the sample's length.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResamplePlan {
    pub b: usize,
    pub seed: u64,
    pub index_source: IndexSource,
}

impl ResamplePlan {
    pub fn seeded(b: usize, seed: u64) -> Self {
        Self { b, seed, index_source: IndexSource::SeededRng }
    }

    pub fn explicit(lists: Vec<Vec<usize>>) -> Self {
        Self { b: lists.len(), seed: 0, index_source: IndexSource::Explicit(lists) }
    }

    fn validate(&self, sample: &ScenarioSample) -> Result<(), BootstrapError> {
        if self.b < 2 {
            return Err(BootstrapError::InvalidPlan(format!("need at least 2 replicates, got {}", self.b)));
        }
        if let IndexSource::Explicit(lists) = &self.index_source {
            if lists.len() != self.b {
                return Err(BootstrapError::InvalidPlan("replicate count does not match index lists".into()));
            }
            let strata = sample.resample_strata();
            for (b, list) in lists.iter().enumerate() {
                if list.len() != sample.len() {
                    return Err(BootstrapError::InvalidPlan(format!(
                        "index list {b} has length {}, sample has {}",
                        list.len(),
                        sample.len()
                    )));
                }
                for range in &strata {
                    if list[range.clone()].iter().any(|i| !range.contains(i)) {
                        return Err(BootstrapError::InvalidPlan(format!(
                            "index list {b} crosses resampling strata"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `B × (G+1)` grid of candidate estimates on bootstrap resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateMatrix {
    values: Vec<Vec<f64>>,
    labels: Vec<String>,
    redraws: usize,
}

impl ReplicateMatrix {
    /// Wraps precomputed rows (all of the same length).
    pub fn from_rows(values: Vec<Vec<f64>>, labels: Vec<String>) -> Self {
        debug_assert!(values.iter().all(|r| r.len() == labels.len()));
        Self { values, labels, redraws: 0 }
    }

    pub fn b(&self) -> usize {
        self.values.len()
    }

    pub fn candidates(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn column(&self, g: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[g]).collect()
    }

    /// Number of resamples that were discarded and redrawn.
    pub fn redraws(&self) -> usize {
        self.redraws
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

impl ConfidenceInterval {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `n` indices drawn independently and uniformly from `0..n`.
pub fn draw_resample_indices<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

// One resample of the whole sample, drawn stratum by stratum.
fn draw_stratified<R: Rng + ?Sized>(sample: &ScenarioSample, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(sample.len());
    for range in sample.resample_strata() {
        let offset = range.start;
        out.extend(draw_resample_indices(range.len(), rng).into_iter().map(|i| i + offset));
    }
    out
}

fn finite_or(values: Vec<f64>) -> Result<Vec<f64>, EstimationError> {
    // A non-finite estimate is treated like a failed evaluation.
    if values.iter().all(|v| v.is_finite()) {
        Ok(values)
    } else {
        Err(EstimationError::DegenerateTreatment)
    }
}

/// Runs `eval` on resample `b`, redrawing on failure. Returns the value and
/// the number of redraws.
fn run_replicate<T>(
    sample: &ScenarioSample,
    plan: &ResamplePlan,
    b: usize,
    eval: impl Fn(&ScenarioSample, usize) -> Result<T, EstimationError>,
) -> Result<(T, usize), BootstrapError> {
    match &plan.index_source {
        IndexSource::Explicit(lists) => eval(&sample.subset(&lists[b]), 0)
            .map(|v| (v, 0))
            .map_err(|source| BootstrapError::ExplicitReplicateFailed { replicate: b, source }),
        IndexSource::SeededRng => {
            let mut last = None;
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = rng::stream(plan.seed, &[purpose::REPLICATE, b as u64, attempt as u64]);
                let idx = draw_stratified(sample, &mut rng);
                match eval(&sample.subset(&idx), attempt) {
                    Ok(v) => return Ok((v, attempt)),
                    Err(e) => last = Some(e),
                }
            }
            Err(BootstrapError::ReplicateExhausted {
                replicate: b,
                attempts: MAX_ATTEMPTS,
                last: last.expect("at least one attempt"),
            })
        }
    }
}

/// Evaluates every candidate on each of the plan's resamples.
///
/// Resamples on which some estimator fails (for instance an empty stratum)
/// are redrawn from a fresh stream, at most [`MAX_ATTEMPTS`] times per row.
/// IvFusion samples are resampled separately within the complete and the
/// incomplete block.
pub fn replicate_estimates(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    plan: &ResamplePlan,
) -> Result<ReplicateMatrix, BootstrapError> {
    plan.validate(sample)?;
    family.evaluate_all(sample).map_err(BootstrapError::Original)?;
    let rows = crate::par::map_indexed(plan.b, |b| {
        run_replicate(sample, plan, b, |s, _| family.evaluate_all(s).and_then(finite_or))
    });
    let mut values = Vec::with_capacity(plan.b);
    let mut redraws = 0;
    for row in rows {
        let (v, r) = row?;
        values.push(v);
        redraws += r;
    }
    Ok(ReplicateMatrix { values, labels: family.labels().to_vec(), redraws })
}

fn sample_variance(values: impl Iterator<Item = f64> + Clone, b: usize) -> f64 {
    let mean = values.clone().sum::<f64>() / b as f64;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1) as f64
}

/// Bootstrap variance terms with the `1/(B−1)` normalization:
/// `var_diff[g]` from the column of `θ̂₀ − θ̂_g`, `var_g[g]` from the column of
/// `θ̂_g`. `var_diff[0]` is exactly zero.
pub fn variances_from_replicates(matrix: &ReplicateMatrix) -> VarianceEstimates {
    let b = matrix.b();
    let rows = &matrix.values;
    let g_count = matrix.candidates();
    let mut var_diff = vec![0.0; g_count];
    let mut var_g = vec![0.0; g_count];
    for g in 0..g_count {
        var_g[g] = sample_variance(rows.iter().map(|r| r[g]), b);
        if g > 0 {
            var_diff[g] = sample_variance(rows.iter().map(|r| r[0] - r[g]), b);
        }
    }
    VarianceEstimates { var_diff, var_g, source: VarianceSource::Bootstrap }
}

// Order-statistic rank for a quantile position, snapping floating noise so
// that e.g. 0.95 · 40 counts as 38.
fn ceil_rank(pos: f64, b: usize) -> usize {
    let snapped = if (pos - pos.round()).abs() < 1e-9 { pos.round() } else { pos.ceil() };
    (snapped as usize).clamp(1, b)
}

/// Percentile interval using the ceiling-rank order statistics
/// `⌈(1−level)/2 · B⌉` and `⌈(1+level)/2 · B⌉` (1-based, clamped to `[1, B]`).
pub fn percentile_interval(values: &[f64], level: f64) -> Result<ConfidenceInterval, BootstrapError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(BootstrapError::InvalidLevel(level));
    }
    let b = values.len();
    if b < 2 {
        return Err(BootstrapError::TooFewValues(b));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = ceil_rank((1.0 - level) / 2.0 * b as f64, b);
    let hi = ceil_rank((1.0 + level) / 2.0 * b as f64, b);
    Ok(ConfidenceInterval { lower: sorted[lo - 1], upper: sorted[hi - 1], level })
}

/// Which variance term closes the per-replicate shortcut criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShortcutVarianceTerm {
    /// `V̂ar(θ̂_g)`, the same term as the modified risk criterion.
    #[default]
    Candidate,
    /// `V̂ar(θ̂₀ − θ̂_g)` in both places. This always selects the baseline
    /// (its criterion is identically zero), so the interval reduces to the
    /// plain percentile bootstrap of `θ̂₀`.
    AsPrinted,
}

impl std::str::FromStr for ShortcutVarianceTerm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "candidate" => Ok(Self::Candidate),
            "as-printed" => Ok(Self::AsPrinted),
            other => Err(format!("unknown shortcut variance term `{other}` (candidate|as-printed)")),
        }
    }
}

/// Targeted selection on `sample`: bootstrap variance terms from `plan`, then
/// the modified-risk minimizer.
pub fn select_targeted(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    plan: &ResamplePlan,
) -> Result<SelectionResult, BootstrapError> {
    let matrix = replicate_estimates(family, sample, plan)?;
    selection_from_matrix(family, sample, &matrix)
}

/// Modified-risk selection on `sample` with variance terms taken from an
/// existing replicate matrix.
pub fn selection_from_matrix(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    matrix: &ReplicateMatrix,
) -> Result<SelectionResult, BootstrapError> {
    let variances = variances_from_replicates(matrix);
    let estimates = family.evaluate_all(sample).map_err(BootstrapError::Original)?;
    let table = RiskTable::from_estimates(family.labels(), &estimates, &variances, None);
    Ok(select(&table, Criterion::ModifiedRisk)?)
}

/// Estimate selected on each replicate row with the variance terms held fixed.
pub fn shortcut_replicate_estimates(
    matrix: &ReplicateMatrix,
    variances: &VarianceEstimates,
    term: ShortcutVarianceTerm,
) -> Vec<f64> {
    let g_count = matrix.candidates();
    let closing = match term {
        ShortcutVarianceTerm::Candidate => &variances.var_g,
        ShortcutVarianceTerm::AsPrinted => &variances.var_diff,
    };
    let mut crit = vec![0.0; g_count];
    let mut diff_sq = vec![0.0; g_count];
    matrix
        .values
        .iter()
        .map(|row| {
            for g in 0..g_count {
                let d = row[g] - row[0];
                diff_sq[g] = d * d;
                crit[g] = modified_risk(diff_sq[g], variances.var_diff[g], closing[g]);
            }
            row[argmin_with_tiebreak(&crit, &diff_sq)]
        })
        .collect()
}

/// Selection on the original sample plus the shortcut percentile interval,
/// both from a single replicate matrix.
pub fn select_ci_shortcut(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    plan: &ResamplePlan,
    level: f64,
) -> Result<(SelectionResult, ConfidenceInterval), BootstrapError> {
    select_ci_shortcut_with(family, sample, plan, level, ShortcutVarianceTerm::Candidate)
        .map(|(s, ci, _)| (s, ci))
}

/// [`select_ci_shortcut`] with an explicit closing variance term; also
/// returns the replicate matrix.
pub fn select_ci_shortcut_with(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    plan: &ResamplePlan,
    level: f64,
    term: ShortcutVarianceTerm,
) -> Result<(SelectionResult, ConfidenceInterval, ReplicateMatrix), BootstrapError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(BootstrapError::InvalidLevel(level));
    }
    let matrix = replicate_estimates(family, sample, plan)?;
    let selection = selection_from_matrix(family, sample, &matrix)?;
    let variances = variances_from_replicates(&matrix);
    let star = shortcut_replicate_estimates(&matrix, &variances, term);
    let ci = percentile_interval(&star, level)?;
    Ok((selection, ci, matrix))
}

/// Bootstraps the whole selection procedure: on every outer resample the
/// variance terms are re-estimated with an inner bootstrap of
/// `inner_plan.b` replicates before selecting. Costs `B × B_inner` family
/// evaluations.
pub fn select_ci_full(
    family: &CandidateFamily,
    sample: &ScenarioSample,
    plan: &ResamplePlan,
    inner_plan: &ResamplePlan,
    level: f64,
) -> Result<ConfidenceInterval, BootstrapError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(BootstrapError::InvalidLevel(level));
    }
    plan.validate(sample)?;
    if inner_plan.b < 2 {
        return Err(BootstrapError::InvalidPlan("inner plan needs at least 2 replicates".into()));
    }
    family.evaluate_all(sample).map_err(BootstrapError::Original)?;
    let estimates = crate::par::map_indexed(plan.b, |b| {
        run_replicate(sample, plan, b, |resample, attempt| {
            let inner = match &inner_plan.index_source {
                IndexSource::SeededRng => ResamplePlan::seeded(
                    inner_plan.b,
                    rng::derive_seed(inner_plan.seed, &[purpose::INNER, b as u64, attempt as u64]),
                ),
                IndexSource::Explicit(_) => inner_plan.clone(),
            };
            match select_targeted(family, resample, &inner) {
                Ok(sel) => Ok(sel.estimate),
                Err(BootstrapError::Original(e))
                | Err(BootstrapError::ReplicateExhausted { last: e, .. })
                | Err(BootstrapError::ExplicitReplicateFailed { source: e, .. }) => Err(e),
                Err(_) => Err(EstimationError::DegenerateTreatment),
            }
        })
    });
    let values = estimates.into_iter().map(|r| r.map(|(v, _)| v)).collect::<Result<Vec<_>, _>>()?;
    percentile_interval(&values, level)
}
