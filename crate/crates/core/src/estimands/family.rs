use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::{
    aipw_ate, aipw_overlap, diff_in_means, iv_ratio, ols_slope, product_estimator,
    EstimationError, Scenario, ScenarioSample,
};

/// A deterministic estimator: same sample, same value.
pub type Evaluator = Arc<dyn Fn(&ScenarioSample) -> Result<f64, EstimationError> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("candidate family is empty")]
    Empty,
    #[error("{labels} labels for {candidates} candidates")]
    LabelMismatch { labels: usize, candidates: usize },
    #[error("weight 0 (the baseline) is missing from the shrinkage grid")]
    MissingBaseline,
    #[error("shrinkage weights must lie in [0, 1] and be sorted ascending")]
    InvalidWeights,
}

#[derive(Clone)]
enum Kind {
    Explicit(Vec<Evaluator>),
    Shrinkage { a: Evaluator, b: Evaluator, weights: Vec<f64> },
}

/// Ordered list of labelled candidate estimators. Index 0 is the baseline.
#[derive(Clone)]
pub struct CandidateFamily {
    labels: Vec<String>,
    kind: Kind,
}

impl fmt::Debug for CandidateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CandidateFamily")
            .field("labels", &self.labels)
            .field("weights", &self.weights())
            .finish()
    }
}

impl CandidateFamily {
    /// Family of arbitrary estimators; the first one is the baseline.
    pub fn from_evaluators(labels: Vec<String>, evaluators: Vec<Evaluator>) -> Result<Self, FamilyError> {
        if evaluators.is_empty() {
            return Err(FamilyError::Empty);
        }
        if labels.len() != evaluators.len() {
            return Err(FamilyError::LabelMismatch { labels: labels.len(), candidates: evaluators.len() });
        }
        Ok(Self { labels, kind: Kind::Explicit(evaluators) })
    }

    /// Family of constant estimators, mostly useful in tests.
    pub fn constants(values: &[f64]) -> Result<Self, FamilyError> {
        let evaluators = values
            .iter()
            .map(|&v| Arc::new(move |_: &ScenarioSample| Ok(v)) as Evaluator)
            .collect();
        let labels = values.iter().map(|v| format!("c={v}")).collect();
        Self::from_evaluators(labels, evaluators)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Shrinkage weights, when the family is a shrinkage grid.
    pub fn weights(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Shrinkage { weights, .. } => Some(weights),
            Kind::Explicit(_) => None,
        }
    }

    /// Value of candidate `g` on `sample`. For shrinkage grids only the
    /// component estimators with nonzero weight are evaluated, so the
    /// baseline never depends on the alternative being computable.
    pub fn evaluate(&self, g: usize, sample: &ScenarioSample) -> Result<f64, EstimationError> {
        match &self.kind {
            Kind::Explicit(ev) => ev[g](sample),
            Kind::Shrinkage { a, b, weights } => {
                let w = weights[g];
                if w == 0.0 {
                    a(sample)
                } else if w == 1.0 {
                    b(sample)
                } else {
                    Ok((1.0 - w) * a(sample)? + w * b(sample)?)
                }
            }
        }
    }

    /// Values of every candidate on `sample`, in family order.
    pub fn evaluate_all(&self, sample: &ScenarioSample) -> Result<Vec<f64>, EstimationError> {
        match &self.kind {
            Kind::Explicit(ev) => ev.iter().map(|e| e(sample)).collect(),
            Kind::Shrinkage { a, b, weights } => {
                let va = a(sample)?;
                let vb = b(sample)?;
                Ok(weights
                    .iter()
                    .map(|&w| {
                        if w == 0.0 {
                            va
                        } else if w == 1.0 {
                            vb
                        } else {
                            (1.0 - w) * va + w * vb
                        }
                    })
                    .collect())
            }
        }
    }
}

/// Candidates `θ̂_w = (1 − w)·a + w·b` for each weight; `w = 0` (the
/// baseline `a`) must be present and weights must be sorted ascending in
/// `[0, 1]`. Labels default to `w=<weight>`.
pub fn shrinkage_family(
    a: Evaluator,
    b: Evaluator,
    weights: &[f64],
    labels: Option<Vec<String>>,
) -> Result<CandidateFamily, FamilyError> {
    if weights.is_empty() {
        return Err(FamilyError::Empty);
    }
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) || weights.windows(2).any(|p| p[0] > p[1]) {
        return Err(FamilyError::InvalidWeights);
    }
    if weights[0] != 0.0 {
        return Err(FamilyError::MissingBaseline);
    }
    let labels = labels.unwrap_or_else(|| weights.iter().map(|w| format!("w={w}")).collect());
    if labels.len() != weights.len() {
        return Err(FamilyError::LabelMismatch { labels: labels.len(), candidates: weights.len() });
    }
    Ok(CandidateFamily { labels, kind: Kind::Shrinkage { a, b, weights: weights.to_vec() } })
}

/// `{0, 0.1, …, 1.0}` for every scenario.
pub fn default_weights(_scenario: Scenario) -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// Grid without the pure alternative estimator (`w = 1`) for the
/// observational and proxy scenarios; the IV grid is unchanged.
pub fn printed_weights(scenario: Scenario) -> Vec<f64> {
    match scenario {
        Scenario::IvFusion => default_weights(scenario),
        _ => (0..=9).map(|k| k as f64 / 10.0).collect(),
    }
}

/// Shrinkage family between the scenario's baseline and its alternative:
/// AIPW ATE → AIPW overlap, IV ratio → OLS slope, difference in means →
/// product estimator.
pub fn scenario_family(scenario: Scenario, weights: &[f64]) -> Result<CandidateFamily, FamilyError> {
    let (a, b): (Evaluator, Evaluator) = match scenario {
        Scenario::Observational => (Arc::new(aipw_ate), Arc::new(aipw_overlap)),
        Scenario::IvFusion => (Arc::new(iv_ratio), Arc::new(ols_slope)),
        Scenario::Proxy => (Arc::new(diff_in_means), Arc::new(product_estimator)),
    };
    shrinkage_family(a, b, weights, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimands::ProxyRecord;

    fn any_sample() -> ScenarioSample {
        ScenarioSample::proxy(vec![ProxyRecord { y: 0.0, t: 0, p: 0 }]).unwrap()
    }

    fn constant(v: f64) -> Evaluator {
        Arc::new(move |_: &ScenarioSample| Ok(v))
    }

    #[test]
    fn endpoints_and_midpoint() {
        let s = any_sample();
        let f = shrinkage_family(constant(2.0), constant(4.0), &[0.0, 1.0], None).unwrap();
        assert_eq!(f.evaluate_all(&s).unwrap(), vec![2.0, 4.0]);
        let f = shrinkage_family(constant(2.0), constant(4.0), &[0.0, 0.5], None).unwrap();
        assert_eq!(f.evaluate(1, &s).unwrap(), 3.0);
    }

    #[test]
    fn eleven_point_grid() {
        let f = scenario_family(Scenario::Proxy, &default_weights(Scenario::Proxy)).unwrap();
        assert_eq!(f.len(), 11);
        assert_eq!(f.weights().unwrap()[0], 0.0);
        assert_eq!(f.labels()[0], "w=0");
        assert_eq!(f.labels()[10], "w=1");
        assert_eq!(printed_weights(Scenario::Observational).len(), 10);
        assert_eq!(printed_weights(Scenario::IvFusion).len(), 11);
    }

    #[test]
    fn grid_validation() {
        let (a, b) = (constant(1.0), constant(2.0));
        assert_eq!(
            shrinkage_family(a.clone(), b.clone(), &[0.1, 0.5], None).unwrap_err(),
            FamilyError::MissingBaseline
        );
        assert_eq!(
            shrinkage_family(a.clone(), b.clone(), &[0.0, 0.7, 0.5], None).unwrap_err(),
            FamilyError::InvalidWeights
        );
        assert_eq!(shrinkage_family(a, b, &[0.0, 1.5], None).unwrap_err(), FamilyError::InvalidWeights);
        assert!(CandidateFamily::from_evaluators(vec![], vec![]).is_err());
    }

    #[test]
    fn baseline_does_not_need_alternative() {
        let failing: Evaluator = Arc::new(|_: &ScenarioSample| Err(EstimationError::ZeroOverlapDenominator));
        let f = shrinkage_family(constant(1.5), failing, &[0.0, 0.5], None).unwrap();
        assert_eq!(f.evaluate(0, &any_sample()).unwrap(), 1.5);
        assert!(f.evaluate(1, &any_sample()).is_err());
        assert!(f.evaluate_all(&any_sample()).is_err());
    }
}
