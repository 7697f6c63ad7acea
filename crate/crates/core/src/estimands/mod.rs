//! Sample record types and the scenario estimators.
//!
//! Three kinds of samples are supported:
//!
//! * [`Scenario::Observational`]: outcome `y`, binary treatment `t`, binary
//!   covariate `x`. Estimators: AIPW average treatment effect (baseline) and
//!   the AIPW overlap-weighted effect.
//! * [`Scenario::IvFusion`]: outcome `y`, continuous treatment `t` and an
//!   instrument `i` that is missing for an auxiliary block of records.
//!   Estimators: IV covariance ratio on the complete block (baseline) and the
//!   OLS slope on all records.
//! * [`Scenario::Proxy`]: outcome `y`, binary treatment `t`, binary proxy `p`.
//!   Estimators: difference in means (baseline) and the product of the
//!   `t -> p` and `p -> y` contrasts.

mod estimators;
mod family;

pub use estimators::{
    aipw_ate, aipw_overlap, diff_in_means, empirical_strata, iv_ratio, ols_slope,
    product_estimator, StratumStats,
};
pub use family::{
    default_weights, printed_weights, scenario_family, shrinkage_family, CandidateFamily,
    Evaluator, FamilyError,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Observational,
    IvFusion,
    Proxy,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Observational, Scenario::IvFusion, Scenario::Proxy];

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Observational => "obs",
            Scenario::IvFusion => "iv",
            Scenario::Proxy => "proxy",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scenario `{0}` (expected obs, iv or proxy)")]
pub struct UnknownScenario(pub String);

impl FromStr for Scenario {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "obs" | "observational" => Ok(Scenario::Observational),
            "iv" | "iv-fusion" => Ok(Scenario::IvFusion),
            "proxy" => Ok(Scenario::Proxy),
            other => Err(UnknownScenario(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObsRecord {
    pub y: f64,
    pub t: u8,
    pub x: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvRecord {
    pub y: f64,
    pub t: f64,
    /// Instrument; `None` for records of the auxiliary incomplete sample.
    pub i: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProxyRecord {
    pub y: f64,
    pub t: u8,
    pub p: u8,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    /// `p̂(t|x) = 0`: no unit in cell `(x, t)` although `x` is observed.
    #[error("empty stratum: no units with x={x}, t={t}")]
    EmptyStratum { x: u8, t: u8 },
    #[error("overlap denominator is zero: every observed propensity is 0 or 1")]
    ZeroOverlapDenominator,
    #[error("degenerate instrument: empirical Cov(I, T) is zero")]
    DegenerateInstrument,
    #[error("degenerate treatment: empirical Var(T) is zero")]
    DegenerateTreatment,
    #[error("treatment arm t={arm} is empty")]
    EmptyArm { arm: u8 },
    #[error("proxy group p={p} is empty")]
    EmptyProxyGroup { p: u8 },
    #[error("estimator expects a {expected} sample, got {found}")]
    WrongScenario { expected: Scenario, found: Scenario },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("sample is empty")]
    Empty,
    #[error("record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
    #[error("instrument-bearing records must precede incomplete ones (record {index})")]
    CompleteFirstViolated { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Records {
    Observational(Vec<ObsRecord>),
    IvFusion { records: Vec<IvRecord>, n_complete: usize },
    Proxy(Vec<ProxyRecord>),
}

/// A validated, homogeneous sample for one scenario.
///
/// IvFusion samples keep their instrument-bearing records first, followed by
/// the incomplete ones; `n_complete` counts the former.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSample {
    records: Records,
}

fn check_binary(v: u8, index: usize, name: &str) -> Result<(), SampleError> {
    if v > 1 {
        return Err(SampleError::InvalidRecord { index, reason: format!("{name}={v} is not binary") });
    }
    Ok(())
}

fn check_finite(v: f64, index: usize, name: &str) -> Result<(), SampleError> {
    if !v.is_finite() {
        return Err(SampleError::InvalidRecord { index, reason: format!("{name} is not finite") });
    }
    Ok(())
}

impl ScenarioSample {
    pub fn observational(records: Vec<ObsRecord>) -> Result<Self, SampleError> {
        if records.is_empty() {
            return Err(SampleError::Empty);
        }
        for (k, r) in records.iter().enumerate() {
            check_finite(r.y, k, "y")?;
            check_binary(r.t, k, "t")?;
            check_binary(r.x, k, "x")?;
        }
        Ok(Self { records: Records::Observational(records) })
    }

    /// Builds an IvFusion sample. Records must already be ordered with every
    /// instrument-bearing record before the first incomplete one.
    pub fn iv_fusion(records: Vec<IvRecord>) -> Result<Self, SampleError> {
        if records.is_empty() {
            return Err(SampleError::Empty);
        }
        let mut n_complete = 0;
        let mut seen_incomplete = false;
        for (k, r) in records.iter().enumerate() {
            check_finite(r.y, k, "y")?;
            check_finite(r.t, k, "t")?;
            match r.i {
                Some(i) => {
                    check_finite(i, k, "i")?;
                    if seen_incomplete {
                        return Err(SampleError::CompleteFirstViolated { index: k });
                    }
                    n_complete += 1;
                }
                None => seen_incomplete = true,
            }
        }
        Ok(Self { records: Records::IvFusion { records, n_complete } })
    }

    /// Like [`ScenarioSample::iv_fusion`] but reorders the records
    /// (stably) so that complete ones come first.
    pub fn iv_fusion_unordered(mut records: Vec<IvRecord>) -> Result<Self, SampleError> {
        records.sort_by_key(|r| r.i.is_none());
        Self::iv_fusion(records)
    }

    pub fn proxy(records: Vec<ProxyRecord>) -> Result<Self, SampleError> {
        if records.is_empty() {
            return Err(SampleError::Empty);
        }
        for (k, r) in records.iter().enumerate() {
            check_finite(r.y, k, "y")?;
            check_binary(r.t, k, "t")?;
            check_binary(r.p, k, "p")?;
        }
        Ok(Self { records: Records::Proxy(records) })
    }

    pub fn scenario(&self) -> Scenario {
        match self.records {
            Records::Observational(_) => Scenario::Observational,
            Records::IvFusion { .. } => Scenario::IvFusion,
            Records::Proxy(_) => Scenario::Proxy,
        }
    }

    pub fn len(&self) -> usize {
        match &self.records {
            Records::Observational(r) => r.len(),
            Records::IvFusion { records, .. } => records.len(),
            Records::Proxy(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of instrument-bearing records (IvFusion), otherwise `len()`.
    pub fn n_complete(&self) -> usize {
        match &self.records {
            Records::IvFusion { n_complete, .. } => *n_complete,
            _ => self.len(),
        }
    }

    pub fn as_observational(&self) -> Option<&[ObsRecord]> {
        match &self.records {
            Records::Observational(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_iv(&self) -> Option<&[IvRecord]> {
        match &self.records {
            Records::IvFusion { records, .. } => Some(records),
            _ => None,
        }
    }

    pub fn as_proxy(&self) -> Option<&[ProxyRecord]> {
        match &self.records {
            Records::Proxy(r) => Some(r),
            _ => None,
        }
    }

    /// Strata used when resampling: the complete and incomplete blocks of an
    /// IvFusion sample are resampled separately, everything else is a single
    /// stratum. Returned as contiguous index ranges.
    pub fn resample_strata(&self) -> Vec<std::ops::Range<usize>> {
        match &self.records {
            Records::IvFusion { records, n_complete } => {
                let mut v = Vec::with_capacity(2);
                if *n_complete > 0 {
                    v.push(0..*n_complete);
                }
                if *n_complete < records.len() {
                    v.push(*n_complete..records.len());
                }
                v
            }
            #[allow(clippy::single_range_in_vec_init)]
            _ => vec![0..self.len()],
        }
    }

    /// Stratum label of each record for fold construction: `(x, t)` cell for
    /// observational data, treatment arm for proxy data, completeness for
    /// IvFusion data.
    pub fn fold_strata(&self) -> Vec<usize> {
        match &self.records {
            Records::Observational(r) => r.iter().map(|r| 2 * r.x as usize + r.t as usize).collect(),
            Records::IvFusion { records, n_complete } => {
                (0..records.len()).map(|k| usize::from(k >= *n_complete)).collect()
            }
            Records::Proxy(r) => r.iter().map(|r| r.t as usize).collect(),
        }
    }

    /// Sample made of the records at `indices` (repeats allowed). IvFusion
    /// output is reordered complete-first, preserving relative order.
    ///
    /// `indices` must be nonempty and in range.
    pub fn subset(&self, indices: &[usize]) -> ScenarioSample {
        debug_assert!(!indices.is_empty());
        let records = match &self.records {
            Records::Observational(r) => Records::Observational(indices.iter().map(|&k| r[k]).collect()),
            Records::Proxy(r) => Records::Proxy(indices.iter().map(|&k| r[k]).collect()),
            Records::IvFusion { records, n_complete } => {
                let mut out = Vec::with_capacity(indices.len());
                out.extend(indices.iter().filter(|&&k| k < *n_complete).map(|&k| records[k]));
                let nc = out.len();
                out.extend(indices.iter().filter(|&&k| k >= *n_complete).map(|&k| records[k]));
                Records::IvFusion { records: out, n_complete: nc }
            }
        };
        ScenarioSample { records }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("bogus".parse::<Scenario>().is_err());
    }

    #[test]
    fn rejects_invalid_records() {
        assert_eq!(ScenarioSample::observational(vec![]), Err(SampleError::Empty));
        let bad = vec![ObsRecord { y: 1.0, t: 2, x: 0 }];
        assert!(matches!(ScenarioSample::observational(bad), Err(SampleError::InvalidRecord { .. })));
        let nan = vec![ProxyRecord { y: f64::NAN, t: 1, p: 0 }];
        assert!(ScenarioSample::proxy(nan).is_err());
    }

    #[test]
    fn iv_fusion_requires_complete_first() {
        let recs = vec![
            IvRecord { y: 1.0, t: 1.0, i: None },
            IvRecord { y: 1.0, t: 1.0, i: Some(0.5) },
        ];
        assert_eq!(
            ScenarioSample::iv_fusion(recs.clone()),
            Err(SampleError::CompleteFirstViolated { index: 1 })
        );
        let s = ScenarioSample::iv_fusion_unordered(recs).unwrap();
        assert_eq!(s.n_complete(), 1);
        assert_eq!(s.as_iv().unwrap()[0].i, Some(0.5));
    }

    #[test]
    fn iv_subset_keeps_complete_first() {
        let recs = vec![
            IvRecord { y: 0.0, t: 0.0, i: Some(1.0) },
            IvRecord { y: 1.0, t: 1.0, i: Some(2.0) },
            IvRecord { y: 2.0, t: 2.0, i: None },
        ];
        let s = ScenarioSample::iv_fusion(recs).unwrap();
        let sub = s.subset(&[2, 1, 2, 0]);
        assert_eq!(sub.n_complete(), 2);
        let r = sub.as_iv().unwrap();
        assert_eq!(r[0].i, Some(2.0));
        assert_eq!(r[1].i, Some(1.0));
        assert!(r[2].i.is_none() && r[3].i.is_none());
        assert_eq!(s.resample_strata(), vec![0..2, 2..3]);
    }
}
