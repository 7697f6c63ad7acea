// Hand datasets and their frozen values. The values were computed once with
// exact rational arithmetic, independently of this crate.
#![allow(dead_code)]

use std::sync::Arc;

use tmsel_core::estimands::{Evaluator, IvRecord, ObsRecord, ProxyRecord};
use tmsel_core::ScenarioSample;

pub const OBS8_ATE: f64 = 1.0;
pub const OBS8_OVERLAP: f64 = 1.0;
pub const OBS9_ATE: f64 = 1.4537037037037037;
pub const OBS9_OVERLAP: f64 = 1.4307692307692308;
pub const IV6_RATIO: f64 = 1.029887920298879;
pub const IV6_OLS: f64 = 1.108433734939759;
pub const OLS6_SLOPE: f64 = 1.516441005802708;
pub const PROXY8_DIM: f64 = 1.125;
pub const PROXY8_PRODUCT: f64 = 0.6625;

pub fn obs(rows: &[(f64, u8, u8)]) -> ScenarioSample {
    ScenarioSample::observational(rows.iter().map(|&(y, t, x)| ObsRecord { y, t, x }).collect()).unwrap()
}

pub fn iv(rows: &[(Option<f64>, f64, f64)]) -> ScenarioSample {
    ScenarioSample::iv_fusion_unordered(rows.iter().map(|&(i, t, y)| IvRecord { y, t, i }).collect()).unwrap()
}

pub fn proxy(rows: &[(f64, u8, u8)]) -> ScenarioSample {
    ScenarioSample::proxy(rows.iter().map(|&(y, t, p)| ProxyRecord { y, t, p }).collect()).unwrap()
}

/// Two records per (x, t) cell, y = x/2 + t.
pub fn obs8() -> ScenarioSample {
    let mut rows = Vec::new();
    for x in 0..2u8 {
        for t in 0..2u8 {
            for _ in 0..2 {
                rows.push((x as f64 / 2.0 + t as f64, t, x));
            }
        }
    }
    obs(&rows)
}

/// Unbalanced cells, heterogeneous outcomes.
pub fn obs9() -> ScenarioSample {
    obs(&[
        (0.3, 0, 0), (1.1, 0, 0), (-0.4, 0, 0), (2.0, 1, 0),
        (0.9, 0, 1), (1.7, 1, 1), (2.6, 1, 1), (1.2, 1, 1), (0.2, 0, 1),
    ])
}

const IV6: [(f64, f64, f64); 6] =
    [(1.0, 0.8, 1.5), (-0.5, 0.2, 0.1), (2.0, 1.9, 2.2), (0.3, -0.4, -0.9), (-1.2, -1.0, -0.3), (0.7, 1.1, 1.8)];

/// Six complete records, instrument correlated with an unobserved confounder.
pub fn iv6() -> ScenarioSample {
    iv(&IV6.iter().map(|&(i, t, y)| (Some(i), t, y)).collect::<Vec<_>>())
}

/// The first four records of `iv6` plus two records without instrument.
pub fn ols6() -> ScenarioSample {
    let mut rows: Vec<_> = IV6[..4].iter().map(|&(i, t, y)| (Some(i), t, y)).collect();
    rows.push((None, 0.5, 1.3));
    rows.push((None, -0.7, -1.6));
    iv(&rows)
}

pub fn proxy8() -> ScenarioSample {
    proxy(&[
        (1.2, 1, 1), (0.4, 1, 0), (2.0, 1, 1), (0.9, 1, 1),
        (-0.3, 0, 0), (0.8, 0, 1), (0.1, 0, 0), (-0.6, 0, 0),
    ])
}

/// Proxy-shaped sample carrying arbitrary outcomes, for mean-type evaluators.
pub fn values(ys: &[f64]) -> ScenarioSample {
    proxy(&ys.iter().enumerate().map(|(k, &y)| (y, (k % 2) as u8, ((k / 2) % 2) as u8)).collect::<Vec<_>>())
}

pub fn mean_y() -> Evaluator {
    Arc::new(|s: &ScenarioSample| {
        let r = s.as_proxy().unwrap();
        Ok(r.iter().map(|r| r.y).sum::<f64>() / r.len() as f64)
    })
}
