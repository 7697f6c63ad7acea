use super::{EstimationError, IvRecord, ObsRecord, Scenario, ScenarioSample};

/// Cell summaries of an observational sample, indexed `[x][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StratumStats {
    pub counts: [[usize; 2]; 2],
    sums: [[f64; 2]; 2],
    n: usize,
}

impl StratumStats {
    fn from_records(records: &[ObsRecord]) -> Self {
        let mut counts = [[0usize; 2]; 2];
        let mut sums = [[0.0; 2]; 2];
        for r in records {
            counts[r.x as usize][r.t as usize] += 1;
            sums[r.x as usize][r.t as usize] += r.y;
        }
        Self { counts, sums, n: records.len() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_x(&self, x: u8) -> usize {
        self.counts[x as usize][0] + self.counts[x as usize][1]
    }

    /// Empirical `P(T = t | X = x)`; `None` when `x` is unobserved.
    pub fn p_hat(&self, x: u8, t: u8) -> Option<f64> {
        let nx = self.n_x(x);
        (nx > 0).then(|| self.counts[x as usize][t as usize] as f64 / nx as f64)
    }

    /// Empirical mean of `Y` in cell `(x, t)`; `None` when the cell is empty.
    pub fn q_hat(&self, x: u8, t: u8) -> Option<f64> {
        let c = self.counts[x as usize][t as usize];
        (c > 0).then(|| self.sums[x as usize][t as usize] / c as f64)
    }

    // Q̂(x, a) for both arms of every observed x, or the first missing cell.
    fn outcome_table(&self) -> Result<[[f64; 2]; 2], EstimationError> {
        let mut q = [[f64::NAN; 2]; 2];
        for x in 0..2u8 {
            if self.n_x(x) == 0 {
                continue;
            }
            for t in 0..2u8 {
                q[x as usize][t as usize] =
                    self.q_hat(x, t).ok_or(EstimationError::EmptyStratum { x, t })?;
            }
        }
        Ok(q)
    }

    fn propensity_table(&self) -> [[f64; 2]; 2] {
        let mut p = [[f64::NAN; 2]; 2];
        for x in 0..2u8 {
            for t in 0..2u8 {
                if let Some(v) = self.p_hat(x, t) {
                    p[x as usize][t as usize] = v;
                }
            }
        }
        p
    }
}

fn observational(sample: &ScenarioSample) -> Result<&[ObsRecord], EstimationError> {
    sample.as_observational().ok_or(EstimationError::WrongScenario {
        expected: Scenario::Observational,
        found: sample.scenario(),
    })
}

/// Empirical propensities and cell means. No clipping is applied; empty cells
/// are reported by the estimators that need them.
pub fn empirical_strata(sample: &ScenarioSample) -> Result<StratumStats, EstimationError> {
    Ok(StratumStats::from_records(observational(sample)?))
}

/// AIPW estimate of the average treatment effect, `μ̂₁ − μ̂₀` with
///
/// ```text
/// μ̂ₐ = (1/n) Σᵢ [ Yᵢ 1{Tᵢ=a} / p̂(Tᵢ|Xᵢ) − (1{Tᵢ=a} − p̂(Tᵢ|Xᵢ)) / p̂(Tᵢ|Xᵢ) · Q̂(Xᵢ, a) ]
/// ```
///
/// `p̂(Tᵢ|Xᵢ)` is the empirical probability of unit i's own arm. Reading it
/// as `p̂(a|Xᵢ)` instead gives the same number: for `Tᵢ = a` both readings
/// coincide and for `Tᵢ ≠ a` the augmentation reduces to `Q̂(Xᵢ, a)` either
/// way. Both cells of every observed stratum must be populated.
pub fn aipw_ate(sample: &ScenarioSample) -> Result<f64, EstimationError> {
    let records = observational(sample)?;
    let stats = StratumStats::from_records(records);
    let q = stats.outcome_table()?;
    let p = stats.propensity_table();
    let mut mu = [0.0; 2];
    for r in records {
        let (x, t) = (r.x as usize, r.t as usize);
        let p_own = p[x][t];
        for (a, m) in mu.iter_mut().enumerate() {
            let ind = if t == a { 1.0 } else { 0.0 };
            *m += r.y * ind / p_own - (ind - p_own) / p_own * q[x][a];
        }
    }
    let n = records.len() as f64;
    Ok(mu[1] / n - mu[0] / n)
}

/// Augmented estimate of the overlap-weighted effect,
/// `(η̂₁ − η̂₀) / [(1/n) Σᵢ p̂(1|Xᵢ)(1 − p̂(1|Xᵢ))]` with
///
/// ```text
/// η̂ₐ = (1/n) Σᵢ [ Yᵢ 1{Tᵢ=a} (1 − p̂(Tᵢ|Xᵢ)) − (1{Tᵢ=a} − p̂(Tᵢ|Xᵢ)) (1 − p̂(Tᵢ|Xᵢ)) Q̂(Xᵢ, a) ]
/// ```
pub fn aipw_overlap(sample: &ScenarioSample) -> Result<f64, EstimationError> {
    let records = observational(sample)?;
    let stats = StratumStats::from_records(records);
    let p = stats.propensity_table();
    let mut denom = 0.0;
    for r in records {
        let p1 = p[r.x as usize][1];
        denom += p1 * (1.0 - p1);
    }
    if denom == 0.0 {
        return Err(EstimationError::ZeroOverlapDenominator);
    }
    let q = stats.outcome_table()?;
    let mut eta = [0.0; 2];
    for r in records {
        let (x, t) = (r.x as usize, r.t as usize);
        let p_own = p[x][t];
        for (a, e) in eta.iter_mut().enumerate() {
            let ind = if t == a { 1.0 } else { 0.0 };
            *e += r.y * ind * (1.0 - p_own) - (ind - p_own) * (1.0 - p_own) * q[x][a];
        }
    }
    let n = records.len() as f64;
    Ok((eta[1] / n - eta[0] / n) / (denom / n))
}

fn iv_records(sample: &ScenarioSample) -> Result<&[IvRecord], EstimationError> {
    sample.as_iv().ok_or(EstimationError::WrongScenario {
        expected: Scenario::IvFusion,
        found: sample.scenario(),
    })
}

// Plug-in covariance (denominator n) of two equally long columns.
fn plugin_cov(a: impl Iterator<Item = f64> + Clone, b: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = a.clone().count() as f64;
    let ma = a.clone().sum::<f64>() / n;
    let mb = b.clone().sum::<f64>() / n;
    a.zip(b).map(|(u, v)| (u - ma) * (v - mb)).sum::<f64>() / n
}

/// `Ĉov(I, Y) / Ĉov(I, T)` over the instrument-bearing records only.
pub fn iv_ratio(sample: &ScenarioSample) -> Result<f64, EstimationError> {
    let records = iv_records(sample)?;
    let complete = &records[..sample.n_complete()];
    if complete.is_empty() {
        return Err(EstimationError::DegenerateInstrument);
    }
    let inst = complete.iter().map(|r| r.i.unwrap_or(f64::NAN));
    let cov_it = plugin_cov(inst.clone(), complete.iter().map(|r| r.t));
    if cov_it == 0.0 {
        return Err(EstimationError::DegenerateInstrument);
    }
    let cov_iy = plugin_cov(inst, complete.iter().map(|r| r.y));
    Ok(cov_iy / cov_it)
}

/// Least-squares slope of `Y` on `T` with intercept, over all records
/// (complete and incomplete): `Ĉov(T, Y) / V̂ar(T)`.
pub fn ols_slope(sample: &ScenarioSample) -> Result<f64, EstimationError> {
    let records = iv_records(sample)?;
    let t = records.iter().map(|r| r.t);
    let var_t = plugin_cov(t.clone(), t.clone());
    if var_t == 0.0 {
        return Err(EstimationError::DegenerateTreatment);
    }
    Ok(plugin_cov(t, records.iter().map(|r| r.y)) / var_t)
}

fn contrast(pairs: impl Iterator<Item = (f64, u8)>) -> Result<f64, u8> {
    let mut sum = [0.0; 2];
    let mut cnt = [0usize; 2];
    for (v, g) in pairs {
        sum[g as usize] += v;
        cnt[g as usize] += 1;
    }
    for g in 0..2u8 {
        if cnt[g as usize] == 0 {
            return Err(g);
        }
    }
    Ok(sum[1] / cnt[1] as f64 - sum[0] / cnt[0] as f64)
}

/// `mean(Y | T=1) − mean(Y | T=0)` for proxy or observational samples.
pub fn diff_in_means(sample: &ScenarioSample) -> Result<f64, EstimationError> {
    let res = if let Some(r) = sample.as_proxy() {
        contrast(r.iter().map(|r| (r.y, r.t)))
    } else if let Some(r) = sample.as_observational() {
        contrast(r.iter().map(|r| (r.y, r.t)))
    } else {
        return Err(EstimationError::WrongScenario {
            expected: Scenario::Proxy,
            found: sample.scenario(),
        });
    };
    res.map_err(|arm| EstimationError::EmptyArm { arm })
}

/// Surrogate product estimator:
/// `[mean(P|T=1) − mean(P|T=0)] · [mean(Y|P=1) − mean(Y|P=0)]`.
pub fn product_estimator(sample: &ScenarioSample) -> Result<f64, EstimationError> {
    let records = sample.as_proxy().ok_or(EstimationError::WrongScenario {
        expected: Scenario::Proxy,
        found: sample.scenario(),
    })?;
    let t_to_p = contrast(records.iter().map(|r| (r.p as f64, r.t)))
        .map_err(|arm| EstimationError::EmptyArm { arm })?;
    let p_to_y = contrast(records.iter().map(|r| (r.y, r.p)))
        .map_err(|p| EstimationError::EmptyProxyGroup { p })?;
    Ok(t_to_p * p_to_y)
}
