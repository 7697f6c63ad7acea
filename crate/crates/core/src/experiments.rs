//! Monte Carlo harness: MSE curves and interval coverage on the simulated
//! scenarios, plus sampled checks of the criteria's asymptotic behaviour in a
//! synthetic Gaussian-mean setting.
//!
//! Every run owns keyed random streams, results are collected in run order,
//! and aggregation is sequential, so output never depends on the worker
//! count.
//!
//! Rows from the synthetic checks reuse the `s` column for the sample size
//! `n` (or for `K` in the lemma check).

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::bootstrap::{
    replicate_estimates, select_ci_shortcut_with, selection_from_matrix, BootstrapError, ResamplePlan,
    ShortcutVarianceTerm, DEFAULT_B_CI, DEFAULT_B_VAR,
};
use crate::dgp::{generate, true_effect, DgpError, ScenarioConfig};
use crate::estimands::{default_weights, scenario_family, CandidateFamily, FamilyError, Scenario};
use crate::rng::{self, derive_seed, purpose};
use crate::selection::{argmin_with_tiebreak, cv_risks, make_folds, modified_risk, SelectionError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Targeted,
    CvSelect,
    Baseline,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Targeted, Method::CvSelect, Method::Baseline];

    pub fn name(self) -> &'static str {
        match self {
            Method::Targeted => "targeted",
            Method::CvSelect => "cv",
            Method::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "targeted" => Ok(Method::Targeted),
            "cv" => Ok(Method::CvSelect),
            "baseline" => Ok(Method::Baseline),
            other => Err(format!("unknown method `{other}` (targeted|cv|baseline)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Mse,
    Coverage,
    BiasOfCriterion,
    VarOfCriterion,
    SelectProb,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Mse => "mse",
            Metric::Coverage => "coverage",
            Metric::BiasOfCriterion => "bias_of_criterion",
            Metric::VarOfCriterion => "var_of_criterion",
            Metric::SelectProb => "select_prob",
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mse" => Ok(Metric::Mse),
            "coverage" => Ok(Metric::Coverage),
            "bias_of_criterion" => Ok(Metric::BiasOfCriterion),
            "var_of_criterion" => Ok(Metric::VarOfCriterion),
            "select_prob" => Ok(Metric::SelectProb),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// One aggregated Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct McRow {
    pub scenario: String,
    pub s: f64,
    pub method: String,
    pub metric: Metric,
    pub value: f64,
    pub mc_se: f64,
    pub runs: usize,
    pub seed: u64,
}

/// A run that failed, or needed bootstrap redraws, at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub scenario: String,
    pub s: f64,
    pub run: usize,
    /// `redrawn` when the run succeeded after redrawing replicates.
    pub failure_kind: String,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct McReport {
    pub rows: Vec<McRow>,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("{failed} of {runs} runs failed at s={s}; at most 1% may be excluded")]
    TooManyFailures { s: f64, failed: usize, runs: usize },
    #[error(transparent)]
    Dgp(#[from] DgpError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Default `s` grid: 0..1 by 0.1 (observational), 0..2 by 0.2 (IV fusion),
/// 0..1.2 by 0.1 (proxy).
pub fn default_grid(scenario: Scenario) -> Vec<f64> {
    match scenario {
        Scenario::Observational => (0..=10).map(|k| k as f64 / 10.0).collect(),
        Scenario::IvFusion => (0..=10).map(|k| (2 * k) as f64 / 10.0).collect(),
        Scenario::Proxy => (0..=12).map(|k| k as f64 / 10.0).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub scenario: Scenario,
    pub s_grid: Vec<f64>,
    pub runs: usize,
    pub b_var: usize,
    pub b_ci: usize,
    pub k_folds: usize,
    pub level: f64,
    pub master_seed: u64,
    pub methods: Vec<Method>,
    /// Shrinkage weights of the candidate family.
    pub weights: Vec<f64>,
    pub shortcut_term: ShortcutVarianceTerm,
    /// Thread count; `None` uses the global pool. Never changes output.
    pub workers: Option<usize>,
}

impl McConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            s_grid: default_grid(scenario),
            runs: 200,
            b_var: DEFAULT_B_VAR,
            b_ci: DEFAULT_B_CI,
            k_folds: 10,
            level: 0.95,
            master_seed: 0,
            methods: Method::ALL.to_vec(),
            weights: default_weights(scenario),
            shortcut_term: ShortcutVarianceTerm::Candidate,
            workers: None,
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidConfig(m.to_string()));
        if self.runs < 2 {
            return bad("runs must be at least 2");
        }
        if self.s_grid.is_empty() || self.s_grid.windows(2).any(|w| w[0] > w[1]) {
            return bad("s grid must be nonempty and sorted");
        }
        if self.s_grid.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return bad("s values must be finite and non-negative");
        }
        if self.methods.is_empty() {
            return bad("no methods selected");
        }
        if self.b_var < 2 || self.b_ci < 2 {
            return bad("bootstrap replicate counts must be at least 2");
        }
        if self.k_folds < 2 {
            return bad("need at least 2 folds");
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return bad("level must lie in (0, 1)");
        }
        Ok(())
    }

    fn data_config(&self, s: f64, run: usize) -> ScenarioConfig {
        // Same data seed for every s: common random numbers along the grid.
        ScenarioConfig::default_for(self.scenario, s, derive_seed(self.master_seed, &[purpose::DATA, run as u64]))
    }
}

/// Runs `f` on `workers` threads (the global pool when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    crate::par::with_workers(workers, f)
}

fn failure_kind(e: &BootstrapError) -> String {
    match e {
        BootstrapError::ReplicateExhausted { .. } => "replicate_exhausted".into(),
        BootstrapError::Original(_) => "estimation".into(),
        other => format!("bootstrap: {other}"),
    }
}

// Outcome of one (s, run) cell: per-method values or a failure description,
// plus the number of replicate redraws.
struct Cell {
    values: Result<Vec<f64>, String>,
    redraws: usize,
}

fn mse_cell(cfg: &McConfig, family: &CandidateFamily, s_idx: usize, run: usize) -> Cell {
    let s = cfg.s_grid[s_idx];
    let theta0 = true_effect(cfg.scenario, s).theta0;
    let sample = match generate(&cfg.data_config(s, run)) {
        Ok(x) => x,
        Err(e) => return Cell { values: Err(format!("dgp: {e}")), redraws: 0 },
    };
    let keys = |p: u64| derive_seed(cfg.master_seed, &[p, run as u64, s_idx as u64]);
    let mut redraws = 0;
    let mut out = Vec::with_capacity(cfg.methods.len());
    for m in &cfg.methods {
        let est = match m {
            Method::Baseline => family.evaluate(0, &sample).map_err(|e| format!("estimation: {e}")),
            Method::Targeted => {
                let plan = ResamplePlan::seeded(cfg.b_var, keys(purpose::BOOT_VAR));
                replicate_estimates(family, &sample, &plan)
                    .and_then(|m| {
                        redraws += m.redraws();
                        selection_from_matrix(family, &sample, &m)
                    })
                    .map(|sel| sel.estimate)
                    .map_err(|e| failure_kind(&e))
            }
            Method::CvSelect => {
                let mut rng = rng::stream(keys(purpose::FOLDS), &[]);
                make_folds(&sample, cfg.k_folds, &mut rng)
                    .and_then(|folds| cv_risks(family, &sample, &folds))
                    .and_then(|cv| {
                        let est = family.evaluate_all(&sample).map_err(SelectionError::from)?;
                        let diff_sq: Vec<f64> = est.iter().map(|e| (e - est[0]) * (e - est[0])).collect();
                        Ok(est[argmin_with_tiebreak(&cv, &diff_sq)])
                    })
                    .map_err(|e| format!("cv: {e}"))
            }
        };
        match est {
            Ok(v) => out.push((v - theta0) * (v - theta0)),
            Err(kind) => return Cell { values: Err(kind), redraws },
        }
    }
    Cell { values: Ok(out), redraws }
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1.0);
    (mean, (var / m).sqrt())
}

// Runs `cell` over the (s, run) grid and applies the failure policy. Returns
// the successful per-run value vectors for each s.
fn run_grid(
    cfg: &McConfig,
    cell: impl Fn(usize, usize) -> Cell + Sync + Send,
    failures: &mut Vec<RunFailure>,
) -> Result<Vec<Vec<Vec<f64>>>, ExperimentError> {
    let runs = cfg.runs;
    let cells = with_workers(cfg.workers, || {
        crate::par::map_indexed(cfg.s_grid.len() * runs, |k| cell(k / runs, k % runs))
    });
    let mut per_s = Vec::with_capacity(cfg.s_grid.len());
    for (s_idx, chunk) in cells.chunks(runs).enumerate() {
        let s = cfg.s_grid[s_idx];
        let mut ok = Vec::with_capacity(runs);
        let mut failed = 0;
        for (run, c) in chunk.iter().enumerate() {
            let kind = match &c.values {
                Ok(v) => {
                    ok.push(v.clone());
                    (c.redraws > 0).then(|| "redrawn".to_string())
                }
                Err(k) => {
                    failed += 1;
                    Some(k.clone())
                }
            };
            if let Some(failure_kind) = kind {
                failures.push(RunFailure {
                    scenario: cfg.scenario.name().into(),
                    s,
                    run,
                    failure_kind,
                    redraws: c.redraws,
                });
            }
        }
        if failed as f64 >= 0.01 * runs as f64 && failed > 0 {
            return Err(ExperimentError::TooManyFailures { s, failed, runs });
        }
        per_s.push(ok);
    }
    Ok(per_s)
}

/// Monte Carlo MSE of each method's estimate around the true effect, per
/// grid point. `mc_se` is the standard deviation of the squared errors over
/// `√runs`.
pub fn mse_curve(cfg: &McConfig) -> Result<McReport, ExperimentError> {
    cfg.validate()?;
    let family = scenario_family(cfg.scenario, &cfg.weights)?;
    let mut failures = Vec::new();
    let per_s = run_grid(cfg, |s_idx, run| mse_cell(cfg, &family, s_idx, run), &mut failures)?;
    let mut rows = Vec::new();
    for (s_idx, runs) in per_s.iter().enumerate() {
        for (j, m) in cfg.methods.iter().enumerate() {
            let errs: Vec<f64> = runs.iter().map(|r| r[j]).collect();
            let (value, mc_se) = mean_se(&errs);
            rows.push(McRow {
                scenario: cfg.scenario.name().into(),
                s: cfg.s_grid[s_idx],
                method: m.name().into(),
                metric: Metric::Mse,
                value,
                mc_se,
                runs: errs.len(),
                seed: cfg.master_seed,
            });
        }
    }
    Ok(McReport { rows, failures })
}

/// Fraction of runs whose shortcut interval (with `cfg.b_ci` replicates)
/// covers the true effect, per grid point.
pub fn coverage_eval(cfg: &McConfig) -> Result<McReport, ExperimentError> {
    cfg.validate()?;
    let family = scenario_family(cfg.scenario, &cfg.weights)?;
    let cell = |s_idx: usize, run: usize| {
        let s = cfg.s_grid[s_idx];
        let theta0 = true_effect(cfg.scenario, s).theta0;
        let sample = match generate(&cfg.data_config(s, run)) {
            Ok(x) => x,
            Err(e) => return Cell { values: Err(format!("dgp: {e}")), redraws: 0 },
        };
        let seed = derive_seed(cfg.master_seed, &[purpose::BOOT_CI, run as u64, s_idx as u64]);
        let plan = ResamplePlan::seeded(cfg.b_ci, seed);
        match select_ci_shortcut_with(&family, &sample, &plan, cfg.level, cfg.shortcut_term) {
            Ok((_, ci, m)) => Cell { values: Ok(vec![f64::from(u8::from(ci.contains(theta0)))]), redraws: m.redraws() },
            Err(e) => Cell { values: Err(failure_kind(&e)), redraws: 0 },
        }
    };
    let mut failures = Vec::new();
    let per_s = run_grid(cfg, cell, &mut failures)?;
    let rows = per_s
        .iter()
        .enumerate()
        .map(|(s_idx, runs)| {
            let m = runs.len() as f64;
            let p = runs.iter().map(|r| r[0]).sum::<f64>() / m;
            McRow {
                scenario: cfg.scenario.name().into(),
                s: cfg.s_grid[s_idx],
                method: Method::Targeted.name().into(),
                metric: Metric::Coverage,
                value: p,
                mc_se: (p * (1.0 - p) / m).sqrt(),
                runs: runs.len(),
                seed: cfg.master_seed,
            }
        })
        .collect();
    Ok(McReport { rows, failures })
}

/// Gaussian-mean setting with exactly known moments. Records are
/// `D = (A, B)`, centered bivariate Gaussian; the baseline is the mean of `A`
/// (`ψ₀ = A`) and the candidate is the mean of `mix·A + (1 − mix)·B` plus
/// `bias_shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticLinearConfig {
    pub n: usize,
    pub var_a: f64,
    pub var_b: f64,
    pub correlation: f64,
    pub mix: f64,
    pub bias_shift: f64,
    pub k_folds: usize,
}

impl Default for SyntheticLinearConfig {
    /// `Var ψ₀ = 1`, `Var ψ_g = 1.75`, correlation 0.5, `K = 10`, `n = 5000`.
    fn default() -> Self {
        Self { n: 5000, var_a: 1.0, var_b: 1.75, correlation: 0.5, mix: 0.0, bias_shift: 0.0, k_folds: 10 }
    }
}

impl SyntheticLinearConfig {
    fn cov_ab(&self) -> f64 {
        self.correlation * (self.var_a * self.var_b).sqrt()
    }

    pub fn var_psi0(&self) -> f64 {
        self.var_a
    }

    pub fn var_psi_g(&self) -> f64 {
        let (m, c) = (self.mix, 1.0 - self.mix);
        m * m * self.var_a + c * c * self.var_b + 2.0 * m * c * self.cov_ab()
    }

    /// `Var(ψ_g − ψ₀)`.
    pub fn var_psi_diff(&self) -> f64 {
        let c = 1.0 - self.mix;
        c * c * (self.var_a + self.var_b - 2.0 * self.cov_ab())
    }

    /// Exact `E[(θ̂_g − θ₀)²]` at sample size `n`.
    pub fn mse(&self, n: usize) -> f64 {
        self.var_psi_g() / n as f64 + self.bias_shift * self.bias_shift
    }

    /// Limit of `E[n(R̃ − MSE)]` for an unbiased candidate:
    /// `α/(1−α)·Var ψ_g + Var ψ₀/α` with `α = 1/K`.
    pub fn cv_bias_limit(&self) -> f64 {
        let alpha = 1.0 / self.k_folds as f64;
        alpha / (1.0 - alpha) * self.var_psi_g() + self.var_psi0() / alpha
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidConfig(m.to_string()));
        if !(self.correlation > -1.0 && self.correlation < 1.0) {
            return bad("correlation must lie in (-1, 1)");
        }
        if !(self.var_a > 0.0 && self.var_b > 0.0) {
            return bad("variances must be positive");
        }
        if self.k_folds < 2 || self.n < self.k_folds {
            return bad("need 2 <= K <= n");
        }
        Ok(())
    }

    fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let a = self.var_a.sqrt() * z1;
        let b = self.var_b.sqrt() * (self.correlation * z1 + (1.0 - self.correlation.powi(2)).sqrt() * z2);
        (a, b)
    }
}

/// Errors `R̂ − MSE` and `R̃ − MSE` of one synthetic run at size `n`, with the
/// exact variance terms injected into `R̂`.
fn criterion_errors(cfg: &SyntheticLinearConfig, n: usize, seed: u64) -> (f64, f64) {
    let k = cfg.k_folds;
    let mut rng = rng::stream(seed, &[]);
    let mut sum_a = vec![0.0; k];
    let mut sum_g = vec![0.0; k];
    let mut size = vec![0usize; k];
    for i in 0..n {
        let (a, b) = cfg.draw_pair(&mut rng);
        // contiguous folds of near-equal size
        let f = i * k / n;
        sum_a[f] += a;
        sum_g[f] += cfg.mix * a + (1.0 - cfg.mix) * b;
        size[f] += 1;
    }
    let nf = n as f64;
    let (ta, tg) = (sum_a.iter().sum::<f64>(), sum_g.iter().sum::<f64>());
    let theta0_hat = ta / nf;
    let theta_g_hat = tg / nf + cfg.bias_shift;
    let d = theta_g_hat - theta0_hat;
    let r_hat = d * d - cfg.var_psi_diff() / nf + cfg.var_psi_g() / nf;
    let r_cv = (0..k)
        .map(|f| {
            let train = (tg - sum_g[f]) / (n - size[f]) as f64 + cfg.bias_shift;
            let test = sum_a[f] / size[f] as f64;
            (train - test) * (train - test)
        })
        .sum::<f64>()
        / k as f64;
    let mse = cfg.mse(n);
    (r_hat - mse, r_cv - mse)
}

fn synthetic_row(method: &str, metric: Metric, s: f64, value: f64, mc_se: f64, runs: usize, seed: u64) -> McRow {
    McRow { scenario: "synthetic".into(), s, method: method.into(), metric, value, mc_se, runs, seed }
}

/// Monte Carlo `E[n(R̂ − MSE)]` (method `targeted`) and `E[n(R̃ − MSE)]`
/// (method `cv`) for each `n` in `n_grid`.
pub fn check_criterion_bias(
    cfg: &SyntheticLinearConfig,
    n_grid: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<McRow>, ExperimentError> {
    cfg.validate()?;
    if runs < 2 || n_grid.iter().any(|&n| n < cfg.k_folds) {
        return Err(ExperimentError::InvalidConfig("need runs >= 2 and n >= K".into()));
    }
    let mut rows = Vec::new();
    for &n in n_grid {
        let errs = crate::par::map_indexed(runs, |r| {
            criterion_errors(cfg, n, derive_seed(seed, &[purpose::THEORY, 1, n as u64, r as u64]))
        });
        let nf = n as f64;
        let (mh, sh) = mean_se(&errs.iter().map(|e| nf * e.0).collect::<Vec<_>>());
        let (mc, sc) = mean_se(&errs.iter().map(|e| nf * e.1).collect::<Vec<_>>());
        rows.push(synthetic_row("targeted", Metric::BiasOfCriterion, nf, mh, sh, runs, seed));
        rows.push(synthetic_row("cv", Metric::BiasOfCriterion, nf, mc, sc, runs, seed));
    }
    Ok(rows)
}

/// Two Monte Carlo variances and the standard error of their difference.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderingCheck {
    pub left: McRow,
    pub right: McRow,
    /// Standard error of `right.value − left.value`, accounting for the
    /// correlation between the two samples.
    pub diff_se: f64,
}

impl OrderingCheck {
    /// `(right − left) / diff_se`.
    pub fn z(&self) -> f64 {
        (self.right.value - self.left.value) / self.diff_se
    }

    /// One-sided test of `left < right` at the given normal quantile.
    pub fn holds(&self, z_crit: f64) -> bool {
        self.z() > z_crit
    }
}

// Sample variances of x and y, their standard errors and the standard error
// of their difference, all from fourth moments.
fn variance_pair(x: &[f64], y: &[f64]) -> ((f64, f64), (f64, f64), f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let dx: Vec<f64> = x.iter().map(|v| (v - mx) * (v - mx)).collect();
    let dy: Vec<f64> = y.iter().map(|v| (v - my) * (v - my)).collect();
    let diff: Vec<f64> = dy.iter().zip(&dx).map(|(a, b)| a - b).collect();
    let (vx, sx) = mean_se(&dx);
    let (vy, sy) = mean_se(&dy);
    let (_, sd) = mean_se(&diff);
    let k = m / (m - 1.0);
    ((vx * k, sx * k), (vy * k, sy * k), sd * k)
}

/// Monte Carlo variance of the scaled criterion errors: `n(R − MSE)` when the
/// candidate is unbiased, `√n(R − MSE)` otherwise. `left` is the targeted
/// criterion, `right` the cross-validation criterion.
pub fn check_variance_ordering(
    cfg: &SyntheticLinearConfig,
    runs: usize,
    seed: u64,
) -> Result<OrderingCheck, ExperimentError> {
    cfg.validate()?;
    if cfg.mix == 1.0 {
        return Err(ExperimentError::InvalidConfig("candidate identical to baseline (|Cor| = 1)".into()));
    }
    if runs < 2 {
        return Err(ExperimentError::InvalidConfig("need runs >= 2".into()));
    }
    let n = cfg.n;
    let scale = if cfg.bias_shift == 0.0 { n as f64 } else { (n as f64).sqrt() };
    let errs = crate::par::map_indexed(runs, |r| {
        criterion_errors(cfg, n, derive_seed(seed, &[purpose::THEORY, 2, n as u64, r as u64]))
    });
    let x: Vec<f64> = errs.iter().map(|e| scale * e.0).collect();
    let y: Vec<f64> = errs.iter().map(|e| scale * e.1).collect();
    let ((vx, sx), (vy, sy), sd) = variance_pair(&x, &y);
    Ok(OrderingCheck {
        left: synthetic_row("targeted", Metric::VarOfCriterion, n as f64, vx, sx, runs, seed),
        right: synthetic_row("cv", Metric::VarOfCriterion, n as f64, vy, sy, runs, seed),
        diff_se: sd,
    })
}

/// Selection among the baseline mean(A), the unbiased mean(B) and the biased
/// mean(B) + `bias_shift`, using modified risk with exact variance terms.
/// Reports the fraction of runs that select an unbiased candidate.
pub fn check_selection_consistency(
    cfg: &SyntheticLinearConfig,
    n_grid: &[usize],
    runs: usize,
    seed: u64,
) -> Result<Vec<McRow>, ExperimentError> {
    cfg.validate()?;
    if runs < 2 || n_grid.contains(&0) {
        return Err(ExperimentError::InvalidConfig("need runs >= 2 and n >= 1".into()));
    }
    let cov = cfg.cov_ab();
    let var_diff = cfg.var_a + cfg.var_b - 2.0 * cov;
    let mut rows = Vec::new();
    for &n in n_grid {
        let nf = n as f64;
        let hits = crate::par::map_indexed(runs, |r| {
            let mut rng = rng::stream(seed, &[purpose::THEORY, 3, n as u64, r as u64]);
            let (mut sa, mut sb) = (0.0, 0.0);
            for _ in 0..n {
                let (a, b) = cfg.draw_pair(&mut rng);
                sa += a;
                sb += b;
            }
            let est = [sa / nf, sb / nf, sb / nf + cfg.bias_shift];
            let vd = [0.0, var_diff / nf, var_diff / nf];
            let vg = [cfg.var_a / nf, cfg.var_b / nf, cfg.var_b / nf];
            let diff_sq: Vec<f64> = est.iter().map(|e| (e - est[0]) * (e - est[0])).collect();
            let crit: Vec<f64> = (0..3).map(|g| modified_risk(diff_sq[g], vd[g], vg[g])).collect();
            let g = argmin_with_tiebreak(&crit, &diff_sq);
            f64::from(u8::from(g < 2 || cfg.bias_shift == 0.0))
        });
        let p = hits.iter().sum::<f64>() / runs as f64;
        rows.push(synthetic_row(
            "targeted",
            Metric::SelectProb,
            nf,
            p,
            (p * (1.0 - p) / runs as f64).sqrt(),
            runs,
            seed,
        ));
    }
    Ok(rows)
}

/// Samples both sides of the Gaussian variance inequality for `K` pairs
/// `(Z_i, X_i)` of standard normals with correlation `correlation`:
/// `left` is `Var(((1/K) Σ (Z_i − X_i))²)`, `right` is
/// `Var((1/K) Σ_i ((1/(K−1)) Σ_{j≠i} Z_j − X_i)²)`.
pub fn check_gaussian_lemma(
    k: usize,
    correlation: f64,
    runs: usize,
    seed: u64,
) -> Result<OrderingCheck, ExperimentError> {
    if k < 2 || runs < 2 {
        return Err(ExperimentError::InvalidConfig("need K >= 2 and runs >= 2".into()));
    }
    if !(correlation > -1.0 && correlation < 1.0) {
        return Err(ExperimentError::InvalidConfig("correlation must lie in (-1, 1)".into()));
    }
    let kf = k as f64;
    let rho_c = (1.0 - correlation * correlation).sqrt();
    let pairs = crate::par::map_indexed(runs, |r| {
        let mut rng = rng::stream(seed, &[purpose::THEORY, 4, k as u64, r as u64]);
        let mut z = vec![0.0; k];
        let mut x = vec![0.0; k];
        for i in 0..k {
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            z[i] = u;
            x[i] = correlation * u + rho_c * v;
        }
        let sz: f64 = z.iter().sum();
        let mean_diff = z.iter().zip(&x).map(|(a, b)| a - b).sum::<f64>() / kf;
        let left = mean_diff * mean_diff;
        let right = (0..k)
            .map(|i| {
                let d = (sz - z[i]) / (kf - 1.0) - x[i];
                d * d
            })
            .sum::<f64>()
            / kf;
        (left, right)
    });
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let ((vx, sx), (vy, sy), sd) = variance_pair(&x, &y);
    let row = |side: &str, v: f64, se: f64| McRow {
        scenario: "lemma".into(),
        s: kf,
        method: side.into(),
        metric: Metric::VarOfCriterion,
        value: v,
        mc_se: se,
        runs,
        seed,
    };
    Ok(OrderingCheck { left: row("left", vx, sx), right: row("right", vy, sy), diff_se: sd })
}
