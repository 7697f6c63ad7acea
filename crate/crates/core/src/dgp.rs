//! Synthetic data for the three scenarios and their true effects.
//!
//! The draws consumed per record do not depend on `s`, so two configs that
//! differ only in `s` produce coupled samples (common random numbers).
//! Standard normal variates come from `rand_distr`'s ziggurat sampler on a
//! ChaCha8 stream, which is deterministic across platforms.

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::estimands::{IvRecord, ObsRecord, ProxyRecord, Scenario, ScenarioSample};
use crate::normal::std_normal_cdf;
use crate::rng::{self, purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSizes {
    Single(usize),
    /// IvFusion: records with and without the instrument.
    Fusion { complete: usize, incomplete: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub s: f64,
    pub sizes: SampleSizes,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Default sizes: 1000 observational records, 500 + 500 IV records,
    /// 200 proxy records.
    pub fn default_for(scenario: Scenario, s: f64, seed: u64) -> Self {
        let sizes = match scenario {
            Scenario::Observational => SampleSizes::Single(1000),
            Scenario::IvFusion => SampleSizes::Fusion { complete: 500, incomplete: 500 },
            Scenario::Proxy => SampleSizes::Single(200),
        };
        Self { scenario, s, sizes, seed }
    }

    /// Total number of records.
    pub fn n(&self) -> usize {
        match self.sizes {
            SampleSizes::Single(n) => n,
            SampleSizes::Fusion { complete, incomplete } => complete + incomplete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DgpError {
    #[error("generator for {expected} called with a {found} config")]
    WrongScenario { expected: Scenario, found: Scenario },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

/// `(Y(0), Y(1))` for one record.
pub type Potential = (f64, f64);

fn check(config: &ScenarioConfig, expected: Scenario) -> Result<(), DgpError> {
    if config.scenario != expected {
        return Err(DgpError::WrongScenario { expected, found: config.scenario });
    }
    if !config.s.is_finite() || config.s < 0.0 {
        return Err(DgpError::InvalidConfig(format!("s must be finite and non-negative, got {}", config.s)));
    }
    let ok = match (expected, config.sizes) {
        (Scenario::IvFusion, SampleSizes::Fusion { complete, .. }) => complete > 0,
        (Scenario::IvFusion, SampleSizes::Single(_)) => false,
        (_, SampleSizes::Single(n)) => n > 0,
        (_, SampleSizes::Fusion { .. }) => false,
    };
    if !ok {
        return Err(DgpError::InvalidConfig(format!("bad sizes {:?} for {expected}", config.sizes)));
    }
    Ok(())
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// X ~ Ber(.5); T ~ Ber(.7) if X = 1, Ber(.05) if X = 0;
/// Y(t) = X/2 + t + 3·t·s²·X + ε, ε ~ N(0, 1).
pub fn gen_observational_with_potential(
    config: &ScenarioConfig,
) -> Result<(ScenarioSample, Vec<Potential>), DgpError> {
    check(config, Scenario::Observational)?;
    let mut rng = rng::stream(config.seed, &[purpose::DATA]);
    let s2 = config.s * config.s;
    let n = config.n();
    let mut records = Vec::with_capacity(n);
    let mut potential = Vec::with_capacity(n);
    for _ in 0..n {
        let x = u8::from(rng.random_bool(0.5));
        let t = u8::from(rng.random_bool(if x == 1 { 0.7 } else { 0.05 }));
        let eps = normal(&mut rng);
        let xf = f64::from(x);
        let y0 = xf / 2.0 + eps;
        let y1 = xf / 2.0 + 1.0 + 3.0 * s2 * xf + eps;
        records.push(ObsRecord { y: if t == 1 { y1 } else { y0 }, t, x });
        potential.push((y0, y1));
    }
    Ok((ScenarioSample::observational(records).expect("generated records are valid"), potential))
}

pub fn gen_observational(config: &ScenarioConfig) -> Result<ScenarioSample, DgpError> {
    gen_observational_with_potential(config).map(|(s, _)| s)
}

/// I, H, ε_T, ε_Y ~ N(0, 1); T = I/2 + H + ε_T; Y(t) = t − s²·H + ε_Y.
/// The instrument is dropped for the incomplete block.
pub fn gen_iv_with_potential(config: &ScenarioConfig) -> Result<(ScenarioSample, Vec<Potential>), DgpError> {
    check(config, Scenario::IvFusion)?;
    let SampleSizes::Fusion { complete, .. } = config.sizes else { unreachable!() };
    let mut rng = rng::stream(config.seed, &[purpose::DATA]);
    let s2 = config.s * config.s;
    let n = config.n();
    let mut records = Vec::with_capacity(n);
    let mut potential = Vec::with_capacity(n);
    for k in 0..n {
        let i = normal(&mut rng);
        let h = normal(&mut rng);
        let eps_t = normal(&mut rng);
        let eps_y = normal(&mut rng);
        let t = i / 2.0 + h + eps_t;
        let y0 = -s2 * h + eps_y;
        records.push(IvRecord { y: t + y0, t, i: (k < complete).then_some(i) });
        potential.push((y0, 1.0 + y0));
    }
    Ok((ScenarioSample::iv_fusion(records).expect("generated records are valid"), potential))
}

pub fn gen_iv(config: &ScenarioConfig) -> Result<ScenarioSample, DgpError> {
    gen_iv_with_potential(config).map(|(s, _)| s)
}

/// T ~ Ber(.5); P(t) = 1{ε_P ≤ t}; Y(t) = P(t)/2 + s²·t + ε_Y.
pub fn gen_proxy_with_potential(config: &ScenarioConfig) -> Result<(ScenarioSample, Vec<Potential>), DgpError> {
    check(config, Scenario::Proxy)?;
    let mut rng = rng::stream(config.seed, &[purpose::DATA]);
    let s2 = config.s * config.s;
    let n = config.n();
    let mut records = Vec::with_capacity(n);
    let mut potential = Vec::with_capacity(n);
    for _ in 0..n {
        let t = u8::from(rng.random_bool(0.5));
        let eps_p = normal(&mut rng);
        let eps_y = normal(&mut rng);
        let p0 = u8::from(eps_p <= 0.0);
        let p1 = u8::from(eps_p <= 1.0);
        let y0 = f64::from(p0) / 2.0 + eps_y;
        let y1 = f64::from(p1) / 2.0 + s2 + eps_y;
        let (p, y) = if t == 1 { (p1, y1) } else { (p0, y0) };
        records.push(ProxyRecord { y, t, p });
        potential.push((y0, y1));
    }
    Ok((ScenarioSample::proxy(records).expect("generated records are valid"), potential))
}

pub fn gen_proxy(config: &ScenarioConfig) -> Result<ScenarioSample, DgpError> {
    gen_proxy_with_potential(config).map(|(s, _)| s)
}

/// Dispatches on `config.scenario`.
pub fn generate(config: &ScenarioConfig) -> Result<ScenarioSample, DgpError> {
    generate_with_potential(config).map(|(s, _)| s)
}

pub fn generate_with_potential(config: &ScenarioConfig) -> Result<(ScenarioSample, Vec<Potential>), DgpError> {
    match config.scenario {
        Scenario::Observational => gen_observational_with_potential(config),
        Scenario::IvFusion => gen_iv_with_potential(config),
        Scenario::Proxy => gen_proxy_with_potential(config),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueEffect {
    pub theta0: f64,
}

/// `E[Y(1) − Y(0)]`: 1 + 1.5·s² (observational), 1 (IV fusion),
/// (Φ(1) − ½)/2 + s² (proxy).
pub fn true_effect(scenario: Scenario, s: f64) -> TrueEffect {
    let s2 = s * s;
    let theta0 = match scenario {
        Scenario::Observational => 1.0 + 1.5 * s2,
        Scenario::IvFusion => 1.0,
        Scenario::Proxy => 0.5 * (std_normal_cdf(1.0) - 0.5) + s2,
    };
    TrueEffect { theta0 }
}
