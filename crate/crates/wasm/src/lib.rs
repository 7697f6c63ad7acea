//! Browser demo: selection on a generated sample, a small MSE curve, and the
//! Gaussian variance check. The exported functions return JSON or SVG text;
//! the plain Rust versions below them are what the tests call.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use tmsel_core::bootstrap::{select_ci_shortcut, ResamplePlan};
use tmsel_core::dgp::{generate, true_effect, ScenarioConfig};
use tmsel_core::estimands::{default_weights, scenario_family};
use tmsel_core::experiments::{check_gaussian_lemma, default_grid, mse_curve, McConfig, Metric};
use tmsel_core::plot::{render_svg, Series};
use tmsel_core::Scenario;

#[derive(Serialize)]
struct Row {
    label: String,
    estimate: f64,
    mod_risk: f64,
    selected: bool,
}

#[derive(Serialize)]
struct SelectOut {
    scenario: &'static str,
    s: f64,
    truth: f64,
    selected: String,
    estimate: f64,
    lower: f64,
    upper: f64,
    rows: Vec<Row>,
}

#[derive(Serialize)]
struct LemmaOut {
    k: usize,
    left: f64,
    right: f64,
    z: f64,
}

fn scenario(name: &str) -> Result<Scenario, String> {
    name.parse::<Scenario>().map_err(|e| e.to_string())
}

pub fn run_select(name: &str, s: f64, seed: u64, boot: usize) -> Result<String, String> {
    let sc = scenario(name)?;
    let sample = generate(&ScenarioConfig::default_for(sc, s, seed)).map_err(|e| e.to_string())?;
    let family = scenario_family(sc, &default_weights(sc)).map_err(|e| e.to_string())?;
    let plan = ResamplePlan::seeded(boot, seed.wrapping_add(1));
    let (res, ci) = select_ci_shortcut(&family, &sample, &plan, 0.95).map_err(|e| e.to_string())?;
    let rows = res
        .table
        .rows
        .iter()
        .enumerate()
        .map(|(g, r)| Row { label: r.label.clone(), estimate: r.estimate, mod_risk: r.mod_risk, selected: g == res.selected_g })
        .collect();
    let out = SelectOut {
        scenario: sc.name(),
        s,
        truth: true_effect(sc, s).theta0,
        selected: res.selected_label,
        estimate: res.estimate,
        lower: ci.lower,
        upper: ci.upper,
        rows,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

pub fn run_mse_svg(name: &str, runs: usize, seed: u64) -> Result<String, String> {
    let sc = scenario(name)?;
    let mut cfg = McConfig::new(sc);
    cfg.runs = runs;
    cfg.master_seed = seed;
    cfg.b_var = 50;
    cfg.s_grid = default_grid(sc);
    let report = mse_curve(&cfg).map_err(|e| e.to_string())?;
    let mut series: Vec<Series> = Vec::new();
    for r in report.rows.iter().filter(|r| r.metric == Metric::Mse) {
        match series.iter_mut().find(|s| s.name == r.method) {
            Some(s) => s.points.push((r.s, r.value, r.mc_se)),
            None => series.push(Series { name: r.method.clone(), points: vec![(r.s, r.value, r.mc_se)] }),
        }
    }
    render_svg(&series, &format!("{} MSE, {runs} runs", sc.name()), "s", "MSE").map_err(|e| e.to_string())
}

pub fn run_lemma(k: usize, correlation: f64, runs: usize, seed: u64) -> Result<String, String> {
    let c = check_gaussian_lemma(k, correlation, runs, seed).map_err(|e| e.to_string())?;
    let out = LemmaOut { k, left: c.left.value, right: c.right.value, z: c.z() };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn select_demo(scenario: &str, s: f64, seed: u32, boot: u32) -> Result<String, JsValue> {
    run_select(scenario, s, seed as u64, boot as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn mse_curve_svg(scenario: &str, runs: u32, seed: u32) -> Result<String, JsValue> {
    run_mse_svg(scenario, runs as usize, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn lemma_demo(k: u32, correlation: f64, runs: u32, seed: u32) -> Result<String, JsValue> {
    run_lemma(k as usize, correlation, runs as usize, seed as u64).map_err(|e| JsValue::from_str(&e))
}
