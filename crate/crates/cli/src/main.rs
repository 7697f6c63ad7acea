//! `tmsel`: data generation, one-shot targeted selection, Monte Carlo
//! experiments and plots.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on runtime failures.

mod config;

use std::error::Error;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tmsel_core::bootstrap::{
    percentile_interval, replicate_estimates, selection_from_matrix, shortcut_replicate_estimates,
    variances_from_replicates, ResamplePlan, ShortcutVarianceTerm,
};
use tmsel_core::dgp::{generate_with_potential, SampleSizes, ScenarioConfig};
use tmsel_core::estimands::{default_weights, printed_weights, scenario_family};
use tmsel_core::experiments::{
    check_criterion_bias, check_gaussian_lemma, check_selection_consistency, check_variance_ordering,
    coverage_eval, default_grid, mse_curve, with_workers, McConfig, McReport, McRow, Method,
    SyntheticLinearConfig,
};
use tmsel_core::io::{failures_csv, mc_rows_csv, read_sample_file, replicates_csv, sample_csv};
use tmsel_core::plot::{render_plot, PlotSpec};
use tmsel_core::rng::{self, purpose};
use tmsel_core::selection::{cv_risks, make_folds, select, Criterion, RiskTable};
use tmsel_core::Scenario;

type Res<T> = Result<T, Box<dyn Error>>;

#[derive(Parser, Debug)]
#[command(name = "tmsel", version, about = "Targeted model selection with bootstrap intervals")]
#[command(args_override_self = true)]
struct Cli {
    /// Flat `key = value` file with defaults for the subcommand's flags
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a synthetic sample and write it as CSV
    Generate(GenerateArgs),
    /// Run targeted selection on a CSV sample and print the risk table
    Select(SelectArgs),
    /// Monte Carlo MSE curves over an s grid
    Simulate(SimulateArgs),
    /// Monte Carlo coverage of shortcut bootstrap intervals
    Coverage(CoverageArgs),
    /// Sampled checks of the criteria in a synthetic Gaussian setting
    TheoryCheck(TheoryArgs),
    /// Render experiment CSV output as an SVG chart
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    scenario: Scenario,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sample size (obs, proxy)
    #[arg(long)]
    n: Option<usize>,
    /// Records with instrument (iv)
    #[arg(long)]
    n_complete: Option<usize>,
    /// Records without instrument (iv)
    #[arg(long)]
    n_incomplete: Option<usize>,
    /// Append potential outcome columns y0,y1
    #[arg(long)]
    keep_potential: bool,
    /// Output path; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CriterionArg {
    Mod,
    Cv,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[arg(long)]
    scenario: Scenario,
    #[arg(long)]
    input: PathBuf,
    /// Bootstrap replicates for the variance terms
    #[arg(long, default_value_t = 100)]
    boot: usize,
    /// Also form a shortcut interval; variances and interval then share one
    /// matrix of this many replicates
    #[arg(long)]
    boot_ci: Option<usize>,
    /// Folds for the cross-validation column (0 skips it)
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = CriterionArg::Mod)]
    criterion: CriterionArg,
    #[arg(long, default_value = "candidate")]
    shortcut_variance_term: ShortcutVarianceTerm,
    /// Drop the w = 1 candidate (obs, proxy)
    #[arg(long)]
    grid_as_printed: bool,
    /// Write the replicate matrix as `b,g,estimate`
    #[arg(long, value_name = "PATH")]
    dump_replicates: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct McArgs {
    #[arg(long)]
    scenario: Scenario,
    #[arg(long, default_value_t = 200)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated s values; the scenario's default grid when omitted
    #[arg(long, value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    /// Drop the w = 1 candidate (obs, proxy)
    #[arg(long)]
    grid_as_printed: bool,
    /// Thread count; never changes the output
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Failure sidecar `scenario,s,run,failure_kind,redraws`
    #[arg(long, value_name = "PATH")]
    failures: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value_t = 100)]
    boot: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, value_delimiter = ',', default_value = "targeted,cv,baseline")]
    methods: Vec<Method>,
}

#[derive(Args, Debug)]
struct CoverageArgs {
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, default_value_t = 1000)]
    boot_ci: usize,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, default_value = "candidate")]
    shortcut_variance_term: ShortcutVarianceTerm,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Check {
    Bias,
    Variance,
    Consistency,
    Lemma,
    All,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[arg(long, value_enum, default_value_t = Check::All)]
    check: Check,
    /// Runs per check (defaults: 10000, lemma 1000000)
    #[arg(long)]
    runs: Option<usize>,
    /// Sample size for the bias and variance checks
    #[arg(long, default_value_t = 5000)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "")]
    title: String,
    /// Keep only rows with this metric
    #[arg(long)]
    metric: Option<String>,
    #[arg(long, default_value = "s")]
    x: String,
    #[arg(long, default_value = "method")]
    series: String,
    #[arg(long, default_value = "value")]
    y: String,
    /// Standard error column for the ±2 se band; `none` disables it
    #[arg(long, default_value = "mc_se")]
    band: String,
}

fn write_out(path: Option<&Path>, text: &str) -> Res<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display()).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn weights_for(scenario: Scenario, as_printed: bool) -> Vec<f64> {
    if as_printed {
        printed_weights(scenario)
    } else {
        default_weights(scenario)
    }
}

fn cmd_generate(a: &GenerateArgs) -> Res<()> {
    let mut cfg = ScenarioConfig::default_for(a.scenario, a.s, a.seed);
    match (&mut cfg.sizes, a.scenario) {
        (SampleSizes::Fusion { complete, incomplete }, _) => {
            if a.n.is_some() {
                return Err("--n does not apply to iv; use --n-complete/--n-incomplete".into());
            }
            *complete = a.n_complete.unwrap_or(*complete);
            *incomplete = a.n_incomplete.unwrap_or(*incomplete);
        }
        (SampleSizes::Single(n), _) => {
            if a.n_complete.is_some() || a.n_incomplete.is_some() {
                return Err("--n-complete/--n-incomplete only apply to iv".into());
            }
            *n = a.n.unwrap_or(*n);
        }
    }
    let (sample, potential) = generate_with_potential(&cfg)?;
    let text = sample_csv(&sample, a.keep_potential.then_some(potential.as_slice()));
    write_out(a.out.as_deref(), &text)
}

fn cmd_select(a: &SelectArgs) -> Res<()> {
    let sample = read_sample_file(a.scenario, &a.input)?;
    let family = scenario_family(a.scenario, &weights_for(a.scenario, a.grid_as_printed))?;
    let b = a.boot_ci.unwrap_or(a.boot);
    let plan = ResamplePlan::seeded(b, rng::derive_seed(a.seed, &[purpose::BOOT_VAR]));
    let matrix = replicate_estimates(&family, &sample, &plan)?;
    let variances = variances_from_replicates(&matrix);
    let base = selection_from_matrix(&family, &sample, &matrix)?;
    let cv = if a.folds == 0 {
        None
    } else {
        let mut frng = rng::stream(a.seed, &[purpose::FOLDS]);
        match make_folds(&sample, a.folds, &mut frng).and_then(|f| cv_risks(&family, &sample, &f)) {
            Ok(cv) => Some(cv),
            Err(e) if matches!(a.criterion, CriterionArg::Mod) => {
                eprintln!("warning: cross-validation column skipped: {e}");
                None
            }
            Err(e) => return Err(e.into()),
        }
    };
    let estimates: Vec<f64> = base.table.rows.iter().map(|r| r.estimate).collect();
    let table = RiskTable::from_estimates(family.labels(), &estimates, &variances, cv.as_deref());
    let criterion = match a.criterion {
        CriterionArg::Mod => Criterion::ModifiedRisk,
        CriterionArg::Cv => Criterion::CvRisk,
    };
    let result = select(&table, criterion)?;
    print!("{}", result.to_csv());
    if a.boot_ci.is_some() {
        let star = shortcut_replicate_estimates(&matrix, &variances, a.shortcut_variance_term);
        let ci = percentile_interval(&star, a.level)?;
        eprintln!("interval level={} lower={:?} upper={:?}", ci.level, ci.lower, ci.upper);
    }
    if matrix.redraws() > 0 {
        eprintln!("note: {} bootstrap replicates were redrawn", matrix.redraws());
    }
    if let Some(p) = &a.dump_replicates {
        write_out(Some(p), &replicates_csv(&matrix))?;
    }
    Ok(())
}

fn mc_config(a: &McArgs) -> McConfig {
    let mut cfg = McConfig::new(a.scenario);
    cfg.runs = a.runs;
    cfg.master_seed = a.seed;
    cfg.s_grid = a.s_grid.clone().unwrap_or_else(|| default_grid(a.scenario));
    cfg.weights = weights_for(a.scenario, a.grid_as_printed);
    cfg.workers = a.workers;
    cfg
}

fn write_report(a: &McArgs, report: &McReport) -> Res<()> {
    write_out(Some(&a.out), &mc_rows_csv(&report.rows))?;
    if let Some(p) = &a.failures {
        write_out(Some(p), &failures_csv(&report.failures))?;
    }
    let failed = report.failures.iter().filter(|f| f.failure_kind != "redrawn").count();
    if failed > 0 {
        eprintln!("note: {failed} runs failed and were excluded");
    }
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Res<()> {
    let mut cfg = mc_config(&a.mc);
    cfg.b_var = a.boot;
    cfg.k_folds = a.folds;
    cfg.methods = a.methods.clone();
    let report = mse_curve(&cfg)?;
    write_report(&a.mc, &report)
}

fn cmd_coverage(a: &CoverageArgs) -> Res<()> {
    let mut cfg = mc_config(&a.mc);
    cfg.b_ci = a.boot_ci;
    cfg.level = a.level;
    cfg.shortcut_term = a.shortcut_variance_term;
    cfg.methods = vec![Method::Targeted];
    let report = coverage_eval(&cfg)?;
    write_report(&a.mc, &report)
}

fn cmd_theory(a: &TheoryArgs) -> Res<()> {
    let runs = a.runs.unwrap_or(10_000);
    let base = SyntheticLinearConfig { n: a.n, k_folds: a.folds, ..Default::default() };
    let wants = |c: Check| a.check == c || a.check == Check::All;
    let rows = with_workers(a.workers, || -> Result<Vec<McRow>, String> {
        let mut rows = Vec::new();
        let err = |e: tmsel_core::experiments::ExperimentError| e.to_string();
        if wants(Check::Bias) {
            rows.extend(check_criterion_bias(&base, &[a.n], runs, a.seed).map_err(err)?);
        }
        if wants(Check::Variance) {
            let case1 = SyntheticLinearConfig { mix: 0.5, ..base };
            let case2 = SyntheticLinearConfig { bias_shift: 1.0, ..base };
            for c in [case1, case2] {
                let check = check_variance_ordering(&c, runs, a.seed).map_err(err)?;
                rows.push(check.left);
                rows.push(check.right);
            }
        }
        if wants(Check::Consistency) {
            let c = SyntheticLinearConfig { var_b: 0.5, bias_shift: 0.1, ..base };
            rows.extend(check_selection_consistency(&c, &[200, 2000, 20000], runs.min(2000), a.seed).map_err(err)?);
        }
        if wants(Check::Lemma) {
            let lemma_runs = a.runs.unwrap_or(1_000_000);
            for (k, corr) in [(2, 0.0), (5, 0.5), (10, 0.5)] {
                let check = check_gaussian_lemma(k, corr, lemma_runs, a.seed).map_err(err)?;
                rows.push(check.left);
                rows.push(check.right);
            }
        }
        Ok(rows)
    })?;
    write_out(Some(&a.out), &mc_rows_csv(&rows))
}

fn cmd_plot(a: &PlotArgs) -> Res<()> {
    let mut spec = PlotSpec::new(&a.input, &a.out);
    spec.title = a.title.clone();
    spec.metric = a.metric.clone();
    spec.x_col = a.x.clone();
    spec.series_col = a.series.clone();
    spec.y_col = a.y.clone();
    spec.band_col = (a.band != "none").then(|| a.band.clone());
    render_plot(&spec)?;
    Ok(())
}

fn run(argv: Vec<OsString>) -> u8 {
    let argv = match config::apply_config(argv) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Select(a) => cmd_select(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Coverage(a) => cmd_coverage(a),
        Command::TheoryCheck(a) => cmd_theory(a),
        Command::Plot(a) => cmd_plot(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
