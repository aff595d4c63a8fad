use std::path::{Path, PathBuf};

use serde::Serialize;
use wrmm_core::{
    select_radius, shift_experiment, Quadrature, RadiusSelection, SampleSet, WorstCaseProblem,
};

use crate::config::{ModelConfig, RadiusSource, RunConfig};
use crate::error::CliError;
use crate::output::{to_json, write_atomic};
use crate::validate::validation_rows;

/// Files written by a command and a short human-readable report.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub report: String,
}

#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loads, overrides and validates a config.
pub fn prepare(config: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(out) = &overrides.out {
        cfg.output.dir = Some(std::path::absolute(out).unwrap_or_else(|_| out.clone()));
    }
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    alpha_star: [f64; 2],
    beta_star: [f64; 2],
    objective: f64,
    delta: f64,
    concave_certificate: bool,
    eps_max: f64,
    grid_n: usize,
    quadrature: Quadrature,
    iterations: usize,
    log_partition: f64,
    normalization_residual: f64,
    quadrature_error: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RadiusOutput {
    chi: f64,
    n: usize,
    resamples: usize,
    profile_quantile: f64,
    delta_hat: f64,
    gram_bound: f64,
    seed: u64,
}

impl RadiusOutput {
    fn new(sel: &RadiusSelection, seed: u64) -> Self {
        Self {
            chi: sel.chi,
            n: sel.n,
            resamples: sel.resamples,
            profile_quantile: sel.profile_quantile,
            delta_hat: sel.delta_hat,
            gram_bound: sel.gram_bound,
            seed,
        }
    }
}

/// Squared budget for the moment box: the fixed `delta`, or `delta_hat²`
/// from bootstrap selection.
fn resolve_delta(
    cfg: &RunConfig,
    plus: &SampleSet,
    minus: &SampleSet,
) -> Result<(f64, Option<RadiusSelection>), CliError> {
    match cfg.radius()? {
        RadiusSource::Fixed(d) => Ok((d, None)),
        RadiusSource::Selected { chi, resamples } => {
            let sel = select_radius(plus.values(), minus.values(), chi, resamples, cfg.seed)?;
            Ok((sel.delta_hat * sel.delta_hat, Some(sel)))
        }
    }
}

fn write_manifest(cfg: &RunConfig, command: &str, out: &mut Outcome) -> Result<(), CliError> {
    let text = cfg.manifest(command)?;
    out.files.push(write_atomic(
        &cfg.output_dir(),
        "manifest.toml",
        text.as_bytes(),
    )?);
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (plus, minus) = cfg.read_samples()?;
    let (delta, selection) = resolve_delta(cfg, &plus, &minus)?;
    let domain = cfg.domain()?;
    let problem = WorstCaseProblem::new(
        &cfg.model.model(),
        &domain,
        &plus.summary(),
        &minus.summary(),
        delta,
    )?;
    let sol = problem.solve(&cfg.solver)?;
    let policy = problem.policy(&sol)?;

    let dir = cfg.output_dir();
    let mut out = Outcome::default();
    let mut csv = Vec::new();
    policy
        .write_csv(&mut csv)
        .map_err(|e| CliError::io(dir.join("policy.csv"), e))?;
    out.files.push(write_atomic(&dir, "policy.csv", &csv)?);
    let summary = SolveSummary {
        alpha_star: [sol.alpha_star_plus, sol.alpha_star_minus],
        beta_star: [sol.beta_star_plus, sol.beta_star_minus],
        objective: sol.objective,
        delta,
        concave_certificate: sol.concave_certificate,
        eps_max: domain.eps_max,
        grid_n: domain.grid_n,
        quadrature: domain.quadrature,
        iterations: sol.iterations,
        log_partition: policy.log_partition,
        normalization_residual: policy.normalization_residual,
        quadrature_error: policy.quadrature_error,
    };
    out.files
        .push(write_atomic(&dir, "summary.json", &to_json(&summary)?)?);
    if let Some(sel) = &selection {
        out.files.push(write_atomic(
            &dir,
            "radius.json",
            &to_json(&RadiusOutput::new(sel, cfg.seed))?,
        )?);
    }
    write_manifest(cfg, "solve", &mut out)?;
    out.report = format!(
        "delta = {delta:.6e}  alpha* = ({:.6}, {:.6})  objective = {:.6e}  concave certificate = {}",
        sol.alpha_star_plus, sol.alpha_star_minus, sol.objective, sol.concave_certificate
    );
    Ok(out)
}

pub fn radius(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let RadiusSource::Selected { chi, resamples } = cfg.radius()? else {
        return Err(CliError::Config("radius requires robust.chi".into()));
    };
    let (plus, minus) = cfg.read_samples()?;
    let sel = select_radius(plus.values(), minus.values(), chi, resamples, cfg.seed)?;
    let mut out = Outcome::default();
    out.files.push(write_atomic(
        &cfg.output_dir(),
        "radius.json",
        &to_json(&RadiusOutput::new(&sel, cfg.seed))?,
    )?);
    write_manifest(cfg, "radius", &mut out)?;
    out.report = format!(
        "chi = {chi}  n = {}  delta_hat = {:.6e}  profile quantile = {:.6e}",
        sel.n, sel.delta_hat, sel.profile_quantile
    );
    Ok(out)
}

#[derive(Debug, Serialize)]
struct SimulateManifest<'a> {
    seed: u64,
    episodes: usize,
    deltas: &'a [f64],
    shift_spec: wrmm_core::ShiftSpec,
    model: &'a ModelConfig,
    eps_max: f64,
    grid_n: usize,
    quadrature: Quadrature,
}

pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (plus, minus) = cfg.read_samples()?;
    let deltas = match &cfg.simulate.deltas {
        Some(d) => d.clone(),
        None => vec![0.0, resolve_delta(cfg, &plus, &minus)?.0],
    };
    let domain = cfg.domain()?;
    let report = shift_experiment(
        plus.values(),
        minus.values(),
        &cfg.model.model(),
        &domain,
        &deltas,
        &cfg.simulate.shift,
        cfg.simulate.episodes,
        cfg.seed,
        &cfg.solver,
    )?;
    let dir = cfg.output_dir();
    let mut out = Outcome::default();
    out.files.push(write_atomic(
        &dir,
        "simulate.csv",
        report.to_csv().as_bytes(),
    )?);
    let manifest = SimulateManifest {
        seed: cfg.seed,
        episodes: cfg.simulate.episodes,
        deltas: &deltas,
        shift_spec: cfg.simulate.shift,
        model: &cfg.model,
        eps_max: domain.eps_max,
        grid_n: domain.grid_n,
        quadrature: domain.quadrature,
    };
    out.files.push(write_atomic(
        &dir,
        "simulate_manifest.json",
        &to_json(&manifest)?,
    )?);
    write_manifest(cfg, "simulate", &mut out)?;
    out.report = report.to_csv();
    Ok(out)
}

pub fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (plus, minus) = cfg.read_samples()?;
    let rows = validation_rows(cfg, &plus, &minus)?;
    let dir = cfg.output_dir();
    let mut out = Outcome::default();
    let table = crate::validate::render_table(&rows);
    out.files
        .push(write_atomic(&dir, "validate.json", &to_json(&rows)?)?);
    out.files
        .push(write_atomic(&dir, "validate.txt", table.as_bytes())?);
    write_manifest(cfg, "validate", &mut out)?;
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| r.pass == Some(false))
        .map(|r| {
            format!(
                "{}: analytic {:e}, oracle {:e}, rel_err {:e}",
                r.check, r.analytic, r.oracle, r.rel_err
            )
        })
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Validation(format!(
            "{table}\n{}",
            failed.join("\n")
        )));
    }
    out.report = table;
    Ok(out)
}
