//! The four commands. Each one loads work from the experiment config,
//! writes the report to the configured output path in canonical form,
//! and drops a manifest sidecar next to it. Nothing is written when a
//! command fails.

use coordex::optimizer::{optimize, optimize_converse};
use coordex::scenario::{evaluate, AuxScheme, Scenario, Verdict, FEASIBILITY_TOL};
use coordex::sim::{
    simulate_block_markov_detailed, simulate_noncausal_detailed, SimConfig, SimReport,
    TrialOutcome,
};

use crate::canon::{canonical_string, csv_float};
use crate::config::{ExperimentConfig, OutputFormat};
use crate::manifest::{timestamp, write_manifest, RunManifest};
use crate::CliError;

/// A loaded config with its identity fixed: overrides applied, hash
/// computed, start time taken.
pub struct Run {
    pub cfg: ExperimentConfig,
    pub config_hash: String,
    pub quiet: bool,
    pub started: String,
}

impl Run {
    fn info(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn persist(&self, body: &str, seed: u64) -> Result<(), CliError> {
        let path = &self.cfg.output_path;
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|source| CliError::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
        }
        std::fs::write(path, body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: self.config_hash.clone(),
            started: self.started.clone(),
            finished: timestamp(),
            seed,
        };
        write_manifest(path, &manifest)?;
        Ok(())
    }
}

/// Feasibility check: evaluate the configured scheme, or search for
/// the best one when an optimizer section is present. Exit code maps
/// the verdict: 0 achievable, 2 infeasible, 3 undecided.
pub fn cmd_check(run: &Run) -> Result<i32, CliError> {
    let cfg = &run.cfg;
    if cfg.format == OutputFormat::Csv {
        return Err(CliError::Config("check reports are json only".to_string()));
    }
    let (report, seed) = if let Some(ocfg) = &cfg.optimizer {
        let ach = optimize(&cfg.spec, ocfg)?;
        let conv = optimize_converse(&cfg.spec, ocfg)?;
        let mut report = evaluate(&cfg.spec, &ach.best_aux, ocfg.tolerance)?;
        // report the bounds over the whole searched class, not just
        // the witness scheme
        report.value = ach.best_value;
        report.converse_value = conv.best_value;
        report.rate_margin = ach.best_value.max(0.0);
        report.feasible = if ach.best_value > FEASIBILITY_TOL {
            Verdict::AchievableCertified
        } else if conv.best_value < -FEASIBILITY_TOL {
            Verdict::InfeasibleCertified
        } else {
            Verdict::Gap
        };
        (report, ocfg.seed)
    } else if let Some(aux) = &cfg.aux {
        (evaluate(&cfg.spec, aux, FEASIBILITY_TOL)?, 0)
    } else {
        return Err(CliError::Config(
            "check needs an aux scheme or an optimizer section".to_string(),
        ));
    };
    run.persist(&canonical_string(&report)?, seed)?;
    run.info(format!(
        "check: {} value {:.6} converse {:.6} -> {}",
        report.feasible,
        report.value,
        report.converse_value,
        cfg.output_path.display()
    ));
    Ok(match report.feasible {
        Verdict::AchievableCertified => 0,
        Verdict::InfeasibleCertified => 2,
        Verdict::Gap => 3,
    })
}

pub fn cmd_optimize(run: &Run) -> Result<i32, CliError> {
    let cfg = &run.cfg;
    if cfg.format == OutputFormat::Csv {
        return Err(CliError::Config("optimize reports are json only".to_string()));
    }
    let ocfg = cfg
        .optimizer
        .as_ref()
        .ok_or_else(|| CliError::Config("optimize needs an optimizer section".to_string()))?;
    let result = optimize(&cfg.spec, ocfg)?;
    run.persist(&canonical_string(&result)?, ocfg.seed)?;
    run.info(format!(
        "optimize: value {:.6} certified {} evaluated {} -> {}",
        result.best_value,
        result.certified,
        result.evaluated,
        cfg.output_path.display()
    ));
    Ok(0)
}

/// The scenario picks the coding scheme: the noncausal scenario runs
/// the one-shot scheme, causal encoding runs block-Markov.
fn run_scheme(
    spec: &coordex::scenario::ScenarioSpec,
    aux: &AuxScheme,
    scfg: &SimConfig,
) -> Result<(SimReport, Vec<TrialOutcome>), CliError> {
    match spec.scenario() {
        Scenario::Noncausal => Ok(simulate_noncausal_detailed(spec, aux, scfg)?),
        Scenario::CausalEncoding => Ok(simulate_block_markov_detailed(spec, aux, scfg)?),
        other => Err(CliError::Config(format!(
            "no simulator for the {other} scenario; use noncausal or causal_encoding"
        ))),
    }
}

/// The scheme to simulate: the configured one, or the best found by
/// the optimizer section.
fn resolve_aux(cfg: &ExperimentConfig) -> Result<AuxScheme, CliError> {
    if let Some(aux) = &cfg.aux {
        return Ok(aux.clone());
    }
    if let Some(ocfg) = &cfg.optimizer {
        return Ok(optimize(&cfg.spec, ocfg)?.best_aux);
    }
    Err(CliError::Config(
        "simulation needs an aux scheme or an optimizer section".to_string(),
    ))
}

fn trials_csv(trials: &[TrialOutcome]) -> String {
    let mut out = String::from("# coordex-trials-v1\ntrial,tv,cover_ok,decode_status,m,m_hat\n");
    for (t, o) in trials.iter().enumerate() {
        out.push_str(&format!(
            "{t},{},{},{},{},{}\n",
            csv_float(o.tv),
            o.cover_ok,
            o.decode_status,
            o.m,
            o.m_hat
        ));
    }
    out
}

pub fn cmd_simulate(run: &Run) -> Result<i32, CliError> {
    let cfg = &run.cfg;
    let scfg = cfg
        .sim
        .ok_or_else(|| CliError::Config("simulate needs a sim section".to_string()))?;
    let aux = resolve_aux(cfg)?;
    let (report, trials) = run_scheme(&cfg.spec, &aux, &scfg)?;
    let body = match cfg.format {
        OutputFormat::Json => canonical_string(&report)?,
        OutputFormat::Csv => trials_csv(&trials),
    };
    run.persist(&body, scfg.seed)?;
    run.info(format!(
        "simulate: n {} rate {:.4} p_error {:.4} mean_tv {:.4} -> {}",
        report.n,
        report.rate,
        report.p_error_estimate,
        report.mean_tv,
        cfg.output_path.display()
    ));
    Ok(0)
}

fn sweep_csv(reports: &[SimReport]) -> String {
    let mut out = String::from("# coordex-sweep-v1\nn,p_error,ci_low,ci_high\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.n,
            csv_float(r.p_error_estimate),
            csv_float(r.ci95.0),
            csv_float(r.ci95.1)
        ));
    }
    out
}

pub fn cmd_sweep(run: &Run, ns: &[usize]) -> Result<i32, CliError> {
    let cfg = &run.cfg;
    if ns.is_empty() {
        return Err(CliError::Config("sweep needs at least one block length".to_string()));
    }
    let scfg = cfg
        .sim
        .ok_or_else(|| CliError::Config("sweep needs a sim section".to_string()))?;
    let aux = resolve_aux(cfg)?;
    let mut reports = Vec::with_capacity(ns.len());
    for &n in ns {
        let step = SimConfig { n, ..scfg };
        let (report, _) = run_scheme(&cfg.spec, &aux, &step)?;
        run.info(format!(
            "sweep: n {} p_error {:.4} mean_tv {:.4}",
            report.n, report.p_error_estimate, report.mean_tv
        ));
        reports.push(report);
    }
    let body = match cfg.format {
        OutputFormat::Json => canonical_string(&reports)?,
        OutputFormat::Csv => sweep_csv(&reports),
    };
    run.persist(&body, scfg.seed)?;
    run.info(format!("sweep: {} rows -> {}", reports.len(), cfg.output_path.display()));
    Ok(0)
}
