//! `divcurl`: command-line front end for div–curl systems on tetrahedral meshes.

mod commands;
mod config;
mod inputs;
mod vtk;

use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use divcurl::linsolve::SolverConfig;
use divcurl::mesh::betti_counts;
use divcurl::{CoefficientField, Mesh};
use serde_json::{json, Value};

use config::{Flags, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] divcurl::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use divcurl::Error as E;
        match self {
            CliError::Core(E::Compat(_)) => 2,
            CliError::Core(E::NonConvergence { .. } | E::Incompatible { .. }) => 3,
            _ => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "divcurl", version, about = "Generalized div-curl systems on multiply connected tetrahedral meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh statistics, Betti numbers and quality.
    MeshInfo(Flags),
    /// Evaluate the compatibility conditions of a dataset.
    Check(Flags),
    /// Flux-normalized harmonic basis.
    Basis(Flags),
    /// Solve the magnetostatic or electric system.
    Solve(Flags),
    /// Hodge-type decomposition of a field.
    Decompose(Flags),
    /// Friedrichs constant estimate.
    Friedrichs(Flags),
}

impl Command {
    fn split(&self) -> (&'static str, &Flags) {
        match self {
            Command::MeshInfo(f) => ("mesh-info", f),
            Command::Check(f) => ("check", f),
            Command::Basis(f) => ("basis", f),
            Command::Solve(f) => ("solve", f),
            Command::Decompose(f) => ("decompose", f),
            Command::Friedrichs(f) => ("friedrichs", f),
        }
    }
}

fn report(name: &str, cfg: &RunConfig, mesh: &Mesh, coeff: &CoefficientField, out: &commands::Outcome, seconds: Option<f64>) -> Result<Value, CliError> {
    let (n1, n2) = betti_counts(mesh)?;
    let (m, big_m) = coeff.bounds(mesh)?;
    let status = match out.exit {
        0 => "ok",
        2 => "incompatible",
        _ => "solver-failure",
    };
    Ok(json!({
        "command": name,
        "status": status,
        "exit_code": out.exit,
        "seed": cfg.seed,
        "tolerance": cfg.tol,
        "mesh": { "source": cfg.mesh, "cells": mesh.num_tets(), "vertices": mesh.num_vertices(), "betti": [n1, n2] },
        "coefficient": { "kind": coeff.name(), "m": m, "M": big_m },
        "results": out.results,
        "residuals": out.residuals,
        "stats": { "iterations": out.iterations, "seconds": seconds },
        "timestamp": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    }))
}

fn run(name: &str, flags: &Flags) -> Result<u8, CliError> {
    let start = Instant::now();
    let cfg = RunConfig::resolve(flags)?;
    let mesh = inputs::load_mesh(&cfg.mesh)?;
    std::fs::create_dir_all(&cfg.out).map_err(|e| CliError::Input(format!("cannot create {}: {e}", cfg.out.display())))?;
    let problem = match name {
        "check" | "solve" => Some(inputs::problem(&cfg, &mesh)?),
        _ => None,
    };
    let coeff = match (&cfg.coeff, problem.as_ref().and_then(|p| p.coefficient.clone())) {
        (Some(spec), _) => inputs::coefficient(spec, &mesh)?,
        (None, Some(c)) => c,
        (None, None) => CoefficientField::identity(),
    };
    coeff.bounds(&mesh)?;
    let solver = SolverConfig::default();
    let outcome = match name {
        "mesh-info" => Ok(commands::mesh_info(&mesh)),
        "check" => commands::check(&cfg, &mesh, &problem.as_ref().expect("dataset").data),
        "basis" => commands::basis(&cfg, &mesh, &coeff, &solver),
        "solve" => commands::solve(&cfg, &mesh, &problem.as_ref().expect("dataset").data, &coeff, &solver),
        "decompose" => commands::decompose(&cfg, &mesh, &coeff, &solver),
        _ => commands::friedrichs(&cfg, &mesh, &coeff, &solver),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) if e.exit_code() != 4 => {
            let mut residuals = std::collections::BTreeMap::new();
            let results = match &e {
                CliError::Core(divcurl::Error::Compat(r)) => {
                    residuals.extend(r.conditions.iter().map(|c| (c.name.clone(), c.residual)));
                    json!({ "error": e.to_string(), "failed": r.failed(), "compat": r })
                }
                _ => json!({ "error": e.to_string() }),
            };
            commands::Outcome { results, residuals, iterations: 0, exit: e.exit_code() as i32, message: Some(e.to_string()) }
        }
        Err(e) => return Err(e),
    };
    let seconds = cfg.timing.then(|| start.elapsed().as_secs_f64());
    let value = report(name, &cfg, &mesh, &coeff, &outcome, seconds)?;
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Input(e.to_string()))? + "\n";
    let path = cfg.out.join("report.json");
    std::fs::write(&path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    if let Some(msg) = &outcome.message {
        eprintln!("divcurl {name}: {msg}");
    }
    Ok(outcome.exit as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(4);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let (name, flags) = cli.command.split();
    match run(name, flags) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("divcurl {name}: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
