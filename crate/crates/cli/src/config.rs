//! Run configuration: command-line flags merged over an optional config file.
//!
//! The file is flat `key = value` text. `[section]` headers only group keys;
//! every key is a flag name without the leading dashes. `#` starts a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;

use crate::CliError;

pub const KEYS: &[&str] = &["mesh", "coeff", "system", "kind", "data", "current", "rho", "lambda", "p", "tol", "out", "seed", "form", "trace", "timing"];

#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// Mesh file (.msh) or primitive: cube[:n], shell[:rin,rout,k], torus[:R,r,k[,cut|nocut]].
    #[arg(long)]
    pub mesh: Option<String>,
    /// identity | diagonal(a,b,c) | rotated | rank-one | smooth | random:<seed> | file:<path>.
    #[arg(long)]
    pub coeff: Option<String>,
    /// magnetostatic | electric.
    #[arg(long)]
    pub system: Option<String>,
    /// magnetic | electric (basis, decompose) or normal | tangential (friedrichs).
    #[arg(long)]
    pub kind: Option<String>,
    /// Named dataset, manufactured-<k>, random, a vector field preset or file:<path>.
    #[arg(long)]
    pub data: Option<String>,
    /// Current J: zero | radial-inverse-square | vector field preset | file:<path>.
    #[arg(long)]
    pub current: Option<String>,
    /// Charge density: zero | one | <number> | file:<path>.
    #[arg(long)]
    pub rho: Option<String>,
    /// Boundary data λ (magnetostatic) or Λ (electric): zero | poloidal | preset | file:<path>.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Friedrichs right-hand side: with-l2 | without-l2 | cut-flux.
    #[arg(long)]
    pub form: Option<String>,
    /// Friedrichs trace norm: mesh-weighted | l2.
    #[arg(long)]
    pub trace: Option<String>,
    /// Record wall-clock seconds in the report.
    #[arg(long)]
    pub timing: bool,
    /// Config file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mesh: String,
    pub coeff: Option<String>,
    pub system: Option<String>,
    pub kind: Option<String>,
    pub data: Option<String>,
    pub current: Option<String>,
    pub rho: Option<String>,
    pub lambda: Option<String>,
    pub p: f64,
    pub tol: f64,
    pub out: PathBuf,
    pub seed: u64,
    pub form: String,
    pub trace: String,
    pub timing: bool,
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || (line.starts_with('[') && line.ends_with(']')) {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim().to_string();
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Input(format!("config line {}: unknown key '{k}'", i + 1)));
        }
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Input(format!("config line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(map)
}

fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Input(format!("bad value for {key}: '{v}'")))
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<RunConfig, CliError> {
        let file = match &flags.config {
            Some(p) => load_config(p)?,
            None => BTreeMap::new(),
        };
        let pick = |flag: &Option<String>, key: &str| flag.clone().or_else(|| file.get(key).cloned());
        let p = match (flags.p, file.get("p")) {
            (Some(p), _) => p,
            (None, Some(v)) => number("p", v)?,
            (None, None) => 2.0,
        };
        let tol = match (flags.tol, file.get("tol")) {
            (Some(t), _) => t,
            (None, Some(v)) => number("tol", v)?,
            (None, None) => 1e-8,
        };
        let seed = match (flags.seed, file.get("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => number("seed", v)?,
            (None, None) => 42,
        };
        let timing = flags.timing || matches!(file.get("timing").map(String::as_str), Some("true" | "1" | "yes"));
        let out = flags.out.clone().or_else(|| file.get("out").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("divcurl-out"));
        let cfg = RunConfig {
            mesh: pick(&flags.mesh, "mesh").ok_or_else(|| CliError::Input("exactly one mesh source is required (--mesh)".into()))?,
            coeff: pick(&flags.coeff, "coeff"),
            system: pick(&flags.system, "system"),
            kind: pick(&flags.kind, "kind"),
            data: pick(&flags.data, "data"),
            current: pick(&flags.current, "current"),
            rho: pick(&flags.rho, "rho"),
            lambda: pick(&flags.lambda, "lambda"),
            p,
            tol,
            out,
            seed,
            form: pick(&flags.form, "form").unwrap_or_else(|| "with-l2".into()),
            trace: pick(&flags.trace, "trace").unwrap_or_else(|| "mesh-weighted".into()),
            timing,
        };
        if !(cfg.tol > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {}", cfg.tol)));
        }
        if !(cfg.p >= 1.0) {
            return Err(CliError::Input(format!("--p must be at least 1, got {}", cfg.p)));
        }
        Ok(cfg)
    }
}
