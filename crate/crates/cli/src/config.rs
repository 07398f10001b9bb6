use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use satnls_core::{Params, RadialGrid};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "satnls",
    version,
    about = "Saturated two-component NLS system: ground states, spectra, bifurcations, branches"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Scalar ground state u_s on the radial grid.
    GroundState,
    /// Eigenvalues mu_k(s) of the linearization at (u_s, 0).
    Spectrum,
    /// mu_0(s), ..., mu_{kmax-1}(s) over the s-sweep.
    Eigencurves,
    /// Crossings mu_k(s) = 1 for k < kmax over the s-sweep.
    BifurcationPoints,
    /// Continue the branch C_k from its first bifurcation point.
    ContinueBranch,
    /// Compare all branch energies for k < kmax with the semitrivial level.
    VerifyGroundstate,
    /// Report the parameter conditions for bifurcation and positivity.
    CheckConditions,
    /// Box-potential eigenvalue sequence for decreasing eps.
    BoxOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

/// Flags shared by all subcommands. Unset flags fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    #[arg(long, global = true)]
    pub lambda1: Option<f64>,
    #[arg(long, global = true)]
    pub lambda2: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// Space dimension (1, 2 or 3).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Number of eigenvalue indices k = 0..kmax-1.
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    #[arg(long, global = true)]
    pub smin: Option<f64>,
    #[arg(long, global = true)]
    pub smax: Option<f64>,
    #[arg(long, global = true)]
    pub scount: Option<usize>,
    /// Bisection tolerance on |mu - 1|, Newton tolerance, or energy rtol, depending on the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// key=value or JSON file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Branch index for continue-branch.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// +1 or -1: sign of v along the kernel at the seed.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub direction: Option<i32>,
    #[arg(long = "max-steps", global = true)]
    pub max_steps: Option<usize>,
    /// Box depth for box-oracle.
    #[arg(long, global = true)]
    pub kappa: Option<f64>,
    /// Comma-separated eps values for box-oracle.
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
}

/// Logarithmic s-sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sweep {
    pub smin: f64,
    pub smax: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub grid: RadialGrid,
    pub sweep: Sweep,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub kmax: usize,
    pub tol: Option<f64>,
    pub k: usize,
    pub direction: i32,
    pub max_steps: usize,
    pub kappa: f64,
    pub eps: Vec<f64>,
}

pub const DEFAULT_POINTS: usize = 2001;
pub const DEFAULT_KMAX: usize = 6;
const BOX_POINTS_PER_UNIT: f64 = 40.0;

/// Parses command-line arguments (including the program name) into a validated [`RunConfig`].
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })?;
    let mut opts = cli.opts;
    if let Some(path) = opts.config.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        opts.fill_from(parse_config_text(&text)?)?;
    }
    opts.resolve(cli.command)
}

/// Flat `key=value` lines (`#` comments) or a JSON object with scalar values.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| CliError::Usage("config: JSON must be an object".into()))?;
        for (key, v) in obj {
            let raw = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                serde_json::Value::Array(items) => items
                    .iter()
                    .map(|x| match x {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                _ => return Err(CliError::Usage(format!("config: unsupported value for '{key}'"))),
            };
            map.insert(normalize_key(key), raw);
        }
        return Ok(map);
    }
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        map.insert(normalize_key(key.trim()), value.trim().to_string());
    }
    Ok(map)
}

fn normalize_key(key: &str) -> String {
    key.trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

fn take<T: FromStr>(slot: &mut Option<T>, map: &mut BTreeMap<String, String>, key: &str) -> Result<(), CliError> {
    if let Some(raw) = map.remove(key) {
        let parsed = raw
            .parse::<T>()
            .map_err(|_| CliError::Usage(format!("config: cannot parse '{key}' from '{raw}'")))?;
        if slot.is_none() {
            *slot = Some(parsed);
        }
    }
    Ok(())
}

impl Opts {
    /// Fills unset fields from a parsed config file. Unknown keys are usage errors.
    pub fn fill_from(&mut self, mut map: BTreeMap<String, String>) -> Result<(), CliError> {
        take(&mut self.lambda1, &mut map, "lambda1")?;
        take(&mut self.lambda2, &mut map, "lambda2")?;
        take(&mut self.alpha, &mut map, "alpha")?;
        take(&mut self.beta, &mut map, "beta")?;
        take(&mut self.s, &mut map, "s")?;
        take(&mut self.n, &mut map, "n")?;
        take(&mut self.rmax, &mut map, "rmax")?;
        take(&mut self.points, &mut map, "points")?;
        take(&mut self.kmax, &mut map, "kmax")?;
        take(&mut self.smin, &mut map, "smin")?;
        take(&mut self.smax, &mut map, "smax")?;
        take(&mut self.scount, &mut map, "scount")?;
        take(&mut self.tol, &mut map, "tol")?;
        take(&mut self.out, &mut map, "out")?;
        take(&mut self.format, &mut map, "format")?;
        take(&mut self.k, &mut map, "k")?;
        take(&mut self.direction, &mut map, "direction")?;
        take(&mut self.max_steps, &mut map, "max-steps")?;
        take(&mut self.kappa, &mut map, "kappa")?;
        if let Some(raw) = map.remove("eps") {
            let eps = raw
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Usage(format!("config: cannot parse 'eps' from '{raw}'")))?;
            if self.eps.is_none() {
                self.eps = Some(eps);
            }
        }
        if let Some(key) = map.keys().next() {
            return Err(CliError::Usage(format!("config: unknown key '{key}'")));
        }
        Ok(())
    }

    /// Applies defaults and validates parameters, grid and sweep.
    pub fn resolve(&self, command: Command) -> Result<RunConfig, CliError> {
        let params = Params {
            lambda1: self.lambda1.unwrap_or(1.0),
            lambda2: self.lambda2.unwrap_or(0.25),
            alpha: self.alpha.unwrap_or(1.0),
            beta: self.beta.unwrap_or(1.0),
            s: self.s.unwrap_or(0.5),
            n: self.n.unwrap_or(1),
        };
        params.validate().map_err(|e| CliError::from_core(e, &params))?;

        let eps = self.eps.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.01]);
        let kappa = self.kappa.unwrap_or(1.0);
        let grid = if command == Command::BoxOracle {
            if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
                return Err(CliError::Domain("eps values must be positive".into()));
            }
            let eps_min = eps.iter().copied().fold(f64::INFINITY, f64::min);
            let r_max = self.rmax.unwrap_or(
                1.0 / eps_min + params.default_r_max() * (params.lambda1.min(params.lambda2) / params.lambda2).sqrt(),
            );
            let points = self
                .points
                .unwrap_or_else(|| (r_max * BOX_POINTS_PER_UNIT).ceil() as usize + 1);
            RadialGrid::new(r_max, points)
        } else {
            RadialGrid::new(
                self.rmax.unwrap_or_else(|| params.default_r_max()),
                self.points.unwrap_or(DEFAULT_POINTS),
            )
        }
        .map_err(|e| CliError::from_core(e, &params))?;

        let s_star = params.s_star_u();
        let sweep = Sweep {
            smin: self.smin.unwrap_or(0.01 * s_star),
            smax: self.smax.unwrap_or(0.99 * s_star),
            count: self.scount.unwrap_or(200),
        };
        if matches!(
            command,
            Command::Eigencurves | Command::BifurcationPoints | Command::ContinueBranch | Command::VerifyGroundstate
        ) {
            if sweep.count < 2 || !(sweep.smin > 0.0 && sweep.smin < sweep.smax) {
                return Err(CliError::Domain(format!(
                    "s-sweep needs 0 < smin < smax and scount >= 2 (smin {}, smax {}, scount {})",
                    sweep.smin, sweep.smax, sweep.count
                )));
            }
            if sweep.smax >= s_star {
                return Err(CliError::Domain(format!(
                    "smax = {} must lie below the existence bound alpha/lambda1 = {s_star}",
                    sweep.smax
                )));
            }
        }
        let kmax = self.kmax.unwrap_or(DEFAULT_KMAX);
        if kmax == 0 {
            return Err(CliError::Domain("kmax must be at least 1".into()));
        }
        let direction = self.direction.unwrap_or(1);
        if direction != 1 && direction != -1 {
            return Err(CliError::Domain(format!("direction must be 1 or -1, got {direction}")));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::Domain(format!("tol must be positive, got {tol}")));
            }
        }
        let default_format = match command {
            Command::CheckConditions | Command::VerifyGroundstate => Format::Json,
            _ => Format::Csv,
        };
        Ok(RunConfig {
            command,
            params,
            grid,
            sweep,
            output_path: self.out.clone(),
            format: self.format.unwrap_or(default_format),
            kmax,
            tol: self.tol,
            k: self.k.unwrap_or(1),
            direction,
            max_steps: self.max_steps.unwrap_or(200),
            kappa,
            eps,
        })
    }
}
