//! Command-line front end: parameter parsing, sweeps, and CSV/JSON export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod export;

use std::ffi::OsString;

use satnls_core::{
    box_potential_eigen, check_corollary1, check_corollary2, continue_branch, count_nodes, eigen_curves, eigenvalues_l,
    find_bifurcation_points, ground_state, log_spaced, mu_bar, mu_limit_saturation, positivity_constraint,
    potential_ws, semitrivial_profile, verify_semitrivial_groundstate, Branch, ContinuationConfig, Error, Params,
    ScalarProblem, DEFAULT_TAIL_THRESHOLD,
};
use serde::Serialize;
use thiserror::Error as ThisError;

pub use config::{parse_args, parse_config_text, Command, Format, Opts, RunConfig, Sweep};
pub use export::{branch_csv, branch_json, export_branch, fmt_f64, read_branch_json, BRANCH_HEADER};

use export::{csv_row, write_output};

#[derive(Debug, Clone, PartialEq, ThisError)]
pub enum CliError {
    /// `--help` or `--version`: not an error, printed to stdout.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => 0,
            CliError::Domain(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Usage(_) => 64,
            CliError::Io(_) => 74,
        }
    }

    /// Maps a core error; existence-window messages name the `α/λ₁` bound.
    pub fn from_core(err: Error, params: &Params) -> Self {
        match err {
            Error::ExistenceWindow { s, bound } if bound == params.s_star_u() => CliError::Domain(format!(
                "s = {s} is outside the existence window 0 <= s < alpha/lambda1 = {bound}"
            )),
            Error::ExistenceWindow { s, bound } => CliError::Domain(format!(
                "s = {s} is outside the existence window 0 <= s < {bound} (beta/lambda2 = {})",
                params.s_star_v()
            )),
            e if e.is_domain() => CliError::Domain(e.to_string()),
            e => CliError::Solver(e.to_string()),
        }
    }
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_args(args).and_then(|cfg| {
        let text = run(&cfg)?;
        write_output(&text, cfg.output_path.as_deref())
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            match &e {
                CliError::Usage(text) => eprint!("{text}"),
                other => eprintln!("satnls: {other}"),
            }
            e.exit_code()
        }
    }
}

/// Executes the command and returns the rendered output.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let core = |e: Error| CliError::from_core(e, &cfg.params);
    match cfg.command {
        Command::GroundState => ground_state_cmd(cfg).map_err(core),
        Command::Spectrum => spectrum_cmd(cfg).map_err(core),
        Command::Eigencurves => eigencurves_cmd(cfg).map_err(core),
        Command::BifurcationPoints => bifurcation_cmd(cfg).map_err(core),
        Command::ContinueBranch => {
            let branch = compute_branch(cfg)?;
            match cfg.format {
                Format::Csv => Ok(branch_csv(&branch)),
                Format::Json => branch_json(&branch),
            }
        }
        Command::VerifyGroundstate => verify_cmd(cfg),
        Command::CheckConditions => check_conditions_cmd(cfg).map_err(core),
        Command::BoxOracle => box_oracle_cmd(cfg).map_err(core),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn s_values(cfg: &RunConfig) -> Vec<f64> {
    log_spaced(cfg.sweep.smin, cfg.sweep.smax, cfg.sweep.count)
}

fn ground_state_cmd(cfg: &RunConfig) -> satnls_core::Result<String> {
    let prob = ScalarProblem::for_u(&cfg.params);
    prob.validate()?;
    let u = ground_state(&prob, &cfg.grid)?;
    Ok(match cfg.format {
        Format::Csv => {
            let mut out = String::from("r,u\n");
            for (i, v) in u.values.iter().enumerate() {
                out.push_str(&csv_row(&[fmt_f64(cfg.grid.node(i)), fmt_f64(*v)]));
            }
            out
        }
        Format::Json => to_json(&u),
    })
}

#[derive(Serialize)]
struct SpectrumReport {
    s: f64,
    eigenvalues: Vec<f64>,
    nodes: Vec<usize>,
    truncated: bool,
}

fn spectrum_cmd(cfg: &RunConfig) -> satnls_core::Result<String> {
    let p = &cfg.params;
    let us = semitrivial_profile(p, &cfg.grid, None)?;
    let spec = eigenvalues_l(&potential_ws(&us, p), p.lambda2, p.n, cfg.kmax)?;
    let nodes: Vec<usize> = spec
        .eigenfunctions
        .iter()
        .map(|f| count_nodes(f, DEFAULT_TAIL_THRESHOLD).nodes)
        .collect();
    Ok(match cfg.format {
        Format::Csv => {
            let mut out = String::from("k,mu,nodes\n");
            for (k, (mu, nd)) in spec.eigenvalues.iter().zip(&nodes).enumerate() {
                out.push_str(&csv_row(&[k.to_string(), fmt_f64(*mu), nd.to_string()]));
            }
            out
        }
        Format::Json => to_json(&SpectrumReport {
            s: p.s,
            eigenvalues: spec.eigenvalues,
            nodes,
            truncated: spec.truncated,
        }),
    })
}

fn eigencurves_cmd(cfg: &RunConfig) -> satnls_core::Result<String> {
    let curves = eigen_curves(&cfg.params, &cfg.grid, &s_values(cfg), cfg.kmax)?;
    Ok(match cfg.format {
        Format::Csv => {
            let mut header = vec!["s".to_string()];
            header.extend((0..cfg.kmax).map(|k| format!("mu_{k}")));
            let mut out = csv_row(&header);
            for c in &curves {
                let mut row = vec![fmt_f64(c.s)];
                row.extend((0..cfg.kmax).map(|k| c.mu.get(k).map(|&m| fmt_f64(m)).unwrap_or_default()));
                out.push_str(&csv_row(&row));
            }
            out
        }
        Format::Json => to_json(&curves),
    })
}

#[derive(Serialize)]
struct CrossingRow {
    k: usize,
    s_k: f64,
    mu_at_root: f64,
    bracket: (f64, f64),
    kernel_nodes: usize,
}

#[derive(Serialize)]
struct CrossingReport {
    points: Vec<CrossingRow>,
    no_crossing: Vec<usize>,
    unresolved: Vec<f64>,
}

fn bifurcation_cmd(cfg: &RunConfig) -> satnls_core::Result<String> {
    let tol = cfg.tol.unwrap_or(1e-10);
    let search = find_bifurcation_points(&cfg.params, 0..=cfg.kmax - 1, &s_values(cfg), tol, &cfg.grid)?;
    let rows: Vec<CrossingRow> = search
        .points
        .iter()
        .map(|b| CrossingRow {
            k: b.k,
            s_k: b.s_k,
            mu_at_root: b.mu_at_root,
            bracket: b.bracket,
            kernel_nodes: count_nodes(&b.kernel_fn, DEFAULT_TAIL_THRESHOLD).nodes,
        })
        .collect();
    Ok(match cfg.format {
        Format::Csv => {
            let mut out = String::from("k,s_k,mu,bracket_lo,bracket_hi,kernel_nodes\n");
            for r in &rows {
                out.push_str(&csv_row(&[
                    r.k.to_string(),
                    fmt_f64(r.s_k),
                    fmt_f64(r.mu_at_root),
                    fmt_f64(r.bracket.0),
                    fmt_f64(r.bracket.1),
                    r.kernel_nodes.to_string(),
                ]));
            }
            out
        }
        Format::Json => to_json(&CrossingReport {
            points: rows,
            no_crossing: search.no_crossing,
            unresolved: search.unresolved,
        }),
    })
}

fn continuation_config(cfg: &RunConfig) -> ContinuationConfig {
    let mut cc = ContinuationConfig {
        max_steps: cfg.max_steps,
        ..ContinuationConfig::default()
    };
    if let Some(tol) = cfg.tol {
        cc.newton_tol = tol;
    }
    cc
}

/// The branch `C_k` from the first crossing of `μ_k = 1` on the sweep.
pub fn compute_branch(cfg: &RunConfig) -> Result<Branch, CliError> {
    let core = |e: Error| CliError::from_core(e, &cfg.params);
    let search = find_bifurcation_points(&cfg.params, cfg.k..=cfg.k, &s_values(cfg), 1e-10, &cfg.grid).map_err(core)?;
    let origin = search.first(cfg.k).ok_or_else(|| {
        CliError::Solver(format!(
            "mu_{} does not cross 1 on s in [{}, {}]",
            cfg.k, cfg.sweep.smin, cfg.sweep.smax
        ))
    })?;
    continue_branch(origin, &cfg.params, &continuation_config(cfg), cfg.direction).map_err(core)
}

fn verify_cmd(cfg: &RunConfig) -> Result<String, CliError> {
    let core = |e: Error| CliError::from_core(e, &cfg.params);
    let p = &cfg.params;
    let branches: Vec<Branch> = if p.is_symmetric() || p.lambda2 / p.lambda1 >= p.beta / p.alpha {
        Vec::new()
    } else {
        let search = find_bifurcation_points(p, 0..=cfg.kmax - 1, &s_values(cfg), 1e-10, &cfg.grid).map_err(core)?;
        let cc = continuation_config(&RunConfig {
            tol: None,
            ..cfg.clone()
        });
        let mut out = Vec::new();
        for k in 0..cfg.kmax {
            if let Some(origin) = search.first(k) {
                for dir in [1, -1] {
                    out.push(continue_branch(origin, p, &cc, dir).map_err(core)?);
                }
            }
        }
        out
    };
    let report = verify_semitrivial_groundstate(&branches, p, cfg.tol, &cfg.grid).map_err(core)?;
    Ok(match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("branch,step,s,energy,c_s_star,margin,tol,violation\n");
            for c in &report.candidates {
                out.push_str(&csv_row(&[
                    c.branch.to_string(),
                    c.step.to_string(),
                    fmt_f64(c.s),
                    fmt_f64(c.energy),
                    fmt_f64(c.c_s_star),
                    fmt_f64(c.margin),
                    fmt_f64(c.tol),
                    c.violation.to_string(),
                ]));
            }
            out
        }
    })
}

#[derive(Serialize)]
struct Corollary2Entry {
    k0: usize,
    holds: bool,
}

#[derive(Serialize)]
struct ConditionsReport {
    params: Params,
    lambda_ratio: f64,
    coupling_ratio: f64,
    bifurcation_from_t2: bool,
    corollary1: Option<bool>,
    corollary2: Vec<Corollary2Entry>,
    mu_bar: Vec<f64>,
    mu_limit: f64,
    positivity: satnls_core::PositivityVerdict,
}

fn check_conditions_cmd(cfg: &RunConfig) -> satnls_core::Result<String> {
    let p = &cfg.params;
    let lambda_ratio = p.lambda2 / p.lambda1;
    let coupling_ratio = p.beta / p.alpha;
    let corollary1 = if p.n == 1 { None } else { Some(check_corollary1(p)?) };
    let corollary2 = if p.n == 1 {
        (0..cfg.kmax)
            .map(|k0| {
                Ok(Corollary2Entry {
                    k0,
                    holds: check_corollary2(p, k0)?,
                })
            })
            .collect::<satnls_core::Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let mu_bar = (0..cfg.kmax)
        .map(|k| mu_bar(p, k))
        .collect::<satnls_core::Result<Vec<_>>>()?;
    let report = ConditionsReport {
        params: *p,
        lambda_ratio,
        coupling_ratio,
        bifurcation_from_t2: lambda_ratio < coupling_ratio,
        corollary1,
        corollary2,
        mu_bar,
        mu_limit: mu_limit_saturation(p),
        positivity: positivity_constraint(p),
    };
    Ok(match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut out = String::from("key,value\n");
            let mut kv = |k: &str, v: String| out.push_str(&csv_row(&[k, v.as_str()]));
            kv("lambda_ratio", fmt_f64(lambda_ratio));
            kv("coupling_ratio", fmt_f64(coupling_ratio));
            kv("bifurcation_from_t2", report.bifurcation_from_t2.to_string());
            if let Some(c1) = corollary1 {
                kv("corollary1", c1.to_string());
            }
            for c in &report.corollary2 {
                kv(&format!("corollary2_k0_{}", c.k0), c.holds.to_string());
            }
            for (k, m) in report.mu_bar.iter().enumerate() {
                kv(&format!("mu_bar_{k}"), fmt_f64(*m));
            }
            kv("mu_limit", fmt_f64(report.mu_limit));
            kv("positivity", format!("{:?}", report.positivity.kind));
            if let Some(b) = report.positivity.bound {
                kv("positivity_bound", fmt_f64(b));
            }
            out
        }
    })
}

#[derive(Serialize)]
struct BoxRow {
    eps: f64,
    mu_0: f64,
    distance: f64,
}

fn box_oracle_cmd(cfg: &RunConfig) -> satnls_core::Result<String> {
    let p = &cfg.params;
    let limit = cfg.kappa / p.lambda2;
    let rows = cfg
        .eps
        .iter()
        .map(|&eps| {
            let mu_0 = box_potential_eigen(cfg.kappa, p.lambda2, eps, 0, p.n, &cfg.grid)?;
            Ok(BoxRow {
                eps,
                mu_0,
                distance: (mu_0 - limit).abs(),
            })
        })
        .collect::<satnls_core::Result<Vec<_>>>()?;
    Ok(match cfg.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut out = String::from("eps,mu_0,distance\n");
            for r in &rows {
                out.push_str(&csv_row(&[fmt_f64(r.eps), fmt_f64(r.mu_0), fmt_f64(r.distance)]));
            }
            out
        }
    })
}
