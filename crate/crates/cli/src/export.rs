use std::fmt::Write as _;
use std::path::Path;

use satnls_core::Branch;

use crate::config::Format;
use crate::CliError;

pub const BRANCH_HEADER: &str = "step,s,energy,residual,nodes_u,nodes_v,min_u,min_v,norm_u,norm_v";

/// 17 significant digits, scientific notation. Round-trips every finite `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// One CSV line from already formatted fields.
pub fn csv_row<S: AsRef<str>>(fields: &[S]) -> String {
    let mut line = String::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(f.as_ref());
    }
    line.push('\n');
    line
}

pub fn branch_csv(branch: &Branch) -> String {
    let mut out = String::with_capacity(64 * (branch.points.len() + 1));
    out.push_str(BRANCH_HEADER);
    out.push('\n');
    for p in &branch.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            p.step,
            fmt_f64(p.s),
            fmt_f64(p.energy),
            fmt_f64(p.residual),
            p.nodal_type.0,
            p.nodal_type.1,
            fmt_f64(p.min_values.0),
            fmt_f64(p.min_values.1),
            fmt_f64(p.norms.0),
            fmt_f64(p.norms.1),
        );
    }
    out
}

pub fn branch_json(branch: &Branch) -> Result<String, CliError> {
    serde_json::to_string_pretty(branch)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Io(format!("cannot serialize branch: {e}")))
}

pub fn read_branch_json(text: &str) -> Result<Branch, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid branch JSON: {e}")))
}

/// Writes `branch` to `path` (stdout when `None`).
pub fn export_branch(branch: &Branch, path: Option<&Path>, format: Format) -> Result<(), CliError> {
    let text = match format {
        Format::Csv => branch_csv(branch),
        Format::Json => branch_json(branch)?,
    };
    write_output(&text, path)
}

pub fn write_output(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}
