//! Deterministic CSV rendering and atomic file output.

use std::io::{self, Write};
use std::path::Path;

use smqsl::dynamics::AdDiagnostic;
use smqsl::qsl::GridReport;

pub const SCHEMA_LINE: &str = "# schema=1";
pub const GRID_COLUMNS: &str = "q,tau,delta_S,Gamma,tau_qsl,varsigma,varsigma_norm,trivial_flag";
pub const DIAGNOSTIC_COLUMNS: &str = "t,sx,sz,fidelity,lambda_min";

const SIGNIFICANT: usize = 12;

/// `%.12g`-style rendering: shortest of fixed and scientific notation with
/// trailing zeros removed. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= SIGNIFICANT as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (SIGNIFICANT as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn write_row(out: &mut impl Write, values: &[f64]) -> io::Result<()> {
    let row: Vec<String> = values.iter().map(|&v| format_number(v)).collect();
    writeln!(out, "{}", row.join(","))
}

pub fn write_grid(out: &mut impl Write, grid: &GridReport) -> io::Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "{GRID_COLUMNS}")?;
    for (i, &q) in grid.qs.iter().enumerate() {
        for j in 0..grid.taus.len() {
            let c = grid.cell(i, j);
            let flag = if c.trivial { 1.0 } else { 0.0 };
            write_row(
                out,
                &[
                    q,
                    grid.taus[j],
                    c.delta_s,
                    c.gamma,
                    c.tau_qsl,
                    c.varsigma,
                    grid.varsigma_norm_at(i, j),
                    flag,
                ],
            )?;
        }
    }
    Ok(())
}

pub fn write_diagnostics(out: &mut impl Write, rows: &[AdDiagnostic]) -> io::Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    writeln!(out, "{DIAGNOSTIC_COLUMNS}")?;
    for d in rows {
        write_row(out, &[d.t, d.sx, d.sz, d.fidelity, d.lambda_min])?;
    }
    Ok(())
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
