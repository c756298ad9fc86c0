//! File formats: the text matrix format, CSV exports, and JSON reports.
//!
//! Matrix files are UTF-8 text. The first non-comment line is `dim <N>`,
//! followed by N lines of N whitespace-separated complex entries written
//! like `0.5-0.1i`, `1`, `-2i`. Lines starting with `#` are comments.

use crate::error::{Error, Result};
use crate::petermann::SweepResult;
use crate::spectral::EigenSystem;
use crate::C64;
use ndarray::Array2;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Parse one complex scalar in `a+bi` form.
pub fn parse_complex(token: &str) -> std::result::Result<C64, String> {
    let s = token.trim();
    if s.is_empty() {
        return Err("empty token".into());
    }
    if let Some(body) = s.strip_suffix(['i', 'I']) {
        // Split the body at the sign that separates real and imaginary
        // parts: the last '+'/'-' that is not leading and not part of an
        // exponent.
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let c = bytes[idx] as char;
            if (c == '+' || c == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(idx) => (&body[..idx], &body[idx..]),
            None => ("0", body),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("bad imaginary part in `{s}`"))?,
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str
                .parse::<f64>()
                .map_err(|_| format!("bad real part in `{s}`"))?
        };
        Ok(C64::new(re, im))
    } else {
        s.parse::<f64>()
            .map(|re| C64::new(re, 0.0))
            .map_err(|_| format!("bad real number `{s}`"))
    }
}

/// Format a complex scalar in the same `a+bi` form `parse_complex` accepts.
pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Read a matrix file; errors name the offending line (1-based).
pub fn read_matrix_file(path: &Path) -> Result<Array2<C64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Ingestion {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    let ingest = |line: usize, msg: String| Error::Ingestion {
        path: path.display().to_string(),
        line,
        msg,
    };

    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut dim: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if dim.is_none() {
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some("dim"), Some(n), None) => {
                    let n: usize = n
                        .parse()
                        .map_err(|_| ingest(lineno + 1, format!("bad dimension `{n}`")))?;
                    if n == 0 {
                        return Err(ingest(lineno + 1, "dimension must be positive".into()));
                    }
                    dim = Some(n);
                }
                _ => {
                    return Err(ingest(
                        lineno + 1,
                        format!("expected header `dim <N>`, got `{line}`"),
                    ))
                }
            }
            continue;
        }
        let n = dim.unwrap();
        let row: Vec<C64> = line
            .split_whitespace()
            .map(|tok| parse_complex(tok).map_err(|m| ingest(lineno + 1, m)))
            .collect::<Result<_>>()?;
        if row.len() != n {
            return Err(ingest(
                lineno + 1,
                format!("row has {} entries, expected {}", row.len(), n),
            ));
        }
        if row.iter().any(|z| !z.is_finite()) {
            return Err(ingest(lineno + 1, "non-finite entry".into()));
        }
        rows.push(row);
        if rows.len() > n {
            return Err(ingest(lineno + 1, format!("more than {n} rows")));
        }
    }
    let n = dim.ok_or_else(|| ingest(0, "missing `dim <N>` header".into()))?;
    if rows.len() != n {
        return Err(ingest(
            0,
            format!("found {} rows, expected {} (non-square input)", rows.len(), n),
        ));
    }
    let flat: Vec<C64> = rows.into_iter().flatten().collect();
    Ok(Array2::from_shape_vec((n, n), flat).expect("shape checked above"))
}

/// Write a matrix in the text format `read_matrix_file` accepts.
pub fn write_matrix_file(path: &Path, m: &Array2<C64>) -> Result<()> {
    let (rows, cols) = m.dim();
    let mut out = String::new();
    writeln!(out, "dim {rows}").unwrap();
    for i in 0..rows {
        let line: Vec<String> = (0..cols).map(|j| format_complex(m[[i, j]])).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

/// Spectrum CSV: `index,re_E,im_E`.
pub fn spectrum_csv(es: &EigenSystem) -> String {
    let mut out = String::from("index,re_E,im_E\n");
    for (i, e) in es.eigenvalues.iter().enumerate() {
        writeln!(out, "{},{},{}", i, e.re, e.im).unwrap();
    }
    out
}

/// Eigenvector CSV for one selected state: `site,re_psi,im_psi,abs2`.
pub fn eigenvector_csv(es: &EigenSystem, state: usize) -> Result<String> {
    if state >= es.dim {
        return Err(Error::InvalidInput(format!(
            "state index {state} out of range for dim {}",
            es.dim
        )));
    }
    let col = es.right.column(state);
    let mut out = String::from("site,re_psi,im_psi,abs2\n");
    for (site, z) in col.iter().enumerate() {
        writeln!(out, "{},{},{},{}", site, z.re, z.im, z.norm_sqr()).unwrap();
    }
    Ok(out)
}

/// Sweep CSV: `param,eta,deta,flag`.
pub fn sweep_csv(sw: &SweepResult) -> String {
    let mut out = String::from("param,eta,deta,flag\n");
    for (sample, deta) in sw.samples.iter().zip(&sw.deta) {
        let mut flags = Vec::new();
        if sample.flags.eta_jump {
            flags.push("eta_jump");
        }
        if sample.flags.deta_jump {
            flags.push("deta_jump");
        }
        writeln!(
            out,
            "{},{},{},{}",
            sample.param,
            sample.eta,
            deta,
            flags.join(";")
        )
        .unwrap();
    }
    out
}

/// Edge-state CSV: `site,abs2_state1,abs2_state2`.
pub fn edge_states_csv(state1: &[C64], state2: &[C64]) -> String {
    let mut out = String::from("site,abs2_state1,abs2_state2\n");
    for (site, (a, b)) in state1.iter().zip(state2).enumerate() {
        writeln!(out, "{},{},{}", site, a.norm_sqr(), b.norm_sqr()).unwrap();
    }
    out
}

/// Finite-size CSV: `L,t1_star`.
pub fn finite_size_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("L,t1_star\n");
    for (l, t1) in points {
        writeln!(out, "{},{}", l, t1).unwrap();
    }
    out
}
