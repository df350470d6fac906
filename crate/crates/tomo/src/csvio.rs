//! CSV serialization for the measurement-matrix and curve artifacts.
//!
//! Numbers are written with 17 significant digits and LF line endings, so a
//! run is byte-stable across platforms and reruns and every `f64` survives a
//! write/read round trip exactly.

use disktomo::model::MeasurementMatrix;
use num_complex::Complex64;

/// One float, 17 significant digits, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a matrix as `m,n,re,im` rows, `m`-major.
pub fn matrix_to_csv(data: &MeasurementMatrix) -> String {
    let n_max = data.n_max();
    let mut s = String::from("m,n,re,im\n");
    for m in -n_max..=n_max {
        for n in -n_max..=n_max {
            let v = data.get(m, n);
            s.push_str(&format!("{m},{n},{},{}\n", fmt_f64(v.re), fmt_f64(v.im)));
        }
    }
    s
}

/// Parses a matrix written by [`matrix_to_csv`]. The rows must form exactly
/// one full square grid; a file with no data rows is rejected.
pub fn matrix_from_csv(text: &str) -> Result<MeasurementMatrix, String> {
    let mut lines = text.lines();
    match lines.next().map(str::trim_end) {
        Some("m,n,re,im") => {}
        other => return Err(format!("expected header `m,n,re,im`, got {other:?}")),
    }
    let mut entries: Vec<(i32, i32, Complex64)> = Vec::new();
    let mut n_max = 0i32;
    for (idx, raw) in lines.enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(format!("data row {}: expected 4 fields, got {}", idx + 1, fields.len()));
        }
        let m: i32 = fields[0].parse().map_err(|_| format!("data row {}: bad m index", idx + 1))?;
        let n: i32 = fields[1].parse().map_err(|_| format!("data row {}: bad n index", idx + 1))?;
        let re: f64 = fields[2].parse().map_err(|_| format!("data row {}: bad re value", idx + 1))?;
        let im: f64 = fields[3].parse().map_err(|_| format!("data row {}: bad im value", idx + 1))?;
        n_max = n_max.max(m.abs()).max(n.abs());
        entries.push((m, n, Complex64::new(re, im)));
    }
    if entries.is_empty() {
        return Err("data file has no rows".to_string());
    }
    let side = (2 * n_max + 1) as usize;
    if entries.len() != side * side {
        return Err(format!(
            "data grid incomplete: {} rows for a ({side} x {side}) range",
            entries.len()
        ));
    }
    let mut seen = vec![false; side * side];
    let mut out = MeasurementMatrix::zeros(n_max);
    for (m, n, v) in entries {
        let slot = ((m + n_max) as usize) * side + (n + n_max) as usize;
        if seen[slot] {
            return Err(format!("duplicate data row for ({m}, {n})"));
        }
        seen[slot] = true;
        out.set(m, n, v);
    }
    Ok(out)
}
