//! Number formatting shared by the CSV and JSON emitters.

/// Scientific notation with 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a comma-separated list of step sizes; each entry may be a decimal or `p/q`.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| match t.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().map_err(|_| format!("bad number `{t}`"))?;
                let q: f64 = q.trim().parse().map_err(|_| format!("bad number `{t}`"))?;
                Ok(p / q)
            }
            None => t.parse().map_err(|_| format!("bad number `{t}`")),
        })
        .collect()
}
