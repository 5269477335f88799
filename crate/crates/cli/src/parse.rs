//! Parsers for the numeric range and list flags.

use std::str::FromStr;

use crate::CliError;

/// Rounds away binary noise so grid points print as `0.3`, not
/// `0.30000000000000004`.
pub fn tidy(x: f64) -> f64 {
    (x * 1e10).round() / 1e10
}

/// `a:b:step`, inclusive of `b` when it lies on the grid.
pub fn parse_q_range(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts[..] else {
        return Err(CliError::Usage(format!("expected start:stop:step, got '{s}'")));
    };
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| CliError::Usage(format!("bad number '{v}' in '{s}': {e}")))
    };
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
        return Err(CliError::Usage(format!("range '{s}' needs start <= stop and step > 0")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| tidy(a + i as f64 * step)).collect())
}

/// `a:b` or `a:b:step` over integers, inclusive.
pub fn parse_n_range(s: &str) -> Result<Vec<usize>, CliError> {
    let parts = parse_list::<usize>(&s.replace(':', ","))
        .map_err(|_| CliError::Usage(format!("expected start:stop[:step], got '{s}'")))?;
    let (a, b, step) = match parts[..] {
        [a, b] => (a, b, 1),
        [a, b, step] => (a, b, step),
        _ => return Err(CliError::Usage(format!("expected start:stop[:step], got '{s}'"))),
    };
    if step == 0 || b < a {
        return Err(CliError::Usage(format!("range '{s}' needs start <= stop and step > 0")));
    }
    Ok((a..=b).step_by(step).collect())
}

/// Comma-separated values.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<T>()
                .map_err(|e| CliError::Usage(format!("bad list entry '{v}': {e}")))
        })
        .collect::<Result<Vec<T>, _>>()?;
    if out.is_empty() {
        return Err(CliError::Usage(format!("empty list '{s}'")));
    }
    Ok(out)
}

/// Grid from `--q` (list) or `--q-range`, defaulting to `default`.
pub fn q_grid(q: Option<&str>, q_range: Option<&str>, default: &str) -> Result<Vec<f64>, CliError> {
    let grid = match (q, q_range) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either --q or --q-range, not both".into())),
        (Some(list), None) => parse_list::<f64>(list)?,
        (None, Some(r)) => parse_q_range(r)?,
        (None, None) => parse_q_range(default)?,
    };
    if let Some(bad) = grid.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(CliError::Usage(format!("q = {bad} outside [0, 1]")));
    }
    Ok(grid)
}

/// Node counts from `--nodes` (list) or `--n-range`.
pub fn n_grid(nodes: Option<&str>, n_range: Option<&str>, default: &str) -> Result<Vec<usize>, CliError> {
    match (nodes, n_range) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either --nodes or --n-range, not both".into())),
        (Some(list), None) => parse_list(list),
        (None, Some(r)) => parse_n_range(r),
        (None, None) => parse_list(default),
    }
}
