//! Value parsers for list and range flags.

use serde::{Deserialize, Serialize};

/// Comma-separated list of numbers. Items of the form `lo..hi` or
/// `lo..hi:step` expand to an inclusive grid (default step `0.05`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FloatList(pub Vec<f64>);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<usize>);

const DEFAULT_STEP: f64 = 0.05;

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

fn expand_range(item: &str) -> Result<Vec<f64>, String> {
    let (range, step) = match item.split_once(':') {
        Some((r, s)) => (r, parse_number(s)?),
        None => (item, DEFAULT_STEP),
    };
    let (lo, hi) = range
        .split_once("..")
        .ok_or_else(|| format!("bad range '{item}'"))?;
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    if !(step > 0.0) || hi < lo {
        return Err(format!("range '{item}' needs lo <= hi and a positive step"));
    }
    // index-based so the grid does not accumulate rounding
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| lo + k as f64 * step).collect())
}

pub fn parse_float_list(s: &str) -> Result<FloatList, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        if item.contains("..") {
            out.extend(expand_range(item)?);
        } else {
            out.push(parse_number(item)?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(FloatList(out))
}

pub fn parse_int_list(s: &str) -> Result<IntList, String> {
    let out = s
        .split(',')
        .map(str::trim)
        .filter(|i| !i.is_empty())
        .map(|i| {
            i.parse::<usize>()
                .map_err(|_| format!("'{i}' is not a non-negative integer"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(IntList(out))
}
