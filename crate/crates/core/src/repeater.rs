//! Rate and error budget of a nested entanglement-swapping repeater.
//!
//! Times are in units of the mean elementary-link generation time.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeaterConfig {
    /// Total distance `L` in km.
    pub total_length: f64,
    /// Elementary link length `L0` in km.
    pub link_length: f64,
    /// Swap success probability `p`.
    pub swap_success: f64,
    /// Error of one elementary pair.
    pub eps0: f64,
    /// Error added by one swap gate.
    pub epsg: f64,
    pub f_final: f64,
}

impl RepeaterConfig {
    pub fn new(total_length: f64, link_length: f64, swap_success: f64) -> Self {
        RepeaterConfig {
            total_length,
            link_length,
            swap_success,
            eps0: 0.0,
            epsg: 0.0,
            f_final: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.link_length > 0.0 && self.link_length.is_finite()) {
            return Err(Error::invalid("L0 must be positive"));
        }
        if !(self.total_length >= self.link_length && self.total_length.is_finite()) {
            return Err(Error::invalid("L must be at least L0"));
        }
        if !(self.swap_success > 0.0 && self.swap_success <= 1.0) {
            return Err(Error::OutOfRange {
                what: "p",
                value: self.swap_success,
                range: "(0, 1]".into(),
            });
        }
        if !(self.eps0 >= 0.0 && self.epsg >= 0.0) {
            return Err(Error::invalid("errors must be non-negative"));
        }
        if !(self.f_final > 0.0 && self.f_final < 1.0) {
            return Err(Error::OutOfRange {
                what: "F_final",
                value: self.f_final,
                range: "(0, 1)".into(),
            });
        }
        Ok(())
    }

    pub fn links(&self) -> f64 {
        self.total_length / self.link_length
    }

    /// Nesting depth `log2(L / L0)`, if the link count is a power of two.
    pub fn nesting_levels(&self) -> Result<u32> {
        let n = self.links();
        let k = n.log2().round();
        if (2f64.powf(k) - n).abs() > 1e-9 * n {
            return Err(Error::invalid(format!(
                "link count {n} is not a power of two"
            )));
        }
        Ok(k as u32)
    }
}

/// Relative rate `(L/L0)^(1 - log2(3/p))`. Only a scaling law, not an
/// absolute rate.
pub fn rate_scaling(cfg: &RepeaterConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.links().powf(1.0 - (3.0 / cfg.swap_success).log2()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursiveTiming {
    /// Expected time until a pair spans `2^k` links, for `k = 0..=levels`.
    pub level_times: Vec<f64>,
}

impl RecursiveTiming {
    pub fn total(&self) -> f64 {
        *self.level_times.last().expect("level 0 always present")
    }

    pub fn rate(&self) -> f64 {
        1.0 / self.total()
    }
}

/// Grid points per mean waiting time of one attempt.
const POINTS_PER_MEAN: f64 = 256.0;
/// Tail mass neglected when truncating a distribution.
const TAIL: f64 = 1e-13;

/// CDF sampled on `t_i = i h`; taken as 1 past the last point.
struct Cdf {
    h: f64,
    values: Vec<f64>,
}

impl Cdf {
    fn at(&self, t: f64) -> f64 {
        let x = t / self.h;
        let i = x.floor() as usize;
        if i + 1 >= self.values.len() {
            return 1.0;
        }
        let w = x - i as f64;
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    fn end(&self) -> f64 {
        self.h * (self.values.len() - 1) as f64
    }
}

/// Mean of the larger of two independent draws from `cdf`.
fn max_of_two_mean(cdf: &Cdf) -> f64 {
    // E[max] = int (1 - F^2) dt
    let n = cdf.values.len();
    let mut s = 0.0;
    for i in 0..n - 1 {
        let a = 1.0 - cdf.values[i].powi(2);
        let b = 1.0 - cdf.values[i + 1].powi(2);
        s += 0.5 * (a + b) * cdf.h;
    }
    s
}

/// One nesting level for swap probability `p < 1`: attempts last `max(A, B)`
/// of two child waits, and a failed swap restarts both children.
fn next_level(child: &Cdf, p: f64, planner: &mut FftPlanner<f64>) -> (Cdf, f64) {
    let mean_max = max_of_two_mean(child);
    let h = mean_max / POINTS_PER_MEAN;
    // attempt-length distribution, masses rounded to the grid
    let attempt_end = child.end();
    let m_len = (attempt_end / h).ceil() as usize + 2;
    let mut attempt = vec![0.0; m_len];
    let mut prev = 0.0;
    for (i, slot) in attempt.iter_mut().enumerate() {
        let f = child.at((i as f64 + 0.5) * h).powi(2);
        *slot = f - prev;
        prev = f;
    }
    // geometric number of attempts: tail (1-p)^g below TAIL
    let attempts = if p >= 1.0 {
        1.0
    } else {
        TAIL.ln() / (1.0 - p).ln()
    };
    let span = (attempts + 4.0) * (m_len as f64) + 8.0 * attempts.sqrt() * m_len as f64;
    let len = (span as usize).next_power_of_two();
    let fft = planner.plan_fft_forward(len);
    let ifft = planner.plan_fft_inverse(len);
    let mut buf: Vec<C64> = (0..len)
        .map(|i| C64::new(attempt.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    fft.process(&mut buf);
    for z in buf.iter_mut() {
        *z = p * *z / (C64::new(1.0, 0.0) - (1.0 - p) * *z);
    }
    ifft.process(&mut buf);
    let scale = 1.0 / len as f64;
    let mut values = Vec::with_capacity(len);
    let mut acc = 0.0;
    let mut mean = 0.0;
    for (i, z) in buf.iter().enumerate() {
        let mass = (z.re * scale).max(0.0);
        acc += mass;
        mean += mass * i as f64 * h;
        values.push(acc.min(1.0));
        if 1.0 - acc < TAIL {
            break;
        }
    }
    // values[i] is the CDF at (i + 1/2) h; move it back onto the grid
    let cdf = Cdf {
        h,
        values: std::iter::once(0.0).chain(values).collect(),
    };
    (shifted(cdf), mean)
}

/// Re-centres a CDF stored with a leading zero so that `values[i]` is the
/// CDF at `i h` (masses sit at the centre of their rounding cells).
fn shifted(cdf: Cdf) -> Cdf {
    let v = &cdf.values;
    let mut out = Vec::with_capacity(v.len());
    for i in 0..v.len() {
        let next = v.get(i + 1).copied().unwrap_or(1.0);
        out.push(0.5 * (v[i] + next));
    }
    out[0] = 0.0;
    Cdf {
        h: cdf.h,
        values: out,
    }
}

fn elementary_cdf() -> Cdf {
    let h = 1.0 / POINTS_PER_MEAN;
    let n = ((-TAIL.ln()) / h).ceil() as usize + 2;
    Cdf {
        h,
        values: (0..n).map(|i| 1.0 - (-(i as f64) * h).exp()).collect(),
    }
}

fn harmonic(n: u64) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Expected time per distributed pair when elementary links have
/// exponentially distributed waits, each level waits for both halves and a
/// failed swap regenerates both halves from scratch.
pub fn rate_exact_recursive(cfg: &RepeaterConfig) -> Result<RecursiveTiming> {
    cfg.validate()?;
    let levels = cfg.nesting_levels()?;
    let p = cfg.swap_success;
    if p == 1.0 {
        // the wait is the maximum of 2^k exponentials
        return Ok(RecursiveTiming {
            level_times: (0..=levels).map(|k| harmonic(1u64 << k)).collect(),
        });
    }
    let mut planner = FftPlanner::new();
    let mut cdf = elementary_cdf();
    let mut level_times = vec![1.0];
    for _ in 0..levels {
        let (next, mean) = next_level(&cdf, p, &mut planner);
        level_times.push(mean);
        cdf = next;
    }
    Ok(RecursiveTiming { level_times })
}

/// Largest number of links `-ln(F_final) / (eps0 + epsg)`; infinite when
/// both errors vanish.
pub fn max_links(f_final: f64, eps0: f64, epsg: f64) -> Result<f64> {
    if !(f_final > 0.0 && f_final <= 1.0) {
        return Err(Error::OutOfRange {
            what: "F_final",
            value: f_final,
            range: "(0, 1]".into(),
        });
    }
    if !(eps0 >= 0.0 && epsg >= 0.0) {
        return Err(Error::invalid("errors must be non-negative"));
    }
    let eps = eps0 + epsg;
    if eps == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-f_final.ln() / eps)
}

/// Reported rate scaling `1 / log2(L/L0)` for memories that allow
/// deterministic swaps. No recursive model backs this formula.
pub fn nuclear_spin_rate_scaling(cfg: &RepeaterConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.links() <= 1.0 {
        return Err(Error::invalid("needs more than one link"));
    }
    Ok(1.0 / cfg.links().log2())
}
