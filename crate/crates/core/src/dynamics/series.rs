//! Sampled fidelity and success probability along one pulse, and the
//! photon-cutoff convergence check.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::GateReport;
use crate::params::SystemParams;

use super::extract::TimeSample;
use super::fidelity::{conditional_state, cz_signs, max_fidelity_over_phases};
use super::PulseSimulation;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<TimeSample>,
    /// Optimal local phases at each sample.
    pub phases: Vec<Vec<f64>>,
}

/// Integrates the `|g,0,+..+>` input over `times` and records the
/// conditional fidelity with the target `signs` and the success probability.
pub fn integrate_master_equation(
    params: &SystemParams,
    t_total: f64,
    times: &[f64],
    signs: &[C64],
) -> Result<TimeSeries> {
    let sim = PulseSimulation::new(params, t_total)?;
    let rho0 = sim.initial_plus_state()?;
    let mut series = TimeSeries {
        samples: Vec::with_capacity(times.len()),
        phases: Vec::with_capacity(times.len()),
    };
    sim.evolve(0.0, &rho0, times, |_, t, rho| {
        let cond = conditional_state(&sim.reduced, rho)?;
        let opt = max_fidelity_over_phases(&cond.rho, signs)?;
        series.samples.push(TimeSample {
            t,
            fidelity: opt.fidelity,
            success_probability: cond.success_probability,
        });
        series.phases.push(opt.phases);
        Ok(())
    })?;
    Ok(series)
}

/// Gate read off a sampled series: the fidelity maximum refined by the
/// parabola through its two neighbours. No re-integration happens here.
pub fn extract_gate_report(series: &TimeSeries) -> Result<GateReport> {
    let s = &series.samples;
    if s.len() < 3 {
        return Err(Error::invalid("need at least three samples"));
    }
    let best = (0..s.len())
        .max_by(|&a, &b| s[a].fidelity.total_cmp(&s[b].fidelity))
        .expect("non-empty series");
    if best == 0 || best + 1 == s.len() {
        return Err(Error::InconclusiveWindow(s[best].t));
    }
    let (a, b, c) = (&s[best - 1], &s[best], &s[best + 1]);
    // Lagrange parabola through three (possibly unequally spaced) points
    let (x0, x1, x2) = (a.t, b.t, c.t);
    let (y0, y1, y2) = (a.fidelity, b.fidelity, c.fidelity);
    let d0 = (x0 - x1) * (x0 - x2);
    let d1 = (x1 - x0) * (x1 - x2);
    let d2 = (x2 - x0) * (x2 - x1);
    let qa = y0 / d0 + y1 / d1 + y2 / d2;
    let qb = -(y0 * (x1 + x2) / d0 + y1 * (x0 + x2) / d1 + y2 * (x0 + x1) / d2);
    let qc = y0 * x1 * x2 / d0 + y1 * x0 * x2 / d1 + y2 * x0 * x1 / d2;
    let (t, f) = if qa < 0.0 {
        let t = (-qb / (2.0 * qa)).clamp(x0, x2);
        (t, qa * t * t + qb * t + qc)
    } else {
        (x1, y1)
    };
    let (lo, hi) = if t < x1 { (a, b) } else { (b, c) };
    let w = if hi.t > lo.t {
        (t - lo.t) / (hi.t - lo.t)
    } else {
        0.0
    };
    let p = lo.success_probability + w * (hi.success_probability - lo.success_probability);
    Ok(GateReport {
        t_gate: t,
        success_probability: p,
        fidelity: f,
        phases: series.phases[best].clone(),
        predicted_t_gate: None,
        predicted_failure: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    SuccessProbability,
    /// Conditional CZ fidelity (two qubits only).
    CzFidelity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub cutoff: usize,
    pub observable: Observable,
    /// Largest deviation between the runs at `cutoff` and `cutoff + 1`.
    pub deviation: f64,
}

/// Repeats a short integration (`samples` points up to `t_end`) at
/// `photon_cutoff` and `photon_cutoff + 1` and compares `observable`.
pub fn cutoff_convergence(
    params: &SystemParams,
    observable: Observable,
    t_end: f64,
    samples: usize,
) -> Result<CutoffReport> {
    if params.photon_cutoff < 1 {
        return Err(Error::invalid("photon cutoff must be at least 1"));
    }
    if observable == Observable::CzFidelity && params.n_qubits != 2 {
        return Err(Error::invalid("CZ fidelity needs two qubits"));
    }
    if !(t_end > 0.0) || samples == 0 {
        return Err(Error::invalid("need t_end > 0 and at least one sample"));
    }
    let times: Vec<f64> = (1..=samples)
        .map(|k| t_end * k as f64 / samples as f64)
        .collect();
    let signs = if params.n_qubits == 2 {
        cz_signs()
    } else {
        vec![C64::new(1.0, 0.0); 1 << params.n_qubits]
    };
    let pick = |s: &TimeSample| match observable {
        Observable::SuccessProbability => s.success_probability,
        Observable::CzFidelity => s.fidelity,
    };
    let base = integrate_master_equation(params, t_end, &times, &signs)?;
    let finer = params.clone().with_photon_cutoff(params.photon_cutoff + 1);
    let next = integrate_master_equation(&finer, t_end, &times, &signs)?;
    let deviation = base
        .samples
        .iter()
        .zip(&next.samples)
        .map(|(a, b)| (pick(a) - pick(b)).abs())
        .fold(0.0, f64::max);
    Ok(CutoffReport {
        cutoff: params.photon_cutoff,
        observable,
        deviation,
    })
}
