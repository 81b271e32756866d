//! Reading gate time, fidelity and success probability off a full simulation.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;

use super::fidelity::{conditional_state, max_fidelity_over_phases};
use super::PulseSimulation;

const COARSE_POINTS: usize = 40;
const DENSE_POINTS: usize = 400;
const WINDOW: (f64, f64) = (0.8, 1.2);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSample {
    pub t: f64,
    pub fidelity: f64,
    pub success_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtractedGate {
    pub t_gate: f64,
    pub fidelity: f64,
    pub success_probability: f64,
    /// Optimal local phases `phi_k` at the gate time.
    pub phases: Vec<f64>,
    pub samples: Vec<TimeSample>,
}

/// Sample times used to locate the fidelity maximum around `t_pred`.
pub fn sample_times(t_pred: f64) -> Vec<f64> {
    let coarse_end = WINDOW.0 * t_pred;
    let mut t: Vec<f64> = (1..=COARSE_POINTS)
        .map(|k| coarse_end * k as f64 / (COARSE_POINTS + 1) as f64)
        .collect();
    let span = (WINDOW.1 - WINDOW.0) * t_pred;
    t.extend((0..DENSE_POINTS).map(|k| coarse_end + span * k as f64 / (DENSE_POINTS - 1) as f64));
    t
}

fn evaluate(sim: &PulseSimulation, rho: &[C64], signs: &[C64]) -> Result<(f64, f64, Vec<f64>)> {
    let cond = conditional_state(&sim.reduced, rho)?;
    let opt = max_fidelity_over_phases(&cond.rho, signs)?;
    Ok((opt.fidelity, cond.success_probability, opt.phases))
}

/// Vertex of the parabola through three equally spaced points, as an offset
/// in units of the spacing (clamped to the bracket).
fn parabola_vertex(f_m: f64, f_0: f64, f_p: f64) -> f64 {
    let denom = f_m - 2.0 * f_0 + f_p;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (f_m - f_p) / denom).clamp(-1.0, 1.0)
}

/// Scans a flat pulse around `t_pred` for the fidelity maximum, refines it
/// with a parabola and re-integrates to the refined time.
pub fn extract_flat(sim: &PulseSimulation, t_pred: f64, signs: &[C64]) -> Result<ExtractedGate> {
    if !(t_pred > 0.0 && t_pred.is_finite()) {
        return Err(Error::invalid(format!(
            "predicted gate time must be > 0, got {t_pred}"
        )));
    }
    let times = sample_times(t_pred);
    let rho0 = sim.initial_plus_state()?;
    let mut states: Vec<Vec<C64>> = Vec::with_capacity(times.len());
    let mut samples = Vec::with_capacity(times.len());
    sim.evolve(0.0, &rho0, &times, |_, t, rho| {
        let (f, p, _) = evaluate(sim, rho, signs)?;
        samples.push(TimeSample {
            t,
            fidelity: f,
            success_probability: p,
        });
        states.push(rho.to_vec());
        Ok(())
    })?;

    let first_dense = COARSE_POINTS;
    let best = (0..samples.len())
        .max_by(|&a, &b| samples[a].fidelity.total_cmp(&samples[b].fidelity))
        .expect("non-empty sample set");
    if best <= first_dense || best + 1 >= samples.len() {
        return Err(Error::InconclusiveWindow(samples[best].t));
    }
    let h = times[best + 1] - times[best];
    let offset = parabola_vertex(
        samples[best - 1].fidelity,
        samples[best].fidelity,
        samples[best + 1].fidelity,
    );
    let t_star = times[best] + offset * h;
    let (t0, rho_start) = if offset >= 0.0 {
        (times[best], &states[best])
    } else {
        (times[best - 1], &states[best - 1])
    };
    let rho = sim.state_at(t0, rho_start, t_star)?;
    let (f, p, phases) = evaluate(sim, &rho, signs)?;
    Ok(ExtractedGate {
        t_gate: t_star,
        fidelity: f,
        success_probability: p,
        phases,
        samples,
    })
}

/// [`extract_flat`] that re-centres the window on the edge maximum and
/// retries, at most `retries` times.
pub fn extract_flat_adaptive(
    sim: &PulseSimulation,
    t_pred: f64,
    signs: &[C64],
    retries: usize,
) -> Result<ExtractedGate> {
    let mut t_pred = t_pred;
    let mut left = retries;
    loop {
        match extract_flat(sim, t_pred, signs) {
            Err(Error::InconclusiveWindow(t_edge)) if left > 0 && t_edge > 0.0 => {
                left -= 1;
                t_pred = t_edge;
            }
            other => return other,
        }
    }
}

/// Evaluates a ramped pulse at its end time `sim.t_total`.
pub fn extract_at_end(sim: &PulseSimulation, signs: &[C64]) -> Result<ExtractedGate> {
    let rho0 = sim.initial_plus_state()?;
    let rho = sim.state_at(0.0, &rho0, sim.t_total)?;
    let (f, p, phases) = evaluate(sim, &rho, signs)?;
    Ok(ExtractedGate {
        t_gate: sim.t_total,
        fidelity: f,
        success_probability: p,
        phases,
        samples: vec![TimeSample {
            t: sim.t_total,
            fidelity: f,
            success_probability: p,
        }],
    })
}

/// Ramped pulse whose length maximizes the end-of-pulse fidelity, searched
/// by golden section within `[0.95, 1.05]` of the length whose squared
/// envelope integrates to `t_flat_pred`.
pub fn extract_ramped(
    params: &SystemParams,
    t_flat_pred: f64,
    signs: &[C64],
) -> Result<ExtractedGate> {
    if params.drive.is_flat() {
        return Err(Error::invalid("extract_ramped needs a ramped drive"));
    }
    if !(t_flat_pred > 0.0 && t_flat_pred.is_finite()) {
        return Err(Error::invalid(format!(
            "predicted gate time must be > 0, got {t_flat_pred}"
        )));
    }
    let t0 = params.drive.total_for_flat_equivalent(t_flat_pred);
    let run = |t: f64| -> Result<ExtractedGate> {
        extract_at_end(&PulseSimulation::new(params, t)?, signs)
    };
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = ((0.95 * t0).max(2.0 * params.drive.t_ramp), 1.05 * t0);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = run(x1)?.fidelity;
    let mut f2 = run(x2)?.fidelity;
    while b - a > 1e-4 * t0 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = run(x1)?.fidelity;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = run(x2)?.fidelity;
        }
    }
    run(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_layout() {
        let t = sample_times(10.0);
        assert_eq!(t.len(), COARSE_POINTS + DENSE_POINTS);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!(t[0] > 0.0 && t[COARSE_POINTS - 1] < 8.0);
        assert_eq!(t[COARSE_POINTS], 8.0);
        assert!((t.last().unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn ramped_pulse_reaches_a_gate() {
        let p = crate::gates::with_cz_detunings(
            &SystemParams::new(crate::params::Scheme::DirectDrive, 2, 100.0, 100.0)
                .with_drive_strength(0.25),
        )
        .unwrap()
        .with_drive(crate::params::DriveSchedule::sin_squared(5.0));
        let t = crate::gates::cz_effective(&p).unwrap().t_gate;
        let g = extract_ramped(&p, t, &super::super::fidelity::cz_signs()).unwrap();
        assert!(1.0 - g.fidelity < 1e-4, "{}", 1.0 - g.fidelity);
        assert!(g.t_gate > t);
    }

    #[test]
    fn vertex_of_exact_parabola() {
        let f = |x: f64| 1.0 - (x - 0.3).powi(2);
        let v = parabola_vertex(f(-1.0), f(0.0), f(1.0));
        assert!((v - 0.3).abs() < 1e-12);
        assert_eq!(parabola_vertex(0.0, 0.0, 0.0), 0.0);
    }
}
