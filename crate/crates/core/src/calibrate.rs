//! Numerical detuning calibration and adiabaticity diagnostics.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use serde::{Deserialize, Serialize};

use crate::dynamics::liouvillian::sector_decay_rate_n;
use crate::effective::sector_closed_form;
use crate::error::{Error, Result};
use crate::gates::{cz_analytic_detunings, cz_effective, toffoli_aux_detuning};
use crate::params::{Scheme, SystemParams};

/// Where the sector decay rates come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateSource {
    EffectiveClosedForm,
    SectorLiouvillian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ObjectiveMode {
    EqualRates { source: RateSource },
    Tradeoff { lambda: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    #[serde(rename = "delta_E")]
    pub delta_aux: f64,
    #[serde(rename = "delta_e")]
    pub delta_qubit: f64,
    /// Largest relative deviation of a sector rate from `Gamma_1`.
    pub residual: f64,
    /// Residual at the starting point.
    pub seed_residual: f64,
    pub iterations: usize,
    pub mode: ObjectiveMode,
    /// Final objective (the residual for rate equalization).
    pub objective: f64,
}

impl CalibrationResult {
    /// `params` with the calibrated detunings.
    pub fn apply(&self, params: &SystemParams) -> SystemParams {
        params
            .clone()
            .with_detunings(self.delta_aux, self.delta_qubit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    /// Residual tolerance; `None` picks 1e-9 (closed form) or 1e-6 (Liouvillian).
    pub tolerance: Option<f64>,
    pub max_iterations: usize,
    /// Relative finite-difference step of the Jacobian.
    pub fd_step: f64,
    /// Drive strength `a = Omega / (gamma sqrt(C))` used for Liouvillian
    /// rates; `None` keeps the drive of the given parameters.
    pub liouvillian_drive_strength: Option<f64>,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            tolerance: None,
            max_iterations: 200,
            fd_step: 1e-6,
            liouvillian_drive_strength: Some(0.05),
        }
    }
}

impl CalibrationOptions {
    pub fn tolerance_for(&self, source: RateSource) -> f64 {
        self.tolerance.unwrap_or(match source {
            RateSource::EffectiveClosedForm => 1e-9,
            RateSource::SectorLiouvillian => 1e-6,
        })
    }
}

struct RateProblem {
    params: SystemParams,
    source: RateSource,
    /// Toffoli variant: only `Gamma_0 = Gamma_1`, with `delta_e` held fixed.
    single: bool,
}

impl RateProblem {
    fn rates(&self, x: &[f64]) -> Result<Vec<f64>> {
        let dq = if self.single {
            self.params.delta_qubit
        } else {
            x[1]
        };
        let p = self.params.clone().with_detunings(x[0], dq);
        let sectors = if self.single { 2 } else { 3 };
        (0..sectors)
            .map(|n| match self.source {
                RateSource::EffectiveClosedForm => {
                    Ok(sector_closed_form(&p, n)?.gamma_detectable())
                }
                RateSource::SectorLiouvillian => sector_decay_rate_n(&p, n),
            })
            .collect()
    }

    /// `Gamma_n / Gamma_1 - 1` for every `n != 1`.
    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let g = self.rates(x)?;
        if !(g[1] > 0.0) {
            return Err(Error::SingularParameters(
                "sector rate Gamma_1 vanishes".into(),
            ));
        }
        Ok(g.iter()
            .enumerate()
            .filter(|(n, _)| *n != 1)
            .map(|(_, v)| v / g[1] - 1.0)
            .collect())
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn solve_square(j: &[Vec<f64>], r: &[f64]) -> Result<Vec<f64>> {
    match r.len() {
        1 => {
            if j[0][0].abs() < 1e-300 || !j[0][0].is_finite() {
                return Err(Error::SingularJacobian);
            }
            Ok(vec![r[0] / j[0][0]])
        }
        2 => {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let scale = j.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            if !det.is_finite() || det.abs() <= 1e-14 * scale * scale {
                return Err(Error::SingularJacobian);
            }
            Ok(vec![
                (j[1][1] * r[0] - j[0][1] * r[1]) / det,
                (j[0][0] * r[1] - j[1][0] * r[0]) / det,
            ])
        }
        _ => unreachable!("at most two calibration equations"),
    }
}

/// Damped Newton iteration on the rate residuals. Returns the best point seen.
fn newton(
    problem: &RateProblem,
    seed: Vec<f64>,
    tol: f64,
    opts: &CalibrationOptions,
) -> Result<(Vec<f64>, f64, f64, usize)> {
    let mut x = seed;
    let mut r = problem.residuals(&x)?;
    let seed_res = max_abs(&r);
    let mut res = seed_res;
    let mut it = 0;
    while res >= tol {
        if it == opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: res,
            });
        }
        it += 1;
        let mut jac = vec![vec![0.0; x.len()]; r.len()];
        for k in 0..x.len() {
            let h = opts.fd_step * x[k].abs().max(1e-3);
            let mut xp = x.clone();
            xp[k] += h;
            let rp = problem.residuals(&xp)?;
            for (row, (a, b)) in jac.iter_mut().zip(rp.iter().zip(&r)) {
                row[k] = (a - b) / h;
            }
        }
        let step = solve_square(&jac, &r)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a - lambda * s).collect();
            if let Ok(rt) = problem.residuals(&trial) {
                let rt_res = max_abs(&rt);
                if rt_res < res {
                    x = trial;
                    r = rt;
                    res = rt_res;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: res,
            });
        }
    }
    Ok((x, res, seed_res, it))
}

/// Detunings equalizing the heralded sector rates, seeded from the analytic
/// values. Two qubits solve `Gamma_0 = Gamma_1 = Gamma_2` in
/// `(delta_E, delta_e)`; more qubits solve `Gamma_0 = Gamma_1` in `delta_E`
/// with `delta_e = 0`.
pub fn equalize_rates(params: &SystemParams, source: RateSource) -> Result<CalibrationResult> {
    equalize_rates_with(params, source, &CalibrationOptions::default())
}

pub fn equalize_rates_with(
    params: &SystemParams,
    source: RateSource,
    opts: &CalibrationOptions,
) -> Result<CalibrationResult> {
    params.validate()?;
    if params.n_qubits < 2 {
        return Err(Error::invalid("calibration needs at least two qubits"));
    }
    let single = params.n_qubits > 2;
    let mut work = params.clone();
    if let (RateSource::SectorLiouvillian, Some(a)) = (source, opts.liouvillian_drive_strength) {
        work = work.with_drive_strength(a);
    }
    let seed = if single {
        work.delta_qubit = 0.0;
        vec![toffoli_aux_detuning(&work)?]
    } else {
        let (de, dq) =
            cz_analytic_detunings(work.cooperativity(), work.alpha(), work.beta(), work.gamma)?;
        vec![de, dq]
    };
    let problem = RateProblem {
        params: work.clone(),
        source,
        single,
    };
    let tol = opts.tolerance_for(source);
    let (x, residual, seed_residual, iterations) = newton(&problem, seed, tol, opts)?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonConvergence {
            iterations,
            residual,
        });
    }
    Ok(CalibrationResult {
        delta_aux: x[0],
        delta_qubit: if single { work.delta_qubit } else { x[1] },
        residual,
        seed_residual,
        iterations,
        mode: ObjectiveMode::EqualRates { source },
        objective: residual,
    })
}

/// Relative spread of the closed-form sector rates around `Gamma_1`.
fn closed_form_spread(params: &SystemParams) -> Result<f64> {
    let problem = RateProblem {
        params: params.clone(),
        source: RateSource::EffectiveClosedForm,
        single: false,
    };
    Ok(max_abs(
        &problem.residuals(&[params.delta_aux, params.delta_qubit])?,
    ))
}

struct Tradeoff {
    params: SystemParams,
    lambda: f64,
}

impl Tradeoff {
    fn terms(&self, x: &[f64]) -> Result<(f64, f64)> {
        let p = self.params.clone().with_detunings(x[0].exp(), x[1].exp());
        let r = cz_effective(&p)?;
        Ok((1.0 - r.fidelity, 1.0 - r.success_probability))
    }
}

impl CostFunction for Tradeoff {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(match self.terms(x) {
            Ok((err, fail)) if err.is_finite() && fail.is_finite() => {
                self.lambda * err + (1.0 - self.lambda) * fail
            }
            _ => f64::INFINITY,
        })
    }
}

/// Outcome of a trade-off search with the effective CZ figures at the optimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub calibration: CalibrationResult,
    /// Conditional error `1 - F` of the effective-model CZ.
    pub error: f64,
    pub failure: f64,
}

/// Minimizes `lambda (1 - F) + (1 - lambda) (1 - P)` of the effective CZ
/// over positive `(delta_E, delta_e)` by multi-start Nelder-Mead.
pub fn tradeoff_search(params: &SystemParams, lambda: f64) -> Result<TradeoffPoint> {
    params.validate()?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange {
            what: "lambda",
            value: lambda,
            range: "[0, 1]".into(),
        });
    }
    if params.n_qubits != 2 {
        return Err(Error::invalid(
            "trade-off search is defined for the CZ gate",
        ));
    }
    let (de, dq) = cz_analytic_detunings(
        params.cooperativity(),
        params.alpha(),
        params.beta(),
        params.gamma,
    )?;
    let problem = Tradeoff {
        params: params.clone(),
        lambda,
    };
    let seed_obj = problem
        .cost(&vec![de.ln(), dq.ln()])
        .unwrap_or(f64::INFINITY);
    let mut best: Option<(Vec<f64>, f64, usize)> = None;
    let mut total_iters = 0;
    for (fe, fq) in [
        (1.0, 1.0),
        (0.5, 1.0),
        (2.0, 1.0),
        (1.0, 0.5),
        (1.0, 2.0),
        (0.5, 0.25),
        (2.0, 4.0),
    ] {
        let x0 = vec![(de * fe).ln(), (dq * fq).ln()];
        let simplex = vec![
            x0.clone(),
            vec![x0[0] + 0.2, x0[1]],
            vec![x0[0], x0[1] + 0.2],
        ];
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-12)
            .map_err(|e| Error::SingularParameters(e.to_string()))?;
        let run = Executor::new(
            Tradeoff {
                params: params.clone(),
                lambda,
            },
            solver,
        )
        .configure(|s| s.max_iters(2000))
        .run()
        .map_err(|_| Error::NonConvergence {
            iterations: 2000,
            residual: f64::NAN,
        })?;
        total_iters += run.state.iter as usize;
        if let Some(x) = run.state.best_param.clone() {
            let c = run.state.best_cost;
            if c.is_finite() && best.as_ref().is_none_or(|b| c < b.1) {
                best = Some((x, c, run.state.iter as usize));
            }
        }
    }
    let (x, obj, _) = best.ok_or(Error::NonConvergence {
        iterations: total_iters,
        residual: f64::NAN,
    })?;
    if !(obj <= seed_obj || !seed_obj.is_finite()) {
        return Err(Error::NonConvergence {
            iterations: total_iters,
            residual: obj,
        });
    }
    let (error, failure) = problem.terms(&x)?;
    let tuned = params.clone().with_detunings(x[0].exp(), x[1].exp());
    let spread = closed_form_spread(&tuned)?;
    let seed_spread = closed_form_spread(&params.clone().with_detunings(de, dq))?;
    Ok(TradeoffPoint {
        calibration: CalibrationResult {
            delta_aux: x[0].exp(),
            delta_qubit: x[1].exp(),
            residual: spread,
            seed_residual: seed_spread,
            iterations: total_iters,
            mode: ObjectiveMode::Tradeoff { lambda },
            objective: obj,
        },
        error,
        failure,
    })
}

pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityRow {
    pub criterion: String,
    pub value: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub threshold: f64,
    pub rows: Vec<ValidityRow>,
}

impl ValidityReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Small ratios the perturbative elimination relies on.
pub fn validity_check(params: &SystemParams) -> ValidityReport {
    validity_check_with(params, DEFAULT_VALIDITY_THRESHOLD)
}

pub fn validity_check_with(params: &SystemParams, threshold: f64) -> ValidityReport {
    let om = params.omega.abs();
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den.abs() };
    let mut rows = vec![
        ("Omega/(4 delta_E)", ratio(om, 4.0 * params.delta_aux)),
        ("Omega/g", ratio(om, params.g)),
    ];
    if params.scheme == Scheme::TwoPhoton {
        let mw = params.omega_mw.abs();
        let de2 = params.delta_aux2;
        let g = params.gamma;
        rows.push(("Omega/(4 delta_E2)", ratio(om, 4.0 * de2)));
        rows.push((
            "Omega Omega_MW/(delta_E2 g)",
            ratio(om * mw, de2 * params.g),
        ));
        rows.push((
            "3 sqrt(C) gamma^2 Omega^2/(delta_E2^2 Omega_MW^2)",
            ratio(
                3.0 * params.cooperativity().sqrt() * g * g * om * om,
                de2 * de2 * mw * mw,
            ),
        ));
    }
    ValidityReport {
        threshold,
        rows: rows
            .into_iter()
            .map(|(name, value)| ValidityRow {
                criterion: name.to_string(),
                value,
                pass: value <= threshold,
            })
            .collect(),
    }
}
