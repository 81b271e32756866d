//! `herald cz`: CZ gate sweeps over cooperativity and drive strength.

use clap::{Args, ValueEnum};
use heralded_core::calibrate::{equalize_rates_with, validity_check, CalibrationOptions};
use heralded_core::dynamics::extract::{extract_flat_adaptive, extract_ramped, ExtractedGate};
use heralded_core::dynamics::fidelity::cz_signs;
use heralded_core::dynamics::{Dop853Options, PulseSimulation};
use heralded_core::gates::{cz_effective, with_cz_detunings};
use heralded_core::{CalibrationResult, DriveSchedule, RateSource, Scheme, SystemParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{parse_float_list, FloatList};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, RunOutput, Table};

const DEFAULT_DRIVE_STRENGTH: f64 = 0.25;
const DEFAULT_OMEGA_MW_COEFF: f64 = 4.0;
const DEFAULT_OMEGA_FRACTION: f64 = 0.125;
/// Re-centred sampling windows tried when the fidelity peak sits at an edge.
const WINDOW_RETRIES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    /// Direct laser drive of the auxiliary atom.
    A,
    /// Two-photon drive via `|E2>` and a microwave field.
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Effective,
    Full,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Calibrate {
    /// Equal-rate detunings in closed form (scheme A).
    Analytic,
    /// Newton solve on the effective closed-form rates.
    ClosedForm,
    /// Newton solve on Liouvillian sector rates at a weak reference drive.
    Liouvillian,
    /// Newton solve on Liouvillian sector rates at the drive of each point.
    LiouvillianDrive,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct CzArgs {
    /// Cooperativities, comma separated.
    #[arg(long = "C", value_parser = parse_float_list)]
    pub cooperativity: FloatList,

    /// kappa / gamma.
    #[arg(long, default_value_t = 100.0)]
    pub kappa_ratio: f64,

    /// Drive strengths `a = Omega / (gamma sqrt(C))`; items may be `lo..hi[:step]`.
    /// Scheme A only, default 0.25.
    #[arg(long = "a", value_parser = parse_float_list)]
    pub drive_strength: Option<FloatList>,

    #[arg(long, value_enum, default_value_t = SchemeArg::A)]
    pub scheme: SchemeArg,

    /// Detuning of `|E2>` (scheme B, required there).
    #[arg(long = "delta-E2")]
    pub delta_e2: Option<f64>,

    /// Microwave Rabi frequency in units of `gamma C^(1/4)` (scheme B, default 4).
    #[arg(long)]
    pub omega_mw_coeff: Option<f64>,

    /// Laser Rabi frequency as a fraction of delta_E2 (scheme B, default 1/8).
    #[arg(long)]
    pub omega_fraction: Option<f64>,

    /// Undetectable decay into `|g>`; default 0 (scheme A) or gamma (scheme B).
    #[arg(long)]
    pub gamma_g: Option<f64>,

    /// `C_f / C`.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// `gamma_f / gamma`.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    /// Length of sin^2 edges of the drive, in units of 1/gamma.
    #[arg(long)]
    pub ramp: Option<f64>,

    #[arg(long, value_enum, default_value_t = Source::Effective)]
    pub source: Source,

    /// Detuning calibration; default `analytic` (A) or `closed-form` (B).
    #[arg(long, value_enum)]
    pub calibrate: Option<Calibrate>,
}

pub const COLUMNS: &[&str] = &[
    "C",
    "a",
    "delta_E",
    "delta_e",
    "t_gate",
    "P_success",
    "infidelity",
    "source",
];

struct Point {
    rows: Vec<(f64, f64, u8, Vec<Cell>)>,
    record: serde_json::Value,
}

impl CzArgs {
    pub fn validate(&self) -> CliResult<()> {
        if self.cooperativity.0.iter().any(|c| !(*c > 0.0)) {
            return Err(CliError::usage("--C values must be positive"));
        }
        if !(self.kappa_ratio > 0.0) {
            return Err(CliError::usage("--kappa-ratio must be positive"));
        }
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(CliError::usage("--alpha and --beta must be positive"));
        }
        if let Some(r) = self.ramp {
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::usage("--ramp must be positive"));
            }
        }
        match self.scheme {
            SchemeArg::A => {
                if self.delta_e2.is_some()
                    || self.omega_mw_coeff.is_some()
                    || self.omega_fraction.is_some()
                {
                    return Err(CliError::usage(
                        "--delta-E2, --omega-mw-coeff and --omega-fraction need --scheme b",
                    ));
                }
                if let Some(a) = &self.drive_strength {
                    if a.0.iter().any(|a| !(*a > 0.0)) {
                        return Err(CliError::usage("--a values must be positive"));
                    }
                }
            }
            SchemeArg::B => {
                if self.drive_strength.is_some() {
                    return Err(CliError::usage(
                        "--a is set by --omega-fraction under --scheme b",
                    ));
                }
                match self.delta_e2 {
                    Some(d) if d > 0.0 => {}
                    _ => return Err(CliError::usage("--scheme b needs a positive --delta-E2")),
                }
                if self.calibrate == Some(Calibrate::Analytic) {
                    return Err(CliError::usage(
                        "--calibrate analytic only applies to scheme A",
                    ));
                }
            }
        }
        Ok(())
    }

    fn calibration(&self) -> Calibrate {
        self.calibrate.unwrap_or(match self.scheme {
            SchemeArg::A => Calibrate::Analytic,
            SchemeArg::B => Calibrate::ClosedForm,
        })
    }

    /// Sweep points `(C, a)`; under scheme B the drive follows from `--omega-fraction`.
    fn points(&self) -> Vec<(f64, Option<f64>)> {
        let mut pts = Vec::new();
        for &c in &self.cooperativity.0 {
            match (self.scheme, &self.drive_strength) {
                (SchemeArg::A, Some(a)) => pts.extend(a.0.iter().map(|&a| (c, Some(a)))),
                (SchemeArg::A, None) => pts.push((c, Some(DEFAULT_DRIVE_STRENGTH))),
                (SchemeArg::B, _) => pts.push((c, None)),
            }
        }
        pts
    }

    fn base_params(&self, c: f64, a: Option<f64>) -> SystemParams {
        match self.scheme {
            SchemeArg::A => SystemParams::new(Scheme::DirectDrive, 2, c, self.kappa_ratio)
                .with_aux_ratios(self.alpha, self.beta)
                .with_gamma_g(self.gamma_g.unwrap_or(0.0))
                .with_drive_strength(a.unwrap_or(DEFAULT_DRIVE_STRENGTH)),
            SchemeArg::B => {
                let d = self.delta_e2.unwrap_or_default();
                let mw = self.omega_mw_coeff.unwrap_or(DEFAULT_OMEGA_MW_COEFF) * c.powf(0.25);
                SystemParams::new(Scheme::TwoPhoton, 2, c, self.kappa_ratio)
                    .with_aux_ratios(self.alpha, self.beta)
                    .with_gamma_g(self.gamma_g.unwrap_or(1.0))
                    .with_two_photon(d, mw)
                    .with_omega(self.omega_fraction.unwrap_or(DEFAULT_OMEGA_FRACTION) * d)
            }
        }
    }

    fn calibrated(
        &self,
        base: &SystemParams,
    ) -> CliResult<(SystemParams, Option<CalibrationResult>)> {
        let (source, opts) = match self.calibration() {
            Calibrate::Analytic => return Ok((with_cz_detunings(base)?, None)),
            Calibrate::ClosedForm => (
                RateSource::EffectiveClosedForm,
                CalibrationOptions::default(),
            ),
            Calibrate::Liouvillian => {
                (RateSource::SectorLiouvillian, CalibrationOptions::default())
            }
            Calibrate::LiouvillianDrive => (
                RateSource::SectorLiouvillian,
                CalibrationOptions {
                    liouvillian_drive_strength: None,
                    ..Default::default()
                },
            ),
        };
        let cal = equalize_rates_with(base, source, &opts)?;
        Ok((cal.apply(base), Some(cal)))
    }

    fn run_point(&self, c: f64, a: Option<f64>) -> CliResult<Point> {
        let (p, cal) = self.calibrated(&self.base_params(c, a))?;
        let a = p.drive_strength();
        let eff = cz_effective(&p)?;
        let schedule = self
            .ramp
            .map(DriveSchedule::sin_squared)
            .unwrap_or_else(DriveSchedule::flat);
        let mut rows = Vec::new();
        let row = |t: f64, ps: f64, f: f64, label: &'static str| {
            vec![
                Cell::Num(c),
                Cell::Num(a),
                Cell::Num(p.delta_aux),
                Cell::Num(p.delta_qubit),
                Cell::Num(t),
                Cell::Num(ps),
                Cell::Num(1.0 - f),
                Cell::Text(label),
            ]
        };
        if self.source != Source::Full {
            // the effective dynamics depend on the drive only through the integral of Omega^2
            let t = schedule.total_for_flat_equivalent(eff.t_gate);
            rows.push((
                c,
                a,
                0,
                row(t, eff.success_probability, eff.fidelity, "effective"),
            ));
        }
        if self.source != Source::Effective {
            let g = self.full(&p, schedule, eff.t_gate)?;
            rows.push((
                c,
                a,
                1,
                row(g.t_gate, g.success_probability, g.fidelity, "full"),
            ));
        }
        let record = json!({
            "C": c,
            "a": a,
            "params": p.clone().with_drive(schedule),
            "calibration": cal,
            "validity": validity_check(&p),
        });
        Ok(Point { rows, record })
    }

    fn full(
        &self,
        p: &SystemParams,
        schedule: DriveSchedule,
        t_pred: f64,
    ) -> CliResult<ExtractedGate> {
        if schedule.is_flat() {
            let sim = PulseSimulation::new(p, t_pred)?;
            Ok(extract_flat_adaptive(
                &sim,
                t_pred,
                &cz_signs(),
                WINDOW_RETRIES,
            )?)
        } else {
            Ok(extract_ramped(
                &p.clone().with_drive(schedule),
                t_pred,
                &cz_signs(),
            )?)
        }
    }

    pub fn run(&self) -> CliResult<RunOutput> {
        self.validate()?;
        let results: Vec<CliResult<Point>> = self
            .points()
            .par_iter()
            .map(|&(c, a)| self.run_point(c, a))
            .collect();
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for r in results {
            let p = r?;
            rows.extend(p.rows);
            records.push(p.record);
        }
        rows.sort_by(|x, y| {
            x.0.total_cmp(&y.0)
                .then(x.1.total_cmp(&y.1))
                .then(x.2.cmp(&y.2))
        });
        let opts = CalibrationOptions::default();
        let ode = Dop853Options::default();
        Ok(RunOutput {
            table: Table {
                columns: COLUMNS,
                rows: rows.into_iter().map(|r| r.3).collect(),
            },
            points: records,
            tolerances: json!({
                "calibration": {
                    "method": self.calibration(),
                    "closed_form": opts.tolerance_for(RateSource::EffectiveClosedForm),
                    "liouvillian": opts.tolerance_for(RateSource::SectorLiouvillian),
                    "max_iterations": opts.max_iterations,
                    "fd_step": opts.fd_step,
                    "liouvillian_reference_drive": opts.liouvillian_drive_strength,
                },
                "integrator": { "method": "dop853", "rtol": ode.rtol, "atol": ode.atol },
                "window_retries": WINDOW_RETRIES,
            }),
        })
    }
}
