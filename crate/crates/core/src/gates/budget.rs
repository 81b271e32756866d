//! Order-of-magnitude error estimates from the extra levels of Rb-87.
//!
//! These are advisory numbers only and never enter a gate fidelity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Scheme, SystemParams};

use super::cz_effective;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetConstants {
    /// Ground hyperfine splitting between `|g>` and `|f>`.
    pub delta_g: f64,
    /// Excited hyperfine splitting between `|E2>` and `|E>`.
    pub delta_23: f64,
    /// Leakage prefactor of the open `|E> <-> |f>` transition at `C = 1`.
    pub open_prefactor: f64,
    /// Extra detuning of the leaking excited states.
    pub open_detuning: f64,
}

impl BudgetConstants {
    /// Values for Rb-87 in units of the D2 linewidth.
    pub fn rb87() -> Self {
        BudgetConstants {
            delta_g: 1000.0,
            delta_23: 44.0,
            open_prefactor: 5e-5,
            open_detuning: 55.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetEstimate {
    pub value: f64,
    /// Conditions under which the estimate was derived.
    pub regime: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub crosstalk_drive: BudgetEstimate,
    pub crosstalk_mw: BudgetEstimate,
    pub open_transition: BudgetEstimate,
    /// Expected number of scattering events from `|E2>` during a CZ gate.
    pub n_scat: f64,
    /// `3 sqrt(C) gamma^2 Omega^2 / (delta_E2^2 Omega_MW^2)`; must be small.
    pub scattering_ratio: f64,
    pub constants: BudgetConstants,
}

/// Error estimates for a two-photon CZ configuration.
pub fn rb87_error_budget(params: &SystemParams, constants: BudgetConstants) -> Result<ErrorBudget> {
    if params.scheme != Scheme::TwoPhoton {
        return Err(Error::invalid(
            "error budget is defined for the two-photon scheme",
        ));
    }
    params.validate()?;
    let g = params.gamma;
    let c = params.cooperativity();
    let (om, mw) = (params.omega, params.omega_mw);
    let (de, de2) = (params.delta_aux, params.delta_aux2);

    // |f> pumped to |E> by the laser, then to |E2> by the microwave and back to |g>
    let report = cz_effective(params)?;
    let delta = constants.delta_g - de2 - constants.delta_23;
    let pump_rate =
        params.gamma_g * (om / (2.0 * delta)).powi(2) * (mw / (2.0 * (de2 - de))).powi(2);
    let crosstalk_drive = 0.5 * (1.0 - report.success_probability) * report.t_gate * pump_rate;

    let mw_gap = constants.delta_g - (de2 - de + constants.delta_23);
    let crosstalk_mw = (mw / mw_gap).powi(2);

    let x = c / constants.open_detuning.powi(2);
    let open_transition = constants.open_prefactor * c.sqrt() / (1.0 + x);

    Ok(ErrorBudget {
        crosstalk_drive: BudgetEstimate {
            value: crosstalk_drive,
            regime: "delta_g >> |delta_E|, cavity coupling neglected while pumping".into(),
        },
        crosstalk_mw: BudgetEstimate {
            value: crosstalk_mw,
            regime: "far-detuned microwave coupling of the ground hyperfine states".into(),
        },
        open_transition: BudgetEstimate {
            value: open_transition,
            regime: "linearly polarized cavity, delta_E < 0 growing as sqrt(C)".into(),
        },
        n_scat: 12.0 * c.sqrt() * g * g / (mw * mw),
        scattering_ratio: 3.0 * c.sqrt() * g * g * om * om / (de2 * de2 * mw * mw),
        constants,
    })
}
