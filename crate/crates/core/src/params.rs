//! Physical parameters of one gate configuration.
//!
//! Everything is expressed in units of the qubit-atom linewidth `gamma`
//! (rates and detunings in `gamma`, times in `1/gamma`). The cooperativities
//! and the auxiliary-atom ratios `alpha`, `beta` are always derived from the
//! stored couplings, never stored on their own.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the auxiliary atom is driven from `|g>` to `|E>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Single laser on `|g> -> |E>`.
    DirectDrive,
    /// Laser on `|g> -> |E2>` plus a microwave on `|E2> <-> |E>`.
    TwoPhoton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RampShape {
    Flat,
    SinSquared,
}

/// Amplitude envelope multiplying the drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSchedule {
    pub ramp_shape: RampShape,
    pub t_ramp: f64,
}

impl Default for DriveSchedule {
    fn default() -> Self {
        DriveSchedule::flat()
    }
}

impl DriveSchedule {
    pub fn flat() -> Self {
        DriveSchedule {
            ramp_shape: RampShape::Flat,
            t_ramp: 0.0,
        }
    }

    pub fn sin_squared(t_ramp: f64) -> Self {
        DriveSchedule {
            ramp_shape: RampShape::SinSquared,
            t_ramp,
        }
    }

    pub fn is_flat(&self) -> bool {
        self.ramp_shape == RampShape::Flat || self.t_ramp == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_ramp >= 0.0 && self.t_ramp.is_finite()) {
            return Err(Error::invalid(format!(
                "t_ramp must be >= 0, got {}",
                self.t_ramp
            )));
        }
        Ok(())
    }

    /// Pulse length needed so that the time integral of the squared envelope
    /// (which sets the accumulated light shift) equals `t_flat`.
    pub fn total_for_flat_equivalent(&self, t_flat: f64) -> f64 {
        if self.is_flat() {
            t_flat
        } else {
            // each sin^2 edge contributes 3/8 of its length to the integral of u^2
            t_flat + 2.0 * self.t_ramp * (1.0 - 3.0 / 8.0)
        }
    }
}

/// Value of the drive envelope at time `t` of a pulse lasting `t_total`.
///
/// The rising edge is `sin^2(pi t / (2 t_ramp))`, the falling edge its mirror
/// image, and the envelope is 1 in between.
pub fn envelope_value(schedule: &DriveSchedule, t: f64, t_total: f64) -> Result<f64> {
    schedule.validate()?;
    if schedule.is_flat() {
        return Ok(1.0);
    }
    let tr = schedule.t_ramp;
    if t_total < 2.0 * tr {
        return Err(Error::OutOfRange {
            what: "t_total",
            value: t_total,
            range: format!(">= 2 t_ramp = {}", 2.0 * tr),
        });
    }
    if !(0.0..=t_total).contains(&t) {
        return Err(Error::OutOfRange {
            what: "t",
            value: t,
            range: format!("[0, {t_total}]"),
        });
    }
    Ok(envelope_unchecked(schedule, t, t_total))
}

/// Envelope without range checks; zero outside `[0, t_total]` for ramped pulses.
pub(crate) fn envelope_unchecked(schedule: &DriveSchedule, t: f64, t_total: f64) -> f64 {
    if schedule.is_flat() {
        return 1.0;
    }
    let tr = schedule.t_ramp;
    if t <= 0.0 || t >= t_total {
        0.0
    } else if t < tr {
        (PI * t / (2.0 * tr)).sin().powi(2)
    } else if t > t_total - tr {
        (PI * (t_total - t) / (2.0 * tr)).sin().powi(2)
    } else {
        1.0
    }
}

/// All rates, couplings and detunings of one gate configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub scheme: Scheme,
    pub n_qubits: usize,
    /// Qubit-atom excited-state linewidth; the unit of everything else.
    pub gamma: f64,
    pub kappa: f64,
    /// Qubit-cavity coupling.
    pub g: f64,
    /// Auxiliary-atom-cavity coupling.
    pub g_f: f64,
    /// `|E> -> |f>` decay rate.
    pub gamma_f: f64,
    /// Undetectable decay into `|g>` (from `|E>` or, for two-photon driving, `|E2>`).
    pub gamma_g: f64,
    pub omega: f64,
    pub omega_mw: f64,
    #[serde(rename = "delta_E")]
    pub delta_aux: f64,
    #[serde(rename = "delta_e")]
    pub delta_qubit: f64,
    #[serde(rename = "delta_E2")]
    pub delta_aux2: f64,
    pub photon_cutoff: usize,
    pub drive: DriveSchedule,
}

impl SystemParams {
    /// Identical auxiliary and qubit atoms (`alpha = beta = 1`), `gamma = 1`,
    /// no drive and zero detunings.
    pub fn new(scheme: Scheme, n_qubits: usize, cooperativity: f64, kappa: f64) -> Self {
        let gamma = 1.0;
        let g = (cooperativity * gamma * kappa).sqrt();
        SystemParams {
            scheme,
            n_qubits,
            gamma,
            kappa,
            g,
            g_f: g,
            gamma_f: gamma,
            gamma_g: 0.0,
            omega: 0.0,
            omega_mw: 0.0,
            delta_aux: 0.0,
            delta_qubit: 0.0,
            delta_aux2: 0.0,
            photon_cutoff: 2,
            drive: DriveSchedule::flat(),
        }
    }

    /// Sets `C_f = alpha C` and `gamma_f = beta gamma`.
    pub fn with_aux_ratios(mut self, alpha: f64, beta: f64) -> Self {
        self.g_f = (alpha * self.cooperativity() * self.gamma * self.kappa).sqrt();
        self.gamma_f = beta * self.gamma;
        self
    }

    pub fn with_detunings(mut self, delta_aux: f64, delta_qubit: f64) -> Self {
        self.delta_aux = delta_aux;
        self.delta_qubit = delta_qubit;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    /// Drive `Omega = a gamma sqrt(C)`.
    pub fn with_drive_strength(self, a: f64) -> Self {
        let omega = a * self.gamma * self.cooperativity().sqrt();
        self.with_omega(omega)
    }

    pub fn with_gamma_g(mut self, gamma_g: f64) -> Self {
        self.gamma_g = gamma_g;
        self
    }

    pub fn with_two_photon(mut self, delta_aux2: f64, omega_mw: f64) -> Self {
        self.delta_aux2 = delta_aux2;
        self.omega_mw = omega_mw;
        self
    }

    pub fn with_photon_cutoff(mut self, cutoff: usize) -> Self {
        self.photon_cutoff = cutoff;
        self
    }

    pub fn with_drive(mut self, drive: DriveSchedule) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_qubits(mut self, n: usize) -> Self {
        self.n_qubits = n;
        self
    }

    /// `C = g^2 / (gamma kappa)`.
    pub fn cooperativity(&self) -> f64 {
        self.g * self.g / (self.gamma * self.kappa)
    }

    /// `C_f = g_f^2 / (gamma kappa)`.
    pub fn cooperativity_aux(&self) -> f64 {
        self.g_f * self.g_f / (self.gamma * self.kappa)
    }

    pub fn alpha(&self) -> f64 {
        self.cooperativity_aux() / self.cooperativity()
    }

    pub fn beta(&self) -> f64 {
        self.gamma_f / self.gamma
    }

    /// Adiabaticity parameter `a = Omega / (gamma sqrt(C))`.
    pub fn drive_strength(&self) -> f64 {
        self.omega / (self.gamma * self.cooperativity().sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("gamma", self.gamma),
            ("kappa", self.kappa),
            ("g", self.g),
            ("g_f", self.g_f),
            ("gamma_f", self.gamma_f),
            ("gamma_g", self.gamma_g),
            ("omega", self.omega),
            ("omega_mw", self.omega_mw),
            ("delta_E", self.delta_aux),
            ("delta_e", self.delta_qubit),
            ("delta_E2", self.delta_aux2),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.n_qubits < 1 {
            return Err(Error::invalid("n_qubits must be >= 1"));
        }
        if self.photon_cutoff < 1 {
            return Err(Error::invalid("photon_cutoff must be >= 1"));
        }
        for (name, v) in [
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("gamma_f", self.gamma_f),
        ] {
            if v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.gamma_g < 0.0 {
            return Err(Error::invalid("gamma_g must be >= 0"));
        }
        if self.omega < 0.0 || self.omega_mw < 0.0 {
            return Err(Error::invalid("drive amplitudes must be >= 0"));
        }
        if self.g < 0.0 || self.g_f < 0.0 {
            return Err(Error::invalid("couplings must be real and >= 0"));
        }
        match self.scheme {
            Scheme::TwoPhoton => {
                if self.omega_mw <= 0.0 {
                    return Err(Error::invalid("two-photon scheme needs omega_mw > 0"));
                }
            }
            Scheme::DirectDrive => {
                if self.omega_mw != 0.0 || self.delta_aux2 != 0.0 {
                    return Err(Error::invalid(
                        "omega_mw / delta_E2 are only meaningful for the two-photon scheme",
                    ));
                }
            }
        }
        self.drive.validate()
    }
}
