//! Heralded CZ and Toffoli gates with an auxiliary atom in an optical cavity:
//! effective-operator theory, full master-equation simulation, detuning
//! calibration and a repeater rate model.

pub mod calibrate;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod gates;
pub mod models;
pub mod params;
pub mod repeater;
pub mod space;

pub use calibrate::{CalibrationResult, RateSource, ValidityReport};
pub use effective::{EffectiveModel, SectorCoefficients};
pub use error::{Error, Result};
pub use gates::{GateReport, ToffoliInput};
pub use params::{DriveSchedule, RampShape, Scheme, SystemParams};
pub use repeater::RepeaterConfig;
