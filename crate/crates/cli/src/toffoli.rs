//! `herald toffoli`: N-qubit Toffoli error and its scaling factors.

use clap::{Args, ValueEnum};
use heralded_core::gates::{
    scaling_factors, toffoli_protocol, with_toffoli_detunings, SCALING_MIN_COOPERATIVITY,
};
use heralded_core::{Scheme, SystemParams, ToffoliInput};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{parse_float_list, parse_int_list, FloatList, IntList};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, RunOutput, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputArg {
    /// `(|0..0> + |1..1>)/sqrt(2)`.
    Worst,
    /// `|+>^N`.
    Generic,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct ToffoliArgs {
    /// Qubit counts, comma separated.
    #[arg(long = "N", value_parser = parse_int_list)]
    pub n: IntList,

    #[arg(long = "C", value_parser = parse_float_list, default_value = "1000")]
    pub cooperativity: FloatList,

    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    #[arg(long, default_value_t = 100.0)]
    pub kappa_ratio: f64,

    /// Drive strength `a = Omega / (gamma sqrt(C))`.
    #[arg(long = "a", default_value_t = 0.25)]
    pub drive_strength: f64,

    #[arg(long, value_enum, default_value_t = InputArg::Generic)]
    pub input: InputArg,
}

pub const COLUMNS: &[&str] = &["N", "C", "F", "P_success", "k(N)", "d(N)"];

impl ToffoliArgs {
    pub fn validate(&self) -> CliResult<()> {
        if self.n.0.iter().any(|&n| n < 2) {
            return Err(CliError::usage("--N values must be at least 2"));
        }
        if self.cooperativity.0.iter().any(|c| !(*c > 0.0)) {
            return Err(CliError::usage("--C values must be positive"));
        }
        if !(self.alpha > 0.0
            && self.beta > 0.0
            && self.kappa_ratio > 0.0
            && self.drive_strength > 0.0)
        {
            return Err(CliError::usage(
                "--alpha, --beta, --kappa-ratio and --a must be positive",
            ));
        }
        Ok(())
    }

    fn input(&self) -> ToffoliInput {
        match self.input {
            InputArg::Worst => ToffoliInput::Worst,
            InputArg::Generic => ToffoliInput::Generic,
        }
    }

    pub fn run(&self) -> CliResult<RunOutput> {
        self.validate()?;
        let per_c: Vec<CliResult<(Vec<(usize, f64, Vec<Cell>)>, serde_json::Value)>> = self
            .cooperativity
            .0
            .par_iter()
            .map(|&c| {
                let base = SystemParams::new(Scheme::DirectDrive, 2, c, self.kappa_ratio)
                    .with_aux_ratios(self.alpha, self.beta)
                    .with_drive_strength(self.drive_strength);
                let p = with_toffoli_detunings(&base)?;
                let mut rows = Vec::new();
                for &n in &self.n.0 {
                    let r = toffoli_protocol(&p, n, self.input())?;
                    let (k, d) = scaling_factors(
                        r.fidelity,
                        r.success_probability,
                        c,
                        self.alpha,
                        self.beta,
                    );
                    rows.push((
                        n,
                        c,
                        vec![
                            Cell::Int(n),
                            Cell::Num(c),
                            Cell::Num(r.fidelity),
                            Cell::Num(r.success_probability),
                            Cell::Num(k),
                            Cell::Num(d),
                        ],
                    ));
                }
                let record = json!({
                    "C": c,
                    "params": p,
                    "asymptotic_regime": c >= SCALING_MIN_COOPERATIVITY,
                });
                Ok((rows, record))
            })
            .collect();
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for r in per_c {
            let (r, rec) = r?;
            rows.extend(r);
            records.push(rec);
        }
        rows.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        Ok(RunOutput {
            table: Table {
                columns: COLUMNS,
                rows: rows.into_iter().map(|r| r.2).collect(),
            },
            points: records,
            tolerances: json!({ "aux_detuning_root": "Brent, relative 1e-14" }),
        })
    }
}
