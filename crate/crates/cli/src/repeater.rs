//! `herald repeater`: scaling-law and recursive repeater rates.

use clap::Args;
use heralded_core::repeater::{max_links, rate_exact_recursive, rate_scaling};
use heralded_core::RepeaterConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{parse_float_list, FloatList};
use crate::error::CliResult;
use crate::output::{Cell, RunOutput, Table};

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct RepeaterArgs {
    /// Total distance in km.
    #[arg(long = "L", default_value_t = 128.0)]
    pub total_length: f64,

    /// Elementary link length in km.
    #[arg(long = "L0", default_value_t = 1.0)]
    pub link_length: f64,

    /// Swap success probabilities, comma separated.
    #[arg(long = "p", value_parser = parse_float_list, default_value = "1")]
    pub swap_success: FloatList,

    #[arg(long, default_value_t = 0.005)]
    pub eps0: f64,

    #[arg(long, default_value_t = 0.005)]
    pub epsg: f64,

    #[arg(long = "F-final", default_value_t = 0.9)]
    pub f_final: f64,
}

pub const COLUMNS: &[&str] = &[
    "p", "L", "L0", "links", "scaling", "exact", "ratio", "N_max",
];

impl RepeaterArgs {
    fn config(&self, p: f64) -> RepeaterConfig {
        RepeaterConfig {
            eps0: self.eps0,
            epsg: self.epsg,
            f_final: self.f_final,
            ..RepeaterConfig::new(self.total_length, self.link_length, p)
        }
    }

    pub fn run(&self) -> CliResult<RunOutput> {
        let n_max = max_links(self.f_final, self.eps0, self.epsg)?;
        let results: Vec<CliResult<(f64, Vec<Cell>, serde_json::Value)>> = self
            .swap_success
            .0
            .par_iter()
            .map(|&p| {
                let cfg = self.config(p);
                let scaling = rate_scaling(&cfg)?;
                let timing = rate_exact_recursive(&cfg)?;
                let exact = timing.rate();
                let row = vec![
                    Cell::Num(p),
                    Cell::Num(self.total_length),
                    Cell::Num(self.link_length),
                    Cell::Num(cfg.links()),
                    Cell::Num(scaling),
                    Cell::Num(exact),
                    Cell::Num(exact / scaling),
                    Cell::Num(n_max),
                ];
                Ok((
                    p,
                    row,
                    json!({ "config": cfg, "level_times": timing.level_times }),
                ))
            })
            .collect();
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for r in results {
            let (p, row, rec) = r?;
            rows.push((p, row));
            records.push(rec);
        }
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        Ok(RunOutput {
            table: Table {
                columns: COLUMNS,
                rows: rows.into_iter().map(|r| r.1).collect(),
            },
            points: records,
            tolerances: json!({ "grid_points_per_mean": 256, "tail_mass": 1e-13 }),
        })
    }
}
