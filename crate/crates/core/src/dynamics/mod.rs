//! Lindblad master-equation simulation of the full model.
//!
//! The drive only ever adds one excitation on top of the ground manifold, so
//! the dynamics stay inside a small closed subspace. [`ReducedModel`] finds
//! that subspace (closure of the initial support under the Hamiltonian and
//! the jump operators) and all simulation happens there.

pub mod dop853;
pub mod extract;
pub mod fidelity;
pub mod liouvillian;
pub mod series;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::models::{build_model, no_jump_hamiltonian, Channel, ModelSplit};
use crate::params::{envelope_unchecked, DriveSchedule, SystemParams};
use crate::space::{AuxLevel, Basis, BasisLabel, SparseOp};

pub use dop853::{Dop853Options, Dop853Stats};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest tolerated `|Tr rho - 1|` during integration.
pub const TRACE_TOLERANCE: f64 = 1e-8;

/// The model restricted to the states reachable from a given support.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    pub basis: Arc<Basis>,
    /// Full-basis index of each reduced state.
    pub states: Vec<usize>,
    pub labels: Vec<BasisLabel>,
    /// `H_e - (i/2) sum L^dagger L`.
    pub h_nh: SparseOp,
    /// `V + V^dagger`.
    pub drive: SparseOp,
    pub jumps: Vec<(Channel, SparseOp)>,
}

impl ReducedModel {
    pub fn from_support(model: &ModelSplit, support: &[usize]) -> Result<Self> {
        let dim = model.dim();
        if support.iter().any(|&s| s >= dim) {
            return Err(Error::invalid("support index outside the basis"));
        }
        let h_nh = no_jump_hamiltonian(model);
        let drive = model.drive();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); dim];
        let ops = std::iter::once(&h_nh)
            .chain(std::iter::once(&drive))
            .chain(model.lindblads.iter().map(|l| &l.op));
        for op in ops {
            for &(i, j, _) in &op.entries {
                adj[j].push(i);
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack = support.to_vec();
        while let Some(s) = stack.pop() {
            if seen.insert(s) {
                stack.extend(adj[s].iter().copied().filter(|x| !seen.contains(x)));
            }
        }
        let states: Vec<usize> = seen.into_iter().collect();
        let labels = states.iter().map(|&i| model.basis.label(i)).collect();
        Ok(ReducedModel {
            basis: model.basis.clone(),
            h_nh: h_nh.restrict(&states),
            drive: drive.restrict(&states),
            jumps: model
                .lindblads
                .iter()
                .filter(|l| !l.op.entries.is_empty())
                .map(|l| (l.channel, l.op.restrict(&states)))
                .collect(),
            labels,
            states,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn position(&self, full_index: usize) -> Option<usize> {
        self.states.binary_search(&full_index).ok()
    }

    /// `d rho / dt` for drive amplitude `u`, with `rho` row-major.
    pub fn rhs(&self, u: f64, rho: &[C64], out: &mut [C64]) {
        let m = self.dim();
        out.iter_mut().for_each(|z| *z = ZERO);
        // A = -i H_nh(u) rho, accumulated into out; then out += A^dagger
        let mut a = vec![ZERO; m * m];
        let u = C64::new(u, 0.0);
        for (op, scale) in [(&self.h_nh, -I), (&self.drive, -I * u)] {
            for &(i, j, v) in &op.entries {
                let c = scale * v;
                let row_j = &rho[j * m..(j + 1) * m];
                let row_i = &mut a[i * m..(i + 1) * m];
                for (x, &r) in row_i.iter_mut().zip(row_j) {
                    *x += c * r;
                }
            }
        }
        for i in 0..m {
            for k in 0..m {
                out[i * m + k] = a[i * m + k] + a[k * m + i].conj();
            }
        }
        for (_, l) in &self.jumps {
            for &(i, j, v) in &l.entries {
                for &(k, n, w) in &l.entries {
                    out[i * m + k] += v * w.conj() * rho[j * m + n];
                }
            }
        }
    }

    pub fn trace(&self, rho: &[C64]) -> C64 {
        let m = self.dim();
        (0..m).map(|i| rho[i * m + i]).sum()
    }

    /// Pure state `|psi><psi|` from full-basis amplitudes.
    pub fn pure_state(&self, amplitudes: &[(usize, C64)]) -> Result<Vec<C64>> {
        let m = self.dim();
        let mut psi = vec![ZERO; m];
        for &(i, a) in amplitudes {
            let p = self
                .position(i)
                .ok_or_else(|| Error::invalid("amplitude outside the reduced space"))?;
            psi[p] += a;
        }
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("zero initial state"));
        }
        let mut rho = vec![ZERO; m * m];
        for i in 0..m {
            for k in 0..m {
                rho[i * m + k] = psi[i] * psi[k].conj() / (norm * norm);
            }
        }
        Ok(rho)
    }
}

/// Uniform superposition of all computational states with the auxiliary
/// atom in `|g>` and an empty cavity.
pub fn plus_state_support(basis: &Basis) -> Vec<(usize, C64)> {
    let idx = basis.computational_indices(AuxLevel::G);
    let a = C64::new(1.0 / (idx.len() as f64).sqrt(), 0.0);
    idx.into_iter().map(|i| (i, a)).collect()
}

/// Time-dependent master equation for one pulse.
#[derive(Clone, Debug)]
pub struct PulseSimulation {
    pub reduced: ReducedModel,
    pub schedule: DriveSchedule,
    /// Pulse length (only used by ramped envelopes).
    pub t_total: f64,
    pub options: Dop853Options,
}

impl PulseSimulation {
    /// Full model reduced to the closure of the `|g,0,++..>` input.
    pub fn new(params: &SystemParams, t_total: f64) -> Result<Self> {
        let model = build_model(params)?;
        let support: Vec<usize> = plus_state_support(&model.basis)
            .into_iter()
            .map(|(i, _)| i)
            .collect();
        Ok(PulseSimulation {
            reduced: ReducedModel::from_support(&model, &support)?,
            schedule: params.drive,
            t_total,
            options: Dop853Options::default(),
        })
    }

    pub fn initial_plus_state(&self) -> Result<Vec<C64>> {
        self.reduced
            .pure_state(&plus_state_support(&self.reduced.basis))
    }

    /// Integrates from `(t0, rho0)` and reports `rho` (hermitized) at each of
    /// `times`. Fails if the trace drifts by more than [`TRACE_TOLERANCE`].
    pub fn evolve<O>(
        &self,
        t0: f64,
        rho0: &[C64],
        times: &[f64],
        mut on_output: O,
    ) -> Result<Dop853Stats>
    where
        O: FnMut(usize, f64, &[C64]) -> Result<()>,
    {
        let m = self.reduced.dim();
        if rho0.len() != m * m {
            return Err(Error::invalid("density matrix has wrong size"));
        }
        let tr0 = self.reduced.trace(rho0).re;
        let mut sym = vec![ZERO; m * m];
        dop853::integrate(
            |t, y, dy| {
                let u = envelope_unchecked(&self.schedule, t, self.t_total);
                self.reduced.rhs(u, y, dy)
            },
            t0,
            rho0,
            times,
            &self.options,
            |k, t, y| {
                let drift = (self.reduced.trace(y).re - tr0).abs();
                if drift > TRACE_TOLERANCE {
                    return Err(Error::TraceDrift { t, drift });
                }
                for i in 0..m {
                    for j in 0..m {
                        sym[i * m + j] = 0.5 * (y[i * m + j] + y[j * m + i].conj());
                    }
                }
                on_output(k, t, &sym)
            },
        )
    }

    /// State at a single time.
    pub fn state_at(&self, t0: f64, rho0: &[C64], t: f64) -> Result<Vec<C64>> {
        let mut out = Vec::new();
        self.evolve(t0, rho0, &[t], |_, _, rho| {
            out = rho.to_vec();
            Ok(())
        })?;
        Ok(out)
    }
}
