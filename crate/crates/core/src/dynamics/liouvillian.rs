//! Decay rate of a qubit configuration read off the Liouvillian spectrum.
//!
//! With a constant drive, the population of `|g,0,q>` decays at the slowest
//! nonzero rate among the Liouvillian modes that overlap that population.
//! Modes without such overlap (for instance the `|g><f|` coherences, which
//! decay at `Gamma / 2`) are discarded.

use faer::Mat;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::models::build_model;
use crate::params::SystemParams;
use crate::space::{AuxLevel, BasisLabel};

use super::ReducedModel;

/// Minimum relative weight of a mode on the ground-state population.
const OVERLAP_THRESHOLD: f64 = 1e-3;
const ZERO_RATE: f64 = 1e-12;

/// Dense Liouvillian acting on row-major `vec(rho)`.
pub fn liouvillian_matrix(reduced: &ReducedModel, u: f64) -> Mat<C64> {
    let m = reduced.dim();
    let h = reduced.h_nh.add(&reduced.drive.scale(C64::new(u, 0.0)));
    let mut l = Mat::<C64>::zeros(m * m, m * m);
    let mi = C64::new(0.0, -1.0);
    let pi = C64::new(0.0, 1.0);
    for &(i, j, v) in &h.entries {
        // -i H rho: (i,k) <- (j,k)
        for k in 0..m {
            l[(i * m + k, j * m + k)] += mi * v;
        }
        // +i rho H^dagger: (k,i) <- (k,j) with conj(H_ij)
        for k in 0..m {
            l[(k * m + i, k * m + j)] += pi * v.conj();
        }
    }
    for (_, op) in &reduced.jumps {
        for &(i, j, v) in &op.entries {
            for &(k, n, w) in &op.entries {
                l[(i * m + k, j * m + n)] += v * w.conj();
            }
        }
    }
    l
}

/// Heralded decay rate of the computational configuration `bits`
/// (qubit 1 first) under a constant drive of the given parameters.
pub fn sector_decay_rate(params: &SystemParams, bits: &[bool]) -> Result<f64> {
    params.validate()?;
    if bits.len() != params.n_qubits {
        return Err(Error::invalid("configuration length differs from n_qubits"));
    }
    if params.omega == 0.0 {
        return Ok(0.0);
    }
    let model = build_model(params)?;
    let start = model
        .basis
        .index(&BasisLabel::computational(AuxLevel::G, bits, 0))?;
    let reduced = ReducedModel::from_support(&model, &[start])?;
    let m = reduced.dim();
    let p0 = reduced
        .position(start)
        .expect("support is part of its closure");
    let target = p0 * m + p0;

    let lmat = liouvillian_matrix(&reduced, 1.0);
    let eig = lmat.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let values = eig.S();
    let vectors = eig.U();

    let mut rates: Vec<f64> = Vec::new();
    for k in 0..m * m {
        let lam = values[k];
        if lam.re.abs() <= ZERO_RATE {
            continue;
        }
        let col = vectors.col(k);
        let mut norm2 = 0.0;
        for r in 0..m * m {
            norm2 += col[r].norm_sqr();
        }
        if col[target].norm() / norm2.sqrt() > OVERLAP_THRESHOLD {
            rates.push(-lam.re);
        }
    }
    rates.sort_by(|a, b| a.partial_cmp(b).expect("finite rates"));
    match rates.as_slice() {
        [] => Err(Error::Eigen(
            "no decaying mode overlaps the ground population".into(),
        )),
        [r] => Ok(*r),
        [r0, r1, ..] => {
            if (r1 - r0).abs() <= 0.01 * r0.abs() {
                Err(Error::SpectralAmbiguity(*r0, *r1))
            } else {
                Ok(*r0)
            }
        }
    }
}

/// Sector rate for the configuration with the first `n` qubits in `|1>`.
pub fn sector_decay_rate_n(params: &SystemParams, n: usize) -> Result<f64> {
    if n > params.n_qubits {
        return Err(Error::invalid("sector index exceeds n_qubits"));
    }
    let bits: Vec<bool> = (0..params.n_qubits).map(|k| k < n).collect();
    sector_decay_rate(params, &bits)
}
