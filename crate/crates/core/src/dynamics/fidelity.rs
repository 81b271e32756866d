//! Conditional qubit state and gate fidelity up to local Z rotations.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::space::{AuxLevel, QubitLevel};

use super::ReducedModel;

/// Qubit density matrix conditioned on the auxiliary atom being back in `|g>`.
#[derive(Clone, Debug)]
pub struct ConditionalState {
    /// Probability of finding the auxiliary atom in `|g>` (no herald).
    pub success_probability: f64,
    /// Normalized `2^N x 2^N` matrix in the computational basis, qubit 1 most significant.
    pub rho: DMatrix<C64>,
}

fn computational_code(qubits: &[QubitLevel]) -> Option<usize> {
    qubits.iter().try_fold(0usize, |acc, q| match q {
        QubitLevel::Zero => Some(acc << 1),
        QubitLevel::One => Some((acc << 1) | 1),
        _ => None,
    })
}

/// Projects `rho` (row-major over the reduced space) onto the auxiliary
/// ground state and traces out the cavity.
pub fn conditional_state(reduced: &ReducedModel, rho: &[C64]) -> Result<ConditionalState> {
    let m = reduced.dim();
    if rho.len() != m * m {
        return Err(Error::invalid("density matrix has wrong size"));
    }
    let nq = reduced.basis.n_qubits;
    let mut p_g = 0.0;
    let mut out = DMatrix::<C64>::zeros(1 << nq, 1 << nq);
    for (i, li) in reduced.labels.iter().enumerate() {
        if li.aux != AuxLevel::G {
            continue;
        }
        p_g += rho[i * m + i].re;
        let Some(qi) = computational_code(&li.qubits) else {
            continue;
        };
        for (j, lj) in reduced.labels.iter().enumerate() {
            if lj.aux != AuxLevel::G || lj.photons != li.photons {
                continue;
            }
            if let Some(qj) = computational_code(&lj.qubits) {
                out[(qi, qj)] += rho[i * m + j];
            }
        }
    }
    if p_g <= 0.0 {
        return Err(Error::invalid(
            "no population left in the auxiliary ground state",
        ));
    }
    Ok(ConditionalState {
        success_probability: p_g,
        rho: out / C64::new(p_g, 0.0),
    })
}

/// Fidelity with a diagonal target gate and the best local phases.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseOptimum {
    pub fidelity: f64,
    /// The state matches the target followed by `exp(i phi_k |1><1|_k)` on
    /// every qubit; applying `-phi_k` corrects it.
    pub phases: Vec<f64>,
}

/// Maximizes `<psi(phi)| rho |psi(phi)>` over local phases, where
/// `psi(phi) = prod_k exp(i phi_k |1><1|_k) (sum_q s_q |q>) / 2^(N/2)` and
/// `signs[q] = s_q` defines the target gate acting on `|+...+>`.
pub fn max_fidelity_over_phases(rho: &DMatrix<C64>, signs: &[C64]) -> Result<PhaseOptimum> {
    let d = rho.nrows();
    if d != signs.len() || !d.is_power_of_two() || d < 2 {
        return Err(Error::invalid(
            "signs must cover all 2^N computational states",
        ));
    }
    let nq = d.trailing_zeros() as usize;
    let norm = 1.0 / d as f64;
    let bit = |q: usize, k: usize| (q >> (nq - 1 - k)) & 1 == 1;

    let fidelity = |phi: &[f64]| -> f64 {
        let psi: Vec<C64> = (0..d)
            .map(|q| {
                let ph: f64 = (0..nq).filter(|&k| bit(q, k)).map(|k| phi[k]).sum();
                signs[q] * C64::from_polar(1.0, ph)
            })
            .collect();
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                acc += psi[a].conj() * rho[(a, b)] * psi[b];
            }
        }
        acc.re * norm
    };

    // F depends on phi_k as A + Re(B exp(i phi_k)), so every coordinate
    // update is an exact maximization.
    let coordinate_update = |phi: &mut Vec<f64>, k: usize| {
        let mut b = C64::new(0.0, 0.0);
        for qa in 0..d {
            for qb in 0..d {
                // exp(i phi_k (bit_b - bit_a))
                let diff = bit(qb, k) as i32 - bit(qa, k) as i32;
                if diff != 1 {
                    continue;
                }
                let rest: f64 = (0..nq)
                    .filter(|&j| j != k)
                    .map(|j| phi[j] * (bit(qb, j) as i32 - bit(qa, j) as i32) as f64)
                    .sum();
                b += signs[qa].conj() * rho[(qa, qb)] * signs[qb] * C64::from_polar(1.0, rest);
            }
        }
        // contribution 2 Re(b e^{i phi})
        if b.norm() > 0.0 {
            phi[k] = wrap_phase(-b.arg());
        }
    };

    let seeds: Vec<Vec<f64>> = (0..4)
        .map(|s| {
            (0..nq)
                .map(|k| if (s >> (k % 2)) & 1 == 1 { std::f64::consts::PI } else { 0.0 } + 0.5 * k as f64)
                .collect()
        })
        .collect();
    let mut best = PhaseOptimum {
        fidelity: f64::MIN,
        phases: vec![0.0; nq],
    };
    for mut phi in seeds {
        let mut f_old = fidelity(&phi);
        for _ in 0..500 {
            for k in 0..nq {
                coordinate_update(&mut phi, k);
            }
            let f_new = fidelity(&phi);
            if (f_new - f_old).abs() < 1e-15 {
                f_old = f_new;
                break;
            }
            f_old = f_new;
        }
        if f_old > best.fidelity {
            best = PhaseOptimum {
                fidelity: f_old,
                phases: phi,
            };
        }
    }
    Ok(best)
}

/// Maps a phase into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut p = phi.rem_euclid(tau);
    if p > std::f64::consts::PI {
        p -= tau;
    }
    p
}

/// Sign pattern of the CZ gate on two qubits.
pub fn cz_signs() -> Vec<C64> {
    let one = C64::new(1.0, 0.0);
    vec![one, one, one, -one]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pure(psi: &[C64]) -> DMatrix<C64> {
        let v = nalgebra::DVector::from_column_slice(psi);
        &v * v.adjoint()
    }

    #[test]
    fn recovers_local_phases() {
        let (p1, p2) = (0.7, -2.1);
        // output = exp(-i p1 |1><1|) exp(-i p2 |1><1|) CZ |++>
        let psi: Vec<C64> = (0..4)
            .map(|q| {
                let ph = if q & 2 != 0 { -p1 } else { 0.0 } + if q & 1 != 0 { -p2 } else { 0.0 };
                cz_signs()[q] * C64::from_polar(0.5, ph)
            })
            .collect();
        let opt = max_fidelity_over_phases(&pure(&psi), &cz_signs()).unwrap();
        assert!((opt.fidelity - 1.0).abs() < 1e-13);
        assert!((wrap_phase(opt.phases[0] + p1)).abs() < 1e-9);
        assert!((wrap_phase(opt.phases[1] + p2)).abs() < 1e-9);
    }

    #[test]
    fn identity_has_half_cz_fidelity() {
        // F = 1/4 at zero phases, 1/2 with phi_1 = phi_2 = pi/2
        let psi = vec![C64::new(0.5, 0.0); 4];
        let opt = max_fidelity_over_phases(&pure(&psi), &cz_signs()).unwrap();
        assert!((opt.fidelity - 0.5).abs() < 1e-12, "{}", opt.fidelity);
    }

    #[test]
    fn mixed_state_fidelity() {
        let mut rho = DMatrix::<C64>::identity(4, 4) * C64::new(0.25, 0.0);
        let opt = max_fidelity_over_phases(&rho, &cz_signs()).unwrap();
        assert!((opt.fidelity - 0.25).abs() < 1e-12);
        rho[(0, 3)] = C64::new(1.0, 0.0);
        assert!(max_fidelity_over_phases(&rho, &[C64::new(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn wrap_range() {
        for p in [-10.0, -3.2, 0.0, 3.1, 3.2, 100.0] {
            let w = wrap_phase(p);
            assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
            assert!((C64::from_polar(1.0, p) - C64::from_polar(1.0, w)).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn optimum_beats_grid(p1 in -3.0f64..3.0, p2 in -3.0f64..3.0, mix in 0.0f64..0.5, cphase in 2.5f64..3.8) {
            let psi: Vec<C64> = (0..4)
                .map(|q| {
                    let ph = if q & 2 != 0 { p1 } else { 0.0 } + if q & 1 != 0 { p2 } else { 0.0 } + if q == 3 { cphase } else { 0.0 };
                    C64::from_polar(0.5, ph)
                })
                .collect();
            let rho = pure(&psi) * C64::new(1.0 - mix, 0.0) + DMatrix::<C64>::identity(4, 4) * C64::new(mix / 4.0, 0.0);
            let opt = max_fidelity_over_phases(&rho, &cz_signs()).unwrap();
            prop_assert!(opt.fidelity <= 1.0 + 1e-12);
            let n = 48;
            for a in 0..n {
                for b in 0..n {
                    let phi = [a as f64 * std::f64::consts::TAU / n as f64, b as f64 * std::f64::consts::TAU / n as f64];
                    let v: Vec<C64> = (0..4).map(|q| {
                        let ph = if q & 2 != 0 { phi[0] } else { 0.0 } + if q & 1 != 0 { phi[1] } else { 0.0 };
                        cz_signs()[q] * C64::from_polar(0.5, ph)
                    }).collect();
                    let f = (nalgebra::DVector::from_column_slice(&v).adjoint() * &rho * nalgebra::DVector::from_column_slice(&v))[(0, 0)].re;
                    prop_assert!(f <= opt.fidelity + 1e-10);
                }
            }
        }
    }
}
