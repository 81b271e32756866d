//! Hamiltonian and jump operators of the cavity + atoms system.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::params::{Scheme, SystemParams};
use crate::space::{AuxLevel, Basis, BasisLabel, QubitLevel, SparseOp};

/// Where a quantum jump sends the system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Photon leaking out of the cavity.
    Cavity,
    /// Auxiliary atom falling back to `|g>`; not heralded.
    AuxToG,
    /// Auxiliary atom decaying to `|f>`.
    AuxToF,
    /// Spontaneous emission of qubit atom `k` out of the qubit subspace.
    QubitDecay(usize),
}

impl Channel {
    /// Whether the jump is flagged by the herald (photon click or the
    /// auxiliary atom ending up outside `|g>`).
    pub fn is_detectable(self) -> bool {
        !matches!(self, Channel::AuxToG)
    }
}

#[derive(Clone, Debug)]
pub struct Lindblad {
    pub channel: Channel,
    pub op: SparseOp,
}

/// `H(t) = h_e + u(t) (v + v^dagger)`, with `v` the raising part of the drive.
#[derive(Clone, Debug)]
pub struct ModelSplit {
    pub basis: Arc<Basis>,
    pub h_e: SparseOp,
    pub v: SparseOp,
    pub lindblads: Vec<Lindblad>,
}

impl ModelSplit {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Hermitian drive term `v + v^dagger`.
    pub fn drive(&self) -> SparseOp {
        self.v.add(&self.v.adjoint())
    }

    pub fn hamiltonian_at(&self, u: f64) -> SparseOp {
        self.h_e.add(&self.drive().scale(C64::new(u, 0.0)))
    }
}

struct OpBuilder<'a> {
    basis: &'a Basis,
    map: BTreeMap<(usize, usize), C64>,
}

impl<'a> OpBuilder<'a> {
    fn new(basis: &'a Basis) -> Self {
        OpBuilder {
            basis,
            map: BTreeMap::new(),
        }
    }

    /// Adds `coeff |to><from|`, silently skipping targets beyond the photon cutoff.
    fn push(&mut self, to: &BasisLabel, from: usize, coeff: f64) {
        if coeff == 0.0 || to.photons > self.basis.photon_cutoff {
            return;
        }
        let i = self
            .basis
            .index(to)
            .expect("label built from a valid basis state");
        *self.map.entry((i, from)).or_insert(C64::new(0.0, 0.0)) += C64::new(coeff, 0.0);
    }

    fn finish(self) -> SparseOp {
        SparseOp::from_map(self.basis.dim(), self.map)
    }
}

/// Builds the free Hamiltonian, the drive and the jump operators.
pub fn build_model(params: &SystemParams) -> Result<ModelSplit> {
    params.validate()?;
    let basis = Arc::new(Basis::new(
        params.scheme,
        params.n_qubits,
        params.photon_cutoff,
    )?);
    let b = basis.as_ref();
    let two_photon = params.scheme == Scheme::TwoPhoton;
    let drive_target = if two_photon {
        AuxLevel::E2
    } else {
        AuxLevel::E
    };

    let mut h = OpBuilder::new(b);
    let mut v = OpBuilder::new(b);
    let mut cav = OpBuilder::new(b);
    let mut to_g = OpBuilder::new(b);
    let mut to_f = OpBuilder::new(b);
    let mut qubit_decay: Vec<OpBuilder> = (0..params.n_qubits).map(|_| OpBuilder::new(b)).collect();

    for (j, s) in b.labels().enumerate() {
        let n = s.photons;
        // diagonal detunings
        match s.aux {
            AuxLevel::E => h.push(&s, j, params.delta_aux),
            AuxLevel::E2 => h.push(&s, j, params.delta_aux2),
            _ => {}
        }
        let excited = s
            .qubits
            .iter()
            .filter(|&&q| q == QubitLevel::Excited)
            .count();
        h.push(&s, j, params.delta_qubit * excited as f64);

        // g_f (a |E><f| + a^dagger |f><E|)
        if s.aux == AuxLevel::F && n > 0 {
            let t = BasisLabel {
                aux: AuxLevel::E,
                photons: n - 1,
                ..s.clone()
            };
            h.push(&t, j, params.g_f * (n as f64).sqrt());
        }
        if s.aux == AuxLevel::E {
            let t = BasisLabel {
                aux: AuxLevel::F,
                photons: n + 1,
                ..s.clone()
            };
            h.push(&t, j, params.g_f * ((n + 1) as f64).sqrt());
        }

        // g (a |e><1| + a^dagger |1><e|) on every qubit
        for k in 0..params.n_qubits {
            match s.qubits[k] {
                QubitLevel::One if n > 0 => {
                    let mut t = s.clone();
                    t.qubits[k] = QubitLevel::Excited;
                    t.photons = n - 1;
                    h.push(&t, j, params.g * (n as f64).sqrt());
                }
                QubitLevel::Excited => {
                    let mut t = s.clone();
                    t.qubits[k] = QubitLevel::One;
                    t.photons = n + 1;
                    h.push(&t, j, params.g * ((n + 1) as f64).sqrt());
                    let mut lost = s.clone();
                    lost.qubits[k] = QubitLevel::Lost;
                    qubit_decay[k].push(&lost, j, params.gamma.sqrt());
                }
                _ => {}
            }
        }

        // microwave |E> <-> |E2>
        if two_photon {
            let partner = match s.aux {
                AuxLevel::E => Some(AuxLevel::E2),
                AuxLevel::E2 => Some(AuxLevel::E),
                _ => None,
            };
            if let Some(aux) = partner {
                let t = BasisLabel { aux, ..s.clone() };
                h.push(&t, j, params.omega_mw / 2.0);
            }
        }

        if s.aux == AuxLevel::G {
            let t = BasisLabel {
                aux: drive_target,
                ..s.clone()
            };
            v.push(&t, j, params.omega / 2.0);
        }

        if n > 0 {
            let t = BasisLabel {
                photons: n - 1,
                ..s.clone()
            };
            cav.push(&t, j, (params.kappa * n as f64).sqrt());
        }
        if s.aux == drive_target {
            let t = BasisLabel {
                aux: AuxLevel::G,
                ..s.clone()
            };
            to_g.push(&t, j, params.gamma_g.sqrt());
        }
        if s.aux == AuxLevel::E {
            let t = BasisLabel {
                aux: AuxLevel::F,
                ..s.clone()
            };
            to_f.push(&t, j, params.gamma_f.sqrt());
        }
    }

    let mut lindblads = vec![
        Lindblad {
            channel: Channel::Cavity,
            op: cav.finish(),
        },
        Lindblad {
            channel: Channel::AuxToG,
            op: to_g.finish(),
        },
        Lindblad {
            channel: Channel::AuxToF,
            op: to_f.finish(),
        },
    ];
    for (k, op) in qubit_decay.into_iter().enumerate() {
        lindblads.push(Lindblad {
            channel: Channel::QubitDecay(k),
            op: op.finish(),
        });
    }

    Ok(ModelSplit {
        h_e: h.finish(),
        v: v.finish(),
        lindblads,
        basis,
    })
}

/// `H_e - (i/2) sum_j L_j^dagger L_j`.
pub fn no_jump_hamiltonian(model: &ModelSplit) -> SparseOp {
    let mut acc = model.h_e.clone();
    for l in &model.lindblads {
        acc = acc.add(&l.op.dagger_self().scale(C64::new(0.0, -0.5)));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::OperatorRep;

    fn params(scheme: Scheme) -> SystemParams {
        let p = SystemParams::new(scheme, 2, 10.0, 100.0)
            .with_aux_ratios(0.7, 1.3)
            .with_detunings(2.0, -0.5)
            .with_omega(0.8)
            .with_gamma_g(0.3);
        match scheme {
            Scheme::TwoPhoton => p.with_two_photon(40.0, 3.0),
            Scheme::DirectDrive => p,
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        for scheme in [Scheme::DirectDrive, Scheme::TwoPhoton] {
            let m = build_model(&params(scheme)).unwrap();
            let h = OperatorRep::from_sparse(&m.hamiltonian_at(0.7), m.basis.clone());
            assert!(h.is_hermitian(1e-14));
            assert_eq!(h.matrix.nrows(), m.dim());
        }
    }

    #[test]
    fn hamiltonian_conserves_excitations() {
        let m = build_model(&params(Scheme::TwoPhoton)).unwrap();
        for &(i, j, _) in &m.h_e.entries {
            assert_eq!(
                m.basis.label(i).excitations(),
                m.basis.label(j).excitations()
            );
        }
    }

    #[test]
    fn cavity_operator_values() {
        let m = build_model(&params(Scheme::DirectDrive)).unwrap();
        let cav = &m.lindblads[0].op;
        for &(i, j, v) in &cav.entries {
            let (a, b) = (m.basis.label(i), m.basis.label(j));
            assert_eq!(a.photons + 1, b.photons);
            assert!((v.re - (100.0 * b.photons as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn drive_connects_g_to_driven_level() {
        for (scheme, target) in [
            (Scheme::DirectDrive, AuxLevel::E),
            (Scheme::TwoPhoton, AuxLevel::E2),
        ] {
            let m = build_model(&params(scheme)).unwrap();
            assert!(!m.v.entries.is_empty());
            for &(i, j, v) in &m.v.entries {
                assert_eq!(m.basis.label(j).aux, AuxLevel::G);
                assert_eq!(m.basis.label(i).aux, target);
                assert!((v.re - 0.4).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn no_jump_antihermitian_part_is_decay() {
        let m = build_model(&params(Scheme::DirectDrive)).unwrap();
        let h = no_jump_hamiltonian(&m).to_dense();
        let anti = (&h - h.adjoint()) * C64::new(0.0, 0.5);
        let mut expect = nalgebra::DMatrix::<C64>::zeros(m.dim(), m.dim());
        for l in &m.lindblads {
            let d = l.op.to_dense();
            expect += d.adjoint() * d * C64::new(0.5, 0.0);
        }
        assert!((anti - expect).norm() < 1e-12);
    }

    #[test]
    fn detectable_channels() {
        assert!(Channel::Cavity.is_detectable());
        assert!(Channel::AuxToF.is_detectable());
        assert!(Channel::QubitDecay(1).is_detectable());
        assert!(!Channel::AuxToG.is_detectable());
    }
}
