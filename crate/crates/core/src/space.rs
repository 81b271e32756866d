//! Product basis of auxiliary atom, qubit atoms and cavity mode.
//!
//! Ordering is auxiliary level slowest, then qubits with qubit 1 most
//! significant, then photon number fastest.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::Scheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuxLevel {
    G,
    F,
    E,
    E2,
}

impl AuxLevel {
    pub fn levels(scheme: Scheme) -> &'static [AuxLevel] {
        match scheme {
            Scheme::DirectDrive => &[AuxLevel::G, AuxLevel::F, AuxLevel::E],
            Scheme::TwoPhoton => &[AuxLevel::G, AuxLevel::F, AuxLevel::E, AuxLevel::E2],
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QubitLevel {
    Zero,
    One,
    Excited,
    /// Population lost from the qubit subspace by spontaneous emission.
    Lost,
}

impl QubitLevel {
    pub const ALL: [QubitLevel; 4] = [
        QubitLevel::Zero,
        QubitLevel::One,
        QubitLevel::Excited,
        QubitLevel::Lost,
    ];

    fn from_code(c: usize) -> Self {
        Self::ALL[c]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub aux: AuxLevel,
    pub qubits: Vec<QubitLevel>,
    pub photons: usize,
}

impl BasisLabel {
    pub fn new(aux: AuxLevel, qubits: Vec<QubitLevel>, photons: usize) -> Self {
        BasisLabel {
            aux,
            qubits,
            photons,
        }
    }

    /// `|aux, photons, q>` with `q` given as computational bits.
    pub fn computational(aux: AuxLevel, bits: &[bool], photons: usize) -> Self {
        let qubits = bits
            .iter()
            .map(|&b| if b { QubitLevel::One } else { QubitLevel::Zero })
            .collect();
        BasisLabel {
            aux,
            qubits,
            photons,
        }
    }

    pub fn excitations(&self) -> usize {
        self.photons
            + usize::from(matches!(self.aux, AuxLevel::E | AuxLevel::E2))
            + self
                .qubits
                .iter()
                .filter(|&&q| q == QubitLevel::Excited)
                .count()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let aux = match self.aux {
            AuxLevel::G => "g",
            AuxLevel::F => "f",
            AuxLevel::E => "E",
            AuxLevel::E2 => "E2",
        };
        write!(f, "|{aux},")?;
        for q in &self.qubits {
            let s = match q {
                QubitLevel::Zero => "0",
                QubitLevel::One => "1",
                QubitLevel::Excited => "e",
                QubitLevel::Lost => "o",
            };
            write!(f, "{s}")?;
        }
        write!(f, ",{}>", self.photons)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    pub scheme: Scheme,
    pub n_qubits: usize,
    pub photon_cutoff: usize,
}

impl Basis {
    pub fn new(scheme: Scheme, n_qubits: usize, photon_cutoff: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("basis needs at least one qubit"));
        }
        if n_qubits > 12 {
            return Err(Error::invalid("full basis limited to 12 qubits"));
        }
        Ok(Basis {
            scheme,
            n_qubits,
            photon_cutoff,
        })
    }

    pub fn n_aux(&self) -> usize {
        AuxLevel::levels(self.scheme).len()
    }

    fn n_photon(&self) -> usize {
        self.photon_cutoff + 1
    }

    fn n_qubit_configs(&self) -> usize {
        4usize.pow(self.n_qubits as u32)
    }

    pub fn dim(&self) -> usize {
        self.n_aux() * self.n_qubit_configs() * self.n_photon()
    }

    pub fn index(&self, label: &BasisLabel) -> Result<usize> {
        if label.qubits.len() != self.n_qubits {
            return Err(Error::invalid("label has wrong number of qubits"));
        }
        if label.photons > self.photon_cutoff {
            return Err(Error::OutOfRange {
                what: "photons",
                value: label.photons as f64,
                range: format!("0..={}", self.photon_cutoff),
            });
        }
        if label.aux.index() >= self.n_aux() {
            return Err(Error::invalid("auxiliary level not present in this scheme"));
        }
        let code = label
            .qubits
            .iter()
            .fold(0usize, |acc, &q| acc * 4 + q as usize);
        Ok((label.aux.index() * self.n_qubit_configs() + code) * self.n_photon() + label.photons)
    }

    pub fn label(&self, index: usize) -> BasisLabel {
        let photons = index % self.n_photon();
        let rest = index / self.n_photon();
        let mut code = rest % self.n_qubit_configs();
        let aux = AuxLevel::levels(self.scheme)[rest / self.n_qubit_configs()];
        let mut qubits = vec![QubitLevel::Zero; self.n_qubits];
        for k in (0..self.n_qubits).rev() {
            qubits[k] = QubitLevel::from_code(code % 4);
            code /= 4;
        }
        BasisLabel {
            aux,
            qubits,
            photons,
        }
    }

    pub fn labels(&self) -> impl Iterator<Item = BasisLabel> + '_ {
        (0..self.dim()).map(move |i| self.label(i))
    }

    /// Indices of `|aux, 0 photons, q>` for all computational configurations
    /// `q`, in binary order with qubit 1 most significant.
    pub fn computational_indices(&self, aux: AuxLevel) -> Vec<usize> {
        (0..1usize << self.n_qubits)
            .map(|bits| {
                let b: Vec<bool> = (0..self.n_qubits)
                    .map(|k| bits >> (self.n_qubits - 1 - k) & 1 == 1)
                    .collect();
                self.index(&BasisLabel::computational(aux, &b, 0))
                    .expect("computational label is always in range")
            })
            .collect()
    }
}

/// Sparse operator stored as unsorted triplets with unique positions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseOp {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseOp {
    pub fn zero(dim: usize) -> Self {
        SparseOp {
            dim,
            entries: Vec::new(),
        }
    }

    /// Merges duplicates and drops exact zeros.
    pub fn from_map(dim: usize, map: BTreeMap<(usize, usize), C64>) -> Self {
        let entries = map
            .into_iter()
            .filter(|(_, v)| *v != C64::new(0.0, 0.0))
            .map(|((i, j), v)| (i, j, v))
            .collect();
        SparseOp { dim, entries }
    }

    pub fn adjoint(&self) -> Self {
        SparseOp {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (j, i, v.conj()))
                .collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        SparseOp {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (i, j, v * s))
                .collect(),
        }
    }

    pub fn add(&self, other: &SparseOp) -> Self {
        let mut map = BTreeMap::new();
        for &(i, j, v) in self.entries.iter().chain(&other.entries) {
            *map.entry((i, j)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        SparseOp::from_map(self.dim, map)
    }

    /// `self^dagger self`.
    pub fn dagger_self(&self) -> Self {
        let mut by_row: BTreeMap<usize, Vec<(usize, C64)>> = BTreeMap::new();
        for &(i, j, v) in &self.entries {
            by_row.entry(i).or_default().push((j, v));
        }
        let mut map = BTreeMap::new();
        for row in by_row.values() {
            for &(a, va) in row {
                for &(b, vb) in row {
                    *map.entry((a, b)).or_insert(C64::new(0.0, 0.0)) += va.conj() * vb;
                }
            }
        }
        SparseOp::from_map(self.dim, map)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }

    /// `y = self x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Restriction to the index subset `keep` (new index = position in `keep`).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (n, &k) in keep.iter().enumerate() {
            pos[k] = n;
        }
        SparseOp {
            dim: keep.len(),
            entries: self
                .entries
                .iter()
                .filter(|&&(i, j, _)| pos[i] != usize::MAX && pos[j] != usize::MAX)
                .map(|&(i, j, v)| (pos[i], pos[j], v))
                .collect(),
        }
    }
}

/// Dense operator tied to the basis it acts on.
#[derive(Clone, Debug)]
pub struct OperatorRep {
    pub matrix: DMatrix<C64>,
    pub basis: Arc<Basis>,
}

impl OperatorRep {
    pub fn from_sparse(op: &SparseOp, basis: Arc<Basis>) -> Self {
        OperatorRep {
            matrix: op.to_dense(),
            basis,
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().all(|z| z.norm() <= tol)
    }
}

/// Diagonal projector onto basis states selected by `pred`.
pub fn projector_sector(basis: &Basis, pred: impl Fn(&BasisLabel) -> bool) -> SparseOp {
    let entries = basis
        .labels()
        .enumerate()
        .filter(|(_, l)| pred(l))
        .map(|(i, _)| (i, i, C64::new(1.0, 0.0)))
        .collect();
    SparseOp {
        dim: basis.dim(),
        entries,
    }
}
