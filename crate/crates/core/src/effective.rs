//! Effective ground-state dynamics after adiabatic elimination of the
//! excited manifold.
//!
//! For every sector `n` (number of qubits in `|1>`) the weak drive produces a
//! light shift `delta` and a set of effective jump amplitudes:
//! `r0` (photon leaking out of the cavity), `rf` (auxiliary decay to `|f>`),
//! `rg` (auxiliary decay back to `|g>`, not heralded) and `rk` (emission of
//! one qubit that holds an excitation). The heralded failure rate is
//! `|r0|^2 + |rf|^2 + n |rk|^2`.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{build_model, no_jump_hamiltonian, Channel};
use crate::params::{Scheme, SystemParams};
use crate::space::{AuxLevel, BasisLabel, QubitLevel};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const COND_LIMIT: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorCoefficients {
    pub n: usize,
    /// Light shift of the sector's ground state.
    pub delta: f64,
    pub r0: C64,
    pub rg: C64,
    pub rf: C64,
    /// Zero for `n = 0`.
    pub rk: C64,
}

impl SectorCoefficients {
    /// Heralded (detectable) decay rate.
    pub fn gamma_detectable(&self) -> f64 {
        self.r0.norm_sqr() + self.rf.norm_sqr() + self.n as f64 * self.rk.norm_sqr()
    }

    /// Undetected return to `|g>`.
    pub fn gamma_undetectable(&self) -> f64 {
        self.rg.norm_sqr()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    pub sectors: Vec<SectorCoefficients>,
}

impl EffectiveModel {
    pub fn sector(&self, n: usize) -> &SectorCoefficients {
        &self.sectors[n]
    }

    pub fn deltas(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.delta).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.sectors.iter().map(|s| s.gamma_detectable()).collect()
    }

    /// `max Gamma / min Gamma - 1` over sectors.
    pub fn gamma_spread(&self) -> f64 {
        let g = self.gammas();
        let max = g.iter().cloned().fold(f64::MIN, f64::max);
        let min = g.iter().cloned().fold(f64::MAX, f64::min);
        max / min - 1.0
    }
}

struct Reduced {
    de_aux: C64,
    de_q: C64,
    de_aux2: C64,
    mw: f64,
    c: f64,
    cf: f64,
}

fn reduced(p: &SystemParams) -> Reduced {
    let aux_width = match p.scheme {
        Scheme::DirectDrive => p.gamma_f + p.gamma_g,
        Scheme::TwoPhoton => p.gamma_f,
    };
    Reduced {
        de_aux: C64::new(p.delta_aux, -aux_width / 2.0) / p.gamma,
        de_q: C64::new(p.delta_qubit, -p.gamma / 2.0) / p.gamma,
        de_aux2: C64::new(p.delta_aux2, -p.gamma_g / 2.0) / p.gamma,
        mw: p.omega_mw / p.gamma,
        c: p.cooperativity(),
        cf: p.cooperativity_aux(),
    }
}

/// Closed-form sector coefficients for a sector with `n` qubits in `|1>`.
///
/// `n` may exceed `params.n_qubits`; the formulas only depend on the count.
pub fn sector_closed_form(params: &SystemParams, n: usize) -> Result<SectorCoefficients> {
    let r = reduced(params);
    let nf = n as f64;
    let gamma = params.gamma;
    let omega = params.omega;
    let d_n = r.de_q * (I * r.de_aux / 2.0 + r.cf) + nf * r.de_aux * r.c;
    let q_n = I * r.de_q / 2.0 + nf * r.c;
    let sg = gamma.sqrt();
    let sqrt_cf = r.cf.sqrt();
    let sqrt_ccf = (r.cf * r.c).sqrt();

    let (delta, r0, rg, rf, rk) = match params.scheme {
        Scheme::DirectDrive => {
            if d_n.norm() == 0.0 {
                return Err(Error::SingularParameters(format!("D_{n} vanishes")));
            }
            let delta = -omega * omega / (4.0 * gamma) * (q_n / d_n).re;
            let r0 = sqrt_cf * r.de_q * omega / (2.0 * sg * d_n);
            let rg = q_n * omega * params.gamma_g.sqrt() / (2.0 * gamma * d_n);
            let rf = q_n * omega * params.gamma_f.sqrt() / (2.0 * gamma * d_n);
            let rk = -sqrt_ccf * omega / (2.0 * sg * d_n);
            (delta, r0, rg, rf, rk)
        }
        Scheme::TwoPhoton => {
            let den = r.de_aux2 * d_n - r.mw * r.mw * q_n / 4.0;
            if den.norm() == 0.0 {
                return Err(Error::SingularParameters(format!(
                    "two-photon denominator vanishes for n = {n}"
                )));
            }
            let delta = -omega * omega / (4.0 * gamma) * (d_n / den).re;
            let r0 = -sqrt_cf * r.de_q * omega * r.mw / (4.0 * sg * den);
            let rg = omega * d_n * params.gamma_g.sqrt() / (2.0 * gamma * den);
            let rf = -omega * q_n * r.mw * params.gamma_f.sqrt() / (4.0 * gamma * den);
            let rk = sqrt_ccf * r.mw * omega / (4.0 * sg * den);
            (delta, r0, rg, rf, rk)
        }
    };
    Ok(SectorCoefficients {
        n,
        delta,
        r0,
        rg,
        rf,
        rk: if n == 0 { C64::new(0.0, 0.0) } else { rk },
    })
}

/// Closed-form coefficients for sectors `0..=params.n_qubits`.
pub fn effective_closed_form(params: &SystemParams) -> Result<EffectiveModel> {
    params.validate()?;
    let sectors = (0..=params.n_qubits)
        .map(|n| sector_closed_form(params, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(EffectiveModel { sectors })
}

/// Coefficients of the `n -> infinity` sector (direct drive).
///
/// Only the shift and the auxiliary decay survive: the cavity is so strongly
/// detuned by the qubits that neither photon leakage nor qubit excitation
/// plays a role.
pub fn sector_limit(params: &SystemParams) -> SectorCoefficients {
    let r = reduced(params);
    let g = params.gamma;
    let om = params.omega;
    let rf = om * params.gamma_f.sqrt() / (2.0 * g * r.de_aux);
    let rg = om * params.gamma_g.sqrt() / (2.0 * g * r.de_aux);
    SectorCoefficients {
        n: usize::MAX,
        delta: -om * om / (4.0 * g) * (1.0 / r.de_aux).re,
        r0: C64::new(0.0, 0.0),
        rg,
        rf,
        rk: C64::new(0.0, 0.0),
    }
}

fn ground_label(n_qubits: usize, n: usize, aux: AuxLevel) -> BasisLabel {
    let bits: Vec<bool> = (0..n_qubits).map(|k| k < n).collect();
    BasisLabel::computational(aux, &bits, 0)
}

/// Reference implementation: eliminates the excited manifold of the full
/// model numerically, with no knowledge of the closed form.
pub fn effective_generic(params: &SystemParams) -> Result<EffectiveModel> {
    params.validate()?;
    if params.n_qubits > 4 {
        return Err(Error::invalid("generic elimination limited to 4 qubits"));
    }
    let model = build_model(params)?;
    let basis = model.basis.clone();
    let h_nh = no_jump_hamiltonian(&model);
    let is_excited = |i: usize| basis.label(i).excitations() > 0;

    // excited states reachable from the driven ground states
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); basis.dim()];
    for &(i, j, _) in &h_nh.entries {
        if is_excited(i) && is_excited(j) {
            adj[j].push(i);
        }
    }
    let grounds: Vec<usize> = (0..=params.n_qubits)
        .map(|n| basis.index(&ground_label(params.n_qubits, n, AuxLevel::G)))
        .collect::<Result<_>>()?;
    let mut reach = BTreeSet::new();
    let mut stack: Vec<usize> = model
        .v
        .entries
        .iter()
        .filter(|(_, j, _)| grounds.contains(j))
        .map(|&(i, _, _)| i)
        .collect();
    while let Some(s) = stack.pop() {
        if reach.insert(s) {
            stack.extend(adj[s].iter().copied().filter(|x| !reach.contains(x)));
        }
    }
    let excited: Vec<usize> = reach.into_iter().collect();
    let m = excited.len();
    let mut pos = vec![usize::MAX; basis.dim()];
    for (k, &e) in excited.iter().enumerate() {
        pos[e] = k;
    }

    let mut h_ee = DMatrix::<C64>::zeros(m, m);
    for &(i, j, v) in &h_nh.entries {
        if pos[i] != usize::MAX && pos[j] != usize::MAX {
            h_ee[(pos[i], pos[j])] += v;
        }
    }
    let sv = h_ee.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin == 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    };
    if cond > COND_LIMIT {
        return Err(Error::IllConditioned(cond));
    }
    let lu = h_ee.clone().lu();
    let lu_adj = h_ee.adjoint().lu();

    let ng = grounds.len();
    let mut v_eg = DMatrix::<C64>::zeros(m, ng);
    for &(i, j, v) in &model.v.entries {
        if let Some(c) = grounds.iter().position(|&g| g == j) {
            if pos[i] != usize::MAX {
                v_eg[(pos[i], c)] += v;
            }
        }
    }
    let a = lu.solve(&v_eg).ok_or(Error::IllConditioned(cond))?;
    let b = lu_adj.solve(&v_eg).ok_or(Error::IllConditioned(cond))?;
    let h_eff = (v_eg.adjoint() * (&a + &b)) * C64::new(-0.5, 0.0);

    // amplitude <target| L A |ground_c>
    let amp = |channel: Channel, target: &BasisLabel, c: usize| -> Result<C64> {
        let l = model
            .lindblads
            .iter()
            .find(|l| l.channel == channel)
            .expect("every channel is built");
        let t = basis.index(target)?;
        let mut acc = C64::new(0.0, 0.0);
        for &(i, j, v) in &l.op.entries {
            if i == t && pos[j] != usize::MAX {
                acc += v * a[(pos[j], c)];
            }
        }
        Ok(acc)
    };

    let mut sectors = Vec::with_capacity(ng);
    for n in 0..ng {
        let f_label = ground_label(params.n_qubits, n, AuxLevel::F);
        let g_label = ground_label(params.n_qubits, n, AuxLevel::G);
        let rk = if n == 0 {
            C64::new(0.0, 0.0)
        } else {
            let mut lost = f_label.clone();
            lost.qubits[0] = QubitLevel::Lost;
            amp(Channel::QubitDecay(0), &lost, n)?
        };
        sectors.push(SectorCoefficients {
            n,
            delta: h_eff[(n, n)].re,
            r0: amp(Channel::Cavity, &f_label, n)?,
            rg: amp(Channel::AuxToG, &g_label, n)?,
            rf: amp(Channel::AuxToF, &f_label, n)?,
            rk,
        });
    }
    Ok(EffectiveModel { sectors })
}

/// Total heralded rate of every sector from the generic elimination, summing
/// the squared norm of each detectable effective jump acting on the sector's
/// ground state (no assumption on which final states are reached).
pub fn generic_detectable_rates(params: &SystemParams) -> Result<Vec<f64>> {
    let model = build_model(params)?;
    let basis = model.basis.clone();
    let h_nh = no_jump_hamiltonian(&model).to_dense();
    let dim = basis.dim();
    let excited: Vec<usize> = (0..dim)
        .filter(|&i| basis.label(i).excitations() > 0)
        .collect();
    let m = excited.len();
    let h_ee = DMatrix::from_fn(m, m, |r, c| h_nh[(excited[r], excited[c])]);
    let lu = h_ee.lu();
    let v = model.v.to_dense();
    let mut out = Vec::new();
    for n in 0..=params.n_qubits {
        let gi = basis.index(&ground_label(params.n_qubits, n, AuxLevel::G))?;
        let rhs = DVector::from_fn(m, |r, _| v[(excited[r], gi)]);
        let x = lu.solve(&rhs).ok_or(Error::IllConditioned(f64::INFINITY))?;
        let mut full = DVector::<C64>::zeros(dim);
        for (r, &e) in excited.iter().enumerate() {
            full[e] = x[r];
        }
        let mut rate = 0.0;
        for l in model.lindblads.iter().filter(|l| l.channel.is_detectable()) {
            rate += (l.op.to_dense() * &full).norm_squared();
        }
        out.push(rate);
    }
    Ok(out)
}

/// Leading-order behaviour of the effective parameters at large cooperativity,
/// with resonant qubits (`delta_e = 0`) and `delta_E = gamma sqrt(C)`.
///
/// Shifts are signed; for positive `delta_E` both are negative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticLimits {
    pub delta0: f64,
    /// Common shift of all sectors with `n > 0`.
    pub delta_n: f64,
    /// Effective drive on `|g> -> |E>` (two-photon scheme; equals `omega` otherwise).
    pub omega_eff: f64,
    /// Effective undetectable decay induced through `|E2>` (two-photon scheme).
    pub gamma_g_eff: f64,
    /// Light shift of `|g>` from the far-detuned `|E2>` (two-photon scheme).
    pub ac_stark: f64,
}

pub fn asymptotic_limits(params: &SystemParams) -> AsymptoticLimits {
    let g = params.gamma;
    let c = params.cooperativity();
    let (omega_eff, gamma_g_eff, ac_stark) = match params.scheme {
        Scheme::DirectDrive => (params.omega, params.gamma_g, 0.0),
        Scheme::TwoPhoton => {
            let d2 = params.delta_aux2;
            (
                params.omega * params.omega_mw / (2.0 * d2),
                params.gamma_g * params.omega_mw.powi(2) / (4.0 * d2 * d2),
                params.omega.powi(2) / (4.0 * d2),
            )
        }
    };
    AsymptoticLimits {
        delta0: -params.delta_aux * omega_eff.powi(2) / (16.0 * g * g * c * c),
        delta_n: -omega_eff.powi(2) / (4.0 * g * c.sqrt()),
        omega_eff,
        gamma_g_eff,
        ac_stark,
    }
}

/// Populations and fidelity of the conditional (no-herald) state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalOutcome {
    pub success_probability: f64,
    pub fidelity: f64,
}

/// Evolves the sector-resolved ground-state density matrix under the
/// effective master equation conditioned on no herald, starting from the
/// uniform superposition of all computational states.
///
/// `weights[n]` is the fraction of configurations in sector `n` (binomial
/// weights for a product `|+>` input) and `ideal[n]` is the target amplitude
/// phase of that sector.
pub fn conditional_sector_evolution(
    sectors: &[SectorCoefficients],
    weights: &[f64],
    ideal: &[C64],
    t: f64,
) -> Result<ConditionalOutcome> {
    if sectors.len() != weights.len() || sectors.len() != ideal.len() {
        return Err(Error::invalid("sector, weight and ideal lengths differ"));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("time must be >= 0, got {t}")));
    }
    let mut p = 0.0;
    let mut overlap = C64::new(0.0, 0.0);
    for (a, sa) in sectors.iter().enumerate() {
        let loss_a = sa.gamma_detectable() + sa.gamma_undetectable();
        for (b, sb) in sectors.iter().enumerate() {
            let loss_b = sb.gamma_detectable() + sb.gamma_undetectable();
            let rate =
                C64::new(-(loss_a + loss_b) / 2.0, -(sa.delta - sb.delta)) + sa.rg * sb.rg.conj();
            let e = (rate * t).exp();
            if a == b {
                p += weights[a] * e.re;
            }
            overlap += weights[a] * weights[b] * ideal[a].conj() * e * ideal[b];
        }
    }
    if p <= 0.0 {
        return Err(Error::invalid(
            "no population left in the conditional state",
        ));
    }
    Ok(ConditionalOutcome {
        success_probability: p,
        fidelity: overlap.re / p,
    })
}

/// Binomial weights `C(n_qubits, n) / 2^n_qubits`, computed in log space.
pub fn binomial_weights(n_qubits: usize) -> Vec<f64> {
    let ln2 = std::f64::consts::LN_2;
    let mut ln_fact = vec![0.0f64; n_qubits + 1];
    for k in 1..=n_qubits {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    (0..=n_qubits)
        .map(|n| {
            (ln_fact[n_qubits] - ln_fact[n] - ln_fact[n_qubits - n] - n_qubits as f64 * ln2).exp()
        })
        .collect()
}

/// Leading residual gate error of the two-photon scheme once the detunings
/// equalize the heralded rates.
///
/// The first term comes from the finite `|E2>` linewidth and is negative; the
/// second from the microwave-induced decay and falls off as `1/delta_E2^2`.
pub fn two_photon_residual_error(
    alpha: f64,
    beta: f64,
    cooperativity: f64,
    delta_e2: f64,
    gamma_g: f64,
    omega_mw: f64,
    gamma: f64,
) -> Result<f64> {
    if delta_e2 == 0.0 || cooperativity <= 0.0 || alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::invalid(
            "residual error needs delta_E2 != 0 and positive C, alpha, beta",
        ));
    }
    let pi = std::f64::consts::PI;
    let (a, b) = (alpha, beta);
    let term1 = (a * a - 4.0 * a * b - 6.0 * b * b) * pi * pi / (128.0 * b * b)
        * (gamma_g / delta_e2).powi(4);
    let coeff = (a * a + 4.0 * a * b + 6.0 * b * b) * pi
        / (16.0 * (a * b).sqrt() * (a + 2.0 * b) * (a + 5.0 * b));
    let term2 = coeff * gamma_g * omega_mw * omega_mw
        / (gamma * delta_e2 * delta_e2 * cooperativity.sqrt());
    Ok(term1 + term2)
}
