//! Infinitesimal Darboux transformations.
//!
//! Letting the left spectral parameter of a general step approach the right
//! one, `nu = mu + delta`, the dressed matrices expand as
//! `U + delta U1`, `A + delta A1` with
//!
//! ```text
//! U1 = [J, P0],    A1 = 2 alpha(mu) [A, P0],    P0 = phi (x) chi / (chi, phi)
//! ```
//!
//! where `phi` is a right and `chi` a left solution at the same `mu`, so
//! `(chi, phi)` is constant. `(U1, A1)` solves the linearization of the
//! zero-curvature system
//!
//! ```text
//! U1_zeta = [J, <A1>] / 2
//! A1_tau  = [U + i x J / 2, A1] + [U1, A]
//! ```
//!
//! which is linear, so any weighted sum of such terms is again a solution.
//! A term `beta P0` paired with `beta^* P0^+` at weight `-alpha(mu)^*`
//! (the same construction at `-mu^*`) yields an anti-Hermitian `U1` and a
//! Hermitian `A1`.

use crate::darboux::{dress_once_general, general_projector};
use crate::error::{Error, Result};
use crate::linalg::commutator;
use crate::model::{alpha, report, scan_max, Grid2D, MBFieldState, ResidualOptions, ResidualReport};
use crate::seeds::WaveConstants;
use crate::{Matrix3, Vector3, C64};

/// One symmetry term `beta_i phi_i (x) chi_i` of a contour sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryTerm {
    pub mu: C64,
    pub beta: C64,
    pub right: WaveConstants,
    pub left: WaveConstants,
}

/// Discretized contour: a finite list of symmetry terms.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourSpec {
    pub terms: Vec<SymmetryTerm>,
    /// Adds the Hermitian partner of every term so the output obeys the reduction.
    pub hermitian_pairing: bool,
}

/// One evaluated contribution `beta Q` with `Q = P0` or its adjoint.
#[derive(Clone, Copy, Debug)]
struct Component {
    mu: C64,
    right: Vector3,
    left: Vector3,
    /// `beta / (chi, phi)` with the pairing fixed at construction.
    weight: C64,
    adjoint: bool,
}

/// Linearized solution `(U1, A1)` around a base state.
#[derive(Clone, Debug)]
pub struct PerturbationField {
    base: MBFieldState,
    components: Vec<Component>,
}

impl PerturbationField {
    /// The identically vanishing perturbation.
    pub fn zero(base: &MBFieldState) -> Self {
        Self { base: base.clone(), components: Vec::new() }
    }

    pub fn base(&self) -> &MBFieldState {
        &self.base
    }

    /// `s (U1, A1)`.
    pub fn scaled(&self, s: C64) -> Self {
        // adjoint components conjugate their weight when evaluated
        let components = self
            .components
            .iter()
            .map(|c| Component { weight: if c.adjoint { c.weight * s.conj() } else { c.weight * s }, ..*c })
            .collect();
        Self { base: self.base.clone(), components }
    }

    /// Sum of two perturbations of the same base.
    pub fn sum(&self, other: &Self) -> Self {
        let mut components = self.components.clone();
        components.extend_from_slice(&other.components);
        Self { base: self.base.clone(), components }
    }

    /// `Q` for one component at a point, unnormalized by the pairing.
    fn component_matrix(&self, c: &Component, tau: f64, zeta: f64) -> Result<Matrix3> {
        let phi = self.base.wavefunction(c.mu, &c.right, tau, zeta)?;
        let chi = self.base.wavefunction_left(c.mu, &c.left, tau, zeta)?;
        let q = Matrix3::outer(&phi, &chi).scale(c.weight);
        Ok(if c.adjoint { q.adjoint() } else { q })
    }

    /// `sum beta_i Q_i` and `sum alpha_i beta_i Q_i` per node.
    fn sums(&self, tau: f64, zeta: f64) -> Result<(Matrix3, Vec<Matrix3>)> {
        let det = self.base.detuning();
        let mut q_sum = Matrix3::zeros();
        let mut weighted = vec![Matrix3::zeros(); det.len()];
        for c in &self.components {
            let q = self.component_matrix(c, tau, zeta)?;
            q_sum += q;
            for (w, x) in weighted.iter_mut().zip(det.offsets()) {
                let al = alpha(c.mu, x, 0.0)?;
                let al = if c.adjoint { -al.conj() } else { al };
                *w += q.scale(al);
            }
        }
        Ok((q_sum, weighted))
    }

    pub fn u1(&self, tau: f64, zeta: f64) -> Result<Matrix3> {
        let (q, _) = self.sums(tau, zeta)?;
        Ok(commutator(&Matrix3::j(), &q))
    }

    pub fn a1(&self, tau: f64, zeta: f64) -> Result<Vec<Matrix3>> {
        let base = self.base.point(tau, zeta)?;
        let (_, weighted) = self.sums(tau, zeta)?;
        Ok(base.bloch.iter().zip(&weighted).map(|(a, w)| commutator(a, w).scale_real(2.0)).collect())
    }
}

fn pairing_at(state: &MBFieldState, mu: C64, right: &WaveConstants, left: &WaveConstants, tau: f64, zeta: f64) -> Result<C64> {
    let phi = state.wavefunction(mu, &right.0, tau, zeta)?;
    let chi = state.wavefunction_left(mu, &left.0, tau, zeta)?;
    // reuse the projector's degeneracy guard
    general_projector(&phi, &chi)?;
    Ok(chi.pair(&phi))
}

/// Linearized solution from a right and a left solution at the same `mu`.
///
/// The pairing `(chi, phi)` is evaluated once at the origin and used as the
/// normalization everywhere.
pub fn infinitesimal_dt(state: &MBFieldState, mu: C64, right: &WaveConstants, left: &WaveConstants) -> Result<PerturbationField> {
    right.validate()?;
    left.validate()?;
    let s = pairing_at(state, mu, right, left, 0.0, 0.0)?;
    Ok(PerturbationField {
        base: state.clone(),
        components: vec![Component { mu, right: right.0, left: left.0, weight: s.inv(), adjoint: false }],
    })
}

/// `infinitesimal_dt` plus its Hermitian partner: the reduction-preserving field.
pub fn infinitesimal_dt_paired(state: &MBFieldState, mu: C64, right: &WaveConstants, left: &WaveConstants) -> Result<PerturbationField> {
    let f = infinitesimal_dt(state, mu, right, left)?;
    Ok(with_partners(f))
}

fn with_partners(mut f: PerturbationField) -> PerturbationField {
    let partners: Vec<Component> = f.components.iter().map(|c| Component { adjoint: !c.adjoint, ..*c }).collect();
    f.components.extend(partners);
    f
}

/// Relative variation of `(chi, phi)` over a grid.
pub fn inner_product_drift(state: &MBFieldState, mu: C64, right: &WaveConstants, left: &WaveConstants, grid: &Grid2D) -> Result<f64> {
    let s0 = pairing_at(state, mu, right, left, 0.0, 0.0)?;
    let v =
        scan_max(grid, 1, |t, z| Ok(vec![(pairing_at(state, mu, right, left, t, z).map_err(|e| e.at(t, z))? - s0).norm() / s0.norm()]))?;
    Ok(v[0])
}

/// `sum_i beta_i phi_i (x) chi_i`, optionally with Hermitian partners.
pub fn superpose_symmetries(state: &MBFieldState, spec: &ContourSpec) -> Result<PerturbationField> {
    let mut out = PerturbationField::zero(state);
    for (i, t) in spec.terms.iter().enumerate() {
        let f = infinitesimal_dt(state, t.mu, &t.right, &t.left).map_err(|e| Error::Term { index: i, source: Box::new(e) })?;
        let f = f.scaled(t.beta);
        out = out.sum(&if spec.hermitian_pairing { with_partners(f) } else { f });
    }
    Ok(out)
}

const LINEARIZED_EQUATIONS: [&str; 2] = ["zeta_line", "tau_line"];

/// Residuals of the linearized zero-curvature system.
pub fn linearized_residual(pert: &PerturbationField, grid: &Grid2D, opts: &ResidualOptions) -> Result<ResidualReport> {
    let stencil = opts.stencil()?;
    let base = pert.base();
    let det = base.detuning().clone();
    let j = Matrix3::j();
    let values = scan_max(grid, LINEARIZED_EQUATIONS.len(), |tau, zeta| {
        let wrap = |e: Error| e.at(tau, zeta);
        let p = base.point(tau, zeta).map_err(wrap)?;
        let u1 = pert.u1(tau, zeta).map_err(wrap)?;
        let a1 = pert.a1(tau, zeta).map_err(wrap)?;
        let du1 = stencil.derivative(zeta, |z| pert.u1(tau, z).map_err(|e| e.at(tau, z)))?;
        let da1 = stencil.derivative(tau, |t| pert.a1(t, zeta).map_err(|e| e.at(t, zeta)))?;
        let zeta_line = (du1 - commutator(&j, &det.average_matrices(&a1)).scale_real(0.5)).max_abs();
        let u = p.u_matrix();
        let mut tau_line = 0.0f64;
        for (i, ((a, a1), da1)) in p.bloch.iter().zip(&a1).zip(&da1).enumerate() {
            let gen = u + j.scale(C64::new(0.0, 0.5 * det.offset(i)));
            let r = *da1 - commutator(&gen, a1) - commutator(&u1, a);
            tau_line = tau_line.max(r.max_abs());
        }
        Ok(vec![zeta_line, tau_line])
    })?;
    Ok(report("linearized", &LINEARIZED_EQUATIONS, values, grid, &stencil, opts.order))
}

/// One row of a delta-convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub delta: C64,
    pub u_error: f64,
    pub a_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Empirical orders between consecutive rows, `(u, a)`.
    pub fn orders(&self) -> Vec<(f64, f64)> {
        self.rows
            .windows(2)
            .map(|w| {
                let r = (w[0].delta.norm() / w[1].delta.norm()).ln();
                ((w[0].u_error / w[1].u_error).ln() / r, (w[0].a_error / w[1].a_error).ln() / r)
            })
            .collect()
    }

    pub fn min_order(&self) -> f64 {
        self.orders().iter().fold(f64::INFINITY, |m, (u, a)| m.min(*u).min(*a))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re_delta,im_delta,u_error,a_error\n");
        for r in &self.rows {
            out.push_str(&format!("{:.17e},{:.17e},{:.17e},{:.17e}\n", r.delta.re, r.delta.im, r.u_error, r.a_error));
        }
        out
    }
}

/// Minimum empirical order accepted by [`finite_difference_validation`].
pub const REQUIRED_ORDER: f64 = 0.9;

/// Compares `(U[1]_delta - U) / delta` and the Bloch analogue, from general
/// steps at `nu = mu + delta`, against the infinitesimal field at the given
/// points. Fails unless the error falls at least linearly in `delta`.
pub fn finite_difference_validation(
    state: &MBFieldState,
    mu: C64,
    right: &WaveConstants,
    left: &WaveConstants,
    deltas: &[C64],
    points: &[(f64, f64)],
) -> Result<ConvergenceTable> {
    if deltas.iter().any(|d| d.norm() == 0.0) {
        return Err(Error::TrivialStep { mu });
    }
    let pert = infinitesimal_dt(state, mu, right, left)?;
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let g = dress_once_general(state, mu, mu + delta, right, left)?;
        let (mut u_error, mut a_error) = (0.0f64, 0.0f64);
        for &(t, z) in points {
            let (du, da) = g.increments(t, z)?;
            let inv = delta.inv();
            u_error = u_error.max((du.scale(inv) - pert.u1(t, z)?).max_abs());
            for (d, a1) in da.iter().zip(pert.a1(t, z)?) {
                a_error = a_error.max((d.scale(inv) - a1).max_abs());
            }
        }
        rows.push(ConvergenceRow { delta, u_error, a_error });
    }
    let table = ConvergenceTable { rows };
    let order = table.min_order();
    if table.rows.len() >= 2 && !(order >= REQUIRED_ORDER) {
        return Err(Error::ConvergenceOrderTooLow { order, required: REQUIRED_ORDER });
    }
    Ok(table)
}
