//! Binary Darboux transformations.
//!
//! A reduced step with spectral parameter `mu` and constants `C` takes the
//! seed solution `phi = Psi(mu) C`, forms the Hermitian projector
//! `P = phi phi^+ / (phi^+ phi)` and, with `c = mu + mu^*`, dresses
//!
//! ```text
//! e_-[1] = e_- + 2c P_31,    e_+[1] = e_+ + 2c P_32
//! A[1]   = A - 2c [alpha A P + alpha^* P A - (alpha + alpha^*) P A P]
//! a[1]   = a - 2c alpha^* P a
//! psi[1] = (1 - c P / (lambda + mu^*)) psi
//! ```
//!
//! with `alpha = alpha(mu, eta)` per broadening node. The Bloch update is a
//! similarity transform by the dressing matrix at `lambda = -i(eta - delta)/2`,
//! which is unitary there, so traces and pure-state norms are preserved.
//!
//! The general step pairs a right solution at `mu` with an independent left
//! solution at `nu`; it satisfies the zero-curvature equations but not the
//! Hermitian reduction, and reduces to the step above at `nu = -mu^*`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{commutator, projector_from_vector};
use crate::model::{alpha, DetuningModel, Grid2D, LaxSolution, MBFieldState, PointState, ZcrFields};
use crate::seeds::{seed_state, SeedBackground, WaveConstants};
use crate::{Matrix3, Projector, Vector3, C64};

/// Below this `|Re mu|` a step is treated as the identity and rejected.
pub const TRIVIAL_STEP_EPS: f64 = 1e-12;
/// Relative tolerance for pure-state norm conservation.
pub const NORM_DRIFT_TOL: f64 = 1e-10;
/// Spectral parameters closer than this count as equal.
pub const SPECTRAL_MATCH_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressingStep {
    pub mu: C64,
    pub constants: WaveConstants,
}

impl DressingStep {
    pub fn new(mu: C64, constants: WaveConstants) -> Self {
        Self { mu, constants }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.re.abs() > TRIVIAL_STEP_EPS) || !self.mu.is_finite() {
            return Err(Error::TrivialStep { mu: self.mu });
        }
        self.constants.validate()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DressingChain {
    pub seed: SeedBackground,
    pub steps: Vec<DressingStep>,
}

impl DressingChain {
    pub fn new(seed: SeedBackground, steps: Vec<DressingStep>) -> Self {
        Self { seed, steps }
    }

    /// Checks every step and rejects exactly repeated spectral parameters.
    pub fn validate(&self) -> Result<()> {
        self.seed.validate()?;
        for (i, step) in self.steps.iter().enumerate() {
            step.validate().map_err(|e| e.in_step(i))?;
            if self.steps[..i].iter().any(|s| (s.mu - step.mu).norm() <= SPECTRAL_MATCH_EPS) {
                return Err(Error::RepeatedSpectralParameter { mu: step.mu }.in_step(i));
            }
        }
        Ok(())
    }
}

/// Projector of one reduced step at `(tau, zeta)`.
pub fn step_projector(state: &MBFieldState, mu: C64, constants: &WaveConstants, tau: f64, zeta: f64) -> Result<Projector> {
    let phi = state.wavefunction(mu, &constants.0, tau, zeta)?;
    projector_from_vector(&phi).map_err(|e| e.at(tau, zeta))
}

/// One reduction-preserving step on top of `state`.
pub fn dress_once(state: &MBFieldState, mu: C64, constants: &WaveConstants) -> Result<MBFieldState> {
    DressingStep::new(mu, *constants).validate()?;
    check_spectral_parameter(state, mu)?;
    Ok(MBFieldState::new(DressedState::new(state.clone(), mu, constants.0, None)))
}

fn check_spectral_parameter(state: &MBFieldState, mu: C64) -> Result<()> {
    if let Some(&bp) = state.branch_points().iter().find(|bp| (**bp - mu).norm() <= SPECTRAL_MATCH_EPS) {
        return Err(Error::BranchPointAtE { lambda: bp });
    }
    if state.excluded_parameters().iter().any(|p| (*p - mu).norm() <= SPECTRAL_MATCH_EPS) {
        return Err(Error::DressingPole { lambda: mu });
    }
    Ok(())
}

/// Dresses per-node pure-state amplitudes with the step projector `p`.
///
/// Fails with `NormDriftExceeded` if any node's norm moves by more than
/// [`NORM_DRIFT_TOL`] relative to its input.
pub fn dress_pure(a: &[Vector3], mu: C64, p: &Projector, detuning: &DetuningModel) -> Result<Vec<Vector3>> {
    let c = 2.0 * mu.re;
    let p = p.matrix();
    a.iter()
        .zip(detuning.offsets())
        .map(|(a, x)| {
            let al = alpha(mu, x, 0.0)?;
            let out = *a - p.mul_vec(a).scale(al.conj() * (2.0 * c));
            let (n0, n1) = (a.norm(), out.norm());
            let drift = (n1 - n0).abs() / n0.max(f64::MIN_POSITIVE);
            if drift > NORM_DRIFT_TOL {
                return Err(Error::NormDriftExceeded { drift });
            }
            Ok(out)
        })
        .collect()
}

/// Dressed Bloch matrix `A[1]` for one node.
pub fn dress_bloch(a: &Matrix3, mu: C64, x: f64, p: &Projector) -> Result<Matrix3> {
    let c = 2.0 * mu.re;
    let al = alpha(mu, x, 0.0)?;
    let p = *p.matrix();
    let ap = *a * p;
    let pa = p * *a;
    let pap = pa * p;
    Ok(*a - (ap.scale(al) + pa.scale(al.conj()) - pap.scale(al + al.conj())).scale_real(2.0 * c))
}

/// Applies the chain to its seed.
///
/// Every step is validated up front; the composed state is then probed at
/// every grid point so a singular dressing surfaces here, tagged with the
/// step that produced it, rather than during later evaluation.
pub fn evaluate_chain(chain: &DressingChain, grid: &Grid2D) -> Result<MBFieldState> {
    chain.validate()?;
    grid.validate()?;
    let mut state = seed_state(&chain.seed)?;
    for (i, step) in chain.steps.iter().enumerate() {
        check_spectral_parameter(&state, step.mu).map_err(|e| e.in_step(i))?;
        state = MBFieldState::new(DressedState::new(state, step.mu, step.constants.0, Some(i)));
    }
    grid.points().par_iter().try_for_each(|&(t, z)| state.point(t, z).map(|_| ()))?;
    Ok(state)
}

struct DressedState {
    base: MBFieldState,
    mu: C64,
    constants: Vector3,
    step_index: Option<usize>,
}

impl DressedState {
    fn new(base: MBFieldState, mu: C64, constants: Vector3, step_index: Option<usize>) -> Self {
        Self { base, mu, constants, step_index }
    }

    fn tag(&self, e: Error) -> Error {
        match self.step_index {
            Some(i) => e.in_step(i),
            None => e,
        }
    }

    fn projector(&self, tau: f64, zeta: f64) -> Result<Projector> {
        let phi = self.base.wavefunction(self.mu, &self.constants, tau, zeta)?;
        projector_from_vector(&phi).map_err(|e| self.tag(e))
    }

    fn c(&self) -> f64 {
        2.0 * self.mu.re
    }
}

impl LaxSolution for DressedState {
    fn detuning(&self) -> &DetuningModel {
        self.base.detuning()
    }

    fn point(&self, tau: f64, zeta: f64) -> Result<PointState> {
        let base = self.base.point(tau, zeta)?;
        let p = self.projector(tau, zeta)?;
        let c = self.c();
        let pm = p.matrix();
        let e_minus = base.e_minus + pm[(2, 0)] * (2.0 * c);
        let e_plus = base.e_plus + pm[(2, 1)] * (2.0 * c);
        let bloch =
            base.bloch.iter().zip(self.detuning().offsets()).map(|(a, x)| dress_bloch(a, self.mu, x, &p)).collect::<Result<Vec<_>>>()?;
        let pure = match &base.pure {
            Some(a) => Some(dress_pure(a, self.mu, &p, self.detuning()).map_err(|e| self.tag(e))?),
            None => None,
        };
        Ok(PointState { e_minus, e_plus, bloch, pure })
    }

    fn fundamental(&self, lambda: C64, tau: f64, zeta: f64) -> Result<Matrix3> {
        let denom = lambda + self.mu.conj();
        if denom.norm() <= SPECTRAL_MATCH_EPS {
            return Err(Error::DressingPole { lambda });
        }
        let p = self.projector(tau, zeta)?;
        let d = Matrix3::identity() - p.matrix().scale(C64::new(self.c(), 0.0) / denom);
        Ok(d * self.base.fundamental(lambda, tau, zeta)?)
    }

    fn has_pure_state(&self) -> bool {
        self.base.has_pure_state()
    }

    fn maxwell_bloch(&self) -> bool {
        self.base.is_maxwell_bloch()
    }

    fn excluded_parameters(&self) -> Vec<C64> {
        let mut v = self.base.excluded_parameters();
        // psi[1](mu) C vanishes identically and -mu^* is a pole of the dressing
        v.push(self.mu);
        v.push(-self.mu.conj());
        v
    }

    fn branch_points(&self) -> Vec<C64> {
        self.base.branch_points()
    }
}

/// Output of a general two-parameter step. It carries `U` and the per-node
/// Bloch matrices, which need not satisfy the Hermitian reduction.
#[derive(Clone, Debug)]
pub struct GeneralDressedState {
    base: MBFieldState,
    mu: C64,
    nu: C64,
    c_right: Vector3,
    c_left: Vector3,
}

/// General step: right solution at `mu` with constants `c_right`, left
/// solution at `nu` with constants `c_left`, `P = phi (x) chi / (chi, phi)`.
pub fn dress_once_general(
    state: &MBFieldState,
    mu: C64,
    nu: C64,
    c_right: &WaveConstants,
    c_left: &WaveConstants,
) -> Result<GeneralDressedState> {
    c_right.validate()?;
    c_left.validate()?;
    Ok(GeneralDressedState { base: state.clone(), mu, nu, c_right: c_right.0, c_left: c_left.0 })
}

impl GeneralDressedState {
    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn nu(&self) -> C64 {
        self.nu
    }

    pub fn base(&self) -> &MBFieldState {
        &self.base
    }

    /// The rank-one (generally non-Hermitian) projector at `(tau, zeta)`.
    pub fn projector(&self, tau: f64, zeta: f64) -> Result<Matrix3> {
        let phi = self.base.wavefunction(self.mu, &self.c_right, tau, zeta)?;
        let chi = self.base.wavefunction_left(self.nu, &self.c_left, tau, zeta)?;
        general_projector(&phi, &chi).map_err(|e| e.at(tau, zeta))
    }

    /// `(U[1] - U, A[1] - A)` at a point.
    pub fn increments(&self, tau: f64, zeta: f64) -> Result<(Matrix3, Vec<Matrix3>)> {
        let base = self.base.point(tau, zeta)?;
        let p = self.projector(tau, zeta)?;
        let diff = self.mu - self.nu;
        let du = -commutator(&Matrix3::j(), &p).scale(diff);
        let dets = self.base.detuning();
        let da = base
            .bloch
            .iter()
            .zip(dets.offsets())
            .map(|(a, x)| {
                let (am, an) = (alpha(self.mu, x, 0.0)?, alpha(self.nu, x, 0.0)?);
                let ap = *a * p;
                let pa = p * *a;
                let pap = pa * p;
                Ok(-(ap.scale(am) - pa.scale(an) - pap.scale(am - an)).scale(diff * 2.0))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((du, da))
    }
}

/// `phi (x) chi / (chi, phi)`; fails when the pairing is negligible against
/// the sizes of the two factors.
pub fn general_projector(phi: &Vector3, chi: &Vector3) -> Result<Matrix3> {
    let s = chi.pair(phi);
    let scale = phi.norm() * chi.norm();
    if !(s.norm() > 1e-14 * scale) || !s.is_finite() {
        return Err(Error::DegenerateInnerProduct { value: s });
    }
    Ok(Matrix3::outer(phi, chi).scale(s.inv()))
}

impl ZcrFields for GeneralDressedState {
    fn detuning(&self) -> &DetuningModel {
        self.base.detuning()
    }

    fn u_matrix(&self, tau: f64, zeta: f64) -> Result<Matrix3> {
        let (du, _) = self.increments(tau, zeta)?;
        Ok(self.base.point(tau, zeta)?.u_matrix() + du)
    }

    fn a_matrices(&self, tau: f64, zeta: f64) -> Result<Vec<Matrix3>> {
        let base = self.base.point(tau, zeta)?;
        let (_, da) = self.increments(tau, zeta)?;
        Ok(base.bloch.iter().zip(da).map(|(a, d)| *a + d).collect())
    }
}
