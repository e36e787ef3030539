//! Field states of the reduced Maxwell-Bloch system, the Lax matrices
//! `U`, `A`, `J` and the coefficient `alpha(lambda)`.
//!
//! A solution is an [`MBFieldState`]: a bundle of pure evaluators for the
//! fields `e_-`, `e_+`, the per-node Bloch matrix `A(eta)`, optional
//! pure-state amplitudes, and the fundamental matrix of the right Lax
//! problem
//!
//! ```text
//! psi_tau  = (U - lambda J) psi
//! psi_zeta = <alpha(lambda) A> psi,   alpha(lambda) = 1 / (2 lambda + i (eta - delta))
//! ```
//!
//! Left solutions come from the automorphism `xi(kappa) = psi(-kappa^*)^+`,
//! valid for every state that obeys the reduction `U = -U^+`, `A = A^+`.

mod residual;

use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;

pub use residual::{
    conservation_report, purity_deviation, residual_mb, residual_pure, residual_zcr, Combine, ConservationReport, FdOrder, Grid2D,
    ResidualOptions, ResidualReport, Stencil,
};
pub(crate) use residual::{report, scan_max};

use crate::broadening::{BroadeningModel, Node};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix3;
use crate::scalar::Real;
use crate::{Matrix3, Vector3, C64};

/// Denominators of `alpha` below this modulus are treated as a spectral pole.
pub const DEFAULT_POLE_EPS: f64 = 1e-12;

/// Resonance shift together with the materialized broadening nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct DetuningModel {
    resonance_shift: f64,
    broadening: BroadeningModel,
    nodes: Vec<Node>,
}

impl DetuningModel {
    pub fn new(resonance_shift: f64, broadening: BroadeningModel) -> Result<Self> {
        let nodes = broadening.materialize()?;
        Ok(Self { resonance_shift, broadening, nodes })
    }

    /// Sharp line at exact resonance.
    pub fn resonant() -> Self {
        Self::new(0.0, BroadeningModel::default()).expect("sharp line materializes")
    }

    pub fn resonance_shift(&self) -> f64 {
        self.resonance_shift
    }

    pub fn broadening(&self) -> &BroadeningModel {
        &self.broadening
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Effective detuning `eta_i - delta` of node `i`.
    pub fn offset(&self, i: usize) -> f64 {
        self.nodes[i].eta - self.resonance_shift
    }

    pub fn offsets(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().map(move |n| n.eta - self.resonance_shift)
    }

    /// `alpha(lambda)` at every node.
    pub fn alphas(&self, lambda: C64) -> Result<Vec<C64>> {
        self.offsets().map(|x| alpha(lambda, x, 0.0)).collect()
    }

    /// `<g(alpha(lambda), eta - delta)>`.
    pub fn average_with_alpha(&self, lambda: C64, mut g: impl FnMut(C64, f64) -> C64) -> Result<C64> {
        let mut acc = C64::zero();
        for node in &self.nodes {
            let x = node.eta - self.resonance_shift;
            acc += g(alpha(lambda, x, 0.0)?, x) * node.weight;
        }
        Ok(acc)
    }

    /// Weighted sum of per-node values.
    pub fn average_values(&self, values: &[C64]) -> C64 {
        crate::broadening::average_values(&self.nodes, values)
    }

    pub fn average_matrices(&self, values: &[Matrix3]) -> Matrix3 {
        self.nodes.iter().zip(values).fold(Matrix3::zeros(), |acc, (n, m)| acc + m.scale_real(n.weight))
    }
}

/// Populations and coherences of one broadening node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochComponents<T> {
    pub n_am: T,
    pub n_ap: T,
    pub n_b: T,
    pub nu_m: Complex<T>,
    pub nu_p: Complex<T>,
    pub nu_a: Complex<T>,
}

impl<T: Real> BlochComponents<T> {
    /// Reads the components back out of a Bloch matrix.
    pub fn from_matrix(a: &ComplexMatrix3<T>) -> Self {
        Self { n_am: a[(0, 0)].re, n_ap: a[(1, 1)].re, n_b: a[(2, 2)].re, nu_m: a[(2, 0)], nu_p: a[(2, 1)], nu_a: a[(0, 1)] }
    }

    pub fn ground_state() -> Self {
        let z = T::zero();
        Self { n_am: z, n_ap: z, n_b: T::one(), nu_m: Complex::zero(), nu_p: Complex::zero(), nu_a: Complex::zero() }
    }
}

/// `alpha(lambda) = 1 / (2 lambda + i (eta - delta))`.
pub fn alpha<T: Real>(lambda: Complex<T>, eta: T, delta: T) -> Result<Complex<T>> {
    let den = lambda * T::lit(2.0) + Complex::new(T::zero(), eta - delta);
    if den.norm().as_f64() <= DEFAULT_POLE_EPS {
        return Err(Error::SpectralPole { lambda: C64::new(lambda.re.as_f64(), lambda.im.as_f64()), detuning: (eta - delta).as_f64() });
    }
    Ok(den.inv())
}

/// `U = [[0, 0, -e_-^*], [0, 0, -e_+^*], [e_-, e_+, 0]]`.
pub fn build_u<T: Real>(e_minus: Complex<T>, e_plus: Complex<T>) -> ComplexMatrix3<T> {
    let mut u = ComplexMatrix3::zeros();
    u[(0, 2)] = -e_minus.conj();
    u[(1, 2)] = -e_plus.conj();
    u[(2, 0)] = e_minus;
    u[(2, 1)] = e_plus;
    u
}

/// `A = [[n_a-, nu_a, nu_-^*], [nu_a^*, n_a+, nu_+^*], [nu_-, nu_+, n_b]]`.
pub fn build_a<T: Real>(c: &BlochComponents<T>) -> ComplexMatrix3<T> {
    let z = T::zero();
    let mut a = ComplexMatrix3::zeros();
    a[(0, 0)] = Complex::new(c.n_am, z);
    a[(1, 1)] = Complex::new(c.n_ap, z);
    a[(2, 2)] = Complex::new(c.n_b, z);
    a[(0, 1)] = c.nu_a;
    a[(1, 0)] = c.nu_a.conj();
    a[(0, 2)] = c.nu_m.conj();
    a[(2, 0)] = c.nu_m;
    a[(1, 2)] = c.nu_p.conj();
    a[(2, 1)] = c.nu_p;
    a
}

/// Everything a state knows at one `(tau, zeta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointState {
    pub e_minus: C64,
    pub e_plus: C64,
    /// Bloch matrix per broadening node.
    pub bloch: Vec<Matrix3>,
    /// Pure-state amplitude vector per node, when the medium is pure.
    pub pure: Option<Vec<Vector3>>,
}

impl PointState {
    pub fn u_matrix(&self) -> Matrix3 {
        build_u(self.e_minus, self.e_plus)
    }
}

/// A solution of the reduced system together with its right Lax solutions.
pub trait LaxSolution: Send + Sync {
    fn detuning(&self) -> &DetuningModel;

    fn point(&self, tau: f64, zeta: f64) -> Result<PointState>;

    /// Fundamental matrix of the right Lax problem at `lambda`; its columns
    /// are independent solutions, so `Psi(lambda) C` is the solution with
    /// wave constants `C`.
    fn fundamental(&self, lambda: C64, tau: f64, zeta: f64) -> Result<Matrix3>;

    fn has_pure_state(&self) -> bool;

    /// False when only the tau half of the Lax pair is exact (NLS background).
    fn maxwell_bloch(&self) -> bool {
        true
    }

    /// Spectral parameters at which `fundamental` is undefined
    /// (branch points of the seed, poles introduced by dressing).
    fn excluded_parameters(&self) -> Vec<C64> {
        Vec::new()
    }

    /// Branch points of the seed background, where wavefunctions degenerate.
    fn branch_points(&self) -> Vec<C64> {
        Vec::new()
    }
}

/// Shared handle to an immutable solution.
#[derive(Clone)]
pub struct MBFieldState(Arc<dyn LaxSolution>);

impl std::fmt::Debug for MBFieldState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MBFieldState").field("nodes", &self.0.detuning().len()).field("pure", &self.0.has_pure_state()).finish()
    }
}

impl MBFieldState {
    pub fn new(inner: impl LaxSolution + 'static) -> Self {
        Self(Arc::new(inner))
    }

    pub fn detuning(&self) -> &DetuningModel {
        self.0.detuning()
    }

    pub fn point(&self, tau: f64, zeta: f64) -> Result<PointState> {
        self.0.point(tau, zeta).map_err(|e| e.at(tau, zeta))
    }

    pub fn fields(&self, tau: f64, zeta: f64) -> Result<(C64, C64)> {
        let p = self.point(tau, zeta)?;
        Ok((p.e_minus, p.e_plus))
    }

    pub fn bloch(&self, node: usize, tau: f64, zeta: f64) -> Result<BlochComponents<f64>> {
        let p = self.point(tau, zeta)?;
        let len = p.bloch.len();
        p.bloch.get(node).map(BlochComponents::from_matrix).ok_or(Error::NodeOutOfRange { index: node, len })
    }

    pub fn pure_state(&self, node: usize, tau: f64, zeta: f64) -> Result<Vector3> {
        let p = self.point(tau, zeta)?;
        let pure = p.pure.ok_or(Error::MissingPureState)?;
        let len = pure.len();
        pure.get(node).copied().ok_or(Error::NodeOutOfRange { index: node, len })
    }

    pub fn has_pure_state(&self) -> bool {
        self.0.has_pure_state()
    }

    pub fn is_maxwell_bloch(&self) -> bool {
        self.0.maxwell_bloch()
    }

    pub fn excluded_parameters(&self) -> Vec<C64> {
        self.0.excluded_parameters()
    }

    pub fn branch_points(&self) -> Vec<C64> {
        self.0.branch_points()
    }

    pub fn fundamental(&self, lambda: C64, tau: f64, zeta: f64) -> Result<Matrix3> {
        self.0.fundamental(lambda, tau, zeta).map_err(|e| e.at(tau, zeta))
    }

    /// Right solution `psi(lambda) = Psi(lambda) C`.
    pub fn wavefunction(&self, lambda: C64, constants: &Vector3, tau: f64, zeta: f64) -> Result<Vector3> {
        Ok(self.fundamental(lambda, tau, zeta)?.mul_vec(constants))
    }

    /// Left solution `xi(kappa) = psi(-kappa^*)^+`, returned as the entries of the row.
    pub fn wavefunction_left(&self, kappa: C64, constants: &Vector3, tau: f64, zeta: f64) -> Result<Vector3> {
        Ok(self.wavefunction(-kappa.conj(), constants, tau, zeta)?.conj())
    }

    /// The same state with `e_+` multiplied by `factor`; used to check that
    /// the residual scans detect a damaged solution.
    pub fn with_scaled_e_plus(&self, factor: f64) -> Self {
        Self::new(ScaledEPlus { inner: self.clone(), factor })
    }
}

struct ScaledEPlus {
    inner: MBFieldState,
    factor: f64,
}

impl LaxSolution for ScaledEPlus {
    fn detuning(&self) -> &DetuningModel {
        self.inner.detuning()
    }

    fn point(&self, tau: f64, zeta: f64) -> Result<PointState> {
        let mut p = self.inner.0.point(tau, zeta)?;
        p.e_plus *= self.factor;
        Ok(p)
    }

    fn fundamental(&self, lambda: C64, tau: f64, zeta: f64) -> Result<Matrix3> {
        self.inner.0.fundamental(lambda, tau, zeta)
    }

    fn has_pure_state(&self) -> bool {
        self.inner.has_pure_state()
    }

    fn maxwell_bloch(&self) -> bool {
        self.inner.is_maxwell_bloch()
    }
}

/// Matrix-valued potentials `U(tau, zeta)` and `A(eta; tau, zeta)` of the
/// zero-curvature system; implemented by reduced and general dressings alike.
pub trait ZcrFields: Sync {
    fn detuning(&self) -> &DetuningModel;
    fn u_matrix(&self, tau: f64, zeta: f64) -> Result<Matrix3>;
    fn a_matrices(&self, tau: f64, zeta: f64) -> Result<Vec<Matrix3>>;
}

impl ZcrFields for MBFieldState {
    fn detuning(&self) -> &DetuningModel {
        MBFieldState::detuning(self)
    }

    fn u_matrix(&self, tau: f64, zeta: f64) -> Result<Matrix3> {
        Ok(self.point(tau, zeta)?.u_matrix())
    }

    fn a_matrices(&self, tau: f64, zeta: f64) -> Result<Vec<Matrix3>> {
        Ok(self.point(tau, zeta)?.bloch)
    }
}
