//! Closed-form seed backgrounds and their exact Lax wavefunctions.
//!
//! * `Zero`: no field, every atom in the lower level.
//! * `Populations`: no field, static level populations.
//! * `PeriodicPump`: a plane wave `e_+ = E exp(i k zeta)` driving the
//!   `b <-> a+` transition, with the stationary Bloch state it sustains.
//! * `NlsPeriodic`: the plane-wave background of the two-component NLS
//!   system; only its tau Lax equation is shared with Maxwell-Bloch.
//!
//! For the periodic pump, with `x = eta - delta` and `R = sqrt(4|E|^2 + x^2)`,
//!
//! ```text
//! n_b  = (1 + branch * x / R) / 2,    n_a+ = 1 - n_b
//! s    = (2 n_b - 1) / x = branch / R
//! nu_+ = i s E exp(i k zeta),         k = -<s>
//! ```
//!
//! `s` is always evaluated through `branch / R`, which has no singularity at
//! exact resonance.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::model::{DetuningModel, LaxSolution, MBFieldState, PointState};
use crate::{Matrix3, Vector3, C64};

/// Sign choice of the pumped-medium population, `n_b - 1/2 = branch * x / (2R)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn from_sign(sign: i32) -> Option<Self> {
        match sign {
            1 => Some(Branch::Plus),
            -1 => Some(Branch::Minus),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SeedKind {
    Zero,
    Populations { n_am: f64, n_ap: f64, n_b: f64 },
    PeriodicPump { e: C64, branch: Branch },
    NlsPeriodic { e: C64, omega: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeedBackground {
    pub kind: SeedKind,
    pub detuning: DetuningModel,
}

impl SeedBackground {
    pub fn new(kind: SeedKind, detuning: DetuningModel) -> Self {
        Self { kind, detuning }
    }

    pub fn zero(detuning: DetuningModel) -> Self {
        Self::new(SeedKind::Zero, detuning)
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            SeedKind::Zero => Ok(()),
            SeedKind::Populations { n_am, n_ap, n_b } => {
                let in_range = [n_am, n_ap, n_b].iter().all(|n| (0.0..=1.0).contains(n));
                if in_range && (n_am + n_ap + n_b - 1.0).abs() <= 1e-12 {
                    Ok(())
                } else {
                    Err(Error::PopulationsOutOfRange { n_am, n_ap, n_b })
                }
            }
            SeedKind::PeriodicPump { e, .. } | SeedKind::NlsPeriodic { e, .. } => {
                if e.norm() > 0.0 && e.is_finite() {
                    Ok(())
                } else {
                    Err(Error::ZeroPumpAmplitude)
                }
            }
        }
    }
}

/// Constants selecting one solution out of the fundamental matrix:
/// `(C_1, C_2, C_3)` for static seeds, `(C_1, C_+, C_-)` for periodic ones.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveConstants(pub Vector3);

impl WaveConstants {
    pub fn new(c1: C64, c2: C64, c3: C64) -> Self {
        Self(Vector3::new(c1, c2, c3))
    }

    pub fn real(c1: f64, c2: f64, c3: f64) -> Self {
        Self(Vector3::from_real(c1, c2, c3))
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.max_abs() > 0.0 && self.0.is_finite() {
            Ok(())
        } else {
            Err(Error::ZeroConstants)
        }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self(self.0.scale(s))
    }
}

pub fn seed_state(seed: &SeedBackground) -> Result<MBFieldState> {
    seed.validate()?;
    let det = seed.detuning.clone();
    Ok(match seed.kind {
        SeedKind::Zero => MBFieldState::new(StaticSeed { populations: [0.0, 0.0, 1.0], pure: true, detuning: det }),
        SeedKind::Populations { n_am, n_ap, n_b } => {
            MBFieldState::new(StaticSeed { populations: [n_am, n_ap, n_b], pure: false, detuning: det })
        }
        SeedKind::PeriodicPump { e, branch } => MBFieldState::new(PeriodicPumpSeed::new(e, branch, det)),
        SeedKind::NlsPeriodic { e, omega } => MBFieldState::new(NlsSeed { e, omega, detuning: det }),
    })
}

pub fn seed_wavefunction(seed: &SeedBackground, constants: &WaveConstants, lambda: C64, tau: f64, zeta: f64) -> Result<Vector3> {
    seed_state(seed)?.wavefunction(lambda, &constants.0, tau, zeta)
}

/// Left solution `xi(kappa) = psi(-kappa^*)^+` as the entries of the row.
pub fn seed_wavefunction_left(seed: &SeedBackground, constants: &WaveConstants, kappa: C64, tau: f64, zeta: f64) -> Result<Vector3> {
    seed_state(seed)?.wavefunction_left(kappa, &constants.0, tau, zeta)
}

/// Field-free medium with static diagonal Bloch matrix.
struct StaticSeed {
    populations: [f64; 3],
    pure: bool,
    detuning: DetuningModel,
}

impl LaxSolution for StaticSeed {
    fn detuning(&self) -> &DetuningModel {
        &self.detuning
    }

    fn point(&self, tau: f64, _zeta: f64) -> Result<PointState> {
        let [n1, n2, n3] = self.populations;
        let a = Matrix3::diag_real(n1, n2, n3);
        let pure = self.pure.then(|| {
            // a_tau = (U + i x J / 2) a with only a_3 occupied
            self.detuning.offsets().map(|x| Vector3::new(C64::zero(), C64::zero(), C64::from_polar(1.0, -0.5 * x * tau))).collect()
        });
        Ok(PointState { e_minus: C64::zero(), e_plus: C64::zero(), bloch: vec![a; self.detuning.len()], pure })
    }

    fn fundamental(&self, lambda: C64, tau: f64, zeta: f64) -> Result<Matrix3> {
        let mean_alpha = self.detuning.average_with_alpha(lambda, |a, _| a)?;
        let [n1, n2, n3] = self.populations;
        Ok(Matrix3::diag([
            (-lambda * tau + mean_alpha * n1 * zeta).exp(),
            (-lambda * tau + mean_alpha * n2 * zeta).exp(),
            (lambda * tau + mean_alpha * n3 * zeta).exp(),
        ]))
    }

    fn has_pure_state(&self) -> bool {
        self.pure
    }
}

/// Population profile of the pumped medium at effective detuning `x`:
/// returns `(n_b, s)` with `s = (2 n_b - 1) / x` in its regular form.
pub fn pump_profile(e_abs: f64, branch: Branch, x: f64) -> (f64, f64) {
    let r = (4.0 * e_abs * e_abs + x * x).sqrt();
    let s = branch.sign() / r;
    (0.5 * (1.0 + s * x), s)
}

/// `k = -<s>` of the pumped medium.
pub fn pump_wavenumber(e_abs: f64, branch: Branch, detuning: &DetuningModel) -> f64 {
    -detuning.nodes().iter().map(|n| n.weight * pump_profile(e_abs, branch, n.eta - detuning.resonance_shift()).1).sum::<f64>()
}

/// Principal branch of `sqrt(z)`, cut along the negative real axis.
pub fn principal_sqrt(z: C64) -> C64 {
    z.sqrt()
}

fn check_branch_point(sigma: C64, lambda: C64, e_abs: f64) -> Result<()> {
    if sigma.norm() <= 1e-12 * e_abs.max(1.0) {
        Err(Error::BranchPointAtE { lambda })
    } else {
        Ok(())
    }
}

pub(crate) struct PeriodicPumpSeed {
    e: C64,
    branch: Branch,
    detuning: DetuningModel,
    k: f64,
    /// `(n_b, s)` per node.
    profile: Vec<(f64, f64)>,
}

impl PeriodicPumpSeed {
    fn new(e: C64, branch: Branch, detuning: DetuningModel) -> Self {
        let e_abs = e.norm();
        let k = pump_wavenumber(e_abs, branch, &detuning);
        let profile = detuning.offsets().map(|x| pump_profile(e_abs, branch, x)).collect();
        Self { e, branch, detuning, k, profile }
    }

    /// `sigma(lambda) = sqrt(lambda^2 - |E|^2)`, principal branch.
    pub fn sigma(e_abs: f64, lambda: C64) -> C64 {
        principal_sqrt(lambda * lambda - e_abs * e_abs)
    }
}

impl LaxSolution for PeriodicPumpSeed {
    fn detuning(&self) -> &DetuningModel {
        &self.detuning
    }

    fn point(&self, tau: f64, zeta: f64) -> Result<PointState> {
        let carrier = C64::from_polar(1.0, self.k * zeta);
        let e_plus = self.e * carrier;
        let e_abs_sq = self.e.norm_sqr();
        let mut bloch = Vec::with_capacity(self.profile.len());
        let mut pure = Vec::with_capacity(self.profile.len());
        for (&(n_b, s), x) in self.profile.iter().zip(self.detuning.offsets()) {
            let nu_p = C64::new(0.0, s) * e_plus;
            let mut a = Matrix3::zeros();
            a[(1, 1)] = C64::new(1.0 - n_b, 0.0);
            a[(2, 2)] = C64::new(n_b, 0.0);
            a[(2, 1)] = nu_p;
            a[(1, 2)] = nu_p.conj();
            bloch.push(a);
            // a = (0, a_2, a_3) rotating at frequency rho keeps a a^+ = A
            let rho = -0.5 * x - s * e_abs_sq / n_b;
            let sqrt_nb = n_b.sqrt();
            let phase = C64::from_polar(1.0, rho * tau);
            let a3 = C64::from_polar(sqrt_nb, 0.5 * self.k * zeta) * phase;
            let a2 = C64::new(0.0, -s) * self.e.conj() * C64::from_polar(1.0 / sqrt_nb, -0.5 * self.k * zeta) * phase;
            pure.push(Vector3::new(C64::zero(), a2, a3));
        }
        Ok(PointState { e_minus: C64::zero(), e_plus, bloch, pure: Some(pure) })
    }

    fn fundamental(&self, lambda: C64, tau: f64, zeta: f64) -> Result<Matrix3> {
        let e_abs = self.e.norm();
        let sigma = Self::sigma(e_abs, lambda);
        check_branch_point(sigma, lambda, e_abs)?;
        let mean_alpha = self.detuning.average_with_alpha(lambda, |a, _| a)?;
        let mut mean_s_alpha = C64::zero();
        for ((node, &(_, s)), x) in self.detuning.nodes().iter().zip(&self.profile).zip(self.detuning.offsets()) {
            mean_s_alpha += crate::model::alpha(lambda, x, 0.0)? * s * node.weight;
        }
        let theta = sigma * (C64::new(tau, 0.0) + C64::i() * mean_s_alpha * zeta);
        let ik = C64::new(0.0, self.k);
        let g_lo = ((mean_alpha - ik) * 0.5 * zeta).exp();
        let g_hi = ((mean_alpha + ik) * 0.5 * zeta).exp();
        let (ep, em) = (theta.exp(), (-theta).exp());
        let e_conj = self.e.conj();
        let col1 = Vector3::new((-lambda * tau).exp(), C64::zero(), C64::zero());
        let col_plus = Vector3::new(C64::zero(), ep * g_lo, -(lambda + sigma) * ep * g_hi / e_conj);
        let col_minus = Vector3::new(C64::zero(), em * g_lo, -(lambda - sigma) * em * g_hi / e_conj);
        Ok(Matrix3::from_columns([col1, col_plus, col_minus]))
    }

    fn has_pure_state(&self) -> bool {
        true
    }

    fn branch_points(&self) -> Vec<C64> {
        let e_abs = self.e.norm();
        vec![C64::new(e_abs, 0.0), C64::new(-e_abs, 0.0)]
    }
}

impl std::fmt::Debug for PeriodicPumpSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicPumpSeed").field("e", &self.e).field("branch", &self.branch).field("k", &self.k).finish()
    }
}

/// Plane-wave background of the two-component NLS system.
///
/// The tau Lax equation is exact; the zeta dependence carried by the
/// wavefunctions follows the plane-wave dispersion `k = omega^2 - |E|^2`
/// and is not a Maxwell-Bloch flow, so residual scans reject this state.
struct NlsSeed {
    e: C64,
    omega: f64,
    detuning: DetuningModel,
}

impl NlsSeed {
    fn k(&self) -> f64 {
        self.omega * self.omega - self.e.norm_sqr()
    }
}

impl LaxSolution for NlsSeed {
    fn detuning(&self) -> &DetuningModel {
        &self.detuning
    }

    fn point(&self, tau: f64, zeta: f64) -> Result<PointState> {
        let e_plus = self.e * C64::from_polar(1.0, self.k() * zeta + self.omega * tau);
        Ok(PointState { e_minus: C64::zero(), e_plus, bloch: vec![Matrix3::zeros(); self.detuning.len()], pure: None })
    }

    fn fundamental(&self, lambda: C64, tau: f64, zeta: f64) -> Result<Matrix3> {
        let e_abs = self.e.norm();
        let half_iw = C64::new(0.0, 0.5 * self.omega);
        let shifted = lambda - half_iw;
        let sigma = principal_sqrt(shifted * shifted - e_abs * e_abs);
        check_branch_point(sigma, lambda, e_abs)?;
        let phase = self.k() * zeta + self.omega * tau;
        let theta = sigma * (C64::new(tau, 0.0) + C64::i() * (lambda + half_iw) * zeta);
        let (ep, em) = (theta.exp(), (-theta).exp());
        let g_lo = C64::from_polar(1.0, -0.5 * phase);
        let g_hi = C64::from_polar(1.0, 0.5 * phase);
        let e_conj = self.e.conj();
        let col1 = Vector3::new((-lambda * tau + C64::i() * lambda * lambda * zeta).exp(), C64::zero(), C64::zero());
        let col_plus = Vector3::new(C64::zero(), ep * g_lo, -(shifted + sigma) * ep * g_hi / e_conj);
        let col_minus = Vector3::new(C64::zero(), em * g_lo, -(shifted - sigma) * em * g_hi / e_conj);
        Ok(Matrix3::from_columns([col1, col_plus, col_minus]))
    }

    fn has_pure_state(&self) -> bool {
        false
    }

    fn maxwell_bloch(&self) -> bool {
        false
    }

    fn branch_points(&self) -> Vec<C64> {
        let e_abs = self.e.norm();
        let half_iw = C64::new(0.0, 0.5 * self.omega);
        vec![half_iw + e_abs, half_iw - e_abs]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::broadening::BroadeningModel;
    use crate::model::{build_u, residual_mb, FdOrder, Grid2D, ResidualOptions};
    use crate::testutil::{lax_defect, samples};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn gaussian9() -> DetuningModel {
        DetuningModel::new(0.2, BroadeningModel::Gaussian { center: 0.0, width: 0.8, n_nodes: 9 }).unwrap()
    }

    fn seeds() -> Vec<SeedBackground> {
        vec![
            SeedBackground::zero(DetuningModel::resonant()),
            SeedBackground::zero(gaussian9()),
            SeedBackground::new(SeedKind::Populations { n_am: 0.1, n_ap: 0.3, n_b: 0.6 }, DetuningModel::resonant()),
            SeedBackground::new(SeedKind::Populations { n_am: 0.2, n_ap: 0.3, n_b: 0.5 }, gaussian9()),
            SeedBackground::new(SeedKind::PeriodicPump { e: c(0.8, 0.6), branch: Branch::Plus }, DetuningModel::resonant()),
            SeedBackground::new(SeedKind::PeriodicPump { e: c(0.5, -0.2), branch: Branch::Minus }, gaussian9()),
        ]
    }

    #[test]
    fn zero_seed_background() {
        let st = seed_state(&SeedBackground::zero(DetuningModel::resonant())).unwrap();
        let p = st.point(1.3, -0.4).unwrap();
        assert_eq!(p.e_minus, C64::zero());
        assert_eq!(p.e_plus, C64::zero());
        assert_eq!(p.bloch[0].trace(), c(1.0, 0.0));
    }

    #[test]
    fn populations_must_be_valid() {
        let bad = SeedBackground::new(SeedKind::Populations { n_am: 0.5, n_ap: 0.5, n_b: 0.5 }, DetuningModel::resonant());
        assert!(matches!(seed_state(&bad), Err(Error::PopulationsOutOfRange { .. })));
        let neg = SeedBackground::new(SeedKind::Populations { n_am: -0.1, n_ap: 0.5, n_b: 0.6 }, DetuningModel::resonant());
        assert!(matches!(seed_state(&neg), Err(Error::PopulationsOutOfRange { .. })));
        let zero_e = SeedBackground::new(SeedKind::PeriodicPump { e: c(0.0, 0.0), branch: Branch::Plus }, DetuningModel::resonant());
        assert!(matches!(seed_state(&zero_e), Err(Error::ZeroPumpAmplitude)));
    }

    #[test]
    fn pump_population_at_resonance_is_half_on_both_branches() {
        for b in [Branch::Plus, Branch::Minus] {
            assert_eq!(pump_profile(1.0, b, 0.0).0, 0.5);
            // limiting oracle: the printed closed form evaluated just off resonance
            let eps = 1e-6;
            let lim = 0.5 * (pump_profile(1.0, b, eps).0 + pump_profile(1.0, b, -eps).0);
            assert!((lim - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn pump_wavenumber_at_resonance() {
        // k = -branch / (2|E|) on a sharp line at x = 0
        let det = DetuningModel::resonant();
        assert!((pump_wavenumber(1.0, Branch::Plus, &det) + 0.5).abs() < 1e-15);
        assert!((pump_wavenumber(1.0, Branch::Minus, &det) - 0.5).abs() < 1e-15);
        // limiting oracle through the singular form (2 n_b - 1) / x
        let x = 1e-6;
        let (n_b, _) = pump_profile(1.0, Branch::Plus, x);
        assert!((-(2.0 * n_b - 1.0) / x + 0.5).abs() < 1e-6);
    }

    #[test]
    fn pump_state_traces_are_fixed() {
        let seed = SeedBackground::new(SeedKind::PeriodicPump { e: c(0.5, -0.2), branch: Branch::Minus }, gaussian9());
        let st = seed_state(&seed).unwrap();
        for (t, z) in [(0.0, 0.0), (3.0, -2.0), (-7.5, 4.1)] {
            let p = st.point(t, z).unwrap();
            for a in &p.bloch {
                assert!((a.trace() - c(1.0, 0.0)).norm() < 1e-12);
                // free upper levels initially: tr A^2 = 1
                assert!(((*a * *a).trace() - c(1.0, 0.0)).norm() < 1e-12);
                assert_eq!(a.hermitian_deviation(), 0.0);
            }
        }
    }

    #[test]
    fn every_seed_passes_residual_mb() {
        let grid = Grid2D::new((-5.0, 5.0, 21), (-5.0, 5.0, 21));
        let opts = ResidualOptions::new(1e-3, FdOrder::Fourth);
        for seed in seeds() {
            let st = seed_state(&seed).unwrap();
            let r = residual_mb(&st, &grid, &opts).unwrap();
            assert!(r.max() <= 1e-10, "{:?}: {}", seed.kind, r.to_kv());
        }
    }

    #[test]
    fn nls_seed_is_rejected_by_residual_mb() {
        let seed = SeedBackground::new(SeedKind::NlsPeriodic { e: c(1.0, 0.0), omega: 0.3 }, DetuningModel::resonant());
        let st = seed_state(&seed).unwrap();
        let grid = Grid2D::new((0.0, 1.0, 2), (0.0, 1.0, 2));
        assert_eq!(residual_mb(&st, &grid, &ResidualOptions::default()), Err(Error::NotMaxwellBloch));
    }

    #[test]
    fn zero_seed_wavefunction_at_origin() {
        let seed = SeedBackground::zero(DetuningModel::resonant());
        let psi = seed_wavefunction(&seed, &WaveConstants::real(1.0, 0.0, 1.0), c(0.5, 0.0), 0.0, 0.0).unwrap();
        assert_eq!(psi, Vector3::from_real(1.0, 0.0, 1.0));
        let st = seed_state(&seed).unwrap();
        assert!(lax_defect(&st, c(0.5, 0.0), &Vector3::from_real(1.0, 0.0, 1.0), 0.7, -0.3, true) < 1e-8);
        let xi = seed_wavefunction_left(&seed, &WaveConstants::real(1.0, 0.0, 1.0), c(-0.5, 0.0), 0.0, 0.0).unwrap();
        assert_eq!(xi, Vector3::from_real(1.0, 0.0, 1.0));
    }

    #[test]
    fn populations_component_ratios_follow_population_differences() {
        let seed = SeedBackground::new(SeedKind::Populations { n_am: 0.1, n_ap: 0.3, n_b: 0.6 }, DetuningModel::resonant());
        let cst = WaveConstants::real(1.0, 1.0, 1.0);
        let lambda = c(0.5, 0.3);
        let al = 1.0 / (2.0 * lambda);
        for zeta in [0.0, 2.0, 5.0] {
            let psi = seed_wavefunction(&seed, &cst, lambda, 0.4, zeta).unwrap();
            let ratio = psi[1] / psi[0];
            let want = (al * (0.3 - 0.1) * zeta).exp();
            assert!((ratio - want).norm() < 1e-12);
        }
    }

    #[test]
    fn seed_wavefunctions_solve_both_lax_equations() {
        for (k, seed) in seeds().into_iter().enumerate() {
            let st = seed_state(&seed).unwrap();
            for s in samples(50, 17 + k as u64) {
                let lambda = c(0.2 + 1.3 * s[0], -1.0 + 2.0 * s[1]);
                let (tau, zeta) = (-3.0 + 6.0 * s[2], -3.0 + 6.0 * s[3]);
                let cst = Vector3::new(c(1.0, 0.2), c(-0.4, 0.7), c(0.3, -0.5));
                let d = lax_defect(&st, lambda, &cst, tau, zeta, true);
                assert!(d < 1e-7, "{:?} lambda={lambda} at ({tau},{zeta}): {d}", seed.kind);
            }
        }
    }

    #[test]
    fn left_wavefunctions_solve_conjugate_problem_and_pair_to_constants() {
        let h = 1e-4;
        for seed in seeds() {
            let st = seed_state(&seed).unwrap();
            let lambda = c(0.7, 0.25);
            // a left and a right solution pair to a constant at equal spectral parameter
            let kappa = lambda;
            let cr = Vector3::new(c(1.0, 0.0), c(0.5, 0.5), c(-0.2, 1.0));
            let cl = Vector3::new(c(0.3, -0.1), c(1.0, 0.0), c(0.4, 0.4));
            let pairing = |t: f64, z: f64| {
                let xi = st.wavefunction_left(kappa, &cl, t, z).unwrap();
                let psi = st.wavefunction(lambda, &cr, t, z).unwrap();
                xi.pair(&psi)
            };
            let p0 = pairing(0.0, 0.0);
            for (t, z) in [(1.0, 0.5), (-2.0, 1.5), (0.3, -2.2)] {
                assert!((pairing(t, z) - p0).norm() < 1e-10 * p0.norm().max(1.0), "{:?}", seed.kind);
            }
            // xi_tau = -xi W with W = U - kappa J
            let (t, z) = (0.4, -0.6);
            let xi = |t: f64| st.wavefunction_left(kappa, &cl, t, z).unwrap();
            let p = st.point(t, z).unwrap();
            let w = build_u(p.e_minus, p.e_plus) - Matrix3::j().scale(kappa);
            let d = (xi(t + h) - xi(t - h)).scale(c(0.5 / h, 0.0));
            let rhs = Matrix3::vec_mul(&xi(t), &w);
            assert!((d + rhs).max_abs() < 1e-8 * xi(t).max_abs(), "{:?}", seed.kind);
        }
    }

    #[test]
    fn nls_wavefunctions_solve_tau_equation() {
        let seed = SeedBackground::new(SeedKind::NlsPeriodic { e: c(0.9, 0.4), omega: 0.7 }, DetuningModel::resonant());
        let st = seed_state(&seed).unwrap();
        for s in samples(50, 99) {
            let lambda = c(0.3 + s[0], -1.0 + 2.0 * s[1]);
            let cst = Vector3::new(c(1.0, 0.0), c(0.6, -0.3), c(0.2, 0.9));
            let d = lax_defect(&st, lambda, &cst, -3.0 + 6.0 * s[2], -3.0 + 6.0 * s[3], false);
            assert!(d < 1e-8, "{d}");
        }
    }

    #[test]
    fn branch_point_is_rejected() {
        let seed = SeedBackground::new(SeedKind::PeriodicPump { e: c(0.6, 0.8), branch: Branch::Plus }, DetuningModel::resonant());
        let r = seed_wavefunction(&seed, &WaveConstants::real(1.0, 1.0, 1.0), c(1.0, 0.0), 0.0, 0.0);
        assert!(matches!(r.map_err(|e| e.root().clone()), Err(Error::BranchPointAtE { .. })));
    }

    #[test]
    fn sigma_is_continuous_along_a_sweep_off_the_cut() {
        // lambda^2 - |E|^2 stays off the negative real axis for Re lambda > |E|
        let mut prev = PeriodicPumpSeed::sigma(1.0, c(1.5, -1.0));
        for i in 1..=200 {
            let lambda = c(1.5, -1.0 + 2.0 * i as f64 / 200.0);
            let s = PeriodicPumpSeed::sigma(1.0, lambda);
            assert!((s - prev).norm() < 0.05);
            prev = s;
        }
    }

    #[test]
    fn constant_rescaling_leaves_projector_unchanged() {
        use crate::linalg::projector_from_vector;
        for seed in seeds() {
            let cst = WaveConstants::new(c(1.0, 0.3), c(-0.2, 0.8), c(0.5, 0.5));
            let lambda = c(0.6, 0.2);
            let p1 = projector_from_vector(&seed_wavefunction(&seed, &cst, lambda, 0.9, -0.4).unwrap()).unwrap();
            let p2 = projector_from_vector(&seed_wavefunction(&seed, &cst.scaled(c(-3.0, 7.5)), lambda, 0.9, -0.4).unwrap()).unwrap();
            assert!((*p1.matrix() - *p2.matrix()).max_abs() < 1e-12);
        }
    }
}
