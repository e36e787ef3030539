//! Helpers shared by unit tests.

use crate::model::{build_u, MBFieldState};
use crate::{Matrix3, Vector3, C64};

/// Largest relative deviation of `psi(lambda) = Psi(lambda) C` from the tau
/// Lax equation and, if `check_zeta`, from the zeta equation, by central
/// differences with step 1e-4.
pub fn lax_defect(state: &MBFieldState, lambda: C64, cst: &Vector3, tau: f64, zeta: f64, check_zeta: bool) -> f64 {
    let h = 1e-4;
    let half = C64::new(0.5 / h, 0.0);
    let psi = |t: f64, z: f64| state.wavefunction(lambda, cst, t, z).unwrap();
    let p = state.point(tau, zeta).unwrap();
    let v = build_u(p.e_minus, p.e_plus) - Matrix3::j().scale(lambda);
    let ps = psi(tau, zeta);
    let scale = ps.max_abs().max(1e-300);
    let d_tau = (psi(tau + h, zeta) - psi(tau - h, zeta)).scale(half);
    let mut worst = (d_tau - v.mul_vec(&ps)).max_abs() / scale;
    if check_zeta {
        let alphas = state.detuning().alphas(lambda).unwrap();
        let weighted: Vec<Matrix3> = p.bloch.iter().zip(&alphas).map(|(a, al)| a.scale(*al)).collect();
        let z_mat = state.detuning().average_matrices(&weighted);
        let d_zeta = (psi(tau, zeta + h) - psi(tau, zeta - h)).scale(half);
        worst = worst.max((d_zeta - z_mat.mul_vec(&ps)).max_abs() / scale);
    }
    worst
}

/// Deterministic uniform samples in `[0, 1)^4` (splitmix64).
pub fn samples(n: usize, seed: u64) -> Vec<[f64; 4]> {
    let mut s = seed;
    let mut next = move || {
        s = s.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = s;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        ((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n).map(|_| [next(), next(), next(), next()]).collect()
}
