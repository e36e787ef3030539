//! Finite-difference residuals of the field equations and conservation scans.
//!
//! Derivatives are always taken numerically from the state's evaluators, so
//! a solution is verified as a black box. Grid scans run in parallel and are
//! merged by max-reduction, which keeps reports independent of scheduling.

use std::fmt;

use rayon::prelude::*;

use super::{MBFieldState, PointState, ZcrFields};
use crate::error::{Error, Result};
use crate::linalg::commutator;
use crate::{Matrix3, Vector3, C64};

/// Uniform tensor grid with inclusive endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D {
    pub tau_min: f64,
    pub tau_max: f64,
    pub n_tau: usize,
    pub zeta_min: f64,
    pub zeta_max: f64,
    pub n_zeta: usize,
}

impl Grid2D {
    pub fn new(tau: (f64, f64, usize), zeta: (f64, f64, usize)) -> Self {
        Self { tau_min: tau.0, tau_max: tau.1, n_tau: tau.2, zeta_min: zeta.0, zeta_max: zeta.1, n_zeta: zeta.2 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_axis = |lo: f64, hi: f64, n: usize| lo.is_finite() && hi.is_finite() && lo <= hi && n >= 1;
        if !ok_axis(self.tau_min, self.tau_max, self.n_tau) {
            return Err(Error::InvalidGrid(format!("tau axis [{}, {}] x {}", self.tau_min, self.tau_max, self.n_tau)));
        }
        if !ok_axis(self.zeta_min, self.zeta_max, self.n_zeta) {
            return Err(Error::InvalidGrid(format!("zeta axis [{}, {}] x {}", self.zeta_min, self.zeta_max, self.n_zeta)));
        }
        Ok(())
    }

    fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
        if n <= 1 {
            lo
        } else if i == n - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    pub fn tau(&self, i: usize) -> f64 {
        Self::axis(self.tau_min, self.tau_max, self.n_tau, i)
    }

    pub fn zeta(&self, j: usize) -> f64 {
        Self::axis(self.zeta_min, self.zeta_max, self.n_zeta, j)
    }

    pub fn taus(&self) -> Vec<f64> {
        (0..self.n_tau).map(|i| self.tau(i)).collect()
    }

    pub fn zetas(&self) -> Vec<f64> {
        (0..self.n_zeta).map(|j| self.zeta(j)).collect()
    }

    /// All points, tau outer and zeta inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let zetas = self.zetas();
        self.taus().into_iter().flat_map(|t| zetas.iter().map(move |&z| (t, z))).collect()
    }

    pub fn len(&self) -> usize {
        self.n_tau * self.n_zeta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Grid2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tau=[{},{}]x{} zeta=[{},{}]x{}", self.tau_min, self.tau_max, self.n_tau, self.zeta_min, self.zeta_max, self.n_zeta)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FdOrder {
    #[default]
    Second,
    Fourth,
}

impl FdOrder {
    pub fn as_u8(self) -> u8 {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

    pub fn from_u8(order: u8) -> Option<Self> {
        match order {
            2 => Some(FdOrder::Second),
            4 => Some(FdOrder::Fourth),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualOptions {
    pub h: f64,
    pub order: FdOrder,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self { h: 1e-3, order: FdOrder::Second }
    }
}

impl ResidualOptions {
    pub fn new(h: f64, order: FdOrder) -> Self {
        Self { h, order }
    }

    pub fn stencil(&self) -> Result<Stencil> {
        Stencil::new(self.h, self.order)
    }
}

/// Values that can be linearly combined by a difference stencil.
pub trait Combine: Sized {
    fn scaled(&self, w: f64) -> Self;
    fn add_scaled(&mut self, w: f64, other: &Self);
}

impl Combine for C64 {
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += other * w;
    }
}

impl Combine for Matrix3 {
    fn scaled(&self, w: f64) -> Self {
        self.scale_real(w)
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self += other.scale_real(w);
    }
}

impl Combine for Vector3 {
    fn scaled(&self, w: f64) -> Self {
        self.scale(C64::new(w, 0.0))
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        *self = *self + other.scale(C64::new(w, 0.0));
    }
}

impl<T: Combine> Combine for Vec<T> {
    fn scaled(&self, w: f64) -> Self {
        self.iter().map(|v| v.scaled(w)).collect()
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.add_scaled(w, b);
        }
    }
}

impl Combine for PointState {
    fn scaled(&self, w: f64) -> Self {
        PointState {
            e_minus: self.e_minus * w,
            e_plus: self.e_plus * w,
            bloch: self.bloch.scaled(w),
            pure: self.pure.as_ref().map(|p| p.scaled(w)),
        }
    }
    fn add_scaled(&mut self, w: f64, other: &Self) {
        self.e_minus += other.e_minus * w;
        self.e_plus += other.e_plus * w;
        self.bloch.add_scaled(w, &other.bloch);
        if let (Some(a), Some(b)) = (self.pure.as_mut(), other.pure.as_ref()) {
            a.add_scaled(w, b);
        }
    }
}

/// Central first-derivative stencil.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    h: f64,
    order: FdOrder,
}

impl Stencil {
    pub fn new(h: f64, order: FdOrder) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidStep(h));
        }
        Ok(Self { h, order })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// `(offset in units of h, weight)` pairs.
    fn taps(&self) -> &'static [(f64, f64)] {
        match self.order {
            FdOrder::Second => &[(-1.0, -0.5), (1.0, 0.5)],
            FdOrder::Fourth => &[(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)],
        }
    }

    pub fn derivative<V: Combine>(&self, x: f64, mut f: impl FnMut(f64) -> Result<V>) -> Result<V> {
        let taps = self.taps();
        let (o0, w0) = taps[0];
        let mut acc = f(x + o0 * self.h)?.scaled(w0 / self.h);
        for &(o, w) in &taps[1..] {
            acc.add_scaled(w / self.h, &f(x + o * self.h)?);
        }
        Ok(acc)
    }
}

/// Per-equation max-abs residuals over a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub kind: &'static str,
    pub entries: Vec<(String, f64)>,
    pub grid: Grid2D,
    pub h: f64,
    pub order: FdOrder,
}

impl ResidualReport {
    /// Largest entry; NaN if any entry is NaN.
    pub fn max(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc: f64, (_, v)| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(*v) })
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// `key=value` lines, one per equation plus `max`.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}.grid={}\n", self.kind, self.grid));
        out.push_str(&format!("{}.h={:e}\n{}.order={}\n", self.kind, self.h, self.kind, self.order.as_u8()));
        for (name, v) in &self.entries {
            out.push_str(&format!("{}.{}={:.6e}\n", self.kind, name, v));
        }
        out.push_str(&format!("{}.max={:.6e}\n", self.kind, self.max()));
        out
    }
}

/// Evaluates `f` on every grid point in parallel and max-reduces each slot.
pub(crate) fn scan_max<F>(grid: &Grid2D, slots: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64, f64) -> Result<Vec<f64>> + Sync,
{
    grid.validate()?;
    let per_point: Vec<Result<Vec<f64>>> = grid.points().par_iter().map(|&(t, z)| f(t, z)).collect();
    let mut out = vec![0.0f64; slots];
    for r in per_point {
        for (acc, v) in out.iter_mut().zip(r?) {
            // NaN must not be swallowed by max
            *acc = if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) };
        }
    }
    Ok(out)
}

pub(crate) fn report(
    kind: &'static str,
    names: &[&str],
    values: Vec<f64>,
    grid: &Grid2D,
    stencil: &Stencil,
    order: FdOrder,
) -> ResidualReport {
    ResidualReport { kind, entries: names.iter().map(|s| s.to_string()).zip(values).collect(), grid: *grid, h: stencil.h(), order }
}

const MB_EQUATIONS: [&str; 8] = ["field_e_minus", "field_e_plus", "pop_n_am", "pop_n_ap", "pop_n_b", "coh_nu_m", "coh_nu_p", "coh_nu_a"];

/// Residuals of the reduced Maxwell-Bloch system:
///
/// ```text
/// e_-,zeta = -<nu_->                e_+,zeta = -<nu_+>
/// n_a-,tau = -(nu_- e_-^* + c.c.)   n_a+,tau = -(nu_+ e_+^* + c.c.)
/// n_b,tau  = nu_- e_-^* + nu_+ e_+^* + c.c.
/// nu_-,tau = -i x nu_- + (n_a- - n_b) e_- + nu_a^* e_+
/// nu_+,tau = -i x nu_+ + (n_a+ - n_b) e_+ + nu_a e_-
/// nu_a,tau = -nu_+ e_-^* - nu_-^* e_+
/// ```
///
/// with `x = eta - delta` per node; these are the entries of
/// `A_tau = [U, A] - i x [A, J] / 2`.
pub fn residual_mb(state: &MBFieldState, grid: &Grid2D, opts: &ResidualOptions) -> Result<ResidualReport> {
    if !state.is_maxwell_bloch() {
        return Err(Error::NotMaxwellBloch);
    }
    let stencil = opts.stencil()?;
    let det = state.detuning().clone();
    let values = scan_max(grid, MB_EQUATIONS.len(), |tau, zeta| {
        let p = state.point(tau, zeta)?;
        let dt = stencil.derivative(tau, |t| state.point(t, zeta))?;
        let dz = stencil.derivative(zeta, |z| state.fields(tau, z).map(|(a, b)| vec![a, b]))?;
        let (em, ep) = (p.e_minus, p.e_plus);
        let nu_m: Vec<C64> = p.bloch.iter().map(|a| a[(2, 0)]).collect();
        let nu_p: Vec<C64> = p.bloch.iter().map(|a| a[(2, 1)]).collect();
        let mut r = vec![0.0; MB_EQUATIONS.len()];
        r[0] = (dz[0] + det.average_values(&nu_m)).norm();
        r[1] = (dz[1] + det.average_values(&nu_p)).norm();
        for (i, (a, da)) in p.bloch.iter().zip(&dt.bloch).enumerate() {
            let x = det.offset(i);
            let (n_am, n_ap, n_b) = (a[(0, 0)], a[(1, 1)], a[(2, 2)]);
            let (vm, vp, va) = (a[(2, 0)], a[(2, 1)], a[(0, 1)]);
            let ix = C64::new(0.0, x);
            let flux_m = vm * em.conj() + vm.conj() * em;
            let flux_p = vp * ep.conj() + vp.conj() * ep;
            let eqs = [
                da[(0, 0)] + flux_m,
                da[(1, 1)] + flux_p,
                da[(2, 2)] - flux_m - flux_p,
                da[(2, 0)] - (-ix * vm + (n_am - n_b) * em + va.conj() * ep),
                da[(2, 1)] - (-ix * vp + (n_ap - n_b) * ep + va * em),
                da[(0, 1)] - (-vp * em.conj() - vm.conj() * ep),
            ];
            for (slot, v) in r[2..].iter_mut().zip(eqs) {
                *slot = slot.max(v.norm());
            }
        }
        Ok(r)
    })?;
    Ok(report("mb", &MB_EQUATIONS, values, grid, &stencil, opts.order))
}

const PURE_EQUATIONS: [&str; 5] = ["field_e_minus", "field_e_plus", "amp_a1", "amp_a2", "amp_a3"];

/// Residuals of the pure-state system
///
/// ```text
/// e_-,zeta = -<a_3 a_1^*>            e_+,zeta = -<a_3 a_2^*>
/// a_tau = (U + i x J / 2) a
/// ```
pub fn residual_pure(state: &MBFieldState, grid: &Grid2D, opts: &ResidualOptions) -> Result<ResidualReport> {
    if !state.has_pure_state() {
        return Err(Error::MissingPureState);
    }
    if !state.is_maxwell_bloch() {
        return Err(Error::NotMaxwellBloch);
    }
    let stencil = opts.stencil()?;
    let det = state.detuning().clone();
    let values = scan_max(grid, PURE_EQUATIONS.len(), |tau, zeta| {
        let p = state.point(tau, zeta)?;
        let amps = p.pure.as_ref().ok_or(Error::MissingPureState)?;
        let damps = stencil.derivative(tau, |t| state.point(t, zeta)?.pure.ok_or(Error::MissingPureState))?;
        let dz = stencil.derivative(zeta, |z| state.fields(tau, z).map(|(a, b)| vec![a, b]))?;
        let c31: Vec<C64> = amps.iter().map(|a| a[2] * a[0].conj()).collect();
        let c32: Vec<C64> = amps.iter().map(|a| a[2] * a[1].conj()).collect();
        let mut r = vec![0.0; PURE_EQUATIONS.len()];
        r[0] = (dz[0] + det.average_values(&c31)).norm();
        r[1] = (dz[1] + det.average_values(&c32)).norm();
        let (em, ep) = (p.e_minus, p.e_plus);
        for (i, (a, da)) in amps.iter().zip(&damps).enumerate() {
            let half_ix = C64::new(0.0, 0.5 * det.offset(i));
            let eqs = [
                da[0] - (half_ix * a[0] - a[2] * em.conj()),
                da[1] - (half_ix * a[1] - a[2] * ep.conj()),
                da[2] - (-half_ix * a[2] + a[0] * em + a[1] * ep),
            ];
            for (slot, v) in r[2..].iter_mut().zip(eqs) {
                *slot = slot.max(v.norm());
            }
        }
        Ok(r)
    })?;
    Ok(report("pure", &PURE_EQUATIONS, values, grid, &stencil, opts.order))
}

const ZCR_EQUATIONS: [&str; 3] = ["zeta_line", "tau_line", "tau_line_averaged"];

/// Residuals of the zero-curvature system
///
/// ```text
/// U_zeta = [J, <A>] / 2
/// A_tau  = [U, A] + i x [J, A] / 2
/// ```
///
/// the second line per node and averaged over the broadening.
pub fn residual_zcr<F: ZcrFields + ?Sized>(fields: &F, grid: &Grid2D, opts: &ResidualOptions) -> Result<ResidualReport> {
    let stencil = opts.stencil()?;
    let det = fields.detuning().clone();
    let j = Matrix3::j();
    let values = scan_max(grid, ZCR_EQUATIONS.len(), |tau, zeta| {
        let u = fields.u_matrix(tau, zeta).map_err(|e| e.at(tau, zeta))?;
        let a = fields.a_matrices(tau, zeta).map_err(|e| e.at(tau, zeta))?;
        let du = stencil.derivative(zeta, |z| fields.u_matrix(tau, z).map_err(|e| e.at(tau, z)))?;
        let da = stencil.derivative(tau, |t| fields.a_matrices(t, zeta).map_err(|e| e.at(t, zeta)))?;
        let a_avg = det.average_matrices(&a);
        let zeta_line = (du - commutator(&j, &a_avg).scale_real(0.5)).max_abs();
        let mut per_node = Vec::with_capacity(a.len());
        for (i, (ai, dai)) in a.iter().zip(&da).enumerate() {
            let rhs = commutator(&u, ai) + commutator(&j, ai).scale(C64::new(0.0, 0.5 * det.offset(i)));
            per_node.push(*dai - rhs);
        }
        let tau_line = per_node.iter().fold(0.0f64, |acc, m| acc.max(m.max_abs()));
        let averaged = det.average_matrices(&per_node).max_abs();
        Ok(vec![zeta_line, tau_line, averaged])
    })?;
    Ok(report("zcr", &ZCR_EQUATIONS, values, grid, &stencil, opts.order))
}

/// Conserved-quantity scan of a state.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    /// `max |A - A^+|` over grid and nodes.
    pub hermiticity_dev: f64,
    /// Largest variation of `tr A` along tau at fixed zeta and node.
    pub trace_drift: f64,
    /// Same for `tr A^2`.
    pub trace_sq_drift: f64,
    /// Same for `sum |a_k|^2`, when the state is pure.
    pub purity_norm_drift: Option<f64>,
}

impl ConservationReport {
    pub fn max_drift(&self) -> f64 {
        self.hermiticity_dev.max(self.trace_drift).max(self.trace_sq_drift).max(self.purity_norm_drift.unwrap_or(0.0))
    }

    pub fn to_kv(&self) -> String {
        let mut out = format!(
            "conservation.hermiticity_dev={:.6e}\nconservation.trace_drift={:.6e}\nconservation.trace_sq_drift={:.6e}\n",
            self.hermiticity_dev, self.trace_drift, self.trace_sq_drift
        );
        if let Some(p) = self.purity_norm_drift {
            out.push_str(&format!("conservation.purity_norm_drift={p:.6e}\n"));
        }
        out
    }
}

pub fn conservation_report(state: &MBFieldState, grid: &Grid2D) -> Result<ConservationReport> {
    grid.validate()?;
    let taus = grid.taus();
    let pure = state.has_pure_state();
    let per_zeta: Vec<Result<[f64; 4]>> = grid
        .zetas()
        .par_iter()
        .map(|&zeta| {
            let mut herm = 0.0f64;
            let mut first: Option<(Vec<C64>, Vec<C64>, Vec<f64>)> = None;
            let (mut dtr, mut dtr2, mut dnorm) = (0.0f64, 0.0f64, 0.0f64);
            for &tau in &taus {
                let p = state.point(tau, zeta)?;
                let tr: Vec<C64> = p.bloch.iter().map(|a| a.trace()).collect();
                let tr2: Vec<C64> = p.bloch.iter().map(|a| (*a * *a).trace()).collect();
                let norms: Vec<f64> = p.pure.as_ref().map(|v| v.iter().map(|a| a.norm_sq()).collect()).unwrap_or_default();
                herm = p.bloch.iter().fold(herm, |acc, a| acc.max(a.hermitian_deviation()));
                match &first {
                    None => first = Some((tr, tr2, norms)),
                    Some((t0, s0, n0)) => {
                        dtr = t0.iter().zip(&tr).fold(dtr, |acc, (a, b)| acc.max((a - b).norm()));
                        dtr2 = s0.iter().zip(&tr2).fold(dtr2, |acc, (a, b)| acc.max((a - b).norm()));
                        dnorm = n0.iter().zip(&norms).fold(dnorm, |acc, (a, b)| acc.max((a - b).abs()));
                    }
                }
            }
            Ok([herm, dtr, dtr2, dnorm])
        })
        .collect();
    let mut acc = [0.0f64; 4];
    for r in per_zeta {
        for (a, v) in acc.iter_mut().zip(r?) {
            *a = a.max(v);
        }
    }
    Ok(ConservationReport {
        hermiticity_dev: acc[0],
        trace_drift: acc[1],
        trace_sq_drift: acc[2],
        purity_norm_drift: pure.then_some(acc[3]),
    })
}

/// `max |A - a a^+|` over the given points and all nodes.
pub fn purity_deviation(state: &MBFieldState, points: &[(f64, f64)]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &(tau, zeta) in points {
        let p = state.point(tau, zeta)?;
        let amps = p.pure.ok_or(Error::MissingPureState)?;
        for (a, v) in p.bloch.iter().zip(&amps) {
            worst = worst.max((*a - Matrix3::outer(v, &v.conj())).max_abs());
        }
    }
    Ok(worst)
}
