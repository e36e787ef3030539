//! Inhomogeneous-broadening distributions and the averaging bracket
//! `<F> = integral f(eta) F(eta) d eta`, realized as a weighted sum over
//! materialized quadrature nodes.

use crate::error::{Error, Result};
use crate::C64;

/// One quadrature node of the detuning distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub eta: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BroadeningModel {
    /// Delta distribution at `eta0`.
    SharpLine { eta0: f64 },
    /// Explicit `(eta, weight)` pairs; weights are renormalized.
    Discrete { nodes: Vec<(f64, f64)> },
    /// Normal distribution, Gauss-Hermite nodes.
    Gaussian { center: f64, width: f64, n_nodes: usize },
    /// Lorentzian of half-width `width` truncated to `center +- cutoff`.
    Lorentzian { center: f64, width: f64, n_nodes: usize, cutoff: f64 },
}

impl Default for BroadeningModel {
    fn default() -> Self {
        BroadeningModel::SharpLine { eta0: 0.0 }
    }
}

impl BroadeningModel {
    pub fn materialize(&self) -> Result<Vec<Node>> {
        match self {
            BroadeningModel::SharpLine { eta0 } => Ok(vec![Node { eta: *eta0, weight: 1.0 }]),
            BroadeningModel::Discrete { nodes } => discrete_nodes(nodes),
            BroadeningModel::Gaussian { center, width, n_nodes } => {
                check_width(*width)?;
                check_count(*n_nodes)?;
                let (x, w) = gauss_hermite(*n_nodes);
                let scale = std::f64::consts::SQRT_2 * width;
                let norm: f64 = w.iter().sum();
                Ok(x.iter().zip(&w).map(|(&t, &wt)| Node { eta: center + scale * t, weight: wt / norm }).collect())
            }
            BroadeningModel::Lorentzian { center, width, n_nodes, cutoff } => {
                check_width(*width)?;
                check_count(*n_nodes)?;
                if !(*cutoff > 0.0) {
                    return Err(Error::NonpositiveCutoff(*cutoff));
                }
                // eta = center + width * tan(theta) maps the Lorentzian onto a
                // uniform density in theta; midpoint nodes on the truncated range.
                let theta_max = (cutoff / width).atan();
                let step = 2.0 * theta_max / *n_nodes as f64;
                let weight = 1.0 / *n_nodes as f64;
                Ok((0..*n_nodes)
                    .map(|j| {
                        let theta = -theta_max + (j as f64 + 0.5) * step;
                        Node { eta: center + width * theta.tan(), weight }
                    })
                    .collect())
            }
        }
    }

    /// `<g>` over freshly materialized nodes.
    pub fn average<F>(&self, integrand: F) -> Result<C64>
    where
        F: FnMut(f64) -> Result<C64>,
    {
        average(&self.materialize()?, integrand)
    }
}

fn check_width(width: f64) -> Result<()> {
    if width > 0.0 {
        Ok(())
    } else {
        Err(Error::NonpositiveWidth(width))
    }
}

fn check_count(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::TooFewNodes(n))
    }
}

fn discrete_nodes(nodes: &[(f64, f64)]) -> Result<Vec<Node>> {
    if nodes.is_empty() {
        return Err(Error::EmptyNodeSet);
    }
    for (index, &(eta, weight)) in nodes.iter().enumerate() {
        if !(weight >= 0.0) || !weight.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidWeight { index, weight });
        }
    }
    let total: f64 = nodes.iter().map(|&(_, w)| w).sum();
    if !(total > 0.0) {
        return Err(Error::EmptyNodeSet);
    }
    Ok(nodes.iter().map(|&(eta, w)| Node { eta, weight: w / total }).collect())
}

/// `sum_i w_i g(eta_i)`.
pub fn average<F>(nodes: &[Node], mut integrand: F) -> Result<C64>
where
    F: FnMut(f64) -> Result<C64>,
{
    let mut acc = C64::new(0.0, 0.0);
    for node in nodes {
        acc += integrand(node.eta)? * node.weight;
    }
    Ok(acc)
}

/// Weighted sum of values already evaluated on `nodes`.
pub fn average_values(nodes: &[Node], values: &[C64]) -> C64 {
    debug_assert_eq!(nodes.len(), values.len());
    nodes.iter().zip(values).fold(C64::new(0.0, 0.0), |acc, (n, v)| acc + v * n.weight)
}

/// Physicists' Gauss-Hermite rule for weight `exp(-t^2)`, nodes ascending.
///
/// Newton iteration on the orthonormal Hermite recurrence; weights sum to
/// `sqrt(pi)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    // generated descending; flip so node order is ascending
    x.reverse();
    w.reverse();
    (x, w)
}
