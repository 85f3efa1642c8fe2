//! Eigenmodes of the cross-section: a disjoint union of circles.
//!
//! The basis is the real trigonometric one (`1/√ℓ`, `√(2/ℓ) cos`, `√(2/ℓ) sin`), so
//! every radial coefficient problem stays real.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularManifold {
    pub circumferences: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Const,
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: usize,
    pub component: usize,
    pub m: u32,
    pub parity: Parity,
    pub mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Zero modes only.
    Pi,
    /// Everything orthogonal to the zero modes.
    PiC,
}

impl AngularManifold {
    pub fn new(circumferences: Vec<f64>) -> Result<Self> {
        if circumferences.is_empty() || circumferences.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::Domain(format!(
                "circumferences must be a non-empty list of positive reals, got {circumferences:?}"
            )));
        }
        Ok(Self { circumferences })
    }

    /// One circle of length 2π, so that `μ_k = m`.
    pub fn unit_circle() -> Self {
        Self { circumferences: vec![2.0 * PI] }
    }

    /// Number of connected components, i.e. the dimension of the kernel.
    pub fn k0(&self) -> usize {
        self.circumferences.len()
    }

    /// All modes with `μ <= mu_max`, ordered by `(μ, component, m, parity)`.
    pub fn modes_up_to(&self, mu_max: f64) -> Vec<Mode> {
        let mut out = Vec::new();
        for (c, &ell) in self.circumferences.iter().enumerate() {
            out.push(Mode { k: 0, component: c, m: 0, parity: Parity::Const, mu: 0.0 });
            let mut m = 1u32;
            loop {
                let mu = 2.0 * PI * m as f64 / ell;
                if mu > mu_max {
                    break;
                }
                out.push(Mode { k: 0, component: c, m, parity: Parity::Cos, mu });
                out.push(Mode { k: 0, component: c, m, parity: Parity::Sin, mu });
                m += 1;
            }
        }
        out.sort_by(|a, b| {
            a.mu.total_cmp(&b.mu)
                .then(a.component.cmp(&b.component))
                .then(a.m.cmp(&b.m))
                .then(a.parity.cmp(&b.parity))
        });
        for (k, mode) in out.iter_mut().enumerate() {
            mode.k = k;
        }
        out
    }

    /// The single mode `(component, m, parity)`, with `k` set to its global index.
    pub fn mode(&self, component: usize, m: u32, parity: Parity) -> Result<Mode> {
        let ell = *self
            .circumferences
            .get(component)
            .ok_or_else(|| Error::Domain(format!("no component {component}")))?;
        let mu = 2.0 * PI * m as f64 / ell;
        self.modes_up_to(mu)
            .into_iter()
            .find(|md| md.component == component && md.m == m && md.parity == parity)
            .ok_or_else(|| Error::Domain(format!("mode (m={m}, {parity:?}) does not exist")))
    }

    /// `e_k(θ)` on the mode's own component.
    pub fn basis(&self, mode: &Mode, theta: f64) -> f64 {
        let ell = self.circumferences[mode.component];
        let arg = 2.0 * PI * mode.m as f64 * theta / ell;
        match mode.parity {
            Parity::Const => 1.0 / ell.sqrt(),
            Parity::Cos => (2.0 / ell).sqrt() * arg.cos(),
            Parity::Sin => (2.0 / ell).sqrt() * arg.sin(),
        }
    }
}

/// Mask of the modes kept by `which`, intersected with `mask`.
pub fn project(modes: &[Mode], mask: &[bool], which: Projection) -> Vec<bool> {
    modes
        .iter()
        .zip(mask)
        .map(|(m, &keep)| {
            keep && match which {
                Projection::Pi => m.mu == 0.0,
                Projection::PiC => m.mu > 0.0,
            }
        })
        .collect()
}

/// Uniform θ grids (one per component) with tabulated basis functions.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    manifold: AngularManifold,
    modes: Vec<Mode>,
    n_theta: usize,
    /// `table[k][j] = e_k(θ_j)` on the component of mode `k`.
    table: Vec<Vec<f64>>,
}

impl AngularGrid {
    pub fn new(manifold: &AngularManifold, modes: &[Mode], n_theta: usize) -> Result<Self> {
        let max_m = modes.iter().map(|m| m.m).max().unwrap_or(0) as usize;
        precondition(n_theta >= 4 * max_m + 4, || {
            format!("theta grid of {n_theta} points too coarse for m = {max_m} (need {})", 4 * max_m + 4)
        })?;
        let table = modes
            .iter()
            .map(|md| {
                let ell = manifold.circumferences[md.component];
                (0..n_theta)
                    .map(|j| manifold.basis(md, ell * j as f64 / n_theta as f64))
                    .collect()
            })
            .collect();
        Ok(Self { manifold: manifold.clone(), modes: modes.to_vec(), n_theta, table })
    }

    /// Grid with 32·m_max points (at least 64), enough for odd powers of |ψ| in the L^q quadrature.
    pub fn with_default_resolution(manifold: &AngularManifold, modes: &[Mode]) -> Result<Self> {
        let max_m = modes.iter().map(|m| m.m).max().unwrap_or(0) as usize;
        Self::new(manifold, modes, (32 * max_m).max(64))
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn components(&self) -> usize {
        self.manifold.k0()
    }

    /// Trapezoid weight `ℓ/N` of component `c`.
    pub fn weight(&self, c: usize) -> f64 {
        self.manifold.circumferences[c] / self.n_theta as f64
    }

    /// `Σ_k c_k e_k(θ_j)` on every component grid.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); self.n_theta]; self.components()];
        self.synthesize_into(coeffs, &mut out);
        out
    }

    pub(crate) fn synthesize_into(&self, coeffs: &[Complex64], out: &mut [Vec<Complex64>]) {
        for row in out.iter_mut() {
            row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        }
        for ((md, row), &c) in self.modes.iter().zip(&self.table).zip(coeffs) {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (v, &e) in out[md.component].iter_mut().zip(row) {
                *v += c * e;
            }
        }
    }

    /// Trapezoid projection onto the tabulated modes.
    pub fn analyze(&self, values: &[Vec<Complex64>]) -> Vec<Complex64> {
        self.modes
            .iter()
            .zip(&self.table)
            .map(|(md, row)| {
                let w = self.weight(md.component);
                row.iter().zip(&values[md.component]).map(|(&e, &v)| v * e).sum::<Complex64>() * w
            })
            .collect()
    }

    /// `∫ |e_k|^q dθ` by the same trapezoid rule.
    pub fn lq_mass_of_mode(&self, k: usize, q: f64) -> f64 {
        let w = self.weight(self.modes[k].component);
        self.table[k].iter().map(|e| e.abs().powf(q)).sum::<f64>() * w
    }
}
