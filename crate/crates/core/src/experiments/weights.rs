//! Weighted resolvent bounds stay uniform in the truncation radius and the angular mode.

use serde::{Deserialize, Serialize};

use super::{par_map, Check, ExperimentReport, Table};
use crate::angular::{AngularManifold, Mode, Parity};
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::radial::{elliptic_weight_check, rough_sobolev_check, RadialGrid};

/// `(N, N₁, N₂)` of `‖μ^{2N₂} e^{2N₂φ} D^{N₁} ξ (A+1)^{−N} u‖ / ‖u‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticCase {
    pub n: u32,
    pub n1: u32,
    pub n2: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipticWeightsParams {
    pub profile: WarpProfile,
    /// The first entry is the reference radius for the mode sweep.
    pub rmax_list: Vec<f64>,
    pub dr: f64,
    /// Cosine modes `m = 1..=m_max` on the unit circle.
    pub m_max: u32,
    pub cases: Vec<EllipticCase>,
    /// Exponents `q` of the rough Sobolev check `e^{2Nφ}(A+1)^{−2N}: L² → L^q`, with `N = 1`.
    pub sobolev_q: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub max_growth: f64,
}

impl Default for EllipticWeightsParams {
    fn default() -> Self {
        Self {
            profile: WarpProfile::exp(0.0),
            rmax_list: vec![40.0, 80.0],
            dr: 0.05,
            m_max: 20,
            cases: vec![
                EllipticCase { n: 1, n1: 0, n2: 0 },
                EllipticCase { n: 1, n1: 2, n2: 0 },
                EllipticCase { n: 1, n1: 0, n2: 1 },
                EllipticCase { n: 2, n1: 2, n2: 1 },
            ],
            sobolev_q: vec![4.0, 8.0],
            samples: 4,
            seed: 42,
            max_growth: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Quantity {
    Elliptic(EllipticCase),
    Rough(f64),
}

impl Quantity {
    fn label(&self) -> String {
        match self {
            Self::Elliptic(c) => format!("elliptic_{}_{}_{}", c.n, c.n1, c.n2),
            Self::Rough(q) => format!("rough_q{q}"),
        }
    }

    fn eval(&self, p: &EllipticWeightsParams, grid: RadialGrid, modes: &[Mode]) -> Result<f64> {
        match *self {
            Self::Elliptic(c) => elliptic_weight_check(&p.profile, grid, modes, c.n, c.n1, c.n2, p.samples, p.seed),
            Self::Rough(q) => rough_sobolev_check(&p.profile, grid, modes, 1.0, 1, q, p.samples, p.seed),
        }
    }
}

pub fn elliptic_weights(params: &EllipticWeightsParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.rmax_list.len() >= 2, || "at least two truncation radii".into())?;
    precondition(p.m_max >= 1 && p.samples >= 1, || "need m_max >= 1 and samples >= 1".into())?;
    let man = AngularManifold::unit_circle();
    let modes = (1..=p.m_max).map(|m| man.mode(0, m, Parity::Cos)).collect::<Result<Vec<_>>>()?;
    let mut quantities: Vec<Quantity> = p.cases.iter().map(|&c| Quantity::Elliptic(c)).collect();
    quantities.extend(p.sobolev_q.iter().map(|&q| Quantity::Rough(q)));
    // (quantity, rmax index, mode index or None for all modes)
    let mut tasks = vec![];
    for qi in 0..quantities.len() {
        for ri in 0..p.rmax_list.len() {
            tasks.push((qi, ri, None));
        }
        for mi in 0..modes.len() {
            tasks.push((qi, 0, Some(mi)));
        }
    }
    let rows = par_map(jobs, &tasks, |&(qi, ri, mi)| -> Result<f64> {
        let grid = RadialGrid::with_spacing(p.profile.r0, p.rmax_list[ri], p.dr)?;
        let sel: &[Mode] = match mi {
            Some(m) => std::slice::from_ref(&modes[m]),
            None => &modes,
        };
        quantities[qi].eval(p, grid, sel)
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let mut table = Table::new("ratios", &["quantity", "rmax", "m", "ratio"]);
    let mut checks = vec![];
    let mut idx = 0;
    for (qi, quantity) in quantities.iter().enumerate() {
        let by_r = &values[idx..idx + p.rmax_list.len()];
        idx += p.rmax_list.len();
        let by_m = &values[idx..idx + modes.len()];
        idx += modes.len();
        for (r, v) in p.rmax_list.iter().zip(by_r) {
            table.push(vec![qi as f64, *r, 0.0, *v]);
        }
        for (m, v) in modes.iter().zip(by_m) {
            table.push(vec![qi as f64, p.rmax_list[0], m.m as f64, *v]);
        }
        let r_growth = by_r.iter().copied().fold(0.0, f64::max) / by_r[0];
        let m_growth = by_m.iter().copied().fold(0.0, f64::max) / by_m[0];
        checks.push(Check::at_most(&format!("{}_rmax_growth", quantity.label()), r_growth, p.max_growth));
        checks.push(Check::at_most(&format!("{}_mode_growth", quantity.label()), m_growth, p.max_growth));
    }
    let notes = vec![format!(
        "quantity index: {}",
        quantities.iter().enumerate().map(|(i, q)| format!("{i}={}", q.label())).collect::<Vec<_>>().join(", ")
    )];
    ExperimentReport::new("elliptic_weights", params, vec![table], vec![], &[], checks, notes)
}
