//! Coherent states on the exponential cusp saturate the semiclassical Schrödinger loss.

use serde::{Deserialize, Serialize};

use super::{dyadic, fit_labeled, par_map, Check, ExperimentReport, Table};
use crate::angular::{AngularGrid, AngularManifold, Parity};
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::norms::{exponents, lq_spatial, mixed_norm, sobolev, AdmissiblePair};
use crate::propagate::{CuspState, EvolutionKind, Propagator};
use crate::radial::{discretize, EigenSystem, RadialGrid};
use crate::semiclassics::CoherentState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpnessParams {
    pub p: f64,
    pub q: f64,
    pub h_list: Vec<f64>,
    /// Exponent of the Sobolev normalization in the divergence check; must be below `σ_S`.
    pub sigma: f64,
    /// Exponent for the `‖ψ₀^h‖_{H^σ} ≍ h^{−σ}` fit.
    pub sobolev_sigma: f64,
    pub r1: f64,
    pub time_nodes: usize,
    /// Radial step is `h / dr_divisor`.
    pub dr_divisor: f64,
    /// Grid ends at `−log h + rmax_margin`.
    pub rmax_margin: f64,
    pub cover_tol: f64,
}

impl Default for SharpnessParams {
    fn default() -> Self {
        Self {
            p: 4.0,
            q: 4.0,
            h_list: dyadic(4..=9),
            sigma: 0.0,
            sobolev_sigma: 1.0,
            r1: 0.5,
            time_nodes: 33,
            dr_divisor: 8.0,
            rmax_margin: 3.0,
            cover_tol: 1e-12,
        }
    }
}

/// `(N(h), ‖ψ₀^h‖_{H^σ})` for one `h`: `N` is the `L^p([0,1]_s; L^q)` norm of
/// `Π^c 1_{[r1,∞)} e^{−ish𝔭₁}ψ₀^h` with `ψ₀^h = e^{r/2}u₀^h e₁`.
pub fn coherent_mixed_norm(params: &SharpnessParams, h: f64) -> Result<(f64, f64)> {
    let p = params;
    let cs = CoherentState::new(h)?;
    let profile = WarpProfile::exp(0.0);
    let man = AngularManifold::unit_circle();
    let mode = man.mode(0, 1, Parity::Cos)?;
    let ang = AngularGrid::with_default_resolution(&man, std::slice::from_ref(&mode))?;
    let grid = RadialGrid::with_spacing(0.0, cs.center().0 + p.rmax_margin, h / p.dr_divisor)?;
    let op = discretize(&profile, mode.mu, grid)?;
    let state = CuspState::single(grid, mode, cs.sample(&grid))?;
    let es = [EigenSystem::covering(&op, &[&state.radial[0]], p.cover_tol)?];
    let prop = Propagator::new(&state, &es)?;
    let spatial = (0..p.time_nodes)
        .map(|j| {
            let s = j as f64 / (p.time_nodes - 1) as f64;
            let psi = prop.at(s * h, EvolutionKind::Schrodinger).project_nonzero().restrict(p.r1);
            lq_spatial(&psi, p.q, &profile, &ang)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((mixed_norm(&spatial, p.p, 1.0)?, sobolev(&state, p.sobolev_sigma, &es)?))
}

pub fn sharpness(params: &SharpnessParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    let pair = AdmissiblePair::schrodinger(p.p, p.q)?;
    precondition(p.q > 2.0, || "sharpness needs q > 2".into())?;
    let sigma_s = exponents(&pair)?.sigma_s;
    precondition(p.sigma < sigma_s, || format!("sigma = {} must be below sigma_S = {sigma_s}", p.sigma))?;
    precondition(p.r1 > 0.0, || "r1 must be positive".into())?;
    precondition(p.h_list.iter().all(|&h| h > 0.0 && h < 1.0), || "h values must lie in (0, 1)".into())?;
    precondition(p.time_nodes >= 3, || "at least 3 time nodes".into())?;
    let rows = par_map(jobs, &p.h_list, |&h| coherent_mixed_norm(p, h));
    let mut table = Table::new("norms", &["h", "mixed", "sobolev", "quotient"]);
    let (mut n_pts, mut s_pts, mut q_pts) = (vec![], vec![], vec![]);
    for (&h, row) in p.h_list.iter().zip(rows) {
        let (mixed, hs) = row?;
        let quotient = mixed * h.powf(p.sigma);
        table.push(vec![h, mixed, hs, quotient]);
        n_pts.push((h, mixed));
        s_pts.push((h, hs));
        q_pts.push((h, quotient));
    }
    let n_fit = fit_labeled("mixed", &n_pts)?;
    let s_fit = fit_labeled("sobolev", &s_pts)?;
    let q_fit = fit_labeled("quotient", &q_pts)?;
    let mut by_h = q_pts.clone();
    by_h.sort_by(|a, b| b.0.total_cmp(&a.0));
    let diverges = q_fit.slope < 0.0 && by_h.windows(2).all(|w| w[1].1 > w[0].1);
    let checks = vec![
        Check::within("mixed_slope", n_fit.slope, -1.5 / p.p, 0.15),
        Check::within("sobolev_slope", s_fit.slope, -p.sobolev_sigma, 0.10),
        Check::holds("quotient_diverges", diverges),
    ];
    ExperimentReport::new(
        "sharpness",
        params,
        vec![table],
        vec![n_fit, s_fit, q_fit],
        &["mixed", "sobolev"],
        checks,
        vec!["propagator e^{-ish p_1}, s in [0, 1]".into()],
    )
}
