//! Zero-mode counterexamples: translated bumps whose `L^q` norms outgrow every Sobolev norm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fit_exponential, par_map, Check, ExperimentReport, Table};
use crate::angular::{AngularGrid, AngularManifold};
use crate::bumps::bump;
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::norms::{lq_spatial, mixed_norm, sobolev};
use crate::propagate::{exact_flat_cusp, exact_flat_cusp_parts, CuspState, EvolutionKind, Propagator};
use crate::radial::{discretize, EigenSystem, RadialGrid};

/// Residual tolerance for the windowed eigensystems of these experiments.
const COVER_TOL: f64 = 1e-12;

fn zero_mode_setup(grid: RadialGrid) -> Result<(CuspState, AngularGrid)> {
    let man = AngularManifold::unit_circle();
    let modes = man.modes_up_to(0.0);
    let ang = AngularGrid::with_default_resolution(&man, &modes)?;
    Ok((CuspState::zero(grid, modes), ang))
}

/// `u₀(x) = bump(x/2)`, supported in `[−2, 2]`.
fn profile_bump(x: f64) -> f64 {
    bump(0.5 * x)
}

fn translated_bump(grid: RadialGrid, n: f64) -> Result<(CuspState, AngularGrid)> {
    let (mut state, ang) = zero_mode_setup(grid)?;
    state.radial[0] = grid.nodes().iter().map(|&r| Complex64::new(profile_bump(r - n), 0.0)).collect();
    Ok((state, ang))
}

fn increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevFailureParams {
    pub profile: WarpProfile,
    pub q: f64,
    pub sigma: f64,
    pub n_list: Vec<f64>,
    pub rmax: f64,
    pub dr: f64,
}

impl Default for SobolevFailureParams {
    fn default() -> Self {
        Self { profile: WarpProfile::exp(0.0), q: 4.0, sigma: 2.0, n_list: vec![6.0, 8.0, 10.0, 12.0, 14.0], rmax: 26.0, dr: 0.02 }
    }
}

fn check_translates(profile: &WarpProfile, n_list: &[f64], rmax: f64) -> Result<()> {
    precondition(n_list.len() >= 4, || "at least 4 translates required".into())?;
    precondition(n_list.windows(2).all(|w| w[1] > w[0]), || "n_list must be increasing".into())?;
    precondition(n_list[0] - 2.0 > profile.r0, || format!("bump at n = {} reaches r0 = {}", n_list[0], profile.r0))?;
    let last = n_list[n_list.len() - 1];
    precondition(last + 10.0 <= rmax, || format!("max n + 10 = {} exceeds rmax = {rmax}", last + 10.0))
}

/// Quotient `‖ψ_n‖_{L^q} / ‖ψ_n‖_{H^σ}` for zero-mode bumps centred at `n`.
pub fn sobolev_failure(params: &SobolevFailureParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.q > 2.0, || format!("q = {} must exceed 2", p.q))?;
    precondition(p.sigma >= 0.0, || "sigma must be nonnegative".into())?;
    check_translates(&p.profile, &p.n_list, p.rmax)?;
    let grid = RadialGrid::with_spacing(p.profile.r0, p.rmax, p.dr)?;
    let op = discretize(&p.profile, 0.0, grid)?;
    let rows = par_map(jobs, &p.n_list, |&n| -> Result<(f64, f64)> {
        let (state, ang) = translated_bump(grid, n)?;
        let es = EigenSystem::covering(&op, &[&state.radial[0]], COVER_TOL)?;
        Ok((lq_spatial(&state, p.q, &p.profile, &ang)?, sobolev(&state, p.sigma, &[es])?))
    });
    let mut table = Table::new("quotients", &["n", "phi_n", "lq", "sobolev", "quotient"]);
    let mut points = vec![];
    for (&n, row) in p.n_list.iter().zip(rows) {
        let (lq, hs) = row?;
        let phi = p.profile.phi(n);
        table.push(vec![n, phi, lq, hs, lq / hs]);
        points.push((phi, lq / hs));
    }
    let fit = fit_exponential("quotient", &points)?;
    let target = 0.5 - 1.0 / p.q;
    let quotients: Vec<f64> = points.iter().map(|x| x.1).collect();
    let checks = vec![Check::within("slope", fit.slope, target, 0.15), Check::holds("increasing", increasing(&quotients))];
    ExperimentReport::new("sobolev_failure", params, vec![table], vec![fit], &["quotient"], checks, vec![])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveFailureParams {
    pub profile: WarpProfile,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub n_list: Vec<f64>,
    /// Length of the time window `[0, t0]`.
    pub t0: f64,
    pub time_nodes: usize,
    pub rmax: f64,
    pub dr: f64,
}

impl Default for WaveFailureParams {
    fn default() -> Self {
        Self {
            profile: WarpProfile::exp(0.0),
            p: 8.0,
            q: 4.0,
            sigma: 2.0,
            n_list: vec![6.0, 8.0, 10.0, 12.0, 14.0],
            t0: 0.25,
            time_nodes: 17,
            rmax: 26.0,
            dr: 0.02,
        }
    }
}

/// Quotient `‖cos(t√𝔭₀)ψ_n‖_{L^p([0,t0]; L^q)} / ‖ψ_n‖_{H^σ}`.
pub fn wave_failure(params: &WaveFailureParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.q > 2.0 && p.p >= 2.0, || format!("(p, q) = ({}, {}) not allowed", p.p, p.q))?;
    precondition(p.t0 > 0.0 && p.t0 <= 1.0, || format!("t0 = {} outside (0, 1]", p.t0))?;
    check_translates(&p.profile, &p.n_list, p.rmax)?;
    let grid = RadialGrid::with_spacing(p.profile.r0, p.rmax, p.dr)?;
    let op = discretize(&p.profile, 0.0, grid)?;
    let times: Vec<f64> = (0..p.time_nodes).map(|j| p.t0 * j as f64 / (p.time_nodes - 1) as f64).collect();
    let rows = par_map(jobs, &p.n_list, |&n| -> Result<(f64, f64, f64)> {
        let (state, ang) = translated_bump(grid, n)?;
        let es = [EigenSystem::covering(&op, &[&state.radial[0]], COVER_TOL)?];
        let prop = Propagator::new(&state, &es)?;
        let spatial = times
            .iter()
            .map(|&t| lq_spatial(&prop.at(t, EvolutionKind::CosWave), p.q, &p.profile, &ang))
            .collect::<Result<Vec<_>>>()?;
        let hs = sobolev(&state, p.sigma, &es)?;
        Ok((mixed_norm(&spatial, p.p, p.t0)?, hs, spatial[0] / hs))
    });
    let mut table = Table::new("quotients", &["n", "phi_n", "mixed", "sobolev", "quotient", "quotient_t0"]);
    let mut points = vec![];
    for (&n, row) in p.n_list.iter().zip(rows) {
        let (mixed, hs, q0) = row?;
        let phi = p.profile.phi(n);
        table.push(vec![n, phi, mixed, hs, mixed / hs, q0]);
        points.push((phi, mixed / hs));
    }
    let fit = fit_exponential("quotient", &points)?;
    let quotients: Vec<f64> = points.iter().map(|x| x.1).collect();
    let checks = vec![
        Check::within("slope", fit.slope, 0.5 - 1.0 / p.q, 0.15),
        Check::holds("increasing", increasing(&quotients)),
    ];
    ExperimentReport::new("wave_failure", params, vec![table], vec![fit], &["quotient"], checks, vec![])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactFailureParams {
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub n_list: Vec<f64>,
    pub time_nodes: usize,
    pub rmax: f64,
    pub dr: f64,
    /// Centre of the datum used to cross-validate the discrete propagator.
    pub oracle_n: f64,
    /// Number of equispaced times in `[−1, 1]` for the cross-validation.
    pub oracle_times: usize,
    pub oracle_tol: f64,
}

impl Default for ExactFailureParams {
    fn default() -> Self {
        Self {
            p: 4.0,
            q: 4.0,
            sigma: 2.0,
            n_list: vec![6.0, 8.0, 10.0, 12.0, 14.0],
            time_nodes: 33,
            rmax: 60.0,
            dr: 0.01,
            oracle_n: 8.0,
            oracle_times: 41,
            oracle_tol: 1e-4,
        }
    }
}

/// Largest sup-norm gap between the discrete propagator (sign `e^{+it𝔭₀}`) and the closed
/// form over `times`, for the datum centred at `n`.
pub fn oracle_sup_error(grid: RadialGrid, n: f64, times: &[f64]) -> Result<f64> {
    let profile = WarpProfile::exp(0.0);
    let op = discretize(&profile, 0.0, grid)?;
    let nodes = grid.nodes();
    let (mut state, _) = zero_mode_setup(grid)?;
    state.radial[0] = exact_flat_cusp(n, 0.0, &nodes);
    let es = [EigenSystem::covering(&op, &[&state.radial[0]], COVER_TOL)?];
    let prop = Propagator::new(&state, &es)?;
    let mut worst = 0.0f64;
    for &t in times {
        let num = prop.at(-t, EvolutionKind::Schrodinger);
        let exact = exact_flat_cusp(n, t, &nodes);
        let err = num.radial[0].iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Mixed norms of the closed-form evolution on the exponential cusp, plus cross-validation
/// of the discrete propagator against the same closed form.
pub fn schrodinger_failure_exact(params: &ExactFailureParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.q > 2.0 && p.p >= 2.0, || format!("(p, q) = ({}, {}) not allowed", p.p, p.q))?;
    precondition(p.oracle_times >= 2, || "at least two oracle times".into())?;
    let profile = WarpProfile::exp(0.0);
    check_translates(&profile, &p.n_list, p.rmax)?;
    let grid = RadialGrid::with_spacing(0.0, p.rmax, p.dr)?;
    let nodes = grid.nodes();
    let op = discretize(&profile, 0.0, grid)?;
    let times: Vec<f64> = (0..p.time_nodes).map(|j| j as f64 / (p.time_nodes - 1) as f64).collect();
    let (template, ang) = zero_mode_setup(grid)?;
    let with = |u: Vec<Complex64>| {
        let mut s = template.clone();
        s.radial[0] = u;
        s
    };
    let mixed_of = |f: &dyn Fn(f64) -> Vec<Complex64>| -> Result<f64> {
        let spatial = times.iter().map(|&t| lq_spatial(&with(f(t)), p.q, &profile, &ang)).collect::<Result<Vec<_>>>()?;
        mixed_norm(&spatial, p.p, 1.0)
    };
    let rows = par_map(jobs, &p.n_list, |&n| -> Result<(f64, f64, f64)> {
        let data = with(exact_flat_cusp(n, 0.0, &nodes));
        let es = EigenSystem::covering(&op, &[&data.radial[0]], COVER_TOL)?;
        let hs = sobolev(&data, p.sigma, &[es])?;
        let mixed = mixed_of(&|t| exact_flat_cusp(n, t, &nodes))?;
        let q0 = lq_spatial(&data, p.q, &profile, &ang)? / hs;
        Ok((mixed, hs, q0))
    });
    let mut table = Table::new("quotients", &["n", "mixed", "sobolev", "quotient", "quotient_t0"]);
    let mut points = vec![];
    for (&n, row) in p.n_list.iter().zip(rows) {
        let (mixed, hs, q0) = row?;
        table.push(vec![n, mixed, hs, mixed / hs, q0]);
        points.push((n, mixed / hs));
    }
    let fit = fit_exponential("quotient", &points)?;
    let image = mixed_of(&|t| exact_flat_cusp_parts(p.oracle_n, t, &nodes).1)?;
    let full = mixed_of(&|t| exact_flat_cusp(p.oracle_n, t, &nodes))?;
    let oracle_times: Vec<f64> =
        (0..p.oracle_times).map(|j| -1.0 + 2.0 * j as f64 / (p.oracle_times - 1) as f64).collect();
    let oracle = oracle_sup_error(grid, p.oracle_n, &oracle_times)?;
    let quotients: Vec<f64> = points.iter().map(|x| x.1).collect();
    let checks = vec![
        Check::within("slope", fit.slope, 0.5 - 1.0 / p.q, 0.15),
        Check::holds("increasing", increasing(&quotients)),
        Check::at_most("image_share", image / full, 0.01),
        Check::at_most("oracle_sup_error", oracle, p.oracle_tol),
    ];
    let notes = vec![format!("discrete propagator applied with multiplier e^{{+it lambda}} to match the closed form")];
    ExperimentReport::new("schrodinger_failure_exact", params, vec![table], vec![fit], &["quotient"], checks, notes)
}
