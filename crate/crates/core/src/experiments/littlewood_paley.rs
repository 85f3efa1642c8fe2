//! Dyadic spectral partition and the square-function bound on the cusp.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{par_map, task_seed, Check, ExperimentReport, Table};
use crate::angular::{AngularGrid, AngularManifold};
use crate::bumps::{lp_band, lp_low, smooth_step};
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::norms::lq_spatial;
use crate::propagate::CuspState;
use crate::radial::{discretize, EigenSystem, RadialGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LittlewoodPaleyParams {
    pub profile: WarpProfile,
    pub q: f64,
    pub samples: usize,
    pub seed: u64,
    /// Modes with `μ <= mu_max` on the unit circle (the zero mode included).
    pub mu_max: f64,
    pub rmax: f64,
    pub dr: f64,
    /// Cutoff `ξ` rises from 0 at `r1` to 1 at `r1 + 1`.
    pub r1: f64,
    /// Coefficients are drawn for eigenvalues below `band_limit`.
    pub band_limit: f64,
    /// Coefficient weight `(1 + λ)^{−decay}`.
    pub decay: f64,
    /// Largest dyadic index; `None` picks the smallest one covering the discrete spectrum.
    pub l_max: Option<u32>,
    pub residual_tol: f64,
    pub max_constant: f64,
}

impl Default for LittlewoodPaleyParams {
    fn default() -> Self {
        Self {
            profile: WarpProfile::exp(0.0),
            q: 4.0,
            samples: 16,
            seed: 42,
            mu_max: 3.0,
            rmax: 8.0,
            dr: 0.02,
            r1: 1.0,
            band_limit: 1024.0,
            decay: 0.25,
            l_max: None,
            residual_tol: 1e-12,
            max_constant: 10.0,
        }
    }
}

/// `1 − lp_low(λ) − Σ_{l ≤ l_max} lp_band(2^{−l}λ)`.
pub fn partition_residual(lambda: f64, l_max: u32) -> f64 {
    let s: f64 = (0..=l_max).map(|l| lp_band(lambda / 2f64.powi(l as i32))).sum();
    1.0 - lp_low(lambda) - s
}

/// `(LHS, RHS)` of the square-function inequality for one random datum.
fn sample_ratio(
    p: &LittlewoodPaleyParams,
    grid: RadialGrid,
    modes: &[crate::angular::Mode],
    systems: &[EigenSystem],
    angular: &AngularGrid,
    l_max: u32,
    index: usize,
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(p.seed, index as u64));
    let coeffs: Vec<Vec<Complex64>> = systems
        .iter()
        .map(|es| {
            es.values
                .iter()
                .map(|&l| {
                    let g = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                    if l < p.band_limit {
                        g * (1.0 + l).powf(-p.decay)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();
    let synth = |f: &dyn Fn(f64) -> f64| -> CuspState {
        let radial = coeffs
            .iter()
            .zip(systems)
            .map(|(c, es)| {
                let m: Vec<Complex64> = c.iter().zip(&es.values).map(|(a, &l)| a * f(l)).collect();
                es.synthesize(&m)
            })
            .collect();
        CuspState { grid, modes: modes.to_vec(), radial }
    };
    let xi = |r: f64| smooth_step(r - p.r1);
    let psi = synth(&|_| 1.0);
    let lhs = lq_spatial(&psi.project_nonzero().multiply(xi), p.q, &p.profile, angular)?;
    let mut square = 0.0;
    let low = synth(&lp_low);
    square += lq_spatial(&low.project_nonzero().multiply(xi), p.q, &p.profile, angular)?.powi(2);
    for l in 0..=l_max {
        let scale = 2f64.powi(-(l as i32));
        let piece = synth(&|lam| lp_band(scale * lam));
        square += lq_spatial(&piece.project_nonzero().multiply(xi), p.q, &p.profile, angular)?.powi(2);
    }
    Ok((lhs, square.sqrt() + psi.norm()))
}

pub fn littlewood_paley(params: &LittlewoodPaleyParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition((2.0..=8.0).contains(&p.q), || format!("q = {} outside [2, 8]", p.q))?;
    precondition(p.samples >= 1, || "at least one sample".into())?;
    precondition(p.r1 > p.profile.r0, || format!("r1 = {} must exceed r0 = {}", p.r1, p.profile.r0))?;
    let man = AngularManifold::unit_circle();
    let modes = man.modes_up_to(p.mu_max);
    let angular = AngularGrid::with_default_resolution(&man, &modes)?;
    let grid = RadialGrid::with_spacing(p.profile.r0, p.rmax, p.dr)?;
    let systems = modes
        .iter()
        .map(|m| EigenSystem::full(&discretize(&p.profile, m.mu, grid)?))
        .collect::<Result<Vec<_>>>()?;
    let top = systems.iter().flat_map(|es| es.values.iter().copied()).fold(0.0, f64::max);
    // the partial sum up to l_max telescopes to lp_low(2^{−l_max−1}λ), which is 1 for λ <= 2^{l_max+1}
    let needed = (top.max(2.0).log2() - 1.0).ceil().max(0.0) as u32;
    let l_max = p.l_max.unwrap_or(needed);
    precondition(l_max >= needed, || format!("l_max = {l_max} does not resolve the spectrum up to {top}; need {needed}"))?;
    let residual = systems
        .iter()
        .flat_map(|es| es.values.iter())
        .map(|&l| partition_residual(l, l_max).abs())
        .fold(0.0, f64::max);
    let indices: Vec<usize> = (0..p.samples).collect();
    let rows = par_map(jobs, &indices, |&i| sample_ratio(p, grid, &modes, &systems, &angular, l_max, i));
    let mut table = Table::new("samples", &["sample", "lhs", "rhs", "ratio"]);
    let mut worst = 0.0f64;
    for (i, row) in rows.into_iter().enumerate() {
        let (lhs, rhs) = row?;
        worst = worst.max(lhs / rhs);
        table.push(vec![i as f64, lhs, rhs, lhs / rhs]);
    }
    let checks = vec![
        Check::at_most("partition_residual", residual, p.residual_tol),
        Check::at_most("max_ratio", worst, p.max_constant),
    ];
    let notes = vec![format!("l_max = {l_max}, top eigenvalue {top}")];
    ExperimentReport::new("littlewood_paley", params, vec![table], vec![], &[], checks, notes)
}
