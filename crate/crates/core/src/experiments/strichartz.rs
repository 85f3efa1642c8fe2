//! Boundedness of Strichartz quotients for random spectrally localized data.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{dyadic, par_map, task_seed, Check, ExperimentReport, Table};
use crate::angular::{AngularGrid, AngularManifold, Mode};
use crate::bumps::{phi_spec, PHI_SPEC_SUPPORT};
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::norms::{exponents, lq_spatial, mixed_norm, AdmissiblePair};
use crate::propagate::{CuspState, EvolutionKind};
use crate::radial::{discretize, EigenSystem, RadialGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrichartzParams {
    pub profile: WarpProfile,
    pub p: f64,
    pub q: f64,
    pub h_list: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    /// Nonzero modes with `μ <= mu_max` on the unit circle carry data.
    pub mu_max: f64,
    pub r1: f64,
    /// Time window: `[0, window·h]` for Schrödinger, `[0, window]` for the wave.
    pub window: f64,
    /// Schrödinger only: use `[0, window]` and the normalizer `h^{−σ_S−1/p}`.
    pub unit_window: bool,
    pub time_nodes: usize,
    pub dr_divisor: f64,
    /// Grid ends where `h μ_min e^{φ(r)}` exceeds the symbol support by `e^{rmax_margin}`.
    pub rmax_margin: f64,
    /// Pass threshold for `max_h R / min_h R`.
    pub max_ratio: f64,
}

impl StrichartzParams {
    pub fn schrodinger_default() -> Self {
        Self {
            profile: WarpProfile::exp(0.0),
            p: 4.0,
            q: 4.0,
            h_list: dyadic(3..=7),
            samples: 16,
            seed: 42,
            mu_max: 3.0,
            r1: 0.5,
            window: 1.0,
            unit_window: false,
            time_nodes: 17,
            dr_divisor: 8.0,
            rmax_margin: 2.0,
            max_ratio: 3.0,
        }
    }

    pub fn wave_default() -> Self {
        Self { p: 8.0, q: 4.0, ..Self::schrodinger_default() }
    }
}

struct Setup {
    grid: RadialGrid,
    modes: Vec<Mode>,
    angular: AngularGrid,
    systems: Vec<EigenSystem>,
}

fn setup(p: &StrichartzParams, h: f64) -> Result<Setup> {
    let man = AngularManifold::unit_circle();
    let modes: Vec<Mode> = man.modes_up_to(p.mu_max).into_iter().filter(|m| m.mu > 0.0).collect();
    precondition(!modes.is_empty(), || format!("no nonzero modes with mu <= {}", p.mu_max))?;
    let mu_min = modes[0].mu;
    let edge = (PHI_SPEC_SUPPORT.1.sqrt() / (h * mu_min)).ln() + p.rmax_margin;
    let rmax = p.profile.phi_inverse(edge).max(p.r1 + 1.0);
    let grid = RadialGrid::with_spacing(p.profile.r0, rmax, h / p.dr_divisor)?;
    let angular = AngularGrid::with_default_resolution(&man, &modes)?;
    let h2 = h * h;
    let systems = modes
        .iter()
        .map(|m| EigenSystem::window(&discretize(&p.profile, m.mu, grid)?, PHI_SPEC_SUPPORT.0 / h2, PHI_SPEC_SUPPORT.1 / h2))
        .collect::<Result<Vec<_>>>()?;
    Ok(Setup { grid, modes, angular, systems })
}

/// Quotients `R` of every sample at one `h`.
fn quotients_at(p: &StrichartzParams, kind: EvolutionKind, h: f64, h_index: usize) -> Result<Vec<f64>> {
    let s = setup(p, h)?;
    let pair = if kind == EvolutionKind::Schrodinger {
        AdmissiblePair::schrodinger(p.p, p.q)?
    } else {
        AdmissiblePair::wave(p.p, p.q)?
    };
    let loss = exponents(&pair)?;
    let (length, sigma) = match kind {
        EvolutionKind::Schrodinger if p.unit_window => (p.window, loss.sigma_s + 1.0 / p.p),
        EvolutionKind::Schrodinger => (p.window * h, loss.sigma_s),
        _ => (p.window, loss.sigma_w),
    };
    let h2 = h * h;
    let times: Vec<f64> = (0..p.time_nodes).map(|j| length * j as f64 / (p.time_nodes - 1) as f64).collect();
    let mut out = Vec::with_capacity(p.samples);
    for sample in 0..p.samples {
        let mut rng = ChaCha8Rng::seed_from_u64(task_seed(p.seed, (h_index * 100_000 + sample) as u64));
        let coeffs: Vec<Vec<Complex64>> = s
            .systems
            .iter()
            .map(|es| {
                es.values
                    .iter()
                    .map(|&l| {
                        let g = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
                        g * phi_spec(h2 * l)
                    })
                    .collect()
            })
            .collect();
        let l2 = coeffs.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let spatial = times
            .iter()
            .map(|&t| {
                let radial = coeffs
                    .iter()
                    .zip(&s.systems)
                    .map(|(c, es)| {
                        let m: Vec<Complex64> = c.iter().zip(&es.values).map(|(a, &l)| a * kind.multiplier(t, l)).collect();
                        es.synthesize(&m)
                    })
                    .collect();
                let psi = CuspState { grid: s.grid, modes: s.modes.clone(), radial }.project_nonzero().restrict(p.r1);
                lq_spatial(&psi, p.q, &p.profile, &s.angular)
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(mixed_norm(&spatial, p.p, length)? / (h.powf(-sigma) * l2));
    }
    Ok(out)
}

fn run(name: &str, p: &StrichartzParams, kind: EvolutionKind, jobs: usize) -> Result<ExperimentReport> {
    precondition(p.samples >= 1, || "at least one sample".into())?;
    precondition(p.time_nodes >= 3, || "at least 3 time nodes".into())?;
    precondition(p.r1 > p.profile.r0, || format!("r1 = {} must exceed r0 = {}", p.r1, p.profile.r0))?;
    precondition(p.h_list.iter().all(|&h| h > 0.0 && h <= 1.0), || "h values must lie in (0, 1]".into())?;
    let indexed: Vec<(usize, f64)> = p.h_list.iter().copied().enumerate().collect();
    let rows = par_map(jobs, &indexed, |&(i, h)| quotients_at(p, kind, h, i));
    let mut samples = Table::new("samples", &["h", "sample", "quotient"]);
    let mut summary = Table::new("summary", &["h", "max", "min", "mean"]);
    let mut maxima = vec![];
    for (&h, row) in p.h_list.iter().zip(rows) {
        let r = row?;
        for (j, v) in r.iter().enumerate() {
            samples.push(vec![h, j as f64, *v]);
        }
        let max = r.iter().copied().fold(0.0, f64::max);
        let min = r.iter().copied().fold(f64::INFINITY, f64::min);
        summary.push(vec![h, max, min, r.iter().sum::<f64>() / r.len() as f64]);
        maxima.push(max);
    }
    let hi = maxima.iter().copied().fold(0.0, f64::max);
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let checks = vec![Check::at_most("max_over_min", hi / lo, p.max_ratio)];
    let notes = vec!["R(h) is the largest quotient over the samples drawn at that h".into()];
    ExperimentReport::new(name, p, vec![summary, samples], vec![], &[], checks, notes)
}

/// `‖Π^c 1_{[r1,∞)} e^{itΔ}ψ‖_{L^p([0,h]; L^q)} / (h^{−σ_S}‖ψ‖)` for random `ψ = φ_spec(−h²Δ)ψ`.
pub fn schrodinger_semiclassical(params: &StrichartzParams, jobs: usize) -> Result<ExperimentReport> {
    AdmissiblePair::schrodinger(params.p, params.q)?;
    run("schrodinger_semiclassical", params, EvolutionKind::Schrodinger, jobs)
}

/// `‖Π^c 1_{[r1,∞)} cos(t√−Δ)ψ‖_{L^p([0,window]; L^q)} / (h^{−σ_w}‖ψ‖)` for random localized `ψ`.
pub fn wave_strichartz(params: &StrichartzParams, jobs: usize) -> Result<ExperimentReport> {
    AdmissiblePair::wave(params.p, params.q)?;
    run("wave_strichartz", params, EvolutionKind::CosWave, jobs)
}
