//! Structural identities of the discretization and the reporting layer.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{littlewood_paley, task_seed, Check, ExperimentReport, LittlewoodPaleyParams, Table};
use crate::angular::{AngularGrid, AngularManifold};
use crate::config::{parse_config, RunConfig};
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::propagate::{evolve, wave_energy, wave_solution, CuspState, EvolutionKind};
use crate::radial::{discretize, EigenSystem, RadialGrid, RadialOperator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantsParams {
    pub profile: WarpProfile,
    pub rmax: f64,
    pub dr: f64,
    pub mu_max: f64,
    pub seed: u64,
    pub t1: f64,
    pub t2: f64,
    /// Group-law and energy data are drawn below this eigenvalue: `e^{−it₁λ}e^{−it₂λ}` and
    /// `e^{−i(t₁+t₂)λ}` differ by about `ε·|tλ|` in floating point.
    pub band_limit: f64,
    /// Relative tolerance of the unitary and spectral identities.
    pub tol: f64,
    /// Relative tolerance of wave energy conservation.
    pub energy_tol: f64,
}

impl Default for InvariantsParams {
    fn default() -> Self {
        Self {
            profile: WarpProfile::exp(0.0),
            rmax: 12.0,
            dr: 0.05,
            mu_max: 2.0,
            seed: 42,
            t1: 0.3,
            t2: 0.45,
            band_limit: 1e4,
            tol: 1e-12,
            energy_tol: 1e-10,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn rel_diff(a: &CuspState, b: &CuspState) -> Result<f64> {
    Ok(a.sub(b)?.norm() / b.norm())
}

pub fn invariants(params: &InvariantsParams, _jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.rmax > p.profile.r0 && p.dr > 0.0, || "empty radial grid".into())?;
    let man = AngularManifold::unit_circle();
    let modes = man.modes_up_to(p.mu_max);
    let grid = RadialGrid::with_spacing(p.profile.r0, p.rmax, p.dr)?;
    let ops = modes.iter().map(|m| discretize(&p.profile, m.mu, grid)).collect::<Result<Vec<RadialOperator>>>()?;
    let systems = ops.iter().map(EigenSystem::full).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(p.seed, 0));
    let noise = |rng: &mut ChaCha8Rng| CuspState {
        grid,
        modes: modes.clone(),
        radial: modes.iter().map(|_| (0..grid.n).map(|_| gaussian(rng)).collect()).collect(),
    };
    let u = noise(&mut rng);
    let norm = u.norm();
    let banded = |rng: &mut ChaCha8Rng| -> Result<CuspState> {
        let w = noise(rng);
        crate::propagate::apply_multiplier(&w, &systems, |l| Complex64::new(if l < p.band_limit { 1.0 } else { 0.0 }, 0.0))
    };
    let (b0, b1) = (banded(&mut rng)?, banded(&mut rng)?);

    let parseval = {
        let coeff: f64 = u
            .radial
            .iter()
            .zip(&systems)
            .map(|(x, es)| es.coefficients(x).iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum();
        (coeff - norm * norm).abs() / (norm * norm)
    };
    let mut unitarity = 0.0f64;
    let mut group = 0.0f64;
    for kind in [EvolutionKind::Schrodinger, EvolutionKind::HalfWave] {
        let a = evolve(&u, &systems, p.t1, kind)?;
        unitarity = unitarity.max((a.norm() - norm).abs() / norm);
        let a = evolve(&b0, &systems, p.t1, kind)?;
        let ab = evolve(&a, &systems, p.t2, kind)?;
        let direct = evolve(&b0, &systems, p.t1 + p.t2, kind)?;
        group = group.max(rel_diff(&ab, &direct)?);
        let back = evolve(&a, &systems, -p.t1, kind)?;
        group = group.max(rel_diff(&back, &b0)?);
    }
    let energy = {
        let e0 = wave_energy(&b0, &b1, &ops)?;
        let mut worst = 0.0f64;
        for t in [p.t1, p.t2, p.t1 + p.t2] {
            let (psi, dpsi) = wave_solution(&b0, &b1, &systems, t)?;
            worst = worst.max((wave_energy(&psi, &dpsi, &ops)? - e0).abs() / e0);
        }
        worst
    };
    let angular = {
        let ag = AngularGrid::with_default_resolution(&man, &modes)?;
        let c: Vec<Complex64> = modes.iter().map(|_| gaussian(&mut rng)).collect();
        let back = ag.analyze(&ag.synthesize(&c));
        let scale = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        c.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
    };
    let config_round_trip = {
        let text = "experiment = littlewood_paley\nseed = 7\ngeometry.kind = power\ngeometry.sigma = 2.5\n\
                    angular.circumferences = [6.283185307179586, 1.5]\nradial.rmax = 9\nradial.n = 300\nparams.q = 3.5\n";
        let c = parse_config(text)?;
        let again = parse_config(&c.to_text())?;
        c == again && parse_config(&RunConfig::new("suite").to_text())? == RunConfig::new("suite")
    };
    let (csv_identical, json_round_trip) = {
        let lp = LittlewoodPaleyParams { samples: 3, seed: p.seed, ..LittlewoodPaleyParams::default() };
        let a = littlewood_paley(&lp, 1)?;
        let b = littlewood_paley(&lp, 1)?;
        let csv = a.measurements.iter().zip(&b.measurements).all(|(x, y)| x.to_csv() == y.to_csv());
        (csv, ExperimentReport::from_json(&a.to_json()?)? == a)
    };

    let mut table = Table::new("defects", &["parseval", "unitarity", "group_law", "wave_energy", "angular"]);
    table.push(vec![parseval, unitarity, group, energy, angular]);
    let checks = vec![
        Check::at_most("parseval", parseval, p.tol),
        Check::at_most("unitarity", unitarity, p.tol),
        Check::at_most("group_law", group, p.tol),
        Check::at_most("wave_energy", energy, p.energy_tol),
        Check::at_most("angular_round_trip", angular, p.tol),
        Check::holds("config_round_trip", config_round_trip),
        Check::holds("report_json_round_trip", json_round_trip),
        Check::holds("csv_byte_identical", csv_identical),
    ];
    ExperimentReport::new("invariants", params, vec![table], vec![], &[], checks, vec![])
}
