//! Spectrally localized shell data stay near the shell for short times.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{dyadic, par_map, Check, ExperimentReport, Table};
use crate::angular::{AngularManifold, Parity};
use crate::bumps::{bump, phi_spec, smooth_step};
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::propagate::{CuspState, EvolutionKind, Propagator};
use crate::radial::{discretize, EigenSystem, RadialGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSpeedParams {
    pub profile: WarpProfile,
    /// Data live in `[r1 + L, r1 + 1 + L]`; mass is measured outside `[r1 − δ + L, r1 + 1 + δ + L]`.
    pub r1: f64,
    pub delta: f64,
    /// The `h` sweep uses the first shell, the shell sweep uses the smallest `h`.
    pub shells: Vec<f64>,
    pub h_list: Vec<f64>,
    /// Wave times `[0, t0]`, Schrödinger times `[0, t0·h]` for `e^{−is𝔭}`.
    pub t0: f64,
    pub time_nodes: usize,
    /// Target `hμe^{φ}` at the shell center; the angular mode is the nearest `m >= 1`.
    pub level: f64,
    /// Semiclassical momentum of the packet.
    pub momentum: f64,
    pub dr_divisor: f64,
    pub cover_tol: f64,
    pub mass_tol: f64,
    /// Masses below this are treated as round-off in monotonicity checks.
    pub floor: f64,
}

impl Default for FiniteSpeedParams {
    fn default() -> Self {
        Self {
            profile: WarpProfile::power(2.0, 0.5).expect("valid power profile"),
            r1: 2.0,
            delta: 0.5,
            shells: vec![0.0, 5.0, 10.0],
            h_list: dyadic(4..=7),
            t0: 0.1,
            time_nodes: 9,
            level: 0.75,
            momentum: 0.7,
            dr_divisor: 8.0,
            cover_tol: 1e-14,
            mass_tol: 1e-3,
            floor: 1e-12,
        }
    }
}

/// Largest relative mass outside the widened shell over the time nodes, `(wave, schrodinger)`.
pub fn outside_mass(params: &FiniteSpeedParams, h: f64, shell: f64) -> Result<(f64, f64)> {
    let p = params;
    let (a, b) = (p.r1 + shell, p.r1 + 1.0 + shell);
    let center = 0.5 * (a + b);
    let m = ((p.level / (h * p.profile.phi(center).exp())).round() as u32).max(1);
    let mode = AngularManifold::unit_circle().mode(0, m, Parity::Cos)?;
    let v = (h * mode.mu * p.profile.phi(center).exp()).powi(2);
    let energy = v + p.momentum * p.momentum;
    precondition(energy > 0.5 && energy < 2.0, || {
        format!("shell L = {shell} is not semiclassically admissible at h = {h}: energy {energy}")
    })?;
    let grid = RadialGrid::with_spacing(p.profile.r0, b + p.delta + 1.0, h / p.dr_divisor)?;
    let op = discretize(&p.profile, mode.mu, grid)?;
    let h2 = h * h;
    let packet: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&r| Complex64::from_polar(bump((r - center) / 0.3), p.momentum * (r - center) / h))
        .collect();
    let band = EigenSystem::window(&op, 0.5 * 0.25 / h2, 4.0 / h2)?;
    let filtered = band.apply_complex(|l| Complex64::new(phi_spec(h2 * l), 0.0), &packet)?;
    let cut = |r: f64| smooth_step((r - a) / 0.1) * smooth_step((b - r) / 0.1);
    let data: Vec<Complex64> = filtered.iter().zip(grid.nodes()).map(|(z, r)| z * cut(r)).collect();
    let state = CuspState::single(grid, mode, data)?;
    let es = [EigenSystem::covering(&op, &[&state.radial[0]], p.cover_tol)?];
    let prop = Propagator::new(&state, &es)?;
    let total = state.norm_sqr();
    let outside = |psi: &CuspState| -> f64 {
        let dr = grid.dr();
        let mass: f64 = grid
            .nodes()
            .iter()
            .zip(&psi.radial[0])
            .filter(|(r, _)| **r < a - p.delta || **r > b + p.delta)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        mass * dr / total
    };
    let (mut wave, mut schr) = (0.0f64, 0.0f64);
    for j in 0..p.time_nodes {
        let s = j as f64 / (p.time_nodes - 1) as f64;
        wave = wave.max(outside(&prop.at(s * p.t0, EvolutionKind::HalfWave)));
        schr = schr.max(outside(&prop.at(s * p.t0 * h, EvolutionKind::Schrodinger)));
    }
    Ok((wave, schr))
}

fn non_increasing(values: &[f64], floor: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0].max(floor))
}

pub fn finite_speed(params: &FiniteSpeedParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.r1 - 2.0 * p.delta > p.profile.r0, || {
        format!("r1 - 2 delta = {} must exceed r0 = {}", p.r1 - 2.0 * p.delta, p.profile.r0)
    })?;
    precondition(!p.shells.is_empty() && !p.h_list.is_empty(), || "empty shell or h list".into())?;
    precondition(p.time_nodes >= 2 && p.t0 > 0.0, || "need t0 > 0 and at least 2 time nodes".into())?;
    let mut hs = p.h_list.clone();
    hs.sort_by(|x, y| y.total_cmp(x));
    let h_min = *hs.last().expect("non-empty");
    let mut cases: Vec<(f64, f64)> = hs.iter().map(|&h| (h, p.shells[0])).collect();
    cases.extend(p.shells[1..].iter().map(|&l| (h_min, l)));
    let rows = par_map(jobs, &cases, |&(h, l)| outside_mass(p, h, l));
    let mut table = Table::new("outside_mass", &["h", "shell", "wave", "schrodinger"]);
    let mut masses = vec![];
    for (&(h, l), row) in cases.iter().zip(rows) {
        let (w, s) = row?;
        table.push(vec![h, l, w, s]);
        masses.push((w, s));
    }
    let nh = hs.len();
    let by_h = &masses[..nh];
    let mut by_shell = vec![masses[nh - 1]];
    by_shell.extend_from_slice(&masses[nh..]);
    let worst = |v: &[(f64, f64)]| v.iter().map(|m| m.0.max(m.1)).fold(0.0, f64::max);
    let wave_h: Vec<f64> = by_h.iter().map(|m| m.0).collect();
    let schr_h: Vec<f64> = by_h.iter().map(|m| m.1).collect();
    let wave_l: Vec<f64> = by_shell.iter().map(|m| m.0).collect();
    let schr_l: Vec<f64> = by_shell.iter().map(|m| m.1).collect();
    let checks = vec![
        Check::at_most("mass_at_smallest_h", worst(&by_shell), p.mass_tol),
        Check::holds("decreasing_in_h", non_increasing(&wave_h, p.floor) && non_increasing(&schr_h, p.floor)),
        Check::holds("non_increasing_in_shell", non_increasing(&wave_l, p.floor) && non_increasing(&schr_l, p.floor)),
    ];
    let notes = vec![format!("h sweep on shell L = {}, shell sweep at h = {h_min}", p.shells[0])];
    ExperimentReport::new("finite_speed", params, vec![table], vec![], &[], checks, notes)
}
