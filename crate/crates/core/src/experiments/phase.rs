//! Convexity of the propagated phase and first-order accuracy of the principal symbol.

use serde::{Deserialize, Serialize};

use super::{dyadic, fit_labeled, par_map, Check, ExperimentReport, Table};
use crate::bumps::chi;
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::radial::RadialGrid;
use crate::semiclassics::{flow, invert_momentum, steps_for, symbol_vs_calculus, Hamiltonian, HamiltonianKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseConvexityParams {
    pub h: f64,
    pub mu: f64,
    /// Shell start `L` solves `hμe^{L} = level` on the exponential cusp.
    pub level: f64,
    pub shell_width: f64,
    pub r_samples: usize,
    pub rho_samples: usize,
    /// Energy window `J₁` for `ρ² + V(r)`.
    pub energy: (f64, f64),
    /// Positive times; each is used with both signs.
    pub times: Vec<f64>,
    /// Initial momenta are searched in `ρ ± eta_margin`.
    pub eta_margin: f64,
    pub schrodinger_floor: f64,
    pub wave_floor: f64,
    pub symplectic_tol: f64,
}

impl Default for PhaseConvexityParams {
    fn default() -> Self {
        Self {
            h: 2f64.powi(-5),
            mu: 1.0,
            level: 0.5,
            shell_width: 0.8,
            r_samples: 20,
            rho_samples: 20,
            energy: (0.5, 1.5),
            times: vec![0.025, 0.05, 0.1],
            eta_margin: 0.5,
            schrodinger_floor: 0.9,
            wave_floor: 0.5,
            symplectic_tol: 1e-9,
        }
    }
}

/// Sample points `(r, ρ)` with `ρ² + V(r)` inside the open energy window, both signs of `ρ`.
fn shell_samples(p: &PhaseConvexityParams, ham: &Hamiltonian, start: f64) -> Vec<(f64, f64)> {
    let half = p.rho_samples.div_ceil(2);
    let mut out = vec![];
    for i in 0..p.r_samples {
        let r = start + p.shell_width * i as f64 / (p.r_samples - 1).max(1) as f64;
        let v = ham.potential(r);
        let lo = (p.energy.0 - v).max(0.0).sqrt();
        let hi = (p.energy.1 - v).max(0.0).sqrt();
        if hi <= lo {
            continue;
        }
        // interior nodes of [lo, hi] with both signs, truncated to rho_samples
        let row = (0..half).flat_map(|j| {
            let rho = lo + (hi - lo) * (j as f64 + 0.5) / half as f64;
            [(r, rho), (r, -rho)]
        });
        out.extend(row.take(p.rho_samples));
    }
    out
}

struct PhaseSample {
    hessian: f64,
    defect: f64,
}

fn phase_sample(ham: &Hamiltonian, r: f64, rho: f64, t: f64, margin: f64) -> Result<PhaseSample> {
    let (eta, st) = invert_momentum(ham, r, rho, t, (rho - margin, rho + margin))?;
    let traj = flow(ham, (r, eta), t, steps_for(t))?;
    let defect = traj.iter().map(|s| s.symplectic_defect()).fold(0.0, f64::max);
    Ok(PhaseSample { hessian: st.b / st.d, defect })
}

/// `sign(t)∂²_ρS/|t|` for the Schrödinger flow and `sign(t)∂²_ρS^{(1/2)}/(|t|V(L))` for the
/// half-wave flow over a shell sample on the exponential cusp.
pub fn phase_convexity(params: &PhaseConvexityParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.h > 0.0 && p.mu > 0.0 && p.level > 0.0, || "h, mu and level must be positive".into())?;
    precondition(p.r_samples >= 1 && p.rho_samples >= 1, || "empty shell sample".into())?;
    precondition(p.energy.0 > 0.0 && p.energy.1 > p.energy.0, || format!("bad energy window {:?}", p.energy))?;
    precondition(!p.times.is_empty() && p.times.iter().all(|&t| t > 0.0), || "times must be positive".into())?;
    let profile = WarpProfile::exp(0.0);
    let start = (p.level / (p.h * p.mu)).ln();
    precondition(start > 0.0, || format!("shell start {start} left of r0"))?;
    let schr = Hamiltonian::schrodinger(profile, p.h, p.mu);
    let wave = Hamiltonian::half_wave(profile, p.h, p.mu);
    let v_l = schr.potential(start);
    let points = shell_samples(p, &schr, start);
    precondition(!points.is_empty(), || "no sample inside the energy window".into())?;
    let signed: Vec<f64> = p.times.iter().flat_map(|&t| [t, -t]).collect();
    let mut tasks = vec![];
    for kind in [HamiltonianKind::Schrodinger, HamiltonianKind::HalfWave] {
        for &t in &signed {
            tasks.push((kind, t));
        }
    }
    let rows = par_map(jobs, &tasks, |&(kind, t)| -> Result<(f64, f64, f64)> {
        let ham = if kind == HamiltonianKind::Schrodinger { &schr } else { &wave };
        let scale = if kind == HamiltonianKind::Schrodinger { t.abs() } else { t.abs() * v_l };
        let (mut min_ratio, mut max_ratio, mut defect) = (f64::INFINITY, 0.0f64, 0.0f64);
        for &(r, rho) in &points {
            let s = phase_sample(ham, r, rho, t, p.eta_margin)?;
            let ratio = t.signum() * s.hessian / scale;
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
            defect = defect.max(s.defect);
        }
        Ok((min_ratio, max_ratio, defect))
    });
    let mut table = Table::new("convexity", &["wave", "t", "min_ratio", "max_ratio", "symplectic_defect"]);
    let (mut s_min, mut w_min, mut defect) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for (&(kind, t), row) in tasks.iter().zip(rows) {
        let (lo, hi, d) = row?;
        let is_wave = kind == HamiltonianKind::HalfWave;
        table.push(vec![if is_wave { 1.0 } else { 0.0 }, t, lo, hi, d]);
        if is_wave {
            w_min = w_min.min(lo);
        } else {
            s_min = s_min.min(lo);
        }
        defect = defect.max(d);
    }
    let checks = vec![
        Check::at_least("schrodinger_min_ratio", s_min, p.schrodinger_floor),
        Check::at_least("wave_min_ratio", w_min, p.wave_floor),
        Check::at_most("symplectic_defect", defect, p.symplectic_tol),
    ];
    let notes = vec![format!("{} shell points, L = {start}, V(L) = {v_l}", points.len())];
    ExperimentReport::new("phase_convexity", params, vec![table], vec![], &[], checks, notes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolAccuracyParams {
    /// Power cusp exponent `σ` (`e^{φ} = r^σ`).
    pub sigma: f64,
    /// Localizer center.
    pub center: f64,
    /// The potential `V = h²μ²e^{2φ}` sweeps `[v_lo, v_hi]` over the localizer support.
    pub v_lo: f64,
    pub v_hi: f64,
    pub kappa_width: f64,
    /// Radial step is `h / dr_divisor`.
    pub dr_divisor: f64,
    pub h_list: Vec<f64>,
    pub lanczos_steps: usize,
    pub seed: u64,
    pub slope_range: (f64, f64),
}

impl Default for SymbolAccuracyParams {
    fn default() -> Self {
        Self {
            sigma: 2.0,
            center: 24.0,
            v_lo: 0.55,
            v_hi: 1.9,
            kappa_width: 3.0,
            dr_divisor: 4.0,
            h_list: dyadic(3..=8),
            lanczos_steps: 40,
            seed: 42,
            slope_range: (0.7, 1.3),
        }
    }
}

struct SymbolSetup {
    profile: WarpProfile,
    /// Localizer half-support; `χ((r − center)/scale)` lives on `center ± 2·scale`.
    scale: f64,
    rmax: f64,
    v_center: f64,
}

fn symbol_setup(p: &SymbolAccuracyParams) -> Result<SymbolSetup> {
    let q = (p.v_hi / p.v_lo).powf(1.0 / (2.0 * p.sigma));
    let half = p.center * (q - 1.0) / (q + 1.0);
    let r0 = p.center - half - p.kappa_width - 0.5;
    let profile = WarpProfile::power(p.sigma, r0)?;
    let v_center = p.v_lo * (p.center / (p.center - half)).powf(2.0 * p.sigma);
    Ok(SymbolSetup { profile, scale: half / 2.0, rmax: p.center + half + p.kappa_width + 0.5, v_center })
}

/// Operator-norm error of the principal-symbol quantization at one `h`.
pub fn symbol_error(params: &SymbolAccuracyParams, h: f64) -> Result<f64> {
    let p = params;
    let s = symbol_setup(p)?;
    let mu = s.v_center.sqrt() / (h * s.profile.phi(p.center).exp());
    let grid = RadialGrid::with_spacing(s.profile.r0, s.rmax, h / p.dr_divisor)?;
    symbol_vs_calculus(&s.profile, h, mu, grid, |r| chi((r - p.center) / s.scale), p.kappa_width, p.lanczos_steps, p.seed)
}

pub fn symbol_accuracy(params: &SymbolAccuracyParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.sigma > 1.0, || format!("sigma = {} must exceed 1", p.sigma))?;
    precondition(p.v_lo > 0.25 && p.v_hi < 4.0 && p.v_lo < p.v_hi, || {
        format!("potential window [{}, {}] must lie inside (1/4, 4)", p.v_lo, p.v_hi)
    })?;
    precondition(p.h_list.iter().all(|&h| h > 0.0 && h < 1.0), || "h values must lie in (0, 1)".into())?;
    symbol_setup(p)?;
    let rows = par_map(jobs, &p.h_list, |&h| symbol_error(p, h));
    let mut table = Table::new("errors", &["h", "error", "error_over_h"]);
    let mut pts = vec![];
    for (&h, row) in p.h_list.iter().zip(rows) {
        let e = row?;
        table.push(vec![h, e, e / h]);
        pts.push((h, e));
    }
    let fit = fit_labeled("error", &pts)?;
    let checks = vec![Check::new("slope", fit.slope, Some(p.slope_range.0), Some(p.slope_range.1))];
    ExperimentReport::new("symbol_accuracy", params, vec![table], vec![fit], &["error"], checks, vec![])
}
