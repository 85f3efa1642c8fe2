//! Kernel decay of spectrally localized propagators on a shell.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fit_labeled, par_map, Check, ExperimentReport, Table};
use crate::bumps::{phi_spec, PHI_SPEC_SUPPORT};
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::radial::{discretize, EigenSystem, RadialGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispersionPropagator {
    /// `e^{−iτh𝔭}`
    Schrodinger,
    /// `e^{−iτ√𝔭}`
    HalfWave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionParams {
    pub profile: WarpProfile,
    pub nu: DispersionPropagator,
    pub h: f64,
    pub t_list: Vec<f64>,
    /// Each mode's shell `[L_μ, L_μ + 1]` starts where `hμe^{φ(L_μ)} = shell_level`.
    pub shell_level: f64,
    pub mu_list: Vec<f64>,
    /// Number of source points in the shell (kernel columns).
    pub sources: usize,
    pub dr_divisor: f64,
    pub slope_tol: f64,
    /// Relative tolerance on `D(μ₁)/D(μ) = μ/μ₁`.
    pub prefactor_tol: f64,
}

impl DispersionParams {
    pub fn schrodinger_default() -> Self {
        Self {
            profile: WarpProfile::exp(0.0),
            nu: DispersionPropagator::Schrodinger,
            h: 2f64.powi(-9),
            t_list: (2..=6).rev().map(|e| 2f64.powi(-e)).collect(),
            shell_level: 0.6,
            mu_list: vec![1.0],
            sources: 32,
            dr_divisor: 6.0,
            slope_tol: 0.1,
            prefactor_tol: 0.25,
        }
    }

    pub fn half_wave_default() -> Self {
        Self {
            nu: DispersionPropagator::HalfWave,
            t_list: (1..=5).rev().map(|e| 2f64.powi(-e)).collect(),
            mu_list: vec![1.0, 2.0, 4.0],
            ..Self::schrodinger_default()
        }
    }
}

/// `L_μ` with `hμe^{φ(L_μ)} = shell_level`.
pub fn shell_start(p: &DispersionParams, mu: f64) -> f64 {
    p.profile.phi_inverse((p.shell_level / (p.h * mu)).ln())
}

/// `max |K(x, y)| e^{(φ(x)+φ(y))/2} / dr` over the shell for each `τ`, where `K` is the grid
/// kernel of `φ_spec(h²𝔭) U(τ) φ_spec(h²𝔭)` for the mode with parameter `mu`.
pub fn shell_kernel_sup(p: &DispersionParams, mu: f64) -> Result<Vec<f64>> {
    let h = p.h;
    precondition(p.shell_level > 0.0 && p.shell_level < PHI_SPEC_SUPPORT.1.sqrt(), || {
        format!("shell level h mu e^phi(L) = {} outside the symbol support", p.shell_level)
    })?;
    let start = shell_start(p, mu);
    precondition(start > p.profile.r0, || format!("shell for mu = {mu} starts left of r0"))?;
    let rmax = start + 1.0 + 2.0f64.max(p.t_list.iter().copied().fold(0.0, f64::max));
    let grid = RadialGrid::with_spacing(p.profile.r0, rmax, h / p.dr_divisor)?;
    let op = discretize(&p.profile, mu, grid)?;
    let h2 = h * h;
    let es = EigenSystem::window(&op, PHI_SPEC_SUPPORT.0 / h2, PHI_SPEC_SUPPORT.1 / h2)?;
    let dr = grid.dr();
    let lo = grid.first_at_or_after(start);
    let hi = grid.first_at_or_after(start + 1.0);
    let shell: Vec<usize> = (lo..hi).collect();
    let sources: Vec<usize> = (0..p.sources).map(|s| lo + s * (hi - lo - 1) / (p.sources - 1).max(1)).collect();
    let weight: Vec<f64> = (0..grid.n).map(|i| (0.5 * p.profile.phi(grid.node(i))).exp()).collect();
    let filt: Vec<f64> = es.values.iter().map(|&l| phi_spec(h2 * l).powi(2)).collect();
    let mut out = vec![];
    for &tau in &p.t_list {
        let mult: Vec<Complex64> = es
            .values
            .iter()
            .zip(&filt)
            .map(|(&l, f)| {
                let phase = match p.nu {
                    DispersionPropagator::Schrodinger => -tau * h * l,
                    DispersionPropagator::HalfWave => -tau * l.max(0.0).sqrt(),
                };
                Complex64::from_polar(*f, phase)
            })
            .collect();
        let mut best = 0.0f64;
        for &j in &sources {
            for &i in &shell {
                let k: Complex64 = es.vectors.iter().zip(&mult).map(|(v, m)| m * (v[i] * v[j])).sum();
                // eigenvectors satisfy dr Σ v² = 1, so the matrix entry is dr·k
                best = best.max(k.norm() * dr * weight[i] * weight[j] / dr);
            }
        }
        out.push(best);
    }
    Ok(out)
}

pub fn dispersion(params: &DispersionParams, jobs: usize) -> Result<ExperimentReport> {
    let p = params;
    precondition(p.t_list.len() >= 4 && p.t_list.iter().all(|&t| t > 0.0), || "at least 4 positive times".into())?;
    precondition(!p.mu_list.is_empty() && p.mu_list.iter().all(|&m| m > 0.0), || "mu_list must be positive".into())?;
    precondition(p.sources >= 2, || "at least 2 source points".into())?;
    let rows = par_map(jobs, &p.mu_list, |&mu| shell_kernel_sup(p, mu));
    let mut table = Table::new("kernel", &["mu", "shell_start", "tau", "sup"]);
    let mut fits = vec![];
    let mut checks = vec![];
    let mut prefactors = vec![];
    for (&mu, row) in p.mu_list.iter().zip(rows) {
        let sups = row?;
        let pts: Vec<(f64, f64)> = p.t_list.iter().copied().zip(sups.iter().copied()).collect();
        for (t, s) in &pts {
            table.push(vec![mu, shell_start(p, mu), *t, *s]);
        }
        let label = format!("sup_mu{mu}");
        let fit = fit_labeled(&label, &pts)?;
        checks.push(Check::new(&format!("slope_mu{mu}"), fit.slope, Some(-0.5 - p.slope_tol), Some(-0.5 + p.slope_tol)));
        fits.push(fit);
        let d = pts.iter().map(|(t, s)| s * t.sqrt()).sum::<f64>() / pts.len() as f64;
        prefactors.push((mu, d));
    }
    if p.nu == DispersionPropagator::HalfWave && prefactors.len() > 1 {
        let (mu0, d0) = prefactors[0];
        for &(mu, d) in &prefactors[1..] {
            checks.push(Check::within(&format!("prefactor_ratio_mu{mu}"), d0 / d, mu / mu0, p.prefactor_tol));
        }
    }
    let mut pre = Table::new("prefactors", &["mu", "prefactor"]);
    for (mu, d) in &prefactors {
        pre.push(vec![*mu, *d]);
    }
    let required: Vec<String> = fits.iter().map(|f| f.label.clone()).collect();
    let required: Vec<&str> = required.iter().map(|s| s.as_str()).collect();
    ExperimentReport::new("dispersion", params, vec![table, pre], fits, &required, checks, vec![])
}
