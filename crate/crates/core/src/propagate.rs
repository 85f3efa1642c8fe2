//! Spectral propagation of cusp states, mode by mode.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::Mode;
use crate::error::{precondition, Error, Result};
use crate::radial::{EigenSystem, RadialGrid, RadialOperator};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A function on the cusp in the flat picture: one radial vector per angular mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspState {
    pub grid: RadialGrid,
    pub modes: Vec<Mode>,
    pub radial: Vec<Vec<Complex64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvolutionKind {
    Schrodinger,
    CosWave,
    SinWaveOverSqrt,
    HalfWave,
}

impl EvolutionKind {
    pub fn multiplier(self, t: f64, lambda: f64) -> Complex64 {
        let s = lambda.max(0.0).sqrt();
        match self {
            Self::Schrodinger => Complex64::from_polar(1.0, -t * lambda),
            Self::CosWave => Complex64::new((t * s).cos(), 0.0),
            Self::HalfWave => Complex64::from_polar(1.0, t * s),
            Self::SinWaveOverSqrt => {
                if s == 0.0 {
                    Complex64::new(t, 0.0)
                } else {
                    Complex64::new((t * s).sin() / s, 0.0)
                }
            }
        }
    }

    pub fn is_unitary(self) -> bool {
        matches!(self, Self::Schrodinger | Self::HalfWave)
    }
}

impl CuspState {
    pub fn zero(grid: RadialGrid, modes: Vec<Mode>) -> Self {
        let radial = vec![vec![ZERO; grid.n]; modes.len()];
        Self { grid, modes, radial }
    }

    pub fn single(grid: RadialGrid, mode: Mode, u: Vec<Complex64>) -> Result<Self> {
        precondition(u.len() == grid.n, || format!("radial vector length {} != {}", u.len(), grid.n))?;
        Ok(Self { grid, modes: vec![mode], radial: vec![u] })
    }

    /// Sample `f(r)` on the grid for a single mode.
    pub fn from_fn(grid: RadialGrid, mode: Mode, f: impl Fn(f64) -> Complex64) -> Self {
        let u = grid.nodes().into_iter().map(f).collect();
        Self { grid, modes: vec![mode], radial: vec![u] }
    }

    pub fn norm_sqr(&self) -> f64 {
        let dr = self.grid.dr();
        self.radial.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>() * dr
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.radial.iter_mut().flatten().for_each(|z| *z *= c);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (a, b) in out.radial.iter_mut().zip(&other.radial) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        precondition(self.grid == other.grid && self.modes == other.modes, || "states live on different grids or mode sets".into())
    }

    /// Sharp cutoff to nodes with `r >= r1`.
    pub fn restrict(&self, r1: f64) -> Self {
        let start = self.grid.first_at_or_after(r1);
        let mut out = self.clone();
        for u in out.radial.iter_mut() {
            u[..start].iter_mut().for_each(|z| *z = ZERO);
        }
        out
    }

    /// Zero out the angular zero modes (the complementary projection).
    pub fn project_nonzero(&self) -> Self {
        let mut out = self.clone();
        for (m, u) in out.modes.iter().zip(out.radial.iter_mut()) {
            if m.mu == 0.0 {
                u.iter_mut().for_each(|z| *z = ZERO);
            }
        }
        out
    }

    /// Multiply every radial vector by a real function of `r`.
    pub fn multiply(&self, f: impl Fn(f64) -> f64) -> Self {
        let w: Vec<f64> = self.grid.nodes().into_iter().map(f).collect();
        let mut out = self.clone();
        for u in out.radial.iter_mut() {
            u.iter_mut().zip(&w).for_each(|(z, a)| *z *= a);
        }
        out
    }

    /// Snapshot as CSV with columns `mode_k, i, r_i, re, im`.
    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "mode_k,i,r_i,re,im")?;
        for (m, u) in self.modes.iter().zip(&self.radial) {
            for (i, z) in u.iter().enumerate() {
                writeln!(out, "{},{},{:.17e},{:.17e},{:.17e}", m.k, i + 1, self.grid.node(i), z.re, z.im)?;
            }
        }
        Ok(())
    }
}

fn check_systems(state: &CuspState, systems: &[EigenSystem]) -> Result<()> {
    precondition(systems.len() == state.modes.len(), || {
        format!("{} eigensystems for {} modes", systems.len(), state.modes.len())
    })?;
    for (m, es) in state.modes.iter().zip(systems) {
        precondition(es.grid == state.grid, || "eigensystem grid differs from the state grid".into())?;
        precondition((es.mu - m.mu).abs() <= 1e-12 * (1.0 + m.mu), || {
            format!("eigensystem for mu = {} paired with mode mu = {}", es.mu, m.mu)
        })?;
        if let Some(l) = es.values.iter().find(|l| **l < 0.0) {
            return Err(Error::NegativeSpectrum(*l));
        }
    }
    Ok(())
}

/// Apply `f(λ)` mode by mode.
pub fn apply_multiplier(state: &CuspState, systems: &[EigenSystem], f: impl Fn(f64) -> Complex64 + Copy) -> Result<CuspState> {
    check_systems(state, systems)?;
    let radial = state
        .radial
        .iter()
        .zip(systems)
        .map(|(u, es)| es.apply_complex(f, u))
        .collect::<Result<_>>()?;
    Ok(CuspState { grid: state.grid, modes: state.modes.clone(), radial })
}

pub fn evolve(state: &CuspState, systems: &[EigenSystem], t: f64, kind: EvolutionKind) -> Result<CuspState> {
    apply_multiplier(state, systems, move |l| kind.multiplier(t, l))
}

/// Eigen-coefficients of a state, reused across many evaluation times.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    state: CuspState,
    systems: &'a [EigenSystem],
    coefficients: Vec<Vec<Complex64>>,
}

impl<'a> Propagator<'a> {
    pub fn new(state: &CuspState, systems: &'a [EigenSystem]) -> Result<Self> {
        check_systems(state, systems)?;
        let coefficients = state.radial.iter().zip(systems).map(|(u, es)| es.coefficients(u)).collect();
        Ok(Self { state: state.clone(), systems, coefficients })
    }

    pub fn coefficients(&self) -> &[Vec<Complex64>] {
        &self.coefficients
    }

    pub fn at(&self, t: f64, kind: EvolutionKind) -> CuspState {
        self.with(|l| kind.multiplier(t, l))
    }

    pub fn with(&self, f: impl Fn(f64) -> Complex64) -> CuspState {
        let radial = self
            .coefficients
            .iter()
            .zip(self.systems)
            .map(|(c, es)| {
                let scaled: Vec<Complex64> = c.iter().zip(&es.values).map(|(a, &l)| a * f(l)).collect();
                es.synthesize(&scaled)
            })
            .collect();
        CuspState { grid: self.state.grid, modes: self.state.modes.clone(), radial }
    }
}

/// Closed-form free evolution of `e^{−(r−n)²/2} − e^{−(r+n)²/2}` on the exponential cusp's
/// zero mode; this is `e^{+it𝔭₀}` applied to the initial profile.
pub fn exact_flat_cusp(n_center: f64, t: f64, nodes: &[f64]) -> Vec<Complex64> {
    let (direct, image) = exact_flat_cusp_parts(n_center, t, nodes);
    direct.iter().zip(&image).map(|(a, b)| a + b).collect()
}

/// The Gaussian centred at `n` and its odd image centred at `−n`, separately.
pub fn exact_flat_cusp_parts(n_center: f64, t: f64, nodes: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let z = Complex64::new(1.0, -2.0 * t);
    let pref = Complex64::from_polar(1.0, t / 4.0) / z.sqrt();
    let gauss = |c: f64| -> Vec<Complex64> { nodes.iter().map(|&r| pref * (-(r - c).powi(2) / (2.0 * z)).exp()).collect() };
    let image = gauss(-n_center).into_iter().map(|v| -v).collect();
    (gauss(n_center), image)
}

/// `(Ψ(t), ∂_tΨ(t))` for the wave equation with data `(ψ₀, ψ₁)`.
pub fn wave_solution(psi0: &CuspState, psi1: &CuspState, systems: &[EigenSystem], t: f64) -> Result<(CuspState, CuspState)> {
    let a = evolve(psi0, systems, t, EvolutionKind::CosWave)?;
    let b = evolve(psi1, systems, t, EvolutionKind::SinWaveOverSqrt)?;
    let da = apply_multiplier(psi0, systems, move |l| {
        let s = l.max(0.0).sqrt();
        Complex64::new(-s * (t * s).sin(), 0.0)
    })?;
    let db = evolve(psi1, systems, t, EvolutionKind::CosWave)?;
    Ok((a.add(&b)?, da.add(&db)?))
}

/// `‖∂_tΨ‖² + ⟨Ψ, AΨ⟩` with the discrete operators applied on the grid.
pub fn wave_energy(psi: &CuspState, dpsi: &CuspState, ops: &[RadialOperator]) -> Result<f64> {
    precondition(ops.len() == psi.modes.len(), || "one operator per mode required".into())?;
    let dr = psi.grid.dr();
    let mut e = dpsi.norm_sqr();
    for (u, op) in psi.radial.iter().zip(ops) {
        let re: Vec<f64> = u.iter().map(|z| z.re).collect();
        let im: Vec<f64> = u.iter().map(|z| z.im).collect();
        let (ar, ai) = (op.apply(&re), op.apply(&im));
        e += dr * (re.iter().zip(&ar).map(|(a, b)| a * b).sum::<f64>() + im.iter().zip(&ai).map(|(a, b)| a * b).sum::<f64>());
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{AngularManifold, Parity};
    use crate::geometry::WarpProfile;
    use crate::radial::discretize;

    fn setup(mu_max: f64, rmax: f64, n: usize) -> (Vec<Mode>, Vec<RadialOperator>, Vec<EigenSystem>, RadialGrid) {
        let p = WarpProfile::exp(0.0);
        let modes = AngularManifold::unit_circle().modes_up_to(mu_max);
        let grid = RadialGrid::new(0.0, rmax, n).unwrap();
        let ops: Vec<_> = modes.iter().map(|m| discretize(&p, m.mu, grid).unwrap()).collect();
        let es = ops.iter().map(|o| EigenSystem::full(o).unwrap()).collect();
        (modes, ops, es, grid)
    }

    fn sample_state(modes: &[Mode], grid: RadialGrid) -> CuspState {
        let mut s = CuspState::zero(grid, modes.to_vec());
        for (k, u) in s.radial.iter_mut().enumerate() {
            for (i, z) in u.iter_mut().enumerate() {
                let r = grid.node(i);
                *z = Complex64::from_polar((-(r - 3.0 - 0.2 * k as f64).powi(2)).exp(), 1.5 * r * (k as f64 + 1.0));
            }
        }
        s
    }

    #[test]
    fn multiplier_identities() {
        let (modes, ops, es, grid) = setup(2.0, 8.0, 200);
        let s = sample_state(&modes, grid);
        for kind in [EvolutionKind::Schrodinger, EvolutionKind::CosWave, EvolutionKind::HalfWave] {
            let same = evolve(&s, &es, 0.0, kind).unwrap();
            let d = same.sub(&s).unwrap().norm();
            assert!(d < 1e-12, "{kind:?} {d}");
        }
        let u = evolve(&s, &es, 0.7, EvolutionKind::Schrodinger).unwrap();
        assert!((u.norm() - s.norm()).abs() < 1e-12 * s.norm());
        let a = evolve(&s, &es, 0.4, EvolutionKind::CosWave).unwrap();
        let b = evolve(&s, &es, -0.4, EvolutionKind::CosWave).unwrap();
        assert!(a.sub(&b).unwrap().norm() < 1e-12);
        let t1 = evolve(&evolve(&s, &es, 0.3, EvolutionKind::Schrodinger).unwrap(), &es, 0.45, EvolutionKind::Schrodinger).unwrap();
        let t2 = evolve(&s, &es, 0.75, EvolutionKind::Schrodinger).unwrap();
        let gl = t1.sub(&t2).unwrap().norm();
        assert!(gl < 1e-12 * s.norm(), "{gl}");
        assert_eq!(EvolutionKind::SinWaveOverSqrt.multiplier(0.3, 0.0), Complex64::new(0.3, 0.0));
        let _ = ops;
    }

    #[test]
    fn energy_is_conserved() {
        let (modes, ops, es, grid) = setup(2.0, 8.0, 200);
        let p0 = sample_state(&modes, grid);
        let p1 = p0.multiply(|r| (r - 2.0).sin()).scale(Complex64::new(0.0, 0.5));
        let (a, b) = wave_solution(&p0, &p1, &es, 0.0).unwrap();
        let e0 = wave_energy(&a, &b, &ops).unwrap();
        for t in [0.3, 1.1, 2.5] {
            let (a, b) = wave_solution(&p0, &p1, &es, t).unwrap();
            let e = wave_energy(&a, &b, &ops).unwrap();
            assert!((e - e0).abs() < 1e-10 * e0, "{t}: {e} vs {e0}");
        }
    }

    #[test]
    fn oracle_basics() {
        let nodes: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.01).collect();
        let u0 = exact_flat_cusp(8.0, 0.0, &nodes);
        for (z, r) in u0.iter().zip(&nodes) {
            let v = (-(r - 8.0f64).powi(2) / 2.0).exp() - (-(r + 8.0f64).powi(2) / 2.0).exp();
            assert!((z.re - v).abs() < 1e-15 && z.im == 0.0);
        }
        for t in [0.1, 0.5] {
            assert!(exact_flat_cusp(8.0, t, &[0.0])[0].norm() < 1e-15);
        }
        let fine: Vec<f64> = (0..=40000).map(|i| i as f64 * 0.001).collect();
        let l2 = |v: &[Complex64]| (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * 0.001).sqrt();
        let a = l2(&exact_flat_cusp(8.0, 0.0, &fine));
        let b = l2(&exact_flat_cusp(8.0, 0.5, &fine));
        assert!((a - b).abs() < 1e-12, "{a} {b}");
    }

    #[test]
    fn restriction() {
        let (modes, _, _, grid) = setup(1.0, 8.0, 100);
        let s = sample_state(&modes, grid);
        assert_eq!(s.restrict(0.0), s);
        let r = s.restrict(3.3);
        assert_eq!(r.restrict(3.3), r);
        let rest = s.sub(&r).unwrap();
        assert!((s.norm_sqr() - r.norm_sqr() - rest.norm_sqr()).abs() < 1e-12 * s.norm_sqr());
        let z = s.project_nonzero();
        assert!(z.radial[0].iter().all(|c| *c == ZERO));
        assert_eq!(z.modes[0].parity, Parity::Const);
    }

    #[test]
    fn csv_snapshot() {
        let (modes, _, _, grid) = setup(0.5, 2.0, 16);
        let s = sample_state(&modes, grid);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("mode_k,i,r_i,re,im\n0,1,"));
        assert_eq!(text.lines().count(), 17);
    }

    #[test]
    fn mismatched_systems_rejected() {
        let (modes, _, es, grid) = setup(1.0, 8.0, 100);
        let s = sample_state(&modes[..1], grid);
        assert!(evolve(&s, &es, 0.1, EvolutionKind::Schrodinger).is_err());
    }
}
