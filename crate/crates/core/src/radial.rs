//! Finite-difference radial operators `-∂² + μ²e^{2φ} + w` on a Dirichlet grid and
//! their spectral calculus.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::angular::Mode;
use crate::bumps::smooth_step;
use crate::error::{precondition, Error, Result};
use crate::geometry::WarpProfile;
use crate::tridiag::SymTridiag;

pub const MIN_NODES: usize = 16;
const CACHE_MAGIC: &[u8; 8] = b"CUSPEIG1";
/// Half-width of the first energy window, in standard deviations of the data's energy.
const WINDOW_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r0: f64,
    pub rmax: f64,
    pub n: usize,
}

impl RadialGrid {
    pub fn new(r0: f64, rmax: f64, n: usize) -> Result<Self> {
        precondition(rmax > r0, || format!("rmax = {rmax} must exceed r0 = {r0}"))?;
        precondition(n >= MIN_NODES, || format!("n = {n} < {MIN_NODES}"))?;
        Ok(Self { r0, rmax, n })
    }

    /// Grid whose spacing is at most `dr`.
    pub fn with_spacing(r0: f64, rmax: f64, dr: f64) -> Result<Self> {
        let n = ((rmax - r0) / dr).round() as usize;
        Self::new(r0, rmax, n.saturating_sub(1).max(MIN_NODES))
    }

    pub fn dr(&self) -> f64 {
        (self.rmax - self.r0) / (self.n as f64 + 1.0)
    }

    /// Node `i` for `0 <= i < n` (the interior node `i + 1` in one-based terms).
    pub fn node(&self, i: usize) -> f64 {
        self.r0 + (i as f64 + 1.0) * self.dr()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Index of the first node with `r >= x`.
    pub fn first_at_or_after(&self, x: f64) -> usize {
        let k = ((x - self.r0) / self.dr() - 1.0).ceil();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RadialOperator {
    pub grid: RadialGrid,
    pub mu: f64,
    pub matrix: SymTridiag,
}

pub fn discretize(profile: &WarpProfile, mu: f64, grid: RadialGrid) -> Result<RadialOperator> {
    if !(mu >= 0.0) {
        return Err(Error::Domain(format!("angular frequency must be nonnegative, got {mu}")));
    }
    precondition((grid.r0 - profile.r0).abs() <= 1e-12 * (1.0 + profile.r0.abs()), || {
        format!("grid starts at {} but the profile at {}", grid.r0, profile.r0)
    })?;
    let dr = grid.dr();
    let diag = grid
        .nodes()
        .into_iter()
        .map(|r| {
            let pot = if mu == 0.0 { 0.0 } else { (mu * mu).ln() + 2.0 * profile.phi(r) };
            let pot = if mu == 0.0 { 0.0 } else { pot.exp() };
            2.0 / (dr * dr) + pot + profile.w(r)
        })
        .collect();
    Ok(RadialOperator { grid, mu, matrix: SymTridiag { diag, off: -1.0 / (dr * dr) } })
}

impl RadialOperator {
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.matvec(u)
    }

    fn apply_complex(&self, u: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = u.iter().map(|z| z.re).collect();
        let im: Vec<f64> = u.iter().map(|z| z.im).collect();
        let (a, b) = (self.apply(&re), self.apply(&im));
        a.into_iter().zip(b).map(|(x, y)| Complex64::new(x, y)).collect()
    }

    /// Solve `(A + shift) x = u` for `shift > 0`.
    pub fn resolve(&self, shift: f64, u: &[f64]) -> Vec<f64> {
        self.matrix.solve_shifted_spd(shift, u)
    }

    fn tol_neg(&self) -> f64 {
        1e-8 * self.matrix.diag.iter().fold(0.0f64, |m, d| m.max(d.abs()))
    }

    /// Number of discrete eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.matrix.count_below(x)
    }
}

/// Eigenpairs of a radial operator; vectors satisfy `dr·Σ v_i² = 1`.
///
/// A system may hold only an index range of the spectrum. Its calculus then acts on
/// the spectral projection onto the computed span.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub grid: RadialGrid,
    pub mu: f64,
    pub first_index: usize,
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn full(op: &RadialOperator) -> Result<Self> {
        Self::range(op, 0..op.grid.n)
    }

    pub fn range(op: &RadialOperator, range: std::ops::Range<usize>) -> Result<Self> {
        precondition(range.end <= op.grid.n && range.start <= range.end, || {
            format!("index range {range:?} outside 0..{}", op.grid.n)
        })?;
        let (mut values, mut vectors) = op.matrix.eigenpairs(range.clone());
        let tol = op.tol_neg();
        for v in values.iter_mut() {
            if !v.is_finite() {
                return Err(Error::Eigen(format!("non-finite eigenvalue for mu = {}, n = {}", op.mu, op.grid.n)));
            }
            if *v < -tol {
                return Err(Error::NegativeSpectrum(*v));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let scale = 1.0 / op.grid.dr().sqrt();
        for v in vectors.iter_mut() {
            v.iter_mut().for_each(|x| *x *= scale);
        }
        Ok(Self { grid: op.grid, mu: op.mu, first_index: range.start, values, vectors })
    }

    /// Eigenpairs with eigenvalues in `[lo, hi)`.
    pub fn window(op: &RadialOperator, lo: f64, hi: f64) -> Result<Self> {
        let a = op.count_below(lo);
        let b = op.count_below(hi).max(a);
        Self::range(op, a..b)
    }

    /// Smallest energy window whose span holds all but a relative `tol` of the mass of each datum.
    pub fn covering(op: &RadialOperator, data: &[&[Complex64]], tol: f64) -> Result<Self> {
        let n = op.grid.n;
        let (mut e_min, mut e_max, mut spread) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for u in data {
            precondition(u.len() == n, || format!("datum length {} != {n}", u.len()))?;
            let m2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
            if m2 == 0.0 {
                continue;
            }
            let au = op.apply_complex(u);
            let e: f64 = u.iter().zip(&au).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / m2;
            let e2: f64 = au.iter().map(|z| z.norm_sqr()).sum::<f64>() / m2;
            e_min = e_min.min(e);
            e_max = e_max.max(e);
            spread = spread.max((e2 - e * e).max(0.0).sqrt());
        }
        if !e_min.is_finite() {
            return Self::range(op, 0..0);
        }
        let (glo, ghi) = op.matrix.gershgorin();
        let mut half = WINDOW_SIGMAS * spread + 1e-9 * (ghi - glo);
        loop {
            let lo = e_min - half;
            let hi = e_max + half;
            let es = if lo <= glo && hi >= ghi { Self::full(op)? } else { Self::window(op, lo, hi)? };
            let worst = data
                .iter()
                .map(|u| {
                    let m2: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>() * op.grid.dr();
                    if m2 == 0.0 {
                        return 0.0;
                    }
                    let back = es.synthesize(&es.coefficients(u));
                    let miss: f64 = u.iter().zip(&back).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() * op.grid.dr();
                    miss / m2
                })
                .fold(0.0f64, f64::max);
            if worst <= tol || es.is_complete() {
                return Ok(es);
            }
            half *= 1.6;
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.values.len() == self.grid.n
    }

    /// `c_j = ⟨v_j, u⟩ = dr·Σ v_j,i u_i`.
    pub fn coefficients(&self, u: &[Complex64]) -> Vec<Complex64> {
        let dr = self.grid.dr();
        self.vectors
            .iter()
            .map(|v| {
                let (mut re, mut im) = (0.0, 0.0);
                for (a, z) in v.iter().zip(u) {
                    re += a * z.re;
                    im += a * z.im;
                }
                Complex64::new(re * dr, im * dr)
            })
            .collect()
    }

    pub fn synthesize(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.n];
        for (v, c) in self.vectors.iter().zip(coeffs) {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, a) in out.iter_mut().zip(v) {
                *o += c * a;
            }
        }
        out
    }

    pub fn multipliers(&self, f: impl Fn(f64) -> Complex64) -> Result<Vec<Complex64>> {
        self.values
            .iter()
            .map(|&lambda| {
                let m = f(lambda);
                if m.re.is_finite() && m.im.is_finite() {
                    Ok(m)
                } else {
                    Err(Error::Evaluation { lambda })
                }
            })
            .collect()
    }

    /// `V f(Λ) Vᵀ dr u`.
    pub fn apply_complex(&self, f: impl Fn(f64) -> Complex64, u: &[Complex64]) -> Result<Vec<Complex64>> {
        precondition(u.len() == self.grid.n, || format!("vector length {} != {}", u.len(), self.grid.n))?;
        let m = self.multipliers(f)?;
        let c: Vec<Complex64> = self.coefficients(u).into_iter().zip(m).map(|(a, b)| a * b).collect();
        Ok(self.synthesize(&c))
    }

    pub fn apply_function(&self, f: impl Fn(f64) -> f64, u: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let out = self.apply_complex(|l| Complex64::new(f(l), 0.0), &z)?;
        Ok(out.into_iter().map(|z| z.re).collect())
    }

    /// `max |dr·VᵀV − I|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let dr = self.grid.dr();
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * dr;
                worst = worst.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        precondition(self.is_complete(), || "only complete eigensystems can be cached".into())?;
        let n = self.grid.n;
        let mut buf = Vec::with_capacity(8 + 8 * (4 + n + n * n));
        buf.extend_from_slice(CACHE_MAGIC);
        for x in [self.grid.r0, self.grid.rmax, self.mu] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        buf.extend_from_slice(&(n as u64).to_le_bytes());
        for x in &self.values {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        // row i holds node i of every eigenvector
        for i in 0..n {
            for v in &self.vectors {
                buf.extend_from_slice(&v[i].to_le_bytes());
            }
        }
        std::fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 40 || &bytes[..8] != CACHE_MAGIC {
            return Err(Error::Cache(format!("{}: bad header", path.display())));
        }
        let word = |k: usize| -> [u8; 8] { bytes[8 + 8 * k..16 + 8 * k].try_into().unwrap() };
        let (r0, rmax, mu) = (f64::from_le_bytes(word(0)), f64::from_le_bytes(word(1)), f64::from_le_bytes(word(2)));
        let n = u64::from_le_bytes(word(3)) as usize;
        if bytes.len() != 40 + 8 * (n + n * n) {
            return Err(Error::Cache(format!("{}: expected {} floats for n = {n}", path.display(), n + n * n)));
        }
        let grid = RadialGrid::new(r0, rmax, n).map_err(|e| Error::Cache(e.to_string()))?;
        let values: Vec<f64> = (0..n).map(|k| f64::from_le_bytes(word(4 + k))).collect();
        let mut vectors = vec![vec![0.0; n]; n];
        for i in 0..n {
            for (j, v) in vectors.iter_mut().enumerate() {
                v[i] = f64::from_le_bytes(word(4 + n + i * n + j));
            }
        }
        Ok(Self { grid, mu, first_index: 0, values, vectors })
    }

    /// Cache lookup keyed by profile, frequency and grid; computes and stores on a miss.
    pub fn cached(op: &RadialOperator, profile: &WarpProfile, dir: &Path) -> Result<Self> {
        let name = format!(
            "{}_{:016x}_{:016x}_{:016x}_{}.eig",
            profile.name(),
            op.mu.to_bits(),
            op.grid.r0.to_bits(),
            op.grid.rmax.to_bits(),
            op.grid.n
        );
        let path = dir.join(name);
        if let Ok(es) = Self::read_cache(&path) {
            if es.grid == op.grid && es.mu == op.mu {
                return Ok(es);
            }
        }
        let es = Self::full(op)?;
        std::fs::create_dir_all(dir)?;
        es.write_cache(&path)?;
        Ok(es)
    }
}

fn central_difference(v: &[f64], dr: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { v[i - 1] } else { 0.0 };
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            (right - left) / (2.0 * dr)
        })
        .collect()
}

fn l2(v: &[f64], dr: f64) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() * dr).sqrt()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize, dr: f64) -> Vec<f64> {
    let mut u: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let s = l2(&u, dr);
    u.iter_mut().for_each(|x| *x /= s);
    u
}

/// Start of the smooth radial cutoff used by the weighted checks, measured from `r0`.
pub const CUTOFF_OFFSET: f64 = 1.0;

/// Worst ratio `‖μ^{2N₂} e^{2N₂φ} D^{N₁} ξ (A+1)^{−N} u‖ / ‖u‖` over nonzero modes and random `u`.
#[allow(clippy::too_many_arguments)]
pub fn elliptic_weight_check(
    profile: &WarpProfile,
    grid: RadialGrid,
    modes: &[Mode],
    n_pow: u32,
    n1: u32,
    n2: u32,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    precondition(n_pow >= 1, || "N must be at least 1".into())?;
    precondition(n1 + 2 * n2 <= 2 * n_pow, || format!("N1 + 2 N2 = {} exceeds 2N = {}", n1 + 2 * n2, 2 * n_pow))?;
    let dr = grid.dr();
    let nodes = grid.nodes();
    let r1 = grid.r0 + CUTOFF_OFFSET;
    let cutoff: Vec<f64> = nodes.iter().map(|&r| smooth_step(r - r1)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for mode in modes.iter().filter(|m| m.mu > 0.0) {
        let op = discretize(profile, mode.mu, grid)?;
        let weight: Vec<f64> = nodes
            .iter()
            .map(|&r| (2.0 * n2 as f64 * (mode.mu.ln() + profile.phi(r))).exp())
            .collect();
        for _ in 0..samples {
            let u = random_unit(&mut rng, grid.n, dr);
            let mut v = u;
            for _ in 0..n_pow {
                v = op.resolve(1.0, &v);
            }
            v.iter_mut().zip(&cutoff).for_each(|(x, c)| *x *= c);
            for _ in 0..n1 {
                v = central_difference(&v, dr);
            }
            v.iter_mut().zip(&weight).for_each(|(x, w)| *x *= w);
            worst = worst.max(l2(&v, dr));
        }
    }
    Ok(worst)
}

/// Worst ratio `‖e^{2Nφ}(A+1)^{−2N}u ⊗ e_k‖_{L^q} / ‖u‖` over nonzero modes and random `u`;
/// `q = ∞` is allowed. The angular factor is `‖e_k‖_{L^q(dθ)}` of a cosine mode.
#[allow(clippy::too_many_arguments)]
pub fn rough_sobolev_check(
    profile: &WarpProfile,
    grid: RadialGrid,
    modes: &[Mode],
    circumference: f64,
    n_pow: u32,
    q: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    precondition(q >= 2.0, || format!("q = {q} < 2"))?;
    let dr = grid.dr();
    let nodes = grid.nodes();
    let amp = (2.0 / circumference).sqrt();
    let angular = if q.is_infinite() {
        amp
    } else {
        let m = 4096;
        let s: f64 = (0..m).map(|j| (amp * (std::f64::consts::TAU * j as f64 / m as f64).cos()).abs().powf(q)).sum();
        (s * circumference / m as f64).powf(1.0 / q)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for mode in modes.iter().filter(|m| m.mu > 0.0) {
        let op = discretize(profile, mode.mu, grid)?;
        for _ in 0..samples {
            let mut v = random_unit(&mut rng, grid.n, dr);
            for _ in 0..2 * n_pow {
                v = op.resolve(1.0, &v);
            }
            // ψ = e^{φ/2} v, measure e^{−φ}: integrand e^{(2Nq + q/2 − 1)φ}|v|^q
            let radial = if q.is_infinite() {
                nodes
                    .iter()
                    .zip(&v)
                    .map(|(&r, x)| ((2.0 * n_pow as f64 + 0.5) * profile.phi(r)).exp() * x.abs())
                    .fold(0.0, f64::max)
            } else {
                let s: f64 = nodes
                    .iter()
                    .zip(&v)
                    .map(|(&r, x)| {
                        let lw = (2.0 * n_pow as f64 * q + 0.5 * q - 1.0) * profile.phi(r) + q * x.abs().ln();
                        lw.exp()
                    })
                    .sum();
                (s * dr).powf(1.0 / q)
            };
            worst = worst.max(radial * angular);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::AngularManifold;
    use approx::assert_relative_eq;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn matrix_entries() {
        let p = WarpProfile::exp(0.0);
        let g = RadialGrid::new(0.0, 10.0, 99).unwrap();
        assert_relative_eq!(g.dr(), 0.1, epsilon = 1e-15);
        let op = discretize(&p, 0.0, g).unwrap();
        for d in &op.matrix.diag {
            assert_relative_eq!(*d, 200.25, epsilon = 1e-9);
        }
        let op = discretize(&p, 1.0, g).unwrap();
        assert_relative_eq!(g.node(9), 1.0, epsilon = 1e-12);
        assert_relative_eq!(op.matrix.diag[9], 200.0 + 1f64.exp().powi(2) + 0.25, epsilon = 1e-9);
        assert_relative_eq!(op.matrix.off, -100.0, epsilon = 1e-9);
        assert!(matches!(discretize(&p, -1.0, g), Err(Error::Domain(_))));
        assert!(discretize(&WarpProfile::exp(1.0), 0.0, g).is_err());
        assert!(RadialGrid::new(0.0, 1.0, 8).is_err());
    }

    #[test]
    fn bottom_of_free_spectrum() {
        let p = WarpProfile::exp(0.0);
        let op = discretize(&p, 0.0, RadialGrid::new(0.0, 40.0, 4000).unwrap()).unwrap();
        let es = EigenSystem::range(&op, 0..1).unwrap();
        let exact = 0.25 + (std::f64::consts::PI / 40.0).powi(2);
        assert_relative_eq!(es.values[0], exact, max_relative = 1e-6);
    }

    #[test]
    fn dirichlet_interval_oracle() {
        // w = 1/4 for the exp warp, no potential at μ = 0: λ_j ≈ j² + 1/4 on [0, π]
        let p = WarpProfile::exp(0.0);
        let op = discretize(&p, 0.0, RadialGrid::new(0.0, std::f64::consts::PI, 799).unwrap()).unwrap();
        let es = EigenSystem::range(&op, 0..5).unwrap();
        for (j, l) in es.values.iter().enumerate() {
            let k = (j + 1) as f64;
            assert!((l - k * k - 0.25).abs() < 2e-4 * k.powi(4), "{j}: {l}");
        }
    }

    #[test]
    fn full_system_invariants() {
        let p = WarpProfile::cosh(0.0);
        let op = discretize(&p, 2.0, RadialGrid::new(0.0, 6.0, 300).unwrap()).unwrap();
        let es = EigenSystem::full(&op).unwrap();
        assert!(es.orthonormality_residual() < 1e-10);
        let norm = op.matrix.norm();
        for (l, v) in es.values.iter().zip(&es.vectors) {
            let av = op.apply(v);
            let res = av.iter().zip(v).map(|(a, b)| (a - l * b).abs()).fold(0.0, f64::max);
            let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(res <= 1e-9 * (l.abs() + norm) * vmax);
            let first = v.iter().find(|x| x.abs() > 1e-8 * vmax).unwrap();
            assert!(*first > 0.0);
        }
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn functional_calculus() {
        let p = WarpProfile::exp(0.0);
        let op = discretize(&p, 1.0, RadialGrid::new(0.0, 5.0, 200).unwrap()).unwrap();
        let es = EigenSystem::full(&op).unwrap();
        let u: Vec<f64> = op.grid.nodes().iter().map(|r| (r * 1.3).sin() * (-(r - 2.0).powi(2)).exp()).collect();
        let same = es.apply_function(|_| 1.0, &u).unwrap();
        for (a, b) in same.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
        let au = es.apply_function(|l| l, &u).unwrap();
        let direct = op.apply(&u);
        let scale = direct.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in au.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-9 * scale);
        }
        let inv = es.apply_function(|l| 1.0 / (1.0 + l), &u).unwrap();
        let solved = op.resolve(1.0, &u);
        for (a, b) in inv.iter().zip(&solved) {
            assert!((a - b).abs() < 1e-9);
        }
        let fg = es.apply_function(|l| (1.0 + l).sqrt() * (-0.01 * l).exp(), &u).unwrap();
        let g = es.apply_function(|l| (-0.01 * l).exp(), &u).unwrap();
        let f_g = es.apply_function(|l| (1.0 + l).sqrt(), &g).unwrap();
        for (a, b) in fg.iter().zip(&f_g) {
            assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        }
        assert!(matches!(es.apply_function(|l| 1.0 / (l - l), &u), Err(Error::Evaluation { .. })));
    }

    #[test]
    fn window_and_covering() {
        let p = WarpProfile::exp(0.0);
        let op = discretize(&p, 1.0, RadialGrid::new(0.0, 8.0, 1600).unwrap()).unwrap();
        let full = EigenSystem::full(&op).unwrap();
        let part = EigenSystem::window(&op, 100.0, 400.0).unwrap();
        assert!(!part.is_empty());
        assert!(part.values.iter().all(|l| (100.0..400.0).contains(l)));
        for (k, v) in part.vectors.iter().enumerate() {
            let d: f64 = v.iter().zip(&full.vectors[part.first_index + k]).map(|(a, b)| a * b).sum::<f64>() * op.grid.dr();
            assert!((d - 1.0).abs() < 1e-9);
        }
        let u: Vec<Complex64> = op
            .grid
            .nodes()
            .iter()
            .map(|&r| Complex64::from_polar((-(r - 4.0).powi(2) * 8.0).exp(), 12.0 * r))
            .collect();
        let cov = EigenSystem::covering(&op, &[&u], 1e-12).unwrap();
        assert!(cov.len() < full.len() / 2);
        let a = cov.apply_complex(|l| Complex64::from_polar(1.0, -0.3 * l), &u).unwrap();
        let b = full.apply_complex(|l| Complex64::from_polar(1.0, -0.3 * l), &u).unwrap();
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-5, "{err}");
        let _ = c(0.0);
    }

    #[test]
    fn graded_potential_keeps_low_eigenvalues_accurate() {
        // the wall e^{2r} makes [0, 8] and [0, 30] indistinguishable at low energy
        let p = WarpProfile::exp(0.0);
        let short = discretize(&p, 1.0, RadialGrid::new(0.0, 8.0, 799).unwrap()).unwrap();
        let long = discretize(&p, 1.0, RadialGrid::new(0.0, 30.0, 2999).unwrap()).unwrap();
        let a = EigenSystem::range(&short, 0..10).unwrap();
        let b = EigenSystem::range(&long, 0..10).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-8 * x, "{x} {y}");
        }
        assert!(b.orthonormality_residual() < 1e-10);
    }

    #[test]
    fn second_order_convergence() {
        let p = WarpProfile::exp(0.0);
        let lam = |n| {
            let op = discretize(&p, 1.0, RadialGrid::new(0.0, 6.0, n).unwrap()).unwrap();
            EigenSystem::range(&op, 0..1).unwrap().values[0]
        };
        let (a, b, c) = (lam(149), lam(299), lam(599));
        let ratio = (a - b) / (b - c);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn spectral_gap_grows_like_mu_squared() {
        let p = WarpProfile::exp(0.0);
        let g = RadialGrid::new(0.0, 12.0, 1200).unwrap();
        let mut c_min = f64::INFINITY;
        for k in 1..=20 {
            let mu = k as f64;
            let op = discretize(&p, mu, g).unwrap();
            let l = EigenSystem::range(&op, 0..1).unwrap().values[0];
            c_min = c_min.min(l / (mu * mu));
        }
        assert!(c_min > 0.5, "{c_min}");
    }

    #[test]
    fn cache_round_trip() {
        let p = WarpProfile::exp(0.0);
        let op = discretize(&p, 3.0, RadialGrid::new(0.0, 4.0, 40).unwrap()).unwrap();
        let dir = std::env::temp_dir().join(format!("cuspwave-cache-{}", std::process::id()));
        let es = EigenSystem::cached(&op, &p, &dir).unwrap();
        let again = EigenSystem::cached(&op, &p, &dir).unwrap();
        assert_eq!(es.values, again.values);
        assert_eq!(es.vectors, again.vectors);
        let file = std::fs::read_dir(&dir).unwrap().next().unwrap().unwrap().path();
        let bytes = std::fs::read(&file).unwrap();
        assert_eq!(&bytes[..8], b"CUSPEIG1");
        assert_eq!(bytes.len(), 40 + 8 * (40 + 1600));
        std::fs::write(&file, b"garbage").unwrap();
        assert!(matches!(EigenSystem::read_cache(&file), Err(Error::Cache(_))));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn elliptic_checks() {
        let p = WarpProfile::exp(0.0);
        let modes: Vec<Mode> = AngularManifold::unit_circle().modes_up_to(20.0).into_iter().filter(|m| m.mu > 0.0).collect();
        let g = RadialGrid::new(0.0, 40.0, 2000).unwrap();
        let r0 = elliptic_weight_check(&p, g, &modes, 1, 0, 0, 2, 1).unwrap();
        assert!(r0 <= 1.0 + 1e-12);
        assert!(elliptic_weight_check(&p, g, &modes, 1, 2, 1, 2, 1).is_err());
        let r = elliptic_weight_check(&p, g, &modes, 2, 0, 1, 2, 1).unwrap();
        assert!(r.is_finite() && r < 10.0, "{r}");
    }
}
