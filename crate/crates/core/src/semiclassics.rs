//! Semiclassical layer: symbols and their quantization, Hamiltonian flows with
//! variational equations, phase Hessians, coherent states.

use std::ops::Range;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bumps::{chi, kappa, phi_spec, PHI_SPEC_SUPPORT};
use crate::error::{precondition, Error, Result};
use crate::geometry::WarpProfile;
use crate::radial::{discretize, EigenSystem, RadialGrid};

/// RK4 steps per unit of flow time.
pub const STEPS_PER_UNIT: f64 = 4096.0;
/// Closest approach to `r0` tolerated by [`flow`].
pub const BOUNDARY_MARGIN: f64 = 1e-3;
/// Constant used by [`van_der_corput_check`].
pub const VDC_CONSTANT: f64 = 3.0;

/// Potential `h²μ²e^{2φ}` and its first two derivatives.
fn potential(profile: &WarpProfile, h: f64, mu: f64, x: f64) -> (f64, f64, f64) {
    if mu == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let v = (2.0 * (h * mu).ln() + 2.0 * profile.phi(x)).exp();
    let d1 = profile.derivative(1, x);
    let d2 = profile.derivative(2, x);
    (v, 2.0 * d1 * v, (2.0 * d2 + 4.0 * d1 * d1) * v)
}

/// `a₀(r, ρ) = φ_spec(ρ² + h²μ²e^{2φ(r)})`.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalSymbol {
    pub profile: WarpProfile,
    pub h: f64,
    pub mu: f64,
}

impl PrincipalSymbol {
    pub fn potential(&self, r: f64) -> f64 {
        potential(&self.profile, self.h, self.mu, r).0
    }

    pub fn value(&self, r: f64, rho: f64) -> f64 {
        phi_spec(rho * rho + self.potential(r))
    }

    /// Same symbol with `ρ²` replaced by the symbol `(2h/dr)² sin²(ρ dr/2h)` of the
    /// three-point Laplacian, so that discretization error does not enter comparisons.
    pub fn lattice_value(&self, r: f64, rho: f64, dr: f64) -> f64 {
        let s = (rho * dr / (2.0 * self.h)).sin() * 2.0 * self.h / dr;
        phi_spec(s * s + self.potential(r))
    }

    /// True when the whole radial interval lies in the classically forbidden region.
    pub fn vanishes_on(&self, r_lo: f64, _r_hi: f64) -> bool {
        self.potential(r_lo) >= PHI_SPEC_SUPPORT.1
    }
}

/// Rows `rows` of an `n × n` matrix with entries only for `|i − j| ≤ band`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    pub n: usize,
    pub band: usize,
    pub rows: Range<usize>,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    fn width(&self) -> usize {
        2 * self.band + 1
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if !self.rows.contains(&i) || i.abs_diff(j) > self.band || j >= self.n {
            return Complex64::new(0.0, 0.0);
        }
        self.data[(i - self.rows.start) * self.width() + (j + self.band - i)]
    }

    fn cols(&self, i: usize) -> Range<usize> {
        i.saturating_sub(self.band)..(i + self.band + 1).min(self.n)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for i in self.rows.clone() {
            let row = &self.data[(i - self.rows.start) * self.width()..];
            y[i] = self.cols(i).map(|j| row[j + self.band - i] * x[j]).sum();
        }
        y
    }

    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for i in self.rows.clone() {
            let row = &self.data[(i - self.rows.start) * self.width()..];
            let xi = x[i];
            for j in self.cols(i) {
                y[j] += row[j + self.band - i].conj() * xi;
            }
        }
        y
    }
}

/// Properly supported left quantization on the grid:
/// `K_ij = (2πh)^{−1} ∫ e^{i(r_i−r_j)ρ/h} a(r_i, ρ) dρ · κ(r_j − r_i) · dr`, with the ρ-integral
/// taken over one lattice period `|ρ| ≤ πh/dr` by FFT. Symbols are treated as periodic in ρ,
/// which is exact for [`PrincipalSymbol::lattice_value`].
pub fn quantize(
    symbol: impl Fn(f64, f64) -> f64,
    h: f64,
    kappa_width: f64,
    grid: RadialGrid,
    rows: Range<usize>,
) -> Result<BandedMatrix> {
    precondition(kappa_width > 0.0, || format!("kappa width {kappa_width} must be positive"))?;
    precondition(rows.end <= grid.n, || format!("rows {rows:?} exceed grid size {}", grid.n))?;
    let dr = grid.dr();
    let band = ((kappa_width / dr).ceil() as usize).min(grid.n - 1);
    let m = (4 * band + 2).max(1024).next_power_of_two();
    let rho_edge = std::f64::consts::PI * h / dr;
    let mut fft = FftPlanner::<f64>::new();
    let ifft = fft.plan_fft_inverse(m);
    let width = 2 * band + 1;
    let mut data = vec![Complex64::new(0.0, 0.0); rows.len() * width];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (row_idx, i) in rows.clone().enumerate() {
        let r = grid.node(i);
        for (l, b) in buf.iter_mut().enumerate() {
            let k = if l < m / 2 { l as f64 } else { l as f64 - m as f64 };
            let rho = k * 2.0 * rho_edge / m as f64;
            *b = Complex64::new(symbol(r, rho), 0.0);
        }
        ifft.process(&mut buf);
        for off in 0..width {
            let j = i as i64 + off as i64 - band as i64;
            if j < 0 || j >= grid.n as i64 {
                continue;
            }
            // m = i − j indexes the Fourier coefficient
            let mi = (i as i64 - j).rem_euclid(m as i64) as usize;
            let kap = kappa((j - i as i64) as f64 * dr, kappa_width);
            data[row_idx * width + off] = buf[mi] / m as f64 * kap;
        }
    }
    Ok(BandedMatrix { n: grid.n, band, rows, data })
}

/// Largest singular value of `E` from Lanczos on `E*E` with full reorthogonalization.
pub fn operator_norm(
    n: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    apply_adjoint: impl Fn(&[Complex64]) -> Vec<Complex64>,
    steps: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut q: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let s = norm(&q);
    q.iter_mut().for_each(|z| *z /= s);
    let mut basis: Vec<Vec<Complex64>> = vec![];
    let (mut alpha, mut beta) = (vec![], vec![]);
    for _ in 0..steps.min(n) {
        let mut w = apply_adjoint(&apply(&q));
        let a: f64 = q.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum();
        alpha.push(a);
        basis.push(q.clone());
        for _ in 0..2 {
            for b in &basis {
                let d: Complex64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                w.iter_mut().zip(b).for_each(|(y, x)| *y -= d * x);
            }
        }
        let bn = norm(&w);
        if bn <= 1e-13 * a.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        beta.push(bn);
        q = w.into_iter().map(|z| z / bn).collect();
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i.abs_diff(j) == 1 {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    let top = SymmetricEigen::new(t).eigenvalues.iter().copied().fold(0.0, f64::max);
    top.max(0.0).sqrt()
}

/// `‖ξ·[φ_spec(h²A) − Op(a₀)]‖` on the grid, with `Op` the banded quantization of the lattice
/// principal symbol and `A` the discretized radial operator.
#[allow(clippy::too_many_arguments)]
pub fn symbol_vs_calculus(
    profile: &WarpProfile,
    h: f64,
    mu: f64,
    grid: RadialGrid,
    localizer: impl Fn(f64) -> f64,
    kappa_width: f64,
    lanczos_steps: usize,
    seed: u64,
) -> Result<f64> {
    let nodes = grid.nodes();
    let xi: Vec<f64> = nodes.iter().map(|&r| localizer(r)).collect();
    let first = xi.iter().position(|&x| x != 0.0).unwrap_or(0);
    let last = xi.iter().rposition(|&x| x != 0.0).map_or(0, |k| k + 1);
    precondition(first < last, || "localizer vanishes on the grid".into())?;
    precondition(grid.node(first) - kappa_width > grid.r0, || {
        format!("localizer support + kappa width reaches r0 = {}", grid.r0)
    })?;
    let op = discretize(profile, mu, grid)?;
    let h2 = h * h;
    let es = EigenSystem::window(&op, PHI_SPEC_SUPPORT.0 / h2, PHI_SPEC_SUPPORT.1 / h2)?;
    let sym = PrincipalSymbol { profile: *profile, h, mu };
    let dr = grid.dr();
    let k = quantize(|r, rho| sym.lattice_value(r, rho, dr), h, kappa_width, grid, first..last)?;
    let f = |u: &[Complex64]| -> Vec<Complex64> {
        if es.is_empty() {
            return vec![Complex64::new(0.0, 0.0); u.len()];
        }
        es.apply_complex(|l| Complex64::new(phi_spec(h2 * l), 0.0), u).expect("finite multiplier")
    };
    let apply = |u: &[Complex64]| -> Vec<Complex64> {
        let a = f(u);
        let b = k.matvec(u);
        a.iter().zip(&b).zip(&xi).map(|((x, y), w)| (x - y) * w).collect()
    };
    let apply_adjoint = |v: &[Complex64]| -> Vec<Complex64> {
        let xv: Vec<Complex64> = v.iter().zip(&xi).map(|(z, w)| z * w).collect();
        let a = f(&xv);
        let b = k.adjoint_matvec(&xv);
        a.iter().zip(&b).map(|(x, y)| x - y).collect()
    };
    Ok(operator_norm(grid.n, apply, apply_adjoint, lanczos_steps, seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HamiltonianKind {
    /// `H = ρ² + h²μ²e^{2φ}`
    Schrodinger,
    /// `√H`
    HalfWave,
}

#[derive(Debug, Clone, Copy)]
pub struct Hamiltonian {
    pub kind: HamiltonianKind,
    pub profile: WarpProfile,
    pub h: f64,
    pub mu: f64,
}

/// Value, gradient and Hessian of a Hamiltonian at a phase point.
#[derive(Debug, Clone, Copy)]
struct Jet {
    value: f64,
    dx: f64,
    dxi: f64,
    dxx: f64,
    dxxi: f64,
    dxixi: f64,
}

impl Hamiltonian {
    pub fn schrodinger(profile: WarpProfile, h: f64, mu: f64) -> Self {
        Self { kind: HamiltonianKind::Schrodinger, profile, h, mu }
    }

    pub fn half_wave(profile: WarpProfile, h: f64, mu: f64) -> Self {
        Self { kind: HamiltonianKind::HalfWave, profile, h, mu }
    }

    pub fn potential(&self, x: f64) -> f64 {
        potential(&self.profile, self.h, self.mu, x).0
    }

    pub fn value(&self, x: f64, xi: f64) -> f64 {
        self.jet(x, xi).value
    }

    fn jet(&self, x: f64, xi: f64) -> Jet {
        let (v, v1, v2) = potential(&self.profile, self.h, self.mu, x);
        let hval = xi * xi + v;
        match self.kind {
            HamiltonianKind::Schrodinger => Jet { value: hval, dx: v1, dxi: 2.0 * xi, dxx: v2, dxxi: 0.0, dxixi: 2.0 },
            HamiltonianKind::HalfWave => {
                let g = hval.sqrt();
                let g3 = g * g * g;
                Jet {
                    value: g,
                    dx: v1 / (2.0 * g),
                    dxi: xi / g,
                    dxx: v2 / (2.0 * g) - v1 * v1 / (4.0 * g3),
                    dxxi: -xi * v1 / (2.0 * g3),
                    dxixi: v / g3,
                }
            }
        }
    }

    /// Time derivative of `[x, ξ, a, b, c, d, S]`.
    fn field(&self, y: &[f64; 7]) -> [f64; 7] {
        let j = self.jet(y[0], y[1]);
        let (a, b, c, d) = (y[2], y[3], y[4], y[5]);
        [
            j.dxi,
            -j.dx,
            j.dxxi * a + j.dxixi * c,
            j.dxxi * b + j.dxixi * d,
            -j.dxx * a - j.dxxi * c,
            -j.dxx * b - j.dxxi * d,
            j.dxi * y[1] - j.value,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub s: f64,
    pub x: f64,
    pub xi: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub action: f64,
}

impl FlowState {
    pub fn symplectic_defect(&self) -> f64 {
        (self.a * self.d - self.b * self.c - 1.0).abs()
    }

    pub fn gamma(&self) -> Result<Complex64> {
        let den = Complex64::new(self.a, self.b);
        if den.norm() == 0.0 {
            return Err(Error::Caustic(self.s));
        }
        Ok(Complex64::new(self.c, self.d) / den)
    }
}

/// RK4 integration of the flow, its linearization and the action over `[0, s_max]`
/// (negative `s_max` integrates backwards). Returns `steps + 1` states.
pub fn flow(ham: &Hamiltonian, init: (f64, f64), s_max: f64, steps: usize) -> Result<Vec<FlowState>> {
    precondition(steps >= 1, || "at least one step required".into())?;
    if ham.kind == HamiltonianKind::HalfWave {
        precondition(ham.value(init.0, init.1) > 0.0, || "half-wave flow needs H > 0 at the initial point".into())?;
    }
    let floor = ham.profile.r0 + BOUNDARY_MARGIN;
    if init.0 <= floor {
        return Err(Error::BoundaryHit { time: 0.0 });
    }
    let dt = s_max / steps as f64;
    let mut y = [init.0, init.1, 1.0, 0.0, 0.0, 1.0, 0.0];
    let pack = |s: f64, y: &[f64; 7]| FlowState { s, x: y[0], xi: y[1], a: y[2], b: y[3], c: y[4], d: y[5], action: y[6] };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(pack(0.0, &y));
    for k in 0..steps {
        let add = |y: &[f64; 7], k: &[f64; 7], f: f64| -> [f64; 7] { std::array::from_fn(|i| y[i] + f * k[i]) };
        let k1 = ham.field(&y);
        let k2 = ham.field(&add(&y, &k1, 0.5 * dt));
        let k3 = ham.field(&add(&y, &k2, 0.5 * dt));
        let k4 = ham.field(&add(&y, &k3, dt));
        for i in 0..7 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let s = (k + 1) as f64 * dt;
        if y[0] <= floor || !y.iter().all(|v| v.is_finite()) {
            return Err(Error::BoundaryHit { time: s });
        }
        out.push(pack(s, &y));
    }
    Ok(out)
}

pub(crate) fn steps_for(t: f64) -> usize {
    ((t.abs() * STEPS_PER_UNIT).ceil() as usize).max(16)
}

/// End point of the flow from `(r, η)` over time `t`.
pub fn flow_endpoint(ham: &Hamiltonian, r: f64, eta: f64, t: f64) -> Result<FlowState> {
    Ok(*flow(ham, (r, eta), t, steps_for(t))?.last().expect("non-empty flow"))
}

/// `∂²_ρ S(t, r, ρ) = b_t/d_t` at the initial momentum `η` with `ξ^t(r, η) = ρ`, found
/// in `eta_range` by 64-way bracketing and Newton's method.
pub fn phase_hessian(ham: &Hamiltonian, r: f64, rho: f64, t: f64, eta_range: (f64, f64)) -> Result<f64> {
    let (_, st) = invert_momentum(ham, r, rho, t, eta_range)?;
    Ok(st.b / st.d)
}

/// `(η, end state)` with `ξ^t(r, η) = ρ`.
pub fn invert_momentum(ham: &Hamiltonian, r: f64, rho: f64, t: f64, eta_range: (f64, f64)) -> Result<(f64, FlowState)> {
    let (lo, hi) = eta_range;
    precondition(hi > lo, || format!("empty momentum range ({lo}, {hi})"))?;
    let g = |eta: f64| -> Result<FlowState> { flow_endpoint(ham, r, eta, t) };
    let subdivisions = 64;
    let mut bracket = None;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=subdivisions {
        let eta = lo + (hi - lo) * k as f64 / subdivisions as f64;
        let val = match g(eta) {
            Ok(st) => st.xi - rho,
            Err(_) => {
                prev = None;
                continue;
            }
        };
        if let Some((pe, pv)) = prev {
            if pv == 0.0 || pv.signum() != val.signum() {
                bracket = Some((pe, eta));
                break;
            }
        }
        prev = Some((eta, val));
    }
    let (mut a, mut b) = bracket.ok_or_else(|| Error::Inversion(format!("no η with ξ^t = {rho} at r = {r}, t = {t}")))?;
    let mut eta = 0.5 * (a + b);
    let fa = g(a)?.xi - rho;
    for _ in 0..100 {
        let st = g(eta)?;
        let f = st.xi - rho;
        if f.abs() <= 1e-12 * (1.0 + rho.abs()) {
            return Ok((eta, st));
        }
        if f.signum() == fa.signum() {
            a = eta;
        } else {
            b = eta;
        }
        // Newton with ∂ξ^t/∂η = d, falling back to bisection outside the bracket
        let newton = eta - f / st.d;
        eta = if st.d != 0.0 && newton > a.min(b) && newton < a.max(b) { newton } else { 0.5 * (a + b) };
    }
    Err(Error::Inversion(format!("Newton did not converge at r = {r}, ρ = {rho}, t = {t}")))
}

/// `|∫ e^{iS} b dρ|` by Simpson quadrature on an equispaced ρ-grid, and the bound
/// `(‖b‖_∞ + ‖b′‖_{L¹}) / √lower`.
pub fn van_der_corput_check(phase: &[f64], amplitude: &[f64], step: f64, lower: f64) -> Result<(f64, f64)> {
    let n = phase.len();
    precondition(n == amplitude.len() && n >= 5, || "phase and amplitude need equal length >= 5".into())?;
    precondition(lower > 0.0, || format!("lower bound {lower} must be positive"))?;
    for i in 1..n - 1 {
        let s2 = (phase[i + 1] - 2.0 * phase[i] + phase[i - 1]) / (step * step);
        precondition(s2 >= lower * (1.0 - 1e-6), || format!("S'' = {s2} < {lower} at sample {i}"))?;
    }
    let w = crate::norms::simpson_weights(n, step * (n - 1) as f64)?;
    let lhs = phase
        .iter()
        .zip(amplitude)
        .zip(&w)
        .map(|((s, b), w)| Complex64::from_polar(b * w, *s))
        .sum::<Complex64>()
        .norm();
    let sup = amplitude.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let var: f64 = amplitude.windows(2).map(|p| (p[1] - p[0]).abs()).sum();
    Ok((lhs, (sup + var) / lower.sqrt()))
}

/// Gaussian packet of width `√h` at `(−log h, 0)`, cut off by `χ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentState {
    pub h: f64,
}

impl CoherentState {
    pub fn new(h: f64) -> Result<Self> {
        precondition(h > 0.0 && h <= 1.0, || format!("h = {h} outside (0, 1]"))?;
        Ok(Self { h })
    }

    pub fn center(&self) -> (f64, f64) {
        (-self.h.ln(), 0.0)
    }

    pub fn profile(&self, r: f64) -> f64 {
        let y = r - self.center().0;
        (std::f64::consts::PI * self.h).powf(-0.25) * chi(y) * (-y * y / (2.0 * self.h)).exp()
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<Complex64> {
        grid.nodes().into_iter().map(|r| Complex64::new(self.profile(r), 0.0)).collect()
    }
}

/// Arguments of `a + ib` along a trajectory, unwrapped so that they start at 0.
pub fn continuous_arguments(traj: &[FlowState]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(traj.len());
    let mut acc = 0.0;
    let mut prev = Complex64::new(1.0, 0.0);
    for st in traj {
        let z = Complex64::new(st.a, st.b);
        if z.norm() == 0.0 {
            return Err(Error::Caustic(st.s));
        }
        acc += (z / prev).arg();
        prev = z;
        out.push(acc);
    }
    Ok(out)
}

/// Leading-order propagated coherent state at the last point of `traj`:
/// `(πh)^{−1/4}(a+ib)^{−1/2} χ(r−x) exp{(i/h)[S + ξ(r−x) + Γ(r−x)²/2]}`.
pub fn coherent_evolve_leading(cs: &CoherentState, traj: &[FlowState], nodes: &[f64]) -> Result<Vec<Complex64>> {
    let st = traj.last().ok_or_else(|| Error::Precondition("empty trajectory".into()))?;
    let args = continuous_arguments(traj)?;
    let z = Complex64::new(st.a, st.b);
    let amp = Complex64::from_polar(z.norm().powf(-0.5), -0.5 * args[args.len() - 1]);
    let gamma = st.gamma()?;
    let pref = (std::f64::consts::PI * cs.h).powf(-0.25) * amp;
    Ok(nodes
        .iter()
        .map(|&r| {
            let y = r - st.x;
            let cut = chi(y);
            if cut == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let phase = Complex64::new(st.action + st.xi * y, 0.0) + 0.5 * gamma * y * y;
            pref * cut * (Complex64::i() * phase / cs.h).exp()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn free_flow_closed_form() {
        let ham = Hamiltonian::schrodinger(WarpProfile::exp(0.0), 0.1, 0.0);
        let traj = flow(&ham, (5.0, 0.7), 1.0, 256).unwrap();
        for st in &traj {
            let s = st.s;
            assert_relative_eq!(st.x, 5.0 + 1.4 * s, epsilon = 1e-12);
            assert_relative_eq!(st.xi, 0.7, epsilon = 1e-12);
            assert_relative_eq!(st.b, 2.0 * s, epsilon = 1e-12);
            assert_relative_eq!(st.action, s * 0.49, epsilon = 1e-12);
            let g = st.gamma().unwrap();
            let exact = Complex64::i() / Complex64::new(1.0, 2.0 * s);
            assert!((g - exact).norm() < 1e-12);
            assert!((g.im - 1.0 / (1.0 + 4.0 * s * s)).abs() < 1e-12);
        }
    }

    #[test]
    fn exponential_cusp_flow_is_explicit() {
        // y = x + log h satisfies e^y = sech(2s), ξ = −tanh(2s)
        for &h in &[0.125, 2f64.powi(-6)] {
            let ham = Hamiltonian::schrodinger(WarpProfile::exp(0.0), h, 1.0);
            let x0 = -h.ln();
            let traj = flow(&ham, (x0, 0.0), 1.0, 4096).unwrap();
            for st in traj.iter().step_by(256) {
                let y = st.x - x0;
                assert!((y.exp() - 1.0 / (2.0 * st.s).cosh()).abs() < 1e-11);
                assert!((st.xi + (2.0 * st.s).tanh()).abs() < 1e-11);
                assert!(st.symplectic_defect() < 1e-9);
                assert!((ham.value(st.x, st.xi) - 1.0).abs() < 1e-10);
                let g = st.gamma().unwrap();
                assert!(g.im >= 1.0 / 6.0 && g.im <= 6.0, "{g}");
                assert!((st.x - x0).abs() <= 4.0);
            }
        }
    }

    #[test]
    fn half_wave_flow_invariants() {
        let ham = Hamiltonian::half_wave(WarpProfile::cosh(0.0), 0.05, 2.0);
        let traj = flow(&ham, (3.0, 0.4), -1.0, 4096).unwrap();
        let e0 = ham.value(3.0, 0.4);
        for st in &traj {
            assert!(st.symplectic_defect() < 1e-9);
            assert!((ham.value(st.x, st.xi) - e0).abs() < 1e-10);
        }
        let bad = Hamiltonian::half_wave(WarpProfile::exp(0.0), 0.1, 0.0);
        assert!(flow(&bad, (1.0, 0.0), 1.0, 10).is_err());
    }

    #[test]
    fn boundary_hit_is_reported() {
        let ham = Hamiltonian::schrodinger(WarpProfile::exp(0.0), 0.1, 0.0);
        match flow(&ham, (0.5, -1.0), 1.0, 100) {
            Err(Error::BoundaryHit { time }) => assert!((time - 0.25).abs() < 0.02, "{time}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_phase_hessian() {
        let ham = Hamiltonian::schrodinger(WarpProfile::exp(0.0), 0.1, 0.0);
        let v = phase_hessian(&ham, 3.0, 0.8, 0.05, (-2.0, 2.0)).unwrap();
        assert_relative_eq!(v, 0.1, epsilon = 1e-10);
        assert!(matches!(phase_hessian(&ham, 3.0, 5.0, 0.05, (-2.0, 2.0)), Err(Error::Inversion(_))));
    }

    #[test]
    fn van_der_corput_fresnel() {
        let n = 4001;
        let step = 4.0 / (n - 1) as f64;
        let rho: Vec<f64> = (0..n).map(|i| -2.0 + i as f64 * step).collect();
        let amp: Vec<f64> = rho.iter().map(|r| chi(*r)).collect();
        let mut prev = f64::INFINITY;
        for lam in [50.0, 200.0, 800.0] {
            let phase: Vec<f64> = rho.iter().map(|r| lam * r * r).collect();
            let (lhs, bound) = van_der_corput_check(&phase, &amp, step, 2.0 * lam).unwrap();
            assert!(lhs <= VDC_CONSTANT * bound);
            // Fresnel: ∫e^{iλρ²} ≈ √(π/λ)
            assert!((lhs - (std::f64::consts::PI / lam).sqrt()).abs() < 0.05 * lhs, "{lam}: {lhs}");
            assert!(lhs < prev);
            prev = lhs;
        }
        let zero = vec![0.0; n];
        let phase: Vec<f64> = rho.iter().map(|r| r * r).collect();
        assert_eq!(van_der_corput_check(&phase, &zero, step, 2.0).unwrap().0, 0.0);
        let linear: Vec<f64> = rho.clone();
        assert!(van_der_corput_check(&linear, &amp, step, 1.0).is_err());
    }

    #[test]
    fn coherent_state_basics() {
        let h = 2f64.powi(-6);
        let cs = CoherentState::new(h).unwrap();
        let grid = RadialGrid::new(0.0, 9.0, 9000).unwrap();
        let u = cs.sample(&grid);
        let norm = (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dr()).sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let ham = Hamiltonian::schrodinger(WarpProfile::exp(0.0), h, 1.0);
        let traj = flow(&ham, cs.center(), 0.0, 1).unwrap();
        let lead = coherent_evolve_leading(&cs, &traj[..1], &grid.nodes()).unwrap();
        for (a, b) in lead.iter().zip(&u) {
            assert!((a - b).norm() < 1e-14);
        }
        let traj = flow(&ham, cs.center(), 0.5, 2048).unwrap();
        let lead = coherent_evolve_leading(&cs, &traj, &grid.nodes()).unwrap();
        let n2 = (lead.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dr()).sqrt();
        assert!((n2 - 1.0).abs() < 2.0 * h.sqrt(), "{n2}");
    }

    #[test]
    fn quantization_of_constants_and_norm_bound() {
        let grid = RadialGrid::new(0.0, 4.0, 399).unwrap();
        let h = 0.05;
        let id = quantize(|_, _| 1.0, h, 1.0, grid, 0..grid.n).unwrap();
        for i in 0..grid.n {
            for j in 0..grid.n {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((id.get(i, j) - expect).norm() < 1e-12);
            }
        }
        // r-independent symbol gives a Toeplitz (convolution) matrix away from κ edges
        let sym = PrincipalSymbol { profile: WarpProfile::exp(0.0), h, mu: 0.0 };
        let dr = grid.dr();
        let k = quantize(|r, rho| sym.lattice_value(r, rho, dr), h, 1.0, grid, 0..grid.n).unwrap();
        for off in 0..20 {
            assert!((k.get(100, 100 + off) - k.get(250, 250 + off)).norm() < 1e-14);
        }
        let norm = operator_norm(grid.n, |u| k.matvec(u), |u| k.adjoint_matvec(u), 40, 1);
        assert!(norm <= 1.2, "{norm}");
    }

    #[test]
    fn lanczos_matches_dense_svd() {
        let n = 60;
        let m = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4 + if i == j { 1.0 } else { 0.0 });
        let svd = m.clone().svd(false, false);
        let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let mt = m.transpose();
        let mv = |a: &DMatrix<f64>, u: &[Complex64]| -> Vec<Complex64> {
            (0..n).map(|i| (0..n).map(|j| a[(i, j)] * u[j]).sum()).collect()
        };
        let est = operator_norm(n, |u| mv(&m, u), |u| mv(&mt, u), 60, 3);
        assert_relative_eq!(est, top, max_relative = 1e-10);
    }

    #[test]
    fn forbidden_region_symbol_vanishes() {
        let sym = PrincipalSymbol { profile: WarpProfile::exp(0.0), h: 0.01, mu: 1.0 };
        // hμe^{r} = 2 at r = ln 200
        let r = 200f64.ln() + 0.01;
        assert!(sym.vanishes_on(r, r + 1.0));
        for k in 0..50 {
            assert_eq!(sym.value(r + 0.02 * k as f64, -3.0 + 0.12 * k as f64), 0.0);
        }
    }
}
