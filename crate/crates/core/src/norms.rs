//! Lebesgue, Sobolev and space-time norms on the cusp, plus Strichartz exponents.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::AngularGrid;
use crate::error::{precondition, Result};
use crate::geometry::WarpProfile;
use crate::propagate::CuspState;
use crate::radial::EigenSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairFamily {
    /// `1/p + 1/q = 1/2`
    SchrodingerSharp,
    /// `2/p + 1/q = 1/2`
    WaveSharp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub p: f64,
    pub q: f64,
    pub family: PairFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossExponents {
    pub sigma_s: f64,
    pub sigma_w: f64,
}

impl AdmissiblePair {
    pub fn new(p: f64, q: f64, family: PairFamily) -> Result<Self> {
        let pair = Self { p, q, family };
        pair.validate()?;
        Ok(pair)
    }

    pub fn schrodinger(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, PairFamily::SchrodingerSharp)
    }

    pub fn wave(p: f64, q: f64) -> Result<Self> {
        Self::new(p, q, PairFamily::WaveSharp)
    }

    fn validate(&self) -> Result<()> {
        precondition(self.p >= 2.0 && self.q >= 2.0, || format!("p = {}, q = {} must both be >= 2", self.p, self.q))?;
        let (lhs, name) = match self.family {
            PairFamily::SchrodingerSharp => (1.0 / self.p + 1.0 / self.q, "1/p + 1/q = 1/2"),
            PairFamily::WaveSharp => (2.0 / self.p + 1.0 / self.q, "2/p + 1/q = 1/2"),
        };
        precondition((lhs - 0.5).abs() <= 1e-12, || format!("(p, q) = ({}, {}) violates {name}", self.p, self.q))
    }
}

pub fn exponents(pair: &AdmissiblePair) -> Result<LossExponents> {
    pair.validate()?;
    let g = 0.5 - 1.0 / pair.q;
    Ok(LossExponents { sigma_s: 0.5 * g, sigma_w: 1.5 * g })
}

/// Composite Simpson weights on `count` equispaced nodes over `[0, length]`; an even
/// node count closes with a 3/8 panel.
pub fn simpson_weights(count: usize, length: f64) -> Result<Vec<f64>> {
    precondition(count >= 3, || format!("{count} nodes; Simpson quadrature needs at least 3"))?;
    let h = length / (count - 1) as f64;
    let mut w = vec![0.0; count];
    let simpson_end = if count % 2 == 1 { count - 1 } else { count - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if count.is_multiple_of(2) {
        let j = count - 4;
        for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[j + k] += 3.0 * h / 8.0 * c;
        }
    }
    Ok(w)
}

/// Radial Simpson weights for the interior nodes; the Dirichlet endpoints carry zeros.
fn radial_weights(state: &CuspState) -> Vec<f64> {
    let n = state.grid.n;
    let full = simpson_weights(n + 2, state.grid.rmax - state.grid.r0).expect("grid has at least 16 nodes");
    full[1..=n].to_vec()
}

/// `(∬ |ψ|^q e^{−φ} dr dθ)^{1/q}` for `ψ = e^{φ/2}u`; `q = ∞` gives the grid maximum.
pub fn lq_spatial(state: &CuspState, q: f64, profile: &WarpProfile, angular: &AngularGrid) -> Result<f64> {
    precondition(q >= 2.0, || format!("q = {q} < 2"))?;
    if state.modes.is_empty() {
        return Ok(0.0);
    }
    precondition(angular.modes() == state.modes.as_slice(), || "angular grid built for a different mode set".into())?;
    let nodes = state.grid.nodes();
    let half_phi: Vec<f64> = nodes.iter().map(|&r| 0.5 * profile.phi(r)).collect();
    if q.is_infinite() {
        let mut best = 0.0f64;
        let mut buf = vec![vec![Complex64::new(0.0, 0.0); angular.n_theta()]; angular.components()];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); state.modes.len()];
        for i in 0..state.grid.n {
            for (c, u) in coeffs.iter_mut().zip(&state.radial) {
                *c = u[i];
            }
            angular.synthesize_into(&coeffs, &mut buf);
            let m = buf.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
            if m > 0.0 {
                best = best.max((m.ln() + half_phi[i]).exp());
            }
        }
        return Ok(best);
    }
    let wr = radial_weights(state);
    let log_weight = |i: usize| (q - 2.0) * half_phi[i];
    let total = if state.modes.len() == 1 {
        let ang = angular.lq_mass_of_mode(0, q);
        state.radial[0]
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.0)
            .map(|(i, z)| wr[i] * (q * z.norm().ln() + log_weight(i)).exp())
            .sum::<f64>()
            * ang
    } else {
        let mut buf = vec![vec![Complex64::new(0.0, 0.0); angular.n_theta()]; angular.components()];
        let mut coeffs = vec![Complex64::new(0.0, 0.0); state.modes.len()];
        let mut s = 0.0;
        for i in 0..state.grid.n {
            for (c, u) in coeffs.iter_mut().zip(&state.radial) {
                *c = u[i];
            }
            if coeffs.iter().all(|c| *c == Complex64::new(0.0, 0.0)) {
                continue;
            }
            angular.synthesize_into(&coeffs, &mut buf);
            let mut row = 0.0;
            for (c, vals) in buf.iter().enumerate() {
                let w = angular.weight(c);
                row += w * vals.iter().filter(|z| z.norm() > 0.0).map(|z| (q * z.norm().ln()).exp()).sum::<f64>();
            }
            s += wr[i] * row * log_weight(i).exp();
        }
        s
    };
    Ok(total.powf(1.0 / q))
}

/// `(Σ_k ‖(1+Λ_k)^{σ/2} c_k‖²)^{1/2}` in each mode's eigenbasis.
pub fn sobolev(state: &CuspState, sigma: f64, systems: &[EigenSystem]) -> Result<f64> {
    precondition((0.0..=8.0).contains(&sigma), || format!("sigma = {sigma} outside [0, 8]"))?;
    precondition(systems.len() == state.modes.len(), || "one eigensystem per mode required".into())?;
    let mut s = 0.0;
    for (u, es) in state.radial.iter().zip(systems) {
        precondition(es.grid == state.grid, || "eigensystem grid differs from the state grid".into())?;
        let c = es.coefficients(u);
        s += c.iter().zip(&es.values).map(|(z, l)| (1.0 + l).powf(sigma) * z.norm_sqr()).sum::<f64>();
    }
    Ok(s.sqrt())
}

/// `(Σ_j w_j N_j^p)^{1/p}` with Simpson time weights on `[0, length]`; `p = ∞` is the maximum.
pub fn mixed_norm(spatial: &[f64], p: f64, length: f64) -> Result<f64> {
    precondition(spatial.len() >= 3, || format!("{} time nodes; at least 3 required", spatial.len()))?;
    if p.is_infinite() {
        return Ok(spatial.iter().copied().fold(0.0, f64::max));
    }
    let w = simpson_weights(spatial.len(), length)?;
    Ok(spatial.iter().zip(&w).map(|(x, w)| w * x.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Mixed norm of a trajectory sampled uniformly on `[0, length]`.
pub fn mixed_norm_states(
    trajectory: &[CuspState],
    p: f64,
    q: f64,
    length: f64,
    profile: &WarpProfile,
    angular: &AngularGrid,
) -> Result<f64> {
    let spatial = trajectory.iter().map(|s| lq_spatial(s, q, profile, angular)).collect::<Result<Vec<_>>>()?;
    mixed_norm(&spatial, p, length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::AngularManifold;
    use crate::bumps::bump;
    use crate::radial::{discretize, RadialGrid};
    use approx::assert_relative_eq;

    fn zero_mode_state(profile: &WarpProfile, grid: RadialGrid, center: f64) -> (CuspState, AngularGrid) {
        let man = AngularManifold::unit_circle();
        let modes = man.modes_up_to(0.0);
        let ang = AngularGrid::with_default_resolution(&man, &modes).unwrap();
        let s = CuspState::from_fn(grid, modes[0], |r| Complex64::new(bump((r - center) / 2.0), 0.0));
        let _ = profile;
        (s, ang)
    }

    #[test]
    fn exponent_table() {
        let e = exponents(&AdmissiblePair::schrodinger(4.0, 4.0).unwrap()).unwrap();
        assert_relative_eq!(e.sigma_s, 0.125);
        let e = exponents(&AdmissiblePair::schrodinger(6.0, 3.0).unwrap()).unwrap();
        assert_relative_eq!(e.sigma_s, 1.0 / 12.0, epsilon = 1e-15);
        let e = exponents(&AdmissiblePair::wave(8.0, 4.0).unwrap()).unwrap();
        assert_relative_eq!(e.sigma_w, 0.375);
        let err = AdmissiblePair::wave(4.0, 4.0).unwrap_err().to_string();
        assert!(err.contains("2/p + 1/q = 1/2"), "{err}");
    }

    #[test]
    fn l2_is_flat_norm() {
        let p = WarpProfile::exp(0.0);
        let g = RadialGrid::new(0.0, 20.0, 1999).unwrap();
        let (s, ang) = zero_mode_state(&p, g, 8.0);
        assert_relative_eq!(lq_spatial(&s, 2.0, &p, &ang).unwrap(), s.norm(), max_relative = 1e-10);
        let c = Complex64::new(-1.5, 2.0);
        let a = lq_spatial(&s.scale(c), 4.0, &p, &ang).unwrap();
        assert_relative_eq!(a, 2.5 * lq_spatial(&s, 4.0, &p, &ang).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn translation_weight_ratio() {
        let p = WarpProfile::exp(0.0);
        let g = RadialGrid::new(0.0, 30.0, 2999).unwrap();
        for q in [3.0, 4.0, 6.0] {
            let (a, ang) = zero_mode_state(&p, g, 8.0);
            let (b, _) = zero_mode_state(&p, g, 12.0);
            let ratio = lq_spatial(&b, q, &p, &ang).unwrap() / lq_spatial(&a, q, &p, &ang).unwrap();
            let expected = ((0.5 - 1.0 / q) * 4.0).exp();
            assert!((ratio / expected - 1.0).abs() < 0.05, "{q}: {ratio} vs {expected}");
        }
    }

    #[test]
    fn multi_mode_matches_single_mode_path() {
        let p = WarpProfile::cosh(0.0);
        let man = AngularManifold::unit_circle();
        let modes = man.modes_up_to(2.0);
        let ang = AngularGrid::with_default_resolution(&man, &modes).unwrap();
        let g = RadialGrid::new(0.0, 10.0, 400).unwrap();
        let one = CuspState::from_fn(g, modes[3], |r| Complex64::new(1.0, 0.3) * bump((r - 4.0) / 2.0));
        let ang1 = AngularGrid::with_default_resolution(&man, &modes[3..4]).unwrap();
        let mut padded = CuspState::zero(g, modes.clone());
        padded.radial[3] = one.radial[0].clone();
        for q in [2.0, 4.0, 7.0, f64::INFINITY] {
            let a = lq_spatial(&one, q, &p, &ang1).unwrap();
            let b = lq_spatial(&padded, q, &p, &ang).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
        // Parseval through the angular synthesis
        let mut mix = padded.clone();
        mix.radial[1] = one.radial[0].iter().map(|z| z * Complex64::new(0.0, 2.0)).collect();
        assert_relative_eq!(lq_spatial(&mix, 2.0, &p, &ang).unwrap(), mix.norm(), max_relative = 1e-10);
        // finite area: L² ≤ area^{1/4}·L⁴
        let l2 = lq_spatial(&mix, 2.0, &p, &ang).unwrap();
        let l4 = lq_spatial(&mix, 4.0, &p, &ang).unwrap();
        let area = std::f64::consts::TAU * p.area_tail(10.0).unwrap();
        assert!(l2 <= area.powf(0.25) * l4 * (1.0 + 1e-9));
    }

    #[test]
    fn theta_resolution_is_converged() {
        let p = WarpProfile::exp(0.0);
        let man = AngularManifold::unit_circle();
        let modes = man.modes_up_to(3.0);
        let g = RadialGrid::new(0.0, 10.0, 300).unwrap();
        let mut s = CuspState::zero(g, modes.clone());
        for (k, u) in s.radial.iter_mut().enumerate() {
            for (i, z) in u.iter_mut().enumerate() {
                let r = g.node(i);
                *z = Complex64::from_polar((-(r - 5.0 - 0.1 * k as f64).powi(2)).exp(), 0.7 * k as f64 + 0.3 * r);
            }
        }
        let coarse = AngularGrid::with_default_resolution(&man, &modes).unwrap();
        let fine = AngularGrid::new(&man, &modes, 10 * coarse.n_theta()).unwrap();
        for q in [3.0, 4.0, 5.0, 8.0] {
            let a = lq_spatial(&s, q, &p, &coarse).unwrap();
            let b = lq_spatial(&s, q, &p, &fine).unwrap();
            assert!((a / b - 1.0).abs() < 1e-6, "{q}: {}", a / b - 1.0);
        }
    }

    #[test]
    fn sobolev_properties() {
        let p = WarpProfile::exp(0.0);
        let g = RadialGrid::new(0.0, 20.0, 400).unwrap();
        let (s, _) = zero_mode_state(&p, g, 8.0);
        let es = vec![EigenSystem::full(&discretize(&p, 0.0, g).unwrap()).unwrap()];
        assert_relative_eq!(sobolev(&s, 0.0, &es).unwrap(), s.norm(), max_relative = 1e-12);
        let mut prev = 0.0;
        for k in 0..8 {
            let v = sobolev(&s, k as f64, &es).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        assert!(sobolev(&s, 9.0, &es).is_err());
    }

    #[test]
    fn time_norms() {
        assert_relative_eq!(mixed_norm(&[2.0; 33], 4.0, 0.5).unwrap(), 2.0 * 0.5f64.powf(0.25), max_relative = 1e-14);
        assert_relative_eq!(mixed_norm(&[2.0; 34], 4.0, 0.5).unwrap(), 2.0 * 0.5f64.powf(0.25), max_relative = 1e-14);
        assert!(mixed_norm(&[1.0, 2.0], 2.0, 1.0).is_err());
        assert_eq!(mixed_norm(&[1.0, 3.0, 2.0], f64::INFINITY, 1.0).unwrap(), 3.0);
        // ‖f‖_{L^p[0,h]} = h^{1/p}‖f(h·)‖_{L^p[0,1]}
        let f = |t: f64| 1.0 + (5.0 * t).sin().powi(2);
        let h = 0.125;
        let m = 65;
        let on_h: Vec<f64> = (0..m).map(|j| f(h * j as f64 / (m - 1) as f64)).collect();
        let lhs = mixed_norm(&on_h, 3.0, h).unwrap();
        let rhs = h.powf(1.0 / 3.0) * mixed_norm(&on_h, 3.0, 1.0).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
        // Simpson exactness on cubics
        let w = simpson_weights(9, 2.0).unwrap();
        let integral: f64 = w.iter().enumerate().map(|(j, w)| w * (0.25 * j as f64).powi(3)).sum();
        assert_relative_eq!(integral, 4.0, max_relative = 1e-14);
    }

    proptest::proptest! {
        #![proptest_config(proptest::test_runner::Config::with_cases(32))]

        #[test]
        fn lq_is_a_norm(
            a in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4),
            b in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4),
            q in 2.0f64..9.0,
            c in -3.0f64..3.0,
        ) {
            let p = WarpProfile::exp(0.0);
            let man = AngularManifold::unit_circle();
            let modes = man.modes_up_to(1.0);
            let ang = AngularGrid::with_default_resolution(&man, &modes).unwrap();
            let g = RadialGrid::new(0.0, 6.0, 60).unwrap();
            let state = |coef: &[(f64, f64)]| {
                let mut s = CuspState::zero(g, modes.clone());
                for (k, u) in s.radial.iter_mut().enumerate() {
                    let (x, y) = coef[k % coef.len()];
                    for (i, z) in u.iter_mut().enumerate() {
                        *z = Complex64::new(x, y) * bump((g.node(i) - 2.0 - 0.5 * k as f64) / 1.5);
                    }
                }
                s
            };
            let (sa, sb) = (state(&a), state(&b));
            let na = lq_spatial(&sa, q, &p, &ang).unwrap();
            let nb = lq_spatial(&sb, q, &p, &ang).unwrap();
            let nab = lq_spatial(&sa.add(&sb).unwrap(), q, &p, &ang).unwrap();
            proptest::prop_assert!(nab <= (na + nb) * (1.0 + 1e-12) + 1e-300);
            let scaled = lq_spatial(&sa.scale(Complex64::new(c, 0.0)), q, &p, &ang).unwrap();
            proptest::prop_assert!((scaled - c.abs() * na).abs() <= 1e-12 * (1.0 + na));
        }

        #[test]
        fn mixed_norm_minkowski(
            x in proptest::collection::vec(0.0f64..5.0, 3..40),
            shift in 0.0f64..5.0,
            p in 1.0f64..10.0,
        ) {
            let y: Vec<f64> = x.iter().rev().map(|v| v + shift).collect();
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let l = 0.7;
            let lhs = mixed_norm(&sum, p, l).unwrap();
            let rhs = mixed_norm(&x, p, l).unwrap() + mixed_norm(&y, p, l).unwrap();
            proptest::prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
