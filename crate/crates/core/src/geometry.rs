//! Warp profiles of the model cusp `(r0, ∞) × A` with metric `dr² + e^{-2φ(r)} g_A`.
//!
//! Every profile is closed form, so derivatives are exact and the effective
//! potential `w = (φ'² − 2φ'')/4` carries no interpolation error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step of the composite Simpson rule used by [`WarpProfile::area_tail`].
pub const AREA_STEP: f64 = 1e-3;

/// Smallest admissible left endpoint for power cusps.
pub const POWER_MIN_R0: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WarpKind {
    /// `φ(r) = r`, the hyperbolic cusp.
    Exp,
    /// `φ(r) = log cosh r`.
    Cosh,
    /// `φ(r) = σ log r`, `σ > 1`.
    Power { sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpProfile {
    pub kind: WarpKind,
    pub r0: f64,
}

/// `φ`, its first two derivatives and the effective potential at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpValues {
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
    pub w: f64,
}

fn log_cosh(r: f64) -> f64 {
    let a = r.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl WarpProfile {
    pub fn new(kind: WarpKind, r0: f64) -> Result<Self> {
        if !r0.is_finite() {
            return Err(Error::Domain(format!("r0 must be finite, got {r0}")));
        }
        if let WarpKind::Power { sigma } = kind {
            if !(sigma > 1.0) || !sigma.is_finite() {
                return Err(Error::Domain(format!("power cusp needs sigma > 1, got {sigma}")));
            }
            if r0 < POWER_MIN_R0 {
                return Err(Error::Domain(format!(
                    "power cusp needs r0 >= {POWER_MIN_R0}, got {r0}"
                )));
            }
        }
        Ok(Self { kind, r0 })
    }

    pub fn exp(r0: f64) -> Self {
        Self { kind: WarpKind::Exp, r0 }
    }

    pub fn cosh(r0: f64) -> Self {
        Self { kind: WarpKind::Cosh, r0 }
    }

    pub fn power(sigma: f64, r0: f64) -> Result<Self> {
        Self::new(WarpKind::Power { sigma }, r0)
    }

    fn check(&self, r: f64) -> Result<()> {
        if r < self.r0 || r.is_nan() {
            Err(Error::Domain(format!("r = {r} lies left of r0 = {}", self.r0)))
        } else {
            Ok(())
        }
    }

    /// `φ(r)` without the domain check; callers guarantee `r >= r0`.
    pub fn phi(&self, r: f64) -> f64 {
        match self.kind {
            WarpKind::Exp => r,
            WarpKind::Cosh => log_cosh(r),
            WarpKind::Power { sigma } => sigma * r.ln(),
        }
    }

    /// Smallest `r >= r0` with `φ(r) >= target` (bisection; `φ` is increasing on `[r0, ∞)`
    /// for every profile used at large `r`).
    pub fn phi_inverse(&self, target: f64) -> f64 {
        let (mut a, mut b) = (self.r0, self.r0 + 1.0);
        if self.phi(a) >= target {
            return a;
        }
        while self.phi(b) < target {
            b = a + 2.0 * (b - a);
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.phi(m) >= target {
                b = m;
            } else {
                a = m;
            }
        }
        b
    }

    /// j-th derivative of φ for `0 <= j <= 4`.
    pub fn derivative(&self, j: usize, r: f64) -> f64 {
        match (self.kind, j) {
            (_, 0) => self.phi(r),
            (WarpKind::Exp, 1) => 1.0,
            (WarpKind::Exp, _) => 0.0,
            (WarpKind::Cosh, 1) => r.tanh(),
            (WarpKind::Cosh, j) => {
                let t = r.tanh();
                let s2 = 1.0 - t * t;
                match j {
                    2 => s2,
                    3 => -2.0 * s2 * t,
                    4 => 4.0 * s2 * t * t - 2.0 * s2 * s2,
                    _ => panic!("derivative order {j} not provided"),
                }
            }
            (WarpKind::Power { sigma }, j) => match j {
                1 => sigma / r,
                2 => -sigma / (r * r),
                3 => 2.0 * sigma / (r * r * r),
                4 => -6.0 * sigma / (r * r * r * r),
                _ => panic!("derivative order {j} not provided"),
            },
        }
    }

    /// Effective potential `(φ'² − 2φ'')/4`, unchecked.
    pub fn w(&self, r: f64) -> f64 {
        let d1 = self.derivative(1, r);
        let d2 = self.derivative(2, r);
        0.25 * (d1 * d1 - 2.0 * d2)
    }

    pub fn eval(&self, r: f64) -> Result<WarpValues> {
        self.check(r)?;
        let dphi = self.derivative(1, r);
        let d2phi = self.derivative(2, r);
        Ok(WarpValues {
            phi: self.phi(r),
            dphi,
            d2phi,
            w: 0.25 * (dphi * dphi - 2.0 * d2phi),
        })
    }

    /// Volume density `e^{-φ(r)}` of the cusp (per unit cross-section length).
    pub fn volume_weight(&self, r: f64) -> f64 {
        (-self.phi(r)).exp()
    }

    /// `∫_{r0}^{R} e^{-φ}` by composite Simpson with step [`AREA_STEP`].
    pub fn area_tail(&self, big_r: f64) -> Result<f64> {
        self.check(big_r)?;
        let len = big_r - self.r0;
        if len == 0.0 {
            return Ok(0.0);
        }
        let mut intervals = (len / AREA_STEP).ceil() as usize;
        intervals += intervals % 2;
        let step = len / intervals as f64;
        let f = |i: usize| self.volume_weight(self.r0 + i as f64 * step);
        let mut acc = f(0) + f(intervals);
        for i in 1..intervals {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
        }
        Ok(acc * step / 3.0)
    }

    /// `Σ_{L=L0}^{Lmax} e^{-φ(L)}`.
    pub fn shell_weight_sum(&self, l0: i64, lmax: i64) -> Result<f64> {
        if (l0 as f64) <= self.r0 {
            return Err(Error::Domain(format!("L0 = {l0} must exceed r0 = {}", self.r0)));
        }
        Ok((l0..=lmax).map(|l| self.volume_weight(l as f64)).sum())
    }

    /// `sup |φ^{(j)}|` over the given points for `1 <= j <= 4`.
    pub fn derivative_bounds(&self, points: &[f64]) -> [f64; 4] {
        let mut out = [0.0f64; 4];
        for &r in points {
            for (j, slot) in out.iter_mut().enumerate() {
                *slot = slot.max(self.derivative(j + 1, r).abs());
            }
        }
        out
    }

    pub fn name(&self) -> String {
        match self.kind {
            WarpKind::Exp => "exp".into(),
            WarpKind::Cosh => "cosh".into(),
            WarpKind::Power { sigma } => format!("power(sigma={sigma})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid(r0: f64) -> Vec<f64> {
        (0..2000).map(|i| r0 + 0.03 * i as f64).collect()
    }

    #[test]
    fn closed_form_examples() {
        let v = WarpProfile::exp(0.0).eval(3.0).unwrap();
        assert_eq!((v.phi, v.dphi, v.d2phi, v.w), (3.0, 1.0, 0.0, 0.25));

        let v = WarpProfile::cosh(0.0).eval(0.0).unwrap();
        assert_eq!((v.phi, v.dphi, v.d2phi), (0.0, 0.0, 1.0));
        assert_relative_eq!(v.w, -0.5);

        let v = WarpProfile::power(2.0, 1.0).unwrap().eval(1.0).unwrap();
        assert_eq!((v.phi, v.dphi, v.d2phi, v.w), (0.0, 2.0, -2.0, 2.0));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(WarpProfile::exp(1.0).eval(0.5), Err(Error::Domain(_))));
        assert!(WarpProfile::power(2.0, 0.2).is_err());
        assert!(WarpProfile::power(1.0, 1.0).is_err());
        assert!(WarpProfile::exp(2.0).shell_weight_sum(2, 10).is_err());
    }

    #[test]
    fn log_cosh_is_stable() {
        assert_relative_eq!(log_cosh(1.3), 1.3f64.cosh().ln(), max_relative = 1e-14);
        assert_relative_eq!(log_cosh(800.0), 800.0 - std::f64::consts::LN_2);
    }

    #[test]
    fn areas() {
        assert_eq!(WarpProfile::exp(0.0).area_tail(0.0).unwrap(), 0.0);
        let a = WarpProfile::exp(0.0).area_tail(60.0).unwrap();
        assert!((a - 1.0).abs() < 1e-12, "{a}");
        let p = WarpProfile::power(2.0, 1.0).unwrap();
        // ∫_1^R r^{-2} = 1 − 1/R
        let a = p.area_tail(61.0).unwrap();
        assert!((a - (1.0 - 1.0 / 61.0)).abs() < 1e-12, "{a}");
    }

    #[test]
    fn area_converges_for_all_kinds() {
        for prof in [
            WarpProfile::exp(0.0),
            WarpProfile::cosh(0.0),
            WarpProfile::power(2.0, 1.0).unwrap(),
        ] {
            let r = prof.r0 + 60.0;
            let a = prof.area_tail(r).unwrap();
            let b = prof.area_tail(r + 20.0).unwrap();
            let rel = (b - a) / a;
            // the power cusp tail decays like 1/R; its increment is still small but not 1e-8
            let tol = if matches!(prof.kind, WarpKind::Power { .. }) { 1e-2 } else { 1e-8 };
            assert!(rel >= 0.0 && rel < tol, "{}: {rel}", prof.name());
        }
    }

    #[test]
    fn area_is_monotone() {
        let p = WarpProfile::cosh(-1.0);
        let mut prev = 0.0;
        for k in 0..20 {
            let a = p.area_tail(-1.0 + 0.7 * k as f64).unwrap();
            assert!(a >= prev);
            prev = a;
        }
    }

    #[test]
    fn shell_sums() {
        let e = WarpProfile::exp(0.0);
        let geo = (-1f64).exp() / (1.0 - (-1f64).exp());
        assert!((e.shell_weight_sum(1, 200).unwrap() - geo).abs() < 1e-14);
        assert!((e.shell_weight_sum(1, 1).unwrap() - (-1f64).exp()).abs() < 1e-15);

        // brute-force oracle: 1/cosh summed directly
        let oracle: f64 = (1..=40).map(|l| 1.0 / (l as f64).cosh()).sum();
        let got = WarpProfile::cosh(0.0).shell_weight_sum(1, 40).unwrap();
        assert!((got - oracle).abs() < 1e-14);
        assert!((got - 1.071_121_329_967_822_6).abs() < 1e-13, "{got}");

        for (prof, tol) in [
            (WarpProfile::exp(0.0), 1e-10),
            (WarpProfile::cosh(0.0), 1e-10),
            (WarpProfile::power(2.0, 1.0).unwrap(), 1e-3),
        ] {
            let inc = prof.shell_weight_sum(80, 80).unwrap();
            assert!(inc < tol, "{}: {inc}", prof.name());
        }
    }

    #[test]
    fn exp_phi_diverges() {
        for prof in [
            WarpProfile::exp(0.0),
            WarpProfile::cosh(0.0),
            WarpProfile::power(2.0, 1.0).unwrap(),
        ] {
            let v: Vec<f64> = [10.0, 20.0, 40.0].iter().map(|&l| prof.phi(l).exp()).collect();
            assert!(v[0] < v[1] && v[1] < v[2]);
        }
        assert!(WarpProfile::exp(0.0).phi(10.0).exp() > 1e3);
    }

    #[test]
    fn bounded_derivatives_and_potential() {
        for prof in [
            WarpProfile::exp(0.0),
            WarpProfile::cosh(-3.0),
            WarpProfile::power(2.0, 0.5).unwrap(),
            WarpProfile::power(3.5, 1.0).unwrap(),
        ] {
            let pts = grid(prof.r0);
            let b = prof.derivative_bounds(&pts);
            assert!(b.iter().all(|x| x.is_finite()));
            let cap = 0.25 * (b[0] * b[0] + 2.0 * b[1]);
            for &r in &pts {
                assert!(prof.w(r).abs() <= cap + 1e-12);
            }
        }
    }

    #[test]
    fn finite_differences_match_closed_form() {
        let step = 1e-5;
        for prof in [
            WarpProfile::exp(0.0),
            WarpProfile::cosh(0.0),
            WarpProfile::power(2.0, 1.0).unwrap(),
        ] {
            for &r in &[1.2, 2.5, 4.0, 7.5] {
                for j in 1..=2 {
                    let fd = (prof.derivative(j - 1, r + step) - prof.derivative(j - 1, r - step))
                        / (2.0 * step);
                    let exact = prof.derivative(j, r);
                    let scale = exact.abs().max(1e-3);
                    assert!(
                        (fd - exact).abs() / scale < 1e-6,
                        "{} j={j} r={r}: {fd} vs {exact}",
                        prof.name()
                    );
                }
            }
        }
    }
}
