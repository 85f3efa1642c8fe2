//! Fixed C^∞ cutoffs built from `exp(−1/x)`.

fn f(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for x ≤ 0, 1 for x ≥ 1.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = f(x);
        a / (a + f(1.0 - x))
    }
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_derivative(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let (a, b) = (f(x), f(1.0 - x));
    let (da, db) = (a / (x * x), b / ((1.0 - x) * (1.0 - x)));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// Coherent-state cutoff: 1 on [−1, 1], 0 outside (−2, 2).
pub fn chi(x: f64) -> f64 {
    smooth_step(2.0 - x.abs())
}

/// Spectral cutoff: 1 on [1/2, 2], supported in (1/4, 4).
pub fn phi_spec(lambda: f64) -> f64 {
    smooth_step((lambda - 0.25) / 0.25) * smooth_step((4.0 - lambda) / 2.0)
}

pub const PHI_SPEC_SUPPORT: (f64, f64) = (0.25, 4.0);

/// Compactly supported bump `exp(−1/(1−x²))` on (−1, 1), unnormalized.
pub fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

/// Window for properly supported quantization: 1 on [−w/2, w/2], 0 outside (−w, w).
pub fn kappa(x: f64, width: f64) -> f64 {
    smooth_step((width - x.abs()) / (0.5 * width))
}

/// Low-frequency piece of the dyadic partition: 1 on [0, 1], 0 beyond 2.
pub fn lp_low(lambda: f64) -> f64 {
    smooth_step(2.0 - lambda)
}

/// Dyadic piece supported in [1, 4]; `lp_low(λ) + Σ_{l≥0} lp_band(2^{−l}λ)` telescopes to 1.
pub fn lp_band(lambda: f64) -> f64 {
    lp_low(lambda / 2.0) - lp_low(lambda)
}
