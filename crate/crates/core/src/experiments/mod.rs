//! Named experiments: each builds data, measures norms or kernels, fits power laws and
//! returns an [`ExperimentReport`] with a verdict.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};

mod catalog;
mod dispersion;
mod failure;
mod finite_speed;
mod invariants;
mod littlewood_paley;
mod phase;
mod sharpness;
mod strichartz;
mod weights;

pub use catalog::{default_params, run_experiment, typecheck_params, SuiteEntry, SUITE};
pub use dispersion::{dispersion, shell_kernel_sup, shell_start, DispersionParams, DispersionPropagator};
pub use failure::{
    schrodinger_failure_exact, sobolev_failure, wave_failure, ExactFailureParams, SobolevFailureParams,
    WaveFailureParams,
};
pub use finite_speed::{finite_speed, outside_mass, FiniteSpeedParams};
pub use invariants::{invariants, InvariantsParams};
pub use littlewood_paley::{littlewood_paley, partition_residual, LittlewoodPaleyParams};
pub use phase::{phase_convexity, symbol_accuracy, symbol_error, PhaseConvexityParams, SymbolAccuracyParams};
pub use sharpness::{coherent_mixed_norm, sharpness, SharpnessParams};
pub use strichartz::{schrodinger_semiclassical, wave_strichartz, StrichartzParams};
pub use weights::{elliptic_weights, EllipticCase, EllipticWeightsParams};

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<ScalingFit> {
    precondition(points.len() >= 4, || format!("{} points; at least 4 required", points.len()))?;
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Domain(format!("power-law fit needs positive finite data, got {p:?}")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    precondition(sxx > 0.0, || "x values must be distinct".into())?;
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(ScalingFit { label: String::new(), slope, intercept: my - slope * mx, r_squared, points: logs })
}

/// Fit of `log y` against a coordinate that is already logarithmic (e.g. `φ(n)`).
pub(crate) fn fit_exponential(label: &str, points: &[(f64, f64)]) -> Result<ScalingFit> {
    let lifted: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.exp(), *y)).collect();
    let mut f = fit_power_law(&lifted)?;
    f.label = label.into();
    Ok(f)
}

pub(crate) fn fit_labeled(label: &str, points: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut f = fit_power_law(points)?;
    f.label = label.into();
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Process exit code for a batch of verdicts: 0 if all pass, 2 if any fails,
    /// otherwise 3 if any is inconclusive.
    pub fn exit_code(verdicts: &[Verdict]) -> i32 {
        if verdicts.contains(&Verdict::Fail) {
            2
        } else if verdicts.contains(&Verdict::Inconclusive) {
            3
        } else {
            0
        }
    }
}

/// One tolerance: `lower <= observed <= upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, observed: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = observed.is_finite() && lower.is_none_or(|l| observed >= l) && upper.is_none_or(|u| observed <= u);
        Self { name: name.into(), observed, lower, upper, passed }
    }

    pub fn at_most(name: &str, observed: f64, upper: f64) -> Self {
        Self::new(name, observed, None, Some(upper))
    }

    pub fn at_least(name: &str, observed: f64, lower: f64) -> Self {
        Self::new(name, observed, Some(lower), None)
    }

    pub fn within(name: &str, observed: f64, target: f64, rel: f64) -> Self {
        let (a, b) = (target * (1.0 - rel), target * (1.0 + rel));
        Self::new(name, observed, Some(a.min(b)), Some(a.max(b)))
    }

    pub fn holds(name: &str, cond: bool) -> Self {
        Self { name: name.into(), observed: if cond { 1.0 } else { 0.0 }, lower: Some(1.0), upper: None, passed: cond }
    }
}

/// A measurement table with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

/// Integers print plainly; everything else in shortest round-trip exponent form.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub parameters: serde_json::Value,
    pub measurements: Vec<Table>,
    pub fits: Vec<ScalingFit>,
    pub verdict: Verdict,
    pub tolerances: Vec<Check>,
    pub notes: Vec<String>,
}

/// Minimum `r²` of a fit whose slope is part of the verdict.
pub const MIN_R_SQUARED: f64 = 0.9;

impl ExperimentReport {
    /// Assembles a report; the verdict is `Inconclusive` if a fit listed in `required` has
    /// `r² < 0.9`, `Pass` if every check holds and `Fail` otherwise.
    pub fn new(
        name: &str,
        parameters: &impl Serialize,
        measurements: Vec<Table>,
        fits: Vec<ScalingFit>,
        required: &[&str],
        tolerances: Vec<Check>,
        notes: Vec<String>,
    ) -> Result<Self> {
        let weak = fits.iter().any(|f| required.contains(&f.label.as_str()) && f.r_squared < MIN_R_SQUARED);
        let verdict = if weak {
            Verdict::Inconclusive
        } else if tolerances.iter().all(|c| c.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Ok(Self {
            name: name.into(),
            parameters: serde_json::to_value(parameters)?,
            measurements,
            fits,
            verdict,
            tolerances,
            notes,
        })
    }

    pub fn fit(&self, label: &str) -> Option<&ScalingFit> {
        self.fits.iter().find(|f| f.label == label)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.tolerances.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Writes `<name>.json`, `<name>.csv` (first table) and `<name>_<table>.csv` for the rest.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = vec![];
        let json = dir.join(format!("{}.json", self.name));
        std::fs::File::create(&json)?.write_all(self.to_json()?.as_bytes())?;
        out.push(json);
        for (i, t) in self.measurements.iter().enumerate() {
            let file = if i == 0 { format!("{}.csv", self.name) } else { format!("{}_{}.csv", self.name, t.name) };
            let path = dir.join(file);
            std::fs::File::create(&path)?.write_all(t.to_csv().as_bytes())?;
            out.push(path);
        }
        Ok(out)
    }

    /// One line: name, verdict and the checks.
    pub fn summary(&self) -> String {
        let checks: Vec<String> = self
            .tolerances
            .iter()
            .map(|c| {
                let bound = match (c.lower, c.upper) {
                    (Some(l), Some(u)) => format!("in [{l:.4}, {u:.4}]"),
                    (Some(l), None) => format!(">= {l:.4e}"),
                    (None, Some(u)) => format!("<= {u:.4e}"),
                    (None, None) => String::new(),
                };
                format!("{}={:.4e} {}{}", c.name, c.observed, bound, if c.passed { "" } else { " FAILED" })
            })
            .collect();
        format!("{} {:?}: {}", self.name, self.verdict, checks.join("; "))
    }
}

/// Maps `f` over `items` on at most `jobs` threads, preserving order.
pub fn par_map<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    if jobs > 1 && items.len() > 1 {
        use rayon::prelude::*;
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
    }
    let _ = jobs;
    items.iter().map(f).collect()
}

/// `2^{-e}` for each exponent.
pub fn dyadic(exponents: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    exponents.map(|e| 2f64.powi(-e)).collect()
}

/// Seed for the `index`-th task of a run, independent of scheduling.
pub(crate) fn task_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03)) ^ 0x5851_F42D
}

/// Names and one-line descriptions of every experiment.
pub const CATALOG: &[(&str, &str)] = &[
    ("schrodinger_failure_exact", "closed-form Schrodinger evolution of zero-mode data on the exponential cusp: growth of mixed norms"),
    ("sobolev_failure", "L^q / H^sigma quotient of translated zero-mode bumps grows like e^{(1/2-1/q)phi(n)}"),
    ("wave_failure", "same growth for short-time wave mixed norms of zero-mode data"),
    ("sharpness", "coherent-state Schrodinger mixed norms scale like h^{-3/(2p)}"),
    ("schrodinger_semiclassical", "semiclassical Schrodinger-Strichartz quotient stays bounded in h"),
    ("wave_strichartz", "wave-Strichartz quotient with h^{-sigma_w} loss stays bounded in h"),
    ("dispersion", "sup of the spectrally localized propagator kernel decays like tau^{-1/2}"),
    ("phase_convexity", "second rho-derivative of the generating phase is bounded below by |t|"),
    ("symbol_accuracy", "operator-norm error of the quantized principal symbol is O(h)"),
    ("finite_speed", "mass leaving a radial shell is negligible and uniform in the shell index"),
    ("littlewood_paley", "dyadic spectral partition of unity and the square-function inequality"),
    ("elliptic_weights", "weighted resolvent and rough Sobolev bounds are stable in rmax and mode index"),
    ("invariants", "unitarity, Parseval, group law, wave energy, round-trips and reproducible CSV output"),
];
