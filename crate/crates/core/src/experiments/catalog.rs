//! Dispatch by experiment name and the pinned acceptance suite.

use serde::de::DeserializeOwned;
use serde_json::Value;

use super::*;
use crate::error::{Error, Result};

fn unknown(name: &str) -> Error {
    let valid: Vec<&str> = CATALOG.iter().map(|(n, _)| *n).chain(["suite"]).collect();
    Error::UnknownExperiment { name: name.into(), valid: valid.join(", ") }
}

/// Default parameters of a catalog experiment as a JSON object.
pub fn default_params(name: &str) -> Result<Value> {
    let v = match name {
        "schrodinger_failure_exact" => serde_json::to_value(ExactFailureParams::default())?,
        "sobolev_failure" => serde_json::to_value(SobolevFailureParams::default())?,
        "wave_failure" => serde_json::to_value(WaveFailureParams::default())?,
        "sharpness" => serde_json::to_value(SharpnessParams::default())?,
        "schrodinger_semiclassical" => serde_json::to_value(StrichartzParams::schrodinger_default())?,
        "wave_strichartz" => serde_json::to_value(StrichartzParams::wave_default())?,
        "dispersion" => serde_json::to_value(DispersionParams::schrodinger_default())?,
        "phase_convexity" => serde_json::to_value(PhaseConvexityParams::default())?,
        "symbol_accuracy" => serde_json::to_value(SymbolAccuracyParams::default())?,
        "finite_speed" => serde_json::to_value(FiniteSpeedParams::default())?,
        "littlewood_paley" => serde_json::to_value(LittlewoodPaleyParams::default())?,
        "elliptic_weights" => serde_json::to_value(EllipticWeightsParams::default())?,
        "invariants" => serde_json::to_value(InvariantsParams::default())?,
        other => return Err(unknown(other)),
    };
    Ok(v)
}

fn typed<T: DeserializeOwned>(params: &Value) -> Result<T> {
    Ok(serde_json::from_value(params.clone())?)
}

/// Fails if `params` does not deserialize into the experiment's parameter type.
pub fn typecheck_params(name: &str, params: &Value) -> Result<()> {
    match name {
        "schrodinger_failure_exact" => typed::<ExactFailureParams>(params).map(drop),
        "sobolev_failure" => typed::<SobolevFailureParams>(params).map(drop),
        "wave_failure" => typed::<WaveFailureParams>(params).map(drop),
        "sharpness" => typed::<SharpnessParams>(params).map(drop),
        "schrodinger_semiclassical" | "wave_strichartz" => typed::<StrichartzParams>(params).map(drop),
        "dispersion" => typed::<DispersionParams>(params).map(drop),
        "phase_convexity" => typed::<PhaseConvexityParams>(params).map(drop),
        "symbol_accuracy" => typed::<SymbolAccuracyParams>(params).map(drop),
        "finite_speed" => typed::<FiniteSpeedParams>(params).map(drop),
        "littlewood_paley" => typed::<LittlewoodPaleyParams>(params).map(drop),
        "elliptic_weights" => typed::<EllipticWeightsParams>(params).map(drop),
        "invariants" => typed::<InvariantsParams>(params).map(drop),
        other => Err(unknown(other)),
    }
}

/// Runs a catalog experiment with fully specified parameters.
pub fn run_experiment(name: &str, params: &Value, jobs: usize) -> Result<ExperimentReport> {
    match name {
        "schrodinger_failure_exact" => schrodinger_failure_exact(&typed(params)?, jobs),
        "sobolev_failure" => sobolev_failure(&typed(params)?, jobs),
        "wave_failure" => wave_failure(&typed(params)?, jobs),
        "sharpness" => sharpness(&typed(params)?, jobs),
        "schrodinger_semiclassical" => schrodinger_semiclassical(&typed(params)?, jobs),
        "wave_strichartz" => wave_strichartz(&typed(params)?, jobs),
        "dispersion" => dispersion(&typed(params)?, jobs),
        "phase_convexity" => phase_convexity(&typed(params)?, jobs),
        "symbol_accuracy" => symbol_accuracy(&typed(params)?, jobs),
        "finite_speed" => finite_speed(&typed(params)?, jobs),
        "littlewood_paley" => littlewood_paley(&typed(params)?, jobs),
        "elliptic_weights" => elliptic_weights(&typed(params)?, jobs),
        "invariants" => invariants(&typed(params)?, jobs),
        other => Err(unknown(other)),
    }
}

/// One run of the acceptance suite: defaults of `experiment` with `overrides` (a JSON object)
/// merged in; reports are renamed to `label`.
#[derive(Debug, Clone, Copy)]
pub struct SuiteEntry {
    pub criterion: u32,
    pub label: &'static str,
    pub experiment: &'static str,
    pub overrides: &'static str,
}

pub const SUITE: &[SuiteEntry] = &[
    SuiteEntry { criterion: 1, label: "schrodinger_failure_exact", experiment: "schrodinger_failure_exact", overrides: "{}" },
    SuiteEntry { criterion: 2, label: "sobolev_failure_exp", experiment: "sobolev_failure", overrides: "{}" },
    SuiteEntry {
        criterion: 2,
        label: "sobolev_failure_cosh",
        experiment: "sobolev_failure",
        overrides: r#"{"profile": {"kind": {"kind": "cosh"}, "r0": 0.0}}"#,
    },
    SuiteEntry { criterion: 3, label: "wave_failure_exp", experiment: "wave_failure", overrides: "{}" },
    SuiteEntry {
        criterion: 3,
        label: "wave_failure_cosh",
        experiment: "wave_failure",
        overrides: r#"{"profile": {"kind": {"kind": "cosh"}, "r0": 0.0}}"#,
    },
    SuiteEntry { criterion: 4, label: "sharpness_p4_q4", experiment: "sharpness", overrides: "{}" },
    SuiteEntry { criterion: 4, label: "sharpness_p6_q3", experiment: "sharpness", overrides: r#"{"p": 6.0, "q": 3.0}"# },
    SuiteEntry { criterion: 5, label: "schrodinger_semiclassical", experiment: "schrodinger_semiclassical", overrides: "{}" },
    SuiteEntry { criterion: 6, label: "wave_strichartz", experiment: "wave_strichartz", overrides: "{}" },
    SuiteEntry { criterion: 7, label: "dispersion_schrodinger", experiment: "dispersion", overrides: "{}" },
    SuiteEntry {
        criterion: 7,
        label: "dispersion_half_wave",
        experiment: "dispersion",
        overrides: r#"{"nu": "HalfWave", "t_list": [0.03125, 0.0625, 0.125, 0.25, 0.5], "mu_list": [1.0, 2.0, 4.0]}"#,
    },
    SuiteEntry { criterion: 8, label: "phase_convexity", experiment: "phase_convexity", overrides: "{}" },
    SuiteEntry { criterion: 9, label: "symbol_accuracy", experiment: "symbol_accuracy", overrides: "{}" },
    SuiteEntry { criterion: 10, label: "finite_speed", experiment: "finite_speed", overrides: "{}" },
    SuiteEntry { criterion: 11, label: "littlewood_paley", experiment: "littlewood_paley", overrides: "{}" },
    SuiteEntry { criterion: 12, label: "elliptic_weights", experiment: "elliptic_weights", overrides: "{}" },
    SuiteEntry { criterion: 13, label: "invariants", experiment: "invariants", overrides: "{}" },
];

impl SuiteEntry {
    /// Resolved parameters with `seed` replaced where the experiment has one.
    pub fn params(&self, seed: Option<u64>) -> Result<Value> {
        let mut p = default_params(self.experiment)?;
        let over: Value = serde_json::from_str(self.overrides)?;
        for (k, v) in over.as_object().expect("overrides are objects") {
            p[k] = v.clone();
        }
        if let (Some(s), Some(obj)) = (seed, p.as_object_mut()) {
            if obj.contains_key("seed") {
                obj.insert("seed".into(), Value::from(s));
            }
        }
        Ok(p)
    }

    pub fn run(&self, seed: Option<u64>, jobs: usize) -> Result<ExperimentReport> {
        let mut report = run_experiment(self.experiment, &self.params(seed)?, jobs)?;
        report.name = self.label.into();
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_catalog_entry_has_defaults_that_typecheck() {
        for (name, _) in CATALOG {
            let p = default_params(name).unwrap();
            typecheck_params(name, &p).unwrap();
        }
        assert!(matches!(default_params("nope"), Err(Error::UnknownExperiment { .. })));
    }

    #[test]
    fn suite_entries_resolve() {
        let mut criteria: Vec<u32> = SUITE.iter().map(|e| e.criterion).collect();
        criteria.dedup();
        assert_eq!(criteria, (1..=13).collect::<Vec<_>>());
        for e in SUITE {
            let p = e.params(Some(5)).unwrap();
            typecheck_params(e.experiment, &p).unwrap();
        }
        let hw: DispersionParams = serde_json::from_value(SUITE[10].params(None).unwrap()).unwrap();
        assert_eq!(hw, DispersionParams::half_wave_default());
    }
}
