//! WebAssembly entry points for the static demo page. Each returns a JSON string; the
//! plain functions are also usable (and tested) natively.

use cuspwave::bumps::bump;
use cuspwave::geometry::WarpProfile;
use cuspwave::propagate::{exact_flat_cusp, EvolutionKind};
use cuspwave::radial::{discretize, EigenSystem, RadialGrid};
use num_complex::Complex64;
use serde_json::json;
use wasm_bindgen::prelude::*;

const COVER_TOL: f64 = 1e-12;
const MAX_NODES: usize = 4000;

fn profile(kind: &str, sigma: f64) -> Result<WarpProfile, String> {
    match kind {
        "exp" => Ok(WarpProfile::exp(0.0)),
        "cosh" => Ok(WarpProfile::cosh(0.0)),
        "power" => WarpProfile::power(sigma, 1.0).map_err(|e| e.to_string()),
        _ => Err(format!("unknown profile {kind:?}; expected exp, cosh or power")),
    }
}

fn grid(p: &WarpProfile, rmax: f64, n: usize) -> Result<RadialGrid, String> {
    if !(16..=MAX_NODES).contains(&n) {
        return Err(format!("{n} nodes; use 16..={MAX_NODES}"));
    }
    RadialGrid::new(p.r0, rmax, n).map_err(|e| e.to_string())
}

/// Lowest `count` eigenvalues and eigenfunctions of the radial operator for frequency `mu`,
/// with the effective potential `μ²e^{2φ} + w` for plotting.
pub fn spectrum(kind: &str, sigma: f64, mu: f64, rmax: f64, n: usize, count: usize) -> Result<String, String> {
    let p = profile(kind, sigma)?;
    let g = grid(&p, rmax, n)?;
    let op = discretize(&p, mu, g).map_err(|e| e.to_string())?;
    let es = EigenSystem::range(&op, 0..count.min(n)).map_err(|e| e.to_string())?;
    let nodes = g.nodes();
    let potential: Vec<f64> = nodes.iter().map(|&r| mu * mu * (2.0 * p.phi(r)).exp() + p.w(r)).collect();
    Ok(json!({ "nodes": nodes, "potential": potential, "values": es.values, "vectors": es.vectors }).to_string())
}

/// Evolves `bump((r − center)/width)·e^{ikr}` to time `t` and returns `|u|²` before and after
/// together with the norm drift.
#[allow(clippy::too_many_arguments)]
pub fn propagate_packet(
    kind: &str,
    sigma: f64,
    mu: f64,
    center: f64,
    width: f64,
    momentum: f64,
    t: f64,
    evolution: &str,
    rmax: f64,
    n: usize,
) -> Result<String, String> {
    let p = profile(kind, sigma)?;
    let g = grid(&p, rmax, n)?;
    let ev = match evolution {
        "schrodinger" => EvolutionKind::Schrodinger,
        "half_wave" => EvolutionKind::HalfWave,
        _ => return Err(format!("unknown evolution {evolution:?}; expected schrodinger or half_wave")),
    };
    if width.is_nan() || width <= 0.0 {
        return Err(format!("width must be positive, got {width}"));
    }
    let op = discretize(&p, mu, g).map_err(|e| e.to_string())?;
    let nodes = g.nodes();
    let u0: Vec<Complex64> =
        nodes.iter().map(|&r| Complex64::from_polar(bump((r - center) / width), momentum * r)).collect();
    let es = EigenSystem::covering(&op, &[&u0], COVER_TOL).map_err(|e| e.to_string())?;
    let ut = es.apply_complex(|l| ev.multiplier(t, l), &u0).map_err(|e| e.to_string())?;
    let density = |u: &[Complex64]| u.iter().map(|z| z.norm_sqr()).collect::<Vec<f64>>();
    let mass = |u: &[Complex64]| g.dr() * u.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let (m0, mt) = (mass(&u0), mass(&ut));
    if m0 == 0.0 {
        return Err("the packet vanishes on the grid".into());
    }
    Ok(json!({
        "nodes": nodes,
        "initial": density(&u0),
        "evolved": density(&ut),
        "modes_used": es.len(),
        "norm_drift": (mt / m0).sqrt() - 1.0,
    })
    .to_string())
}

/// Discrete Schrodinger evolution on the exponential cusp's zero mode against the closed
/// form for the odd Gaussian pair centred at `±center`.
pub fn oracle_comparison(center: f64, t: f64, rmax: f64, n: usize) -> Result<String, String> {
    let p = WarpProfile::exp(0.0);
    let g = grid(&p, rmax, n)?;
    let op = discretize(&p, 0.0, g).map_err(|e| e.to_string())?;
    let nodes = g.nodes();
    let u0 = exact_flat_cusp(center, 0.0, &nodes);
    let es = EigenSystem::covering(&op, &[&u0], COVER_TOL).map_err(|e| e.to_string())?;
    let numeric = es.apply_complex(|l| Complex64::from_polar(1.0, t * l), &u0).map_err(|e| e.to_string())?;
    let exact = exact_flat_cusp(center, t, &nodes);
    let error = numeric.iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let abs = |u: &[Complex64]| u.iter().map(|z| z.norm()).collect::<Vec<f64>>();
    Ok(json!({ "nodes": nodes, "numeric": abs(&numeric), "exact": abs(&exact), "sup_error": error }).to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = spectrum)]
pub fn spectrum_js(kind: &str, sigma: f64, mu: f64, rmax: f64, n: usize, count: usize) -> Result<String, JsError> {
    to_js(spectrum(kind, sigma, mu, rmax, n, count))
}

#[wasm_bindgen(js_name = propagatePacket)]
#[allow(clippy::too_many_arguments)]
pub fn propagate_packet_js(
    kind: &str,
    sigma: f64,
    mu: f64,
    center: f64,
    width: f64,
    momentum: f64,
    t: f64,
    evolution: &str,
    rmax: f64,
    n: usize,
) -> Result<String, JsError> {
    to_js(propagate_packet(kind, sigma, mu, center, width, momentum, t, evolution, rmax, n))
}

#[wasm_bindgen(js_name = oracleComparison)]
pub fn oracle_comparison_js(center: f64, t: f64, rmax: f64, n: usize) -> Result<String, JsError> {
    to_js(oracle_comparison(center, t, rmax, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: Result<String, String>) -> Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn spectrum_is_sorted_and_positive() {
        let v = parse(spectrum("exp", 0.0, 1.0, 8.0, 200, 5));
        let vals: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
        assert_eq!(vals.len(), 5);
        assert!(vals[0] > 0.0 && vals.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(v["vectors"][0].as_array().unwrap().len(), 200);
    }

    #[test]
    fn packet_norm_is_preserved() {
        for ev in ["schrodinger", "half_wave"] {
            let v = parse(propagate_packet("cosh", 0.0, 1.0, 5.0, 1.0, 3.0, 0.5, ev, 12.0, 600));
            assert!(v["norm_drift"].as_f64().unwrap().abs() < 1e-9, "{ev}: {v}");
        }
    }

    #[test]
    fn oracle_agrees() {
        let v = parse(oracle_comparison(8.0, 0.5, 30.0, 1500));
        assert!(v["sup_error"].as_f64().unwrap() < 1e-3, "{}", v["sup_error"]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(spectrum("sphere", 0.0, 1.0, 8.0, 200, 5).unwrap_err().contains("unknown profile"));
        assert!(spectrum("power", 0.5, 1.0, 8.0, 200, 5).is_err());
        assert!(propagate_packet("exp", 0.0, 1.0, 5.0, 1.0, 0.0, 0.1, "heat", 10.0, 100).is_err());
        assert!(oracle_comparison(8.0, 0.5, 30.0, 5).is_err());
    }
}
