//! Browser bindings. Each export takes plain numbers or a JSON string and
//! returns JSON; the `*_json` functions hold the logic and run natively too.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qpt_core::experiment::QptMethod;
use qpt_core::io::{evaluate, simulate_experiment, RunConfig};
use qpt_core::metrics::{infidelity_log, w1_distance, XiWindow};
use qpt_core::noise::NoiseSpec;
use qpt_core::tomography::std_qpt;

/// Largest demo run; keeps the page responsive.
pub const MAX_GATES: usize = 50;

#[derive(Debug, Serialize)]
struct ErrorMatrix {
    lambda_tot: f64,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
    /// Weight on the identity element, `χ̃_00`.
    identity_weight: f64,
}

#[derive(Debug, Serialize)]
struct Comparison {
    lambda_tot: f64,
    labels: Vec<String>,
    std: Vec<f64>,
    em: Vec<f64>,
    mean_std: f64,
    mean_em: f64,
}

#[derive(Debug, Serialize)]
struct Cdf {
    /// Sorted log-infidelities `q`.
    q: Vec<f64>,
    w1: f64,
    w1_normalized: f64,
}

fn demo_config(lambda_tot: f64, n_gates: usize, shots: u64, seed: u64) -> Result<RunConfig, String> {
    if !(1..=MAX_GATES).contains(&n_gates) {
        return Err(format!("n_gates must be in 1..={MAX_GATES}"));
    }
    let cfg = RunConfig {
        n_gates,
        n_error_matrices: n_gates,
        shots,
        seed,
        noise: NoiseSpec::even(lambda_tot),
        ..RunConfig::default()
    };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// One simulated single-qubit identity run, reconstructed with ideal probes.
pub fn error_matrix_json(lambda_tot: f64, shots: u64, seed: u64) -> Result<String, String> {
    let cfg = demo_config(lambda_tot, 1, shots, seed)?;
    let exp = simulate_experiment(&cfg).map_err(|e| e.to_string())?;
    let chi = std_qpt(&exp.identity[0], &cfg.reconstruction).map_err(|e| e.to_string())?;
    let m = chi.chi();
    let grid = |f: &dyn Fn(usize, usize) -> f64| (0..m.nrows()).map(|a| (0..m.ncols()).map(|b| f(a, b)).collect()).collect();
    let out = ErrorMatrix {
        lambda_tot,
        re: grid(&|a, b| m[(a, b)].re),
        im: grid(&|a, b| m[(a, b)].im),
        identity_weight: m[(0, 0)].re,
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

/// Per-gate infidelities of std- and EM-QPT on random single-qubit gates.
pub fn compare_json(lambda_tot: f64, n_gates: usize, shots: u64, seed: u64) -> Result<String, String> {
    let cfg = demo_config(lambda_tot, n_gates, shots, seed)?;
    let exp = simulate_experiment(&cfg).map_err(|e| e.to_string())?;
    let ev = evaluate(&cfg, &exp, &[QptMethod::Std, QptMethod::Em], None).map_err(|e| e.to_string())?;
    let b = &ev.bundle;
    let labels = b.rows.iter().filter(|r| r.method == "std").map(|r| r.gate_label.clone()).collect();
    let out = Comparison {
        lambda_tot,
        labels,
        std: b.infidelities("std"),
        em: b.infidelities("em"),
        mean_std: b.summary("std").map_or(f64::NAN, |s| s.infidelity.mean),
        mean_em: b.summary("em").map_or(f64::NAN, |s| s.infidelity.mean),
    };
    Ok(serde_json::to_string(&out).expect("serializes"))
}

/// Log-infidelity CDF and W1 distance to the reference delta, from a JSON
/// array of fidelities.
pub fn cdf_json(fidelities: &str, xi_min: f64, xi_max: f64, xi_0: f64) -> Result<String, String> {
    let f: Vec<f64> = serde_json::from_str(fidelities).map_err(|e| format!("fidelities: {e}"))?;
    let window = XiWindow { xi_min, xi_max, xi_0 };
    window.validate().map_err(|e| e.to_string())?;
    let mut q: Vec<f64> = f.iter().map(|&x| infidelity_log(x, xi_min, xi_max)).collect();
    let w1 = w1_distance(&q, &window).map_err(|e| e.to_string())?;
    q.sort_by(f64::total_cmp);
    Ok(serde_json::to_string(&Cdf { q, w1, w1_normalized: w1 / window.width() }).expect("serializes"))
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn error_matrix(lambda_tot: f64, shots: u32, seed: u32) -> Result<String, JsValue> {
    js(error_matrix_json(lambda_tot, shots.into(), seed.into()))
}

#[wasm_bindgen]
pub fn compare(lambda_tot: f64, n_gates: u32, shots: u32, seed: u32) -> Result<String, JsValue> {
    js(compare_json(lambda_tot, n_gates as usize, shots.into(), seed.into()))
}

#[wasm_bindgen]
pub fn cdf(fidelities: &str, xi_min: f64, xi_max: f64, xi_0: f64) -> Result<String, JsValue> {
    js(cdf_json(fidelities, xi_min, xi_max, xi_0))
}
