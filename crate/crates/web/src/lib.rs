//! Browser bindings: |F(k)|, spectral density and kernel slices.

use jostkit::propagator::kernel_full_grid;
use jostkit::scattering::{normalized_jost, spectral_density};
use jostkit::{Complex64, Potential, ProblemSpec};
use wasm_bindgen::prelude::*;

fn problem(potential: &str, l: f64) -> Result<ProblemSpec, String> {
    let q: Potential = potential.parse().map_err(|e: jostkit::Error| e.to_string())?;
    let p = ProblemSpec::new(l, q).map_err(|e| e.to_string())?;
    p.check_hypothesis().map_err(|e| e.to_string())?;
    Ok(p)
}

pub fn abs_f_curve(potential: &str, l: f64, ks: &[f64]) -> Result<Vec<f64>, String> {
    let p = problem(potential, l)?;
    ks.iter()
        .map(|&k| normalized_jost(&p, Complex64::new(k, 0.0)).map(|f| f.norm()).map_err(|e| e.to_string()))
        .collect()
}

/// Density and free density lambda^{l+1/2}/pi, interleaved.
pub fn density_curve(potential: &str, l: f64, lambdas: &[f64]) -> Result<Vec<f64>, String> {
    let p = problem(potential, l)?;
    let mut out = Vec::with_capacity(2 * lambdas.len());
    for &lam in lambdas {
        out.push(spectral_density(&p, lam).map_err(|e| e.to_string())?);
        out.push(if lam > 0.0 { lam.powf(l + 0.5) / std::f64::consts::PI } else { 0.0 });
    }
    Ok(out)
}

/// Re K, Im K at (x, y) for each y, interleaved.
pub fn kernel_row(potential: &str, l: f64, t: f64, x: f64, ys: &[f64]) -> Result<Vec<f64>, String> {
    let p = problem(potential, l)?;
    let g = kernel_full_grid(&p, t, &[x], ys).map_err(|e| e.to_string())?;
    Ok(g.values.iter().flat_map(|v| [v.re, v.im]).collect())
}

#[wasm_bindgen]
pub fn abs_f(potential: &str, l: f64, ks: &[f64]) -> Result<Vec<f64>, JsError> {
    abs_f_curve(potential, l, ks).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn density(potential: &str, l: f64, lambdas: &[f64]) -> Result<Vec<f64>, JsError> {
    density_curve(potential, l, lambdas).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn kernel_slice(potential: &str, l: f64, t: f64, x: f64, ys: &[f64]) -> Result<Vec<f64>, JsError> {
    kernel_row(potential, l, t, x, ys).map_err(|e| JsError::new(&e))
}
