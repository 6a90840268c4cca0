//! Jost function, normalized Jost function F, Weyl m-function, spectral
//! measure, bound states and zero-energy resonance classification.

use crate::error::{Error, Result};
use crate::par::par_map;
use crate::quad::{brent, integrate_adaptive, integrate_c, logspace, rule16, rule24};
use crate::solutions::{JostSolution, ProblemSpec, RegularSolution};
use crate::specfun::{f_l, gamma, jost_free, psi_l, theta_l, weyl_m_free, Sample};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Number of scan points for the bound-state search.
pub const BOUND_SCAN_POINTS: usize = 1000;
/// |F(0)| below this (relative to max(1, sup |F|)) is a resonance.
pub const RESONANT_TOL: f64 = 1e-9;
/// |F(0)| below this (relative to sup |F|) is flagged near-resonant.
pub const NEAR_RESONANT_TOL: f64 = 1e-4;

fn wronskian(a: (C64, C64), b: (C64, C64)) -> C64 {
    a.0 * b.1 - a.1 * b.0
}

fn pair(s: Sample) -> (C64, C64) {
    (s.value, s.dx)
}

/// Radius beyond which q vanishes (or is truncated); 1 for q = 0.
pub fn matching_radius(p: &ProblemSpec) -> f64 {
    if p.end() > 0.0 {
        p.end()
    } else {
        1.0
    }
}

fn check_k(k: C64) -> Result<()> {
    if k.norm() == 0.0 || !k.re.is_finite() || !k.im.is_finite() {
        return Err(Error::Domain(format!("k must be finite and nonzero, got {k}")));
    }
    Ok(())
}

/// f(k) = W(f(k, .), phi(k^2, .)) evaluated beyond the support, where
/// f(k, x) = f_l(k, x). Valid for any k off the negative imaginary axis
/// with Re k >= 0 or Im k >= 0 (analytic continuation for compact q).
pub(crate) fn jost_function_any(p: &ProblemSpec, k: C64) -> Result<C64> {
    check_k(k)?;
    let x = matching_radius(p);
    let phi = RegularSolution::new(p, k, false)?.at(x)?;
    let f = f_l(p.l, k, x)?;
    Ok(wronskian(pair(f), (phi.value, phi.dx)))
}

/// The Jost function f(k) for Im k >= 0, k != 0.
pub fn jost_function(p: &ProblemSpec, k: C64) -> Result<C64> {
    if k.im < 0.0 {
        return Err(Error::Domain("the Jost function is evaluated for Im k >= 0".into()));
    }
    jost_function_any(p, k)
}

/// Jost function from the Wronskian of the marched Jost and regular
/// solutions at three matching points; returns the mean value and the
/// relative spread.
pub fn jost_function_checked(p: &ProblemSpec, k: C64) -> Result<(C64, f64)> {
    if k.im < 0.0 {
        return Err(Error::Domain("the Jost function is evaluated for Im k >= 0".into()));
    }
    check_k(k)?;
    let x = matching_radius(p);
    let phi = RegularSolution::new(p, k, false)?;
    let jost = JostSolution::new(p, k, false)?;
    let mut ws = Vec::with_capacity(3);
    for xm in [x / 3.0, 2.0 * x / 3.0, x] {
        let a = jost.at(xm)?;
        let b = phi.at(xm)?;
        ws.push(wronskian((a.value, a.dx), (b.value, b.dx)));
    }
    let mean = (ws[0] + ws[1] + ws[2]) / 3.0;
    let spread = ws.iter().map(|w| (w - mean).norm()).fold(0.0, f64::max) / mean.norm().max(f64::MIN_POSITIVE);
    Ok((mean, spread))
}

/// psi_l(0, x) = Gamma(nu) 2^nu x^{-l} / sqrt(2 pi) and its derivative.
fn psi_l_zero(l: f64, x: f64) -> (f64, f64) {
    let nu = l + 0.5;
    let c = gamma(nu) * 2f64.powf(nu) / (2.0 * PI).sqrt();
    (c * x.powf(-l), -l * c * x.powf(-l - 1.0))
}

/// F(0) = W(psi_l(0, .), phi(0, .)) beyond the support.
fn normalized_jost_zero(p: &ProblemSpec) -> Result<f64> {
    let x = matching_radius(p);
    let phi = RegularSolution::new(p, ZERO, false)?.at(x)?;
    let (u, du) = psi_l_zero(p.l, x);
    Ok(u * phi.dx.re - du * phi.value.re)
}

/// F(k) = e^{-i pi l/2} k^l f(k); F(0) by the threshold limit.
pub fn normalized_jost(p: &ProblemSpec, k: C64) -> Result<C64> {
    if k.norm() == 0.0 {
        return Ok(C64::new(normalized_jost_zero(p)?, 0.0));
    }
    if k.im < 0.0 {
        return Err(Error::Domain("F is evaluated for Im k >= 0".into()));
    }
    if p.q.is_free() {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(jost_function_any(p, k)? / jost_free(p.l, k))
}

/// Quadrature breakpoints on [0, x]: potential jumps, width resolving
/// |k| and the depth, geometric grading at the origin.
fn integral_breaks(p: &ProblemSpec, k: C64, x: f64) -> Vec<f64> {
    let mut pts = vec![0.0, x];
    pts.extend(p.q.breakpoints(x));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let qs = p.q.depth().max(p.q.eval(0.5 * x).abs()).min(1e6);
    let h = (1.0 / (k.norm() + qs.sqrt() + 1.0)).min(0.5);
    let mut out = vec![0.0];
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        for i in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    let first = out[1];
    let mut graded: Vec<f64> = (1..=24).rev().map(|j| first * 2f64.powi(-j)).collect();
    graded.insert(0, 0.0);
    graded.extend_from_slice(&out[1..]);
    graded
}

/// F(k) = 1 + int_0^inf psi_l(k^2, x) phi(k^2, x) q(x) dx, by quadrature
/// independent of the Wronskian route. k = 0 allowed.
pub fn normalized_jost_integral(p: &ProblemSpec, k: C64) -> Result<C64> {
    if k.im < 0.0 {
        return Err(Error::Domain("F is evaluated for Im k >= 0".into()));
    }
    if p.q.is_free() {
        return Ok(C64::new(1.0, 0.0));
    }
    let x = p.end();
    let phi = RegularSolution::new(p, k, false)?;
    let breaks = integral_breaks(p, k, x);
    let mut err = None;
    let s = integrate_c(
        |y| {
            let q = p.q.eval(y);
            if q == 0.0 {
                return ZERO;
            }
            let ps = if k.norm() == 0.0 {
                Ok(C64::new(psi_l_zero(p.l, y).0, 0.0))
            } else {
                psi_l(p.l, k, y).map(|s| s.value)
            };
            match (ps, phi.at(y)) {
                (Ok(a), Ok(b)) => a * b.value * q,
                (Err(e), _) | (_, Err(e)) => {
                    err.get_or_insert(e);
                    ZERO
                }
            }
        },
        &breaks,
        rule24(),
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(1.0 + s)
}

/// Weyl m(k^2) for real k != 0, normalized by W(theta, phi) = 1 with theta
/// equal to a multiple of theta_l beyond the support:
/// m = f_l(k) m_l(k^2) / (W(theta_l, phi) f(k)).
pub fn weyl_m(p: &ProblemSpec, k: f64) -> Result<C64> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain("m is evaluated for real k != 0".into()));
    }
    if k < 0.0 {
        return Ok(weyl_m(p, -k)?.conj());
    }
    let kc = C64::new(k, 0.0);
    let x = matching_radius(p);
    let phi = RegularSolution::new(p, kc, false)?.at(x)?;
    let th = theta_l(p.l, kc * kc, x)?;
    let alpha = wronskian(pair(th), (phi.value, phi.dx));
    let f = wronskian(pair(f_l(p.l, kc, x)?), (phi.value, phi.dx));
    let ml = weyl_m_free(p.l, k)?;
    if f.norm() == 0.0 || alpha.norm() == 0.0 {
        return Err(Error::AccuracyLoss(format!("degenerate Wronskian at k={k}")));
    }
    Ok(jost_free(p.l, kc) * ml / (alpha * f))
}

/// Absolutely continuous spectral density sqrt(lambda) / (pi |f(sqrt(lambda))|^2).
pub fn spectral_density(p: &ProblemSpec, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Ok(0.0);
    }
    let k = lambda.sqrt();
    let f = jost_function_any(p, C64::new(k, 0.0))?;
    Ok(k / (PI * f.norm_sqr()))
}

/// Cumulative a.c. part int_0^lambda d rho = (2/pi) int_0^sqrt(lambda) k^2 / |f(k)|^2 dk.
pub fn cumulative_ac(p: &ProblemSpec, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Ok(0.0);
    }
    let kmax = lambda.sqrt();
    let x = matching_radius(p);
    let h = (0.5 / x).min(1.0);
    let n = (kmax / h).ceil().max(1.0) as usize;
    let mut breaks: Vec<f64> = (0..=n).map(|i| kmax * i as f64 / n as f64).collect();
    let first = breaks[1];
    let mut graded: Vec<f64> = (1..=12).rev().map(|j| first * 2f64.powi(-j)).collect();
    graded.insert(0, 0.0);
    graded.extend_from_slice(&breaks[1..]);
    breaks = graded;
    let rule = rule16();
    let mut nodes = Vec::new();
    for w in breaks.windows(2) {
        let (c, hh) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push((c + hh * t, wt * hh));
        }
    }
    let l = p.l;
    let vals = par_map(&nodes, |&(k, w)| -> Result<f64> {
        let big_f = normalized_jost(p, C64::new(k, 0.0))?;
        Ok(w * 2.0 / PI * k.powf(2.0 + 2.0 * l) / big_f.norm_sqr())
    });
    vals.into_iter().sum()
}

/// Free cumulative spectral function lambda^{l+3/2} / (pi (l + 3/2)).
pub fn free_cumulative(l: f64, lambda: f64) -> f64 {
    lambda.max(0.0).powf(l + 1.5) / (PI * (l + 1.5))
}

/// One eigenvalue lambda = -kappa^2 with norming constant gamma = 1/||phi||^2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundState {
    pub kappa: f64,
    pub lambda: f64,
    pub gamma: f64,
    /// dF(i kappa)/d kappa at the root; nonzero for a simple zero
    pub slope: f64,
}

/// Result of the bound-state scan with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundStateScan {
    pub states: Vec<BoundState>,
    pub kappa_max: f64,
    pub f_at_kappa_max: f64,
    /// F(i kappa_max) within 0.5 of its limit 1
    pub settled: bool,
}

/// F(i kappa) = kappa^l f(i kappa), real for kappa > 0.
pub fn f_imaginary(p: &ProblemSpec, kappa: f64) -> Result<f64> {
    if kappa == 0.0 {
        return normalized_jost_zero(p);
    }
    let f = jost_function_any(p, C64::new(0.0, kappa))?;
    Ok(kappa.powf(p.l) * f.re)
}

/// gamma = 1/||phi(-kappa^2, .)||^2 with the tail beyond the support
/// carried by the decaying free Jost solution.
pub fn norming_constant(p: &ProblemSpec, kappa: f64) -> Result<f64> {
    let k = C64::new(0.0, kappa);
    let phi = RegularSolution::new(p, k, false)?;
    let inner = phi.integrate_squared(|_| 1.0)?.re;
    let x = matching_radius(p);
    let ph = phi.at(x)?.value.re;
    let fx = f_l(p.l, k, x)?.value.re;
    let c = ph / fx;
    let mut tail = 0.0;
    let step = 4.0 / kappa;
    let mut a = x;
    loop {
        let piece = integrate_adaptive(|y| f_l(p.l, k, y).map(|s| s.value.re * s.value.re).unwrap_or(f64::NAN), a, a + step, 1e-13)?;
        if !piece.is_finite() {
            return Err(Error::Quadrature("bound-state tail".into()));
        }
        tail += piece;
        a += step;
        if piece <= 1e-17 * tail || a > x + 200.0 / kappa {
            break;
        }
    }
    Ok(1.0 / (inner + c * c * tail))
}

/// Zeros of kappa -> F(i kappa) on (0, kappa_max] by sign scan and Brent.
pub fn bound_state_scan(p: &ProblemSpec) -> Result<BoundStateScan> {
    let depth = if let crate::potential::Potential::Power { c, p: pw, b } = &p.q {
        if *c < 0.0 {
            c.abs() * b.powf(-pw).max(1e-3f64.powf(-pw))
        } else {
            0.0
        }
    } else {
        p.q.depth()
    };
    let kappa_max = depth.sqrt() + 1.0;
    if p.q.is_free() {
        return Ok(BoundStateScan { states: vec![], kappa_max, f_at_kappa_max: 1.0, settled: true });
    }
    let grid: Vec<f64> = (0..=BOUND_SCAN_POINTS).map(|i| kappa_max * i as f64 / BOUND_SCAN_POINTS as f64).collect();
    let vals: Vec<f64> = par_map(&grid, |&kp| f_imaginary(p, kp)).into_iter().collect::<Result<_>>()?;
    let mut states = Vec::new();
    for i in 0..BOUND_SCAN_POINTS {
        let (a, b) = (grid[i], grid[i + 1]);
        let (fa, fb) = (vals[i], vals[i + 1]);
        if fb == 0.0 || fa.signum() == fb.signum() {
            if !(fb == 0.0 && i + 1 == BOUND_SCAN_POINTS) {
                continue;
            }
        }
        if a == 0.0 && fa == 0.0 {
            continue;
        }
        let mut err = None;
        let kappa = brent(
            |kp| match f_imaginary(p, kp) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            1e-15,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        if kappa <= 0.0 {
            continue;
        }
        let d = 1e-6 * kappa.max(1e-3);
        let slope = (f_imaginary(p, kappa + d)? - f_imaginary(p, kappa - d)?) / (2.0 * d);
        let gamma = norming_constant(p, kappa)?;
        states.push(BoundState { kappa, lambda: -kappa * kappa, gamma, slope });
    }
    states.sort_by(|a, b| b.kappa.partial_cmp(&a.kappa).unwrap());
    let f_at_kappa_max = vals[BOUND_SCAN_POINTS];
    Ok(BoundStateScan { states, kappa_max, f_at_kappa_max, settled: (f_at_kappa_max - 1.0).abs() < 0.5 })
}

/// Eigenvalues below zero as (kappa, lambda, gamma), kappa decreasing.
pub fn bound_states(p: &ProblemSpec) -> Result<Vec<BoundState>> {
    Ok(bound_state_scan(p)?.states)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ResonanceStatus {
    None,
    Resonant,
    NearResonant { f0: f64 },
}

/// Zero-energy classification with both criteria.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub status: ResonanceStatus,
    /// F(0) from the integral representation
    pub f0: f64,
    /// F(0) from the x^{l+1} coefficient of phi(0, x) beyond the support
    pub f0_growth: f64,
    /// phi(0, x) = a x^{l+1} + b x^{-l} beyond the support
    pub growth_a: f64,
    pub growth_b: f64,
    pub sup_f: f64,
}

/// Coefficients (a, b) of phi(0, x) = a x^{l+1} + b x^{-l} beyond the support.
pub fn threshold_coefficients(p: &ProblemSpec) -> Result<(f64, f64)> {
    let x = matching_radius(p);
    let s = RegularSolution::new(p, ZERO, false)?.at(x)?;
    let (u, du) = (s.value.re, s.dx.re);
    let l = p.l;
    let w = 2.0 * l + 1.0;
    // W(x^{-l}, x^{l+1}) = 2l + 1
    let a = (x.powf(-l) * du + l * x.powf(-l - 1.0) * u) / w;
    let b = (u * (l + 1.0) * x.powf(l) - du * x.powf(l + 1.0)) / w;
    Ok((a, b))
}

/// sup |F(k)| sampled on a log grid of real k.
pub fn sup_abs_f(p: &ProblemSpec) -> Result<f64> {
    let ks = logspace(1e-3, 1e2, 25);
    let vals: Vec<f64> = par_map(&ks, |&k| normalized_jost(p, C64::new(k, 0.0)).map(|f| f.norm())).into_iter().collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(1.0, f64::max))
}

/// Classify the threshold: resonant when F(0) vanishes. The integral route
/// and the growth test of phi(0, x) must agree.
pub fn resonance_status(p: &ProblemSpec) -> Result<ResonanceReport> {
    let f0 = normalized_jost_integral(p, ZERO)?.re;
    let (a, b) = threshold_coefficients(p)?;
    let nu = p.l + 0.5;
    let c = gamma(nu) * 2f64.powf(nu) / (2.0 * PI).sqrt();
    let f0_growth = c * (2.0 * p.l + 1.0) * a;
    let sup_f = sup_abs_f(p)?.max(f0.abs());
    if (f0 - f0_growth).abs() > 1e-8 * f0.abs().max(1.0) {
        return Err(Error::AccuracyLoss(format!(
            "resonance criteria disagree: F(0) = {f0} by quadrature, {f0_growth} by the growth coefficient"
        )));
    }
    let status = if f0.abs() < RESONANT_TOL * sup_f.max(1.0) {
        ResonanceStatus::Resonant
    } else if f0.abs() < NEAR_RESONANT_TOL * sup_f {
        ResonanceStatus::NearResonant { f0 }
    } else {
        ResonanceStatus::None
    };
    Ok(ResonanceReport { status, f0, f0_growth, growth_a: a, growth_b: b, sup_f })
}

/// Gate used by the propagator: refuse resonant and near-resonant operators.
pub fn require_non_resonant(p: &ProblemSpec) -> Result<ResonanceReport> {
    let r = resonance_status(p)?;
    match r.status {
        ResonanceStatus::None => Ok(r),
        ResonanceStatus::Resonant => Err(Error::Resonance(format!("F(0) = {:e}: zero-energy resonance or eigenvalue", r.f0))),
        ResonanceStatus::NearResonant { f0 } => Err(Error::Resonance(format!("F(0) = {f0:e} is near zero"))),
    }
}

/// Absolutely continuous density and the discrete part of the spectral measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub lambda: Vec<f64>,
    pub ac_density: Vec<f64>,
    pub discrete: Vec<(f64, f64)>,
}

pub fn spectral_measure(p: &ProblemSpec, lambda_grid: &[f64]) -> Result<SpectralMeasure> {
    let ac_density = par_map(lambda_grid, |&lam| spectral_density(p, lam)).into_iter().collect::<Result<_>>()?;
    let discrete = bound_states(p)?.iter().map(|b| (b.lambda, b.gamma)).collect();
    Ok(SpectralMeasure { lambda: lambda_grid.to_vec(), ac_density, discrete })
}

impl SpectralMeasure {
    /// Columns lambda, density, free density lambda^{l+1/2}/pi.
    pub fn to_csv(&self, l: f64) -> String {
        let mut s = String::from("lambda,density,free_density\n");
        for (lam, d) in self.lambda.iter().zip(&self.ac_density) {
            let free = if *lam > 0.0 { lam.powf(l + 0.5) / PI } else { 0.0 };
            s.push_str(&crate::table::csv_row(&[*lam, *d, free]));
        }
        s
    }
}

/// One row of the scattering table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringPoint {
    pub k: f64,
    pub f: C64,
    pub big_f: C64,
    pub g: C64,
    pub im_m: f64,
}

/// f, F, g on a k-grid plus bound states and the threshold classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub l: f64,
    pub potential: String,
    pub points: Vec<ScatteringPoint>,
    pub bound_states: Vec<BoundState>,
    pub resonance: ResonanceReport,
}

/// f(k), F(k), g(k) = -m f and Im m at one real k > 0.
pub fn scattering_point(p: &ProblemSpec, k: f64) -> Result<ScatteringPoint> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("scattering grid points must be positive, got {k}")));
    }
    let kc = C64::new(k, 0.0);
    let f = jost_function_any(p, kc)?;
    let m = weyl_m(p, k)?;
    Ok(ScatteringPoint { k, f, big_f: normalized_jost(p, kc)?, g: -m * f, im_m: m.im })
}

impl ScatteringData {
    pub fn compute(p: &ProblemSpec, k_grid: &[f64]) -> Result<ScatteringData> {
        if k_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("k grid must be strictly increasing".into()));
        }
        let points = par_map(k_grid, |&k| scattering_point(p, k)).into_iter().collect::<Result<_>>()?;
        Ok(ScatteringData {
            l: p.l,
            potential: p.q.to_string(),
            points,
            bound_states: bound_states(p)?,
            resonance: resonance_status(p)?,
        })
    }

    /// Columns k, Re f, Im f, Re F, Im F, |F|, Im m.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,re_f,im_f,re_F,im_F,abs_F,im_m\n");
        for r in &self.points {
            s.push_str(&crate::table::csv_row(&[r.k, r.f.re, r.f.im, r.big_f.re, r.big_f.im, r.big_f.norm(), r.im_m]));
        }
        s
    }

    /// Bound states and resonance status as JSON.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "l": self.l,
            "potential": self.potential,
            "bound_states": self.bound_states,
            "resonance": self.resonance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Potential;

    fn spec(l: f64, q: &str) -> ProblemSpec {
        ProblemSpec::new(l, q.parse().unwrap()).unwrap()
    }

    #[test]
    fn free_jost_function_is_k_power() {
        for &l in &[0.0, 0.25, 1.0, 2.0] {
            let p = ProblemSpec::new(l, Potential::Free).unwrap();
            for &k in &[0.3, 2.0, 11.0] {
                let kc = C64::new(k, 0.0);
                let f = jost_function(&p, kc).unwrap();
                let want = jost_free(l, kc);
                assert!((f - want).norm() < 1e-12 * want.norm(), "l={l} k={k}");
                assert!((normalized_jost(&p, kc).unwrap() - 1.0).norm() < 1e-12);
            }
            assert!((normalized_jost(&p, ZERO).unwrap() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn square_well_l0_matches_matching_formula() {
        let p = spec(0.0, "well(1,0,1)");
        let k = 1.0f64;
        let kk = (k * k + 1.0).sqrt();
        let e = C64::new(0.0, k).exp();
        let want = e * kk.cos() - C64::new(0.0, k) * e * kk.sin() / kk;
        let got = jost_function(&p, C64::new(k, 0.0)).unwrap();
        assert!((got - want).norm() < 1e-12);
        let (w3, spread) = jost_function_checked(&p, C64::new(k, 0.0)).unwrap();
        assert!(spread < 1e-10 && (w3 - want).norm() < 1e-10);
    }

    #[test]
    fn free_weyl_function_imaginary_part() {
        let p = ProblemSpec::new(0.0, Potential::Free).unwrap();
        let m = weyl_m(&p, 1.7).unwrap();
        assert!((m.im - 1.7).abs() < 1e-12);
    }
}
