//! Solutions of the unperturbed equation -u'' + l(l+1)/x^2 u = k^2 u,
//! the free Green's function and their k-derivatives.

use super::bessel::{cylinder, gamma, hankel_asymptotic_sums, jhat, sincospi};
use crate::error::{domain, Error, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Value and x-derivative of a solution at one point.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Sample {
    pub value: C64,
    pub dx: C64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeKind {
    PhiL,
    ThetaL,
    PsiL,
    FL,
    HL,
}

pub fn order(l: f64) -> f64 {
    l + 0.5
}

/// C_l = sqrt(pi) / (Gamma(l + 3/2) 2^{l+1}).
pub fn c_l(l: f64) -> f64 {
    PI.sqrt() / (gamma(l + 1.5) * 2f64.powf(l + 1.0))
}

/// True when l + 1/2 is a non-negative integer (logarithmic theta_l).
pub fn is_log_case(l: f64) -> bool {
    let nu = l + 0.5;
    (nu - nu.round()).abs() < 1e-12
}

fn check_l(l: f64) -> Result<()> {
    if !(l > -0.5) || !l.is_finite() {
        return Err(Error::Invalid(format!("angular momentum must satisfy l > -1/2, got {l}")));
    }
    Ok(())
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("x must be positive, got {x}"));
    }
    Ok(())
}

/// phi_l(z, x), entire in z, ~ C_l x^{l+1} at the origin.
pub fn phi_l(l: f64, z: C64, x: f64) -> Result<Sample> {
    check_l(l)?;
    check_x(x)?;
    let nu = order(l);
    let s = z * (x * x);
    let j0 = jhat(nu, s)?;
    let j1 = jhat(nu + 1.0, s)?;
    let a = (PI / 2.0).sqrt() * 2f64.powf(-nu);
    let value = j0 * (a * x.powf(nu + 0.5));
    let dx = (j0 * (nu + 0.5) - s * j1 * 0.5) * (a * x.powf(nu - 0.5));
    Ok(Sample { value, dx })
}

/// theta_l(z, x) with W(theta_l, phi_l) = 1, including the logarithmic case.
pub fn theta_l(l: f64, z: C64, x: f64) -> Result<Sample> {
    check_l(l)?;
    check_x(x)?;
    let nu = order(l);
    if z == C64::new(0.0, 0.0) {
        let c = 1.0 / ((2.0 * l + 1.0) * c_l(l));
        return Ok(Sample { value: C64::new(c * x.powf(-l), 0.0), dx: C64::new(-l * c * x.powf(-l - 1.0), 0.0) });
    }
    if !is_log_case(l) {
        let s = z * (x * x);
        let j0 = jhat(-nu, s)?;
        let j1 = jhat(1.0 - nu, s)?;
        let (sn, _) = sincospi(nu);
        let a = (PI / 2.0).sqrt() * 2f64.powf(nu) / sn;
        let value = j0 * (a * x.powf(0.5 - nu));
        let dx = (j0 * (0.5 - nu) - s * j1 * 0.5) * (a * x.powf(-0.5 - nu));
        return Ok(Sample { value, dx });
    }
    if z.im == 0.0 && z.re < 0.0 {
        return domain("theta_l in the logarithmic case is cut along the negative real axis");
    }
    let k = z.sqrt();
    let w = k * x;
    let c = cylinder(nu, w)?;
    let cm = cylinder(nu - 1.0, w)?;
    let kn = k.powf(nu);
    let lz = z.ln() / PI;
    let u = c.j * lz - c.y;
    let du = (cm.j - c.j * nu / w) * lz - (cm.y - c.y * nu / w);
    let r = (PI / 2.0).sqrt();
    let value = kn * r * x.sqrt() * u;
    let dx = kn * r * (u / (2.0 * x.sqrt()) + x.sqrt() * k * du);
    Ok(Sample { value, dx })
}

fn conj_sample(s: Sample) -> Sample {
    Sample { value: s.value.conj(), dx: s.dx.conj() }
}

fn check_k(k: C64) -> Result<()> {
    if k == C64::new(0.0, 0.0) {
        return domain("k = 0 is excluded");
    }
    Ok(())
}

fn is_negative_real(k: C64) -> bool {
    k.im == 0.0 && k.re < 0.0
}

/// Derivative of sqrt(x) C_nu(kx) with respect to x.
fn sqrt_x_cyl_dx(nu: f64, k: C64, x: f64, c: C64, c_lower: C64) -> C64 {
    let w = k * x;
    c / (2.0 * x.sqrt()) + k * x.sqrt() * (c_lower - c * nu / w)
}

/// psi_l(k, x) = i k^nu sqrt(pi x / 2) H1_nu(kx), the free Weyl solution.
pub fn psi_l(l: f64, k: C64, x: f64) -> Result<Sample> {
    check_l(l)?;
    check_x(x)?;
    check_k(k)?;
    if is_negative_real(k) {
        return psi_l(l, -k, x).map(conj_sample);
    }
    let nu = order(l);
    let w = k * x;
    let h = cylinder(nu, w)?.h1;
    let hm = cylinder(nu - 1.0, w)?.h1;
    let a = I * k.powf(nu) * (PI / 2.0).sqrt();
    Ok(Sample { value: a * x.sqrt() * h, dx: a * sqrt_x_cyl_dx(nu, k, x, h, hm) })
}

/// f_l(k, x) = i e^{i pi l/2} sqrt(pi k x / 2) H1_nu(kx), the free Jost solution.
pub fn f_l(l: f64, k: C64, x: f64) -> Result<Sample> {
    check_l(l)?;
    check_x(x)?;
    check_k(k)?;
    if is_negative_real(k) {
        return f_l(l, -k, x).map(conj_sample);
    }
    let nu = order(l);
    let w = k * x;
    let h = cylinder(nu, w)?.h1;
    let hm = cylinder(nu - 1.0, w)?.h1;
    let (s, c) = sincospi(0.5 * l);
    let a = I * C64::new(c, s) * (k * (PI / 2.0)).sqrt();
    Ok(Sample { value: a * x.sqrt() * h, dx: a * sqrt_x_cyl_dx(nu, k, x, h, hm) })
}

/// Hankel series P1(w) = sum i^j a_j / w^j and its w-derivative.
fn h_series(nu: f64, w: C64) -> Option<(C64, C64)> {
    hankel_asymptotic_sums(nu, w)?;
    let mut u = C64::new(1.0, 0.0);
    let mut p = u;
    let mut dp = C64::new(0.0, 0.0);
    let mut ij = C64::new(1.0, 0.0);
    for j in 1..400 {
        let jf = j as f64;
        let factor = (2.0 * nu - 2.0 * jf + 1.0) * (2.0 * nu + 2.0 * jf - 1.0) / (8.0 * jf);
        u = u * factor / w;
        ij *= I;
        p += ij * u;
        dp += ij * u * (-jf) / w;
        if u.norm() < 1e-17 {
            break;
        }
    }
    Some((p, dp))
}

/// h_l(k, x) = e^{-ikx} f_l(k, x); tends to 1 as kx grows.
pub fn h_l(l: f64, k: C64, x: f64) -> Result<Sample> {
    check_l(l)?;
    check_x(x)?;
    check_k(k)?;
    if is_negative_real(k) {
        return h_l(l, -k, x).map(conj_sample);
    }
    let nu = order(l);
    let w = k * x;
    if w.norm() >= 17.0 && w.arg().abs() <= 0.75 * PI {
        if let Some((p, dp)) = h_series(nu, w) {
            return Ok(Sample { value: p, dx: dp * k });
        }
    }
    let f = f_l(l, k, x)?;
    let e = (-I * k * x).exp();
    Ok(Sample { value: e * f.value, dx: e * (f.dx - I * k * f.value) })
}

pub fn free_solution(kind: FreeKind, l: f64, arg: C64, x: f64) -> Result<Sample> {
    match kind {
        FreeKind::PhiL => phi_l(l, arg, x),
        FreeKind::ThetaL => theta_l(l, arg, x),
        FreeKind::PsiL => psi_l(l, arg, x),
        FreeKind::FL => f_l(l, arg, x),
        FreeKind::HL => h_l(l, arg, x),
    }
}

/// d/dk phi_l(k^2, x) = -k x phi_{l+1}(k^2, x).
pub fn phi_l_dk(l: f64, k: C64, x: f64) -> Result<C64> {
    Ok(-k * x * phi_l(l + 1.0, k * k, x)?.value)
}

/// d/dk psi_l(k, x) = i k^nu x sqrt(pi x/2) H1_{nu-1}(kx).
pub fn psi_l_dk(l: f64, k: C64, x: f64) -> Result<C64> {
    check_l(l)?;
    check_x(x)?;
    check_k(k)?;
    if is_negative_real(k) {
        // psi(-k) = conj psi(k) and d/dk flips sign
        return Ok(-psi_l_dk(l, -k, x)?.conj());
    }
    let nu = order(l);
    let hm = cylinder(nu - 1.0, k * x)?.h1;
    Ok(I * k.powf(nu) * x * (PI * x / 2.0).sqrt() * hm)
}

/// d/dk f_l(k, x).
pub fn f_l_dk(l: f64, k: C64, x: f64) -> Result<C64> {
    check_l(l)?;
    check_x(x)?;
    check_k(k)?;
    if is_negative_real(k) {
        return Ok(-f_l_dk(l, -k, x)?.conj());
    }
    let nu = order(l);
    let w = k * x;
    let h = cylinder(nu, w)?.h1;
    let hm = cylinder(nu - 1.0, w)?.h1;
    let (s, c) = sincospi(0.5 * l);
    let a = I * C64::new(c, s) * (x * PI / 2.0).sqrt() * k.sqrt();
    Ok(a * (hm * x - h * (l / k)))
}

/// d/dk h_l(k, x).
pub fn h_l_dk(l: f64, k: C64, x: f64) -> Result<C64> {
    check_l(l)?;
    check_x(x)?;
    check_k(k)?;
    if is_negative_real(k) {
        return Ok(-h_l_dk(l, -k, x)?.conj());
    }
    let nu = order(l);
    let w = k * x;
    if w.norm() >= 17.0 && w.arg().abs() <= 0.75 * PI {
        if let Some((_, dp)) = h_series(nu, w) {
            return Ok(dp * x);
        }
    }
    let h = h_l(l, k, x)?.value;
    let e = (-I * k * x).exp();
    Ok(-I * x * h + e * f_l_dk(l, k, x)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeDkKind {
    PhiL,
    PsiL,
    HL,
}

pub fn free_solution_dk(kind: FreeDkKind, l: f64, k: C64, x: f64) -> Result<C64> {
    check_k(k)?;
    match kind {
        FreeDkKind::PhiL => phi_l_dk(l, k, x),
        FreeDkKind::PsiL => psi_l_dk(l, k, x),
        FreeDkKind::HL => h_l_dk(l, k, x),
    }
}

/// G_l(k^2, x, y) = phi_l(x) theta_l(y) - phi_l(y) theta_l(x).
pub fn green_free(l: f64, k: C64, x: f64, y: f64) -> Result<C64> {
    check_l(l)?;
    check_x(x)?;
    check_x(y)?;
    if x == y {
        return Ok(C64::new(0.0, 0.0));
    }
    if k == C64::new(0.0, 0.0) {
        let v = (x.powf(l + 1.0) * y.powf(-l) - y.powf(l + 1.0) * x.powf(-l)) / (2.0 * l + 1.0);
        return Ok(C64::new(v, 0.0));
    }
    if k.im.abs() * x.max(y) > 3.0 {
        return green_free_hankel(l, k, x, y);
    }
    let nu = order(l);
    let cx = cylinder(nu, k * x)?;
    let cy = cylinder(nu, k * y)?;
    Ok((cy.j * cx.y - cx.j * cy.y) * (PI / 2.0 * (x * y).sqrt()))
}

/// Hankel-product form -(i pi/4) sqrt(xy) [H1(kx)H2(ky) - H1(ky)H2(kx)].
pub fn green_free_hankel(l: f64, k: C64, x: f64, y: f64) -> Result<C64> {
    check_l(l)?;
    check_x(x)?;
    check_x(y)?;
    check_k(k)?;
    let nu = order(l);
    let cx = cylinder(nu, k * x)?;
    let cy = cylinder(nu, k * y)?;
    Ok((cx.h1 * cy.h2 - cy.h1 * cx.h2) * C64::new(0.0, -PI / 4.0 * (x * y).sqrt()))
}

/// d/dk G_l(k^2, x, y).
pub fn green_free_dk(l: f64, k: C64, x: f64, y: f64) -> Result<C64> {
    check_l(l)?;
    check_x(x)?;
    check_x(y)?;
    check_k(k)?;
    if x == y {
        return Ok(C64::new(0.0, 0.0));
    }
    let nu = order(l);
    let cx = cylinder(nu, k * x)?;
    let cy = cylinder(nu, k * y)?;
    let px = cylinder(nu + 1.0, k * x)?;
    let py = cylinder(nu + 1.0, k * y)?;
    let mx = cylinder(nu - 1.0, k * x)?;
    let my = cylinder(nu - 1.0, k * y)?;
    if k.im.abs() * x.max(y) > 3.0 {
        // C'(z) = (C_{nu-1} - C_{nu+1}) / 2 on the Hankel-product form
        let d1x = (mx.h1 - px.h1) * (0.5 * x);
        let d2x = (mx.h2 - px.h2) * (0.5 * x);
        let d1y = (my.h1 - py.h1) * (0.5 * y);
        let d2y = (my.h2 - py.h2) * (0.5 * y);
        let v = d1x * cy.h2 + cx.h1 * d2y - d1y * cx.h2 - cy.h1 * d2x;
        return Ok(v * C64::new(0.0, -PI / 4.0 * (x * y).sqrt()));
    }
    let a = px.j * cy.y * x - py.j * cx.y * y;
    let b = cx.j * my.y * y - cy.j * mx.y * x;
    Ok((a - b) * (PI / 2.0 * (x * y).sqrt()))
}

/// Free Jost function f_l(k) = k^{-l} e^{i pi l/2}.
pub fn jost_free(l: f64, k: C64) -> C64 {
    if is_negative_real(k) {
        return jost_free(l, -k).conj();
    }
    let (s, c) = sincospi(0.5 * l);
    k.powf(-l) * C64::new(c, s)
}

/// Free Weyl function m_l(k^2) for real k != 0, normalized with theta_l.
pub fn weyl_m_free(l: f64, k: f64) -> Result<C64> {
    check_l(l)?;
    if k == 0.0 {
        return domain("m_l is evaluated for k != 0");
    }
    if k < 0.0 {
        return Ok(weyl_m_free(l, -k)?.conj());
    }
    let nu = order(l);
    let k2n = k.powf(2.0 * nu);
    if is_log_case(l) {
        Ok(C64::new(-k2n * (k * k).ln() / PI, k2n))
    } else {
        let (s, c) = sincospi(nu);
        Ok(C64::new(-c, s) * (k2n / s))
    }
}
