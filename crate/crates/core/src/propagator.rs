//! Kernel of e^{-itH} P_c(H): closed-form free kernels, the spectral and
//! resolvent representations, the Born series of the resolvent and the
//! decay certificate.
//!
//! The k-integral runs over [0, K] on the real axis with Legendre-Filon
//! panels and continues along the ray K + s e^{-i pi/4}, where e^{-itk^2}
//! decays and the amplitude is continued analytically.

use crate::error::{Error, Result};
use crate::oscint::filon_panel;
use crate::par::par_map;
use crate::quad::{integrate_c, logspace, rule16};
use crate::scattering::{bound_states, matching_radius, require_non_resonant};
use crate::solutions::{JostSolution, ProblemSpec, RegularSolution};
use crate::specfun::{cylinder, f_l};
use crate::table::csv_row;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const I: C64 = C64 { re: 0.0, im: 1.0 };
const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Order of the Born expansion used when none is configured.
pub const DEFAULT_BORN_ORDER: usize = 3;
/// Target a-posteriori error of kernel quadratures, relative to the kernel scale.
pub const KERNEL_TOL: f64 = 1e-7;

fn check_xy(x: f64, y: f64) -> Result<()> {
    if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!("x, y must be positive, got ({x}, {y})")));
    }
    Ok(())
}

fn check_t(t: f64) -> Result<()> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Domain(format!("t must be finite and nonzero, got {t}")));
    }
    Ok(())
}

fn sigma(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// S(u) = sigma(u) / (sigma(u) + sigma(1 - u)): 0 for u <= 0, 1 for u >= 1.
pub fn smooth_step(u: f64) -> f64 {
    let (a, b) = (sigma(u), sigma(1.0 - u));
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// chi = 0 on |k| < 2 k0, chi = 1 on |k| > 3 k0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub k0: f64,
}

impl CutoffSpec {
    pub fn new(k0: f64) -> Result<CutoffSpec> {
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(Error::Invalid(format!("cutoff k0 must be positive, got {k0}")));
        }
        Ok(CutoffSpec { k0 })
    }

    pub fn chi(&self, k: f64) -> f64 {
        smooth_step((k.abs() - 2.0 * self.k0) / self.k0)
    }

    /// The low-pass weight 1 - chi.
    pub fn lowpass(&self, k: f64) -> f64 {
        1.0 - self.chi(k)
    }
}

/// [e^{-itH_{3,l}}](x, y) = i^{-l-1/2} / (2it) e^{i(x^2+y^2)/4t} sqrt(xy) J_{l+1/2}(xy/2t).
pub fn free_kernel_3d(l: u32, t: f64, x: f64, y: f64) -> Result<C64> {
    check_t(t)?;
    check_xy(x, y)?;
    if t < 0.0 {
        return Ok(free_kernel_3d(l, -t, x, y)?.conj());
    }
    let nu = l as f64 + 0.5;
    let j = cylinder(nu, C64::new(x * y / (2.0 * t), 0.0))?.j.re;
    let pre = C64::from_polar(1.0, -0.5 * PI * nu) / (2.0 * I * t);
    Ok(pre * C64::from_polar((x * y).sqrt() * j, (x * x + y * y) / (4.0 * t)))
}

/// Which integral representation produced a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelRoute {
    SpectralLowpass,
    ResolventFull,
    FreeClosedForm,
}

/// Real-axis form of the k-integrand of the full kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealAxisForm {
    /// (2/pi) k^2 phi(x) phi(y) / |f|^2
    Spectral,
    /// (2/pi) k phi(x<) Im(f(k, x>) / f(k))
    Resolvent,
}

/// Kernel values on a tensor grid, row-major in x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelGrid {
    pub t: f64,
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub values: Vec<C64>,
    pub route: KernelRoute,
    pub cutoff: Option<CutoffSpec>,
    /// a-posteriori quadrature error, max over the grid
    pub error_bound: f64,
}

impl KernelGrid {
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.y_grid.len() + j]
    }

    /// max |K| with its grid position.
    pub fn sup(&self) -> (f64, f64, f64) {
        let mut best = (0.0, self.x_grid[0], self.y_grid[0]);
        for (i, &x) in self.x_grid.iter().enumerate() {
            for (j, &y) in self.y_grid.iter().enumerate() {
                let v = self.get(i, j).norm();
                if v > best.0 {
                    best = (v, x, y);
                }
            }
        }
        best
    }

    /// CSV with header t,x,y,re_K,im_K,abs_K.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,re_K,im_K,abs_K\n");
        for (i, &x) in self.x_grid.iter().enumerate() {
            for (j, &y) in self.y_grid.iter().enumerate() {
                let v = self.get(i, j);
                s.push_str(&csv_row(&[self.t, x, y, v.re, v.im, v.norm()]));
            }
        }
        s
    }
}

/// Closed-form free kernel on a grid.
pub fn free_kernel_grid(l: u32, t: f64, xs: &[f64], ys: &[f64]) -> Result<KernelGrid> {
    let mut values = Vec::with_capacity(xs.len() * ys.len());
    for &x in xs {
        for &y in ys {
            values.push(free_kernel_3d(l, t, x, y)?);
        }
    }
    Ok(KernelGrid {
        t,
        x_grid: xs.to_vec(),
        y_grid: ys.to_vec(),
        values,
        route: KernelRoute::FreeClosedForm,
        cutoff: None,
        error_bound: 0.0,
    })
}

/// Spectral data at one k: phi(k^2, .) at the grid points, f(k) and f(k) f(-k).
struct NodeData {
    phi: Vec<C64>,
    jost: C64,
    denom: C64,
    /// f(k, .) at the grid points (resolvent form only)
    fx: Vec<C64>,
}

fn wronskian(a: (C64, C64), b: (C64, C64)) -> C64 {
    a.0 * b.1 - a.1 * b.0
}

fn node_data(p: &ProblemSpec, k: C64, pts: &[f64], with_jost_solution: bool) -> Result<NodeData> {
    let x_end = matching_radius(p);
    let reg = RegularSolution::new(p, k, false)?;
    let s = reg.at(x_end)?;
    let phi_end = (s.value, s.dx);
    let fp = f_l(p.l, k, x_end)?;
    let jost = wronskian((fp.value, fp.dx), phi_end);
    // f(-k) = conj f(conj k) continues the partner branch
    let fm = f_l(p.l, k.conj(), x_end)?;
    let jost_minus = wronskian((fm.value.conj(), fm.dx.conj()), phi_end);
    let phi = pts.iter().map(|&x| reg.at(x).map(|v| v.value)).collect::<Result<Vec<_>>>()?;
    let mut fx = Vec::new();
    if with_jost_solution {
        let inner = if pts.iter().any(|&x| x < x_end) { Some(JostSolution::new(p, k, false)?) } else { None };
        for &x in pts {
            fx.push(match (&inner, x < x_end) {
                (Some(js), true) => js.at(x)?.value,
                _ => f_l(p.l, k, x)?.value,
            });
        }
    }
    Ok(NodeData { phi, jost, denom: jost * jost_minus, fx })
}

fn spectral_amplitude(k: C64, d: &NodeData, i: usize, j: usize) -> C64 {
    let (lo, hi) = (i.min(j), i.max(j));
    k * k * d.phi[lo] * d.phi[hi] / d.denom * (2.0 / PI)
}

fn resolvent_amplitude(k: f64, d: &NodeData, pts: &[f64], i: usize, j: usize) -> C64 {
    let (lo, hi) = if pts[i] <= pts[j] { (i, j) } else { (j, i) };
    C64::new(2.0 / PI * k * d.phi[lo].re * (d.fx[hi] / d.jost).im, 0.0)
}

#[derive(Clone, Copy, Debug)]
enum Window {
    Full,
    Lowpass(CutoffSpec),
}

/// Real-axis panels (centre, half-width): the first panel is graded
/// geometrically towards k = 0, the rest are uniform.
fn real_panels(h: f64, kmax: f64) -> Vec<(f64, f64)> {
    let mut breaks = vec![0.0];
    for j in (1..=8).rev() {
        breaks.push(2.0 * h * 4f64.powi(-j));
    }
    let n = (kmax / (2.0 * h)).round().max(1.0) as usize;
    for i in 1..=n {
        breaks.push(2.0 * h * i as f64);
    }
    breaks.windows(2).map(|w| (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]))).collect()
}

/// Half-width with phase and amplitude oscillation per panel below `budget`.
fn panel_half_width(t: f64, width: f64, budget: f64) -> f64 {
    (2.0 * budget / (width + (width * width + 4.0 * budget * t).sqrt())).min(0.25)
}

struct Pairs {
    pts: Vec<f64>,
    ix: Vec<usize>,
    iy: Vec<usize>,
}

fn pairs(xs: &[f64], ys: &[f64]) -> Result<Pairs> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Invalid("kernel grids must be nonempty".into()));
    }
    for &v in xs.iter().chain(ys) {
        check_xy(v, v)?;
    }
    let mut pts: Vec<f64> = xs.iter().chain(ys).copied().collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let find = |v: f64| pts.binary_search_by(|a| a.partial_cmp(&v).unwrap()).unwrap();
    let ix = xs.iter().map(|&v| find(v)).collect();
    let iy = ys.iter().map(|&v| find(v)).collect();
    Ok(Pairs { ix, iy, pts })
}

/// Kernel on the grid without the resonance gate; t > 0.
fn kernel_engine(p: &ProblemSpec, t: f64, xs: &[f64], ys: &[f64], form: RealAxisForm, window: Window) -> Result<(Vec<C64>, f64)> {
    let pr = pairs(xs, ys)?;
    let pts = &pr.pts;
    let x_end = matching_radius(p);
    let width = xs.iter().fold(0.0f64, |m, &v| m.max(v)) + ys.iter().fold(0.0f64, |m, &v| m.max(v)) + 2.0 * x_end;
    let mut h = panel_half_width(t, width, 3.0);
    if let Window::Lowpass(c) = window {
        h = h.min(0.25 * c.k0);
    }
    let resolvent = form == RealAxisForm::Resolvent;
    let rule = rule16();
    for _attempt in 0..4 {
        let kmax = match window {
            Window::Full => (4.0f64).max(2.0 * width / t),
            Window::Lowpass(c) => 3.0 * c.k0,
        };
        let kmax = (kmax / (2.0 * h)).ceil() * 2.0 * h;
        let panels = real_panels(h, kmax);
        let knodes: Vec<f64> = panels.iter().flat_map(|&(m, hh)| rule.nodes.iter().map(move |&tau| m + hh * tau)).collect();
        let data = par_map(&knodes, |&k| node_data(p, C64::new(k, 0.0), pts, resolvent)).into_iter().collect::<Result<Vec<_>>>()?;
        let weight = |k: f64| match window {
            Window::Full => 1.0,
            Window::Lowpass(c) => c.lowpass(k),
        };
        let (ray_nodes, ray_panels) = match window {
            Window::Full => ray_grid(t, kmax, width),
            Window::Lowpass(_) => (Vec::new(), Vec::new()),
        };
        let ray_data = par_map(&ray_nodes, |&(k, _)| node_data(p, k, pts, false)).into_iter().collect::<Result<Vec<_>>>()?;
        let index: Vec<(usize, usize)> = pr.ix.iter().flat_map(|&i| pr.iy.iter().map(move |&j| (i, j))).collect();
        let results = par_map(&index, |&(i, j)| {
            let mut total = ZERO;
            let mut err = 0.0;
            let mut samples = vec![ZERO; rule.m];
            for (pi, &(m, hh)) in panels.iter().enumerate() {
                for (n, tau) in rule.nodes.iter().enumerate() {
                    let k = m + hh * tau;
                    let d = &data[pi * rule.m + n];
                    let a = if resolvent { resolvent_amplitude(k, d, pts, i, j) } else { spectral_amplitude(C64::new(k, 0.0), d, i, j) };
                    samples[n] = a * weight(k);
                }
                let f = filon_panel(-t, 0.0, m, hh, &samples);
                total += f.value;
                err += f.error;
            }
            for (pi, &(_, hw)) in ray_panels.iter().enumerate() {
                for n in 0..rule.m {
                    let (k, w) = ray_nodes[pi * rule.m + n];
                    let d = &ray_data[pi * rule.m + n];
                    samples[n] = (-I * t * k * k).exp() * spectral_amplitude(k, d, i, j) * w;
                    total += samples[n];
                }
                let g: Vec<C64> = samples.iter().zip(&rule.weights).map(|(v, &wt)| v / wt).collect();
                let c = rule.coefficients(&g);
                err += 2.0 * (c[rule.m - 1].norm() + c[rule.m - 2].norm()) + 0.0 * hw;
            }
            (total, err)
        });
        let scale = results.iter().map(|r| r.0.norm()).fold(0.0, f64::max);
        let err = results.iter().map(|r| r.1).fold(0.0, f64::max);
        if err <= KERNEL_TOL * scale.max(1e-300) {
            return Ok((results.into_iter().map(|r| r.0).collect(), err));
        }
        h *= 0.5;
    }
    Err(Error::Quadrature(format!("kernel quadrature at t = {t} did not reach {KERNEL_TOL:e} relative error after 4 refinements")))
}

/// Nodes (k, dk-weight) on the ray kmax + s e^{-i pi/4} and the s-panels.
fn ray_grid(t: f64, kmax: f64, width: f64) -> (Vec<(C64, C64)>, Vec<(f64, f64)>) {
    let rule = rule16();
    // |e^{-itk^2}| = e^{-sqrt2 t K s - t s^2}; the amplitude grows at most like e^{s width/sqrt2}
    let rate = 2f64.sqrt() * t * kmax - width * FRAC_1_SQRT_2;
    let target = 45.0;
    let s_end = (-rate + (rate * rate + 4.0 * t * target).sqrt()) / (2.0 * t);
    let step = (6.0 / (2.0 * t * (kmax + s_end) + width)).min(0.5).min(1.0 / t.sqrt());
    let n = (s_end / step).ceil().max(1.0) as usize;
    let step = s_end / n as f64;
    let dir = C64::from_polar(1.0, -0.25 * PI);
    let mut nodes = Vec::with_capacity(n * rule.m);
    let mut panels = Vec::with_capacity(n);
    for i in 0..n {
        let m = step * (i as f64 + 0.5);
        let hw = 0.5 * step;
        panels.push((m, hw));
        for (tau, w) in rule.nodes.iter().zip(&rule.weights) {
            nodes.push((kmax + dir * (m + hw * tau), dir * (w * hw)));
        }
    }
    (nodes, panels)
}

fn finish_grid(t: f64, xs: &[f64], ys: &[f64], raw: (Vec<C64>, f64), route: KernelRoute, cutoff: Option<CutoffSpec>) -> KernelGrid {
    let (mut values, error_bound) = raw;
    if t < 0.0 {
        for v in values.iter_mut() {
            *v = v.conj();
        }
    }
    KernelGrid { t, x_grid: xs.to_vec(), y_grid: ys.to_vec(), values, route, cutoff, error_bound }
}

/// Full continuous-spectrum kernel on a grid with a chosen real-axis form.
/// Refuses resonant operators.
pub fn kernel_full_grid_with(p: &ProblemSpec, t: f64, xs: &[f64], ys: &[f64], form: RealAxisForm) -> Result<KernelGrid> {
    check_t(t)?;
    p.check_hypothesis()?;
    require_non_resonant(p)?;
    let raw = kernel_engine(p, t.abs(), xs, ys, form, Window::Full)?;
    Ok(finish_grid(t, xs, ys, raw, KernelRoute::ResolventFull, None))
}

/// [`kernel_full_grid_with`] with the spectral real-axis form.
pub fn kernel_full_grid(p: &ProblemSpec, t: f64, xs: &[f64], ys: &[f64]) -> Result<KernelGrid> {
    kernel_full_grid_with(p, t, xs, ys, RealAxisForm::Spectral)
}

/// [e^{-itH} P_c(H)](x, y).
pub fn kernel_full(p: &ProblemSpec, t: f64, x: f64, y: f64) -> Result<C64> {
    Ok(kernel_full_grid(p, t, &[x], &[y])?.values[0])
}

/// Low-pass kernel (2/pi) int e^{-itk^2} (1 - chi(k)) k^2 phi phi / |f|^2 dk on a grid.
pub fn kernel_lowpass_grid(p: &ProblemSpec, cutoff: CutoffSpec, t: f64, xs: &[f64], ys: &[f64]) -> Result<KernelGrid> {
    check_t(t)?;
    p.check_hypothesis()?;
    require_non_resonant(p)?;
    let raw = kernel_engine(p, t.abs(), xs, ys, RealAxisForm::Spectral, Window::Lowpass(cutoff))?;
    Ok(finish_grid(t, xs, ys, raw, KernelRoute::SpectralLowpass, Some(cutoff)))
}

pub fn kernel_lowpass(p: &ProblemSpec, cutoff: CutoffSpec, t: f64, x: f64, y: f64) -> Result<C64> {
    Ok(kernel_lowpass_grid(p, cutoff, t, &[x], &[y])?.values[0])
}

/// r_l(k, x, y) = k sqrt(xy) J_nu(k min(x,y)) H1_nu(k max(x,y)); conj for k < 0.
pub fn rl_eval(l: f64, k: f64, x: f64, y: f64) -> Result<C64> {
    check_xy(x, y)?;
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain(format!("r_l is evaluated for real k != 0, got {k}")));
    }
    if k < 0.0 {
        return Ok(rl_eval(l, -k, x, y)?.conj());
    }
    let (a, b) = (x.min(y), x.max(y));
    let nu = l + 0.5;
    let j = cylinder(nu, C64::new(k * a, 0.0))?.j;
    let h = cylinder(nu, C64::new(k * b, 0.0))?.h1;
    Ok(j * h * (k * (x * y).sqrt()))
}

/// Coefficients (ascending powers of p) of the window polynomial P_{l,x,y}, x <= y.
fn window_polynomial(l: u32, x: f64, y: f64) -> Vec<f64> {
    match l {
        0 => vec![0.0],
        1 => vec![0.0, -1.0 / (x * y)],
        2 => {
            let c = 3.0 / (2.0 * x * x * y * y);
            vec![0.0, -c * (x * x + y * y), 0.0, c]
        }
        _ => {
            // -3p (5(p^2 - x^2)^2 + 2y^2(3x^2 - 5p^2) + 5y^4) / (8 x^3 y^3)
            let c = -3.0 / (8.0 * x.powi(3) * y.powi(3));
            let (x2, y2) = (x * x, y * y);
            let p1 = 5.0 * x2 * x2 + 6.0 * x2 * y2 + 5.0 * y2 * y2;
            let p3 = -10.0 * x2 - 10.0 * y2;
            vec![0.0, c * p1, 0.0, c * p3, 0.0, c * 5.0]
        }
    }
}

fn poly_eval(c: &[f64], p: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * p + a)
}

/// (2 pi)^{-1/2} int e^{-ikp} d rho_{l,x,y}(p): closed-form Dirac weights at
/// y - x and x + y plus the polynomial window on (-x-y, x-y) by quadrature, x <= y.
pub fn rl_measure(l: u32, k: f64, x: f64, y: f64) -> Result<C64> {
    check_xy(x, y)?;
    if l > 3 {
        return Err(Error::Invalid(format!("explicit measures are tabulated for l <= 3, got {l}")));
    }
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain(format!("r_l is evaluated for real k != 0, got {k}")));
    }
    if k < 0.0 {
        return Ok(rl_measure(l, -k, x, y)?.conj());
    }
    let (a, b) = (x.min(y), x.max(y));
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let dirac = ((I * k * (b - a)).exp() - (I * k * (a + b)).exp() * sign) / PI;
    // Gauss-Legendre on panels with phase change <= 1; the closed-form
    // antiderivative cancels catastrophically when k(x + y) is small
    let poly = window_polynomial(l, a, b);
    let (lo, hi) = (-a - b, a - b);
    let n = (k * (hi - lo)).ceil().max(1.0) as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let acc = integrate_c(|p| (-I * k * p).exp() * poly_eval(&poly, p), &breaks, rule16());
    Ok(dirac - acc / PI)
}

/// |r_l(k, x, y) - (2 pi)^{-1/2} int e^{-ikp} d rho_{l,x,y}|.
pub fn rl_measure_check(l: u32, k: f64, x: f64, y: f64) -> Result<f64> {
    Ok((rl_eval(l as f64, k, x, y)? - rl_measure(l, k, x, y)?).norm())
}

/// |r_{l+1} - r_{l-1} + (2l+1)/(kxy) (d/dk - 1/k) r_l| at (k, x, y), l > 1/2.
pub fn rl_recursion_residual(l: f64, k: f64, x: f64, y: f64) -> Result<f64> {
    check_xy(x, y)?;
    if !(l > 0.5) {
        return Err(Error::Domain(format!("the recursion needs l - 1 > -1/2, got l = {l}")));
    }
    if !(k > 0.0) {
        return Err(Error::Domain(format!("the recursion is checked for k > 0, got {k}")));
    }
    let (a, b) = (x.min(y), x.max(y));
    let nu = l + 0.5;
    let ca = cylinder(nu, C64::new(k * a, 0.0))?;
    let cb = cylinder(nu, C64::new(k * b, 0.0))?;
    let ca_m = cylinder(nu - 1.0, C64::new(k * a, 0.0))?;
    let cb_m = cylinder(nu - 1.0, C64::new(k * b, 0.0))?;
    let dj = ca_m.j - ca.j * (nu / (k * a));
    let dh = cb_m.h1 - cb.h1 * (nu / (k * b));
    let d = (dj * cb.h1 * a + ca.j * dh * b) * (k * (a * b).sqrt());
    let r = rl_eval(l + 1.0, k, x, y)? - rl_eval(l - 1.0, k, x, y)? + d * ((2.0 * l + 1.0) / (k * x * y));
    Ok(r.norm())
}

/// C(l) = sup_{a <= b} (pi/2) sqrt(ab) |J_nu(a) H1_nu(b)|, so |k R_l(k^2+i0)| <= C(l).
/// Grid sup on [1e-4, 1e3]; the large-argument limit is 1.
pub fn born_constant(l: f64) -> Result<f64> {
    let nu = l + 0.5;
    let grid = logspace(1e-4, 1e3, 400);
    let mut js = Vec::with_capacity(grid.len());
    let mut hs = Vec::with_capacity(grid.len());
    for &a in &grid {
        let c = cylinder(nu, C64::new(a, 0.0))?;
        js.push(a.sqrt() * c.j.norm());
        hs.push(a.sqrt() * c.h1.norm());
    }
    let mut best = 1.0f64;
    let mut jmax = 0.0f64;
    for (jb, hb) in js.iter().zip(&hs) {
        jmax = jmax.max(*jb);
        best = best.max(0.5 * PI * jmax * hb);
    }
    Ok(best)
}

/// Born expansion of R_H(k^2+i0)(x, y) = sum_n R_l (-q R_l)^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornSeries {
    pub k: f64,
    pub terms: Vec<C64>,
    pub partial_sums: Vec<C64>,
    /// sup |(pi/2k) T^n u0| / sup |(pi/2k) T^{n-1} u0| on the support of q, n >= 1
    pub contraction: Vec<f64>,
    /// C(l) ||q||_1 / k
    pub bound: f64,
}

struct BornGrid {
    /// per node: s, q(s), sqrt(s) J(ks), sqrt(s) H(ks), panel half-width
    s: Vec<f64>,
    q: Vec<f64>,
    a: Vec<C64>,
    b: Vec<C64>,
    half: Vec<f64>,
    /// break values with the number of nodes before them
    breaks: Vec<(f64, usize)>,
}

fn born_grid(p: &ProblemSpec, k: f64, x: f64, y: f64) -> Result<BornGrid> {
    let x_end = p.end();
    let nu = p.nu();
    let mut pts = vec![0.0, x_end];
    pts.extend(p.q.breakpoints(x_end));
    for v in [x, y] {
        if v < x_end {
            pts.push(v);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let hmax = (2.0 / k).min(0.5);
    let mut fine = vec![0.0];
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]) / hmax).ceil().max(1.0) as usize;
        for i in 1..=n {
            fine.push(if i == n { w[1] } else { w[0] + (w[1] - w[0]) * i as f64 / n as f64 });
        }
    }
    let first = fine[1];
    let mut all: Vec<f64> = vec![0.0];
    all.extend((1..=8).rev().map(|j| first * 3f64.powi(-j)));
    all.extend_from_slice(&fine[1..]);
    let rule = rule16();
    let mut g = BornGrid { s: Vec::new(), q: Vec::new(), a: Vec::new(), b: Vec::new(), half: Vec::new(), breaks: vec![(0.0, 0)] };
    for w in all.windows(2) {
        let (m, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for &tau in &rule.nodes {
            let s = m + h * tau;
            let c = cylinder(nu, C64::new(k * s, 0.0))?;
            g.s.push(s);
            g.q.push(p.q.eval(s));
            g.a.push(c.j * s.sqrt());
            g.b.push(c.h1 * s.sqrt());
            g.half.push(h);
        }
        g.breaks.push((w[1], g.s.len()));
    }
    Ok(g)
}

/// T[g](s) = int r_l(k; s, s') q(s') g(s') ds' at the nodes and at one extra point.
fn apply_t(grid: &BornGrid, k: f64, nu: f64, g: &[C64], at: f64) -> Result<(Vec<C64>, C64)> {
    let rule = rule16();
    let m = rule.m;
    let n = grid.s.len();
    let w1: Vec<C64> = (0..n).map(|i| grid.a[i] * grid.q[i] * g[i]).collect();
    let w2: Vec<C64> = (0..n).map(|i| grid.b[i] * grid.q[i] * g[i]).collect();
    let mut c1 = vec![ZERO; n];
    let mut c2 = vec![ZERO; n];
    let (mut base1, mut base2) = (ZERO, ZERO);
    let mut at_break = None;
    for (bi, &(bv, start)) in grid.breaks.iter().enumerate() {
        if bv == at {
            at_break = Some((base1, base2));
        }
        if bi + 1 == grid.breaks.len() {
            break;
        }
        let h = grid.half[start];
        for i in 0..m {
            let (mut s1, mut s2) = (ZERO, ZERO);
            for j in 0..m {
                s1 += w1[start + j] * rule.cumulative[i][j];
                s2 += w2[start + j] * rule.cumulative[i][j];
            }
            c1[start + i] = base1 + s1 * h;
            c2[start + i] = base2 + s2 * h;
        }
        for j in 0..m {
            base1 += w1[start + j] * (rule.weights[j] * h);
            base2 += w2[start + j] * (rule.weights[j] * h);
        }
    }
    let (total1, total2) = (base1, base2);
    let out: Vec<C64> = (0..n).map(|i| (grid.b[i] * c1[i] + grid.a[i] * (total2 - c2[i])) * k).collect();
    let (i1, i2) = match at_break {
        Some((b1, b2)) => (b1, total2 - b2),
        None if at >= grid.breaks.last().map(|b| b.0).unwrap_or(0.0) => (total1, ZERO),
        None => return Err(Error::Invalid(format!("Born evaluation point {at} is not a grid break"))),
    };
    let c = cylinder(nu, C64::new(k * at, 0.0))?;
    Ok((out, (c.h1 * i1 + c.j * i2) * (k * at.sqrt())))
}

/// Terms 0..=nmax of the Born series at real k > 0.
pub fn born_series(p: &ProblemSpec, nmax: usize, k: f64, x: f64, y: f64) -> Result<BornSeries> {
    check_xy(x, y)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("the Born series is evaluated for k > 0, got {k}")));
    }
    let nu = p.nu();
    let pref = I * PI / (2.0 * k);
    let r0 = rl_eval(p.l, k, x, y)?;
    let mut terms = vec![pref * r0];
    let mut contraction = Vec::new();
    let bound = born_constant(p.l)? * p.q.l1_norm() / k;
    if nmax > 0 && !p.q.is_free() && p.end() > 0.0 {
        let grid = born_grid(p, k, x, y)?;
        let sup = |g: &[C64]| g.iter().zip(&grid.q).filter(|(_, &q)| q != 0.0).map(|(v, _)| v.norm()).fold(0.0, f64::max);
        let mut g: Vec<C64> = grid.s.iter().map(|&s| rl_eval(p.l, k, s, y)).collect::<Result<_>>()?;
        let mut coef = pref;
        for _ in 1..=nmax {
            let (next, at_x) = apply_t(&grid, k, nu, &g, x)?;
            coef *= -pref;
            terms.push(coef * at_x);
            let before = sup(&g);
            contraction.push(if before > 0.0 { PI / (2.0 * k) * sup(&next) / before } else { 0.0 });
            g = next;
        }
    } else {
        terms.resize(nmax + 1, ZERO);
    }
    let mut acc = ZERO;
    let partial_sums = terms.iter().map(|t| {
        acc += t;
        acc
    }).collect();
    Ok(BornSeries { k, terms, partial_sums, contraction, bound })
}

/// The n-th Born term of R_H(k^2+i0)(x, y).
pub fn born_term(p: &ProblemSpec, n: usize, k: f64, x: f64, y: f64) -> Result<C64> {
    Ok(born_series(p, n, k, x, y)?.terms[n])
}

/// R_H(k^2+i0)(x, y) = phi(k^2, x<) f(k, x>) / f(k).
pub fn resolvent_exact(p: &ProblemSpec, k: f64, x: f64, y: f64) -> Result<C64> {
    check_xy(x, y)?;
    let kc = C64::new(k, 0.0);
    let (a, b) = (x.min(y), x.max(y));
    let d = node_data(p, kc, &[b], true)?;
    let phi = RegularSolution::new(p, kc, false)?.at(a)?.value;
    Ok(phi * d.fx[0] / d.jost)
}

/// Smallest k on a log scan where the first observed Born contraction is
/// below 1/2, doubled.
pub fn default_k0(p: &ProblemSpec) -> Result<f64> {
    let x = matching_radius(p);
    for k in logspace(0.05, 1e3, 61) {
        let s = born_series(p, 1, k, x, x)?;
        if s.contraction.first().copied().unwrap_or(0.0) < 0.5 {
            return Ok(2.0 * k);
        }
    }
    Err(Error::NonConvergence { what: "Born contraction below 1/2 for k <= 1e3".into(), iterations: 61 })
}

/// psi(t, x) = e^{-itH} psi0 with its continuous and discrete parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolvedState {
    pub t: f64,
    pub x: Vec<f64>,
    pub continuous: Vec<C64>,
    pub discrete: Vec<C64>,
    pub total: Vec<C64>,
    pub error_bound: f64,
    pub k_max: f64,
}

/// Breakpoints for integrals over the support of psi0 at wave number k.
fn state_breaks(p: &ProblemSpec, support: (f64, f64), k: f64) -> Vec<f64> {
    let mut pts = vec![support.0, support.1];
    pts.extend(p.q.breakpoints(support.1).into_iter().filter(|&b| b > support.0));
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let h = (3.0 / (k + 1.0)).min(0.25);
    let mut out = vec![pts[0]];
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]) / h).ceil().max(1.0) as usize;
        for i in 1..=n {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / n as f64);
        }
    }
    out
}

fn project(p: &ProblemSpec, k: C64, psi0: &(dyn Fn(f64) -> f64 + Sync), support: (f64, f64), xs: &[f64]) -> Result<(C64, Vec<C64>, C64)> {
    let reg = RegularSolution::new(p, k, false)?;
    let rule = rule16();
    let mut acc = ZERO;
    for w in state_breaks(p, support, k.norm()).windows(2) {
        let (m, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (tau, wt) in rule.nodes.iter().zip(&rule.weights) {
            let y = m + h * tau;
            if y > 0.0 {
                acc += reg.at(y)?.value * (psi0(y) * wt * h);
            }
        }
    }
    let phis = xs.iter().map(|&x| reg.at(x).map(|v| v.value)).collect::<Result<Vec<_>>>()?;
    let x_end = matching_radius(p);
    let s = reg.at(x_end)?;
    let fp = f_l(p.l, k, x_end)?;
    let jost = wronskian((fp.value, fp.dx), (s.value, s.dx));
    Ok((acc, phis, jost))
}

/// Evolve a real test state supported in `support` by the spectral
/// representation: continuous part (2/pi) int e^{-itk^2} k^2 phi(x) <phi, psi0> / |f|^2 dk
/// plus sum_n e^{-it lambda_n} gamma_n phi_n(x) <phi_n, psi0>.
pub fn evolve_state(p: &ProblemSpec, psi0: &(dyn Fn(f64) -> f64 + Sync), support: (f64, f64), t: f64, xs: &[f64]) -> Result<EvolvedState> {
    evolve_state_with(p, psi0, support, t, xs, EvolveOptions::default())
}

/// Stopping rule of the k-integral in [`evolve_state_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// stop once two consecutive panel batches stay below amp_tol times the peak amplitude
    pub amp_tol: f64,
    pub k_cap: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { amp_tol: 1e-10, k_cap: 400.0 }
    }
}

pub fn evolve_state_with(
    p: &ProblemSpec,
    psi0: &(dyn Fn(f64) -> f64 + Sync),
    support: (f64, f64),
    t: f64,
    xs: &[f64],
    opts: EvolveOptions,
) -> Result<EvolvedState> {
    check_t(t)?;
    p.check_hypothesis()?;
    if !(support.0 >= 0.0 && support.1 > support.0) {
        return Err(Error::Invalid(format!("state support must satisfy 0 <= a < b, got {support:?}")));
    }
    for &x in xs {
        check_xy(x, x)?;
    }
    require_non_resonant(p)?;
    let x_end = matching_radius(p);
    let width = xs.iter().fold(0.0f64, |m, &v| m.max(v)) + support.1 + 2.0 * x_end;
    let ta = t.abs();
    let h = panel_half_width(ta, width, 3.0);
    let rule = rule16();
    let mut cont = vec![ZERO; xs.len()];
    let mut err = 0.0;
    let mut peak = 0.0f64;
    let mut quiet = 0;
    let mut m0 = 0.0;
    let mut first = true;
    let batch = 8;
    let k_cap = opts.k_cap;
    let mut k_max = 0.0;
    while quiet < 2 {
        let mut panels = Vec::new();
        if first {
            panels.extend(real_panels(h, 2.0 * h * batch as f64));
            first = false;
        } else {
            for i in 0..batch {
                panels.push((m0 + h * (2 * i + 1) as f64, h));
            }
        }
        let last = panels.last().unwrap();
        m0 = last.0 + last.1;
        if m0 > k_cap {
            return Err(Error::NonConvergence { what: format!("state spectrum not decayed below k = {k_cap}"), iterations: 0 });
        }
        let knodes: Vec<f64> = panels.iter().flat_map(|&(m, hh)| rule.nodes.iter().map(move |&tau| m + hh * tau)).collect();
        let data = par_map(&knodes, |&k| project(p, C64::new(k, 0.0), psi0, support, xs)).into_iter().collect::<Result<Vec<_>>>()?;
        let mut batch_peak = 0.0f64;
        for (xi, acc) in cont.iter_mut().enumerate() {
            for (pi, &(m, hh)) in panels.iter().enumerate() {
                let samples: Vec<C64> = (0..rule.m)
                    .map(|n| {
                        let k = knodes[pi * rule.m + n];
                        let (proj, phis, jost) = &data[pi * rule.m + n];
                        phis[xi] * proj * (2.0 / PI * k * k / jost.norm_sqr())
                    })
                    .collect();
                batch_peak = samples.iter().map(|v| v.norm()).fold(batch_peak, f64::max);
                let f = filon_panel(-ta, 0.0, m, hh, &samples);
                *acc += f.value;
                err += f.error;
            }
        }
        peak = peak.max(batch_peak);
        quiet = if batch_peak < opts.amp_tol * peak.max(1e-300) { quiet + 1 } else { 0 };
        k_max = m0;
    }
    let mut disc = vec![ZERO; xs.len()];
    for bs in bound_states(p)? {
        let (proj, phis, _) = project(p, C64::new(0.0, bs.kappa), psi0, support, xs)?;
        let phase = C64::from_polar(1.0, -ta * bs.lambda);
        for (d, ph) in disc.iter_mut().zip(&phis) {
            *d += phase * (bs.gamma * ph.re * proj.re);
        }
    }
    if t < 0.0 {
        cont.iter_mut().chain(disc.iter_mut()).for_each(|v| *v = v.conj());
    }
    let total = cont.iter().zip(&disc).map(|(a, b)| a + b).collect();
    Ok(EvolvedState { t, x: xs.to_vec(), continuous: cont, discrete: disc, total, error_bound: err, k_max })
}

/// One time slice of the decay certificate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub m: f64,
    pub sqrt_t_m: f64,
    pub argmax_x: f64,
    pub argmax_y: f64,
    pub error_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub sup_sqrt_t_m: f64,
    /// least-squares slope of log M(t) against log t
    pub fitted_exponent: f64,
    /// (max - min) / max of sqrt(t) M(t) over t in [10, 100]; None with fewer than two such t
    pub late_spread: Option<f64>,
    pub pass: bool,
}

/// Least-squares slope of log v against log t.
pub fn loglog_slope(ts: &[f64], vs: &[f64]) -> f64 {
    let n = ts.len() as f64;
    let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = vs.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// M(t) = sup over the grid of |K(t, x, y)| for each t, the fitted decay
/// exponent and the spread of sqrt(t) M(t). Refuses resonant and
/// near-resonant operators.
pub fn decay_certificate(p: &ProblemSpec, t_list: &[f64], xs: &[f64], ys: &[f64]) -> Result<DecayReport> {
    if t_list.len() < 2 || t_list.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Invalid("decay certificate needs at least two positive times".into()));
    }
    p.check_hypothesis()?;
    require_non_resonant(p)?;
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let raw = kernel_engine(p, t, xs, ys, RealAxisForm::Spectral, Window::Full)?;
        let g = finish_grid(t, xs, ys, raw, KernelRoute::ResolventFull, None);
        let (m, ax, ay) = g.sup();
        rows.push(DecayRow { t, m, sqrt_t_m: t.sqrt() * m, argmax_x: ax, argmax_y: ay, error_bound: g.error_bound });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let ms: Vec<f64> = rows.iter().map(|r| r.m).collect();
    let fitted_exponent = loglog_slope(&ts, &ms);
    let late: Vec<f64> = rows.iter().filter(|r| r.t >= 10.0 && r.t <= 100.0).map(|r| r.sqrt_t_m).collect();
    let late_spread = if late.len() >= 2 {
        let hi = late.iter().fold(0.0f64, |a, &b| a.max(b));
        let lo = late.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        Some((hi - lo) / hi)
    } else {
        None
    };
    let sup_sqrt_t_m = rows.iter().map(|r| r.sqrt_t_m).fold(0.0, f64::max);
    let pass = sup_sqrt_t_m.is_finite() && (fitted_exponent + 0.5).abs() <= 0.05;
    Ok(DecayReport { rows, sup_sqrt_t_m, fitted_exponent, late_spread, pass })
}
