//! Gauss-Legendre rules, Legendre panels with cumulative integration,
//! composite rules and a Brent root finder.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Legendre polynomials P_0..P_{n} at t.
pub fn legendre_all(n: usize, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n == 0 {
        return;
    }
    out[1] = t;
    for j in 1..n {
        let jf = j as f64;
        out[j + 1] = ((2.0 * jf + 1.0) * t * out[j] - jf * out[j - 1]) / (jf + 1.0);
    }
}

/// Nodes and weights of the m-point Gauss-Legendre rule on [-1, 1], ascending.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..(m + 1) / 2 {
        let mut t = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 1..m {
                let jf = j as f64;
                let p2 = ((2.0 * jf + 1.0) * t * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            let (p, pm) = if m == 1 { (t, 1.0) } else { (p1, p0) };
            dp = mf * (t * p - pm) / (t * t - 1.0);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let wt = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[m - 1 - i] = t;
        w[i] = wt;
        w[m - 1 - i] = wt;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    (x, w)
}

/// An m-point Legendre panel on the reference interval [-1, 1] with the
/// spectral cumulative-integration matrix.
#[derive(Debug, Clone)]
pub struct LegendreRule {
    pub m: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// cumulative[i][j]: weight of sample j in the integral from -1 to nodes[i]
    pub cumulative: Vec<Vec<f64>>,
    /// p[j][n] = P_n(nodes[j]) * weights[j] * (2n+1)/2
    proj: Vec<Vec<f64>>,
}

impl LegendreRule {
    pub fn new(m: usize) -> LegendreRule {
        let (nodes, weights) = gauss_legendre(m);
        let mut proj = vec![vec![0.0; m]; m];
        let mut buf = vec![0.0; m + 1];
        for j in 0..m {
            legendre_all(m, nodes[j], &mut buf);
            for n in 0..m {
                proj[j][n] = buf[n] * weights[j] * (2.0 * n as f64 + 1.0) / 2.0;
            }
        }
        let mut rule = LegendreRule { m, nodes, weights, cumulative: Vec::new(), proj };
        rule.cumulative = rule.nodes.clone().iter().map(|&t| rule.cumulative_weights(t)).collect();
        rule
    }

    /// Weights c_j with sum c_j g(t_j) = integral of the interpolant from -1 to tau.
    pub fn cumulative_weights(&self, tau: f64) -> Vec<f64> {
        let m = self.m;
        let mut p = vec![0.0; m + 1];
        legendre_all(m, tau, &mut p);
        let mut q = vec![0.0; m];
        q[0] = tau + 1.0;
        for n in 1..m {
            q[n] = (p[n + 1] - p[n - 1]) / (2.0 * n as f64 + 1.0);
        }
        (0..m).map(|j| (0..m).map(|n| self.proj[j][n] * q[n]).sum()).collect()
    }

    /// Weights c_j with sum c_j g(t_j) = interpolant at tau.
    pub fn interpolation_weights(&self, tau: f64) -> Vec<f64> {
        let m = self.m;
        let mut p = vec![0.0; m + 1];
        legendre_all(m, tau, &mut p);
        (0..m).map(|j| (0..m).map(|n| self.proj[j][n] * p[n]).sum()).collect()
    }

    /// Legendre coefficients of the interpolant through complex samples.
    pub fn coefficients(&self, g: &[C64]) -> Vec<C64> {
        let m = self.m;
        let mut c = vec![C64::new(0.0, 0.0); m];
        for j in 0..m {
            for n in 0..m {
                c[n] += g[j] * self.proj[j][n];
            }
        }
        c
    }
}

/// Shared 16-point rule used by the solvers and the oscillatory quadrature.
pub fn rule16() -> &'static LegendreRule {
    static RULE: OnceLock<LegendreRule> = OnceLock::new();
    RULE.get_or_init(|| LegendreRule::new(16))
}

/// Shared 24-point rule.
pub fn rule24() -> &'static LegendreRule {
    static RULE: OnceLock<LegendreRule> = OnceLock::new();
    RULE.get_or_init(|| LegendreRule::new(24))
}

/// Composite Gauss-Legendre integral of f over the given breakpoints.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], rule: &LegendreRule) -> f64 {
    let mut s = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            s += wt * h * f(c + h * t);
        }
    }
    s
}

/// Complex version of [`integrate`].
pub fn integrate_c<F: FnMut(f64) -> C64>(mut f: F, breaks: &[f64], rule: &LegendreRule) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, wt) in rule.nodes.iter().zip(&rule.weights) {
            s += f(c + h * t) * (wt * h);
        }
    }
    s
}

/// Adaptive integral by panel bisection: a panel is accepted when the 16-
/// and 24-point rules agree to `tol` relative to the running scale.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (r1, r2) = (rule16(), rule24());
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    let mut scale = 0.0f64;
    while let Some((lo, hi, depth)) = stack.pop() {
        let i1 = integrate(&mut f, &[lo, hi], r1);
        let i2 = integrate(&mut f, &[lo, hi], r2);
        scale = scale.max(i2.abs());
        if (i1 - i2).abs() <= tol * scale.max(f64::MIN_POSITIVE) || (i1 - i2).abs() < 1e-300 {
            total += i2;
        } else if depth > 40 {
            return Err(Error::Quadrature(format!("unresolved panel [{lo}, {hi}]")));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

/// Brent's method for a bracketed root of a real function.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Invalid(format!("root not bracketed in [{a}, {b}]")));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * xm * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1 * xm.signum() };
        fb = f(b);
    }
    Err(Error::NonConvergence { what: "brent root refinement".into(), iterations: 200 })
}

/// Logarithmically spaced points.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Linearly spaced points.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        let s: f64 = x.iter().zip(&w).map(|(t, wt)| wt * t.powi(12)).sum();
        assert!((s - 2.0 / 13.0).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cumulative_matrix_is_exact_for_low_degree() {
        let r = LegendreRule::new(12);
        for (i, &t) in r.nodes.iter().enumerate() {
            let s: f64 = (0..r.m).map(|j| r.cumulative[i][j] * r.nodes[j].powi(5)).sum();
            let exact = (t.powi(6) - 1.0) / 6.0;
            assert!((s - exact).abs() < 1e-14, "{s} {exact}");
        }
    }

    #[test]
    fn interpolation_reproduces_smooth_function() {
        let r = rule16();
        let w = r.interpolation_weights(0.3);
        let s: f64 = (0..r.m).map(|j| w[j] * r.nodes[j].exp()).sum();
        assert!((s - 0.3f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn brent_finds_cosine_root() {
        let r = brent(|x| x.cos(), 1.0, 2.0, 1e-15).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kink() {
        let v = integrate_adaptive(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-12);
    }
}
