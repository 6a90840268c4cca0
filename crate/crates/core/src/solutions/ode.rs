//! Independent reference integrator: 4-stage Gauss-Legendre collocation
//! (order 8) for u'' = (l(l+1)/x^2 + q(x) - z) u with step-doubling control.

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::LegendreRule;
use num_complex::Complex64 as C64;
use std::sync::OnceLock;

const STAGES: usize = 4;

struct Tableau {
    c: [f64; STAGES],
    a: [[f64; STAGES]; STAGES],
    b: [f64; STAGES],
}

fn tableau() -> &'static Tableau {
    static T: OnceLock<Tableau> = OnceLock::new();
    T.get_or_init(|| {
        let r = LegendreRule::new(STAGES);
        let mut t = Tableau { c: [0.0; STAGES], a: [[0.0; STAGES]; STAGES], b: [0.0; STAGES] };
        for i in 0..STAGES {
            t.c[i] = 0.5 * (1.0 + r.nodes[i]);
            t.b[i] = 0.5 * r.weights[i];
            for j in 0..STAGES {
                t.a[i][j] = 0.5 * r.cumulative[i][j];
            }
        }
        t
    })
}

fn solve_dense(m: &mut [[C64; 2 * STAGES]; 2 * STAGES], rhs: &mut [C64; 2 * STAGES]) -> Result<()> {
    let n = 2 * STAGES;
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap()).unwrap();
        if m[piv][col].norm() == 0.0 {
            return Err(Error::NonConvergence { what: "singular collocation system".into(), iterations: 0 });
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f.norm() == 0.0 {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[row][c] -= f * v;
            }
            let v = rhs[col];
            rhs[row] -= f * v;
        }
    }
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for c in row + 1..n {
            s -= m[row][c] * rhs[c];
        }
        rhs[row] = s / m[row][row];
    }
    Ok(())
}

struct Equation<'a> {
    l: f64,
    q: &'a Potential,
    z: C64,
}

impl Equation<'_> {
    fn coef(&self, x: f64) -> C64 {
        C64::new(self.l * (self.l + 1.0) / (x * x) + self.q.eval(x), 0.0) - self.z
    }

    /// One collocation step of signed length h from (x, y).
    fn step(&self, x: f64, y: [C64; 2], h: f64) -> Result<[C64; 2]> {
        let t = tableau();
        let v: Vec<C64> = (0..STAGES).map(|i| self.coef(x + t.c[i] * h)).collect();
        // unknowns: stage values (U_i, W_i) with U' = W, W' = v U
        let n = 2 * STAGES;
        let mut m = [[C64::new(0.0, 0.0); 2 * STAGES]; 2 * STAGES];
        let mut rhs = [C64::new(0.0, 0.0); 2 * STAGES];
        for i in 0..STAGES {
            m[2 * i][2 * i] += 1.0;
            m[2 * i + 1][2 * i + 1] += 1.0;
            for j in 0..STAGES {
                let ha = h * t.a[i][j];
                m[2 * i][2 * j + 1] -= C64::new(ha, 0.0);
                m[2 * i + 1][2 * j] -= v[j] * ha;
            }
            rhs[2 * i] = y[0];
            rhs[2 * i + 1] = y[1];
        }
        let _ = n;
        solve_dense(&mut m, &mut rhs)?;
        let mut out = y;
        for j in 0..STAGES {
            out[0] += rhs[2 * j + 1] * (h * t.b[j]);
            out[1] += v[j] * rhs[2 * j] * (h * t.b[j]);
        }
        Ok(out)
    }

    /// Integrate from x0 to x1 (either direction), stopping at the breakpoints.
    fn integrate(&self, x0: f64, x1: f64, mut y: [C64; 2], tol: f64) -> Result<([C64; 2], usize, f64)> {
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let mut stops: Vec<f64> = self
            .q
            .breakpoints(x0.max(x1))
            .into_iter()
            .filter(|&p| (p - x0) * dir > 0.0 && (x1 - p) * dir > 0.0)
            .collect();
        stops.sort_by(|a, b| (a * dir).partial_cmp(&(b * dir)).unwrap());
        stops.push(x1);
        let mut x = x0;
        let mut h = dir * (1e-3 * x0.abs().max(1e-3)).min((x1 - x0).abs());
        let mut steps = 0usize;
        let mut err_total = 0.0f64;
        for &target in &stops {
            while (target - x) * dir > 0.0 {
                if (x + h - target) * dir > 0.0 {
                    h = target - x;
                }
                let full = self.step(x, y, h)?;
                let half = self.step(x, y, 0.5 * h)?;
                let two = self.step(x + 0.5 * h, half, 0.5 * h)?;
                let scale = two[0].norm() + two[1].norm() * x.abs().max(1e-300).min(1.0);
                let err = ((two[0] - full[0]).norm() + (two[1] - full[1]).norm() * x.abs().min(1.0)) / 255.0;
                if err <= tol * scale.max(1e-300) {
                    x = if (target - (x + h)).abs() <= 1e-15 * target.abs().max(1.0) { target } else { x + h };
                    y = two;
                    steps += 1;
                    err_total += err / scale.max(1e-300);
                    let grow = if err == 0.0 { 2.0 } else { (0.9 * (tol * scale / err).powf(1.0 / 9.0)).min(2.0) };
                    h *= grow;
                } else {
                    h *= (0.9 * (tol * scale / err).powf(1.0 / 9.0)).max(0.2);
                }
                if h.abs() < 1e-14 * x.abs().max(1e-300) {
                    return Err(Error::NonConvergence {
                        what: format!("reference integrator step underflow at x={x}; raise the start point"),
                        iterations: steps,
                    });
                }
                if steps > 2_000_000 {
                    return Err(Error::NonConvergence { what: "reference integrator step budget".into(), iterations: steps });
                }
            }
        }
        Ok((y, steps, err_total))
    }
}

/// Regular solution by forward integration from series data at x0.
pub(crate) fn forward_regular(l: f64, q: &Potential, z: C64, x: f64, x0: f64, tol: f64) -> Result<([C64; 2], usize, f64)> {
    let eq = Equation { l, q, z };
    let cl = crate::specfun::c_l(l);
    let c = (C64::new(q.eval(x0), 0.0) - z) / (4.0 * l + 6.0);
    let u = cl * x0.powf(l + 1.0) * (1.0 + c * x0 * x0);
    let du = cl * x0.powf(l) * ((l + 1.0) + c * (l + 3.0) * x0 * x0);
    eq.integrate(x0, x, [u, du], tol)
}

/// Solution with Cauchy data y at x_start integrated to x.
pub(crate) fn integrate_from(l: f64, q: &Potential, z: C64, x_start: f64, y: [C64; 2], x: f64, tol: f64) -> Result<([C64; 2], usize, f64)> {
    Equation { l, q, z }.integrate(x_start, x, y, tol)
}
