//! Panel-wise successive approximation for the Volterra equations
//!
//!   forward:  u(x) = s(x) + int_0^x G(x, y) q(y) u(y) dy
//!   backward: u(x) = s(x) - int_x^X G(x, y) q(y) u(y) dy
//!
//! with the separable Green's function of [`super::basis`]. Each panel
//! carries its integrand samples so that u can be evaluated anywhere.

use super::basis::{Basis, Pair, PairValues, I};
use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::rule16;
use num_complex::Complex64 as C64;

pub(crate) const PICARD_TOL: f64 = 1e-13;
pub(crate) const PICARD_MAX: usize = 60;
const GRADING_LEVELS: i32 = 16;
const GEOMETRIC_RATIO: f64 = 1.6;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug)]
pub(crate) enum Source {
    /// s = phi_l(k^2, x)
    Regular,
    /// s = gp P + gq Q; gp, gq proportional to sqrt(k)
    Jost { gp: C64, gq: C64 },
}

#[derive(Clone, Debug)]
struct Panel {
    a: f64,
    b: f64,
    pair: Pair,
    /// accumulators where the march entered the panel: [I_v, I_u, dI_v, dI_u]
    start: [C64; 4],
    /// integrand samples [v q u, u q u, (v q u)_k, (u q u)_k] at the nodes
    g: Vec<[C64; 4]>,
}

#[derive(Clone, Debug)]
pub(crate) struct March {
    pub basis: Basis,
    pub forward: bool,
    pub end: f64,
    pub with_dk: bool,
    source: Source,
    panels: Vec<Panel>,
    /// accumulators after the last panel, in the last panel's pair
    final_acc: [C64; 4],
    final_pair: Pair,
    pub iterations: usize,
    pub increment: f64,
}

/// Point value of a solution and its derivatives.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Point {
    pub u: C64,
    pub du: C64,
    pub uk: C64,
}

fn hankel_from_jy(b: &Basis, r: PairValues) -> PairValues {
    // P = R/alpha + i S/beta, Q = R/alpha - i S/beta
    let (al, be) = (b.alpha, b.beta);
    let s = b.nu / b.k;
    let rk = r.u_k / al + r.u * s / al;
    let sk = r.v_k / be - r.v * s / be;
    PairValues {
        u: r.u / al + I * r.v / be,
        du: r.du / al + I * r.dv / be,
        v: r.u / al - I * r.v / be,
        dv: r.du / al - I * r.dv / be,
        u_k: rk + I * sk,
        v_k: rk - I * sk,
    }
}

fn regular_from_hankel(b: &Basis, h: PairValues) -> (C64, C64, C64) {
    // R = alpha (P + Q) / 2, alpha_k = -nu alpha / k
    let al = b.alpha;
    let r = al * (h.u + h.v) * 0.5;
    let dr = al * (h.du + h.dv) * 0.5;
    let rk = al * (h.u_k + h.v_k) * 0.5 - r * b.nu / b.k;
    (r, dr, rk)
}

impl March {
    fn source_at(&self, pair: Pair, pv: &PairValues, x: f64) -> Result<(C64, C64, C64)> {
        let b = &self.basis;
        match (self.source, pair) {
            (Source::Regular, Pair::JY) => Ok((pv.u, pv.du, pv.u_k)),
            (Source::Regular, Pair::Hankel) => Ok(regular_from_hankel(b, *pv)),
            (Source::Jost { gp, gq }, _) => {
                let h = if pair == Pair::Hankel { *pv } else { hankel_from_jy(b, *pv) };
                let _ = x;
                let (gpk, gqk) = (gp / (2.0 * b.k), gq / (2.0 * b.k));
                Ok((gp * h.u + gq * h.v, gp * h.du + gq * h.dv, gpk * h.u + gp * h.u_k + gqk * h.v + gq * h.v_k))
            }
        }
    }

    fn sign(&self) -> f64 {
        if self.forward {
            1.0
        } else {
            -1.0
        }
    }

    fn combine(&self, pair: Pair, pv: &PairValues, src: (C64, C64, C64), acc: &[C64; 4]) -> Point {
        let f = self.basis.kernel_factor(pair) * self.sign();
        let [iv, iu, div, diu] = *acc;
        Point {
            u: src.0 + f * (pv.u * iv - pv.v * iu),
            du: src.1 + f * (pv.du * iv - pv.dv * iu),
            uk: src.2 + f * (pv.u_k * iv + pv.u * div - pv.v_k * iu - pv.v * diu),
        }
    }

    pub fn solve(
        q: &Potential,
        basis: Basis,
        source: Source,
        forward: bool,
        end: f64,
        with_dk: bool,
    ) -> Result<March> {
        let mut m = March {
            basis,
            forward,
            end,
            with_dk,
            source,
            panels: Vec::new(),
            final_acc: [ZERO; 4],
            final_pair: Pair::JY,
            iterations: 0,
            increment: 0.0,
        };
        if end <= 0.0 || q.is_free() {
            m.final_pair = basis.pair_at(end.max(0.0), end);
            return Ok(m);
        }
        let breaks = panel_breaks(q, &basis, end);
        let rule = rule16();
        let nm = rule.m;
        let mut acc = [ZERO; 4];
        let order: Vec<usize> =
            if forward { (0..breaks.len() - 1).collect() } else { (0..breaks.len() - 1).rev().collect() };
        let mut current: Option<Pair> = None;
        for idx in order {
            let (a, b) = (breaks[idx], breaks[idx + 1]);
            let mid = 0.5 * (a + b);
            let pair = basis.pair_at(mid, end);
            if let Some(prev) = current {
                if prev != pair {
                    acc = match pair {
                        Pair::Hankel => basis.jy_to_hankel(acc),
                        Pair::JY => basis.hankel_to_jy(acc),
                    };
                }
            }
            current = Some(pair);
            let h = 0.5 * (b - a);
            let xs: Vec<f64> = rule.nodes.iter().map(|t| mid + h * t).collect();
            let mut pv = Vec::with_capacity(nm);
            let mut src = Vec::with_capacity(nm);
            let mut qv = Vec::with_capacity(nm);
            for &x in &xs {
                let p = basis.pair(pair, x, with_dk)?;
                src.push(m.source_at(pair, &p, x)?);
                pv.push(p);
                qv.push(q.eval(x));
            }
            // weights from node i to the entry end of the panel
            let cw = |i: usize, j: usize| -> f64 {
                if forward {
                    h * rule.cumulative[i][j]
                } else {
                    h * (rule.weights[j] - rule.cumulative[i][j])
                }
            };
            let mut sol: Vec<Point> = (0..nm).map(|i| m.combine(pair, &pv[i], src[i], &acc)).collect();
            let mut g = vec![[ZERO; 4]; nm];
            let mut it = 0;
            loop {
                for j in 0..nm {
                    g[j][0] = pv[j].v * qv[j] * sol[j].u;
                    g[j][1] = pv[j].u * qv[j] * sol[j].u;
                }
                let mut diff = 0.0f64;
                let mut scale = 0.0f64;
                for i in 0..nm {
                    let mut a2 = acc;
                    for j in 0..nm {
                        let w = cw(i, j);
                        a2[0] += g[j][0] * w;
                        a2[1] += g[j][1] * w;
                    }
                    let p = m.combine(pair, &pv[i], src[i], &a2);
                    diff = diff.max((p.u - sol[i].u).norm());
                    scale = scale.max(p.u.norm());
                    sol[i].u = p.u;
                    sol[i].du = p.du;
                }
                it += 1;
                if diff <= PICARD_TOL * scale || diff == 0.0 {
                    m.increment = m.increment.max(diff / scale.max(f64::MIN_POSITIVE));
                    break;
                }
                if it >= PICARD_MAX {
                    return Err(Error::NonConvergence {
                        what: format!("Volterra iteration on panel [{a}, {b}] at k={}", basis.k),
                        iterations: it,
                    });
                }
            }
            for j in 0..nm {
                g[j][0] = pv[j].v * qv[j] * sol[j].u;
                g[j][1] = pv[j].u * qv[j] * sol[j].u;
            }
            m.iterations = m.iterations.max(it);
            if with_dk {
                let mut itk = 0;
                let mut uk: Vec<C64> = (0..nm).map(|i| m.combine(pair, &pv[i], src[i], &acc).uk).collect();
                loop {
                    for j in 0..nm {
                        let qu = qv[j] * sol[j].u;
                        g[j][2] = pv[j].v_k * qu + pv[j].v * qv[j] * uk[j];
                        g[j][3] = pv[j].u_k * qu + pv[j].u * qv[j] * uk[j];
                    }
                    let mut diff = 0.0f64;
                    let mut scale = 0.0f64;
                    for i in 0..nm {
                        let mut a2 = acc;
                        for j in 0..nm {
                            let w = cw(i, j);
                            a2[0] += g[j][0] * w;
                            a2[1] += g[j][1] * w;
                            a2[2] += g[j][2] * w;
                            a2[3] += g[j][3] * w;
                        }
                        let p = m.combine(pair, &pv[i], src[i], &a2);
                        diff = diff.max((p.uk - uk[i]).norm());
                        scale = scale.max(p.uk.norm());
                        uk[i] = p.uk;
                    }
                    itk += 1;
                    if diff <= PICARD_TOL * scale || diff == 0.0 {
                        break;
                    }
                    if itk >= PICARD_MAX {
                        return Err(Error::NonConvergence {
                            what: format!("k-derivative iteration on panel [{a}, {b}] at k={}", basis.k),
                            iterations: itk,
                        });
                    }
                }
                for j in 0..nm {
                    let qu = qv[j] * sol[j].u;
                    g[j][2] = pv[j].v_k * qu + pv[j].v * qv[j] * uk[j];
                    g[j][3] = pv[j].u_k * qu + pv[j].u * qv[j] * uk[j];
                }
                m.iterations = m.iterations.max(itk);
            }
            let start = acc;
            for j in 0..nm {
                let w = h * rule.weights[j];
                for c in 0..4 {
                    acc[c] += g[j][c] * w;
                }
            }
            m.panels.push(Panel { a, b, pair, start, g });
        }
        if !forward {
            m.panels.reverse();
        }
        m.final_acc = acc;
        m.final_pair = current.unwrap_or(Pair::JY);
        Ok(m)
    }

    /// Solution, x-derivative and k-derivative at x > 0.
    pub fn eval(&self, x: f64) -> Result<Point> {
        let b = &self.basis;
        let inside = !self.panels.is_empty() && x < self.end;
        if !inside {
            if !self.forward || self.panels.is_empty() {
                let pair = b.pair_at(x, x);
                let pv = b.pair(pair, x, self.with_dk)?;
                let src = self.source_at(pair, &pv, x)?;
                if self.forward {
                    return Ok(self.combine(pair, &pv, src, &[ZERO; 4]));
                }
                return Ok(Point { u: src.0, du: src.1, uk: src.2 });
            }
            let pair = b.pair_at(x, x);
            let acc = match (self.final_pair, pair) {
                (Pair::JY, Pair::Hankel) => b.jy_to_hankel(self.final_acc),
                (Pair::Hankel, Pair::JY) => b.hankel_to_jy(self.final_acc),
                _ => self.final_acc,
            };
            let pv = b.pair(pair, x, self.with_dk)?;
            let src = self.source_at(pair, &pv, x)?;
            return Ok(self.combine(pair, &pv, src, &acc));
        }
        let idx = self.panels.partition_point(|p| p.b < x).min(self.panels.len() - 1);
        let p = &self.panels[idx];
        let rule = rule16();
        let h = 0.5 * (p.b - p.a);
        let tau = ((x - 0.5 * (p.a + p.b)) / h).clamp(-1.0, 1.0);
        let cw = rule.cumulative_weights(tau);
        let mut acc = p.start;
        for j in 0..rule.m {
            let w = if self.forward { h * cw[j] } else { h * (rule.weights[j] - cw[j]) };
            for c in 0..4 {
                acc[c] += p.g[j][c] * w;
            }
        }
        let pv = b.pair(p.pair, x, self.with_dk)?;
        let src = self.source_at(p.pair, &pv, x)?;
        Ok(self.combine(p.pair, &pv, src, &acc))
    }

    /// Integral of w(x) q(x) u(x)^2-type products over the marched range,
    /// using the stored node samples: returns sum over nodes of f(x, u).
    pub fn node_quadrature<F: FnMut(f64, C64) -> C64>(&self, mut f: F) -> Result<C64> {
        let rule = rule16();
        let mut s = ZERO;
        for p in &self.panels {
            let h = 0.5 * (p.b - p.a);
            let c = 0.5 * (p.a + p.b);
            for j in 0..rule.m {
                let x = c + h * rule.nodes[j];
                let u = self.eval_node(p, j, x)?;
                s += f(x, u) * (h * rule.weights[j]);
            }
        }
        Ok(s)
    }

    fn eval_node(&self, p: &Panel, j: usize, x: f64) -> Result<C64> {
        let rule = rule16();
        let h = 0.5 * (p.b - p.a);
        let mut acc = p.start;
        for i in 0..rule.m {
            let w = if self.forward {
                h * rule.cumulative[j][i]
            } else {
                h * (rule.weights[i] - rule.cumulative[j][i])
            };
            for c in 0..2 {
                acc[c] += p.g[i][c] * w;
            }
        }
        let pv = self.basis.pair(p.pair, x, false)?;
        let src = self.source_at(p.pair, &pv, x)?;
        Ok(self.combine(p.pair, &pv, src, &acc).u)
    }
}

/// Breakpoints on [0, end]: potential jumps, the pair switch, a width cap
/// resolving the local wavelength, and geometric grading at the origin.
pub(crate) fn panel_breaks(q: &Potential, basis: &Basis, end: f64) -> Vec<f64> {
    let mut pts = vec![0.0, end];
    pts.extend(q.breakpoints(end));
    let k = basis.k;
    if k.norm() > 0.0 {
        let xs = 1.0 / k.norm();
        if xs < end && basis.pair_at(0.5 * xs, end) != basis.pair_at(1.5 * xs, end) {
            pts.push(xs);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * end);
    let qmax = q_sup(q, end);
    let hmax = (1.5 / (k.norm_sqr() + qmax).sqrt()).min(1.0);
    let mut out = vec![0.0];
    for w in pts.windows(2) {
        let n = ((w[1] - w[0]) / hmax).ceil().max(1.0) as usize;
        for i in 1..=n {
            let b = w[0] + (w[1] - w[0]) * i as f64 / n as f64;
            // keep b/a bounded so the singular free factors stay resolved
            let a = *out.last().unwrap();
            if a > 0.0 && b > GEOMETRIC_RATIO * a {
                let m = ((b / a).ln() / GEOMETRIC_RATIO.ln()).ceil() as i32;
                let r = (b / a).powf(1.0 / m as f64);
                for j in 1..m {
                    out.push(a * r.powi(j));
                }
            }
            out.push(b);
        }
    }
    let first = out[1];
    let mut graded: Vec<f64> = (1..=GRADING_LEVELS).rev().map(|j| first * GEOMETRIC_RATIO.powi(-j)).collect();
    graded.insert(0, 0.0);
    graded.extend_from_slice(&out[1..]);
    graded
}

fn q_sup(q: &Potential, end: f64) -> f64 {
    match q {
        Potential::Free => 0.0,
        Potential::Well { v0, .. } => v0.abs(),
        Potential::ExpDecay { v0, .. } => v0.abs(),
        Potential::Tabulated(t) => t.qs.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        Potential::Power { .. } => {
            let n = 200;
            (1..=n).map(|i| q.eval(end * i as f64 / n as f64).abs()).fold(0.0, f64::max)
        }
    }
}
