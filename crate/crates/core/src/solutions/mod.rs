//! Regular and Jost solutions of -u'' + (l(l+1)/x^2 + q) u = k^2 u and
//! their k-derivatives, by successive approximation of the Volterra
//! equations, plus an independent ODE reference integrator.

mod basis;
mod ode;
mod volterra;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::quad::rule16;
use crate::specfun::{f_l, order, sincospi};
use basis::{Basis, Pair, I};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use volterra::{March, Source};

pub(crate) use volterra::panel_breaks;

/// Default start radius of the backward reference integration.
pub const ORACLE_X_MAX: f64 = 30.0;

/// The operator: angular momentum and potential.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub l: f64,
    pub q: Potential,
    end: f64,
}

impl ProblemSpec {
    pub fn new(l: f64, q: Potential) -> Result<ProblemSpec> {
        if !(l > -0.5) || !l.is_finite() {
            return Err(Error::Invalid(format!("angular momentum must satisfy l > -1/2, got {l}")));
        }
        let end = q.effective_end();
        Ok(ProblemSpec { l, q, end })
    }

    /// Support end, or the truncation radius for non-compact potentials.
    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn nu(&self) -> f64 {
        order(self.l)
    }

    pub fn check_hypothesis(&self) -> Result<()> {
        self.q.check_hypothesis(self.l)
    }

    /// Bound on the neglected tail, sigma~_1 at the truncation radius.
    pub fn truncation_tail(&self) -> f64 {
        if self.q.support_end().is_some() {
            0.0
        } else {
            self.q.sigma_tilde(1.0, self.end)
        }
    }
}

/// Value, x-derivative and optional k-derivative of a solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSample {
    pub value: C64,
    pub dx: C64,
    pub dk: Option<C64>,
    pub iterations_used: usize,
    pub tail_bound: f64,
}

/// phi(k^2, .) on the whole half line for one k.
#[derive(Clone, Debug)]
pub struct RegularSolution {
    march: March,
    flip: bool,
    tail: f64,
}

impl RegularSolution {
    /// Solve for z = k^2; `with_dk` also carries d/dk.
    pub fn new(p: &ProblemSpec, k: C64, with_dk: bool) -> Result<RegularSolution> {
        let basis = Basis::new(p.l, k);
        let flip = basis.k != k;
        let march = March::solve(&p.q, basis, Source::Regular, true, p.end, with_dk)?;
        let tail = march.increment + p.truncation_tail();
        Ok(RegularSolution { march, flip, tail })
    }

    pub fn at(&self, x: f64) -> Result<SolutionSample> {
        check_x(x)?;
        let pt = self.march.eval(x)?;
        let dk = if self.march.with_dk { Some(if self.flip { -pt.uk } else { pt.uk }) } else { None };
        Ok(SolutionSample { value: pt.u, dx: pt.du, dk, iterations_used: self.march.iterations, tail_bound: self.tail })
    }

    pub fn iterations(&self) -> usize {
        self.march.iterations
    }

    /// int_0^X w(x) phi(x)^2 dx over the potential range, by the march's own nodes.
    pub fn integrate_squared<F: FnMut(f64) -> f64>(&self, mut w: F) -> Result<C64> {
        self.march.node_quadrature(|x, u| u * u * w(x))
    }
}

/// Which Jost-type solution: f(k, x) ~ e^{ikx} or its partner ~ e^{-ikx}
/// (equal to conj f(k, x) for real k).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JostBranch {
    Plus,
    Minus,
}

/// f(k, .) for one k.
#[derive(Clone, Debug)]
pub struct JostSolution {
    march: March,
    conj: bool,
    tail: f64,
}

impl JostSolution {
    pub fn new(p: &ProblemSpec, k: C64, with_dk: bool) -> Result<JostSolution> {
        JostSolution::branch(p, k, JostBranch::Plus, with_dk)
    }

    pub fn branch(p: &ProblemSpec, k: C64, branch: JostBranch, with_dk: bool) -> Result<JostSolution> {
        if k.norm() == 0.0 {
            return Err(Error::Domain("the Jost solution is defined for k != 0".into()));
        }
        // f(k, x) = conj f(-conj k, x) moves Re k < 0 to the right half plane
        let conj = k.re < 0.0;
        let kk = if conj { -k.conj() } else { k };
        let basis = Basis::new(p.l, kk);
        let (s, c) = sincospi(0.5 * p.l);
        let amp = (kk * (PI / 2.0)).sqrt();
        let source = match branch {
            JostBranch::Plus => Source::Jost { gp: I * C64::new(c, s) * amp, gq: C64::new(0.0, 0.0) },
            JostBranch::Minus => Source::Jost { gp: C64::new(0.0, 0.0), gq: -I * C64::new(c, -s) * amp },
        };
        let march = March::solve(&p.q, basis, source, false, p.end, with_dk)?;
        let tail = march.increment + p.truncation_tail();
        Ok(JostSolution { march, conj, tail })
    }

    pub fn at(&self, x: f64) -> Result<SolutionSample> {
        check_x(x)?;
        let pt = self.march.eval(x)?;
        let (u, du, uk) = if self.conj { (pt.u.conj(), pt.du.conj(), -pt.uk.conj()) } else { (pt.u, pt.du, pt.uk) };
        let dk = if self.march.with_dk { Some(uk) } else { None };
        Ok(SolutionSample { value: u, dx: du, dk, iterations_used: self.march.iterations, tail_bound: self.tail })
    }

    pub fn iterations(&self) -> usize {
        self.march.iterations
    }
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    Ok(())
}

/// phi(z, x) with phi ~ C_l x^{l+1} at the origin.
pub fn regular_solution(p: &ProblemSpec, z: C64, x: f64) -> Result<SolutionSample> {
    RegularSolution::new(p, z.sqrt(), false)?.at(x)
}

/// d/dk phi(k^2, x).
pub fn regular_solution_dk(p: &ProblemSpec, k: C64, x: f64) -> Result<C64> {
    if k.norm() == 0.0 {
        check_x(x)?;
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(RegularSolution::new(p, k, true)?.at(x)?.dk.unwrap())
}

/// f(k, x) with e^{-ikx} f(k, x) -> 1 as x -> infinity.
pub fn jost_solution(p: &ProblemSpec, k: C64, x: f64) -> Result<SolutionSample> {
    if k.im < 0.0 {
        return Err(Error::Domain("the Jost solution is evaluated for Im k >= 0".into()));
    }
    JostSolution::new(p, k, false)?.at(x)
}

/// d/dk f(k, x).
pub fn jost_solution_dk(p: &ProblemSpec, k: C64, x: f64) -> Result<C64> {
    if k.im < 0.0 {
        return Err(Error::Domain("the Jost solution is evaluated for Im k >= 0".into()));
    }
    Ok(JostSolution::new(p, k, true)?.at(x)?.dk.unwrap())
}

/// d/dk h(k, x), h = e^{-ikx} f(k, x).
pub fn jost_h_dk(p: &ProblemSpec, k: C64, x: f64) -> Result<C64> {
    let s = JostSolution::new(p, k, true)?.at(x)?;
    let e = (-I * k * x).exp();
    Ok(e * (s.dk.unwrap() - I * x * s.value))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OdeDirection {
    ForwardRegular,
    BackwardJost,
}

/// Reference solution by direct integration of the differential equation.
/// Forward: series start at x0 = 1e-4 min(1, 1/(1+|k|)). Backward: Jost
/// data f_l(k, x) at max(30, truncation radius), k = sqrt(z).
pub fn ode_oracle(p: &ProblemSpec, z: C64, direction: OdeDirection, x: f64) -> Result<SolutionSample> {
    check_x(x)?;
    let tol = 1e-13;
    let (y, steps, err) = match direction {
        OdeDirection::ForwardRegular => {
            let x0 = 1e-4 * (1.0 / (1.0 + z.norm().sqrt())).min(1.0);
            if x <= x0 {
                return Err(Error::Domain(format!("x must exceed the start point {x0}")));
            }
            ode::forward_regular(p.l, &p.q, z, x, x0, tol)?
        }
        OdeDirection::BackwardJost => return ode_jost(p, z.sqrt(), x),
    };
    Ok(SolutionSample { value: y[0], dx: y[1], dk: None, iterations_used: steps, tail_bound: err })
}

/// Reference Jost solution for any k with Re k >= 0 or real k.
pub fn ode_jost(p: &ProblemSpec, k: C64, x: f64) -> Result<SolutionSample> {
    check_x(x)?;
    let xm = ORACLE_X_MAX.max(p.end());
    let f = f_l(p.l, k, xm)?;
    let (y, steps, err) = ode::integrate_from(p.l, &p.q, k * k, xm, [f.value, f.dx], x, 1e-13)?;
    Ok(SolutionSample { value: y[0], dx: y[1], dk: None, iterations_used: steps, tail_bound: err })
}

/// Sup norms over the quadrature nodes of [0, x_end] of the first n terms
/// of the global Neumann series phi = sum_j phi_j for the regular solution.
pub fn neumann_terms(p: &ProblemSpec, z: C64, x_end: f64, n: usize) -> Result<Vec<f64>> {
    let basis = Basis::new(p.l, z.sqrt());
    let breaks = panel_breaks(&p.q, &basis, x_end);
    let rule = rule16();
    let mut xs = Vec::new();
    let mut hs = Vec::new();
    let mut pv = Vec::new();
    for w in breaks.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for &t in &rule.nodes {
            let x = c + h * t;
            xs.push(x);
            pv.push(basis.pair(Pair::JY, x, false)?);
        }
        hs.push(h);
    }
    let qv: Vec<f64> = xs.iter().map(|&x| p.q.eval(x)).collect();
    let m = rule.m;
    let mut term: Vec<C64> = pv.iter().map(|v| v.u).collect();
    let mut out = vec![term.iter().fold(0.0f64, |a, t| a.max(t.norm()))];
    for _ in 1..n {
        let mut next = vec![C64::new(0.0, 0.0); term.len()];
        let (mut a0, mut b0) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for (pi, &h) in hs.iter().enumerate() {
            let off = pi * m;
            for i in 0..m {
                let (mut a, mut b) = (a0, b0);
                for j in 0..m {
                    let w = h * rule.cumulative[i][j];
                    a += pv[off + j].v * qv[off + j] * term[off + j] * w;
                    b += pv[off + j].u * qv[off + j] * term[off + j] * w;
                }
                next[off + i] = pv[off + i].u * a - pv[off + i].v * b;
            }
            for j in 0..m {
                let w = h * rule.weights[j];
                a0 += pv[off + j].v * qv[off + j] * term[off + j] * w;
                b0 += pv[off + j].u * qv[off + j] * term[off + j] * w;
            }
        }
        term = next;
        out.push(term.iter().fold(0.0f64, |a, t| a.max(t.norm())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{phi_l, phi_l_dk};

    fn well() -> ProblemSpec {
        ProblemSpec::new(0.0, "well(1,0,1)".parse().unwrap()).unwrap()
    }

    #[test]
    fn free_problem_returns_free_solutions() {
        let p = ProblemSpec::new(1.5, Potential::Free).unwrap();
        let z = C64::new(2.0, 0.3);
        let s = regular_solution(&p, z, 1.3).unwrap();
        let e = phi_l(1.5, z, 1.3).unwrap();
        assert!((s.value - e.value).norm() < 1e-14 * e.value.norm());
        let k = C64::new(1.1, 0.0);
        let d = regular_solution_dk(&p, k, 2.0).unwrap();
        assert!((d - phi_l_dk(1.5, k, 2.0).unwrap()).norm() < 1e-13);
    }

    #[test]
    fn square_well_l0_closed_form() {
        // phi = sin(K x)/K inside, K = sqrt(z + 1)
        let p = well();
        let z = C64::new(1.0, 0.0);
        let kk = (z + 1.0).sqrt();
        let s = regular_solution(&p, z, 0.6).unwrap();
        assert!((s.value - (kk * 0.6).sin() / kk).norm() < 1e-13);
        assert!((s.dx - (kk * 0.6).cos()).norm() < 1e-13);
    }

    #[test]
    fn rejects_bad_angular_momentum() {
        assert!(ProblemSpec::new(-0.5, Potential::Free).is_err());
    }

    #[test]
    fn jost_symmetry_for_negative_k() {
        let p = well();
        let a = jost_solution(&p, C64::new(1.3, 0.0), 0.4).unwrap().value;
        let b = jost_solution(&p, C64::new(-1.3, 0.0), 0.4).unwrap().value;
        assert!((a.conj() - b).norm() < 1e-14);
    }
}
