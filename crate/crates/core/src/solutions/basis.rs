//! Free solution pairs used to factor the Green's function.
//!
//! J/Y pair: R = phi_l(k^2, x), S = -sqrt(pi/2) k^nu sqrt(x) Y_nu(kx),
//! with W(S, R) = 1 and G(x, y) = R(x) S(y) - R(y) S(x).
//! Hankel pair: P = sqrt(x) H1_nu(kx), Q = sqrt(x) H2_nu(kx) with
//! G(x, y) = c_h [P(x) Q(y) - Q(x) P(y)], c_h = -i pi / 4.

use crate::error::Result;
use crate::specfun::{c_l, cylinder, order, phi_l};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };
pub(crate) const C_H: C64 = C64 { re: 0.0, im: -PI / 4.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Pair {
    JY,
    Hankel,
}

/// Values at one point of the two kernel factors, their x-derivatives and
/// (optionally) their k-derivatives.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct PairValues {
    pub u: C64,
    pub du: C64,
    pub v: C64,
    pub dv: C64,
    pub u_k: C64,
    pub v_k: C64,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Basis {
    pub l: f64,
    pub nu: f64,
    /// wavenumber with Re k >= 0 (phi depends on k^2 only)
    pub k: C64,
    pub alpha: C64,
    pub beta: C64,
}

impl Basis {
    pub fn new(l: f64, k: C64) -> Basis {
        let k = if k.re < 0.0 || (k.re == 0.0 && k.im < 0.0) { -k } else { k };
        let nu = order(l);
        let (alpha, beta) = if k.norm() == 0.0 {
            (C64::new(0.0, 0.0), C64::new(0.0, 0.0))
        } else {
            (k.powf(-nu) * (PI / 2.0).sqrt(), -k.powf(nu) * (PI / 2.0).sqrt())
        };
        Basis { l, nu, k, alpha, beta }
    }

    pub fn is_zero(&self) -> bool {
        self.k.norm() == 0.0
    }

    /// (R, R', S, S') and k-derivatives (R_k, S_k) when `dk` is set.
    pub fn jy(&self, x: f64, dk: bool) -> Result<PairValues> {
        let l = self.l;
        if self.is_zero() {
            let c = c_l(l);
            let d = 1.0 / ((2.0 * l + 1.0) * c);
            return Ok(PairValues {
                u: C64::new(c * x.powf(l + 1.0), 0.0),
                du: C64::new(c * (l + 1.0) * x.powf(l), 0.0),
                v: C64::new(d * x.powf(-l), 0.0),
                dv: C64::new(-l * d * x.powf(-l - 1.0), 0.0),
                ..Default::default()
            });
        }
        let k = self.k;
        let nu = self.nu;
        let w = k * x;
        let r = phi_l(l, k * k, x)?;
        let c0 = cylinder(nu, w)?;
        let cm = cylinder(nu - 1.0, w)?;
        let sx = x.sqrt();
        let v = self.beta * sx * c0.y;
        let dy = cm.y - c0.y * nu / w;
        let dv = self.beta * (c0.y / (2.0 * sx) + sx * k * dy);
        let mut out = PairValues { u: r.value, du: r.dx, v, dv, ..Default::default() };
        if dk {
            let cp = cylinder(nu + 1.0, w)?;
            let x32 = x * sx;
            out.u_k = -self.alpha * x32 * cp.j;
            out.v_k = self.beta * x32 * cm.y;
        }
        Ok(out)
    }

    /// (P, P', Q, Q') and k-derivatives when `dk` is set.
    pub fn hankel(&self, x: f64, dk: bool) -> Result<PairValues> {
        let k = self.k;
        let nu = self.nu;
        let w = k * x;
        let c0 = cylinder(nu, w)?;
        let cm = cylinder(nu - 1.0, w)?;
        let sx = x.sqrt();
        let d1 = cm.h1 - c0.h1 * nu / w;
        let d2 = cm.h2 - c0.h2 * nu / w;
        let mut out = PairValues {
            u: sx * c0.h1,
            du: c0.h1 / (2.0 * sx) + sx * k * d1,
            v: sx * c0.h2,
            dv: c0.h2 / (2.0 * sx) + sx * k * d2,
            ..Default::default()
        };
        if dk {
            let x32 = x * sx;
            out.u_k = x32 * d1;
            out.v_k = x32 * d2;
        }
        Ok(out)
    }

    pub fn pair(&self, pair: Pair, x: f64, dk: bool) -> Result<PairValues> {
        match pair {
            Pair::JY => self.jy(x, dk),
            Pair::Hankel => self.hankel(x, dk),
        }
    }

    /// The pair to use at x: the Hankel pair only when exponential growth
    /// in Im k would cancel in the J/Y factorization and |k| x >= 1.
    pub fn pair_at(&self, x: f64, growth_scale: f64) -> Pair {
        if self.is_zero() || self.k.im.abs() * growth_scale <= 3.0 || self.k.norm() * x < 1.0 {
            Pair::JY
        } else {
            Pair::Hankel
        }
    }

    /// Convert J/Y accumulators (int S q u, int R q u) into Hankel
    /// accumulators (int Q q u, int P q u), with k-derivatives.
    pub fn jy_to_hankel(&self, acc: [C64; 4]) -> [C64; 4] {
        let [a, b, da, db] = acc;
        let (al, be) = (self.alpha, self.beta);
        let s = self.nu / self.k;
        let (b1, a1) = (db + b * s, da - a * s);
        [b / al - I * a / be, b / al + I * a / be, b1 / al - I * a1 / be, b1 / al + I * a1 / be]
    }

    /// Inverse of [`Basis::jy_to_hankel`].
    pub fn hankel_to_jy(&self, acc: [C64; 4]) -> [C64; 4] {
        let [cq, cp, dcq, dcp] = acc;
        let (al, be) = (self.alpha, self.beta);
        let s = self.nu / self.k;
        let b = al * (cp + cq) * 0.5;
        let a = be * (cp - cq) / (2.0 * I);
        let b1 = al * (dcp + dcq) * 0.5;
        let a1 = be * (dcp - dcq) / (2.0 * I);
        [a, b, a1 + a * s, b1 - b * s]
    }

    /// Multiplier turning the pair product (u(x) I_v - v(x) I_u) into the
    /// Green's function contribution.
    pub fn kernel_factor(&self, pair: Pair) -> C64 {
        match pair {
            Pair::JY => C64::new(1.0, 0.0),
            Pair::Hankel => C_H,
        }
    }
}
