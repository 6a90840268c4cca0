//! Potentials q(x) on the half line, their moments and the hypothesis checks.

use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;
use std::fmt;
use std::str::FromStr;

/// Tail level defining the truncation radius of a non-compact potential.
pub const TAIL_TOL: f64 = 1e-12;

/// Piecewise cubic Hermite interpolant of tabulated samples; zero beyond the
/// last sample and constant below the first.
#[derive(Clone, Debug, PartialEq)]
pub struct Tabulated {
    pub label: String,
    pub xs: Vec<f64>,
    pub qs: Vec<f64>,
    slopes: Vec<f64>,
}

impl Tabulated {
    pub fn new(label: impl Into<String>, xs: Vec<f64>, qs: Vec<f64>) -> Result<Tabulated> {
        if xs.len() != qs.len() || xs.len() < 2 {
            return Err(Error::Invalid("tabulated potential needs at least two (x, q) rows".into()));
        }
        if xs[0] < 0.0 || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("tabulated x must be non-negative and strictly increasing".into()));
        }
        if qs.iter().chain(&xs).any(|v| !v.is_finite()) {
            return Err(Error::Invalid("tabulated potential contains non-finite values".into()));
        }
        let n = xs.len();
        let mut slopes = vec![0.0; n];
        for i in 0..n {
            slopes[i] = if i == 0 {
                (qs[1] - qs[0]) / (xs[1] - xs[0])
            } else if i == n - 1 {
                (qs[n - 1] - qs[n - 2]) / (xs[n - 1] - xs[n - 2])
            } else {
                let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
                let (d0, d1) = ((qs[i] - qs[i - 1]) / h0, (qs[i + 1] - qs[i]) / h1);
                (h1 * d0 + h0 * d1) / (h0 + h1)
            };
        }
        Ok(Tabulated { label: label.into(), xs, qs, slopes })
    }

    /// Parse a two-column CSV (x, q). A non-numeric first row is a header.
    pub fn from_csv(label: impl Into<String>, text: &str) -> Result<Tabulated> {
        let mut xs = Vec::new();
        let mut qs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 2 {
                return Err(Error::Invalid(format!("line {}: expected two columns", i + 1)));
            }
            match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
                (Ok(x), Ok(q)) => {
                    xs.push(x);
                    qs.push(q);
                }
                _ if i == 0 => continue,
                _ => return Err(Error::Invalid(format!("line {}: not a number", i + 1))),
            }
        }
        Tabulated::new(label, xs, qs)
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x > self.xs[n - 1] {
            return 0.0;
        }
        if x <= self.xs[0] {
            return self.qs[0];
        }
        let i = self.xs.partition_point(|&v| v < x).max(1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.qs[i]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[i]
            + (-2.0 * t3 + 3.0 * t2) * self.qs[i + 1]
            + (t3 - t2) * h * self.slopes[i + 1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Free,
    /// q = -v0 on [a, b]
    Well { v0: f64, a: f64, b: f64 },
    /// q = v0 exp(-x/a)
    ExpDecay { v0: f64, a: f64 },
    /// q = c x^{-p} on (0, b]
    Power { c: f64, p: f64, b: f64 },
    Tabulated(Tabulated),
}

fn parse_args(s: &str, name: &str, n: usize) -> Result<Vec<f64>> {
    let inner = s
        .strip_prefix(name)
        .and_then(|r| r.strip_prefix('('))
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Invalid(format!("malformed preset {s:?}")))?;
    let vals: std::result::Result<Vec<f64>, _> = inner.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|_| Error::Invalid(format!("non-numeric argument in {s:?}")))?;
    if vals.len() != n {
        return Err(Error::Invalid(format!("{name} takes {n} arguments, got {}", vals.len())));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("non-finite argument in {s:?}")));
    }
    Ok(vals)
}

impl FromStr for Potential {
    type Err = Error;

    /// Presets: `free`, `well(v0,a,b)`, `expdecay(v0,a)`, `power(c,p,b)`.
    /// Tabulated potentials are built with [`Tabulated::from_csv`].
    fn from_str(s: &str) -> Result<Potential> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s == "free" {
            return Ok(Potential::Free);
        }
        if s.starts_with("well") {
            let v = parse_args(&s, "well", 3)?;
            if !(v[1] >= 0.0 && v[2] > v[1]) {
                return Err(Error::Invalid("well(v0,a,b) needs 0 <= a < b".into()));
            }
            return Ok(Potential::Well { v0: v[0], a: v[1], b: v[2] });
        }
        if s.starts_with("expdecay") {
            let v = parse_args(&s, "expdecay", 2)?;
            if !(v[1] > 0.0) {
                return Err(Error::Invalid("expdecay(v0,a) needs a > 0".into()));
            }
            return Ok(Potential::ExpDecay { v0: v[0], a: v[1] });
        }
        if s.starts_with("power") {
            let v = parse_args(&s, "power", 3)?;
            if !(v[2] > 0.0) {
                return Err(Error::Invalid("power(c,p,b) needs b > 0".into()));
            }
            return Ok(Potential::Power { c: v[0], p: v[1], b: v[2] });
        }
        if s.starts_with("tabulated") {
            return Err(Error::Invalid("tabulated potentials are loaded from a CSV file".into()));
        }
        Err(Error::Invalid(format!("unknown potential preset {s:?}")))
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Free => write!(f, "free"),
            Potential::Well { v0, a, b } => write!(f, "well({v0},{a},{b})"),
            Potential::ExpDecay { v0, a } => write!(f, "expdecay({v0},{a})"),
            Potential::Power { c, p, b } => write!(f, "power({c},{p},{b})"),
            Potential::Tabulated(t) => write!(f, "tabulated({})", t.label),
        }
    }
}

impl Potential {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::Well { v0, a, b } => {
                if x >= *a && x <= *b {
                    -v0
                } else {
                    0.0
                }
            }
            Potential::ExpDecay { v0, a } => v0 * (-x / a).exp(),
            Potential::Power { c, p, b } => {
                if x > 0.0 && x <= *b {
                    c * x.powf(-p)
                } else {
                    0.0
                }
            }
            Potential::Tabulated(t) => t.eval(x),
        }
    }

    pub fn is_free(&self) -> bool {
        match self {
            Potential::Free => true,
            Potential::Well { v0, .. } | Potential::ExpDecay { v0, .. } => *v0 == 0.0,
            Potential::Power { c, .. } => *c == 0.0,
            Potential::Tabulated(t) => t.qs.iter().all(|&q| q == 0.0),
        }
    }

    /// Points where q or its derivatives jump, inside (0, upto).
    pub fn breakpoints(&self, upto: f64) -> Vec<f64> {
        let pts: Vec<f64> = match self {
            Potential::Well { a, b, .. } => vec![*a, *b],
            Potential::Power { b, .. } => vec![*b],
            Potential::Tabulated(t) => t.xs.clone(),
            _ => vec![],
        };
        pts.into_iter().filter(|&p| p > 0.0 && p < upto).collect()
    }

    /// End of the support when q is compactly supported.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            _ if self.is_free() => Some(0.0),
            Potential::Well { b, .. } | Potential::Power { b, .. } => Some(*b),
            Potential::Tabulated(t) => Some(*t.xs.last().unwrap()),
            _ => None,
        }
    }

    /// Support end, or the smallest x with sigma~_1(x) below [`TAIL_TOL`].
    pub fn effective_end(&self) -> f64 {
        if let Some(b) = self.support_end() {
            return b;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while self.sigma_tilde(1.0, hi) > TAIL_TOL {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.sigma_tilde(1.0, mid) > TAIL_TOL {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn moment_between(&self, j: f64, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        match self {
            _ if self.is_free() => 0.0,
            Potential::Free => 0.0,
            Potential::Well { v0, a: wa, b: wb } => {
                let (lo, hi) = (a.max(*wa), b.min(*wb));
                if hi <= lo {
                    0.0
                } else {
                    v0.abs() * (hi.powf(j + 1.0) - lo.powf(j + 1.0)) / (j + 1.0)
                }
            }
            Potential::Power { c, p, b: pb } => {
                let hi = b.min(*pb);
                if hi <= a {
                    return 0.0;
                }
                let e = j - p + 1.0;
                if a == 0.0 && e <= 0.0 {
                    return f64::INFINITY;
                }
                if e.abs() < 1e-14 {
                    c.abs() * (hi / a).ln()
                } else {
                    c.abs() * (hi.powf(e) - a.powf(e)) / e
                }
            }
            _ => {
                let mut pts = vec![a];
                pts.extend(self.breakpoints(b).into_iter().filter(|&p| p > a));
                pts.push(b);
                pts.windows(2)
                    .map(|w| {
                        integrate_adaptive(|y| y.powf(j) * self.eval(y).abs(), w[0], w[1], 1e-14).unwrap_or(f64::NAN)
                    })
                    .sum()
            }
        }
    }

    /// sigma_j(x) = int_0^x y^j |q(y)| dy.
    pub fn sigma(&self, j: f64, x: f64) -> f64 {
        self.moment_between(j, 0.0, x)
    }

    /// sigma~_j(x) = int_x^inf y^j |q(y)| dy.
    pub fn sigma_tilde(&self, j: f64, x: f64) -> f64 {
        match self {
            Potential::ExpDecay { v0, a } if *v0 != 0.0 => {
                // substitute y = x + a u
                let upper = 80.0 + j.max(0.0) * 4.0;
                let v = integrate_adaptive(|u| (x + a * u).powf(j) * (-u).exp(), 0.0, upper, 1e-14).unwrap_or(f64::NAN);
                v0.abs() * a * (-x / a).exp() * v
            }
            _ => {
                let end = self.support_end().unwrap_or(x);
                self.moment_between(j, x, end)
            }
        }
    }

    /// ||q||_1.
    pub fn l1_norm(&self) -> f64 {
        self.sigma_tilde(0.0, 0.0)
    }

    /// int_0^inf q(x) dx.
    pub fn integral(&self) -> f64 {
        match self {
            _ if self.is_free() => 0.0,
            Potential::Free => 0.0,
            Potential::Well { v0, a, b } => -v0 * (b - a),
            Potential::ExpDecay { v0, a } => v0 * a,
            Potential::Power { c, .. } => c.signum() * self.l1_norm(),
            Potential::Tabulated(t) => {
                let mut pts = vec![0.0];
                pts.extend(t.xs.iter().copied().filter(|&x| x > 0.0));
                pts.windows(2)
                    .map(|w| integrate_adaptive(|y| self.eval(y), w[0], w[1], 1e-14).unwrap_or(f64::NAN))
                    .sum()
            }
        }
    }

    /// sup_x max(0, -q(x)), sampled.
    pub fn depth(&self) -> f64 {
        match self {
            Potential::Well { v0, .. } => v0.max(0.0),
            Potential::ExpDecay { v0, .. } => (-v0).max(0.0),
            Potential::Power { .. } => f64::INFINITY,
            Potential::Tabulated(t) => t.qs.iter().fold(0.0f64, |m, &q| m.max(-q)),
            Potential::Free => 0.0,
        }
    }

    /// The integrability hypothesis: int_0^1 |q| < inf and
    /// int_1^inf x^{max(2, l+1)} |q| < inf.
    pub fn check_hypothesis(&self, l: f64) -> Result<()> {
        let near = self.sigma(0.0, 1.0);
        if !near.is_finite() {
            return Err(Error::Hypothesis(format!("int_0^1 |q| diverges for {self}")));
        }
        let far = self.sigma_tilde(2f64.max(l + 1.0), 1.0);
        if !far.is_finite() {
            return Err(Error::Hypothesis(format!("int_1^inf x^max(2,l+1) |q| diverges for {self}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_strings() {
        for s in ["free", "well(1,0,1)", "expdecay(1,1)", "power(1,3,1)"] {
            let p: Potential = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert!("well(1,2)".parse::<Potential>().is_err());
        assert!("bogus".parse::<Potential>().is_err());
    }

    #[test]
    fn well_moments_are_closed_form() {
        let p: Potential = "well(2,0,1)".parse().unwrap();
        assert!((p.sigma(1.0, 0.5) - 0.25).abs() < 1e-15);
        assert!((p.sigma_tilde(1.0, 0.5) - 0.75).abs() < 1e-15);
        assert_eq!(p.integral(), -2.0);
    }

    #[test]
    fn expdecay_tail_matches_closed_form() {
        let p: Potential = "expdecay(1,1)".parse().unwrap();
        let x = 3.0;
        let exact = (x + 1.0) * (-x as f64).exp();
        assert!((p.sigma_tilde(1.0, x) - exact).abs() < 1e-14);
        let r = p.effective_end();
        assert!(((r + 1.0) * (-r).exp() - TAIL_TOL).abs() < 1e-15);
    }

    #[test]
    fn inverse_cube_violates_hypothesis() {
        let p: Potential = "power(1,3,1)".parse().unwrap();
        assert!(matches!(p.check_hypothesis(0.0), Err(Error::Hypothesis(_))));
        let ok: Potential = "power(1,0.5,1)".parse().unwrap();
        assert!(ok.check_hypothesis(0.0).is_ok());
    }

    #[test]
    fn tabulated_interpolates_and_vanishes_outside() {
        let t = Tabulated::from_csv("t", "x,q\n0,1\n1,2\n2,5\n").unwrap();
        let p = Potential::Tabulated(t);
        assert_eq!(p.eval(1.0), 2.0);
        assert_eq!(p.eval(2.5), 0.0);
        assert!(Tabulated::from_csv("t", "0,1\n0,2\n").is_err());
    }
}
