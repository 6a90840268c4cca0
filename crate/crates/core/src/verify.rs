//! Sampled fitted-constant checks of the solution and Jost function estimates.
//!
//! Each inequality `|Q| <= C * E` gets one lemma id. The constant is fitted
//! as the largest ratio |Q|/E on a coarse log grid and then asserted, with
//! 10% slack, on a refined grid whose new points are jittered by a seeded RNG.

use crate::error::{Error, Result};
use crate::par::par_map;
use crate::quad::{integrate_adaptive, logspace};
use crate::scattering::{matching_radius, normalized_jost};
use crate::solutions::{JostSolution, ProblemSpec, RegularSolution};
use crate::specfun::{bessel, f_l, green_free, green_free_dk, h_l_dk, phi_l, phi_l_dk, psi_l, psi_l_dk, BesselKind};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SLACK: f64 = 0.1;

/// Largest |Im k| x admitted on the complex rays.
pub const MAX_GROWTH: f64 = 50.0;

const NOISE: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Domain {
    /// complex k on the rays arg k in {0, pi/4, pi/2}
    Rays,
    Real,
    /// real k >= 1, x unused
    RealLarge,
    /// real k <= 1, x unused
    RealSmall,
    /// real k, x unused
    RealK,
    /// complex k on the rays, x unused
    RaysK,
    /// pairs y <= x on the rays
    RaysPairs,
    /// r = k x >= 1
    Argument,
}

#[derive(Clone, Copy, Debug)]
pub struct Lemma {
    pub id: &'static str,
    pub topic: &'static str,
    pub statement: &'static str,
    domain: Domain,
    /// depends on q (as opposed to the free solutions only)
    pub perturbed: bool,
}

const fn lemma(id: &'static str, topic: &'static str, statement: &'static str, domain: Domain, perturbed: bool) -> Lemma {
    Lemma { id, topic, statement, domain, perturbed }
}

/// The checked inequalities, in report order.
pub const LEMMAS: &[Lemma] = &[
    lemma("estphil", "free regular solution", "|phi_l| <= C (x/(1+|k|x))^(l+1) e^(|Im k|x)", Domain::Rays, false),
    lemma(
        "estGl",
        "free Green function",
        "|G_l| <= C (x/(1+|k|x))^(l+1) ((1+|k|y)/y)^l e^(|Im k|(x-y)), y <= x",
        Domain::RaysPairs,
        false,
    ),
    lemma(
        "estphi",
        "regular solution perturbation",
        "|phi - phi_l| <= C (x/(1+|k|x))^(l+1) e^(|Im k|x) int_0^x y|q|/(1+|k|y)",
        Domain::Rays,
        true,
    ),
    lemma("partial-z-phil", "k-derivative of the free regular solution", "|d_k phi_l| <= C |k|x (x/(1+|k|x))^(l+2) e^(|Im k|x)", Domain::Rays, false),
    lemma(
        "partial-z-Gl",
        "k-derivative of the free Green function",
        "|d_k G_l| <= C |k|x (x/(1+|k|x))^(l+2) ((1+|k|y)/y)^l e^(|Im k|(x-y)), y <= x",
        Domain::RaysPairs,
        false,
    ),
    lemma(
        "partial-z-diff-phi",
        "k-derivative of the regular solution perturbation",
        "|d_k phi - d_k phi_l| <= C |k|x (x/(1+|k|x))^(l+2) e^(|Im k|x) int_0^x y|q|/(1+|k|y)",
        Domain::Rays,
        true,
    ),
    lemma("est-psi-l", "free Weyl solution", "|psi_l| <= C (x/(1+|k|x))^(-l) e^(-|Im k|x)", Domain::Rays, false),
    lemma(
        "partial-z-psi-l",
        "k-derivative of the free Weyl solution",
        "|d_k psi_l| <= C e^(-|Im k|x) |k|x ((1+|k|x)/x)^(l-1) (l >= 1/2), |k|^l x (|k|x/(1+|k|x))^l (l < 1/2)",
        Domain::Rays,
        false,
    ),
    lemma(
        "estpsi",
        "Jost solution perturbation",
        "|f - f_l| <= C (|k|x/(1+|k|x))^(-l) e^(-|Im k|x) int_x^inf y|q|/(1+|k|y)",
        Domain::Rays,
        true,
    ),
    lemma("est-hlk", "k-derivative of the free h_l", "|d_k h_l| <= C/(x k^2) ((1+kx)/(kx))^(l-1)", Domain::Real, false),
    lemma("est-hk", "k-derivative of the h perturbation", "|d_k h - d_k h_l| <= C/k ((1+kx)/(kx))^l int_x^inf y|q|", Domain::Real, true),
    lemma("asym-f", "Jost function modulus at high energy", "||f(k)| |k|^l - 1| <= C/(1+k)", Domain::RealK, true),
    lemma("F-to-1", "F tends to one", "|F(k) - 1| <= C/(1+|k|), Im k >= 0", Domain::RaysK, true),
    lemma("F=1", "first-order high-energy term of F", "|k| |F(k) - 1 - (i/2k) int q| <= C/|k|, k >= 1", Domain::RealLarge, true),
    lemma("F-near-zero", "F away from zero at threshold", "|F(k)|^(-1) <= C |k|^(-min(l+3/2,2)), 0 < k <= 1", Domain::RealSmall, true),
    lemma("F-prime", "derivative of F", "|F'(k)| <= C (1+k)^(-1) min(1,k)^min(0,2l)", Domain::RealK, true),
    lemma("bessel-remainder", "Bessel large-argument remainder", "|sqrt(pi r/2) J_nu(r) - cos(r - nu pi/2 - pi/4)| <= C/r, r >= 1", Domain::Argument, false),
    lemma(
        "bessel-remainder-deriv",
        "derivative of the Bessel remainder",
        "|d_r(sqrt(pi r/2) J_nu(r)) + sin(r - nu pi/2 - pi/4)| <= C/r, r >= 1",
        Domain::Argument,
        false,
    ),
];

pub fn lemma_info(id: &str) -> Option<&'static Lemma> {
    LEMMAS.iter().find(|l| l.id == id)
}

/// Log grids in k and x; the fine stage splits every cell once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyGrid {
    pub k_min: f64,
    pub k_max: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub nk: usize,
    pub nx: usize,
    pub seed: u64,
}

impl Default for VerifyGrid {
    fn default() -> Self {
        VerifyGrid { k_min: 1e-3, k_max: 1e3, x_min: 1e-2, x_max: 50.0, nk: 61, nx: 37, seed: 0 }
    }
}

impl VerifyGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.k_min > 0.0
            && self.k_max > self.k_min
            && self.x_min > 0.0
            && self.x_max > self.x_min
            && self.nk >= 2
            && self.nx >= 2
            && self.k_max.is_finite()
            && self.x_max.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad verify grid {self:?}")))
        }
    }

    fn coarse(&self) -> (Vec<f64>, Vec<f64>) {
        (logspace(self.k_min, self.k_max, self.nk), logspace(self.x_min, self.x_max, self.nx))
    }

    fn fine(&self, lemma_index: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (lemma_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let (k, x) = self.coarse();
        (refine(&k, &mut rng), refine(&x, &mut rng))
    }

    pub fn describe(&self) -> String {
        format!(
            "coarse: k logspace({:e}, {:e}, {}), x,y logspace({:e}, {:e}, {}); fine: each log cell split at a \
             seeded point in its middle half (seed {}); rays arg k in {{0, pi/4, pi/2}} with |Im k| max(x, X) <= {}",
            self.k_min, self.k_max, self.nk, self.x_min, self.x_max, self.nx, self.seed, MAX_GROWTH
        )
    }
}

fn refine(v: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut out = vec![v[0]];
    for w in v.windows(2) {
        let s: f64 = rng.gen_range(0.25..0.75);
        out.push((w[0].ln() + s * (w[1].ln() - w[0].ln())).exp());
        out.push(w[1]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Checked,
    Inconclusive,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckReport {
    pub lemma_id: String,
    pub statement: String,
    pub potential_id: String,
    pub l: f64,
    #[serde(rename = "fitted_C")]
    pub fitted_c: f64,
    /// largest observed/envelope on the fine grid
    pub max_ratio: f64,
    pub pass: bool,
    pub grid_spec: String,
    pub samples: usize,
    /// the quantity vanished to rounding everywhere (free potential)
    pub degenerate: bool,
    /// (Re k, Im k, x, y) of the largest fine-grid ratio
    pub argmax: Option<[f64; 4]>,
    pub status: CheckStatus,
    pub note: Option<String>,
}

struct Obs {
    obs: f64,
    env: f64,
    reference: f64,
}

impl Obs {
    fn ratio(&self) -> f64 {
        if !self.obs.is_finite() {
            return f64::INFINITY;
        }
        if self.obs <= NOISE * self.reference {
            return 0.0;
        }
        if self.env > 0.0 {
            self.obs / self.env
        } else {
            f64::INFINITY
        }
    }
}

/// int_a^b y |q(y)| / (1 + kabs y) dy, split at the potential's breakpoints.
fn moment(p: &ProblemSpec, a: f64, b: f64, kabs: f64) -> Result<f64> {
    let b = b.min(p.end());
    if p.q.is_free() || b <= a {
        return Ok(0.0);
    }
    let mut pts = vec![a, b];
    pts.extend(p.q.breakpoints(b).into_iter().filter(|&s| s > a && s < b));
    pts.sort_by(|u, v| u.partial_cmp(v).unwrap());
    let mut s = 0.0;
    for w in pts.windows(2) {
        s += integrate_adaptive(|y| y * p.q.eval(y).abs() / (1.0 + kabs * y), w[0], w[1], 1e-13)?;
    }
    Ok(s)
}

fn pow(b: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        b.powf(e)
    }
}

/// Observations for one k over the (x, y) points.
fn observe(id: &str, p: &ProblemSpec, k: C64, pts: &[(f64, f64)]) -> Result<Vec<Obs>> {
    let l = p.l;
    let a = k.norm();
    let b = k.im.abs();
    let mut out = Vec::with_capacity(pts.len());
    match id {
        "estphil" | "partial-z-phil" => {
            for &(x, _) in pts {
                let r = x / (1.0 + a * x);
                let g = (b * x).exp();
                let (obs, env) = if id == "estphil" {
                    (phi_l(l, k * k, x)?.value.norm(), pow(r, l + 1.0) * g)
                } else {
                    (phi_l_dk(l, k, x)?.norm(), a * x * pow(r, l + 2.0) * g)
                };
                out.push(Obs { obs, env, reference: 0.0 });
            }
        }
        "estGl" | "partial-z-Gl" => {
            for &(x, y) in pts {
                let r = x / (1.0 + a * x);
                let env0 = pow((1.0 + a * y) / y, l) * (b * (x - y)).exp();
                let (obs, env) = if id == "estGl" {
                    (green_free(l, k, x, y)?.norm(), pow(r, l + 1.0) * env0)
                } else {
                    (green_free_dk(l, k, x, y)?.norm(), a * x * pow(r, l + 2.0) * env0)
                };
                out.push(Obs { obs, env, reference: 0.0 });
            }
        }
        "estphi" | "partial-z-diff-phi" => {
            let dk = id == "partial-z-diff-phi";
            let sol = RegularSolution::new(p, k, dk)?;
            for &(x, _) in pts {
                let r = x / (1.0 + a * x);
                let m = moment(p, 0.0, x, a)?;
                let g = (b * x).exp();
                let s = sol.at(x)?;
                let (obs, env, reference) = if dk {
                    let free = phi_l_dk(l, k, x)?;
                    let d = s.dk.ok_or_else(|| Error::Domain("missing k-derivative".into()))?;
                    ((d - free).norm(), a * x * pow(r, l + 2.0) * g * m, free.norm() + x * s.value.norm())
                } else {
                    let free = phi_l(l, k * k, x)?.value;
                    ((s.value - free).norm(), pow(r, l + 1.0) * g * m, free.norm())
                };
                out.push(Obs { obs, env, reference });
            }
        }
        "est-psi-l" | "partial-z-psi-l" => {
            for &(x, _) in pts {
                let d = (-b * x).exp();
                let (obs, env) = if id == "est-psi-l" {
                    (psi_l(l, k, x)?.value.norm(), pow(x / (1.0 + a * x), -l) * d)
                } else {
                    let e = if l >= 0.5 {
                        a * x * pow((1.0 + a * x) / x, l - 1.0)
                    } else {
                        pow(a, l) * x * pow(a * x / (1.0 + a * x), l)
                    };
                    (psi_l_dk(l, k, x)?.norm(), e * d)
                };
                out.push(Obs { obs, env, reference: 0.0 });
            }
        }
        "estpsi" => {
            let sol = JostSolution::new(p, k, false)?;
            for &(x, _) in pts {
                let free = f_l(l, k, x)?.value;
                let m = moment(p, x, f64::INFINITY, a)?;
                let env = pow(a * x / (1.0 + a * x), -l) * (-b * x).exp() * m;
                out.push(Obs { obs: (sol.at(x)?.value - free).norm(), env, reference: free.norm() });
            }
        }
        "est-hlk" => {
            for &(x, _) in pts {
                let env = pow((1.0 + a * x) / (a * x), l - 1.0) / (x * a * a);
                out.push(Obs { obs: h_l_dk(l, k, x)?.norm(), env, reference: x });
            }
        }
        "est-hk" => {
            let sol = JostSolution::new(p, k, true)?;
            for &(x, _) in pts {
                let free = h_l_dk(l, k, x)?;
                let m = moment(p, x, f64::INFINITY, 0.0)?;
                let env = pow((1.0 + a * x) / (a * x), l) * m / a;
                let s = sol.at(x)?;
                let d = s.dk.ok_or_else(|| Error::Domain("missing k-derivative".into()))?;
                let h = (-C64::i() * k * x).exp() * (d - C64::i() * x * s.value);
                let obs = (h - free).norm();
                out.push(Obs { obs, env, reference: free.norm() + x + 1.0 / a });
            }
        }
        "asym-f" | "F-to-1" | "F=1" | "F-near-zero" => {
            let f = normalized_jost(p, k)?;
            let (obs, env, reference) = match id {
                "asym-f" => ((f.norm() - 1.0).abs(), 1.0 / (1.0 + a), 1.0),
                "F-to-1" => ((f - 1.0).norm(), 1.0 / (1.0 + a), 1.0),
                "F=1" => {
                    let lead = C64::new(0.0, 0.5 * p.q.integral()) / k;
                    (a * (f - 1.0 - lead).norm(), 1.0 / a, a * f.norm())
                }
                _ => (1.0 / f.norm(), a.powf(-(l + 1.5).min(2.0)), 0.0),
            };
            out.push(Obs { obs, env, reference });
        }
        "F-prime" => {
            let h = 1e-4 * a;
            let fp = normalized_jost(p, k + h)?;
            let fm = normalized_jost(p, k - h)?;
            let d = (fp - fm) / (2.0 * h);
            let env = a.min(1.0).powf(2.0 * l.min(0.0)) / (1.0 + a);
            out.push(Obs { obs: d.norm(), env, reference: 1e3 * fp.norm() / a });
        }
        "bessel-remainder" | "bessel-remainder-deriv" => {
            let nu = p.nu();
            for &(x, _) in pts {
                let r = a * x;
                let z = C64::new(r, 0.0);
                let j = bessel(BesselKind::J, nu, z)?.re;
                let ph = r - 0.5 * nu * PI - 0.25 * PI;
                let s = (0.5 * PI * r).sqrt();
                let obs = if id == "bessel-remainder" {
                    (s * j - ph.cos()).abs()
                } else {
                    let jm = bessel(BesselKind::J, nu - 1.0, z)?.re;
                    let dj = jm - nu / r * j;
                    let d = s * (0.5 * j / r + dj);
                    (d + ph.sin()).abs()
                };
                out.push(Obs { obs, env: 1.0 / r, reference: 1.0 });
            }
        }
        _ => return Err(Error::Invalid(format!("unknown lemma id {id}"))),
    }
    Ok(out)
}

/// Sample points grouped by k.
fn points(lem: &Lemma, p: &ProblemSpec, ks: &[f64], xs: &[f64]) -> Vec<(C64, Vec<(f64, f64)>)> {
    let angles: &[f64] = match lem.domain {
        Domain::Rays | Domain::RaysPairs | Domain::RaysK => &[0.0, 0.25 * PI, 0.5 * PI],
        _ => &[0.0],
    };
    let reach = if lem.perturbed { p.end().max(matching_radius(p)) } else { 0.0 };
    let mut groups = Vec::new();
    for &th in angles {
        for &r in ks {
            let k = if th == 0.0 { C64::new(r, 0.0) } else { C64::from_polar(r, th) };
            let fits = |x: f64| k.im.abs() * x.max(reach) <= MAX_GROWTH;
            let pts: Vec<(f64, f64)> = match lem.domain {
                Domain::RealLarge if r < 1.0 => continue,
                Domain::RealSmall if r > 1.0 => continue,
                Domain::RealLarge | Domain::RealSmall | Domain::RealK => vec![(1.0, 1.0)],
                Domain::RaysK if fits(0.0) => vec![(1.0, 1.0)],
                Domain::RaysK => continue,
                Domain::RaysPairs => xs
                    .iter()
                    .flat_map(|&x| xs.iter().filter(move |&&y| y <= x).map(move |&y| (x, y)))
                    .filter(|&(x, _)| fits(x))
                    .collect(),
                Domain::Argument => xs.iter().filter(|&&x| r * x >= 1.0).map(|&x| (x, x)).collect(),
                _ => xs.iter().filter(|&&x| fits(x)).map(|&x| (x, x)).collect(),
            };
            if !pts.is_empty() {
                groups.push((k, pts));
            }
        }
    }
    groups
}

struct Stage {
    max_ratio: f64,
    samples: usize,
    all_zero: bool,
    worst: Option<(C64, f64, f64)>,
}

fn stage(lem: &Lemma, p: &ProblemSpec, ks: &[f64], xs: &[f64]) -> Result<Stage> {
    let groups = points(lem, p, ks, xs);
    let results = par_map(&groups, |(k, pts)| observe(lem.id, p, *k, pts));
    let mut st = Stage { max_ratio: 0.0, samples: 0, all_zero: true, worst: None };
    for ((k, pts), r) in groups.iter().zip(results) {
        for (o, &(x, y)) in r?.iter().zip(pts) {
            let q = o.ratio();
            st.samples += 1;
            if q > 0.0 {
                st.all_zero = false;
            }
            if q.is_nan() || q > st.max_ratio {
                st.max_ratio = if q.is_nan() { f64::INFINITY } else { q };
                st.worst = Some((*k, x, y));
            }
        }
    }
    Ok(st)
}

fn potential_id(p: &ProblemSpec) -> String {
    p.q.to_string()
}

/// Fit the constant on the coarse grid, assert with 10% slack on the fine grid.
pub fn check_bound(lemma_id: &str, p: &ProblemSpec, grid: &VerifyGrid) -> Result<BoundCheckReport> {
    grid.validate()?;
    let index = LEMMAS
        .iter()
        .position(|l| l.id == lemma_id)
        .ok_or_else(|| Error::Invalid(format!("unknown lemma id {lemma_id}")))?;
    let lem = &LEMMAS[index];
    let mut report = BoundCheckReport {
        lemma_id: lem.id.to_string(),
        statement: lem.statement.to_string(),
        potential_id: potential_id(p),
        l: p.l,
        fitted_c: f64::NAN,
        max_ratio: f64::NAN,
        pass: false,
        grid_spec: grid.describe(),
        samples: 0,
        degenerate: false,
        argmax: None,
        status: CheckStatus::Checked,
        note: None,
    };
    if let Err(e) = p.check_hypothesis() {
        report.status = CheckStatus::Skipped;
        report.note = Some(e.to_string());
        return Ok(report);
    }
    let (kc, xc) = grid.coarse();
    let (kf, xf) = grid.fine(index);
    let run = stage(lem, p, &kc, &xc).and_then(|c| Ok((c, stage(lem, p, &kf, &xf)?)));
    match run {
        Ok((c, f)) => {
            report.fitted_c = c.max_ratio;
            report.max_ratio = f.max_ratio;
            report.samples = f.samples;
            report.degenerate = c.all_zero && f.all_zero;
            report.pass = c.max_ratio.is_finite() && f.max_ratio <= c.max_ratio * (1.0 + SLACK);
            report.argmax = f.worst.map(|(k, x, y)| [k.re, k.im, x, y]);
        }
        Err(e @ (Error::Hypothesis(_) | Error::Invalid(_))) => return Err(e),
        Err(e) => {
            report.status = CheckStatus::Inconclusive;
            report.note = Some(e.to_string());
        }
    }
    Ok(report)
}

/// All reports for one operator, in lemma order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub potential_id: String,
    pub l: f64,
    pub skipped: Option<String>,
    pub reports: Vec<BoundCheckReport>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.skipped.is_none() && self.reports.iter().all(|r| r.pass)
    }
}

pub fn run_suite(p: &ProblemSpec, grid: &VerifyGrid) -> Result<SuiteReport> {
    grid.validate()?;
    let mut suite = SuiteReport { potential_id: potential_id(p), l: p.l, skipped: None, reports: Vec::new() };
    if let Err(e) = p.check_hypothesis() {
        suite.skipped = Some(e.to_string());
        return Ok(suite);
    }
    for lem in LEMMAS {
        suite.reports.push(check_bound(lem.id, p, grid)?);
    }
    Ok(suite)
}

/// Rows are lemma ids, columns are (potential, l) cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceabilityMatrix {
    pub lemma_ids: Vec<String>,
    pub topics: Vec<String>,
    pub columns: Vec<String>,
    /// cells[row][column]: pass, or None when the suite was skipped
    pub cells: Vec<Vec<Option<bool>>>,
}

pub fn traceability(suites: &[SuiteReport]) -> TraceabilityMatrix {
    let columns = suites.iter().map(|s| format!("{} l={}", s.potential_id, s.l)).collect();
    let cells = LEMMAS
        .iter()
        .map(|lem| {
            suites
                .iter()
                .map(|s| s.reports.iter().find(|r| r.lemma_id == lem.id).map(|r| r.pass))
                .collect()
        })
        .collect();
    TraceabilityMatrix {
        lemma_ids: LEMMAS.iter().map(|l| l.id.to_string()).collect(),
        topics: LEMMAS.iter().map(|l| l.topic.to_string()).collect(),
        columns,
        cells,
    }
}

/// Suites plus matrix, the document written by the `verify` command.
pub fn suite_json(suites: &[SuiteReport]) -> serde_json::Value {
    serde_json::json!({
        "matrix": traceability(suites),
        "reports": suites.iter().flat_map(|s| s.reports.iter()).collect::<Vec<_>>(),
        "skipped": suites
            .iter()
            .filter_map(|s| s.skipped.as_ref().map(|r| serde_json::json!({"potential_id": s.potential_id, "l": s.l, "reason": r})))
            .collect::<Vec<_>>(),
        "all_pass": suites.iter().all(SuiteReport::all_pass),
    })
}
