//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use jostkit::oscint::{beurling_h_eta, vdc_bound_check, AmplitudeProfile};
use jostkit::propagator::*;
use jostkit::quad::{brent, linspace, logspace};
use jostkit::scattering::*;
use jostkit::solutions::{ode_jost, ode_oracle, JostBranch, JostSolution, OdeDirection, RegularSolution};
use jostkit::verify::{run_suite, traceability, VerifyGrid};
use jostkit::{Complex64 as C64, Potential, ProblemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<(bool, String), String>;

fn spec(l: f64, q: &str) -> ProblemSpec {
    ProblemSpec::new(l, q.parse().unwrap()).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn criterion_1() -> Outcome {
    let xs = linspace(0.1, 20.0, 801);
    let mut ok = true;
    let mut msg = Vec::new();
    for t in [1.0, 10.0, 100.0] {
        let g = free_kernel_grid(0, t, &xs, &xs).map_err(err)?;
        let (mut sup, mut wsup) = (0.0f64, 0.0f64);
        for (i, &x) in xs.iter().enumerate() {
            for (j, &y) in xs.iter().enumerate() {
                let v = g.get(i, j).norm();
                sup = sup.max(v);
                wsup = wsup.max(v / (x * y));
            }
        }
        let want = 1.0 / (PI * t).sqrt();
        let wwant = 1.0 / (2.0 * PI.sqrt() * t.powf(1.5));
        let (e, we) = ((want - sup) / want, (wwant - wsup) / wwant);
        ok &= (-1e-12..1e-3).contains(&e) && (-1e-12..1e-3).contains(&we);
        msg.push(format!("t={t}: rel {e:.1e}, weighted rel {we:.1e}"));
    }
    Ok((ok, msg.join("; ")))
}

fn criterion_2() -> Outcome {
    let p = ProblemSpec::new(0.0, Potential::Free).unwrap();
    let xs = linspace(0.5, 10.0, 20);
    let g = kernel_full_grid(&p, 10.0, &xs, &xs).map_err(err)?;
    let mut worst = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in xs.iter().enumerate() {
            let want = free_kernel_3d(0, 10.0, x, y).map_err(err)?;
            worst = worst.max((g.get(i, j) - want).norm());
        }
    }
    Ok((worst < 1e-6, format!("max |K - K0| = {worst:.2e} on 20x20")))
}

fn criterion_3() -> Outcome {
    let (mut w_res, mut r_res, mut m_res) = (0.0f64, 0.0f64, 0.0f64);
    for l in [0.0, 1.0] {
        let p = spec(l, "well(1,0,1)");
        for &k in &linspace(0.1, 25.0, 50) {
            let kc = c(k, 0.0);
            let fp = JostSolution::new(&p, kc, false).map_err(err)?;
            let fm = JostSolution::branch(&p, kc, JostBranch::Minus, false).map_err(err)?;
            let phi = RegularSolution::new(&p, kc, false).map_err(err)?;
            let jf = jost_function(&p, kc).map_err(err)?;
            let jm = jost_function(&p, -kc).map_err(err)?;
            let two_ik = c(0.0, 2.0 * k);
            for &x in &[0.2, 0.7, 1.5] {
                let (a, b) = (fm.at(x).map_err(err)?, fp.at(x).map_err(err)?);
                let w = a.value * b.dx - a.dx * b.value;
                w_res = w_res.max((w - two_ik).norm() / two_ik.norm());
                let rec = (jm * b.value - jf * a.value) / two_ik;
                let ph = phi.at(x).map_err(err)?.value;
                r_res = r_res.max((rec - ph).norm() / ph.norm());
            }
            let m = weyl_m(&p, k).map_err(err)?;
            m_res = m_res.max((m.im * jf.norm_sqr() - k).abs() / k);
        }
    }
    let ok = w_res < 1e-8 && r_res < 1e-8 && m_res < 1e-8;
    Ok((ok, format!("relative residuals: Wronskian {w_res:.1e}, reconstruction {r_res:.1e}, Im m |f|^2 {m_res:.1e}")))
}

fn criterion_4() -> Outcome {
    let mut ok = true;
    let mut msg = Vec::new();
    for q in ["well(1,0,1)", "expdecay(1,1)"] {
        for l in [0.0, 1.0] {
            let p = spec(l, q);
            let iq = p.q.integral();
            let r: Vec<f64> = [10.0, 100.0, 1000.0]
                .iter()
                .map(|&k| normalized_jost(&p, c(k, 0.0)).map(|f| k * (f - 1.0 - c(0.0, iq / (2.0 * k))).norm()))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            let dec = r[0] > r[1] && r[1] > r[2] && r[2] < 0.1 * r[0];
            ok &= dec;
            msg.push(format!("{q} l={l}: {:.1e},{:.1e},{:.1e}", r[0], r[1], r[2]));
        }
    }
    let lam = 1e3;
    for l in [0.0, 1.0] {
        let free = cumulative_ac(&ProblemSpec::new(l, Potential::Free).unwrap(), lam).map_err(err)? / free_cumulative(l, lam);
        let well = cumulative_ac(&spec(l, "well(1,0,1)"), lam).map_err(err)? / free_cumulative(l, lam);
        ok &= (free - 1.0).abs() < 0.02 && (well - 1.0).abs() < 0.05;
        msg.push(format!("rho ratio l={l}: free {free:.6}, well {well:.6}"));
    }
    Ok((ok, msg.join("; ")))
}

/// l = 0 bound state of q = -v0 on [0, 1]: K cos K + kappa sin K = 0.
fn well_kappa(v0: f64) -> f64 {
    let g = |kp: f64| {
        let kk = (v0 - kp * kp).sqrt();
        kk * kk.cos() + kp * kk.sin()
    };
    brent(g, 1e-9, v0.sqrt() - 1e-9, 1e-15).unwrap()
}

fn criterion_5() -> Outcome {
    let v0 = 20.0;
    let p = spec(0.0, "well(20,0,1)");
    let states = bound_states(&p).map_err(err)?;
    if states.len() != 1 {
        return Ok((false, format!("expected one bound state, found {}", states.len())));
    }
    let kappa = well_kappa(v0);
    let kk = (v0 - kappa * kappa).sqrt();
    let norm = (0.5 - (2.0 * kk).sin() / (4.0 * kk)) / (kk * kk) + kk.sin().powi(2) / (kk * kk) / (2.0 * kappa);
    let gamma = 1.0 / norm;
    let ek = (states[0].kappa - kappa).abs();
    let eg = (states[0].gamma - gamma).abs() / gamma;
    let status = resonance_status(&p).map_err(err)?.status;
    let ok = ek < 1e-10 && eg < 1e-8 && status == ResonanceStatus::None;
    Ok((ok, format!("kappa {:.12} (err {ek:.1e}), gamma rel err {eg:.1e}, status {status:?}", states[0].kappa)))
}

fn criterion_6() -> Outcome {
    let well = |v0: f64| ProblemSpec::new(0.0, Potential::Well { v0, a: 0.0, b: 1.0 }).unwrap();
    let f0 = |v0: f64| normalized_jost_integral(&well(v0), c(0.0, 0.0)).unwrap().re;
    let vstar = brent(f0, 2.0, 3.0, 1e-14).map_err(err)?;
    let status = |v0: f64| resonance_status(&well(v0)).map(|r| r.status);
    let (lo, at, hi) = (status(vstar - 1e-3).map_err(err)?, status(vstar).map_err(err)?, status(vstar + 1e-3).map_err(err)?);
    let sign_change = f0(vstar - 1e-3) * f0(vstar + 1e-3) < 0.0;
    let ok = sign_change && lo == ResonanceStatus::None && at == ResonanceStatus::Resonant && hi == ResonanceStatus::None;
    Ok((ok, format!("v0* = {vstar:.12} (pi^2/4 = {:.12}); status {lo:?} / {at:?} / {hi:?}", PI * PI / 4.0)))
}

fn criterion_7() -> Outcome {
    let p = spec(0.0, "well(1,0,1)");
    let xs = linspace(0.1, 20.0, 12);
    let ts = logspace(1.0, 100.0, 7);
    let r = decay_certificate(&p, &ts, &xs, &xs).map_err(err)?;
    let spread = r.late_spread.unwrap_or(f64::INFINITY);
    let ok = (-0.55..=-0.45).contains(&r.fitted_exponent) && spread < 0.25;
    Ok((ok, format!("slope {:.5}, spread of sqrt(t) M(t) on [10,100] {spread:.4}", r.fitted_exponent)))
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (mut meas, mut rec) = (0.0f64, 0.0f64);
    for l in 1..=3u32 {
        for _ in 0..20 {
            let k = 10f64.powf(rng.gen_range(-1.0..1.0));
            let x = 10f64.powf(rng.gen_range(-1.0..1.0));
            let y = 10f64.powf(rng.gen_range(-1.0..1.0));
            meas = meas.max(rl_measure_check(l, k, x, y).map_err(err)?);
            rec = rec.max(rl_recursion_residual(l as f64, k, x, y).map_err(err)?);
        }
    }
    let mut born_ok = true;
    let mut worst = 0.0f64;
    for q in ["well(1,0,1)", "expdecay(1,1)"] {
        for l in [0.0, 1.0] {
            let p = spec(l, q);
            let k0 = default_k0(&p).map_err(err)?;
            for m in [2.0, 4.0, 8.0] {
                let s = born_series(&p, 4, m * k0, 0.5, 1.5).map_err(err)?;
                for &r in &s.contraction {
                    worst = worst.max(r / s.bound);
                    born_ok &= r <= s.bound;
                }
            }
        }
    }
    let ok = meas < 1e-8 && rec < 1e-8 && born_ok;
    Ok((ok, format!("measure residual {meas:.1e}, recursion residual {rec:.1e}, max contraction/bound {worst:.3}")))
}

fn criterion_9() -> Outcome {
    let grid = VerifyGrid::default();
    let mut suites = Vec::new();
    for q in ["free", "well(1,0,1)", "expdecay(1,1)"] {
        for l in [0.0, 0.25, 1.0, 2.0] {
            suites.push(run_suite(&spec(l, q), &grid).map_err(err)?);
        }
    }
    let failing: Vec<String> = suites
        .iter()
        .flat_map(|s| s.reports.iter().filter(|r| !r.pass).map(move |r| format!("{} on {} l={}", r.lemma_id, s.potential_id, s.l)))
        .collect();
    let m = traceability(&suites);
    let checked = suites.iter().map(|s| s.reports.len()).sum::<usize>();
    let ok = failing.is_empty() && suites.iter().all(|s| s.skipped.is_none());
    Ok((ok, format!("{} ids x {} cases, {checked} checks, failing: {failing:?}", m.lemma_ids.len(), m.columns.len())))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut ok = true;
    for _ in 0..100 {
        let a = rng.gen_range(-3.0..0.0);
        let b = a + rng.gen_range(0.5..6.0);
        let bumps: Vec<(f64, f64, f64)> =
            (0..rng.gen_range(1..4)).map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(a..b), rng.gen_range(0.2..1.5))).collect();
        let (amp, freq) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..4.0));
        let bumps2 = bumps.clone();
        let v = move |k: f64| {
            let s: f64 = bumps.iter().map(|(h, m, w)| h * (-((k - m) / w).powi(2)).exp()).sum();
            C64::new(s + amp * (freq * k).sin(), 0.0)
        };
        let d = move |k: f64| {
            let s: f64 = bumps2.iter().map(|(h, m, w)| -2.0 * h * (k - m) / (w * w) * (-((k - m) / w).powi(2)).exp()).sum();
            C64::new(s + amp * freq * (freq * k).cos(), 0.0)
        };
        let prof = AmplitudeProfile::new(a, b, v).with_derivative(d);
        let r = vdc_bound_check(&[1.0, 10.0, 100.0, 1000.0], &prof).map_err(err)?;
        ok &= r.pass;
        worst = worst.max(r.max_ratio);
    }
    let mut bworst = 0.0f64;
    for eta in [0.05, 0.5, 2.0, 10.0] {
        for l in [0.0, 0.25, 1.0, 2.0] {
            let r = beurling_h_eta(eta, l, 200.0, 0.02).map_err(err)?;
            ok &= r.pass;
            bworst = bworst.max(r.ratio);
        }
    }
    Ok((ok, format!("vdC max ratio {worst:.3} over 100 amplitudes x 4 times; Beurling max ratio {bworst:.3} (limit 1.05)")))
}

/// Crank-Nicolson for i u_t = -u'' + (q + l(l+1)/x^2) u on (0, len) with
/// Dirichlet walls; returns u(t) on the nodes j dx, j = 0..=n.
fn crank_nicolson(p: &ProblemSpec, psi0: &dyn Fn(f64) -> f64, len: f64, n: usize, steps: usize, t: f64) -> Vec<C64> {
    let dx = len / n as f64;
    let dt = t / steps as f64;
    let a = c(0.0, 0.5 * dt);
    let m = n - 1;
    let pot: Vec<f64> = (1..n)
        .map(|j| {
            let x = j as f64 * dx;
            let h = 1e-9 * dx;
            0.5 * (p.q.eval(x - h) + p.q.eval(x + h)) + p.l * (p.l + 1.0) / (x * x)
        })
        .collect();
    let off = -a / (dx * dx);
    let diag: Vec<C64> = pot.iter().map(|v| 1.0 + a * (2.0 / (dx * dx) + v)).collect();
    let mut cp = vec![C64::new(0.0, 0.0); m];
    let mut den = vec![C64::new(0.0, 0.0); m];
    den[0] = diag[0];
    cp[0] = off / den[0];
    for j in 1..m {
        den[j] = diag[j] - off * cp[j - 1];
        cp[j] = off / den[j];
    }
    let mut u: Vec<C64> = (1..n).map(|j| c(psi0(j as f64 * dx), 0.0)).collect();
    let mut r = vec![C64::new(0.0, 0.0); m];
    let inv = 1.0 / (dx * dx);
    for _ in 0..steps {
        for j in 0..m {
            let left = if j > 0 { u[j - 1] } else { C64::new(0.0, 0.0) };
            let right = if j + 1 < m { u[j + 1] } else { C64::new(0.0, 0.0) };
            let hu = (2.0 * u[j] - left - right) * inv + pot[j] * u[j];
            r[j] = u[j] - a * hu;
        }
        r[0] /= den[0];
        for j in 1..m {
            r[j] = (r[j] - off * r[j - 1]) / den[j];
        }
        u[m - 1] = r[m - 1];
        for j in (0..m - 1).rev() {
            u[j] = r[j] - cp[j] * u[j + 1];
        }
    }
    let mut out = vec![C64::new(0.0, 0.0)];
    out.extend(u);
    out.push(C64::new(0.0, 0.0));
    out
}

fn criterion_11() -> Outcome {
    let mut worst = 0.0f64;
    let rel = |a: C64, b: C64| (a - b).norm() / b.norm();
    for q in ["well(1,0,1)", "expdecay(1,1)", "well(20,0,1)", "well(-3,0.5,2)"] {
        for l in [0.0, 0.25, 1.0, 2.0] {
            let p = spec(l, q);
            for z in [c(1.0, 0.0), c(-4.0, 0.0), c(30.0, 5.0), c(0.0, 0.0)] {
                let sol = RegularSolution::new(&p, z.sqrt(), false).map_err(err)?;
                for x in [0.3, 1.0, 2.5] {
                    let v = sol.at(x).map_err(err)?;
                    let o = ode_oracle(&p, z, OdeDirection::ForwardRegular, x).map_err(err)?;
                    worst = worst.max(rel(v.value, o.value).max(rel(v.dx, o.dx)));
                }
            }
            for k in [c(1.0, 0.0), c(0.2, 0.0), c(6.0, 0.0), c(0.0, 2.0), c(-2.0, 0.0)] {
                let sol = JostSolution::new(&p, k, false).map_err(err)?;
                for x in [0.3, 1.0, 2.5] {
                    let v = sol.at(x).map_err(err)?;
                    let o = ode_jost(&p, k, x).map_err(err)?;
                    worst = worst.max(rel(v.value, o.value).max(rel(v.dx, o.dx)));
                }
            }
        }
    }
    // deep well: one bound state, so the discrete part is exercised
    let p = spec(0.0, "well(20,0,1)");
    let psi0 = |x: f64| x * (-2.0 * (x - 2.5).powi(2)).exp();
    let (t, len) = (5.0, 80.0);
    let xs = [0.5, 1.0, 2.0, 4.0];
    let opts = EvolveOptions { amp_tol: 1e-6, ..EvolveOptions::default() };
    let ev = evolve_state_with(&p, &psi0, (0.0, 8.0), t, &xs, opts).map_err(err)?;
    let coarse = crank_nicolson(&p, &psi0, len, 8000, 4000, t);
    let fine = crank_nicolson(&p, &psi0, len, 16000, 8000, t);
    let mut diff = 0.0f64;
    let mut richardson = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let (jc, jf) = ((x / (len / 8000.0)).round() as usize, (x / (len / 16000.0)).round() as usize);
        let oracle = (4.0 * fine[jf] - coarse[jc]) / 3.0;
        richardson = richardson.max((fine[jf] - coarse[jc]).norm());
        diff = diff.max((ev.total[i] - oracle).norm());
    }
    let ok = worst < 1e-8 && diff < 1e-4;
    Ok((
        ok,
        format!("Volterra vs ODE max rel {worst:.1e}; evolution vs Crank-Nicolson max abs {diff:.1e} (CN refinement change {richardson:.1e}, {} bound state)", bound_states(&p).map_err(err)?.len()),
    ))
}

fn main() {
    // (criterion, runtime limit in seconds)
    let table: [(fn() -> Outcome, Option<f64>); 11] = [
        (criterion_1, Some(10.0)),
        (criterion_2, Some(60.0)),
        (criterion_3, Some(60.0)),
        (criterion_4, None),
        (criterion_5, None),
        (criterion_6, None),
        (criterion_7, Some(600.0)),
        (criterion_8, None),
        (criterion_9, Some(900.0)),
        (criterion_10, None),
        (criterion_11, None),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (run, limit)) in table.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = limit.map_or(true, |s| secs <= s);
        let (pass, detail) = match outcome {
            Ok((p, d)) => (p && in_time, d),
            Err(e) => (false, format!("error: {e}")),
        };
        let budget = limit.map_or(String::new(), |s| format!(" / {s:.0}s"));
        println!("criterion {n:>2}: {} [{secs:.1}s{budget}] {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
