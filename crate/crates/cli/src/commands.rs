//! One function per command; each fills the output directory.

use crate::config::{Command, RunConfig};
use crate::output::Output;
use crate::Failure;
use jostkit::propagator::{decay_certificate, evolve_state_with, kernel_full_grid, EvolveOptions};
use jostkit::scattering::{cumulative_ac, free_cumulative, jost_function, spectral_measure, ScatteringData};
use jostkit::solutions::{JostSolution, RegularSolution};
use jostkit::table::csv_row;
use jostkit::verify::{run_suite, suite_json};
use jostkit::{Complex64 as C64, ProblemSpec};
use serde_json::json;

/// Runs a validated config.
pub fn run(command: Command, cfg: &RunConfig, p: &ProblemSpec, out: &mut Output) -> Result<(), Failure> {
    out.write("config.json", cfg.to_json().as_bytes()).map_err(Failure::Io)?;
    match command {
        Command::Solve => solve(cfg, p, out),
        Command::Scatter => scatter(cfg, p, out),
        Command::Spectral => spectral(cfg, p, out),
        Command::Propagate => propagate(cfg, p, out),
        Command::Certify => certify(cfg, p, out),
        Command::Verify => verify(cfg, p, out),
    }
}

fn points(g: &Option<crate::config::Grid>) -> Vec<f64> {
    g.as_ref().map(|g| g.points()).unwrap_or_default()
}

fn solve(cfg: &RunConfig, p: &ProblemSpec, out: &mut Output) -> Result<(), Failure> {
    p.check_hypothesis()?;
    let (ks, xs) = (points(&cfg.grids.k), points(&cfg.grids.x));
    let mut csv = String::from("k,x,re_phi,im_phi,re_dphi,im_dphi,re_f,im_f,re_df,im_df\n");
    let mut summary = Vec::new();
    for &k in &ks {
        let kc = C64::new(k, 0.0);
        let reg = RegularSolution::new(p, kc, false)?;
        let jost = if k != 0.0 { Some(JostSolution::new(p, kc, false)?) } else { None };
        for &x in &xs {
            let a = reg.at(x)?;
            let (fv, fd) = match &jost {
                Some(j) => {
                    let s = j.at(x)?;
                    (s.value, s.dx)
                }
                None => (C64::new(f64::NAN, f64::NAN), C64::new(f64::NAN, f64::NAN)),
            };
            csv.push_str(&csv_row(&[k, x, a.value.re, a.value.im, a.dx.re, a.dx.im, fv.re, fv.im, fd.re, fd.im]));
        }
        let f = if k != 0.0 { Some(jost_function(p, kc)?) } else { None };
        summary.push(json!({
            "k": k,
            "jost_function": f.map(|f| [f.re, f.im]),
            "regular_iterations": reg.iterations(),
            "jost_iterations": jost.as_ref().map(|j| j.iterations()),
        }));
    }
    out.write("solutions.csv", csv.as_bytes()).map_err(Failure::Io)?;
    out.write_json("solutions.json", &json!({"l": p.l, "potential": p.q.to_string(), "k": summary})).map_err(Failure::Io)?;
    Ok(())
}

fn scatter(cfg: &RunConfig, p: &ProblemSpec, out: &mut Output) -> Result<(), Failure> {
    p.check_hypothesis()?;
    let d = ScatteringData::compute(p, &points(&cfg.grids.k))?;
    out.write("scattering.csv", d.to_csv().as_bytes()).map_err(Failure::Io)?;
    out.write_json("scattering.json", &d.summary_json()).map_err(Failure::Io)?;
    Ok(())
}

fn spectral(cfg: &RunConfig, p: &ProblemSpec, out: &mut Output) -> Result<(), Failure> {
    p.check_hypothesis()?;
    let lam = points(&cfg.grids.lambda);
    let m = spectral_measure(p, &lam)?;
    let top = *lam.last().unwrap();
    let cumulative = if top > 0.0 {
        let ac = cumulative_ac(p, top)?;
        let free = free_cumulative(p.l, top);
        json!({"lambda": top, "ac": ac, "free": free, "ratio": ac / free})
    } else {
        serde_json::Value::Null
    };
    out.write("spectral.csv", m.to_csv(p.l).as_bytes()).map_err(Failure::Io)?;
    let discrete: Vec<_> = m.discrete.iter().map(|(l, g)| json!({"lambda": l, "gamma": g})).collect();
    out.write_json(
        "spectral.json",
        &json!({"l": p.l, "potential": p.q.to_string(), "discrete": discrete, "cumulative": cumulative}),
    )
    .map_err(Failure::Io)?;
    Ok(())
}

fn propagate(cfg: &RunConfig, p: &ProblemSpec, out: &mut Output) -> Result<(), Failure> {
    p.check_hypothesis()?;
    let ts = points(&cfg.grids.t);
    let xs = points(&cfg.grids.x);
    let ys = cfg.grids.y.as_ref().map(|g| g.points()).unwrap_or_else(|| xs.clone());
    let mut csv = String::new();
    let mut slices = Vec::new();
    for &t in &ts {
        let g = kernel_full_grid(p, t, &xs, &ys)?;
        let body = g.to_csv();
        if csv.is_empty() {
            csv.push_str(&body);
        } else {
            csv.push_str(body.split_once('\n').map_or("", |b| b.1));
        }
        let (m, ax, ay) = g.sup();
        slices.push(json!({"t": t, "route": g.route, "error_bound": g.error_bound, "sup": m, "argmax": [ax, ay]}));
    }
    out.write("kernel.csv", csv.as_bytes()).map_err(Failure::Io)?;
    out.write_json("kernel.json", &json!({"l": p.l, "potential": p.q.to_string(), "slices": slices})).map_err(Failure::Io)?;
    if let Some(s) = &cfg.state {
        let (c, w, l) = (s.center, s.width, p.l);
        let psi0 = move |x: f64| x.powf(l + 1.0) * (-((x - c) / w).powi(2)).exp();
        let support = ((c - 8.0 * w).max(0.0), c + 8.0 * w);
        let opts = EvolveOptions { amp_tol: cfg.tolerances.amp_tol, k_cap: cfg.tolerances.k_cap };
        let mut csv = String::from("t,x,re_cont,im_cont,re_disc,im_disc,re_psi,im_psi\n");
        for &t in &ts {
            let e = evolve_state_with(p, &psi0, support, t, &xs, opts)?;
            for (i, &x) in xs.iter().enumerate() {
                let (a, b, v) = (e.continuous[i], e.discrete[i], e.total[i]);
                csv.push_str(&csv_row(&[t, x, a.re, a.im, b.re, b.im, v.re, v.im]));
            }
        }
        out.write("state.csv", csv.as_bytes()).map_err(Failure::Io)?;
    }
    Ok(())
}

fn certify(cfg: &RunConfig, p: &ProblemSpec, out: &mut Output) -> Result<(), Failure> {
    p.check_hypothesis()?;
    let ts = points(&cfg.grids.t);
    let xs = points(&cfg.grids.x);
    let ys = cfg.grids.y.as_ref().map(|g| g.points()).unwrap_or_else(|| xs.clone());
    let r = decay_certificate(p, &ts, &xs, &ys)?;
    let mut csv = String::from("t,M,sqrt_t_M,argmax_x,argmax_y,error_bound\n");
    for row in &r.rows {
        csv.push_str(&csv_row(&[row.t, row.m, row.sqrt_t_m, row.argmax_x, row.argmax_y, row.error_bound]));
    }
    out.write("decay.csv", csv.as_bytes()).map_err(Failure::Io)?;
    out.write_json("decay.json", &json!({"l": p.l, "potential": p.q.to_string(), "report": r})).map_err(Failure::Io)?;
    Ok(())
}

fn verify(cfg: &RunConfig, p: &ProblemSpec, out: &mut Output) -> Result<(), Failure> {
    let grid = cfg.verify_grid();
    let ls = cfg.verify.l_values.clone().unwrap_or_else(|| vec![p.l]);
    let specs: Vec<ProblemSpec> = ls.iter().map(|&l| ProblemSpec::new(l, p.q.clone())).collect::<Result<_, _>>()?;
    for s in &specs {
        s.check_hypothesis()?;
    }
    let suites = specs.iter().map(|s| run_suite(s, &grid)).collect::<Result<Vec<_>, _>>()?;
    let mut report = suite_json(&suites);
    report["grid"] = json!(grid.describe());
    out.write_json("verify.json", &report).map_err(Failure::Io)?;
    let failing: Vec<String> = suites
        .iter()
        .flat_map(|s| s.reports.iter().filter(|r| !r.pass).map(move |r| format!("{} (l={})", r.lemma_id, s.l)))
        .collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Failure::Bounds(format!("bounds not confirmed: {}", failing.join(", "))))
    }
}
