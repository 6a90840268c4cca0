use jostkit::quad::{brent, linspace};
use jostkit::scattering::*;
use jostkit::solutions::{JostBranch, JostSolution, RegularSolution};
use jostkit::specfun::phi_l;
use jostkit::{Complex64 as C64, Potential, ProblemSpec};

fn spec(l: f64, q: &str) -> ProblemSpec {
    ProblemSpec::new(l, q.parse().unwrap()).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Jost function of the well q = -v0 on [0, b] by matching at x = b:
/// interior phi_l(k^2 + v0, x), exterior closed-form f_l for l = 0, 1.
fn well_jost_oracle(l: u32, v0: f64, b: f64, k: C64) -> C64 {
    let inner = phi_l(l as f64, k * k + v0, b).unwrap();
    let i = c(0.0, 1.0);
    let e = (i * k * b).exp();
    let (f, df) = match l {
        0 => (e, i * k * e),
        1 => {
            let h = 1.0 + i / (k * b);
            (e * h, i * k * e * h - e * i / (k * b * b))
        }
        _ => unreachable!(),
    };
    f * inner.dx - df * inner.value
}

#[test]
fn jost_function_matches_matching_oracle() {
    for l in [0u32, 1] {
        let p = spec(l as f64, "well(1,0,1)");
        for &k in &[c(0.05, 0.0), c(1.0, 0.0), c(7.5, 0.0), c(0.0, 2.0), c(1.5, 0.5)] {
            let got = jost_function(&p, k).unwrap();
            let want = well_jost_oracle(l, 1.0, 1.0, k);
            assert!((got - want).norm() < 1e-11 * want.norm(), "l={l} k={k}: {got} vs {want}");
        }
    }
}

#[test]
fn three_point_wronskian_spread() {
    for q in ["well(1,0,1)", "expdecay(1,1)", "well(20,0,1)"] {
        for &l in &[0.0, 0.25, 2.0] {
            let p = spec(l, q);
            for &k in &[0.3, 2.0, 9.0] {
                let (_, spread) = jost_function_checked(&p, c(k, 0.0)).unwrap();
                assert!(spread < 1e-8, "{q} l={l} k={k}: {spread:e}");
            }
        }
    }
}

#[test]
fn negative_k_conjugates() {
    let p = spec(0.25, "well(1,0,1)");
    let a = jost_function(&p, c(1.3, 0.0)).unwrap();
    let b = jost_function(&p, c(-1.3, 0.0)).unwrap();
    assert!((a.conj() - b).norm() < 1e-13 * a.norm());
}

#[test]
fn scattering_identities_on_the_well() {
    for &l in &[0.0, 1.0] {
        let p = spec(l, "well(1,0,1)");
        for &k in &linspace(0.1, 20.0, 12) {
            let kc = c(k, 0.0);
            let fp = JostSolution::new(&p, kc, false).unwrap();
            let fm = JostSolution::branch(&p, kc, JostBranch::Minus, false).unwrap();
            let phi = RegularSolution::new(&p, kc, false).unwrap();
            let jf = jost_function(&p, kc).unwrap();
            let jm = jost_function(&p, -kc).unwrap();
            for &x in &[0.2, 0.7, 1.5] {
                let (a, b) = (fm.at(x).unwrap(), fp.at(x).unwrap());
                let w = a.value * b.dx - a.dx * b.value;
                let two_ik = c(0.0, 2.0 * k);
                assert!((w - two_ik).norm() < 1e-9 * two_ik.norm(), "W l={l} k={k} x={x}");
                let rec = (jm * b.value - jf * a.value) / two_ik;
                let ph = phi.at(x).unwrap().value;
                assert!((rec - ph).norm() < 1e-8 * ph.norm().max(1e-300) + 1e-14, "reconstruction l={l} k={k} x={x}");
            }
            let m = weyl_m(&p, k).unwrap();
            assert!((m.im * jf.norm_sqr() - k).abs() < 1e-8 * k, "Im m l={l} k={k}");
        }
    }
}

#[test]
fn two_routes_for_normalized_jost() {
    for q in ["well(1,0,1)", "expdecay(1,1)", "well(-3,0.5,2)"] {
        for &l in &[0.0, 0.25, 1.0, 2.0] {
            let p = spec(l, q);
            for &k in &[c(0.0, 0.0), c(0.1, 0.0), c(1.0, 0.0), c(6.0, 0.0), c(0.5, 1.5)] {
                let a = normalized_jost(&p, k).unwrap();
                let b = normalized_jost_integral(&p, k).unwrap();
                assert!((a - b).norm() < 1e-8 * a.norm().max(1.0), "{q} l={l} k={k}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn free_weyl_function_formula() {
    let l = 0.3;
    let nu = l + 0.5;
    let p = ProblemSpec::new(l, Potential::Free).unwrap();
    for &k in &[0.5, 2.0] {
        let z = c(k * k, 0.0);
        let want = -(-z).powf(nu) / (std::f64::consts::PI * nu).sin();
        let got = weyl_m(&p, k).unwrap();
        // (-z)^nu is taken on the upper lip of the cut (z + i0)
        assert!((got.im - want.conj().im.abs()).abs() < 1e-12 * want.norm());
        assert!((got.re - want.re).abs() < 1e-12 * want.norm());
    }
}

/// Bound state of the l = 0 well q = -v0 on [0, 1]: K cot K = -kappa.
fn well_kappa(v0: f64) -> f64 {
    let g = |kp: f64| {
        let kk = (v0 - kp * kp).sqrt();
        kk * kk.cos() + kp * kk.sin()
    };
    brent(g, 1e-9, v0.sqrt() - 1e-9, 1e-15).unwrap()
}

#[test]
fn deep_well_bound_state() {
    let v0 = 20.0;
    let p = spec(0.0, "well(20,0,1)");
    let states = bound_states(&p).unwrap();
    assert_eq!(states.len(), 1);
    let kappa = well_kappa(v0);
    assert!((states[0].kappa - kappa).abs() < 1e-10, "{} vs {kappa}", states[0].kappa);
    // ||phi||^2 = int_0^1 sin^2(Kx)/K^2 + sin^2(K)/K^2 / (2 kappa)
    let kk = (v0 - kappa * kappa).sqrt();
    let norm = (0.5 - (2.0 * kk).sin() / (4.0 * kk)) / (kk * kk) + kk.sin().powi(2) / (kk * kk) / (2.0 * kappa);
    let gamma = 1.0 / norm;
    assert!((states[0].gamma - gamma).abs() < 1e-8 * gamma, "{} vs {gamma}", states[0].gamma);
    assert!(states[0].slope.abs() > 1e-3);
}

#[test]
fn shallow_well_and_free_have_no_bound_states() {
    assert!(bound_states(&spec(0.0, "well(1,0,1)")).unwrap().is_empty());
    assert!(bound_states(&ProblemSpec::new(1.0, Potential::Free).unwrap()).unwrap().is_empty());
}

#[test]
fn threshold_resonance_by_bisection() {
    let f0 = |v0: f64| {
        let p = ProblemSpec::new(0.0, Potential::Well { v0, a: 0.0, b: 1.0 }).unwrap();
        normalized_jost_integral(&p, c(0.0, 0.0)).unwrap().re
    };
    let vstar = brent(f0, 2.0, 3.0, 1e-14).unwrap();
    let exact = std::f64::consts::PI.powi(2) / 4.0;
    assert!((vstar - exact).abs() < 1e-10);
    let status = |v0: f64| resonance_status(&ProblemSpec::new(0.0, Potential::Well { v0, a: 0.0, b: 1.0 }).unwrap()).unwrap().status;
    assert_eq!(status(vstar), ResonanceStatus::Resonant);
    assert_eq!(status(vstar - 1e-3), ResonanceStatus::None);
    assert_eq!(status(vstar + 1e-3), ResonanceStatus::None);
    assert_eq!(resonance_status(&spec(0.0, "well(20,0,1)")).unwrap().status, ResonanceStatus::None);
}

#[test]
fn cumulative_spectral_function() {
    let lam = 1e3;
    let p = ProblemSpec::new(0.0, Potential::Free).unwrap();
    let r = cumulative_ac(&p, lam).unwrap() / free_cumulative(0.0, lam);
    assert!((r - 1.0).abs() < 1e-10);
    let p = spec(0.0, "well(1,0,1)");
    let r = cumulative_ac(&p, lam).unwrap() / free_cumulative(0.0, lam);
    assert!((r - 1.0).abs() < 0.05, "{r}");
    let d = spectral_density(&p, lam).unwrap() / (lam.sqrt() / std::f64::consts::PI);
    assert!((d - 1.0).abs() < 0.02, "{d}");
}

#[test]
fn scattering_table_free_has_unit_f() {
    let p = ProblemSpec::new(0.0, Potential::Free).unwrap();
    let d = ScatteringData::compute(&p, &[0.5, 1.0, 2.0]).unwrap();
    for r in &d.points {
        assert!((r.big_f - 1.0).norm() < 1e-13);
    }
    let csv = d.to_csv();
    assert!(csv.starts_with("k,re_f,im_f,re_F,im_F,abs_F,im_m\n"));
    assert_eq!(csv.lines().count(), 4);
}
