use jostkit::solutions::{jost_h_dk, neumann_terms, JostSolution, ProblemSpec, RegularSolution};
use jostkit::{Complex64 as C64, Potential};
use proptest::prelude::*;

fn problems() -> impl Strategy<Value = ProblemSpec> {
    let q = prop_oneof![
        Just(Potential::Well { v0: 1.0, a: 0.0, b: 1.0 }),
        Just(Potential::ExpDecay { v0: 1.0, a: 1.0 }),
        Just(Potential::Well { v0: -3.0, a: 0.5, b: 2.0 }),
    ];
    let l = prop_oneof![Just(0.0), Just(0.25), Just(1.0), Just(2.0)];
    (q, l).prop_map(|(q, l)| ProblemSpec::new(l, q).unwrap())
}

fn k_uhp() -> impl Strategy<Value = C64> {
    (-1.0f64..1.5, 0.0f64..1.5).prop_map(|(lr, th)| C64::from_polar(10f64.powf(lr), th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jost_regular_wronskian_is_constant(p in problems(), k in k_uhp(), x1 in 0.05f64..0.9, x2 in 1.1f64..4.0) {
        prop_assume!(k.im * x2 < 10.0);
        let phi = RegularSolution::new(&p, k, false).unwrap();
        let f = JostSolution::new(&p, k, false).unwrap();
        let w = |x: f64| {
            let (a, b) = (f.at(x).unwrap(), phi.at(x).unwrap());
            (a.value * b.dx - a.dx * b.value, (a.value * b.dx).norm() + (a.dx * b.value).norm())
        };
        let (w1, s1) = w(x1);
        let (w2, s2) = w(x2);
        prop_assert!((w1 - w2).norm() <= 1e-9 * s1.max(s2), "{} vs {}", w1, w2);
    }

    #[test]
    fn regular_solution_k_derivative(p in problems(), k in k_uhp(), x in 0.05f64..3.0) {
        prop_assume!(k.im * x < 10.0);
        let d = RegularSolution::new(&p, k, true).unwrap().at(x).unwrap().dk.unwrap();
        let h = 1e-5 * k.norm();
        let v = |k: C64| RegularSolution::new(&p, k, false).unwrap().at(x).unwrap().value;
        let fd = (v(k + h) - v(k - h)) / (2.0 * h);
        prop_assert!((d - fd).norm() <= 1e-6 * (1.0 + fd.norm()), "{} vs {}", d, fd);
    }

    #[test]
    fn jost_h_k_derivative(p in problems(), k in k_uhp(), x in 0.05f64..3.0) {
        prop_assume!(k.im * p.end() < 50.0);
        let d = jost_h_dk(&p, k, x).unwrap();
        let h = 1e-5 * k.norm();
        let v = |k: C64| (-C64::i() * k * x).exp() * JostSolution::new(&p, k, false).unwrap().at(x).unwrap().value;
        let fd = (v(k + h) - v(k - h)) / (2.0 * h);
        prop_assert!((d - fd).norm() <= 1e-6 * (1.0 + fd.norm()), "{} vs {}", d, fd);
    }

    #[test]
    fn regular_solution_is_analytic_in_z(p in problems(), zr in -5.0f64..30.0, zi in -5.0f64..5.0, x in 0.1f64..2.0) {
        // Cauchy-Riemann: d/d(Re z) = -i d/d(Im z)
        let z = C64::new(zr, zi);
        let v = |z: C64| RegularSolution::new(&p, z.sqrt(), false).unwrap().at(x).unwrap().value;
        let h = 1e-4;
        let dre = (v(z + h) - v(z - h)) / (2.0 * h);
        let dim = (v(z + C64::new(0.0, h)) - v(z - C64::new(0.0, h))) / (2.0 * h);
        prop_assert!((dre + C64::i() * dim).norm() <= 1e-6 * (1.0 + dre.norm()), "{} vs {}", dre, dim);
    }
}

#[test]
fn neumann_terms_decay_factorially() {
    let p = ProblemSpec::new(0.0, Potential::Well { v0: 1.0, a: 0.0, b: 1.0 }).unwrap();
    let t = neumann_terms(&p, C64::new(4.0, 0.0), 1.0, 12).unwrap();
    for w in t.windows(2).skip(1) {
        assert!(w[1] < w[0], "{t:?}");
    }
    assert!(t[11] < 1e-8 * t[0], "{t:?}");
}
