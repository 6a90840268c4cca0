use jostkit::verify::*;
use jostkit::{Potential, ProblemSpec};

#[test]
fn free_suite_passes() {
    let p = ProblemSpec::new(0.0, Potential::Free).unwrap();
    let s = run_suite(&p, &VerifyGrid::default()).unwrap();
    assert!(s.skipped.is_none());
    assert_eq!(s.reports.len(), LEMMAS.len());
    for r in &s.reports {
        assert!(r.pass, "{r:?}");
        assert_eq!(r.status, CheckStatus::Checked);
    }
    // perturbation bounds see nothing when q = 0
    let estphi = s.reports.iter().find(|r| r.lemma_id == "estphi").unwrap();
    assert!(estphi.degenerate && estphi.fitted_c == 0.0);
}

#[test]
fn hypothesis_violation_skips_the_suite() {
    let q: Potential = "power(1,3,1)".parse().unwrap();
    let p = ProblemSpec::new(0.0, q).unwrap();
    let s = run_suite(&p, &VerifyGrid::default()).unwrap();
    assert!(s.skipped.as_deref().unwrap().contains("hypothesis"), "{:?}", s.skipped);
    assert!(s.reports.is_empty() && !s.all_pass());
    let r = check_bound("estphil", &p, &VerifyGrid::default()).unwrap();
    assert_eq!(r.status, CheckStatus::Skipped);
    assert!(!r.pass);
}

#[test]
fn unknown_lemma_and_bad_grid_are_rejected() {
    let p = ProblemSpec::new(0.0, Potential::Free).unwrap();
    assert!(check_bound("no-such-bound", &p, &VerifyGrid::default()).is_err());
    let g = VerifyGrid { k_max: 1e-4, ..VerifyGrid::default() };
    assert!(check_bound("estphil", &p, &g).is_err());
}

#[test]
fn report_schema_and_matrix() {
    let p = ProblemSpec::new(1.0, Potential::Well { v0: 1.0, a: 0.0, b: 1.0 }).unwrap();
    let g = VerifyGrid::default();
    let r = check_bound("F=1", &p, &g).unwrap();
    assert!(r.pass && r.fitted_c > 0.0, "{r:?}");
    let v = serde_json::to_value(&r).unwrap();
    for key in ["lemma_id", "potential_id", "l", "fitted_C", "max_ratio", "pass", "grid_spec"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["potential_id"], "well(1,0,1)");
    let suite = SuiteReport { potential_id: r.potential_id.clone(), l: 1.0, skipped: None, reports: vec![r] };
    let m = traceability(std::slice::from_ref(&suite));
    assert_eq!(m.lemma_ids.len(), LEMMAS.len());
    assert_eq!(m.cells.len(), LEMMAS.len());
    let row = m.lemma_ids.iter().position(|id| id == "F=1").unwrap();
    assert_eq!(m.cells[row][0], Some(true));
    assert_eq!(m.cells[0][0], None);
    let doc = suite_json(&[suite]);
    assert_eq!(doc["all_pass"], true);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 1);
}

#[test]
fn seeded_fine_grid_is_reproducible() {
    let p = ProblemSpec::new(0.25, Potential::Free).unwrap();
    let g = VerifyGrid { seed: 42, ..VerifyGrid::default() };
    let a = check_bound("partial-z-psi-l", &p, &g).unwrap();
    let b = check_bound("partial-z-psi-l", &p, &g).unwrap();
    assert_eq!(a, b);
}
