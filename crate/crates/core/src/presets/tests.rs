use super::*;
use crate::error::Error;

#[test]
fn every_preset_builds_on_the_smallest_grid() {
    for id in preset_ids() {
        let (p, pr) = preset(id, &Params::new(), GridSpec::new(3)).unwrap_or_else(|e| panic!("{id}: {e}"));
        // The example_c3 grid puts K ≥ 2 cells on each side of zero.
        let want = if id == "example_c3" { 5 } else { 3 };
        assert_eq!(p.n_states(), want, "{id}");
        assert_eq!(pr.id, id);
        assert!((p.prior().iter().sum::<f64>() - 1.0).abs() < 1e-12, "{id}");
    }
}

#[test]
fn action_grid_size_can_differ() {
    let (p, _) = preset("option_pricing", &Params::new(), GridSpec::with_actions(21, 31)).unwrap();
    assert_eq!((p.n_states(), p.n_actions()), (21, 31));
}

#[test]
fn expected_verdicts_name_real_checkers() {
    let known = ["assumptions", "twist", "sdpd", "full_disclosure", "nad_condition", "classify_lp", "nad_structure"];
    for id in preset_ids() {
        let (_, pr) = preset(id, &Params::new(), GridSpec::new(11)).unwrap();
        for k in pr.expected_verdicts.keys() {
            assert!(known.contains(&k.as_str()), "{id}: {k}");
        }
    }
}

#[test]
fn parameter_helpers_reject_bad_values() {
    let p = Params::parse("a=2, b = x, f=yes").unwrap();
    assert_eq!(p.f64_in("a", 0.0, 0.0, 5.0).unwrap(), 2.0);
    assert_eq!(p.f64_in("missing", 1.5, 0.0, 5.0).unwrap(), 1.5);
    assert!(matches!(p.f64_in("a", 0.0, 3.0, 5.0), Err(Error::ParamOutOfRange { .. })));
    assert!(p.f64_in("b", 0.0, 0.0, 1.0).is_err());
    assert_eq!(p.choice("b", "y", &["x", "y"]).unwrap(), "x");
    assert!(p.choice("b", "y", &["y"]).is_err());
    assert!(p.flag("f", false).unwrap());
    assert!(p.expect_only("demo", &["a", "b"]).is_err());
    assert!(Params::parse("novalue").is_err());
}

#[test]
fn density_weights_follow_the_density() {
    let pts: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let w = density_weights(&pts, &|_| 1.0);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    // End points collect half a cell, interior points a full cell.
    assert!((w[0] - 0.05).abs() < 1e-15 && (w[5] - 0.1).abs() < 1e-15);
    let rising = density_weights(&pts, &|x| x);
    assert!(rising[1..10].windows(2).all(|p| p[0] < p[1]));
}

#[test]
fn strict_labels_satisfy_weak_expectations() {
    assert!(label_satisfies("strictly_single_dipped", "single_dipped"));
    assert!(!label_satisfies("single_dipped", "strictly_single_dipped"));
    assert!(label_satisfies("neither", "neither"));
}
