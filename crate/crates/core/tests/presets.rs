use persuasion_core::analysis::{check_all, results_bundle, solve, SolveConfig};
use persuasion_core::model::check_assumptions;
use persuasion_core::presets::{catalog, label_satisfies, oracle_check, preset, preset_ids, GridSpec, Params};
use persuasion_core::Error;

#[test]
fn catalog_ids_are_unique_and_sorted_as_listed() {
    let ids = preset_ids();
    let mut dedup = ids.clone();
    dedup.sort_unstable();
    dedup.dedup();
    assert_eq!(dedup.len(), ids.len());
    assert_eq!(ids.len(), 14);
}

#[test]
fn assumption_flags_match_the_catalog() {
    for info in catalog() {
        let (p, pr) = preset(info.id, &Params::new(), GridSpec::new(41)).unwrap();
        assert_eq!(pr.expected_flags, info.flags, "{}", info.id);
        assert_eq!(check_assumptions(&p).flags(), info.flags, "{}", info.id);
    }
}

#[test]
fn every_oracle_and_expected_verdict_holds_at_101_points() {
    for info in catalog() {
        let (p, pr) = preset(info.id, &Params::new(), GridSpec::new(101)).unwrap();
        let s = solve(&p, &SolveConfig::default()).unwrap();
        let verdicts = check_all(&p, &s);
        for (checker, want) in &pr.expected_verdicts {
            let got = verdicts.iter().find(|v| &v.checker == checker).unwrap_or_else(|| panic!("{}: no {checker}", info.id));
            assert!(label_satisfies(&got.label, want), "{}: {checker} = {}, expected {want}", info.id, got.label);
        }
        // The NAD ODE path is exercised separately; the LP-side bundle is checked here.
        let report = oracle_check(&p, &pr, &results_bundle(&p, &s, &verdicts, None));
        let failing: Vec<_> = report.fields.iter().filter(|f| !f.passed).map(|f| f.field.clone()).collect();
        assert!(failing.is_empty(), "{}: oracle fields {failing:?}", info.id);
    }
}

#[test]
fn unknown_ids_and_bad_parameters_are_rejected() {
    assert!(matches!(preset("nope", &Params::new(), GridSpec::new(11)), Err(Error::UnknownPreset(_))));
    let bad = Params::parse("xmax=-3").unwrap();
    assert!(matches!(preset("contest", &bad, GridSpec::new(11)), Err(Error::ParamOutOfRange { .. })));
    let unknown = Params::parse("zeta=1").unwrap();
    assert!(preset("contest", &unknown, GridSpec::new(11)).is_err());
}

#[test]
fn c3_split_variant_reports_split_states() {
    // f(−y) > 3f(3y) breaks the negative-assortative pairing.
    let params = Params::parse("f=strict").unwrap();
    let (p, _) = preset("example_c3", &params, GridSpec::new(101)).unwrap();
    let s = solve(&p, &SolveConfig::default()).unwrap();
    let verdicts = check_all(&p, &s);
    let nad = verdicts.iter().find(|v| v.checker == "nad_structure").unwrap();
    assert_eq!(nad.label, "split_states");
}

#[test]
fn rayo_segal_with_increasing_weights_is_full_disclosure() {
    let (p, _) = preset("rayo_segal", &Params::new(), GridSpec::new(61)).unwrap();
    let s = solve(&p, &SolveConfig::default()).unwrap();
    let fd = check_all(&p, &s).into_iter().find(|v| v.checker == "full_disclosure").unwrap();
    assert_eq!(fd.label, "optimal_unique");
}
