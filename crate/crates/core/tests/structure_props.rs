use proptest::prelude::*;

use persuasion_core::model::{gamma, Posterior, Problem, Signal};
use persuasion_core::presets::{preset, GridSpec, Params};
use persuasion_core::structure::{
    classify_monotonicity, decide_alternative, pairwise_split, twist_determinant, ClassifyOptions, FarkasVerdict, PoolingPlan,
};

fn matrix() -> impl Strategy<Value = [[f64; 3]; 3]> {
    prop::array::uniform3(prop::array::uniform3(-1.0f64..1.0))
}

fn c1() -> Problem {
    preset("example_c1", &Params::new(), GridSpec::new(41)).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn farkas_witness_checks_out(r in matrix()) {
        let c = decide_alternative(r).unwrap();
        match c.verdict {
            FarkasVerdict::AlphaExists => {
                prop_assert!(c.beta.is_none());
                prop_assert!(c.alpha.unwrap().iter().all(|&a| a > 0.0));
                prop_assert!(c.alpha_r().unwrap().iter().all(|&v| v <= 1e-12));
            }
            FarkasVerdict::BetaExists => {
                prop_assert!(c.alpha.is_none());
                prop_assert!(c.beta.unwrap().iter().all(|&b| b >= 0.0));
                let rb = c.r_beta().unwrap();
                prop_assert!(rb.iter().all(|&v| v >= -1e-12));
                prop_assert!(rb.iter().cloned().fold(f64::MIN, f64::max) >= 1e-8);
            }
        }
    }

    #[test]
    fn farkas_verdict_ignores_positive_scaling(r in matrix(), k in 0.01f64..100.0) {
        let a = decide_alternative(r).unwrap().verdict;
        let b = decide_alternative(r.map(|row| row.map(|v| v * k))).unwrap().verdict;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn twist_determinant_is_alternating(y in 1.0f64..1.5, x in prop::array::uniform3(0.5f64..3.0)) {
        let p = c1();
        let d = twist_determinant(&p, y, x[0], x[1], x[2]);
        let swapped = twist_determinant(&p, y, x[1], x[0], x[2]);
        let rotated = twist_determinant(&p, y, x[1], x[2], x[0]);
        prop_assert!((d + swapped).abs() <= 1e-12 * (1.0 + d.abs()));
        prop_assert!((d - rotated).abs() <= 1e-12 * (1.0 + d.abs()));
    }

    #[test]
    fn classification_ignores_atom_order(
        picks in prop::collection::vec((0usize..41, 0usize..41, 0.1f64..0.9), 2..6),
        rev in any::<bool>(),
    ) {
        let p = c1();
        let mut atoms = Vec::new();
        for (a, b, w) in picks {
            let mu = if a == b {
                Posterior::degenerate(a)
            } else {
                Posterior::normalized(vec![a.min(b), a.max(b)], vec![w, 1.0 - w]).unwrap()
            };
            if gamma(&p, &mu).is_ok() {
                atoms.push((mu, 1.0));
            }
        }
        prop_assume!(atoms.len() >= 2);
        let n = atoms.len() as f64;
        let mut second: Vec<(Posterior, f64)> = atoms.iter().map(|(m, _)| (m.clone(), 1.0 / n)).collect();
        if rev { second.reverse() } else { second.rotate_left(1) }
        let first: Vec<(Posterior, f64)> = atoms.into_iter().map(|(m, _)| (m, 1.0 / n)).collect();
        let opts = ClassifyOptions::default();
        let a = classify_monotonicity(&p, &PoolingPlan::from_signal(&p, &Signal::new(first).unwrap()).unwrap(), &opts).unwrap();
        let b = classify_monotonicity(&p, &PoolingPlan::from_signal(&p, &Signal::new(second).unwrap()).unwrap(), &opts).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn split_recombines_exactly(
        support in prop::sample::subsequence((0..41).collect::<Vec<usize>>(), 3..7),
        weights in prop::collection::vec(0.05f64..1.0, 6),
    ) {
        let p = c1();
        let mu = Posterior::normalized(support.clone(), weights[..support.len()].to_vec()).unwrap();
        prop_assume!(gamma(&p, &mu).is_ok());
        let pieces = pairwise_split(&p, &mu).unwrap();
        let mut back = vec![0.0; p.n_states()];
        for (q, w) in &pieces {
            prop_assert!(q.len() <= 2);
            for (i, m) in q.iter() {
                back[i] += w * m;
            }
        }
        for (i, m) in mu.iter() {
            prop_assert!((back[i] - m).abs() <= 1e-12);
            back[i] = 0.0;
        }
        prop_assert!(back.iter().all(|v| v.abs() <= 1e-12));
    }
}
