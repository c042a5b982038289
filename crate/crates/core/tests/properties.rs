use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use morse_simplify::cli_io::{cone_dmf, simplex_skeleton, DiagramDocument};
use morse_simplify::complex_core::{
    count_paths, induced_vector_field, restore_path, reverse_path, unique_path, validate_complex,
    validate_dmf, HOrder,
};
use morse_simplify::fixtures::random_instance;
use morse_simplify::forbidden_regions::{birth_region, death_region};
use morse_simplify::oracle::{brute_region, diff_state};
use morse_simplify::simplification::{
    cancel_pair, simplify_all, CancelClass, MorseState, SimplifyOptions, TraceOptions,
};
use morse_simplify::transposition_engine::ReducedState;
use morse_simplify::Error;

fn state(seed: u64, cells: usize, p_vector: f64) -> MorseState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, h) = random_instance(&mut rng, cells, 3, p_vector);
    MorseState::new(x, h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_are_valid(seed in any::<u64>(), p in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, h) = random_instance(&mut rng, 50, 3, p);
        prop_assert!(validate_complex(&x).is_valid());
        prop_assert!(validate_dmf(&x, &h).unwrap().is_valid());
        prop_assert!(induced_vector_field(&x, &h).unwrap().is_gradient());
    }

    #[test]
    fn reordering_matches_the_oracle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, h) = random_instance(&mut rng, 40, 3, 0.3);
        let mut s = ReducedState::from_dmf(x.clone(), &h).unwrap();
        // a random linear extension reached through many transpositions
        let target = HOrder::new(&x, &morse_simplify::cli_io::random_dmf(&x, rng.gen()));
        s.reorder(&target).unwrap();
        prop_assert_eq!(s.order().order(), target.order());
        let d = diff_state(&s).unwrap();
        prop_assert!(d.is_empty(), "{}", d);
        s.check_duality().unwrap();
    }

    #[test]
    fn reversal_is_undone_by_restoring(seed in any::<u64>()) {
        let ms = state(seed, 40, 0.5);
        let v = ms.field();
        let crit = v.criticals();
        for &t in &crit {
            for &s in &crit {
                let x = ms.complex();
                if x.dim(s) + 1 != x.dim(t) || count_paths(v, t, s, 2).unwrap().count != 1 {
                    continue;
                }
                let rho = unique_path(v, t, s).unwrap();
                let w = reverse_path(v, &rho).unwrap();
                prop_assert!(!w.is_critical(t) && !w.is_critical(s));
                prop_assert_eq!(&restore_path(&w, &rho).unwrap(), v);
            }
        }
    }

    #[test]
    fn staircases_agree_with_their_definition(seed in any::<u64>()) {
        let ms = state(seed, 40, 0.3);
        let h = ms.function();
        for alpha in ms.off_diagonal() {
            let d = alpha.death.unwrap();
            let dr = death_region(ms.reduced(), ms.field(), h, &alpha).unwrap();
            let br = birth_region(ms.reduced(), ms.field(), h, &alpha).unwrap();
            let brute = brute_region(ms.reduced(), ms.field(), h, alpha.birth, d).unwrap();
            for &(a, b) in brute.death.iter().chain(&brute.birth) {
                for (px, py) in [(a, b), (a - 0.5, b), (a, b + 0.5), (a + 0.25, b - 0.25)] {
                    prop_assert_eq!(dr.contains(px, py), brute.in_death(px, py));
                    prop_assert_eq!(br.contains(px, py), brute.in_birth(px, py));
                }
            }
        }
    }

    #[test]
    fn cancellation_keeps_the_other_pairs(seed in any::<u64>()) {
        let ms = state(seed, 50, 0.3);
        for alpha in ms.off_diagonal() {
            let mut work = ms.clone();
            let before = ms.diagram();
            let opts = TraceOptions { verify: true, ..Default::default() };
            match cancel_pair(&mut work, &alpha, &opts) {
                Ok(trace) => {
                    let d = alpha.death.unwrap();
                    let mut expected: Vec<_> =
                        before.into_iter().filter(|p| (p.0, p.1) != (alpha.birth, d)).collect();
                    let mut after = work.diagram();
                    expected.sort_by_key(|p| (p.0, p.1));
                    after.sort_by_key(|p| (p.0, p.1));
                    prop_assert_eq!(after, expected);
                    prop_assert!(trace.max_change <= trace.lifetime);
                    prop_assert!(work.verify().unwrap().is_empty());
                }
                Err(Error::Ineligible(_)) => {
                    prop_assert!(!ms.eligibility(&alpha).unwrap().eligible);
                    prop_assert_eq!(work.function(), ms.function());
                    prop_assert_eq!(work.reduced().order().order(), ms.reduced().order().order());
                }
                Err(e) => prop_assert!(false, "{}", e),
            }
        }
    }

    #[test]
    fn simplification_classifies_every_pair(seed in any::<u64>()) {
        let mut ms = state(seed, 60, 0.2);
        let c = ms.off_diagonal().len();
        let rep = simplify_all(&mut ms, SimplifyOptions { verify: true, ..Default::default() }).unwrap();
        prop_assert_eq!(rep.outcomes.len(), c);
        prop_assert_eq!(ms.off_diagonal().len(), rep.count(CancelClass::NotCancellable));
        prop_assert!(validate_dmf(ms.complex(), ms.function()).unwrap().is_valid());
        for o in rep.outcomes.iter().filter(|o| o.class == CancelClass::NotCancellable) {
            prop_assert!(o.reason.is_some());
        }
    }

    #[test]
    fn diagram_documents_round_trip(seed in any::<u64>()) {
        let ms = state(seed, 40, 0.3);
        let doc = DiagramDocument::of(&ms, true).unwrap();
        let back = DiagramDocument::from_json(&doc.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), doc.to_json());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cone_functions_have_exactly_c_pairs(seed in any::<u64>(), c in 0usize..32) {
        let x = Arc::new(simplex_skeleton(5).unwrap());
        let h = cone_dmf(&x, c, seed).unwrap();
        prop_assert!(validate_dmf(&x, &h).unwrap().is_valid());
        prop_assert_eq!(MorseState::new(x, h).unwrap().off_diagonal().len(), c);
    }
}
