use proptest::prelude::*;
use repvar::connectivity::sample_rng;
use repvar::words::evaluate;
use repvar::{
    classify_fix, classify_torus, enumerate_fix_labels, enumerate_torus_labels, phi_substitution, random_surface_rep,
    randomized_representative, randomized_torus_representative, solve_commutator, ComponentLabel, Generator,
    GroupElement, RepDocument, Sign, TorusLabel, Word,
};

fn element() -> impl Strategy<Value = GroupElement> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|[w, x, y, z]| GroupElement::new(w, x, y, z))
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec((0..7usize, -3i64..=3), 0..12)
        .prop_map(|letters| Word::from_letters(letters.into_iter().map(|(g, e)| (Generator::ALL[g], e))))
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn labels_survive_text_and_json(sign in sign(), k in 0u32..50, l in 0u32..50, eps in prop_oneof![Just(1i8), Just(-1i8)]) {
        let label = ComponentLabel::Off { sign, k, l };
        prop_assert_eq!(label.to_string().parse::<ComponentLabel>().unwrap(), label);
        let torus = TorusLabel::lift(eps, label);
        prop_assert_eq!(torus.to_string().parse::<TorusLabel>().unwrap(), torus);
        let json = serde_json::to_string(&torus).unwrap();
        prop_assert_eq!(serde_json::from_str::<TorusLabel>(&json).unwrap(), torus);
    }

    #[test]
    fn commutator_solution_hits_target(c in element()) {
        let (a, b) = solve_commutator(c);
        prop_assert!((a * b * a.inverse() * b.inverse()).distance(c) < 1e-10);
    }

    #[test]
    fn substitution_respects_inverses(w in word(), n in -4i64..=4) {
        let phi = phi_substitution(n);
        prop_assert_eq!(phi.apply(&w.inverse()), phi.apply(&w).inverse());
        prop_assert!(w.concat(&w.inverse()).is_identity());
    }

    #[test]
    fn evaluation_is_a_homomorphism(u in word(), v in word(), seed in any::<u64>()) {
        let rep = random_surface_rep(&mut sample_rng(seed, 0));
        let u = Word::from_letters(u.letters().iter().copied().filter(|&(g, _)| g != Generator::Tau));
        let v = Word::from_letters(v.letters().iter().copied().filter(|&(g, _)| g != Generator::Tau));
        let lhs = evaluate(&u.concat(&v), &rep).unwrap();
        let rhs = evaluate(&u, &rep).unwrap() * evaluate(&v, &rep).unwrap();
        prop_assert!(lhs.distance(rhs) < 1e-12);
    }

    #[test]
    fn fix_labels_are_conjugation_invariant(n in 1i64..=5, pick in any::<prop::sample::Index>(), seed in any::<u64>(), g in element()) {
        let labels = enumerate_fix_labels(n);
        let label = labels[pick.index(labels.len())];
        let rep = randomized_representative(n, label, &mut sample_rng(seed, 1)).unwrap();
        prop_assert_eq!(classify_fix(&rep.conjugated_by(g), n, 1e-9).unwrap(), label);
    }

    #[test]
    fn torus_labels_are_conjugation_invariant(n in 1i64..=4, pick in any::<prop::sample::Index>(), seed in any::<u64>(), g in element()) {
        let labels = enumerate_torus_labels(n);
        let label = labels[pick.index(labels.len())];
        let rep = randomized_torus_representative(n, label, &mut sample_rng(seed, 2)).unwrap();
        prop_assert_eq!(classify_torus(&rep.conjugated_by(g), n, 1e-9).unwrap(), label);
    }

    #[test]
    fn rep_documents_round_trip_exactly(seed in any::<u64>(), n in -6i64..=6, t in element()) {
        let rep = random_surface_rep(&mut sample_rng(seed, 3));
        let doc = RepDocument { n, t: Some(t), rep };
        prop_assert_eq!(RepDocument::from_json(&doc.to_json()).unwrap(), doc);
    }
}
