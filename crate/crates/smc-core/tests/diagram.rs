mod oracles;

use oracles::{arb_diagram, build_diagram, class_key, interchange_closure, raw_expressions};
use proptest::prelude::*;
use smc_core::diagram::{enumerate_diagrams_upto, Slice};
use smc_core::*;

#[test]
fn identity_and_empty() {
    let e = identity(0);
    assert_eq!((e.inputs(), e.outputs(), e.gate_count()), (0, 0, 0));
    assert_eq!(canonical_form(5, identity(5).slices()).unwrap(), identity(5));
    let phi = d("(s*id1);(id1*m);m");
    assert!(equals(&seq_compose(&identity(3), &phi).unwrap(), &phi));
    assert!(equals(&seq_compose(&phi, &identity(1)).unwrap(), &phi));
}

#[test]
fn composition_examples() {
    let alpha_src = seq_compose(&d("m*id1"), &d("m")).unwrap();
    assert_eq!(alpha_src, d("(m*id1);m"));
    assert_eq!((alpha_src.inputs(), alpha_src.outputs()), (3, 1));
    assert!(matches!(seq_compose(&d("s"), &d("e")), Err(DiagramError::ArityMismatch { .. })));
    let ee = par_compose(&d("e"), &d("e")).unwrap();
    assert_eq!((ee.inputs(), ee.outputs(), ee.gate_count()), (0, 2, 2));
    assert_eq!(ee, d("e*e"));
    assert_eq!(par_compose(&identity(0), &d("s")).unwrap(), d("s"));
}

#[test]
fn canonical_examples() {
    assert_eq!(d("(m*id0);(id1*e)"), d("(id2*e);(m*id1)"));
    assert_eq!(d("(m*id0);(id1*e)"), d("m*e"));
    assert_eq!(d("(m*id1);(m)"), d("(m*id1);m"));
    assert!(!equals(&d("s;s"), &identity(2)));
    assert!(!equals(&d("(e*id1);s"), &d("id1*e")));
}

#[test]
fn too_wide_is_rejected() {
    let slices = vec![Slice::new(0, Gate::E, 64)];
    assert!(matches!(Diagram::from_slices(64, slices), Err(DiagramError::CapacityExceeded { .. })));
    let chain = vec![Slice::new(0, Gate::M, 0)];
    assert!(matches!(Diagram::from_slices(3, chain), Err(DiagramError::MalformedDiagram { .. })));
}

#[test]
fn enumerate_small_cases() {
    assert_eq!(enumerate_diagrams(1, 1, 0), vec![identity(1)]);
    assert_eq!(enumerate_diagrams(0, 1, 1), vec![d("e")]);
}

/// Counts interchange classes of raw expressions, independently of the
/// scheduler, and compares with the enumerator.
#[test]
fn enumerate_counts_match_brute_force() {
    for (p, q, n) in [(2, 1, 2), (2, 1, 3), (0, 2, 3), (2, 2, 3), (3, 1, 3), (1, 2, 3)] {
        let classes: std::collections::BTreeSet<Vec<Slice>> =
            raw_expressions(p, q, n).iter().map(|s| class_key(s)).collect();
        let got = enumerate_diagrams(p, q, n);
        assert_eq!(got.len(), classes.len(), "p={p} q={q} n={n}");
    }
    assert_eq!(enumerate_diagrams(2, 1, 2).len(), 2);
}

/// Canonical form is constant on interchange classes and the canonical
/// presentation belongs to the class, for every diagram up to 6 gates.
#[test]
fn canonical_form_agrees_with_interchange_classes() {
    let mut checked = 0;
    for p in 0..=3 {
        for level in enumerate_diagrams_upto(p, 3, 6) {
            for phi in level {
                for pres in interchange_closure(phi.slices()) {
                    let slices: Vec<Slice> = pres.into_iter().map(|t| t.0).collect();
                    assert_eq!(canonical_form(p, &slices).unwrap(), phi);
                }
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn parse_print_round_trip_small() {
    for p in 0..=3 {
        for level in enumerate_diagrams_upto(p, 3, 5) {
            for phi in level {
                let text = print_diagram(&phi);
                assert_eq!(parse_diagram(&text).unwrap(), phi, "{text}");
            }
        }
    }
}

#[test]
fn parse_errors() {
    assert!(parse_diagram("(1*e)").is_err());
    assert!(parse_diagram("m;").is_err());
    assert!(parse_diagram("m;m").is_err());
    assert!(parse_diagram("id").is_err());
}

fn shuffled(phi: &Diagram, seeds: &[usize]) -> Vec<Slice> {
    let mut slices = phi.slices().to_vec();
    for &k in seeds {
        if slices.len() < 2 {
            break;
        }
        let k = k % (slices.len() - 1);
        if let Some((up, low)) = diagram::interchange(slices[k], slices[k + 1]) {
            slices[k] = up;
            slices[k + 1] = low;
        }
    }
    slices
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn shuffles_keep_canonical_form(phi in arb_diagram(4, 10), seeds in proptest::collection::vec(0..64usize, 20)) {
        let slices = shuffled(&phi, &seeds);
        prop_assert_eq!(canonical_form(phi.inputs(), &slices).unwrap(), phi.clone());
        prop_assert_eq!(class_key(&slices), class_key(phi.slices()));
    }

    #[test]
    fn canonical_is_idempotent_and_keeps_counts(phi in arb_diagram(4, 10)) {
        let again = canonical_form(phi.inputs(), phi.slices()).unwrap();
        prop_assert_eq!(&again, &phi);
        prop_assert_eq!(again.gate_count(), phi.gate_count());
        prop_assert_eq!((again.inputs(), again.outputs()), (phi.inputs(), phi.outputs()));
    }

    #[test]
    fn port_graph_round_trip(phi in arb_diagram(4, 10)) {
        prop_assert_eq!(PortGraph::from_diagram(&phi).to_diagram().unwrap(), phi);
    }

    #[test]
    fn print_parse_round_trip(phi in arb_diagram(4, 10)) {
        prop_assert_eq!(parse_diagram(&print_diagram(&phi)).unwrap(), phi);
    }

    #[test]
    fn composition_laws(a in arb_diagram(3, 4), b in arb_diagram(3, 4), c in arb_diagram(3, 4),
                        x in proptest::collection::vec((0..3usize, 0..64usize), 0..4),
                        y in proptest::collection::vec((0..3usize, 0..64usize), 0..4)) {
        // parallel composition is always defined
        let l = par_compose(&par_compose(&a, &b).unwrap(), &c).unwrap();
        let r = par_compose(&a, &par_compose(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        // build a composable chain a ; f ; g
        let f = build_diagram(a.outputs(), &x);
        let g = build_diagram(f.outputs(), &y);
        let l = seq_compose(&seq_compose(&a, &f).unwrap(), &g).unwrap();
        let r = seq_compose(&a, &seq_compose(&f, &g).unwrap()).unwrap();
        prop_assert_eq!(&l, &r);
        prop_assert_eq!(l.gate_count(), a.gate_count() + f.gate_count() + g.gate_count());
        prop_assert_eq!(seq_compose(&identity(a.inputs()), &a).unwrap(), a.clone());
        prop_assert_eq!(seq_compose(&a, &identity(a.outputs())).unwrap(), a.clone());
        prop_assert_eq!(par_compose(&identity(0), &a).unwrap(), a.clone());
    }

    #[test]
    fn interchange_law(a in arb_diagram(3, 4), b in arb_diagram(3, 4)) {
        let (p, q) = (a.inputs(), a.outputs());
        let (p2, q2) = (b.inputs(), b.outputs());
        let both = par_compose(&a, &b).unwrap();
        let first = seq_compose(&par_compose(&a, &identity(p2)).unwrap(), &par_compose(&identity(q), &b).unwrap()).unwrap();
        let second = seq_compose(&par_compose(&identity(p), &b).unwrap(), &par_compose(&a, &identity(q2)).unwrap()).unwrap();
        prop_assert_eq!(&first, &both);
        prop_assert_eq!(&second, &both);
    }
}
