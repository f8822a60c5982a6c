mod oracles;

use std::collections::{BTreeSet, HashMap};

use oracles::{arb_diagram, factorization_redexes, sinks};
use proptest::prelude::*;
use smc_core::diagram::enumerate_diagrams_upto;
use smc_core::rewrite::structural_normal_form;
use smc_core::rewrite::{apply_redex, find_redexes, normalize, normalize_with_budget, Redex, RuleSet, Strategy};
use smc_core::*;

fn names(phi: &Diagram, rules: &RuleSet) -> Vec<String> {
    find_redexes(phi, rules).iter().map(|r| rules.rules[r.rule].name.clone()).collect()
}

#[test]
fn catalogs() {
    let m = RuleSet::monoidal();
    let f = RuleSet::symmetric();
    let gm = RuleSet::guiraud_malbos();
    assert_eq!(m.rules.len(), 3);
    assert_eq!(f.rules.len(), 12);
    assert_eq!(f.rules.iter().filter(|r| r.structural).count(), 7);
    assert_eq!(gm.rules.len(), 11);
    assert!(gm.index_of("sms").is_none());
    let mss = &gm.rules[gm.index_of("mss").unwrap()];
    assert_eq!(mss.lhs, d("(id1*m);s"));
    assert_eq!(mss.rhs, d("(s*id1);(id1*s);(m*id1)"));
    for r in &f.rules {
        assert_eq!((r.lhs.inputs(), r.lhs.outputs()), (r.rhs.inputs(), r.rhs.outputs()));
        assert!(r.lhs.gate_count() >= 1);
    }
    assert!(Rule::new("bad", d("m"), d("s"), false).is_err());
    assert!(Rule::new("bad", d("id1"), d("id1"), false).is_err());
}

#[test]
fn find_redexes_examples() {
    let f = RuleSet::symmetric();
    assert_eq!(names(&d("(m*id1);m"), &f), ["alpha"]);
    assert_eq!(find_redexes(&d("(m*id1);m"), &f)[0].gates, [0, 1]);
    assert!(find_redexes(&identity(4), &f).is_empty());
    let sss = find_redexes(&d("s;s;s"), &f);
    assert_eq!(sss.len(), 2);
    assert!(sss.iter().all(|r| f.rules[r.rule].name == "ss"));
    assert!(sss[0].overlaps(&sss[1]));
}

#[test]
fn apply_redex_examples() {
    let f = RuleSet::symmetric();
    let apply_only = |phi: &Diagram| {
        let rs = find_redexes(phi, &f);
        assert_eq!(rs.len(), 1, "{phi}");
        apply_redex(phi, &f, &rs[0]).unwrap().target
    };
    assert_eq!(apply_only(&d("(e*id1);m")), identity(1));
    assert_eq!(apply_only(&d("s;m")), d("m"));
    assert_eq!(apply_only(&d("id2*((e*id1);m)")), identity(3));
    let stale = Redex { rule: 0, gates: vec![0, 1] };
    assert!(matches!(apply_redex(&d("s;m"), &f, &stale), Err(RewriteError::StaleRedex { .. })));
    let out_of_range = Redex { rule: 5, gates: vec![0, 7] };
    assert!(apply_redex(&d("s;m"), &f, &out_of_range).is_err());
}

#[test]
fn gate_map_tracks_context() {
    let f = RuleSet::symmetric();
    let phi = d("(s*id1);(m*id1);m");
    let tau = find_redexes(&phi, &f).into_iter().find(|r| f.rules[r.rule].name == "tau").unwrap();
    let applied = apply_redex(&phi, &f, &tau).unwrap();
    assert_eq!(applied.target, d("(m*id1);m"));
    assert_eq!(applied.survivors, vec![None, None, Some(1)]);
    assert_eq!(applied.inserted, vec![0]);
}

#[test]
fn normalize_examples() {
    let f = RuleSet::symmetric();
    let (nf, path) = normalize(&d("(m*id1);m"), &f, Strategy::Leftmost).unwrap();
    assert_eq!(nf, d("(id1*m);m"));
    assert_eq!(path.len(), 1);
    let (nf, path) = normalize(&d("s;s"), &f, Strategy::Leftmost).unwrap();
    assert_eq!(nf, identity(2));
    assert_eq!(path.len(), 1);
    assert!(f.rules[path.steps[0].redex.rule].structural);

    let phi = d("(s*e);(id1*m);m");
    let (expected, _) = normalize(&phi, &f, Strategy::Leftmost).unwrap();
    for seed in 0..10 {
        assert_eq!(normalize(&phi, &f, Strategy::Random(seed)).unwrap().0, expected);
    }
    assert_eq!(sinks(&phi, &f, &mut HashMap::new()), BTreeSet::from([expected]));
}

#[test]
fn structural_normal_form_examples() {
    let (nf, path) = structural_normal_form(&d("s;s;m"));
    assert_eq!(nf, d("m"));
    assert_eq!(path.len(), 1);
    assert_eq!(structural_normal_form(&d("(m*id1);m")).0, d("(m*id1);m"));
    let (nf, path) = structural_normal_form(&d("(m*id1);s"));
    assert_eq!(nf, d("(id1*s);(s*id1);(id1*m)"));
    assert_eq!(path.len(), 1);
}

/// Sometimes quoted as the start of a GM loop; it has no GM redex at all.
#[test]
fn guiraud_malbos_start_is_irreducible() {
    let gm = RuleSet::guiraud_malbos();
    let phi = d("(id1*s);(s*id1);(id1*s);(m*id1)");
    assert!(find_redexes(&phi, &gm).is_empty());
    let (nf, path) = normalize_with_budget(&phi, &gm, Strategy::Leftmost, 100).unwrap();
    assert_eq!(nf, phi);
    assert!(path.is_empty());
}

#[test]
fn budget_is_enforced() {
    let f = RuleSet::symmetric();
    let phi = d("(m*id2);(m*id1);m");
    assert_eq!(
        normalize_with_budget(&phi, &f, Strategy::Leftmost, 1),
        Err(RewriteError::BudgetExhausted { budget: 1 })
    );
}

#[test]
fn matching_agrees_with_factorizations_up_to_six_gates() {
    for rules in [RuleSet::symmetric(), RuleSet::guiraud_malbos()] {
        for p in 0..=4 {
            for level in enumerate_diagrams_upto(p, 4, 6) {
                for phi in level {
                    let got: BTreeSet<(usize, Vec<usize>)> =
                        find_redexes(&phi, &rules).into_iter().map(|r| (r.rule, r.gates)).collect();
                    assert_eq!(got, factorization_redexes(&phi, &rules), "{phi}");
                }
            }
        }
    }
}

#[test]
fn monoidal_normal_forms_are_unique() {
    let m = RuleSet::monoidal();
    let mut memo = HashMap::new();
    for p in 0..=4 {
        for level in enumerate_diagrams_upto(p, 4, 6) {
            for phi in level {
                let s = sinks(&phi, &m, &mut memo);
                assert_eq!(s.len(), 1, "{phi}");
                assert_eq!(normalize(&phi, &m, Strategy::Leftmost).unwrap().0, *s.first().unwrap());
            }
        }
    }
}

proptest! {
    #[test]
    fn steps_preserve_arity_and_replay(phi in arb_diagram(4, 12), seed in any::<u64>()) {
        let f = RuleSet::symmetric();
        let (nf, path) = normalize(&phi, &f, Strategy::Random(seed)).unwrap();
        prop_assert!(find_redexes(&nf, &f).is_empty());
        let mut cur = phi.clone();
        for step in &path.steps {
            prop_assert_eq!(&step.source, &cur);
            let rule = &f.rules[step.redex.rule];
            let applied = apply_redex(&cur, &f, &step.redex).unwrap();
            prop_assert_eq!(&applied.target, &step.target);
            prop_assert_eq!((applied.target.inputs(), applied.target.outputs()), (phi.inputs(), phi.outputs()));
            prop_assert_eq!(
                applied.target.gate_count() + rule.lhs.gate_count(),
                cur.gate_count() + rule.rhs.gate_count()
            );
            cur = applied.target;
        }
        prop_assert_eq!(cur, nf.clone());
        prop_assert_eq!(normalize(&phi, &f, Strategy::Leftmost).unwrap().0, nf);
    }

    #[test]
    fn structural_normal_form_is_structurally_irreducible(phi in arb_diagram(4, 10)) {
        let st = RuleSet::symmetric().structural_part();
        let (nf, path) = structural_normal_form(&phi);
        prop_assert!(find_redexes(&nf, &st).is_empty());
        prop_assert!(path.steps.iter().all(|s| st.rules[s.redex.rule].structural));
    }
}

/// Structural rules alone are not confluent: the `ss`/`ms` overlap below
/// needs `tau` to close (see the decisions ledger).
#[test]
fn structural_rules_alone_have_two_sinks() {
    let st = RuleSet::symmetric().structural_part();
    let phi = d("(s*id1);(m*id1);s;s");
    let found = sinks(&phi, &st, &mut HashMap::new());
    assert_eq!(found, BTreeSet::from([d("(s*id1);(m*id1)"), d("(id1*s);(s*id1);(id1*s);(id1*m);s")]));
    let f = RuleSet::symmetric();
    let nfs: BTreeSet<Diagram> = found.iter().map(|x| normalize(x, &f, Strategy::Leftmost).unwrap().0).collect();
    assert_eq!(nfs.len(), 1);
}

#[test]
fn rule_file_round_trip() {
    for set in [RuleSet::monoidal(), RuleSet::symmetric(), RuleSet::guiraud_malbos()] {
        let back = RuleSet::parse(&set.name, &set.to_text()).unwrap();
        assert_eq!(back, set);
    }
    let custom = RuleSet::parse("X", "# comment\n\nidm : m => m\n").unwrap();
    assert_eq!(custom.rules.len(), 1);
    assert!(!custom.rules[0].structural);
    assert!(RuleSet::parse("X", "bad m => m").is_err());
    assert!(RuleSet::parse("X", "bad weird : m => m").is_err());
    assert!(RuleSet::parse("X", "bad : m => s").is_err());
}
