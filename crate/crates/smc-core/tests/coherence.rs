mod oracles;

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smc_core::coherence::expansion::EXPANSION_DATA;
use smc_core::coherence::*;
use smc_core::{d, find_redexes, RuleSet};

fn f() -> &'static CellCatalog {
    static F: OnceLock<CellCatalog> = OnceLock::new();
    F.get_or_init(CellCatalog::symmetric)
}

fn m() -> &'static CellCatalog {
    static M: OnceLock<CellCatalog> = OnceLock::new();
    M.get_or_init(CellCatalog::monoidal)
}

fn f_table() -> &'static ExpansionTable {
    static T: OnceLock<ExpansionTable> = OnceLock::new();
    T.get_or_init(|| ExpansionTable::builtin(f()).unwrap())
}

fn m_table() -> &'static ExpansionTable {
    static T: OnceLock<ExpansionTable> = OnceLock::new();
    T.get_or_init(|| ExpansionTable::builtin(m()).unwrap())
}

fn term(text: &str) -> Term {
    parse_term(text).unwrap()
}

fn rule_of(mv: &Move) -> &'static str {
    let rules = &f().rules;
    let name = &rules.rules[mv.step.redex.rule].name;
    rules.rules.iter().find(|r| &r.name == name).map(|r| r.name.as_str()).unwrap()
}

const HEXAGON: &str = include_str!("../../smc/fixtures/hexagon.txt");

#[test]
fn terms_read_as_diagrams() {
    assert_eq!(term_to_diagram(&term("(x#y)"), &["x", "y"]).unwrap(), d("m"));
    assert_eq!(term_to_diagram(&term("(y#(x#I))"), &["x", "y"]).unwrap(), d("(s*e);(id1*m);m"));
    assert_eq!(term_to_diagram(&term("I"), &[]).unwrap(), d("e"));
    assert_eq!(term_to_diagram(&term("x"), &["x"]).unwrap(), d("id1"));
}

#[test]
fn term_errors() {
    assert_eq!(term_to_diagram(&term("(x#x)"), &["x"]), Err(CoherenceError::NonLinearTerm("x".into())));
    assert_eq!(term_to_diagram(&term("(x#z)"), &["x", "y"]), Err(CoherenceError::UnknownVariable("z".into())));
    assert_eq!(term_to_diagram(&term("x"), &["x", "y"]), Err(CoherenceError::MissingVariable("y".into())));
}

#[test]
fn primary_diagrams_read_back() {
    for (t, order) in [("(x#y)", vec!["x", "y"]), ("(y#(x#I))", vec!["x", "y"]), ("((z#x)#(I#y))", vec!["x", "y", "z"])]
    {
        let dd = term_to_diagram(&term(t), &order).unwrap();
        assert_eq!(read_diagram(&dd, &order), Some(term(t)));
    }
    assert_eq!(read_diagram(&d("s"), &["x", "y"]), None);
}

#[test]
fn primary_diagrams_are_not_unique_structural_normal_forms() {
    // Two structurally irreducible diagrams read as the same term.
    let structural = RuleSet::symmetric().structural_part();
    let a = d("(e*e*id1);(m*id1);m");
    let b = d("(id1*e*e);(id1*m);s;m");
    for x in [&a, &b] {
        assert!(find_redexes(x, &structural).is_empty());
        assert_eq!(read_diagram(x, &["x"]), Some(term("((I#I)#x)")));
    }
    assert_ne!(a, b);
    assert_eq!(term_to_diagram(&term("((I#I)#x)"), &["x"]).unwrap(), a);
}

/// A random term whose leaves are `vars` in order, with a few units.
fn random_term(rng: &mut ChaCha8Rng, vars: &[&str]) -> Term {
    use rand::Rng;
    match vars.len() {
        0 => [Term::Unit, Term::prod(Term::Unit, Term::Unit)][rng.gen_range(0..2)].clone(),
        1 if rng.gen_bool(0.7) => Term::var(vars[0]),
        1 if rng.gen_bool(0.5) => Term::prod(Term::Unit, Term::var(vars[0])),
        1 => Term::prod(Term::var(vars[0]), Term::Unit),
        n => {
            let cut = rng.gen_range(1..n);
            Term::prod(random_term(rng, &vars[..cut]), random_term(rng, &vars[cut..]))
        }
    }
}

proptest! {
    #[test]
    fn read_inverts_term_to_diagram(n in 0usize..=4, seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let all = ["x", "y", "z", "w"];
        let mut leaves = all[..n].to_vec();
        leaves.shuffle(&mut rng);
        let mut order = all[..n].to_vec();
        order.shuffle(&mut rng);
        let t = random_term(&mut rng, &leaves);
        let dd = term_to_diagram(&t, &order).unwrap();
        prop_assert_eq!(dd.inputs(), n);
        prop_assert_eq!(dd.outputs(), 1);
        prop_assert_eq!(read_diagram(&dd, &order), Some(t));
    }
}

fn generator(text: &str) -> MorGen {
    match parse_morphism(text).unwrap() {
        MorExpr::Gen(g) => g,
        other => panic!("{other:?} is not a generator"),
    }
}

#[test]
fn associator_is_a_forward_step() {
    let order = ["x", "y", "z"];
    let z = morgen_to_edge(&generator("a(x,y,z)"), &order).unwrap();
    assert_eq!(z.len(), 1);
    assert!(z.moves[0].is_forward());
    assert_eq!(rule_of(&z.moves[0]), "alpha");
    assert_eq!(z.start, d("(m*id1);m"));
    assert_eq!(z.end(), &d("(id1*m);m"));
}

#[test]
fn symmetry_is_a_backward_step() {
    let z = morgen_to_edge(&generator("x(x,y)"), &["x", "y"]).unwrap();
    assert_eq!(z.len(), 1);
    let mv = &z.moves[0];
    assert!(!mv.is_forward());
    assert_eq!(rule_of(mv), "tau");
    assert_eq!(mv.step.source, d("s;m"));
    assert_eq!(mv.step.target, d("m"));
    assert_eq!(z.start, d("m"));
}

#[test]
fn identity_is_empty() {
    let z = morgen_to_edge(&generator("1((x#y))"), &["x", "y"]).unwrap();
    assert!(z.is_empty());
    assert_eq!(z.start, d("m"));
}

#[test]
fn whiskered_unitor() {
    let f = parse_morphism("l(x) # 1(y)").unwrap();
    let z = mor_to_zigzag(&f, &["x", "y"]).unwrap();
    assert_eq!(z.len(), 1);
    assert!(z.moves[0].is_forward());
    assert_eq!(rule_of(&z.moves[0]), "l");
    assert_eq!(z.start, term_to_diagram(&term("((I#x)#y)"), &["x", "y"]).unwrap());
    assert_eq!(z.end(), &d("m"));
}

#[test]
fn composition_must_match() {
    let f = parse_morphism("a(x,y,z) . a(x,y,z)").unwrap();
    assert!(matches!(f.sides(), Err(CoherenceError::CompositionMismatch { .. })));
    let g = parse_morphism("a(x,y,z) . a(x,y,z)~").unwrap();
    let z = mor_to_zigzag(&g, &["x", "y", "z"]).unwrap();
    assert_eq!(z.start, z.end().clone());
}

#[test]
fn equal_zigzags_need_no_surgery() {
    let z = mor_to_zigzag(&parse_morphism("a(x,y,z) . x(x,(y#z))").unwrap(), &["x", "y", "z"]).unwrap();
    let cert = Certifier::new(f()).certify_equal(&z, &z).unwrap();
    assert!(cert.surgeries.is_empty());
    validate(&cert, f()).unwrap();
}

#[test]
fn parallel_check() {
    let a = Zigzag::empty(d("m"));
    let b = Zigzag::empty(d("s;m"));
    assert_eq!(Certifier::new(f()).certify_equal(&a, &b), Err(CoherenceError::NotParallel));
}

#[test]
fn hexagon_is_one_g_and_one_exa2() {
    let poly = Polygon::parse(HEXAGON).unwrap();
    assert_eq!(poly.order(), ["y", "z", "x"]);
    for certifier in [Certifier::new(f()), Certifier::expanding(f(), f_table())] {
        let mut certifier = certifier;
        let certs = poly.certify(&mut certifier).unwrap();
        assert_eq!(certs.len(), 1);
        let counts = certs[0].certificate.cell_counts();
        assert_eq!(counts.get(&CellName::G), Some(&1));
        assert_eq!(counts.get(&CellName::Exa2), Some(&1));
        assert!(counts.keys().all(|c| c.is_plumbing() || *c == CellName::G || *c == CellName::Exa2));
        validate(&certs[0].certificate, f()).unwrap();
    }
}

#[test]
fn monoidal_kelly_cells_need_only_penta_and_tria() {
    for id in ["kelly-1", "kelly-2", "kelly-3"] {
        let cell = m().by_id(id).unwrap();
        let z1 = Zigzag::forward(cell.source.clone(), &cell.left);
        let z2 = Zigzag::forward(cell.source.clone(), &cell.right);
        let cert = Certifier::expanding(m(), m_table()).certify_equal(&z1, &z2).unwrap();
        assert!(cert.vocabulary().iter().all(|c| matches!(c, CellName::Penta | CellName::Tria)), "{id}");
        validate(&cert, m()).unwrap();
    }
}

#[test]
fn builtin_table_has_every_derived_cell() {
    let ids: Vec<&String> = f_table().ids().collect();
    assert_eq!(ids.len(), 17);
    for c in f().cells.iter().filter(|c| c.name.is_derived()) {
        let cert = expand_kelly(&c.id, f_table(), f()).unwrap();
        validate(&cert, f()).unwrap();
        assert!(cert.vocabulary().iter().all(|n| !n.is_derived()), "{}", c.id);
        let back = invert(&cert, f()).unwrap();
        validate(&back, f()).unwrap();
    }
    assert_eq!(m_table().len(), 3);
}

#[test]
fn expansions_are_found_by_source() {
    let by_id = expand_kelly("kelly-3", f_table(), f()).unwrap();
    assert_eq!(expand_kelly("(e*e);m", f_table(), f()).unwrap(), by_id);
}

#[test]
fn only_derived_cells_have_expansions() {
    for key in ["coherence-1", "simply-foldable-1", "(m*id2);(m*id1);m", "no-such-peak"] {
        assert_eq!(expand_kelly(key, f_table(), f()), Err(CoherenceError::UnknownPeak(key.into())));
    }
}

#[test]
fn derivation_reproduces_the_shipped_table() {
    let entries = derive_table(f(), m()).unwrap();
    assert_eq!(write_expansions(&entries, f()), EXPANSION_DATA);
}

#[test]
fn script_round_trip() {
    let poly = Polygon::parse(HEXAGON).unwrap();
    let cert = poly.certify(&mut Certifier::new(f())).unwrap().remove(0).certificate;
    let text = write_certificate(&cert, &f().rules, Some(f()));
    let script = parse_certificate(&text, &f().rules).unwrap();
    assert_eq!(script.certificate, cert);
    assert_eq!(script.checks.len(), cert.surgeries.len());
    script.check(f()).unwrap();
    assert_eq!(write_certificate(&script.certificate, &f().rules, Some(f())), text);
}

#[test]
fn broken_checkpoint_is_caught() {
    let cert = expand_kelly("kelly-3", f_table(), f()).unwrap();
    let text = write_certificate(&cert, &f().rules, Some(f()));
    let broken = text.replacen("CHECK ", "CHECK 9", 1);
    let script = parse_certificate(&broken, &f().rules).unwrap();
    assert!(matches!(script.check(f()), Err(CoherenceError::InvalidSurgery { index: 0, .. })));
}

#[test]
fn swapped_cell_fails_at_its_index() {
    let poly = Polygon::parse(HEXAGON).unwrap();
    let cert = poly.certify(&mut Certifier::new(f())).unwrap().remove(0).certificate;
    let (k, _) =
        cert.surgeries.iter().enumerate().find(|(_, s)| matches!(s, Surgery::Cell { cell: CellName::G, .. })).unwrap();
    let mut broken = cert.clone();
    if let Surgery::Cell { cell, .. } = &mut broken.surgeries[k] {
        *cell = CellName::Penta;
    }
    match validate(&broken, f()) {
        Err(CoherenceError::InvalidSurgery { index, .. }) => assert_eq!(index, k),
        other => panic!("expected a failure at surgery {k}, got {other:?}"),
    }
}

#[test]
fn wrong_target_is_caught() {
    let mut cert = expand_kelly("kelly-3", f_table(), f()).unwrap();
    cert.surgeries.pop();
    assert!(validate(&cert, f()).is_err());
}

#[test]
fn random_pairs_certify_with_base_vocabulary() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let (z1, z2) = oracles::random_parallel_pair(&mut rng, &f().rules, 8);
        let cert = Certifier::expanding(f(), f_table()).certify_equal(&z1, &z2).unwrap();
        validate(&cert, f()).unwrap();
        assert!(cert.vocabulary().iter().all(|c| c.is_base() || matches!(c, CellName::Foldable(_))));
    }
}
