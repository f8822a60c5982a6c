//! Tensor terms, morphism expressions, and their reading as diagrams and
//! zigzags of rewrite steps.
//!
//! Inputs of a diagram are labelled by a variable order. A term is read as
//! the diagram that permutes the inputs into the term's leaf order with `s`
//! gates, then builds the term bottom-up with `e` for the unit and `m` for
//! products, brought to structural normal form.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::coherence::zigzag::{Move, Zigzag};
use crate::coherence::CoherenceError;
use crate::diagram::{Diagram, Gate, Slice};
use crate::rewrite::{apply_redex, find_redexes, structural_normal_form, RewriteStep, RuleSet};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Unit,
    Prod(Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn prod(a: Term, b: Term) -> Term {
        Term::Prod(Box::new(a), Box::new(b))
    }

    /// Variables from left to right, with repetitions.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => out.push(v),
            Term::Unit => {}
            Term::Prod(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    fn at(&self, path: &[bool]) -> Option<&Term> {
        match (path.split_first(), self) {
            (None, _) => Some(self),
            (Some((&right, rest)), Term::Prod(a, b)) => if right { b } else { a }.at(rest),
            _ => None,
        }
    }

    fn replaced(&self, path: &[bool], with: &Term) -> Term {
        match (path.split_first(), self) {
            (None, _) => with.clone(),
            (Some((&right, rest)), Term::Prod(a, b)) => {
                if right {
                    Term::Prod(a.clone(), Box::new(b.replaced(rest, with)))
                } else {
                    Term::Prod(Box::new(a.replaced(rest, with)), b.clone())
                }
            }
            _ => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Unit => f.write_str("I"),
            Term::Prod(a, b) => write!(f, "({a}#{b})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MorKind {
    Alpha,
    Lambda,
    Rho,
    Tau,
    Gamma,
    Identity,
}

impl MorKind {
    fn arity(self) -> usize {
        match self {
            MorKind::Alpha | MorKind::Gamma => 3,
            MorKind::Tau => 2,
            MorKind::Lambda | MorKind::Rho | MorKind::Identity => 1,
        }
    }

    fn letter(self) -> char {
        match self {
            MorKind::Alpha => 'a',
            MorKind::Lambda => 'l',
            MorKind::Rho => 'r',
            MorKind::Tau => 'x',
            MorKind::Gamma => 'g',
            MorKind::Identity => '1',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MorGen {
    pub kind: MorKind,
    pub at: Vec<Term>,
    pub inverted: bool,
}

impl MorGen {
    fn sides(&self) -> (Term, Term) {
        let t = |i: usize| self.at[i].clone();
        match self.kind {
            MorKind::Alpha => (Term::prod(Term::prod(t(0), t(1)), t(2)), Term::prod(t(0), Term::prod(t(1), t(2)))),
            MorKind::Lambda => (Term::prod(Term::Unit, t(0)), t(0)),
            MorKind::Rho => (Term::prod(t(0), Term::Unit), t(0)),
            MorKind::Tau => (Term::prod(t(0), t(1)), Term::prod(t(1), t(0))),
            MorKind::Gamma => (Term::prod(t(0), Term::prod(t(1), t(2))), Term::prod(t(1), Term::prod(t(0), t(2)))),
            MorKind::Identity => (t(0), t(0)),
        }
    }

    pub fn source(&self) -> Term {
        let (s, t) = self.sides();
        if self.inverted {
            t
        } else {
            s
        }
    }

    pub fn target(&self) -> Term {
        let (s, t) = self.sides();
        if self.inverted {
            s
        } else {
            t
        }
    }

    pub fn inverse(&self) -> MorGen {
        MorGen { inverted: !self.inverted, ..self.clone() }
    }
}

impl fmt::Display for MorGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.at.iter().map(|t| t.to_string()).collect();
        write!(f, "{}({})", self.kind.letter(), args.join(","))?;
        if self.inverted {
            f.write_str("~")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MorExpr {
    Gen(MorGen),
    Compose(Box<MorExpr>, Box<MorExpr>),
    Tensor(Box<MorExpr>, Box<MorExpr>),
    Inverse(Box<MorExpr>),
}

impl MorExpr {
    /// Source and target terms. Composition needs matching terms.
    pub fn sides(&self) -> Result<(Term, Term), CoherenceError> {
        match self {
            MorExpr::Gen(g) => Ok((g.source(), g.target())),
            MorExpr::Compose(f, g) => {
                let (a, b) = f.sides()?;
                let (c, d) = g.sides()?;
                if b != c {
                    return Err(CoherenceError::CompositionMismatch { left: b.to_string(), right: c.to_string() });
                }
                Ok((a, d))
            }
            MorExpr::Tensor(f, g) => {
                let (a, b) = f.sides()?;
                let (c, d) = g.sides()?;
                Ok((Term::prod(a, c), Term::prod(b, d)))
            }
            MorExpr::Inverse(f) => f.sides().map(|(a, b)| (b, a)),
        }
    }

    /// Generators in order, each with its position in the whole term.
    fn flatten(&self, out: &mut Vec<(Vec<bool>, MorGen)>) {
        match self {
            MorExpr::Gen(g) => {
                if g.kind != MorKind::Identity {
                    out.push((Vec::new(), g.clone()));
                }
            }
            MorExpr::Compose(f, g) => {
                f.flatten(out);
                g.flatten(out);
            }
            MorExpr::Tensor(f, g) => {
                for (side, e) in [(false, f), (true, g)] {
                    let mut inner = Vec::new();
                    e.flatten(&mut inner);
                    out.extend(inner.into_iter().map(|(mut p, g)| {
                        p.insert(0, side);
                        (p, g)
                    }));
                }
            }
            MorExpr::Inverse(f) => {
                let mut inner = Vec::new();
                f.flatten(&mut inner);
                out.extend(inner.into_iter().rev().map(|(p, g)| (p, g.inverse())));
            }
        }
    }
}

struct TextParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> TextParser<'a> {
    fn new(text: &'a str) -> Self {
        TextParser { src: text.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, message: &str) -> Result<T, CoherenceError> {
        Err(CoherenceError::Syntax { line: 1, message: format!("at byte {}: {message}", self.pos) })
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), CoherenceError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected '{}'", c as char))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.peek();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        (self.pos > start).then(|| core::str::from_utf8(&self.src[start..self.pos]).expect("ascii"))
    }

    fn term(&mut self) -> Result<Term, CoherenceError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let a = self.term()?;
            self.eat(b'#')?;
            let b = self.term()?;
            self.eat(b')')?;
            return Ok(Term::prod(a, b));
        }
        match self.ident() {
            Some("I") => Ok(Term::Unit),
            Some(v) if v.as_bytes()[0].is_ascii_alphabetic() => Ok(Term::var(v)),
            _ => self.err("expected a term"),
        }
    }

    fn compose(&mut self) -> Result<MorExpr, CoherenceError> {
        let mut acc = self.tensor()?;
        while self.peek() == Some(b'.') {
            self.pos += 1;
            acc = MorExpr::Compose(Box::new(acc), Box::new(self.tensor()?));
        }
        Ok(acc)
    }

    fn tensor(&mut self) -> Result<MorExpr, CoherenceError> {
        let mut acc = self.postfix()?;
        while self.peek() == Some(b'#') {
            self.pos += 1;
            acc = MorExpr::Tensor(Box::new(acc), Box::new(self.postfix()?));
        }
        Ok(acc)
    }

    fn postfix(&mut self) -> Result<MorExpr, CoherenceError> {
        let mut acc = self.atom()?;
        while self.peek() == Some(b'~') {
            self.pos += 1;
            acc = match acc {
                MorExpr::Gen(g) => MorExpr::Gen(g.inverse()),
                other => MorExpr::Inverse(Box::new(other)),
            };
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<MorExpr, CoherenceError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let inner = self.compose()?;
            self.eat(b')')?;
            return Ok(inner);
        }
        let kind = match self.ident() {
            Some("a") => MorKind::Alpha,
            Some("l") => MorKind::Lambda,
            Some("r") => MorKind::Rho,
            Some("x") => MorKind::Tau,
            Some("g") => MorKind::Gamma,
            Some("1") => MorKind::Identity,
            _ => return self.err("expected one of a l r x g 1"),
        };
        self.eat(b'(')?;
        let mut at = alloc::vec![self.term()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            at.push(self.term()?);
        }
        self.eat(b')')?;
        if at.len() != kind.arity() {
            return self.err(&format!("{} takes {} arguments", kind.letter(), kind.arity()));
        }
        Ok(MorExpr::Gen(MorGen { kind, at, inverted: false }))
    }

    fn finish(&mut self) -> Result<(), CoherenceError> {
        match self.peek() {
            None => Ok(()),
            Some(_) => self.err("unexpected trailing input"),
        }
    }
}

pub fn parse_term(text: &str) -> Result<Term, CoherenceError> {
    let mut p = TextParser::new(text);
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

pub fn parse_morphism(text: &str) -> Result<MorExpr, CoherenceError> {
    let mut p = TextParser::new(text);
    let f = p.compose()?;
    p.finish()?;
    Ok(f)
}

fn check_linear(t: &Term, order: &[&str]) -> Result<(), CoherenceError> {
    let vars = t.variables();
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(CoherenceError::NonLinearTerm(v.to_string()));
        }
        if !order.contains(v) {
            return Err(CoherenceError::UnknownVariable(v.to_string()));
        }
    }
    if let Some(v) = order.iter().find(|v| !vars.contains(v)) {
        return Err(CoherenceError::MissingVariable(v.to_string()));
    }
    Ok(())
}

/// `s` gates sorting the inputs, labelled by `order`, into `leaves`.
fn permutation(order: &[&str], leaves: &[&str]) -> Diagram {
    let n = order.len();
    let rank: Vec<usize> = order.iter().map(|v| leaves.iter().position(|l| l == v).expect("same variables")).collect();
    let mut cur = rank;
    let mut slices = Vec::new();
    let mut sorted = false;
    while !sorted {
        sorted = true;
        for i in 0..n.saturating_sub(1) {
            if cur[i] > cur[i + 1] {
                cur.swap(i, i + 1);
                slices.push(Slice::new(i, Gate::S, n - i - 2));
                sorted = false;
            }
        }
    }
    Diagram::from_slices(n, slices).expect("permutations are well formed")
}

fn tree(t: &Term) -> Diagram {
    match t {
        Term::Var(_) => Diagram::identity(1),
        Term::Unit => Diagram::gate(Gate::E),
        Term::Prod(a, b) => {
            tree(a).par(&tree(b)).and_then(|d| d.seq(&Diagram::gate(Gate::M))).expect("subtrees have one output")
        }
    }
}

/// `tree`, except that the node at `path` is built by `node`.
fn tree_with(t: &Term, path: &[bool], node: &dyn Fn(&Term) -> Diagram) -> Diagram {
    match (path.split_first(), t) {
        (None, _) => node(t),
        (Some((&right, rest)), Term::Prod(a, b)) => {
            let (da, db) =
                if right { (tree(a), tree_with(b, rest, node)) } else { (tree_with(a, rest, node), tree(b)) };
            da.par(&db).and_then(|d| d.seq(&Diagram::gate(Gate::M))).expect("subtrees have one output")
        }
        _ => tree(t),
    }
}

fn build(t: &Term, order: &[&str]) -> Diagram {
    permutation(order, &t.variables()).seq(&tree(t)).expect("widths agree")
}

/// The primary diagram of `t` under `order`.
pub fn term_to_diagram(t: &Term, order: &[&str]) -> Result<Diagram, CoherenceError> {
    check_linear(t, order)?;
    Ok(structural_normal_form(&build(t, order)).0)
}

/// Reads `d` with inputs labelled by `order`.
pub fn read_diagram(d: &Diagram, order: &[&str]) -> Option<Term> {
    if d.inputs() != order.len() || d.outputs() != 1 {
        return None;
    }
    let mut wires: Vec<Term> = order.iter().map(|v| Term::var(v)).collect();
    for s in d.slices() {
        let l = s.left();
        match s.gate {
            Gate::E => wires.insert(l, Term::Unit),
            Gate::M => {
                let b = wires.remove(l + 1);
                let a = wires.remove(l);
                wires.insert(l, Term::prod(a, b));
            }
            Gate::S => wires.swap(l, l + 1),
        }
    }
    wires.pop()
}

/// The leftmost structural normalization path of `d`, with steps in `rules`.
fn structural_path(d: &Diagram, rules: &RuleSet) -> Vec<RewriteStep> {
    let sub = RuleSet::symmetric().structural_part();
    let (_, path) = structural_normal_form(d);
    path.steps
        .into_iter()
        .map(|mut st| {
            st.redex.rule = rules.index_of(&sub.rules[st.redex.rule].name).expect("structural rules are in F");
            st
        })
        .collect()
}

/// One rewrite step `from => to` with the rule named `rule`.
fn single_step(from: &Diagram, to: &Diagram, rule: &str, rules: &RuleSet) -> Option<RewriteStep> {
    let k = rules.index_of(rule)?;
    find_redexes(from, rules).into_iter().filter(|r| r.rule == k).find_map(|redex| {
        let target = apply_redex(from, rules, &redex).ok()?.target;
        (&target == to).then(|| RewriteStep { source: from.clone(), redex, target })
    })
}

/// The zigzag `primary(src) <= .. <= x => y => .. => primary(tgt)` along the
/// structural paths of `x` and `y`, with `step` between them taken in
/// direction `forward` (`step` runs from x to y when forward, from y to x
/// otherwise).
fn around(x: &Diagram, step: RewriteStep, forward: bool, y: &Diagram, rules: &RuleSet) -> Zigzag {
    let down = structural_path(x, rules);
    let start = down.last().map_or(x.clone(), |s| s.target.clone());
    let mut moves: Vec<Move> = down.into_iter().rev().map(Move::backward).collect();
    moves.push(if forward { Move::forward(step) } else { Move::backward(step) });
    moves.extend(structural_path(y, rules).into_iter().map(Move::forward));
    Zigzag { start, moves }
}

/// The zigzag realizing the generator `g` at position `path` of the term
/// `whole`, between the primary diagrams of both ends.
fn whiskered_edge(
    whole: &Term,
    path: &[bool],
    g: &MorGen,
    order: &[&str],
    rules: &RuleSet,
) -> Result<Zigzag, CoherenceError> {
    let src = whole.replaced(path, &g.source());
    let tgt = whole.replaced(path, &g.target());
    check_linear(&src, order)?;
    check_linear(&tgt, order)?;
    let missing =
        || CoherenceError::NoFiller { diagram: src.to_string(), first: g.to_string(), second: tgt.to_string() };
    let (lhs_term, rhs_term) = g.sides();
    let (lhs_term, rhs_term) = (whole.replaced(path, &lhs_term), whole.replaced(path, &rhs_term));
    let rule = match g.kind {
        MorKind::Identity => return Ok(Zigzag::empty(term_to_diagram(&src, order)?)),
        MorKind::Alpha => "alpha",
        MorKind::Lambda => "l",
        MorKind::Rho => "r",
        MorKind::Tau => "tau",
        MorKind::Gamma => "gamma",
    };
    let primary_src = term_to_diagram(&src, order)?;
    let primary_tgt = term_to_diagram(&tgt, order)?;
    // (diagram reading the left side, diagram reading the right side, step,
    // whether the step runs from left to right)
    let mut options: Vec<(Diagram, Diagram, RewriteStep, bool)> = Vec::new();
    if matches!(g.kind, MorKind::Alpha | MorKind::Lambda | MorKind::Rho) {
        let (from, to) = (build(&lhs_term, order), build(&rhs_term, order));
        let step = single_step(&from, &to, rule, rules).ok_or_else(missing)?;
        options.push((from, to, step, true));
    } else {
        // the rule removes a crossing in front of a node: a diagram reading
        // one side, built on the leaves of the other, rewrites to the build
        // of the other
        let node = |t: &Term| -> Diagram {
            let m = Diagram::gate(Gate::M);
            let cross =
                |w: usize| Diagram::from_slices(w, alloc::vec![Slice::new(0, Gate::S, w - 2)]).expect("crossing");
            match (g.kind, t) {
                (MorKind::Tau, Term::Prod(a, b)) => {
                    tree(a).par(&tree(b)).and_then(|d| d.seq(&cross(2))).and_then(|d| d.seq(&m))
                }
                (_, Term::Prod(a, bc)) => match &**bc {
                    Term::Prod(b, c) => tree(a)
                        .par(&tree(b))
                        .and_then(|d| d.par(&tree(c)))
                        .and_then(|d| d.seq(&cross(3)))
                        .and_then(|d| d.seq(&Diagram::identity(1).par(&m).expect("par")))
                        .and_then(|d| d.seq(&m)),
                    _ => Ok(tree(t)),
                },
                _ => Ok(tree(t)),
            }
            .expect("node diagrams compose")
        };
        for plain_is_rhs in [true, false] {
            let plain = if plain_is_rhs { &rhs_term } else { &lhs_term };
            let d = permutation(order, &plain.variables()).seq(&tree_with(plain, path, &node)).expect("widths agree");
            let to = build(plain, order);
            let Some(step) = single_step(&d, &to, rule, rules) else { continue };
            options.push(if plain_is_rhs { (d, to, step, true) } else { (to, d, step, false) });
        }
    }
    let candidates = options.into_iter().map(|(left, right, step, along)| {
        if g.inverted {
            around(&right, step, !along, &left, rules)
        } else {
            around(&left, step, along, &right, rules)
        }
    });
    candidates
        .into_iter()
        .filter(|z| z.start == primary_src && z.end() == &primary_tgt && z.is_chained())
        .min_by_key(|z| z.len())
        .ok_or_else(missing)
}

/// The zigzag of the generator `g` applied to the whole term, between the
/// primary diagrams of its source and target.
pub fn morgen_to_edge(g: &MorGen, order: &[&str]) -> Result<Zigzag, CoherenceError> {
    whiskered_edge(&g.source(), &[], g, order, &RuleSet::symmetric())
}

/// The zigzag of a morphism expression: its generators one after the other,
/// each inside the context given by the tensors around it.
pub fn mor_to_zigzag(f: &MorExpr, order: &[&str]) -> Result<Zigzag, CoherenceError> {
    let rules = RuleSet::symmetric();
    let (src, _) = f.sides()?;
    let mut z = Zigzag::empty(term_to_diagram(&src, order)?);
    let mut gens = Vec::new();
    f.flatten(&mut gens);
    let mut cur = src;
    for (path, g) in gens {
        debug_assert_eq!(cur.at(&path), Some(&g.source()));
        let edge = whiskered_edge(&cur, &path, &g, order, &rules)?;
        z.moves.extend(edge.moves);
        cur = cur.replaced(&path, &g.target());
    }
    Ok(z)
}
