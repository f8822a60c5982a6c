//! Certificate generation. A loop of rewrite steps is flattened by filling
//! every local peak, then the two remaining forward paths are compared by
//! Newman induction: equal first steps are skipped, different ones are
//! bridged by a filler and both tails are compared recursively.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::coherence::cells::{CellCatalog, CellName};
use crate::coherence::expansion::ExpansionTable;
use crate::coherence::zigzag::{Move, Zigzag};
use crate::coherence::CoherenceError;
use crate::diagram::Diagram;
use crate::rewrite::{apply_redex, find_redexes, leftmost, Redex, RewriteStep, RuleSet};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Surgery {
    /// Replaces a placed side of `cell` by its other side. `forward` goes
    /// from the left side to the right side. The segment may also be the
    /// inverse of a side.
    Cell { at: usize, cell: CellName, forward: bool },
    /// Swaps the order of two disjoint steps.
    Square { at: usize },
    /// Removes a move followed by its inverse.
    Cancel { at: usize },
    /// Inserts `first` followed by its inverse.
    Insert { at: usize, first: Move },
}

impl Surgery {
    pub fn at(&self) -> usize {
        match self {
            Surgery::Cell { at, .. } | Surgery::Square { at } | Surgery::Cancel { at } | Surgery::Insert { at, .. } => {
                *at
            }
        }
    }

    pub fn shifted(&self, by: usize) -> Surgery {
        let mut s = self.clone();
        match &mut s {
            Surgery::Cell { at, .. } | Surgery::Square { at } | Surgery::Cancel { at } | Surgery::Insert { at, .. } => {
                *at += by
            }
        }
        s
    }

    pub fn cell_name(&self) -> CellName {
        match self {
            Surgery::Cell { cell, .. } => cell.clone(),
            Surgery::Square { .. } => CellName::DisjointSquare,
            Surgery::Cancel { .. } | Surgery::Insert { .. } => CellName::StaleCancel,
        }
    }
}

fn shift_all(list: Vec<Surgery>, by: usize) -> impl Iterator<Item = Surgery> {
    list.into_iter().map(move |s| s.shifted(by))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub rules: String,
    pub source: Zigzag,
    pub target: Zigzag,
    pub surgeries: Vec<Surgery>,
}

impl Certificate {
    /// Cell names used, in order of first use, plumbing excluded.
    pub fn vocabulary(&self) -> Vec<CellName> {
        let mut out: Vec<CellName> = Vec::new();
        for s in &self.surgeries {
            let name = s.cell_name();
            if !name.is_plumbing() && !out.contains(&name) {
                out.push(name);
            }
        }
        out
    }

    /// How often each non-plumbing cell is used.
    pub fn cell_counts(&self) -> BTreeMap<CellName, usize> {
        let mut out = BTreeMap::new();
        for s in &self.surgeries {
            let name = s.cell_name();
            if !name.is_plumbing() {
                *out.entry(name).or_insert(0) += 1;
            }
        }
        out
    }
}

/// Two forward paths from a common diagram to a common end, and surgeries
/// turning the first into the second.
type Bridge = (Vec<RewriteStep>, Vec<RewriteStep>, Vec<Surgery>);

pub struct Certifier<'a> {
    catalog: &'a CellCatalog,
    expansions: Option<&'a ExpansionTable>,
    normal: BTreeMap<Diagram, Vec<RewriteStep>>,
}

/// The current path of a derivation and the surgeries applied so far.
struct Session {
    cur: Vec<Move>,
    log: Vec<Surgery>,
}

impl Session {
    fn insert(&mut self, at: usize, first: Move) {
        let inv = first.inverse();
        self.cur.splice(at..at, [first.clone(), inv]);
        self.log.push(Surgery::Insert { at, first });
    }

    fn cancel(&mut self, at: usize) {
        debug_assert_eq!(self.cur[at + 1], self.cur[at].inverse());
        self.cur.drain(at..at + 2);
        self.log.push(Surgery::Cancel { at });
    }

    /// Records `surgeries` (relative to `at`) that turn the forward path
    /// `old` at `at` into `new`.
    fn replace(&mut self, at: usize, old: usize, new: &[RewriteStep], surgeries: Vec<Surgery>) {
        self.log.extend(shift_all(surgeries, at));
        self.cur.splice(at..at + old, new.iter().cloned().map(Move::forward));
    }
}

impl<'a> Certifier<'a> {
    /// Kelly and weak Kelly fillers are used as single cells.
    pub fn new(catalog: &'a CellCatalog) -> Certifier<'a> {
        Certifier { catalog, expansions: None, normal: BTreeMap::new() }
    }

    /// Kelly and weak Kelly fillers are replaced by their expansions.
    pub fn expanding(catalog: &'a CellCatalog, table: &'a ExpansionTable) -> Certifier<'a> {
        Certifier { catalog, expansions: Some(table), normal: BTreeMap::new() }
    }

    fn rules(&self) -> &'a RuleSet {
        &self.catalog.rules
    }

    /// Leftmost normalization path.
    pub fn normal_path(&mut self, x: &Diagram) -> Vec<RewriteStep> {
        if let Some(p) = self.normal.get(x) {
            return p.clone();
        }
        let rules = self.rules();
        let mut steps = Vec::new();
        let mut cur = x.clone();
        loop {
            if let Some(p) = self.normal.get(&cur) {
                steps.extend(p.iter().cloned());
                break;
            }
            let redexes = find_redexes(&cur, rules);
            let Some(r) = leftmost(&redexes) else { break };
            let next = apply_redex(&cur, rules, r).expect("found redexes apply").target;
            steps.push(RewriteStep { source: cur, redex: r.clone(), target: next.clone() });
            cur = next;
        }
        for k in 0..steps.len() {
            self.normal.entry(steps[k].source.clone()).or_insert_with(|| steps[k..].to_vec());
        }
        self.normal.entry(cur).or_default();
        steps
    }

    fn step(&self, x: &Diagram, r: &Redex) -> RewriteStep {
        let target = apply_redex(x, self.rules(), r).expect("redex of the current diagram").target;
        RewriteStep { source: x.clone(), redex: r.clone(), target }
    }

    /// The step `b` after `a` has fired, when the two do not overlap.
    fn residual(&self, x: &Diagram, a: &Redex, b: &Redex) -> RewriteStep {
        let applied = apply_redex(x, self.rules(), a).expect("redex of the current diagram");
        let mut gates: Vec<usize> = b.gates.iter().map(|&g| applied.survivors[g].expect("disjoint redexes")).collect();
        gates.sort_unstable();
        self.step(&applied.target, &Redex { rule: b.rule, gates })
    }

    fn direct(&mut self, x: &Diagram, a: &Redex, b: &Redex) -> Option<Bridge> {
        if !a.overlaps(b) {
            let first = [self.step(x, a), self.residual(x, a, b)];
            let second = [self.step(x, b), self.residual(x, b, a)];
            debug_assert_eq!(first[1].target, second[1].target);
            return Some((first.to_vec(), second.to_vec(), alloc::vec![Surgery::Square { at: 0 }]));
        }
        let placed = self.catalog.place(x, a, b)?;
        let cell = &self.catalog.cells[placed.cell];
        let surgeries = match (self.expansions, cell.name.is_derived()) {
            (Some(table), true) => {
                let entry = table.get(&cell.id)?;
                let list = if placed.forward { &entry.forward } else { &entry.backward };
                list.iter()
                    .map(|s| match s {
                        Surgery::Insert { at, first } => {
                            Surgery::Insert { at: *at, first: placed.context.lift_move(first) }
                        }
                        other => other.clone(),
                    })
                    .collect()
            }
            _ => alloc::vec![Surgery::Cell { at: 0, cell: cell.name.clone(), forward: placed.forward }],
        };
        Some((placed.first, placed.second, surgeries))
    }

    fn extend(&mut self, mut path: Vec<RewriteStep>) -> Vec<RewriteStep> {
        let end = path.last().expect("bridges are non-empty").target.clone();
        path.extend(self.normal_path(&end));
        path
    }

    /// A filler for the peak `(a, b)` at `x`, directly or through a third
    /// redex overlapping both.
    fn bridge(&mut self, x: &Diagram, a: &Redex, b: &Redex) -> Result<Bridge, CoherenceError> {
        if let Some(found) = self.direct(x, a, b) {
            return Ok(found);
        }
        for h in find_redexes(x, self.rules()) {
            if &h == a || &h == b {
                continue;
            }
            let Some((first, via_a, d1)) = self.direct(x, a, &h) else { continue };
            let Some((via_b, second, d2)) = self.direct(x, &h, b) else { continue };
            let (first, via_a) = (self.extend(first), self.extend(via_a));
            let (via_b, second) = (self.extend(via_b), self.extend(second));
            let mut surgeries = d1;
            surgeries.extend(shift_all(self.confluence(&via_a[1..], &via_b[1..])?, 1));
            surgeries.extend(d2);
            return Ok((first, second, surgeries));
        }
        Err(CoherenceError::NoFiller {
            diagram: x.to_string(),
            first: format!("{}@{:?}", self.rules().rules[a.rule].name, a.gates),
            second: format!("{}@{:?}", self.rules().rules[b.rule].name, b.gates),
        })
    }

    /// Surgeries turning the forward path `p` into `q`; both end at the same
    /// normal form.
    pub fn confluence(&mut self, p: &[RewriteStep], q: &[RewriteStep]) -> Result<Vec<Surgery>, CoherenceError> {
        let skip = p.iter().zip(q).take_while(|(x, y)| x == y).count();
        let (p, q) = (&p[skip..], &q[skip..]);
        if p.is_empty() && q.is_empty() {
            return Ok(Vec::new());
        }
        if p.is_empty() || q.is_empty() {
            return Err(CoherenceError::NotParallel);
        }
        let x = &p[0].source;
        let (first, second, d) = self.bridge(x, &p[0].redex, &q[0].redex)?;
        let (first, second) = (self.extend(first), self.extend(second));
        let mut out: Vec<Surgery> = shift_all(self.confluence(&p[1..], &first[1..])?, skip + 1).collect();
        out.extend(shift_all(d, skip));
        out.extend(shift_all(self.confluence(&second[1..], &q[1..])?, skip + 1));
        Ok(out)
    }

    /// Surgeries reducing the closed zigzag `z` to the empty one.
    pub fn contract_loop(&mut self, z: &Zigzag) -> Result<Vec<Surgery>, CoherenceError> {
        if z.end() != &z.start || !z.is_chained() {
            return Err(CoherenceError::NotParallel);
        }
        let mut s = Session { cur: z.moves.clone(), log: Vec::new() };
        // fill local peaks until the loop goes down and then up
        let mut i = 0;
        while i + 1 < s.cur.len() {
            if s.cur[i + 1] == s.cur[i].inverse() {
                s.cancel(i);
                i = i.saturating_sub(1);
                continue;
            }
            if s.cur[i].is_forward() || !s.cur[i + 1].is_forward() {
                i += 1;
                continue;
            }
            let back = s.cur[i].step.clone();
            let fwd = s.cur[i + 1].step.clone();
            let nf = self.normal_path(&fwd.target);
            let nb = self.normal_path(&back.target);
            for (t, step) in nf.iter().enumerate() {
                s.insert(i + 2 + t, Move::forward(step.clone()));
            }
            let mut p = alloc::vec![fwd];
            p.extend(nf);
            let mut q = alloc::vec![back];
            q.extend(nb);
            let d = self.confluence(&p, &q)?;
            s.replace(i + 1, p.len(), &q, d);
            s.cancel(i);
            i = i.saturating_sub(1);
        }
        let down = s.cur.iter().take_while(|m| m.is_forward()).count();
        debug_assert!(s.cur[down..].iter().all(|m| !m.is_forward()));
        if down < s.cur.len() {
            let valley = s.cur[down - 1].to().clone();
            let n = self.normal_path(&valley);
            for (t, step) in n.iter().enumerate() {
                s.insert(down + t, Move::forward(step.clone()));
            }
            let mut p: Vec<RewriteStep> = s.cur[..down].iter().map(|m| m.step.clone()).collect();
            p.extend(n.iter().cloned());
            let mut q: Vec<RewriteStep> = s.cur[down + 2 * n.len()..].iter().rev().map(|m| m.step.clone()).collect();
            q.extend(n.iter().cloned());
            let d = self.confluence(&p, &q)?;
            s.replace(0, p.len(), &q, d);
            while !s.cur.is_empty() {
                let mid = s.cur.len() / 2 - 1;
                s.cancel(mid);
            }
        }
        debug_assert!(s.cur.is_empty());
        Ok(s.log)
    }

    /// A certificate turning `z1` into `z2`.
    pub fn certify_equal(&mut self, z1: &Zigzag, z2: &Zigzag) -> Result<Certificate, CoherenceError> {
        if z1.start != z2.start || z1.end() != z2.end() || !z1.is_chained() || !z2.is_chained() {
            return Err(CoherenceError::NotParallel);
        }
        let rules = self.rules().name.clone();
        if z1 == z2 {
            return Ok(Certificate { rules, source: z1.clone(), target: z2.clone(), surgeries: Vec::new() });
        }
        let mut s = Session { cur: z1.moves.clone(), log: Vec::new() };
        let k = z1.len();
        for (t, m) in z2.moves.iter().rev().enumerate() {
            s.insert(k + t, m.inverse());
        }
        let mut lp = z1.clone();
        lp.moves.extend(z2.inverse().moves);
        let d = self.contract_loop(&lp)?;
        s.log.extend(d);
        Ok(Certificate { rules, source: z1.clone(), target: z2.clone(), surgeries: s.log })
    }
}
