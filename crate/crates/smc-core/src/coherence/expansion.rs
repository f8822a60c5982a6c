//! Expansions of the Kelly and weak Kelly fillers into base, foldable and
//! plumbing cells, and the solver that derives them.
//!
//! The solver works in a finite region: every reduct of the filler's source
//! and of its one-step predecessors. Leftmost normalization steps form a
//! spanning tree. A step becomes *settled* once some allowed cell has it as
//! the only unsettled step on its boundary; the cell then rewrites the step
//! into settled ones. If both sides of the filler get settled, rewriting
//! every step into tree steps and cancelling yields the derivation.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::coherence::cells::{CellCatalog, CellName};
use crate::coherence::certify::{Certificate, Surgery};
use crate::coherence::validate::invert;
use crate::coherence::zigzag::{Move, Zigzag};
use crate::coherence::CoherenceError;
use crate::diagram::Diagram;
use crate::rewrite::{apply_redex, find_redexes, leftmost, Redex, RewriteStep, Rule, RuleSet};

/// Built-in expansions, one certificate per filler, in script form.
pub const EXPANSION_DATA: &str = include_str!("../../data/expansions.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    pub id: String,
    /// Turns the left side of the filler into the right side.
    pub forward: Vec<Surgery>,
    /// Turns the right side into the left side.
    pub backward: Vec<Surgery>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExpansionTable {
    entries: BTreeMap<String, Expansion>,
}

impl ExpansionTable {
    pub fn get(&self, id: &str) -> Option<&Expansion> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    /// Adds an entry from a certificate between the two sides of filler
    /// `id`, after replaying it.
    pub fn insert(&mut self, id: &str, cert: &Certificate, catalog: &CellCatalog) -> Result<(), CoherenceError> {
        let cell = catalog.by_id(id).ok_or_else(|| CoherenceError::UnknownPeak(id.to_string()))?;
        if cert.source != Zigzag::forward(cell.source.clone(), &cell.left)
            || cert.target != Zigzag::forward(cell.source.clone(), &cell.right)
        {
            return Err(CoherenceError::NotParallel);
        }
        let back = invert(cert, catalog)?;
        self.entries.insert(
            id.to_string(),
            Expansion { id: id.to_string(), forward: cert.surgeries.clone(), backward: back.surgeries },
        );
        Ok(())
    }

    /// The entry for `id` as a certificate from the left side to the right.
    pub fn certificate(&self, id: &str, catalog: &CellCatalog) -> Result<Certificate, CoherenceError> {
        let entry = self.get(id).ok_or_else(|| CoherenceError::UnknownPeak(id.to_string()))?;
        let cell = catalog.by_id(id).ok_or_else(|| CoherenceError::UnknownPeak(id.to_string()))?;
        Ok(Certificate {
            rules: catalog.rules.name.clone(),
            source: Zigzag::forward(cell.source.clone(), &cell.left),
            target: Zigzag::forward(cell.source.clone(), &cell.right),
            surgeries: entry.forward.clone(),
        })
    }
}

/// The expansion of a Kelly or weak Kelly filler, named by peak id or by
/// its source diagram.
pub fn expand_kelly(key: &str, table: &ExpansionTable, catalog: &CellCatalog) -> Result<Certificate, CoherenceError> {
    if table.get(key).is_some() {
        return table.certificate(key, catalog);
    }
    let by_source = crate::syntax::parse_diagram(key)
        .ok()
        .and_then(|src| catalog.cells.iter().find(|c| c.source == src && table.get(&c.id).is_some()));
    match by_source {
        Some(cell) => table.certificate(&cell.id, catalog),
        None => Err(CoherenceError::UnknownPeak(key.to_string())),
    }
}

/// Diagrams with a single step to `x`.
pub fn predecessors(x: &Diagram, rules: &RuleSet) -> Vec<Diagram> {
    let mut found = BTreeSet::new();
    for rule in &rules.rules {
        if rule.rhs.gate_count() > 0 {
            let Ok(back) = Rule::new("back", rule.rhs.clone(), rule.lhs.clone(), false) else { continue };
            let set = RuleSet::new("back", alloc::vec![back]);
            for r in find_redexes(x, &set) {
                found.insert(apply_redex(x, &set, &r).expect("found redexes apply").target);
            }
        } else {
            let k = rule.rhs.inputs();
            for cut in 0..=x.gate_count() {
                let width = x.width_at(cut);
                for a in 0..(width + 1).saturating_sub(k) {
                    let mut slices = x.slices()[..cut].to_vec();
                    slices.extend(rule.lhs.slices().iter().map(|s| s.whiskered(a, width - a - k)));
                    slices.extend_from_slice(&x.slices()[cut..]);
                    if let Ok(w) = Diagram::from_slices(x.inputs(), slices) {
                        found.insert(w);
                    }
                }
            }
        }
    }
    found
        .into_iter()
        .filter(|w| find_redexes(w, rules).iter().any(|r| apply_redex(w, rules, r).is_ok_and(|a| &a.target == x)))
        .collect()
}

struct Region {
    index: BTreeMap<Diagram, usize>,
    steps: Vec<RewriteStep>,
    edge: BTreeMap<(usize, Redex), usize>,
    tree: Vec<bool>,
}

impl Region {
    /// The forward closure of `seeds`. Tree steps fire the leftmost redex,
    /// or the rightmost one.
    fn build(seeds: &[Diagram], rules: &RuleSet, rightmost: bool) -> Region {
        let mut index = BTreeMap::new();
        let mut queue = VecDeque::new();
        for s in seeds {
            if !index.contains_key(s) {
                index.insert(s.clone(), index.len());
                queue.push_back(s.clone());
            }
        }
        let mut steps = Vec::new();
        let mut edge = BTreeMap::new();
        let mut tree = Vec::new();
        while let Some(x) = queue.pop_front() {
            let v = index[&x];
            let redexes = find_redexes(&x, rules);
            let first = if rightmost {
                redexes.iter().max_by_key(|r| (r.anchor(), r.rule, r.gates.clone())).cloned()
            } else {
                leftmost(&redexes).cloned()
            };
            for r in redexes {
                let target = apply_redex(&x, rules, &r).expect("found redexes apply").target;
                if !index.contains_key(&target) {
                    index.insert(target.clone(), index.len());
                    queue.push_back(target.clone());
                }
                tree.push(Some(&r) == first.as_ref());
                edge.insert((v, r.clone()), steps.len());
                steps.push(RewriteStep { source: x.clone(), redex: r, target });
            }
        }
        Region { index, steps, edge, tree }
    }

    fn edge_of(&self, step: &RewriteStep) -> usize {
        self.edge[&(self.index[&step.source], step.redex.clone())]
    }
}

/// A cell placed in the region: two forward paths of region steps and the
/// surgeries turning either one into the other, relative to its start.
struct RegionCell {
    first: Vec<usize>,
    second: Vec<usize>,
    to_second: Vec<Surgery>,
    to_first: Vec<Surgery>,
}

fn region_cells(
    region: &Region,
    catalog: &CellCatalog,
    allowed: &dyn Fn(&CellName) -> bool,
    table: &ExpansionTable,
) -> Vec<RegionCell> {
    let rules = &catalog.rules;
    let mut by_source: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, st) in region.steps.iter().enumerate() {
        by_source.entry(region.index[&st.source]).or_default().push(e);
    }
    let mut out = Vec::new();
    for edges in by_source.values() {
        for (i, &ea) in edges.iter().enumerate() {
            for &eb in &edges[i + 1..] {
                let (sa, sb) = (&region.steps[ea], &region.steps[eb]);
                let x = &sa.source;
                if !sa.redex.overlaps(&sb.redex) {
                    let residual = |first: &RewriteStep, second: &Redex| {
                        let applied = apply_redex(x, rules, &first.redex).expect("region step");
                        let mut gates: Vec<usize> =
                            second.gates.iter().map(|&g| applied.survivors[g].expect("disjoint")).collect();
                        gates.sort_unstable();
                        let r = Redex { rule: second.rule, gates };
                        region.edge[&(region.index[&applied.target], r)]
                    };
                    out.push(RegionCell {
                        first: alloc::vec![ea, residual(sa, &sb.redex)],
                        second: alloc::vec![eb, residual(sb, &sa.redex)],
                        to_second: alloc::vec![Surgery::Square { at: 0 }],
                        to_first: alloc::vec![Surgery::Square { at: 0 }],
                    });
                    continue;
                }
                let Some(placed) = catalog.place(x, &sa.redex, &sb.redex) else { continue };
                let cell = &catalog.cells[placed.cell];
                if !allowed(&cell.name) {
                    continue;
                }
                let (to_second, to_first) = if cell.name.is_derived() {
                    let Some(entry) = table.get(&cell.id) else { continue };
                    let lift = |list: &[Surgery]| -> Vec<Surgery> {
                        list.iter()
                            .map(|s| match s {
                                Surgery::Insert { at, first } => {
                                    Surgery::Insert { at: *at, first: placed.context.lift_move(first) }
                                }
                                other => other.clone(),
                            })
                            .collect()
                    };
                    let (f, b) = (lift(&entry.forward), lift(&entry.backward));
                    if placed.forward {
                        (f, b)
                    } else {
                        (b, f)
                    }
                } else {
                    let name = cell.name.clone();
                    (
                        alloc::vec![Surgery::Cell { at: 0, cell: name.clone(), forward: placed.forward }],
                        alloc::vec![Surgery::Cell { at: 0, cell: name, forward: !placed.forward }],
                    )
                };
                out.push(RegionCell {
                    first: placed.first.iter().map(|s| region.edge_of(s)).collect(),
                    second: placed.second.iter().map(|s| region.edge_of(s)).collect(),
                    to_second,
                    to_first,
                });
            }
        }
    }
    out
}

/// Longest replacement word accepted during elimination.
const MAX_WORD: usize = 48;

/// Longest derivation built.
const MAX_SURGERIES: usize = 200_000;

/// A word in the region's steps: (step, forward).
type Word = Vec<(usize, bool)>;

fn push_reduced(w: &mut Word, letter: (usize, bool)) {
    if w.last() == Some(&(letter.0, !letter.1)) {
        w.pop();
    } else {
        w.push(letter);
    }
}

fn inverse_word(w: &[(usize, bool)]) -> Word {
    w.iter().rev().map(|&(e, f)| (e, !f)).collect()
}

/// Eliminates steps one at a time: a step occurring once in a cell
/// boundary, with the rest of the boundary free of it after substituting
/// earlier eliminations, is replaced by that rest everywhere. Returns the
/// eliminated (step, cell) pairs in order, once `target` becomes trivial.
fn eliminate(cells: &[RegionCell], tree: &[bool], target: &Word) -> Option<Vec<(usize, usize)>> {
    let strip = |w: Word| -> Word {
        let mut out = Vec::new();
        for l in w {
            if !tree[l.0] {
                push_reduced(&mut out, l);
            }
        }
        out
    };
    let boundary = |c: &RegionCell| -> Word {
        let mut w: Word = c.first.iter().map(|&e| (e, true)).collect();
        w.extend(c.second.iter().rev().map(|&e| (e, false)));
        w
    };
    let mut defs: BTreeMap<usize, Word> = BTreeMap::new();
    let substitute = |w: &Word, defs: &BTreeMap<usize, Word>| -> Word {
        let mut out = Vec::new();
        for &(e, f) in w {
            match defs.get(&e) {
                Some(d) if f => d.iter().for_each(|&l| push_reduced(&mut out, l)),
                Some(d) => inverse_word(d).into_iter().for_each(|l| push_reduced(&mut out, l)),
                None if !tree[e] => push_reduced(&mut out, (e, f)),
                None => {}
            }
        }
        out
    };
    let mut relators: Vec<Option<Word>> = cells.iter().map(|c| Some(strip(boundary(c)))).collect();
    let mut target = strip(target.clone());
    let mut order = Vec::new();
    while !target.is_empty() {
        // the shortest usable relator
        let mut best: Option<(usize, usize, usize, Word)> = None;
        for (ci, rel) in relators.iter().enumerate() {
            let Some(rel) = rel else { continue };
            if best.as_ref().is_some_and(|b| b.3.len() < rel.len()) {
                continue;
            }
            let original = boundary(&cells[ci]);
            for (j, &(g, f)) in rel.iter().enumerate() {
                if tree[g] || original.iter().filter(|l| l.0 == g).count() != 1 {
                    continue;
                }
                let mut rest = Vec::new();
                for &l in rel[j + 1..].iter().chain(&rel[..j]) {
                    push_reduced(&mut rest, l);
                }
                if rest.iter().any(|l| l.0 == g) {
                    continue;
                }
                if rest.len() > MAX_WORD {
                    continue;
                }
                let def = if f { inverse_word(&rest) } else { rest };
                if best.as_ref().is_none_or(|b| def.len() < b.3.len()) {
                    best = Some((ci, g, j, def));
                }
            }
        }
        let (ci, g, _, def) = best?;
        relators[ci] = None;
        let mut single = BTreeMap::new();
        single.insert(g, def.clone());
        for d in defs.values_mut() {
            *d = substitute(d, &single);
        }
        defs.insert(g, def);
        for rel in relators.iter_mut().flatten() {
            *rel = substitute(rel, &single);
        }
        target = substitute(&target, &single);
        order.push((g, ci));
    }
    Some(order)
}

/// Surgeries turning one move into a path, relative to its position.
#[derive(Clone)]
struct Derivation {
    surgeries: Vec<Surgery>,
    result: Vec<Move>,
}

struct Builder<'r> {
    region: &'r Region,
    cur: Vec<Move>,
    log: Vec<Surgery>,
}

impl Builder<'_> {
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

    /// Cancels adjacent inverse moves before `end`.
    fn reduce(&mut self, end: &mut usize) {
        let mut i = 0;
        while i + 1 < *end {
            if self.cur[i + 1] == self.cur[i].inverse() {
                self.cancel(i);
                *end -= 2;
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
    }

    fn apply(&mut self, at: usize, surgeries: &[Surgery], old: usize, new: Vec<Move>) {
        self.log.extend(surgeries.iter().map(|s| s.shifted(at)));
        self.cur.splice(at..at + old, new);
    }

    fn step(&self, e: usize) -> RewriteStep {
        self.region.steps[e].clone()
    }

    /// Replaces the move at `i` by the rest of the boundary of `cell`.
    fn unfold(&mut self, i: usize, cell: &RegionCell) {
        let e = self.region.edge_of(&self.cur[i].step);
        let (side, other, surgeries) = if cell.first.contains(&e) {
            (&cell.first, &cell.second, &cell.to_second)
        } else {
            (&cell.second, &cell.first, &cell.to_first)
        };
        let j = side.iter().position(|&x| x == e).expect("the step is on the boundary");
        let k = side.len();
        let forward = |b: &Self, x: &[usize]| x.iter().map(|&s| Move::forward(b.step(s))).collect::<Vec<_>>();
        if self.cur[i].is_forward() {
            // side[..j]^-1 side[..j] e side[j+1..] side[j+1..]^-1
            for t in 0..j {
                self.insert(i + t, Move::backward(self.step(side[j - 1 - t])));
            }
            for t in 0..k - 1 - j {
                self.insert(i + 2 * j + 1 + t, Move::forward(self.step(side[j + 1 + t])));
            }
            let new = forward(self, other);
            self.apply(i + j, surgeries, k, new);
        } else {
            // side[j+1..] side[j+1..]^-1 e^-1 side[..j]^-1 side[..j], then the
            // segment side^-1 is turned into other^-1 through other^-1 other side^-1
            for t in 0..k - 1 - j {
                self.insert(i + t, Move::forward(self.step(side[j + 1 + t])));
            }
            let after = i + 2 * (k - 1 - j) + 1;
            for t in 0..j {
                self.insert(after + t, Move::backward(self.step(side[j - 1 - t])));
            }
            let p = i + (k - 1 - j);
            let n = other.len();
            for t in 0..n {
                self.insert(p + t, Move::backward(self.step(other[n - 1 - t])));
            }
            let back: Vec<Move> = side.iter().map(|&s| Move::forward(self.step(s))).collect();
            let (theirs, mine) = if core::ptr::eq(side, &cell.first) {
                (&cell.to_first, &cell.first)
            } else {
                (&cell.to_second, &cell.second)
            };
            debug_assert!(core::ptr::eq(mine, side));
            self.apply(p + n, theirs, n, back);
            for t in (0..k).rev() {
                self.cancel(p + n + t);
            }
        }
    }
}

/// Builds derivations of eliminated steps on demand.
struct Deriver<'r> {
    region: &'r Region,
    cells: &'r [RegionCell],
    order: &'r [(usize, usize)],
    rank: BTreeMap<usize, usize>,
    memo: BTreeMap<(usize, bool), Derivation>,
}

impl<'r> Deriver<'r> {
    /// Expands steps eliminated before `limit` inside `b.cur[..end]` until
    /// none is left, cancelling as it goes. Returns the new end.
    fn expand(&mut self, b: &mut Builder<'r>, mut end: usize, limit: usize) -> Option<usize> {
        loop {
            if b.log.len() > MAX_SURGERIES {
                return None;
            }
            b.reduce(&mut end);
            let found = (0..end).find_map(|i| {
                let m = &b.cur[i];
                let e = self.region.edge_of(&m.step);
                self.rank.get(&e).filter(|&&r| r < limit).map(|_| (i, e, m.is_forward()))
            });
            let Some((i, e, dir)) = found else { return Some(end) };
            let d = self.get(e, dir)?;
            end = end + d.result.len() - 1;
            b.apply(i, &d.surgeries, 1, d.result);
        }
    }

    fn get(&mut self, e: usize, dir: bool) -> Option<Derivation> {
        if let Some(d) = self.memo.get(&(e, dir)) {
            return Some(d.clone());
        }
        let t = self.rank[&e];
        let step = self.region.steps[e].clone();
        let m = if dir { Move::forward(step) } else { Move::backward(step) };
        let mut b = Builder { region: self.region, cur: alloc::vec![m], log: Vec::new() };
        b.unfold(0, &self.cells[self.order[t].1]);
        let end = b.cur.len();
        self.expand(&mut b, end, t)?;
        let d = Derivation { surgeries: b.log, result: b.cur };
        self.memo.insert((e, dir), d.clone());
        Some(d)
    }
}

/// Derives a certificate from the left side of filler `id` to its right
/// side that only uses cells accepted by `allowed`, plus plumbing. Derived
/// cells that are allowed are replaced by their entries in `table`.
///
/// The search runs in the closure of the filler's source and its
/// predecessors, one then two steps back, with leftmost and then rightmost
/// normalization as the spanning tree.
pub fn derive_expansion(
    catalog: &CellCatalog,
    id: &str,
    allowed: &dyn Fn(&CellName) -> bool,
    table: &ExpansionTable,
) -> Result<Certificate, CoherenceError> {
    let mut last = CoherenceError::UnknownPeak(id.to_string());
    for depth in 1..=2 {
        for rightmost in [false, true] {
            match derive_in(catalog, id, depth, rightmost, allowed, table) {
                Ok(cert) => return Ok(cert),
                Err(e @ CoherenceError::Underivable { .. }) => last = e,
                Err(e) => return Err(e),
            }
        }
    }
    Err(last)
}

fn derive_in(
    catalog: &CellCatalog,
    id: &str,
    depth: usize,
    rightmost: bool,
    allowed: &dyn Fn(&CellName) -> bool,
    table: &ExpansionTable,
) -> Result<Certificate, CoherenceError> {
    let cell = catalog.by_id(id).ok_or_else(|| CoherenceError::UnknownPeak(id.to_string()))?;
    let rules = &catalog.rules;
    let mut seeds = alloc::vec![cell.source.clone()];
    let mut frontier = seeds.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for x in &frontier {
            for w in predecessors(x, rules) {
                if !seeds.contains(&w) {
                    seeds.push(w.clone());
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    let region = Region::build(&seeds, rules, rightmost);
    let cells = region_cells(&region, catalog, allowed, table);
    let mut target: Word = cell.left.iter().map(|s| (region.edge_of(s), true)).collect();
    target.extend(cell.right.iter().rev().map(|s| (region.edge_of(s), false)));
    let order = eliminate(&cells, &region.tree, &target).ok_or_else(|| CoherenceError::Underivable {
        id: id.to_string(),
        detail: alloc::format!("{} diagrams, {} steps, {} cells", region.index.len(), region.steps.len(), cells.len()),
    })?;

    let too_long =
        || CoherenceError::Underivable { id: id.to_string(), detail: "the derivation grows too long".into() };
    let rank = order.iter().enumerate().map(|(t, &(g, _))| (g, t)).collect();
    let mut deriver = Deriver { region: &region, cells: &cells, order: &order, rank, memo: BTreeMap::new() };

    // left ; right^-1 ; right, then contract the loop in front
    let mut b =
        Builder { region: &region, cur: cell.left.iter().cloned().map(Move::forward).collect(), log: Vec::new() };
    let k = cell.left.len();
    for (t, st) in cell.right.iter().rev().enumerate() {
        b.insert(k + t, Move::backward(st.clone()));
    }
    let end = deriver.expand(&mut b, k + cell.right.len(), order.len()).ok_or_else(too_long)?;
    if end != 0 {
        return Err(CoherenceError::Underivable { id: id.to_string(), detail: "the loop does not reduce".into() });
    }
    Ok(Certificate {
        rules: rules.name.clone(),
        source: Zigzag::forward(cell.source.clone(), &cell.left),
        target: Zigzag::forward(cell.source.clone(), &cell.right),
        surgeries: b.log,
    })
}

/// Derives every Kelly and weak Kelly entry. The monoidal ones are derived
/// in `monoidal` from penta and tria only, the others in `symmetric` from
/// any cell that is not derived or already has an entry. Entries are
/// returned in derivation order.
pub fn derive_table(
    symmetric: &CellCatalog,
    monoidal: &CellCatalog,
) -> Result<Vec<(String, Certificate)>, CoherenceError> {
    let mut table = ExpansionTable::default();
    let mut out = Vec::new();
    let base_only = |n: &CellName| matches!(n, CellName::Penta | CellName::Tria);
    for cell in monoidal.cells.iter().filter(|c| c.name.is_derived()) {
        let cert = derive_expansion(monoidal, &cell.id, &base_only, &table)?;
        table.insert(&cell.id, &cert, monoidal)?;
        out.push((cell.id.clone(), cert));
    }
    let mut pending: Vec<&str> = symmetric
        .cells
        .iter()
        .filter(|c| c.name.is_derived() && table.get(&c.id).is_none())
        .map(|c| c.id.as_str())
        .collect();
    while !pending.is_empty() {
        let mut rest = Vec::new();
        let mut failure = None;
        for id in pending.iter().copied() {
            let known = table.clone();
            let allowed = |n: &CellName| !n.is_derived() || n.peak_id().is_some_and(|p| known.get(&p).is_some());
            match derive_expansion(symmetric, id, &allowed, &table) {
                Ok(cert) => {
                    table.insert(id, &cert, symmetric)?;
                    out.push((id.to_string(), cert));
                }
                Err(e @ CoherenceError::Underivable { .. }) => {
                    failure = Some(e);
                    rest.push(id);
                }
                Err(e) => return Err(e),
            }
        }
        if rest.len() == pending.len() {
            return Err(failure.expect("nothing was derived"));
        }
        pending = rest;
    }
    Ok(out)
}

impl ExpansionTable {
    /// The shipped entries that belong to `catalog`, each checked by replay.
    pub fn builtin(catalog: &CellCatalog) -> Result<ExpansionTable, CoherenceError> {
        crate::coherence::script::parse_expansions(EXPANSION_DATA, catalog, true)
    }
}
