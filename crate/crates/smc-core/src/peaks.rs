//! Critical peaks: superposition of left-hand sides, the six indexed
//! families with an inner sub-diagram, joins and classification.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Reverse;

use crate::diagram::{enumerate_diagrams, Diagram, Gate, Port, PortGraph, Slice};
use crate::rewrite::{
    apply_redex, find_redexes, normalize_with_budget, structural_normal_form, Redex, RewriteError, RewritePath,
    RewriteStep, RuleSet, Strategy, DEFAULT_STEP_BUDGET,
};
use crate::syntax::parse_diagram;

/// An overlapping pair of redexes on a common source. `left < right`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CriticalPeak {
    pub source: Diagram,
    pub left: Redex,
    pub right: Redex,
    /// For instances of an indexed family: the family number (1 to 6) and
    /// the inner sub-diagram, whose gates belong to neither redex.
    pub family: Option<(usize, Diagram)>,
}

impl CriticalPeak {
    pub fn new(source: Diagram, a: Redex, b: Redex) -> CriticalPeak {
        let (left, right) = if a <= b { (a, b) } else { (b, a) };
        CriticalPeak { source, left, right, family: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PeakClass {
    Coherence,
    Kelly,
    WeakKelly,
    SimplyFoldable,
    StronglyFoldable,
}

impl PeakClass {
    pub const ALL: [PeakClass; 5] = [
        PeakClass::Coherence,
        PeakClass::Kelly,
        PeakClass::WeakKelly,
        PeakClass::SimplyFoldable,
        PeakClass::StronglyFoldable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PeakClass::Coherence => "coherence",
            PeakClass::Kelly => "kelly",
            PeakClass::WeakKelly => "weak-kelly",
            PeakClass::SimplyFoldable => "simply-foldable",
            PeakClass::StronglyFoldable => "strongly-foldable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinResult {
    pub left_path: RewritePath,
    pub right_path: RewritePath,
    pub meet: Diagram,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PeakError {
    #[error("not joinable: branches normalize to {left} and {right}")]
    NotJoinable { left: Diagram, right: Diagram },
    #[error("step budget of {budget} exhausted")]
    BudgetExhausted { budget: usize },
    #[error("inner diagram must have at least one input and one output, got {inputs} -> {outputs}")]
    ShapeMismatch { inputs: usize, outputs: usize },
    #[error("unknown family {0}")]
    UnknownFamily(usize),
    #[error("bound {bound} is below the largest left-hand side ({needed} gates)")]
    BoundTooSmall { bound: usize, needed: usize },
    #[error("redex does not apply to the peak source")]
    StaleRedex,
}

/// No wire runs straight from an input to an output.
fn is_tight(d: &Diagram) -> bool {
    PortGraph::from_diagram(d).outputs.iter().all(|p| matches!(p, Port::Out { .. }))
}

fn diagrams_with_gates(inputs_range: core::ops::RangeInclusive<usize>, outputs: usize, gates: usize) -> Vec<Diagram> {
    let mut out = Vec::new();
    for p in inputs_range {
        out.extend(enumerate_diagrams(p, outputs, gates).into_iter().filter(|d| d.gate_count() == gates));
    }
    out
}

/// Peaks of `rules` whose source is the union of two overlapping
/// left-hand-side occurrences.
fn local_peaks(rules: &RuleSet) -> BTreeSet<CriticalPeak> {
    let mut found = BTreeSet::new();
    let mut seen_sources = BTreeSet::new();
    for r1 in &rules.rules {
        let lhs1 = &r1.lhs;
        for r2 in &rules.rules {
            let extra = r2.lhs.gate_count() - 1;
            for gx in 0..=extra {
                for gy in 0..=(extra - gx) {
                    let sides = 2 * (gx + gy);
                    for a in 0..=sides {
                        for b in 0..=(sides - a) {
                            let top = a + lhs1.inputs() + b;
                            let bottom = a + lhs1.outputs() + b;
                            let xs = diagrams_with_gates(top.saturating_sub(gx)..=top + gx, top, gx);
                            let middle = lhs1.whisker(a, b);
                            for x in &xs {
                                let upper = x.seq(&middle).expect("widths agree");
                                for q in bottom.saturating_sub(gy)..=bottom + gy {
                                    for y in
                                        enumerate_diagrams(bottom, q, gy).into_iter().filter(|y| y.gate_count() == gy)
                                    {
                                        let d = upper.seq(&y).expect("widths agree");
                                        if is_tight(&d) && seen_sources.insert(d.clone()) {
                                            collect_pairs(&d, rules, &mut found);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    found
}

/// Adds every overlapping redex pair of `d` that covers all gates.
fn collect_pairs(d: &Diagram, rules: &RuleSet, found: &mut BTreeSet<CriticalPeak>) {
    let all = if d.gate_count() == 64 { u64::MAX } else { (1u64 << d.gate_count()) - 1 };
    let redexes = find_redexes(d, rules);
    for i in 0..redexes.len() {
        for j in i + 1..redexes.len() {
            let (x, y) = (&redexes[i], &redexes[j]);
            if x.overlaps(y) && x.mask() | y.mask() == all {
                found.insert(CriticalPeak::new(d.clone(), x.clone(), y.clone()));
            }
        }
    }
}

/// The rule pair of each indexed family, upper redex first.
pub const FAMILY_RULES: [(&str, &str); 6] =
    [("yb", "yb"), ("yb", "sms"), ("ssm", "ms"), ("yb", "ssm"), ("yb", "gamma"), ("ssm", "alpha")];

/// Inner representatives used for the families: the smallest members of the
/// shape classes in which the leftmost input reaches the leftmost output.
pub fn family_representatives() -> Vec<Diagram> {
    ["id1", "m", "s"].iter().map(|t| parse_diagram(t).expect("literal")).collect()
}

/// Builds the family-`family` source around `inner` (`1+n -> 1+k`) after
/// bringing `inner` to structural normal form.
pub fn reduce_global(family: usize, inner: &Diagram, rules: &RuleSet) -> Result<CriticalPeak, PeakError> {
    if !(1..=6).contains(&family) {
        return Err(PeakError::UnknownFamily(family));
    }
    if inner.inputs() == 0 || inner.outputs() == 0 {
        return Err(PeakError::ShapeMismatch { inputs: inner.inputs(), outputs: inner.outputs() });
    }
    let (inner, _) = structural_normal_form(inner);
    let n = inner.inputs() - 1;
    let k = inner.outputs() - 1;
    const INNER: usize = usize::MAX;
    // (slice, tag); tag is the frame position or INNER
    let mut frame: Vec<(Slice, usize)> = Vec::new();
    frame.push((Slice::new(0, Gate::S, 1 + n), 0));
    frame.push((Slice::new(1, Gate::S, n), 1));
    let third = if matches!(family, 3 | 6) { Gate::M } else { Gate::S };
    frame.push((Slice::new(0, third, 1 + n), 2));
    let shift = third.outputs();
    for s in inner.slices() {
        frame.push((s.whiskered(shift, 0), INNER));
    }
    let after = shift + 1 + k; // width below the inner diagram
    let rest: &[Gate] = match family {
        1 => &[Gate::S, Gate::S],
        2 => &[Gate::M, Gate::S],
        3 => &[Gate::S],
        4 => &[Gate::S, Gate::M],
        5 => &[Gate::M, Gate::M],
        _ => &[Gate::M],
    };
    let mut width = after;
    for (i, &g) in rest.iter().enumerate() {
        // the fourth gate sits on wires 1-2 when the third is a swap, the last on wires 0-1
        let left = if i == 0 && third == Gate::S { 1 } else { 0 };
        frame.push((Slice::new(left, g, width - left - g.inputs()), 3 + i));
        width = width - g.inputs() + g.outputs();
    }
    let slices: Vec<Slice> = frame.iter().map(|t| t.0).collect();
    let (source, perm) = Diagram::from_slices_tracked(3 + n, slices)
        .map_err(|_| PeakError::ShapeMismatch { inputs: inner.inputs(), outputs: inner.outputs() })?;
    let tag_at = |pos: usize| frame[perm[pos]].1;
    let frame_gates = |tags: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = (0..perm.len()).filter(|&p| tags.contains(&tag_at(p))).collect();
        v.sort();
        v
    };
    let (upper_rule, lower_rule) = FAMILY_RULES[family - 1];
    let upper_tags: &[usize] = &[0, 1, 2];
    let lower_tags: Vec<usize> = match family {
        3 => alloc::vec![2, 3],
        6 => alloc::vec![2, 3],
        _ => alloc::vec![2, 3, 4],
    };
    let upper = Redex {
        rule: rules.index_of(upper_rule).ok_or(PeakError::UnknownFamily(family))?,
        gates: frame_gates(upper_tags),
    };
    let lower = Redex {
        rule: rules.index_of(lower_rule).ok_or(PeakError::UnknownFamily(family))?,
        gates: frame_gates(&lower_tags),
    };
    for r in [&upper, &lower] {
        apply_redex(&source, rules, r).map_err(|_| PeakError::StaleRedex)?;
    }
    let mut peak = CriticalPeak::new(source, upper, lower);
    peak.family = Some((family, inner));
    Ok(peak)
}

/// Local superposition peaks plus the indexed families instantiated at the
/// reduced representatives, without duplicates.
pub fn enumerate_peaks(rules: &RuleSet, bound: usize) -> Result<Vec<CriticalPeak>, PeakError> {
    let needed = rules.max_lhs_gates();
    if bound < needed {
        return Err(PeakError::BoundTooSmall { bound, needed });
    }
    let mut found = local_peaks(rules);
    let has_family_rules = FAMILY_RULES.iter().flat_map(|(a, b)| [*a, *b]).all(|name| rules.index_of(name).is_some());
    if has_family_rules {
        for family in 1..=6 {
            for inner in family_representatives() {
                let peak = reduce_global(family, &inner, rules)?;
                let plain = CriticalPeak::new(peak.source.clone(), peak.left.clone(), peak.right.clone());
                if !found.contains(&plain) {
                    found.insert(peak);
                }
            }
        }
    }
    let mut peaks: Vec<CriticalPeak> = found.into_iter().collect();
    peaks.sort_by(|x, y| {
        (x.source.gate_count(), &x.source, &x.left, &x.right).cmp(&(
            y.source.gate_count(),
            &y.source,
            &y.left,
            &y.right,
        ))
    });
    Ok(peaks)
}

/// Paths from `start` to `goal` minimizing (non-structural steps, length),
/// over the reducts of `start`. Gives up past `cap` explored diagrams.
fn cheapest_path(start: &Diagram, goal: &Diagram, rules: &RuleSet, cap: usize) -> Option<RewritePath> {
    let mut best: BTreeMap<Diagram, (usize, usize)> = BTreeMap::new();
    let mut back: BTreeMap<Diagram, RewriteStep> = BTreeMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start.clone(), (0, 0));
    heap.push(Reverse((0usize, 0usize, start.clone())));
    while let Some(Reverse((ns, len, cur))) = heap.pop() {
        if best.get(&cur) != Some(&(ns, len)) {
            continue;
        }
        if &cur == goal {
            let mut steps = Vec::new();
            let mut at = cur;
            while let Some(step) = back.get(&at) {
                at = step.source.clone();
                steps.push(step.clone());
            }
            steps.reverse();
            return Some(RewritePath { steps });
        }
        if best.len() > cap {
            return None;
        }
        for r in find_redexes(&cur, rules) {
            let next = apply_redex(&cur, rules, &r).expect("found redexes apply").target;
            let cost = (ns + usize::from(!rules.rules[r.rule].structural), len + 1);
            if best.get(&next).is_none_or(|&c| cost < c) {
                best.insert(next.clone(), cost);
                back.insert(next.clone(), RewriteStep { source: cur.clone(), redex: r, target: next.clone() });
                heap.push(Reverse((cost.0, cost.1, next)));
            }
        }
    }
    None
}

/// Joins the two branches of `peak` at their common normal form. Each side
/// uses the fewest non-structural steps it can.
pub fn join_with_budget(peak: &CriticalPeak, rules: &RuleSet, budget: usize) -> Result<JoinResult, PeakError> {
    let l = apply_redex(&peak.source, rules, &peak.left).map_err(|_| PeakError::StaleRedex)?.target;
    let r = apply_redex(&peak.source, rules, &peak.right).map_err(|_| PeakError::StaleRedex)?.target;
    let norm = |d: &Diagram| {
        normalize_with_budget(d, rules, Strategy::Leftmost, budget).map_err(|e| match e {
            RewriteError::BudgetExhausted { budget } => PeakError::BudgetExhausted { budget },
            RewriteError::StaleRedex { .. } => PeakError::StaleRedex,
        })
    };
    let (ln, lpath) = norm(&l)?;
    let (rn, rpath) = norm(&r)?;
    if ln != rn {
        return Err(PeakError::NotJoinable { left: ln, right: rn });
    }
    const CAP: usize = 20_000;
    let left_path = cheapest_path(&l, &ln, rules, CAP).unwrap_or(lpath);
    let right_path = cheapest_path(&r, &rn, rules, CAP).unwrap_or(rpath);
    Ok(JoinResult { left_path, right_path, meet: ln })
}

pub fn join(peak: &CriticalPeak, rules: &RuleSet) -> Result<JoinResult, PeakError> {
    join_with_budget(peak, rules, DEFAULT_STEP_BUDGET)
}

/// Sources of the five peaks whose squares are the base coherence cells.
pub const COHERENCE_SOURCES: [&str; 5] =
    ["(m*id2);(m*id1);m", "(id1*e*id1);(m*id1);m", "s;s;m", "(s*id1);(m*id1);m", "(m*id1);s;m"];

pub fn is_coherence_source(d: &Diagram) -> bool {
    COHERENCE_SOURCES.iter().any(|t| parse_diagram(t).is_ok_and(|c| &c == d))
}

/// Classifies a joined peak. A side is the peak step followed by its join
/// path.
pub fn classify(peak: &CriticalPeak, j: &JoinResult, rules: &RuleSet) -> PeakClass {
    if is_coherence_source(&peak.source) {
        return PeakClass::Coherence;
    }
    let structural = |rule: usize| rules.rules[rule].structural;
    let side = |first: &Redex, path: &RewritePath| -> Vec<usize> {
        core::iter::once(first.rule).chain(path.steps.iter().map(|s| s.redex.rule)).collect()
    };
    let left = side(&peak.left, &j.left_path);
    let right = side(&peak.right, &j.right_path);
    if left.iter().chain(&right).all(|&r| structural(r)) {
        return PeakClass::StronglyFoldable;
    }
    let non_structural = |s: &[usize]| s.iter().copied().filter(|&r| !structural(r)).collect::<Vec<_>>();
    let (ln, rn) = (non_structural(&left), non_structural(&right));
    if ln.len() == 1 && rn.len() == 1 && rules.rules[ln[0]].name == rules.rules[rn[0]].name {
        return PeakClass::SimplyFoldable;
    }
    if !structural(peak.left.rule) && !structural(peak.right.rule) {
        return PeakClass::Kelly;
    }
    PeakClass::WeakKelly
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeakOutcome {
    pub peak: CriticalPeak,
    pub result: Result<(JoinResult, PeakClass), PeakError>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfluenceReport {
    pub rules: String,
    pub outcomes: Vec<PeakOutcome>,
}

impl ConfluenceReport {
    pub fn confluent(&self) -> bool {
        self.outcomes.iter().all(|o| o.result.is_ok())
    }

    pub fn count(&self, class: PeakClass) -> usize {
        self.outcomes.iter().filter(|o| matches!(&o.result, Ok((_, c)) if *c == class)).count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &PeakOutcome> {
        self.outcomes.iter().filter(|o| o.result.is_err())
    }
}

/// Enumerates, joins and classifies every peak of `rules`.
pub fn local_confluence_report(rules: &RuleSet, bound: usize, budget: usize) -> Result<ConfluenceReport, PeakError> {
    let outcomes = enumerate_peaks(rules, bound)?
        .into_iter()
        .map(|peak| {
            let result = join_with_budget(&peak, rules, budget).map(|j| {
                let class = classify(&peak, &j, rules);
                (j, class)
            });
            PeakOutcome { peak, result }
        })
        .collect();
    Ok(ConfluenceReport { rules: rules.name.clone(), outcomes })
}
