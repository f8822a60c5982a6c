//! Brute-force reference implementations used as independent oracles.
//! They only rely on `interchange` and plain slice bookkeeping.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use smc_core::diagram::{interchange, Gate, Slice};
use smc_core::rewrite::{apply_redex, find_redexes, RuleSet};
use smc_core::Diagram;

/// Every slice presentation reachable from `slices` by adjacent
/// interchanges, with each gate tagged by its position in `slices`.
pub fn interchange_closure(slices: &[Slice]) -> Vec<Vec<(Slice, usize)>> {
    let start: Vec<(Slice, usize)> = slices.iter().copied().zip(0..).collect();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(start.iter().map(|t| t.1).collect());
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(cur) = queue.pop_front() {
        for k in 0..cur.len().saturating_sub(1) {
            if let Some((up, low)) = interchange(cur[k].0, cur[k + 1].0) {
                let mut next = cur.clone();
                next[k] = (up, cur[k + 1].1);
                next[k + 1] = (low, cur[k].1);
                if seen.insert(next.iter().map(|t| t.1).collect()) {
                    queue.push_back(next);
                }
            }
        }
        out.push(cur);
    }
    out
}

/// Smallest presentation in the interchange class: a class invariant that
/// does not depend on the crate's scheduler.
pub fn class_key(slices: &[Slice]) -> Vec<Slice> {
    interchange_closure(slices)
        .into_iter()
        .map(|p| p.into_iter().map(|t| t.0).collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// All raw slice sequences `p -> q` with at most `max_gates` gates.
pub fn raw_expressions(p: usize, q: usize, max_gates: usize) -> Vec<Vec<Slice>> {
    let mut out = Vec::new();
    let mut frontier: Vec<(usize, Vec<Slice>)> = vec![(p, Vec::new())];
    for n in 0..=max_gates {
        let mut next = Vec::new();
        for (w, seq) in &frontier {
            if *w == q {
                out.push(seq.clone());
            }
            if n == max_gates {
                continue;
            }
            for g in Gate::ALL {
                if g.inputs() > *w {
                    continue;
                }
                for a in 0..=(*w - g.inputs()) {
                    let mut s = seq.clone();
                    s.push(Slice::new(a, g, *w - g.inputs() - a));
                    next.push((*w - g.inputs() + g.outputs(), s));
                }
            }
        }
        frontier = next;
    }
    out
}

fn trimmed(block: &[(Slice, usize)]) -> (usize, Vec<Slice>) {
    let a = block.iter().map(|t| t.0.left()).min().unwrap();
    let b = block.iter().map(|t| t.0.right()).min().unwrap();
    let slices: Vec<Slice> = block.iter().map(|t| Slice::new(t.0.left() - a, t.0.gate, t.0.right() - b)).collect();
    (slices[0].width_in(), slices)
}

/// Moves the gate at `k` to the front by adjacent interchanges, if it can go
/// first.
fn to_front(rest: &[(Slice, usize)], k: usize) -> Option<Vec<(Slice, usize)>> {
    let mut cur = rest.to_vec();
    for j in (0..k).rev() {
        let (up, low) = interchange(cur[j].0, cur[j + 1].0)?;
        let (a, b) = (cur[j].1, cur[j + 1].1);
        cur[j] = (up, b);
        cur[j + 1] = (low, a);
    }
    Some(cur)
}

/// Redex occurrences found by listing every factorization
/// `above ; (id_a * lhs * id_b) ; below`: every set of gates that can run
/// first (`above`), then every run of up to the largest lhs size of gates
/// that can run next, compared with each rule's left-hand side up to
/// interchange.
pub fn factorization_redexes(host: &Diagram, rules: &RuleSet) -> BTreeSet<(usize, Vec<usize>)> {
    let census = |slices: &mut dyn Iterator<Item = Slice>| {
        let mut c = [0usize; 3];
        for s in slices {
            c[Gate::ALL.iter().position(|&g| g == s.gate).unwrap()] += 1;
        }
        c
    };
    let mut lhs_keys: Vec<(usize, usize, Vec<Slice>)> = Vec::new();
    let mut censuses = Vec::new();
    for r in &rules.rules {
        let tagged: Vec<(Slice, usize)> = r.lhs.slices().iter().copied().zip(0..).collect();
        let (inputs, slices) = trimmed(&tagged);
        lhs_keys.push((r.lhs.gate_count(), inputs, class_key(&slices)));
        censuses.push(census(&mut r.lhs.slices().iter().copied()));
    }
    let kmax = lhs_keys.iter().map(|k| k.0).max().unwrap_or(0);
    let mut window_cache: BTreeMap<Vec<Slice>, Vec<Slice>> = BTreeMap::new();
    let mut found = BTreeSet::new();
    let mut check = |window: &[(Slice, usize)]| {
        let c = census(&mut window.iter().map(|t| t.0));
        if !censuses.contains(&c) {
            return;
        }
        let (w_inputs, w_slices) = trimmed(window);
        for (ri, (k, inputs, key)) in lhs_keys.iter().enumerate() {
            if *k != window.len() || w_inputs != *inputs || censuses[ri] != c {
                continue;
            }
            if !window_cache.contains_key(&w_slices) {
                window_cache.insert(w_slices.clone(), class_key(&w_slices));
            }
            if &window_cache[&w_slices] == key {
                let mut gates: Vec<usize> = window.iter().map(|t| t.1).collect();
                gates.sort();
                found.insert((ri, gates));
            }
        }
    };
    fn runs(
        rest: &[(Slice, usize)],
        window: &mut Vec<(Slice, usize)>,
        kmax: usize,
        check: &mut dyn FnMut(&[(Slice, usize)]),
    ) {
        if !window.is_empty() {
            check(window);
        }
        if window.len() == kmax {
            return;
        }
        for k in 0..rest.len() {
            if let Some(cur) = to_front(rest, k) {
                window.push(cur[0]);
                runs(&cur[1..], window, kmax, check);
                window.pop();
            }
        }
    }
    let start: Vec<(Slice, usize)> = host.slices().iter().copied().zip(0..).collect();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut stack = vec![(0u64, start)];
    while let Some((done, rest)) = stack.pop() {
        if !seen.insert(done) {
            continue;
        }
        runs(&rest, &mut Vec::new(), kmax, &mut check);
        for k in 0..rest.len() {
            if let Some(cur) = to_front(&rest, k) {
                stack.push((done | 1 << cur[0].1, cur[1..].to_vec()));
            }
        }
    }
    found
}

/// Builds a diagram from `p` inputs and a list of (gate choice, position
/// seed) pairs; gates that do not fit the current width are skipped.
pub fn build_diagram(p: usize, picks: &[(usize, usize)]) -> Diagram {
    let mut w = p;
    let mut slices = Vec::new();
    for &(g, pos) in picks {
        let g = Gate::ALL[g % 3];
        if g.inputs() > w {
            continue;
        }
        let room = w - g.inputs();
        let a = pos % (room + 1);
        slices.push(Slice::new(a, g, room - a));
        w = room + g.outputs();
    }
    Diagram::from_slices(p, slices).unwrap()
}

pub fn arb_diagram(max_inputs: usize, max_gates: usize) -> impl proptest::strategy::Strategy<Value = Diagram> {
    use proptest::prelude::*;
    (0..=max_inputs, proptest::collection::vec((0..3usize, 0..64usize), 0..=max_gates))
        .prop_map(|(p, picks)| build_diagram(p, &picks))
}

/// Memoized breadth of all maximal rewrite sequences: the set of irreducible
/// diagrams reachable from `phi`.
pub fn sinks(phi: &Diagram, rules: &RuleSet, memo: &mut HashMap<Diagram, BTreeSet<Diagram>>) -> BTreeSet<Diagram> {
    if let Some(s) = memo.get(phi) {
        return s.clone();
    }
    let redexes = find_redexes(phi, rules);
    let mut out = BTreeSet::new();
    if redexes.is_empty() {
        out.insert(phi.clone());
    }
    for r in &redexes {
        let next = apply_redex(phi, rules, r).unwrap().target;
        out.extend(sinks(&next, rules, memo));
    }
    memo.insert(phi.clone(), out.clone());
    out
}

/// Random zigzag of at most `len` moves from `start`, mixing forward steps
/// and steps walked backwards, through diagrams of at most `max_gates` gates.
pub fn random_walk(
    rng: &mut impl rand::Rng,
    start: &Diagram,
    rules: &RuleSet,
    len: usize,
    max_gates: usize,
) -> smc_core::coherence::Zigzag {
    use smc_core::coherence::{predecessors, Move, Zigzag};
    use smc_core::rewrite::RewriteStep;
    let mut z = Zigzag::empty(start.clone());
    for _ in 0..len {
        let x = z.end().clone();
        let forward: Vec<RewriteStep> = find_redexes(&x, rules)
            .into_iter()
            .map(|r| {
                let target = apply_redex(&x, rules, &r).unwrap().target;
                RewriteStep { source: x.clone(), redex: r, target }
            })
            .filter(|s| s.target.gate_count() <= max_gates)
            .collect();
        let backward: Vec<RewriteStep> = predecessors(&x, rules)
            .into_iter()
            .filter(|w| w.gate_count() <= max_gates)
            .flat_map(|w| {
                find_redexes(&w, rules)
                    .into_iter()
                    .filter_map(|r| {
                        let target = apply_redex(&w, rules, &r).unwrap().target;
                        (target == x).then(|| RewriteStep { source: w.clone(), redex: r, target })
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let m = match (forward.is_empty(), backward.is_empty(), rng.gen_bool(0.5)) {
            (true, true, _) => break,
            (false, true, _) | (false, false, true) => Move::forward(forward[rng.gen_range(0..forward.len())].clone()),
            _ => Move::backward(backward[rng.gen_range(0..backward.len())].clone()),
        };
        z.moves.push(m);
    }
    z
}

/// Two parallel zigzags through diagrams of at most `max_gates` gates: two
/// random walks from a random diagram, the second closed up through the
/// common normal form.
pub fn random_parallel_pair(
    rng: &mut impl rand::Rng,
    rules: &RuleSet,
    max_gates: usize,
) -> (smc_core::coherence::Zigzag, smc_core::coherence::Zigzag) {
    use smc_core::coherence::{Move, Zigzag};
    use smc_core::rewrite::{normalize, Strategy};
    loop {
        let picks: Vec<(usize, usize)> =
            (0..rng.gen_range(1..=max_gates.min(6))).map(|_| (rng.gen_range(0..3), rng.gen_range(0..64))).collect();
        let x = build_diagram(rng.gen_range(0..=3), &picks);
        let (len1, len2) = (rng.gen_range(1..=4), rng.gen_range(0..=3));
        let first = random_walk(rng, &x, rules, len1, max_gates);
        let second = random_walk(rng, &x, rules, len2, max_gates);
        let (_, down) = normalize(second.end(), rules, Strategy::Leftmost).unwrap();
        let (_, up) = normalize(first.end(), rules, Strategy::Leftmost).unwrap();
        let mut tail = Zigzag::forward(second.end().clone(), &down.steps);
        tail.moves.extend(up.steps.iter().rev().cloned().map(Move::backward));
        let second = second.then(&tail).unwrap();
        let small = |z: &Zigzag| (0..=z.len()).all(|k| z.at(k).gate_count() <= max_gates);
        if first.is_empty() || !small(&second) {
            continue;
        }
        return (first, second);
    }
}
