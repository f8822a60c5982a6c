//! Replays certificates. This module has its own small rewriting kernel
//! built directly on diagram scheduling, so that a mistake in the matcher
//! used for generation does not validate itself.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::coherence::cells::{CellCatalog, CellName};
use crate::coherence::certify::{Certificate, Surgery};
use crate::coherence::zigzag::{Move, Zigzag};
use crate::coherence::CoherenceError;
use crate::diagram::{trim_block, Diagram, Slice};
use crate::rewrite::{Redex, RewriteStep, RuleSet};

struct Kernel<'a> {
    rules: &'a RuleSet,
}

/// Splits `host` around `mask`: slices above, the canonical trimmed block,
/// left and right widths, slices below, and the host ids of the gates above
/// and below.
struct Split {
    above: Vec<Slice>,
    block: Diagram,
    left: usize,
    right: usize,
    below: Vec<Slice>,
    above_ids: Vec<usize>,
    below_ids: Vec<usize>,
}

fn split(host: &Diagram, mask: u64) -> Option<Split> {
    let k = mask.count_ones() as usize;
    let (slices, start, ids) = host.schedule_block(mask)?;
    let (trimmed, left, right) = trim_block(&slices[start..start + k]);
    let width = trimmed.first().map_or(0, |s| s.width_in());
    let block = Diagram::from_slices(width, trimmed).ok()?;
    Some(Split {
        above: slices[..start].to_vec(),
        block,
        left,
        right,
        below: slices[start + k..].to_vec(),
        above_ids: ids[..start].to_vec(),
        below_ids: ids[start + k..].to_vec(),
    })
}

/// `above ; (id * inner * id) ; below` and the host index of each gate of `inner`.
fn fill(inputs: usize, sp: &Split, inner: &Diagram) -> Option<(Diagram, Vec<usize>)> {
    let mut slices = sp.above.clone();
    slices.extend(inner.slices().iter().map(|s| s.whiskered(sp.left, sp.right)));
    slices.extend_from_slice(&sp.below);
    let (host, perm) = Diagram::from_slices_tracked(inputs, slices).ok()?;
    let start = sp.above.len();
    let mut map = alloc::vec![usize::MAX; inner.gate_count()];
    for (pos, &p) in perm.iter().enumerate() {
        if p >= start && p < start + inner.gate_count() {
            map[p - start] = pos;
        }
    }
    Some((host, map))
}

impl Kernel<'_> {
    /// Fires rule `rule` on `gates` of `host`: the target and, for each host
    /// gate, where it survives.
    fn fire(&self, host: &Diagram, rule: usize, gates: &[usize]) -> Option<(Diagram, Vec<Option<usize>>)> {
        let rule = self.rules.rules.get(rule)?;
        if gates.is_empty() || gates.windows(2).any(|w| w[0] >= w[1]) || *gates.last()? >= host.gate_count() {
            return None;
        }
        let mask = gates.iter().fold(0u64, |m, &g| m | (1 << g));
        let sp = split(host, mask)?;
        let (lhs, pl, pr) = trim_block(rule.lhs.slices());
        let lhs_width = rule.lhs.inputs() - pl - pr;
        let lhs = Diagram::from_slices(lhs_width, lhs).ok()?;
        if sp.block != lhs || sp.left < pl || sp.right < pr {
            return None;
        }
        let (a, b) = (sp.left - pl, sp.right - pr);
        let mut slices = sp.above.clone();
        let mut origin: Vec<Option<usize>> = sp.above_ids.iter().map(|&i| Some(i)).collect();
        for s in rule.rhs.slices() {
            slices.push(s.whiskered(a, b));
            origin.push(None);
        }
        slices.extend_from_slice(&sp.below);
        origin.extend(sp.below_ids.iter().map(|&i| Some(i)));
        let (target, perm) = Diagram::from_slices_tracked(host.inputs(), slices).ok()?;
        let mut survivors = alloc::vec![None; host.gate_count()];
        for (pos, &p) in perm.iter().enumerate() {
            if let Some(old) = origin[p] {
                survivors[old] = Some(pos);
            }
        }
        Some((target, survivors))
    }

    fn check_step(&self, step: &RewriteStep) -> Result<(), String> {
        match self.fire(&step.source, step.redex.rule, &step.redex.gates) {
            Some((t, _)) if t == step.target => Ok(()),
            Some(_) => Err(format!("step on {} does not reach {}", step.source, step.target)),
            None => Err(format!("no redex {:?} on {}", step.redex, step.source)),
        }
    }

    fn check_path(&self, z: &Zigzag) -> Result<(), String> {
        for m in &z.moves {
            self.check_step(&m.step)?;
        }
        if z.is_chained() {
            Ok(())
        } else {
            Err("moves are not consecutive".into())
        }
    }

    /// `second` after `first` has fired, for disjoint redexes.
    fn residual(&self, host: &Diagram, first: &Redex, second: &Redex) -> Option<RewriteStep> {
        let (mid, survivors) = self.fire(host, first.rule, &first.gates)?;
        let mut gates = second.gates.iter().map(|&g| survivors[g]).collect::<Option<Vec<_>>>()?;
        gates.sort_unstable();
        let (target, _) = self.fire(&mid, second.rule, &gates)?;
        Some(RewriteStep { source: mid, redex: Redex { rule: second.rule, gates }, target })
    }

    /// The square on the forward path `a ; b'`: returns `b ; a'`.
    fn square(&self, a: &RewriteStep, b2: &RewriteStep) -> Result<[RewriteStep; 2], String> {
        let (mid, survivors) = self.fire(&a.source, a.redex.rule, &a.redex.gates).ok_or("first step does not fire")?;
        if mid != b2.source {
            return Err("steps are not consecutive".into());
        }
        let mut gates = Vec::new();
        for &g in &b2.redex.gates {
            let pre = survivors.iter().position(|s| *s == Some(g)).ok_or("second redex uses a new gate")?;
            gates.push(pre);
        }
        gates.sort_unstable();
        let b = Redex { rule: b2.redex.rule, gates };
        if b.overlaps(&a.redex) {
            return Err("redexes overlap".into());
        }
        let (bt, _) = self.fire(&a.source, b.rule, &b.gates).ok_or("second redex does not fire first")?;
        let first = RewriteStep { source: a.source.clone(), redex: b.clone(), target: bt };
        let second = self.residual(&a.source, &b, &a.redex).ok_or("first redex does not survive")?;
        if second.target != b2.target {
            return Err("square does not close".into());
        }
        Ok([first, second])
    }
}

fn subsets_containing(n: usize, k: usize, base: u64) -> Vec<u64> {
    let have = base.count_ones() as usize;
    let mut out = Vec::new();
    if have > k {
        return out;
    }
    fn go(i: usize, n: usize, need: usize, acc: u64, out: &mut Vec<u64>) {
        if need == 0 {
            out.push(acc);
            return;
        }
        for j in i..n {
            if acc & (1 << j) == 0 {
                go(j + 1, n, need - 1, acc | (1 << j), out);
            }
        }
    }
    go(0, n, k - have, base, &mut out);
    out
}

/// Replays `cert`. For every surgery, returns the moves it removed and the
/// length of the path afterwards.
pub fn replay(cert: &Certificate, catalog: &CellCatalog) -> Result<Vec<(Vec<Move>, usize)>, CoherenceError> {
    let kernel = Kernel { rules: &catalog.rules };
    let bad = |index: usize, reason: String| CoherenceError::InvalidSurgery { index, reason };
    kernel.check_path(&cert.source).map_err(|r| bad(0, format!("source: {r}")))?;
    kernel.check_path(&cert.target).map_err(|r| bad(0, format!("target: {r}")))?;
    let mut cur = cert.source.moves.clone();
    let start = cert.source.start.clone();
    let at_pos = |cur: &[Move], k: usize| -> Diagram {
        if k == 0 {
            start.clone()
        } else {
            cur[k - 1].to().clone()
        }
    };
    let mut removed_log = Vec::new();
    for (index, s) in cert.surgeries.iter().enumerate() {
        let at = s.at();
        if at > cur.len() {
            return Err(bad(index, "index past the end of the path".into()));
        }
        let (len, new): (usize, Vec<Move>) = match s {
            Surgery::Cancel { .. } => {
                if at + 1 >= cur.len() || cur[at + 1] != cur[at].inverse() {
                    return Err(bad(index, "no move followed by its inverse".into()));
                }
                (2, Vec::new())
            }
            Surgery::Insert { first, .. } => {
                kernel.check_step(&first.step).map_err(|r| bad(index, r))?;
                if first.from() != &at_pos(&cur, at) {
                    return Err(bad(index, "inserted move starts elsewhere".into()));
                }
                (0, alloc::vec![first.clone(), first.inverse()])
            }
            Surgery::Square { .. } => {
                if at + 2 > cur.len() {
                    return Err(bad(index, "segment past the end of the path".into()));
                }
                let (x, y) = (&cur[at], &cur[at + 1]);
                let new = match (x.is_forward(), y.is_forward()) {
                    (true, true) => {
                        kernel.square(&x.step, &y.step).map_err(|r| bad(index, r))?.map(Move::forward).to_vec()
                    }
                    (false, false) => {
                        let [b, a2] = kernel.square(&y.step, &x.step).map_err(|r| bad(index, r))?;
                        alloc::vec![Move::backward(a2), Move::backward(b)]
                    }
                    _ => return Err(bad(index, "mixed directions".into())),
                };
                (2, new)
            }
            Surgery::Cell { cell, forward, .. } => {
                place_cell(&kernel, catalog, cell, *forward, &cur, at, &at_pos(&cur, at)).map_err(|r| bad(index, r))?
            }
        };
        if at + len > cur.len() {
            return Err(bad(index, "segment past the end of the path".into()));
        }
        let removed: Vec<Move> = cur.splice(at..at + len, new).collect();
        removed_log.push((removed, cur.len()));
    }
    if cur != cert.target.moves || start != cert.target.start {
        return Err(CoherenceError::TargetMismatch);
    }
    Ok(removed_log)
}

/// Finds a placement of one side of `cell` on `cur[at..]` and returns the
/// length replaced and the moves of the other side.
fn place_cell(
    kernel: &Kernel,
    catalog: &CellCatalog,
    name: &CellName,
    forward: bool,
    cur: &[Move],
    at: usize,
    here: &Diagram,
) -> Result<(usize, Vec<Move>), String> {
    let cell = catalog.cells.iter().find(|c| &c.name == name).ok_or_else(|| format!("unknown cell {name}"))?;
    let (old, new) = if forward { (&cell.left, &cell.right) } else { (&cell.right, &cell.left) };
    let len = old.len();
    if at + len > cur.len() {
        return Err("segment past the end of the path".into());
    }
    let seg = &cur[at..at + len];
    let fwd = if seg.iter().all(|m| m.is_forward()) {
        true
    } else if seg.iter().all(|m| !m.is_forward()) {
        false
    } else {
        return Err("mixed directions".into());
    };
    // the step the side starts with, and the diagram it fires on
    let (first, host) =
        if fwd { (&seg[0].step, here.clone()) } else { (&seg[len - 1].step, seg[len - 1].step.source.clone()) };
    if first.source != host {
        return Err("segment does not start at the cell source".into());
    }
    let k = cell.source.gate_count();
    for mask in subsets_containing(host.gate_count(), k, first.redex.mask()) {
        let Some(sp) = split(&host, mask) else { continue };
        if sp.block != cell.source {
            continue;
        }
        let lift = |steps: &[RewriteStep]| -> Option<Vec<RewriteStep>> {
            steps
                .iter()
                .map(|st| {
                    let (source, map) = fill(host.inputs(), &sp, &st.source)?;
                    let mut gates: Vec<usize> = st.redex.gates.iter().map(|&g| map[g]).collect();
                    gates.sort_unstable();
                    let (target, _) = fill(host.inputs(), &sp, &st.target)?;
                    Some(RewriteStep { source, redex: Redex { rule: st.redex.rule, gates }, target })
                })
                .collect()
        };
        let Some(lifted) = lift(old) else { continue };
        let matches = if fwd {
            seg.iter().zip(&lifted).all(|(m, st)| &m.step == st)
        } else {
            seg.iter().rev().zip(&lifted).all(|(m, st)| &m.step == st)
        };
        if !matches {
            continue;
        }
        let other = lift(new).ok_or("other side does not fit")?;
        for st in &other {
            kernel.check_step(st)?;
        }
        let moves = if fwd {
            other.into_iter().map(Move::forward).collect()
        } else {
            other.into_iter().rev().map(Move::backward).collect()
        };
        return Ok((len, moves));
    }
    Err(format!("{name} does not match the segment at {at}"))
}

/// Checks `cert` surgery by surgery. The error names the first surgery that
/// does not apply.
pub fn validate(cert: &Certificate, catalog: &CellCatalog) -> Result<(), CoherenceError> {
    replay(cert, catalog).map(|_| ())
}

/// The certificate read backwards: turns `cert.target` into `cert.source`.
pub fn invert(cert: &Certificate, catalog: &CellCatalog) -> Result<Certificate, CoherenceError> {
    let removed = replay(cert, catalog)?;
    let mut surgeries = Vec::with_capacity(cert.surgeries.len());
    for (s, (gone, _)) in cert.surgeries.iter().zip(removed).rev() {
        surgeries.push(match s {
            Surgery::Cell { at, cell, forward } => Surgery::Cell { at: *at, cell: cell.clone(), forward: !forward },
            Surgery::Square { at } => Surgery::Square { at: *at },
            Surgery::Cancel { at } => Surgery::Insert { at: *at, first: gone[0].clone() },
            Surgery::Insert { at, .. } => Surgery::Cancel { at: *at },
        });
    }
    Ok(Certificate { rules: cert.rules.clone(), source: cert.target.clone(), target: cert.source.clone(), surgeries })
}
