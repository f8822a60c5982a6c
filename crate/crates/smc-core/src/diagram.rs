//! Monochrome string diagrams in the free PRO on `m`, `e`, `s`.
//!
//! A diagram is stored as a sequence of whiskered gates. Two slice sequences
//! denote the same diagram when they are related by interchange moves; every
//! stored `Diagram` is kept in the leftmost-earliest schedule so that equality
//! is plain structural equality.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

/// Default bound on width and gate count.
pub const DEFAULT_CAPACITY: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate {
    /// Binary product, 2 -> 1.
    M,
    /// Unit, 0 -> 1.
    E,
    /// Symmetry, 2 -> 2.
    S,
}

impl Gate {
    pub const ALL: [Gate; 3] = [Gate::M, Gate::E, Gate::S];

    pub const fn inputs(self) -> usize {
        match self {
            Gate::M | Gate::S => 2,
            Gate::E => 0,
        }
    }

    pub const fn outputs(self) -> usize {
        match self {
            Gate::M | Gate::E => 1,
            Gate::S => 2,
        }
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Gate::M => "m",
            Gate::E => "e",
            Gate::S => "s",
        }
    }
}

/// One gate with `left` identity wires on its left and `right` on its right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slice {
    pub left: u16,
    pub gate: Gate,
    pub right: u16,
}

impl Slice {
    pub fn new(left: usize, gate: Gate, right: usize) -> Self {
        Slice { left: left as u16, gate, right: right as u16 }
    }

    pub fn left(&self) -> usize {
        self.left as usize
    }

    pub fn right(&self) -> usize {
        self.right as usize
    }

    pub fn width_in(&self) -> usize {
        self.left() + self.gate.inputs() + self.right()
    }

    pub fn width_out(&self) -> usize {
        self.left() + self.gate.outputs() + self.right()
    }

    /// Same gate with `a` more wires on the left and `b` more on the right.
    pub fn whiskered(&self, a: usize, b: usize) -> Slice {
        Slice::new(self.left() + a, self.gate, self.right() + b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum DiagramError {
    #[error("arity mismatch: {left} outputs composed with {right} inputs")]
    ArityMismatch { left: usize, right: usize },
    #[error("malformed diagram: slice {index} expects width {expected}, found {found}")]
    MalformedDiagram { index: usize, expected: usize, found: usize },
    #[error("capacity exceeded: {what} {value} is above the cap {cap}")]
    CapacityExceeded { what: &'static str, value: usize, cap: usize },
}

/// A morphism `inputs -> outputs` of the free PRO, in canonical schedule.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagram {
    inputs: u16,
    outputs: u16,
    slices: Vec<Slice>,
}

impl fmt::Debug for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diagram({} : {} -> {})", self, self.inputs, self.outputs)
    }
}

/// Interchange of two adjacent slices. `upper` is applied first. Returns the
/// pair in swapped order (the former lower slice now on top), or `None` when
/// the two gates touch a common wire.
pub fn interchange(upper: Slice, lower: Slice) -> Option<(Slice, Slice)> {
    let a = upper.left();
    let (i1, o1) = (upper.gate.inputs(), upper.gate.outputs());
    let c = lower.left();
    let (i2, o2) = (lower.gate.inputs(), lower.gate.outputs());
    let top = upper.width_in();
    let mid = top + o2 - i2;
    let new_upper_left = if c + i2 <= a {
        c
    } else if c >= a + o1 {
        c + i1 - o1
    } else {
        return None;
    };
    let new_lower_left = if c + i2 <= a { a + o2 - i2 } else { a };
    let new_upper = Slice::new(new_upper_left, lower.gate, top - new_upper_left - i2);
    let new_lower = Slice::new(new_lower_left, upper.gate, mid - new_lower_left - i1);
    Some((new_upper, new_lower))
}

/// Position of `rest[k]` when moved to the front by interchange, if possible.
fn bubble(rest: &[(Slice, usize)], k: usize) -> Option<Slice> {
    let mut cur = rest[k].0;
    for j in (0..k).rev() {
        cur = interchange(rest[j].0, cur)?.0;
    }
    Some(cur)
}

/// Move `rest[k]` to the front and remove it; the others are re-expressed in
/// the coordinates below it.
fn emit(rest: &mut Vec<(Slice, usize)>, k: usize) -> (Slice, usize) {
    let id = rest[k].1;
    let mut cur = rest[k].0;
    for j in (0..k).rev() {
        let (up, low) = interchange(rest[j].0, cur).expect("emit called on a blocked gate");
        cur = up;
        rest[j + 1] = (low, rest[j].1);
    }
    rest.remove(0);
    (cur, id)
}

fn schedule_key(s: &Slice) -> usize {
    2 * s.left() + usize::from(s.gate.inputs() > 0)
}

/// Leftmost-earliest schedule of a chained slice sequence. The second
/// component maps each output position to the index of the gate in `slices`.
pub fn canonical_schedule(slices: &[Slice]) -> (Vec<Slice>, Vec<usize>) {
    let mut rest: Vec<(Slice, usize)> = slices.iter().copied().zip(0..).collect();
    let mut out = Vec::with_capacity(slices.len());
    let mut perm = Vec::with_capacity(slices.len());
    while !rest.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for k in 0..rest.len() {
            let Some(front) = bubble(&rest, k) else { continue };
            let key = schedule_key(&front);
            match best {
                None => best = Some((key, k)),
                Some((bk, _)) if key < bk => best = Some((key, k)),
                Some((bk, bi)) if key == bk && front.gate == Gate::E => {
                    // Two units ready at the same slot: keep the one that ends up
                    // on the left, i.e. the one still at this slot once the other
                    // has been emitted.
                    let mut trial = rest.clone();
                    emit(&mut trial, bi);
                    let pos = trial.iter().position(|t| t.1 == rest[k].1).unwrap();
                    if bubble(&trial, pos).map(|s| s.left()) == Some(front.left()) {
                        best = Some((key, k));
                    }
                }
                _ => {}
            }
        }
        let (_, k) = best.expect("some gate is always ready");
        let (s, id) = emit(&mut rest, k);
        out.push(s);
        perm.push(id);
    }
    (out, perm)
}

fn check_chain(inputs: usize, slices: &[Slice]) -> Result<usize, DiagramError> {
    let mut width = inputs;
    for (index, s) in slices.iter().enumerate() {
        if s.width_in() != width {
            return Err(DiagramError::MalformedDiagram { index, expected: width, found: s.width_in() });
        }
        width = s.width_out();
    }
    Ok(width)
}

fn check_capacity(inputs: usize, slices: &[Slice], cap: usize) -> Result<(), DiagramError> {
    if slices.len() > cap {
        return Err(DiagramError::CapacityExceeded { what: "gate count", value: slices.len(), cap });
    }
    let widest = slices.iter().map(|s| s.width_in().max(s.width_out())).max().unwrap_or(0).max(inputs);
    if widest > cap {
        return Err(DiagramError::CapacityExceeded { what: "width", value: widest, cap });
    }
    Ok(())
}

impl Diagram {
    /// `id_n`.
    pub fn identity(n: usize) -> Diagram {
        Diagram { inputs: n as u16, outputs: n as u16, slices: Vec::new() }
    }

    /// The single gate `g` with no context.
    pub fn gate(g: Gate) -> Diagram {
        Diagram { inputs: g.inputs() as u16, outputs: g.outputs() as u16, slices: alloc::vec![Slice::new(0, g, 0)] }
    }

    /// Builds and canonicalizes a diagram from any chained slice sequence.
    pub fn from_slices(inputs: usize, slices: Vec<Slice>) -> Result<Diagram, DiagramError> {
        Self::from_slices_capped(inputs, slices, DEFAULT_CAPACITY)
    }

    pub fn from_slices_capped(inputs: usize, slices: Vec<Slice>, cap: usize) -> Result<Diagram, DiagramError> {
        let outputs = check_chain(inputs, &slices)?;
        check_capacity(inputs, &slices, cap)?;
        let (slices, _) = canonical_schedule(&slices);
        Ok(Diagram { inputs: inputs as u16, outputs: outputs as u16, slices })
    }

    /// Like `from_slices` but also reports, for each canonical gate, the index
    /// of the slice it came from.
    pub fn from_slices_tracked(inputs: usize, slices: Vec<Slice>) -> Result<(Diagram, Vec<usize>), DiagramError> {
        let outputs = check_chain(inputs, &slices)?;
        check_capacity(inputs, &slices, DEFAULT_CAPACITY)?;
        let (slices, perm) = canonical_schedule(&slices);
        Ok((Diagram { inputs: inputs as u16, outputs: outputs as u16, slices }, perm))
    }

    /// Wraps slices that are already known to be chained and canonical.
    pub(crate) fn from_canonical_unchecked(inputs: usize, outputs: usize, slices: Vec<Slice>) -> Diagram {
        Diagram { inputs: inputs as u16, outputs: outputs as u16, slices }
    }

    pub fn inputs(&self) -> usize {
        self.inputs as usize
    }

    pub fn outputs(&self) -> usize {
        self.outputs as usize
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn gate_count(&self) -> usize {
        self.slices.len()
    }

    pub fn is_identity(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn count(&self, g: Gate) -> usize {
        self.slices.iter().filter(|s| s.gate == g).count()
    }

    /// Largest width reached by any cut of the diagram.
    pub fn max_width(&self) -> usize {
        self.slices.iter().map(|s| s.width_in().max(s.width_out())).max().unwrap_or(0).max(self.inputs())
    }

    /// `self ; other`, top to bottom.
    pub fn seq(&self, other: &Diagram) -> Result<Diagram, DiagramError> {
        if self.outputs != other.inputs {
            return Err(DiagramError::ArityMismatch { left: self.outputs(), right: other.inputs() });
        }
        let mut slices = self.slices.clone();
        slices.extend_from_slice(&other.slices);
        Diagram::from_slices(self.inputs(), slices)
    }

    /// `self * other`, side by side.
    pub fn par(&self, other: &Diagram) -> Result<Diagram, DiagramError> {
        let mut slices: Vec<Slice> = self.slices.iter().map(|s| s.whiskered(0, other.inputs())).collect();
        slices.extend(other.slices.iter().map(|s| s.whiskered(self.outputs(), 0)));
        Diagram::from_slices(self.inputs() + other.inputs(), slices)
    }

    /// `id_a * self * id_b`.
    pub fn whisker(&self, a: usize, b: usize) -> Diagram {
        // Whiskering preserves the schedule: every key shifts by the same amount.
        Diagram {
            inputs: (self.inputs() + a + b) as u16,
            outputs: (self.outputs() + a + b) as u16,
            slices: self.slices.iter().map(|s| s.whiskered(a, b)).collect(),
        }
    }

    /// Width of the cut above slice `k` (`k = gate_count` gives the outputs).
    pub fn width_at(&self, k: usize) -> usize {
        if k == self.slices.len() {
            self.outputs()
        } else {
            self.slices[k].width_in()
        }
    }

    /// Sub-diagram made of slices `range`, as a diagram on its own cut.
    pub fn segment(&self, from: usize, to: usize) -> Diagram {
        let inputs = self.width_at(from);
        let slices = self.slices[from..to].to_vec();
        Diagram::from_slices(inputs, slices).expect("a segment of a chained diagram is chained")
    }

    /// For every gate, the set of gates it directly depends on through a wire.
    pub fn wire_predecessors(&self) -> Vec<u64> {
        let mut frontier: Vec<Option<usize>> = alloc::vec![None; self.inputs()];
        let mut preds = Vec::with_capacity(self.slices.len());
        for (k, s) in self.slices.iter().enumerate() {
            let a = s.left();
            let mut mask = 0u64;
            for g in frontier.drain(a..a + s.gate.inputs()).collect::<Vec<_>>().into_iter().flatten() {
                mask |= 1 << g;
            }
            for i in 0..s.gate.outputs() {
                frontier.insert(a + i, Some(k));
            }
            preds.push(mask);
        }
        preds
    }

    /// Transitive closure of `wire_predecessors`: bit `j` of entry `k` is set
    /// when a directed wire path leads from gate `j` to gate `k`.
    pub fn ancestors(&self) -> Vec<u64> {
        let preds = self.wire_predecessors();
        let mut anc: Vec<u64> = Vec::with_capacity(preds.len());
        for (k, &p) in preds.iter().enumerate() {
            let mut mask = p;
            for j in 0..k {
                if p & (1 << j) != 0 {
                    mask |= anc[j];
                }
            }
            anc.push(mask);
        }
        anc
    }

    /// Reorders the slices so that the gates in `mask` are consecutive.
    /// Returns the reordered slices, the position of the block, and for each
    /// reordered slice the index of the canonical gate it holds. Fails when
    /// `mask` is not convex or the block cannot be made contiguous.
    pub fn schedule_block(&self, mask: u64) -> Option<(Vec<Slice>, usize, Vec<usize>)> {
        let anc = self.ancestors();
        let below: u64 = (0..self.slices.len())
            .filter(|&k| mask & (1 << k) == 0 && anc[k] & mask != 0)
            .fold(0, |acc, k| acc | (1 << k));
        let mut rest: Vec<(Slice, usize)> = self.slices.iter().copied().zip(0..).collect();
        let mut out = Vec::with_capacity(rest.len());
        let mut ids = Vec::with_capacity(rest.len());
        let in_mask = |id: usize| mask & (1 << id) != 0;
        let is_below = |id: usize| below & (1 << id) != 0;
        // Gates that can go above the block; emitting a ready gate early never
        // blocks another one.
        loop {
            let ready =
                (0..rest.len()).find(|&k| !in_mask(rest[k].1) && !is_below(rest[k].1) && bubble(&rest, k).is_some());
            let Some(k) = ready else { break };
            let (s, id) = emit(&mut rest, k);
            out.push(s);
            ids.push(id);
        }
        let start = out.len();
        let block_len = mask.count_ones() as usize;
        for _ in 0..block_len {
            let k = (0..rest.len()).find(|&k| in_mask(rest[k].1) && bubble(&rest, k).is_some())?;
            let (s, id) = emit(&mut rest, k);
            out.push(s);
            ids.push(id);
        }
        for (s, id) in rest {
            out.push(s);
            ids.push(id);
        }
        Some((out, start, ids))
    }
}

/// Trims the common identity wires of a block of slices. Returns the
/// trimmed slices and the left and right context widths.
pub fn trim_block(block: &[Slice]) -> (Vec<Slice>, usize, usize) {
    let a = block.iter().map(|s| s.left()).min().unwrap_or(0);
    let b = block.iter().map(|s| s.right()).min().unwrap_or(0);
    let trimmed = block.iter().map(|s| Slice::new(s.left() - a, s.gate, s.right() - b)).collect();
    (trimmed, a, b)
}

/// `id_n`.
pub fn identity(n: usize) -> Diagram {
    Diagram::identity(n)
}

pub fn seq_compose(phi: &Diagram, psi: &Diagram) -> Result<Diagram, DiagramError> {
    phi.seq(psi)
}

pub fn par_compose(phi: &Diagram, psi: &Diagram) -> Result<Diagram, DiagramError> {
    phi.par(psi)
}

/// Canonical form of a raw slice sequence.
pub fn canonical_form(inputs: usize, slices: &[Slice]) -> Result<Diagram, DiagramError> {
    Diagram::from_slices(inputs, slices.to_vec())
}

pub fn equals(phi: &Diagram, psi: &Diagram) -> bool {
    phi == psi
}

/// All canonical diagrams `p -> q` with at most `max_gates` gates, ordered by
/// gate count and then by slice sequence.
pub fn enumerate_diagrams(p: usize, q: usize, max_gates: usize) -> Vec<Diagram> {
    enumerate_by_size(p, max_gates, |w, remaining| w <= q + remaining && w + remaining >= q)
        .into_iter()
        .flatten()
        .filter(|d| d.outputs() == q)
        .collect()
}

/// All canonical diagrams with `p` inputs and at most `max_gates` gates whose
/// output count is at most `max_outputs`, grouped by gate count.
pub fn enumerate_diagrams_upto(p: usize, max_outputs: usize, max_gates: usize) -> Vec<Vec<Diagram>> {
    enumerate_by_size(p, max_gates, |w, remaining| w <= max_outputs + remaining)
        .into_iter()
        .map(|level| level.into_iter().filter(|d| d.outputs() <= max_outputs).collect())
        .collect()
}

fn enumerate_by_size(p: usize, max_gates: usize, keep: impl Fn(usize, usize) -> bool) -> Vec<Vec<Diagram>> {
    let mut levels: Vec<Vec<Diagram>> = Vec::new();
    let start = Diagram::identity(p);
    levels.push(if keep(p, max_gates) { alloc::vec![start] } else { Vec::new() });
    for n in 1..=max_gates {
        let mut next = BTreeSet::new();
        for d in &levels[n - 1] {
            let w = d.outputs();
            for g in Gate::ALL {
                if g.inputs() > w {
                    continue;
                }
                let new_w = w - g.inputs() + g.outputs();
                if !keep(new_w, max_gates - n) {
                    continue;
                }
                for a in 0..=(w - g.inputs()) {
                    let mut slices = d.slices.clone();
                    slices.push(Slice::new(a, g, w - g.inputs() - a));
                    let (slices, _) = canonical_schedule(&slices);
                    next.insert(Diagram::from_canonical_unchecked(p, new_w, slices));
                }
            }
        }
        levels.push(next.into_iter().collect());
    }
    levels
}

/// Port-graph view of a diagram: gates plus the source of every wire.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortGraph {
    pub inputs: usize,
    pub gates: Vec<Gate>,
    /// For each gate, the sources of its input ports in port order.
    pub gate_inputs: Vec<Vec<Port>>,
    /// Sources of the output interface pins, left to right.
    pub outputs: Vec<Port>,
}

/// A wire source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Port {
    /// Input interface pin.
    Pin(usize),
    /// Output port `port` of gate `gate`.
    Out { gate: usize, port: usize },
}

impl PortGraph {
    pub fn from_diagram(d: &Diagram) -> PortGraph {
        let mut frontier: Vec<Port> = (0..d.inputs()).map(Port::Pin).collect();
        let mut gates = Vec::new();
        let mut gate_inputs = Vec::new();
        for (k, s) in d.slices().iter().enumerate() {
            let a = s.left();
            let ins: Vec<Port> = frontier.drain(a..a + s.gate.inputs()).collect();
            for i in 0..s.gate.outputs() {
                frontier.insert(a + i, Port::Out { gate: k, port: i });
            }
            gates.push(s.gate);
            gate_inputs.push(ins);
        }
        PortGraph { inputs: d.inputs(), gates, gate_inputs, outputs: frontier }
    }

    /// Rebuilds the diagram by scheduling gates from the outputs upward. Every
    /// gate has at least one output, so its position on the current cut is
    /// always determined by the ports it feeds.
    pub fn to_diagram(&self) -> Result<Diagram, DiagramError> {
        // Current cut, read bottom-up: each entry is the source feeding that wire.
        let mut cut: Vec<Port> = self.outputs.clone();
        let mut placed = alloc::vec![false; self.gates.len()];
        let mut rev_slices = Vec::new();
        for _ in 0..self.gates.len() {
            let mut chosen = None;
            'search: for (g, &kind) in self.gates.iter().enumerate() {
                if placed[g] {
                    continue;
                }
                let first = Port::Out { gate: g, port: 0 };
                if let Some(pos) = cut.iter().position(|&p| p == first) {
                    for port in 1..kind.outputs() {
                        if cut.get(pos + port) != Some(&Port::Out { gate: g, port }) {
                            continue 'search;
                        }
                    }
                    chosen = Some((g, pos));
                    break;
                }
            }
            let (g, pos) = chosen.ok_or(DiagramError::MalformedDiagram { index: 0, expected: 0, found: 0 })?;
            let kind = self.gates[g];
            cut.splice(pos..pos + kind.outputs(), self.gate_inputs[g].iter().copied());
            let right = cut.len() - pos - kind.inputs();
            rev_slices.push(Slice::new(pos, kind, right));
            placed[g] = true;
        }
        if cut != (0..self.inputs).map(Port::Pin).collect::<Vec<_>>() {
            return Err(DiagramError::MalformedDiagram { index: 0, expected: self.inputs, found: cut.len() });
        }
        rev_slices.reverse();
        Diagram::from_slices(self.inputs, rev_slices)
    }
}

impl fmt::Display for Diagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_diagram(self))
    }
}
