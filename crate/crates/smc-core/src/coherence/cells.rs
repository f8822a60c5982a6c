//! The cell catalog: one filler per critical peak, plus the two plumbing
//! cells, and the machinery to place a filler inside a larger diagram.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::coherence::zigzag::Move;
use crate::coherence::CoherenceError;
use crate::diagram::{Diagram, Slice};
use crate::peaks::{classify, enumerate_peaks, join, PeakClass, COHERENCE_SOURCES};
use crate::rewrite::{occurrence, Redex, RewriteStep, RuleSet};
use crate::syntax::parse_diagram;

/// The listing of the critical peaks of F, with their names.
pub const PEAK_LISTING: &str = include_str!("../../data/peaks.txt");

const BASE_NAMES: [&str; 5] = ["penta", "tria", "inv", "g", "exa2"];

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellName {
    Penta,
    Tria,
    Inv,
    G,
    Exa2,
    Foldable(String),
    Kelly(String),
    WeakKelly(String),
    DisjointSquare,
    StaleCancel,
}

impl CellName {
    pub fn is_plumbing(&self) -> bool {
        matches!(self, CellName::DisjointSquare | CellName::StaleCancel)
    }

    /// Kelly and weak Kelly cells, which have entries in the expansion table.
    pub fn is_derived(&self) -> bool {
        matches!(self, CellName::Kelly(_) | CellName::WeakKelly(_))
    }

    pub fn is_base(&self) -> bool {
        matches!(self, CellName::Penta | CellName::Tria | CellName::Inv | CellName::G | CellName::Exa2)
    }

    /// The peak this cell fills, for the non-plumbing cells.
    pub fn peak_id(&self) -> Option<String> {
        match self {
            CellName::Penta => Some("coherence-1".into()),
            CellName::Tria => Some("coherence-2".into()),
            CellName::Inv => Some("coherence-3".into()),
            CellName::G => Some("coherence-4".into()),
            CellName::Exa2 => Some("coherence-5".into()),
            CellName::Foldable(id) | CellName::Kelly(id) | CellName::WeakKelly(id) => Some(id.clone()),
            CellName::DisjointSquare | CellName::StaleCancel => None,
        }
    }
}

impl fmt::Display for CellName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellName::Penta => f.write_str("penta"),
            CellName::Tria => f.write_str("tria"),
            CellName::Inv => f.write_str("inv"),
            CellName::G => f.write_str("g"),
            CellName::Exa2 => f.write_str("exa2"),
            CellName::Foldable(id) => write!(f, "foldable({id})"),
            CellName::Kelly(id) => write!(f, "kelly({id})"),
            CellName::WeakKelly(id) => write!(f, "weak_kelly({id})"),
            CellName::DisjointSquare => f.write_str("disjoint_square"),
            CellName::StaleCancel => f.write_str("stale_cancel"),
        }
    }
}

impl FromStr for CellName {
    type Err = CoherenceError;

    fn from_str(s: &str) -> Result<CellName, CoherenceError> {
        let wrapped = |prefix: &str| s.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')).map(String::from);
        Ok(match s {
            "penta" => CellName::Penta,
            "tria" => CellName::Tria,
            "inv" => CellName::Inv,
            "g" => CellName::G,
            "exa2" => CellName::Exa2,
            "disjoint_square" => CellName::DisjointSquare,
            "stale_cancel" => CellName::StaleCancel,
            _ => {
                if let Some(id) = wrapped("foldable(") {
                    CellName::Foldable(id)
                } else if let Some(id) = wrapped("kelly(") {
                    CellName::Kelly(id)
                } else if let Some(id) = wrapped("weak_kelly(") {
                    CellName::WeakKelly(id)
                } else {
                    return Err(CoherenceError::UnknownCell(s.to_string()));
                }
            }
        })
    }
}

/// The filler of one critical peak: both sides run from the source to the
/// common normal form, starting with the left and the right redex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeakCell {
    pub id: String,
    pub name: CellName,
    pub class: PeakClass,
    pub source: Diagram,
    pub left: Vec<RewriteStep>,
    pub right: Vec<RewriteStep>,
}

impl PeakCell {
    pub fn side(&self, forward: bool) -> &[RewriteStep] {
        if forward {
            &self.left
        } else {
            &self.right
        }
    }
}

/// A listed peak: name, source and the two (rule, anchor) labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ListedPeak {
    pub name: String,
    pub source: Diagram,
    pub redexes: [(String, usize); 2],
}

/// Parses `PEAK <name>: <source> | <rule>@<anchor> | <rule>@<anchor>` lines.
pub fn parse_listing(text: &str) -> Result<Vec<ListedPeak>, CoherenceError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |m: &str| CoherenceError::Syntax { line: i + 1, message: m.to_string() };
        let body = line.strip_prefix("PEAK ").ok_or_else(|| bad("expected PEAK"))?;
        let (name, rest) = body.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let parts: Vec<&str> = rest.split('|').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad("expected source and two redexes"));
        }
        let source = parse_diagram(parts[0]).map_err(|e| bad(&e.to_string()))?;
        let label = |p: &str| -> Result<(String, usize), CoherenceError> {
            let (rule, anchor) = p.split_once('@').ok_or_else(|| bad("redex must be rule@anchor"))?;
            let anchor = anchor.parse().map_err(|_| bad("bad anchor"))?;
            Ok((rule.to_string(), anchor))
        };
        out.push(ListedPeak { name: name.trim().to_string(), source, redexes: [label(parts[1])?, label(parts[2])?] });
    }
    Ok(out)
}

/// Gates between members of `mask`, added to it: the least convex set
/// containing `mask`.
pub fn convex_hull(host: &Diagram, mask: u64) -> u64 {
    let anc = host.ancestors();
    let mut h = mask;
    for k in 0..anc.len() {
        let bit = 1u64 << k;
        if mask & bit != 0 || anc[k] & mask == 0 {
            continue;
        }
        if (0..anc.len()).any(|j| mask & (1 << j) != 0 && anc[j] & bit != 0) {
            h |= bit;
        }
    }
    h
}

/// A diagram with a hole: `above ; (id_left * [ ] * id_right) ; below`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub inputs: usize,
    pub above: Vec<Slice>,
    pub left: usize,
    pub right: usize,
    pub below: Vec<Slice>,
}

impl Context {
    pub fn trivial(inputs: usize) -> Context {
        Context { inputs, above: Vec::new(), left: 0, right: 0, below: Vec::new() }
    }

    /// The context around the gates of `mask`, the block they form, and the
    /// host gate of each block gate.
    pub fn around(host: &Diagram, mask: u64) -> Option<(Context, Diagram, Vec<usize>)> {
        let occ = occurrence(host, mask)?;
        let ctx =
            Context { inputs: host.inputs(), above: occ.above, left: occ.left, right: occ.right, below: occ.below };
        Some((ctx, occ.inner, occ.inner_ids))
    }

    /// Fills the hole. Returns the host and the host index of each gate of
    /// `inner`.
    pub fn plug(&self, inner: &Diagram) -> (Diagram, Vec<usize>) {
        let mut slices = self.above.clone();
        slices.extend(inner.slices().iter().map(|s| s.whiskered(self.left, self.right)));
        slices.extend_from_slice(&self.below);
        let (host, perm) = Diagram::from_slices_tracked(self.inputs, slices).expect("hole and filling agree in width");
        let start = self.above.len();
        let mut map = alloc::vec![0; inner.gate_count()];
        for (pos, &p) in perm.iter().enumerate() {
            if (start..start + inner.gate_count()).contains(&p) {
                map[p - start] = pos;
            }
        }
        (host, map)
    }

    pub fn lift_step(&self, step: &RewriteStep) -> RewriteStep {
        let (source, map) = self.plug(&step.source);
        let mut gates: Vec<usize> = step.redex.gates.iter().map(|&g| map[g]).collect();
        gates.sort_unstable();
        RewriteStep { source, redex: Redex { rule: step.redex.rule, gates }, target: self.plug(&step.target).0 }
    }

    pub fn lift_move(&self, m: &Move) -> Move {
        Move { step: self.lift_step(&m.step), dir: m.dir }
    }
}

/// A peak filler placed in a host diagram: two forward paths from the host,
/// starting with the two given redexes and meeting again.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placed {
    pub cell: usize,
    /// Whether the first redex is the cell's left one.
    pub forward: bool,
    pub context: Context,
    pub first: Vec<RewriteStep>,
    pub second: Vec<RewriteStep>,
}

#[derive(Clone, Debug)]
pub struct CellCatalog {
    pub rules: RuleSet,
    pub cells: Vec<PeakCell>,
    by_peak: BTreeMap<(Diagram, Redex, Redex), usize>,
}

impl CellCatalog {
    /// Joins and classifies every critical peak of `rules`. Peaks named in
    /// `listing` take their names from it; the others are numbered by class.
    pub fn new(rules: &RuleSet, listing: &str) -> Result<CellCatalog, CoherenceError> {
        let listed = parse_listing(listing)?;
        let base_sources: Vec<Diagram> =
            COHERENCE_SOURCES.iter().map(|s| parse_diagram(s).expect("built-in")).collect();
        let peaks = enumerate_peaks(rules, rules.max_lhs_gates()).map_err(CoherenceError::Peak)?;
        let mut cells = Vec::new();
        let mut by_peak = BTreeMap::new();
        let mut counters: BTreeMap<PeakClass, usize> = BTreeMap::new();
        for peak in peaks {
            let j = join(&peak, rules).map_err(CoherenceError::Peak)?;
            let class = classify(&peak, &j, rules);
            let label = |r: &Redex| (rules.rules[r.rule].name.clone(), r.anchor());
            let mut mine = [label(&peak.left), label(&peak.right)];
            mine.sort();
            let id = match listed.iter().find(|l| {
                let mut theirs = l.redexes.clone();
                theirs.sort();
                l.source == peak.source && theirs == mine
            }) {
                Some(l) => l.name.clone(),
                None => {
                    let n = counters.entry(class).or_insert(0);
                    *n += 1;
                    format!("{}-x{}", class.name(), n)
                }
            };
            let name = match class {
                PeakClass::Coherence => {
                    let k = base_sources.iter().position(|s| s == &peak.source).expect("coherence sources are listed");
                    match BASE_NAMES[k] {
                        "penta" => CellName::Penta,
                        "tria" => CellName::Tria,
                        "inv" => CellName::Inv,
                        "g" => CellName::G,
                        _ => CellName::Exa2,
                    }
                }
                PeakClass::Kelly => CellName::Kelly(id.clone()),
                PeakClass::WeakKelly => CellName::WeakKelly(id.clone()),
                PeakClass::SimplyFoldable | PeakClass::StronglyFoldable => CellName::Foldable(id.clone()),
            };
            let side = |first: &Redex, rest: &[RewriteStep]| {
                let target =
                    crate::rewrite::apply_redex(&peak.source, rules, first).expect("peak redexes apply").target;
                let mut steps = alloc::vec![RewriteStep { source: peak.source.clone(), redex: first.clone(), target }];
                steps.extend_from_slice(rest);
                steps
            };
            let left = side(&peak.left, &j.left_path.steps);
            let right = side(&peak.right, &j.right_path.steps);
            by_peak.insert((peak.source.clone(), peak.left.clone(), peak.right.clone()), cells.len());
            cells.push(PeakCell { id, name, class, source: peak.source, left, right });
        }
        Ok(CellCatalog { rules: rules.clone(), cells, by_peak })
    }

    pub fn symmetric() -> CellCatalog {
        CellCatalog::new(&RuleSet::symmetric(), PEAK_LISTING).expect("built-in catalog")
    }

    pub fn monoidal() -> CellCatalog {
        CellCatalog::new(&RuleSet::monoidal(), PEAK_LISTING).expect("built-in catalog")
    }

    pub fn index_of(&self, name: &CellName) -> Option<usize> {
        self.cells.iter().position(|c| &c.name == name)
    }

    pub fn by_id(&self, id: &str) -> Option<&PeakCell> {
        self.cells.iter().find(|c| c.id == id)
    }

    /// The filler of the peak `(a, b)` at `host`, found on the convex hull
    /// of the two redexes.
    pub fn place(&self, host: &Diagram, a: &Redex, b: &Redex) -> Option<Placed> {
        let mask = convex_hull(host, a.mask() | b.mask());
        let (context, inner, ids) = Context::around(host, mask)?;
        let local = |r: &Redex| -> Option<Redex> {
            let mut gates = r.gates.iter().map(|g| ids.iter().position(|i| i == g)).collect::<Option<Vec<_>>>()?;
            gates.sort_unstable();
            Some(Redex { rule: r.rule, gates })
        };
        let (la, lb) = (local(a)?, local(b)?);
        let forward = la < lb;
        let key = if forward { (inner, la, lb) } else { (inner, lb, la) };
        let &cell = self.by_peak.get(&key)?;
        let c = &self.cells[cell];
        let lift = |steps: &[RewriteStep]| steps.iter().map(|s| context.lift_step(s)).collect::<Vec<_>>();
        let (first, second) = if forward { (lift(&c.left), lift(&c.right)) } else { (lift(&c.right), lift(&c.left)) };
        debug_assert_eq!(&first[0].redex, a);
        debug_assert_eq!(&second[0].redex, b);
        Some(Placed { cell, forward, context, first, second })
    }
}
