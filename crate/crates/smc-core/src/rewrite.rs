//! Rule catalogs, redex matching under context, step application and
//! normalization.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{trim_block, Diagram, Slice};
use crate::syntax::parse_diagram;

/// Default step budget for normalization with user-supplied or GM rule sets.
pub const DEFAULT_STEP_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub lhs: Diagram,
    pub rhs: Diagram,
    pub structural: bool,
    /// Identity wires of `lhs` on the left and right that no gate touches.
    pad: (usize, usize),
    connected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RuleError {
    #[error("rule {name}: sides have arities {lhs_in}->{lhs_out} and {rhs_in}->{rhs_out}")]
    ArityMismatch { name: String, lhs_in: usize, lhs_out: usize, rhs_in: usize, rhs_out: usize },
    #[error("rule {name}: the left-hand side has no gate")]
    EmptyLhs { name: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn gates_connected(d: &Diagram) -> bool {
    let preds = d.wire_predecessors();
    let n = preds.len();
    if n == 0 {
        return true;
    }
    let mut seen = 1u64;
    loop {
        let mut grown = seen;
        for k in 0..n {
            let neighbours = preds[k] | (0..n).filter(|&j| preds[j] & (1 << k) != 0).fold(0, |m, j| m | (1 << j));
            if seen & (1 << k) != 0 {
                grown |= neighbours;
            } else if neighbours & seen != 0 {
                grown |= 1 << k;
            }
        }
        if grown == seen {
            return seen.count_ones() as usize == n;
        }
        seen = grown;
    }
}

impl Rule {
    pub fn new(name: &str, lhs: Diagram, rhs: Diagram, structural: bool) -> Result<Rule, RuleError> {
        if lhs.inputs() != rhs.inputs() || lhs.outputs() != rhs.outputs() {
            return Err(RuleError::ArityMismatch {
                name: name.to_string(),
                lhs_in: lhs.inputs(),
                lhs_out: lhs.outputs(),
                rhs_in: rhs.inputs(),
                rhs_out: rhs.outputs(),
            });
        }
        if lhs.gate_count() == 0 {
            return Err(RuleError::EmptyLhs { name: name.to_string() });
        }
        let (_, a, b) = trim_block(lhs.slices());
        let connected = gates_connected(&lhs);
        Ok(Rule { name: name.to_string(), lhs, rhs, structural, pad: (a, b), connected })
    }

    fn literal(name: &str, lhs: &str, rhs: &str, structural: bool) -> Rule {
        let lhs = parse_diagram(lhs).expect("built-in rule");
        let rhs = parse_diagram(rhs).expect("built-in rule");
        Rule::new(name, lhs, rhs, structural).expect("built-in rule")
    }

    /// The rule with its sides exchanged.
    pub fn reversed(&self, name: &str) -> Result<Rule, RuleError> {
        Rule::new(name, self.rhs.clone(), self.lhs.clone(), self.structural)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleSet {
    pub name: String,
    pub rules: Vec<Rule>,
}

impl RuleSet {
    pub fn new(name: &str, rules: Vec<Rule>) -> RuleSet {
        RuleSet { name: name.to_string(), rules }
    }

    /// Associativity and the two unit laws.
    pub fn monoidal() -> RuleSet {
        RuleSet::new(
            "M",
            alloc::vec![
                Rule::literal("alpha", "(m*id1);m", "(id1*m);m", false),
                Rule::literal("l", "(e*id1);m", "id1", false),
                Rule::literal("r", "(id1*e);m", "id1", false),
            ],
        )
    }

    /// The full symmetric system: monoidal rules, `tau`, `gamma` and the seven
    /// structural rules.
    pub fn symmetric() -> RuleSet {
        let mut rules = RuleSet::monoidal().rules;
        rules.extend([
            Rule::literal("tau", "s;m", "m", false),
            Rule::literal("gamma", "(s*id1);(id1*m);m", "(id1*m);m", false),
            Rule::literal("ss", "s;s", "id2", true),
            Rule::literal("yb", "(s*id1);(id1*s);(s*id1)", "(id1*s);(s*id1);(id1*s)", true),
            Rule::literal("es", "(e*id1);s", "id1*e", true),
            Rule::literal("se", "(id1*e);s", "e*id1", true),
            Rule::literal("ms", "(m*id1);s", "(id1*s);(s*id1);(id1*m)", true),
            Rule::literal("ssm", "(s*id1);(id1*s);(m*id1)", "(id1*m);s", true),
            Rule::literal("sms", "(s*id1);(id1*m);s", "(id1*s);(m*id1)", true),
        ]);
        RuleSet::new("F", rules)
    }

    /// The variant with `ssm` reversed and `sms` dropped.
    pub fn guiraud_malbos() -> RuleSet {
        let f = RuleSet::symmetric();
        let mut rules = Vec::new();
        for r in f.rules {
            match r.name.as_str() {
                "ssm" => rules.push(r.reversed("mss").expect("reversal keeps arity")),
                "sms" => {}
                _ => rules.push(r),
            }
        }
        RuleSet::new("GM", rules)
    }

    pub fn by_name(name: &str) -> Option<RuleSet> {
        match name {
            "M" => Some(RuleSet::monoidal()),
            "F" => Some(RuleSet::symmetric()),
            "GM" => Some(RuleSet::guiraud_malbos()),
            _ => None,
        }
    }

    pub fn structural_part(&self) -> RuleSet {
        let mut name = self.name.clone();
        name.push_str("-structural");
        RuleSet::new(&name, self.rules.iter().filter(|r| r.structural).cloned().collect())
    }

    /// Parses a rule file: one `NAME [structural] : <d> => <d>` per line.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(name: &str, text: &str) -> Result<RuleSet, RuleError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| RuleError::Syntax { line: i + 1, message };
            let (head, body) = line.split_once(':').ok_or_else(|| syntax("missing ':'".into()))?;
            let mut words = head.split_whitespace();
            let rule_name = words.next().ok_or_else(|| syntax("missing rule name".into()))?;
            let structural = match words.next() {
                None => false,
                Some("structural") => true,
                Some(other) => return Err(syntax(alloc::format!("unexpected '{other}'"))),
            };
            if words.next().is_some() {
                return Err(syntax("too many words before ':'".into()));
            }
            let (lhs, rhs) = body.split_once("=>").ok_or_else(|| syntax("missing '=>'".into()))?;
            let lhs = parse_diagram(lhs).map_err(|e| syntax(e.to_string()))?;
            let rhs = parse_diagram(rhs).map_err(|e| syntax(e.to_string()))?;
            rules.push(Rule::new(rule_name, lhs, rhs, structural)?);
        }
        Ok(RuleSet::new(name, rules))
    }

    /// The rule file text for this set.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let flag = if r.structural { " structural" } else { "" };
            out.push_str(&alloc::format!("{}{} : {} => {}\n", r.name, flag, r.lhs, r.rhs));
        }
        out
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.rules.iter().position(|r| r.name == name)
    }

    pub fn max_lhs_gates(&self) -> usize {
        self.rules.iter().map(|r| r.lhs.gate_count()).max().unwrap_or(0)
    }
}

/// An occurrence of a rule's left-hand side. `gates` are canonical gate
/// indices of the host, in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Redex {
    pub rule: usize,
    pub gates: Vec<usize>,
}

impl Redex {
    pub fn mask(&self) -> u64 {
        self.gates.iter().fold(0, |m, &g| m | (1 << g))
    }

    pub fn anchor(&self) -> usize {
        self.gates[0]
    }

    pub fn overlaps(&self, other: &Redex) -> bool {
        self.mask() & other.mask() != 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("stale redex: rule {rule} does not occur at gates {gates:?}")]
    StaleRedex { rule: usize, gates: Vec<usize> },
    #[error("step budget of {budget} exhausted")]
    BudgetExhausted { budget: usize },
}

/// Result of applying a redex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub target: Diagram,
    /// For each gate of the source, its index in the target when it survives.
    pub survivors: Vec<Option<usize>>,
    /// Target indices of the gates inserted by the right-hand side.
    pub inserted: Vec<usize>,
}

/// Context factorization of an occurrence: the host equals
/// `above ; (id_left * inner * id_right) ; below`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub above: Vec<Slice>,
    pub left: usize,
    pub right: usize,
    pub below: Vec<Slice>,
    /// Host gate ids of `above` and `below`, in slice order.
    pub above_ids: Vec<usize>,
    pub below_ids: Vec<usize>,
    /// The trimmed block, canonicalized, and the host gate for each of its gates.
    pub inner: Diagram,
    pub inner_ids: Vec<usize>,
}

/// Splits `host` around the gate set `mask`, if the set is a convex block.
pub fn occurrence(host: &Diagram, mask: u64) -> Option<Occurrence> {
    let k = mask.count_ones() as usize;
    let (slices, start, ids) = host.schedule_block(mask)?;
    let (trimmed, left, right) = trim_block(&slices[start..start + k]);
    let inner_inputs = trimmed.first().map(|s| s.width_in()).unwrap_or(0);
    let (inner, perm) = Diagram::from_slices_tracked(inner_inputs, trimmed).ok()?;
    let inner_ids = perm.iter().map(|&p| ids[start + p]).collect();
    Some(Occurrence {
        above: slices[..start].to_vec(),
        left,
        right,
        below: slices[start + k..].to_vec(),
        above_ids: ids[..start].to_vec(),
        below_ids: ids[start + k..].to_vec(),
        inner,
        inner_ids,
    })
}

/// Candidate gate sets of size `k` that are connected through wires.
fn connected_subsets(host: &Diagram, k: usize) -> Vec<u64> {
    let n = host.gate_count();
    let preds = host.wire_predecessors();
    let mut adj = alloc::vec![0u64; n];
    for j in 0..n {
        for i in 0..n {
            if preds[j] & (1 << i) != 0 {
                adj[j] |= 1 << i;
                adj[i] |= 1 << j;
            }
        }
    }
    let mut found: BTreeSet<u64> = BTreeSet::new();
    let mut frontier: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
    for _ in 1..k {
        let mut next = BTreeSet::new();
        for &m in &frontier {
            let mut nb = 0u64;
            for i in 0..n {
                if m & (1 << i) != 0 {
                    nb |= adj[i];
                }
            }
            nb &= !m;
            for i in 0..n {
                if nb & (1 << i) != 0 {
                    next.insert(m | (1 << i));
                }
            }
        }
        frontier = next.into_iter().collect();
    }
    found.extend(frontier);
    found.into_iter().collect()
}

fn all_subsets(n: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::new();
    fn go(start: usize, n: usize, k: usize, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..n {
            go(i + 1, n, k - 1, acc | (1 << i), out);
        }
    }
    go(0, n, k, 0, &mut out);
    out
}

fn gate_profile(slices: &[Slice], mask: u64) -> [usize; 3] {
    let mut p = [0; 3];
    for (i, s) in slices.iter().enumerate() {
        if mask & (1 << i) != 0 {
            p[s.gate as usize] += 1;
        }
    }
    p
}

/// Checks whether `mask` is an occurrence of `rule` in `host`.
pub fn matches_at(host: &Diagram, rule: &Rule, mask: u64) -> Option<Occurrence> {
    let occ = occurrence(host, mask)?;
    let (lhs_inner, _, _) = trim_block(rule.lhs.slices());
    let lhs_inner_inputs = rule.lhs.inputs() - rule.pad.0 - rule.pad.1;
    if occ.inner.inputs() != lhs_inner_inputs || occ.inner.slices() != lhs_inner.as_slice() {
        return None;
    }
    if occ.left < rule.pad.0 || occ.right < rule.pad.1 {
        return None;
    }
    Some(occ)
}

/// All redexes of `rules` in `phi`, ordered by rule index and then by anchor.
pub fn find_redexes(phi: &Diagram, rules: &RuleSet) -> Vec<Redex> {
    let n = phi.gate_count();
    let mut out = Vec::new();
    let mut cache: Vec<(usize, bool, Vec<u64>)> = Vec::new();
    let all_profile = gate_profile(phi.slices(), u64::MAX >> (64 - n.max(1)));
    for (ri, rule) in rules.rules.iter().enumerate() {
        let k = rule.lhs.gate_count();
        if k > n {
            continue;
        }
        let want = gate_profile(rule.lhs.slices(), u64::MAX);
        if (0..3).any(|g| want[g] > all_profile[g]) {
            continue;
        }
        let pos = match cache.iter().position(|c| c.0 == k && c.1 == rule.connected) {
            Some(p) => p,
            None => {
                let subsets = if rule.connected { connected_subsets(phi, k) } else { all_subsets(n, k) };
                cache.push((k, rule.connected, subsets));
                cache.len() - 1
            }
        };
        let mut found: Vec<Redex> = Vec::new();
        for &mask in &cache[pos].2 {
            if gate_profile(phi.slices(), mask) != want {
                continue;
            }
            if matches_at(phi, rule, mask).is_some() {
                let gates = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                found.push(Redex { rule: ri, gates });
            }
        }
        found.sort();
        out.extend(found);
    }
    out
}

/// Applies `redex` to `phi`.
pub fn apply_redex(phi: &Diagram, rules: &RuleSet, redex: &Redex) -> Result<Applied, RewriteError> {
    let stale = || RewriteError::StaleRedex { rule: redex.rule, gates: redex.gates.clone() };
    let rule = rules.rules.get(redex.rule).ok_or_else(stale)?;
    if redex.gates.iter().any(|&g| g >= phi.gate_count()) || redex.gates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(stale());
    }
    let occ = matches_at(phi, rule, redex.mask()).ok_or_else(stale)?;
    let (a, b) = (occ.left - rule.pad.0, occ.right - rule.pad.1);
    const NEW: usize = usize::MAX;
    let mut slices = occ.above.clone();
    let mut ids = occ.above_ids.clone();
    for s in rule.rhs.slices() {
        slices.push(s.whiskered(a, b));
        ids.push(NEW);
    }
    slices.extend_from_slice(&occ.below);
    ids.extend_from_slice(&occ.below_ids);
    let (target, perm) = Diagram::from_slices_tracked(phi.inputs(), slices).map_err(|_| stale())?;
    let mut survivors = alloc::vec![None; phi.gate_count()];
    let mut inserted = Vec::new();
    for (new_pos, &p) in perm.iter().enumerate() {
        match ids[p] {
            NEW => inserted.push(new_pos),
            old => survivors[old] = Some(new_pos),
        }
    }
    Ok(Applied { target, survivors, inserted })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RewriteStep {
    pub source: Diagram,
    pub redex: Redex,
    pub target: Diagram,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewritePath {
    pub steps: Vec<RewriteStep>,
}

impl RewritePath {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Smallest anchor gate first, ties broken by rule index.
    Leftmost,
    /// Uniform choice among the current redexes, from a seeded generator.
    Random(u64),
}

/// The redex the leftmost strategy picks.
pub fn leftmost(redexes: &[Redex]) -> Option<&Redex> {
    redexes.iter().min_by(|x, y| (x.anchor(), x.rule, &x.gates).cmp(&(y.anchor(), y.rule, &y.gates)))
}

/// Rewrites until no redex remains, or fails after `budget` steps.
pub fn normalize_with_budget(
    phi: &Diagram,
    rules: &RuleSet,
    strategy: Strategy,
    budget: usize,
) -> Result<(Diagram, RewritePath), RewriteError> {
    let mut rng = match strategy {
        Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::Leftmost => None,
    };
    let mut cur = phi.clone();
    let mut path = RewritePath::default();
    loop {
        let redexes = find_redexes(&cur, rules);
        if redexes.is_empty() {
            return Ok((cur, path));
        }
        if path.len() >= budget {
            return Err(RewriteError::BudgetExhausted { budget });
        }
        let chosen = match rng.as_mut() {
            Some(rng) => redexes[rng.gen_range(0..redexes.len())].clone(),
            None => leftmost(&redexes).unwrap().clone(),
        };
        let next = apply_redex(&cur, rules, &chosen).expect("found redexes apply").target;
        path.steps.push(RewriteStep { source: cur, redex: chosen, target: next.clone() });
        cur = next;
    }
}

/// Normal form and the path reaching it, with the default budget.
pub fn normalize(phi: &Diagram, rules: &RuleSet, strategy: Strategy) -> Result<(Diagram, RewritePath), RewriteError> {
    normalize_with_budget(phi, rules, strategy, DEFAULT_STEP_BUDGET)
}

/// Normal form under the seven structural rules only.
pub fn structural_normal_form(phi: &Diagram) -> (Diagram, RewritePath) {
    let rules = RuleSet::symmetric().structural_part();
    normalize(phi, &rules, Strategy::Leftmost).expect("structural rules terminate")
}
