//! Termination by monotone affine interpretations over positive integers.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::diagram::{Diagram, Gate};
use crate::rewrite::RuleSet;

/// `x -> coeffs * x + consts` with natural coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major, `out_dim` rows of `in_dim` entries.
    pub coeffs: Vec<Vec<u64>>,
    pub consts: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TerminationError {
    #[error("dimension mismatch: {left_in}->{left_out} against {right_in}->{right_out}")]
    DimensionMismatch { left_in: usize, left_out: usize, right_in: usize, right_out: usize },
    #[error("interpretation of {gate} must be {inputs} -> {outputs}")]
    GateArity { gate: &'static str, inputs: usize, outputs: usize },
    #[error("interpretation of {gate} is not positive on positive inputs")]
    NotPositive { gate: &'static str },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl AffineMap {
    pub fn new(coeffs: Vec<Vec<u64>>, consts: Vec<u64>) -> AffineMap {
        let out_dim = consts.len();
        let in_dim = coeffs.first().map(|r| r.len()).unwrap_or(0);
        assert_eq!(coeffs.len(), out_dim);
        assert!(coeffs.iter().all(|r| r.len() == in_dim));
        AffineMap { in_dim, out_dim, coeffs, consts }
    }

    /// A map with no outputs still remembers its input dimension.
    fn with_dims(in_dim: usize, coeffs: Vec<Vec<u64>>, consts: Vec<u64>) -> AffineMap {
        AffineMap { in_dim, out_dim: consts.len(), coeffs, consts }
    }

    pub fn identity(n: usize) -> AffineMap {
        let coeffs = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
        AffineMap::with_dims(n, coeffs, vec![0; n])
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AffineMap) -> AffineMap {
        assert_eq!(self.out_dim, next.in_dim);
        let mut coeffs = vec![vec![0u64; self.in_dim]; next.out_dim];
        let mut consts = next.consts.clone();
        for r in 0..next.out_dim {
            for k in 0..next.in_dim {
                let c = next.coeffs[r][k];
                if c == 0 {
                    continue;
                }
                for j in 0..self.in_dim {
                    coeffs[r][j] += c * self.coeffs[k][j];
                }
                consts[r] += c * self.consts[k];
            }
        }
        AffineMap::with_dims(self.in_dim, coeffs, consts)
    }

    /// Block-diagonal sum: `self` on the first inputs, `other` on the rest.
    pub fn direct_sum(&self, other: &AffineMap) -> AffineMap {
        let in_dim = self.in_dim + other.in_dim;
        let mut coeffs = Vec::with_capacity(self.out_dim + other.out_dim);
        for row in &self.coeffs {
            let mut r = row.clone();
            r.resize(in_dim, 0);
            coeffs.push(r);
        }
        for row in &other.coeffs {
            let mut r = vec![0; self.in_dim];
            r.extend_from_slice(row);
            coeffs.push(r);
        }
        let mut consts = self.consts.clone();
        consts.extend_from_slice(&other.consts);
        AffineMap::with_dims(in_dim, coeffs, consts)
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        assert_eq!(x.len(), self.in_dim);
        (0..self.out_dim)
            .map(|r| self.consts[r] + self.coeffs[r].iter().zip(x).map(|(c, v)| c * v).sum::<u64>())
            .collect()
    }

    fn var_name(&self, j: usize) -> String {
        if self.in_dim <= 3 {
            ["x", "y", "z"][j].to_string()
        } else {
            format!("x{}", j + 1)
        }
    }

    fn format_row(&self, r: usize) -> String {
        let mut out = String::new();
        for j in 0..self.in_dim {
            let c = self.coeffs[r][j];
            if c == 0 {
                continue;
            }
            if !out.is_empty() {
                out.push('+');
            }
            if c != 1 {
                out.push_str(&c.to_string());
            }
            out.push_str(&self.var_name(j));
        }
        let k = self.consts[r];
        if k != 0 || out.is_empty() {
            if !out.is_empty() {
                out.push('+');
            }
            out.push_str(&k.to_string());
        }
        out
    }
}

impl core::fmt::Display for AffineMap {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.out_dim == 1 {
            return f.write_str(&self.format_row(0));
        }
        let rows: Vec<String> = (0..self.out_dim).map(|r| self.format_row(r)).collect();
        write!(f, "({})", rows.join(", "))
    }
}

/// Affine maps assigned to the three gates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    pub m: AffineMap,
    pub e: AffineMap,
    pub s: AffineMap,
}

impl Default for Interpretation {
    /// `m(x,y) = 2x+y`, `s(x,y) = (x+y, x)`, `e = 1`.
    fn default() -> Self {
        Interpretation {
            m: AffineMap::new(vec![vec![2, 1]], vec![0]),
            e: AffineMap::with_dims(0, vec![vec![]], vec![1]),
            s: AffineMap::new(vec![vec![1, 1], vec![1, 0]], vec![0, 0]),
        }
    }
}

impl Interpretation {
    pub fn new(m: AffineMap, e: AffineMap, s: AffineMap) -> Result<Interpretation, TerminationError> {
        for (gate, map) in [(Gate::M, &m), (Gate::E, &e), (Gate::S, &s)] {
            if map.in_dim != gate.inputs() || map.out_dim != gate.outputs() {
                return Err(TerminationError::GateArity {
                    gate: gate.symbol(),
                    inputs: gate.inputs(),
                    outputs: gate.outputs(),
                });
            }
            if map.apply(&vec![1; map.in_dim]).contains(&0) {
                return Err(TerminationError::NotPositive { gate: gate.symbol() });
            }
        }
        Ok(Interpretation { m, e, s })
    }

    pub fn gate(&self, g: Gate) -> &AffineMap {
        match g {
            Gate::M => &self.m,
            Gate::E => &self.e,
            Gate::S => &self.s,
        }
    }

    /// Parses lines `m: 2x+y`, `s: (x+y, x)`, `e: 1`. Variables are `x, y, z`
    /// or `x1, x2, ...`; missing gates keep their default.
    pub fn parse(text: &str) -> Result<Interpretation, TerminationError> {
        let mut it = Interpretation::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: &str| TerminationError::Syntax { line: i + 1, message: message.to_string() };
            let (head, body) = line.split_once(':').ok_or_else(|| syntax("missing ':'"))?;
            let gate = match head.trim() {
                "m" => Gate::M,
                "e" => Gate::E,
                "s" => Gate::S,
                _ => return Err(syntax("unknown gate")),
            };
            let map = parse_affine(body.trim(), gate.inputs()).map_err(|m| syntax(&m))?;
            match gate {
                Gate::M => it.m = map,
                Gate::E => it.e = map,
                Gate::S => it.s = map,
            }
        }
        Interpretation::new(it.m, it.e, it.s)
    }
}

fn parse_affine(text: &str, in_dim: usize) -> Result<AffineMap, String> {
    let inner = match text.strip_prefix('(') {
        Some(rest) => rest.strip_suffix(')').ok_or("unbalanced parenthesis")?,
        None => text,
    };
    let mut coeffs = Vec::new();
    let mut consts = Vec::new();
    for part in inner.split(',') {
        let (row, k) = parse_linear(part, in_dim)?;
        coeffs.push(row);
        consts.push(k);
    }
    Ok(AffineMap::with_dims(in_dim, coeffs, consts))
}

fn var_index(name: &str, in_dim: usize) -> Option<usize> {
    let j = match name {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        _ => name.strip_prefix('x')?.parse::<usize>().ok()?.checked_sub(1)?,
    };
    (j < in_dim).then_some(j)
}

fn parse_linear(text: &str, in_dim: usize) -> Result<(Vec<u64>, u64), String> {
    let mut row = vec![0u64; in_dim];
    let mut k = 0u64;
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err("empty coordinate".into());
    }
    for term in compact.split('+') {
        let digits = term.chars().take_while(|c| c.is_ascii_digit()).count();
        let (num, var) = term.split_at(digits);
        let var = var.strip_prefix('*').unwrap_or(var);
        let n = if num.is_empty() { 1 } else { num.parse::<u64>().map_err(|e| e.to_string())? };
        if var.is_empty() {
            if num.is_empty() {
                return Err("empty term".into());
            }
            k += n;
        } else {
            let j = var_index(var, in_dim).ok_or_else(|| format!("unknown variable '{var}'"))?;
            row[j] += n;
        }
    }
    Ok((row, k))
}

/// Interprets a diagram slice by slice.
pub fn interpret_diagram(phi: &Diagram, interp: &Interpretation) -> AffineMap {
    let mut acc = AffineMap::identity(phi.inputs());
    for s in phi.slices() {
        let layer =
            AffineMap::identity(s.left()).direct_sum(interp.gate(s.gate)).direct_sum(&AffineMap::identity(s.right()));
        acc = acc.then(&layer);
    }
    acc
}

/// Whether `f(x) > g(x)` in the strict product order for every positive
/// integer point: `f >= g` everywhere and some coordinate is larger. Decided
/// on coefficients, since the difference of two affine maps with a
/// nonnegative linear part is smallest at the all-ones point.
pub fn strictly_dominates(f: &AffineMap, g: &AffineMap) -> Result<bool, TerminationError> {
    if f.in_dim != g.in_dim || f.out_dim != g.out_dim {
        return Err(TerminationError::DimensionMismatch {
            left_in: f.in_dim,
            left_out: f.out_dim,
            right_in: g.in_dim,
            right_out: g.out_dim,
        });
    }
    let mut some_larger = false;
    for r in 0..f.out_dim {
        let mut at_ones: i128 = f.consts[r] as i128 - g.consts[r] as i128;
        for j in 0..f.in_dim {
            let diff = f.coeffs[r][j] as i128 - g.coeffs[r][j] as i128;
            if diff < 0 {
                return Ok(false);
            }
            at_ones += diff;
        }
        if at_ones < 0 {
            return Ok(false);
        }
        some_larger |= at_ones >= 1;
    }
    Ok(some_larger)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleVerdict {
    pub name: String,
    pub lhs: AffineMap,
    pub rhs: AffineMap,
    pub decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TerminationReport {
    pub rules: Vec<RuleVerdict>,
}

impl TerminationReport {
    pub fn all_pass(&self) -> bool {
        self.rules.iter().all(|r| r.decreasing)
    }

    pub fn passed(&self) -> usize {
        self.rules.iter().filter(|r| r.decreasing).count()
    }

    /// One line per rule: name, both interpretations and the verdict.
    pub fn table(&self) -> String {
        let lhs: Vec<String> = self.rules.iter().map(|r| r.lhs.to_string()).collect();
        let rhs: Vec<String> = self.rules.iter().map(|r| r.rhs.to_string()).collect();
        let wn = self.rules.iter().map(|r| r.name.len()).max().unwrap_or(0);
        let wl = lhs.iter().map(|s| s.len()).max().unwrap_or(0);
        let wr = rhs.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (i, r) in self.rules.iter().enumerate() {
            let (op, verdict) = if r.decreasing { (">", "ok") } else { ("?", "FAIL") };
            out.push_str(&format!("{:<wn$}  {:>wl$} {} {:<wr$}  {}\n", r.name, lhs[i], op, rhs[i], verdict));
        }
        out.push_str(&format!("{}/{} rules decreasing\n", self.passed(), self.rules.len()));
        out
    }
}

/// Checks every rule of `rules` for a strict decrease.
pub fn verify_termination(rules: &RuleSet, interp: &Interpretation) -> TerminationReport {
    let verdicts = rules
        .rules
        .iter()
        .map(|r| {
            let lhs = interpret_diagram(&r.lhs, interp);
            let rhs = interpret_diagram(&r.rhs, interp);
            let decreasing = strictly_dominates(&lhs, &rhs).expect("rule sides share arity");
            RuleVerdict { name: r.name.clone(), lhs, rhs, decreasing }
        })
        .collect();
    TerminationReport { rules: verdicts }
}
