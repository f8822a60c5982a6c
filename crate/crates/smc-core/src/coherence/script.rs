//! Line-oriented certificate scripts.
//!
//! ```text
//! CERTIFICATE F
//! SOURCE (m*id1);m
//! MOVE + alpha 0,1 (m*id1);m
//! TARGET (m*id1);m
//! MOVE + alpha 0,1 (m*id1);m
//! SURGERY 0 g fwd
//! SURGERY 2 disjoint_square
//! SURGERY 1 stale_cancel
//! SURGERY 1 stale_cancel insert - tau 0,1 s;m
//! CHECK 3
//! END
//! ```
//!
//! A move names its rule, the gates of the redex and the source diagram of
//! the step; `-` walks the step backwards. `CHECK n` records the length of
//! the path after the preceding surgery. Several certificates can share a
//! file, each introduced by `EXPANSION <peak-id>`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::coherence::cells::{CellCatalog, CellName};
use crate::coherence::certify::{Certificate, Surgery};
use crate::coherence::expansion::ExpansionTable;
use crate::coherence::validate::replay;
use crate::coherence::zigzag::{Move, Zigzag};
use crate::coherence::CoherenceError;
use crate::rewrite::{apply_redex, Redex, RewriteStep, RuleSet};
use crate::syntax::parse_diagram;

fn write_move(out: &mut String, m: &Move, rules: &RuleSet) {
    let gates: Vec<String> = m.step.redex.gates.iter().map(|g| g.to_string()).collect();
    let _ = write!(
        out,
        "{} {} {} {}",
        if m.is_forward() { '+' } else { '-' },
        rules.rules[m.step.redex.rule].name,
        gates.join(","),
        m.step.source
    );
}

fn write_zigzag(out: &mut String, head: &str, z: &Zigzag, rules: &RuleSet) {
    let _ = writeln!(out, "{head} {}", z.start);
    for m in &z.moves {
        out.push_str("MOVE ");
        write_move(out, m, rules);
        out.push('\n');
    }
}

/// Prints `cert`. With a catalog, the certificate is replayed and a `CHECK`
/// line follows every surgery.
pub fn write_certificate(cert: &Certificate, rules: &RuleSet, catalog: Option<&CellCatalog>) -> String {
    let lengths: Option<Vec<usize>> =
        catalog.and_then(|c| replay(cert, c).ok()).map(|r| r.into_iter().map(|(_, len)| len).collect());
    let mut out = String::new();
    let _ = writeln!(out, "CERTIFICATE {}", cert.rules);
    write_zigzag(&mut out, "SOURCE", &cert.source, rules);
    write_zigzag(&mut out, "TARGET", &cert.target, rules);
    for (k, s) in cert.surgeries.iter().enumerate() {
        let _ = write!(out, "SURGERY {} ", s.at());
        match s {
            Surgery::Cell { cell, forward, .. } => {
                let _ = write!(out, "{cell} {}", if *forward { "fwd" } else { "bwd" });
            }
            Surgery::Square { .. } => out.push_str("disjoint_square"),
            Surgery::Cancel { .. } => out.push_str("stale_cancel"),
            Surgery::Insert { first, .. } => {
                out.push_str("stale_cancel insert ");
                write_move(&mut out, first, rules);
            }
        }
        out.push('\n');
        if let Some(len) = lengths.as_ref().map(|l| l[k]) {
            let _ = writeln!(out, "CHECK {len}");
        }
    }
    out.push_str("END\n");
    out
}

/// A parsed script: the certificate and its `(surgery index, length)`
/// checkpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Script {
    pub certificate: Certificate,
    pub checks: Vec<(usize, usize)>,
}

impl Script {
    /// Replays the certificate and compares every checkpoint.
    pub fn check(&self, catalog: &CellCatalog) -> Result<(), CoherenceError> {
        let replayed = replay(&self.certificate, catalog)?;
        for &(index, len) in &self.checks {
            if replayed[index].1 != len {
                return Err(CoherenceError::InvalidSurgery {
                    index,
                    reason: format!("path has length {}, checkpoint says {len}", replayed[index].1),
                });
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    rules: &'a RuleSet,
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> CoherenceError {
        CoherenceError::Syntax { line, message: message.into() }
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.lines.get(self.pos).copied()
    }

    fn expect(&mut self, keyword: &str) -> Result<(usize, &'a str), CoherenceError> {
        let Some((n, line)) = self.peek() else {
            return Err(
                self.err(self.lines.last().map_or(0, |l| l.0), format!("expected {keyword}, found end of input"))
            );
        };
        let rest = line
            .strip_prefix(keyword)
            .filter(|r| r.is_empty() || r.starts_with(' '))
            .ok_or_else(|| self.err(n, format!("expected {keyword}")))?;
        self.pos += 1;
        Ok((n, rest.trim()))
    }

    fn parse_move(&self, n: usize, text: &str) -> Result<Move, CoherenceError> {
        let mut parts = text.splitn(4, ' ');
        let (Some(dir), Some(rule), Some(gates), Some(source)) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(self.err(n, "a move needs a direction, a rule, gates and a diagram"));
        };
        let rule = self.rules.index_of(rule).ok_or_else(|| self.err(n, format!("unknown rule {rule}")))?;
        let gates = gates
            .split(',')
            .map(|g| g.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| self.err(n, "bad gate list"))?;
        let source = parse_diagram(source.trim()).map_err(|e| self.err(n, e.to_string()))?;
        let redex = Redex { rule, gates };
        let target = apply_redex(&source, self.rules, &redex).map_err(|e| self.err(n, e.to_string()))?.target;
        let step = RewriteStep { source, redex, target };
        match dir {
            "+" => Ok(Move::forward(step)),
            "-" => Ok(Move::backward(step)),
            _ => Err(self.err(n, "direction must be + or -")),
        }
    }

    fn zigzag(&mut self, head: &str) -> Result<Zigzag, CoherenceError> {
        let (n, text) = self.expect(head)?;
        let start = parse_diagram(text).map_err(|e| self.err(n, e.to_string()))?;
        let mut moves = Vec::new();
        while let Some((n, line)) = self.peek() {
            let Some(rest) = line.strip_prefix("MOVE ") else { break };
            let m = self.parse_move(n, rest.trim())?;
            let from = moves.last().map_or(&start, |m: &Move| m.to());
            if m.from() != from {
                return Err(self.err(n, "move does not continue the path"));
            }
            moves.push(m);
            self.pos += 1;
        }
        Ok(Zigzag { start, moves })
    }

    fn certificate(&mut self) -> Result<Script, CoherenceError> {
        let (_, rules) = self.expect("CERTIFICATE")?;
        let source = self.zigzag("SOURCE")?;
        let target = self.zigzag("TARGET")?;
        let mut surgeries = Vec::new();
        let mut checks = Vec::new();
        loop {
            let Some((n, line)) = self.peek() else { return Err(self.err(0, "missing END")) };
            self.pos += 1;
            if line == "END" {
                break;
            }
            if let Some(rest) = line.strip_prefix("CHECK ") {
                let len = rest.trim().parse().map_err(|_| self.err(n, "bad checkpoint"))?;
                let index =
                    surgeries.len().checked_sub(1).ok_or_else(|| self.err(n, "checkpoint before any surgery"))?;
                checks.push((index, len));
                continue;
            }
            let rest = line.strip_prefix("SURGERY ").ok_or_else(|| self.err(n, "expected SURGERY, CHECK or END"))?;
            let mut parts = rest.trim().splitn(3, ' ');
            let at: usize = parts.next().unwrap_or("").parse().map_err(|_| self.err(n, "bad surgery index"))?;
            let name = parts.next().ok_or_else(|| self.err(n, "missing cell name"))?;
            let tail = parts.next().unwrap_or("").trim();
            let surgery = match name {
                "disjoint_square" => Surgery::Square { at },
                "stale_cancel" if tail.is_empty() => Surgery::Cancel { at },
                "stale_cancel" => {
                    let m = tail.strip_prefix("insert ").ok_or_else(|| self.err(n, "expected insert <move>"))?;
                    Surgery::Insert { at, first: self.parse_move(n, m.trim())? }
                }
                _ => {
                    let cell: CellName = name.parse()?;
                    let forward = match tail {
                        "fwd" => true,
                        "bwd" => false,
                        _ => return Err(self.err(n, "direction must be fwd or bwd")),
                    };
                    Surgery::Cell { at, cell, forward }
                }
            };
            surgeries.push(surgery);
        }
        Ok(Script { certificate: Certificate { rules: rules.to_string(), source, target, surgeries }, checks })
    }
}

fn parser<'a>(text: &'a str, rules: &'a RuleSet) -> Parser<'a> {
    let lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    Parser { rules, lines, pos: 0 }
}

pub fn parse_certificate(text: &str, rules: &RuleSet) -> Result<Script, CoherenceError> {
    let mut p = parser(text, rules);
    let script = p.certificate()?;
    if let Some((n, _)) = p.peek() {
        return Err(p.err(n, "text after END"));
    }
    Ok(script)
}

/// Prints expansion entries, `EXPANSION <id>` followed by a certificate.
pub fn write_expansions(entries: &[(String, Certificate)], catalog: &CellCatalog) -> String {
    let mut out = String::new();
    for (id, cert) in entries {
        let _ = writeln!(out, "EXPANSION {id}");
        out.push_str(&write_certificate(cert, &catalog.rules, Some(catalog)));
    }
    out
}

/// Reads an expansion file, checking every entry by replay. With
/// `own_only`, entries for fillers that `catalog` does not have are skipped.
pub fn parse_expansions(text: &str, catalog: &CellCatalog, own_only: bool) -> Result<ExpansionTable, CoherenceError> {
    let mut p = parser(text, &catalog.rules);
    let mut table = ExpansionTable::default();
    while p.peek().is_some() {
        let (_, id) = p.expect("EXPANSION")?;
        if own_only && catalog.by_id(id).is_none_or(|c| !c.name.is_derived()) {
            while let Some((_, line)) = p.peek() {
                p.pos += 1;
                if line == "END" {
                    break;
                }
            }
            continue;
        }
        let script = p.certificate()?;
        script.check(catalog)?;
        table.insert(id, &script.certificate, catalog)?;
    }
    Ok(table)
}
