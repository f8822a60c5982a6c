//! Polygons of morphisms between tensor terms, read from text:
//!
//! ```text
//! OBJECT A: ((x#y)#z)
//! OBJECT B: (x#(y#z))
//! EDGE f: A -> B : a(x,y,z)
//! TERMINAL B
//! ```
//!
//! Inputs are labelled by the variables of the terminal object from left to
//! right. Every path into the terminal object is compared with the first
//! path from the same start.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::coherence::certify::{Certificate, Certifier};
use crate::coherence::term::{mor_to_zigzag, parse_morphism, parse_term, MorExpr, Term};
use crate::coherence::zigzag::Zigzag;
use crate::coherence::CoherenceError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub from: usize,
    pub to: usize,
    pub expr: MorExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    pub objects: Vec<(String, Term)>,
    pub edges: Vec<Edge>,
    pub terminal: usize,
}

/// Two paths of a polygon and the certificate turning one into the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolygonCertificate {
    pub first: Vec<String>,
    pub second: Vec<String>,
    pub certificate: Certificate,
}

impl Polygon {
    pub fn parse(text: &str) -> Result<Polygon, CoherenceError> {
        let mut objects: Vec<(String, Term)> = Vec::new();
        let mut edges = Vec::new();
        let mut terminal = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let n = i + 1;
            let bad = |m: &str| CoherenceError::Syntax { line: n, message: m.to_string() };
            let relined = |e: CoherenceError| match e {
                CoherenceError::Syntax { message, .. } => CoherenceError::Syntax { line: n, message },
                other => other,
            };
            let find = |objects: &[(String, Term)], name: &str| {
                objects.iter().position(|(o, _)| o == name).ok_or_else(|| bad(&alloc::format!("unknown object {name}")))
            };
            if let Some(rest) = line.strip_prefix("OBJECT ") {
                let (name, term) = rest.split_once(':').ok_or_else(|| bad("expected OBJECT <name>: <term>"))?;
                objects.push((name.trim().to_string(), parse_term(term).map_err(relined)?));
            } else if let Some(rest) = line.strip_prefix("EDGE ") {
                let (name, rest) = rest.split_once(':').ok_or_else(|| bad("expected EDGE <name>: ..."))?;
                let (ends, expr) = rest.split_once(':').ok_or_else(|| bad("expected ': <morphism>' after the ends"))?;
                let (from, to) = ends.split_once("->").ok_or_else(|| bad("expected <obj> -> <obj>"))?;
                let (from, to) = (find(&objects, from.trim())?, find(&objects, to.trim())?);
                let expr = parse_morphism(expr).map_err(relined)?;
                let (s, t) = expr.sides()?;
                if s != objects[from].1 || t != objects[to].1 {
                    return Err(CoherenceError::CompositionMismatch {
                        left: alloc::format!("{s} -> {t}"),
                        right: alloc::format!("{} -> {}", objects[from].1, objects[to].1),
                    });
                }
                edges.push(Edge { name: name.trim().to_string(), from, to, expr });
            } else if let Some(rest) = line.strip_prefix("TERMINAL ") {
                terminal = Some(find(&objects, rest.trim())?);
            } else {
                return Err(bad("expected OBJECT, EDGE or TERMINAL"));
            }
        }
        let terminal = terminal.ok_or(CoherenceError::Syntax { line: 0, message: "missing TERMINAL".into() })?;
        Ok(Polygon { objects, edges, terminal })
    }

    /// The variable order: the terminal object's variables.
    pub fn order(&self) -> Vec<&str> {
        self.objects[self.terminal].1.variables()
    }

    /// Simple paths into the terminal object from objects without incoming
    /// edges, as edge indices.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for start in 0..self.objects.len() {
            if start == self.terminal || self.edges.iter().any(|e| e.to == start) {
                continue;
            }
            let mut stack = Vec::new();
            self.walk(start, &mut alloc::vec![start], &mut stack, &mut out);
        }
        out
    }

    fn walk(&self, at: usize, seen: &mut Vec<usize>, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if at == self.terminal {
            out.push(path.clone());
            return;
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.from == at && !seen.contains(&e.to) {
                seen.push(e.to);
                path.push(k);
                self.walk(e.to, seen, path, out);
                path.pop();
                seen.pop();
            }
        }
    }

    fn zigzag(&self, path: &[usize]) -> Result<Zigzag, CoherenceError> {
        let order = self.order();
        let start = self.edges[path[0]].from;
        let mut z = mor_to_zigzag(
            &MorExpr::Gen(crate::coherence::term::MorGen {
                kind: crate::coherence::term::MorKind::Identity,
                at: alloc::vec![self.objects[start].1.clone()],
                inverted: false,
            }),
            &order,
        )?;
        for &k in path {
            z.moves.extend(mor_to_zigzag(&self.edges[k].expr, &order)?.moves);
        }
        Ok(z)
    }

    /// Certificates between the first path from each start and every other
    /// path from it.
    pub fn certify(&self, certifier: &mut Certifier<'_>) -> Result<Vec<PolygonCertificate>, CoherenceError> {
        let paths = self.paths();
        let names = |p: &[usize]| p.iter().map(|&k| self.edges[k].name.clone()).collect::<Vec<_>>();
        let mut out = Vec::new();
        for (i, p) in paths.iter().enumerate() {
            let start = self.edges[p[0]].from;
            let Some(first) = paths[..i].iter().find(|q| self.edges[q[0]].from == start) else { continue };
            let certificate = certifier.certify_equal(&self.zigzag(first)?, &self.zigzag(p)?)?;
            out.push(PolygonCertificate { first: names(first), second: names(p), certificate });
        }
        Ok(out)
    }
}
