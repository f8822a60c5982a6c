//! Text form of diagrams.
//!
//! Grammar (whitespace-insensitive):
//! `d ::= "m" | "e" | "s" | "id" NAT | "(" d ")" | d ";" d | d "*" d`
//! where `*` binds tighter than `;`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::diagram::{Diagram, DiagramError, Gate, Slice};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("parse error at byte {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("at byte {pos}: {source}")]
    Diagram { pos: usize, source: DiagramError },
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { pos: self.pos, message: message.into() })
    }

    fn seq(&mut self) -> Result<Diagram, ParseError> {
        let mut acc = self.par()?;
        while self.peek() == Some(b';') {
            let pos = self.pos;
            self.pos += 1;
            let next = self.par()?;
            acc = acc.seq(&next).map_err(|source| ParseError::Diagram { pos, source })?;
        }
        Ok(acc)
    }

    fn par(&mut self) -> Result<Diagram, ParseError> {
        let mut acc = self.atom()?;
        while self.peek() == Some(b'*') {
            let pos = self.pos;
            self.pos += 1;
            let next = self.atom()?;
            acc = acc.par(&next).map_err(|source| ParseError::Diagram { pos, source })?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Diagram, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let d = self.seq()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(d)
            }
            Some(b'm') => {
                self.pos += 1;
                Ok(Diagram::gate(Gate::M))
            }
            Some(b'e') => {
                self.pos += 1;
                Ok(Diagram::gate(Gate::E))
            }
            Some(b's') => {
                self.pos += 1;
                Ok(Diagram::gate(Gate::S))
            }
            Some(b'i') => {
                if self.src.get(self.pos + 1) != Some(&b'd') {
                    return self.err("expected 'id'");
                }
                self.pos += 2;
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if start == self.pos {
                    return self.err("expected a wire count after 'id'");
                }
                let text = core::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match text.parse::<usize>() {
                    Ok(n) if n <= crate::diagram::DEFAULT_CAPACITY => Ok(Diagram::identity(n)),
                    _ => self.err("wire count out of range"),
                }
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses a diagram expression.
pub fn parse_diagram(text: &str) -> Result<Diagram, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let d = p.seq()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Item {
    Id(usize),
    G(Gate),
}

impl Item {
    fn out_width(self) -> usize {
        match self {
            Item::Id(n) => n,
            Item::G(g) => g.outputs(),
        }
    }
}

/// Tries to place `s` (given on the output cut of `layer`) in parallel with the
/// gates already in the layer.
fn absorb(layer: &mut Vec<Item>, s: Slice) -> bool {
    let a = s.left();
    let i = s.gate.inputs();
    let mut pos = 0;
    for idx in 0..layer.len() {
        let w = layer[idx].out_width();
        if let Item::Id(n) = layer[idx] {
            if a >= pos && a + i <= pos + n {
                let parts = [Item::Id(a - pos), Item::G(s.gate), Item::Id(pos + n - a - i)];
                layer.splice(idx..=idx, parts);
                return true;
            }
        }
        if i == 0 && pos == a {
            layer.insert(idx, Item::G(s.gate));
            return true;
        }
        pos += w;
    }
    if i == 0 && pos == a {
        layer.push(Item::G(s.gate));
        return true;
    }
    false
}

fn print_layer(layer: &[Item]) -> (String, usize) {
    let parts: Vec<String> = layer
        .iter()
        .filter(|it| !matches!(it, Item::Id(0)))
        .map(|it| match it {
            Item::Id(n) => format!("id{}", n),
            Item::G(g) => g.symbol().to_string(),
        })
        .collect();
    let count = parts.len();
    (parts.join("*"), count)
}

/// Prints a diagram, packing independent consecutive gates into one layer.
pub fn print_diagram(d: &Diagram) -> String {
    let mut layers: Vec<Vec<Item>> = Vec::new();
    for s in d.slices() {
        if let Some(last) = layers.last_mut() {
            if absorb(last, *s) {
                continue;
            }
        }
        layers.push(alloc::vec![Item::Id(s.left()), Item::G(s.gate), Item::Id(s.right())]);
    }
    if layers.is_empty() {
        return format!("id{}", d.inputs());
    }
    let printed: Vec<(String, usize)> = layers.iter().map(|l| print_layer(l)).collect();
    if printed.len() == 1 {
        return printed.into_iter().next().unwrap().0;
    }
    printed
        .into_iter()
        .map(|(text, count)| if count > 1 { format!("({})", text) } else { text })
        .collect::<Vec<_>>()
        .join(";")
}
