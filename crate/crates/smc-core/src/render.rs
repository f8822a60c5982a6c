//! ASCII and TikZ renderings of diagrams.
//!
//! The ASCII form has a header line with one `|` per input wire (`.` for
//! none) and one row per slice: the wires left of the gate, the gate glyph,
//! then the wires right of it. [`read_ascii`] reads it back.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::diagram::{Diagram, DiagramError, Gate, Slice};
use crate::syntax::print_diagram;

/// Glyphs and TikZ macro names, one line per gate.
pub const GLYPH_TABLE: &str = include_str!("../data/glyphs.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Glyphs {
    pub ascii: [String; 3],
    pub tikz: [String; 3],
}

fn slot(g: Gate) -> usize {
    match g {
        Gate::M => 0,
        Gate::E => 1,
        Gate::S => 2,
    }
}

impl Glyphs {
    pub fn parse(text: &str) -> Option<Glyphs> {
        let mut ascii: [Option<String>; 3] = Default::default();
        let mut tikz: [Option<String>; 3] = Default::default();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let mut parts = line.split_whitespace();
            let gate = match parts.next()? {
                "m" => Gate::M,
                "e" => Gate::E,
                "s" => Gate::S,
                _ => return None,
            };
            let glyph = parts.next()?;
            if glyph == "|" || glyph == "." {
                return None;
            }
            ascii[slot(gate)] = Some(glyph.to_string());
            tikz[slot(gate)] = Some(parts.next()?.to_string());
        }
        let [a, b, c] = ascii;
        let [x, y, z] = tikz;
        Some(Glyphs { ascii: [a?, b?, c?], tikz: [x?, y?, z?] })
    }

    pub fn ascii(&self, g: Gate) -> &str {
        &self.ascii[slot(g)]
    }

    pub fn tikz(&self, g: Gate) -> &str {
        &self.tikz[slot(g)]
    }
}

impl Default for Glyphs {
    fn default() -> Glyphs {
        Glyphs::parse(GLYPH_TABLE).expect("shipped glyph table is well formed")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Ascii,
    Tikz,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderOptions {
    pub format: Format,
    /// Characters per wire in ASCII (at least 4), centimetres per wire in
    /// TikZ.
    pub spacing: usize,
    pub glyphs: Glyphs,
}

impl RenderOptions {
    pub fn new(format: Format) -> RenderOptions {
        let spacing = match format {
            Format::Ascii => 4,
            Format::Tikz => 1,
        };
        RenderOptions { format, spacing, glyphs: Glyphs::default() }
    }
}

pub fn render_diagram(d: &Diagram, o: &RenderOptions) -> String {
    match o.format {
        Format::Ascii => ascii(d, o),
        Format::Tikz => tikz(d, o),
    }
}

fn pad(out: &mut String, text: &str, width: usize) {
    out.push_str(text);
    for _ in text.chars().count()..width {
        out.push(' ');
    }
}

fn ascii(d: &Diagram, o: &RenderOptions) -> String {
    let w = o.spacing.max(4);
    let mut out = String::new();
    let bars = |out: &mut String, n: usize| {
        for _ in 0..n {
            pad(out, "|", w);
        }
    };
    if d.inputs() == 0 {
        out.push('.');
    } else {
        bars(&mut out, d.inputs());
    }
    for s in d.slices() {
        out.push('\n');
        bars(&mut out, s.left());
        pad(&mut out, o.glyphs.ascii(s.gate), w * s.gate.inputs().max(1));
        bars(&mut out, s.right());
    }
    let mut lines: Vec<&str> = out.lines().map(str::trim_end).collect();
    lines.push("");
    lines.join("\n")
}

/// Reads the ASCII form back. Only the order of the tokens on a row matters.
pub fn read_ascii(text: &str, glyphs: &Glyphs) -> Result<Diagram, DiagramError> {
    let bad = |index: usize| DiagramError::MalformedDiagram { index, expected: 0, found: 0 };
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or(bad(0))?;
    let inputs = if header == "." {
        0
    } else {
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.iter().any(|t| *t != "|") {
            return Err(bad(0));
        }
        tokens.len()
    };
    let mut slices = Vec::new();
    for (index, line) in lines.enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let at = tokens.iter().position(|t| *t != "|").ok_or(bad(index))?;
        let gate = Gate::ALL.into_iter().find(|&g| glyphs.ascii(g) == tokens[at]).ok_or(bad(index))?;
        if tokens[at + 1..].iter().any(|t| *t != "|") {
            return Err(bad(index));
        }
        slices.push(Slice::new(at, gate, tokens.len() - at - 1));
    }
    Diagram::from_slices(inputs, slices)
}

fn tikz(d: &Diagram, o: &RenderOptions) -> String {
    let u = o.spacing.max(1);
    let mut out = String::new();
    out.push_str("\\documentclass[tikz]{standalone}\n");
    let [mult, unit, swap] = [Gate::M, Gate::E, Gate::S].map(|g| o.glyphs.tikz(g).to_string());
    let _ = writeln!(
        out,
        "\\newcommand{{{mult}}}[2]{{\\draw (#1,#2) -- (#1+0.5,#2-0.5) -- (#1+1,#2); \\draw (#1+0.5,#2-0.5) -- (#1,#2-1); \\fill (#1+0.5,#2-0.5) circle (2pt);}}"
    );
    let _ =
        writeln!(out, "\\newcommand{{{unit}}}[2]{{\\fill (#1,#2-0.5) circle (2pt); \\draw (#1,#2-0.5) -- (#1,#2-1);}}");
    let _ = writeln!(out, "\\newcommand{{{swap}}}[2]{{\\draw (#1,#2) -- (#1+1,#2-1); \\draw (#1+1,#2) -- (#1,#2-1);}}");
    out.push_str("\\newcommand{\\smcwire}[3]{\\draw (#1,#3) -- (#2,#3-1);}\n");
    out.push_str("\\begin{document}\n");
    let _ = writeln!(out, "% {}", print_diagram(d));
    let _ = writeln!(out, "\\begin{{tikzpicture}}[x={u}cm,y={u}cm]");
    if d.slices().is_empty() {
        for i in 0..d.inputs() {
            let _ = writeln!(out, "\\smcwire{{{i}}}{{{i}}}{{0}}");
        }
    }
    for (row, s) in d.slices().iter().enumerate() {
        let y = format!("-{row}");
        for i in 0..s.left() {
            let _ = writeln!(out, "\\smcwire{{{i}}}{{{i}}}{{{y}}}");
        }
        let _ = writeln!(out, "{}{{{}}}{{{y}}}", o.glyphs.tikz(s.gate), s.left());
        for j in 0..s.right() {
            let from = s.left() + s.gate.inputs() + j;
            let to = s.left() + s.gate.outputs() + j;
            let _ = writeln!(out, "\\smcwire{{{from}}}{{{to}}}{{{y}}}");
        }
    }
    out.push_str("\\end{tikzpicture}\n\\end{document}\n");
    out
}
