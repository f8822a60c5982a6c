//! Rewriting engine and coherence toolkit for monochrome string diagrams
//! presenting symmetric monoidal categories.
//!
//! The crate is `no_std` and only needs an allocator. File formats, fixtures
//! and the command-line front end live in the companion `smc` crate.

#![no_std]

extern crate alloc;

pub mod coherence;
pub mod diagram;
pub mod peaks;
pub mod render;
pub mod rewrite;
pub mod syntax;
pub mod termination;

pub use diagram::{
    canonical_form, enumerate_diagrams, equals, identity, par_compose, seq_compose, Diagram, DiagramError, Gate,
    PortGraph, Slice,
};
pub use peaks::{
    classify, enumerate_peaks, join, local_confluence_report, reduce_global, ConfluenceReport, CriticalPeak,
    JoinResult, PeakClass, PeakError,
};
pub use render::{read_ascii, render_diagram, Format, Glyphs, RenderOptions};
pub use rewrite::{
    apply_redex, find_redexes, normalize, normalize_with_budget, structural_normal_form, Applied, Redex, RewriteError,
    RewritePath, RewriteStep, Rule, RuleError, RuleSet, Strategy,
};
pub use syntax::{parse_diagram, print_diagram, ParseError};
pub use termination::{
    interpret_diagram, strictly_dominates, verify_termination, AffineMap, Interpretation, TerminationError,
    TerminationReport,
};

/// Parses a diagram literal, panicking on malformed input. Meant for tests
/// and built-in tables.
pub fn d(text: &str) -> Diagram {
    match parse_diagram(text) {
        Ok(d) => d,
        Err(e) => panic!("bad diagram literal {text:?}: {e}"),
    }
}
