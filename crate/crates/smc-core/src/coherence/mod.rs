//! Coherence certificates: reading diagrams as tensor terms, morphisms as
//! zigzags of rewrite steps, and derivations that turn one parallel zigzag
//! into another by cell surgeries.

pub mod cells;
pub mod certify;
pub mod expansion;
pub mod polygon;
pub mod script;
pub mod term;
pub mod validate;
pub mod zigzag;

use alloc::string::String;

use crate::peaks::PeakError;

pub use cells::{CellCatalog, CellName, Context, PeakCell};
pub use certify::{Certificate, Certifier, Surgery};
pub use expansion::{derive_expansion, derive_table, expand_kelly, predecessors, Expansion, ExpansionTable};
pub use polygon::{Polygon, PolygonCertificate};
pub use script::{parse_certificate, parse_expansions, write_certificate, write_expansions, Script};
pub use term::{
    mor_to_zigzag, morgen_to_edge, parse_morphism, parse_term, read_diagram, term_to_diagram, MorExpr, MorGen, MorKind,
    Term,
};
pub use validate::{invert, replay, validate};
pub use zigzag::{Direction, Move, Zigzag};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CoherenceError {
    #[error("variable {0} occurs more than once")]
    NonLinearTerm(String),
    #[error("variable {0} is not in the variable order")]
    UnknownVariable(String),
    #[error("variable {0} of the order does not occur in the term")]
    MissingVariable(String),
    #[error("composition mismatch: {left} does not match {right}")]
    CompositionMismatch { left: String, right: String },
    #[error("zigzags are not parallel")]
    NotParallel,
    #[error("no expansion for peak {0}")]
    UnknownPeak(String),
    #[error("unknown cell {0}")]
    UnknownCell(String),
    #[error("no filler for the peak of {first} and {second} on {diagram}")]
    NoFiller { diagram: String, first: String, second: String },
    #[error("no derivation of {id} from the allowed cells ({detail})")]
    Underivable { id: String, detail: String },
    #[error("surgery {index}: {reason}")]
    InvalidSurgery { index: usize, reason: String },
    #[error("the replayed path differs from the target")]
    TargetMismatch,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Peak(PeakError),
}
