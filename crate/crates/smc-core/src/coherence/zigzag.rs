//! Zigzags: finite sequences of rewrite steps taken forwards or backwards.

use alloc::vec::Vec;

use crate::diagram::Diagram;
use crate::rewrite::RewriteStep;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// One step of a zigzag. A backward move walks from `step.target` to
/// `step.source`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Move {
    pub step: RewriteStep,
    pub dir: Direction,
}

impl Move {
    pub fn forward(step: RewriteStep) -> Move {
        Move { step, dir: Direction::Forward }
    }

    pub fn backward(step: RewriteStep) -> Move {
        Move { step, dir: Direction::Backward }
    }

    pub fn is_forward(&self) -> bool {
        self.dir == Direction::Forward
    }

    pub fn from(&self) -> &Diagram {
        match self.dir {
            Direction::Forward => &self.step.source,
            Direction::Backward => &self.step.target,
        }
    }

    pub fn to(&self) -> &Diagram {
        match self.dir {
            Direction::Forward => &self.step.target,
            Direction::Backward => &self.step.source,
        }
    }

    pub fn inverse(&self) -> Move {
        Move { step: self.step.clone(), dir: self.dir.flipped() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Zigzag {
    pub start: Diagram,
    pub moves: Vec<Move>,
}

impl Zigzag {
    pub fn empty(start: Diagram) -> Zigzag {
        Zigzag { start, moves: Vec::new() }
    }

    pub fn forward(start: Diagram, steps: &[RewriteStep]) -> Zigzag {
        Zigzag { start, moves: steps.iter().cloned().map(Move::forward).collect() }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn end(&self) -> &Diagram {
        self.moves.last().map_or(&self.start, |m| m.to())
    }

    /// Diagram reached after the first `k` moves.
    pub fn at(&self, k: usize) -> &Diagram {
        if k == 0 {
            &self.start
        } else {
            self.moves[k - 1].to()
        }
    }

    /// Whether consecutive moves share their endpoints.
    pub fn is_chained(&self) -> bool {
        let mut cur = &self.start;
        for m in &self.moves {
            if m.from() != cur {
                return false;
            }
            cur = m.to();
        }
        true
    }

    pub fn inverse(&self) -> Zigzag {
        Zigzag { start: self.end().clone(), moves: self.moves.iter().rev().map(Move::inverse).collect() }
    }

    /// Concatenation, when `self` ends where `next` starts.
    pub fn then(&self, next: &Zigzag) -> Option<Zigzag> {
        if self.end() != &next.start {
            return None;
        }
        let mut moves = self.moves.clone();
        moves.extend(next.moves.iter().cloned());
        Some(Zigzag { start: self.start.clone(), moves })
    }
}
