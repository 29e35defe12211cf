//! Numerics for a random copolymer in a random emulsion.

pub mod blocks;
pub mod deloc;
pub mod entropy;
pub mod error;
pub mod interface;
pub mod optimize;
pub mod oracle;
pub mod percolation;
pub mod phase;
pub mod rng;

pub use error::{Error, Result};

/// Monomer type or block type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    A,
    B,
}

impl Label {
    pub fn as_char(self) -> char {
        match self {
            Label::A => 'A',
            Label::B => 'B',
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}
