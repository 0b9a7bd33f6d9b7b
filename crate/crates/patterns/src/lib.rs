//! Index combinatorics shared by the relaxation builders.
//!
//! Symbols are 0-based internally (`0..n`); [`format_seq`] renders the
//! 1-based labels used in printed clique tables. Exponent vectors and
//! sequences are enumerated in lexicographic order so every layout is
//! deterministic.

mod exponent;
mod moment;
mod table;
mod tensor;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use exponent::{alpha, binomial, exponents, multinomial, sequences, ExponentVec};
pub use moment::{
    moment_basis, moment_block_layout, moment_entry, moment_sub_block_key, BlockLayout, Entry, MomentBlock, MomentKey,
    MomentLabel, VarRef,
};
pub use table::{block_size_table, write_table_csv, TableRow};
pub use tensor::{clique_key, format_seq, tensor_adjacent, tensor_block_layout, Clique, OrbitKey, TensorLayout};

/// Invariance class exploited when reducing a relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Generic,
    Cldui,
    Ldui,
    Ldoi,
}

impl Regime {
    pub const ALL: [Regime; 4] = [Regime::Generic, Regime::Cldui, Regime::Ldui, Regime::Ldoi];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Generic => "generic",
            Regime::Cldui => "cldui",
            Regime::Ldui => "ldui",
            Regime::Ldoi => "ldoi",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Regime {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "generic" => Ok(Regime::Generic),
            "cldui" => Ok(Regime::Cldui),
            "ldui" => Ok(Regime::Ldui),
            "ldoi" => Ok(Regime::Ldoi),
            _ => Err(PatternError::UnknownRegime(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("symbol {symbol} out of range for n = {n}")]
    SymbolOutOfRange { symbol: usize, n: usize },
    #[error("s' = {s_prime} does not have the parity of t = {t}")]
    ParityMismatch { t: usize, s_prime: i64 },
    #[error("transpose depth {s} exceeds level {t}")]
    InvalidDepth { s: usize, t: usize },
    #[error("unknown regime '{0}'")]
    UnknownRegime(String),
}
