//! Compositions of LDOI maps and the PPT² experiment.
//!
//! An LDOI triple `(X, Y, Z)` is the Choi matrix of a diagonal-orthogonal
//! covariant map ([`apply_choi_map`]). [`compose`] gives the triple of the
//! composed map. [`run_experiment`] composes random PPT factors and tests the
//! results for DPS certificates.

mod experiment;
mod maps;

use patterns::Regime;

pub use experiment::{
    gen_test_states, ppt_check, prepare, run_experiment, write_csv, x_a, ExperimentConfig, ExperimentReport, Factor,
    Pair, Row, TestStates, CSV_HEADER,
};
pub use maps::{apply_choi_map, choi_matrix, compose};

#[derive(Debug, thiserror::Error)]
pub enum Ppt2Error {
    #[error("cannot compose triples of sizes {left} and {right}")]
    Dimension { left: usize, right: usize },
    #[error("regime {0} is not supported by the experiment")]
    Regime(Regime),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("no PPT factor found for a = {a}, Z index {index}")]
    Sampling { a: f64, index: usize },
    #[error(transparent)]
    State(#[from] states::StateError),
    #[error(transparent)]
    Core(#[from] hermitian_core::Error),
    #[error(transparent)]
    Relax(#[from] relax::RelaxError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
