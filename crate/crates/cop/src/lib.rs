//! Copositive-side computations.
//!
//! [`k0_membership`] and [`kt_membership`] test the inner approximations
//! `K^(t)` of the copositive cone; [`copositive_brute_oracle`] minimizes the
//! quadratic form over a simplex grid. [`dps_cp_bridge_check`] and
//! [`search_objective`] relate `K^(t)` to the Bose-symmetric DPS hierarchy
//! through the LDUI states `rho_(X,X)^{T_B}`.

mod affine;
mod bridge;
mod cones;

pub use bridge::{
    dps_cp_bridge_check, is_doubly_nonnegative, rho_xx_tb, search_objective, BridgeReport, SearchReport, WitnessCheck,
};
pub use cones::{copositive_brute_oracle, horn, k0_membership, kt_membership, ConeReport, SosModel};

#[derive(Debug, thiserror::Error)]
pub enum CopError {
    #[error(transparent)]
    Relax(#[from] relax::RelaxError),
    #[error(transparent)]
    Solve(#[from] sdp::SolveError),
    #[error(transparent)]
    State(#[from] states::StateError),
    #[error("level t must be at least 1")]
    Level,
    #[error("witness has dimension {got}, expected {want}")]
    Dimension { want: usize, got: usize },
}
