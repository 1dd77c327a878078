//! Per-mode solution of the regularized cloak: transfer coefficients across
//! the interface, the boundary-driven solve, and the `ρ → 0` limits.

pub mod limits;
pub mod solve;
pub mod tables;
pub mod transfer;

pub use limits::{limit_coeffs, truncation_order, LimitCoeffs};
pub use solve::{solve_mode, system_residuals, ModalSolution, ModeCoeffs, ModeData};
pub use tables::{BoundaryCoeffs, BoundaryRow, SourceCoeffs, SourceRow};
pub use transfer::{transfer_coeffs, transfer_from, RadialData, TransferSet, DENOMINATOR_FLOOR, INTERIOR_FLOOR};
