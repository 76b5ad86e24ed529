//! Garden hose model workbench: water-flow simulation, configuration
//! matrices, permutation-submatrix search, product composition and
//! group-invariant solutions.

pub mod compose;
pub mod exact;
pub mod flow;
pub mod groups;
pub mod matrix;
pub mod search;
pub mod solution;

pub use compose::{bound, compose, BoundReport, PowerOf};
pub use flow::{entry_bit, simulate_flow, water_in, water_out, Configuration, FlowError, FlowOutcome, Side};
pub use matrix::{build_full_matrix, build_matrix, ConfigMatrix, MatrixError};
pub use solution::{antichain_check, lift_to_last_row_block, verify_solution, Solution, SolutionError, Violation};
