//! Incremental maintenance of the reductions under adjacent transpositions.

mod events;
mod matrix;
mod state;

pub use events::{
    classify, criterion_entry, criterion_value, quadrant_entry, transpose_births, transpose_deaths,
    transpose_event, transpose_mixed, transpose_with_vector, Case, MatrixId, Side,
    TranspositionEvent, TranspositionKind, UpdateOutcome,
};

pub use matrix::{ColumnSwap, IncrementalReduction, RowSwap};
pub use state::{CellSwap, ReducedState, Reordering, Role};
