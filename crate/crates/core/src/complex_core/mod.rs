//! Lefschetz complexes, discrete Morse functions, vector fields, gradient
//! paths and Morse complexes.

mod complex;
mod dmf;
mod field;

pub use complex::{
    validate_complex, Cell, CellId, ComplexReport, ComplexViolation, LefschetzComplex,
};
pub use dmf::{
    h_cmp, induced_partition, level_sets, validate_dmf, DiscreteMorseFunction, DmfReport,
    DmfViolation, HOrder,
};
pub use field::{
    count_paths, induced_vector_field, morse_complex, restore_path, reverse_path, unique_path,
    CombinatorialVectorField, GradientPath, Mate, MorseComplex, PathCount,
};
