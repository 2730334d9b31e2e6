//! Relaxation of locked energies: discrete Young measures, cell problems, laminates.

mod cell;
mod envelope;
mod laminate;
mod region;
mod wrel;
mod young;

pub use cell::{winf_cell, CellProblem, CellSettings, CellSolution};
pub use envelope::{envelope_table, EnvelopeOptions, EnvelopeRow, EnvelopeTable, Slice};
pub use laminate::{
    best_split, direction_set, laminate_envelope, laminate_envelope_with, LaminateOptions, LaminateResult, Split,
};
pub use region::Region;
pub use wrel::{
    relaxed_energy, rescale_bound, rescale_to_ball, unlocked_energy, wrel, WrelMethod, WrelOptions, WrelValue,
};
pub use young::{
    default_convex_tests, empirical_measure, homogenize, random_measure, validate_gym, ConvexTest,
    DiscreteYoungMeasure, GymReport,
};
