//! Scalar-set supercyclicity toolkit for shift operators on sequence spaces.

pub mod constructions;
pub mod criteria;
pub mod density;
pub mod gamma_sets;
pub mod homotopy;
pub mod operators;
pub mod wide;
