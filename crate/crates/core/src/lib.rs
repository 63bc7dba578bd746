//! Construction and verification of neutral-signature four-dimensional
//! geometries: null frames, para-hypercomplex triples, curvature, Killing
//! fields and the model spaces built on them.

pub mod cli;
pub mod exprdsl;
pub mod geometry;
pub mod killing;
pub mod models;
pub mod report;
pub mod structures;
pub mod suites;
pub mod tensor;
