//! Allen-Cahn flow on flat tori and numerical verification of its
//! differential and classical Harnack estimates, plus one-dimensional
//! standing-wave gradient bounds.

pub mod ac_solver;
pub mod cli;
pub mod config;
pub mod error;
pub mod field_io;
pub mod harnack_params;
pub mod harnack_verify;
pub mod torus_grid;
pub mod wave_tools;

pub use error::{Error, Result};
