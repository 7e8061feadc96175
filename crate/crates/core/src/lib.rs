//! Homogenization laboratory for Stokes flow in perforated domains.

pub mod cell;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod grid;
pub mod homogenization;
pub mod linalg;
pub mod stokes;

pub use error::{Error, Result};
