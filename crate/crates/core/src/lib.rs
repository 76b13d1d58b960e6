//! Solvable many-body systems whose positions are the roots of a
//! time-dependent monic polynomial with one multiple root.

pub mod coeffs;
pub mod config;
pub mod dynamics;
pub mod models;
pub mod poly;
pub mod registry;
pub mod solver;
pub mod vieta;

pub use num_complex::Complex64;
