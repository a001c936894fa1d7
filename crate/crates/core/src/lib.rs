//! Anderson transitions in non-Hermitian disordered lattices.
//!
//! The crate builds O(1) and SU(2) tight-binding models, measures quasi-1D
//! localization lengths with the transfer-matrix method, fits them with
//! single-parameter finite-size scaling, and checks the correspondence
//! between the 38 non-Hermitian symmetry classes and their Hermitized
//! (Altland-Zirnbauer) counterparts.

pub mod cli;
pub mod error;
pub mod fss;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod spectra;
pub mod symmetry;
pub mod transfer;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
