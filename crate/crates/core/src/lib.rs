//! Numerical laboratory for quasiconformal maps of the Riemann sphere.
//!
//! The crate covers grid-based Beltrami solvers, Möbius transformations,
//! Douady–Earle barycentric extensions, Lieb coordinates for Teichmüller
//! spaces of closed sets whose complement is a finite union of round disks,
//! holomorphic motions, and the Jordan-curve families they carry.

pub mod beltrami;
pub mod circle;
pub mod douady_earle;
pub mod error;
pub mod fields;
pub mod grid;
pub mod jordan;
pub mod lieb;
pub mod moebius;
pub mod motions;
pub mod solver;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
