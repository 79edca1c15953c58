//! Complex-analysis utilities shared by the solvers.

pub mod banded;
pub mod grid;
pub mod kernel;
pub mod newton;
pub mod quad;
pub mod winding;

pub use banded::{BandLu, BandMatrix};
pub use grid::{holomorphic_derivative, GradedGrid};
pub use kernel::{mild_solve, tail_integral, MildSolution};
pub use newton::{newton_root, RootTrace};
pub use quad::{integrate_interval, integrate_path, quad_real, quad_segment, Path};
pub use winding::{scan_contour, winding_number, Circle, ContourScan};
