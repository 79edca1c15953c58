//! Tollmien-Schlichting growing modes of the MHD Orr-Sommerfeld system over
//! the Prandtl-Hartmann boundary layer.
//!
//! The crate builds the slow (inviscid) and fast (viscous sub-layer) modes,
//! assembles the dispersion function, certifies its zero with a winding
//! count on a small disk, and resolves the remainder with a discretized
//! Orr-Sommerfeld solver.

pub mod airy;
pub mod dispersion;
pub mod error;
pub mod fastmode;
pub mod magnetic;
pub mod mode;
pub mod numerics;
pub mod osresolvent;
pub mod params;
pub mod profile;
pub mod slowmode;

pub use dispersion::DispersionReport;
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use fastmode::{AiryFastMode, ExpFastMode, Truncation};
pub use magnetic::{MagneticProblem, MagneticSolution};
pub use mode::{FnMode, GridMode, ModeFunction};
pub use numerics::{Circle, RootTrace};
pub use params::{Regime, SpectralParams};
pub use profile::{HartmannProfile, Profile, StructureConstants};
pub use slowmode::SlowMode;
