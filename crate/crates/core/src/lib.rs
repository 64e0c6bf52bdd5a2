//! Computational toolkit for 2-ruled Cayley cones in R^8.
//!
//! Layers, bottom up:
//! - [`forms`]: sparse alternating forms and skew endomorphisms, exact or float;
//! - [`spin7`]: the Cayley form, the psi_m forms, spin(7) and comass;
//! - [`symbolic`]: exact Maurer-Cartan calculus and the structure-equation suite;
//! - [`frames`]: adapted frames, coframe sampling and the twistor map to S^6;
//! - [`curves`]: pseudoholomorphic curves, cones, degrees and deformations;
//! - [`examples`]: curve generators, orbit search and JSON specs.

pub mod error;
pub mod examples;
pub mod forms;
pub mod frames;
pub mod curves;
pub mod linalg;
pub mod scalar;
pub mod spin7;
pub mod symbolic;

pub use error::{CurveError, FormError, FrameError, SpecError};
pub use forms::{AlternatingForm, Blade, SkewEndo};
pub use scalar::{Mode, Scalar};
