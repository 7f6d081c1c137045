//! Numerical laboratory for Hess-Appel'rot type rigid-body systems:
//! Euler–Poisson flows on so(n)×so(n), Lax pairs and spectral curves,
//! Poisson/bihamiltonian checks, and Kowalevski-exponent analysis.

pub mod dynamics;
pub mod error;
pub mod kowalevski;
pub mod lax;
pub mod models;
pub mod numeric;
pub mod poisson;
pub mod poly;
pub mod sample;
pub mod skewalg;
pub mod spec_io;
pub mod spectral;

pub use error::{Error, Result};
pub use models::{make_spec, Kind, SystemSpec, Which};
pub use dynamics::{PhaseState, Trajectory};
pub use skewalg::{SkewMatrix, SymMatrix};
