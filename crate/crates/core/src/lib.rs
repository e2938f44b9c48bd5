//! Aperiodic tilings as integer cochains: generation, matching-rule
//! validation, height functions and cut-and-project checks.

pub mod cochain;
pub mod cpt;
pub mod cyclotomic;
pub mod document;
pub mod error;
pub mod penrose;
pub mod pentagrid;
pub mod potential;
pub mod spectral;
pub mod svg;
pub mod tiling;
pub mod validator;

pub use error::{Error, Result};
