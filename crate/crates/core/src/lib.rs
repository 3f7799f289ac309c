//! Numerical core for a self-similar analysis of an aggregation-diffusion
//! model: radial profile ODEs launched off the coordinate singularity,
//! Sturm-type zero counting for a one-parameter family of linearized
//! operators, phase-plane asymptotics of the steep-profile limit, the
//! reduced-mass transform between physical and lifted radial fields, and a
//! radial finite-difference evolution in similarity variables.

pub mod asymptotics;
pub mod cache;
pub mod error;
pub mod grid;
pub mod interp;
pub mod linearized;
pub mod profile;
pub mod quad;
pub mod radial_ivp;
pub mod rk;
pub mod series;
pub mod similarity_pde;
pub mod spectral_search;
pub mod transform;

pub use error::{Error, Result};
pub use radial_ivp::{IvpResult, RadialOde, SeriesLaunch, TerminationReason};
