//! Hyperbolic tessellations of the Hecke group, its Hecke/Farey external
//! circle maps, parabolic Blaschke dynamics, covering correspondences and
//! B-involution tile dynamics, together with a deterministic raster backend
//! for turning all of these into images.

pub mod binv;
pub mod blaschke;
pub mod corr;
pub mod export;
pub mod hecke;
pub mod moebius;
pub mod poly;
pub mod quotient;
pub mod raster;

pub use moebius::{Complex, Sphere};
