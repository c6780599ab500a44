//! Finite Grassmann algebra arithmetic and the N=1 / N=2 superconformal calculus
//! on superspheres and supertori.

pub mod error;
pub mod analytic;
pub mod cech;
pub mod grassmann;
pub mod json;
pub mod nsalg;
pub mod sphere;
pub mod supermap;
pub mod torus;

pub use error::{Error, Result};
pub use grassmann::{Grassmann, MultiIndex, Parity};
