//! Recovery of frontal parametrizations f: Uₙ → ℝⁿ⁺¹ from Legendre data
//! (Gauss map ν and height function a = f·ν).

pub mod dual;
pub mod error;
pub mod gallery;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod map;
pub mod mesh;
pub mod perturbation;
pub mod recovery;
pub mod richardson;
pub mod singularities;
pub mod sphere;

pub use error::{Error, Result};
