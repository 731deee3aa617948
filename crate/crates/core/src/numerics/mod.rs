//! Numerical substrate: dense matrices, symmetric eigenvalues, SVD and the
//! Moore–Penrose inverse, distribution functions, and seedable random streams.

pub mod dist;
pub mod eigen;
pub mod linalg;
pub mod rng;
pub mod special;
pub mod svd;

pub use eigen::symmetric_eigenvalues;
pub use svd::{pseudo_inverse, pseudo_inverse_with_tol, Svd};
