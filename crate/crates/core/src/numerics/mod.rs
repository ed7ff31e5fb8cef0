//! Shared numerical substrate: uniform grids, quadrature, the `ħ`-scaled
//! Fourier transform between demand and supply pictures, bracketed root
//! finding, special functions and seedable random streams.

mod distribution;
mod fourier;
mod grid;
mod quadrature;
mod random;
mod root;
pub mod special;

pub use distribution::Distribution;
pub use fourier::{fourier_p_to_q, fourier_q_to_p, fourier_q_to_p_about, reciprocal_step, refine};
pub use grid::Grid;
pub use quadrature::{cumulative, integrate, NeumaierSum};
pub use random::RandomSource;
pub use root::{find_root, DEFAULT_ROOT_TOL};
