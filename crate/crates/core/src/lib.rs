//! Simulation library for quantum market games.
//!
//! A trader's strategy is a wavefunction over log-price. Its squared modulus in
//! the demand picture (`q`) is the distribution of prices at which the trader
//! buys, and in the supply picture (`p`, the Fourier conjugate) the
//! distribution of prices at which they sell. On top of that substrate the
//! crate provides:
//!
//! * [`wigner`]: phase-space pseudo-densities, closed-form coherent, excited
//!   and thermal families, negativity ("giffen") detection and the dominant
//!   demand/supply curves;
//! * [`risk`]: the risk inclination operator (a harmonic oscillator), its
//!   spectrum and the noncommutative correction of the Planck-like constant;
//! * [`clearing`]: rest-of-world models, projective clearing rounds and the
//!   profit-intensity fixed point;
//! * [`auction`]: q-auctions with first-price, second-price and mixed
//!   polarization pricing;
//! * [`zeno`]: survival of a strategy under repeated measurement.
//!
//! ```
//! use qmg_core::clearing::fixed_point;
//!
//! let a = fixed_point(1.0).unwrap();
//! assert!((a - 0.27603).abs() < 1e-5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity, clippy::needless_range_loop)]

pub mod auction;
pub mod clearing;
mod error;
pub mod numerics;
pub mod risk;
pub mod strategy;
pub mod wigner;
pub mod zeno;

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use numerics::{Grid, RandomSource};
pub use strategy::{Representation, RiskParams, Strategy};
