//! Directional time-frequency localization on the torus.
//!
//! The crate works with multivariate periodic functions represented by their
//! sparse Fourier coefficients (equivalently, multivariate discrete signals
//! through the DTFT duality). On top of that representation it provides
//!
//! * directional and coordinate-wise uncertainty products with their angular
//!   and frequency variances ([`uncertainty`]),
//! * generators for the classical kernel families used as localization
//!   benchmarks ([`kernels`]),
//! * minimal-angular-variance polynomials on arbitrary finite supports
//!   ([`localization`]),
//! * periodic Parseval wavelet frames driven by an integer dilation matrix
//!   with |det| = 2, including mask verification and energy cascades
//!   ([`frames`]).
//!
//! ```
//! use uptorus::{Direction, kernels::powered_cos, uncertainty::up_directional};
//!
//! // powers of the raised cosine have the exactly known product 1/4 + 1/(8n-2)
//! let l = Direction::new(vec![1, 1])?;
//! let p = powered_cos(5, &l)?;
//! let report = up_directional(&p, &l)?;
//! assert!((report.up.unwrap() - (0.25 + 1.0 / 38.0)).abs() < 1e-12);
//! # Ok::<(), uptorus::Error>(())
//! ```

pub mod budget;
pub mod error;
pub mod frames;
pub mod kernels;
pub mod lattice;
pub mod localization;
pub mod numeric;
pub mod uncertainty;

pub use budget::Budget;
pub use error::{Error, Result};
pub use lattice::{CoeffMap, Direction, LatticeIndex};
pub use uncertainty::{UpReport, UpStatus};
