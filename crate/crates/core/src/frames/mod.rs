//! Periodic Parseval wavelet frames on the torus driven by an integer
//! dilation matrix with |det| = 2.
//!
//! The construction runs in the coefficient domain throughout: B^j-periodic
//! masks nu_j built from a Gaussian seed, scaling coefficients as the
//! convergent tail product of the masks, wavelet coefficients from the
//! shifted mask with a lattice phase, and verification of the two mask
//! identities plus the energy cascade that witnesses the Parseval property.

mod analysis;
mod context;
mod dilation;
mod elements;

pub use analysis::{
    level_energies, parseval_cascade_check, uep_identity_check, CascadeReport, CascadeRow,
    UepReport,
};
pub use context::FrameContext;
pub use dilation::{dyadic, quincunx, validate_dilation, DilationMatrix};
pub use elements::{
    eta_reference, frame_element_coeffs, phi_limit_target, psi_limit_target,
    reference_limits_check, tail_mass_bound, up_limit_row, up_limit_sweep,
    window_points_estimate, xi0_reference, FrameElementCoeffs, SweepRow,
};
