//! Fourier analysis on the torus `[-pi, pi)^d`: transforms of finitely
//! supported symmetric functions, exact derivatives, and the audits of
//! the infrared bound and of the small-`k` behaviour of `E-hat`, `f-hat`.

mod audits;
mod grid;
mod hat;
mod torus;

pub use audits::{
    ehat_scaling_audit, fhat_l1_audit, fourier_identity_residual, infrared_scan, max_fhat_derivative,
    sample_directions, InfraredReport, L1Report, L1Row, LogCorrectedFit, ScalingOptions, ScalingReport, ScalingRow,
};
pub use grid::EvenTorusGrid;
pub use hat::HatEvaluator;
pub use torus::{cos_derivative, dhat, one_minus_dhat_table, DerivativeTable, MultiIndex, TorusPoint};
