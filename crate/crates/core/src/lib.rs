//! Electron-on-neon charge qubits over layered substrates.
//!
//! Image potentials for a neon film on a superconductor or dielectric,
//! perpendicular bound states, lateral traps from thickness profiles via the
//! local-thickness approximation, and scalar growth estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound_states;
pub mod constants;
pub mod dielectric;
pub mod error;
pub mod growth;
pub mod lateral;
pub mod quadrature;
pub mod spline;
pub mod tridiag;
pub mod units;

pub use bound_states::{
    ground_state_energy, hellmann_feynman_check, mean_height, perpendicular_gap, solve_lowest, BoundStateSolution,
    Grid1D, GroundState, PerpendicularGridSpec, PerpendicularSolver,
};
pub use constants::PhysicalConstants;
pub use dielectric::{
    external_potential, image_series_oracle, perpendicular_potential, reflection_coefficient,
    total_perpendicular_potential, DielectricStack, FieldSpec, ImagePotentialCache, Substrate, Thickness,
};
pub use error::{Error, Result};
pub use growth::{
    diffusion_length, gibbs_thomson_coefficient, gibbs_thomson_shift, gravity_potential_difference, NeonMaterialData,
};
pub use lateral::{
    field_response, lateral_spectrum, lta_potential, potential_depth, radial_hamiltonian, radial_spectrum, EnergyCurve,
    FieldResponse, FieldResponseRow, HarmonicFieldModel, LateralOptions, LateralSpectrum, RadialGrid, ThicknessProfile,
};
pub use spline::CubicSpline;
pub use units::{Quantity, Unit};
