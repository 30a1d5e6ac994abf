//! Self-similar solutions of the free Schrödinger equation, their
//! concentration lattices, and scaling experiments for weighted extension
//! estimates on the paraboloid.

pub mod error;
pub mod experiments;
pub mod extension;
pub mod lattice;
pub mod measures;
pub mod params;
pub mod profile;
pub mod propagator;
pub mod quadrature;
pub mod rational;
pub mod weight;

pub use error::{Error, Result};
pub use params::DyadicParams;
pub use profile::{build_profile, AffineMap1D, FrequencyProfile, Interval};
pub use propagator::{
    line_integral, lower_bound_check, phase_deviation, solution_at, LineIntegrator, PhaseCertificate,
    QuadratureSpec,
};
pub use extension::{
    knapp_lower_bound, l2_cell_mass, surface_extension, Amplitude, ExtensionConvention, KnappCell, ParaboloidSection,
};
pub use lattice::{build_lattice, lattice_self_similarity, min_modulus, omega_tilde, LatticeSet};
pub use measures::{
    box_mass, brute_force_sup, mc_norm, omega_l2, section_mass, sup_ball_mass, NormKind, NormQuery, SearchSpec,
    SupResult,
};
pub use rational::Rational;
pub use weight::{AxisFamily, BoxUnionWeight, Cuboid};
