//! Conservative deterministic spectral method for the space-homogeneous
//! Boltzmann equation with anisotropic scattering kernels.
//!
//! The collision operator is evaluated as a weighted convolution in Fourier
//! space. The convolution weights are precomputed once per (grid, kernel)
//! pair — including singular grazing families of Rutherford type — and the
//! collision output is projected back onto the manifold of states that
//! conserve mass, momentum, and energy. The same machinery evaluates the
//! Fokker-Planck-Landau weights, so the grazing-collisions limit can be
//! checked directly against the Landau operator.
//!
//! Module map:
//! - [`grid`]: truncated velocity cube, uniform velocity/Fourier meshes,
//!   index conventions, trapezoid quadrature weights.
//! - [`kernels`]: collision kernels `B = |u|^lambda b(cos theta)`, the
//!   grazing Rutherford family, the elastic collision rule.
//! - [`weights`]: precomputed convolution weight tensors with disk caching.
//! - [`spectral`]: forward/inverse transforms and the weighted convolution.
//! - [`oracle`]: direct quadrature of the collision integral (reference
//!   path for verification, not for production runs).
//! - [`conservation`]: constrained least-squares projection.
//! - [`solver`]: time integration of the semi-discrete system.
//! - [`diagnostics`]: moments, entropy, equilibrium states, slices.

pub mod conservation;
pub mod diagnostics;
mod error;
pub mod grid;
pub mod kernels;
pub mod oracle;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod weights;

pub use conservation::{build_projector, ConservationProjector};
pub use diagnostics::{
    maxwellian, moment_matched_maxwellian, moments, shell_ic, slice, MomentSet,
};
pub use error::Error;
pub use grid::VelocityGrid;
pub use kernels::{
    angular_density, grazing_moment, post_collision_velocities, AngularFamily, KernelSpec,
    TabulatedAngular,
};
pub use oracle::{direct_collision_oracle, SphereRule};
pub use solver::{
    load_state, save_state, DiagnosticRecord, Scheme, Solver, SolverConfig, StepInfo,
};
pub use spectral::{collide, SpectralState, Transform};
pub use weights::{
    build_weight_table, build_weight_table_with, g_boltzmann, g_landau, ghat_boltzmann_entry,
    ghat_landau_entry, inner_theta_integral, load_table, load_table_matching, save_table,
    BuildOptions, BuildReport, KernelMeta, OperatorKind, WeightTable,
};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
