//! Convolution weight precompute: pointwise weight functions, single tensor
//! entries, full-table builds with symmetry reduction, and the disk cache.

mod build;
mod cache;
mod entry;
mod gfun;
mod theta;

pub use build::{
    build_weight_table, build_weight_table_with, BuildOptions, BuildReport, KernelMeta,
    OperatorKind, WeightTable,
};
pub use cache::{load_table, load_table_matching, save_table};
pub use entry::{ghat_boltzmann_entry, ghat_landau_entry};
pub use gfun::{g_boltzmann, g_landau};
pub use theta::{inner_theta_integral, taylor_leading_piece, unsplit_theta_oracle};
