//! Exact ground truth at small scale.

pub mod enumerate;
pub mod fixed;
pub mod height;
pub mod lambda;

pub use enumerate::{
    enumerate_all, enumerate_levels, enumerate_range, ExactCount, LevelCounts, DEFAULT_LEVELS, ENUMERATION_GUARD,
};
pub use height::{
    count_height_le_exact, grusho_rho_approx, height_count_table, height_le_counts, ln_sachkov_count, rho_root,
    rho_root_precise, sachkov_count, HeightCountRow, RHO_TOL,
};
pub use lambda::{lambda_count, lambda_counts, lambda_pmf_exact, lambda_pmf_table, lambda_tail_mass};
