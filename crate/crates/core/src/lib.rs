//! Coverage geometry for 3D k-coverage planning with six-sphere cube cells.
//!
//! Placing six sensing spheres of radius `R` on the face centers of a cube of
//! side `R` makes the whole cube at least 3-covered, about 95% of it at least
//! 4-covered, and carves out a convex body — the sixsoid — that is 6-covered.
//! This crate provides:
//!
//! * exact per-point coverage counting for sphere arrangements ([`geometry`]),
//! * the piecewise closed forms for the 6-covered slice area and a validated,
//!   sampler-backed profile for the exactly-3-covered slice area
//!   ([`cross_section`]),
//! * adaptive quadrature turning slice profiles into volumes ([`integrator`]),
//! * an independent seeded Monte Carlo oracle ([`mc_oracle`]),
//! * a cube-tessellation deployment planner for polycubical fields of
//!   interest, plus sixsoid-vs-Reuleaux-tetrahedron comparisons
//!   ([`deployment`]).

pub mod cross_section;
pub mod deployment;
pub mod error;
pub mod geometry;
pub mod integrator;
pub mod mc_oracle;

pub use cross_section::{
    area_at_least_k_slice, area_sixsoid_slice, bottom_side_chord, sixsoid_profile, slice_radii,
    ChordFormula, Only3Profile, PiecewiseAreaProfile, SliceHistogram, SliceRadii, SliceSampler,
    TransitionPoints,
};
pub use deployment::{
    coverage_stats, density_table, enumerate_sensors, sensor_budget_formula, spatial_density,
    volume_table, ComparisonRow, CoverageModel, DensityRow, DeploymentPlan, FoiGrid,
};
pub use error::{Error, Result};
pub use geometry::{
    coverage_count, sixsoid_contains, ArrangementMode, CubeCell, SensorArrangement, Sphere, Vec3,
};
pub use integrator::{
    integrate, kcovered_volume_profile, only3_volume, sixsoid_volume, sixsoid_volume_constant,
    KCoverageVolumes, KProfileResolution, QuadratureConfig, VolumeResult,
};
pub use mc_oracle::{sample_coverage_cube, sample_slice_area, CoverageReport, SamplePlan};
