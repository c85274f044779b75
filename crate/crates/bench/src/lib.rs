//! Shared fixtures for the criterion benchmarks.

use sixsoid::{FoiGrid, SamplePlan};

pub const BENCH_SEED: u64 = 0xbe9c;

pub fn mc_plan(n: u64) -> SamplePlan {
    SamplePlan::new(n, BENCH_SEED)
}

pub fn full_grid(n: u32) -> FoiGrid {
    FoiGrid::full_box(1.0, [n; 3]).expect("valid grid")
}
