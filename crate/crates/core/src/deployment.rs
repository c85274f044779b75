//! Cube-tessellation deployment for polycubical fields of interest, and the
//! sixsoid vs Reuleaux-tetrahedron comparisons.
//!
//! Tessellating the field of interest with cubes of side `R` and placing one
//! sensor of radius `r = R` on every distinct cube face makes each interior
//! sensor shared by two cells, so the asymptotic budget is `3 V / r^3`
//! sensors while the exact count also pays for the boundary faces.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::integrator::sixsoid_volume_constant;
use crate::mc_oracle::{tally_substreams, CoverageReport, SamplePlan};

/// Volume of a Reuleaux tetrahedron per unit tetrahedron side cubed.
pub const REULEAUX_VOLUME_COEFF: f64 = 0.422;
/// Sensing radius per tetrahedron side in the Reuleaux-tetrahedron coverage
/// model: the tetrahedron side is `r / 1.066`.
pub const REULEAUX_RADIUS_RATIO: f64 = 1.066;

/// A polycubical field of interest: an occupancy set of cells of side
/// `cell_size` on the integer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FoiGrid {
    cell_size: f64,
    occupied: BTreeSet<[i64; 3]>,
}

impl FoiGrid {
    pub fn new(cell_size: f64, cells: impl IntoIterator<Item = [i64; 3]>) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::InvalidFoi(format!(
                "cell_size must be positive, got {cell_size}"
            )));
        }
        let occupied: BTreeSet<[i64; 3]> = cells.into_iter().collect();
        if occupied.is_empty() {
            return Err(Error::InvalidFoi("cells must be non-empty".to_string()));
        }
        Ok(Self {
            cell_size,
            occupied,
        })
    }

    /// Full `dims[0] x dims[1] x dims[2]` box of cells.
    pub fn full_box(cell_size: f64, dims: [u32; 3]) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidFoi(format!(
                "dims must all be positive, got {dims:?}"
            )));
        }
        let mut cells = Vec::new();
        for i in 0..dims[0] as i64 {
            for j in 0..dims[1] as i64 {
                for k in 0..dims[2] as i64 {
                    cells.push([i, j, k]);
                }
            }
        }
        Self::new(cell_size, cells)
    }

    /// Parse the JSON input format:
    /// `{"cell_size": s, "cells": [[i,j,k], ...]}` or
    /// `{"cell_size": s, "dims": [W,H,D]}`.
    pub fn from_json_str(s: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct FoiFile {
            cell_size: f64,
            #[serde(default)]
            cells: Option<Vec<[i64; 3]>>,
            #[serde(default)]
            dims: Option<[u32; 3]>,
        }
        let parsed: FoiFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidFoi(e.to_string()))?;
        match (parsed.cells, parsed.dims) {
            (Some(cells), None) => Self::new(parsed.cell_size, cells),
            (None, Some(dims)) => Self::full_box(parsed.cell_size, dims),
            (Some(_), Some(_)) => Err(Error::InvalidFoi(
                "provide either cells or dims, not both".to_string(),
            )),
            (None, None) => Err(Error::InvalidFoi(
                "missing field: one of cells or dims is required".to_string(),
            )),
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cell_count(&self) -> usize {
        self.occupied.len()
    }

    pub fn cells(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        self.occupied.iter().copied()
    }

    pub fn contains_cell(&self, idx: [i64; 3]) -> bool {
        self.occupied.contains(&idx)
    }

    /// Total volume `cell_size^3 * |cells|`.
    pub fn volume(&self) -> f64 {
        let s = self.cell_size;
        s * s * s * self.occupied.len() as f64
    }

    /// Minimum corner of a cell, in length units.
    fn cell_min(&self, idx: [i64; 3]) -> Vec3 {
        Vec3::new(
            idx[0] as f64 * self.cell_size,
            idx[1] as f64 * self.cell_size,
            idx[2] as f64 * self.cell_size,
        )
    }

    /// Distinct faces of the occupied cell complex, as half-unit lattice keys
    /// (a face's center equals `cell_size / 2` times its key).
    fn face_keys(&self) -> BTreeSet<[i64; 3]> {
        let mut keys = BTreeSet::new();
        for [i, j, k] in self.cells() {
            let (i2, j2, k2) = (2 * i, 2 * j, 2 * k);
            keys.insert([i2, j2 + 1, k2 + 1]);
            keys.insert([i2 + 2, j2 + 1, k2 + 1]);
            keys.insert([i2 + 1, j2, k2 + 1]);
            keys.insert([i2 + 1, j2 + 2, k2 + 1]);
            keys.insert([i2 + 1, j2 + 1, k2]);
            keys.insert([i2 + 1, j2 + 1, k2 + 2]);
        }
        keys
    }
}

/// Sensor positions for a field of interest: one sensor of radius
/// `sensing_radius = cell_size` per distinct face of the cell complex.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentPlan {
    pub sensor_positions: Vec<Vec3>,
    pub sensing_radius: f64,
    /// The grid the plan was derived from; absent when the plan was read back
    /// from a file.
    pub source: Option<FoiGrid>,
}

impl DeploymentPlan {
    pub fn sensor_count(&self) -> usize {
        self.sensor_positions.len()
    }

    /// Serialize as `{"radius": r, "sensors": [[x,y,z], ...]}`.
    pub fn to_json_string(&self) -> String {
        #[derive(serde::Serialize)]
        struct PlanFile<'a> {
            radius: f64,
            sensors: Vec<[f64; 3]>,
            #[serde(skip_serializing_if = "Option::is_none")]
            _phantom: Option<&'a ()>,
        }
        let file = PlanFile {
            radius: self.sensing_radius,
            sensors: self
                .sensor_positions
                .iter()
                .map(|p| [p.x, p.y, p.z])
                .collect(),
            _phantom: None,
        };
        serde_json::to_string_pretty(&file).expect("plan serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        #[serde(deny_unknown_fields)]
        struct PlanFile {
            radius: f64,
            sensors: Vec<[f64; 3]>,
        }
        let parsed: PlanFile =
            serde_json::from_str(s).map_err(|e| Error::InvalidFoi(e.to_string()))?;
        if !(parsed.radius > 0.0) {
            return Err(Error::InvalidFoi(format!(
                "radius must be positive, got {}",
                parsed.radius
            )));
        }
        Ok(Self {
            sensor_positions: parsed
                .sensors
                .into_iter()
                .map(|[x, y, z]| Vec3::new(x, y, z))
                .collect(),
            sensing_radius: parsed.radius,
            source: None,
        })
    }
}

/// Deduplicated face-center sensor set of the field of interest. A face
/// shared by two occupied cells yields one sensor; the sensing radius equals
/// the cell side.
pub fn enumerate_sensors(foi: &FoiGrid) -> Result<DeploymentPlan> {
    if foi.cell_count() == 0 {
        return Err(Error::InvalidFoi("cells must be non-empty".to_string()));
    }
    let h = foi.cell_size() / 2.0;
    let sensor_positions: Vec<Vec3> = foi
        .face_keys()
        .into_iter()
        .map(|[i, j, k]| Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h))
        .collect();
    Ok(DeploymentPlan {
        sensor_positions,
        sensing_radius: foi.cell_size(),
        source: Some(foi.clone()),
    })
}

/// Asymptotic interior sensor count `3 V / r^3` of the tessellation
/// deployment; boundary faces make the exact enumeration exceed it.
pub fn sensor_budget_formula(v_foi: f64, r: f64) -> Result<f64> {
    if !(v_foi > 0.0) {
        return Err(Error::non_positive("V_FoI", v_foi));
    }
    if !(r > 0.0) {
        return Err(Error::non_positive("sensing radius", r));
    }
    Ok(3.0 * v_foi / (r * r * r))
}

/// Monte Carlo per-k coverage over the union of occupied cells, counting all
/// plan sensors (neighbor-cell sensors included).
///
/// Points are drawn uniformly over the union by picking an occupied cell
/// (equal volumes) and then a uniform point inside it; for a single-cell grid
/// the cell pick is skipped, so the stream matches
/// [`crate::mc_oracle::sample_coverage_cube`] draw for draw.
pub fn coverage_stats(
    plan: &DeploymentPlan,
    foi: &FoiGrid,
    sample_plan: &SamplePlan,
) -> Result<CoverageReport> {
    if sample_plan.n_samples == 0 || sample_plan.stream_count == 0 {
        return Err(Error::non_positive("sample plan", 0.0));
    }
    let cells: Vec<[i64; 3]> = foi.cells().collect();
    let size = foi.cell_size();
    let r = plan.sensing_radius;
    let r2 = r * r;

    // Sensors farther than r from a cell's box cannot cover any of its
    // points; precompute the per-cell candidate lists.
    let candidates: Vec<Vec<usize>> = cells
        .iter()
        .map(|&idx| {
            let min = foi.cell_min(idx);
            let cell = crate::geometry::CubeCell {
                min_corner: min,
                side: size,
            };
            plan.sensor_positions
                .iter()
                .enumerate()
                .filter(|(_, p)| cell.distance_to(**p) <= r)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();

    let k_max = plan.sensor_count();
    let n_cells = cells.len();
    let counts = tally_substreams(sample_plan, k_max, |rng| {
        let cell_idx = if n_cells > 1 {
            ((rng.gen::<f64>() * n_cells as f64) as usize).min(n_cells - 1)
        } else {
            0
        };
        let min = foi.cell_min(cells[cell_idx]);
        let p = Vec3::new(
            min.x + rng.gen::<f64>() * size,
            min.y + rng.gen::<f64>() * size,
            min.z + rng.gen::<f64>() * size,
        );
        candidates[cell_idx]
            .iter()
            .filter(|&&s| plan.sensor_positions[s].distance_squared(p) <= r2)
            .count()
    });
    Ok(CoverageReport::from_counts(
        counts,
        sample_plan,
        format!("deployment-plan({} sensors)", plan.sensor_count()),
    ))
}

/// Which coverage body a spatial density refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageModel {
    Sixsoid,
    ReuleauxTetrahedron,
}

/// Minimum sensors per unit volume for full k-coverage: `k` divided by the
/// coverage body's volume at sensing radius `r`.
pub fn spatial_density(model: CoverageModel, k: u32, r: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::non_positive("k", 0.0));
    }
    if !(r > 0.0) {
        return Err(Error::non_positive("sensing radius", r));
    }
    let volume = match model {
        CoverageModel::Sixsoid => sixsoid_volume_constant() * r * r * r,
        CoverageModel::ReuleauxTetrahedron => {
            let r0 = r / REULEAUX_RADIUS_RATIO;
            REULEAUX_VOLUME_COEFF * r0 * r0 * r0
        }
    };
    Ok(k as f64 / volume)
}

/// One row of the volume comparison table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ComparisonRow {
    pub r: f64,
    pub reuleaux_volume: f64,
    pub sixsoid_volume: f64,
}

/// Per-radius volumes of both coverage bodies.
pub fn volume_table(radii: &[f64]) -> Result<Vec<ComparisonRow>> {
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(Error::non_positive("radius", r));
            }
            let r0 = r / REULEAUX_RADIUS_RATIO;
            Ok(ComparisonRow {
                r,
                reuleaux_volume: REULEAUX_VOLUME_COEFF * r0 * r0 * r0,
                sixsoid_volume: sixsoid_volume_constant() * r * r * r,
            })
        })
        .collect()
}

/// One row of the spatial density comparison table.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityRow {
    pub k: u32,
    pub r: f64,
    pub reuleaux_density: f64,
    pub sixsoid_density: f64,
}

/// Spatial densities of both models for `k = 4..=k_max` at radius `r`.
pub fn density_table(r: f64, k_max: u32) -> Result<Vec<DensityRow>> {
    if k_max < 4 {
        return Err(Error::out_of_range("k_max", k_max as f64, 4.0, f64::INFINITY));
    }
    (4..=k_max)
        .map(|k| {
            Ok(DensityRow {
                k,
                r,
                reuleaux_density: spatial_density(CoverageModel::ReuleauxTetrahedron, k, r)?,
                sixsoid_density: spatial_density(CoverageModel::Sixsoid, k, r)?,
            })
        })
        .collect()
}

/// Exact sensor counts per full `n^3` grid: `3 n^3 + 3 n^2`.
pub fn full_grid_sensor_count(n: u64) -> u64 {
    3 * n * n * n + 3 * n * n
}
