//! Elementary 3D types, the six-sphere cube construction and exact
//! per-point coverage counting.
//!
//! Coverage uses closed balls: a point at distance exactly `r` from a sensor
//! still counts as covered. Boundary sets have measure zero, so volumes are
//! unaffected, and the convention makes the face centers themselves 6-covered.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or displacement in 3D space (length units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance_squared(self, other: Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(self, other: Vec3) -> f64 {
        self.distance_squared(other).sqrt()
    }
}

/// A sensing sphere: everything within `radius` of `center` is covered.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::non_positive("sphere radius", radius));
        }
        Ok(Self { center, radius })
    }

    /// Closed-ball containment test.
    pub fn contains(&self, p: Vec3) -> bool {
        p.distance_squared(self.center) <= self.radius * self.radius
    }
}

/// An axis-aligned cube cell of side `side` with its lowest corner at
/// `min_corner`. The slicing axis used throughout the crate is `x`, with the
/// "top" face of the cube at the cell's minimum x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeCell {
    pub min_corner: Vec3,
    pub side: f64,
}

impl CubeCell {
    pub fn new(min_corner: Vec3, side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::non_positive("cube side", side));
        }
        Ok(Self { min_corner, side })
    }

    /// Unit cube `[0, 1]^3`.
    pub fn unit() -> Self {
        Self {
            min_corner: Vec3::new(0.0, 0.0, 0.0),
            side: 1.0,
        }
    }

    pub fn center(&self) -> Vec3 {
        let h = self.side / 2.0;
        Vec3::new(
            self.min_corner.x + h,
            self.min_corner.y + h,
            self.min_corner.z + h,
        )
    }

    /// The six face centers, each at distance `side / 2` from the cube center
    /// along one axis. Order: -x, +x, -y, +y, -z, +z.
    pub fn face_centers(&self) -> [Vec3; 6] {
        let r = self.side;
        let h = r / 2.0;
        let m = self.min_corner;
        [
            Vec3::new(m.x, m.y + h, m.z + h),
            Vec3::new(m.x + r, m.y + h, m.z + h),
            Vec3::new(m.x + h, m.y, m.z + h),
            Vec3::new(m.x + h, m.y + r, m.z + h),
            Vec3::new(m.x + h, m.y + h, m.z),
            Vec3::new(m.x + h, m.y + h, m.z + r),
        ]
    }

    /// Does the closed cell contain `p`?
    pub fn contains(&self, p: Vec3) -> bool {
        let m = self.min_corner;
        let r = self.side;
        p.x >= m.x
            && p.x <= m.x + r
            && p.y >= m.y
            && p.y <= m.y + r
            && p.z >= m.z
            && p.z <= m.z + r
    }

    /// Euclidean distance from `p` to the closed cell (0 inside).
    pub fn distance_to(&self, p: Vec3) -> f64 {
        let gap = |v: f64, lo: f64, hi: f64| (lo - v).max(0.0).max(v - hi);
        let r = self.side;
        let dx = gap(p.x, self.min_corner.x, self.min_corner.x + r);
        let dy = gap(p.y, self.min_corner.y, self.min_corner.y + r);
        let dz = gap(p.z, self.min_corner.z, self.min_corner.z + r);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Which sensors take part in coverage counting for a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArrangementMode {
    /// Only the cell's own six face-center spheres. This is the arrangement
    /// behind all single-cube statements and the default for reproduction.
    SingleCube,
    /// The six own spheres plus every face-center sphere of adjacent cells in
    /// the cube tiling that reaches into the cell (sphere center strictly
    /// closer than one radius to the cell's bounding box).
    TilingNeighborhood,
}

/// A finite set of equal-radius sensing spheres used as the coverage-counting
/// substrate.
#[derive(Debug, Clone)]
pub struct SensorArrangement {
    spheres: Vec<Sphere>,
    mode: ArrangementMode,
}

impl SensorArrangement {
    /// The six spheres of radius `cell.side` on the face centers of `cell`.
    pub fn single_cube(cell: &CubeCell) -> Self {
        let spheres = cell
            .face_centers()
            .into_iter()
            .map(|c| Sphere {
                center: c,
                radius: cell.side,
            })
            .collect();
        Self {
            spheres,
            mode: ArrangementMode::SingleCube,
        }
    }

    /// The six own spheres plus all face-center spheres of adjacent tiling
    /// cells whose center lies strictly within one radius of the cell's box.
    ///
    /// Face centers sit on the half-integer lattice (in units of `side / 2`),
    /// which makes exact deduplication possible: a face shared by two cells
    /// contributes one sphere.
    pub fn tiling_neighborhood(cell: &CubeCell) -> Self {
        let r = cell.side;
        let mut keys = std::collections::BTreeSet::new();
        for di in -2i64..=2 {
            for dj in -2i64..=2 {
                for dk in -2i64..=2 {
                    // Face centers of the neighbor cell offset by (di, dj, dk),
                    // in half-side units relative to `cell.min_corner`.
                    let (i, j, k) = (2 * di, 2 * dj, 2 * dk);
                    let faces = [
                        [i, j + 1, k + 1],
                        [i + 2, j + 1, k + 1],
                        [i + 1, j, k + 1],
                        [i + 1, j + 2, k + 1],
                        [i + 1, j + 1, k],
                        [i + 1, j + 1, k + 2],
                    ];
                    let own = di == 0 && dj == 0 && dk == 0;
                    for f in faces {
                        if own || Self::half_unit_reaches(cell, f) {
                            keys.insert(f);
                        }
                    }
                }
            }
        }
        let h = r / 2.0;
        let m = cell.min_corner;
        let spheres = keys
            .into_iter()
            .map(|[i, j, k]| Sphere {
                center: Vec3::new(
                    m.x + i as f64 * h,
                    m.y + j as f64 * h,
                    m.z + k as f64 * h,
                ),
                radius: r,
            })
            .collect();
        Self {
            spheres,
            mode: ArrangementMode::TilingNeighborhood,
        }
    }

    fn half_unit_reaches(cell: &CubeCell, key: [i64; 3]) -> bool {
        let h = cell.side / 2.0;
        let m = cell.min_corner;
        let p = Vec3::new(
            m.x + key[0] as f64 * h,
            m.y + key[1] as f64 * h,
            m.z + key[2] as f64 * h,
        );
        cell.distance_to(p) < cell.side
    }

    pub fn for_mode(cell: &CubeCell, mode: ArrangementMode) -> Self {
        match mode {
            ArrangementMode::SingleCube => Self::single_cube(cell),
            ArrangementMode::TilingNeighborhood => Self::tiling_neighborhood(cell),
        }
    }

    /// Build an arrangement from an explicit sphere list (deployment plans).
    pub fn from_spheres(spheres: Vec<Sphere>, mode: ArrangementMode) -> Self {
        Self { spheres, mode }
    }

    pub fn spheres(&self) -> &[Sphere] {
        &self.spheres
    }

    pub fn mode(&self) -> ArrangementMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.spheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spheres.is_empty()
    }

    /// Number of spheres whose closed ball contains `p`.
    pub fn coverage_count(&self, p: Vec3) -> usize {
        self.spheres.iter().filter(|s| s.contains(p)).count()
    }
}

/// Number of spheres of `arrangement` covering `p` (closed balls).
pub fn coverage_count(p: Vec3, arrangement: &SensorArrangement) -> usize {
    arrangement.coverage_count(p)
}

/// Is `p` inside the convex body cut out by all six face-center spheres of
/// `cell` (the region of the cell that its own sensors 6-cover)?
pub fn sixsoid_contains(p: Vec3, cell: &CubeCell) -> bool {
    let r2 = cell.side * cell.side;
    cell.face_centers()
        .into_iter()
        .all(|c| p.distance_squared(c) <= r2)
}
