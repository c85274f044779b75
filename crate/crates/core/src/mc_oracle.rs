//! Independent brute-force verification by seeded uniform sampling.
//!
//! Sampling is split over independent counter-based substreams so runs are
//! bit-reproducible for a fixed `(n_samples, seed, stream_count)` regardless
//! of how many threads execute them: substream `s` of a plan is the ChaCha
//! stream `s` of the seed, per-substream tallies are integers, and the merge
//! is an ordered sum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cross_section::{slice_circles, slice_coverage_count};
use crate::error::{Error, Result};
use crate::geometry::{ArrangementMode, CubeCell, SensorArrangement, Vec3};

/// How many uniform points to draw, from which seed, over how many
/// independent substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplePlan {
    pub n_samples: u64,
    pub seed: u64,
    pub stream_count: u32,
}

impl SamplePlan {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            stream_count: 64,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::non_positive("n_samples", 0.0));
        }
        if self.stream_count == 0 {
            return Err(Error::non_positive("stream_count", 0.0));
        }
        Ok(())
    }

    fn stream_len(&self, stream: u32) -> u64 {
        let base = self.n_samples / self.stream_count as u64;
        let extra = self.n_samples % self.stream_count as u64;
        base + u64::from((stream as u64) < extra)
    }
}

/// Tally points drawn per substream, classified into `0..=k_max` by
/// `sample_one`, merged in substream order.
pub(crate) fn tally_substreams<F>(plan: &SamplePlan, k_max: usize, sample_one: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng) -> usize + Sync,
{
    let per_stream: Vec<Vec<u64>> = (0..plan.stream_count)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
            rng.set_stream(u64::from(s));
            let mut tally = vec![0u64; k_max + 1];
            for _ in 0..plan.stream_len(s) {
                let k = sample_one(&mut rng).min(k_max);
                tally[k] += 1;
            }
            tally
        })
        .collect();

    let mut total = vec![0u64; k_max + 1];
    for t in per_stream {
        for (acc, v) in total.iter_mut().zip(t) {
            *acc += v;
        }
    }
    total
}

/// Per-coverage-level tallies of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CoverageReport {
    /// `exact_counts[k]` = samples covered by exactly `k` sensors.
    pub exact_counts: Vec<u64>,
    pub n_samples: u64,
    pub seed: u64,
    pub stream_count: u32,
    /// Which arrangement was sampled (e.g. "single-cube").
    pub arrangement: String,
}

impl CoverageReport {
    pub(crate) fn from_counts(counts: Vec<u64>, plan: &SamplePlan, arrangement: String) -> Self {
        // Trim trailing empty levels but keep at least k = 0..=6.
        let mut counts = counts;
        while counts.len() > 7 && counts.last() == Some(&0) {
            counts.pop();
        }
        Self {
            exact_counts: counts,
            n_samples: plan.n_samples,
            seed: plan.seed,
            stream_count: plan.stream_count,
            arrangement,
        }
    }

    /// Largest coverage level the report resolves.
    pub fn max_k(&self) -> usize {
        self.exact_counts.len() - 1
    }

    /// Smallest coverage level observed among the samples.
    pub fn min_observed(&self) -> usize {
        self.exact_counts
            .iter()
            .position(|&c| c > 0)
            .unwrap_or(self.exact_counts.len())
    }

    pub fn exact_fraction(&self, k: usize) -> f64 {
        self.exact_counts.get(k).copied().unwrap_or(0) as f64 / self.n_samples as f64
    }

    pub fn at_least_count(&self, k: usize) -> u64 {
        self.exact_counts.iter().skip(k).sum()
    }

    pub fn at_least_fraction(&self, k: usize) -> f64 {
        self.at_least_count(k) as f64 / self.n_samples as f64
    }

    /// Binomial standard error of the exact-k fraction.
    pub fn exact_std_error(&self, k: usize) -> f64 {
        let p = self.exact_fraction(k);
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }

    /// Binomial standard error of the at-least-k fraction.
    pub fn at_least_std_error(&self, k: usize) -> f64 {
        let p = self.at_least_fraction(k);
        (p * (1.0 - p) / self.n_samples as f64).sqrt()
    }
}

/// Draw uniform points in the cube `[0, side]^3` and count how many sensors
/// of the chosen arrangement cover each.
pub fn sample_coverage_cube(
    side: f64,
    plan: &SamplePlan,
    mode: ArrangementMode,
) -> Result<CoverageReport> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::non_positive("cube side", side));
    }
    plan.validate()?;
    let cell = CubeCell::new(Vec3::new(0.0, 0.0, 0.0), side)?;
    let arrangement = SensorArrangement::for_mode(&cell, mode);
    let spheres = arrangement.spheres();
    let counts = tally_substreams(plan, spheres.len(), |rng| {
        let p = Vec3::new(
            rng.gen::<f64>() * side,
            rng.gen::<f64>() * side,
            rng.gen::<f64>() * side,
        );
        spheres.iter().filter(|s| s.contains(p)).count()
    });
    let label = match mode {
        ArrangementMode::SingleCube => "single-cube",
        ArrangementMode::TilingNeighborhood => "tiling-neighborhood",
    };
    Ok(CoverageReport::from_counts(counts, plan, label.to_string()))
}

/// Monte Carlo estimate of the per-k areas of one slice of the cube.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SliceAreaReport {
    pub exact_counts: [u64; 7],
    pub n_samples: u64,
    pub seed: u64,
    pub stream_count: u32,
    pub x: f64,
    pub side: f64,
}

impl SliceAreaReport {
    pub fn exact_area(&self, k: usize) -> f64 {
        let frac = self.exact_counts.get(k).copied().unwrap_or(0) as f64 / self.n_samples as f64;
        frac * self.side * self.side
    }

    pub fn at_least_fraction(&self, k: usize) -> f64 {
        let c: u64 = self.exact_counts.iter().skip(k).sum();
        c as f64 / self.n_samples as f64
    }

    pub fn at_least_area(&self, k: usize) -> f64 {
        self.at_least_fraction(k) * self.side * self.side
    }

    /// Standard error of the at-least-k area estimate.
    pub fn at_least_std_error(&self, k: usize) -> f64 {
        let p = self.at_least_fraction(k);
        (p * (1.0 - p) / self.n_samples as f64).sqrt() * self.side * self.side
    }

    /// Signed deviation of an analytic area from this estimate, in standard
    /// errors. `infinity` when the standard error is zero but the values
    /// disagree.
    pub fn z_score(&self, k: usize, analytic_area: f64) -> f64 {
        let se = self.at_least_std_error(k);
        let diff = analytic_area - self.at_least_area(k);
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY * diff.signum()
            }
        } else {
            diff / se
        }
    }
}

/// Draw uniform points in the `side x side` slice square at depth `x` and
/// classify them by how many of the six slice circles contain them.
pub fn sample_slice_area(x: f64, side: f64, plan: &SamplePlan) -> Result<SliceAreaReport> {
    plan.validate()?;
    let circles = slice_circles(x, side)?;
    let counts = tally_substreams(plan, 6, |rng| {
        let p = (rng.gen::<f64>() * side, rng.gen::<f64>() * side);
        slice_coverage_count(p, &circles)
    });
    let mut exact = [0u64; 7];
    exact.copy_from_slice(&counts);
    Ok(SliceAreaReport {
        exact_counts: exact,
        n_samples: plan.n_samples,
        seed: plan.seed,
        stream_count: plan.stream_count,
        x,
        side,
    })
}
