//! Functional depths for the DD-plot benchmark.
//!
//! * Fraiman–Muniz: integrated univariate depth `1 - |1/2 - F_t(x(t))|`,
//!   normalized by the interval length so values lie in `[1/2, 1]`.
//! * h-mode: `(1/N) Σ K(‖x - x_i‖ / h)` with a Gaussian kernel, trapezoid
//!   L² distance and `h` the `q`-quantile of the nonzero pairwise
//!   reference distances.
//! * Random projection: mean univariate halfspace depth over `R` random
//!   unit directions (white Gaussian noise on the grid, normalized in the
//!   trapezoid L² norm).

use std::fmt;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::extremality::{IndexVector, SortedColumns};
use crate::fdata::{check_grid, FunctionalDataset, Grid};
use crate::rng;
use crate::stats::quantile;
use crate::{Error, Result};

pub const DEFAULT_HMODE_QUANTILE: f64 = 0.15;
pub const DEFAULT_PROJECTIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthKind {
    FraimanMuniz,
    HMode { quantile: f64 },
    RandomProjection { projections: usize, seed: u64 },
}

impl DepthKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DepthKind::FraimanMuniz => Ok(()),
            DepthKind::HMode { quantile } if quantile > 0.0 && quantile < 1.0 => Ok(()),
            DepthKind::HMode { quantile } => Err(Error::InvalidInput(format!(
                "h-mode quantile {quantile} not in (0, 1)"
            ))),
            DepthKind::RandomProjection { projections, .. } if projections >= 1 => Ok(()),
            DepthKind::RandomProjection { .. } => {
                Err(Error::InvalidInput("need at least one projection".into()))
            }
        }
    }
}

impl fmt::Display for DepthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthKind::FraimanMuniz => f.write_str("fm"),
            DepthKind::HMode { .. } => f.write_str("hm"),
            DepthKind::RandomProjection { .. } => f.write_str("rp"),
        }
    }
}

fn check_reference(eval: &FunctionalDataset, reference: &FunctionalDataset) -> Result<()> {
    check_grid(reference.grid(), eval.grid())
}

/// Fraiman–Muniz depth of each curve of `eval` within `reference`.
pub fn fm_depth(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
) -> Result<IndexVector<DepthKind>> {
    check_reference(eval, reference)?;
    let sorted = SortedColumns::new(reference);
    let grid = reference.grid();
    let n = sorted.len() as f64;
    let values = (0..eval.n_curves())
        .into_par_iter()
        .map(|i| {
            let integral: f64 = eval
                .row(i)
                .iter()
                .zip(grid.weights())
                .enumerate()
                .map(|(j, (&y, &w))| {
                    let cdf = sorted.count_le(j, y) as f64 / n;
                    w * (1.0 - (0.5 - cdf).abs())
                })
                .sum();
            integral / grid.measure()
        })
        .collect();
    Ok(IndexVector {
        kind: DepthKind::FraimanMuniz,
        values,
        reference_size: reference.n_curves(),
    })
}

/// Trapezoid L² distance between two curves on `grid`.
pub fn l2_distance(grid: &Grid, x: &[f64], y: &[f64]) -> f64 {
    grid.weights()
        .iter()
        .zip(x.iter().zip(y))
        .map(|(&w, (&a, &b))| w * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// `q`-quantile of the nonzero pairwise distances within `reference`.
pub fn hmode_bandwidth(reference: &FunctionalDataset, q: f64) -> Result<f64> {
    DepthKind::HMode { quantile: q }.validate()?;
    let grid = reference.grid();
    let n = reference.n_curves();
    let mut distances: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |k| (i, k)))
        .map(|(i, k)| l2_distance(grid, reference.row(i), reference.row(k)))
        .filter(|&d| d > 0.0)
        .collect();
    if distances.is_empty() {
        return Err(Error::InvalidInput(
            "h-mode bandwidth undefined: all pairwise distances are zero".into(),
        ));
    }
    distances.sort_unstable_by(f64::total_cmp);
    Ok(quantile(&distances, q))
}

/// h-mode depth with an explicit bandwidth.
pub fn hmode_depth_with_bandwidth(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    bandwidth: f64,
) -> Result<Vec<f64>> {
    check_reference(eval, reference)?;
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidInput(format!("bandwidth {bandwidth} must be positive")));
    }
    let grid = reference.grid();
    let n = reference.n_curves() as f64;
    Ok((0..eval.n_curves())
        .into_par_iter()
        .map(|i| {
            let x = eval.row(i);
            let total: f64 = reference
                .rows()
                .map(|r| {
                    let u = l2_distance(grid, x, r) / bandwidth;
                    (-0.5 * u * u).exp()
                })
                .sum();
            total / n
        })
        .collect())
}

/// Empirical h-mode depth; bandwidth from the `q`-quantile rule.
pub fn hmode_depth(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    q: f64,
) -> Result<IndexVector<DepthKind>> {
    let h = hmode_bandwidth(reference, q)?;
    Ok(IndexVector {
        kind: DepthKind::HMode { quantile: q },
        values: hmode_depth_with_bandwidth(eval, reference, h)?,
        reference_size: reference.n_curves(),
    })
}

/// The `count` projection directions for `seed`, each of unit trapezoid
/// L² norm. Draws are taken direction by direction, grid point by grid
/// point, from the [`rng::stream::PROJECTIONS`] stream.
pub fn projection_directions(grid: &Grid, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::seeded(seed, rng::stream::PROJECTIONS);
    (0..count)
        .map(|_| {
            let mut a: Vec<f64> = (0..grid.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = grid
                .weights()
                .iter()
                .zip(&a)
                .map(|(&w, &v)| w * v * v)
                .sum::<f64>()
                .sqrt();
            a.iter_mut().for_each(|v| *v /= norm);
            a
        })
        .collect()
}

/// Trapezoid inner product `Σ w_j x_j a_j`, accumulated left to right.
pub fn project(grid: &Grid, x: &[f64], direction: &[f64]) -> f64 {
    grid.weights()
        .iter()
        .zip(x.iter().zip(direction))
        .map(|(&w, (&xj, &aj))| w * xj * aj)
        .sum()
}

/// Random-projection depth.
pub fn rp_depth(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    projections: usize,
    seed: u64,
) -> Result<IndexVector<DepthKind>> {
    check_reference(eval, reference)?;
    let kind = DepthKind::RandomProjection { projections, seed };
    kind.validate()?;
    let grid = reference.grid();
    let directions = projection_directions(grid, projections, seed);
    let sorted: Vec<Vec<f64>> = directions
        .par_iter()
        .map(|a| {
            let mut p: Vec<f64> = reference.rows().map(|r| project(grid, r, a)).collect();
            p.sort_unstable_by(f64::total_cmp);
            p
        })
        .collect();
    let n = reference.n_curves();
    let values = (0..eval.n_curves())
        .into_par_iter()
        .map(|i| {
            let x = eval.row(i);
            let total: f64 = directions
                .iter()
                .zip(&sorted)
                .map(|(a, proj)| {
                    let y = project(grid, x, a);
                    let below = proj.partition_point(|&p| p <= y);
                    let above = n - proj.partition_point(|&p| p < y);
                    below.min(above) as f64 / n as f64
                })
                .sum();
            total / projections as f64
        })
        .collect();
    Ok(IndexVector {
        kind,
        values,
        reference_size: n,
    })
}

/// Dispatch on [`DepthKind`].
pub fn depth(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    kind: DepthKind,
) -> Result<IndexVector<DepthKind>> {
    kind.validate()?;
    match kind {
        DepthKind::FraimanMuniz => fm_depth(eval, reference),
        DepthKind::HMode { quantile } => hmode_depth(eval, reference, quantile),
        DepthKind::RandomProjection { projections, seed } => {
            rp_depth(eval, reference, projections, seed)
        }
    }
}
