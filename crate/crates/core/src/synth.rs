//! Seeded Gaussian functional data with exponential covariance, and the six
//! two-group experiment presets.
//!
//! Curves are `μ(t_j) + (L z)_j` where `L` is the Cholesky factor of
//! `C_jk = α·exp(−β·|t_j − t_k|)` and `z` is a vector of independent
//! standard normals. If `C` is numerically singular the factorization is
//! retried with `jitter·I` added, for jitter `1e-10·α`, `1e-8·α`, `1e-6·α`.

use std::f64::consts::PI;
use std::fmt;

use rand_distr::{Distribution, StandardNormal};

use crate::fdata::{FunctionalDataset, Grid, Group};
use crate::linalg::cholesky;
use crate::rng;
use crate::{Error, Result};

/// Amplitude `α` and dispersion `β` of an exponential covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceSpec {
    alpha: f64,
    beta: f64,
}

impl CovarianceSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidInput(format!("amplitude {alpha} must be positive")));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("dispersion {beta} must be non-negative")));
        }
        Ok(CovarianceSpec { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn at(&self, s: f64, t: f64) -> f64 {
        self.alpha * (-self.beta * (s - t).abs()).exp()
    }
}

/// Row-major `m×m` covariance matrix on `grid`.
pub fn exp_cov_matrix(grid: &Grid, spec: &CovarianceSpec) -> Vec<f64> {
    let t = grid.points();
    t.iter()
        .flat_map(|&s| t.iter().map(move |&u| spec.at(s, u)))
        .collect()
}

const JITTER_STEPS: [f64; 4] = [0.0, 1e-10, 1e-8, 1e-6];

/// Cholesky factor of `cov`, escalating the diagonal jitter as needed.
/// Returns the factor and the jitter that was added.
pub fn factor_covariance(cov: &[f64], m: usize, alpha: f64) -> Result<(Vec<f64>, f64)> {
    for step in JITTER_STEPS {
        let jitter = step * alpha;
        let mut c = cov.to_vec();
        for j in 0..m {
            c[j * m + j] += jitter;
        }
        if let Some(l) = cholesky(&c, m) {
            return Ok((l, jitter));
        }
    }
    Err(Error::Numerical(format!(
        "covariance factorization failed with jitter up to {:e}",
        JITTER_STEPS[JITTER_STEPS.len() - 1] * alpha
    )))
}

/// Draw `n` curves from stream `stream` of `seed`. Normals are drawn curve
/// by curve, grid point by grid point.
fn gauss_curves(
    centerline: &dyn Fn(f64) -> f64,
    cov: &CovarianceSpec,
    n: usize,
    grid: &Grid,
    seed: u64,
    stream: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one curve".into()));
    }
    let m = grid.len();
    let (l, _) = factor_covariance(&exp_cov_matrix(grid, cov), m, cov.alpha)?;
    let mean: Vec<f64> = grid.points().iter().map(|&t| centerline(t)).collect();
    let mut rng = rng::seeded(seed, stream);
    let mut values = Vec::with_capacity(n * m);
    let mut z = vec![0.0; m];
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = StandardNormal.sample(&mut rng));
        for j in 0..m {
            let noise: f64 = (0..=j).map(|k| l[j * m + k] * z[k]).sum();
            values.push(mean[j] + noise);
        }
    }
    Ok(values)
}

/// `n` Gaussian curves around `centerline`, all labelled [`Group::A`].
pub fn gauss_fdata(
    centerline: &dyn Fn(f64) -> f64,
    cov: &CovarianceSpec,
    n: usize,
    grid: &Grid,
    seed: u64,
) -> Result<FunctionalDataset> {
    let values = gauss_curves(centerline, cov, n, grid, seed, rng::stream::GROUP_A)?;
    FunctionalDataset::new(grid.clone(), values, vec![Group::A; n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    SinPi,
    CosPi,
    Sin2Pi,
    Cos2Pi,
    Square,
}

/// A mean function `shape(t) + shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centerline {
    pub shape: Shape,
    pub shift: f64,
}

impl Centerline {
    pub const fn new(shape: Shape, shift: f64) -> Self {
        Centerline { shape, shift }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let base = match self.shape {
            Shape::SinPi => (PI * t).sin(),
            Shape::CosPi => (PI * t).cos(),
            Shape::Sin2Pi => (2.0 * PI * t).sin(),
            Shape::Cos2Pi => (2.0 * PI * t).cos(),
            Shape::Square => t * t,
        };
        base + self.shift
    }
}

impl fmt::Display for Centerline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = match self.shape {
            Shape::SinPi => "sin(pi t)",
            Shape::CosPi => "cos(pi t)",
            Shape::Sin2Pi => "sin(2 pi t)",
            Shape::Cos2Pi => "cos(2 pi t)",
            Shape::Square => "t^2",
        };
        let s = self.shift;
        if s == 0.0 {
            write!(f, "{base}")
        } else if s < 0.0 {
            write!(f, "{base} - {}", -s)
        } else {
            write!(f, "{base} + {s}")
        }
    }
}

/// Two-group simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub centerline_a: Centerline,
    pub centerline_b: Centerline,
    pub cov_a: CovarianceSpec,
    pub cov_b: CovarianceSpec,
    pub n_per_group: usize,
    pub m: usize,
}

pub const DEFAULT_N_PER_GROUP: usize = 200;
pub const DEFAULT_GRID_POINTS: usize = 100;
pub const EXPERIMENT_IDS: [u32; 6] = [1, 2, 3, 4, 5, 6];

/// Preset `id` in `1..=6`: 200 curves per group on 100 equispaced points
/// of `[0, 1]`.
pub fn experiment_preset(id: u32) -> Result<ExperimentSpec> {
    use Shape::*;
    let c = |shape, shift| Centerline::new(shape, shift);
    let (a, b, (alpha_a, beta_a), (alpha_b, beta_b)) = match id {
        1 => (c(SinPi, 0.0), c(SinPi, 0.0), (0.2, 0.3), (0.2, 0.3)),
        2 => (c(SinPi, 0.0), c(CosPi, 0.0), (0.2, 0.3), (0.2, 0.3)),
        3 => (c(SinPi, -2.0), c(SinPi, 0.0), (0.2, 0.3), (0.2, 0.3)),
        4 => (c(Sin2Pi, 0.0), c(Cos2Pi, 0.0), (0.2, 0.3), (0.7, 0.3)),
        5 => (c(Sin2Pi, 0.0), c(Cos2Pi, 0.0), (0.2, 0.3), (0.2, 0.9)),
        6 => (c(Square, -1.0), c(Square, 0.0), (0.2, 0.3), (0.2, 0.9)),
        _ => {
            return Err(Error::InvalidInput(format!(
                "experiment id {id} out of range 1..=6"
            )))
        }
    };
    Ok(ExperimentSpec {
        centerline_a: a,
        centerline_b: b,
        cov_a: CovarianceSpec::new(alpha_a, beta_a)?,
        cov_b: CovarianceSpec::new(alpha_b, beta_b)?,
        n_per_group: DEFAULT_N_PER_GROUP,
        m: DEFAULT_GRID_POINTS,
    })
}

impl ExperimentSpec {
    pub fn with_size(mut self, n_per_group: usize, m: usize) -> Self {
        self.n_per_group = n_per_group;
        self.m = m;
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::uniform(0.0, 1.0, self.m)
    }
}

/// Labelled dataset: group A rows first, then group B. Each group draws
/// from its own stream of `seed`. Rows carry identifiers `a0000…`,
/// `b0000…`.
pub fn generate_experiment(spec: &ExperimentSpec, seed: u64) -> Result<FunctionalDataset> {
    if spec.n_per_group < 2 || spec.m < 2 {
        return Err(Error::InvalidInput(format!(
            "need n_per_group >= 2 and m >= 2, got {} and {}",
            spec.n_per_group, spec.m
        )));
    }
    let grid = spec.grid()?;
    let n = spec.n_per_group;
    let ca = spec.centerline_a;
    let cb = spec.centerline_b;
    let mut values = gauss_curves(&|t| ca.eval(t), &spec.cov_a, n, &grid, seed, rng::stream::GROUP_A)?;
    values.extend(gauss_curves(&|t| cb.eval(t), &spec.cov_b, n, &grid, seed, rng::stream::GROUP_B)?);
    let mut labels = vec![Group::A; n];
    labels.extend(vec![Group::B; n]);
    let ids = (0..n)
        .map(|i| format!("a{i:04}"))
        .chain((0..n).map(|i| format!("b{i:04}")))
        .collect();
    FunctionalDataset::new(grid, values, labels)?.with_ids(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_entries() {
        let grid = Grid::new(vec![0.0, 1.0, 3.0]).unwrap();
        let c = exp_cov_matrix(&grid, &CovarianceSpec::new(0.2, 0.3).unwrap());
        assert_eq!(c[0], 0.2);
        assert_eq!(c[4], 0.2);
        assert!((c[1] - 0.148_163_644_8).abs() < 1e-9);
        assert_eq!(c[1], c[3]);
        assert_eq!(c[2], c[6]);

        let flat = exp_cov_matrix(&grid, &CovarianceSpec::new(0.5, 0.0).unwrap());
        assert!(flat.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn factorization_residual_small() {
        for (alpha, beta, m) in [(0.2, 0.3, 100), (0.7, 0.9, 50), (0.2, 0.0, 30), (1.0, 1e-9, 100)] {
            let grid = Grid::uniform(0.0, 1.0, m).unwrap();
            let cov = CovarianceSpec::new(alpha, beta).unwrap();
            let c = exp_cov_matrix(&grid, &cov);
            let (l, _) = factor_covariance(&c, m, alpha).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..m {
                for j in 0..m {
                    let v: f64 = (0..m).map(|k| l[i * m + k] * l[j * m + k]).sum();
                    worst = worst.max((v - c[i * m + j]).abs());
                }
            }
            assert!(worst <= 1e-8 * alpha, "alpha {alpha} beta {beta}: {worst:e}");
        }
    }

    #[test]
    fn tiny_amplitude_collapses_to_centerline() {
        let grid = Grid::uniform(0.0, 1.0, 20).unwrap();
        let cov = CovarianceSpec::new(1e-300, 0.3).unwrap();
        let ds = gauss_fdata(&|t| (PI * t).sin(), &cov, 5, &grid, 1).unwrap();
        for row in ds.rows() {
            for (v, &t) in row.iter().zip(grid.points()) {
                assert!((v - (PI * t).sin()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn presets() {
        let e3 = experiment_preset(3).unwrap();
        for t in [0.0, 0.3, 0.77, 1.0] {
            assert!((e3.centerline_b.eval(t) - e3.centerline_a.eval(t) - 2.0).abs() < 1e-15);
        }
        assert_eq!(experiment_preset(4).unwrap().cov_b.alpha(), 0.7);
        assert_eq!(experiment_preset(5).unwrap().cov_b.beta(), 0.9);
        assert!(experiment_preset(0).is_err());
        assert!(experiment_preset(7).is_err());
        assert_eq!(experiment_preset(6).unwrap().centerline_a.to_string(), "t^2 - 1");
    }

    #[test]
    fn experiment_shape_and_determinism() {
        let spec = experiment_preset(1).unwrap();
        let a = generate_experiment(&spec, 11).unwrap();
        assert_eq!(a.n_curves(), 400);
        assert_eq!(a.n_points(), 100);
        assert_eq!(a.count(Group::A), 200);
        assert_eq!(a.labels()[0], Group::A);
        assert_eq!(a.labels()[399], Group::B);
        let b = generate_experiment(&spec, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_experiment(&spec, 12).unwrap();
        assert_ne!(a.values(), c.values());
        // same centerline and covariance, independent streams
        assert_ne!(a.row(0), a.row(200));
    }

    #[test]
    fn invalid_covariance() {
        assert!(CovarianceSpec::new(0.0, 0.3).is_err());
        assert!(CovarianceSpec::new(0.2, -1.0).is_err());
    }
}
