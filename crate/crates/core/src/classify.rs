//! Two-class classifiers on embedded points: LDA, QDA, k-nearest
//! neighbours, RBF support vector machine (SMO) and random forest.
//!
//! kNN and SVM standardize each axis with the training mean and standard
//! deviation. LDA, QDA and the forest work on raw coordinates.
//!
//! Ties are resolved deterministically: equal discriminants and equal forest
//! votes go to [`Group::A`], kNN distance ties go to the smaller training
//! index, and a zero SVM decision value is [`Group::A`].

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::embed::Embedded2D;
use crate::fdata::Group;
use crate::linalg::Sym2;
use crate::rng;
use crate::stats::quantile;
use crate::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Lda,
    Qda,
    Knn,
    Svm,
    Rf,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Lda, Method::Qda, Method::Knn, Method::Svm, Method::Rf];

    pub fn name(self) -> &'static str {
        match self {
            Method::Lda => "lda",
            Method::Qda => "qda",
            Method::Knn => "knn",
            Method::Svm => "svm",
            Method::Rf => "rf",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown method {s:?} (expected lda, qda, knn, svm or rf)"
                ))
            })
    }
}

/// Hyperparameters. Each field only affects the methods that use it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    /// kNN neighbour count; must be odd.
    pub k: usize,
    /// SVM box constraint.
    pub c: f64,
    /// RBF width; `None` uses `1 / (2 median²)` of pairwise standardized
    /// training distances.
    pub gamma: Option<f64>,
    /// SMO stopping tolerance on the maximal KKT violation.
    pub tolerance: f64,
    /// SMO budget in passes; one pass is `n` pair updates.
    pub max_passes: usize,
    pub trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// QDA with one pooled covariance (equivalent to LDA).
    pub shared_covariance: bool,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            k: 5,
            c: 1.0,
            gamma: None,
            tolerance: 1e-3,
            max_passes: 10_000,
            trees: 200,
            max_depth: 12,
            min_leaf: 1,
            shared_covariance: false,
        }
    }
}

/// A fitted classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Lda(Lda),
    Qda(Qda),
    Knn(Knn),
    Svm(Svm),
    Rf(Forest),
}

impl TrainedModel {
    pub fn method(&self) -> Method {
        match self {
            TrainedModel::Lda(_) => Method::Lda,
            TrainedModel::Qda(_) => Method::Qda,
            TrainedModel::Knn(_) => Method::Knn,
            TrainedModel::Svm(_) => Method::Svm,
            TrainedModel::Rf(_) => Method::Rf,
        }
    }

    pub fn predict_one(&self, x: Point) -> Group {
        match self {
            TrainedModel::Lda(m) => m.predict_one(x),
            TrainedModel::Qda(m) => m.predict_one(x),
            TrainedModel::Knn(m) => m.predict_one(x),
            TrainedModel::Svm(m) => m.predict_one(x),
            TrainedModel::Rf(m) => m.predict_one(x),
        }
    }

    pub fn predict(&self, points: &[Point]) -> Vec<Group> {
        points.par_iter().map(|&x| self.predict_one(x)).collect()
    }
}

fn check_training(points: &[Point], labels: &[Group], min_per_class: usize) -> Result<[usize; 2]> {
    if points.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} points but {} labels",
            points.len(),
            labels.len()
        )));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite training coordinate".into()));
    }
    let counts = [
        labels.iter().filter(|&&g| g == Group::A).count(),
        labels.iter().filter(|&&g| g == Group::B).count(),
    ];
    if counts.contains(&0) {
        return Err(Error::InvalidInput("training data contains a single class".into()));
    }
    if let Some(g) = counts.iter().position(|&c| c < min_per_class) {
        return Err(Error::InvalidInput(format!(
            "class {g} has {} training points; need at least {min_per_class}",
            counts[g]
        )));
    }
    Ok(counts)
}

/// Fit `method` on labelled points.
pub fn train(
    points: &[Point],
    labels: &[Group],
    method: Method,
    hyper: &Hyper,
    seed: u64,
) -> Result<TrainedModel> {
    Ok(match method {
        Method::Lda => TrainedModel::Lda(Lda::fit(points, labels)?),
        Method::Qda => TrainedModel::Qda(Qda::fit(points, labels, hyper.shared_covariance)?),
        Method::Knn => TrainedModel::Knn(Knn::fit(points, labels, hyper.k)?),
        Method::Svm => TrainedModel::Svm(Svm::fit(points, labels, hyper)?),
        Method::Rf => TrainedModel::Rf(Forest::fit(points, labels, hyper, seed)?),
    })
}

pub fn train_embedded(
    embedded: &Embedded2D,
    method: Method,
    hyper: &Hyper,
    seed: u64,
) -> Result<TrainedModel> {
    train(&embedded.points, &embedded.labels, method, hyper, seed)
}

/// Fraction of positions where `predicted` matches `truth`.
pub fn accuracy(predicted: &[Group], truth: &[Group]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidInput("accuracy of an empty set".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

fn pick(d: [f64; 2]) -> Group {
    if d[1] > d[0] {
        Group::B
    } else {
        Group::A
    }
}

// ---------------------------------------------------------------------------
// Discriminant analysis

fn class_means(points: &[Point], labels: &[Group], counts: [usize; 2]) -> [Point; 2] {
    let mut sums = [[0.0; 2]; 2];
    for (p, g) in points.iter().zip(labels) {
        sums[g.index()][0] += p[0];
        sums[g.index()][1] += p[1];
    }
    [0, 1].map(|c| [sums[c][0] / counts[c] as f64, sums[c][1] / counts[c] as f64])
}

fn scatter(points: &[Point], labels: &[Group], class: Group, mean: Point) -> Sym2 {
    points
        .iter()
        .zip(labels)
        .filter(|(_, &g)| g == class)
        .fold(Sym2::ZERO, |acc, (p, _)| {
            let d = [p[0] - mean[0], p[1] - mean[1]];
            acc.add(&Sym2 {
                a: d[0] * d[0],
                b: d[0] * d[1],
                c: d[1] * d[1],
            })
        })
}

/// Add `1e-8 · trace/2` to the diagonal (an absolute `1e-12` when the
/// trace vanishes) and invert.
fn regularized_inverse(cov: Sym2) -> Result<(Sym2, Sym2)> {
    let mut ridge = 1e-8 * cov.trace() / 2.0;
    if ridge.is_nan() || ridge <= 0.0 {
        ridge = 1e-12;
    }
    let reg = cov.add_diagonal(ridge);
    let inv = reg
        .inverse()
        .ok_or_else(|| Error::Numerical("covariance is singular after regularization".into()))?;
    Ok((reg, inv))
}

fn log_priors(counts: [usize; 2]) -> [f64; 2] {
    let n = (counts[0] + counts[1]) as f64;
    counts.map(|c| (c as f64 / n).ln())
}

/// Linear discriminant analysis with a pooled covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Lda {
    pub means: [Point; 2],
    pub covariance: Sym2,
    pub inverse: Sym2,
    pub log_priors: [f64; 2],
}

impl Lda {
    pub fn fit(points: &[Point], labels: &[Group]) -> Result<Self> {
        let counts = check_training(points, labels, 3)?;
        let means = class_means(points, labels, counts);
        let pooled = scatter(points, labels, Group::A, means[0])
            .add(&scatter(points, labels, Group::B, means[1]))
            .scale(1.0 / (points.len() - 2) as f64);
        let (covariance, inverse) = regularized_inverse(pooled)?;
        Ok(Lda {
            means,
            covariance,
            inverse,
            log_priors: log_priors(counts),
        })
    }

    /// `xᵀΣ⁻¹μ_c − ½ μ_cᵀΣ⁻¹μ_c + log π_c`
    pub fn discriminants(&self, x: Point) -> [f64; 2] {
        [0, 1].map(|c| {
            let w = self.inverse.mul_vec(self.means[c]);
            x[0] * w[0] + x[1] * w[1] - 0.5 * self.inverse.quad(self.means[c]) + self.log_priors[c]
        })
    }

    pub fn predict_one(&self, x: Point) -> Group {
        pick(self.discriminants(x))
    }
}

/// Quadratic discriminant analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Qda {
    pub means: [Point; 2],
    pub covariances: [Sym2; 2],
    pub inverses: [Sym2; 2],
    pub log_dets: [f64; 2],
    pub log_priors: [f64; 2],
}

impl Qda {
    pub fn fit(points: &[Point], labels: &[Group], shared_covariance: bool) -> Result<Self> {
        let counts = check_training(points, labels, 3)?;
        let means = class_means(points, labels, counts);
        let scatters = [
            scatter(points, labels, Group::A, means[0]),
            scatter(points, labels, Group::B, means[1]),
        ];
        let raw = if shared_covariance {
            let pooled = scatters[0]
                .add(&scatters[1])
                .scale(1.0 / (points.len() - 2) as f64);
            [pooled, pooled]
        } else {
            [0, 1].map(|c| scatters[c].scale(1.0 / (counts[c] - 1) as f64))
        };
        let (c0, i0) = regularized_inverse(raw[0])?;
        let (c1, i1) = regularized_inverse(raw[1])?;
        Ok(Qda {
            means,
            covariances: [c0, c1],
            inverses: [i0, i1],
            log_dets: [c0.det().ln(), c1.det().ln()],
            log_priors: log_priors(counts),
        })
    }

    /// `−½ log|Σ_c| − ½ (x−μ_c)ᵀΣ_c⁻¹(x−μ_c) + log π_c`
    pub fn discriminants(&self, x: Point) -> [f64; 2] {
        [0, 1].map(|c| {
            let d = [x[0] - self.means[c][0], x[1] - self.means[c][1]];
            -0.5 * self.log_dets[c] - 0.5 * self.inverses[c].quad(d) + self.log_priors[c]
        })
    }

    pub fn predict_one(&self, x: Point) -> Group {
        pick(self.discriminants(x))
    }
}

// ---------------------------------------------------------------------------
// Standardization, kNN

/// Per-axis affine standardization fitted on training points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: Point,
    pub sd: Point,
}

impl Standardizer {
    pub fn fit(points: &[Point]) -> Self {
        let n = points.len() as f64;
        let mut mean = [0.0; 2];
        let mut sd = [0.0; 2];
        for a in 0..2 {
            mean[a] = points.iter().map(|p| p[a]).sum::<f64>() / n;
            let ss: f64 = points.iter().map(|p| (p[a] - mean[a]).powi(2)).sum();
            let s = (ss / n).sqrt();
            sd[a] = if s > 0.0 { s } else { 1.0 };
        }
        Standardizer { mean, sd }
    }

    pub fn apply(&self, x: Point) -> Point {
        [
            (x[0] - self.mean[0]) / self.sd[0],
            (x[1] - self.mean[1]) / self.sd[1],
        ]
    }
}

fn sq_dist(a: Point, b: Point) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    d0 * d0 + d1 * d1
}

/// k-nearest neighbours with Euclidean distance on standardized axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    pub scaler: Standardizer,
    pub points: Vec<Point>,
    pub labels: Vec<Group>,
    pub k: usize,
}

impl Knn {
    /// `k` must be odd; it is lowered to the largest odd number not above
    /// the training size.
    pub fn fit(points: &[Point], labels: &[Group], k: usize) -> Result<Self> {
        check_training(points, labels, 1)?;
        if k == 0 || k % 2 == 0 {
            return Err(Error::InvalidInput(format!("k = {k} must be odd")));
        }
        let n = points.len();
        let k = if k > n { n - (1 - n % 2) } else { k };
        let scaler = Standardizer::fit(points);
        Ok(Knn {
            scaler,
            points: points.iter().map(|&p| scaler.apply(p)).collect(),
            labels: labels.to_vec(),
            k,
        })
    }

    /// Indices of the `k` nearest training points, nearest first.
    pub fn neighbours(&self, x: Point) -> Vec<usize> {
        let z = self.scaler.apply(x);
        let mut order: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, &p)| (sq_dist(z, p), i))
            .collect();
        let k = self.k;
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < order.len() {
            order.select_nth_unstable_by(k - 1, cmp);
            order.truncate(k);
        }
        order.sort_unstable_by(cmp);
        order.into_iter().map(|(_, i)| i).collect()
    }

    pub fn predict_one(&self, x: Point) -> Group {
        let votes_b = self
            .neighbours(x)
            .into_iter()
            .filter(|&i| self.labels[i] == Group::B)
            .count();
        if 2 * votes_b > self.k {
            Group::B
        } else {
            Group::A
        }
    }
}

// ---------------------------------------------------------------------------
// Support vector machine

fn rbf(gamma: f64, a: Point, b: Point) -> f64 {
    (-gamma * sq_dist(a, b)).exp()
}

/// `1 / (2 median²)` over nonzero pairwise distances; 1 if all coincide.
pub fn median_heuristic_gamma(points: &[Point]) -> f64 {
    let n = points.len();
    let mut d: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| sq_dist(points[i], points[j]).sqrt())
        .filter(|&d| d > 0.0)
        .collect();
    if d.is_empty() {
        return 1.0;
    }
    d.sort_unstable_by(f64::total_cmp);
    let med = quantile(&d, 0.5);
    1.0 / (2.0 * med * med)
}

/// Soft-margin RBF support vector machine trained by SMO with second-order
/// working-set selection.
#[derive(Debug, Clone, PartialEq)]
pub struct Svm {
    pub scaler: Standardizer,
    /// Standardized training points.
    pub points: Vec<Point>,
    /// `±1` targets (`+1` for group B).
    pub targets: Vec<f64>,
    /// Dual variables, one per training point.
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub c: f64,
    pub iterations: usize,
}

const TAU: f64 = 1e-12;

impl Svm {
    pub fn fit(points: &[Point], labels: &[Group], hyper: &Hyper) -> Result<Self> {
        check_training(points, labels, 1)?;
        if !(hyper.c > 0.0 && hyper.c.is_finite()) {
            return Err(Error::InvalidInput(format!("C = {} must be positive", hyper.c)));
        }
        let scaler = Standardizer::fit(points);
        let z: Vec<Point> = points.iter().map(|&p| scaler.apply(p)).collect();
        let gamma = match hyper.gamma {
            Some(g) if g > 0.0 && g.is_finite() => g,
            Some(g) => return Err(Error::InvalidInput(format!("gamma = {g} must be positive"))),
            None => median_heuristic_gamma(&z),
        };
        let y: Vec<f64> = labels
            .iter()
            .map(|g| if *g == Group::B { 1.0 } else { -1.0 })
            .collect();
        let n = z.len();
        let kernel: Vec<f64> = (0..n * n).map(|k| rbf(gamma, z[k / n], z[k % n])).collect();
        let c = hyper.c;
        let max_iter = hyper.max_passes.saturating_mul(n.max(1));

        let mut alpha = vec![0.0; n];
        // gradient of ½αᵀQα − eᵀα with Q_ij = y_i y_j K_ij
        let mut grad = vec![-1.0; n];
        let mut iterations = 0;
        loop {
            // i: maximal violator in I_up
            let mut gmax = f64::NEG_INFINITY;
            let mut i_sel = None;
            for t in 0..n {
                let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
                if up && -y[t] * grad[t] >= gmax {
                    gmax = -y[t] * grad[t];
                    i_sel = Some(t);
                }
            }
            // j: second-order selection in I_low
            let mut gmax2 = f64::NEG_INFINITY;
            let mut j_sel = None;
            let mut best = f64::INFINITY;
            if let Some(i) = i_sel {
                for t in 0..n {
                    let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
                    if !low {
                        continue;
                    }
                    let yg = y[t] * grad[t];
                    gmax2 = gmax2.max(yg);
                    let diff = gmax + yg;
                    if diff > 0.0 {
                        let mut quad = kernel[i * n + i] + kernel[t * n + t] - 2.0 * kernel[i * n + t];
                        if quad <= 0.0 {
                            quad = TAU;
                        }
                        let obj = -(diff * diff) / quad;
                        if obj <= best {
                            best = obj;
                            j_sel = Some(t);
                        }
                    }
                }
            }
            let gap = gmax + gmax2;
            let (Some(i), Some(j)) = (i_sel, j_sel) else { break };
            if gap < hyper.tolerance {
                break;
            }
            if iterations >= max_iter {
                return Err(Error::SmoNonConvergence { iterations, gap });
            }
            iterations += 1;

            let (old_i, old_j) = (alpha[i], alpha[j]);
            let qij = y[i] * y[j] * kernel[i * n + j];
            if y[i] != y[j] {
                let mut quad = kernel[i * n + i] + kernel[j * n + j] + 2.0 * qij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let mut quad = kernel[i * n + i] + kernel[j * n + j] - 2.0 * qij;
                if quad <= 0.0 {
                    quad = TAU;
                }
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }
            let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
            for t in 0..n {
                grad[t] += y[t] * (y[i] * kernel[t * n + i] * di + y[j] * kernel[t * n + j] * dj);
            }
        }

        // bias from free vectors, or the midpoint of the feasible interval
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free_sum, mut free) = (0.0, 0usize);
        for t in 0..n {
            let yg = y[t] * grad[t];
            if alpha[t] >= c {
                if y[t] < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
            } else if alpha[t] <= 0.0 {
                if y[t] > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
            } else {
                free += 1;
                free_sum += yg;
            }
        }
        let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };

        Ok(Svm {
            scaler,
            points: z,
            targets: y,
            alpha,
            bias: -rho,
            gamma,
            c,
            iterations,
        })
    }

    fn decision_standardized(&self, z: Point) -> f64 {
        self.points
            .iter()
            .zip(&self.alpha)
            .zip(&self.targets)
            .filter(|((_, &a), _)| a > 0.0)
            .map(|((&p, &a), &y)| a * y * rbf(self.gamma, p, z))
            .sum::<f64>()
            + self.bias
    }

    /// Signed decision value; positive means group B.
    pub fn decision(&self, x: Point) -> f64 {
        self.decision_standardized(self.scaler.apply(x))
    }

    pub fn predict_one(&self, x: Point) -> Group {
        if self.decision(x) > 0.0 {
            Group::B
        } else {
            Group::A
        }
    }

    pub fn support_count(&self) -> usize {
        self.alpha.iter().filter(|&&a| a > 0.0).count()
    }

    /// Largest violation of the KKT conditions over the training points,
    /// measured on the margin `y f(x)`.
    pub fn max_kkt_violation(&self) -> f64 {
        self.points
            .iter()
            .zip(&self.alpha)
            .zip(&self.targets)
            .map(|((&p, &a), &y)| {
                let margin = y * self.decision_standardized(p);
                if a <= 0.0 {
                    (1.0 - margin).max(0.0)
                } else if a >= self.c {
                    (margin - 1.0).max(0.0)
                } else {
                    (margin - 1.0).abs()
                }
            })
            .fold(0.0, f64::max)
    }
}

// ---------------------------------------------------------------------------
// Random forest

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(Group),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Axis-aligned binary tree; `x[feature] <= threshold` goes left.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_one(&self, x: Point) -> Group {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf(g) => return g,
                Node::Split { feature, threshold, left, right } => {
                    k = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], k: usize) -> usize {
            match nodes[k] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

fn gini(b: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = b as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a, R> {
    points: &'a [Point],
    labels: &'a [Group],
    max_depth: usize,
    min_leaf: usize,
    rng: R,
    nodes: Vec<Node>,
}

impl<R: Rng> TreeBuilder<'_, R> {
    fn majority(&self, idx: &[usize]) -> Group {
        let b = idx.iter().filter(|&&i| self.labels[i] == Group::B).count();
        if 2 * b > idx.len() {
            Group::B
        } else {
            Group::A
        }
    }

    /// Best Gini split of `idx` on `feature`: (impurity, threshold, left
    /// count after sorting). `idx` is left sorted by the feature.
    fn best_split(&self, idx: &mut [usize], feature: usize) -> Option<(f64, f64, usize)> {
        let x = |i: usize| self.points[i][feature];
        idx.sort_unstable_by(|&a, &b| x(a).total_cmp(&x(b)).then(a.cmp(&b)));
        let n = idx.len();
        let total_b = idx.iter().filter(|&&i| self.labels[i] == Group::B).count();
        let mut left_b = 0;
        let mut best: Option<(f64, f64, usize)> = None;
        for k in 1..n {
            if self.labels[idx[k - 1]] == Group::B {
                left_b += 1;
            }
            let (lo, hi) = (x(idx[k - 1]), x(idx[k]));
            if lo >= hi || k < self.min_leaf || n - k < self.min_leaf {
                continue;
            }
            let impurity = k as f64 * gini(left_b, k) + (n - k) as f64 * gini(total_b - left_b, n - k);
            if best.is_none_or(|(b, _, _)| impurity < b) {
                let mut threshold = lo + (hi - lo) / 2.0;
                if threshold >= hi {
                    threshold = lo;
                }
                best = Some((impurity, threshold, k));
            }
        }
        best
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(self.majority(idx)));
        let b = idx.iter().filter(|&&i| self.labels[i] == Group::B).count();
        if b == 0 || b == idx.len() || depth >= self.max_depth || idx.len() < 2 * self.min_leaf {
            return id;
        }
        // one random candidate feature; fall back to the other if the
        // candidate is constant on this node
        let mut features = [0usize, 1];
        features.shuffle(&mut self.rng);
        for feature in features {
            if let Some((_, threshold, k)) = self.best_split(idx, feature) {
                let (l, r) = idx.split_at_mut(k);
                let left = self.build(l, depth + 1);
                let right = self.build(r, depth + 1);
                self.nodes[id] = Node::Split { feature, threshold, left, right };
                return id;
            }
        }
        id
    }
}

/// Bagged ensemble of Gini trees with one random split feature per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    pub trees: Vec<Tree>,
    pub seed: u64,
    /// Out-of-bag misclassification rate over points left out of at least
    /// one bootstrap sample.
    pub oob_error: Option<f64>,
}

impl Forest {
    /// Tree `t` draws its bootstrap sample and split features from stream
    /// `FOREST_BASE + t` of `seed`, so the forest does not depend on how
    /// trees are scheduled across threads.
    pub fn fit(points: &[Point], labels: &[Group], hyper: &Hyper, seed: u64) -> Result<Self> {
        check_training(points, labels, 1)?;
        if hyper.trees == 0 {
            return Err(Error::InvalidInput("forest needs at least one tree".into()));
        }
        if hyper.min_leaf == 0 {
            return Err(Error::InvalidInput("min_leaf must be at least 1".into()));
        }
        let n = points.len();
        let grown: Vec<(Tree, Vec<bool>)> = (0..hyper.trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = rng::seeded(seed, rng::stream::FOREST_BASE + t as u64);
                let mut in_bag = vec![false; n];
                let mut sample: Vec<usize> = (0..n)
                    .map(|_| {
                        let i = rng.random_range(0..n);
                        in_bag[i] = true;
                        i
                    })
                    .collect();
                let mut builder = TreeBuilder {
                    points,
                    labels,
                    max_depth: hyper.max_depth,
                    min_leaf: hyper.min_leaf,
                    rng,
                    nodes: Vec::new(),
                };
                builder.build(&mut sample, 0);
                (Tree { nodes: builder.nodes }, in_bag)
            })
            .collect();

        let mut oob_votes = vec![[0usize; 2]; n];
        for (tree, in_bag) in &grown {
            for i in (0..n).filter(|&i| !in_bag[i]) {
                oob_votes[i][tree.predict_one(points[i]).index()] += 1;
            }
        }
        let (mut wrong, mut counted) = (0usize, 0usize);
        for (v, &g) in oob_votes.iter().zip(labels) {
            if v[0] + v[1] > 0 {
                counted += 1;
                let pred = if v[1] > v[0] { Group::B } else { Group::A };
                wrong += usize::from(pred != g);
            }
        }
        Ok(Forest {
            trees: grown.into_iter().map(|(t, _)| t).collect(),
            seed,
            oob_error: (counted > 0).then(|| wrong as f64 / counted as f64),
        })
    }

    pub fn predict_one(&self, x: Point) -> Group {
        let b = self
            .trees
            .iter()
            .filter(|t| t.predict_one(x) == Group::B)
            .count();
        if 2 * b > self.trees.len() {
            Group::B
        } else {
            Group::A
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ten points near (0,0) labelled A and ten near (1,1) labelled B.
    fn separable() -> (Vec<Point>, Vec<Group>) {
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            let j = 0.01 * ((i * 7) % 10) as f64;
            let k = 0.01 * ((i * 3) % 10) as f64;
            pts.push([j, k]);
            labels.push(Group::A);
            pts.push([1.0 + k, 1.0 - j]);
            labels.push(Group::B);
        }
        (pts, labels)
    }

    #[test]
    fn all_methods_fit_separable_data() {
        let (pts, labels) = separable();
        for m in Method::ALL {
            let model = train(&pts, &labels, m, &Hyper::default(), 1).unwrap();
            assert_eq!(model.method(), m);
            let acc = accuracy(&model.predict(&pts), &labels).unwrap();
            assert_eq!(acc, 1.0, "{m}");
        }
    }

    #[test]
    fn lda_symmetric_classes() {
        let pts: Vec<Point> = vec![
            [-1.5, 0.3], [-0.6, -0.4], [-1.1, 0.9], [-0.8, -1.0],
            [1.5, 0.3], [0.6, -0.4], [1.1, 0.9], [0.8, -1.0],
        ];
        let labels = [vec![Group::A; 4], vec![Group::B; 4]].concat();
        let lda = Lda::fit(&pts, &labels).unwrap();
        assert_eq!(lda.predict_one([-2.0, 0.0]), Group::A);
        assert_eq!(lda.predict_one([2.0, 0.0]), Group::B);
        assert!(lda.covariance.inverse_residual(&lda.inverse) <= 1e-8);
    }

    #[test]
    fn discriminant_analysis_needs_three_per_class() {
        let pts = vec![[0.0, 0.0], [0.1, 0.0], [1.0, 1.0], [1.1, 1.0], [1.2, 0.9]];
        let labels = vec![Group::A, Group::A, Group::B, Group::B, Group::B];
        assert!(Lda::fit(&pts, &labels).is_err());
        assert!(Qda::fit(&pts, &labels, false).is_err());
        assert!(Knn::fit(&pts, &labels, 3).is_ok());
    }

    #[test]
    fn degenerate_classes_are_regularized() {
        let pts = vec![[1.0, 1.0]; 3].into_iter().chain(vec![[0.0, 1.0]; 3]).collect::<Vec<_>>();
        let labels = [vec![Group::A; 3], vec![Group::B; 3]].concat();
        let lda = Lda::fit(&pts, &labels).unwrap();
        assert_eq!(lda.predict_one([1.0, 1.0]), Group::A);
        assert_eq!(lda.predict_one([0.0, 1.0]), Group::B);
        let qda = Qda::fit(&pts, &labels, false).unwrap();
        assert_eq!(qda.predict_one([0.9, 1.0]), Group::A);
    }

    #[test]
    fn single_class_rejected() {
        let pts = vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        for m in Method::ALL {
            assert!(train(&pts, &[Group::A; 3], m, &Hyper::default(), 0).is_err());
        }
    }

    #[test]
    fn knn_self_label_and_ties() {
        let (pts, labels) = separable();
        let knn = Knn::fit(&pts, &labels, 1).unwrap();
        for (p, g) in pts.iter().zip(&labels) {
            assert_eq!(knn.predict_one(*p), *g);
        }
        assert!(Knn::fit(&pts, &labels, 4).is_err());
        assert_eq!(Knn::fit(&pts[..4], &labels[..4], 7).unwrap().k, 3);

        // equidistant neighbours: the smaller index wins
        let pts = vec![[-1.0, 0.0], [1.0, 0.0], [0.0, 5.0]];
        let labels = vec![Group::B, Group::A, Group::A];
        let knn = Knn::fit(&pts, &labels, 1).unwrap();
        assert_eq!(knn.neighbours([0.0, 0.0]), vec![0]);
        assert_eq!(knn.predict_one([0.0, 0.0]), Group::B);
    }

    #[test]
    fn svm_satisfies_kkt() {
        let (pts, labels) = separable();
        let svm = Svm::fit(&pts, &labels, &Hyper::default()).unwrap();
        assert!(svm.support_count() > 0);
        assert!(svm.max_kkt_violation() <= 2e-3, "{}", svm.max_kkt_violation());
        let sum: f64 = svm.alpha.iter().zip(&svm.targets).map(|(a, y)| a * y).sum();
        assert!(sum.abs() < 1e-10);
    }

    #[test]
    fn svm_reports_non_convergence() {
        let (pts, labels) = separable();
        let hyper = Hyper { max_passes: 0, ..Hyper::default() };
        assert!(matches!(
            Svm::fit(&pts, &labels, &hyper),
            Err(Error::SmoNonConvergence { .. })
        ));
    }

    #[test]
    fn forest_respects_depth_and_oob() {
        let (pts, labels) = separable();
        let hyper = Hyper { trees: 50, max_depth: 3, ..Hyper::default() };
        let f = Forest::fit(&pts, &labels, &hyper, 4).unwrap();
        assert_eq!(f.trees.len(), 50);
        assert!(f.trees.iter().all(|t| t.depth() <= 3));
        assert!(f.oob_error.unwrap() <= 0.05);
    }

    #[test]
    fn accuracy_cases() {
        use Group::*;
        assert_eq!(accuracy(&[A, B], &[A, B]).unwrap(), 1.0);
        assert_eq!(accuracy(&[B, A], &[A, B]).unwrap(), 0.0);
        assert_eq!(accuracy(&[A, B, A, A], &[A, B, A, B]).unwrap(), 0.75);
        assert!(accuracy(&[A], &[A, B]).is_err());
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("tree".parse::<Method>().is_err());
    }
}
