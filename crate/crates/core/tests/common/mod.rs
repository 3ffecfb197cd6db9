//! Brute-force reference implementations and random fixtures shared by the
//! integration tests. Everything here is written directly from the
//! definitions, with plain loops and no shared code paths beyond `Grid`.
#![allow(dead_code)]

use eeclass::fdata::{FunctionalDataset, Grid, Group};
use eeclass::rng;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn oracle_ei(x: &[f64], refs: &[Vec<f64>]) -> f64 {
    let mut count = 0usize;
    for r in refs {
        let mut above = true;
        for j in 0..x.len() {
            if r[j] < x[j] {
                above = false;
            }
        }
        if above {
            count += 1;
        }
    }
    count as f64 / refs.len() as f64
}

pub fn oracle_hi(x: &[f64], refs: &[Vec<f64>]) -> f64 {
    let mut count = 0usize;
    for r in refs {
        let mut below = true;
        for j in 0..x.len() {
            if r[j] > x[j] {
                below = false;
            }
        }
        if below {
            count += 1;
        }
    }
    count as f64 / refs.len() as f64
}

/// Trapezoid weights recomputed from the abscissae.
pub fn oracle_weights(t: &[f64]) -> Vec<f64> {
    let m = t.len();
    let mut w = vec![0.0; m];
    for j in 0..m - 1 {
        let h = t[j + 1] - t[j];
        w[j] += h / 2.0;
        w[j + 1] += h / 2.0;
    }
    w
}

fn modified(x: &[f64], refs: &[Vec<f64>], t: &[f64], above: bool) -> f64 {
    let w = oracle_weights(t);
    let lambda: f64 = w.iter().sum();
    let mut total = 0.0;
    for r in refs {
        let mut time = 0.0;
        for j in 0..x.len() {
            let hit = if above { r[j] >= x[j] } else { r[j] <= x[j] };
            if hit {
                time += w[j];
            }
        }
        total += time / lambda;
    }
    total / refs.len() as f64
}

pub fn oracle_mei(x: &[f64], refs: &[Vec<f64>], t: &[f64]) -> f64 {
    modified(x, refs, t, true)
}

pub fn oracle_mhi(x: &[f64], refs: &[Vec<f64>], t: &[f64]) -> f64 {
    modified(x, refs, t, false)
}

pub fn oracle_fm(x: &[f64], refs: &[Vec<f64>], t: &[f64]) -> f64 {
    let w = oracle_weights(t);
    let n = refs.len() as f64;
    let mut integral = 0.0;
    for j in 0..x.len() {
        let below = refs.iter().filter(|r| r[j] <= x[j]).count() as f64;
        let z = 1.0 - (0.5 - below / n).abs();
        integral += w[j] * z;
    }
    integral / w.iter().sum::<f64>()
}

pub fn oracle_l2(a: &[f64], b: &[f64], t: &[f64]) -> f64 {
    let w = oracle_weights(t);
    let mut s = 0.0;
    for j in 0..a.len() {
        s += w[j] * (a[j] - b[j]).powi(2);
    }
    s.sqrt()
}

/// Hyndman–Fan type 7 quantile of an unsorted sample.
pub fn oracle_quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(v.len() - 1);
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn oracle_hmode_bandwidth(refs: &[Vec<f64>], t: &[f64], q: f64) -> Option<f64> {
    let mut d = Vec::new();
    for i in 0..refs.len() {
        for k in i + 1..refs.len() {
            let dist = oracle_l2(&refs[i], &refs[k], t);
            if dist > 0.0 {
                d.push(dist);
            }
        }
    }
    if d.is_empty() {
        None
    } else {
        Some(oracle_quantile(&d, q))
    }
}

pub fn oracle_hmode(x: &[f64], refs: &[Vec<f64>], t: &[f64], h: f64) -> f64 {
    let mut s = 0.0;
    for r in refs {
        let u = oracle_l2(x, r, t) / h;
        s += (-u * u / 2.0).exp();
    }
    s / refs.len() as f64
}

/// Directions drawn exactly as documented: white Gaussian values from the
/// projection stream, direction by direction, then scaled to unit
/// trapezoid norm. Takes the grid's own weights so the result can be
/// compared bit for bit.
pub fn oracle_directions(w: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng::seeded(seed, rng::stream::PROJECTIONS);
    let mut out = Vec::new();
    for _ in 0..count {
        let mut a: Vec<f64> = Vec::new();
        for _ in 0..w.len() {
            a.push(StandardNormal.sample(&mut rng));
        }
        let mut norm2 = 0.0;
        for j in 0..w.len() {
            norm2 += w[j] * a[j] * a[j];
        }
        let norm = norm2.sqrt();
        for v in a.iter_mut() {
            *v /= norm;
        }
        out.push(a);
    }
    out
}

pub fn oracle_rp(x: &[f64], refs: &[Vec<f64>], w: &[f64], count: usize, seed: u64) -> f64 {
    let dot = |c: &[f64], a: &[f64]| {
        let mut s = 0.0;
        for j in 0..w.len() {
            s += w[j] * c[j] * a[j];
        }
        s
    };
    let mut total = 0.0;
    for a in oracle_directions(w, count, seed) {
        let y = dot(x, &a);
        let mut le = 0;
        let mut ge = 0;
        for r in refs {
            let p = dot(r, &a);
            if p <= y {
                le += 1;
            }
            if p >= y {
                ge += 1;
            }
        }
        total += le.min(ge) as f64 / refs.len() as f64;
    }
    total / count as f64
}

pub fn rows_of(data: &FunctionalDataset) -> Vec<Vec<f64>> {
    data.rows().map(|r| r.to_vec()).collect()
}

/// Strictly increasing, possibly non-uniform grid with `m` points.
pub fn random_grid(rng: &mut ChaCha8Rng, m: usize) -> Grid {
    let mut t = vec![rng.random_range(-1.0..1.0)];
    for _ in 1..m {
        let last = *t.last().unwrap();
        t.push(last + rng.random_range(0.05..1.0));
    }
    Grid::new(t).unwrap()
}

/// Small integer-valued curves, so grid-point ties are frequent.
pub fn tied_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize) -> FunctionalDataset {
    let grid = random_grid(rng, m);
    let values: Vec<f64> = (0..n * m).map(|_| rng.random_range(-2i32..=2) as f64).collect();
    let labels = (0..n).map(|i| if i % 2 == 0 { Group::A } else { Group::B }).collect();
    FunctionalDataset::new(grid, values, labels).unwrap()
}

/// Gaussian curves; ties at grid points have probability zero.
pub fn gaussian_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize) -> FunctionalDataset {
    let grid = random_grid(rng, m);
    let values: Vec<f64> = (0..n * m).map(|_| StandardNormal.sample(&mut *rng)).collect();
    let labels = (0..n).map(|i| if i % 2 == 0 { Group::A } else { Group::B }).collect();
    FunctionalDataset::new(grid, values, labels).unwrap()
}

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    rng::seeded(seed, 0x7e57)
}

pub fn next_seed(rng: &mut ChaCha8Rng) -> u64 {
    rng.next_u64()
}
