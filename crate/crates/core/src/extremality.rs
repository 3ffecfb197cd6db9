//! Epigraph and hypograph indexes.
//!
//! For a curve `x` and a reference sample `x_1 … x_n` on the same grid:
//!
//! * `EI(x)`: fraction of reference curves with `x_i(t) >= x(t)` at every grid point;
//! * `HI(x)`: fraction with `x_i(t) <= x(t)` at every grid point;
//! * `MEI(x)`: average over reference curves of the (quadrature-weighted)
//!   share of the domain where `x_i(t) >= x(t)`;
//! * `MHI(x)`: same with `<=`.
//!
//! Both inequalities are non-strict, so a tie at a grid point counts towards
//! both indexes. When `x` belongs to the reference it is counted, giving
//! every index a floor of `1/n`.
//!
//! The modified indexes are evaluated by sorting each grid column of the
//! reference once, so one evaluation costs `O(m log n)` instead of `O(n m)`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::fdata::{check_curve, check_grid, FunctionalDataset, Grid};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IndexKind {
    Ei,
    Hi,
    Mei,
    Mhi,
}

impl IndexKind {
    pub const ALL: [IndexKind; 4] = [IndexKind::Ei, IndexKind::Hi, IndexKind::Mei, IndexKind::Mhi];

    pub fn name(self) -> &'static str {
        match self {
            IndexKind::Ei => "ei",
            IndexKind::Hi => "hi",
            IndexKind::Mei => "mei",
            IndexKind::Mhi => "mhi",
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndexKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidInput(format!("unknown index {s:?}")))
    }
}

/// Per-curve index values relative to one reference sample.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexVector<K> {
    pub kind: K,
    pub values: Vec<f64>,
    pub reference_size: usize,
}

/// Reference sample with every grid column sorted, for counting how many
/// reference values lie above or below a point.
#[derive(Debug, Clone)]
pub(crate) struct SortedColumns {
    columns: Vec<Vec<f64>>,
    n: usize,
}

impl SortedColumns {
    pub(crate) fn new(reference: &FunctionalDataset) -> Self {
        let m = reference.n_points();
        let columns = (0..m)
            .map(|j| {
                let mut col: Vec<f64> = reference.rows().map(|r| r[j]).collect();
                col.sort_unstable_by(f64::total_cmp);
                col
            })
            .collect();
        SortedColumns {
            columns,
            n: reference.n_curves(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.n
    }

    /// `#{i : x_i(t_j) <= y}`
    pub(crate) fn count_le(&self, j: usize, y: f64) -> usize {
        self.columns[j].partition_point(|&v| v <= y)
    }

    /// `#{i : x_i(t_j) >= y}`
    pub(crate) fn count_ge(&self, j: usize, y: f64) -> usize {
        self.n - self.columns[j].partition_point(|&v| v < y)
    }
}

/// Evaluates all four indexes against one reference sample.
#[derive(Debug, Clone)]
pub struct ExtremalityIndex<'a> {
    reference: &'a FunctionalDataset,
    sorted: SortedColumns,
}

impl<'a> ExtremalityIndex<'a> {
    pub fn new(reference: &'a FunctionalDataset) -> Self {
        ExtremalityIndex {
            reference,
            sorted: SortedColumns::new(reference),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.reference.grid()
    }

    pub fn reference_size(&self) -> usize {
        self.reference.n_curves()
    }

    pub fn epigraph(&self, x: &[f64]) -> Result<f64> {
        check_curve(self.grid(), x)?;
        let count = self
            .reference
            .rows()
            .filter(|r| r.iter().zip(x).all(|(ri, xi)| ri >= xi))
            .count();
        Ok(count as f64 / self.reference_size() as f64)
    }

    pub fn hypograph(&self, x: &[f64]) -> Result<f64> {
        check_curve(self.grid(), x)?;
        let count = self
            .reference
            .rows()
            .filter(|r| r.iter().zip(x).all(|(ri, xi)| ri <= xi))
            .count();
        Ok(count as f64 / self.reference_size() as f64)
    }

    fn modified(&self, x: &[f64], count: impl Fn(usize, f64) -> usize) -> Result<f64> {
        check_curve(self.grid(), x)?;
        let weighted: f64 = self
            .grid()
            .weights()
            .iter()
            .zip(x)
            .enumerate()
            .map(|(j, (&w, &xj))| w * count(j, xj) as f64)
            .sum();
        // Divide by the measure first: a member curve contributes at least
        // the full measure, so the ratio is >= 1 and the result >= 1/n.
        Ok(weighted / self.grid().measure() / self.reference_size() as f64)
    }

    pub fn modified_epigraph(&self, x: &[f64]) -> Result<f64> {
        self.modified(x, |j, y| self.sorted.count_ge(j, y))
    }

    pub fn modified_hypograph(&self, x: &[f64]) -> Result<f64> {
        self.modified(x, |j, y| self.sorted.count_le(j, y))
    }

    pub fn evaluate(&self, kind: IndexKind, x: &[f64]) -> Result<f64> {
        match kind {
            IndexKind::Ei => self.epigraph(x),
            IndexKind::Hi => self.hypograph(x),
            IndexKind::Mei => self.modified_epigraph(x),
            IndexKind::Mhi => self.modified_hypograph(x),
        }
    }

    /// Index of every curve in `eval`, in row order.
    pub fn evaluate_all(&self, kind: IndexKind, eval: &FunctionalDataset) -> Result<Vec<f64>> {
        check_grid(self.grid(), eval.grid())?;
        (0..eval.n_curves())
            .into_par_iter()
            .map(|i| self.evaluate(kind, eval.row(i)))
            .collect()
    }
}

pub fn epigraph_index(x: &[f64], reference: &FunctionalDataset) -> Result<f64> {
    ExtremalityIndex::new(reference).epigraph(x)
}

pub fn hypograph_index(x: &[f64], reference: &FunctionalDataset) -> Result<f64> {
    ExtremalityIndex::new(reference).hypograph(x)
}

pub fn modified_epigraph_index(x: &[f64], reference: &FunctionalDataset) -> Result<f64> {
    ExtremalityIndex::new(reference).modified_epigraph(x)
}

pub fn modified_hypograph_index(x: &[f64], reference: &FunctionalDataset) -> Result<f64> {
    ExtremalityIndex::new(reference).modified_hypograph(x)
}

/// Batch form: one index per curve of `eval`, order preserved.
pub fn index_vector(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    kind: IndexKind,
) -> Result<IndexVector<IndexKind>> {
    let values = ExtremalityIndex::new(reference).evaluate_all(kind, eval)?;
    Ok(IndexVector {
        kind,
        values,
        reference_size: reference.n_curves(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdata::Group;

    fn constants(levels: &[f64], m: usize) -> FunctionalDataset {
        let grid = Grid::uniform(0.0, 1.0, m).unwrap();
        let rows: Vec<Vec<f64>> = levels.iter().map(|&c| vec![c; m]).collect();
        FunctionalDataset::from_rows(grid, &rows, vec![Group::A; levels.len()]).unwrap()
    }

    #[test]
    fn self_reference_gives_one() {
        let s = constants(&[0.3], 5);
        let x = s.row(0);
        for kind in IndexKind::ALL {
            assert_eq!(ExtremalityIndex::new(&s).evaluate(kind, x).unwrap(), 1.0);
        }
        let v = index_vector(&s, &s, IndexKind::Mei).unwrap();
        assert_eq!(v.values, vec![1.0]);
        assert_eq!(v.reference_size, 1);
    }

    #[test]
    fn constant_pair() {
        let s = constants(&[0.0, 1.0], 11);
        let zero = vec![0.0; 11];
        let one = vec![1.0; 11];
        assert_eq!(epigraph_index(&zero, &s).unwrap(), 1.0);
        assert_eq!(hypograph_index(&one, &s).unwrap(), 1.0);
        assert_eq!(hypograph_index(&zero, &s).unwrap(), 0.5);
        assert_eq!(modified_epigraph_index(&zero, &s).unwrap(), 1.0);
        assert_eq!(modified_epigraph_index(&one, &s).unwrap(), 0.5);
        assert_eq!(modified_hypograph_index(&one, &s).unwrap(), 1.0);
        assert_eq!(modified_hypograph_index(&zero, &s).unwrap(), 0.5);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let s = constants(&[0.0, 1.0], 5);
        assert!(matches!(
            modified_epigraph_index(&[0.0; 4], &s),
            Err(Error::GridMismatch { expected: 5, actual: 4 })
        ));
        let other = constants(&[0.0], 6);
        assert!(index_vector(&other, &s, IndexKind::Ei).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("MEI".parse::<IndexKind>().unwrap(), IndexKind::Mei);
        assert!("foo".parse::<IndexKind>().is_err());
    }

    #[test]
    fn partial_crossing() {
        // x = (0, 0, 0); reference curve y = (-1, 0, 1) lies above x on
        // points 2 and 3 with weights 0.5 and 0.25 of a total 1.0
        let grid = Grid::uniform(0.0, 1.0, 3).unwrap();
        let s = FunctionalDataset::from_rows(grid, &[vec![-1.0, 0.0, 1.0]], vec![Group::A]).unwrap();
        let x = [0.0; 3];
        assert_eq!(modified_epigraph_index(&x, &s).unwrap(), 0.75);
        assert_eq!(modified_hypograph_index(&x, &s).unwrap(), 0.75);
        assert_eq!(epigraph_index(&x, &s).unwrap(), 0.0);
    }
}
