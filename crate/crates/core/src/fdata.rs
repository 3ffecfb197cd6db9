//! Functional data model: grids, labelled curve samples, CSV persistence and
//! train/test splitting.

use std::fmt;
use std::io::{Read, Write};

use rand::seq::SliceRandom;

use crate::rng;
use crate::{Error, Result};

/// Strictly increasing evaluation grid with trapezoid quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    weights: Vec<f64>,
    measure: f64,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {}",
                points.len()
            )));
        }
        if let Some(j) = points.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid(format!("point {j} is not finite")));
        }
        if let Some(j) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "grid not strictly increasing at point {}",
                j + 1
            )));
        }
        let m = points.len();
        let weights: Vec<f64> = (0..m)
            .map(|j| {
                let left = if j == 0 { points[0] } else { points[j - 1] };
                let right = if j == m - 1 { points[m - 1] } else { points[j + 1] };
                (right - left) / 2.0
            })
            .collect();
        let measure = weights.iter().sum();
        Ok(Grid {
            points,
            weights,
            measure,
        })
    }

    /// `m` equispaced points on `[start, end]`, both ends included.
    pub fn uniform(start: f64, end: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {m}")));
        }
        let step = (end - start) / (m - 1) as f64;
        let mut points: Vec<f64> = (0..m).map(|j| start + step * j as f64).collect();
        points[m - 1] = end;
        Grid::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Trapezoid weights; they sum to the interval length.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Sum of the quadrature weights, i.e. the discretized interval length.
    pub fn measure(&self) -> f64 {
        self.measure
    }

    /// `t_m - t_1`.
    pub fn span(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }
}

/// One of the two groups of a binary classification problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    A = 0,
    B = 1,
}

impl Group {
    pub const BOTH: [Group; 2] = [Group::A, Group::B];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Group> {
        match i {
            0 => Some(Group::A),
            1 => Some(Group::B),
            _ => None,
        }
    }

    pub fn other(self) -> Group {
        match self {
            Group::A => Group::B,
            Group::B => Group::A,
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

/// A labelled sample of curves evaluated on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    grid: Grid,
    values: Vec<f64>,
    labels: Vec<Group>,
    label_names: Vec<String>,
    ids: Option<Vec<String>>,
}

fn check_token(kind: &str, token: &str) -> Result<()> {
    if token.is_empty() || token.contains([',', '\n', '\r']) {
        return Err(Error::InvalidInput(format!(
            "{kind} {token:?} must be non-empty and free of commas and line breaks"
        )));
    }
    Ok(())
}

impl FunctionalDataset {
    /// Build a dataset from row-major `values` (`labels.len()` rows of
    /// `grid.len()` columns). Label names default to `A` and `B`.
    pub fn new(grid: Grid, values: Vec<f64>, labels: Vec<Group>) -> Result<Self> {
        let m = grid.len();
        if labels.is_empty() {
            return Err(Error::InvalidInput("dataset has no curves".into()));
        }
        if values.len() != labels.len() * m {
            return Err(Error::InvalidInput(format!(
                "expected {} values for {} curves on {} points, got {}",
                labels.len() * m,
                labels.len(),
                m,
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "curve {} has a non-finite value at point {}",
                k / m,
                k % m
            )));
        }
        Ok(FunctionalDataset {
            grid,
            values,
            labels,
            label_names: vec!["A".into(), "B".into()],
            ids: None,
        })
    }

    /// Build from a list of rows.
    pub fn from_rows(grid: Grid, rows: &[Vec<f64>], labels: Vec<Group>) -> Result<Self> {
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != grid.len()) {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} values, grid has {}",
                r.len(),
                grid.len()
            )));
        }
        if rows.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        Self::new(grid, rows.concat(), labels)
    }

    /// Replace the label tokens used for serialization. Every label in use
    /// must have a name; names must be distinct.
    pub fn with_label_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.is_empty() || names.len() > 2 {
            return Err(Error::InvalidInput("need one or two label names".into()));
        }
        for name in &names {
            check_token("label", name)?;
        }
        if names.len() == 2 && names[0] == names[1] {
            return Err(Error::InvalidInput("label names must differ".into()));
        }
        if self.labels.iter().any(|g| g.index() >= names.len()) {
            return Err(Error::InvalidInput("a label in use has no name".into()));
        }
        self.label_names = names;
        Ok(self)
    }

    pub fn with_ids(mut self, ids: Vec<String>) -> Result<Self> {
        if ids.len() != self.labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} identifiers for {} curves",
                ids.len(),
                self.labels.len()
            )));
        }
        for id in &ids {
            check_token("identifier", id)?;
        }
        self.ids = Some(ids);
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_curves(&self) -> usize {
        self.labels.len()
    }

    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.grid.len();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.grid.len())
    }

    pub fn labels(&self) -> &[Group] {
        &self.labels
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn ids(&self) -> Option<&[String]> {
        self.ids.as_deref()
    }

    pub fn count(&self, group: Group) -> usize {
        self.labels.iter().filter(|&&g| g == group).count()
    }

    pub fn indices_of(&self, group: Group) -> Vec<usize> {
        (0..self.n_curves())
            .filter(|&i| self.labels[i] == group)
            .collect()
    }

    /// Rows `indices` in the given order, keeping label names and ids.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidInput("empty subset".into()));
        }
        let m = self.grid.len();
        let mut values = Vec::with_capacity(indices.len() * m);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Ok(FunctionalDataset {
            grid: self.grid.clone(),
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
            ids: self
                .ids
                .as_ref()
                .map(|ids| indices.iter().map(|&i| ids[i].clone()).collect()),
        })
    }

    /// Curves of one group, or `None` if the group is empty.
    pub fn group(&self, group: Group) -> Option<Self> {
        let idx = self.indices_of(group);
        if idx.is_empty() {
            None
        } else {
            self.subset(&idx).ok()
        }
    }

    /// Apply `f` to every value of every curve.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        if out.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("mapped value is not finite".into()));
        }
        Ok(out)
    }

    /// Error unless `other` lives on exactly the same grid.
    pub fn check_same_grid(&self, other: &Grid) -> Result<()> {
        check_grid(&self.grid, other)
    }

    /// Error unless both groups are present.
    pub fn require_both_groups(&self) -> Result<()> {
        for g in Group::BOTH {
            if self.count(g) == 0 {
                return Err(Error::InvalidInput(format!("group {g} has no curves")));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_grid(expected: &Grid, actual: &Grid) -> Result<()> {
    if expected.len() != actual.len() {
        return Err(Error::GridMismatch {
            expected: expected.len(),
            actual: actual.len(),
        });
    }
    if expected.points() != actual.points() {
        return Err(Error::InvalidGrid("grid abscissae differ".into()));
    }
    Ok(())
}

pub(crate) fn check_curve(grid: &Grid, x: &[f64]) -> Result<()> {
    if x.len() != grid.len() {
        return Err(Error::GridMismatch {
            expected: grid.len(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// Canonical decimal form of a float: the shortest string that parses back
/// to the same value, positional for magnitudes in `[1e-5, 1e16)` and
/// exponential otherwise.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_number(field: &str, line: usize, column: usize) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, column, format!("non-numeric cell {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, column, format!("non-finite cell {field:?}")));
    }
    Ok(v)
}

/// Parse a dataset from CSV bytes. See [`load_csv`] for the format.
pub fn parse_csv(bytes: &[u8]) -> Result<FunctionalDataset> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(1, 1, format!("input is not UTF-8: {e}")))?;
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let lines: Vec<&str> = lines
        .into_iter()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    let Some((header, body)) = lines.split_first() else {
        return Err(Error::parse(1, 1, "empty input"));
    };

    let head: Vec<&str> = header.split(',').collect();
    let has_id = head.first() == Some(&"id");
    let label_col = usize::from(has_id);
    if head.get(label_col) != Some(&"label") {
        return Err(Error::parse(
            1,
            label_col + 1,
            "malformed header: expected `label` (optionally preceded by `id`)",
        ));
    }
    let first_value = label_col + 1;
    let points = head[first_value..]
        .iter()
        .enumerate()
        .map(|(j, f)| parse_number(f, 1, first_value + j + 1))
        .collect::<Result<Vec<_>>>()?;
    let grid = Grid::new(points).map_err(|e| match e {
        Error::InvalidGrid(msg) => Error::parse(1, first_value + 1, msg),
        other => other,
    })?;
    let width = first_value + grid.len();

    let mut values = Vec::with_capacity(body.len() * grid.len());
    let mut labels = Vec::with_capacity(body.len());
    let mut names: Vec<String> = Vec::new();
    let mut ids = Vec::new();
    for (k, row) in body.iter().enumerate() {
        let line = k + 2;
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != width {
            return Err(Error::parse(
                line,
                fields.len().min(width) + 1,
                format!("row has {} fields, header has {width}", fields.len()),
            ));
        }
        if has_id {
            if fields[0].is_empty() {
                return Err(Error::parse(line, 1, "empty identifier"));
            }
            ids.push(fields[0].to_string());
        }
        let token = fields[label_col];
        if token.is_empty() {
            return Err(Error::parse(line, label_col + 1, "empty label"));
        }
        let group = match names.iter().position(|n| n == token) {
            Some(i) => i,
            None if names.len() < 2 => {
                names.push(token.to_string());
                names.len() - 1
            }
            None => {
                return Err(Error::parse(
                    line,
                    label_col + 1,
                    format!(
                        "unknown label token {token:?}: already saw {:?} and {:?}",
                        names[0], names[1]
                    ),
                ))
            }
        };
        labels.push(Group::from_index(group).expect("at most two groups"));
        for (j, f) in fields[first_value..].iter().enumerate() {
            values.push(parse_number(f, line, first_value + j + 1)?);
        }
    }
    if labels.is_empty() {
        return Err(Error::parse(2, 1, "no curves after header"));
    }
    let ds = FunctionalDataset::new(grid, values, labels)?.with_label_names(names)?;
    if has_id {
        ds.with_ids(ids)
    } else {
        Ok(ds)
    }
}

/// Read a dataset in the CSV wire format.
///
/// The header holds an optional `id` column, then `label`, then the grid
/// abscissae. Each row carries the identifier (when present), a label token
/// and one value per grid point. The first distinct label token maps to
/// [`Group::A`], the second to [`Group::B`].
pub fn load_csv<R: Read>(mut source: R) -> Result<FunctionalDataset> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    parse_csv(&bytes)
}

/// Write the canonical serialization of `dataset`.
pub fn save_csv<W: Write>(dataset: &FunctionalDataset, mut out: W) -> std::io::Result<()> {
    out.write_all(to_csv_string(dataset).as_bytes())?;
    out.flush()
}

pub fn to_csv_string(dataset: &FunctionalDataset) -> String {
    let mut s = String::new();
    if dataset.ids.is_some() {
        s.push_str("id,");
    }
    s.push_str("label");
    for &t in dataset.grid.points() {
        s.push(',');
        s.push_str(&format_float(t));
    }
    s.push('\n');
    for (i, row) in dataset.rows().enumerate() {
        if let Some(ids) = &dataset.ids {
            s.push_str(&ids[i]);
            s.push(',');
        }
        s.push_str(&dataset.label_names[dataset.labels[i].index()]);
        for &v in row {
            s.push(',');
            s.push_str(&format_float(v));
        }
        s.push('\n');
    }
    s
}

/// How to split a dataset into training and testing parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64, stratified: bool) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidInput(format!(
                "train fraction {train_fraction} not in (0, 1)"
            )));
        }
        Ok(SplitSpec {
            train_fraction,
            seed,
            stratified,
        })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }
}

/// Row indices of a split, each list in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Rows in a canonical order: sorted by identifier when identifiers exist,
/// otherwise by row index. Shuffling from this order makes the outcome
/// independent of the input row order.
fn canonical_order(dataset: &FunctionalDataset, mut rows: Vec<usize>) -> Vec<usize> {
    if let Some(ids) = dataset.ids() {
        rows.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    }
    rows
}

/// Apportion `total` train slots across classes of the given sizes:
/// floors first, then the remainder by largest fractional part, ties to the
/// lower class.
fn apportion(sizes: &[usize], fraction: f64, total: usize) -> Vec<usize> {
    let raw: Vec<f64> = sizes.iter().map(|&s| s as f64 * fraction).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = total.saturating_sub(counts.iter().sum());
    for &c in order.iter().cycle().take(sizes.len() * 2) {
        if remaining == 0 {
            break;
        }
        if counts[c] < sizes[c] {
            counts[c] += 1;
            remaining -= 1;
        }
    }
    // keep at least one member of each class on both sides
    for (c, &s) in sizes.iter().enumerate() {
        counts[c] = counts[c].clamp(1, s - 1);
    }
    counts
}

pub fn split_indices(dataset: &FunctionalDataset, spec: &SplitSpec) -> Result<SplitIndices> {
    let n = dataset.n_curves();
    if n < 2 {
        return Err(Error::InvalidInput(format!("cannot split {n} curve(s)")));
    }
    let classes: Vec<Vec<usize>> = if spec.stratified {
        let classes: Vec<Vec<usize>> = Group::BOTH
            .iter()
            .map(|&g| dataset.indices_of(g))
            .filter(|c| !c.is_empty())
            .collect();
        if let Some(c) = classes.iter().find(|c| c.len() < 2) {
            return Err(Error::InvalidInput(format!(
                "class {} has {} member(s); stratified split needs at least 2",
                dataset.labels()[c[0]],
                c.len()
            )));
        }
        classes
    } else {
        vec![(0..n).collect()]
    };
    let total = (spec.train_fraction * n as f64).round() as usize;
    let sizes: Vec<usize> = classes.iter().map(Vec::len).collect();
    let counts = apportion(&sizes, spec.train_fraction, total);

    let mut rng = rng::seeded(spec.seed, rng::stream::SPLIT);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (rows, k) in classes.into_iter().zip(counts) {
        let mut rows = canonical_order(dataset, rows);
        rows.shuffle(&mut rng);
        train.extend_from_slice(&rows[..k]);
        test.extend_from_slice(&rows[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Split into `(train, test)` datasets; rows keep their original order.
pub fn split(
    dataset: &FunctionalDataset,
    spec: &SplitSpec,
) -> Result<(FunctionalDataset, FunctionalDataset)> {
    let idx = split_indices(dataset, spec)?;
    Ok((dataset.subset(&idx.train)?, dataset.subset(&idx.test)?))
}
