//! EE-plot and DD-plot embeddings.
//!
//! Every curve is mapped to `(u, v)`: its index (EE) or depth (DD) with
//! respect to the group-A rows of a reference sample, and with respect to
//! the group-B rows. When the evaluated curves are the reference itself a
//! curve counts as a member of its own group's sample; held-out curves are
//! embedded against the fixed training reference.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::depth::{self, DepthKind, DEFAULT_HMODE_QUANTILE, DEFAULT_PROJECTIONS};
use crate::extremality::{ExtremalityIndex, IndexKind};
use crate::fdata::{check_grid, format_float, FunctionalDataset, Group};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EmbeddingKind {
    EeMei,
    EeMhi,
    DdFm,
    DdHm { quantile: f64 },
    DdRp { projections: usize, seed: u64 },
}

impl EmbeddingKind {
    pub const DEFAULT_HM: EmbeddingKind = EmbeddingKind::DdHm {
        quantile: DEFAULT_HMODE_QUANTILE,
    };

    pub fn default_rp(seed: u64) -> EmbeddingKind {
        EmbeddingKind::DdRp {
            projections: DEFAULT_PROJECTIONS,
            seed,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EmbeddingKind::EeMei => "ee-mei",
            EmbeddingKind::EeMhi => "ee-mhi",
            EmbeddingKind::DdFm => "dd-fm",
            EmbeddingKind::DdHm { .. } => "dd-hm",
            EmbeddingKind::DdRp { .. } => "dd-rp",
        }
    }

    pub fn is_ee(&self) -> bool {
        matches!(self, EmbeddingKind::EeMei | EmbeddingKind::EeMhi)
    }

    /// Whether both coordinates are confined to `[0, 1]`.
    pub fn is_unit_square(&self) -> bool {
        !matches!(self, EmbeddingKind::DdHm { .. })
    }

    fn axis_label(&self) -> &'static str {
        match self {
            EmbeddingKind::EeMei => "MEI",
            EmbeddingKind::EeMhi => "MHI",
            EmbeddingKind::DdFm => "FM depth",
            EmbeddingKind::DdHm { .. } => "h-mode depth",
            EmbeddingKind::DdRp { .. } => "RP depth",
        }
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Parses `ee-mei`, `ee-mhi`, `dd-fm`, `dd-hm` and `dd-rp`; depth
/// parameters take their defaults (random projections use seed 0).
impl FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ee-mei" => Ok(EmbeddingKind::EeMei),
            "ee-mhi" => Ok(EmbeddingKind::EeMhi),
            "dd-fm" => Ok(EmbeddingKind::DdFm),
            "dd-hm" => Ok(EmbeddingKind::DEFAULT_HM),
            "dd-rp" => Ok(EmbeddingKind::default_rp(0)),
            _ => Err(Error::InvalidInput(format!(
                "unknown embedding {s:?} (expected ee-mei, ee-mhi, dd-fm, dd-hm or dd-rp)"
            ))),
        }
    }
}

/// Curves embedded in the plane, with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedded2D {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<Group>,
    pub kind: EmbeddingKind,
    pub reference_sizes: (usize, usize),
}

impl Embedded2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn reference_groups(reference: &FunctionalDataset) -> Result<(FunctionalDataset, FunctionalDataset)> {
    let group = |g: Group| {
        reference
            .group(g)
            .ok_or_else(|| Error::InvalidInput(format!("reference group {g} is empty")))
    };
    Ok((group(Group::A)?, group(Group::B)?))
}

fn coordinates(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    kind: EmbeddingKind,
    per_group: impl Fn(&FunctionalDataset) -> Result<Vec<f64>>,
) -> Result<Embedded2D> {
    check_grid(reference.grid(), eval.grid())?;
    let (ref_a, ref_b) = reference_groups(reference)?;
    let u = per_group(&ref_a)?;
    let v = per_group(&ref_b)?;
    Ok(Embedded2D {
        points: u.into_iter().zip(v).map(|(u, v)| [u, v]).collect(),
        labels: eval.labels().to_vec(),
        kind,
        reference_sizes: (ref_a.n_curves(), ref_b.n_curves()),
    })
}

/// EE-plot coordinates (MEI or MHI against each reference group).
pub fn ee_coordinates(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    kind: EmbeddingKind,
) -> Result<Embedded2D> {
    let index = match kind {
        EmbeddingKind::EeMei => IndexKind::Mei,
        EmbeddingKind::EeMhi => IndexKind::Mhi,
        other => {
            return Err(Error::InvalidInput(format!(
                "{other} is not an EE embedding"
            )))
        }
    };
    coordinates(eval, reference, kind, |group| {
        ExtremalityIndex::new(group).evaluate_all(index, eval)
    })
}

/// DD-plot coordinates (a functional depth against each reference group).
pub fn dd_coordinates(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    kind: EmbeddingKind,
) -> Result<Embedded2D> {
    let depth_kind = match kind {
        EmbeddingKind::DdFm => DepthKind::FraimanMuniz,
        EmbeddingKind::DdHm { quantile } => DepthKind::HMode { quantile },
        EmbeddingKind::DdRp { projections, seed } => {
            DepthKind::RandomProjection { projections, seed }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "{other} is not a DD embedding"
            )))
        }
    };
    coordinates(eval, reference, kind, |group| {
        Ok(depth::depth(eval, group, depth_kind)?.values)
    })
}

pub fn embed(
    eval: &FunctionalDataset,
    reference: &FunctionalDataset,
    kind: EmbeddingKind,
) -> Result<Embedded2D> {
    if kind.is_ee() {
        ee_coordinates(eval, reference, kind)
    } else {
        dd_coordinates(eval, reference, kind)
    }
}

/// `label,u,v` CSV with labels written as `0`/`1`.
pub fn emit_points_csv(embedded: &Embedded2D) -> String {
    let mut s = String::from("label,u,v\n");
    for (p, g) in embedded.points.iter().zip(&embedded.labels) {
        let _ = writeln!(s, "{},{},{}", g, format_float(p[0]), format_float(p[1]));
    }
    s
}

/// Parse the output of [`emit_points_csv`].
pub fn parse_points_csv(bytes: &[u8]) -> Result<(Vec<[f64; 2]>, Vec<Group>)> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::parse(1, 1, format!("input is not UTF-8: {e}")))?;
    let mut lines = text.lines();
    if lines.next() != Some("label,u,v") {
        return Err(Error::parse(1, 1, "expected header `label,u,v`"));
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                line_no,
                fields.len().min(3) + 1,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let group = match fields[0] {
            "0" => Group::A,
            "1" => Group::B,
            other => return Err(Error::parse(line_no, 1, format!("label {other:?} is not 0 or 1"))),
        };
        let mut p = [0.0; 2];
        for (c, slot) in p.iter_mut().enumerate() {
            let f = fields[c + 1];
            *slot = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(line_no, c + 2, format!("bad number {f:?}")))?;
        }
        points.push(p);
        labels.push(group);
    }
    Ok((points, labels))
}

pub const COLOR_A: &str = "#1b6ca8";
pub const COLOR_B: &str = "#d1495b";
const MARGIN: f64 = 48.0;

/// Axis range: the unit interval, or padded data bounds for h-mode depth.
fn axis_range(embedded: &Embedded2D, axis: usize) -> (f64, f64) {
    if embedded.kind.is_unit_square() {
        return (0.0, 1.0);
    }
    let (lo, hi) = embedded
        .points
        .iter()
        .map(|p| p[axis])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Scatter plot of an embedding as a standalone SVG document.
pub fn emit_svg(embedded: &Embedded2D, width_px: u32, height_px: u32) -> Result<String> {
    let (w, h) = (f64::from(width_px), f64::from(height_px));
    if width_px == 0 || height_px == 0 || w <= 2.0 * MARGIN || h <= 2.0 * MARGIN {
        return Err(Error::InvalidInput(format!(
            "canvas {width_px}x{height_px} too small (need more than {0}x{0})",
            2.0 * MARGIN
        )));
    }
    let (x0, x1) = axis_range(embedded, 0);
    let (y0, y1) = axis_range(embedded, 1);
    let pw = w - 2.0 * MARGIN;
    let ph = h - 2.0 * MARGIN;
    let sx = |u: f64| MARGIN + (u - x0) / (x1 - x0) * pw;
    let sy = |v: f64| MARGIN + ph - (v - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width_px}" height="{height_px}" viewBox="0 0 {width_px} {height_px}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width_px}" height="{height_px}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333" stroke-width="1"/>"##,
        MARGIN, MARGIN, pw, ph
    );
    let _ = writeln!(s, r##"<g font-family="sans-serif" font-size="11" fill="#333333">"##);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#333333"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.2}</text>"##,
            MARGIN + ph,
            MARGIN + ph + 4.0,
            MARGIN + ph + 16.0
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN:.2}" y2="{py:.2}" stroke="#333333"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.2}</text>"##,
            MARGIN - 4.0,
            MARGIN - 6.0,
            py + 4.0
        );
    }
    let label = embedded.kind.axis_label();
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{label} w.r.t. group A</text>"#,
        MARGIN + pw / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{label} w.r.t. group B</text>"#,
        MARGIN + ph / 2.0,
        MARGIN + ph / 2.0
    );
    let _ = writeln!(s, "</g>");
    if embedded.kind.is_ee() {
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888888" stroke-dasharray="4 3"/>"##,
            sx(0.0),
            sy(0.0),
            sx(1.0),
            sy(1.0)
        );
    }
    for (p, g) in embedded.points.iter().zip(&embedded.labels) {
        let color = match g {
            Group::A => COLOR_A,
            Group::B => COLOR_B,
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.75"/>"#,
            sx(p[0]),
            sy(p[1])
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
