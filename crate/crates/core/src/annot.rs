//! Quadrilateral annotations (AQBB): parsing, conversion to oriented boxes,
//! and a seeded synthetic generator with retail-shelf-like statistics.
//!
//! JSON-lines records look like
//! `{"image": "img-1", "boxes": [[[x, y], [x, y], [x, y], [x, y]]], "size": [800, 600]}`
//! with `size` optional. The CSV form has one box per row with columns
//! `image,x1,y1,x2,y2,x3,y3,x4,y4`; consecutive rows with the same image are
//! grouped into one record.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::obb::{Obb, PixelPoint};

/// Relative tolerance for treating a quadrilateral as a rectangle.
pub const RECT_TOL: f64 = 1e-6;

/// Arbitrary quadrilateral box, vertices clockwise on screen (positive
/// shoelace area in y-down pixel coordinates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aqbb {
    vertices: [PixelPoint; 4],
}

impl Aqbb {
    /// Validates and orients the vertices. Returns the box and whether the
    /// order had to be reversed.
    pub fn new(mut vertices: [PixelPoint; 4]) -> Result<(Aqbb, bool)> {
        if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(Error::DegenerateQuadrilateral);
        }
        let a = shoelace(&vertices);
        let scale = perimeter(&vertices).powi(2).max(f64::MIN_POSITIVE);
        if a.abs() <= 1e-12 * scale {
            return Err(Error::DegenerateQuadrilateral);
        }
        let corrected = a < 0.0;
        if corrected {
            vertices.reverse();
        }
        Ok((Aqbb { vertices }, corrected))
    }

    pub fn vertices(&self) -> &[PixelPoint; 4] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices).abs()
    }
}

fn shoelace(v: &[PixelPoint]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|k| {
            let (p, q) = (v[k], v[(k + 1) % n]);
            p.x * q.y - q.x * p.y
        })
        .sum::<f64>()
}

fn perimeter(v: &[PixelPoint]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|k| {
            let (p, q) = (v[k], v[(k + 1) % n]);
            (q.x - p.x).hypot(q.y - p.y)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    pub image: String,
    pub boxes: Vec<Aqbb>,
    /// Image `(width, height)` in pixels.
    pub size: Option<(f64, f64)>,
    /// Some box arrived counter-clockwise and was reversed.
    pub orientation_corrected: bool,
    /// Some vertex lies outside the image. Occlusion-truncated labels do
    /// this legitimately, so it is flagged rather than rejected.
    pub out_of_bounds: bool,
}

impl AnnotationRecord {
    fn new(image: String, quads: Vec<[PixelPoint; 4]>, size: Option<(f64, f64)>) -> Result<Self> {
        let mut boxes = Vec::with_capacity(quads.len());
        let mut orientation_corrected = false;
        for q in quads {
            let (b, fixed) = Aqbb::new(q)?;
            orientation_corrected |= fixed;
            boxes.push(b);
        }
        let out_of_bounds = size.is_some_and(|(w, h)| {
            boxes
                .iter()
                .flat_map(|b| b.vertices)
                .any(|p| p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h)
        });
        Ok(Self {
            image,
            boxes,
            size,
            orientation_corrected,
            out_of_bounds,
        })
    }
}

/// Andrew's monotone chain; counter-clockwise in the mathematical sense
/// (positive shoelace), collinear points dropped.
pub fn convex_hull(points: &[PixelPoint]) -> Vec<PixelPoint> {
    let mut pts: Vec<PixelPoint> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: PixelPoint, a: PixelPoint, b: PixelPoint| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<PixelPoint> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &PixelPoint>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// Minimum-area enclosing rectangle of a point set. One side of the optimum
/// is collinear with a hull edge, so every hull edge direction is tried.
pub fn min_area_rect(points: &[PixelPoint]) -> Result<Obb> {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return Err(Error::DegenerateQuadrilateral);
    }
    let mut best: Option<(f64, Obb)> = None;
    for k in 0..hull.len() {
        let (p, q) = (hull[k], hull[(k + 1) % hull.len()]);
        let len = (q.x - p.x).hypot(q.y - p.y);
        if len == 0.0 {
            continue;
        }
        // width axis along the edge; u = (cos θ, -sin θ)
        let (ux, uy) = ((q.x - p.x) / len, (q.y - p.y) / len);
        let (vx, vy) = (-uy, ux);
        let (mut u0, mut u1, mut v0, mut v1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for h in &hull {
            let a = h.x * ux + h.y * uy;
            let b = h.x * vx + h.y * vy;
            u0 = u0.min(a);
            u1 = u1.max(a);
            v0 = v0.min(b);
            v1 = v1.max(b);
        }
        let area = (u1 - u0) * (v1 - v0);
        if best.as_ref().map_or(true, |(a, _)| area < *a) {
            let (cu, cv) = (0.5 * (u0 + u1), 0.5 * (v0 + v1));
            let theta = (-uy).atan2(ux);
            let b = Obb::new(cu * ux + cv * vx, cu * uy + cv * vy, u1 - u0, v1 - v0, theta)?;
            best = Some((area, b));
        }
    }
    best.map(|(_, b)| b.canonical()).ok_or(Error::DegenerateQuadrilateral)
}

/// Converts a quadrilateral to an oriented box in canonical form
/// (`θ` in `[0, π/2)`). Rectangles convert exactly; anything else becomes
/// its minimum-area enclosing rectangle.
pub fn aqbb_to_obb(q: &Aqbb) -> Result<Obb> {
    let v = q.vertices;
    let edge = |k: usize| {
        let (p, r) = (v[k], v[(k + 1) % 4]);
        (r.x - p.x, r.y - p.y)
    };
    let e: Vec<(f64, f64)> = (0..4).map(edge).collect();
    let len: Vec<f64> = e.iter().map(|(x, y)| x.hypot(*y)).collect();
    let scale = len.iter().cloned().fold(0.0, f64::max);
    let is_rect = scale > 0.0
        && (len[0] - len[2]).abs() <= RECT_TOL * scale
        && (len[1] - len[3]).abs() <= RECT_TOL * scale
        && (0..4).all(|k| {
            let (a, b) = (e[k], e[(k + 1) % 4]);
            (a.0 * b.0 + a.1 * b.1).abs() <= RECT_TOL * len[k] * len[(k + 1) % 4]
        });
    if !is_rect {
        return min_area_rect(&v);
    }
    let cx = v.iter().map(|p| p.x).sum::<f64>() / 4.0;
    let cy = v.iter().map(|p| p.y).sum::<f64>() / 4.0;
    let w = 0.5 * (len[0] + len[2]);
    let h = 0.5 * (len[1] + len[3]);
    let theta = (-e[0].1).atan2(e[0].0);
    Ok(Obb::new(cx, cy, w, h, theta)?.canonical())
}

/// Quadrilateral from a box's corners.
pub fn obb_to_aqbb(b: &Obb) -> Aqbb {
    Aqbb::new(b.corners()).expect("box corners are non-degenerate").0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationFormat {
    JsonLines,
    Csv,
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    image: String,
    boxes: Vec<[[f64; 2]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    size: Option<[f64; 2]>,
}

fn quad(raw: &[[f64; 2]; 4]) -> [PixelPoint; 4] {
    raw.map(|[x, y]| PixelPoint::new(x, y))
}

/// Parses annotations. Malformed lines fail with their 1-based line number;
/// nothing is skipped silently.
pub fn parse_annotations<R: BufRead>(source: R, format: AnnotationFormat) -> Result<Vec<AnnotationRecord>> {
    match format {
        AnnotationFormat::JsonLines => parse_jsonl(source),
        AnnotationFormat::Csv => parse_csv(source),
    }
}

fn parse_jsonl<R: BufRead>(source: R) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: JsonRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let quads = raw.boxes.iter().map(quad).collect();
        let rec = AnnotationRecord::new(raw.image, quads, raw.size.map(|[w, h]| (w, h))).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

fn parse_csv<R: BufRead>(source: R) -> Result<Vec<AnnotationRecord>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let mut groups: Vec<(String, Vec<[PixelPoint; 4]>, usize)> = Vec::new();
    for (n, row) in reader.records().enumerate() {
        // header is line 1
        let line_no = n + 2;
        let row = row.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if row.len() != 9 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 9 columns, found {}", row.len()),
            });
        }
        let mut c = [0.0; 8];
        for (slot, field) in c.iter_mut().zip(row.iter().skip(1)) {
            *slot = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("not a number: {field:?}"),
            })?;
        }
        let q = [
            PixelPoint::new(c[0], c[1]),
            PixelPoint::new(c[2], c[3]),
            PixelPoint::new(c[4], c[5]),
            PixelPoint::new(c[6], c[7]),
        ];
        Aqbb::new(q).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        match groups.last_mut() {
            Some((img, quads, _)) if img == &row[0] => quads.push(q),
            _ => groups.push((row[0].to_string(), vec![q], line_no)),
        }
    }
    groups
        .into_iter()
        .map(|(img, quads, line)| {
            AnnotationRecord::new(img, quads, None).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Writes records as JSON lines, LF-terminated.
pub fn write_jsonl<W: Write>(records: &[AnnotationRecord], mut out: W) -> Result<()> {
    for r in records {
        let raw = JsonRecord {
            image: r.image.clone(),
            boxes: r.boxes.iter().map(|b| b.vertices.map(|p| [p.x, p.y])).collect(),
            size: r.size.map(|(w, h)| [w, h]),
        };
        let line = serde_json::to_string(&raw).map_err(std::io::Error::other)?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Converts every box and writes `image,box,cx,cy,w,h,theta_deg`.
pub fn write_obb_csv<W: Write>(records: &[AnnotationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["image", "box", "cx", "cy", "w", "h", "theta_deg"])?;
    for r in records {
        for (n, q) in r.boxes.iter().enumerate() {
            let b = aqbb_to_obb(q)?;
            w.write_record([
                r.image.clone(),
                n.to_string(),
                b.cx().to_string(),
                b.cy().to_string(),
                b.w().to_string(),
                b.h().to_string(),
                b.theta().to_degrees().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes one row per box with columns `image,x1,y1,...,x4,y4`, the form
/// [`parse_annotations`] reads back.
pub fn write_aqbb_csv<W: Write>(records: &[AnnotationRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["image", "x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4"])?;
    for r in records {
        for b in &r.boxes {
            let mut row = vec![r.image.clone()];
            for p in b.vertices {
                row.push(p.x.to_string());
                row.push(p.y.to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Settings for [`synth_dataset`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Median long:short ratio of generated boxes.
    pub median_ratio: f64,
    /// Log-normal spread of the ratio.
    pub ratio_sigma: f64,
    /// Ratios are clamped into this range.
    pub ratio_range: (f64, f64),
    /// Orientations are uniform in this range, radians.
    pub angle_range: (f64, f64),
    /// Long side, pixels, uniform.
    pub long_side: (f64, f64),
    /// Image `(width, height)`.
    pub image_size: (f64, f64),
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            median_ratio: 20.0,
            ratio_sigma: 0.5,
            ratio_range: (1.0, 100.0),
            angle_range: (0.0, PI),
            long_side: (120.0, 500.0),
            image_size: (800.0, 600.0),
        }
    }
}

/// `n` single-box records with seeded random sizes, aspect ratios and
/// orientations.
pub fn synth_dataset(n: usize, cfg: &SynthConfig, seed: u64) -> Result<Vec<AnnotationRecord>> {
    if !(cfg.median_ratio >= 1.0 && cfg.ratio_range.0 >= 1.0 && cfg.ratio_range.0 <= cfg.ratio_range.1) {
        return Err(Error::InvalidArgument("ratio settings must be >= 1 and ordered".into()));
    }
    if !(cfg.angle_range.0 <= cfg.angle_range.1 && cfg.long_side.0 > 0.0 && cfg.long_side.0 <= cfg.long_side.1) {
        return Err(Error::InvalidArgument("angle and size ranges must be ordered and positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio_dist = LogNormal::new(cfg.median_ratio.ln(), cfg.ratio_sigma.max(0.0))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let (iw, ih) = cfg.image_size;
    let mut out = Vec::with_capacity(n);
    for idx in 0..n {
        let ratio = ratio_dist.sample(&mut rng).clamp(cfg.ratio_range.0, cfg.ratio_range.1);
        let long = rng.random_range(cfg.long_side.0..=cfg.long_side.1);
        let theta = rng.random_range(cfg.angle_range.0..=cfg.angle_range.1);
        let cx = rng.random_range(0.25 * iw..=0.75 * iw);
        let cy = rng.random_range(0.25 * ih..=0.75 * ih);
        let b = Obb::new(cx, cy, long, long / ratio, theta)?;
        out.push(AnnotationRecord::new(
            format!("synth-{idx:06}"),
            vec![b.corners()],
            Some(cfg.image_size),
        )?);
    }
    Ok(out)
}

/// Long-to-short side ratio of a converted box.
pub fn aspect_ratio(b: &Obb) -> f64 {
    b.w().max(b.h()) / b.w().min(b.h())
}
