//! Exact rotated-rectangle overlap through convex polygon clipping.
//!
//! This path never touches a pixel grid and serves as the ground truth the
//! pixel statistics and the soft measure are checked against.

use crate::obb::{Obb, PixelPoint};

/// On-line classification tolerance, in pixels.
pub const CLIP_EPS: f64 = 1e-9;

/// Convex polygon with vertices in counter-clockwise mathematical
/// orientation (positive shoelace area). Either empty or at least three
/// vertices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<PixelPoint>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a polygon from vertices, fixing orientation and removing
    /// duplicate and collinear vertices. Fewer than three surviving vertices
    /// give the empty polygon.
    pub fn new(vertices: Vec<PixelPoint>) -> Self {
        let mut vertices = dedup(vertices);
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        if vertices.len() < 3 {
            vertices.clear();
        }
        Self { vertices }
    }

    pub fn from_obb(b: &Obb) -> Self {
        // corners() is already positively oriented
        Self {
            vertices: b.corners().to_vec(),
        }
    }

    pub fn vertices(&self) -> &[PixelPoint] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }
}

fn cross(o: PixelPoint, a: PixelPoint, b: PixelPoint) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn signed_area(v: &[PixelPoint]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..n {
        let p = v[k];
        let q = v[(k + 1) % n];
        s += p.x * q.y - q.x * p.y;
    }
    0.5 * s
}

fn dedup(mut v: Vec<PixelPoint>) -> Vec<PixelPoint> {
    let near = |a: PixelPoint, b: PixelPoint| (a.x - b.x).abs() <= CLIP_EPS && (a.y - b.y).abs() <= CLIP_EPS;
    v.dedup_by(|a, b| near(*a, *b));
    while v.len() > 1 && near(v[0], v[v.len() - 1]) {
        v.pop();
    }
    // drop collinear vertices until none remain
    let mut changed = true;
    while changed && v.len() >= 3 {
        changed = false;
        let n = v.len();
        for k in 0..n {
            let prev = v[(k + n - 1) % n];
            let next = v[(k + 1) % n];
            let len = ((next.x - prev.x).powi(2) + (next.y - prev.y).powi(2)).sqrt().max(1.0);
            if cross(prev, v[k], next).abs() <= CLIP_EPS * len {
                v.remove(k);
                changed = true;
                break;
            }
        }
    }
    v
}

/// Sutherland–Hodgman clip of `subject` against the convex `clip_region`.
pub fn clip(subject: &ConvexPolygon, clip_region: &ConvexPolygon) -> ConvexPolygon {
    if subject.is_empty() || clip_region.is_empty() {
        return ConvexPolygon::empty();
    }
    let mut output = subject.vertices.clone();
    let c = &clip_region.vertices;
    for k in 0..c.len() {
        if output.is_empty() {
            break;
        }
        let a = c[k];
        let b = c[(k + 1) % c.len()];
        let edge_len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        // signed distance to the edge line, positive on the inner (left) side
        let side = |p: PixelPoint| cross(a, b, p) / edge_len;
        let input = std::mem::take(&mut output);
        for m in 0..input.len() {
            let cur = input[m];
            let prev = input[(m + input.len() - 1) % input.len()];
            let dc = side(cur);
            let dp = side(prev);
            let cur_in = dc >= -CLIP_EPS;
            let prev_in = dp >= -CLIP_EPS;
            if cur_in {
                if !prev_in {
                    output.push(intersect(prev, cur, dp, dc));
                }
                output.push(cur);
            } else if prev_in {
                output.push(intersect(prev, cur, dp, dc));
            }
        }
    }
    ConvexPolygon::new(output)
}

fn intersect(p: PixelPoint, q: PixelPoint, dp: f64, dq: f64) -> PixelPoint {
    let t = dp / (dp - dq);
    PixelPoint::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y))
}

/// Shoelace area; zero for the empty polygon.
pub fn area(poly: &ConvexPolygon) -> f64 {
    signed_area(&poly.vertices).max(0.0)
}

/// Area of `a ∩ b`.
pub fn intersection_area(a: &Obb, b: &Obb) -> f64 {
    area(&clip(&ConvexPolygon::from_obb(a), &ConvexPolygon::from_obb(b)))
}

/// Exact IoU of two oriented boxes. Edge or point contact gives 0.
pub fn exact_iou(a: &Obb, b: &Obb) -> f64 {
    let inter = intersection_area(a, b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}
