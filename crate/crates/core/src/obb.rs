//! Oriented boxes and the per-pixel containment geometry.
//!
//! Coordinates are image pixels with `y` growing downward. The angle `theta`
//! is measured from the `+x` axis and turns visually counter-clockwise on
//! screen, so the box's width axis is `(cos θ, -sin θ)` and its height axis is
//! `(sin θ, cos θ)` in pixel coordinates. This is the orientation implied by
//! the two-branch `β` construction in [`relative_position`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in pixel space. Grid pixels sit on integer coordinates; real
/// coordinates are allowed so that oracles can supersample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Oriented bounding box `(cx, cy, w, h, θ)`.
///
/// `w` is the extent along the `θ` direction and `h` the extent
/// perpendicular to it. `θ` is kept in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obb {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

impl Obb {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self> {
        if !(cx.is_finite() && cy.is_finite() && w.is_finite() && h.is_finite() && theta.is_finite())
        {
            return Err(Error::InvalidBox(format!(
                "non-finite parameters ({cx}, {cy}, {w}, {h}, {theta})"
            )));
        }
        if w <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidBox(format!("non-positive size {w}x{h}")));
        }
        Ok(Self {
            cx,
            cy,
            w,
            h,
            theta: normalize_angle(theta),
        })
    }

    /// Same as [`Obb::new`] with the angle given in degrees.
    pub fn from_degrees(cx: f64, cy: f64, w: f64, h: f64, theta_deg: f64) -> Result<Self> {
        Self::new(cx, cy, w, h, theta_deg.to_radians())
    }

    /// Builds from a parameter vector `[cx, cy, w, h, θ]`.
    pub fn from_params(p: [f64; 5]) -> Result<Self> {
        Self::new(p[0], p[1], p[2], p[3], p[4])
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn center(&self) -> PixelPoint {
        PixelPoint::new(self.cx, self.cy)
    }
    pub fn area(&self) -> f64 {
        self.w * self.h
    }
    pub fn params(&self) -> [f64; 5] {
        [self.cx, self.cy, self.w, self.h, self.theta]
    }

    /// Unit vector along the width axis.
    pub fn width_axis(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (c, -s)
    }

    /// Unit vector along the height axis.
    pub fn height_axis(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (s, c)
    }

    /// Signed coordinates of `p` in the box frame: offset along the width
    /// axis and along the height axis.
    #[inline]
    pub fn to_local(&self, p: PixelPoint) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let dx = p.x - self.cx;
        let dy = p.y - self.cy;
        (dx * c - dy * s, dx * s + dy * c)
    }

    /// `(d_w, d_h)` through the box-frame projection. Algebraically equal to
    /// the `|d cos β|, |d sin β|` pair of [`relative_position`] but free of
    /// the `arccos` round trip.
    #[inline]
    pub fn axis_offsets(&self, p: PixelPoint) -> (f64, f64) {
        let (u, v) = self.to_local(p);
        (u.abs(), v.abs())
    }

    /// The four vertices, clockwise on screen (positive shoelace area in
    /// pixel coordinates), starting at the `(-w/2, -h/2)` corner.
    pub fn corners(&self) -> [PixelPoint; 4] {
        let (ux, uy) = self.width_axis();
        let (vx, vy) = self.height_axis();
        let hw = 0.5 * self.w;
        let hh = 0.5 * self.h;
        let at = |a: f64, b: f64| {
            PixelPoint::new(
                self.cx + a * hw * ux + b * hh * vx,
                self.cy + a * hw * uy + b * hh * vy,
            )
        };
        [at(-1.0, -1.0), at(1.0, -1.0), at(1.0, 1.0), at(-1.0, 1.0)]
    }

    /// Tight axis-aligned bounds of this box alone.
    pub fn hbb(&self) -> Hbb {
        Hbb::covering(self.corners().iter().copied()).expect("four corners")
    }

    /// Canonical representative modulo `(w, h, θ) ~ (h, w, θ - π/2)`: the one
    /// with `θ` in `[0, π/2)`.
    pub fn canonical(&self) -> Obb {
        if self.theta >= PI / 2.0 {
            let mut theta = self.theta - PI / 2.0;
            if theta >= PI / 2.0 {
                theta = 0.0;
            }
            Obb {
                w: self.h,
                h: self.w,
                theta,
                ..*self
            }
        } else {
            *self
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Obb {
        Obb {
            cx: self.cx + dx,
            cy: self.cy + dy,
            ..*self
        }
    }
}

/// Maps any finite angle into `[0, π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

/// Wraps an angle difference into `(-π/2, π/2]`.
pub fn wrap_half_pi(delta: f64) -> f64 {
    let mut r = delta.rem_euclid(PI);
    if r > PI / 2.0 {
        r -= PI;
    }
    r
}

/// Triangle geometry between a pixel and a box center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativePosition {
    /// Euclidean distance between pixel and center.
    pub d: f64,
    /// Distance component along the width axis.
    pub d_w: f64,
    /// Distance component along the height axis.
    pub d_h: f64,
    pub beta: f64,
}

/// Pixel-to-box relative position through the `arccos` construction of `β`:
/// `β = θ + arccos((cx - x)/d)` when `cy - y >= 0`, else `θ - arccos(..)`.
///
/// At the center (`d = 0`) the angle is undefined; the offsets are zero there
/// and `β` is reported as `θ`.
pub fn relative_position(b: &Obb, p: PixelPoint) -> RelativePosition {
    let ax = b.cx - p.x;
    let ay = b.cy - p.y;
    let d = ax.hypot(ay);
    if d == 0.0 {
        return RelativePosition {
            d: 0.0,
            d_w: 0.0,
            d_h: 0.0,
            beta: b.theta,
        };
    }
    let alpha = (ax / d).clamp(-1.0, 1.0).acos();
    let beta = if ay >= 0.0 {
        b.theta + alpha
    } else {
        b.theta - alpha
    };
    RelativePosition {
        d,
        d_w: (d * beta.cos()).abs(),
        d_h: (d * beta.sin()).abs(),
        beta,
    }
}

/// Hard containment `δ(p | b)`: inside when `d_w <= w/2` and `d_h <= h/2`.
/// Boundary points count as inside.
#[inline]
pub fn contains(b: &Obb, p: PixelPoint) -> bool {
    let (dw, dh) = b.axis_offsets(p);
    dw <= 0.5 * b.w && dh <= 0.5 * b.h
}

/// Horizontal (axis-aligned) box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hbb {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Hbb {
    pub fn covering(points: impl IntoIterator<Item = PixelPoint>) -> Option<Hbb> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut hbb = Hbb {
            x_min: first.x,
            y_min: first.y,
            x_max: first.x,
            y_max: first.y,
        };
        for p in it {
            hbb.x_min = hbb.x_min.min(p.x);
            hbb.y_min = hbb.y_min.min(p.y);
            hbb.x_max = hbb.x_max.max(p.x);
            hbb.y_max = hbb.y_max.max(p.y);
        }
        Some(hbb)
    }

    pub fn expanded(&self, margin: f64) -> Hbb {
        Hbb {
            x_min: self.x_min - margin,
            y_min: self.y_min - margin,
            x_max: self.x_max + margin,
            y_max: self.y_max + margin,
        }
    }

    pub fn contains(&self, p: PixelPoint) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    /// Inclusive integer lattice ranges `(i_lo..=i_hi, j_lo..=j_hi)` inside.
    pub fn lattice(&self) -> (i64, i64, i64, i64) {
        (
            self.x_min.ceil() as i64,
            self.x_max.floor() as i64,
            self.y_min.ceil() as i64,
            self.y_max.floor() as i64,
        )
    }
}

/// Smallest horizontal box covering both `a` and `b`.
pub fn enclosing_hbb(a: &Obb, b: &Obb) -> Hbb {
    Hbb::covering(a.corners().into_iter().chain(b.corners())).expect("eight corners")
}
