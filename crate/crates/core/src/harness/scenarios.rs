use std::f64::consts::PI;

use crate::obb::Obb;

/// A regression problem: start from `init`, reach `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub target: Obb,
    pub init: Obb,
}

/// Long side of every scenario target, in pixels.
const LONG_SIDE: f64 = 100.0;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Translation,
    Rotation,
    Scale,
    Combined,
}

impl Kind {
    const ALL: [Kind; 4] = [Kind::Translation, Kind::Rotation, Kind::Scale, Kind::Combined];

    fn tag(&self) -> &'static str {
        match self {
            Kind::Translation => "trans",
            Kind::Rotation => "rot",
            Kind::Scale => "scale",
            Kind::Combined => "comb",
        }
    }
}

/// Target orientation and the full perturbation applied to it.
#[derive(Debug, Clone, Copy)]
struct Variant {
    tag: &'static str,
    theta: f64,
    shift: (f64, f64),
    scale: f64,
    rotation_deg: f64,
}

const VARIANTS: [Variant; 3] = [
    Variant {
        tag: "a",
        theta: PI / 6.0,
        shift: (6.0, 6.0),
        scale: 1.2,
        rotation_deg: 15.0,
    },
    Variant {
        tag: "b",
        theta: 2.0 * PI / 3.0,
        shift: (-6.0, 4.0),
        scale: 0.85,
        rotation_deg: -15.0,
    },
    Variant {
        tag: "c",
        theta: 5.0 * PI / 12.0,
        shift: (-5.0, -5.0),
        scale: 1.25,
        rotation_deg: 12.0,
    },
];

fn build(ratio: f64, kind: Kind, v: &Variant, id: String) -> Scenario {
    let target = Obb::new(0.0, 0.0, LONG_SIDE, LONG_SIDE / ratio, v.theta).expect("valid target");
    let (mut dx, mut dy, mut s, mut rot) = (0.0, 0.0, 1.0, 0.0);
    match kind {
        Kind::Translation => (dx, dy) = v.shift,
        Kind::Rotation => rot = v.rotation_deg,
        Kind::Scale => s = v.scale,
        Kind::Combined => {
            (dx, dy) = v.shift;
            s = v.scale;
            rot = v.rotation_deg;
        }
    }
    let init = Obb::new(
        target.cx() + dx,
        target.cy() + dy,
        target.w() * s,
        target.h() * s,
        target.theta() + rot.to_radians(),
    )
    .expect("valid init");
    Scenario { id, target, init }
}

/// The 12 canonical scenarios: aspect ratios 1:1, 1:5 and 1:20 crossed with
/// translation, rotation, scale and combined perturbations. Ids look like
/// `ratio20-rot`.
pub fn standard_suite() -> Vec<Scenario> {
    let mut out = Vec::new();
    for ratio in [1.0, 5.0, 20.0] {
        for kind in Kind::ALL {
            out.push(build(ratio, kind, &VARIANTS[0], format!("ratio{ratio}-{}", kind.tag())));
        }
    }
    out
}

/// Twelve scenarios at one aspect ratio: the four perturbation kinds under
/// three target orientations and perturbation signs. Ids look like
/// `ratio20-rot-b`.
pub fn aspect_suite(ratio: f64) -> Vec<Scenario> {
    let mut out = Vec::new();
    for v in &VARIANTS {
        for kind in Kind::ALL {
            out.push(build(ratio, kind, v, format!("ratio{ratio}-{}-{}", kind.tag(), v.tag)));
        }
    }
    out
}

/// Looks up a scenario by id in both suites.
pub fn find_scenario(id: &str) -> Option<Scenario> {
    standard_suite()
        .into_iter()
        .chain([1.0, 5.0, 20.0].into_iter().flat_map(aspect_suite))
        .find(|s| s.id == id)
}

/// Axis-aligned version of a scenario: both boxes get `θ = 0`, so the
/// rotation part of the perturbation disappears.
pub fn horizontal(s: &Scenario) -> Scenario {
    let flat = |b: &Obb| Obb::new(b.cx(), b.cy(), b.w(), b.h(), 0.0).expect("valid");
    Scenario {
        id: format!("{}-h", s.id),
        target: flat(&s.target),
        init: flat(&s.init),
    }
}
