//! Convex reference domains Ω and D, region classification, the interface
//! ∂D∩Ω with its outward normal, and the contact set ∂Ω∩D̄.
//!
//! Points are stored as `[f64; 2]`; one-dimensional geometries ignore the
//! second coordinate and keep it at zero.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Relative geometric tolerance, scaled by the diameter of Ω.
pub const GEOMETRIC_TOLERANCE: f64 = 1e-9;

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// A convex shape: the only kinds the toolkit can represent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    Interval { lo: f64, hi: f64 },
    Rectangle { min: Point, max: Point },
    Disc { center: Point, radius: f64 },
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Domain::Interval { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Domain::Rectangle { min, max } => {
                min.iter().chain(max.iter()).all(|v| v.is_finite()) && min[0] < max[0] && min[1] < max[1]
            }
            Domain::Disc { center, radius } => {
                center.iter().all(|v| v.is_finite()) && radius.is_finite() && radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry(format!("{self:?} has empty interior or non-finite bounds")))
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Rectangle { min, max } => dist(min, max),
            Domain::Disc { radius, .. } => 2.0 * radius,
        }
    }

    /// Lebesgue measure (length in 1D, area in 2D).
    pub fn measure(&self) -> f64 {
        match *self {
            Domain::Interval { lo, hi } => hi - lo,
            Domain::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
            Domain::Disc { radius, .. } => PI * radius * radius,
        }
    }

    /// Signed distance to the boundary, negative inside.
    pub fn signed_distance(&self, x: Point) -> f64 {
        match *self {
            Domain::Interval { lo, hi } => (lo - x[0]).max(x[0] - hi),
            Domain::Rectangle { min, max } => {
                let dx = (min[0] - x[0]).max(x[0] - max[0]);
                let dy = (min[1] - x[1]).max(x[1] - max[1]);
                let outside = dx.max(0.0).hypot(dy.max(0.0));
                outside + dx.max(dy).min(0.0)
            }
            Domain::Disc { center, radius } => dist(x, center) - radius,
        }
    }

    pub fn corners(&self) -> Vec<Point> {
        match *self {
            Domain::Interval { lo, hi } => vec![[lo, 0.0], [hi, 0.0]],
            Domain::Rectangle { min, max } => {
                vec![min, [max[0], min[1]], max, [min[0], max[1]]]
            }
            Domain::Disc { .. } => Vec::new(),
        }
    }

    /// Length of the boundary (number of endpoints in 1D).
    pub fn perimeter(&self) -> f64 {
        match *self {
            Domain::Interval { .. } => 2.0,
            Domain::Rectangle { min, max } => 2.0 * ((max[0] - min[0]) + (max[1] - min[1])),
            Domain::Disc { radius, .. } => 2.0 * PI * radius,
        }
    }

    /// Counterclockwise arc length of a boundary point, measured from the
    /// lower-left corner (rectangle) or from angle zero (disc).
    pub fn boundary_arclength(&self, x: Point, tol: f64) -> Option<f64> {
        if self.signed_distance(x).abs() > tol {
            return None;
        }
        match *self {
            Domain::Interval { .. } => None,
            Domain::Rectangle { min, max } => {
                let (w, h) = (max[0] - min[0], max[1] - min[1]);
                if (x[1] - min[1]).abs() <= tol {
                    Some((x[0] - min[0]).clamp(0.0, w))
                } else if (x[0] - max[0]).abs() <= tol {
                    Some(w + (x[1] - min[1]).clamp(0.0, h))
                } else if (x[1] - max[1]).abs() <= tol {
                    Some(w + h + (max[0] - x[0]).clamp(0.0, w))
                } else {
                    Some(2.0 * w + h + (max[1] - x[1]).clamp(0.0, h))
                }
            }
            Domain::Disc { center, radius } => {
                let mut theta = (x[1] - center[1]).atan2(x[0] - center[0]);
                if theta < 0.0 {
                    theta += 2.0 * PI;
                }
                Some(radius * theta)
            }
        }
    }
}

/// Region tag of a point of Ω̄.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    #[serde(rename = "D_interior")]
    DInterior,
    #[serde(rename = "annulus")]
    Annulus,
    #[serde(rename = "interface")]
    Interface,
    #[serde(rename = "outer_boundary")]
    OuterBoundary,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionLabel::DInterior => "D_interior",
            RegionLabel::Annulus => "annulus",
            RegionLabel::Interface => "interface",
            RegionLabel::OuterBoundary => "outer_boundary",
        })
    }
}

/// A point of ∂D∩Ω with the unit normal pointing from D into Ω\D̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSample {
    pub point: Point,
    pub normal: Point,
    pub arc_weight: f64,
}

#[derive(Debug, Clone, Default)]
pub struct InterfaceSamples {
    pub samples: Vec<InterfaceSample>,
    /// Set when D̄ covers Ω and there is no interface at all.
    pub no_interface: bool,
}

impl InterfaceSamples {
    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.arc_weight).sum()
    }
}

/// A connected piece of ∂Ω∩D̄.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContactPiece {
    Point { at: Point },
    Segment { from: Point, to: Point },
    Circle { center: Point, radius: f64 },
}

impl ContactPiece {
    /// Points spaced at most `spacing` apart along the piece, endpoints included.
    pub fn sample(&self, spacing: f64) -> Vec<Point> {
        match *self {
            ContactPiece::Point { at } => vec![at],
            ContactPiece::Segment { from, to } => {
                let len = dist(from, to);
                let k = ((len / spacing).ceil() as usize).max(1);
                (0..=k)
                    .map(|i| {
                        let t = i as f64 / k as f64;
                        [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])]
                    })
                    .collect()
            }
            ContactPiece::Circle { center, radius } => {
                let k = ((2.0 * PI * radius / spacing).ceil() as usize).max(3);
                (0..k)
                    .map(|i| {
                        let t = 2.0 * PI * i as f64 / k as f64;
                        [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                    })
                    .collect()
            }
        }
    }
}

/// The pair (Ω, D). `inner` is `None` when the exponent is finite everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    omega: Domain,
    inner: Option<Domain>,
    tol: f64,
}

impl Geometry {
    pub fn new(omega: Domain, inner: Option<Domain>) -> Result<Self> {
        omega.validate()?;
        let tol = GEOMETRIC_TOLERANCE * omega.diameter();
        if let Some(d) = inner {
            d.validate()?;
            if d.dim() != omega.dim() {
                return Err(Error::Geometry(format!(
                    "D has dimension {} but Ω has dimension {}",
                    d.dim(),
                    omega.dim()
                )));
            }
            if !contained_in(&d, &omega, tol) {
                return Err(Error::Geometry(format!("D = {d:?} is not contained in Ω̄ = {omega:?}")));
            }
        }
        Ok(Geometry { omega, inner, tol })
    }

    pub fn omega(&self) -> &Domain {
        &self.omega
    }

    pub fn inner(&self) -> Option<&Domain> {
        self.inner.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn classify_point(&self, x: Point) -> Result<RegionLabel> {
        let sd = self.omega.signed_distance(x);
        if sd > self.tol {
            return Err(Error::Geometry(format!("point {x:?} lies outside Ω̄")));
        }
        if sd >= -self.tol {
            return Ok(RegionLabel::OuterBoundary);
        }
        Ok(match &self.inner {
            None => RegionLabel::Annulus,
            Some(d) => {
                let sd_d = d.signed_distance(x);
                if sd_d.abs() <= self.tol {
                    RegionLabel::Interface
                } else if sd_d < 0.0 {
                    RegionLabel::DInterior
                } else {
                    RegionLabel::Annulus
                }
            }
        })
    }

    /// The set ∂Ω∩D̄ as a list of points, segments or whole circles.
    pub fn contact_set(&self) -> Vec<ContactPiece> {
        let Some(d) = self.inner else {
            return Vec::new();
        };
        let tol = self.tol;
        match (self.omega, d) {
            (Domain::Interval { lo, hi }, _) => [lo, hi]
                .into_iter()
                .filter(|&e| d.signed_distance([e, 0.0]) <= tol)
                .map(|e| ContactPiece::Point { at: [e, 0.0] })
                .collect(),
            (Domain::Rectangle { min, max }, Domain::Rectangle { min: dmin, max: dmax }) => {
                let mut out = Vec::new();
                // bottom, right, top, left: counterclockwise
                if (dmin[1] - min[1]).abs() <= tol {
                    out.push(segment_or_point([dmin[0], min[1]], [dmax[0], min[1]], tol));
                }
                if (dmax[0] - max[0]).abs() <= tol {
                    out.push(segment_or_point([max[0], dmin[1]], [max[0], dmax[1]], tol));
                }
                if (dmax[1] - max[1]).abs() <= tol {
                    out.push(segment_or_point([dmax[0], max[1]], [dmin[0], max[1]], tol));
                }
                if (dmin[0] - min[0]).abs() <= tol {
                    out.push(segment_or_point([min[0], dmax[1]], [min[0], dmin[1]], tol));
                }
                out
            }
            (Domain::Rectangle { min, max }, Domain::Disc { center, radius }) => {
                let mut out = Vec::new();
                if (center[1] - radius - min[1]).abs() <= tol {
                    out.push(ContactPiece::Point { at: [center[0], min[1]] });
                }
                if (max[0] - center[0] - radius).abs() <= tol {
                    out.push(ContactPiece::Point { at: [max[0], center[1]] });
                }
                if (max[1] - center[1] - radius).abs() <= tol {
                    out.push(ContactPiece::Point { at: [center[0], max[1]] });
                }
                if (center[0] - radius - min[0]).abs() <= tol {
                    out.push(ContactPiece::Point { at: [min[0], center[1]] });
                }
                out
            }
            (Domain::Disc { center, radius }, Domain::Disc { center: dc, radius: dr }) => {
                let offset = dist(center, dc);
                if offset <= tol && (radius - dr).abs() <= tol {
                    vec![ContactPiece::Circle { center, radius }]
                } else if offset + dr >= radius - tol && offset > tol {
                    let u = [(dc[0] - center[0]) / offset, (dc[1] - center[1]) / offset];
                    vec![ContactPiece::Point { at: [center[0] + radius * u[0], center[1] + radius * u[1]] }]
                } else {
                    Vec::new()
                }
            }
            (Domain::Disc { .. }, Domain::Rectangle { .. }) => d
                .corners()
                .into_iter()
                .filter(|&c| self.omega.signed_distance(c).abs() <= tol)
                .map(|at| ContactPiece::Point { at })
                .collect(),
            (_, Domain::Interval { .. }) => Vec::new(),
        }
    }

    /// Samples of ∂D∩Ω generated from the analytic shape of D.
    ///
    /// `resolution` is the total number of samples for curves and segments;
    /// a 1D interface always consists of isolated points with unit weight.
    pub fn interface_samples(&self, resolution: usize) -> Result<InterfaceSamples> {
        if resolution == 0 {
            return Err(Error::Geometry("interface resolution must be at least 1".into()));
        }
        let Some(d) = self.inner else {
            return Ok(InterfaceSamples { samples: Vec::new(), no_interface: true });
        };
        let tol = self.tol;
        let interior = |p: Point| self.omega.signed_distance(p) < -tol;
        let samples = match d {
            Domain::Interval { lo, hi } => {
                let mut v = Vec::new();
                if interior([lo, 0.0]) {
                    v.push(InterfaceSample { point: [lo, 0.0], normal: [-1.0, 0.0], arc_weight: 1.0 });
                }
                if interior([hi, 0.0]) {
                    v.push(InterfaceSample { point: [hi, 0.0], normal: [1.0, 0.0], arc_weight: 1.0 });
                }
                v
            }
            Domain::Rectangle { min, max } => {
                let edges = [
                    ([min[0], min[1]], [max[0], min[1]], [0.0, -1.0]),
                    ([max[0], min[1]], [max[0], max[1]], [1.0, 0.0]),
                    ([max[0], max[1]], [min[0], max[1]], [0.0, 1.0]),
                    ([min[0], max[1]], [min[0], min[1]], [-1.0, 0.0]),
                ];
                let inside: Vec<_> =
                    edges.iter().filter(|(a, b, _)| interior([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0])).collect();
                let total: f64 = inside.iter().map(|(a, b, _)| dist(*a, *b)).sum();
                let mut v = Vec::new();
                for (a, b, nu) in inside {
                    let len = dist(*a, *b);
                    let k = ((resolution as f64 * len / total).round() as usize).max(1);
                    for i in 0..k {
                        let t = (i as f64 + 0.5) / k as f64;
                        v.push(InterfaceSample {
                            point: [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
                            normal: *nu,
                            arc_weight: len / k as f64,
                        });
                    }
                }
                v
            }
            Domain::Disc { center, radius } => {
                let w = 2.0 * PI * radius / resolution as f64;
                (0..resolution)
                    .filter_map(|k| {
                        let t = 2.0 * PI * (k as f64 + 0.5) / resolution as f64;
                        let normal = [t.cos(), t.sin()];
                        let point = [center[0] + radius * normal[0], center[1] + radius * normal[1]];
                        interior(point).then_some(InterfaceSample { point, normal, arc_weight: w })
                    })
                    .collect()
            }
        };
        let no_interface = samples.is_empty();
        Ok(InterfaceSamples { samples, no_interface })
    }

    /// Same Ω, different D (used when the grid snaps D to its lines).
    pub(crate) fn with_inner(&self, inner: Option<Domain>) -> Result<Self> {
        Geometry::new(self.omega, inner)
    }
}

fn segment_or_point(from: Point, to: Point, tol: f64) -> ContactPiece {
    if dist(from, to) <= tol {
        ContactPiece::Point { at: from }
    } else {
        ContactPiece::Segment { from, to }
    }
}

fn contained_in(d: &Domain, omega: &Domain, tol: f64) -> bool {
    match (*d, *omega) {
        (Domain::Interval { lo, hi }, Domain::Interval { lo: a, hi: b }) => lo >= a - tol && hi <= b + tol,
        (Domain::Disc { center, radius }, Domain::Disc { center: c, radius: r }) => dist(center, c) + radius <= r + tol,
        (Domain::Disc { center, radius }, Domain::Rectangle { min, max }) => {
            center[0] - radius >= min[0] - tol
                && center[0] + radius <= max[0] + tol
                && center[1] - radius >= min[1] - tol
                && center[1] + radius <= max[1] + tol
        }
        (Domain::Rectangle { .. }, _) => d.corners().iter().all(|&c| omega.signed_distance(c) <= tol),
        _ => false,
    }
}
