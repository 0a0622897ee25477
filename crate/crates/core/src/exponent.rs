//! The variable exponent: a finite C¹ part on Ω\D̄, +∞ on D, and its
//! truncations `min(p, n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, Domain, Geometry, Point, RegionLabel};

/// Finite part of the exponent, one of three forms with exact gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum FinitePart {
    Constant {
        value: f64,
    },
    /// `a + b · x`
    Affine {
        a: f64,
        b: Vec<f64>,
    },
    /// `a + b |x − center|`
    RadialAffine {
        a: f64,
        b: f64,
        center: Vec<f64>,
    },
}

fn pad(v: &[f64]) -> Point {
    [v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0)]
}

impl FinitePart {
    pub fn eval(&self, x: Point) -> f64 {
        match self {
            FinitePart::Constant { value } => *value,
            FinitePart::Affine { a, b } => {
                let b = pad(b);
                a + b[0] * x[0] + b[1] * x[1]
            }
            FinitePart::RadialAffine { a, b, center } => a + b * dist(x, pad(center)),
        }
    }

    /// Exact gradient; `None` at the apex of a radial form, where it does not exist.
    pub fn gradient(&self, x: Point) -> Option<Point> {
        match self {
            FinitePart::Constant { .. } => Some([0.0, 0.0]),
            FinitePart::Affine { b, .. } => Some(pad(b)),
            FinitePart::RadialAffine { b, center, .. } => {
                let c = pad(center);
                let r = dist(x, c);
                (r > 0.0).then(|| [b * (x[0] - c[0]) / r, b * (x[1] - c[1]) / r])
            }
        }
    }

    fn check_shape(&self, dim: usize) -> Result<()> {
        let (params, len): (Vec<f64>, Option<usize>) = match self {
            FinitePart::Constant { value } => (vec![*value], None),
            FinitePart::Affine { a, b } => (std::iter::once(*a).chain(b.iter().copied()).collect(), Some(b.len())),
            FinitePart::RadialAffine { a, b, center } => {
                ([*a, *b].into_iter().chain(center.iter().copied()).collect(), Some(center.len()))
            }
        };
        if params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Exponent("exponent parameters must be finite".into()));
        }
        if let Some(len) = len {
            if len != dim {
                return Err(Error::Exponent(format!("exponent vector parameter has {len} components, expected {dim}")));
            }
        }
        Ok(())
    }

    /// Exact (inf, sup) of the finite part over Ω̄.
    pub fn range_over(&self, omega: &Domain) -> (f64, f64) {
        match self {
            FinitePart::Constant { value } => (*value, *value),
            FinitePart::Affine { a, b } => {
                let b = pad(b);
                match *omega {
                    Domain::Disc { center, radius } => {
                        let mid = a + b[0] * center[0] + b[1] * center[1];
                        let spread = radius * b[0].hypot(b[1]);
                        (mid - spread, mid + spread)
                    }
                    _ => extremes(omega.corners().into_iter().map(|c| self.eval(c))),
                }
            }
            FinitePart::RadialAffine { a, b, center } => {
                let c = pad(center);
                let (rmin, rmax) = match *omega {
                    Domain::Disc { center: oc, radius } => {
                        let off = dist(c, oc);
                        ((off - radius).max(0.0), off + radius)
                    }
                    _ => {
                        let far = omega.corners().into_iter().map(|k| dist(k, c)).fold(0.0, f64::max);
                        (omega.signed_distance(c).max(0.0), far)
                    }
                };
                extremes([a + b * rmin, a + b * rmax].into_iter())
            }
        }
    }
}

fn extremes(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// The exponent p(·) on Ω: finite part on the annulus, +∞ on D.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentField {
    finite: FinitePart,
    geometry: Geometry,
    p_minus: f64,
    p_plus: f64,
}

impl ExponentField {
    /// Validates `p_− > N`. The bounds are taken over all of Ω̄, which
    /// bounds the annulus extremes from outside.
    pub fn new(finite: FinitePart, geometry: Geometry) -> Result<Self> {
        let dim = geometry.dim();
        finite.check_shape(dim)?;
        let (p_minus, p_plus) = finite.range_over(geometry.omega());
        if p_minus <= dim as f64 {
            return Err(Error::Exponent(format!("p_- = {p_minus} must exceed the dimension N = {dim}")));
        }
        if !p_plus.is_finite() {
            return Err(Error::Exponent("p_+ must be finite".into()));
        }
        Ok(ExponentField { finite, geometry, p_minus, p_plus })
    }

    pub fn finite_part(&self) -> &FinitePart {
        &self.finite
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    /// p(x), +∞ inside D. Interface points take the annulus-side value.
    pub fn eval_p(&self, x: Point) -> Result<f64> {
        Ok(match self.geometry.classify_point(x)? {
            RegionLabel::DInterior => f64::INFINITY,
            _ => self.finite.eval(x),
        })
    }

    pub fn eval_grad_p(&self, x: Point) -> Result<Point> {
        if self.geometry.classify_point(x)? == RegionLabel::DInterior {
            return Err(Error::Exponent(format!("∇p is undefined at {x:?} inside D")));
        }
        self.finite
            .gradient(x)
            .ok_or_else(|| Error::Exponent(format!("radial exponent is not differentiable at {x:?}")))
    }

    pub fn truncate(&self, n: f64) -> Result<TruncatedExponent> {
        let dim = self.dim() as f64;
        if n.is_nan() || n <= dim {
            return Err(Error::Exponent(format!("truncation level n = {n} must exceed N = {dim}")));
        }
        Ok(TruncatedExponent { field: self.clone(), n })
    }
}

/// `p_n = min(p, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedExponent {
    field: ExponentField,
    n: f64,
}

impl TruncatedExponent {
    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn field(&self) -> &ExponentField {
        &self.field
    }

    pub fn eval(&self, x: Point) -> Result<f64> {
        Ok(self.field.eval_p(x)?.min(self.n))
    }

    /// Value on an annulus point without reclassifying it.
    pub(crate) fn annulus_value(&self, x: Point) -> f64 {
        self.field.finite.eval(x).min(self.n)
    }

    /// True when n > p_+, so that p_n = p on the annulus and p_n = n on D.
    pub fn is_large(&self) -> bool {
        self.n > self.field.p_plus
    }
}
