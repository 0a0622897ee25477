//! Dirichlet data f on ∂Ω.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};

/// Boundary datum as given in a problem configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Datum {
    /// 1D values at the left and right endpoints.
    Endpoints { left: f64, right: f64 },
    /// Piecewise-linear table `[arc_length, value]`, counterclockwise from
    /// the lower-left corner of a rectangle (or from angle zero on a disc),
    /// covering the whole boundary and closing up.
    Table { points: Vec<[f64; 2]> },
    /// `constant + gradient · x`, restricted to ∂Ω.
    Affine { constant: f64, gradient: Vec<f64> },
    /// The harmonic quadratic `x² − y²`.
    Saddle,
}

impl Datum {
    /// Checks the datum against Ω.
    pub fn validate(&self, omega: &Domain) -> Result<()> {
        let err = |m: String| Err(Error::Discretization(m));
        match self {
            Datum::Endpoints { left, right } => {
                if !matches!(omega, Domain::Interval { .. }) {
                    return err("endpoint data require an interval domain".into());
                }
                if !(left.is_finite() && right.is_finite()) {
                    return err("endpoint values must be finite".into());
                }
            }
            Datum::Table { points } => {
                if matches!(omega, Domain::Interval { .. }) {
                    return err("arc-length tables require a 2D domain".into());
                }
                let perimeter = omega.perimeter();
                let tol = 1e-9 * perimeter;
                if points.len() < 2 {
                    return err("datum table needs at least two points".into());
                }
                if points.iter().flatten().any(|v| !v.is_finite()) {
                    return err("datum table entries must be finite".into());
                }
                if points[0][0].abs() > tol || (points[points.len() - 1][0] - perimeter).abs() > tol {
                    return err(format!(
                        "datum table covers [{}, {}] but the boundary has length {perimeter}",
                        points[0][0],
                        points[points.len() - 1][0]
                    ));
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return err("datum table arc lengths must be strictly increasing".into());
                }
                let (first, last) = (points[0][1], points[points.len() - 1][1]);
                if (first - last).abs() > 1e-12 * (1.0 + first.abs()) {
                    return err("datum table must take the same value at both ends of the loop".into());
                }
            }
            Datum::Affine { constant, gradient } => {
                if gradient.len() != omega.dim() {
                    return err(format!(
                        "affine datum gradient has {} components, expected {}",
                        gradient.len(),
                        omega.dim()
                    ));
                }
                if !constant.is_finite() || gradient.iter().any(|v| !v.is_finite()) {
                    return err("affine datum parameters must be finite".into());
                }
            }
            Datum::Saddle => {
                if omega.dim() != 2 {
                    return err("the saddle datum is two-dimensional".into());
                }
            }
        }
        Ok(())
    }

    /// Value at a point of ∂Ω.
    pub fn eval(&self, omega: &Domain, x: Point) -> Result<f64> {
        let tol = 1e-9 * omega.diameter();
        match self {
            Datum::Endpoints { left, right } => {
                let Domain::Interval { lo, hi } = *omega else {
                    return Err(Error::Discretization("endpoint data require an interval".into()));
                };
                if (x[0] - lo).abs() <= tol {
                    Ok(*left)
                } else if (x[0] - hi).abs() <= tol {
                    Ok(*right)
                } else {
                    Err(Error::Discretization(format!("{} is not an endpoint of Ω", x[0])))
                }
            }
            Datum::Table { points } => {
                let s = omega
                    .boundary_arclength(x, tol)
                    .ok_or_else(|| Error::Discretization(format!("{x:?} is not on ∂Ω")))?;
                Ok(interpolate(points, s))
            }
            Datum::Affine { constant, gradient } => {
                Ok(constant + gradient.iter().zip(x).map(|(g, xi)| g * xi).sum::<f64>())
            }
            Datum::Saddle => Ok(x[0] * x[0] - x[1] * x[1]),
        }
    }
}

fn interpolate(points: &[[f64; 2]], s: f64) -> f64 {
    let k = points.partition_point(|p| p[0] <= s);
    if k == 0 {
        return points[0][1];
    }
    if k == points.len() {
        return points[k - 1][1];
    }
    let ([s0, v0], [s1, v1]) = (points[k - 1], points[k]);
    v0 + (v1 - v0) * (s - s0) / (s1 - s0)
}
