//! A posteriori checks of the limit system: the p(x)-Laplacian residual on
//! the annulus, the ∞-Laplacian in D, the transmission sign condition on
//! ∂D∩Ω, and feasibility of the constraint set from boundary traces.
//!
//! Grid fields are sampled through their bilinear interpolant. Residual
//! sample points sit at cell centroids, so every stencil point is itself a
//! centroid and sees the average of four nodes: the two checkerboard
//! sublattices of the node grid enter with equal weight.

use std::fmt;

use serde::Serialize;

use crate::datum::Datum;
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::geometry::{dist, Geometry, InterfaceSample, Point, RegionLabel};
use crate::grid::DiscreteField;

/// |∇u| at or below this value counts as a degenerate gradient.
pub const GRADIENT_FLOOR: f64 = 1e-8;
pub const DEFAULT_BAND: f64 = 0.05;
/// Margin above 1 for the trace estimate to certify S = ∅.
pub const FEASIBILITY_MARGIN: f64 = 0.01;

/// Something that can be evaluated at points with a natural step size.
pub trait Sampler {
    fn dim(&self) -> usize;
    fn step(&self) -> f64;
    fn value(&self, x: Point) -> f64;
    /// Gradient near `x`; grid fields return the gradient of the containing cell.
    fn gradient(&self, x: Point) -> Point;
}

impl Sampler for DiscreteField {
    fn dim(&self) -> usize {
        self.grid().dim()
    }

    fn step(&self) -> f64 {
        self.grid().h()
    }

    fn value(&self, x: Point) -> f64 {
        self.interpolate(x)
    }

    fn gradient(&self, x: Point) -> Point {
        self.cell_gradient(self.grid().cell_containing(x))
    }
}

/// A closed-form field differentiated with step `h`.
pub struct AnalyticField<F> {
    pub f: F,
    pub h: f64,
    pub dim: usize,
}

impl<F: Fn(Point) -> f64> Sampler for AnalyticField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&self) -> f64 {
        self.h
    }

    fn value(&self, x: Point) -> f64 {
        (self.f)(x)
    }

    fn gradient(&self, x: Point) -> Point {
        central_derivatives(self, x).0
    }
}

/// Central-difference gradient and Hessian with the sampler's step.
fn central_derivatives(s: &impl Sampler, x: Point) -> (Point, [[f64; 2]; 2]) {
    let h = s.step();
    let v = |a: f64, b: f64| s.value([x[0] + a * h, x[1] + b * h]);
    let c = v(0.0, 0.0);
    let (xp, xm) = (v(1.0, 0.0), v(-1.0, 0.0));
    let ux = (xp - xm) / (2.0 * h);
    let uxx = (xp - 2.0 * c + xm) / (h * h);
    if s.dim() == 1 {
        return ([ux, 0.0], [[uxx, 0.0], [0.0, 0.0]]);
    }
    let (yp, ym) = (v(0.0, 1.0), v(0.0, -1.0));
    let uy = (yp - ym) / (2.0 * h);
    let uyy = (yp - 2.0 * c + ym) / (h * h);
    let uxy = (v(1.0, 1.0) - v(1.0, -1.0) - v(-1.0, 1.0) + v(-1.0, -1.0)) / (4.0 * h * h);
    ([ux, uy], [[uxx, uxy], [uxy, uyy]])
}

fn contract(hess: &[[f64; 2]; 2], g: Point) -> f64 {
    g[0] * (hess[0][0] * g[0] + hess[0][1] * g[1]) + g[1] * (hess[1][0] * g[0] + hess[1][1] * g[1])
}

/// Requires `x` in `region` and at least two steps from ∂Ω and ∂D.
fn check_sample(geometry: &Geometry, x: Point, h: f64, region: RegionLabel) -> Result<()> {
    let label = geometry.classify_point(x)?;
    if label != region {
        return Err(Error::Diagnostics(format!("{x:?} lies in {label}, expected {region}")));
    }
    let margin = 2.0 * h * (1.0 - 1e-9);
    let mut clearance = -geometry.omega().signed_distance(x);
    if let Some(d) = geometry.inner() {
        clearance = clearance.min(d.signed_distance(x).abs());
    }
    if clearance < margin {
        return Err(Error::Diagnostics(format!(
            "{x:?} is {clearance:e} from a boundary; residuals need at least 2h = {:e}",
            2.0 * h
        )));
    }
    Ok(())
}

/// −|∇u|^{p−2}Δu − (p−2)|∇u|^{p−4}Δ_∞u − |∇u|^{p−2} ln|∇u| ⟨∇u, ∇p⟩ at an
/// annulus point.
pub fn pxlap_residual(field: &impl Sampler, exponent: &ExponentField, x: Point) -> Result<f64> {
    check_sample(exponent.geometry(), x, field.step(), RegionLabel::Annulus)?;
    let (g, hess) = central_derivatives(field, x);
    let norm = g[0].hypot(g[1]);
    if norm <= GRADIENT_FLOOR {
        return Ok(0.0);
    }
    let p = exponent.eval_p(x)?;
    let gp = exponent.eval_grad_p(x)?;
    let lap = hess[0][0] + hess[1][1];
    let inf_lap = contract(&hess, g);
    let a = norm.powf(p - 2.0);
    Ok(-a * lap - (p - 2.0) * norm.powf(p - 4.0) * inf_lap - a * norm.ln() * (g[0] * gp[0] + g[1] * gp[1]))
}

/// Δ_∞u = ⟨D²u ∇u, ∇u⟩ at a point of D.
pub fn inflap_residual(field: &impl Sampler, geometry: &Geometry, x: Point) -> Result<f64> {
    check_sample(geometry, x, field.step(), RegionLabel::DInterior)?;
    let (g, hess) = central_derivatives(field, x);
    Ok(contract(&hess, g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransmissionResult {
    pub point: Point,
    pub grad_norm_d: f64,
    pub grad_norm_annulus: f64,
    /// Mean of the two one-sided gradient norms.
    pub grad_norm: f64,
    pub normal_derivative_d: f64,
    pub normal_derivative_annulus: f64,
    pub satisfied: bool,
}

impl TransmissionResult {
    /// (|∇u|_D − 1) ∂u/∂ν from the annulus; zero when the condition holds exactly.
    pub fn product(&self) -> f64 {
        (self.grad_norm_d - 1.0) * self.normal_derivative_annulus
    }
}

/// Band test of sgn(|∇u| − 1) sgn(∂u/∂ν) = 0 at an interface sample.
///
/// Gradients are taken 1.5 steps into D and into the annulus along the
/// normal. The first factor uses |∇u| on the D side, where the constraint
/// |∇u| ≤ 1 lives; the second uses ∂u/∂ν on the annulus side.
pub fn transmission_check(
    field: &impl Sampler,
    geometry: &Geometry,
    sample: &InterfaceSample,
    band: f64,
) -> Result<TransmissionResult> {
    let s = 1.5 * field.step();
    let x = sample.point;
    let nu = sample.normal;
    let inside = [x[0] - s * nu[0], x[1] - s * nu[1]];
    let outside = [x[0] + s * nu[0], x[1] + s * nu[1]];
    for (pt, want) in [(inside, RegionLabel::DInterior), (outside, RegionLabel::Annulus)] {
        let got = geometry.classify_point(pt)?;
        if got != want {
            return Err(Error::Diagnostics(format!("one-sided stencil at {x:?} reaches {got} where {want} is needed")));
        }
    }
    let (gd, ga) = (field.gradient(inside), field.gradient(outside));
    let grad_norm_d = gd[0].hypot(gd[1]);
    let grad_norm_annulus = ga[0].hypot(ga[1]);
    let normal_derivative_d = gd[0] * nu[0] + gd[1] * nu[1];
    let normal_derivative_annulus = ga[0] * nu[0] + ga[1] * nu[1];
    let satisfied = (grad_norm_d - 1.0).abs() <= band || normal_derivative_annulus.abs() <= band;
    Ok(TransmissionResult {
        point: x,
        grad_norm_d,
        grad_norm_annulus,
        grad_norm: 0.5 * (grad_norm_d + grad_norm_annulus),
        normal_derivative_d,
        normal_derivative_annulus,
        satisfied,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    PxlapResidual,
    InflapResidual,
    Transmission,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::PxlapResidual => "pxlap_residual",
            CheckKind::InflapResidual => "inflap_residual",
            CheckKind::Transmission => "transmission",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRow {
    pub point: Point,
    pub region: RegionLabel,
    pub kind: CheckKind,
    pub value: f64,
    /// Only transmission rows carry a verdict.
    pub satisfied: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    #[serde(skip)]
    pub rows: Vec<ResidualRow>,
    pub max_abs_annulus: f64,
    pub max_abs_d: f64,
    pub interface_samples: usize,
    pub interface_fraction_satisfied: f64,
}

impl ResidualReport {
    pub fn from_rows(rows: Vec<ResidualRow>) -> Self {
        let max_of = |kind| rows.iter().filter(|r| r.kind == kind).map(|r| r.value.abs()).fold(0.0, f64::max);
        let verdicts: Vec<bool> = rows.iter().filter_map(|r| r.satisfied).collect();
        let fraction = if verdicts.is_empty() {
            1.0
        } else {
            verdicts.iter().filter(|&&v| v).count() as f64 / verdicts.len() as f64
        };
        ResidualReport {
            max_abs_annulus: max_of(CheckKind::PxlapResidual),
            max_abs_d: max_of(CheckKind::InflapResidual),
            interface_samples: verdicts.len(),
            interface_fraction_satisfied: fraction,
            rows,
        }
    }
}

/// Centroids of the grid that admit a residual stencil in `region`.
pub fn residual_points(field: &DiscreteField, region: RegionLabel) -> Vec<Point> {
    let grid = field.grid();
    grid.cells()
        .iter()
        .map(|c| c.centroid)
        .filter(|&x| check_sample(grid.geometry(), x, grid.h(), region).is_ok())
        .collect()
}

/// Residuals at every admissible centroid plus the transmission test at
/// `interface_resolution` samples of ∂D∩Ω, all on the grid's (snapped)
/// geometry.
pub fn residual_report(
    field: &DiscreteField,
    exponent: &ExponentField,
    band: f64,
    interface_resolution: usize,
) -> Result<ResidualReport> {
    let geometry = field.grid().geometry().clone();
    let exponent = ExponentField::new(exponent.finite_part().clone(), geometry.clone())?;
    let mut rows = Vec::new();
    for x in residual_points(field, RegionLabel::Annulus) {
        let value = pxlap_residual(field, &exponent, x)?;
        rows.push(ResidualRow {
            point: x,
            region: RegionLabel::Annulus,
            kind: CheckKind::PxlapResidual,
            value,
            satisfied: None,
        });
    }
    for x in residual_points(field, RegionLabel::DInterior) {
        let value = inflap_residual(field, &geometry, x)?;
        rows.push(ResidualRow {
            point: x,
            region: RegionLabel::DInterior,
            kind: CheckKind::InflapResidual,
            value,
            satisfied: None,
        });
    }
    for sample in geometry.interface_samples(interface_resolution)?.samples {
        let t = transmission_check(field, &geometry, &sample, band)?;
        rows.push(ResidualRow {
            point: sample.point,
            region: RegionLabel::Interface,
            kind: CheckKind::Transmission,
            value: t.product(),
            satisfied: Some(t.satisfied),
        });
    }
    Ok(ResidualReport::from_rows(rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEstimate {
    pub estimate: f64,
    pub worst_pair: Option<[Point; 2]>,
}

/// max |f(a) − f(b)| / |a − b| over all pairs of the point set.
pub fn trace_lipschitz_estimate(points: &[(Point, f64)]) -> Result<TraceEstimate> {
    if points.len() < 2 {
        return Err(Error::Diagnostics("trace estimate needs at least two points".into()));
    }
    let mut best = TraceEstimate { estimate: 0.0, worst_pair: None };
    for (i, &(a, fa)) in points.iter().enumerate() {
        for &(b, fb) in &points[i + 1..] {
            let d = dist(a, b);
            if d == 0.0 {
                return Err(Error::Diagnostics(format!("coincident trace points at {a:?}")));
            }
            let q = (fa - fb).abs() / d;
            if q > best.estimate || best.worst_pair.is_none() {
                best = TraceEstimate { estimate: q, worst_pair: Some([a, b]) };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeasibilityVerdict {
    NonemptyGuaranteed,
    EmptyGuaranteed,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub contact_empty: bool,
    pub trace_lipschitz_estimate: f64,
    pub verdict: FeasibilityVerdict,
    pub worst_pair: Option<[Point; 2]>,
}

/// Number of samples along the whole contact set.
const CONTACT_SAMPLES: f64 = 1000.0;

/// Decides what can be said about S from the trace of f on ∂Ω∩D̄.
pub fn assess_feasibility(geometry: &Geometry, datum: &Datum) -> Result<FeasibilityReport> {
    let pieces = geometry.contact_set();
    if pieces.is_empty() {
        return Ok(FeasibilityReport {
            contact_empty: true,
            trace_lipschitz_estimate: 0.0,
            verdict: FeasibilityVerdict::NonemptyGuaranteed,
            worst_pair: None,
        });
    }
    let omega = geometry.omega();
    let spacing = omega.perimeter().max(omega.diameter()) / CONTACT_SAMPLES;
    let mut points: Vec<(Point, f64)> = Vec::new();
    for piece in &pieces {
        for x in piece.sample(spacing) {
            if points.iter().any(|(p, _)| dist(*p, x) <= geometry.tolerance()) {
                continue;
            }
            points.push((x, datum.eval(omega, x)?));
        }
    }
    let est = if points.len() >= 2 {
        trace_lipschitz_estimate(&points)?
    } else {
        TraceEstimate { estimate: 0.0, worst_pair: None }
    };
    let verdict = if est.estimate > 1.0 + FEASIBILITY_MARGIN {
        FeasibilityVerdict::EmptyGuaranteed
    } else {
        FeasibilityVerdict::Inconclusive
    };
    Ok(FeasibilityReport {
        contact_empty: false,
        trace_lipschitz_estimate: est.estimate,
        verdict,
        worst_pair: est.worst_pair,
    })
}

/// Report for a trace given directly as a point set on ∂(Ω\D̄). Such a trace
/// is not the restriction of f to ∂Ω∩D̄, so it never certifies S on its
/// own and the verdict is always inconclusive.
pub fn assess_trace(points: &[(Point, f64)]) -> Result<FeasibilityReport> {
    let est = trace_lipschitz_estimate(points)?;
    Ok(FeasibilityReport {
        contact_empty: false,
        trace_lipschitz_estimate: est.estimate,
        verdict: FeasibilityVerdict::Inconclusive,
        worst_pair: est.worst_pair,
    })
}
