//! Named scenarios. Five expand to full problem configurations; the two
//! `_trace` presets are boundary traces for feasibility analysis only.

use std::f64::consts::PI;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::config::{GeometryConfig, ProblemConfig, Tolerances};
use crate::datum::Datum;
use crate::diagnostics::trace_lipschitz_estimate;
use crate::error::{Error, Result};
use crate::exponent::FinitePart;
use crate::geometry::{dist, Domain, Point};
use crate::grid::{DiscreteField, Grid};
use crate::oracle::{eval_u_infinity, solve_limit, Oracle1DProblem};
use crate::sweep::DEFAULT_SCHEDULE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    OnedCase1,
    OnedCase2,
    OnedBoundary,
    StripSlope2,
    InteriorDisc,
    HalfDiscTrace,
    TangentBallsTrace,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::OnedCase1,
        Preset::OnedCase2,
        Preset::OnedBoundary,
        Preset::StripSlope2,
        Preset::InteriorDisc,
        Preset::HalfDiscTrace,
        Preset::TangentBallsTrace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::OnedCase1 => "oned_case1",
            Preset::OnedCase2 => "oned_case2",
            Preset::OnedBoundary => "oned_boundary",
            Preset::StripSlope2 => "strip_slope2",
            Preset::InteriorDisc => "interior_disc",
            Preset::HalfDiscTrace => "half_disc_trace",
            Preset::TangentBallsTrace => "tangent_balls_trace",
        }
    }

    fn params(self) -> &'static [&'static str] {
        match self {
            Preset::OnedCase1 | Preset::OnedCase2 | Preset::OnedBoundary => &["xi", "f1", "p", "nodes"],
            Preset::StripSlope2 => &["slope", "p", "nodes"],
            Preset::InteriorDisc => &["radius", "slope", "nodes"],
            Preset::HalfDiscTrace | Preset::TangentBallsTrace => &["resolution"],
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            Error::Config(vec![format!("unknown preset {s:?}; expected one of {}", names.join(", "))])
        })
    }
}

/// Boundary values on ∂(Ω\D̄) sampled as points.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceInput {
    pub preset: Preset,
    pub resolution: f64,
    pub points: Vec<(Point, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PresetInput {
    Problem(ProblemConfig),
    Trace(TraceInput),
}

struct Params<'a> {
    preset: Preset,
    given: &'a [(String, String)],
}

impl Params<'_> {
    fn get(&self, key: &str, default: f64) -> Result<f64> {
        match self.given.iter().rev().find(|(k, _)| k == key) {
            None => Ok(default),
            Some((_, v)) => {
                v.parse::<f64>().map_err(|_| Error::Config(vec![format!("param {key}: {v:?} is not a number")]))
            }
        }
    }

    fn nodes(&self, default: usize) -> Result<usize> {
        let v = self.get("nodes", default as f64)?;
        if v.fract() != 0.0 || v < 0.0 {
            return Err(Error::Config(vec![format!("param nodes: {v} is not a count")]));
        }
        Ok(v as usize)
    }

    fn check_known(&self) -> Result<()> {
        let allowed = self.preset.params();
        let unknown: Vec<String> = self
            .given
            .iter()
            .filter(|(k, _)| !allowed.contains(&k.as_str()))
            .map(|(k, _)| format!("param {k}: not accepted by {} (accepts {})", self.preset.name(), allowed.join(", ")))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(unknown))
        }
    }
}

/// Expands a preset with `key=value` overrides into its input.
pub fn expand(preset: Preset, params: &[(String, String)]) -> Result<PresetInput> {
    let p = Params { preset, given: params };
    p.check_known()?;
    let config = match preset {
        Preset::OnedCase1 | Preset::OnedCase2 | Preset::OnedBoundary => {
            let default_f1 = match preset {
                Preset::OnedCase1 => 0.75,
                Preset::OnedCase2 => 0.3,
                _ => 0.5,
            };
            ProblemConfig {
                geometry: GeometryConfig {
                    omega: Domain::Interval { lo: 0.0, hi: 1.0 },
                    d: Some(Domain::Interval { lo: 0.0, hi: p.get("xi", 0.5)? }),
                },
                exponent: FinitePart::Constant { value: p.get("p", 4.0)? },
                datum: Datum::Endpoints { left: 0.0, right: p.get("f1", default_f1)? },
                nodes_per_side: p.nodes(256)?,
                schedule: DEFAULT_SCHEDULE.to_vec(),
                tolerances: Tolerances::default(),
            }
        }
        Preset::StripSlope2 => {
            let s = p.get("slope", 2.0)?;
            ProblemConfig {
                geometry: GeometryConfig {
                    omega: Domain::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] },
                    d: Some(Domain::Rectangle { min: [0.0, 0.0], max: [0.5, 1.0] }),
                },
                exponent: FinitePart::Constant { value: p.get("p", 4.0)? },
                // f = s·y on all of ∂Ω: 0 along the bottom, s·y up the right edge,
                // s along the top, s·y down the left edge
                datum: Datum::Table { points: vec![[0.0, 0.0], [1.0, 0.0], [2.0, s], [3.0, s], [4.0, 0.0]] },
                nodes_per_side: p.nodes(65)?,
                schedule: DEFAULT_SCHEDULE.to_vec(),
                tolerances: Tolerances::default(),
            }
        }
        Preset::InteriorDisc => ProblemConfig {
            geometry: GeometryConfig {
                omega: Domain::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] },
                d: Some(Domain::Disc { center: [0.5, 0.5], radius: p.get("radius", 0.25)? }),
            },
            exponent: FinitePart::Affine { a: 3.0, b: vec![1.0, 0.0] },
            datum: Datum::Affine { constant: 0.0, gradient: vec![p.get("slope", 2.0)?, 0.0] },
            nodes_per_side: p.nodes(65)?,
            schedule: DEFAULT_SCHEDULE.to_vec(),
            tolerances: Tolerances::default(),
        },
        Preset::HalfDiscTrace | Preset::TangentBallsTrace => {
            let resolution = p.get("resolution", 1e-3)?;
            if !(resolution > 0.0 && resolution < 0.5) {
                return Err(Error::Config(vec![format!("param resolution: {resolution} must lie in (0, 0.5)")]));
            }
            let points = if preset == Preset::HalfDiscTrace {
                half_disc_trace(resolution)?
            } else {
                tangent_balls_trace(resolution)
            };
            return Ok(PresetInput::Trace(TraceInput { preset, resolution, points }));
        }
    };
    config.validate().map_err(Error::Config)?;
    Ok(PresetInput::Problem(config))
}

/// The tent datum |θ| on |θ| ≤ π/2 and π − |θ| beyond, θ ∈ (−π, π].
fn tent(theta: f64) -> f64 {
    let t = theta.abs();
    if t <= PI / 2.0 {
        t
    } else {
        PI - t
    }
}

fn on_circle(theta: f64) -> Point {
    [theta.cos(), theta.sin()]
}

/// Unit circle with the tent datum, plus the tangent circle of radius 1/2
/// through (1,0) carrying the value 0. Angles cluster geometrically at the
/// tangency point, starting at ±resolution.
pub fn tangent_balls_trace(resolution: f64) -> Vec<(Point, f64)> {
    const RATIO: f64 = 1.05;
    let mut angles = Vec::new();
    let mut t = resolution;
    while t < PI {
        angles.push(t);
        t *= RATIO;
    }
    let mut points = vec![([1.0, 0.0], 0.0)];
    for &t in &angles {
        for theta in [t, -t] {
            points.push((on_circle(theta), tent(theta)));
            if t < PI / 2.0 {
                let c = theta.cos();
                points.push(([c * theta.cos(), c * theta.sin()], 0.0));
            }
        }
    }
    points
}

/// Unit disc with D its right half: the tent datum on the left half circle
/// and, on the diameter, a Lipschitz extension of the datum on the right
/// half circle.
///
/// The extension is the midpoint of the McShane and Whitney extensions with
/// the sampled Lipschitz constant of the right-half data.
pub fn half_disc_trace(resolution: f64) -> Result<Vec<(Point, f64)>> {
    let steps = (PI / resolution).ceil() as usize;
    let arc = |from: f64| -> Vec<(Point, f64)> {
        (0..=steps)
            .map(|k| {
                let theta = from + PI * k as f64 / steps as f64;
                let theta = if theta > PI { theta - 2.0 * PI } else { theta };
                (on_circle(theta), tent(theta))
            })
            .collect()
    };
    let right = arc(-PI / 2.0);
    let lip = trace_lipschitz_estimate(&right)?.estimate;
    let extend = |x: Point| {
        let upper = right.iter().map(|(a, f)| f + lip * dist(*a, x)).fold(f64::INFINITY, f64::min);
        let lower = right.iter().map(|(a, f)| f - lip * dist(*a, x)).fold(f64::NEG_INFINITY, f64::max);
        0.5 * (upper + lower)
    };
    let mut points = arc(PI / 2.0);
    let m = (2.0 / resolution).ceil() as usize;
    for k in 1..m {
        let x = [0.0, -1.0 + 2.0 * k as f64 / m as f64];
        points.push((x, extend(x)));
    }
    Ok(points)
}

/// A feasible competitor v, used to bound F_n(u_n) ≤ F_n(v), when the preset
/// ships one.
///
/// 1D presets use the exact limit; the disc uses a field that is constant on
/// a neighborhood of D̄ and blends linearly into the datum.
pub fn competitor(preset: Preset, config: &ProblemConfig, grid: &Arc<Grid>) -> Result<Option<DiscreteField>> {
    match preset {
        Preset::OnedCase1 | Preset::OnedCase2 | Preset::OnedBoundary => {
            let problem = oracle_problem(config)?;
            let sol = solve_limit(&problem)?;
            let values = (0..grid.node_count())
                .map(|k| eval_u_infinity(&sol, &problem, grid.node_point(k)[0]))
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(DiscreteField::new(grid.clone(), values)?))
        }
        Preset::InteriorDisc => {
            let (Some(Domain::Disc { center, radius }), Datum::Affine { constant, gradient }) =
                (config.geometry.d, &config.datum)
            else {
                return Ok(None);
            };
            let f = |x: Point| constant + gradient[0] * x[0] + gradient[1] * x[1];
            let level = f(center);
            let (inner, outer) = (radius + 0.05, radius + 0.2);
            let v = DiscreteField::from_fn(grid.clone(), |x| {
                let r = dist(x, center);
                let w = ((outer - r) / (outer - inner)).clamp(0.0, 1.0);
                (1.0 - w) * f(x) + w * level
            });
            Ok(Some(v))
        }
        _ => Ok(None),
    }
}

/// The 1D oracle problem described by a configuration, when it has that shape.
pub fn oracle_problem(config: &ProblemConfig) -> Result<Oracle1DProblem> {
    let bad = |m: &str| Error::Oracle(format!("configuration is not a one-dimensional oracle problem: {m}"));
    let (Domain::Interval { lo, hi }, Some(Domain::Interval { lo: dlo, hi: xi })) =
        (config.geometry.omega, config.geometry.d)
    else {
        return Err(bad("Ω and D must be intervals"));
    };
    if lo != 0.0 || hi != 1.0 || dlo != 0.0 {
        return Err(bad("Ω must be (0,1) and D must start at 0"));
    }
    let Datum::Endpoints { left, right } = config.datum else {
        return Err(bad("the datum must be an endpoint pair"));
    };
    if left != 0.0 {
        return Err(bad("f(0) must be 0"));
    }
    Oracle1DProblem::new(xi, right, config.exponent.clone())
}
