//! Minimization of the discrete F_n over nodal fields with prescribed
//! Dirichlet values.
//!
//! Every method is a descent method with Armijo backtracking. The search
//! direction is the gradient preconditioned by the identity, by the
//! diagonal of the exponent-2 stiffness matrix, or by the (regularized)
//! Hessian of F_n itself. The sufficient-decrease test uses an energy
//! difference computed cell by cell, so the line search stays meaningful
//! once the energy change falls below the resolution of the total.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::banded::BandedSpd;
use crate::datum::Datum;
use crate::energy::{EnergyModel, EnergyReport};
use crate::error::{Error, Result};
use crate::exponent::TruncatedExponent;
use crate::grid::{DiscreteField, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    None,
    Diagonal,
    #[default]
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    /// Relative to the range of the boundary datum.
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub armijo_constant: f64,
    pub backtrack_factor: f64,
    pub preconditioner: Preconditioner,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            gradient_tolerance: 1e-8,
            max_iterations: 20000,
            armijo_constant: 1e-4,
            backtrack_factor: 0.5,
            preconditioner: Preconditioner::Newton,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !(self.gradient_tolerance > 0.0) {
            errs.push("gradient_tolerance must be positive".to_string());
        }
        if self.max_iterations == 0 {
            errs.push("max_iterations must be positive".to_string());
        }
        if !(self.armijo_constant > 0.0 && self.armijo_constant < 1.0) {
            errs.push("armijo_constant must lie in (0, 1)".to_string());
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            errs.push("backtrack_factor must lie in (0, 1)".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Sup norm of the preconditioned gradient at the returned iterate.
    pub final_gradient_norm: f64,
    pub final_energy: EnergyReport,
    pub line_search_failures: usize,
    pub converged: bool,
}

const MAX_BACKTRACKS: usize = 80;
const HESSIAN_REGULARIZATION: f64 = 1e-12;

fn datum_scale(grid: &Grid, u: &[f64]) -> f64 {
    let (lo, hi) = (0..grid.node_count())
        .filter(|&k| grid.is_dirichlet(k))
        .map(|k| u[k])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range > 0.0 {
        range
    } else {
        1.0
    }
}

fn max_diag(m: &BandedSpd) -> f64 {
    (0..m.len()).map(|i| m.diag(i)).fold(0.0, f64::max)
}

/// Discrete harmonic extension of the datum: the minimizer of the
/// exponent-2 energy with the same cell gradients.
pub fn initial_guess(grid: &Arc<Grid>, datum: &Datum) -> Result<DiscreteField> {
    let mut u = DiscreteField::zeros(grid.clone()).impose_dirichlet(datum)?;
    // solve for the deviation from one boundary value so constant data stay exact
    let base = u.values()[0];
    for k in 0..grid.node_count() {
        let v = &mut u.values_mut()[k];
        *v = if grid.is_dirichlet(k) { *v - base } else { 0.0 };
    }
    if grid.free_nodes().is_empty() {
        return Ok(shift(u, base));
    }
    let model = EnergyModel::uniform(grid, 2.0);
    let mut rhs: Vec<f64> = model.free_gradient(u.values())?.into_iter().map(|g| -g).collect();
    let mut k = EnergyModel::stiffness(grid);
    k.factorize().map_err(|i| Error::Minimizer(format!("harmonic extension matrix is singular at row {i}")))?;
    k.solve_factored(&mut rhs);
    for (&node, w) in grid.free_nodes().iter().zip(rhs) {
        u.values_mut()[node] = w;
    }
    Ok(shift(u, base))
}

fn shift(mut u: DiscreteField, c: f64) -> DiscreteField {
    for v in u.values_mut() {
        *v += c;
    }
    u
}

/// Minimizes F_n with Dirichlet data `datum`.
///
/// Without a warm start the harmonic extension of the datum is used. The
/// warm start's boundary values are overwritten by the datum.
pub fn solve_n(
    grid: &Arc<Grid>,
    exponent: &TruncatedExponent,
    datum: &Datum,
    warm_start: Option<&DiscreteField>,
    config: &SolveConfig,
) -> Result<(DiscreteField, SolveStats)> {
    config.validate().map_err(|e| Error::Minimizer(e.join("; ")))?;
    if !exponent.n().is_finite() {
        return Err(Error::Minimizer("the truncation level must be finite".into()));
    }
    let mut u = match warm_start {
        Some(w) => {
            let wg = w.grid();
            if wg.shape() != grid.shape() || wg.spacing() != grid.spacing() {
                return Err(Error::Minimizer("warm start lives on a different grid".into()));
            }
            if !w.is_finite() {
                return Err(Error::Minimizer("warm start contains non-finite values".into()));
            }
            DiscreteField::new(grid.clone(), w.values().to_vec())?.impose_dirichlet(datum)?
        }
        None => initial_guess(grid, datum)?,
    };

    let model = EnergyModel::new(grid, exponent);
    let stiffness = EnergyModel::stiffness(grid);
    let stiff_diag: Vec<f64> = (0..stiffness.len()).map(|i| stiffness.diag(i)).collect();
    let stiff_max = stiff_diag.iter().copied().fold(0.0, f64::max);
    let tol = config.gradient_tolerance * datum_scale(grid, u.values());
    let cell_volume = grid.spacing()[..grid.dim()].iter().product::<f64>();
    let free = grid.free_nodes().to_vec();

    let mut failures = 0;
    let mut converged = false;
    let mut measure = f64::INFINITY;
    let mut iterations = 0;
    let mut gd_step = 1.0f64;
    let mut delta = vec![0.0; grid.node_count()];

    while iterations <= config.max_iterations {
        let grad = model.free_gradient(u.values())?;
        if grad.iter().all(|&g| g == 0.0) {
            measure = 0.0;
            converged = true;
            break;
        }
        let direction: Vec<f64> = match config.preconditioner {
            Preconditioner::None => grad.iter().map(|g| -g / cell_volume).collect(),
            Preconditioner::Diagonal => grad.iter().zip(&stiff_diag).map(|(g, d)| -g / d).collect(),
            Preconditioner::Newton => newton_direction(&model, u.values(), &grad, &stiffness, stiff_max)?,
        };
        measure = direction.iter().fold(0.0, |m, d| m.max(d.abs()));
        if measure <= tol {
            converged = true;
            break;
        }
        if iterations == config.max_iterations {
            break;
        }
        let slope: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            return Err(Error::Minimizer(format!("search direction is not a descent direction (slope {slope:e})")));
        }

        let mut t = match config.preconditioner {
            Preconditioner::Newton => 1.0,
            _ => (2.0 * gd_step).min(1e6),
        };
        let mut accepted = false;
        for _ in 0..MAX_BACKTRACKS {
            for (&node, d) in free.iter().zip(&direction) {
                delta[node] = t * d;
            }
            match model.difference(u.values(), &delta) {
                None => {
                    failures += 1;
                    t *= 0.5;
                }
                Some(change) if change <= config.armijo_constant * t * slope => {
                    accepted = true;
                    break;
                }
                Some(_) => t *= config.backtrack_factor,
            }
        }
        if !accepted {
            failures += 1;
            break;
        }
        gd_step = t;
        let values = u.values_mut();
        for (&node, d) in free.iter().zip(&direction) {
            values[node] += t * d;
        }
        iterations += 1;
    }

    let final_energy = model.report(u.values())?;
    if !u.is_finite() {
        return Err(Error::Minimizer("iterate became non-finite".into()));
    }
    Ok((
        u,
        SolveStats {
            iterations,
            final_gradient_norm: measure,
            final_energy,
            line_search_failures: failures,
            converged,
        },
    ))
}

fn newton_direction(
    model: &EnergyModel<'_>,
    values: &[f64],
    grad: &[f64],
    stiffness: &BandedSpd,
    stiff_max: f64,
) -> Result<Vec<f64>> {
    let hessian = model.hessian(values);
    let h_max = max_diag(&hessian);
    let mut mu = HESSIAN_REGULARIZATION * h_max / stiff_max;
    if !(mu > 0.0) {
        mu = f64::MIN_POSITIVE;
    }
    for _ in 0..12 {
        let mut h = hessian.clone();
        h.add_scaled(stiffness, mu);
        if h.factorize().is_ok() {
            let mut d: Vec<f64> = grad.iter().map(|g| -g).collect();
            h.solve_factored(&mut d);
            if d.iter().all(|v| v.is_finite()) {
                return Ok(d);
            }
        }
        mu *= 1e3;
    }
    Err(Error::Minimizer("regularized Hessian could not be factorized".into()))
}
