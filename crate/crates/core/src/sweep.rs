//! Continuation in n: solve F_n along an increasing schedule with warm
//! starts, then classify the sequence as convergent, energy blow-up or
//! undecided.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::datum::Datum;
use crate::energy::eval_energy;
use crate::error::{Error, Result};
use crate::exponent::ExponentField;
use crate::geometry::RegionLabel;
use crate::grid::{DiscreteField, Grid};
use crate::minimizer::{initial_guess, solve_n, SolveConfig};

pub const DEFAULT_SCHEDULE: [f64; 6] = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepTolerances {
    /// Sup-norm change between consecutive solutions, relative to the datum range.
    pub convergence: f64,
    pub blowup_margin: f64,
}

impl Default for SweepTolerances {
    fn default() -> Self {
        SweepTolerances { convergence: 1e-3, blowup_margin: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: f64,
    pub total: f64,
    pub log_total: f64,
    pub root: f64,
    pub d_root: f64,
    pub sup_grad_d: f64,
    /// Against the previous schedule entry; the first row compares with the
    /// initial guess.
    pub sup_diff: f64,
    pub iterations: usize,
    pub converged: bool,
    pub line_search_failures: usize,
    /// n ≤ p_+, so the truncation still cuts into the finite exponent.
    pub below_p_plus: bool,
    /// F_n of the competitor, when one was supplied.
    pub competitor_total: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepRecord {
    pub rows: Vec<SweepRow>,
    pub solutions: Vec<DiscreteField>,
    pub datum_range: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Converged,
    EnergyBlowup,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct SweepVerdict {
    pub regime: Regime,
    pub u_infinity: Option<DiscreteField>,
    pub blowup_root_estimate: Option<f64>,
}

fn validate_schedule(schedule: &[f64], dim: usize) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::Sweep("schedule is empty".into()));
    }
    if schedule.iter().any(|n| !n.is_finite() || *n <= dim as f64) {
        return Err(Error::Sweep(format!("every schedule entry must be finite and exceed N = {dim}")));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Sweep("schedule must be strictly increasing".into()));
    }
    Ok(())
}

fn boundary_range(field: &DiscreteField) -> f64 {
    let g = field.grid();
    let (lo, hi) = (0..g.node_count())
        .filter(|&k| g.is_dirichlet(k))
        .map(|k| field.values()[k])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    hi - lo
}

fn sup_grad_d(field: &DiscreteField) -> f64 {
    field
        .grid()
        .cells()
        .iter()
        .filter(|c| c.label == RegionLabel::DInterior)
        .map(|c| {
            let g = field.cell_gradient(c);
            g[0].hypot(g[1])
        })
        .fold(0.0, f64::max)
}

/// sup over D cells of (|∇u| − 1)₊.
pub fn lipschitz_excess(field: &DiscreteField) -> Result<f64> {
    if !field.grid().has_d_cells() {
        return Err(Error::Sweep("the grid has no D cells".into()));
    }
    Ok((sup_grad_d(field) - 1.0).max(0.0))
}

/// Solves each n of `schedule` in turn, starting every solve from the
/// previous solution.
pub fn sweep(
    grid: &Arc<Grid>,
    exponent: &ExponentField,
    datum: &Datum,
    schedule: &[f64],
    solve: &SolveConfig,
    tolerances: &SweepTolerances,
    competitor: Option<&DiscreteField>,
) -> Result<(SweepRecord, SweepVerdict)> {
    validate_schedule(schedule, grid.dim())?;
    let mut previous = initial_guess(grid, datum)?;
    let datum_range = boundary_range(&previous);
    let mut rows = Vec::with_capacity(schedule.len());
    let mut solutions = Vec::with_capacity(schedule.len());
    let mut all_converged = true;

    for &n in schedule {
        let truncated = exponent.truncate(n)?;
        let (u, stats) = solve_n(grid, &truncated, datum, Some(&previous), solve)?;
        all_converged &= stats.converged;
        let e = stats.final_energy;
        let competitor_total = competitor.map(|v| eval_energy(v, &truncated).map(|r| r.total)).transpose()?;
        rows.push(SweepRow {
            n,
            total: e.total,
            log_total: e.log_total,
            root: e.energy_root,
            d_root: e.d_root,
            sup_grad_d: sup_grad_d(&u),
            sup_diff: u.sup_distance(&previous),
            iterations: stats.iterations,
            converged: stats.converged,
            line_search_failures: stats.line_search_failures,
            below_p_plus: !truncated.is_large(),
            competitor_total,
        });
        solutions.push(u.clone());
        previous = u;
    }

    let threshold = 1.0 + tolerances.blowup_margin;
    let tail = &rows[rows.len().saturating_sub(2)..];
    let blowup = rows.len() >= 2 && tail.iter().all(|r| r.root >= threshold && r.d_root >= threshold);
    let last = rows.last().expect("schedule is non-empty");
    let regime = if blowup {
        Regime::EnergyBlowup
    } else if all_converged && last.sup_diff <= tolerances.convergence * datum_range {
        Regime::Converged
    } else {
        Regime::Undecided
    };
    let verdict = SweepVerdict {
        regime,
        u_infinity: (regime == Regime::Converged).then(|| previous.clone()),
        blowup_root_estimate: blowup.then_some(last.root),
    };
    Ok((SweepRecord { rows, solutions, datum_range }, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::FinitePart;
    use crate::geometry::{Domain, Geometry};

    fn setup(d: Domain, nodes: usize) -> (Arc<Grid>, ExponentField) {
        let geo = Geometry::new(Domain::Interval { lo: 0.0, hi: 1.0 }, Some(d)).unwrap();
        let f = ExponentField::new(FinitePart::Constant { value: 4.0 }, geo.clone()).unwrap();
        (Arc::new(Grid::build(&geo, nodes).unwrap()), f)
    }

    #[test]
    fn constant_datum_converges_immediately() {
        let (g, f) = setup(Domain::Interval { lo: 0.25, hi: 0.75 }, 33);
        let datum = Datum::Endpoints { left: 1.5, right: 1.5 };
        let (rec, verdict) =
            sweep(&g, &f, &datum, &DEFAULT_SCHEDULE, &SolveConfig::default(), &SweepTolerances::default(), None)
                .unwrap();
        assert_eq!(verdict.regime, Regime::Converged);
        assert!(rec.rows.iter().all(|r| r.total == 0.0 && r.sup_diff == 0.0));
        assert!(rec.rows[0].below_p_plus && !rec.rows[1].below_p_plus);
    }

    #[test]
    fn interior_d_absorbs_the_rise() {
        // the limit is 0 up to D, slope 1 across D and flat after it
        let (g, f) = setup(Domain::Interval { lo: 0.25, hi: 0.75 }, 65);
        let datum = Datum::Endpoints { left: 0.0, right: 0.5 };
        let tol = SweepTolerances { convergence: 0.05, ..Default::default() };
        let (rec, verdict) = sweep(&g, &f, &datum, &DEFAULT_SCHEDULE, &SolveConfig::default(), &tol, None).unwrap();
        assert_eq!(verdict.regime, Regime::Converged, "{:?}", rec.rows);
        let u = verdict.u_infinity.unwrap();
        let limit = |x: f64| (x - 0.25).clamp(0.0, 0.5);
        let err = (0..g.node_count()).map(|k| (u.values()[k] - limit(g.node_point(k)[0])).abs()).fold(0.0, f64::max);
        assert!(err < 0.05, "{err}");
        assert!(rec.rows.windows(2).all(|w| w[1].sup_grad_d > w[0].sup_grad_d));
        assert!(lipschitz_excess(&u).unwrap() == 0.0);
    }

    #[test]
    fn rejects_bad_schedules() {
        let (g, f) = setup(Domain::Interval { lo: 0.25, hi: 0.75 }, 9);
        let datum = Datum::Endpoints { left: 0.0, right: 0.5 };
        let cfg = SolveConfig::default();
        let tol = SweepTolerances::default();
        assert!(sweep(&g, &f, &datum, &[8.0, 4.0], &cfg, &tol, None).is_err());
        assert!(sweep(&g, &f, &datum, &[], &cfg, &tol, None).is_err());
        assert!(sweep(&g, &f, &datum, &[1.0, 4.0], &cfg, &tol, None).is_err());
    }

    #[test]
    fn excess_of_steep_field() {
        let (g, _) = setup(Domain::Interval { lo: 0.0, hi: 0.5 }, 21);
        let u = DiscreteField::from_fn(g.clone(), |x| 1.3 * x[0]);
        assert!((lipschitz_excess(&u).unwrap() - 0.3).abs() < 1e-12);
        let v = DiscreteField::from_fn(g, |x| 0.5 * x[0]);
        assert_eq!(lipschitz_excess(&v).unwrap(), 0.0);
    }
}
