//! The truncated energy F_n(u) = Σ_cells |K| |∇u|^{p_n} / p_n, the limit
//! energy on the annulus, and their derivatives with respect to the free
//! nodal values.
//!
//! Cell terms are carried as log-magnitudes `ln|K| + p ln|g| − ln p` and summed
//! with a max shift, so `log_total` and the energy roots stay finite even
//! when the total exceeds the f64 range.

use serde::Serialize;

use crate::banded::BandedSpd;
use crate::error::{Error, Result};
use crate::exponent::TruncatedExponent;
use crate::geometry::RegionLabel;
use crate::grid::{DiscreteField, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub n: f64,
    /// `exp(log_total)`; may be +∞ when the value overflows.
    pub total: f64,
    pub log_total: f64,
    pub d_part: f64,
    pub annulus_part: f64,
    pub log_d_part: f64,
    pub log_annulus_part: f64,
    /// `exp(log_total / n)`
    pub energy_root: f64,
    /// `exp(log_d_part / n)`
    pub d_root: f64,
}

/// `ln Σ exp(t)` over the terms, `-∞` for an empty sum.
pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn log_add(a: f64, b: f64) -> f64 {
    log_sum_exp(&[a, b])
}

/// Per-cell exponents of a truncation on a fixed grid.
pub(crate) struct EnergyModel<'g> {
    grid: &'g Grid,
    exps: Vec<f64>,
    n: f64,
}

/// Lower bound on |g| in the Hessian coefficient |g|^{p-2} when p < 2.
const HESSIAN_GRADIENT_FLOOR: f64 = 1e-10;

impl<'g> EnergyModel<'g> {
    pub fn new(grid: &'g Grid, exponent: &TruncatedExponent) -> Self {
        let exps = grid
            .cells()
            .iter()
            .map(|c| match c.label {
                RegionLabel::DInterior => exponent.n(),
                _ => exponent.annulus_value(c.centroid),
            })
            .collect();
        EnergyModel { grid, exps, n: exponent.n() }
    }

    fn check_finite(values: &[f64]) -> Result<()> {
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Energy("field contains NaN".into()));
        }
        Ok(())
    }

    pub fn report(&self, values: &[f64]) -> Result<EnergyReport> {
        Self::check_finite(values)?;
        let mut d_terms = Vec::new();
        let mut a_terms = Vec::new();
        for (cell, &p) in self.grid.cells().iter().zip(&self.exps) {
            let g = self.grid.cell_gradient(values, cell);
            let norm = g[0].hypot(g[1]);
            if norm == 0.0 {
                continue;
            }
            let t = cell.measure.ln() + p * norm.ln() - p.ln();
            match cell.label {
                RegionLabel::DInterior => d_terms.push(t),
                _ => a_terms.push(t),
            }
        }
        let log_d_part = log_sum_exp(&d_terms);
        let log_annulus_part = log_sum_exp(&a_terms);
        let log_total = log_add(log_d_part, log_annulus_part);
        Ok(EnergyReport {
            n: self.n,
            total: log_total.exp(),
            log_total,
            d_part: log_d_part.exp(),
            annulus_part: log_annulus_part.exp(),
            log_d_part,
            log_annulus_part,
            energy_root: (log_total / self.n).exp(),
            d_root: (log_d_part / self.n).exp(),
        })
    }

    /// Derivative with respect to every node (Dirichlet nodes included).
    pub fn full_gradient(&self, values: &[f64]) -> Result<Vec<f64>> {
        Self::check_finite(values)?;
        let (cx, cy) = self.grid.gradient_stencil();
        let npc = self.grid.nodes_per_cell();
        let mut out = vec![0.0; self.grid.node_count()];
        for (cell, &p) in self.grid.cells().iter().zip(&self.exps) {
            let g = self.grid.cell_gradient(values, cell);
            let norm = g[0].hypot(g[1]);
            if norm == 0.0 {
                continue;
            }
            let a = (cell.measure.ln() + (p - 2.0) * norm.ln()).exp();
            if !a.is_finite() {
                return Err(Error::Energy(format!(
                    "cell term overflows at |∇u| = {norm:e}, p = {p}; rescale the field"
                )));
            }
            for c in 0..npc {
                out[cell.nodes[c]] += a * (g[0] * cx[c] + g[1] * cy[c]);
            }
        }
        Ok(out)
    }

    pub fn free_gradient(&self, values: &[f64]) -> Result<Vec<f64>> {
        let full = self.full_gradient(values)?;
        Ok(self.grid.free_nodes().iter().map(|&k| full[k]).collect())
    }

    /// `F(values + delta) − F(values)` evaluated cell by cell without
    /// cancellation. `None` when a cell term overflows.
    pub fn difference(&self, values: &[f64], delta: &[f64]) -> Option<f64> {
        let mut sum = 0.0;
        for (cell, &p) in self.grid.cells().iter().zip(&self.exps) {
            let g = self.grid.cell_gradient(values, cell);
            let dg = self.grid.cell_gradient(delta, cell);
            if dg == [0.0, 0.0] {
                continue;
            }
            let gn = [g[0] + dg[0], g[1] + dg[1]];
            let (norm, norm_new) = (g[0].hypot(g[1]), gn[0].hypot(gn[1]));
            let base = cell.measure.ln() - p.ln();
            let term = if norm == 0.0 {
                (base + p * norm_new.ln()).exp()
            } else {
                let sum_norms = norm + norm_new;
                let dnorm = (dg[0] * (gn[0] + g[0]) + dg[1] * (gn[1] + g[1])) / sum_norms;
                let scale = (base + p * norm.ln()).exp();
                scale * (p * (dnorm / norm).ln_1p()).exp_m1()
            };
            if !term.is_finite() {
                return None;
            }
            sum += term;
        }
        Some(sum)
    }

    /// Hessian over the free nodes.
    pub fn hessian(&self, values: &[f64]) -> BandedSpd {
        self.assemble(
            |cell_index, g| {
                let p = self.exps[cell_index];
                let measure = self.grid.cells()[cell_index].measure;
                let norm = g[0].hypot(g[1]);
                if norm == 0.0 {
                    return if p == 2.0 {
                        (measure, 0.0)
                    } else if p > 2.0 {
                        (0.0, 0.0)
                    } else {
                        ((measure.ln() + (p - 2.0) * HESSIAN_GRADIENT_FLOOR.ln()).exp(), 0.0)
                    };
                }
                let a = (measure.ln() + (p - 2.0) * norm.max(HESSIAN_GRADIENT_FLOOR).ln()).exp();
                (a, (p - 2.0) * a / (norm * norm))
            },
            values,
        )
    }

    /// The same exponent on every cell.
    pub fn uniform(grid: &'g Grid, p: f64) -> Self {
        EnergyModel { grid, exps: vec![p; grid.cells().len()], n: p }
    }

    /// Stiffness matrix of the constant exponent 2 over the free nodes.
    pub fn stiffness(grid: &Grid) -> BandedSpd {
        let model = EnergyModel::uniform(grid, 2.0);
        let zeros = vec![0.0; grid.node_count()];
        model.assemble(|c, _| (grid.cells()[c].measure, 0.0), &zeros)
    }

    /// Assembles Σ_c B_cᵀ (a_c I + b_c g_c g_cᵀ) B_c restricted to free nodes,
    /// where `coef` yields (a_c, b_c).
    fn assemble(&self, coef: impl Fn(usize, [f64; 2]) -> (f64, f64), values: &[f64]) -> BandedSpd {
        let grid = self.grid;
        let (cx, cy) = grid.gradient_stencil();
        let npc = grid.nodes_per_cell();
        let mut h = BandedSpd::zeros(grid.free_nodes().len(), grid.free_bandwidth());
        for (ci, cell) in grid.cells().iter().enumerate() {
            let g = grid.cell_gradient(values, cell);
            let (a, b) = coef(ci, g);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            for r in 0..npc {
                let Some(fr) = grid.free_index(cell.nodes[r]) else { continue };
                let gr = g[0] * cx[r] + g[1] * cy[r];
                for s in 0..npc {
                    let Some(fs) = grid.free_index(cell.nodes[s]) else { continue };
                    if fs > fr {
                        continue;
                    }
                    let gs = g[0] * cx[s] + g[1] * cy[s];
                    h.add(fr, fs, a * (cx[r] * cx[s] + cy[r] * cy[s]) + b * gr * gs);
                }
            }
        }
        h
    }
}

pub fn eval_energy(field: &DiscreteField, exponent: &TruncatedExponent) -> Result<EnergyReport> {
    EnergyModel::new(field.grid(), exponent).report(field.values())
}

/// Derivative of the discrete F_n with respect to each free node, in the
/// grid's free-node order.
pub fn eval_energy_gradient(field: &DiscreteField, exponent: &TruncatedExponent) -> Result<Vec<f64>> {
    EnergyModel::new(field.grid(), exponent).free_gradient(field.values())
}

/// F(u) = Σ over annulus cells of |K| |∇u|^p / p with the untruncated p.
pub fn eval_limit_energy(field: &DiscreteField, exponent: &TruncatedExponent) -> f64 {
    let grid = field.grid();
    let finite = exponent.field().finite_part();
    grid.cells()
        .iter()
        .filter(|c| c.label != RegionLabel::DInterior)
        .map(|c| {
            let g = field.cell_gradient(c);
            let norm = g[0].hypot(g[1]);
            if norm == 0.0 {
                return 0.0;
            }
            let p = finite.eval(c.centroid);
            (c.measure.ln() + p * norm.ln() - p.ln()).exp()
        })
        .sum()
}
