//! Uniform grids, per-cell discrete gradients and Dirichlet bookkeeping.
//!
//! Unknowns live on nodes; every cell carries one gradient (forward
//! difference in 1D, gradient of the bilinear interpolant at the centroid in
//! 2D) and one region label assigned from its centroid. Flat boundaries of D
//! are snapped onto grid lines before labeling.

use std::sync::Arc;

use crate::datum::Datum;
use crate::error::{Error, Result};
use crate::geometry::{Domain, Geometry, Point, RegionLabel};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub centroid: Point,
    pub measure: f64,
    /// Either `DInterior` or `Annulus`.
    pub label: RegionLabel,
    /// Corner nodes; in 2D ordered (x0,y0), (x1,y0), (x0,y1), (x1,y1).
    pub nodes: [usize; 4],
}

#[derive(Debug, Clone)]
pub struct Grid {
    dim: usize,
    shape: [usize; 2],
    origin: Point,
    spacing: [f64; 2],
    cells: Vec<Cell>,
    dirichlet: Vec<bool>,
    free_index: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
    geometry: Geometry,
    snap_distance: f64,
    grad_x: [f64; 4],
    grad_y: [f64; 4],
}

impl Grid {
    /// Builds the grid on Ω with `nodes_per_side` nodes along each axis.
    pub fn build(geometry: &Geometry, nodes_per_side: usize) -> Result<Grid> {
        if nodes_per_side < 3 {
            return Err(Error::Discretization(format!("nodes_per_side = {nodes_per_side} must be at least 3")));
        }
        let m = nodes_per_side;
        let (dim, origin, extent) = match *geometry.omega() {
            Domain::Interval { lo, hi } => (1, [lo, 0.0], [hi - lo, 0.0]),
            Domain::Rectangle { min, max } => (2, min, [max[0] - min[0], max[1] - min[1]]),
            Domain::Disc { .. } => {
                return Err(Error::Discretization(
                    "disc-shaped Ω cannot be gridded; only interval and rectangle domains are solvable".into(),
                ))
            }
        };
        let shape = if dim == 1 { [m, 1] } else { [m, m] };
        let cells_per_axis = (m - 1) as f64;
        let spacing = [extent[0] / cells_per_axis, if dim == 2 { extent[1] / cells_per_axis } else { 0.0 }];

        let snap = |v: f64, axis: usize| {
            let k = ((v - origin[axis]) / spacing[axis]).round();
            origin[axis] + k * spacing[axis]
        };
        let mut snap_distance = 0.0f64;
        let snapped = match geometry.inner().copied() {
            Some(Domain::Interval { lo, hi }) => {
                let (a, b) = (snap(lo, 0), snap(hi, 0));
                snap_distance = (a - lo).abs().max((b - hi).abs());
                if b <= a {
                    return Err(Error::Discretization("D collapses to a point on this grid".into()));
                }
                Some(Domain::Interval { lo: a, hi: b })
            }
            Some(Domain::Rectangle { min, max }) => {
                let lo = [snap(min[0], 0), snap(min[1], 1)];
                let hi = [snap(max[0], 0), snap(max[1], 1)];
                for axis in 0..2 {
                    snap_distance = snap_distance.max((lo[axis] - min[axis]).abs()).max((hi[axis] - max[axis]).abs());
                }
                if hi[0] <= lo[0] || hi[1] <= lo[1] {
                    return Err(Error::Discretization("D collapses onto a grid line".into()));
                }
                Some(Domain::Rectangle { min: lo, max: hi })
            }
            other => other,
        };
        let geometry = geometry.with_inner(snapped)?;

        let (grad_x, grad_y) = if dim == 1 {
            let h = spacing[0];
            ([-1.0 / h, 1.0 / h, 0.0, 0.0], [0.0; 4])
        } else {
            let (hx, hy) = (2.0 * spacing[0], 2.0 * spacing[1]);
            ([-1.0 / hx, 1.0 / hx, -1.0 / hx, 1.0 / hx], [-1.0 / hy, -1.0 / hy, 1.0 / hy, 1.0 / hy])
        };

        let n_nodes = shape[0] * shape[1];
        let mut cells = Vec::new();
        if dim == 1 {
            for i in 0..m - 1 {
                let centroid = [origin[0] + (i as f64 + 0.5) * spacing[0], 0.0];
                cells.push(Cell {
                    centroid,
                    measure: spacing[0],
                    label: cell_label(&geometry, centroid)?,
                    nodes: [i, i + 1, i, i + 1],
                });
            }
        } else {
            for j in 0..m - 1 {
                for i in 0..m - 1 {
                    let centroid =
                        [origin[0] + (i as f64 + 0.5) * spacing[0], origin[1] + (j as f64 + 0.5) * spacing[1]];
                    let n00 = i + m * j;
                    cells.push(Cell {
                        centroid,
                        measure: spacing[0] * spacing[1],
                        label: cell_label(&geometry, centroid)?,
                        nodes: [n00, n00 + 1, n00 + m, n00 + m + 1],
                    });
                }
            }
        }

        let dirichlet: Vec<bool> = (0..n_nodes)
            .map(|k| {
                let (i, j) = (k % shape[0], k / shape[0]);
                i == 0 || i == shape[0] - 1 || (dim == 2 && (j == 0 || j == shape[1] - 1))
            })
            .collect();
        let mut free_nodes = Vec::new();
        let free_index = dirichlet
            .iter()
            .enumerate()
            .map(|(k, &d)| {
                (!d).then(|| {
                    free_nodes.push(k);
                    free_nodes.len() - 1
                })
            })
            .collect();

        Ok(Grid {
            dim,
            shape,
            origin,
            spacing,
            cells,
            dirichlet,
            free_index,
            free_nodes,
            geometry,
            snap_distance,
            grad_x,
            grad_y,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Nodes along x and y (y is 1 in 1D).
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    /// The x spacing; equals the y spacing on square domains.
    pub fn h(&self) -> f64 {
        self.spacing[0]
    }

    pub fn node_count(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn node_point(&self, k: usize) -> Point {
        let (i, j) = (k % self.shape[0], k / self.shape[0]);
        [self.origin[0] + i as f64 * self.spacing[0], self.origin[1] + j as f64 * self.spacing[1]]
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i + self.shape[0] * j
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_dirichlet(&self, k: usize) -> bool {
        self.dirichlet[k]
    }

    pub fn free_index(&self, k: usize) -> Option<usize> {
        self.free_index[k]
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free_nodes
    }

    /// Geometry with D snapped to the grid; this is what the cells see.
    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn snap_distance(&self) -> f64 {
        self.snap_distance
    }

    pub fn nodes_per_cell(&self) -> usize {
        if self.dim == 1 {
            2
        } else {
            4
        }
    }

    /// Coefficients of the cell gradient with respect to the corner values.
    pub(crate) fn gradient_stencil(&self) -> ([f64; 4], [f64; 4]) {
        (self.grad_x, self.grad_y)
    }

    pub fn cell_gradient(&self, values: &[f64], cell: &Cell) -> Point {
        let mut g = [0.0, 0.0];
        for c in 0..self.nodes_per_cell() {
            let v = values[cell.nodes[c]];
            g[0] += self.grad_x[c] * v;
            g[1] += self.grad_y[c] * v;
        }
        g
    }

    /// The cell containing `x`; points outside Ω map to the nearest cell.
    pub fn cell_containing(&self, x: Point) -> &Cell {
        let (i, j, _, _) = self.locate(x);
        &self.cells[i + (self.shape[0] - 1) * j]
    }

    pub fn has_d_cells(&self) -> bool {
        self.cells.iter().any(|c| c.label == RegionLabel::DInterior)
    }

    /// Half-bandwidth of the free-node coupling in lexicographic order.
    pub(crate) fn free_bandwidth(&self) -> usize {
        self.cells
            .iter()
            .map(|c| {
                let f: Vec<usize> =
                    c.nodes[..self.nodes_per_cell()].iter().filter_map(|&k| self.free_index[k]).collect();
                let lo = f.iter().min().copied().unwrap_or(0);
                let hi = f.iter().max().copied().unwrap_or(0);
                hi - lo
            })
            .max()
            .unwrap_or(0)
    }

    /// Index of the cell containing `x` and local coordinates in [0,1]².
    fn locate(&self, x: Point) -> (usize, usize, f64, f64) {
        let local = |axis: usize| {
            let cells = self.shape[axis].saturating_sub(1).max(1);
            let t = (x[axis] - self.origin[axis]) / self.spacing[axis];
            let i = (t.floor().max(0.0) as usize).min(cells - 1);
            (i, t - i as f64)
        };
        let (i, tx) = local(0);
        if self.dim == 1 {
            return (i, 0, tx, 0.0);
        }
        let (j, ty) = local(1);
        (i, j, tx, ty)
    }
}

fn cell_label(geometry: &Geometry, centroid: Point) -> Result<RegionLabel> {
    Ok(match geometry.classify_point(centroid)? {
        RegionLabel::DInterior => RegionLabel::DInterior,
        _ => RegionLabel::Annulus,
    })
}

/// Nodal values on a grid.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Discretization(format!(
                "field has {} values for {} nodes",
                values.len(),
                grid.node_count()
            )));
        }
        Ok(DiscreteField { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.node_count();
        DiscreteField { grid, values: vec![0.0; n] }
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(Point) -> f64) -> Self {
        let values = (0..grid.node_count()).map(|k| f(grid.node_point(k))).collect();
        DiscreteField { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell_gradient(&self, cell: &Cell) -> Point {
        self.grid.cell_gradient(&self.values, cell)
    }

    /// Sets every Dirichlet node to the datum; interior nodes are untouched.
    pub fn impose_dirichlet(mut self, datum: &Datum) -> Result<Self> {
        let omega = *self.grid.geometry().omega();
        datum.validate(&omega)?;
        for k in 0..self.grid.node_count() {
            if self.grid.is_dirichlet(k) {
                self.values[k] = datum.eval(&omega, self.grid.node_point(k))?;
            }
        }
        Ok(self)
    }

    pub fn sup_distance(&self, other: &DiscreteField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Piecewise-(bi)linear interpolation of the nodal values.
    pub fn interpolate(&self, x: Point) -> f64 {
        let g = &self.grid;
        let (i, j, tx, ty) = g.locate(x);
        if g.dim() == 1 {
            let (a, b) = (self.values[i], self.values[i + 1]);
            return a + tx * (b - a);
        }
        let k = g.node_index(i, j);
        let m = g.shape()[0];
        let (v00, v10, v01, v11) = (self.values[k], self.values[k + 1], self.values[k + m], self.values[k + m + 1]);
        (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11)
    }
}
