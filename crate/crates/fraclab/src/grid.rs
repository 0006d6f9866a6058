//! Uniform truncated lattices with an explicit exterior model.
//!
//! A grid covers the truncation box `[-R, R]^n` with nodes at integer
//! multiples of the spacing `h`; each node represents the cell of side `h`
//! centered at it, so the cells tile `[-R_box, R_box]^n` with
//! `R_box = k_max*h + h/2`. Everything beyond the box is described by a
//! [`FarField`] (values) or [`TailSet`] (membership), and nonlocal integrals
//! over that region are evaluated analytically.

use crate::error::{Error, Result};
use crate::reduce::ls_slope;
use std::collections::HashSet;
use std::sync::Arc;

/// Interior domain descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaShape {
    /// Open interval (a, b) on the line.
    Interval { a: f64, b: f64 },
    /// Open axis-aligned box (x0, x1) x (y0, y1).
    Box2 { x: (f64, f64), y: (f64, f64) },
    /// Open disc.
    Disc { center: [f64; 2], radius: f64 },
}

impl OmegaShape {
    pub fn dimension(&self) -> usize {
        match self {
            OmegaShape::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            OmegaShape::Interval { a, b } => b - a,
            OmegaShape::Box2 { x, y } => ((x.1 - x.0).powi(2) + (y.1 - y.0).powi(2)).sqrt(),
            OmegaShape::Disc { radius, .. } => 2.0 * radius,
        }
    }

    /// Largest |coordinate| attained on the closure.
    pub fn max_abs_coord(&self) -> f64 {
        match self {
            OmegaShape::Interval { a, b } => a.abs().max(b.abs()),
            OmegaShape::Box2 { x, y } => x
                .0
                .abs()
                .max(x.1.abs())
                .max(y.0.abs())
                .max(y.1.abs()),
            OmegaShape::Disc { center, radius } => {
                (center[0].abs() + radius).max(center[1].abs() + radius)
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match self {
            OmegaShape::Interval { a, b } => p[0] > *a && p[0] < *b,
            OmegaShape::Box2 { x, y } => {
                p[0] > x.0 && p[0] < x.1 && p[1] > y.0 && p[1] < y.1
            }
            OmegaShape::Disc { center, radius } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy < radius * radius
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            OmegaShape::Interval { a, b } => b <= a,
            OmegaShape::Box2 { x, y } => x.1 <= x.0 || y.1 <= y.0,
            OmegaShape::Disc { radius, .. } => *radius <= 0.0,
        }
    }
}

/// Field values beyond the truncation box.
///
/// In 1D the two exterior components carry independent values. In 2D the far
/// field is a value map: constant, split by a line through the origin, or
/// split by the coordinate quadrants. All variants are piecewise constant
/// along rays, which is what makes the radial tail quadratures closed-form.
#[derive(Debug, Clone, PartialEq)]
pub enum FarField {
    /// 1D: value left of the box, value right of the box.
    Sides { left: f64, right: f64 },
    /// 2D: single far-field value.
    Uniform(f64),
    /// 2D: `plus` where `normal . y > 0`, `minus` elsewhere.
    HalfPlane { normal: [f64; 2], plus: f64, minus: f64 },
    /// 2D: `plus` where `y1 * y2 > 0`, `minus` elsewhere.
    Quadrants { plus: f64, minus: f64 },
}

impl FarField {
    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        match self {
            FarField::Sides { left, right } => {
                if p[0] < 0.0 {
                    *left
                } else {
                    *right
                }
            }
            FarField::Uniform(c) => *c,
            FarField::HalfPlane { normal, plus, minus } => {
                if normal[0] * p[0] + normal[1] * p[1] > 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
            FarField::Quadrants { plus, minus } => {
                if p[0] * p[1] > 0.0 {
                    *plus
                } else {
                    *minus
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        match self {
            FarField::Sides { left, right } => left.abs().max(right.abs()),
            FarField::Uniform(c) => c.abs(),
            FarField::HalfPlane { plus, minus, .. } | FarField::Quadrants { plus, minus } => {
                plus.abs().max(minus.abs())
            }
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            FarField::Sides { left, right } => left.min(*right),
            FarField::Uniform(c) => *c,
            FarField::HalfPlane { plus, minus, .. } | FarField::Quadrants { plus, minus } => {
                plus.min(*minus)
            }
        }
    }

    pub fn max_value(&self) -> f64 {
        match self {
            FarField::Sides { left, right } => left.max(*right),
            FarField::Uniform(c) => *c,
            FarField::HalfPlane { plus, minus, .. } | FarField::Quadrants { plus, minus } => {
                plus.max(*minus)
            }
        }
    }
}

/// Set membership beyond the truncation box.
#[derive(Debug, Clone, PartialEq)]
pub enum TailSet {
    /// 1D: membership left of the box, membership right of the box.
    Sides { left: bool, right: bool },
    /// 2D: uniform membership.
    Uniform(bool),
    /// 2D: member where `normal . y > 0`.
    HalfPlane { normal: [f64; 2] },
    /// 2D: member where `y1 * y2 > 0`.
    Quadrants,
    /// 2D: member where `y1 * y2 < 0`.
    QuadrantsComplement,
}

impl TailSet {
    pub fn member_at(&self, p: [f64; 2]) -> bool {
        match self {
            TailSet::Sides { left, right } => {
                if p[0] < 0.0 {
                    *left
                } else {
                    *right
                }
            }
            TailSet::Uniform(m) => *m,
            TailSet::HalfPlane { normal } => normal[0] * p[0] + normal[1] * p[1] > 0.0,
            TailSet::Quadrants => p[0] * p[1] > 0.0,
            TailSet::QuadrantsComplement => p[0] * p[1] < 0.0,
        }
    }

    pub fn complement(&self) -> TailSet {
        match self {
            TailSet::Sides { left, right } => TailSet::Sides {
                left: !left,
                right: !right,
            },
            TailSet::Uniform(m) => TailSet::Uniform(!m),
            TailSet::HalfPlane { normal } => TailSet::HalfPlane {
                normal: [-normal[0], -normal[1]],
            },
            TailSet::Quadrants => TailSet::QuadrantsComplement,
            TailSet::QuadrantsComplement => TailSet::Quadrants,
        }
    }

    /// Phase values: +1 on the set, -1 outside.
    pub fn to_far_field(&self) -> FarField {
        match self {
            TailSet::Sides { left, right } => FarField::Sides {
                left: if *left { 1.0 } else { -1.0 },
                right: if *right { 1.0 } else { -1.0 },
            },
            TailSet::Uniform(m) => FarField::Uniform(if *m { 1.0 } else { -1.0 }),
            TailSet::HalfPlane { normal } => FarField::HalfPlane {
                normal: *normal,
                plus: 1.0,
                minus: -1.0,
            },
            TailSet::Quadrants => FarField::Quadrants {
                plus: 1.0,
                minus: -1.0,
            },
            TailSet::QuadrantsComplement => FarField::Quadrants {
                plus: -1.0,
                minus: 1.0,
            },
        }
    }
}

/// Uniform lattice over the truncation box with an interior mask.
#[derive(Debug)]
pub struct GridSpec {
    dim: usize,
    h: f64,
    k_max: i64,
    omega: OmegaShape,
    r_trunc: f64,
    tail: FarField,
    interior: Vec<bool>,
    n_interior: usize,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Nodes per axis.
    pub fn side(&self) -> usize {
        (2 * self.k_max + 1) as usize
    }

    pub fn n_nodes(&self) -> usize {
        match self.dim {
            1 => self.side(),
            _ => self.side() * self.side(),
        }
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn omega(&self) -> &OmegaShape {
        &self.omega
    }

    pub fn r_trunc(&self) -> f64 {
        self.r_trunc
    }

    /// Default exterior closure for fields on this grid.
    pub fn tail(&self) -> &FarField {
        &self.tail
    }

    /// Half-width of the region tiled by node cells.
    pub fn box_radius(&self) -> f64 {
        self.k_max as f64 * self.h + 0.5 * self.h
    }

    /// Cell measure `h^n`.
    pub fn cell_measure(&self) -> f64 {
        match self.dim {
            1 => self.h,
            _ => self.h * self.h,
        }
    }

    pub fn coord(&self, idx: usize) -> [f64; 2] {
        let side = self.side() as i64;
        match self.dim {
            1 => [(idx as i64 - self.k_max) as f64 * self.h, 0.0],
            _ => {
                let ky = idx as i64 / side - self.k_max;
                let kx = idx as i64 % side - self.k_max;
                [kx as f64 * self.h, ky as f64 * self.h]
            }
        }
    }

    /// Lattice index of the node at multi-index (kx, ky); ky ignored in 1D.
    pub fn index_of(&self, kx: i64, ky: i64) -> Option<usize> {
        if kx.abs() > self.k_max {
            return None;
        }
        match self.dim {
            1 => Some((kx + self.k_max) as usize),
            _ => {
                if ky.abs() > self.k_max {
                    None
                } else {
                    let side = self.side() as i64;
                    Some(((ky + self.k_max) * side + (kx + self.k_max)) as usize)
                }
            }
        }
    }

    /// Index of the node whose cell contains `p`, or None beyond the box.
    pub fn nearest_index(&self, p: [f64; 2]) -> Option<usize> {
        let kx = (p[0] / self.h).round() as i64;
        let ky = if self.dim == 2 {
            (p[1] / self.h).round() as i64
        } else {
            0
        };
        self.index_of(kx, ky)
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.interior[idx]
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.n_nodes()).filter(|&i| self.interior[i]).collect()
    }

    /// Node mask of an arbitrary shape (center-in-set rule).
    pub fn mask_of(&self, shape: &OmegaShape) -> Vec<bool> {
        (0..self.n_nodes())
            .map(|i| shape.contains(self.coord(i)))
            .collect()
    }

    /// Axis neighbors (2 in 1D, 4 in 2D) within the lattice.
    pub fn neighbors(&self, idx: usize) -> Vec<usize> {
        let side = self.side() as i64;
        let mut out = Vec::with_capacity(4);
        match self.dim {
            1 => {
                let k = idx as i64 - self.k_max;
                for dk in [-1i64, 1] {
                    if let Some(j) = self.index_of(k + dk, 0) {
                        out.push(j);
                    }
                }
            }
            _ => {
                let ky = idx as i64 / side - self.k_max;
                let kx = idx as i64 % side - self.k_max;
                for (dx, dy) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    if let Some(j) = self.index_of(kx + dx, ky + dy) {
                        out.push(j);
                    }
                }
            }
        }
        out
    }
}

/// Builds a grid, checking the structural invariants.
pub fn build_grid(
    dimension: usize,
    h: f64,
    omega: OmegaShape,
    r_trunc: f64,
    tail: FarField,
) -> Result<Arc<GridSpec>> {
    if !(h > 0.0) {
        return Err(Error::Grid("nonpositive spacing".into()));
    }
    if dimension != 1 && dimension != 2 {
        return Err(Error::Grid(format!("dimension must be 1 or 2, got {dimension}")));
    }
    if omega.dimension() != dimension {
        return Err(Error::Grid("omega descriptor dimension mismatch".into()));
    }
    if omega.is_empty() {
        return Err(Error::Grid("empty interior domain".into()));
    }
    match (&tail, dimension) {
        (FarField::Sides { .. }, 1) | (FarField::Uniform(_), 2) => {}
        (FarField::HalfPlane { .. } | FarField::Quadrants { .. }, 2) => {}
        _ => return Err(Error::Grid("tail model incompatible with dimension".into())),
    }
    let diam = omega.diameter();
    if r_trunc < 4.0 * diam - 1e-12 {
        return Err(Error::Grid(format!(
            "truncation radius {r_trunc} below 4 x diam(omega) = {}",
            4.0 * diam
        )));
    }
    if omega.max_abs_coord() >= r_trunc {
        return Err(Error::Grid("omega touching the truncation boundary".into()));
    }

    let k_max = (r_trunc / h + 1e-9).floor() as i64;
    let mut grid = GridSpec {
        dim: dimension,
        h,
        k_max,
        omega,
        r_trunc,
        tail,
        interior: Vec::new(),
        n_interior: 0,
    };
    let n = grid.n_nodes();
    let interior: Vec<bool> = (0..n).map(|i| grid.omega.contains(grid.coord(i))).collect();
    let n_interior = interior.iter().filter(|&&b| b).count();
    if n_interior == 0 {
        return Err(Error::Grid("interior mask is empty at this spacing".into()));
    }
    grid.interior = interior;
    grid.n_interior = n_interior;

    if !interior_connected(&grid) {
        return Err(Error::Grid("interior mask is not connected".into()));
    }
    Ok(Arc::new(grid))
}

fn interior_connected(grid: &GridSpec) -> bool {
    let n = grid.n_nodes();
    let start = match (0..n).find(|&i| grid.interior[i]) {
        Some(i) => i,
        None => return false,
    };
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1usize;
    while let Some(i) = stack.pop() {
        for j in grid.neighbors(i) {
            if grid.interior[j] && !seen[j] {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == grid.n_interior
}

/// Real-valued field on a grid with an exterior closure.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub grid: Arc<GridSpec>,
    pub values: Vec<f64>,
    pub tail: FarField,
}

impl ScalarField {
    pub fn constant(grid: &Arc<GridSpec>, c: f64, tail: FarField) -> Self {
        ScalarField {
            grid: grid.clone(),
            values: vec![c; grid.n_nodes()],
            tail,
        }
    }

    pub fn from_fn(grid: &Arc<GridSpec>, f: impl Fn([f64; 2]) -> f64, tail: FarField) -> Self {
        let values = (0..grid.n_nodes()).map(|i| f(grid.coord(i))).collect();
        ScalarField {
            grid: grid.clone(),
            values,
            tail,
        }
    }

    /// Field inheriting the grid's exterior closure.
    pub fn from_fn_grid_tail(grid: &Arc<GridSpec>, f: impl Fn([f64; 2]) -> f64) -> Self {
        let tail = grid.tail().clone();
        Self::from_fn(grid, f, tail)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.grid.n_nodes() {
            return Err(Error::Grid("value count does not match node count".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Grid("field contains a non-finite value".into()));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Value at an arbitrary point: cell lookup inside the box, tail beyond.
    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        match self.grid.nearest_index(p) {
            Some(i) => self.values[i],
            None => self.tail.value_at(p),
        }
    }
}

/// Boolean set on a grid with exterior tail membership.
#[derive(Debug, Clone)]
pub struct IndicatorSet {
    pub grid: Arc<GridSpec>,
    pub membership: Vec<bool>,
    pub tail: TailSet,
}

impl IndicatorSet {
    pub fn from_fn(grid: &Arc<GridSpec>, f: impl Fn([f64; 2]) -> bool, tail: TailSet) -> Self {
        let membership = (0..grid.n_nodes()).map(|i| f(grid.coord(i))).collect();
        IndicatorSet {
            grid: grid.clone(),
            membership,
            tail,
        }
    }

    pub fn complement(&self) -> IndicatorSet {
        IndicatorSet {
            grid: self.grid.clone(),
            membership: self.membership.iter().map(|m| !m).collect(),
            tail: self.tail.complement(),
        }
    }

    /// Phase function: +1 on the set, -1 outside, tails mapped accordingly.
    pub fn phase(&self) -> ScalarField {
        ScalarField {
            grid: self.grid.clone(),
            values: self
                .membership
                .iter()
                .map(|&m| if m { 1.0 } else { -1.0 })
                .collect(),
            tail: self.tail.to_far_field(),
        }
    }

    pub fn member_at(&self, p: [f64; 2]) -> bool {
        match self.grid.nearest_index(p) {
            Some(i) => self.membership[i],
            None => self.tail.member_at(p),
        }
    }

    /// Nodes with at least one axis neighbor of opposite membership.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        (0..self.grid.n_nodes())
            .filter(|&i| {
                self.grid
                    .neighbors(i)
                    .iter()
                    .any(|&j| self.membership[j] != self.membership[i])
            })
            .collect()
    }

    pub fn is_boundary_node(&self, idx: usize) -> bool {
        self.grid
            .neighbors(idx)
            .iter()
            .any(|&j| self.membership[j] != self.membership[idx])
    }
}

/// All grid nodes within Euclidean distance < r of the given node set.
pub fn tubular_neighborhood(points: &[usize], r: f64, grid: &GridSpec) -> Vec<usize> {
    if points.is_empty() || r <= 0.0 {
        return Vec::new();
    }
    let pts: Vec<[f64; 2]> = points.iter().map(|&i| grid.coord(i)).collect();
    let r2 = r * r;
    use rayon::prelude::*;
    (0..grid.n_nodes())
        .into_par_iter()
        .filter(|&i| {
            let c = grid.coord(i);
            pts.iter().any(|p| {
                let dx = c[0] - p[0];
                let dy = c[1] - p[1];
                dx * dx + dy * dy < r2
            })
        })
        .collect()
}

/// Least-squares box-counting dimension of a node set.
///
/// N(r) counts occupied axis-aligned boxes of side r anchored at the origin;
/// the returned value is the slope of log N against log(1/r).
pub fn box_counting_dimension(points: &[usize], scales: &[f64], grid: &GridSpec) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Grid("box counting needs a nonempty point set".into()));
    }
    if scales.len() < 3 {
        return Err(Error::Grid("degenerate scale list: need at least 3 scales".into()));
    }
    if scales.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Grid("degenerate scale list: nonpositive scale".into()));
    }
    let rmax = scales.iter().cloned().fold(f64::MIN, f64::max);
    let rmin = scales.iter().cloned().fold(f64::MAX, f64::min);
    if rmax / rmin < 9.999 {
        return Err(Error::Grid(
            "degenerate scale list: scales must span at least one decade".into(),
        ));
    }
    let coords: Vec<[f64; 2]> = points.iter().map(|&i| grid.coord(i)).collect();
    let mut log_inv_r = Vec::with_capacity(scales.len());
    let mut log_n = Vec::with_capacity(scales.len());
    for &r in scales {
        let mut boxes: HashSet<(i64, i64)> = HashSet::new();
        for c in &coords {
            let bx = (c[0] / r).floor() as i64;
            let by = if grid.dim() == 2 {
                (c[1] / r).floor() as i64
            } else {
                0
            };
            boxes.insert((bx, by));
        }
        log_inv_r.push((1.0 / r).ln());
        log_n.push((boxes.len() as f64).ln());
    }
    Ok(ls_slope(&log_inv_r, &log_n))
}
