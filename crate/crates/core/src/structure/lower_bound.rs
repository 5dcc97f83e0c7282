use nalgebra::{DMatrix, DVector};

use super::{flag_at, SubRiemannianStructure, DEFAULT_MAX_DEPTH};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dist, min_norm_solve, numeric_rank, sym_eigenvalues};
use crate::symfield::PolyVectorField;

/// Determinant of the frame Gram matrix may drop to this fraction of its value at the center.
const DET_FRACTION: f64 = 1e-3;
const GRID: usize = 9;

/// Riemannian metric whose orthonormal-overcomplete frame is the generators plus
/// adjoined coordinate fields, certified on the cube `|x - center|_∞ ≤ half_width`.
#[derive(Clone, Debug)]
pub struct LowerBoundMetric {
    pub center: Vec<f64>,
    /// Indices `j` of the coordinate fields `∂_j` added to the generators.
    pub adjoined: Vec<usize>,
    pub half_width: f64,
    /// Smallest eigenvalue of `g` seen on the certification grid.
    pub min_eigenvalue: f64,
    frame: SubRiemannianStructure,
}

impl LowerBoundMetric {
    /// The full-rank frame `F ∪ {∂_j}`; its control distance is the `g`-distance.
    pub fn frame_structure(&self) -> &SubRiemannianStructure {
        &self.frame
    }

    /// `g(x) = (A Aᵀ)⁻¹` where the columns of `A` are the frame fields at `x`.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.center.len(), x.len())?;
        let a = self.frame.frame_matrix(x);
        (&a * a.transpose())
            .try_inverse()
            .ok_or(Error::FrameExtensionFailed)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .all(|(a, c)| (a - c).abs() <= self.half_width)
    }

    fn boundary_distance(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, c)| self.half_width - (a - c).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Lower bound on `d_F(x, y)` valid when both points lie in the box: a curve
    /// that stays inside has `g`-length at least `√λ_min |x − y|`, and one that
    /// leaves must cross from each endpoint to the boundary.
    pub fn distance_lower_bound(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        if !self.contains(x) || !self.contains(y) {
            return None;
        }
        let escape = self.boundary_distance(x) + self.boundary_distance(y);
        Some(self.min_eigenvalue.sqrt() * dist(x, y).min(escape))
    }
}

fn grid_points(center: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = center.len();
    let total = GRID.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|j| {
                    let k = idx % GRID;
                    idx /= GRID;
                    center[j] - h + 2.0 * h * k as f64 / (GRID - 1) as f64
                })
                .collect()
        })
        .collect()
}

pub fn riemannian_lower_bound_metric(s: &SubRiemannianStructure, p: &[f64]) -> Result<LowerBoundMetric> {
    flag_at(s, p, DEFAULT_MAX_DEPTH)?;
    let n = s.dim();
    let a0 = s.frame_matrix(p);
    let mut cols: Vec<DVector<f64>> = a0.column_iter().map(|c| c.into_owned()).collect();
    let mut adjoined = Vec::new();
    let span_rank = |cols: &[DVector<f64>]| numeric_rank(&DMatrix::from_columns(cols));
    while span_rank(&cols) < n {
        let basis = DMatrix::from_columns(&cols);
        let mut best = (0, -1.0);
        for j in 0..n {
            if adjoined.contains(&j) {
                continue;
            }
            let e = DVector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 });
            let (_, r) = min_norm_solve(&basis, &e);
            if r > best.1 {
                best = (j, r);
            }
        }
        adjoined.push(best.0);
        cols.push(DVector::from_fn(n, |i, _| if i == best.0 { 1.0 } else { 0.0 }));
    }
    let mut gens = s.generators().to_vec();
    gens.extend(adjoined.iter().map(|&j| PolyVectorField::coordinate(n, j)));
    let frame = SubRiemannianStructure::new(format!("{}+frame", s.label()), gens)?;

    let gram_det = |x: &[f64]| {
        let a = frame.frame_matrix(x);
        (&a * a.transpose()).determinant()
    };
    let det0 = gram_det(p);
    if !(det0 > 0.0) {
        return Err(Error::FrameExtensionFailed);
    }
    let mut h = s.bound().min(1.0);
    for _ in 0..40 {
        let pts = grid_points(p, h);
        if pts.iter().all(|x| gram_det(x) >= DET_FRACTION * det0) {
            let max_eig = pts
                .iter()
                .map(|x| {
                    let a = frame.frame_matrix(x);
                    *sym_eigenvalues(&(&a * a.transpose())).last().unwrap()
                })
                .fold(0.0, f64::max);
            return Ok(LowerBoundMetric {
                center: p.to_vec(),
                adjoined,
                half_width: h,
                min_eigenvalue: 1.0 / max_eig,
                frame,
            });
        }
        h *= 0.5;
    }
    Err(Error::FrameExtensionFailed)
}

/// Lower bound from coordinates whose generator components are all constant:
/// along any admissible curve `ẋ_J = C u`, so `|u| ≥ |C⁺ ẋ_J|` and integrating
/// gives `d_F(p, q) ≥ |C⁺ (q − p)_J|`.
pub fn projection_lower_bound(s: &SubRiemannianStructure, p: &[f64], q: &[f64]) -> f64 {
    let rows: Vec<usize> = (0..s.dim())
        .filter(|&j| s.generators().iter().all(|g| g.component(j).max_degree() == 0))
        .collect();
    if rows.is_empty() {
        return 0.0;
    }
    let zero = vec![0.0; s.dim()];
    let full = s.frame_matrix(&zero);
    let c = DMatrix::from_fn(rows.len(), s.num_generators(), |r, i| full[(rows[r], i)]);
    let dx = DVector::from_fn(rows.len(), |r, _| q[rows[r]] - p[rows[r]]);
    let (u, _) = min_norm_solve(&c, &dx);
    u.norm()
}
