//! Small dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for every rank decision.
pub const RANK_TOL: f64 = 1e-9;

/// Numerical rank: singular values below `RANK_TOL * σ_max` count as zero.
pub fn numeric_rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let sv = a.clone().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * smax).count()
}

/// Minimum-norm least-squares solution of `a x = b` and its residual norm.
pub fn min_norm_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let u = svd.u.as_ref().expect("svd u");
    let vt = svd.v_t.as_ref().expect("svd v_t");
    let mut x = DVector::zeros(a.ncols());
    if smax > 0.0 {
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > RANK_TOL * smax {
                let coef = u.column(k).dot(b) / s;
                x += vt.row(k).transpose() * coef;
            }
        }
    }
    let residual = (a * &x - b).norm();
    (x, residual)
}

/// Symmetric eigenvalues, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().cloned().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_norm_of_redundant_system() {
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let (x, r) = min_norm_solve(&a, &DVector::from_vec(vec![1.0]));
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] - 0.5).abs() < 1e-15);
        assert!(r < 1e-15);
    }

    #[test]
    fn rank_cutoff() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-12]);
        assert_eq!(numeric_rank(&a), 1);
        assert_eq!(numeric_rank(&DMatrix::zeros(2, 2)), 0);
    }
}
