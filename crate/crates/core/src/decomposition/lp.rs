//! Dense linear algebra helpers and a tiny exact LP for the feasibility search.
//!
//! The LPs here have at most nine columns, so the optimum is found by
//! enumerating basic solutions rather than pivoting.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

/// Relative threshold below which a singular value counts as zero.
const RANK_TOL: f64 = 1e-10;

/// Least-squares solution of `M z = r` together with an orthonormal basis of
/// the null space of `M`.
pub(crate) struct LinearSolution {
    pub particular: DVector<f64>,
    pub null_basis: DMatrix<f64>,
    pub residual: f64,
}

pub(crate) fn solve_with_null_space(m: &DMatrix<f64>, r: &DVector<f64>) -> LinearSolution {
    let (rows, cols) = m.shape();
    // pad with zero rows so the SVD exposes the whole right singular basis
    let padded_rows = rows.max(cols);
    let mut mp = DMatrix::zeros(padded_rows, cols);
    mp.view_mut((0, 0), (rows, cols)).copy_from(m);
    let mut rp = DVector::zeros(padded_rows);
    rp.rows_mut(0, rows).copy_from(r);

    let svd = mp.clone().svd(true, true);
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let tol = RANK_TOL * smax.max(1.0);

    let mut particular = DVector::zeros(cols);
    let mut null_cols = Vec::new();
    for k in 0..cols {
        let s = svd.singular_values[k];
        let vk = v_t.row(k).transpose();
        if s > tol {
            let coef = u.column(k).dot(&rp) / s;
            particular += vk * coef;
        } else {
            null_cols.push(vk);
        }
    }
    let null_basis = if null_cols.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&null_cols)
    };
    let residual = (m * &particular - r).amax();
    LinearSolution {
        particular,
        null_basis,
        residual,
    }
}

/// Maximizes `objective·z` over `{z ≥ 0 : M z = r}`.
///
/// Returns `None` when the set is empty. The caller guarantees boundedness.
pub(crate) fn maximize(objective: &[f64], m: &DMatrix<f64>, r: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
    let cols = m.ncols();
    let rank = m.clone().svd(false, false).rank(RANK_TOL * m.amax().max(1.0));
    let mut best: Option<(f64, DVector<f64>)> = None;
    for basis in (0..cols).combinations(rank) {
        let sub = m.select_columns(&basis);
        let sol = solve_with_null_space(&sub, r);
        if sol.null_basis.ncols() > 0 || sol.residual > 1e-9 {
            continue;
        }
        if sol.particular.iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut z = DVector::zeros(cols);
        for (k, &col) in basis.iter().enumerate() {
            z[col] = sol.particular[k].max(0.0);
        }
        let value: f64 = objective.iter().zip(z.iter()).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|(b, _)| value > *b + 1e-15) {
            best = Some((value, z));
        }
    }
    if rank == 0 && r.amax() <= 1e-9 {
        return Some((0.0, DVector::zeros(cols)));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one_system() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let r = DVector::from_vec(vec![3.0]);
        let sol = solve_with_null_space(&m, &r);
        assert_eq!(sol.null_basis.ncols(), 2);
        assert!(sol.residual < 1e-14);
        assert!((m * &sol.null_basis).amax() < 1e-14);
        for k in 0..3 {
            assert!((sol.particular[k] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn inconsistent_system_has_residual() {
        let m = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let r = DVector::from_vec(vec![0.0, 1.0]);
        assert!((solve_with_null_space(&m, &r).residual - 0.5).abs() < 1e-14);
    }

    #[test]
    fn lp_on_simplex() {
        // max 2a + b  s.t.  a + b + c = 1
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let r = DVector::from_vec(vec![1.0]);
        let (v, z) = maximize(&[2.0, 1.0, 0.0], &m, &r).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(z[0], 1.0);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let r = DVector::from_vec(vec![1.0, 3.0]);
        assert!(maximize(&[1.0, 0.0], &m, &r).is_none());
    }
}
