//! Feasibility of `q_j ≥ ‖s_j‖` over an affine family of hidden-state data.
//!
//! The unknown vector is `z = (q_1..q_k, c_1..c_k)` with `c_j ∈ R^n` and
//! `‖s_j‖² = c_jᵀ G c_j`. Points are restricted to `z = z0 + N w`. The
//! excess `F(w) = max_j (‖s_j‖ - q_j)` is convex; it is minimized with the
//! central-cut ellipsoid method, whose subgradient cuts also give a lower
//! bound on `min F`. A positive lower bound proves infeasibility.

use nalgebra::{DMatrix, DVector};

/// Excess at or below which a point counts as feasible.
pub(crate) const FEASIBLE_EXCESS: f64 = 1e-10;

pub(crate) struct ConeProblem<'a> {
    pub z0: &'a DVector<f64>,
    pub null: &'a DMatrix<f64>,
    pub slots: usize,
    pub n: usize,
    pub gram: &'a DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub(crate) enum ConeOutcome {
    Feasible { z: DVector<f64> },
    Infeasible { lower_bound: f64 },
    Unresolved { z: DVector<f64>, excess: f64 },
}

impl ConeProblem<'_> {
    fn point(&self, w: &DVector<f64>) -> DVector<f64> {
        if self.null.ncols() == 0 {
            self.z0.clone()
        } else {
            self.z0 + self.null * w
        }
    }

    fn norm_s(&self, z: &DVector<f64>, j: usize) -> (f64, DVector<f64>) {
        let c = z.rows(self.slots + j * self.n, self.n).into_owned();
        let gc = self.gram * &c;
        (c.dot(&gc).max(0.0).sqrt(), gc)
    }

    /// `F(z)` and a subgradient with respect to `z`.
    fn excess(&self, z: &DVector<f64>) -> (f64, DVector<f64>) {
        let mut worst = f64::NEG_INFINITY;
        let mut grad = DVector::zeros(z.len());
        for j in 0..self.slots {
            let (ns, gc) = self.norm_s(z, j);
            let e = ns - z[j];
            if e > worst {
                worst = e;
                grad.fill(0.0);
                grad[j] = -1.0;
                if ns > 0.0 {
                    grad.rows_mut(self.slots + j * self.n, self.n).copy_from(&(gc / ns));
                }
            }
        }
        (worst, grad)
    }

    pub fn solve(&self, radius: f64, max_iter: usize) -> ConeOutcome {
        let m = self.null.ncols();
        let mut w = DVector::zeros(m);
        let (f0, _) = self.excess(&self.point(&w));
        let mut best = (f0, self.point(&w));
        if f0 <= FEASIBLE_EXCESS {
            return ConeOutcome::Feasible { z: best.1 };
        }
        if m == 0 {
            return ConeOutcome::Infeasible { lower_bound: f0 };
        }

        let mut b = DMatrix::identity(m, m) * radius;
        let mf = m as f64;
        let (alpha, beta) = if m == 1 {
            (0.5, 0.0)
        } else {
            let a = mf / (mf * mf - 1.0).sqrt();
            (a, mf / (mf + 1.0) - a)
        };
        let step = if m == 1 { 0.5 } else { 1.0 / (mf + 1.0) };
        let mut lower_bound = f64::NEG_INFINITY;

        for _ in 0..max_iter {
            let z = self.point(&w);
            let (f, gz) = self.excess(&z);
            if f < best.0 {
                best = (f, z);
            }
            if f <= FEASIBLE_EXCESS {
                return ConeOutcome::Feasible { z: best.1 };
            }
            let gw = self.null.transpose() * gz;
            let btg = b.transpose() * &gw;
            let width = btg.norm();
            lower_bound = lower_bound.max(f - width);
            if lower_bound > 0.0 {
                return ConeOutcome::Infeasible { lower_bound };
            }
            if width < 1e-15 {
                break;
            }
            let p = btg / width;
            let bp = &b * &p;
            w -= &bp * step;
            b = &b * alpha + bp * p.transpose() * beta;
            if m == 1 {
                b = DMatrix::from_element(1, 1, b[(0, 0)].abs());
            }
        }
        ConeOutcome::Unresolved {
            z: best.1,
            excess: best.0,
        }
    }
}

/// A radius that contains every feasible `w`: each `q_j ≤ 1` and
/// `‖c_j‖² ≤ 1/λ_min(G)`.
pub(crate) fn feasible_radius(slots: usize, gram: &DMatrix<f64>) -> f64 {
    let lmin = gram
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    1.05 * (slots as f64 * (1.0 + 1.0 / lmin)).sqrt()
}
