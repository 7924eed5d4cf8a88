//! Conservation enforcement by constrained least squares.
//!
//! The raw spectral collision output does not annihilate the discrete
//! collision invariants exactly. The fix is the Euclidean projection onto
//! the null space of the 5 x M integration matrix `C` whose rows are the
//! trapezoid-weighted invariants `(w_j; v_j^i w_j; |v_j|^2 w_j)`:
//!
//! ```text
//! Q = (I - C^T (C C^T)^{-1} C) Qtilde
//! ```
//!
//! which minimizes `||Qtilde - Q||_2` subject to `C Q = 0`. The 5 x 5 Gram
//! matrix is factorized once; each application is 10 dot products of length
//! M, far below the convolution cost.

use crate::grid::VelocityGrid;
use crate::{Error, Result};

const NC: usize = 5;

/// Constraint matrix, its Cholesky-factorized Gram matrix, and the Gram
/// condition number. Immutable after construction; `project` is pure.
#[derive(Debug, Clone)]
pub struct ConservationProjector {
    rows: [Vec<f64>; NC],
    chol: [[f64; NC]; NC],
    condition: f64,
    m: usize,
}

/// Assembles the projector for a grid. The five constraint rows are
/// linearly independent on any grid with `N >= 4`, so the Gram matrix is
/// symmetric positive definite; a singular factorization is a hard error.
pub fn build_projector(grid: &VelocityGrid) -> Result<ConservationProjector> {
    let m = grid.len();
    let mut rows: [Vec<f64>; NC] = std::array::from_fn(|_| vec![0.0; m]);
    for idx in 0..m {
        let w = grid.quad_weight(idx);
        let v = grid.velocity(idx);
        rows[0][idx] = w;
        rows[1][idx] = v[0] * w;
        rows[2][idx] = v[1] * w;
        rows[3][idx] = v[2] * w;
        rows[4][idx] = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) * w;
    }

    let mut gram = [[0.0f64; NC]; NC];
    for i in 0..NC {
        for j in i..NC {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            gram[i][j] = dot;
            gram[j][i] = dot;
        }
    }
    let chol = cholesky(&gram)?;
    let eigs = jacobi_eigenvalues(gram);
    let (min, max) = eigs
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    if !(min > 0.0) {
        return Err(Error::Invalid(format!(
            "gram matrix is not positive definite (min eigenvalue {min:.3e})"
        )));
    }
    Ok(ConservationProjector {
        rows,
        chol,
        condition: max / min,
        m,
    })
}

impl ConservationProjector {
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Condition number of the Gram matrix (diagnostic).
    pub fn gram_condition(&self) -> f64 {
        self.condition
    }

    /// Constraint row `i` of `C` (0 mass, 1-3 momentum, 4 energy).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// `C q`: the five weighted moments of a vector.
    pub fn constraints(&self, q: &[f64]) -> [f64; NC] {
        assert_eq!(q.len(), self.m, "vector/projector size mismatch");
        std::array::from_fn(|i| self.rows[i].iter().zip(q).map(|(c, x)| c * x).sum())
    }

    /// Euclidean projection of `q` onto `{x : C x = 0}`; idempotent.
    pub fn project(&self, q: &[f64]) -> Result<Vec<f64>> {
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "projection input",
                step: None,
            });
        }
        let mut out = q.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// In-place projection without the finiteness scan (hot path; the time
    /// loop checks state separately).
    pub fn project_in_place(&self, q: &mut [f64]) {
        assert_eq!(q.len(), self.m, "vector/projector size mismatch");
        let c = self.constraints(q);
        let gamma = self.solve_gram(c);
        for i in 0..NC {
            let g = gamma[i];
            if g != 0.0 {
                for (x, r) in q.iter_mut().zip(&self.rows[i]) {
                    *x -= g * r;
                }
            }
        }
    }

    /// Solves `(C C^T) x = b` with the stored Cholesky factor.
    fn solve_gram(&self, b: [f64; NC]) -> [f64; NC] {
        let l = &self.chol;
        let mut y = [0.0f64; NC];
        for i in 0..NC {
            let mut s = b[i];
            for j in 0..i {
                s -= l[i][j] * y[j];
            }
            y[i] = s / l[i][i];
        }
        let mut x = [0.0f64; NC];
        for i in (0..NC).rev() {
            let mut s = y[i];
            for j in i + 1..NC {
                s -= l[j][i] * x[j];
            }
            x[i] = s / l[i][i];
        }
        x
    }
}

/// Lower-triangular Cholesky factor of a symmetric positive definite 5x5.
fn cholesky(a: &[[f64; NC]; NC]) -> Result<[[f64; NC]; NC]> {
    let mut l = [[0.0f64; NC]; NC];
    for i in 0..NC {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::Invalid(
                        "gram matrix is not positive definite".into(),
                    ));
                }
                l[i][j] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(l)
}

/// Eigenvalues of a symmetric 5x5 by cyclic Jacobi rotations.
fn jacobi_eigenvalues(mut a: [[f64; NC]; NC]) -> [f64; NC] {
    for _ in 0..64 {
        let mut off = 0.0;
        for i in 0..NC {
            for j in i + 1..NC {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-300 {
            break;
        }
        for p in 0..NC {
            for q in p + 1..NC {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..NC {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..NC {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::array::from_fn(|i| a[i][i])
}
