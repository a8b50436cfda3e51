use crate::error::{invalid, Error, Result};

use super::matrix::DenseMatrix;

/// Sweep stops once the off-diagonal Frobenius norm falls below this
/// fraction of the input's Frobenius norm.
pub const DEFAULT_JACOBI_THRESHOLD: f64 = 1e-12;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `M = Q Λ Qᵀ` of a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: DenseMatrix,
}

impl SymmetricEigen {
    /// `Q f(Λ) Qᵀ`
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let fvals: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut scaled = self.vectors.clone();
        scaled.scale_cols(&fvals);
        scaled
            .matmul(&self.vectors.transpose())
            .expect("eigenvector matrix is square")
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        self.map(|l| l)
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn jacobi_eigh(m: &DenseMatrix) -> Result<SymmetricEigen> {
    jacobi_eigh_with(m, DEFAULT_JACOBI_THRESHOLD)
}

/// Jacobi eigensolver with round-robin (parallel) ordering.
///
/// Each round applies `n/2` disjoint plane rotations at once, so row and
/// column updates both stream over contiguous memory.
pub fn jacobi_eigh_with(m: &DenseMatrix, threshold: f64) -> Result<SymmetricEigen> {
    if !m.is_square() {
        return invalid(format!("eigensolver needs a square matrix, got {}x{}", m.rows(), m.cols()));
    }
    let n = m.rows();
    let scale = m.max_abs().max(1.0);
    let defect = m.symmetry_defect();
    if defect > 1e-12 * scale {
        return invalid(format!("matrix is not symmetric (max |m_ij - m_ji| = {defect:e})"));
    }
    if m.data().iter().any(|v| !v.is_finite()) {
        return invalid("matrix has non-finite entries");
    }
    let mut a = m.symmetrized();
    // rows of `vt` are the eigenvectors
    let mut vt = DenseMatrix::identity(n);
    let norm = a.frobenius_norm();
    let target = threshold * norm;

    let players = n + (n % 2);
    let mut ring: Vec<usize> = (0..players).collect();
    let mut converged = n < 2 || off_diagonal_norm(&a) <= target;
    let mut sweeps = 0;
    let mut rot = Vec::with_capacity(players / 2);
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NotConverged { iterations: sweeps, last_estimate: off_diagonal_norm(&a) });
        }
        for _round in 0..players - 1 {
            rot.clear();
            for k in 0..players / 2 {
                let (p, q) = (ring[k], ring[players - 1 - k]);
                let (p, q) = (p.min(q), p.max(q));
                if q >= n {
                    continue;
                }
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                rot.push((p, q, c, t * c));
            }
            if !rot.is_empty() {
                apply_round(&mut a, &mut vt, &rot);
            }
            // circle method: keep ring[0] fixed, rotate the rest
            ring[1..].rotate_right(1);
        }
        sweeps += 1;
        converged = off_diagonal_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |row, k| vt[(order[k], row)]);
    Ok(SymmetricEigen { values, vectors })
}

/// `A ← Pᵀ A P`, `Vᵀ ← Pᵀ Vᵀ` for a product `P` of disjoint rotations
/// `(p, q, c, s)` with `P_pp = P_qq = c`, `P_pq = s`, `P_qp = -s`.
fn apply_round(a: &mut DenseMatrix, vt: &mut DenseMatrix, rot: &[(usize, usize, f64, f64)]) {
    let n = a.rows();
    for k in 0..n {
        let row = a.row_mut(k);
        for &(p, q, c, s) in rot {
            let (x, y) = (row[p], row[q]);
            row[p] = c * x - s * y;
            row[q] = s * x + c * y;
        }
    }
    for &(p, q, c, s) in rot {
        rotate_rows(a, p, q, c, s);
        rotate_rows(vt, p, q, c, s);
        a[(p, q)] = 0.0;
        a[(q, p)] = 0.0;
    }
}

fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    let data = m.data_mut();
    let (head, tail) = data.split_at_mut(q * cols);
    let rp = &mut head[p * cols..(p + 1) * cols];
    let rq = &mut tail[..cols];
    for (x, y) in rp.iter_mut().zip(rq.iter_mut()) {
        let (u, v) = (*x, *y);
        *x = c * u - s * v;
        *y = s * u + c * v;
    }
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for (j, v) in a.row(i).iter().enumerate() {
            if i != j {
                s += v * v;
            }
        }
    }
    s.sqrt()
}

/// Exact 2-norm as the square root of the top eigenvalue of `MᵀM`.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64> {
    let gram = m.transpose().matmul(m)?.symmetrized();
    let eig = jacobi_eigh(&gram)?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}
