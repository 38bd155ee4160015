//! Symmetric 4×4 matrices and a cyclic Jacobi eigensolver.

use crate::scalar::Scalar;

/// Target for the off-diagonal Frobenius norm in [`sym_eigen`].
pub const JACOBI_TOLERANCE: f64 = 1e-13;
const MAX_SWEEPS: usize = 64;

/// Symmetric 4×4 matrix stored as its upper triangle, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat4<T> {
    upper: [T; 10],
}

#[inline]
fn slot(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows start at 0, 4, 7, 9
    4 * i - i * i.saturating_sub(1) / 2 + (j - i)
}

impl<T: Scalar> SymMat4<T> {
    pub fn zeros() -> Self {
        Self {
            upper: [T::zero(); 10],
        }
    }

    pub fn identity() -> Self {
        Self::diagonal([T::one(); 4])
    }

    pub fn diagonal(d: [T; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, &x) in d.iter().enumerate() {
            m.set(i, i, x);
        }
        m
    }

    /// Builds from the upper triangle of a dense matrix.
    pub fn from_upper(a: &[[T; 4]; 4]) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in i..4 {
                m.set(i, j, a[i][j]);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.upper[slot(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: T) {
        self.upper[slot(i, j)] = x;
    }

    pub fn to_dense(&self) -> [[T; 4]; 4] {
        let mut a = [[T::zero(); 4]; 4];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.get(i, j);
            }
        }
        a
    }

    /// `hᵀ M h`.
    pub fn quadratic_form(&self, h: &[T; 4]) -> T {
        let mut acc = T::zero();
        for i in 0..4 {
            acc = acc + self.get(i, i) * h[i] * h[i];
            for j in (i + 1)..4 {
                acc = acc + T::lit(2.0) * self.get(i, j) * h[i] * h[j];
            }
        }
        acc
    }

    pub fn shifted(&self, alpha: T) -> Self {
        let mut m = *self;
        for i in 0..4 {
            m.set(i, i, m.get(i, i) + alpha);
        }
        m
    }

    pub fn determinant(&self) -> T {
        let a = self.to_dense();
        let minor = |r: [usize; 3], c: [usize; 3]| {
            a[r[0]][c[0]] * (a[r[1]][c[1]] * a[r[2]][c[2]] - a[r[1]][c[2]] * a[r[2]][c[1]])
                - a[r[0]][c[1]] * (a[r[1]][c[0]] * a[r[2]][c[2]] - a[r[1]][c[2]] * a[r[2]][c[0]])
                + a[r[0]][c[2]] * (a[r[1]][c[0]] * a[r[2]][c[1]] - a[r[1]][c[1]] * a[r[2]][c[0]])
        };
        let rows = [1, 2, 3];
        let mut det = T::zero();
        for j in 0..4 {
            let cols: Vec<usize> = (0..4).filter(|&k| k != j).collect();
            let term = a[0][j] * minor(rows, [cols[0], cols[1], cols[2]]);
            det = if j % 2 == 0 { det + term } else { det - term };
        }
        det
    }

    fn off_diagonal_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..4 {
            for j in (i + 1)..4 {
                s = s + self.get(i, j) * self.get(i, j);
            }
        }
        (T::lit(2.0) * s).sqrt()
    }

    fn frobenius_norm(&self) -> T {
        let mut s = T::zero();
        for i in 0..4 {
            s = s + self.get(i, i) * self.get(i, i);
        }
        (s + self.off_diagonal_norm().powi(2)).sqrt()
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen<T> {
    pub values: [T; 4],
    pub vectors: [[T; 4]; 4],
}

/// Cyclic Jacobi rotations until the off-diagonal norm drops below
/// [`JACOBI_TOLERANCE`] (or the type's resolution relative to the matrix).
pub fn sym_eigen<T: Scalar>(m: &SymMat4<T>) -> SymEigen<T> {
    let mut a = *m;
    let mut q = [[T::zero(); 4]; 4];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let scale = a.frobenius_norm();
    let floor = T::epsilon() * T::epsilon() * scale;
    let tol = T::lit(JACOBI_TOLERANCE).max(floor);

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= tol {
            break;
        }
        for p in 0..4 {
            for r in (p + 1)..4 {
                let apr = a.get(p, r);
                if apr == T::zero() {
                    continue;
                }
                let (app, arr) = (a.get(p, p), a.get(r, r));
                let theta = (arr - app) / (T::lit(2.0) * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..4 {
                    if k == p || k == r {
                        continue;
                    }
                    let (akp, akr) = (a.get(k, p), a.get(k, r));
                    a.set(k, p, cs * akp - sn * akr);
                    a.set(k, r, sn * akp + cs * akr);
                }
                a.set(p, p, app - t * apr);
                a.set(r, r, arr + t * apr);
                a.set(p, r, T::zero());
                for row in q.iter_mut() {
                    let (qp, qr) = (row[p], row[r]);
                    row[p] = cs * qp - sn * qr;
                    row[r] = sn * qp + cs * qr;
                }
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .partial_cmp(&a.get(j, j))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut values = [T::zero(); 4];
    let mut vectors = [[T::zero(); 4]; 4];
    for (slot, &i) in order.iter().enumerate() {
        values[slot] = a.get(i, i);
        for k in 0..4 {
            vectors[slot][k] = q[k][i];
        }
    }
    SymEigen { values, vectors }
}

pub fn min_eigenvalue<T: Scalar>(m: &SymMat4<T>) -> T {
    sym_eigen(m).values[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn storage_is_symmetric() {
        let mut m = SymMat4::<f64>::zeros();
        let mut k = 0.0;
        for i in 0..4 {
            for j in i..4 {
                k += 1.0;
                m.set(i, j, k);
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m.get(i, j), m.get(j, i));
                seen.insert(slot(i, j));
            }
        }
        assert_eq!(seen.len(), 10);
        assert_eq!(*seen.iter().max().unwrap(), 9);
    }

    #[test]
    fn quadratic_form_matches_dense_product() {
        let a = [
            [2.0, -1.0, 0.5, 0.0],
            [-1.0, 3.0, 0.25, 1.0],
            [0.5, 0.25, 1.0, -2.0],
            [0.0, 1.0, -2.0, 4.0],
        ];
        let m = SymMat4::from_upper(&a);
        let h = [0.3f64, -1.2, 0.7, 2.0];
        let mut dense = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                dense += h[i] * a[i][j] * h[j];
            }
        }
        assert!((m.quadratic_form(&h) - dense).abs() < 1e-14);
    }

    #[test]
    fn diagonal_inputs() {
        assert_eq!(min_eigenvalue(&SymMat4::<f64>::identity()), 1.0);
        assert_eq!(
            min_eigenvalue(&SymMat4::diagonal([4.0, 4.0, 1.0, 1.0])),
            1.0
        );
        assert_eq!(
            min_eigenvalue(&SymMat4::diagonal([4.0f32, -4.0, 1.0, 1.0])),
            -4.0
        );
    }

    #[test]
    fn eigenvectors_diagonalize() {
        let a = [
            [2.0, -1.0, 0.5, 0.0],
            [-1.0, 3.0, 0.25, 1.0],
            [0.5, 0.25, 1.0, -2.0],
            [0.0, 1.0, -2.0, 4.0],
        ];
        let m = SymMat4::from_upper(&a);
        let e = sym_eigen(&m);
        for (lambda, x) in e.values.iter().zip(e.vectors.iter()) {
            for i in 0..4 {
                let ax: f64 = (0..4).map(|j| a[i][j] * x[j]).sum();
                assert!((ax - lambda * x[i]).abs() < 1e-12);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let trace: f64 = (0..4).map(|i| a[i][i]).sum();
        assert!((e.values.iter().sum::<f64>() - trace).abs() < 1e-12);
        let prod: f64 = e.values.iter().product();
        assert!((prod - m.determinant()).abs() < 1e-11);
    }

    #[test]
    fn determinant_of_known_matrix() {
        let m = SymMat4::from_upper(&[
            [4.0, 0.0, 0.0, 6.0],
            [0.0, 4.0, -2.0, 0.0],
            [0.0, -2.0, 1.0, 0.0],
            [6.0, 0.0, 0.0, 1.0],
        ]);
        assert_eq!(m.determinant(), 0.0);
        assert_eq!(SymMat4::diagonal([2.0, 3.0, 5.0, 7.0]).determinant(), 210.0);
    }
}
