//! Small dense row-major matrices over [`Qd`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::qd::Qd;

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Qd>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![Qd::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Qd::ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Qd) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_diagonal(d: &[Qd]) -> Matrix {
        let mut m = Matrix::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Panics if the rows are ragged.
    pub fn from_rows_f64(rows: &[Vec<f64>]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix::from_fn(r, c, |i, j| Qd::from(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64()).collect())
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, k: Qd) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * k).collect() }
    }

    /// Submatrix formed by the listed rows and columns, in the order given.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn mul_vec(&self, v: &[Qd]) -> Vec<Qd> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> Qd {
        self.data.iter().fold(Qd::ZERO, |m, x| m.max(x.abs()))
    }

    pub fn trace(&self) -> Qd {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest |A - Aᵀ| entry.
    pub fn asymmetry(&self) -> Qd {
        let mut m = Qd::ZERO;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)]) * Qd::HALF)
    }

    /// Lower Cholesky factor, or `None` if the matrix is not positive definite.
    pub fn cholesky(&self) -> Option<Matrix> {
        assert!(self.is_square());
        let n = self.rows;
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)].sqr();
            }
            if !(d > Qd::ZERO) {
                return None;
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Some(l)
    }

    /// LU with partial pivoting; returns the factors packed together with the
    /// permutation parity, or `None` for an exactly singular matrix.
    fn lu(&self) -> Option<(Matrix, Vec<usize>, bool)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[(x, k)].abs().partial_cmp(&a[(y, k)].abs()).unwrap())?;
            if a[(p, k)] == Qd::ZERO {
                return None;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let t = a[(k, j)];
                    a[(i, j)] -= f * t;
                }
            }
        }
        Some((a, perm, odd))
    }

    pub fn determinant(&self) -> Qd {
        match self.lu() {
            None => Qd::ZERO,
            Some((a, _, odd)) => {
                let mut d = Qd::ONE;
                for i in 0..self.rows {
                    d *= a[(i, i)];
                }
                if odd {
                    -d
                } else {
                    d
                }
            }
        }
    }

    pub fn inverse(&self) -> Option<Matrix> {
        let (a, perm, _) = self.lu()?;
        let n = self.rows;
        let mut inv = Matrix::zeros(n, n);
        for col in 0..n {
            let mut x: Vec<Qd> = (0..n).map(|i| if perm[i] == col { Qd::ONE } else { Qd::ZERO }).collect();
            for i in 0..n {
                for k in 0..i {
                    let t = a[(i, k)] * x[k];
                    x[i] -= t;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let t = a[(i, k)] * x[k];
                    x[i] -= t;
                }
                x[i] /= a[(i, i)];
            }
            for i in 0..n {
                inv[(i, col)] = x[i];
            }
        }
        Some(inv)
    }

    /// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
    pub fn symmetric_eigenvalues(&self) -> Vec<Qd> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.symmetrized();
        let scale = a.max_abs();
        if scale == Qd::ZERO {
            return vec![Qd::ZERO; n];
        }
        let tiny = scale * Qd::from(1e-66);
        for _sweep in 0..60 {
            let mut off = Qd::ZERO;
            for p in 0..n {
                for q in p + 1..n {
                    off = off.max(a[(p, q)].abs());
                }
            }
            if off <= tiny {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq.abs() <= tiny {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (apq.ldexp(1));
                    let t = {
                        let root = (theta.sqr() + 1.0).sqrt();
                        let d = if theta >= Qd::ZERO { theta + root } else { theta - root };
                        Qd::ONE / d
                    };
                    let c = Qd::ONE / (t.sqr() + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<Qd> = (0..n).map(|i| a[(i, i)]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Qd;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Qd {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Qd {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Qd::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| -x).collect() }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{:.6e}", self[(i, j)].to_f64())).collect();
            writeln!(f, "  {}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(x: f64) -> Qd {
        Qd::from(x)
    }

    fn close(a: &Matrix, b: &Matrix, tol: f64) -> bool {
        (a - b).max_abs().to_f64() <= tol
    }

    fn arb_square(n: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-10.0f64..10.0, n * n)
            .prop_map(move |v| Matrix::from_fn(n, n, |i, j| q(v[i * n + j])))
    }

    proptest! {
        #[test]
        fn inverse_is_two_sided(a in arb_square(4)) {
            prop_assume!(a.determinant().abs().to_f64() > 1e-3);
            let inv = a.inverse().unwrap();
            prop_assert!(close(&(&a * &inv), &Matrix::identity(4), 1e-55));
            prop_assert!(close(&(&inv * &a), &Matrix::identity(4), 1e-55));
        }

        #[test]
        fn cholesky_reconstructs(b in arb_square(5)) {
            let a = &(&b * &b.transpose()) + &Matrix::identity(5);
            let l = a.cholesky().unwrap();
            prop_assert!(close(&(&l * &l.transpose()), &a, 1e-55));
        }

        #[test]
        fn jacobi_preserves_trace_and_frobenius(b in arb_square(6)) {
            let a = b.symmetrized();
            let ev = a.symmetric_eigenvalues();
            let tr: Qd = ev.iter().copied().sum();
            let fro: Qd = ev.iter().map(|x| x.sqr()).sum();
            let fro_a: Qd = (0..6).flat_map(|i| (0..6).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].sqr()).sum();
            prop_assert!((tr - a.trace()).abs().to_f64() < 1e-55);
            prop_assert!((fro - fro_a).abs().to_f64() < 1e-52);
            // each eigenvalue makes A - λI singular
            for &l in &ev {
                let shifted = &a - &Matrix::identity(6).scale(l);
                let d = shifted.determinant().abs().to_f64();
                prop_assert!(d < 1e-45, "det {d:e}");
            }
        }
    }

    #[test]
    fn two_by_two_inverse_against_adjugate() {
        let a = Matrix::from_rows_f64(&[vec![3.0, 1.5], vec![-2.0, 7.0]]);
        let det = q(3.0) * q(7.0) - q(1.5) * q(-2.0);
        let adj = Matrix::from_rows_f64(&[vec![7.0, -1.5], vec![2.0, 3.0]]).scale(det.recip());
        assert!(close(&a.inverse().unwrap(), &adj, 1e-62));
        assert_eq!(a.determinant().to_f64(), 24.0);
    }

    #[test]
    fn singular_has_no_inverse() {
        let a = Matrix::from_rows_f64(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(a.inverse().is_none());
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn known_eigenvalues() {
        let a = Matrix::from_rows_f64(&[vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]]);
        let ev = a.symmetric_eigenvalues();
        let r2 = Qd::SQRT_2;
        let want = [q(2.0) - r2, q(2.0), q(2.0) + r2];
        for (g, w) in ev.iter().zip(want) {
            assert!((*g - w).abs().to_f64() < 1e-60);
        }
    }

    #[test]
    fn select_and_transpose() {
        let a = Matrix::from_fn(3, 3, |i, j| q((3 * i + j) as f64));
        let s = a.select(&[2, 0], &[1]);
        assert_eq!(s.to_f64_rows(), vec![vec![7.0], vec![1.0]]);
        assert_eq!(a.transpose()[(0, 2)].to_f64(), 6.0);
    }
}
