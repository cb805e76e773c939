//! Small dense complex matrices.
//!
//! Dimensions in this crate stay around d ≤ 10, so everything here is plain
//! row-major storage with O(d³) kernels.

use std::ops::{Index, IndexMut, Mul};

use crate::error::{Error, Result};
use crate::scalar::{czero, Cx, Real};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![czero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Cx<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows, rejecting ragged or empty input.
    pub fn from_rows(rows: Vec<Vec<Cx<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Empty);
        }
        for (row, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::NotSquare { rows: dim, row, cols: r.len() });
            }
        }
        Ok(Self { dim, data: rows.into_iter().flatten().collect() })
    }

    /// Outer product `|u⟩⟨v|`.
    pub fn outer(u: &[Cx<T>], v: &[Cx<T>]) -> Self {
        assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Cx<T>]> {
        self.data.chunks(self.dim.max(1))
    }

    pub fn column(&self, j: usize) -> Vec<Cx<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.dim).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Self {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x * a + y * b).collect();
        Self { dim: self.dim, data }
    }

    /// Largest `|m_ij - conj(m_ji)|` and where it occurs.
    pub fn hermitian_deviation(&self) -> (T, usize, usize) {
        let mut worst = (T::zero(), 0, 0);
        for i in 0..self.dim {
            for j in i..self.dim {
                let dev = (self[(i, j)] - self[(j, i)].conj()).norm();
                if dev > worst.0 {
                    worst = (dev, i, j);
                }
            }
        }
        worst
    }

    /// Largest entrywise deviation of `self · self†` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let p = self * &self.adjoint();
        let id = Self::identity(self.dim);
        p.data.iter().zip(&id.data).map(|(a, b)| (a - b).norm()).fold(T::zero(), T::max)
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// The Hermitian part of `self` is embedded as the real symmetric
    /// `[[Re, -Im], [Im, Re]]`, diagonalized by cyclic Jacobi rotations; every
    /// eigenvalue then appears twice.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let m = 2 * n;
        let half = T::lit(0.5);
        let mut a = vec![T::zero(); m * m];
        for i in 0..n {
            for j in 0..n {
                let h = (self[(i, j)] + self[(j, i)].conj()) * half;
                a[i * m + j] = h.re;
                a[(i + n) * m + (j + n)] = h.re;
                a[(i + n) * m + j] = h.im;
                a[i * m + (j + n)] = -h.im;
            }
        }
        jacobi_symmetric(&mut a, m);
        let mut ev: Vec<T> = (0..m).map(|i| a[i * m + i]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        ev.into_iter().step_by(2).collect()
    }

    /// Thin QR by twice-iterated modified Gram-Schmidt.
    ///
    /// Returns `Q` only; the implied `R` has a positive real diagonal, which is
    /// the normalization that makes `Q` Haar distributed when `self` is a
    /// complex Ginibre matrix. Returns `None` for a numerically singular input.
    pub fn qr_q(&self) -> Option<Self> {
        let n = self.dim;
        let mut cols: Vec<Vec<Cx<T>>> = (0..n).map(|j| self.column(j)).collect();
        for j in 0..n {
            for _pass in 0..2 {
                for k in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let q = &done[k];
                    let v = &mut rest[0];
                    let proj = q.iter().zip(v.iter()).fold(czero::<T>(), |acc, (a, b)| acc + a.conj() * b);
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= qi * proj;
                    }
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if !(norm > T::epsilon()) {
                return None;
            }
            for z in cols[j].iter_mut() {
                *z /= norm;
            }
        }
        Some(Self::from_fn(n, |i, j| cols[j][i]))
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Cx<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// In-place cyclic Jacobi; on return the diagonal of `a` holds the eigenvalues.
fn jacobi_symmetric<T: Real>(a: &mut [T], m: usize) {
    let off = |a: &[T]| {
        let mut s = T::zero();
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    s += a[i * m + j] * a[i * m + j];
                }
            }
        }
        s
    };
    let total: T = a.iter().map(|x| *x * *x).sum();
    let target = T::epsilon() * T::epsilon() * total.max(T::min_positive_value());
    for _sweep in 0..100 {
        if off(a) <= target {
            break;
        }
        for p in 0..m {
            for q in (p + 1)..m {
                let apq = a[p * m + q];
                if apq == T::zero() {
                    continue;
                }
                let app = a[p * m + p];
                let aqq = a[q * m + q];
                let theta = (aqq - app) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

/// Solves the square real system `a·x = b` by Gaussian elimination with
/// partial pivoting. `None` when singular.
pub fn solve_real<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() <= T::min_positive_value() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let v = a[col][k];
                a[row][k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in (row + 1)..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eigenvalues_of_real_2x2() {
        let m = CMatrix::from_rows(vec![
            vec![cx(0.5, 0.0), cx(0.6, 0.0)],
            vec![cx(0.6, 0.0), cx(0.5, 0.0)],
        ])
        .unwrap();
        let ev = m.hermitian_eigenvalues();
        assert_abs_diff_eq!(ev[0], -0.1, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.1, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_of_complex_hermitian() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = CMatrix::from_rows(vec![
            vec![cx(2.0, 0.0), cx(0.0, 1.0)],
            vec![cx(0.0, -1.0), cx(2.0, 0.0)],
        ])
        .unwrap();
        let ev = m.hermitian_eigenvalues();
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(ev[1], 3.0, epsilon = 1e-13);
    }

    #[test]
    fn qr_of_identity_is_identity() {
        let q = CMatrix::<f64>::identity(4).qr_q().unwrap();
        assert_abs_diff_eq!(q.unitarity_defect(), 0.0, epsilon = 1e-15);
        assert_eq!(q, CMatrix::identity(4));
    }

    #[test]
    fn qr_rejects_singular() {
        let m = CMatrix::<f64>::from_fn(3, |_, _| cx(1.0, 0.0));
        assert!(m.qr_q().is_none());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = CMatrix::<f64>::from_rows(vec![vec![cx(1.0, 0.0)], vec![]]).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn solves_vandermonde() {
        let nodes = [0.0, 0.5, 1.0];
        let a = nodes.iter().map(|&x: &f64| vec![1.0, x, x * x]).collect();
        let b = nodes.iter().map(|&x| 2.0 - x + 3.0 * x * x).collect();
        let c = solve_real(a, b).unwrap();
        assert_abs_diff_eq!(c[0], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[2], 3.0, epsilon = 1e-14);
    }
}
