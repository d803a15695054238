//! Small dense matrices over an arbitrary [`Field`], plus exact rank over
//! GF(p) and float/complex helpers backed by nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, PrimeField};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Copy> Matrix<E> {
    pub fn new(rows: usize, cols: usize, data: Vec<E>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn filled(rows: usize, cols: usize, v: E) -> Self {
        Matrix { rows, cols, data: vec![v; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<E>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.concat() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> E {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<E>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn data(&self) -> &[E] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [E] {
        &mut self.data
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map<T: Copy>(&self, f: impl Fn(E) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

impl<E: Copy> Matrix<E> {
    pub fn identity<F: Field<Elem = E>>(field: &F, n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { field.one() } else { field.zero() })
    }

    pub fn matmul<F: Field<Elem = E>>(&self, field: &F, other: &Matrix<E>) -> Result<Matrix<E>> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(field.zero(), |acc, k| {
                field.add(acc, field.mul(self.get(i, k), other.get(k, j)))
            })
        }))
    }

    pub fn matvec<F: Field<Elem = E>>(&self, field: &F, x: &[E]) -> Result<Vec<E>> {
        if self.cols != x.len() {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} times vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(field.zero(), |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
            })
            .collect())
    }
}

/// Exact rank over GF(p) by Gaussian elimination. Consumes a row-major copy.
pub fn rank_mod_p(field: &PrimeField, m: &Matrix<u64>) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.data().to_vec();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| a[r * cols + col] != 0) else {
            continue;
        };
        if piv != rank {
            for j in 0..cols {
                a.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = field.inv(a[rank * cols + col]).expect("nonzero pivot");
        for j in col..cols {
            a[rank * cols + j] = field.mul(a[rank * cols + j], inv);
        }
        for r in 0..rows {
            if r == rank {
                continue;
            }
            let factor = a[r * cols + col];
            if factor == 0 {
                continue;
            }
            for j in col..cols {
                let v = field.mul(factor, a[rank * cols + j]);
                a[r * cols + j] = field.sub(a[r * cols + j], v);
            }
        }
        rank += 1;
    }
    rank
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank: singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&smax) = sv.first() else { return 0 };
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Minimum-norm least-squares solution of `a x = b` via SVD.
pub fn lstsq(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = smax * 1e-13 * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, eps).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Real;

    #[test]
    fn matmul_shapes() {
        let f = Real::default();
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        let c = a.matmul(&f, &b).unwrap();
        assert_eq!(c.data(), &[3.0, 7.0]);
        assert!(b.matmul(&f, &b).is_err());
    }

    #[test]
    fn rank_over_small_prime() {
        let f = PrimeField::new(7).unwrap();
        // second row = 3 * first row mod 7
        let m = Matrix::from_rows(&[vec![1, 2, 3], vec![3, 6, 2], vec![0, 1, 1]]).unwrap();
        assert_eq!(rank_mod_p(&f, &m), 2);
    }

    #[test]
    fn numerical_rank_drops_tiny_directions() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(4.0 + 1e-14, 0.0)],
        );
        assert_eq!(numerical_rank(&m, 1e-10), 1);
    }
}
