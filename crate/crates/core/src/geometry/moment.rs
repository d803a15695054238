use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, NumericField};
use crate::matrix::{numerical_rank, Matrix};
use crate::network::Architecture;
use crate::polyalg::{monomials, ExponentVector, HomPoly};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ColumnLabel {
    /// Numerator `k` (0-based).
    Numerator(usize),
    /// Unit vector `e_j` (0-based), paired with the denominator.
    Unit(usize),
}

/// Coefficient matrix of a one-hidden-layer tuple. Rows are the exponent
/// vectors `R` of degree `d_1 − 1` in graded-lex order (largest first);
/// the entry at `(R, numerator k)` is `R!·C_{k,R}` and at `(R, e_j)` it is
/// `(R + e_j)!·C_{R + e_j}`, i.e. the partial derivative `∂^R` of `P_k`
/// and the `x_j` coefficient of `∂^R Q`. For `d_1 = 2` this is the matrix
/// whose diagonal denominator entries carry the factor 2.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix<E> {
    pub rows: Vec<ExponentVector>,
    pub cols: Vec<ColumnLabel>,
    pub entries: Matrix<E>,
}

pub fn build_moment_matrix<F: Field>(ps: &[HomPoly<F>], q: &HomPoly<F>, arch: &Architecture) -> Result<MomentMatrix<F::Elem>> {
    if !arch.is_shallow() {
        return Err(Error::NotShallow(arch.dims().to_vec()));
    }
    let (n, d1, k) = (arch.dims()[0], arch.dims()[1], arch.dims()[2]);
    if ps.len() != k {
        return Err(Error::ShapeMismatch(format!("{} numerators for output width {k}", ps.len())));
    }
    for p in ps.iter().chain(std::iter::once(q)) {
        if p.nvars() != n {
            return Err(Error::NvarsMismatch(p.nvars(), n));
        }
    }
    for p in ps {
        if p.degree() != d1 - 1 {
            return Err(Error::DegreeMismatch(p.degree(), d1 - 1));
        }
    }
    if q.degree() != d1 {
        return Err(Error::DegreeMismatch(q.degree(), d1));
    }
    let f = q.field();
    let weight = |e: &ExponentVector| f.from_i64(e.factorial_product() as i64);
    let rows = monomials(n, d1 - 1);
    let cols: Vec<ColumnLabel> = (0..k).map(ColumnLabel::Numerator).chain((0..n).map(ColumnLabel::Unit)).collect();
    let entries = Matrix::from_fn(rows.len(), cols.len(), |r, c| {
        let row = &rows[r];
        match cols[c] {
            ColumnLabel::Numerator(i) => f.mul(weight(row), ps[i].coeff(row)),
            ColumnLabel::Unit(j) => {
                let e = row.add(&ExponentVector::unit(n, j));
                f.mul(weight(&e), q.coeff(&e))
            }
        }
    });
    Ok(MomentMatrix { rows, cols, entries })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankTest {
    pub passed: bool,
    pub rank: usize,
    /// Hidden width `d_1`, the largest rank allowed.
    pub bound: usize,
    /// For `d_1 ≥ 3` the rank condition is necessary but not sufficient.
    pub necessary_only: bool,
}

/// Numerical rank of the moment matrix against `d_1` (singular values below
/// `tol · σ_max` dropped).
pub fn rank_test_membership<F: NumericField>(ps: &[HomPoly<F>], q: &HomPoly<F>, arch: &Architecture, tol: f64) -> Result<RankTest> {
    let m = build_moment_matrix(ps, q, arch)?;
    let f = q.field();
    let dm = DMatrix::from_fn(m.entries.rows(), m.entries.cols(), |i, j| -> Complex64 { f.to_complex(m.entries.get(i, j)) });
    let rank = numerical_rank(&dm, tol);
    let bound = arch.dims()[1];
    Ok(RankTest { passed: rank <= bound, rank, bound, necessary_only: bound >= 3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Complex, PrimeField, Real};
    use crate::matrix::rank_mod_p;
    use crate::network::{forward_recursive, Weights};
    use crate::polyalg::LinearForm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arch(d: &[usize]) -> Architecture {
        Architecture::new(d.to_vec()).unwrap()
    }

    #[test]
    fn three_two_one_layout() {
        let f = Real::default();
        // P = 1x1 + 2x2 + 3x3, Q with distinct coefficients per monomial
        let p = HomPoly::linear(f, &[1.0, 2.0, 3.0]);
        let q = HomPoly::from_terms(
            f,
            3,
            2,
            [
                ([2, 0, 0], 10.0),
                ([1, 1, 0], 11.0),
                ([1, 0, 1], 12.0),
                ([0, 2, 0], 13.0),
                ([0, 1, 1], 14.0),
                ([0, 0, 2], 15.0),
            ]
            .map(|(e, c)| (ExponentVector::new(e.to_vec()), c)),
        )
        .unwrap();
        let m = build_moment_matrix(&[p], &q, &arch(&[3, 2, 1])).unwrap();
        let want = vec![
            vec![1.0, 20.0, 11.0, 12.0],
            vec![2.0, 11.0, 26.0, 14.0],
            vec![3.0, 12.0, 14.0, 30.0],
        ];
        assert_eq!(m.entries.to_rows(), want);
        assert_eq!(m.cols, vec![ColumnLabel::Numerator(0), ColumnLabel::Unit(0), ColumnLabel::Unit(1), ColumnLabel::Unit(2)]);
    }

    /// `M = Z · [W_2ᵀ | W_1]` with `Z_{R,j} = ∂^R ∏_{s≠j} ℓ_s`, checked exactly.
    #[test]
    fn factorization_through_weights() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for dims in [vec![3, 2, 2], vec![4, 2, 3], vec![3, 3, 1], vec![2, 3, 2]] {
            let a = arch(&dims);
            let (n, d1, k) = (dims[0], dims[1], dims[2]);
            let w = Weights::random(f, &a, &mut rng);
            let t = forward_recursive(&w).unwrap();
            let m = build_moment_matrix(&t.numerators, &t.denominator, &a).unwrap();
            let forms: Vec<HomPoly<PrimeField>> =
                (0..d1).map(|j| LinearForm::new(w.layer(1).row(j).to_vec()).to_poly(&f)).collect();
            let z = Matrix::from_fn(m.rows.len(), d1, |r, j| {
                let prod = HomPoly::product(&f, n, forms.iter().enumerate().filter(|(s, _)| *s != j).map(|(_, l)| l)).unwrap();
                f.mul(f.from_i64(m.rows[r].factorial_product() as i64), prod.coeff(&m.rows[r]))
            });
            let right = Matrix::from_fn(d1, k + n, |j, c| if c < k { w.layer(2).get(c, j) } else { w.layer(1).get(j, c - k) });
            assert_eq!(z.matmul(&f, &right).unwrap(), m.entries, "{dims:?}");
            assert!(rank_mod_p(&f, &m.entries) <= d1);
        }
    }

    #[test]
    fn on_model_passes_and_noise_fails() {
        let f = Complex::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = arch(&[5, 2, 2]);
        let w = Weights::random(f, &a, &mut rng);
        let t = forward_recursive(&w).unwrap();
        let r = rank_test_membership(&t.numerators, &t.denominator, &a, 1e-10).unwrap();
        assert!(r.passed && r.rank == 2 && !r.necessary_only);
        let mut p0 = t.numerators[0].clone();
        let e = ExponentVector::unit(5, 4);
        p0 = p0.add(&HomPoly::from_terms(f, 5, 1, [(e, Complex64::new(1e-2, 0.0))]).unwrap()).unwrap();
        let r = rank_test_membership(&[p0, t.numerators[1].clone()], &t.denominator, &a, 1e-10).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn deeper_hidden_width_is_necessary_only() {
        let f = Complex::default();
        let a = arch(&[3, 3, 1]);
        let w = Weights::random(f, &a, &mut ChaCha8Rng::seed_from_u64(4));
        let t = forward_recursive(&w).unwrap();
        let r = rank_test_membership(&t.numerators, &t.denominator, &a, 1e-10).unwrap();
        assert!(r.passed && r.necessary_only && r.rank == 3);
    }

    #[test]
    fn degree_mismatch_rejected() {
        let f = Real::default();
        let p = HomPoly::linear(f, &[1.0, 2.0]);
        assert!(build_moment_matrix(&[p.clone()], &p, &arch(&[2, 2, 1])).is_err());
    }
}
