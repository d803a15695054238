//! Closed form for binary architectures `(2, …, 2, d_L)`.
//!
//! With `P12` the coordinate swap, every `p^(k)` is linear:
//! `p^(k) = A_k x` where `A_1 = W_1` and `A_k = W_k P12 A_{k-1}`, and
//! `q^(k+1) = (A_k x)_1 (A_k x)_2` is the quadratic form `xᵀ A_kᵀ E A_k x`
//! with `E = [[0, 1], [0, 0]]`.

use super::{assemble, RationalTuple, Weights};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;
use crate::polyalg::{ExponentVector, HomPoly};

pub fn swap_matrix<F: Field>(f: &F) -> Matrix<F::Elem> {
    Matrix::from_fn(2, 2, |i, j| if i != j { f.one() } else { f.zero() })
}

/// `A_1, …, A_L`.
pub fn binary_matrices<F: Field>(w: &Weights<F>) -> Result<Vec<Matrix<F::Elem>>> {
    if !w.arch().is_binary() {
        return Err(Error::NotBinary(w.arch().dims().to_vec()));
    }
    let f = w.field();
    let p12 = swap_matrix(f);
    let mut out = vec![w.layer(1).clone()];
    for k in 2..=w.arch().layers() {
        let prev = p12.matmul(f, out.last().unwrap())?;
        out.push(w.layer(k).matmul(f, &prev)?);
    }
    Ok(out)
}

fn quadratic_form<F: Field>(f: &F, a: &Matrix<F::Elem>) -> HomPoly<F> {
    // B = Aᵀ E A, so B_ij = a_{1i} a_{2j}
    let b = |i: usize, j: usize| f.mul(a.get(0, i), a.get(1, j));
    let terms = [
        (vec![2, 0], b(0, 0)),
        (vec![1, 1], f.add(b(0, 1), b(1, 0))),
        (vec![0, 2], b(1, 1)),
    ];
    HomPoly::from_terms(f.clone(), 2, 2, terms.into_iter().map(|(e, c)| (ExponentVector::new(e), c)))
        .expect("degree-2 exponents")
}

pub fn forward_binary<F: Field>(w: &Weights<F>) -> Result<RationalTuple<F>> {
    let a = binary_matrices(w)?;
    let f = w.field();
    let l = w.arch().layers();
    let mut q = vec![HomPoly::one(f.clone(), 2), HomPoly::one(f.clone(), 2)];
    for ak in &a[..l - 1] {
        q.push(quadratic_form(f, ak));
    }
    let last = &a[l - 1];
    let p = (0..last.rows()).map(|i| HomPoly::linear(f.clone(), last.row(i))).collect();
    assemble(p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Real};
    use crate::network::{forward_recursive, Architecture};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn agrees_with_recursion_over_gfp() {
        let f = PrimeField::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for l in 1..=6 {
            for dl in 1..=3 {
                let mut dims = vec![2; l];
                dims.push(dl);
                let a = Architecture::new(dims).unwrap();
                let w = Weights::random(f, &a, &mut rng);
                assert_eq!(forward_binary(&w).unwrap(), forward_recursive(&w).unwrap(), "L={l}");
            }
        }
    }

    #[test]
    fn shallow_denominator() {
        let f = Real::default();
        let w1 = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, -1.0]]).unwrap();
        let w = Weights::new(
            f,
            Architecture::new(vec![2, 2, 1]).unwrap(),
            vec![w1, Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap()],
        )
        .unwrap();
        let t = forward_binary(&w).unwrap();
        let q = HomPoly::linear(f, &[1.0, 2.0]).mul(&HomPoly::linear(f, &[3.0, -1.0])).unwrap();
        assert_eq!(t.denominator, q);
    }

    #[test]
    fn identity_weights_three_layers() {
        let f = Real::default();
        let w = Weights::new(
            f,
            Architecture::new(vec![2, 2, 2, 1]).unwrap(),
            vec![Matrix::identity(&f, 2), Matrix::identity(&f, 2), Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap()],
        )
        .unwrap();
        let t = forward_binary(&w).unwrap();
        // A_2 = P12, so q^(2) = x1 x2, q^(3) = x2 x1 and p^(3) = x1 + x2.
        let x1x2 = HomPoly::var(f, 2, 0).mul(&HomPoly::var(f, 2, 1)).unwrap();
        assert_eq!(t.denominator, x1x2);
        assert_eq!(t.numerators[0], x1x2.mul(&HomPoly::linear(f, &[1.0, 1.0])).unwrap());
        assert!(forward_binary(&Weights::new(
            f,
            Architecture::new(vec![3, 2, 1]).unwrap(),
            vec![Matrix::filled(2, 3, 1.0), Matrix::filled(1, 2, 1.0)]
        )
        .unwrap())
        .is_err());
    }
}
