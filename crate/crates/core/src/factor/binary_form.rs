use num_complex::Complex64;

use super::{finish, roots_univariate, LinearFactorization};
use crate::error::{Error, Result};
use crate::field::Complex;
use crate::polyalg::{HomPoly, LinearForm};

/// Splits a binary form `q(x, y) = Σ c_k x^{m−k} y^k` as
/// `c · ∏ (x − r_i y) · y^e`, where `e` counts the roots at infinity.
pub fn factor_binary_form(q: &HomPoly<Complex>, root_tol: f64) -> Result<LinearFactorization> {
    if q.nvars() != 2 {
        return Err(Error::NvarsMismatch(2, q.nvars()));
    }
    if q.is_zero() {
        return Err(Error::Unsupported("zero polynomial has no factorization".into()));
    }
    let m = q.degree() as u32;
    let coeffs: Vec<Complex64> = (0..=m).map(|k| q.coeff_of(&[m - k, k])).collect();
    let e = coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut factors: Vec<LinearForm<Complex64>> = roots_univariate(&coeffs[e..], root_tol)?
        .into_iter()
        .map(|r| LinearForm::new(vec![one, -r]))
        .collect();
    factors.extend((0..e).map(|_| LinearForm::new(vec![zero, one])));
    Ok(finish(q, factors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::affine_zero;

    fn poly(c: &[f64]) -> HomPoly<Complex> {
        let m = c.len() as u32 - 1;
        HomPoly::from_terms(
            Complex::default(),
            2,
            m as usize,
            c.iter().enumerate().map(|(k, &v)| {
                (crate::polyalg::ExponentVector::new(vec![m - k as u32, k as u32]), Complex64::new(v, 0.0))
            }),
        )
        .unwrap()
    }

    #[test]
    fn difference_of_squares() {
        let fz = factor_binary_form(&poly(&[1.0, 0.0, -1.0]), 1e-10).unwrap();
        assert_eq!(fz.factors.len(), 2);
        assert!(fz.residual < 1e-14);
    }

    #[test]
    fn roots_at_infinity() {
        let fz = factor_binary_form(&poly(&[0.0, 0.0, 0.0, 1.0]), 1e-10).unwrap();
        assert_eq!(fz.factors.len(), 3);
        for l in &fz.factors {
            assert_eq!(l.coeffs, vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        }
        assert_eq!(fz.residual, 0.0);
    }

    #[test]
    fn quintic_factors() {
        let fz = factor_binary_form(&poly(&[1.0, 0.0, 0.0, 0.0, -1.0, 1.0]), 1e-10).unwrap();
        assert_eq!(fz.factors.len(), 5);
        assert!(fz.residual < 1e-8);
        let real: Vec<_> = fz.factors.iter().filter_map(affine_zero).filter(|z| z.im.abs() < 1e-9).collect();
        assert_eq!(real.len(), 1);
        assert!((real[0].re + 0.8566).abs() < 1e-3);
    }
}
