use num_complex::Complex64;

use crate::polyalg::LinearForm;

/// Splits `C11 x² + 2 C12 x y + C22 y²` into two linear forms whose
/// product is exactly that quadratic. The third value tells whether the
/// split is real, i.e. `C12² − C11 C22 ≥ −tol` for real input.
pub fn factor_quadratic_explicit(
    c11: Complex64,
    c12: Complex64,
    c22: Complex64,
    tol: f64,
) -> (LinearForm<Complex64>, LinearForm<Complex64>, bool) {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let real_input = [c11, c12, c22].iter().all(|z| z.im.abs() <= tol * (1.0 + z.norm()));
    let disc = c12 * c12 - c11 * c22;
    let all_real = real_input && disc.re >= -tol * (1.0 + c12.norm_sqr() + (c11 * c22).norm());
    let s = disc.sqrt();
    let (l1, l2) = if c11 != zero {
        // C11 (x + r1 y)(x + r2 y) with r1 + r2 = 2 C12 / C11, r1 r2 = C22 / C11
        (LinearForm::new(vec![c11, c12 + s]), LinearForm::new(vec![one, (c12 - s) / c11]))
    } else if c22 != zero {
        // y (2 C12 x + C22 y)
        (LinearForm::new(vec![2.0 * c12, c22]), LinearForm::new(vec![zero, one]))
    } else {
        (LinearForm::new(vec![one, zero]), LinearForm::new(vec![zero, 2.0 * c12]))
    };
    (l1, l2, all_real)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn reassemble_error(c11: Complex64, c12: Complex64, c22: Complex64) -> (f64, bool) {
        let f = Complex::default();
        let (a, b, real) = factor_quadratic_explicit(c11, c12, c22, 1e-12);
        let p = a.to_poly(&f).mul(&b.to_poly(&f)).unwrap();
        let err = (p.coeff_of(&[2, 0]) - c11).norm()
            + (p.coeff_of(&[1, 1]) - 2.0 * c12).norm()
            + (p.coeff_of(&[0, 2]) - c22).norm();
        (err, real)
    }

    #[test]
    fn difference_and_sum_of_squares() {
        assert_eq!(reassemble_error(r(1.0), r(0.0), r(-1.0)), (0.0, true));
        let (err, real) = reassemble_error(r(1.0), r(0.0), r(1.0));
        assert!(err < 1e-15);
        assert!(!real);
    }

    #[test]
    fn degenerate_diagonals() {
        assert!(reassemble_error(r(0.0), r(1.5), r(2.0)).0 < 1e-15);
        assert!(reassemble_error(r(0.0), r(1.5), r(0.0)).0 < 1e-15);
    }

    #[test]
    fn random_coefficients_reassemble() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..200 {
            let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let (err, real) = reassemble_error(r(c[0]), r(c[1]), r(c[2]));
            assert!(err < 1e-12);
            assert_eq!(real, c[1] * c[1] - c[0] * c[2] >= 0.0);
        }
    }
}
