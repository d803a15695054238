//! Aberth–Ehrlich simultaneous root iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_ITER: usize = 2000;

/// Horner evaluation of `p` and `p'`; coefficients highest degree first.
fn eval_with_derivative(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = c[0];
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in &c[1..] {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

/// All `m` roots (with multiplicity) of `c_0 y^m + … + c_m`, coefficients
/// highest degree first. Each root satisfies
/// `|p(r)| ≤ tol · Σ|c_i| · max(1, |r|)^m`.
pub fn roots_univariate(coeffs: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let Some(lead) = coeffs.first().copied().filter(|c| c.norm() > 0.0) else {
        return Err(Error::Unsupported("leading coefficient must be nonzero".into()));
    };
    // exact zero roots first
    let mut end = coeffs.len();
    while end > 1 && coeffs[end - 1] == Complex64::new(0.0, 0.0) {
        end -= 1;
    }
    let zeros = coeffs.len() - end;
    let c: Vec<Complex64> = coeffs[..end].iter().map(|&a| a / lead).collect();
    let m = c.len() - 1;
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    if m == 0 {
        return Ok(roots);
    }

    // Initial guesses on a circle whose radius is the geometric mean of the
    // root moduli, slightly rotated to avoid symmetric stalls.
    let radius = c[m].norm().powf(1.0 / m as f64).max(1e-3);
    let mut z: Vec<Complex64> = (0..m)
        .map(|k| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / m as f64 + 0.4))
        .collect();
    let mut done = vec![false; m];
    for _ in 0..MAX_ITER {
        let mut all_done = true;
        for k in 0..m {
            if done[k] {
                continue;
            }
            let (p, dp) = eval_with_derivative(&c, z[k]);
            if p.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..m).filter(|&j| j != k).map(|j| 1.0 / (z[k] - z[j])).sum();
            let step = ratio / (1.0 - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                // nudge off a degenerate configuration
                let bump = Complex64::new(1e-8, 1e-8) * (1.0 + z[k].norm());
                z[k] += bump;
                all_done = false;
                continue;
            }
            z[k] -= step;
            if step.norm() <= 1e-15 * (1.0 + z[k].norm()) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            break;
        }
    }

    let scale: f64 = c.iter().map(|a| a.norm()).sum();
    for r in &z {
        let (p, _) = eval_with_derivative(&c, *r);
        if !(p.norm() <= tol * scale * r.norm().max(1.0).powi(m as i32)) {
            return Err(Error::NonConvergence(MAX_ITER));
        }
    }
    roots.extend(z);
    Ok(roots)
}
