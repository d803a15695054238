//! Splitting a form of degree `m` into `m` linear factors through one
//! univariate root-finding problem plus one small linear system per
//! remaining variable.
//!
//! After moving a variable with a nonzero `x_s^m` term to the front and
//! scaling that term to 1, write `Q = ∏_k (x_1 + a_{k2} x_2 + … + a_{kn} x_n)`.
//! The coefficient of `x_1^{m−k} x_2^k` is `e_k(a_{·2})`, so the `a_{k2}` are
//! the roots of `Σ_k (−1)^k C_{(m−k,k,0,…)} y^{m−k}`. The coefficient of
//! `x_1^{m−1−j} x_2^j x_l` is `Σ_k a_{kl} e_j(â_k)` where `â_k` omits
//! `a_{k2}`, which is an `m × m` system for the `a_{kl}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finish, roots_univariate, FactorOptions, FactorReport, FailureReason, LinearFactorization};
use crate::field::Complex;
use crate::matrix::{lstsq, Matrix};
use crate::polyalg::{HomPoly, LinearForm};

/// Looser grouping used when the tight one does not verify: a root of
/// multiplicity `r` is only resolved to about `ε^{1/r}`.
const LOOSE_COLLISION: f64 = 1e-4;

pub fn factor_multilinear(q: &HomPoly<Complex>, opts: &FactorOptions) -> FactorReport {
    if q.is_zero() {
        return FactorReport::failed(FailureReason::LeadingCoeffZeroUnfixable);
    }
    let mut reasons = Vec::new();
    match attempt(q, opts) {
        Ok(fz) if fz.residual <= opts.tol => return success(fz, opts),
        Ok(_) => reasons.push(FailureReason::VerificationFail),
        Err(r) => reasons.push(r),
    }
    let n = q.nvars();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.max_retries {
        let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let Some(a_inv) = a.clone().try_inverse() else { continue };
        let sub = Matrix::from_fn(n, n, |i, j| a[(i, j)]);
        let Ok(moved) = q.compose_linear(&sub) else { continue };
        match attempt(&moved, opts) {
            Ok(fz) => {
                // ℓ'(x) factors Q(Ax), so ℓ'(A⁻¹y) factors Q(y)
                let back = fz
                    .factors
                    .iter()
                    .map(|l| LinearForm::new((0..n).map(|j| (0..n).map(|i| l.coeffs[i] * a_inv[(i, j)]).sum()).collect()))
                    .collect();
                let fz = finish(q, back);
                if fz.residual <= opts.tol {
                    return success(fz, opts);
                }
                reasons.push(FailureReason::VerificationFail);
            }
            Err(r) => reasons.push(r),
        }
    }
    let reason = reasons
        .iter()
        .rev()
        .copied()
        .find(|&r| r != FailureReason::LeadingCoeffZeroUnfixable)
        .unwrap_or(FailureReason::LeadingCoeffZeroUnfixable);
    FactorReport::failed(reason)
}

fn success(fz: LinearFactorization, opts: &FactorOptions) -> FactorReport {
    let all_real = fz.is_real(opts.real_tol);
    FactorReport { decomposable: true, factorization: Some(fz), all_real, failure_reason: None }
}

/// One pass of the method in the given coordinates. Returns the best
/// candidate (smallest residual) over the collision groupings tried.
fn attempt(q: &HomPoly<Complex>, opts: &FactorOptions) -> Result<LinearFactorization, FailureReason> {
    let n = q.nvars();
    let m = q.degree();
    let one = Complex64::new(1.0, 0.0);
    let max = q.max_abs();
    let power = |s: usize| {
        let mut e = vec![0u32; n];
        e[s] = m as u32;
        q.coeff_of(&e)
    };
    let s = (0..n).find(|&s| power(s).norm() > 1e-12 * max).ok_or(FailureReason::LeadingCoeffZeroUnfixable)?;
    if m == 0 {
        return Ok(finish(q, Vec::new()));
    }
    if n == 1 {
        return Ok(finish(q, vec![LinearForm::new(vec![one]); m]));
    }
    let perm: Vec<usize> = std::iter::once(s).chain((0..n).filter(|&i| i != s)).collect();
    let qp = q.permute_vars(&perm).expect("valid permutation").scale(1.0 / power(s));

    let mu = |k: usize| {
        let mut e = vec![0u32; n];
        e[0] = (m - k) as u32;
        e[1] = k as u32;
        qp.coeff_of(&e)
    };
    let g: Vec<Complex64> = (0..=m).map(|k| if k % 2 == 0 { mu(k) } else { -mu(k) }).collect();
    let roots = roots_univariate(&g, opts.root_tol).map_err(|_| FailureReason::RootFindFail)?;

    let mut best: Option<LinearFactorization> = None;
    let mut singular = false;
    for tol in [opts.collision_tol, LOOSE_COLLISION.max(opts.collision_tol)] {
        let groups = cluster(&roots, tol);
        singular |= groups.len() < m;
        let Some(cols) = solve_columns(&qp, &roots, &groups) else {
            singular = true;
            continue;
        };
        let factors = (0..m)
            .map(|k| {
                let mut c = vec![Complex64::new(0.0, 0.0); n];
                for (i, &pi) in perm.iter().enumerate() {
                    c[pi] = match i {
                        0 => one,
                        _ => cols[i - 1][k],
                    };
                }
                LinearForm::new(c)
            })
            .collect();
        let fz = finish(q, factors);
        if fz.residual <= opts.tol {
            return Ok(fz);
        }
        if best.as_ref().is_none_or(|b| fz.residual < b.residual) {
            best = Some(fz);
        }
        if groups.len() == m {
            // nothing collided, a looser grouping cannot help
            break;
        }
    }
    match best {
        Some(fz) => Ok(fz),
        None if singular => Err(FailureReason::SingularLinearSystem),
        None => Err(FailureReason::VerificationFail),
    }
}

/// Groups indices of roots within `tol` (relative) of each other.
fn cluster(roots: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    'outer: for (i, r) in roots.iter().enumerate() {
        for g in &mut groups {
            let c = roots[g[0]];
            if (c - r).norm() <= tol * c.norm().max(r.norm()).max(1.0) {
                g.push(i);
                continue 'outer;
            }
        }
        groups.push(vec![i]);
    }
    groups
}

/// Elementary symmetric polynomials `e_0..e_len` of `vals`.
fn elementary_symmetric(vals: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); vals.len() + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for (i, &v) in vals.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] = e[j] + e[j - 1] * v;
        }
    }
    e
}

/// Columns `a_{·2}, a_{·3}, …, a_{·n}` (indexed by factor). Members of a
/// group share one value per column, recovered from the group's summed
/// unknown.
fn solve_columns(qp: &HomPoly<Complex>, roots: &[Complex64], groups: &[Vec<usize>]) -> Option<Vec<Vec<Complex64>>> {
    let n = qp.nvars();
    let m = roots.len();
    // group means stand in for the repeated root
    let mut a2 = roots.to_vec();
    for g in groups {
        let mean = g.iter().map(|&i| roots[i]).sum::<Complex64>() / g.len() as f64;
        for &i in g {
            a2[i] = mean;
        }
    }
    let mut cols = vec![a2.clone()];
    if n == 2 {
        return Some(cols);
    }
    let v = DMatrix::from_fn(m, groups.len(), |j, gi| {
        let k = groups[gi][0];
        let others: Vec<Complex64> = (0..m).filter(|&s| s != k).map(|s| a2[s]).collect();
        elementary_symmetric(&others)[j]
    });
    let mut rhs = DMatrix::zeros(m, n - 2);
    for l in 2..n {
        for j in 0..m {
            let mut e = vec![0u32; n];
            e[0] = (m - 1 - j) as u32;
            e[1] = j as u32;
            e[l] = 1;
            rhs[(j, l - 2)] = qp.coeff_of(&e);
        }
    }
    let sol = lstsq(&v, &rhs)?;
    for l in 0..n - 2 {
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for (gi, g) in groups.iter().enumerate() {
            let share = sol[(gi, l)] / g.len() as f64;
            for &k in g {
                col[k] = share;
            }
        }
        cols.push(col);
    }
    Some(cols)
}
