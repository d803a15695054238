//! Recovering weights from a tuple `(P_1, …, P_k, Q)` and the membership
//! verdicts built on top of that.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{
    factor_binary_form, factor_multilinear, factor_quadratic_explicit, FactorOptions, FailureReason,
};
use crate::field::{Complex, Field};
use crate::matrix::{lstsq, Matrix};
use crate::network::{
    deleted_products, forward_recursive, projective_mismatch, swap_matrix, Architecture, RationalTuple, Weights,
    WeightsJson,
};
use crate::polyalg::{HomPoly, LinearForm};

/// Which stage rejected the input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    None,
    DegreeTest,
    FactorTest,
    SpanTest,
    RepeatedFactors,
    VerificationFail,
    ResultantTest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVerdict {
    pub in_model: bool,
    pub stage_failed: Stage,
    pub weights: Option<Weights<Complex>>,
    /// Projective mismatch between the input and the image of `weights`, or
    /// the largest resultant for the multi-output screen.
    pub residual: f64,
    /// Passing only shows a necessary condition.
    pub necessary_only: bool,
    pub failure_reason: Option<FailureReason>,
}

impl MembershipVerdict {
    fn reject(stage: Stage, residual: f64) -> Self {
        MembershipVerdict {
            in_model: false,
            stage_failed: stage,
            weights: None,
            residual,
            necessary_only: false,
            failure_reason: None,
        }
    }

    fn accept(w: Weights<Complex>, residual: f64) -> Self {
        MembershipVerdict {
            in_model: true,
            stage_failed: Stage::None,
            weights: Some(w),
            residual,
            necessary_only: false,
            failure_reason: None,
        }
    }

    pub fn to_json(&self) -> VerdictJson {
        VerdictJson {
            in_model: self.in_model,
            stage_failed: self.stage_failed,
            weights: self.weights.as_ref().map(|w| w.to_json()),
            residual: self.residual,
            necessary_only: self.necessary_only,
            failure_reason: self.failure_reason,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub in_model: bool,
    pub stage_failed: Stage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightsJson>,
    pub residual: f64,
    pub necessary_only: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<FailureReason>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructOptions {
    /// Span residual and final projective mismatch threshold.
    pub tol: f64,
    pub factor: FactorOptions,
    /// Additionally require real factors.
    pub real_only: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        ReconstructOptions { tol: 1e-6, factor: FactorOptions::default(), real_only: false }
    }
}

fn complex_matrix(m: &Matrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
}

fn from_dmatrix(m: &DMatrix<Complex64>) -> Matrix<Complex64> {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Shallow `(n, m, k)`: factor `Q` into the rows of `W_1`, then solve
/// `P_i = Σ_j b_{ij} ℓ̂_j` for `W_2` by least squares.
pub fn reconstruct_shallow(
    ps: &[HomPoly<Complex>],
    q: &HomPoly<Complex>,
    arch: &Architecture,
    opts: &ReconstructOptions,
) -> MembershipVerdict {
    if !arch.is_shallow() {
        return MembershipVerdict::reject(Stage::DegreeTest, f64::INFINITY);
    }
    let (n, m, k) = (arch.dims()[0], arch.dims()[1], arch.dims()[2]);
    if q.nvars() != n
        || q.degree() != m
        || ps.len() != k
        || ps.iter().any(|p| p.nvars() != n || p.degree() != m - 1)
    {
        return MembershipVerdict::reject(Stage::DegreeTest, f64::INFINITY);
    }
    let report = factor_multilinear(q, &opts.factor);
    let Some(fz) = report.factorization.filter(|_| report.decomposable && (report.all_real || !opts.real_only))
    else {
        let mut v = MembershipVerdict::reject(Stage::FactorTest, f64::INFINITY);
        v.failure_reason = report.failure_reason;
        return v;
    };
    let f = Complex::default();
    // put the constant into the first form so ∏ℓ_j = Q exactly
    let mut rows: Vec<Vec<Complex64>> = fz.factors.iter().map(|l| l.coeffs.clone()).collect();
    for c in &mut rows[0] {
        *c *= fz.constant;
    }
    let forms: Vec<HomPoly<Complex>> = rows.iter().map(|r| HomPoly::linear(f, r)).collect();
    let (hats, _) = deleted_products(&forms).expect("nonempty");
    let basis: Vec<Vec<Complex64>> = hats.iter().map(|h| h.coeff_vector()).collect();
    let dim = basis[0].len();
    let a = DMatrix::from_fn(dim, m, |r, j| basis[j][r]);
    let rhs = DMatrix::from_fn(dim, k, |r, i| ps[i].coeff_vector()[r]);
    let Some(sol) = lstsq(&a, &rhs) else {
        return MembershipVerdict::reject(Stage::SpanTest, f64::INFINITY);
    };
    let scale = ps.iter().map(|p| p.max_abs()).fold(q.max_abs(), f64::max);
    let span_res = (&a * &sol - &rhs).iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
    if span_res > opts.tol {
        return MembershipVerdict::reject(Stage::SpanTest, span_res);
    }
    let w1 = Matrix::from_rows(&rows).expect("rectangular");
    let w2 = Matrix::from_fn(k, m, |i, j| sol[(j, i)]);
    let w = Weights::new(f, arch.clone(), vec![w1, w2]).expect("shapes from architecture");
    let target = RationalTuple { numerators: ps.to_vec(), denominator: q.clone() };
    finish(w, &target, opts.tol)
}

fn finish(w: Weights<Complex>, target: &RationalTuple<Complex>, tol: f64) -> MembershipVerdict {
    match forward_recursive(&w) {
        Ok(image) => {
            let res = projective_mismatch(&image, target);
            if res <= tol {
                MembershipVerdict::accept(w, res)
            } else {
                MembershipVerdict::reject(Stage::VerificationFail, res)
            }
        }
        Err(_) => MembershipVerdict::reject(Stage::VerificationFail, f64::INFINITY),
    }
}

/// Forms with `1 − alignment` below this are treated as proportional. A root
/// of multiplicity `r` is only resolved to about `ε^{1/r}`, so this is loose.
const PROPORTIONAL_TOL: f64 = 1e-6;

/// `|⟨u, v⟩| / (|u| |v|)`: 1 for proportional forms.
fn alignment(u: &[Complex64], v: &[Complex64]) -> f64 {
    let dot: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let nu = u.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    dot.norm() / (nu * nv)
}

/// The two factors furthest from proportional, or `None` if every pair is
/// (numerically) proportional.
fn pick_pair(factors: &[LinearForm<Complex64>]) -> Option<(usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..factors.len() {
        for j in i + 1..factors.len() {
            let a = alignment(&factors[i].coeffs, &factors[j].coeffs);
            if best.is_none_or(|(b, _, _)| a < b) {
                best = Some((a, i, j));
            }
        }
    }
    best.filter(|&(a, _, _)| a < 1.0 - PROPORTIONAL_TOL).map(|(_, i, j)| (i, j))
}

enum BinaryFail {
    Repeated,
    Verify,
    Factor,
}

/// Layer matrices `W_1..W_L` for a binary `(2, …, 2, 1)` network whose
/// image is `(P, Q)` up to scale.
fn binary_layers(
    p: &HomPoly<Complex>,
    q: &HomPoly<Complex>,
    l: usize,
    opts: &ReconstructOptions,
) -> std::result::Result<Vec<Matrix<Complex64>>, BinaryFail> {
    let f = Complex::default();
    let p12 = swap_matrix(&f);
    if l == 2 {
        let c11 = q.coeff_of(&[2, 0]);
        let c12 = q.coeff_of(&[1, 1]) / 2.0;
        let c22 = q.coeff_of(&[0, 2]);
        let (l1, l2, real) = factor_quadratic_explicit(c11, c12, c22, opts.factor.real_tol);
        if opts.real_only && !real {
            return Err(BinaryFail::Factor);
        }
        let w1 = DMatrix::from_fn(2, 2, |i, j| if i == 0 { l1.coeffs[j] } else { l2.coeffs[j] });
        let inv = w1.clone().try_inverse().ok_or(BinaryFail::Repeated)?;
        if alignment(&l1.coeffs, &l2.coeffs) > 1.0 - PROPORTIONAL_TOL {
            return Err(BinaryFail::Repeated);
        }
        let cp = DMatrix::from_fn(1, 2, |_, j| p.coeff_of(if j == 0 { &[1, 0] } else { &[0, 1] }));
        let w2 = cp * inv * complex_matrix(&p12);
        return Ok(vec![from_dmatrix(&w1), from_dmatrix(&w2)]);
    }
    // Even L: Q = ℓ1ℓ2·Q'(y) and P = P'(y); odd L: the roles swap. Here
    // y = P12 W1 x, so ℓ1 = y2 and ℓ2 = y1.
    let even = l % 2 == 0;
    let split = if even { q } else { p };
    let fz = factor_binary_form(split, opts.factor.root_tol).map_err(|_| BinaryFail::Factor)?;
    if opts.real_only && !fz.is_real(opts.factor.real_tol) {
        return Err(BinaryFail::Factor);
    }
    let (i, j) = pick_pair(&fz.factors).ok_or(BinaryFail::Repeated)?;
    let w1 = DMatrix::from_fn(2, 2, |r, c| if r == 0 { fz.factors[i].coeffs[c] } else { fz.factors[j].coeffs[c] });
    let inv = w1.clone().try_inverse().ok_or(BinaryFail::Repeated)?;
    // x = W1⁻¹ P12 y
    let sub = from_dmatrix(&(inv * complex_matrix(&p12)));
    let p_y = p.compose_linear(&sub).map_err(|_| BinaryFail::Verify)?;
    let q_y = q.compose_linear(&sub).map_err(|_| BinaryFail::Verify)?;
    let divide = |g: &HomPoly<Complex>| -> std::result::Result<HomPoly<Complex>, BinaryFail> {
        let tol = opts.tol.max(1e-9);
        g.exact_divide(&LinearForm::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]), tol)
            .and_then(|h| h.exact_divide(&LinearForm::new(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]), tol))
            .map_err(|_| BinaryFail::Verify)
    };
    let (p_next, q_next) = if even { (p_y, divide(&q_y)?) } else { (divide(&p_y)?, q_y) };
    let mut rest = binary_layers(&p_next, &q_next, l - 1, opts)?;
    let mut out = vec![from_dmatrix(&w1)];
    out.append(&mut rest);
    Ok(out)
}

/// Deep binary `(2, …, 2, 1)` with `L` layers, by induction on `L`.
pub fn reconstruct_binary(
    p: &HomPoly<Complex>,
    q: &HomPoly<Complex>,
    l: usize,
    opts: &ReconstructOptions,
) -> MembershipVerdict {
    if l < 2 {
        return MembershipVerdict::reject(Stage::DegreeTest, f64::INFINITY);
    }
    let mut dims = vec![2; l];
    dims.push(1);
    let arch = Architecture::new(dims).expect("binary architecture");
    let deg = arch.degrees();
    if p.nvars() != 2 || q.nvars() != 2 || p.degree() != deg.numerator || q.degree() != deg.denominator {
        return MembershipVerdict::reject(Stage::DegreeTest, f64::INFINITY);
    }
    match binary_layers(p, q, l, opts) {
        Ok(mats) => {
            let w = Weights::new(Complex::default(), arch, mats).expect("2x2 layers");
            let target = RationalTuple { numerators: vec![p.clone()], denominator: q.clone() };
            finish(w, &target, opts.tol)
        }
        Err(BinaryFail::Repeated) => MembershipVerdict::reject(Stage::RepeatedFactors, f64::INFINITY),
        Err(BinaryFail::Factor) => MembershipVerdict::reject(Stage::FactorTest, f64::INFINITY),
        Err(BinaryFail::Verify) => MembershipVerdict::reject(Stage::VerificationFail, f64::INFINITY),
    }
}

/// Resultant of two binary forms of degrees `a` and `b` through the
/// `(a+b) × (a+b)` Sylvester matrix.
pub fn binary_resultant(f: &HomPoly<Complex>, g: &HomPoly<Complex>) -> Result<Complex64> {
    if f.nvars() != 2 || g.nvars() != 2 {
        return Err(Error::NvarsMismatch(2, f.nvars().max(g.nvars())));
    }
    let coeffs = |h: &HomPoly<Complex>| -> Vec<Complex64> {
        let d = h.degree() as u32;
        (0..=d).map(|k| h.coeff_of(&[d - k, k])).collect()
    };
    let (cf, cg) = (coeffs(f), coeffs(g));
    let (a, b) = (f.degree(), g.degree());
    let size = a + b;
    if size == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut s = DMatrix::zeros(size, size);
    for r in 0..b {
        for (j, &c) in cf.iter().enumerate() {
            s[(r, r + j)] = c;
        }
    }
    for r in 0..a {
        for (j, &c) in cg.iter().enumerate() {
            s[(b + r, r + j)] = c;
        }
    }
    Ok(s.determinant())
}

/// Necessary condition for binary multi-output membership: for `l >= 3` the
/// numerators share all but one linear factor, so every pairwise resultant
/// vanishes. For `l == 2` only the degrees are checked.
/// Each form is scaled to unit `‖·‖∞` first.
pub fn membership_binary_multioutput(ps: &[HomPoly<Complex>], q: &HomPoly<Complex>, l: usize, tol: f64) -> MembershipVerdict {
    let mut dims = vec![2; l.max(1)];
    dims.push(ps.len().max(1));
    let deg = Architecture::new(dims).map(|a| a.degrees());
    let ok_degrees = deg.as_ref().is_ok_and(|d| {
        q.nvars() == 2 && q.degree() == d.denominator && ps.iter().all(|p| p.nvars() == 2 && p.degree() == d.numerator)
    });
    if l < 2 || ps.is_empty() || !ok_degrees {
        return MembershipVerdict::reject(Stage::DegreeTest, f64::INFINITY);
    }
    if l == 2 {
        // (2, 2, k) is filling: the degree test is the whole condition
        return MembershipVerdict {
            in_model: true,
            stage_failed: Stage::None,
            weights: None,
            residual: 0.0,
            necessary_only: true,
            failure_reason: None,
        };
    }
    let unit = |p: &HomPoly<Complex>| {
        let m = p.max_abs();
        if m == 0.0 {
            p.clone()
        } else {
            p.scale(Complex64::new(1.0 / m, 0.0))
        }
    };
    let normed: Vec<_> = ps.iter().map(unit).collect();
    let mut worst: f64 = 0.0;
    for i in 0..normed.len() {
        for j in i + 1..normed.len() {
            let r = binary_resultant(&normed[i], &normed[j]).map(|z| z.norm()).unwrap_or(f64::INFINITY);
            worst = worst.max(r);
        }
    }
    MembershipVerdict {
        in_model: worst <= tol,
        stage_failed: if worst <= tol { Stage::None } else { Stage::ResultantTest },
        weights: None,
        residual: worst,
        necessary_only: true,
        failure_reason: None,
    }
}

/// Runs the parameter map, reconstructs, and returns the projective
/// mismatch between the two images. Supports shallow and binary
/// single-output architectures.
pub fn round_trip_residual(w: &Weights<Complex>, opts: &ReconstructOptions) -> Result<f64> {
    let image = forward_recursive(w)?;
    let arch = w.arch();
    let verdict = if arch.is_shallow() {
        reconstruct_shallow(&image.numerators, &image.denominator, arch, opts)
    } else if arch.is_binary() && arch.output_dim() == 1 {
        reconstruct_binary(&image.numerators[0], &image.denominator, arch.layers(), opts)
    } else {
        return Err(Error::Unsupported(format!("reconstruction for {arch}")));
    };
    let Some(rec) = verdict.weights else {
        return Ok(f64::INFINITY);
    };
    Ok(projective_mismatch(&forward_recursive(&rec)?, &image))
}

/// Real weights viewed over the complex numbers.
pub fn complexify(w: &Weights<crate::field::Real>) -> Weights<Complex> {
    let f = Complex::default();
    w.map_field(f, |v| f.from_i64(0) + v)
}
