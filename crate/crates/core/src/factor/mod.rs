//! Factorization of homogeneous polynomials into linear forms.

mod binary_form;
mod hpoly;
mod multilinear;
mod quadratic;
mod roots;

pub use binary_form::factor_binary_form;
pub use hpoly::{build_h, z_slice};
pub use multilinear::factor_multilinear;
pub use quadratic::factor_quadratic_explicit;
pub use roots::roots_univariate;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::Complex;
use crate::polyalg::{HomPoly, LinearForm};

/// Knobs for the factorization routines.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorOptions {
    /// Relative reassembly tolerance.
    pub tol: f64,
    /// Relative residual bound for univariate roots.
    pub root_tol: f64,
    /// Roots closer than this (relative) are treated as one repeated root.
    pub collision_tol: f64,
    /// Imaginary parts below this count as real.
    pub real_tol: f64,
    /// Random changes of variables tried before giving up.
    pub max_retries: usize,
    pub seed: u64,
}

impl Default for FactorOptions {
    fn default() -> Self {
        FactorOptions { tol: 1e-8, root_tol: 1e-10, collision_tol: 1e-7, real_tol: 1e-7, max_retries: 5, seed: 0 }
    }
}

/// `constant · ∏ factors`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFactorization {
    pub constant: Complex64,
    pub factors: Vec<LinearForm<Complex64>>,
    /// `‖constant·∏factors − input‖∞ / ‖input‖∞`.
    pub residual: f64,
}

impl LinearFactorization {
    pub fn expand(&self, nvars: usize) -> HomPoly<Complex> {
        let f = Complex::default();
        let mut acc = HomPoly::constant(f, nvars, self.constant);
        for l in &self.factors {
            acc = acc.mul(&l.to_poly(&f)).expect("matching variable count");
        }
        acc
    }

    /// Whether every factor (first nonzero coefficient scaled to 1) and the
    /// constant are real up to `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.factors.iter().all(|l| l.coeffs.iter().all(|c| c.im.abs() <= tol * c.norm().max(1.0)))
            && self.constant.im.abs() <= tol * self.constant.norm().max(1.0)
    }
}

/// Why a factorization attempt failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    LeadingCoeffZeroUnfixable,
    RootFindFail,
    VerificationFail,
    SingularLinearSystem,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorReport {
    pub decomposable: bool,
    pub factorization: Option<LinearFactorization>,
    pub all_real: bool,
    pub failure_reason: Option<FailureReason>,
}

impl FactorReport {
    fn failed(reason: FailureReason) -> Self {
        FactorReport { decomposable: false, factorization: None, all_real: false, failure_reason: Some(reason) }
    }

    pub fn to_json(&self) -> FactorReportJson {
        let fz = self.factorization.as_ref();
        FactorReportJson {
            decomposable: self.decomposable,
            all_real: self.all_real,
            constant: fz.map(|f| [f.constant.re, f.constant.im]),
            factors: fz
                .map(|f| f.factors.iter().map(|l| l.coeffs.iter().map(|c| [c.re, c.im]).collect()).collect())
                .unwrap_or_default(),
            residual: fz.map(|f| f.residual),
            failure_reason: self.failure_reason,
        }
    }
}

/// Wire format; each coefficient is `[re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorReportJson {
    pub decomposable: bool,
    pub all_real: bool,
    pub constant: Option<[f64; 2]>,
    pub factors: Vec<Vec<[f64; 2]>>,
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<FailureReason>,
}

/// Scales `l` so its first non-negligible coefficient is 1; returns the
/// removed scale.
pub fn normalize_form(l: &LinearForm<Complex64>) -> (LinearForm<Complex64>, Complex64) {
    let max = l.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let lead = l.coeffs.iter().copied().find(|c| c.norm() > 1e-12 * max).unwrap_or(Complex64::new(1.0, 0.0));
    (LinearForm::new(l.coeffs.iter().map(|&c| c / lead).collect()), lead)
}

/// For a binary form `c_1 x_1 + c_2 x_2`, the `t` with `c_1 + c_2 t = 0`:
/// the affine zero of the factor on the chart `x_1 = 1`.
pub fn affine_zero(l: &LinearForm<Complex64>) -> Option<Complex64> {
    let (c1, c2) = (l.coeffs[0], l.coeffs[1]);
    (c2.norm() > 0.0).then(|| -c1 / c2)
}

/// Best single scalar `c` with `c·p ≈ q` (least squares over coefficients).
fn fit_constant(p: &HomPoly<Complex>, q: &HomPoly<Complex>) -> Complex64 {
    let (pv, qv) = (p.coeff_vector(), q.coeff_vector());
    let num: Complex64 = pv.iter().zip(&qv).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = pv.iter().map(|a| a.norm_sqr()).sum();
    if den == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        num / den
    }
}

/// Normalizes factors, fits the constant and measures the residual.
fn finish(q: &HomPoly<Complex>, factors: Vec<LinearForm<Complex64>>) -> LinearFactorization {
    let factors: Vec<_> = factors.iter().map(|l| normalize_form(l).0).collect();
    let mut fz = LinearFactorization { constant: Complex64::new(1.0, 0.0), factors, residual: 0.0 };
    let prod = fz.expand(q.nvars());
    fz.constant = fit_constant(&prod, q);
    let diff = prod.scale(fz.constant).sub(q).expect("same ring");
    let norm = q.max_abs();
    fz.residual = if norm == 0.0 { diff.max_abs() } else { diff.max_abs() / norm };
    fz
}
