//! Sparse homogeneous polynomials over a pluggable scalar field.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors under graded
//! lexicographic order, so iteration (and therefore serialization and
//! coefficient-vector extraction) is deterministic. The leading term is the
//! grlex-largest one, i.e. the highest power of `x1`.

mod json;

pub use json::{JsonScalar, PolyJson, TermJson};

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::Matrix;

/// Multi-index `u` of a monomial `x^u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentVector(Vec<u32>);

impl ExponentVector {
    pub fn new(exps: Vec<u32>) -> Self {
        ExponentVector(exps)
    }

    pub fn zeros(nvars: usize) -> Self {
        ExponentVector(vec![0; nvars])
    }

    /// `x_i` as an exponent vector.
    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        ExponentVector(e)
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` if some entry would go negative.
    pub fn checked_sub(&self, other: &ExponentVector) -> Option<ExponentVector> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a.checked_sub(b))
            .collect::<Option<Vec<_>>>()
            .map(ExponentVector)
    }

    /// ∏ u_i!
    pub fn factorial_product(&self) -> u64 {
        self.0.iter().map(|&e| (1..=e as u64).product::<u64>()).product()
    }
}

impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All exponent vectors of the given degree, grlex-descending (`x1^d` first).
pub fn monomials(nvars: usize, degree: usize) -> Vec<ExponentVector> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<ExponentVector>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left);
            out.push(ExponentVector(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(ExponentVector(Vec::new()));
        }
        return out;
    }
    rec(nvars, degree as u32, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// Number of monomials of degree `d` in `n` variables, `C(n+d-1, d)`.
pub fn monomial_count(n: usize, d: usize) -> usize {
    crate::binomial(n + d - 1, d)
}

/// A linear form `c_1 x_1 + … + c_n x_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm<E> {
    pub coeffs: Vec<E>,
}

impl<E: Copy> LinearForm<E> {
    pub fn new(coeffs: Vec<E>) -> Self {
        LinearForm { coeffs }
    }

    pub fn nvars(&self) -> usize {
        self.coeffs.len()
    }

    pub fn to_poly<F: Field<Elem = E>>(&self, field: &F) -> HomPoly<F> {
        let n = self.coeffs.len();
        let mut p = HomPoly::zero(field.clone(), n, 1);
        for (i, &c) in self.coeffs.iter().enumerate() {
            p.add_term(ExponentVector::unit(n, i), c);
        }
        p
    }

    pub fn evaluate<F: Field<Elem = E>>(&self, field: &F, x: &[E]) -> E {
        self.coeffs
            .iter()
            .zip(x)
            .fold(field.zero(), |acc, (&c, &v)| field.add(acc, field.mul(c, v)))
    }
}

/// Homogeneous polynomial with sparse terms.
#[derive(Clone, Debug, PartialEq)]
pub struct HomPoly<F: Field> {
    field: F,
    nvars: usize,
    degree: usize,
    terms: BTreeMap<ExponentVector, F::Elem>,
}

impl<F: Field> HomPoly<F> {
    pub fn zero(field: F, nvars: usize, degree: usize) -> Self {
        HomPoly { field, nvars, degree, terms: BTreeMap::new() }
    }

    /// The degree-0 polynomial `c`.
    pub fn constant(field: F, nvars: usize, c: F::Elem) -> Self {
        let mut p = Self::zero(field, nvars, 0);
        p.add_term(ExponentVector::zeros(nvars), c);
        p
    }

    pub fn one(field: F, nvars: usize) -> Self {
        let one = field.one();
        Self::constant(field, nvars, one)
    }

    /// `x_i`
    pub fn var(field: F, nvars: usize, i: usize) -> Self {
        let mut p = Self::zero(field.clone(), nvars, 1);
        p.add_term(ExponentVector::unit(nvars, i), field.one());
        p
    }

    pub fn linear(field: F, coeffs: &[F::Elem]) -> Self {
        LinearForm::new(coeffs.to_vec()).to_poly(&field)
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing
    /// duplicates. Every exponent must have length `nvars` and total `degree`.
    pub fn from_terms(
        field: F,
        nvars: usize,
        degree: usize,
        terms: impl IntoIterator<Item = (ExponentVector, F::Elem)>,
    ) -> Result<Self> {
        let mut p = Self::zero(field, nvars, degree);
        for (e, c) in terms {
            if e.nvars() != nvars || e.degree() != degree {
                return Err(Error::BadExponent(e.0, degree));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    pub(crate) fn add_term(&mut self, e: ExponentVector, c: F::Elem) {
        debug_assert_eq!(e.degree(), self.degree);
        let f = &self.field;
        match self.terms.get_mut(&e) {
            Some(v) => {
                *v = f.add(*v, c);
                if f.is_zero(*v) {
                    self.terms.remove(&e);
                }
            }
            None => {
                if !f.is_zero(c) {
                    self.terms.insert(e, c);
                }
            }
        }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending grlex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&ExponentVector, &F::Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &ExponentVector) -> F::Elem {
        self.terms.get(e).copied().unwrap_or_else(|| self.field.zero())
    }

    pub fn coeff_of(&self, exps: &[u32]) -> F::Elem {
        self.coeff(&ExponentVector(exps.to_vec()))
    }

    /// Leading (grlex-largest) term.
    pub fn leading(&self) -> Option<(&ExponentVector, &F::Elem)> {
        self.terms.iter().next_back()
    }

    /// Coefficients on the full monomial basis, grlex-descending.
    pub fn coeff_vector(&self) -> Vec<F::Elem> {
        monomials(self.nvars, self.degree).iter().map(|e| self.coeff(e)).collect()
    }

    pub fn from_coeff_vector(field: F, nvars: usize, degree: usize, coeffs: &[F::Elem]) -> Result<Self> {
        let basis = monomials(nvars, degree);
        if basis.len() != coeffs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for {} monomials",
                coeffs.len(),
                basis.len()
            )));
        }
        Self::from_terms(field, nvars, degree, basis.into_iter().zip(coeffs.iter().copied()))
    }

    /// Largest coefficient magnitude (`‖p‖∞`).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|&c| self.field.magnitude(c)).fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::NvarsMismatch(self.nvars, other.nvars));
        }
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    /// Drops float terms below `cleanup · ‖p‖∞`. No-op over exact fields.
    fn cleaned(mut self) -> Self {
        let rel = self.field.cleanup();
        if self.field.is_exact() || rel <= 0.0 {
            return self;
        }
        let cut = rel * self.max_abs();
        let f = self.field.clone();
        self.terms.retain(|_, c| f.magnitude(*c) >= cut);
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        Ok(out.cleaned())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(|f, c| f.neg(c))
    }

    pub fn scale(&self, s: F::Elem) -> Self {
        self.map_coeffs(|f, c| f.mul(c, s))
    }

    fn map_coeffs(&self, g: impl Fn(&F, F::Elem) -> F::Elem) -> Self {
        let f = &self.field;
        let terms = self
            .terms
            .iter()
            .filter_map(|(e, &c)| {
                let v = g(f, c);
                (!f.is_zero(v)).then(|| (e.clone(), v))
            })
            .collect();
        HomPoly { field: self.field.clone(), nvars: self.nvars, degree: self.degree, terms }
    }

    /// Product; degrees add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let f = &self.field;
        let mut out = Self::zero(f.clone(), self.nvars, self.degree + other.degree);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                out.add_term(ea.add(eb), f.mul(ca, cb));
            }
        }
        Ok(out.cleaned())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.field.clone(), self.nvars);
        for _ in 0..e {
            acc = acc.mul(self).expect("same ring");
        }
        acc
    }

    /// Product of a non-empty or empty list (empty product is 1).
    pub fn product<'a>(field: &F, nvars: usize, factors: impl IntoIterator<Item = &'a Self>) -> Result<Self>
    where
        F: 'a,
    {
        let mut acc = Self::one(field.clone(), nvars);
        for p in factors {
            acc = acc.mul(p)?;
        }
        Ok(acc)
    }

    /// `Σ coeff · x^u` at a point.
    pub fn evaluate(&self, x: &[F::Elem]) -> Result<F::Elem> {
        if x.len() != self.nvars {
            return Err(Error::NvarsMismatch(self.nvars, x.len()));
        }
        let f = &self.field;
        Ok(self.terms.iter().fold(f.zero(), |acc, (e, &c)| {
            let mono = e.0.iter().zip(x).fold(f.one(), |m, (&k, &v)| f.mul(m, f.pow(v, k)));
            f.add(acc, f.mul(c, mono))
        }))
    }

    /// `p(A·x)`: substitutes `x_i ↦ Σ_j A_ij x_j`. `A` has one row per
    /// variable of `p`; the result lives in `A.cols()` variables.
    pub fn compose_linear(&self, a: &Matrix<F::Elem>) -> Result<Self> {
        if a.rows() != self.nvars {
            return Err(Error::ShapeMismatch(format!(
                "substitution matrix has {} rows, polynomial has {} variables",
                a.rows(),
                self.nvars
            )));
        }
        let f = &self.field;
        let nout = a.cols();
        let forms: Vec<Self> = (0..a.rows()).map(|i| Self::linear(f.clone(), a.row(i))).collect();
        // powers[i][k] = forms[i]^k
        let mut powers: Vec<Vec<Self>> = forms.iter().map(|l| vec![Self::one(f.clone(), nout), l.clone()]).collect();
        let mut out = Self::zero(f.clone(), nout, self.degree);
        for (e, &c) in &self.terms {
            let mut term = Self::constant(f.clone(), nout, c);
            for (i, &k) in e.0.iter().enumerate() {
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&forms[i])?;
                    powers[i].push(next);
                }
                if k > 0 {
                    term = term.mul(&powers[i][k as usize])?;
                }
            }
            for (te, &tc) in &term.terms {
                out.add_term(te.clone(), tc);
            }
        }
        Ok(out.cleaned())
    }

    /// Divides by a linear form. Succeeds when the remainder is at most
    /// `tol · ‖p‖∞` (exactly zero over exact fields).
    pub fn exact_divide(&self, l: &LinearForm<F::Elem>, tol: f64) -> Result<Self> {
        if l.nvars() != self.nvars {
            return Err(Error::NvarsMismatch(self.nvars, l.nvars()));
        }
        let f = &self.field;
        let pivot = (0..self.nvars)
            .filter(|&i| !f.is_zero(l.coeffs[i]))
            .max_by(|&i, &j| f.magnitude(l.coeffs[i]).total_cmp(&f.magnitude(l.coeffs[j])));
        let Some(k) = pivot else {
            return Err(Error::NotDivisible(f64::INFINITY));
        };
        if self.degree == 0 {
            return if self.is_zero() {
                Ok(Self::zero(f.clone(), self.nvars, 0))
            } else {
                Err(Error::NotDivisible(self.max_abs()))
            };
        }
        let lead_inv = f.inv(l.coeffs[k]).expect("nonzero pivot");
        let unit_k = ExponentVector::unit(self.nvars, k);
        let mut rem = self.terms.clone();
        let mut quot = Self::zero(f.clone(), self.nvars, self.degree - 1);
        // Eliminate x_k from the highest power downwards.
        loop {
            let next = rem
                .iter()
                .filter(|(e, _)| e.get(k) > 0)
                .max_by(|(a, _), (b, _)| a.get(k).cmp(&b.get(k)).then_with(|| a.cmp(b)))
                .map(|(e, &c)| (e.clone(), c));
            let Some((e, c)) = next else { break };
            let qe = e.checked_sub(&unit_k).expect("x_k present");
            let qc = f.mul(c, lead_inv);
            quot.add_term(qe.clone(), qc);
            for (i, &li) in l.coeffs.iter().enumerate() {
                if f.is_zero(li) {
                    continue;
                }
                let te = qe.add(&ExponentVector::unit(self.nvars, i));
                let sub = f.mul(qc, li);
                let entry = rem.entry(te.clone()).or_insert_with(|| f.zero());
                *entry = f.sub(*entry, sub);
                if f.is_zero(*entry) || i == k {
                    rem.remove(&te);
                }
            }
        }
        let rem_norm = rem.values().map(|&c| f.magnitude(c)).fold(0.0, f64::max);
        let allowed = if f.is_exact() { 0.0 } else { tol * self.max_abs() };
        if rem_norm > allowed {
            return Err(Error::NotDivisible(rem_norm));
        }
        Ok(quot.cleaned())
    }

    /// Whether `l` divides `p` (remainder within `tol`).
    pub fn divides(l: &LinearForm<F::Elem>, p: &Self, tol: f64) -> bool {
        p.exact_divide(l, tol).is_ok()
    }

    /// Re-expresses coefficients in another field.
    pub fn map_field<G: Field>(&self, target: G, conv: impl Fn(F::Elem) -> G::Elem) -> HomPoly<G> {
        let mut out = HomPoly::zero(target, self.nvars, self.degree);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), conv(c));
        }
        out
    }

    /// Appends `extra` variables (all with exponent 0).
    pub fn extend_vars(&self, extra: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| {
                let mut v = e.0.clone();
                v.extend(std::iter::repeat(0).take(extra));
                (ExponentVector(v), c)
            })
            .collect();
        HomPoly { field: self.field.clone(), nvars: self.nvars + extra, degree: self.degree, terms }
    }

    /// Reorders variables: variable `i` of the result is variable `perm[i]` of `self`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.nvars {
            return Err(Error::NvarsMismatch(self.nvars, perm.len()));
        }
        let terms = self
            .terms
            .iter()
            .map(|(e, &c)| (ExponentVector(perm.iter().map(|&j| e.0[j]).collect()), c))
            .collect();
        Ok(HomPoly { field: self.field.clone(), nvars: self.nvars, degree: self.degree, terms })
    }
}

/// Contraction `Sym(e_{j_1} ⊗ … ⊗ e_{j_r}) ∘ y^{⊗r}` of a symmetrized
/// basis tensor with a vector of linear forms `y`. Because the tensor is
/// symmetric and the argument is a pure power, the contraction collapses to
/// the product `∏ y_{j_s}`.
pub fn sym_contract<F: Field>(indices: &[usize], y: &[HomPoly<F>]) -> Result<HomPoly<F>> {
    let first = y.first().ok_or(Error::IndexOutOfRange(0, 0))?;
    let (field, nvars) = (first.field().clone(), first.nvars());
    let mut acc = HomPoly::one(field, nvars);
    for &j in indices {
        let yj = y.get(j).ok_or(Error::IndexOutOfRange(j, y.len()))?;
        acc = acc.mul(yj)?;
    }
    Ok(acc)
}
