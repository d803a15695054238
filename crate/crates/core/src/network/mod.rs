//! Architectures, weights and the parameter map `w ↦ (P_1, …, P_{d_L}, Q)`.

mod binary;
mod json;

pub use binary::{binary_matrices, forward_binary, swap_matrix};
pub use json::{ScalarJson, TupleJson, WeightsJson};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::binomial;
use crate::error::{Error, Result};
use crate::field::{Field, NumericField, RandomScalar};
use crate::matrix::Matrix;
use crate::polyalg::{monomials, ExponentVector, HomPoly};

/// Layer widths `(d_0, …, d_L)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Architecture {
    dims: Vec<usize>,
}

impl Architecture {
    /// Requires `L ≥ 1`, `d_i ≥ 2` for `i < L` and `d_L ≥ 1`.
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::InvalidArchitecture(dims, "need at least one layer".into()));
        }
        let l = dims.len() - 1;
        if dims[..l].iter().any(|&d| d < 2) {
            return Err(Error::InvalidArchitecture(dims, "input and hidden widths must be at least 2".into()));
        }
        if dims[l] == 0 {
            return Err(Error::InvalidArchitecture(dims, "output width must be positive".into()));
        }
        Ok(Architecture { dims })
    }

    /// Like [`Architecture::new`] but admits widths of 1, for inspecting
    /// degenerate cases such as `(1, m, k)`.
    pub fn new_diagnostic(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidArchitecture(dims, "widths must be positive, L ≥ 1".into()));
        }
        Ok(Architecture { dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of layers `L`.
    pub fn layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// `d_0 = … = d_{L-1} = 2`.
    pub fn is_binary(&self) -> bool {
        self.dims[..self.layers()].iter().all(|&d| d == 2)
    }

    pub fn is_shallow(&self) -> bool {
        self.layers() == 2
    }

    /// `N = Σ d_i d_{i+1}`.
    pub fn param_count(&self) -> usize {
        self.dims.windows(2).map(|w| w[0] * w[1]).sum()
    }

    /// `Σ_{i=1}^{L-1} d_i`, the dimension of the rescaling symmetries.
    pub fn hidden_width_sum(&self) -> usize {
        self.dims[1..self.layers()].iter().sum()
    }

    pub fn degrees(&self) -> DegreeProfile {
        degrees(self)
    }

    /// Dimension of `(S^n)^{d_L} × S^m` over `d_0` variables.
    pub fn ambient_dim(&self) -> usize {
        let DegreeProfile { numerator: n, denominator: m, .. } = self.degrees();
        let d0 = self.input_dim();
        self.output_dim() * binomial(d0 + n - 1, n) + binomial(d0 + m - 1, m)
    }

    /// `(rows, cols)` of `W_1, …, W_L`.
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.dims.windows(2).map(|w| (w[1], w[0])).collect()
    }
}

impl serde::Serialize for Architecture {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&self.dims, s)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl FromStr for Architecture {
    type Err = Error;

    /// Accepts `3,3,3,3` or `[3,3,3,3]`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        let dims = inner
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidArchitecture(Vec::new(), format!("{s:?}: {e}")))?;
        Architecture::new(dims)
    }
}

/// Degrees `n(d)` of the numerators and `m(d)` of the denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeProfile {
    pub numerator: usize,
    pub denominator: usize,
    /// `L mod 2`.
    pub parity: usize,
}

/// Degrees of `p^(k)` and `q^(k)` for `k = 0..=L`, from the layer recursion.
/// Index 0 of the `p` list is unused and set to 0.
pub fn layer_degrees(arch: &Architecture) -> (Vec<usize>, Vec<usize>) {
    let d = arch.dims();
    let l = arch.layers();
    let mut p = vec![0; l + 1];
    let mut q = vec![0; l + 1];
    p[1] = 1;
    for k in 1..l {
        p[k + 1] = (d[k] - 1) * p[k];
        q[k + 1] = d[k] * p[k];
    }
    (p, q)
}

/// Indices of the `q^(j)` multiplying the numerators and the denominator.
fn assembly_indices(l: usize) -> (Vec<usize>, Vec<usize>) {
    let num = (0..l).rev().step_by(2).collect();
    let den = (0..=l).rev().step_by(2).collect();
    (num, den)
}

pub fn degrees(arch: &Architecture) -> DegreeProfile {
    let l = arch.layers();
    let (p, q) = layer_degrees(arch);
    let (num, den) = assembly_indices(l);
    DegreeProfile {
        numerator: p[l] + num.iter().map(|&j| q[j]).sum::<usize>(),
        denominator: den.iter().map(|&j| q[j]).sum(),
        parity: l % 2,
    }
}

/// The explicit sum-of-products degree formulas. Summands that refer to a
/// width `d_i` with `i ≤ 0` come from `q^(0) = q^(1) = 1` and are dropped.
pub fn degrees_closed_form(arch: &Architecture) -> DegreeProfile {
    let d = arch.dims();
    let l = arch.layers() as isize;
    let width = |i: isize| if i >= 1 { d[i as usize] } else { 0 };
    let prod = |hi: isize| (1..=hi).map(|j| d[j as usize] - 1).product::<usize>();
    let numerator = prod(l - 1) + (1..=l / 2 + 1).map(|k| width(l - 2 * k) * prod(l - 2 * k - 1)).sum::<usize>();
    let denominator = (1..=l / 2 + 1).map(|k| width(l - 2 * k + 1) * prod(l - 2 * k)).sum();
    DegreeProfile { numerator, denominator, parity: (l % 2) as usize }
}

/// Weight matrices `W_1, …, W_L`; `mats[k]` has shape `d_{k+1} × d_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Weights<F: Field> {
    field: F,
    arch: Architecture,
    mats: Vec<Matrix<F::Elem>>,
}

impl<F: Field> Weights<F> {
    pub fn new(field: F, arch: Architecture, mats: Vec<Matrix<F::Elem>>) -> Result<Self> {
        let shapes = arch.shapes();
        if mats.len() != shapes.len() {
            return Err(Error::ShapeMismatch(format!("{} matrices for {} layers", mats.len(), shapes.len())));
        }
        for (k, (m, &(r, c))) in mats.iter().zip(&shapes).enumerate() {
            if m.rows() != r || m.cols() != c {
                return Err(Error::ShapeMismatch(format!(
                    "W_{} is {}x{}, expected {r}x{c}",
                    k + 1,
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Weights { field, arch, mats })
    }

    pub fn random<R: Rng + ?Sized>(field: F, arch: &Architecture, rng: &mut R) -> Self
    where
        F: RandomScalar,
    {
        let mats = arch.shapes().iter().map(|&(r, c)| Matrix::from_fn(r, c, |_, _| field.sample(rng))).collect();
        Weights { field, arch: arch.clone(), mats }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn mats(&self) -> &[Matrix<F::Elem>] {
        &self.mats
    }

    /// `W_k` for `k = 1..=L`.
    pub fn layer(&self, k: usize) -> &Matrix<F::Elem> {
        &self.mats[k - 1]
    }

    /// All entries, layer by layer, row-major.
    pub fn params(&self) -> Vec<F::Elem> {
        self.mats.iter().flat_map(|m| m.data().iter().copied()).collect()
    }

    pub fn with_params(&self, params: &[F::Elem]) -> Result<Self> {
        if params.len() != self.arch.param_count() {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters for {}",
                params.len(),
                self.arch.param_count()
            )));
        }
        let mut out = self.clone();
        let mut it = params.iter().copied();
        for m in &mut out.mats {
            for v in m.data_mut() {
                *v = it.next().unwrap();
            }
        }
        Ok(out)
    }

    pub fn map_field<G: Field>(&self, target: G, conv: impl Fn(F::Elem) -> G::Elem) -> Weights<G> {
        Weights { field: target, arch: self.arch.clone(), mats: self.mats.iter().map(|m| m.map(&conv)).collect() }
    }
}

/// The tuple `(P_1, …, P_{d_L}, Q)` without any cancellation.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalTuple<F: Field> {
    pub numerators: Vec<HomPoly<F>>,
    pub denominator: HomPoly<F>,
}

impl<F: Field> RationalTuple<F> {
    pub fn nvars(&self) -> usize {
        self.denominator.nvars()
    }

    /// `P_i(x) / Q(x)`.
    pub fn evaluate(&self, x: &[F::Elem]) -> Result<Vec<F::Elem>> {
        let f = self.denominator.field().clone();
        let q = self.denominator.evaluate(x)?;
        let qi = f.inv(q).ok_or(Error::DomainError(0.0, 0))?;
        self.numerators.iter().map(|p| Ok(f.mul(p.evaluate(x)?, qi))).collect()
    }

    /// Numerator coefficient vectors followed by the denominator's, each on
    /// the full grlex basis.
    pub fn coeff_vector(&self) -> Vec<F::Elem> {
        let mut v: Vec<F::Elem> = self.numerators.iter().flat_map(|p| p.coeff_vector()).collect();
        v.extend(self.denominator.coeff_vector());
        v
    }

    pub fn map_field<G: Field>(&self, target: G, conv: impl Fn(F::Elem) -> G::Elem + Copy) -> RationalTuple<G> {
        RationalTuple {
            numerators: self.numerators.iter().map(|p| p.map_field(target.clone(), conv)).collect(),
            denominator: self.denominator.map_field(target.clone(), conv),
        }
    }

    pub fn scale(&self, s: F::Elem) -> Self {
        RationalTuple {
            numerators: self.numerators.iter().map(|p| p.scale(s)).collect(),
            denominator: self.denominator.scale(s),
        }
    }

    /// Variables `x_i` dividing every numerator and the denominator, i.e. a
    /// shared monomial factor the parameter map did not cancel.
    pub fn common_variable_factors(&self) -> Vec<usize> {
        (0..self.nvars())
            .filter(|&i| {
                std::iter::once(&self.denominator)
                    .chain(&self.numerators)
                    .all(|p| !p.is_zero() && p.terms().all(|(e, _)| e.get(i) > 0))
            })
            .collect()
    }
}

impl<F: NumericField> RationalTuple<F> {
    /// Monomial of `Q` used to fix the projective scale: `x_1^m` when its
    /// coefficient is not negligible, else the largest-magnitude term.
    pub fn normalization_monomial(&self) -> Option<ExponentVector> {
        let q = &self.denominator;
        let f = q.field();
        let top = monomials(q.nvars(), q.degree()).into_iter().next()?;
        let max = q.max_abs();
        if max == 0.0 {
            return None;
        }
        if f.magnitude(q.coeff(&top)) > 1e-12 * max {
            return Some(top);
        }
        q.terms()
            .max_by(|a, b| f.magnitude(*a.1).total_cmp(&f.magnitude(*b.1)))
            .map(|(e, _)| e.clone())
    }

    pub fn normalized_at(&self, e: &ExponentVector) -> Option<Self> {
        let f = self.denominator.field();
        let c = self.denominator.coeff(e);
        f.inv(c).filter(|_| !f.is_zero(c)).map(|s| self.scale(s))
    }

    /// Scales so the normalization coefficient of `Q` is 1.
    pub fn normalized(&self) -> Option<Self> {
        self.normalized_at(&self.normalization_monomial()?)
    }
}

/// Relative distance `‖a − b‖∞ / ‖b‖∞` after scaling both tuples so that
/// `Q` has coefficient 1 at `b`'s normalization monomial. Infinite when the
/// shapes differ or either tuple cannot be normalized.
pub fn projective_mismatch<F: NumericField>(a: &RationalTuple<F>, b: &RationalTuple<F>) -> f64 {
    if a.numerators.len() != b.numerators.len()
        || a.nvars() != b.nvars()
        || a.denominator.degree() != b.denominator.degree()
        || a.numerators.iter().zip(&b.numerators).any(|(p, q)| p.degree() != q.degree())
    {
        return f64::INFINITY;
    }
    let Some(e) = b.normalization_monomial() else { return f64::INFINITY };
    let (Some(an), Some(bn)) = (a.normalized_at(&e), b.normalized_at(&e)) else {
        return f64::INFINITY;
    };
    let f = b.denominator.field();
    let va = an.coeff_vector();
    let vb = bn.coeff_vector();
    let scale = vb.iter().map(|&c| f.magnitude(c)).fold(0.0, f64::max);
    let diff = va.iter().zip(&vb).map(|(&x, &y)| f.magnitude(f.sub(x, y))).fold(0.0, f64::max);
    diff / scale
}

/// For polynomials `g_1, …, g_r` returns `(ĝ_1, …, ĝ_r)` with
/// `ĝ_j = ∏_{s≠j} g_s`, and the full product.
pub fn deleted_products<F: Field>(gs: &[HomPoly<F>]) -> Result<(Vec<HomPoly<F>>, HomPoly<F>)> {
    let first = gs.first().ok_or_else(|| Error::ShapeMismatch("empty product list".into()))?;
    let (f, n) = (first.field().clone(), first.nvars());
    let mut prefix = vec![HomPoly::one(f.clone(), n)];
    for g in gs {
        let next = prefix.last().unwrap().mul(g)?;
        prefix.push(next);
    }
    let mut suffix = HomPoly::one(f, n);
    let mut hats = vec![None; gs.len()];
    for j in (0..gs.len()).rev() {
        hats[j] = Some(prefix[j].mul(&suffix)?);
        suffix = suffix.mul(&gs[j])?;
    }
    Ok((hats.into_iter().map(Option::unwrap).collect(), prefix.pop().unwrap()))
}

/// Multiplies the last-layer numerators and the `q^(j)` into `(P, Q)`.
fn assemble<F: Field>(p_last: Vec<HomPoly<F>>, q: &[HomPoly<F>]) -> Result<RationalTuple<F>> {
    let l = q.len() - 1;
    let (num, den) = assembly_indices(l);
    let f = q[0].field().clone();
    let n = q[0].nvars();
    let num_factor = HomPoly::product(&f, n, num.iter().map(|&j| &q[j]))?;
    let denominator = HomPoly::product(&f, n, den.iter().map(|&j| &q[j]))?;
    let numerators = p_last.iter().map(|p| p.mul(&num_factor)).collect::<Result<_>>()?;
    Ok(RationalTuple { numerators, denominator })
}

/// The parameter map via the layer recursion
/// `p^(k+1)_i = Σ_j w_{k+1,i,j} ∏_{s≠j} p^(k)_s`, `q^(k+1) = ∏_j p^(k)_j`.
pub fn forward_recursive<F: Field>(w: &Weights<F>) -> Result<RationalTuple<F>> {
    let f = w.field().clone();
    let arch = w.arch();
    let n = arch.input_dim();
    let l = arch.layers();
    let mut p: Vec<HomPoly<F>> = (0..arch.dims()[1]).map(|i| HomPoly::linear(f.clone(), w.layer(1).row(i))).collect();
    let mut q = vec![HomPoly::one(f.clone(), n), HomPoly::one(f.clone(), n)];
    for k in 1..l {
        let (hats, full) = deleted_products(&p)?;
        let wk = w.layer(k + 1);
        let deg = hats[0].degree();
        let next = (0..wk.rows())
            .map(|i| {
                let mut acc = HomPoly::zero(f.clone(), n, deg);
                for (j, hat) in hats.iter().enumerate() {
                    acc = acc.add(&hat.scale(wk.get(i, j)))?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>>>()?;
        q.push(full);
        p = next;
    }
    assemble(p, &q)
}

/// Smallest activation magnitude treated as a pole.
pub const POLE_THRESHOLD: f64 = 1e-12;

/// Numeric network evaluation `W_L ∘ σ ∘ … ∘ σ ∘ W_1 (x)` with `σ(t) = 1/t`.
pub fn eval_network<F: Field>(w: &Weights<F>, x: &[F::Elem]) -> Result<Vec<F::Elem>> {
    let f = w.field();
    let mut v = w.layer(1).matvec(f, x)?;
    for k in 2..=w.arch().layers() {
        let act = v
            .iter()
            .map(|&t| {
                let mag = f.magnitude(t);
                if f.is_zero(t) || (!f.is_exact() && mag < POLE_THRESHOLD) {
                    return Err(Error::DomainError(mag, k - 1));
                }
                Ok(f.inv(t).expect("nonzero"))
            })
            .collect::<Result<Vec<_>>>()?;
        v = w.layer(k).matvec(f, &act)?;
    }
    Ok(v)
}

/// Permutation matrix with `(P v)_i = v_{perm[i]}`.
fn perm_matrix<F: Field>(f: &F, perm: &[usize]) -> Result<Matrix<F::Elem>> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::BadPermutation(perm.to_vec()));
        }
    }
    Ok(Matrix::from_fn(n, n, |i, j| if perm[i] == j { f.one() } else { f.zero() }))
}

/// `W_1 ← P_1 D_1 W_1`, `W_k ← P_k D_k W_k D_{k-1} P_{k-1}ᵀ`,
/// `W_L ← W_L D_{L-1} P_{L-1}ᵀ`, with `perms[i]`, `diags[i]` acting on
/// hidden layer `i + 1`.
pub fn apply_symmetry<F: Field>(w: &Weights<F>, perms: &[Vec<usize>], diags: &[Vec<F::Elem>]) -> Result<Weights<F>> {
    let f = w.field();
    let arch = w.arch();
    let hidden = arch.layers() - 1;
    if perms.len() != hidden || diags.len() != hidden {
        return Err(Error::ShapeMismatch(format!("expected {hidden} permutations and diagonals")));
    }
    let mut left = Vec::with_capacity(hidden);
    for (i, (perm, diag)) in perms.iter().zip(diags).enumerate() {
        let width = arch.dims()[i + 1];
        if perm.len() != width || diag.len() != width {
            return Err(Error::ShapeMismatch(format!("hidden layer {} has width {width}", i + 1)));
        }
        if let Some(j) = diag.iter().position(|&d| f.is_zero(d)) {
            return Err(Error::ZeroDiagonal(i + 1, j));
        }
        let d = Matrix::from_fn(width, width, |r, c| if r == c { diag[r] } else { f.zero() });
        left.push(perm_matrix(f, perm)?.matmul(f, &d)?);
    }
    let mut mats = Vec::with_capacity(arch.layers());
    for k in 0..arch.layers() {
        let mut m = w.mats()[k].clone();
        if k < hidden {
            m = left[k].matmul(f, &m)?;
        }
        if k > 0 {
            // D_{k-1} P_{k-1}ᵀ = (P_{k-1} D_{k-1})ᵀ
            m = m.matmul(f, &left[k - 1].transpose())?;
        }
        mats.push(m);
    }
    Weights::new(f.clone(), arch.clone(), mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Complex, PrimeField, Real};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arch(d: &[usize]) -> Architecture {
        Architecture::new(d.to_vec()).unwrap()
    }

    #[test]
    fn architecture_validation() {
        assert!(Architecture::new(vec![3]).is_err());
        assert!(Architecture::new(vec![2, 1, 1]).is_err());
        assert!(Architecture::new(vec![1, 2, 1]).is_err());
        assert!(Architecture::new_diagnostic(vec![1, 2, 1]).is_ok());
        assert_eq!("[2,3,4,3]".parse::<Architecture>().unwrap(), arch(&[2, 3, 4, 3]));
        assert_eq!(arch(&[2, 3, 4, 3]).to_string(), "[2,3,4,3]");
    }

    #[test]
    fn degree_examples() {
        let d = degrees(&arch(&[2, 2, 1]));
        assert_eq!((d.numerator, d.denominator), (1, 2));
        let d = degrees(&arch(&[2, 2, 2, 1]));
        assert_eq!((d.numerator, d.denominator, d.parity), (3, 2, 1));
    }

    #[test]
    fn table_counts() {
        for (d, n, m) in [
            (vec![3, 3, 3, 3], 27, 136),
            (vec![2, 3, 4, 3], 30, 39),
            (vec![4, 3, 2, 2, 3], 28, 372),
            (vec![2, 2, 2, 3, 2, 1], 22, 15),
            (vec![2, 2, 4, 2, 2, 1], 26, 23),
        ] {
            let a = arch(&d);
            assert_eq!(a.param_count(), n, "{d:?}");
            assert_eq!(a.ambient_dim(), m, "{d:?}");
        }
    }

    #[test]
    fn closed_form_degrees_agree_with_recursion() {
        fn sweep(prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if prefix.len() >= 2 {
                for last in 1..=4 {
                    let mut d = prefix.clone();
                    d.push(last);
                    out.push(d);
                }
            }
            if prefix.len() == 5 {
                return;
            }
            for w in 2..=4 {
                prefix.push(w);
                sweep(prefix, out);
                prefix.pop();
            }
        }
        let mut all = Vec::new();
        sweep(&mut Vec::new(), &mut all);
        for d in all {
            let a = arch(&d);
            assert_eq!(degrees(&a), degrees_closed_form(&a), "{d:?}");
        }
    }

    #[test]
    fn lemma_degrees_of_intermediates() {
        let a = arch(&[3, 4, 3, 2, 2]);
        let (p, q) = layer_degrees(&a);
        let d = a.dims();
        for k in 1..=a.layers() {
            let pk: usize = (1..k).map(|j| d[j] - 1).product();
            assert_eq!(p[k], pk);
            if k >= 2 {
                let qk = d[k - 1] * (1..k - 1).map(|j| d[j] - 1).product::<usize>();
                assert_eq!(q[k], qk);
            }
        }
    }

    #[test]
    fn example_two_two_one_symbolic_shape() {
        let f = Real::default();
        let (a11, a12, a21, a22, b1, b2) = (0.3, -0.7, 1.1, 0.4, 0.9, -1.3);
        let w = Weights::new(
            f,
            arch(&[2, 2, 1]),
            vec![
                Matrix::from_rows(&[vec![a11, a12], vec![a21, a22]]).unwrap(),
                Matrix::from_rows(&[vec![b1, b2]]).unwrap(),
            ],
        )
        .unwrap();
        let t = forward_recursive(&w).unwrap();
        let p = &t.numerators[0];
        assert!((p.coeff_of(&[1, 0]) - (b1 * a21 + b2 * a11)).abs() < 1e-15);
        assert!((p.coeff_of(&[0, 1]) - (b1 * a22 + b2 * a12)).abs() < 1e-15);
        let q = HomPoly::linear(f, &[a11, a12]).mul(&HomPoly::linear(f, &[a21, a22])).unwrap();
        assert!(t.denominator.sub(&q).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn identity_shallow_three() {
        let f = Real::default();
        let w = Weights::new(
            f,
            arch(&[3, 3, 1]),
            vec![Matrix::identity(&f, 3), Matrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap()],
        )
        .unwrap();
        let t = forward_recursive(&w).unwrap();
        let x = |i| HomPoly::var(f, 3, i);
        let expect_p = x(1).mul(&x(2)).unwrap().add(&x(0).mul(&x(2)).unwrap()).unwrap().add(&x(0).mul(&x(1)).unwrap()).unwrap();
        assert_eq!(t.numerators[0], expect_p);
        assert_eq!(t.denominator, x(0).mul(&x(1)).unwrap().mul(&x(2)).unwrap());
    }

    #[test]
    fn closed_form_matches_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Real::default();
        let a = arch(&[2, 3, 2, 1]);
        let w = Weights::random(f, &a, &mut rng);
        let t = forward_recursive(&w).unwrap();
        assert_eq!(t.numerators[0].degree(), a.degrees().numerator);
        for _ in 0..50 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let direct = eval_network(&w, &x).unwrap();
            let closed = t.evaluate(&x).unwrap();
            assert!((direct[0] - closed[0]).abs() <= 1e-9 * direct[0].abs().max(1.0));
        }
    }

    #[test]
    fn eval_examples() {
        let f = Real::default();
        let w = Weights::new(
            f,
            arch(&[2, 2, 1]),
            vec![Matrix::identity(&f, 2), Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap()],
        )
        .unwrap();
        assert_eq!(eval_network(&w, &[1.0, 2.0]).unwrap(), vec![1.5]);
        assert!(matches!(eval_network(&w, &[0.0, 2.0]), Err(Error::DomainError(_, 1))));
    }

    #[test]
    fn symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = Real::default();
        let a = arch(&[2, 3, 2, 2]);
        let w = Weights::random(f, &a, &mut rng);
        let ids = vec![vec![0, 1, 2], vec![0, 1]];
        let ones = vec![vec![1.0; 3], vec![1.0; 2]];
        assert_eq!(apply_symmetry(&w, &ids, &ones).unwrap(), w);

        let perms = vec![vec![2, 0, 1], vec![1, 0]];
        let wp = apply_symmetry(&w, &perms, &ones).unwrap();
        let (t, tp) = (forward_recursive(&w).unwrap(), forward_recursive(&wp).unwrap());
        let diff = t.coeff_vector().iter().zip(tp.coeff_vector()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12);

        let diags = vec![vec![0.5, -2.0, 1.5], vec![3.0, -0.25]];
        let wd = apply_symmetry(&w, &perms, &diags).unwrap();
        for _ in 0..50 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let (u, v) = (eval_network(&w, &x).unwrap(), eval_network(&wd, &x).unwrap());
            for (a, b) in u.iter().zip(&v) {
                assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
        // coefficients are rescaled by one common factor
        let td = forward_recursive(&wd).unwrap();
        let ratios: Vec<f64> = td
            .coeff_vector()
            .iter()
            .zip(t.coeff_vector())
            .filter(|(_, b)| b.abs() > 1e-9)
            .map(|(a, b)| a / b)
            .collect();
        for r in &ratios {
            assert!((r - ratios[0]).abs() <= 1e-8 * ratios[0].abs());
        }

        let bad = vec![vec![0.5, 0.0, 1.5], vec![3.0, 1.0]];
        assert_eq!(apply_symmetry(&w, &perms, &bad), Err(Error::ZeroDiagonal(1, 1)));
    }

    #[test]
    fn degenerate_width_keeps_common_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Real::default();
        let a = Architecture::new_diagnostic(vec![1, 3, 2]).unwrap();
        let w = Weights::random(f, &a, &mut rng);
        let t = forward_recursive(&w).unwrap();
        assert_eq!(t.common_variable_factors(), vec![0]);
    }

    #[test]
    fn prime_field_forward_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = PrimeField::default();
        let a = arch(&[3, 2, 3, 2]);
        let w = Weights::random(f, &a, &mut rng);
        let t = forward_recursive(&w).unwrap();
        let x: Vec<u64> = (0..3).map(|_| f.sample(&mut rng)).collect();
        let direct = eval_network(&w, &x).unwrap();
        assert_eq!(direct, t.evaluate(&x).unwrap());
    }

    #[test]
    fn mismatch_is_scale_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = Complex::default();
        let w = Weights::random(f, &arch(&[3, 3, 2]), &mut rng);
        let t = forward_recursive(&w).unwrap();
        let s = t.scale(num_complex::Complex64::new(0.3, -2.0));
        assert!(projective_mismatch(&s, &t) < 1e-14);
    }
}
