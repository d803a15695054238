//! Scalar fields used as polynomial coefficients.
//!
//! A field value carries whatever context its arithmetic needs (the prime
//! modulus, the float cleanup threshold), so polynomials can check that both
//! operands live in the same field before combining them.

use std::fmt::Debug;

use num_complex::Complex64;

/// Default modulus for finite-field work: the Mersenne prime 2^31 - 1.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;

/// Relative magnitude below which float coefficients are dropped.
pub const DEFAULT_CLEANUP: f64 = 1e-13;

pub trait Field: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Elem: Copy + Debug + PartialEq + Send + Sync + 'static;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn neg(&self, a: Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; `None` for zero (or a non-invertible dual).
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: Self::Elem) -> bool;
    /// Size of an element, used for float cleanup and tolerances.
    /// Exact fields return 0 or 1.
    fn magnitude(&self, a: Self::Elem) -> f64;
    /// Whether arithmetic is exact (no cleanup, no tolerances).
    fn is_exact(&self) -> bool;
    /// Relative cleanup threshold for inexact fields.
    fn cleanup(&self) -> f64 {
        0.0
    }

    fn div(&self, a: Self::Elem, b: Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    fn pow(&self, a: Self::Elem, mut e: u32) -> Self::Elem {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// Double-precision reals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real {
    pub cleanup: f64,
}

impl Default for Real {
    fn default() -> Self {
        Real { cleanup: DEFAULT_CLEANUP }
    }
}

impl Field for Real {
    type Elem = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn one(&self) -> f64 {
        1.0
    }
    fn from_i64(&self, v: i64) -> f64 {
        v as f64
    }
    fn add(&self, a: f64, b: f64) -> f64 {
        a + b
    }
    fn sub(&self, a: f64, b: f64) -> f64 {
        a - b
    }
    fn mul(&self, a: f64, b: f64) -> f64 {
        a * b
    }
    fn neg(&self, a: f64) -> f64 {
        -a
    }
    fn inv(&self, a: f64) -> Option<f64> {
        (a != 0.0).then(|| 1.0 / a)
    }
    fn is_zero(&self, a: f64) -> bool {
        a == 0.0
    }
    fn magnitude(&self, a: f64) -> f64 {
        a.abs()
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn cleanup(&self) -> f64 {
        self.cleanup
    }
}

/// Double-precision complex numbers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Complex {
    pub cleanup: f64,
}

impl Default for Complex {
    fn default() -> Self {
        Complex { cleanup: DEFAULT_CLEANUP }
    }
}

impl Field for Complex {
    type Elem = Complex64;

    fn zero(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn one(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(&self, v: i64) -> Complex64 {
        Complex64::new(v as f64, 0.0)
    }
    fn add(&self, a: Complex64, b: Complex64) -> Complex64 {
        a + b
    }
    fn sub(&self, a: Complex64, b: Complex64) -> Complex64 {
        a - b
    }
    fn mul(&self, a: Complex64, b: Complex64) -> Complex64 {
        a * b
    }
    fn neg(&self, a: Complex64) -> Complex64 {
        -a
    }
    fn inv(&self, a: Complex64) -> Option<Complex64> {
        (a.norm_sqr() != 0.0).then(|| a.inv())
    }
    fn is_zero(&self, a: Complex64) -> bool {
        a.re == 0.0 && a.im == 0.0
    }
    fn magnitude(&self, a: Complex64) -> f64 {
        a.norm()
    }
    fn is_exact(&self) -> bool {
        false
    }
    fn cleanup(&self) -> f64 {
        self.cleanup
    }
}

/// The prime field GF(p). Elements are canonical residues in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Builds GF(p). Fails unless `p` is a prime below 2^62.
    pub fn new(p: u64) -> Result<Self, crate::Error> {
        if p < 2 || p >= 1 << 62 || !is_prime(p) {
            return Err(crate::Error::InvalidPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces any signed integer into the field.
    pub fn reduce(&self, v: i128) -> u64 {
        v.rem_euclid(self.p as i128) as u64
    }

    /// Maps a residue to the symmetric range `(-p/2, p/2]`.
    pub fn to_signed(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        PrimeField { p: DEFAULT_PRIME }
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce(v as i128)
    }
    fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            return None;
        }
        // Fermat: a^(p-2)
        Some(pow_mod(a, self.p - 2, self.p))
    }
    fn is_zero(&self, a: u64) -> bool {
        a == 0
    }
    fn magnitude(&self, a: u64) -> f64 {
        if a == 0 {
            0.0
        } else {
            1.0
        }
    }
    fn is_exact(&self) -> bool {
        true
    }
}

fn pow_mod(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * base as u128) % p as u128) as u64;
        }
        base = ((base as u128 * base as u128) % p as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A dual number `re + eps * ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualNum<E> {
    pub re: E,
    pub eps: E,
}

/// Dual numbers over a base field, for forward-mode derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<F: Field> {
    pub base: F,
}

impl<F: Field> Dual<F> {
    pub fn new(base: F) -> Self {
        Dual { base }
    }

    pub fn lift(&self, re: F::Elem) -> DualNum<F::Elem> {
        DualNum { re, eps: self.base.zero() }
    }

    /// `re + eps·ε`
    pub fn make(&self, re: F::Elem, eps: F::Elem) -> DualNum<F::Elem> {
        DualNum { re, eps }
    }
}

impl<F: Field> Field for Dual<F> {
    type Elem = DualNum<F::Elem>;

    fn zero(&self) -> Self::Elem {
        self.lift(self.base.zero())
    }
    fn one(&self) -> Self::Elem {
        self.lift(self.base.one())
    }
    fn from_i64(&self, v: i64) -> Self::Elem {
        self.lift(self.base.from_i64(v))
    }
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        DualNum { re: self.base.add(a.re, b.re), eps: self.base.add(a.eps, b.eps) }
    }
    fn sub(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        DualNum { re: self.base.sub(a.re, b.re), eps: self.base.sub(a.eps, b.eps) }
    }
    fn mul(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem {
        let f = &self.base;
        DualNum {
            re: f.mul(a.re, b.re),
            eps: f.add(f.mul(a.re, b.eps), f.mul(a.eps, b.re)),
        }
    }
    fn neg(&self, a: Self::Elem) -> Self::Elem {
        DualNum { re: self.base.neg(a.re), eps: self.base.neg(a.eps) }
    }
    fn inv(&self, a: Self::Elem) -> Option<Self::Elem> {
        let f = &self.base;
        let r = f.inv(a.re)?;
        // (a + bε)^-1 = 1/a - (b/a²)ε
        Some(DualNum { re: r, eps: f.neg(f.mul(a.eps, f.mul(r, r))) })
    }
    fn is_zero(&self, a: Self::Elem) -> bool {
        self.base.is_zero(a.re) && self.base.is_zero(a.eps)
    }
    fn magnitude(&self, a: Self::Elem) -> f64 {
        self.base.magnitude(a.re).max(self.base.magnitude(a.eps))
    }
    fn is_exact(&self) -> bool {
        self.base.is_exact()
    }
    fn cleanup(&self) -> f64 {
        self.base.cleanup()
    }
}

/// Fields with a canonical random sampler used for random weights.
pub trait RandomScalar: Field {
    /// Uniform on `[-1, 1]` (real and imaginary parts independently for
    /// complex scalars), uniform on `GF(p) \ {0}` for prime fields.
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
}

impl RandomScalar for Real {
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.gen_range(-1.0..=1.0)
    }
}

impl RandomScalar for Complex {
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
    }
}

impl RandomScalar for PrimeField {
    fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(1..self.p)
    }
}

/// Float fields, viewable as complex numbers.
pub trait NumericField: Field {
    fn to_complex(&self, a: Self::Elem) -> Complex64;
    /// Drops the imaginary part for real fields.
    fn from_complex(&self, z: Complex64) -> Self::Elem;
}

impl NumericField for Real {
    fn to_complex(&self, a: f64) -> Complex64 {
        Complex64::new(a, 0.0)
    }
    fn from_complex(&self, z: Complex64) -> f64 {
        z.re
    }
}

impl NumericField for Complex {
    fn to_complex(&self, a: Complex64) -> Complex64 {
        a
    }
    fn from_complex(&self, z: Complex64) -> Complex64 {
        z
    }
}
