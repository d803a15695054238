//! Property checks shared by the proptest suite and the acceptance report.
#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ratnet::factor::{build_h, factor_multilinear, z_slice, FactorOptions};
use ratnet::network::{apply_symmetry, eval_network, forward_recursive};
use ratnet::reconstruct::membership_binary_multioutput;
use ratnet::{Architecture, Complex, Field, HomPoly, LinearForm, Matrix, PrimeField, RandomScalar, Real, Weights};

pub fn gf() -> PrimeField {
    PrimeField::default()
}

pub fn arch(d: &[usize]) -> Architecture {
    Architecture::new(d.to_vec()).unwrap()
}

/// Runner with a fixed ChaCha seed so reports are reproducible.
pub fn runner(cases: u32, seed: u8) -> TestRunner {
    TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]),
    )
}

/// A random form over GF(p) in `nvars` variables of `degree`, from a seed.
pub fn gf_poly(nvars: usize, degree: usize, seed: u64) -> HomPoly<PrimeField> {
    let f = gf();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ratnet::polyalg::monomial_count(nvars, degree);
    let coeffs: Vec<u64> = (0..n).map(|_| f.sample(&mut rng)).collect();
    HomPoly::from_coeff_vector(f, nvars, degree, &coeffs).unwrap()
}

/// `(nvars, da, db, dc, seeds)` for three forms in the same variables.
pub fn triple() -> impl Strategy<Value = (usize, [usize; 3], [u64; 3])> {
    (1usize..=4, [0usize..=3, 0usize..=3, 0usize..=3], any::<[u64; 3]>())
}

pub fn algebra_laws(nvars: usize, degs: [usize; 3], seeds: [u64; 3]) -> Result<(), TestCaseError> {
    let a = gf_poly(nvars, degs[0], seeds[0]);
    let b = gf_poly(nvars, degs[0], seeds[1]);
    let c = gf_poly(nvars, degs[1], seeds[2]);
    let d = gf_poly(nvars, degs[2], seeds[0] ^ seeds[1]);
    prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
    prop_assert_eq!(a.add(&b).unwrap().sub(&b).unwrap(), a.clone());
    prop_assert_eq!(a.mul(&c).unwrap(), c.mul(&a).unwrap());
    prop_assert_eq!(a.mul(&c).unwrap().mul(&d).unwrap(), a.mul(&c.mul(&d).unwrap()).unwrap());
    prop_assert_eq!(a.add(&b).unwrap().mul(&c).unwrap(), a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap());
    prop_assert_eq!(a.pow(2), a.mul(&a).unwrap());
    // evaluation is a ring homomorphism
    let f = gf();
    let mut rng = ChaCha8Rng::seed_from_u64(seeds[2]);
    let x: Vec<u64> = (0..nvars).map(|_| f.sample(&mut rng)).collect();
    let ev = |p: &HomPoly<PrimeField>| p.evaluate(&x).unwrap();
    prop_assert_eq!(ev(&a.mul(&c).unwrap()), f.mul(ev(&a), ev(&c)));
    prop_assert_eq!(ev(&a.add(&b).unwrap()), f.add(ev(&a), ev(&b)));
    Ok(())
}

pub fn compose_and_divide(nvars: usize, degs: [usize; 3], seeds: [u64; 3]) -> Result<(), TestCaseError> {
    let f = gf();
    let p = gf_poly(nvars, degs[0], seeds[0]);
    let mut rng = ChaCha8Rng::seed_from_u64(seeds[1]);
    let mid = degs[1].max(1);
    let out = degs[2].max(1);
    let a = Matrix::from_fn(nvars, mid, |_, _| f.sample(&mut rng));
    let b = Matrix::from_fn(mid, out, |_, _| f.sample(&mut rng));
    // p(A(Bx)) = (p∘A)∘B
    let lhs = p.compose_linear(&a).unwrap().compose_linear(&b).unwrap();
    let rhs = p.compose_linear(&a.matmul(&f, &b).unwrap()).unwrap();
    prop_assert_eq!(lhs, rhs);
    // (p·ℓ)/ℓ = p
    let l = LinearForm::new((0..nvars).map(|_| f.sample(&mut rng)).collect());
    let prod = p.mul(&l.to_poly(&f)).unwrap();
    prop_assert_eq!(prod.exact_divide(&l, 0.0).unwrap(), p.clone());
    prop_assert!(HomPoly::divides(&l, &prod, 0.0));
    Ok(())
}

/// Small architectures for network properties.
pub fn small_arch() -> impl Strategy<Value = Architecture> {
    (1usize..=3)
        .prop_flat_map(|l| (prop::collection::vec(2usize..=3, l), 1usize..=2))
        .prop_map(|(mut dims, out)| {
            dims.push(out);
            Architecture::new(dims).unwrap()
        })
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Permutations leave the coefficient tuple unchanged exactly; permutations
/// with rescalings leave the network function unchanged.
pub fn symmetry_invariance(a: &Architecture, seed: u64) -> Result<(), TestCaseError> {
    let f = gf();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = &a.dims()[1..a.layers()];
    let w = Weights::random(f, a, &mut rng);
    let perms: Vec<Vec<usize>> = hidden.iter().map(|&d| random_perm(d, &mut rng)).collect();
    let ones: Vec<Vec<u64>> = hidden.iter().map(|&d| vec![1; d]).collect();
    let t = apply_symmetry(&w, &perms, &ones).unwrap();
    prop_assert_eq!(forward_recursive(&t).unwrap(), forward_recursive(&w).unwrap());

    let r = Real::default();
    let w = Weights::random(r, a, &mut rng);
    let diags: Vec<Vec<f64>> = hidden
        .iter()
        .map(|&d| (0..d).map(|_| rng.gen_range(0.5..2.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect())
        .collect();
    let t = apply_symmetry(&w, &perms, &diags).unwrap();
    for _ in 0..10 {
        let x: Vec<f64> = (0..a.input_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (Ok(y0), Ok(y1)) = (eval_network(&w, &x), eval_network(&t, &x)) else { continue };
        for (u, v) in y0.iter().zip(&y1) {
            prop_assert!((u - v).abs() <= 1e-8 * u.abs().max(1.0), "{} vs {}", u, v);
        }
    }
    Ok(())
}


pub fn shallow_arch() -> impl Strategy<Value = (usize, usize, usize)> {
    (2usize..=4, 2usize..=4, 1usize..=3)
}

/// The `z`-free and linear slices of `H` are `Q` and the `P_i`, and `H`
/// splits into linear forms.
pub fn h_polynomial_slices(n: usize, m: usize, k: usize, seed: u64) -> Result<(), TestCaseError> {
    let a = arch(&[n, m, k]);
    let f = gf();
    let w = Weights::random(f, &a, &mut ChaCha8Rng::seed_from_u64(seed));
    let t = forward_recursive(&w).unwrap();
    let h = build_h(&w).unwrap();
    prop_assert_eq!(z_slice(&h, n, &vec![0; k]).unwrap(), t.denominator);
    for i in 0..k {
        let mut e = vec![0; k];
        e[i] = 1;
        prop_assert_eq!(&z_slice(&h, n, &e).unwrap(), &t.numerators[i]);
    }
    let c = Complex::default();
    let wc = Weights::random(c, &a, &mut ChaCha8Rng::seed_from_u64(seed));
    let report = factor_multilinear(&build_h(&wc).unwrap(), &FactorOptions { seed, ..FactorOptions::default() });
    prop_assert!(report.decomposable, "H of {:?} did not split", a.dims());
    Ok(())
}

/// Binary multi-output images pass the resultant screen; a random
/// numerator in their place fails it.
pub fn resultant_screen(l: usize, dl: usize, seed: u64) -> Result<(), TestCaseError> {
    let c = Complex::default();
    let mut dims = vec![2; l];
    dims.push(dl);
    let a = arch(&dims);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = Weights::random(c, &a, &mut rng);
    let t = forward_recursive(&w).unwrap();
    let v = membership_binary_multioutput(&t.numerators, &t.denominator, l, 1e-8);
    prop_assert!(v.in_model, "on-model rejected, residual {}", v.residual);
    let mut ps = t.numerators.clone();
    let deg = ps[0].degree();
    let coeffs: Vec<Complex64> = (0..=deg).map(|_| c.sample(&mut rng)).collect();
    ps[1] = HomPoly::from_coeff_vector(c, 2, deg, &coeffs).unwrap();
    let v = membership_binary_multioutput(&ps, &t.denominator, l, 1e-8);
    prop_assert!(!v.in_model, "off-model accepted, residual {}", v.residual);
    Ok(())
}
