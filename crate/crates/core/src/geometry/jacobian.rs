use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{expected_dim, expected_dim_max_form};
use crate::error::{Error, Result};
use crate::field::{Dual, Field, PrimeField, Real};
use crate::matrix::{numerical_rank, rank_mod_p, Matrix};
use crate::network::{forward_recursive, Architecture, Weights};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DimensionReport {
    pub arch: Architecture,
    pub jacobian_rank: usize,
    pub ambient_dim: usize,
    pub param_count: usize,
    pub conjectured_dim: usize,
    /// The conjecture with `max` in place of `min`, when it differs.
    pub conjectured_dim_max_form: usize,
    pub prime: u64,
    pub seed: u64,
    /// Ranks of the individual samples, in order.
    pub sample_ranks: Vec<usize>,
    pub runtime_seconds: f64,
}

impl DimensionReport {
    pub fn matches_conjecture(&self) -> bool {
        self.jacobian_rank == self.conjectured_dim
    }
}

/// Jacobian of the coefficient map at `w`, one forward pass over dual
/// numbers per parameter. Returns `None` when `deadline` passes.
fn jacobian_rows<F: Field>(w: &Weights<F>, deadline: Option<Instant>) -> Result<Option<Vec<Vec<F::Elem>>>> {
    let f = w.field().clone();
    let dual = Dual::new(f.clone());
    let base: Vec<_> = w.params().into_iter().map(|v| dual.lift(v)).collect();
    let wd = w.map_field(dual.clone(), |v| dual.lift(v));
    let mut rows = Vec::with_capacity(base.len());
    for t in 0..base.len() {
        if deadline.is_some_and(|d| Instant::now() > d) {
            return Ok(None);
        }
        let mut params = base.clone();
        params[t].eps = f.one();
        let image = forward_recursive(&wd.with_params(&params)?)?;
        rows.push(image.coeff_vector().into_iter().map(|c| c.eps).collect());
    }
    Ok(Some(rows))
}

/// Rank of the Jacobian at one random point of `GF(p)^N`.
pub fn jacobian_rank_with<R: Rng>(
    arch: &Architecture,
    field: &PrimeField,
    rng: &mut R,
    deadline: Option<Instant>,
) -> Result<Option<usize>> {
    let w = Weights::random(*field, arch, rng);
    let Some(rows) = jacobian_rows(&w, deadline)? else { return Ok(None) };
    let m = Matrix::from_rows(&rows)?;
    Ok(Some(rank_mod_p(field, &m)))
}

fn vote(ranks: &[usize]) -> usize {
    let mut best = (0, 0);
    for &r in ranks {
        let count = ranks.iter().filter(|&&s| s == r).count();
        if (count, r) > best {
            best = (count, r);
        }
    }
    best.1
}

/// Jacobian rank over `GF(p)` from two independent samples; a third sample
/// and a majority vote settle disagreements. Sample `s` draws from ChaCha
/// stream `3·key + s` of `seed`. `Ok(None)` on timeout.
pub(crate) fn jacobian_rank_mod_p_deadline(
    arch: &Architecture,
    seed: u64,
    key: u64,
    p: u64,
    deadline: Option<Instant>,
) -> Result<Option<DimensionReport>> {
    if p < 1_000_000 {
        return Err(Error::InvalidPrime(p));
    }
    let field = PrimeField::new(p)?;
    let start = Instant::now();
    let mut ranks = Vec::new();
    for stream in 0..3u64 {
        if ranks.len() == 2 && ranks[0] == ranks[1] {
            break;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(3 * key + stream);
        match jacobian_rank_with(arch, &field, &mut rng, deadline)? {
            Some(r) => ranks.push(r),
            None => return Ok(None),
        }
    }
    Ok(Some(DimensionReport {
        arch: arch.clone(),
        jacobian_rank: vote(&ranks),
        ambient_dim: arch.ambient_dim(),
        param_count: arch.param_count(),
        conjectured_dim: expected_dim(arch),
        conjectured_dim_max_form: expected_dim_max_form(arch),
        prime: p,
        seed,
        sample_ranks: ranks,
        runtime_seconds: start.elapsed().as_secs_f64(),
    }))
}

pub fn jacobian_rank_mod_p(arch: &Architecture, seed: u64, p: u64) -> Result<DimensionReport> {
    Ok(jacobian_rank_mod_p_deadline(arch, seed, 0, p, None)?.expect("no deadline"))
}

/// Numerical Jacobian rank at a random real point (singular values below
/// `rel_tol · σ_max` dropped).
pub fn jacobian_rank_float(arch: &Architecture, seed: u64, rel_tol: f64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = Real { cleanup: 0.0 };
    let w = Weights::random(f, arch, &mut rng);
    let rows = jacobian_rows(&w, None)?.expect("no deadline");
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| Complex64::new(rows[i][j], 0.0));
    Ok(numerical_rank(&m, rel_tol))
}
