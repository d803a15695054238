use crate::error::{Error, Result};
use crate::field::Field;
use crate::network::Weights;
use crate::polyalg::{ExponentVector, HomPoly};

/// `H(x, z) = ∏_j (b_{1j} z_1 + … + b_{kj} z_k + ℓ_j(x))` in the `n + k`
/// variables `(x, z)` of a shallow `(n, m, k)` network. Its `z`-free part is
/// `Q` and its coefficient of `z_i` is `P_i`.
pub fn build_h<F: Field>(w: &Weights<F>) -> Result<HomPoly<F>> {
    let arch = w.arch();
    if !arch.is_shallow() {
        return Err(Error::NotShallow(arch.dims().to_vec()));
    }
    let (n, m, k) = (arch.dims()[0], arch.dims()[1], arch.dims()[2]);
    let f = w.field();
    let (w1, w2) = (w.layer(1), w.layer(2));
    let mut h = HomPoly::one(f.clone(), n + k);
    for j in 0..m {
        let coeffs: Vec<F::Elem> = w1.row(j).iter().copied().chain((0..k).map(|i| w2.get(i, j))).collect();
        h = h.mul(&HomPoly::linear(f.clone(), &coeffs))?;
    }
    Ok(h)
}

/// The polynomial in the first `n` variables multiplying `z^zexp`, where
/// `z` are the trailing variables of `h`.
pub fn z_slice<F: Field>(h: &HomPoly<F>, n: usize, zexp: &[u32]) -> Result<HomPoly<F>> {
    if n + zexp.len() != h.nvars() {
        return Err(Error::NvarsMismatch(h.nvars(), n + zexp.len()));
    }
    let zdeg: usize = zexp.iter().map(|&e| e as usize).sum();
    if zdeg > h.degree() {
        return Err(Error::DegreeMismatch(h.degree(), zdeg));
    }
    let terms = h
        .terms()
        .filter(|(e, _)| &e.exps()[n..] == zexp)
        .map(|(e, &c)| (ExponentVector::new(e.exps()[..n].to_vec()), c));
    HomPoly::from_terms(h.field().clone(), n, h.degree() - zdeg, terms)
}
