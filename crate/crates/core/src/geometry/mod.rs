//! Dimensions of neurovarieties, filling predicates and rank tests.

mod census;
mod jacobian;
mod moment;

pub use census::{census, enumerate_architectures, write_census_csv, CensusOptions, CensusRow, CensusStatus};
pub use jacobian::{jacobian_rank_float, jacobian_rank_mod_p, jacobian_rank_with, DimensionReport};
pub use moment::{build_moment_matrix, rank_test_membership, ColumnLabel, MomentMatrix, RankTest};

use crate::binomial;
use crate::network::Architecture;

/// Generic dimension predicted from the parameter count minus the rescaling
/// symmetries, capped by the ambient dimension:
/// `min(N − Σ_{i=1}^{L−1} d_i + 1, M)`.
pub fn expected_dim(arch: &Architecture) -> usize {
    (arch.param_count() + 1 - arch.hidden_width_sum()).min(arch.ambient_dim())
}

/// The same two quantities combined with `max`, as literally stated in the
/// conjecture this formula comes from.
pub fn expected_dim_max_form(arch: &Architecture) -> usize {
    (arch.param_count() + 1 - arch.hidden_width_sum()).max(arch.ambient_dim())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShallowFilling {
    pub params_feasible: bool,
    pub variety_filling: bool,
    pub manifold_filling: bool,
}

/// Parameter and ambient counts of a shallow `(n, m, k)` network, valid
/// also for `n = 1`.
pub fn shallow_counts(n: usize, m: usize, k: usize) -> (usize, usize) {
    let params = n * m + m * k;
    let ambient = k * binomial(n + m - 2, m - 1) + binomial(n + m - 1, m);
    (params, ambient)
}

/// Filling behaviour of `(n, m, k)`: only `n ≤ 2` has enough parameters;
/// `n = 2` fills the variety but not the manifold, `n = 1` fills both.
pub fn filling_shallow(n: usize, m: usize, k: usize) -> ShallowFilling {
    let (params, ambient) = shallow_counts(n, m, k);
    ShallowFilling {
        params_feasible: params >= ambient,
        variety_filling: n <= 2,
        manifold_filling: n == 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinaryFilling {
    pub params_feasible: bool,
    pub variety_filling: bool,
}

/// Binary `(2, …, 2, d_L)` with `L` layers.
pub fn filling_binary(l: usize, dl: usize) -> BinaryFilling {
    let mut dims = vec![2; l.max(1)];
    dims.push(dl.max(1));
    let arch = Architecture::new(dims).expect("binary dims are valid");
    BinaryFilling {
        params_feasible: arch.param_count() >= arch.ambient_dim(),
        variety_filling: l == 2 || (l > 2 && dl == 1),
    }
}
