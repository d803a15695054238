use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::jacobian::jacobian_rank_mod_p_deadline;
use super::{expected_dim, DimensionReport};
use crate::error::{Error, Result};
use crate::field::DEFAULT_PRIME;
use crate::network::Architecture;

/// Every valid architecture with `2 ≤ L ≤ max_layers`, at most `max_params`
/// parameters and all widths at most `max_width`, ordered by `L` and then
/// lexicographically by `(d_0, …, d_L)`.
pub fn enumerate_architectures(max_params: usize, max_layers: usize, max_width: usize) -> Vec<Architecture> {
    fn extend(dims: &mut Vec<usize>, len: usize, params: usize, max_params: usize, max_width: usize, out: &mut Vec<Architecture>) {
        let last = dims.len() + 1 == len;
        let lo = if last { 1 } else { 2 };
        for d in lo..=max_width {
            let p = params + dims.last().map_or(0, |&prev| prev * d);
            if p > max_params {
                break;
            }
            dims.push(d);
            if last {
                out.push(Architecture::new(dims.clone()).expect("enumerated dims are valid"));
            } else {
                extend(dims, len, p, max_params, max_width, out);
            }
            dims.pop();
        }
    }
    let mut out = Vec::new();
    for l in 2..=max_layers {
        extend(&mut Vec::new(), l + 1, 0, max_params, max_width, &mut out);
    }
    out
}

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub max_params: usize,
    pub max_layers: usize,
    pub max_width: usize,
    pub prime: u64,
    pub seed: u64,
    pub timeout: Duration,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            max_params: 30,
            max_layers: 5,
            max_width: 9,
            prime: DEFAULT_PRIME,
            seed: 0,
            timeout: Duration::from_secs(10),
            workers: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CensusStatus {
    Ok,
    Timeout,
    Error,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusRow {
    pub arch: Architecture,
    pub status: CensusStatus,
    pub report: Option<DimensionReport>,
    pub runtime_seconds: f64,
}

impl CensusRow {
    pub fn jacobian_rank(&self) -> Option<usize> {
        self.report.as_ref().map(|r| r.jacobian_rank)
    }
}

fn run_one(index: usize, arch: &Architecture, opts: &CensusOptions) -> CensusRow {
    let start = Instant::now();
    let deadline = start + opts.timeout;
    let (status, report) = match jacobian_rank_mod_p_deadline(arch, opts.seed, index as u64, opts.prime, Some(deadline)) {
        Ok(Some(r)) => (CensusStatus::Ok, Some(r)),
        Ok(None) => (CensusStatus::Timeout, None),
        Err(_) => (CensusStatus::Error, None),
    };
    CensusRow { arch: arch.clone(), status, report, runtime_seconds: start.elapsed().as_secs_f64() }
}

/// Jacobian ranks of every enumerated architecture. Rows come back in
/// enumeration order and, apart from runtimes, do not depend on the number
/// of workers.
pub fn census(opts: &CensusOptions) -> Result<Vec<CensusRow>> {
    let archs = enumerate_architectures(opts.max_params, opts.max_layers, opts.max_width);
    let work = || archs.par_iter().enumerate().map(|(i, a)| run_one(i, a, opts)).collect::<Vec<_>>();
    match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Unsupported(e.to_string()))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

#[derive(Serialize)]
struct CsvRow {
    arch: String,
    jacobian_rank: Option<usize>,
    ambient_dim: usize,
    param_count: usize,
    conjectured_dim: usize,
    #[serde(rename = "match")]
    matches: Option<bool>,
    runtime_s: String,
    status: CensusStatus,
}

pub fn write_census_csv<W: Write>(rows: &[CensusRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        let conjectured = expected_dim(&r.arch);
        let rank = r.jacobian_rank();
        w.serialize(CsvRow {
            arch: r.arch.to_string(),
            jacobian_rank: rank,
            ambient_dim: r.arch.ambient_dim(),
            param_count: r.arch.param_count(),
            conjectured_dim: conjectured,
            matches: rank.map(|k| k == conjectured),
            runtime_s: format!("{:.3}", r.runtime_seconds),
            status: r.status,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
