//! Full-batch Adam training of small networks on the target
//! `g(x, y) = 1/(x + y) + 1/(x − y)`.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Real;
use crate::matrix::Matrix;
use crate::network::{Architecture, Weights};

/// Activations below this magnitude count as hitting a pole.
pub const SKIP_THRESHOLD: f64 = 1e-9;
pub const FULL_SUCCESS_LOSS: f64 = 1e-3;
pub const PARTIAL_SUCCESS_DEGREES: f64 = 5.0;

pub fn target(x: f64, y: f64) -> f64 {
    1.0 / (x + y) + 1.0 / (x - y)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<[f64; 2]>,
    pub targets: Vec<f64>,
    pub exclusion_radius: f64,
}

/// The `21 × 21` lattice on `[−1, 1]²` without the points at distance
/// `≤ exclusion_radius` from the lines `x = ±y`. Radius 0 removes exactly
/// the 41 lattice points on the lines.
pub fn sample_lattice(exclusion_radius: f64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&exclusion_radius) {
        return Err(Error::Unsupported(format!("exclusion radius {exclusion_radius} outside [0, 1)")));
    }
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for i in 0..=20i32 {
        for j in 0..=20i32 {
            // distances to the lines in lattice units, kept integral
            let (sum, diff) = ((i + j - 20).abs(), (i - j).abs());
            let dist = sum.min(diff) as f64 / 10.0 / std::f64::consts::SQRT_2;
            if sum == 0 || diff == 0 || dist <= exclusion_radius {
                continue;
            }
            let (x, y) = (f64::from(i - 10) / 10.0, f64::from(j - 10) / 10.0);
            inputs.push([x, y]);
            targets.push(target(x, y));
        }
    }
    Ok(Dataset { inputs, targets, exclusion_radius })
}

/// Uniform on `±√(6 / (fan_in + fan_out))` per layer.
pub fn xavier_init_with<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Weights<Real> {
    let mats = arch
        .shapes()
        .iter()
        .map(|&(out, inp)| {
            let bound = (6.0 / (inp + out) as f64).sqrt();
            Matrix::from_fn(out, inp, |_, _| rng.gen_range(-bound..=bound))
        })
        .collect();
    Weights::new(Real::default(), arch.clone(), mats).expect("shapes from the architecture")
}

pub fn xavier_init(arch: &Architecture, seed: u64) -> Weights<Real> {
    xavier_init_with(arch, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub loss: f64,
    /// Same layout as [`Weights::params`].
    pub grads: Vec<f64>,
    /// Points dropped because an activation came within
    /// [`SKIP_THRESHOLD`] of a pole.
    pub skipped: usize,
}

/// Mean squared error over the usable points of the batch and its gradient
/// by reverse accumulation. Only scalar-output networks are supported.
pub fn forward_backward(w: &Weights<Real>, inputs: &[Vec<f64>], targets: &[f64]) -> Result<Gradient> {
    let arch = w.arch();
    if arch.output_dim() != 1 {
        return Err(Error::Unsupported("training needs a single output".into()));
    }
    if inputs.len() != targets.len() {
        return Err(Error::ShapeMismatch(format!("{} inputs, {} targets", inputs.len(), targets.len())));
    }
    let layers = arch.layers();
    let mats = w.mats();
    let dims = arch.dims();
    // flat buffers: pre-activations z_k and activations a_k share offsets
    let mut unit_off = vec![0usize; layers + 1];
    for k in 0..layers {
        unit_off[k + 1] = unit_off[k] + dims[k + 1];
    }
    let mut param_off = vec![0usize; layers];
    for k in 1..layers {
        param_off[k] = param_off[k - 1] + dims[k] * dims[k - 1];
    }
    let mut z = vec![0.0; unit_off[layers]];
    let mut act = vec![0.0; unit_off[layers]];
    let widest = dims.iter().copied().max().unwrap_or(1);
    let (mut delta, mut next) = (vec![0.0; widest], vec![0.0; widest]);
    let mut grads = vec![0.0; arch.param_count()];
    let mut sum_sq = 0.0;
    let mut used = 0usize;
    'points: for (x, &y) in inputs.iter().zip(targets) {
        if x.len() != arch.input_dim() {
            return Err(Error::NvarsMismatch(x.len(), arch.input_dim()));
        }
        for k in 0..layers {
            let input: &[f64] = if k == 0 { x } else { &act[unit_off[k - 1]..unit_off[k]] };
            let m = &mats[k];
            for i in 0..m.rows() {
                let v: f64 = m.row(i).iter().zip(input).map(|(a, b)| a * b).sum();
                z[unit_off[k] + i] = v;
            }
            if k + 1 < layers {
                for i in unit_off[k]..unit_off[k + 1] {
                    if z[i].abs() < SKIP_THRESHOLD {
                        continue 'points;
                    }
                    act[i] = 1.0 / z[i];
                }
            }
        }
        let r = z[unit_off[layers - 1]] - y;
        sum_sq += r * r;
        used += 1;
        // delta at the pre-activation of each layer, walking backwards
        delta[0] = r;
        for k in (0..layers).rev() {
            let m = &mats[k];
            let input: &[f64] = if k == 0 { x } else { &act[unit_off[k - 1]..unit_off[k]] };
            let g = &mut grads[param_off[k]..param_off[k] + m.rows() * m.cols()];
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    g[i * m.cols() + j] += delta[i] * input[j];
                }
            }
            if k == 0 {
                break;
            }
            for j in 0..m.cols() {
                let back: f64 = (0..m.rows()).map(|i| m.get(i, j) * delta[i]).sum();
                let zj = z[unit_off[k - 1] + j];
                next[j] = -back / (zj * zj);
            }
            std::mem::swap(&mut delta, &mut next);
        }
    }
    if used == 0 {
        return Err(Error::AllPointsSkipped);
    }
    let scale = 2.0 / used as f64;
    grads.iter_mut().for_each(|g| *g *= scale);
    Ok(Gradient { loss: sum_sq / used as f64, grads, skipped: inputs.len() - used })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u32,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState { m: vec![0.0; n], v: vec![0.0; n], t: 0, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64], lr: f64) {
    state.t += 1;
    let c1 = 1.0 - state.beta1.powi(state.t as i32);
    let c2 = 1.0 - state.beta2.powi(state.t as i32);
    for (i, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        let mhat = state.m[i] / c1;
        let vhat = state.v[i] / c2;
        *p -= lr * mhat / (vhat.sqrt() + state.eps);
    }
}

/// Unit normals of the singular lines `x + y = 0` and `x − y = 0`.
pub fn true_pole_directions() -> [[f64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[s, s], [s, -s]]
}

/// For each direction, the smallest angle in degrees between it and any
/// row of `W_1`, ignoring sign and scale.
pub fn singularity_recovery_score(w: &Weights<Real>, true_lines: &[Vec<f64>]) -> Vec<f64> {
    let w1 = w.layer(1);
    true_lines
        .iter()
        .map(|line| {
            let ln: f64 = line.iter().map(|v| v * v).sum::<f64>().sqrt();
            (0..w1.rows())
                .map(|i| {
                    let row = w1.row(i);
                    let rn: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if rn == 0.0 || ln == 0.0 {
                        return 90.0;
                    }
                    let cos = row.iter().zip(line).map(|(a, b)| a * b).sum::<f64>().abs() / (rn * ln);
                    cos.min(1.0).acos().to_degrees()
                })
                .fold(90.0, f64::min)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub arch: Architecture,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub exclusion_radius: f64,
    /// Rescale the gradient to at most this Euclidean norm.
    pub clip: Option<f64>,
    /// Keep a weight snapshot every this many epochs.
    pub snapshot_every: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            arch: Architecture::new(vec![2, 2, 1]).expect("valid"),
            lr: 1e-3,
            epochs: 20_000,
            seed: 0,
            exclusion_radius: 0.0,
            clip: None,
            snapshot_every: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainResult {
    /// Loss at the weights used in each epoch, before the update.
    pub loss_curve: Vec<f64>,
    pub skipped: Vec<usize>,
    pub initial: Weights<Real>,
    pub final_weights: Weights<Real>,
    pub snapshots: Vec<(usize, Weights<Real>)>,
    /// Angles to the true pole directions, from the final weights.
    pub recovered_directions: Vec<f64>,
    pub final_loss: f64,
    pub converged: bool,
    /// Epoch at which every point hit a pole, ending the run early.
    pub aborted_at: Option<usize>,
}

impl TrainResult {
    pub fn partial_success(&self) -> bool {
        self.recovered_directions.iter().any(|&a| a < PARTIAL_SUCCESS_DEGREES)
    }
}

fn split(ds: &Dataset) -> Vec<Vec<f64>> {
    ds.inputs.iter().map(|p| p.to_vec()).collect()
}

/// Trains from `init` on `ds`.
pub fn train_from(init: Weights<Real>, ds: &Dataset, cfg: &TrainConfig) -> Result<TrainResult> {
    if !(cfg.lr > 0.0) || cfg.epochs == 0 {
        return Err(Error::Unsupported("need lr > 0 and at least one epoch".into()));
    }
    let inputs = split(ds);
    let mut w = init.clone();
    let mut params = w.params();
    let mut adam = AdamState::new(params.len());
    let mut loss_curve = Vec::with_capacity(cfg.epochs);
    let mut skipped = Vec::with_capacity(cfg.epochs);
    let mut snapshots = Vec::new();
    let mut aborted_at = None;
    for epoch in 0..cfg.epochs {
        if cfg.snapshot_every.is_some_and(|k| k > 0 && epoch % k == 0) {
            snapshots.push((epoch, w.clone()));
        }
        let mut g = match forward_backward(&w, &inputs, &ds.targets) {
            Ok(g) => g,
            Err(Error::AllPointsSkipped) => {
                aborted_at = Some(epoch);
                break;
            }
            Err(e) => return Err(e),
        };
        if let Some(c) = cfg.clip {
            let norm = g.grads.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > c {
                g.grads.iter_mut().for_each(|v| *v *= c / norm);
            }
        }
        loss_curve.push(g.loss);
        skipped.push(g.skipped);
        adam_step(&mut adam, &mut params, &g.grads, cfg.lr);
        w = w.with_params(&params)?;
    }
    let final_loss = match forward_backward(&w, &inputs, &ds.targets) {
        Ok(g) => g.loss,
        Err(Error::AllPointsSkipped) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let recovered_directions = if w.arch().input_dim() == 2 {
        singularity_recovery_score(&w, &true_pole_directions().map(|d| d.to_vec()))
    } else {
        Vec::new()
    };
    Ok(TrainResult {
        loss_curve,
        skipped,
        initial: init,
        final_weights: w,
        snapshots,
        recovered_directions,
        final_loss,
        converged: final_loss < FULL_SUCCESS_LOSS,
        aborted_at,
    })
}

/// The weights realising the target exactly on `(2, 2, 1)`.
pub fn oracle_weights() -> Weights<Real> {
    let f = Real::default();
    Weights::new(
        f,
        Architecture::new(vec![2, 2, 1]).expect("valid"),
        vec![
            Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).expect("rectangular"),
            Matrix::from_rows(&[vec![1.0, 1.0]]).expect("rectangular"),
        ],
    )
    .expect("shapes match")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub run: usize,
    pub final_loss: f64,
    pub angle1: f64,
    pub angle2: f64,
    pub full_success: bool,
    pub partial_success: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSummary {
    pub runs: Vec<RunSummary>,
    pub full_successes: usize,
    pub partial_successes: usize,
}

/// Initial weights of run `index`: Xavier draws from ChaCha stream `index`
/// of `seed`.
pub fn run_init(arch: &Architecture, seed: u64, index: usize) -> Weights<Real> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    xavier_init_with(arch, &mut rng)
}

#[derive(Serialize)]
struct EpochRow {
    epoch: usize,
    loss: f64,
    skipped: usize,
}

#[derive(Serialize)]
struct WeightsFile {
    initial: crate::network::WeightsJson,
    #[serde(rename = "final")]
    final_weights: crate::network::WeightsJson,
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn write_run(dir: &Path, run: usize, r: &TrainResult) -> Result<()> {
    let mut w = csv::Writer::from_path(dir.join(format!("run_{run:04}.csv"))).map_err(io_err)?;
    for (epoch, (&loss, &skipped)) in r.loss_curve.iter().zip(&r.skipped).enumerate() {
        w.serialize(EpochRow { epoch, loss, skipped }).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    let file = WeightsFile { initial: r.initial.to_json(), final_weights: r.final_weights.to_json() };
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Json(e.to_string()))?;
    fs::File::create(dir.join(format!("run_{run:04}_weights.json")))
        .and_then(|mut f| f.write_all(text.as_bytes()))
        .map_err(io_err)
}

/// Trains `n_inits` independent runs in parallel. With `out_dir`, writes a
/// per-run loss CSV and weights JSON plus `aggregate.csv`.
pub fn run_experiment(cfg: &TrainConfig, n_inits: usize, out_dir: Option<&Path>) -> Result<ExperimentSummary> {
    if n_inits == 0 {
        return Err(Error::Unsupported("need at least one initialization".into()));
    }
    let ds = sample_lattice(cfg.exclusion_radius)?;
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let runs = (0..n_inits)
        .into_par_iter()
        .map(|i| -> Result<RunSummary> {
            let r = train_from(run_init(&cfg.arch, cfg.seed, i), &ds, cfg)?;
            if let Some(dir) = out_dir {
                write_run(dir, i, &r)?;
            }
            let angle = |k: usize| r.recovered_directions.get(k).copied().unwrap_or(f64::NAN);
            Ok(RunSummary {
                run: i,
                final_loss: r.final_loss,
                angle1: angle(0),
                angle2: angle(1),
                full_success: r.converged,
                partial_success: r.partial_success(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = out_dir {
        let mut w = csv::Writer::from_path(dir.join("aggregate.csv")).map_err(io_err)?;
        for r in &runs {
            w.serialize(r).map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
    }
    Ok(ExperimentSummary {
        full_successes: runs.iter().filter(|r| r.full_success).count(),
        partial_successes: runs.iter().filter(|r| r.partial_success).count(),
        runs,
    })
}
