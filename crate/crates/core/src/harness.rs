//! Training / free-run protocol, metrics and seed sweeps.
//!
//! A run consists of `train_steps` steps of online learning on the
//! Mackey-Glass sequence followed by `predict_steps` steps with the learner
//! frozen. During training the output recorded (and fed back on the next
//! step) is computed with the freshly updated readout. During prediction the
//! network is driven by its own previous output, or by the ground truth when
//! `autonomous_input = ground-truth`.

use std::time::Duration;

use crate::config::{AutonomousInput, ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::learners::{Learner, LearnerOutput};
use crate::reservoir::{EsnModel, ReservoirState};
use crate::rng::{SeededRng, Substream};
use crate::signal::{MackeyGlass, SignalSource};

/// Number of readout weights sampled into the trace.
pub const SAMPLED_WEIGHTS: usize = 10;
/// Number of reservoir activations sampled into the trace.
pub const SAMPLED_NODES: usize = 3;
/// Window length used by [`convergence_step`].
pub const CONVERGENCE_WINDOW: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Predict,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Train => "train",
            Phase::Predict => "predict",
        }
    }
}

/// One row of the per-step trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub phase: Phase,
    pub f: f64,
    pub z: f64,
    pub e: f64,
    pub w_norm: f64,
    pub weights: [f64; SAMPLED_WEIGHTS],
    pub nodes: [f64; SAMPLED_NODES],
}

/// Everything recorded about one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    pub train_steps: usize,
    pub weight_indices: [usize; SAMPLED_WEIGHTS],
    pub node_indices: [usize; SAMPLED_NODES],
    pub rows: Vec<TraceRow>,
    pub train_mse: Option<f64>,
    pub predict_mse: Option<f64>,
    /// Step at which a non-finite value appeared; the trace stops there.
    pub diverged_at: Option<usize>,
    pub duration: Duration,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn train_rows(&self) -> &[TraceRow] {
        &self.rows[..self.rows.len().min(self.train_steps)]
    }

    pub fn predict_rows(&self) -> &[TraceRow] {
        &self.rows[self.rows.len().min(self.train_steps)..]
    }

    /// `‖W_out(k)‖` over the training phase.
    pub fn train_norms(&self) -> Vec<f64> {
        self.train_rows().iter().map(|r| r.w_norm).collect()
    }

    /// Equality ignoring wall-clock duration.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        RunRecord { duration: Duration::ZERO, ..self.clone() }
            == RunRecord { duration: Duration::ZERO, ..other.clone() }
    }
}

/// Mean squared difference of two equally long, nonempty traces.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::Empty);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// Earliest step `k*` such that for every window start `j >= k*` the relative
/// change `|n(j+100) - n(j)| / n(j)` stays below `rel_tol`.
///
/// Returns `None` when the last window already fails or the trace is shorter
/// than one window.
pub fn convergence_step(norms: &[f64], rel_tol: f64) -> Option<usize> {
    if norms.len() <= CONVERGENCE_WINDOW {
        return None;
    }
    let settled = |j: usize| {
        let (a, b) = (norms[j], norms[j + CONVERGENCE_WINDOW]);
        let change = (b - a).abs();
        if a == 0.0 {
            change == 0.0
        } else {
            change / a.abs() < rel_tol
        }
    };
    let last = norms.len() - CONVERGENCE_WINDOW - 1;
    let mut k = None;
    for j in (0..=last).rev() {
        if settled(j) {
            k = Some(j);
        } else {
            break;
        }
    }
    k
}

/// A run in progress; exposes single steps so the phases can be observed.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    model: EsnModel,
    state: ReservoirState,
    learner: Learner,
    signal: MackeyGlass,
    weight_indices: [usize; SAMPLED_WEIGHTS],
    node_indices: [usize; SAMPLED_NODES],
    z_prev: f64,
    step: usize,
    learning: bool,
}

impl Experiment {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let rng = SeededRng::new(config.seed);
        let model = EsnModel::build(config, &rng)?;
        let n = config.n_neurons;
        let mut sampling = rng.stream(Substream::Sampling);
        let weight_indices = pad_indices(&sampling.sample_indices(n, SAMPLED_WEIGHTS));
        let node_indices = pad_indices(&sampling.sample_indices(n, SAMPLED_NODES));
        let mut signal = MackeyGlass::new(config.mgs_tau, config.mgs_init)?;
        for _ in 0..config.washout_steps {
            signal.next_value()?;
        }
        Ok(Self {
            config: config.clone(),
            state: ReservoirState::zeros(n),
            learner: Learner::from_config(config),
            model,
            signal,
            weight_indices,
            node_indices,
            z_prev: 0.0,
            step: 0,
            learning: true,
        })
    }

    /// Replays a previously trained model with learning disabled: the
    /// training phase is teacher-forced with the readout frozen.
    pub fn with_model(config: &ExperimentConfig, model: EsnModel) -> Result<Self> {
        if model.n() != config.n_neurons {
            return Err(Error::DimensionMismatch { expected: config.n_neurons, got: model.n() });
        }
        let mut exp = Self::new(config)?;
        exp.model = model;
        exp.learning = false;
        Ok(exp)
    }

    pub fn model(&self) -> &EsnModel {
        &self.model
    }

    pub fn into_model(self) -> EsnModel {
        self.model
    }

    pub fn learner(&self) -> &Learner {
        &self.learner
    }

    pub fn state(&self) -> &ReservoirState {
        &self.state
    }

    /// One online-learning step.
    pub fn train_step(&mut self) -> Result<(TraceRow, LearnerOutput)> {
        let f = self.signal.next_value()?;
        self.state.step(&self.model, f, self.z_prev).map_err(|e| self.at_step(e))?;
        let out = if self.learning {
            self.learner.step(&self.model.w_out, &self.state.r, f).map_err(|e| self.at_step(e))?
        } else {
            let e = crate::learners::prior_error(&self.state.r, &self.model.w_out, f)?;
            LearnerOutput {
                w_out: self.model.w_out.clone(),
                e_prior: e,
                e_posterior: e,
                e_norm: 0.0,
                gain_denominator: 1.0,
            }
        };
        self.model.w_out = out.w_out.clone();
        let z = self.model.readout(&self.state.r)?;
        let row = self.record(Phase::Train, f, z, out.e_prior)?;
        Ok((row, out))
    }

    /// One free-running step with the readout frozen.
    pub fn predict_step(&mut self) -> Result<TraceRow> {
        let f = self.signal.next_value()?;
        let u = match self.config.autonomous_input {
            AutonomousInput::SelfFeedback => self.z_prev,
            AutonomousInput::GroundTruth => f,
        };
        self.state.step(&self.model, u, self.z_prev).map_err(|e| self.at_step(e))?;
        let z = self.model.readout(&self.state.r)?;
        self.record(Phase::Predict, f, z, z - f)
    }

    fn record(&mut self, phase: Phase, f: f64, z: f64, e: f64) -> Result<TraceRow> {
        if !z.is_finite() || !e.is_finite() {
            return Err(Error::NonFinite { step: self.step, what: "network output" });
        }
        let w = &self.model.w_out;
        let r = &self.state.r;
        let row = TraceRow {
            step: self.step,
            phase,
            f,
            z,
            e,
            w_norm: w.norm(),
            weights: self.weight_indices.map(|i| w[i]),
            nodes: self.node_indices.map(|i| r[i]),
        };
        self.z_prev = z;
        self.step += 1;
        Ok(row)
    }

    fn at_step(&self, e: Error) -> Error {
        match e {
            Error::NonFinite { what, .. } => Error::NonFinite { step: self.step, what },
            other => other,
        }
    }

    /// Runs both phases to completion. Numeric divergence ends the run early
    /// and is reported in the record, not as an error.
    pub fn run(&mut self) -> Result<RunRecord> {
        let started = Stopwatch::start();
        let cfg = &self.config;
        let (train_steps, predict_steps) = (cfg.train_steps, cfg.predict_steps);
        let mut rows = Vec::with_capacity(train_steps + predict_steps);
        let mut diverged_at = None;
        for _ in 0..train_steps {
            match self.train_step() {
                Ok((row, _)) => rows.push(row),
                Err(Error::NonFinite { step, .. }) => {
                    diverged_at = Some(step);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if diverged_at.is_none() {
            for _ in 0..predict_steps {
                match self.predict_step() {
                    Ok(row) => rows.push(row),
                    Err(Error::NonFinite { step, .. }) => {
                        diverged_at = Some(step);
                        break;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let phase_mse = |phase: Phase| -> Option<f64> {
            if diverged_at.is_some() {
                return None;
            }
            let (z, f): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.phase == phase).map(|r| (r.z, r.f)).unzip();
            mse(&z, &f).ok()
        };
        let train_mse = phase_mse(Phase::Train);
        let predict_mse = phase_mse(Phase::Predict);
        Ok(RunRecord {
            method: self.config.method,
            seed: self.config.seed,
            train_steps,
            weight_indices: self.weight_indices,
            node_indices: self.node_indices,
            rows,
            train_mse,
            predict_mse,
            diverged_at,
            duration: started.elapsed(),
        })
    }
}

// Fewer neurons than sampled slots: repeat indices cyclically.
fn pad_indices<const K: usize>(drawn: &[usize]) -> [usize; K] {
    std::array::from_fn(|i| drawn[i % drawn.len()])
}

/// Builds the network, trains it online and lets it run freely.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunRecord> {
    Experiment::new(config)?.run()
}

/// Median, minimum and maximum of one metric over the non-diverged runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spread {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let m = v.len();
        let median = if m % 2 == 1 { v[m / 2] } else { 0.5 * (v[m / 2 - 1] + v[m / 2]) };
        Some(Self { median, min: v[0], max: v[m - 1] })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAggregate {
    pub runs: usize,
    pub diverged: usize,
    pub train_mse: Option<Spread>,
    pub predict_mse: Option<Spread>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub method: Method,
    pub records: Vec<RunRecord>,
    pub aggregate: SweepAggregate,
}

impl SweepResult {
    fn from_records(method: Method, records: Vec<RunRecord>) -> Self {
        let ok: Vec<&RunRecord> = records.iter().filter(|r| !r.diverged()).collect();
        let train: Vec<f64> = ok.iter().filter_map(|r| r.train_mse).collect();
        let predict: Vec<f64> = ok.iter().filter_map(|r| r.predict_mse).collect();
        let aggregate = SweepAggregate {
            runs: records.len(),
            diverged: records.len() - ok.len(),
            train_mse: Spread::of(&train),
            predict_mse: Spread::of(&predict),
        };
        Self { method, records, aggregate }
    }
}

/// Runs `config` once per seed. `jobs` caps the worker threads (`0` = all
/// cores); results are returned in seed order regardless of scheduling.
pub fn seed_sweep(config: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<SweepResult> {
    if seeds.is_empty() {
        return Err(Error::Empty);
    }
    config.validate()?;
    let one = |&seed: &u64| run_experiment(&ExperimentConfig { seed, ..config.clone() });
    let records = map_jobs(seeds, jobs, one)?;
    Ok(SweepResult::from_records(config.method, records))
}

/// The same sweep for each of the three learning rules, with every shared
/// parameter held identical.
pub fn compare_methods(config: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<Vec<SweepResult>> {
    Method::ALL.iter().map(|&method| seed_sweep(&ExperimentConfig { method, ..config.clone() }, seeds, jobs)).collect()
}

/// Wall-clock timer; reads zero where the platform has no clock.
struct Stopwatch(#[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))] std::time::Instant);

impl Stopwatch {
    fn start() -> Self {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return Stopwatch(std::time::Instant::now());
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        Stopwatch()
    }

    fn elapsed(&self) -> Duration {
        #[cfg(not(all(target_arch = "wasm32", target_os = "unknown")))]
        return self.0.elapsed();
        #[cfg(all(target_arch = "wasm32", target_os = "unknown"))]
        Duration::ZERO
    }
}

#[cfg(feature = "parallel")]
fn map_jobs<T, U, F>(items: &[T], jobs: usize, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    use rayon::prelude::*;
    if jobs == 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Validation { key: "jobs".into(), reason: e.to_string() })?;
    pool.install(|| items.par_iter().map(f).collect())
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<T, U, F>(items: &[T], _jobs: usize, f: F) -> Result<Vec<U>>
where
    F: Fn(&T) -> Result<U>,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((mse(&[1.0, 2.0, 3.0], &[0.0; 3]).unwrap() - 14.0 / 3.0).abs() < 1e-15);
        assert_eq!(mse(&[], &[]), Err(Error::Empty));
        assert!(matches!(mse(&[1.0], &[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn convergence_of_synthetic_traces() {
        assert_eq!(convergence_step(&vec![2.0; 500], 1e-3), Some(0));
        let growing: Vec<f64> = (0..500).map(|k| (0.01 * k as f64).exp()).collect();
        assert_eq!(convergence_step(&growing, 1e-3), None);
        let mut settling: Vec<f64> = (0..300).map(|k| k as f64 + 1.0).collect();
        settling.extend(std::iter::repeat_n(300.0, 300));
        assert_eq!(convergence_step(&settling, 1e-3), Some(299));
        assert_eq!(convergence_step(&[1.0; 50], 1e-3), None);
    }

    #[test]
    fn spread_median() {
        let s = Spread::of(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.median, s.min, s.max), (2.0, 1.0, 3.0));
        assert_eq!(Spread::of(&[1.0, 4.0]).unwrap().median, 2.5);
        assert!(Spread::of(&[]).is_none());
    }

    #[test]
    fn small_indices_are_padded() {
        let idx: [usize; 5] = pad_indices(&[3, 1]);
        assert_eq!(idx, [3, 1, 3, 1, 3]);
    }
}
