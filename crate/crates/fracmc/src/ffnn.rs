//! Feedforward surrogate: learn next-step prediction of simulated
//! trajectories from lagged windows.
//!
//! A small tanh network maps w consecutive trajectory values to the next
//! one. Trained on Monte Carlo runs of a problem family with randomized
//! initial values, it reproduces held-out trajectories autoregressively.
//! Comparing test error across window lengths measures how much past a
//! family needs: classical first-order dynamics predict from one lag,
//! fractional ones need several.

use crate::error::{Error, Result};
use crate::mcsolver::{solve_mc, LinearFdeProblem, McOptions, TimeGrid, TrajectoryTable};
use crate::specfun::FracOrder;
use crate::subordinator::RngStream;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Hidden activation (output is always linear). `Identity` makes the
/// whole network an exactly-linear map, useful when the target is known
/// to be linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// derivative expressed through the activation value
    #[inline]
    fn derivative_from_value(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

/// Training configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// 0 means full-batch gradient descent
    pub batch_size: usize,
    /// lag window length w
    pub window: usize,
    pub seed: u64,
    /// early stop after this many epochs without validation improvement
    pub patience: usize,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![10, 10, 10],
            activation: Activation::Tanh,
            learning_rate: 0.05,
            momentum: 0.9,
            epochs: 4000,
            batch_size: 0,
            window: 3,
            seed: 0,
            patience: 400,
        }
    }
}

/// Which part of a dataset to address.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

/// Sliding-window rows grouped by their source trajectory; the
/// train/validation/test split is by whole trajectories so no window from
/// a test run ever appears in training.
#[derive(Debug, Clone)]
pub struct LagDataset {
    pub window: usize,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    train_idx: Vec<usize>,
    val_idx: Vec<usize>,
    test_idx: Vec<usize>,
}

impl LagDataset {
    pub fn rows(&self, split: Split) -> (Vec<&[f64]>, Vec<f64>) {
        let idx = match split {
            Split::Train => &self.train_idx,
            Split::Validation => &self.val_idx,
            Split::Test => &self.test_idx,
        };
        (
            idx.iter().map(|&i| self.inputs[i].as_slice()).collect(),
            idx.iter().map(|&i| self.targets[i]).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// min/max over every value in the dataset (inputs and targets).
    fn value_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &self.inputs {
            for &v in row {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        for &v in &self.targets {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !(hi > lo) {
            // constant data: keep the map well defined
            (lo - 0.5, lo + 0.5)
        } else {
            (lo, hi)
        }
    }
}

/// Windows from the mean column of solver tables.
pub fn build_lag_dataset(
    trajectories: &[TrajectoryTable],
    window: usize,
    splits: (f64, f64, f64),
    seed: u64,
) -> Result<LagDataset> {
    let series: Vec<Vec<f64>> = trajectories
        .iter()
        .map(|t| t.rows.iter().map(|r| r.mc_mean).collect())
        .collect();
    build_lag_dataset_from_series(&series, window, splits, seed)
}

/// Windows from raw value series, split by whole trajectories.
pub fn build_lag_dataset_from_series(
    series: &[Vec<f64>],
    window: usize,
    splits: (f64, f64, f64),
    seed: u64,
) -> Result<LagDataset> {
    if window == 0 {
        return Err(Error::Domain("window length must be >= 1".into()));
    }
    if series.is_empty() {
        return Err(Error::EmptyInput("no trajectories"));
    }
    let (a, b, c) = splits;
    if a < 0.0 || b < 0.0 || c < 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::Domain(format!(
            "split fractions must be nonnegative and sum to 1, got ({a}, {b}, {c})"
        )));
    }
    for s in series {
        if s.len() < window + 1 {
            return Err(Error::TooShortTrajectory {
                len: s.len(),
                window,
            });
        }
    }

    // deterministic trajectory-level shuffle
    let mut order: Vec<usize> = (0..series.len()).collect();
    let mut rng = RngStream::new(seed, 424_242).rng();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let n = series.len();
    let n_train = (a * n as f64).round() as usize;
    let n_val = (b * n as f64).round() as usize;
    let n_train = n_train.min(n);
    let n_val = n_val.min(n - n_train);

    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (rank, &traj) in order.iter().enumerate() {
        let s = &series[traj];
        for start in 0..s.len() - window {
            let row_id = inputs.len();
            inputs.push(s[start..start + window].to_vec());
            targets.push(s[start + window]);
            if rank < n_train {
                train_idx.push(row_id);
            } else if rank < n_train + n_val {
                val_idx.push(row_id);
            } else {
                test_idx.push(row_id);
            }
        }
    }
    Ok(LagDataset {
        window,
        inputs,
        targets,
        train_idx,
        val_idx,
        test_idx,
    })
}

/// Trained multilayer perceptron with its input/target normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    /// layer widths including input and output
    pub widths: Vec<usize>,
    pub activation: Activation,
    /// row-major (out x in) weight matrices, one per layer
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    /// affine data range mapped onto [-1, 1]
    norm_lo: f64,
    norm_hi: f64,
}

impl Mlp {
    fn init(window: usize, config: &MlpConfig, norm: (f64, f64)) -> Self {
        let mut widths = vec![window];
        widths.extend_from_slice(&config.hidden);
        widths.push(1);
        let mut rng = RngStream::new(config.seed, 77_001).rng();
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..widths.len() - 1 {
            let (fan_in, fan_out) = (widths[l], widths[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-limit..limit))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Mlp {
            widths,
            activation: config.activation,
            weights,
            biases,
            norm_lo: norm.0,
            norm_hi: norm.1,
        }
    }

    #[inline]
    fn normalize(&self, x: f64) -> f64 {
        2.0 * (x - self.norm_lo) / (self.norm_hi - self.norm_lo) - 1.0
    }

    #[inline]
    fn denormalize(&self, z: f64) -> f64 {
        self.norm_lo + (z + 1.0) * (self.norm_hi - self.norm_lo) / 2.0
    }

    pub fn window(&self) -> usize {
        self.widths[0]
    }

    /// forward pass in normalized coordinates
    fn forward_normalized(&self, x: &[f64]) -> f64 {
        let n_layers = self.weights.len();
        let mut a: Vec<f64> = x.to_vec();
        for l in 0..n_layers {
            let (nin, nout) = (self.widths[l], self.widths[l + 1]);
            let mut z = self.biases[l].clone();
            for o in 0..nout {
                let row = &self.weights[l][o * nin..(o + 1) * nin];
                z[o] += row.iter().zip(&a).map(|(w, v)| w * v).sum::<f64>();
            }
            if l + 1 < n_layers {
                for v in z.iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
            a = z;
        }
        a[0]
    }

    /// One-step prediction from a raw-valued window.
    pub fn predict(&self, window: &[f64]) -> f64 {
        assert_eq!(window.len(), self.window(), "window length mismatch");
        let x: Vec<f64> = window.iter().map(|&v| self.normalize(v)).collect();
        self.denormalize(self.forward_normalized(&x))
    }

    /// Mean squared error on raw values.
    pub fn mse(&self, inputs: &[&[f64]], targets: &[f64]) -> f64 {
        if inputs.is_empty() {
            return 0.0;
        }
        inputs
            .iter()
            .zip(targets)
            .map(|(x, &y)| {
                let p = self.predict(x);
                (p - y) * (p - y)
            })
            .sum::<f64>()
            / inputs.len() as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("bad model JSON: {e}")))
    }

    /// Loss and full gradient on a normalized batch; exposed so the
    /// finite-difference check can talk to the exact training objective.
    pub fn loss_and_gradient(
        &self,
        inputs: &[Vec<f64>],
        targets: &[f64],
    ) -> (f64, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let n_layers = self.weights.len();
        let mut gw: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let mut gb: Vec<Vec<f64>> = self.biases.iter().map(|b| vec![0.0; b.len()]).collect();
        let mut loss = 0.0;
        let n = inputs.len() as f64;

        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        for (x, &y) in inputs.iter().zip(targets) {
            acts.clear();
            acts.push(x.clone());
            for l in 0..n_layers {
                let (nin, nout) = (self.widths[l], self.widths[l + 1]);
                let prev = &acts[l];
                let mut z = self.biases[l].clone();
                for o in 0..nout {
                    let row = &self.weights[l][o * nin..(o + 1) * nin];
                    z[o] += row.iter().zip(prev).map(|(w, v)| w * v).sum::<f64>();
                }
                if l + 1 < n_layers {
                    for v in z.iter_mut() {
                        *v = self.activation.apply(*v);
                    }
                }
                acts.push(z);
            }
            let out = acts[n_layers][0];
            let err = out - y;
            loss += err * err / n;

            // backward
            let mut delta = vec![2.0 * err / n];
            for l in (0..n_layers).rev() {
                let (nin, nout) = (self.widths[l], self.widths[l + 1]);
                let prev = &acts[l];
                for o in 0..nout {
                    gb[l][o] += delta[o];
                    let grow = &mut gw[l][o * nin..(o + 1) * nin];
                    for (g, v) in grow.iter_mut().zip(prev) {
                        *g += delta[o] * v;
                    }
                }
                if l > 0 {
                    let mut next = vec![0.0; nin];
                    for o in 0..nout {
                        let row = &self.weights[l][o * nin..(o + 1) * nin];
                        for (i, w) in row.iter().enumerate() {
                            next[i] += w * delta[o];
                        }
                    }
                    for (i, v) in next.iter_mut().enumerate() {
                        *v *= self.activation.derivative_from_value(acts[l][i]);
                    }
                    delta = next;
                }
            }
        }
        (loss, gw, gb)
    }
}

/// Per-epoch loss record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train: Vec<f64>,
    pub validation: Vec<f64>,
}

impl TrainHistory {
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "epoch,train_mse,val_mse")?;
        for (i, (tr, va)) in self.train.iter().zip(&self.validation).enumerate() {
            writeln!(w, "{i},{tr:.16e},{va:.16e}")?;
        }
        Ok(())
    }
}

/// Full-batch gradient descent with momentum, validation-based early
/// stopping, and a divergence guard. Deterministic for a fixed seed.
pub fn train(config: &MlpConfig, data: &LagDataset) -> Result<(Mlp, TrainHistory)> {
    if data.window != config.window {
        return Err(Error::Domain(format!(
            "dataset window {} does not match config window {}",
            data.window, config.window
        )));
    }
    let (train_x_raw, train_y_raw) = data.rows(Split::Train);
    let (val_x_raw, val_y_raw) = data.rows(Split::Validation);
    if train_x_raw.is_empty() {
        return Err(Error::EmptyInput("empty training split"));
    }

    let norm = data.value_range();
    let mut model = Mlp::init(config.window, config, norm);
    let normalize_rows = |rows: &[&[f64]]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| model.normalize(v)).collect())
            .collect()
    };
    let train_x = normalize_rows(&train_x_raw);
    let train_y: Vec<f64> = train_y_raw.iter().map(|&v| model.normalize(v)).collect();
    let val_x = normalize_rows(&val_x_raw);
    let val_y: Vec<f64> = val_y_raw.iter().map(|&v| model.normalize(v)).collect();

    let mut vel_w: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut vel_b: Vec<Vec<f64>> = model.biases.iter().map(|b| vec![0.0; b.len()]).collect();

    let mut history = TrainHistory {
        train: Vec::new(),
        validation: Vec::new(),
    };
    let mut initial_loss = None;
    let mut diverge_streak = 0;
    let mut best_val = f64::INFINITY;
    let mut best_weights: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = None;
    let mut stall = 0;

    for epoch in 0..config.epochs {
        let (loss, gw, gb) = model.loss_and_gradient(&train_x, &train_y);
        let initial = *initial_loss.get_or_insert(loss.max(1e-300));
        if loss > 10.0 * initial {
            diverge_streak += 1;
            if diverge_streak >= 5 {
                return Err(Error::TrainingDiverged {
                    epoch,
                    loss,
                    initial,
                });
            }
        } else {
            diverge_streak = 0;
        }

        for l in 0..model.weights.len() {
            for (i, g) in gw[l].iter().enumerate() {
                vel_w[l][i] = config.momentum * vel_w[l][i] - config.learning_rate * g;
                model.weights[l][i] += vel_w[l][i];
            }
            for (i, g) in gb[l].iter().enumerate() {
                vel_b[l][i] = config.momentum * vel_b[l][i] - config.learning_rate * g;
                model.biases[l][i] += vel_b[l][i];
            }
        }

        let val_loss = if val_x.is_empty() {
            loss
        } else {
            batch_mse_normalized(&model, &val_x, &val_y)
        };
        history.train.push(loss);
        history.validation.push(val_loss);

        if val_loss < best_val * (1.0 - 1e-12) {
            best_val = val_loss;
            best_weights = Some((model.weights.clone(), model.biases.clone()));
            stall = 0;
        } else {
            stall += 1;
            if stall >= config.patience {
                break;
            }
        }
    }
    if let Some((w, b)) = best_weights {
        model.weights = w;
        model.biases = b;
    }
    Ok((model, history))
}

fn batch_mse_normalized(model: &Mlp, inputs: &[Vec<f64>], targets: &[f64]) -> f64 {
    inputs
        .iter()
        .zip(targets)
        .map(|(x, &y)| {
            let p = model.forward_normalized(x);
            (p - y) * (p - y)
        })
        .sum::<f64>()
        / inputs.len() as f64
}

/// Feed predictions back as inputs for `steps` steps.
pub fn predict_rollout(model: &Mlp, seed_window: &[f64], steps: usize) -> Vec<f64> {
    assert_eq!(seed_window.len(), model.window(), "window length mismatch");
    let mut window = seed_window.to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let next = model.predict(&window);
        out.push(next);
        window.rotate_left(1);
        let last = window.len() - 1;
        window[last] = next;
    }
    out
}

// ---------------------------------------------------------------------------
// trajectory generation and the memory-length experiment
// ---------------------------------------------------------------------------

/// How to simulate the training corpus.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SurrogateDataSpec {
    pub n_trajectories: usize,
    pub grid_points: usize,
    pub t_max: f64,
    pub m: usize,
    pub seed: u64,
}

impl Default for SurrogateDataSpec {
    fn default() -> Self {
        SurrogateDataSpec {
            n_trajectories: 50,
            grid_points: 100,
            t_max: 5.0,
            m: 20_000,
            seed: 0,
        }
    }
}

/// Monte Carlo trajectories of `base` with the initial value redrawn
/// uniformly on (0, 1) per trajectory.
pub fn generate_training_trajectories(
    base: &LinearFdeProblem,
    spec: &SurrogateDataSpec,
) -> Result<Vec<Vec<f64>>> {
    if spec.n_trajectories == 0 {
        return Err(Error::EmptyInput("n_trajectories"));
    }
    let grid = TimeGrid::linspace_open(spec.t_max, spec.grid_points)?;
    let mut ic_rng = RngStream::new(spec.seed, 880_000).rng();
    let y0s: Vec<f64> = (0..spec.n_trajectories)
        .map(|_| ic_rng.gen::<f64>())
        .collect();
    y0s.par_iter()
        .enumerate()
        .map(|(i, &y0)| {
            let mut prob = base.clone();
            prob.init[0] = y0;
            let opts = McOptions {
                m: spec.m,
                seed: spec
                    .seed
                    .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .wrapping_add(i as u64 + 1),
                ..Default::default()
            };
            let est = solve_mc(&prob, &grid, &opts)?;
            Ok(est.iter().map(|e| e.mean).collect())
        })
        .collect()
}

/// One row of the memory-length table.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MemoryRow {
    pub beta: f64,
    pub window: usize,
    pub test_mse: f64,
}

/// Measured test error by (order, window length); the single-lag row of a
/// classical family sits near the best, fractional families degrade as
/// the window shrinks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryReport {
    pub rows: Vec<MemoryRow>,
}

impl MemoryReport {
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "beta,window,test_mse")?;
        for r in &self.rows {
            writeln!(w, "{},{},{:.16e}", r.beta, r.window, r.test_mse)?;
        }
        Ok(())
    }

    /// test MSE at window w divided by the best MSE over all windows,
    /// for one order.
    pub fn ratio_to_best(&self, beta: f64, window: usize) -> Option<f64> {
        let best = self
            .rows
            .iter()
            .filter(|r| r.beta == beta)
            .map(|r| r.test_mse)
            .fold(f64::INFINITY, f64::min);
        let at = self
            .rows
            .iter()
            .find(|r| r.beta == beta && r.window == window)?
            .test_mse;
        Some(at / best)
    }
}

/// Train one surrogate per (order, window) and tabulate held-out error.
pub fn memory_length_experiment(
    base: &LinearFdeProblem,
    betas: &[f64],
    lags: &[usize],
    data_spec: &SurrogateDataSpec,
    config: &MlpConfig,
) -> Result<MemoryReport> {
    if lags.is_empty() {
        return Err(Error::EmptyInput("lag set"));
    }
    if betas.is_empty() {
        return Err(Error::EmptyInput("beta set"));
    }
    let mut rows = Vec::new();
    for &bv in betas {
        let beta = FracOrder::new(bv)?;
        let mut prob = base.clone();
        prob.beta = beta;
        let series = generate_training_trajectories(&prob, data_spec)?;
        for &w in lags {
            let data =
                build_lag_dataset_from_series(&series, w, (0.6, 0.2, 0.2), data_spec.seed)?;
            let cfg = MlpConfig {
                window: w,
                ..config.clone()
            };
            let (model, _) = train(&cfg, &data)?;
            let (tx, ty) = data.rows(Split::Test);
            rows.push(MemoryRow {
                beta: bv,
                window: w,
                test_mse: model.mse(&tx, &ty),
            });
        }
    }
    Ok(MemoryReport { rows })
}
