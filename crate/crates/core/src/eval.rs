//! Evaluation harness: logistic regression over the selected features plus
//! accuracy, equalized-odds, and demographic-parity metrics, aggregated over
//! seeded 70/30 train/test runs.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ci::SignificanceConfig;
use crate::column::{ColumnKind, FeatureId};
use crate::data::{Dataset, StreamOrder};
use crate::engine::StreamEngine;
use crate::select::{SelectOptions, Variant};

pub const DEFAULT_LEARNING_RATE: f64 = 0.1;
pub const DEFAULT_L2: f64 = 1e-3;
pub const DEFAULT_MAX_EPOCHS: usize = 2000;
const LOSS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("logistic loss became non-finite (diverged; lower the learning rate)")]
    NonFiniteLoss,
    #[error("design matrix rows ({rows}) do not match label length ({labels})")]
    ShapeMismatch { rows: usize, labels: usize },
}

/// Logistic-regression weights; the intercept is the last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub weights: Vec<f64>,
    pub threshold: f64,
}

impl TrainedModel {
    /// Predicted probability for one row (without intercept column).
    pub fn probability(&self, row: &[f64]) -> f64 {
        let mut z = self.weights[self.weights.len() - 1];
        for (w, v) in self.weights.iter().zip(row) {
            z += w * v;
        }
        sigmoid(z)
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter()
            .map(|r| if self.probability(r) >= self.threshold { 1.0 } else { 0.0 })
            .collect()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean log loss plus L2 penalty over the non-intercept weights.
/// `rows` excludes the intercept column; weights carry it last.
pub fn logistic_loss(weights: &[f64], rows: &[Vec<f64>], y: &[f64], l2: f64) -> f64 {
    let n = rows.len() as f64;
    let mut loss = 0.0;
    for (row, &target) in rows.iter().zip(y) {
        let mut z = weights[weights.len() - 1];
        for (w, v) in weights.iter().zip(row) {
            z += w * v;
        }
        // log(1 + e^z) - t*z, computed stably.
        let log1pe = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
        loss += log1pe - target * z;
    }
    loss /= n;
    for w in &weights[..weights.len() - 1] {
        loss += 0.5 * l2 * w * w;
    }
    loss
}

/// Analytic gradient of `logistic_loss` with respect to the weights.
pub fn logistic_gradient(weights: &[f64], rows: &[Vec<f64>], y: &[f64], l2: f64) -> Vec<f64> {
    let n = rows.len() as f64;
    let d = weights.len();
    let mut grad = vec![0.0; d];
    for (row, &target) in rows.iter().zip(y) {
        let mut z = weights[d - 1];
        for (w, v) in weights.iter().zip(row) {
            z += w * v;
        }
        let err = sigmoid(z) - target;
        for (g, v) in grad.iter_mut().zip(row) {
            *g += err * v;
        }
        grad[d - 1] += err;
    }
    for g in grad.iter_mut() {
        *g /= n;
    }
    for (g, w) in grad.iter_mut().zip(&weights[..d - 1]) {
        *g += l2 * w;
    }
    grad
}

/// Full-batch gradient descent with a fixed step size. Stops when the loss
/// change drops below 1e-8 or the epoch budget is exhausted.
pub fn train_logistic(
    rows: &[Vec<f64>],
    y: &[f64],
    l2: f64,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<TrainedModel, EvalError> {
    if rows.len() != y.len() {
        return Err(EvalError::ShapeMismatch { rows: rows.len(), labels: y.len() });
    }
    let d = rows.first().map_or(0, Vec::len) + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights: Vec<f64> = (0..d).map(|_| rng.random_range(-0.01..0.01)).collect();
    if y.is_empty() {
        return Ok(TrainedModel { weights, threshold: 0.5 });
    }
    let mut prev = logistic_loss(&weights, rows, y, l2);
    if !prev.is_finite() {
        return Err(EvalError::NonFiniteLoss);
    }
    for _ in 0..epochs {
        let grad = logistic_gradient(&weights, rows, y, l2);
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= lr * g;
        }
        let loss = logistic_loss(&weights, rows, y, l2);
        if !loss.is_finite() {
            return Err(EvalError::NonFiniteLoss);
        }
        if (prev - loss).abs() < LOSS_TOL {
            break;
        }
        prev = loss;
    }
    Ok(TrainedModel { weights, threshold: 0.5 })
}

pub fn accuracy(pred: &[f64], y: &[f64]) -> f64 {
    if pred.is_empty() {
        return 0.0;
    }
    let hits = pred.iter().zip(y).filter(|(p, t)| p == t).count();
    hits as f64 / pred.len() as f64
}

/// Equalized odds plus a flag for empty (s, y) strata, which contribute a
/// rate of 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EoResult {
    pub value: f64,
    pub empty_stratum: bool,
}

/// max over y ∈ {0,1} of |P(pred=1 | s=0, Y=y) − P(pred=1 | s=1, Y=y)|.
pub fn equalized_odds(pred: &[f64], y: &[f64], s: &[f64]) -> EoResult {
    let mut empty = false;
    let mut rate = |sv: f64, yv: f64| -> f64 {
        let mut total = 0usize;
        let mut pos = 0usize;
        for ((&p, &t), &g) in pred.iter().zip(y).zip(s) {
            if g == sv && t == yv {
                total += 1;
                if p == 1.0 {
                    pos += 1;
                }
            }
        }
        if total == 0 {
            empty = true;
            0.0
        } else {
            pos as f64 / total as f64
        }
    };
    let mut gap = 0.0f64;
    for yv in [0.0, 1.0] {
        gap = gap.max((rate(0.0, yv) - rate(1.0, yv)).abs());
    }
    EoResult { value: gap, empty_stratum: empty }
}

/// |P(pred=1 | s=0) − P(pred=1 | s=1)|; empty groups contribute rate 0.
pub fn demographic_parity(pred: &[f64], s: &[f64]) -> f64 {
    let rate = |sv: f64| -> f64 {
        let mut total = 0usize;
        let mut pos = 0usize;
        for (&p, &g) in pred.iter().zip(s) {
            if g == sv {
                total += 1;
                if p == 1.0 {
                    pos += 1;
                }
            }
        }
        if total == 0 {
            0.0
        } else {
            pos as f64 / total as f64
        }
    };
    (rate(0.0) - rate(1.0)).abs()
}

/// mean ± population std over runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.max(0.0).sqrt() }
    }
}

/// Aggregated evaluation for one variant over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub variant: String,
    pub runs: usize,
    pub accuracy: Aggregate,
    pub eo: Aggregate,
    pub dp: Aggregate,
    /// Mean selected-feature count.
    pub nsf: f64,
    /// nsf / total feature count.
    pub rsf: f64,
    /// Whether any run had an empty (s, y) stratum in the EO computation.
    pub empty_stratum: bool,
    /// Mean selection wall time. Excluded from JSON so reports stay
    /// byte-identical across repeated invocations.
    #[serde(skip)]
    pub wall_time_s: f64,
}

/// Per-variant outcome: a full report, or the error that stopped it.
/// Errors in one variant never abort the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantOutcome {
    Report(FairnessReport),
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub runs: usize,
    pub alpha: f64,
    pub max_cond_size: usize,
    pub order: String,
    pub variants: BTreeMap<String, VariantOutcome>,
}

impl BenchmarkReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn any_error(&self) -> bool {
        self.variants.values().any(|v| matches!(v, VariantOutcome::Error(_)))
    }

    /// Plain-text table, metrics as rows and variants as columns.
    pub fn to_table(&self) -> String {
        let names: Vec<&String> = self.variants.keys().collect();
        let cell = |v: &VariantOutcome, f: &dyn Fn(&FairnessReport) -> String| match v {
            VariantOutcome::Report(r) => f(r),
            VariantOutcome::Error(_) => "error".to_string(),
        };
        let mut rows: Vec<Vec<String>> = vec![];
        let mut header = vec!["metric".to_string()];
        header.extend(names.iter().map(|n| n.to_string()));
        rows.push(header);
        let metrics: [(&str, Box<dyn Fn(&FairnessReport) -> String>); 5] = [
            ("acc", Box::new(|r: &FairnessReport| format!("{:.3}±{:.3}", r.accuracy.mean, r.accuracy.std))),
            ("eo", Box::new(|r: &FairnessReport| format!("{:.3}±{:.3}", r.eo.mean, r.eo.std))),
            ("dp", Box::new(|r: &FairnessReport| format!("{:.3}±{:.3}", r.dp.mean, r.dp.std))),
            ("nsf", Box::new(|r: &FairnessReport| format!("{:.1}", r.nsf))),
            ("rsf", Box::new(|r: &FairnessReport| format!("{:.3}", r.rsf))),
        ];
        for (name, f) in &metrics {
            let mut row = vec![name.to_string()];
            for vn in &names {
                row.push(cell(&self.variants[*vn], f));
            }
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            for (c, cell) in row.iter().enumerate() {
                if c > 0 {
                    out.push_str("  ");
                }
                out.push_str(&format!("{:<width$}", cell, width = widths[c]));
            }
            out.push('\n');
        }
        out
    }
}

/// Everything the benchmark needs beyond the dataset itself.
#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub cfg: SignificanceConfig,
    pub order: StreamOrder,
    pub kind: ColumnKind,
    pub runs: usize,
    pub opts: SelectOptions,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            cfg: SignificanceConfig::default(),
            order: StreamOrder::Natural,
            kind: ColumnKind::Continuous,
            runs: 5,
            opts: SelectOptions::default(),
        }
    }
}

fn split_rows(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    use rand::seq::SliceRandom;
    let mut rows: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rows.shuffle(&mut rng);
    let cut = (n * 7) / 10;
    let (train, test) = rows.split_at(cut);
    (train.to_vec(), test.to_vec())
}

fn design_rows(ds: &Dataset, selected: &[FeatureId]) -> Vec<Vec<f64>> {
    (0..ds.n)
        .map(|row| selected.iter().map(|&id| ds.feature(id).values[row]).collect())
        .collect()
}

/// Run every variant over `runs` seeded 70/30 splits; selection sees only
/// the training split. A failing variant yields an error marker instead of
/// aborting the rest.
pub fn benchmark(
    dataset: &Dataset,
    variants: &[Variant],
    bench: &BenchmarkConfig,
) -> BenchmarkReport {
    // One graph build per run, shared by all variants.
    let mut run_states: Vec<Result<StreamEngineRun, String>> = Vec::new();
    for run in 0..bench.runs {
        let (train_rows, test_rows) = split_rows(dataset.n, run as u64);
        let train = dataset.take_rows(&train_rows);
        let test = dataset.take_rows(&test_rows);
        let state = StreamEngine::run(&train, bench.order, bench.kind, bench.cfg.clone())
            .map(|engine| StreamEngineRun { engine, train, test })
            .map_err(|e| e.to_string());
        run_states.push(state);
    }

    let mut outcomes = BTreeMap::new();
    for &variant in variants {
        let outcome = run_variant(dataset, variant, &mut run_states, bench);
        outcomes.insert(variant.name().to_string(), outcome);
    }
    BenchmarkReport {
        runs: bench.runs,
        alpha: bench.cfg.alpha,
        max_cond_size: bench.cfg.max_cond_size,
        order: bench.order.to_string(),
        variants: outcomes,
    }
}

fn run_variant(
    dataset: &Dataset,
    variant: Variant,
    run_states: &mut [Result<StreamEngineRun, String>],
    bench: &BenchmarkConfig,
) -> VariantOutcome {
    let mut accs = Vec::new();
    let mut eos = Vec::new();
    let mut dps = Vec::new();
    let mut nsfs = Vec::new();
    let mut empty_stratum = false;
    let mut wall = 0.0;
    for state in run_states.iter_mut() {
        let state = match state {
            Ok(s) => s,
            Err(e) => return VariantOutcome::Error(e.clone()),
        };
        let started = Instant::now();
        let snap = match state.engine.select(variant, &bench.opts) {
            Ok(s) => s,
            Err(e) => return VariantOutcome::Error(e.to_string()),
        };
        wall += started.elapsed().as_secs_f64();
        let selected: Vec<FeatureId> = snap.selected.iter().copied().collect();
        let train_x = design_rows(&state.train, &selected);
        let model = match train_logistic(
            &train_x,
            &state.train.label.values,
            DEFAULT_L2,
            DEFAULT_MAX_EPOCHS,
            DEFAULT_LEARNING_RATE,
            0,
        ) {
            Ok(m) => m,
            Err(e) => return VariantOutcome::Error(e.to_string()),
        };
        let test_x = design_rows(&state.test, &selected);
        let pred = model.predict(&test_x);
        accs.push(accuracy(&pred, &state.test.label.values));
        let eo = equalized_odds(&pred, &state.test.label.values, &state.test.protected.values);
        empty_stratum |= eo.empty_stratum;
        eos.push(eo.value);
        dps.push(demographic_parity(&pred, &state.test.protected.values));
        nsfs.push(selected.len() as f64);
    }
    let nsf = Aggregate::of(&nsfs).mean;
    VariantOutcome::Report(FairnessReport {
        variant: variant.name().to_string(),
        runs: bench.runs,
        accuracy: Aggregate::of(&accs),
        eo: Aggregate::of(&eos),
        dp: Aggregate::of(&dps),
        nsf,
        rsf: if dataset.d() == 0 { 0.0 } else { nsf / dataset.d() as f64 },
        empty_stratum,
        wall_time_s: wall / bench.runs.max(1) as f64,
    })
}

/// Per-run engine + split, built once and reused across variants.
pub struct StreamEngineRun {
    pub engine: StreamEngine,
    pub train: Dataset,
    pub test: Dataset,
}
