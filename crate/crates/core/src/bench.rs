//! Synthetic benchmark generators and evaluation metrics.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{self, Column, Dataset, Task};
use crate::error::{domain, Result};
use crate::model::sign_label;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Ten-level discrete inputs with a three-way interaction, a two-way
    /// interaction, a nonlinear additive term and two linear terms.
    DiscreteTarget,
    /// Uniform inputs, a product of five Gaussian bumps plus thirty linear
    /// terms.
    LinearPlusBumps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n_rows: usize,
    pub n_cols: usize,
    /// Ratio of the target's standard deviation to the noise's.
    pub signal_to_noise: f64,
    /// Fixed noise level; `None` calibrates it on the generated sample.
    pub sigma: Option<f64>,
    /// Square the `x4 - x5` exponent argument of the discrete target.
    pub squared_exponent: bool,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(kind: SynthKind, n_rows: usize, n_cols: usize, seed: u64) -> Self {
        SynthSpec {
            kind,
            n_rows,
            n_cols,
            signal_to_noise: 2.0,
            sigma: None,
            squared_exponent: false,
            seed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub data: Dataset,
    /// Noise-free target values.
    pub truth: Vec<f64>,
    pub sigma: f64,
}

/// `9 prod_{j<3} exp(-3 (1 - x_j)^2) - 0.8 exp(-2 (x4 - x5)) + 2 sin^2(pi x6)
/// - 2.5 (x7 - x8)`, zero-based indices.
pub fn discrete_target(x: &[f64], squared_exponent: bool) -> f64 {
    let bump: f64 = (0..3).map(|j| (-3.0 * (1.0 - x[j]).powi(2)).exp()).product();
    let d = x[3] - x[4];
    let arg = if squared_exponent { d * d } else { d };
    9.0 * bump - 0.8 * (-2.0 * arg).exp()
        + 2.0 * (std::f64::consts::PI * x[5]).sin().powi(2)
        - 2.5 * (x[6] - x[7])
}

/// `10 prod_{j<5} exp(-2 x_j^2) + sum_{j=5}^{34} x_j`, zero-based indices.
pub fn bumps_target(x: &[f64]) -> f64 {
    let bump: f64 = (0..5).map(|j| (-2.0 * x[j] * x[j]).exp()).product();
    10.0 * bump + x[5..35].iter().sum::<f64>()
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    let min_cols = match spec.kind {
        SynthKind::DiscreteTarget => 8,
        SynthKind::LinearPlusBumps => 35,
    };
    if spec.n_cols < min_cols {
        return domain(format!("generator needs at least {min_cols} columns, got {}", spec.n_cols));
    }
    if spec.n_rows < 1 {
        return domain("generator needs at least one row");
    }
    if !(spec.signal_to_noise > 0.0) {
        return domain("signal-to-noise ratio must be positive");
    }
    let mut xr = rng::stream(spec.seed, rng::STREAM_SYNTH);
    let mut cols = vec![Vec::with_capacity(spec.n_rows); spec.n_cols];
    let mut truth = Vec::with_capacity(spec.n_rows);
    let mut row = vec![0.0; spec.n_cols];
    for _ in 0..spec.n_rows {
        for v in row.iter_mut() {
            *v = match spec.kind {
                SynthKind::DiscreteTarget => xr.random_range(0..10u32) as f64 / 10.0,
                SynthKind::LinearPlusBumps => xr.random::<f64>(),
            };
        }
        truth.push(match spec.kind {
            SynthKind::DiscreteTarget => discrete_target(&row, spec.squared_exponent),
            SynthKind::LinearPlusBumps => bumps_target(&row),
        });
        for (c, v) in cols.iter_mut().zip(&row) {
            c.push(*v);
        }
    }
    let sigma = spec
        .sigma
        .unwrap_or_else(|| dataset::std_dev(&truth) / spec.signal_to_noise);
    let mut nr = rng::stream(spec.seed, rng::STREAM_NOISE);
    let y: Vec<f64> = truth
        .iter()
        .map(|f| {
            let e: f64 = StandardNormal.sample(&mut nr);
            f + sigma * e
        })
        .collect();
    let columns = cols
        .into_iter()
        .enumerate()
        .map(|(j, v)| Column::numeric(format!("x{}", j + 1), v))
        .collect();
    Ok(SynthData {
        data: Dataset::new(columns, y, Task::Regression)?,
        truth,
        sigma,
    })
}

pub fn gen_discrete_target(spec: &SynthSpec) -> Result<SynthData> {
    generate(&SynthSpec { kind: SynthKind::DiscreteTarget, ..spec.clone() })
}

pub fn gen_linear_plus_bumps(spec: &SynthSpec) -> Result<SynthData> {
    generate(&SynthSpec { kind: SynthKind::LinearPlusBumps, ..spec.clone() })
}

/// `sign(y - median(y))` labels with 0 mapped to +1. The flag reports a
/// constant response, which yields a single class.
pub fn threshold_binary(data: &Dataset) -> Result<(Dataset, bool)> {
    let y = data.response();
    let med = dataset::median(y)?;
    let labels: Vec<f64> = y.iter().map(|v| sign_label(v - med)).collect();
    let degenerate = y.iter().all(|v| *v == y[0]);
    Ok((data.with_target(labels, Task::BinaryClassification)?, degenerate))
}

fn scaled_abs_error(reference: &[f64], predictions: &[f64]) -> Result<f64> {
    if reference.is_empty() || reference.len() != predictions.len() {
        return domain("metric needs matching non-empty sequences");
    }
    let med = dataset::median(reference)?;
    let den: f64 = reference.iter().map(|v| (v - med).abs()).sum();
    if den == 0.0 {
        return domain("constant reference values give a zero denominator");
    }
    let num: f64 = reference.iter().zip(predictions).map(|(a, b)| (a - b).abs()).sum();
    Ok(num / den)
}

/// Average absolute error relative to predicting the median response.
pub fn aae(y: &[f64], predictions: &[f64]) -> Result<f64> {
    scaled_abs_error(y, predictions)
}

/// Absolute error against the noise-free target, relative to predicting its
/// median.
pub fn target_error(truth: &[f64], predictions: &[f64]) -> Result<f64> {
    scaled_abs_error(truth, predictions)
}

/// Fraction of labels that differ from `sign(F)`.
pub fn error_rate(labels: &[f64], predictions: &[f64]) -> Result<f64> {
    if labels.is_empty() || labels.len() != predictions.len() {
        return domain("metric needs matching non-empty sequences");
    }
    let wrong = labels
        .iter()
        .zip(predictions)
        .filter(|(y, f)| **y != sign_label(**f))
        .count();
    Ok(wrong as f64 / labels.len() as f64)
}

/// Each variant's error divided by the best variant's error.
pub fn comparative(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return domain("comparison needs at least two variants");
    }
    let best = errors.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(best > 0.0) {
        return domain("best error must be positive to form ratios");
    }
    Ok(errors.iter().map(|e| e / best).collect())
}
