//! Loss functions, their negative gradients, and 1-D minimizers used for the
//! ensemble's starting constant and per-leaf line searches.

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Task};
use crate::error::{config, domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Squared,
    Huber,
    Ramp,
}

impl std::str::FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "squared" => Ok(LossKind::Squared),
            "huber" => Ok(LossKind::Huber),
            "ramp" => Ok(LossKind::Ramp),
            other => Err(format!("unknown loss '{other}' (expected squared|huber|ramp)")),
        }
    }
}

/// Loss kind plus the Huber parameters. `delta` is a working value that the
/// fitting code refreshes from current residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub alpha: f64,
    pub delta: f64,
}

pub const DEFAULT_HUBER_ALPHA: f64 = 0.9;

impl LossSpec {
    pub fn squared() -> Self {
        LossSpec {
            kind: LossKind::Squared,
            alpha: 1.0,
            delta: 0.0,
        }
    }

    pub fn huber(alpha: f64) -> Self {
        LossSpec {
            kind: LossKind::Huber,
            alpha,
            delta: 0.0,
        }
    }

    pub fn ramp() -> Self {
        LossSpec {
            kind: LossKind::Ramp,
            alpha: 1.0,
            delta: 0.0,
        }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        LossSpec { delta, ..self }
    }

    pub fn validate(&self, task: Task) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return config(format!("huber alpha {} outside (0, 1]", self.alpha));
        }
        if !(self.delta >= 0.0) {
            return config(format!("huber delta {} is negative", self.delta));
        }
        match (self.kind, task) {
            (LossKind::Ramp, Task::BinaryClassification) => Ok(()),
            (LossKind::Ramp, Task::Regression) => {
                config("ramp loss requires a binary classification task")
            }
            (_, Task::BinaryClassification) => {
                config("squared and huber losses require a regression task")
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, y: f64, f: f64) -> f64 {
        match self.kind {
            LossKind::Squared => (y - f).powi(2),
            LossKind::Huber => {
                let r = (y - f).abs();
                if r < self.delta {
                    0.5 * r * r
                } else {
                    self.delta * (r - 0.5 * self.delta)
                }
            }
            LossKind::Ramp => (y - clip_unit(f)).powi(2),
        }
    }

    /// `-dL/df`. For the ramp loss outside (-1, 1) the subgradient is 0 when
    /// `f - y` points to the clipped side, otherwise the interior gradient.
    pub fn negative_gradient(&self, y: f64, f: f64) -> f64 {
        match self.kind {
            LossKind::Squared => 2.0 * (y - f),
            LossKind::Huber => {
                let r = y - f;
                if r.abs() < self.delta {
                    r
                } else {
                    self.delta * r.signum()
                }
            }
            LossKind::Ramp => {
                if f > -1.0 && f < 1.0 {
                    2.0 * (y - f)
                } else {
                    let side = f.signum();
                    if (f - y).signum() == side {
                        0.0
                    } else {
                        2.0 * (y - clip_unit(f))
                    }
                }
            }
        }
    }
}

#[inline]
pub fn clip_unit(f: f64) -> f64 {
    f.clamp(-1.0, 1.0)
}

/// The `alpha` quantile of absolute residuals.
pub fn huber_delta(residuals: &[f64], alpha: f64) -> Result<f64> {
    let abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
    dataset::quantile(&abs, alpha)
}

/// `argmin_c sum L(y_i, c)`. For Huber the transition point is taken from
/// the absolute deviations about the median.
pub fn constant_minimizer(spec: &LossSpec, y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return domain("constant minimizer of an empty response");
    }
    match spec.kind {
        LossKind::Squared => Ok(dataset::mean(y)),
        LossKind::Ramp => Ok(clip_unit(dataset::mean(y))),
        LossKind::Huber => {
            let med = dataset::median(y)?;
            let dev: Vec<f64> = y.iter().map(|v| v - med).collect();
            let delta = huber_delta(&dev, spec.alpha)?;
            let zeros = vec![0.0; y.len()];
            Ok(line_search(&spec.with_delta(delta), y, &zeros))
        }
    }
}

/// `argmin_c sum_i L(y_i, f_i + c)`.
pub fn line_search(spec: &LossSpec, y: &[f64], f: &[f64]) -> f64 {
    debug_assert_eq!(y.len(), f.len());
    if y.is_empty() {
        return 0.0;
    }
    match spec.kind {
        LossKind::Squared => y.iter().zip(f).map(|(a, b)| a - b).sum::<f64>() / y.len() as f64,
        LossKind::Huber => huber_line_search(spec.delta, y, f),
        LossKind::Ramp => ramp_line_search(y, f),
    }
}

fn huber_line_search(delta: f64, y: &[f64], f: &[f64]) -> f64 {
    let r: Vec<f64> = y.iter().zip(f).map(|(a, b)| a - b).collect();
    if delta == 0.0 {
        // degenerate to absolute loss
        return dataset::median(&r).unwrap_or(0.0);
    }
    let objective = |c: f64| {
        r.iter()
            .map(|&ri| {
                let a = (ri - c).abs();
                if a < delta {
                    0.5 * a * a
                } else {
                    delta * (a - 0.5 * delta)
                }
            })
            .sum::<f64>()
    };
    let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    golden_section(objective, lo, hi, 1e-8 * (1.0 + (hi - lo)))
}

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    if b - a <= tol {
        return 0.5 * (a + b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Exact minimizer of `sum (y_i - clip(f_i + c))^2`: the objective is
/// piecewise quadratic in `c` with breakpoints at `+-1 - f_i`, so each piece
/// is minimized in closed form. Ties go to the smallest `|c|`.
fn ramp_line_search(y: &[f64], f: &[f64]) -> f64 {
    // events: (c, point index, entering interior?)
    let mut events: Vec<(f64, usize, bool)> = Vec::with_capacity(2 * y.len());
    for (i, &fi) in f.iter().enumerate() {
        events.push((-1.0 - fi, i, true));
        events.push((1.0 - fi, i, false));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.2.cmp(&a.2)));

    // all points start clipped low (c -> -inf)
    let mut n_int = 0.0;
    let mut sum_r = 0.0;
    let mut sum_r2 = 0.0;
    let mut clipped: f64 = y.iter().map(|&yi| (yi + 1.0).powi(2)).sum();

    let mut best_c: f64 = 0.0;
    let mut best_v = f64::INFINITY;
    let mut consider = |lo: f64, hi: f64, n: f64, s: f64, s2: f64, k: f64| {
        // interior points contribute (r - c)^2, clipped ones the constant k
        let c = if n > 0.0 { s / n } else { 0.0 }.clamp(lo, hi);
        let v = s2 - 2.0 * c * s + n * c * c + k;
        let tol = 1e-12 * (1.0 + best_v.abs().min(1e300));
        if v < best_v - tol || ((v - best_v).abs() <= tol && c.abs() < best_c.abs()) {
            best_v = v;
            best_c = c;
        }
    };

    let mut lo = f64::NEG_INFINITY;
    for &(c, i, entering) in &events {
        if c > lo {
            consider(lo, c, n_int, sum_r, sum_r2, clipped);
        }
        let r = y[i] - f[i];
        if entering {
            clipped -= (y[i] + 1.0).powi(2);
            n_int += 1.0;
            sum_r += r;
            sum_r2 += r * r;
        } else {
            n_int -= 1.0;
            sum_r -= r;
            sum_r2 -= r * r;
            clipped += (y[i] - 1.0).powi(2);
        }
        lo = c;
    }
    consider(lo, f64::INFINITY, 0.0, 0.0, 0.0, clipped);
    best_c
}
