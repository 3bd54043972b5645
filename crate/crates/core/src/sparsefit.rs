//! Lasso path over the rule/linear basis by cyclic coordinate descent, with
//! quadratic majorization for the Huber and ramp losses, and selection of the
//! penalty by k-fold cross-validation or a holdout split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset;
use crate::error::{config, domain, Result};
use crate::loss::{self, LossKind, LossSpec};
use crate::rng;

/// One fitting column: a 0/1 indicator stored as the rows where it is 1, or
/// a dense real column.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignColumn {
    Binary(Vec<u32>),
    Dense(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub n_rows: usize,
    pub columns: Vec<DesignColumn>,
}

impl Design {
    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn from_dense(columns: Vec<Vec<f64>>) -> Self {
        let n_rows = columns.first().map_or(0, Vec::len);
        Design {
            n_rows,
            columns: columns.into_iter().map(DesignColumn::Dense).collect(),
        }
    }

    /// Restriction to `rows` (sorted ascending), renumbered from 0.
    pub fn subset_rows(&self, rows: &[usize]) -> Design {
        let mut position = vec![u32::MAX; self.n_rows];
        for (p, &i) in rows.iter().enumerate() {
            position[i] = p as u32;
        }
        let columns = self
            .columns
            .iter()
            .map(|c| match c {
                DesignColumn::Binary(idx) => DesignColumn::Binary(
                    idx.iter()
                        .map(|&i| position[i as usize])
                        .filter(|&p| p != u32::MAX)
                        .collect(),
                ),
                DesignColumn::Dense(v) => DesignColumn::Dense(rows.iter().map(|&i| v[i]).collect()),
            })
            .collect();
        Design {
            n_rows: rows.len(),
            columns,
        }
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        match &self.columns[col] {
            DesignColumn::Binary(idx) => idx.binary_search(&(row as u32)).is_ok() as u8 as f64,
            DesignColumn::Dense(v) => v[row],
        }
    }

    /// `intercept + sum_k coef_k x_k` for every row.
    pub fn predict(&self, intercept: f64, coefs: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![intercept; self.n_rows];
        for &(k, a) in coefs {
            match &self.columns[k] {
                DesignColumn::Binary(idx) => {
                    for &i in idx {
                        out[i as usize] += a;
                    }
                }
                DesignColumn::Dense(v) => {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += a * x;
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Selection {
    KFold { folds: usize },
    Holdout { fraction: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub n_lambda: usize,
    pub min_ratio: f64,
    /// Explicit decreasing penalty values, overriding the geometric grid.
    pub lambdas: Option<Vec<f64>>,
    pub selection: Selection,
    /// Coordinate-descent sweeps allowed per penalty value.
    pub max_iter: usize,
    /// Convergence threshold on the largest coefficient move, measured in
    /// units of the working-response standard deviation.
    pub tol: f64,
    /// Majorization rounds per penalty value for the Huber and ramp losses.
    pub max_outer: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n_lambda: 100,
            min_ratio: 1e-3,
            lambdas: None,
            selection: Selection::KFold { folds: 10 },
            max_iter: 5000,
            tol: 1e-5,
            max_outer: 10,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_ratio > 0.0 && self.min_ratio < 1.0) {
            return config(format!("min_ratio {} outside (0, 1)", self.min_ratio));
        }
        if !(self.tol > 0.0) {
            return config("tolerance must be positive");
        }
        if self.n_lambda < 1 {
            return config("the penalty grid needs at least one value");
        }
        if let Some(l) = &self.lambdas {
            if l.is_empty() || l.iter().any(|v| !(*v >= 0.0)) {
                return config("explicit penalties must be non-negative and non-empty");
            }
        }
        match self.selection {
            Selection::KFold { folds } if folds < 2 => config("k-fold selection needs k >= 2"),
            Selection::Holdout { fraction } if !(fraction > 0.0 && fraction < 1.0) => {
                config(format!("holdout fraction {fraction} outside (0, 1)"))
            }
            _ => Ok(()),
        }
    }
}

/// Loss scaled as it enters the penalized objective: half the squared and
/// ramp losses, the Huber loss as is.
pub fn objective_loss(spec: &LossSpec, y: f64, f: f64) -> f64 {
    match spec.kind {
        LossKind::Squared | LossKind::Ramp => 0.5 * spec.eval(y, f),
        LossKind::Huber => spec.eval(y, f),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub intercept: f64,
    /// Non-zero coefficients as `(column, value)`.
    pub coefs: Vec<(usize, f64)>,
    /// Mean objective loss on the training rows.
    pub risk: f64,
    pub converged: bool,
    pub sweeps: usize,
}

impl PathPoint {
    pub fn n_nonzero(&self) -> usize {
        self.coefs.len()
    }
}

/// Least-squares coordinate descent on
/// `(1/2N) sum (z_i - a0 - x_i a)^2 + lambda |a|_1`; the Huber and ramp
/// losses are handled by refreshing the working response `z`.
///
/// The fit is held as `stored_i + shift` so that intercept moves cost O(1);
/// binary columns then only touch their own rows.
struct Solver<'a> {
    design: &'a Design,
    y: &'a [f64],
    spec: LossSpec,
    n: f64,
    coefs: Vec<f64>,
    intercept: f64,
    stored: Vec<f64>,
    shift: f64,
    z: Vec<f64>,
    /// Per column: mean and curvature `(1/N) sum (x - m)^2`.
    means: Vec<f64>,
    curv: Vec<f64>,
    col_sum: Vec<f64>,
    gram: Gram,
    objective_trace: Option<Vec<f64>>,
}

/// Cached raw cross products `sum x_a x_b` between columns that have been
/// active, stored as a full symmetric matrix; centering is applied on use.
#[derive(Default)]
struct Gram {
    cols: Vec<usize>,
    pos: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

/// Above this many cached columns active sweeps fall back to direct updates.
const GRAM_CAPACITY: usize = 4000;

impl<'a> Solver<'a> {
    fn new(design: &'a Design, y: &'a [f64], spec: LossSpec) -> Result<Self> {
        let f0 = loss::constant_minimizer(&spec, y)?;
        let n = y.len();
        let mut s = Solver {
            design,
            y,
            spec,
            n: n as f64,
            coefs: vec![0.0; design.n_cols()],
            intercept: f0,
            stored: vec![f0; n],
            shift: 0.0,
            z: y.to_vec(),
            means: Vec::new(),
            curv: Vec::new(),
            col_sum: Vec::new(),
            gram: Gram {
                pos: vec![usize::MAX; design.n_cols()],
                ..Gram::default()
            },
            objective_trace: None,
        };
        s.column_stats();
        Ok(s)
    }

    fn fit_value(&self, i: usize) -> f64 {
        self.stored[i] + self.shift
    }

    fn fold_shift(&mut self) {
        if self.shift != 0.0 {
            for v in &mut self.stored {
                *v += self.shift;
            }
            self.shift = 0.0;
        }
    }

    fn column_stats(&mut self) {
        let k = self.design.n_cols();
        self.means = vec![0.0; k];
        self.curv = vec![0.0; k];
        self.col_sum = vec![0.0; k];
        for (c, col) in self.design.columns.iter().enumerate() {
            let (sx, sx2) = match col {
                DesignColumn::Binary(idx) => (idx.len() as f64, idx.len() as f64),
                DesignColumn::Dense(v) => (v.iter().sum(), v.iter().map(|x| x * x).sum()),
            };
            let m = sx / self.n;
            self.means[c] = m;
            self.col_sum[c] = sx;
            self.curv[c] = ((sx2 - self.n * m * m) / self.n).max(0.0);
        }
    }

    /// Re-optimize the intercept for the current working response.
    fn center(&mut self) {
        let c = (0..self.y.len())
            .map(|i| self.z[i] - self.fit_value(i))
            .sum::<f64>()
            / self.n;
        self.intercept += c;
        self.shift += c;
    }

    fn working_sd(&self) -> f64 {
        let m = self.z.iter().sum::<f64>() / self.n;
        let v = self.z.iter().map(|z| (z - m).powi(2)).sum::<f64>() / self.n;
        if v > 0.0 { v.sqrt() } else { 1.0 }
    }

    /// `(1/N) sum_i x_ik r_i` with `r = z - fit`.
    fn gradient(&self, k: usize) -> f64 {
        let g = match &self.design.columns[k] {
            DesignColumn::Binary(idx) => {
                let mut s = 0.0;
                for &i in idx {
                    let i = i as usize;
                    s += self.z[i] - self.stored[i];
                }
                s - self.shift * self.col_sum[k]
            }
            DesignColumn::Dense(v) => {
                let mut s = 0.0;
                for (i, &x) in v.iter().enumerate() {
                    s += x * (self.z[i] - self.stored[i]);
                }
                s - self.shift * self.col_sum[k]
            }
        };
        g / self.n
    }

    fn update(&mut self, k: usize, lambda: f64) -> f64 {
        let h = self.curv[k];
        if h <= 1e-14 {
            return 0.0;
        }
        let old = self.coefs[k];
        let u = h * old + self.gradient(k);
        let new = soft_threshold(u, lambda, h);
        let delta = new - old;
        if delta == 0.0 {
            return 0.0;
        }
        self.coefs[k] = new;
        match &self.design.columns[k] {
            DesignColumn::Binary(idx) => {
                for &i in idx {
                    self.stored[i as usize] += delta;
                }
            }
            DesignColumn::Dense(v) => {
                for (s, &x) in self.stored.iter_mut().zip(v) {
                    *s += delta * x;
                }
            }
        }
        let m = self.means[k];
        self.shift -= delta * m;
        self.intercept -= delta * m;
        delta.abs() * h.sqrt()
    }

    fn surrogate_objective(&self, lambda: f64) -> f64 {
        let rss: f64 = (0..self.y.len())
            .map(|i| (self.z[i] - self.fit_value(i)).powi(2))
            .sum();
        rss / (2.0 * self.n) + lambda * self.coefs.iter().map(|a| a.abs()).sum::<f64>()
    }

    fn sweep(&mut self, lambda: f64, active_only: bool) -> f64 {
        let mut max_move: f64 = 0.0;
        for k in 0..self.coefs.len() {
            if active_only && self.coefs[k] == 0.0 {
                continue;
            }
            max_move = max_move.max(self.update(k, lambda));
        }
        if self.objective_trace.is_some() {
            let obj = self.surrogate_objective(lambda);
            if let Some(trace) = self.objective_trace.as_mut() {
                trace.push(obj);
            }
        }
        max_move
    }

    /// Inner solve for a fixed working response.
    fn descend(&mut self, lambda: f64, max_sweeps: usize, tol: f64) -> (bool, usize) {
        self.center();
        let threshold = tol * self.working_sd();
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            self.fold_shift();
            let full = self.sweep(lambda, false);
            sweeps += 1;
            if full < threshold {
                return (true, sweeps);
            }
            sweeps += self.active_sweeps(lambda, max_sweeps - sweeps, threshold);
        }
        (false, sweeps)
    }

    /// Inner solve restricted to the current non-zero coefficients.
    fn descend_active(&mut self, lambda: f64, max_sweeps: usize, tol: f64) -> (bool, usize) {
        self.center();
        self.fold_shift();
        let threshold = tol * self.working_sd();
        (true, self.active_sweeps(lambda, max_sweeps, threshold))
    }

    /// Add `cols` to the cross-product cache.
    fn extend_gram(&mut self, cols: &[usize]) {
        let n = self.y.len();
        let mut scratch = vec![0.0; n];
        for &j in cols {
            if self.gram.pos[j] != usize::MAX {
                continue;
            }
            scratch.iter_mut().for_each(|v| *v = 0.0);
            match &self.design.columns[j] {
                DesignColumn::Binary(idx) => {
                    for &i in idx {
                        scratch[i as usize] = 1.0;
                    }
                }
                DesignColumn::Dense(v) => {
                    for (i, &x) in v.iter().enumerate() {
                        scratch[i] = x;
                    }
                }
            }
            self.gram.pos[j] = self.gram.cols.len();
            self.gram.cols.push(j);
            let mut row = Vec::with_capacity(self.gram.cols.len());
            for (q, &k) in self.gram.cols.iter().enumerate() {
                let cross = match &self.design.columns[k] {
                    DesignColumn::Binary(idx) => idx.iter().map(|&i| scratch[i as usize]).sum::<f64>(),
                    DesignColumn::Dense(v) => v.iter().zip(&scratch).map(|(a, b)| a * b).sum(),
                };
                let c = cross;
                if q + 1 < self.gram.cols.len() {
                    self.gram.rows[q].push(c);
                }
                row.push(c);
            }
            self.gram.rows.push(row);
        }
    }

    /// Sweeps over the non-zero coefficients only, tracking gradients through
    /// cached cross products; the fit is brought up to date at the end.
    fn active_sweeps(&mut self, lambda: f64, max_sweeps: usize, threshold: f64) -> usize {
        let active: Vec<usize> = (0..self.coefs.len()).filter(|&k| self.coefs[k] != 0.0).collect();
        if active.is_empty() || max_sweeps == 0 {
            return 0;
        }
        let new_cols = active.iter().filter(|&&k| self.gram.pos[k] == usize::MAX).count();
        if self.gram.cols.len() + new_cols > GRAM_CAPACITY {
            let mut sweeps = 0;
            while sweeps < max_sweeps {
                sweeps += 1;
                if self.sweep(lambda, true) < threshold {
                    break;
                }
            }
            return sweeps;
        }
        self.extend_gram(&active);
        let na = active.len();
        let pos: Vec<usize> = active.iter().map(|&k| self.gram.pos[k]).collect();
        let cross: Vec<Vec<f64>> = pos
            .iter()
            .zip(&active)
            .map(|(&p, &j)| {
                pos.iter()
                    .zip(&active)
                    .map(|(&q, &k)| {
                        let raw = self.gram.rows[p.max(q)][p.min(q)];
                        (raw - self.n * self.means[j] * self.means[k]) / self.n
                    })
                    .collect()
            })
            .collect();
        let mut grad: Vec<f64> = active.iter().map(|&k| self.gradient(k)).collect();
        let mut moved_total = vec![0.0; na];
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            let mut max_move: f64 = 0.0;
            for a in 0..na {
                let k = active[a];
                let h = self.curv[k];
                if h <= 1e-14 {
                    continue;
                }
                let old = self.coefs[k];
                let u = h * old + grad[a];
                let new = soft_threshold(u, lambda, h);
                let delta = new - old;
                if delta == 0.0 {
                    continue;
                }
                self.coefs[k] = new;
                moved_total[a] += delta;
                self.intercept -= delta * self.means[k];
                for (g, c) in grad.iter_mut().zip(&cross[a]) {
                    *g -= delta * c;
                }
                max_move = max_move.max(delta.abs() * h.sqrt());
            }
            if max_move < threshold {
                break;
            }
        }
        for (a, &k) in active.iter().enumerate() {
            let delta = moved_total[a];
            if delta == 0.0 {
                continue;
            }
            match &self.design.columns[k] {
                DesignColumn::Binary(idx) => {
                    for &i in idx {
                        self.stored[i as usize] += delta;
                    }
                }
                DesignColumn::Dense(v) => {
                    for (s, &x) in self.stored.iter_mut().zip(v) {
                        *s += delta * x;
                    }
                }
            }
            self.shift -= delta * self.means[k];
        }
        if self.objective_trace.is_some() {
            let obj = self.surrogate_objective(lambda);
            if let Some(trace) = self.objective_trace.as_mut() {
                trace.push(obj);
            }
        }
        sweeps
    }

    /// Refresh the working response from the current fit.
    fn majorize(&mut self) -> Result<()> {
        match self.spec.kind {
            LossKind::Squared => {}
            LossKind::Huber => {
                let delta = self.spec.delta.max(1e-12);
                for i in 0..self.y.len() {
                    let f = self.fit_value(i);
                    self.z[i] = f + (self.y[i] - f).clamp(-delta, delta);
                }
            }
            LossKind::Ramp => {
                for i in 0..self.y.len() {
                    let f = self.fit_value(i);
                    let y = self.y[i];
                    // points clipped on the side matching y stay where they are
                    let settled = (f >= 1.0 && y >= 1.0) || (f <= -1.0 && y <= -1.0);
                    self.z[i] = if settled { f } else { y };
                }
            }
        }
        Ok(())
    }

    fn solve(&mut self, lambda: f64, cfg: &FitConfig) -> Result<(bool, usize)> {
        if self.spec.kind == LossKind::Huber {
            let resid: Vec<f64> = (0..self.y.len())
                .map(|i| self.y[i] - self.fit_value(i))
                .collect();
            self.spec.delta = loss::huber_delta(&resid, self.spec.alpha)?;
        }
        if self.spec.kind == LossKind::Squared {
            return Ok(self.descend(lambda, cfg.max_iter, cfg.tol));
        }
        let mut total = 0;
        let mut converged = false;
        let mut full_rounds = 0;
        let mut settled = false;
        for _ in 0..4 * cfg.max_outer.max(1) {
            let before = self.coefs.clone();
            let b0 = self.intercept;
            self.majorize()?;
            let (ok, sweeps) = if settled {
                full_rounds += 1;
                self.descend(lambda, cfg.max_iter, cfg.tol)
            } else {
                self.descend_active(lambda, cfg.max_iter, cfg.tol)
            };
            total += sweeps;
            let sd = self.working_sd();
            let moved = before
                .iter()
                .zip(&self.coefs)
                .enumerate()
                .map(|(k, (a, b))| (a - b).abs() * self.curv[k].sqrt())
                .fold((self.intercept - b0).abs(), f64::max);
            let still = moved < 10.0 * cfg.tol * sd;
            if settled && ok && still {
                converged = true;
                break;
            }
            if full_rounds >= cfg.max_outer.max(1) {
                break;
            }
            settled = still;
        }
        Ok((converged, total))
    }

    fn training_risk(&self) -> f64 {
        let s: f64 = (0..self.y.len())
            .map(|i| objective_loss(&self.spec, self.y[i], self.fit_value(i)))
            .sum();
        s / self.n
    }

    fn point(&self, lambda: f64, converged: bool, sweeps: usize) -> PathPoint {
        PathPoint {
            lambda,
            intercept: self.intercept,
            coefs: self
                .coefs
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .map(|(k, a)| (k, *a))
                .collect(),
            risk: self.training_risk(),
            converged,
            sweeps,
        }
    }
}

/// Coordinate minimizer `S(u, lambda) / h`; gradients within a relative 1e-9
/// of the penalty count as ties and give 0.
#[inline]
fn soft_threshold(u: f64, lambda: f64, h: f64) -> f64 {
    let cut = lambda * (1.0 + 1e-9);
    if u > cut {
        (u - lambda) / h
    } else if u < -cut {
        (u + lambda) / h
    } else {
        0.0
    }
}

/// Smallest penalty at which every slope is zero: the largest absolute
/// gradient of the objective at the intercept-only fit.
pub fn lambda_max(design: &Design, y: &[f64], spec: &LossSpec) -> Result<f64> {
    if design.n_cols() == 0 {
        return domain("the basis has no columns");
    }
    let mut solver = Solver::new(design, y, *spec)?;
    if spec.kind == LossKind::Huber {
        let med = dataset::median(y)?;
        let dev: Vec<f64> = y.iter().map(|v| v - med).collect();
        solver.spec.delta = loss::huber_delta(&dev, spec.alpha)?;
    }
    solver.majorize()?;
    solver.center();
    Ok((0..design.n_cols())
        .map(|k| solver.gradient(k).abs())
        .fold(0.0, f64::max))
}

/// Geometric grid from `lmax` down to `min_ratio * lmax`.
pub fn lambda_grid(lmax: f64, n: usize, min_ratio: f64) -> Vec<f64> {
    if n == 1 {
        return vec![lmax];
    }
    let step = min_ratio.ln() / (n - 1) as f64;
    (0..n).map(|k| lmax * (step * k as f64).exp()).collect()
}

/// Penalty values for a fit: the explicit list or the default grid.
pub fn resolve_lambdas(design: &Design, y: &[f64], spec: &LossSpec, cfg: &FitConfig) -> Result<Vec<f64>> {
    match &cfg.lambdas {
        Some(l) => Ok(l.clone()),
        None => {
            let lmax = lambda_max(design, y, spec)?;
            Ok(lambda_grid(lmax, cfg.n_lambda, cfg.min_ratio))
        }
    }
}

/// Warm-started solutions along `lambdas` (largest first).
pub fn fit_path(
    design: &Design,
    y: &[f64],
    spec: &LossSpec,
    lambdas: &[f64],
    cfg: &FitConfig,
) -> Result<Vec<PathPoint>> {
    cfg.validate()?;
    if design.n_cols() == 0 {
        return domain("the basis has no columns");
    }
    if y.len() != design.n_rows {
        return domain("response length does not match the design");
    }
    let mut solver = Solver::new(design, y, *spec)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let (converged, sweeps) = solver.solve(lambda, cfg)?;
            Ok(solver.point(lambda, converged, sweeps))
        })
        .collect()
}

/// Objective values after each sweep of a squared-loss solve at `lambda`
/// from a cold start, for monotonicity checks.
pub fn objective_trace(design: &Design, y: &[f64], lambda: f64, cfg: &FitConfig) -> Result<Vec<f64>> {
    let mut solver = Solver::new(design, y, LossSpec::squared())?;
    solver.objective_trace = Some(vec![solver.surrogate_objective(lambda)]);
    solver.descend(lambda, cfg.max_iter, cfg.tol);
    Ok(solver.objective_trace.take().unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selected {
    pub index: usize,
    pub lambda: f64,
    /// Estimated prediction risk per penalty value; empty when there was
    /// nothing to choose between.
    pub risks: Vec<f64>,
}

/// Loss used to score held-out predictions. The Huber transition point is
/// fixed from the full-data deviations about the median so every fold is
/// scored on the same scale.
fn scoring_loss(y: &[f64], spec: &LossSpec) -> Result<LossSpec> {
    Ok(match spec.kind {
        LossKind::Huber => {
            let med = dataset::median(y)?;
            let dev: Vec<f64> = y.iter().map(|v| v - med).collect();
            spec.with_delta(loss::huber_delta(&dev, spec.alpha)?)
        }
        _ => *spec,
    })
}

/// Penalty minimizing held-out risk; ties go to the larger penalty.
pub fn select_lambda(
    design: &Design,
    y: &[f64],
    spec: &LossSpec,
    lambdas: &[f64],
    cfg: &FitConfig,
    seed: u64,
) -> Result<Selected> {
    cfg.validate()?;
    let n = y.len();
    if lambdas.is_empty() {
        return domain("empty penalty grid");
    }
    if lambdas.len() == 1 {
        return Ok(Selected { index: 0, lambda: lambdas[0], risks: Vec::new() });
    }
    let mut order: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng::stream(seed, rng::STREAM_FOLDS));
    let folds: Vec<Vec<usize>> = match cfg.selection {
        Selection::KFold { folds } => {
            if folds > n {
                return config(format!("{folds}-fold selection with only {n} rows"));
            }
            (0..folds)
                .map(|f| order.iter().skip(f).step_by(folds).copied().collect())
                .collect()
        }
        Selection::Holdout { fraction } => {
            let n_test = ((n as f64 * fraction).round() as usize).clamp(1, n - 1);
            vec![order[..n_test].to_vec()]
        }
    };
    let scorer = scoring_loss(y, spec)?;
    let per_fold: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|test| {
            let mut test = test.clone();
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &i in &test {
                in_test[i] = true;
            }
            let train: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
            let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let d_train = design.subset_rows(&train);
            let d_test = design.subset_rows(&test);
            let path = fit_path(&d_train, &y_train, spec, lambdas, cfg)?;
            Ok(path
                .iter()
                .map(|p| {
                    let pred = d_test.predict(p.intercept, &p.coefs);
                    test.iter()
                        .zip(&pred)
                        .map(|(&i, &f)| scorer.eval(y[i], f))
                        .sum::<f64>()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let n_scored: usize = folds.iter().map(Vec::len).sum();
    let risks: Vec<f64> = (0..lambdas.len())
        .map(|k| per_fold.iter().map(|f| f[k]).sum::<f64>() / n_scored as f64)
        .collect();
    let mut index = 0;
    for k in 1..risks.len() {
        let better = if lambdas[k] > lambdas[index] {
            risks[k] <= risks[index]
        } else {
            risks[k] < risks[index]
        };
        if better {
            index = k;
        }
    }
    Ok(Selected { index, lambda: lambdas[index], risks })
}
