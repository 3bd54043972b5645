//! Interpretation of a fitted model: term and variable importances at global,
//! local and regional scope, partial dependence, interaction statistics, and
//! their calibration against a parametric-bootstrap null.

use std::collections::HashMap;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::error::{domain, Result};
use crate::loss::clip_unit;
use crate::model::EnsembleModel;
use crate::pipeline::{fit_model, RuleFitConfig};
use crate::rng;
use crate::rulegen::Rule;

/// Where importances are measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scope", rename_all = "snake_case")]
pub enum Scope {
    Global,
    Point { x: Vec<f64> },
    Region { label: String, n_rows: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "index", rename_all = "snake_case")]
pub enum TermRef {
    /// Index into `model.rules`.
    Rule(usize),
    /// Index into `model.linear`.
    Linear(usize),
}

/// Raw importances per retained term, in model order.
#[derive(Debug, Clone, PartialEq)]
pub struct TermScores {
    pub rules: Vec<f64>,
    pub linear: Vec<f64>,
}

impl TermScores {
    fn zeros(model: &EnsembleModel) -> Self {
        TermScores {
            rules: vec![0.0; model.rules.len()],
            linear: vec![0.0; model.linear.len()],
        }
    }

    pub fn total(&self) -> f64 {
        self.rules.iter().chain(&self.linear).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermImportance {
    pub term: TermRef,
    pub importance: f64,
    /// Scaled so the largest term has 100.
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableImportance {
    pub var: usize,
    pub name: String,
    pub importance: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub scope: Scope,
    pub terms: Vec<TermImportance>,
    pub variables: Vec<VariableImportance>,
}

impl ImportanceReport {
    /// Terms by decreasing importance; ties keep model order.
    pub fn ranked_terms(&self) -> Vec<&TermImportance> {
        let mut v: Vec<&TermImportance> = self.terms.iter().collect();
        v.sort_by(|a, b| b.importance.total_cmp(&a.importance));
        v
    }

    /// Variables by decreasing importance; ties keep variable order.
    pub fn ranked_variables(&self) -> Vec<&VariableImportance> {
        let mut v: Vec<&VariableImportance> = self.variables.iter().collect();
        v.sort_by(|a, b| b.importance.total_cmp(&a.importance));
        v
    }

    pub fn variable(&self, var: usize) -> f64 {
        self.variables[var].importance
    }
}

fn relative(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    values
        .iter()
        .map(|v| if max > 0.0 { 100.0 * v / max } else { 0.0 })
        .collect()
}

/// Variable importances from term importances: each linear term counts fully
/// for its variable, each rule is shared equally among its variables.
pub fn variable_importance(model: &EnsembleModel, scores: &TermScores) -> Vec<f64> {
    let mut j = vec![0.0; model.n_vars()];
    for (t, &imp) in model.rules.iter().zip(&scores.rules) {
        let share = imp / t.rule.n_vars() as f64;
        for v in t.rule.vars() {
            j[v] += share;
        }
    }
    for (l, &imp) in model.linear.iter().zip(&scores.linear) {
        j[l.term.var] += imp;
    }
    j
}

pub fn report(model: &EnsembleModel, scope: Scope, scores: &TermScores) -> ImportanceReport {
    let all: Vec<f64> = scores.rules.iter().chain(&scores.linear).copied().collect();
    let rel = relative(&all);
    let refs = (0..scores.rules.len())
        .map(TermRef::Rule)
        .chain((0..scores.linear.len()).map(TermRef::Linear));
    let terms = refs
        .zip(all.iter().zip(&rel))
        .map(|(term, (&importance, &relative))| TermImportance {
            term,
            importance,
            relative,
        })
        .collect();
    let j = variable_importance(model, scores);
    let jrel = relative(&j);
    let variables = model
        .variables
        .iter()
        .enumerate()
        .map(|(var, v)| VariableImportance {
            var,
            name: v.name.clone(),
            importance: j[var],
            relative: jrel[var],
        })
        .collect();
    ImportanceReport {
        scope,
        terms,
        variables,
    }
}

pub fn global_scores(model: &EnsembleModel) -> TermScores {
    TermScores {
        rules: model
            .rules
            .iter()
            .map(|t| t.coefficient.abs() * t.rule.scale)
            .collect(),
        linear: model
            .linear
            .iter()
            .map(|l| l.coefficient.abs() * l.term.std)
            .collect(),
    }
}

pub fn local_scores_by(model: &EnsembleModel, value_of: impl Fn(usize) -> f64) -> TermScores {
    TermScores {
        rules: model
            .rules
            .iter()
            .map(|t| {
                let r = if t.rule.eval_by(&value_of) { 1.0 } else { 0.0 };
                t.coefficient.abs() * (r - t.rule.support).abs()
            })
            .collect(),
        linear: model
            .linear
            .iter()
            .map(|l| l.coefficient.abs() * (l.term.value(value_of(l.term.var)) - l.term.mean).abs())
            .collect(),
    }
}

pub fn global_term_importance(model: &EnsembleModel) -> ImportanceReport {
    report(model, Scope::Global, &global_scores(model))
}

pub fn local_term_importance(model: &EnsembleModel, x: &[f64]) -> Result<ImportanceReport> {
    model.predict(x)?;
    let scores = local_scores_by(model, |j| x[j]);
    Ok(report(model, Scope::Point { x: x.to_vec() }, &scores))
}

/// Mean of the local importances over `rows` of `data`.
pub fn region_scores(model: &EnsembleModel, data: &Dataset, rows: &[usize]) -> Result<TermScores> {
    if rows.is_empty() {
        return domain("importance region selects no rows");
    }
    let mut acc = TermScores::zeros(model);
    for &i in rows {
        let s = local_scores_by(model, |j| data.value(i, j));
        for (a, v) in acc.rules.iter_mut().zip(&s.rules) {
            *a += v;
        }
        for (a, v) in acc.linear.iter_mut().zip(&s.linear) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    acc.rules.iter_mut().chain(acc.linear.iter_mut()).for_each(|v| *v /= n);
    Ok(acc)
}

pub fn region_importance(
    model: &EnsembleModel,
    data: &Dataset,
    rows: &[usize],
    label: &str,
) -> Result<ImportanceReport> {
    let scores = region_scores(model, data, rows)?;
    let scope = Scope::Region {
        label: label.to_string(),
        n_rows: rows.len(),
    };
    Ok(report(model, scope, &scores))
}

/// A set of rows selected by the size of their predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "side", content = "fraction", rename_all = "snake_case")]
pub enum Region {
    Top(f64),
    Bottom(f64),
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (side, q) = s
            .split_once(':')
            .ok_or_else(|| format!("region '{s}' is not of the form top:q or bottom:q"))?;
        let q: f64 = q.parse().map_err(|_| format!("bad region fraction '{q}'"))?;
        if !(q > 0.0 && q <= 1.0) {
            return Err(format!("region fraction {q} outside (0, 1]"));
        }
        match side {
            "top" => Ok(Region::Top(q)),
            "bottom" => Ok(Region::Bottom(q)),
            other => Err(format!("unknown region side '{other}'")),
        }
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Region::Top(q) => write!(f, "top:{q}"),
            Region::Bottom(q) => write!(f, "bottom:{q}"),
        }
    }
}

/// Rows holding the `ceil(q N)` largest (or smallest) predictions, in row order.
pub fn prediction_region(model: &EnsembleModel, data: &Dataset, region: Region) -> Result<Vec<usize>> {
    let n = data.n_rows();
    if n == 0 {
        return domain("importance region on an empty dataset");
    }
    let f = model.predict_dataset(data);
    let mut order: Vec<usize> = (0..n).collect();
    let (q, top) = match region {
        Region::Top(q) => (q, true),
        Region::Bottom(q) => (q, false),
    };
    if !(q > 0.0 && q <= 1.0) {
        return domain(format!("region fraction {q} outside (0, 1]"));
    }
    order.sort_by(|&a, &b| {
        let c = f[a].total_cmp(&f[b]).then(a.cmp(&b));
        if top {
            c.reverse()
        } else {
            c
        }
    });
    let k = ((q * n as f64).ceil() as usize).clamp(1, n);
    let mut rows = order[..k].to_vec();
    rows.sort_unstable();
    Ok(rows)
}

/// Budgets for partial-dependence sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdBudget {
    pub max_points: usize,
    pub max_integration: usize,
    /// Use every row for both roles.
    pub exact: bool,
    pub seed: u64,
}

impl Default for PdBudget {
    fn default() -> Self {
        PdBudget {
            max_points: 500,
            max_integration: 500,
            exact: false,
            seed: 0,
        }
    }
}

/// Evaluation points and integration rows drawn from a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PdRows {
    pub eval: Vec<usize>,
    pub integration: Vec<usize>,
}

impl PdBudget {
    pub fn rows(&self, n_rows: usize) -> PdRows {
        let mut r = rng::stream(self.seed, rng::STREAM_PD_SAMPLE);
        let mut pick = |cap: usize| -> Vec<usize> {
            if self.exact || n_rows <= cap {
                (0..n_rows).collect()
            } else {
                let mut v = index::sample(&mut r, n_rows, cap).into_vec();
                v.sort_unstable();
                v
            }
        };
        let eval = pick(self.max_points);
        let integration = pick(self.max_integration);
        PdRows { eval, integration }
    }
}

fn center(values: &mut [f64]) {
    if values.is_empty() {
        return;
    }
    let m = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= m);
}

/// Uncentered partial dependence on the variables flagged in `in_s`, at
/// `n_points` points whose coordinates come from `point_value(p, var)`.
///
/// Each rule factors into its conjuncts on `s` and on the rest, so the
/// average over integration rows reduces to one pass per rule.
fn pd_raw(
    model: &EnsembleModel,
    data: &Dataset,
    in_s: &[bool],
    point_value: impl Fn(usize, usize) -> f64 + Sync,
    n_points: usize,
    integration: &[usize],
) -> Vec<f64> {
    let n_int = integration.len() as f64;
    let mut constant = model.intercept;
    let mut active: Vec<(f64, &Rule)> = Vec::new();
    for t in &model.rules {
        let (inside, outside): (Vec<_>, Vec<_>) =
            t.rule.conjuncts.iter().partition(|c| in_s[c.var]);
        let rest = if outside.is_empty() {
            1.0
        } else {
            integration
                .iter()
                .filter(|&&i| outside.iter().all(|c| c.condition.holds(data.value(i, c.var))))
                .count() as f64
                / n_int
        };
        if inside.is_empty() {
            constant += t.coefficient * rest;
        } else if rest > 0.0 {
            active.push((t.coefficient * rest, &t.rule));
        }
    }
    let mut linear = Vec::new();
    for l in &model.linear {
        if in_s[l.term.var] {
            linear.push(l);
        } else {
            let m = integration
                .iter()
                .map(|&i| l.term.value(data.value(i, l.term.var)))
                .sum::<f64>()
                / n_int;
            constant += l.coefficient * m;
        }
    }
    (0..n_points)
        .into_par_iter()
        .map(|p| {
            let mut f = constant;
            for (w, rule) in &active {
                if rule
                    .conjuncts
                    .iter()
                    .filter(|c| in_s[c.var])
                    .all(|c| c.condition.holds(point_value(p, c.var)))
                {
                    f += w;
                }
            }
            for l in &linear {
                f += l.coefficient * l.term.value(point_value(p, l.term.var));
            }
            f
        })
        .collect()
}

fn check_vars(model: &EnsembleModel, vars: &[usize], max: usize) -> Result<Vec<bool>> {
    if vars.is_empty() || vars.len() > max {
        return domain(format!("expected 1 to {max} variables, got {}", vars.len()));
    }
    let mut in_s = vec![false; model.n_vars()];
    for &v in vars {
        if v >= model.n_vars() {
            return domain(format!("variable index {v} out of range"));
        }
        if in_s[v] {
            return domain(format!("variable index {v} repeated"));
        }
        in_s[v] = true;
    }
    Ok(in_s)
}

/// Centered partial dependence on `vars` (one to three variables) at the
/// given points; `points[p][m]` is the value of `vars[m]`.
pub fn partial_dependence(
    model: &EnsembleModel,
    data: &Dataset,
    vars: &[usize],
    points: &[Vec<f64>],
    integration: &[usize],
) -> Result<Vec<f64>> {
    let in_s = check_vars(model, vars, 3)?;
    if integration.is_empty() {
        return domain("partial dependence needs at least one integration row");
    }
    if let Some(p) = points.iter().find(|p| p.len() != vars.len()) {
        return domain(format!(
            "evaluation point has {} values for {} variables",
            p.len(),
            vars.len()
        ));
    }
    let mut slot = vec![0; model.n_vars()];
    for (m, &v) in vars.iter().enumerate() {
        slot[v] = m;
    }
    let mut f = pd_raw(model, data, &in_s, |p, v| points[p][slot[v]], points.len(), integration);
    center(&mut f);
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdTable {
    pub vars: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

/// Partial dependence at the distinct observed value tuples of `vars` among
/// the budget's evaluation rows, sorted lexicographically.
pub fn pd_table(model: &EnsembleModel, data: &Dataset, vars: &[usize], budget: &PdBudget) -> Result<PdTable> {
    check_vars(model, vars, 3)?;
    if data.n_rows() == 0 {
        return domain("partial dependence on an empty dataset");
    }
    let rows = budget.rows(data.n_rows());
    let mut points: Vec<Vec<f64>> = rows
        .eval
        .iter()
        .map(|&i| vars.iter().map(|&v| data.value(i, v)).collect())
        .collect();
    points.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    points.dedup();
    let values = partial_dependence(model, data, vars, &points, &rows.integration)?;
    Ok(PdTable {
        vars: vars.to_vec(),
        points,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HKind {
    /// Interaction of one variable with all others.
    Total,
    Pair,
    Triple,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HRequest {
    pub vars: Vec<usize>,
}

impl HRequest {
    pub fn total(j: usize) -> Self {
        HRequest { vars: vec![j] }
    }

    pub fn pair(j: usize, k: usize) -> Self {
        HRequest { vars: vec![j, k] }
    }

    pub fn triple(j: usize, k: usize, l: usize) -> Self {
        HRequest { vars: vec![j, k, l] }
    }

    pub fn kind(&self) -> HKind {
        match self.vars.len() {
            1 => HKind::Total,
            2 => HKind::Pair,
            _ => HKind::Triple,
        }
    }
}

/// All requests of one order (1, 2 or 3) over `vars`.
pub fn requests_of_order(order: usize, vars: &[usize]) -> Result<Vec<HRequest>> {
    let n = vars.len();
    let mut out = Vec::new();
    match order {
        1 => out.extend(vars.iter().map(|&j| HRequest::total(j))),
        2 => {
            for a in 0..n {
                for b in a + 1..n {
                    out.push(HRequest::pair(vars[a], vars[b]));
                }
            }
        }
        3 => {
            for a in 0..n {
                for b in a + 1..n {
                    for c in b + 1..n {
                        out.push(HRequest::triple(vars[a], vars[b], vars[c]));
                    }
                }
            }
        }
        o => return domain(format!("interaction order {o} not in 1..=3")),
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HValue {
    pub value: f64,
    /// The denominator vanished and the value was set to 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HSettings {
    pub budget: PdBudget,
    /// Use the total variance of the model as every denominator.
    pub importance_weighted: bool,
}

/// Partial-dependence functions of one model at fixed evaluation and
/// integration rows, cached by variable set.
pub struct HContext<'a> {
    model: &'a EnsembleModel,
    data: &'a Dataset,
    rows: PdRows,
    weighted: bool,
    full: Vec<f64>,
    full_ss: f64,
    /// Sums of squares at or below this are rounding noise.
    noise_ss: f64,
    cache: HashMap<Vec<usize>, Vec<f64>>,
}

impl<'a> HContext<'a> {
    pub fn new(model: &'a EnsembleModel, data: &'a Dataset, settings: &HSettings) -> Result<Self> {
        if data.n_rows() == 0 {
            return domain("interaction statistics on an empty dataset");
        }
        if data.n_vars() != model.n_vars() {
            return domain(format!(
                "dataset has {} variables, model has {}",
                data.n_vars(),
                model.n_vars()
            ));
        }
        Ok(Self::with_rows(model, data, settings.budget.rows(data.n_rows()), settings.importance_weighted))
    }

    pub fn with_rows(model: &'a EnsembleModel, data: &'a Dataset, rows: PdRows, weighted: bool) -> Self {
        let mut full: Vec<f64> = rows.eval.iter().map(|&i| model.eval_row(data, i)).collect();
        let magnitude = full.iter().fold(model.intercept.abs(), |m, v| m.max(v.abs()));
        let noise_ss = full.len() as f64 * (1e-12 * magnitude).powi(2);
        center(&mut full);
        let full_ss = full.iter().map(|v| v * v).sum();
        HContext {
            model,
            data,
            rows,
            weighted,
            full,
            full_ss,
            noise_ss,
            cache: HashMap::new(),
        }
    }

    fn pd_mask(&self, in_s: &[bool]) -> Vec<f64> {
        let eval = &self.rows.eval;
        let data = self.data;
        let mut f = pd_raw(
            self.model,
            data,
            in_s,
            |p, v| data.value(eval[p], v),
            eval.len(),
            &self.rows.integration,
        );
        center(&mut f);
        f
    }

    /// Centered partial dependence on `vars` at the evaluation rows.
    pub fn pd(&mut self, vars: &[usize]) -> &[f64] {
        let mut key = vars.to_vec();
        key.sort_unstable();
        if !self.cache.contains_key(&key) {
            let mut in_s = vec![false; self.model.n_vars()];
            key.iter().for_each(|&v| in_s[v] = true);
            let f = self.pd_mask(&in_s);
            self.cache.insert(key.clone(), f);
        }
        &self.cache[&key]
    }

    fn ratio(&self, num: f64, den: f64) -> HValue {
        let den = if self.weighted { self.full_ss } else { den };
        if den <= self.noise_ss {
            HValue {
                value: 0.0,
                degenerate: true,
            }
        } else {
            HValue {
                value: if num <= self.noise_ss { 0.0 } else { (num / den).sqrt() },
                degenerate: false,
            }
        }
    }

    pub fn h_total(&mut self, j: usize) -> HValue {
        let fj = self.pd(&[j]).to_vec();
        let mut in_rest = vec![true; self.model.n_vars()];
        in_rest[j] = false;
        let frest = self.pd_mask(&in_rest);
        let num = (0..fj.len())
            .map(|p| (self.full[p] - fj[p] - frest[p]).powi(2))
            .sum();
        self.ratio(num, self.full_ss)
    }

    pub fn h_pair(&mut self, j: usize, k: usize) -> HValue {
        let fjk = self.pd(&[j, k]).to_vec();
        let fj = self.pd(&[j]).to_vec();
        let fk = self.pd(&[k]).to_vec();
        let num = (0..fjk.len()).map(|p| (fjk[p] - fj[p] - fk[p]).powi(2)).sum();
        let den = fjk.iter().map(|v| v * v).sum();
        self.ratio(num, den)
    }

    pub fn h_triple(&mut self, j: usize, k: usize, l: usize) -> HValue {
        let fjkl = self.pd(&[j, k, l]).to_vec();
        let fjk = self.pd(&[j, k]).to_vec();
        let fjl = self.pd(&[j, l]).to_vec();
        let fkl = self.pd(&[k, l]).to_vec();
        let fj = self.pd(&[j]).to_vec();
        let fk = self.pd(&[k]).to_vec();
        let fl = self.pd(&[l]).to_vec();
        let num = (0..fjkl.len())
            .map(|p| (fjkl[p] - fjk[p] - fjl[p] - fkl[p] + fj[p] + fk[p] + fl[p]).powi(2))
            .sum();
        let den = fjkl.iter().map(|v| v * v).sum();
        self.ratio(num, den)
    }

    pub fn compute(&mut self, req: &HRequest) -> Result<HValue> {
        check_vars(self.model, &req.vars, 3)?;
        Ok(match req.vars[..] {
            [j] => self.h_total(j),
            [j, k] => self.h_pair(j, k),
            [j, k, l] => self.h_triple(j, k, l),
            _ => unreachable!(),
        })
    }
}

pub fn h_statistics(
    model: &EnsembleModel,
    data: &Dataset,
    requests: &[HRequest],
    settings: &HSettings,
) -> Result<Vec<HValue>> {
    let mut ctx = HContext::new(model, data, settings)?;
    requests.iter().map(|r| ctx.compute(r)).collect()
}

pub fn h_total(model: &EnsembleModel, data: &Dataset, j: usize, settings: &HSettings) -> Result<HValue> {
    Ok(h_statistics(model, data, &[HRequest::total(j)], settings)?[0])
}

pub fn h_pair(model: &EnsembleModel, data: &Dataset, j: usize, k: usize, settings: &HSettings) -> Result<HValue> {
    Ok(h_statistics(model, data, &[HRequest::pair(j, k)], settings)?[0])
}

pub fn h_triple(
    model: &EnsembleModel,
    data: &Dataset,
    j: usize,
    k: usize,
    l: usize,
    settings: &HSettings,
) -> Result<HValue> {
    Ok(h_statistics(model, data, &[HRequest::triple(j, k, l)], settings)?[0])
}

/// The main-effects model: the full pipeline with stumps only.
pub fn fit_additive_reference(data: &Dataset, cfg: &RuleFitConfig) -> Result<EnsembleModel> {
    fit_model(data, &cfg.additive())
}

/// One synthetic response drawn under the no-interaction null.
pub fn null_response(data: &Dataset, additive: &EnsembleModel, seed: u64) -> Vec<f64> {
    let fa = additive.predict_dataset(data);
    let mut r = rng::stream(seed, rng::STREAM_NULL);
    match data.task() {
        Task::Regression => {
            let y = data.response();
            let mut perm: Vec<usize> = (0..y.len()).collect();
            perm.shuffle(&mut r);
            fa.iter()
                .zip(&perm)
                .map(|(f, &p)| f + (y[p] - fa[p]))
                .collect()
        }
        Task::BinaryClassification => fa
            .iter()
            .map(|f| {
                let p = (1.0 + clip_unit(*f)) / 2.0;
                if r.random::<f64>() < p {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullStat {
    pub mean: f64,
    /// Sample (n - 1) standard deviation across replications.
    pub std: f64,
    pub reps: usize,
}

/// Null mean and spread of each requested statistic over `reps` refits of the
/// full pipeline on responses drawn from the additive reference.
pub fn null_distribution(
    data: &Dataset,
    cfg: &RuleFitConfig,
    requests: &[HRequest],
    reps: usize,
    settings: &HSettings,
    seed: u64,
) -> Result<Vec<NullStat>> {
    if reps < 2 {
        return domain(format!("null distribution needs at least 2 replications, got {reps}"));
    }
    let additive = fit_additive_reference(data, cfg)?;
    null_distribution_from(data, cfg, &additive, requests, reps, settings, seed)
}

pub fn null_distribution_from(
    data: &Dataset,
    cfg: &RuleFitConfig,
    additive: &EnsembleModel,
    requests: &[HRequest],
    reps: usize,
    settings: &HSettings,
    seed: u64,
) -> Result<Vec<NullStat>> {
    if reps < 2 {
        return domain(format!("null distribution needs at least 2 replications, got {reps}"));
    }
    let draws: Vec<Vec<HValue>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = rng::derive_seed(seed, rep as u64);
            let y = null_response(data, additive, rep_seed);
            let sim = data.with_response(y)?;
            let model = fit_model(&sim, &cfg.with_seed(rep_seed))?;
            h_statistics(&model, &sim, requests, settings)
        })
        .collect::<Result<_>>()?;
    Ok((0..requests.len())
        .map(|q| {
            let v: Vec<f64> = draws.iter().map(|d| d[q].value).collect();
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            NullStat {
                mean,
                std: var.sqrt(),
                reps,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRow {
    pub kind: HKind,
    pub vars: Vec<usize>,
    pub h: f64,
    pub degenerate: bool,
    pub null_mean: Option<f64>,
    pub null_std: Option<f64>,
    /// `h - null_mean`; may be negative.
    pub excess: Option<f64>,
    pub reps: usize,
}

impl InteractionRow {
    /// Excess above `z` null standard deviations.
    pub fn flagged(&self, z: f64) -> bool {
        match (self.excess, self.null_std) {
            (Some(e), Some(s)) => e > z * s,
            _ => false,
        }
    }
}

pub fn raw_rows(requests: &[HRequest], raw: &[HValue]) -> Vec<InteractionRow> {
    requests
        .iter()
        .zip(raw)
        .map(|(r, h)| InteractionRow {
            kind: r.kind(),
            vars: r.vars.clone(),
            h: h.value,
            degenerate: h.degenerate,
            null_mean: None,
            null_std: None,
            excess: None,
            reps: 0,
        })
        .collect()
}

/// Attach null statistics to raw values; both lists must describe the same
/// requests in the same order.
pub fn excess_statistics(
    raw: &[(HRequest, HValue)],
    null: &[(HRequest, NullStat)],
) -> Result<Vec<InteractionRow>> {
    if raw.len() != null.len() {
        return domain(format!(
            "{} raw statistics but {} null statistics",
            raw.len(),
            null.len()
        ));
    }
    raw.iter()
        .zip(null)
        .map(|((rq, h), (nq, s))| {
            if rq != nq {
                return domain(format!(
                    "raw statistic on {:?} paired with null statistic on {:?}",
                    rq.vars, nq.vars
                ));
            }
            Ok(InteractionRow {
                kind: rq.kind(),
                vars: rq.vars.clone(),
                h: h.value,
                degenerate: h.degenerate,
                null_mean: Some(s.mean),
                null_std: Some(s.std),
                excess: Some(h.value - s.mean),
                reps: s.reps,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, VarLimits, Variable};
    use crate::model::{LinearCoef, RuleTerm};
    use crate::rulegen::{Condition, Conjunct, LinearTerm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn numeric_vars(n: usize) -> Vec<Variable> {
        (0..n)
            .map(|j| Column::numeric(format!("x{}", j + 1), vec![0.0]).variable())
            .collect()
    }

    fn uniform_data(n_rows: usize, n_vars: usize, seed: u64) -> Dataset {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let cols = (0..n_vars)
            .map(|j| {
                Column::numeric(
                    format!("x{}", j + 1),
                    (0..n_rows).map(|_| r.random::<f64>() * 2.0 - 1.0).collect(),
                )
            })
            .collect();
        let y = (0..n_rows).map(|_| r.random::<f64>()).collect();
        Dataset::new(cols, y, Task::Regression).unwrap()
    }

    fn gt(var: usize, t: f64) -> Conjunct {
        Conjunct {
            var,
            condition: Condition::InInterval { lo: Some(t), hi: None },
        }
    }

    fn le(var: usize, t: f64) -> Conjunct {
        Conjunct {
            var,
            condition: Condition::InInterval { lo: None, hi: Some(t) },
        }
    }

    fn rule_term(conj: Vec<Conjunct>, coef: f64, data: &Dataset) -> RuleTerm {
        let mut rule = Rule::new(conj, (0, 0));
        crate::rulegen::compute_support(&mut rule, data);
        RuleTerm {
            rule,
            coefficient: coef,
        }
    }

    fn lin(var: usize, coef: f64, data: &Dataset) -> LinearCoef {
        let v: Vec<f64> = (0..data.n_rows()).map(|i| data.value(i, var)).collect();
        LinearCoef {
            term: LinearTerm {
                var,
                limits: VarLimits {
                    lower: f64::NEG_INFINITY,
                    upper: f64::INFINITY,
                },
                mean: crate::dataset::mean(&v),
                std: crate::dataset::std_dev(&v),
            },
            coefficient: coef,
        }
    }

    fn model_on(data: &Dataset, rules: Vec<RuleTerm>, linear: Vec<LinearCoef>) -> EnsembleModel {
        EnsembleModel::from_terms(data.variables(), Task::Regression, 0.3, rules, linear)
    }

    fn exact() -> HSettings {
        HSettings {
            budget: PdBudget {
                exact: true,
                ..PdBudget::default()
            },
            importance_weighted: false,
        }
    }

    /// Direct double loop: average the model over integration rows with the
    /// `vars` coordinates replaced.
    fn brute_pd(model: &EnsembleModel, data: &Dataset, vars: &[usize], points: &[Vec<f64>], integ: &[usize]) -> Vec<f64> {
        let mut f: Vec<f64> = points
            .iter()
            .map(|p| {
                integ
                    .iter()
                    .map(|&i| {
                        let mut x = data.row(i);
                        for (m, &v) in vars.iter().enumerate() {
                            x[v] = p[m];
                        }
                        model.eval(&x)
                    })
                    .sum::<f64>()
                    / integ.len() as f64
            })
            .collect();
        center(&mut f);
        f
    }

    fn brute_pd_rows(model: &EnsembleModel, data: &Dataset, vars: &[usize]) -> Vec<f64> {
        let n = data.n_rows();
        let points: Vec<Vec<f64>> = (0..n).map(|i| vars.iter().map(|&v| data.value(i, v)).collect()).collect();
        brute_pd(model, data, vars, &points, &(0..n).collect::<Vec<_>>())
    }

    fn mixed_model(data: &Dataset) -> EnsembleModel {
        model_on(
            data,
            vec![
                rule_term(vec![gt(0, 0.0), le(1, 0.3)], 1.2, data),
                rule_term(vec![gt(2, -0.4)], -0.7, data),
                rule_term(vec![le(0, 0.5), gt(1, -0.5), gt(2, 0.1)], 0.9, data),
                rule_term(vec![gt(3, 0.2), le(1, 0.8)], 0.4, data),
            ],
            vec![lin(0, 0.8, data), lin(3, -1.5, data)],
        )
    }

    #[test]
    fn zero_coefficient_has_zero_importance() {
        let data = uniform_data(40, 2, 1);
        let m = model_on(&data, vec![rule_term(vec![gt(0, 0.0)], 0.0, &data)], vec![lin(1, 0.0, &data)]);
        let rep = global_term_importance(&m);
        assert!(rep.terms.iter().all(|t| t.importance == 0.0 && t.relative == 0.0));
        assert!(rep.variables.iter().all(|v| v.importance == 0.0));
    }

    #[test]
    fn half_support_rule_importance() {
        let data = uniform_data(2, 1, 1);
        let mut t = rule_term(vec![gt(0, 0.0)], -1.0, &data);
        t.rule.support = 0.5;
        t.rule.scale = 0.5;
        let m = model_on(&data, vec![t], vec![]);
        assert_eq!(global_scores(&m).rules, vec![0.5]);
    }

    #[test]
    fn published_importance_ordering() {
        // Coefficients and supports of a published six-term listing; x7 and
        // x8 are uniform on {0, 0.1, ..., 0.9}.
        let grid: Vec<f64> = (0..10).map(|k| k as f64 / 10.0).collect();
        let std = crate::dataset::std_dev(&grid);
        let vars = numeric_vars(8);
        let rule = |coef: f64, s: f64| RuleTerm {
            rule: Rule {
                conjuncts: vec![gt(5, 0.25)],
                support: s,
                scale: (s * (1.0 - s)).sqrt(),
                source: (0, 0),
            },
            coefficient: coef,
        };
        let linear = |var: usize, coef: f64| LinearCoef {
            term: LinearTerm {
                var,
                limits: VarLimits { lower: 0.0, upper: 0.9 },
                mean: 0.45,
                std,
            },
            coefficient: coef,
        };
        let m = EnsembleModel::from_terms(
            vars,
            Task::Regression,
            0.0,
            vec![rule(0.57, 0.49), rule(0.79, 0.15), rule(0.34, 0.51), rule(-0.38, 0.25)],
            vec![linear(6, -0.81), linear(7, 0.61)],
        );
        let rep = global_term_importance(&m);
        let rel: Vec<f64> = rep.terms.iter().map(|t| t.relative).collect();
        let published = [100.0, 99.0, 61.0, 58.0, 83.0, 63.0];
        for (r, p) in rel.iter().zip(published) {
            assert!((r - p).abs() <= 2.0, "relative {r} vs published {p}");
        }
        let order: Vec<TermRef> = rep.ranked_terms().iter().map(|t| t.term).collect();
        assert_eq!(order[..3], [TermRef::Rule(0), TermRef::Rule(1), TermRef::Linear(0)]);
    }

    #[test]
    fn local_importance_examples() {
        let data = uniform_data(10, 1, 2);
        let mut fire = rule_term(vec![gt(0, -10.0)], 2.0, &data);
        fire.rule.support = 0.0;
        let mut quiet = rule_term(vec![gt(0, 10.0)], -3.0, &data);
        quiet.rule.support = 0.9;
        let m = model_on(&data, vec![fire, quiet], vec![]);
        let rep = local_term_importance(&m, &[0.0]).unwrap();
        assert_eq!(rep.terms[0].importance, 2.0);
        assert!((rep.terms[1].importance - 2.7).abs() < 1e-12);
    }

    #[test]
    fn rms_of_local_equals_global() {
        let data = uniform_data(300, 4, 3);
        let m = mixed_model(&data);
        let g = global_scores(&m);
        let n = data.n_rows() as f64;
        let mut ss = TermScores::zeros(&m);
        for i in 0..data.n_rows() {
            let l = local_scores_by(&m, |j| data.value(i, j));
            for (a, v) in ss.rules.iter_mut().zip(&l.rules) {
                *a += v * v;
            }
            for (a, v) in ss.linear.iter_mut().zip(&l.linear) {
                *a += v * v;
            }
        }
        for (s, gv) in ss.rules.iter().chain(&ss.linear).zip(g.rules.iter().chain(&g.linear)) {
            assert!(((s / n).sqrt() - gv).abs() < 1e-8);
        }
    }

    #[test]
    fn region_importance_averages() {
        let data = uniform_data(50, 4, 4);
        let m = mixed_model(&data);
        let one = region_importance(&m, &data, &[7], "row").unwrap();
        let local = local_term_importance(&m, &data.row(7)).unwrap();
        assert_eq!(one.terms, local.terms);
        let all: Vec<usize> = (0..50).collect();
        let avg = region_scores(&m, &data, &all).unwrap();
        let direct: f64 = (0..50)
            .map(|i| local_scores_by(&m, |j| data.value(i, j)).linear[1])
            .sum::<f64>()
            / 50.0;
        assert!((avg.linear[1] - direct).abs() < 1e-12);
        assert!(region_importance(&m, &data, &[], "none").is_err());
    }

    #[test]
    fn prediction_regions() {
        let data = uniform_data(50, 4, 5);
        let m = mixed_model(&data);
        let f = m.predict_dataset(&data);
        let top = prediction_region(&m, &data, Region::Top(0.1)).unwrap();
        let bottom = prediction_region(&m, &data, Region::Bottom(0.1)).unwrap();
        assert_eq!((top.len(), bottom.len()), (5, 5));
        let min_top = top.iter().map(|&i| f[i]).fold(f64::INFINITY, f64::min);
        let max_bot = bottom.iter().map(|&i| f[i]).fold(f64::NEG_INFINITY, f64::max);
        let others = (0..50).filter(|i| !top.contains(i));
        assert!(others.clone().all(|i| f[i] <= min_top));
        assert!(max_bot <= min_top);
        assert_eq!("top:0.1".parse::<Region>().unwrap(), Region::Top(0.1));
        assert!("middle:0.1".parse::<Region>().is_err());
        assert!("top:0".parse::<Region>().is_err());
    }

    #[test]
    fn variable_importance_sharing() {
        let data = uniform_data(60, 5, 6);
        let m = model_on(&data, vec![rule_term(vec![gt(0, 0.0), le(2, 0.1)], 1.0, &data)], vec![]);
        let rep = global_term_importance(&m);
        let i = rep.terms[0].importance;
        assert!((rep.variable(0) - i / 2.0).abs() < 1e-15);
        assert!((rep.variable(2) - i / 2.0).abs() < 1e-15);
        assert_eq!(rep.variable(1), 0.0);

        let m = mixed_model(&data);
        let g = global_scores(&m);
        let j = variable_importance(&m, &g);
        assert!((j.iter().sum::<f64>() - g.total()).abs() < 1e-12);
    }

    #[test]
    fn pd_of_constant_model_is_zero() {
        let data = uniform_data(20, 2, 7);
        let m = model_on(&data, vec![], vec![]);
        let table = pd_table(&m, &data, &[0, 1], &PdBudget::default()).unwrap();
        assert!(table.values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn pd_of_linear_term_is_analytic() {
        let data = uniform_data(40, 2, 8);
        let m = model_on(&data, vec![], vec![lin(0, 1.7, &data)]);
        let points: Vec<Vec<f64>> = vec![vec![-0.9], vec![0.0], vec![0.35], vec![0.8]];
        let pd = partial_dependence(&m, &data, &[0], &points, &(0..40).collect::<Vec<_>>()).unwrap();
        let raw: Vec<f64> = points.iter().map(|p| 1.7 * p[0]).collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        for (a, b) in pd.iter().zip(&raw) {
            assert!((a - (b - mean)).abs() < 1e-12);
        }
    }

    #[test]
    fn pd_matches_double_loop() {
        let data = uniform_data(30, 4, 9);
        let m = mixed_model(&data);
        let integ: Vec<usize> = (0..30).collect();
        for vars in [vec![0], vec![1], vec![2, 0], vec![0, 1, 3], vec![3, 2, 1]] {
            let points: Vec<Vec<f64>> = (0..30).map(|i| vars.iter().map(|&v| data.value(i, v)).collect()).collect();
            let fast = partial_dependence(&m, &data, &vars, &points, &integ).unwrap();
            let slow = brute_pd(&m, &data, &vars, &points, &integ);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-10, "{vars:?}: {a} vs {b}");
            }
            assert!(fast.iter().sum::<f64>().abs() < 1e-10);
        }
    }

    #[test]
    fn pd_subset_integration_matches_double_loop() {
        let data = uniform_data(30, 4, 10);
        let m = mixed_model(&data);
        let integ = vec![1, 4, 9, 22, 29];
        let points = vec![vec![0.1, -0.2], vec![0.9, 0.9], vec![-1.0, 0.0]];
        let fast = partial_dependence(&m, &data, &[1, 2], &points, &integ).unwrap();
        let slow = brute_pd(&m, &data, &[1, 2], &points, &integ);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn pd_rejects_bad_requests() {
        let data = uniform_data(10, 4, 11);
        let m = mixed_model(&data);
        let all: Vec<usize> = (0..10).collect();
        assert!(partial_dependence(&m, &data, &[], &[vec![]], &all).is_err());
        assert!(partial_dependence(&m, &data, &[0, 1, 2, 3], &[vec![0.0; 4]], &all).is_err());
        assert!(partial_dependence(&m, &data, &[1, 1], &[vec![0.0; 2]], &all).is_err());
        assert!(partial_dependence(&m, &data, &[0], &[vec![0.0]], &[]).is_err());
        assert!(partial_dependence(&m, &data, &[0], &[vec![0.0, 1.0]], &all).is_err());
    }

    #[test]
    fn pd_table_points_are_distinct_and_centered() {
        let cols = vec![
            Column::numeric("a", (0..60).map(|i| (i % 4) as f64).collect()),
            Column::categorical("c", vec!["p".into(), "q".into(), "r".into()], (0..60).map(|i| i % 3).collect()),
        ];
        let data = Dataset::new(cols, vec![0.0; 60], Task::Regression).unwrap();
        let rules = vec![
            rule_term(vec![gt(0, 1.5)], 1.0, &data),
            rule_term(
                vec![Conjunct {
                    var: 1,
                    condition: Condition::InSet { set: vec![0, 2] },
                }],
                -2.0,
                &data,
            ),
        ];
        let m = model_on(&data, rules, vec![]);
        let t = pd_table(&m, &data, &[1], &PdBudget::default()).unwrap();
        assert_eq!(t.points, vec![vec![0.0], vec![1.0], vec![2.0]]);
        assert!(t.values.iter().sum::<f64>().abs() < 1e-12);
        let t2 = pd_table(&m, &data, &[0, 1], &PdBudget::default()).unwrap();
        assert_eq!(t2.points.len(), 12);
    }

    #[test]
    fn budget_caps_and_determinism() {
        let b = PdBudget {
            max_points: 10,
            max_integration: 20,
            exact: false,
            seed: 4,
        };
        let r = b.rows(100);
        assert_eq!((r.eval.len(), r.integration.len()), (10, 20));
        assert!(r.eval.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(r, b.rows(100));
        let e = PdBudget { exact: true, ..b }.rows(100);
        assert_eq!(e.eval.len(), 100);
        assert_eq!(b.rows(8).integration, (0..8).collect::<Vec<_>>());
    }

    fn brute_h(model: &EnsembleModel, data: &Dataset, vars: &[usize]) -> f64 {
        let pd = |s: &[usize]| brute_pd_rows(model, data, s);
        let (num, den): (Vec<f64>, Vec<f64>) = match vars {
            [j] => {
                let rest: Vec<usize> = (0..data.n_vars()).filter(|v| v != j).collect();
                let mut f = model.predict_dataset(data);
                center(&mut f);
                let (fj, fr) = (pd(&[*j]), pd(&rest));
                ((0..f.len()).map(|i| f[i] - fj[i] - fr[i]).collect(), f)
            }
            [j, k] => {
                let (fjk, fj, fk) = (pd(&[*j, *k]), pd(&[*j]), pd(&[*k]));
                ((0..fjk.len()).map(|i| fjk[i] - fj[i] - fk[i]).collect(), fjk)
            }
            [j, k, l] => {
                let f3 = pd(&[*j, *k, *l]);
                let (a, b, c) = (pd(&[*j, *k]), pd(&[*j, *l]), pd(&[*k, *l]));
                let (d, e, g) = (pd(&[*j]), pd(&[*k]), pd(&[*l]));
                ((0..f3.len()).map(|i| f3[i] - a[i] - b[i] - c[i] + d[i] + e[i] + g[i]).collect(), f3)
            }
            _ => unreachable!(),
        };
        let ss = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        (ss(&num) / ss(&den)).sqrt()
    }

    #[test]
    fn pair_and_total_match_oracle_for_product_rule() {
        let data = uniform_data(200, 3, 12);
        let m = model_on(&data, vec![rule_term(vec![gt(0, 0.0), gt(1, 0.0)], 1.0, &data)], vec![]);
        let s = exact();
        let hp = h_pair(&m, &data, 0, 1, &s).unwrap();
        assert!(hp.value > 0.1 && !hp.degenerate);
        assert!((hp.value - brute_h(&m, &data, &[0, 1])).abs() < 1e-10);
        let h1 = h_total(&m, &data, 0, &s).unwrap().value;
        let h2 = h_total(&m, &data, 1, &s).unwrap().value;
        assert!(h1 > 0.1);
        assert!((h1 - brute_h(&m, &data, &[0])).abs() < 1e-10);
        assert!((h2 - brute_h(&m, &data, &[1])).abs() < 1e-10);
        let h3 = h_total(&m, &data, 2, &s).unwrap();
        assert!(h3.value < 1e-10);
    }

    #[test]
    fn triple_matches_oracle() {
        let data = uniform_data(100, 4, 13);
        let m = model_on(
            &data,
            vec![
                rule_term(vec![gt(0, -0.2), gt(1, 0.1), le(2, 0.4)], 1.0, &data),
                rule_term(vec![gt(3, 0.0)], 0.5, &data),
            ],
            vec![lin(1, 0.3, &data)],
        );
        let h = h_triple(&m, &data, 0, 1, 2, &exact()).unwrap().value;
        assert!(h > 0.05);
        assert!((h - brute_h(&m, &data, &[0, 1, 2])).abs() < 1e-10);
        let h = h_total(&m, &data, 2, &exact()).unwrap().value;
        assert!((h - brute_h(&m, &data, &[2])).abs() < 1e-10);
    }

    #[test]
    fn pairwise_model_has_no_triple_interaction() {
        let data = uniform_data(150, 3, 14);
        let m = model_on(
            &data,
            vec![
                rule_term(vec![gt(0, 0.0), gt(1, 0.2)], 1.0, &data),
                rule_term(vec![le(1, 0.5), gt(2, -0.3)], -0.8, &data),
                rule_term(vec![le(0, 0.3), le(2, 0.6)], 0.6, &data),
                rule_term(vec![gt(2, 0.1)], 0.4, &data),
            ],
            vec![lin(0, 1.0, &data)],
        );
        let h = h_triple(&m, &data, 0, 1, 2, &exact()).unwrap();
        assert!(h.value < 1e-6, "{}", h.value);
        assert!(h_pair(&m, &data, 0, 1, &exact()).unwrap().value > 0.05);
    }

    #[test]
    fn additive_model_has_no_interactions() {
        let data = uniform_data(120, 4, 15);
        let m = model_on(
            &data,
            vec![
                rule_term(vec![gt(0, 0.0)], 1.0, &data),
                rule_term(vec![le(1, 0.4)], -0.6, &data),
                rule_term(vec![gt(2, -0.5)], 0.8, &data),
            ],
            vec![lin(0, 0.5, &data), lin(3, -0.9, &data)],
        );
        let mut reqs = requests_of_order(1, &[0, 1, 2, 3]).unwrap();
        reqs.extend(requests_of_order(2, &[0, 1, 2, 3]).unwrap());
        reqs.extend(requests_of_order(3, &[0, 1, 2, 3]).unwrap());
        for weighted in [false, true] {
            let s = HSettings {
                importance_weighted: weighted,
                ..exact()
            };
            let hs = h_statistics(&m, &data, &reqs, &s).unwrap();
            for (r, h) in reqs.iter().zip(&hs) {
                assert_eq!(h.value, 0.0, "{:?}", r.vars);
            }
        }
    }

    #[test]
    fn constant_model_reports_degenerate() {
        let data = uniform_data(20, 2, 16);
        let m = model_on(&data, vec![], vec![]);
        let h = h_pair(&m, &data, 0, 1, &exact()).unwrap();
        assert_eq!(h, HValue { value: 0.0, degenerate: true });
    }

    #[test]
    fn importance_weighted_uses_total_variance() {
        let data = uniform_data(100, 3, 17);
        let m = model_on(
            &data,
            vec![
                rule_term(vec![gt(0, 0.0), gt(1, 0.0)], 1.0, &data),
                rule_term(vec![gt(2, 0.0)], 3.0, &data),
            ],
            vec![],
        );
        let plain = h_pair(&m, &data, 0, 1, &exact()).unwrap().value;
        let w = HSettings {
            importance_weighted: true,
            ..exact()
        };
        let weighted = h_pair(&m, &data, 0, 1, &w).unwrap().value;
        assert!(weighted < plain);
        let mut ctx = HContext::new(&m, &data, &exact()).unwrap();
        let fjk_ss: f64 = ctx.pd(&[0, 1]).iter().map(|v| v * v).sum();
        let ratio = (fjk_ss / ctx.full_ss).sqrt();
        assert!((weighted - plain * ratio).abs() < 1e-12);
    }

    #[test]
    fn request_orders() {
        assert_eq!(requests_of_order(2, &[0, 1, 2]).unwrap().len(), 3);
        assert_eq!(requests_of_order(3, &[0, 1, 2, 3]).unwrap().len(), 4);
        assert!(requests_of_order(4, &[0]).is_err());
        assert_eq!(HRequest::triple(0, 1, 2).kind(), HKind::Triple);
    }

    #[test]
    fn null_response_with_zero_reference_is_permutation() {
        let data = uniform_data(40, 2, 18);
        let zero = model_on(&data, vec![], vec![]);
        let zero = EnsembleModel { intercept: 0.0, ..zero };
        let y = null_response(&data, &zero, 9);
        let mut a = y.clone();
        let mut b = data.response().to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        assert_eq!(a, b);
        assert_ne!(y, data.response());
        assert_eq!(y, null_response(&data, &zero, 9));
    }

    #[test]
    fn null_response_classification_clips() {
        let data = uniform_data(200, 1, 19);
        let labels: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let data = data.with_target(labels, Task::BinaryClassification).unwrap();
        let high = EnsembleModel { intercept: 3.0, ..model_on(&data, vec![], vec![]) };
        assert!(null_response(&data, &high, 1).iter().all(|&v| v == 1.0));
        let low = EnsembleModel { intercept: -2.0, ..high.clone() };
        assert!(null_response(&data, &low, 1).iter().all(|&v| v == -1.0));
        let mid = EnsembleModel { intercept: 0.0, ..high };
        let pos = null_response(&data, &mid, 1).iter().filter(|&&v| v == 1.0).count();
        assert!((60..140).contains(&pos));
    }

    #[test]
    fn excess_statistics_pairs_requests() {
        let reqs = [HRequest::pair(0, 1), HRequest::total(2)];
        let raw = vec![
            (reqs[0].clone(), HValue { value: 0.3, degenerate: false }),
            (reqs[1].clone(), HValue { value: 0.1, degenerate: false }),
        ];
        let null = vec![
            (reqs[0].clone(), NullStat { mean: 0.3, std: 0.05, reps: 10 }),
            (reqs[1].clone(), NullStat { mean: 0.2, std: 0.01, reps: 10 }),
        ];
        let rows = excess_statistics(&raw, &null).unwrap();
        assert_eq!(rows[0].excess, Some(0.0));
        assert!((rows[1].excess.unwrap() + 0.1).abs() < 1e-15);
        assert!(!rows[0].flagged(2.0));
        let swapped = vec![null[1].clone(), null[0].clone()];
        assert!(excess_statistics(&raw, &swapped).is_err());
        assert!(excess_statistics(&raw, &null[..1]).is_err());
    }

    #[test]
    fn null_distribution_needs_two_reps() {
        let data = uniform_data(30, 2, 20);
        let cfg = RuleFitConfig::default();
        assert!(null_distribution(&data, &cfg, &[HRequest::total(0)], 1, &HSettings::default(), 0).is_err());
    }
}
