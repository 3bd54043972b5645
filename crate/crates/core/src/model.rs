//! The fitted predictive model: intercept plus weighted rules and weighted
//! winsorized linear terms, with JSON persistence.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task, Variable, WinsorLimits};
use crate::error::{Error, Result};
use crate::loss::{clip_unit, LossKind, LossSpec};
use crate::pipeline::RuleFitConfig;
use crate::rulegen::{LinearTerm, Rule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTerm {
    #[serde(flatten)]
    pub rule: Rule,
    pub coefficient: f64,
}

/// A linear term with its coefficient on the original (winsorized, not
/// normalized) variable scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCoef {
    #[serde(flatten)]
    pub term: LinearTerm,
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub lambda: f64,
    pub n_nonzero: usize,
    pub training_risk: f64,
    pub estimated_risk: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub version: String,
    pub task: Task,
    pub loss: LossSpec,
    pub target: Option<String>,
    pub variables: Vec<Variable>,
    pub intercept: f64,
    pub rules: Vec<RuleTerm>,
    pub linear: Vec<LinearCoef>,
    pub winsor_limits: WinsorLimits,
    pub selected_lambda: f64,
    pub selected_index: usize,
    pub n_nonzero: usize,
    /// Candidate terms offered to the lasso.
    pub basis_size: usize,
    /// Rules read off the trees before deduplication.
    pub n_rules_generated: usize,
    pub path: Vec<PathSummary>,
    pub config: RuleFitConfig,
    pub seed: u64,
}

impl EnsembleModel {
    /// A model assembled directly from terms, with default bookkeeping.
    pub fn from_terms(
        variables: Vec<Variable>,
        task: Task,
        intercept: f64,
        rules: Vec<RuleTerm>,
        linear: Vec<LinearCoef>,
    ) -> Self {
        let n = variables.len();
        let config = RuleFitConfig::default();
        EnsembleModel {
            version: env!("CARGO_PKG_VERSION").to_string(),
            task,
            loss: config.loss(),
            target: None,
            intercept,
            n_nonzero: rules.len() + linear.len(),
            basis_size: rules.len() + linear.len(),
            rules,
            linear,
            winsor_limits: WinsorLimits {
                beta: config.beta,
                limits: vec![None; n],
            },
            variables,
            selected_lambda: 0.0,
            selected_index: 0,
            n_rules_generated: 0,
            path: Vec::new(),
            seed: config.seed(),
            config,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    /// Model value with `value_of(var)` supplying inputs; no validation.
    #[inline]
    pub fn eval_by(&self, value_of: impl Fn(usize) -> f64) -> f64 {
        let mut f = self.intercept;
        for t in &self.rules {
            if t.rule.eval_by(&value_of) {
                f += t.coefficient;
            }
        }
        for l in &self.linear {
            f += l.coefficient * l.term.value(value_of(l.term.var));
        }
        f
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_by(|j| x[j])
    }

    pub fn eval_row(&self, data: &Dataset, row: usize) -> f64 {
        self.eval_by(|j| data.value(row, j))
    }

    /// Variables referenced by at least one term.
    pub fn used_vars(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .rules
            .iter()
            .flat_map(|t| t.rule.vars())
            .chain(self.linear.iter().map(|l| l.term.var))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Checked prediction for a full input row.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        for j in self.used_vars() {
            match x.get(j) {
                None => {
                    return Err(Error::Prediction(format!(
                        "input row lacks variable '{}'",
                        self.variables[j].name
                    )))
                }
                Some(v) if v.is_nan() => {
                    return Err(Error::Prediction(format!(
                        "variable '{}' is missing",
                        self.variables[j].name
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(self.eval(x))
    }

    /// Class label `sign(F)`, with 0 mapped to +1.
    pub fn classify(&self, x: &[f64]) -> Result<f64> {
        Ok(sign_label(self.predict(x)?))
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Vec<f64> {
        (0..data.n_rows()).map(|i| self.eval_row(data, i)).collect()
    }

    /// Predictions in the response's units: for the ramp loss the score is
    /// clipped to [-1, 1].
    pub fn response_scale(&self, f: f64) -> f64 {
        match self.loss.kind {
            LossKind::Ramp => clip_unit(f),
            _ => f,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[inline]
pub fn sign_label(f: f64) -> f64 {
    if f >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
