//! End-to-end fitting: ensemble generation, basis construction, penalty path,
//! penalty selection and model assembly.

use serde::{Deserialize, Serialize};

use crate::dataset::{compute_winsor_limits, Dataset};
use crate::ensemble::{generate_ensemble, EnsembleConfig, TreeEnsemble};
use crate::error::{config, domain, Result};
use crate::loss::LossSpec;
use crate::model::{EnsembleModel, LinearCoef, PathSummary, RuleTerm};
use crate::rulegen::{build_basis, linear_terms, Basis};
use crate::sparsefit::{fit_path, resolve_lambdas, select_lambda, Design, FitConfig, PathPoint, Selected};

/// Which candidate terms enter the lasso.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermSet {
    Both,
    Rules,
    Linear,
}

impl std::str::FromStr for TermSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "both" => Ok(TermSet::Both),
            "rules" => Ok(TermSet::Rules),
            "linear" => Ok(TermSet::Linear),
            other => Err(format!("unknown term set '{other}' (expected both|rules|linear)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleFitConfig {
    pub ensemble: EnsembleConfig,
    /// Winsorizing fraction for linear terms.
    pub beta: f64,
    pub terms: TermSet,
    pub fit: FitConfig,
}

impl Default for RuleFitConfig {
    fn default() -> Self {
        RuleFitConfig {
            ensemble: EnsembleConfig::default(),
            beta: 0.025,
            terms: TermSet::Both,
            fit: FitConfig::default(),
        }
    }
}

impl RuleFitConfig {
    pub fn loss(&self) -> LossSpec {
        self.ensemble.loss
    }

    pub fn seed(&self) -> u64 {
        self.ensemble.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut c = self.clone();
        c.ensemble.seed = seed;
        c
    }

    pub fn with_loss(mut self, loss: LossSpec) -> Self {
        self.ensemble.loss = loss;
        self
    }

    pub fn with_terms(mut self, terms: TermSet) -> Self {
        self.terms = terms;
        self
    }

    /// Same settings restricted to stumps, giving a main-effects model.
    pub fn additive(&self) -> Self {
        let mut c = self.clone();
        c.ensemble.lbar = 2.0;
        c
    }
}

/// A fitted model with the intermediate objects it was built from.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: EnsembleModel,
    pub ensemble: Option<TreeEnsemble>,
    pub basis: Basis,
    pub path: Vec<PathPoint>,
    pub selection: Selected,
}

pub fn fit(data: &Dataset, cfg: &RuleFitConfig) -> Result<Fitted> {
    if data.n_rows() < 2 {
        return domain("fitting needs at least two rows");
    }
    cfg.ensemble.loss.validate(data.task())?;
    cfg.fit.validate()?;
    if !(0.0..0.5).contains(&cfg.beta) {
        return config(format!("winsorizing fraction {} outside [0, 0.5)", cfg.beta));
    }
    let limits = compute_winsor_limits(data, cfg.beta)?;
    let ensemble = match cfg.terms {
        TermSet::Linear => None,
        _ => Some(generate_ensemble(data, &cfg.ensemble)?),
    };
    let basis = match (&ensemble, cfg.terms) {
        (Some(ens), TermSet::Both) => build_basis(ens, data, &limits)?,
        (Some(ens), _) => {
            let mut b = build_basis(ens, data, &limits)?;
            b.linear.clear();
            b
        }
        (None, _) => Basis {
            rules: Vec::new(),
            linear: linear_terms(data, &limits),
            n_rules_raw: 0,
        },
    };
    if basis.n_terms() == 0 {
        return domain("no candidate terms: every rule and linear term is constant");
    }
    let design = basis.design(data);
    let y = data.response();
    let loss = cfg.ensemble.loss;
    let lambdas = resolve_lambdas(&design, y, &loss, &cfg.fit)?;
    let selection = select_lambda(&design, y, &loss, &lambdas, &cfg.fit, cfg.seed())?;
    let path = fit_path(&design, y, &loss, &lambdas, &cfg.fit)?;
    let model = assemble(data, cfg, &basis, &path, &selection, &limits, &ensemble);
    Ok(Fitted {
        model,
        ensemble,
        basis,
        path,
        selection,
    })
}

pub fn fit_model(data: &Dataset, cfg: &RuleFitConfig) -> Result<EnsembleModel> {
    Ok(fit(data, cfg)?.model)
}

fn assemble(
    data: &Dataset,
    cfg: &RuleFitConfig,
    basis: &Basis,
    path: &[PathPoint],
    selection: &Selected,
    limits: &crate::dataset::WinsorLimits,
    ensemble: &Option<TreeEnsemble>,
) -> EnsembleModel {
    let point = &path[selection.index];
    let n_rules = basis.rules.len();
    let mut rules = Vec::new();
    let mut linear = Vec::new();
    for &(k, a) in &point.coefs {
        if k < n_rules {
            rules.push(RuleTerm {
                rule: basis.rules[k].clone(),
                coefficient: a,
            });
        } else {
            let term = basis.linear[k - n_rules].clone();
            let coefficient = a * term.normalization();
            linear.push(LinearCoef { term, coefficient });
        }
    }
    let summaries = path
        .iter()
        .enumerate()
        .map(|(k, p)| PathSummary {
            lambda: p.lambda,
            n_nonzero: p.n_nonzero(),
            training_risk: p.risk,
            estimated_risk: selection.risks.get(k).copied(),
            converged: p.converged,
        })
        .collect();
    let mut loss = cfg.ensemble.loss;
    loss.delta = 0.0;
    EnsembleModel {
        version: env!("CARGO_PKG_VERSION").to_string(),
        task: data.task(),
        loss,
        target: None,
        variables: data.variables(),
        intercept: point.intercept,
        n_nonzero: rules.len() + linear.len(),
        rules,
        linear,
        winsor_limits: limits.clone(),
        selected_lambda: point.lambda,
        selected_index: selection.index,
        basis_size: basis.n_terms(),
        n_rules_generated: ensemble.as_ref().map_or(0, |e| e.n_node_rules()),
        path: summaries,
        config: cfg.clone(),
        seed: cfg.seed(),
    }
}

/// Predictions of path point `point` through the normalized design.
pub fn design_predictions(design: &Design, point: &PathPoint) -> Vec<f64> {
    design.predict(point.intercept, &point.coefs)
}
