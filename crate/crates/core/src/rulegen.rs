//! Rules read off tree nodes, their supports, and the fitting basis of rules
//! plus normalized winsorized linear terms.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::dataset::{self, ColumnKind, Dataset, VarLimits, Variable, WinsorLimits};
use crate::ensemble::TreeEnsemble;
use crate::error::{domain, Result};
use crate::sparsefit::{Design, DesignColumn};
use crate::tree::{NodeKind, SplitRule, Tree};

/// Scale applied to standardized linear terms, the average standard deviation
/// of a rule with uniformly distributed support.
pub const LINEAR_SCALE: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Condition {
    /// `lo < x <= hi`; a missing end is unbounded.
    InInterval { lo: Option<f64>, hi: Option<f64> },
    InSet { set: Vec<u32> },
    NotInSet { set: Vec<u32> },
}

fn is_member(set: &[u32], x: f64) -> bool {
    x >= 0.0 && set.binary_search(&(x as u32)).is_ok()
}

impl Condition {
    #[inline]
    pub fn holds(&self, x: f64) -> bool {
        match self {
            Condition::InInterval { lo, hi } => {
                lo.is_none_or(|l| x > l) && hi.is_none_or(|h| x <= h)
            }
            Condition::InSet { set } => is_member(set, x),
            Condition::NotInSet { set } => !is_member(set, x),
        }
    }

    fn intersect(&self, other: &Condition) -> Condition {
        use Condition::*;
        match (self, other) {
            (InInterval { lo: l1, hi: h1 }, InInterval { lo: l2, hi: h2 }) => InInterval {
                lo: match (l1, l2) {
                    (Some(a), Some(b)) => Some(a.max(*b)),
                    (a, b) => a.or(*b),
                },
                hi: match (h1, h2) {
                    (Some(a), Some(b)) => Some(a.min(*b)),
                    (a, b) => a.or(*b),
                },
            },
            (InSet { set: a }, InSet { set: b }) => InSet {
                set: a.iter().filter(|v| b.contains(v)).copied().collect(),
            },
            (NotInSet { set: a }, NotInSet { set: b }) => {
                let mut set: Vec<u32> = a.iter().chain(b).copied().collect();
                set.sort_unstable();
                set.dedup();
                NotInSet { set }
            }
            (InSet { set: a }, NotInSet { set: b }) | (NotInSet { set: b }, InSet { set: a }) => {
                InSet {
                    set: a.iter().filter(|v| !b.contains(v)).copied().collect(),
                }
            }
            _ => unreachable!("numeric and categorical conditions on one variable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjunct {
    pub var: usize,
    #[serde(flatten)]
    pub condition: Condition,
}

/// Conjunction of per-variable conditions, sorted by variable, with at most
/// one conjunct per variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conjuncts: Vec<Conjunct>,
    pub support: f64,
    pub scale: f64,
    /// `(tree index, node index)` the rule was read from.
    pub source: (usize, usize),
}

impl Rule {
    pub fn new(conjuncts: Vec<Conjunct>, source: (usize, usize)) -> Self {
        let mut rule = Rule {
            conjuncts: Vec::new(),
            support: 0.0,
            scale: 0.0,
            source,
        };
        for c in conjuncts {
            rule.add(c.var, c.condition);
        }
        rule
    }

    fn add(&mut self, var: usize, condition: Condition) {
        match self.conjuncts.binary_search_by_key(&var, |c| c.var) {
            Ok(pos) => {
                let merged = self.conjuncts[pos].condition.intersect(&condition);
                self.conjuncts[pos].condition = merged;
            }
            Err(pos) => self.conjuncts.insert(pos, Conjunct { var, condition }),
        }
    }

    /// Evaluate with `value_of(var)` supplying the input values.
    #[inline]
    pub fn eval_by(&self, value_of: impl Fn(usize) -> f64) -> bool {
        debug_assert!(!self.conjuncts.is_empty(), "rule without conjuncts");
        self.conjuncts.iter().all(|c| c.condition.holds(value_of(c.var)))
    }

    pub fn eval(&self, x: &[f64]) -> bool {
        self.eval_by(|j| x[j])
    }

    pub fn eval_row(&self, data: &Dataset, row: usize) -> bool {
        self.eval_by(|j| data.value(row, j))
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.conjuncts.iter().map(|c| c.var)
    }

    /// Number of distinct variables, `m_k`.
    pub fn n_vars(&self) -> usize {
        self.conjuncts.len()
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.conjuncts.binary_search_by_key(&var, |c| c.var).is_ok()
    }

    /// Rows of `data` on which the rule fires.
    pub fn matching_rows(&self, data: &Dataset) -> Vec<u32> {
        let mut rows: Vec<u32> = Vec::new();
        let mut first = true;
        for c in &self.conjuncts {
            let values = &data.column(c.var).values;
            if first {
                rows = (0..data.n_rows() as u32)
                    .filter(|&i| c.condition.holds(values[i as usize]))
                    .collect();
                first = false;
            } else {
                rows.retain(|&i| c.condition.holds(values[i as usize]));
            }
        }
        rows
    }

    /// Canonical identity of the condition set.
    pub fn key(&self) -> Vec<u64> {
        let mut key = Vec::with_capacity(4 * self.conjuncts.len());
        let bound = |v: Option<f64>| v.map_or(u64::MAX, |x| (x + 0.0).to_bits());
        for c in &self.conjuncts {
            key.push(c.var as u64);
            match &c.condition {
                Condition::InInterval { lo, hi } => {
                    key.extend([0, bound(*lo), bound(*hi)]);
                }
                Condition::InSet { set } | Condition::NotInSet { set } => {
                    let tag = if matches!(c.condition, Condition::InSet { .. }) { 1 } else { 2 };
                    key.extend([tag, set.len() as u64]);
                    key.extend(set.iter().map(|&v| v as u64));
                }
            }
        }
        key
    }

    /// Human-readable form such as `0.25 < x6 <= 0.75 & x2 in {a, b}`.
    pub fn describe(&self, variables: &[Variable]) -> String {
        self.conjuncts
            .iter()
            .map(|c| {
                let var = &variables[c.var];
                let levels = |set: &[u32]| {
                    let names: Vec<&str> = set
                        .iter()
                        .map(|&l| match &var.kind {
                            ColumnKind::Categorical { levels } => levels[l as usize].as_str(),
                            ColumnKind::Numeric => "?",
                        })
                        .collect();
                    format!("{{{}}}", names.join(", "))
                };
                match &c.condition {
                    Condition::InInterval { lo, hi } => match (lo, hi) {
                        (Some(l), Some(h)) => format!("{l} < {} <= {h}", var.name),
                        (Some(l), None) => format!("{} > {l}", var.name),
                        (None, Some(h)) => format!("{} <= {h}", var.name),
                        (None, None) => format!("{} any", var.name),
                    },
                    Condition::InSet { set } => format!("{} in {}", var.name, levels(set)),
                    Condition::NotInSet { set } => format!("{} not in {}", var.name, levels(set)),
                }
            })
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

fn edge_conditions(rule: &SplitRule) -> (Condition, Condition) {
    match rule {
        SplitRule::Threshold(t) => (
            Condition::InInterval { lo: None, hi: Some(*t) },
            Condition::InInterval { lo: Some(*t), hi: None },
        ),
        SplitRule::LeftSet(set) => (
            Condition::InSet { set: set.clone() },
            Condition::NotInSet { set: set.clone() },
        ),
    }
}

/// One rule per non-root node, in node-index order; support and scale are
/// left at zero until [`compute_support`].
pub fn extract_rules(tree: &Tree, tree_index: usize) -> Vec<Rule> {
    let mut rules: Vec<Option<Rule>> = vec![None; tree.nodes.len()];
    for (idx, node) in tree.nodes.iter().enumerate() {
        if let NodeKind::Split {
            split, left, right, ..
        } = &node.kind
        {
            let (lc, rc) = edge_conditions(&split.rule);
            for (child, cond) in [(*left, lc), (*right, rc)] {
                let mut rule = match &rules[idx] {
                    Some(parent) => Rule {
                        source: (tree_index, child),
                        ..parent.clone()
                    },
                    None => Rule::new(Vec::new(), (tree_index, child)),
                };
                rule.add(split.var, cond);
                rules[child] = Some(rule);
            }
        }
    }
    rules.into_iter().flatten().collect()
}

/// Fraction of rows on which the rule fires; caches support and scale.
pub fn compute_support(rule: &mut Rule, data: &Dataset) -> f64 {
    let n = data.n_rows();
    let fired = (0..n).filter(|&i| rule.eval_row(data, i)).count();
    set_support(rule, fired as f64 / n as f64);
    rule.support
}

fn set_support(rule: &mut Rule, s: f64) {
    rule.support = s;
    rule.scale = (s * (1.0 - s)).sqrt();
}

/// A winsorized numeric input with its training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub var: usize,
    pub limits: VarLimits,
    /// Mean of the winsorized variable on the training data.
    pub mean: f64,
    /// Population standard deviation of the winsorized variable.
    pub std: f64,
}

impl LinearTerm {
    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        dataset::winsorize(x, &self.limits)
    }

    /// Multiplier taking the winsorized variable to its fitting column.
    pub fn normalization(&self) -> f64 {
        LINEAR_SCALE / self.std
    }
}

/// Linear terms for every numeric variable with non-zero winsorized spread.
pub fn linear_terms(data: &Dataset, limits: &WinsorLimits) -> Vec<LinearTerm> {
    (0..data.n_vars())
        .filter_map(|j| {
            let lim = *limits.get(j)?;
            let values: Vec<f64> = data
                .column(j)
                .values
                .iter()
                .map(|&x| dataset::winsorize(x, &lim))
                .collect();
            let std = dataset::std_dev(&values);
            (std > 0.0).then(|| LinearTerm {
                var: j,
                limits: lim,
                mean: dataset::mean(&values),
                std,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub rules: Vec<Rule>,
    pub linear: Vec<LinearTerm>,
    /// Rules extracted before deduplication and support filtering.
    pub n_rules_raw: usize,
}

impl Basis {
    pub fn n_terms(&self) -> usize {
        self.rules.len() + self.linear.len()
    }

    /// Fitting columns: raw rule indicators, then `0.4 l_j / std(l_j)`.
    pub fn design(&self, data: &Dataset) -> Design {
        let mut columns: Vec<DesignColumn> = self
            .rules
            .iter()
            .map(|r| DesignColumn::Binary(r.matching_rows(data)))
            .collect();
        for term in &self.linear {
            let scale = term.normalization();
            columns.push(DesignColumn::Dense(
                data.column(term.var)
                    .values
                    .iter()
                    .map(|&x| scale * term.value(x))
                    .collect(),
            ));
        }
        Design {
            n_rows: data.n_rows(),
            columns,
        }
    }
}

/// Rules from every tree node (deduplicated, zero-variance rules dropped)
/// plus linear terms for the numeric inputs.
pub fn build_basis(ens: &TreeEnsemble, data: &Dataset, limits: &WinsorLimits) -> Result<Basis> {
    if ens.trees.is_empty() {
        return domain("cannot build a basis from an empty ensemble");
    }
    let n = data.n_rows() as f64;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut rules = Vec::new();
    let mut n_raw = 0;
    for (m, tree) in ens.trees.iter().enumerate() {
        for mut rule in extract_rules(tree, m) {
            n_raw += 1;
            if !seen.insert(rule.key()) {
                continue;
            }
            let fired = rule.matching_rows(data).len();
            if fired == 0 || fired == data.n_rows() {
                continue;
            }
            set_support(&mut rule, fired as f64 / n);
            rules.push(rule);
        }
    }
    Ok(Basis {
        rules,
        linear: linear_terms(data, limits),
        n_rules_raw: n_raw,
    })
}
