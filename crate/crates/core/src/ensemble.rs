//! Sequential tree generation with subsampling, shrinkage memory and
//! randomized tree sizes.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{config, domain, Result};
use crate::loss::{self, LossKind, LossSpec};
use crate::rng;
use crate::tree::{grow_tree, sample_tree_size, NodeKind, Tree, TreeGrowthConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_trees: usize,
    pub nu: f64,
    /// Subsample size; `None` means `default_eta(N)`.
    pub eta: Option<usize>,
    pub lbar: f64,
    pub kappa: f64,
    pub min_node_rows: usize,
    pub loss: LossSpec,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            n_trees: 333,
            nu: 0.01,
            eta: None,
            lbar: 4.0,
            kappa: 1.0,
            min_node_rows: 10,
            loss: LossSpec::squared(),
            seed: 0,
        }
    }
}

impl EnsembleConfig {
    pub fn resolved_eta(&self, n_rows: usize) -> usize {
        self.eta.unwrap_or_else(|| default_eta(n_rows))
    }

    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.n_trees < 1 {
            return config("the ensemble needs at least one tree");
        }
        if !(0.0..=1.0).contains(&self.nu) {
            return config(format!("shrinkage nu {} outside [0, 1]", self.nu));
        }
        let eta = self.resolved_eta(n_rows);
        if eta < 1 || eta > n_rows {
            return config(format!("subsample size {eta} outside [1, {n_rows}]"));
        }
        if !(self.lbar >= 2.0) {
            return config(format!("average tree size {} must be >= 2", self.lbar));
        }
        if !(self.kappa >= 1.0) {
            return config(format!("kappa {} must be >= 1", self.kappa));
        }
        if self.min_node_rows < 1 {
            return config("min_node_rows must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEnsemble {
    pub f0: f64,
    pub nu: f64,
    pub trees: Vec<Tree>,
    /// Drawn target sizes `t_m`.
    pub target_sizes: Vec<usize>,
    /// Realized terminal counts (can fall short of the target).
    pub sizes: Vec<usize>,
    /// Huber transition point used at each iteration (0 for other losses).
    pub deltas: Vec<f64>,
}

impl TreeEnsemble {
    /// Number of rules extracted before deduplication, `sum 2 (t_m - 1)`.
    pub fn n_node_rules(&self) -> usize {
        self.sizes.iter().map(|&t| 2 * (t - 1)).sum()
    }
}

/// `floor(min(N / 2, 100 + 6 sqrt(N)))`, at least 1.
pub fn default_eta(n: usize) -> usize {
    let n = n as f64;
    ((n / 2.0).min(100.0 + 6.0 * n.sqrt()).floor() as usize).max(1)
}

pub fn generate_ensemble(data: &Dataset, cfg: &EnsembleConfig) -> Result<TreeEnsemble> {
    let n = data.n_rows();
    if n == 0 {
        return domain("cannot build an ensemble on an empty dataset");
    }
    cfg.validate(n)?;
    cfg.loss.validate(data.task())?;
    let eta = cfg.resolved_eta(n);
    let y = data.response();
    let mut rng = rng::stream(cfg.seed, rng::STREAM_ENSEMBLE);

    let f0 = loss::constant_minimizer(&cfg.loss, y)?;
    let mut memory = vec![f0; n];
    let mut targets = vec![0.0; n];
    let mut trees = Vec::with_capacity(cfg.n_trees);
    let mut target_sizes = Vec::with_capacity(cfg.n_trees);
    let mut sizes = Vec::with_capacity(cfg.n_trees);
    let mut deltas = Vec::with_capacity(cfg.n_trees);
    let mut leaf_y = Vec::new();
    let mut leaf_f = Vec::new();

    for _ in 0..cfg.n_trees {
        let mut spec = cfg.loss;
        if spec.kind == LossKind::Huber {
            let resid: Vec<f64> = y.iter().zip(&memory).map(|(a, b)| a - b).collect();
            spec.delta = loss::huber_delta(&resid, spec.alpha)?;
        }
        deltas.push(spec.delta);

        let mut rows = index::sample(&mut rng, n, eta).into_vec();
        rows.sort_unstable();
        for &i in &rows {
            targets[i] = spec.negative_gradient(y[i], memory[i]);
        }
        let t = sample_tree_size(cfg.lbar, &mut rng)?;
        let growth = TreeGrowthConfig {
            target_terminals: t,
            min_node_rows: cfg.min_node_rows,
            kappa: cfg.kappa,
        };
        let mut tree = grow_tree(data, &targets, &rows, &growth)?;

        let leaf_of: Vec<usize> = rows.iter().map(|&i| tree.leaf_for_row(data, i)).collect();
        for idx in 0..tree.nodes.len() {
            if !matches!(tree.nodes[idx].kind, NodeKind::Leaf) {
                continue;
            }
            leaf_y.clear();
            leaf_f.clear();
            for (p, &i) in rows.iter().enumerate() {
                if leaf_of[p] == idx {
                    leaf_y.push(y[i]);
                    leaf_f.push(memory[i]);
                }
            }
            tree.nodes[idx].value = loss::line_search(&spec, &leaf_y, &leaf_f);
        }
        for (i, f) in memory.iter_mut().enumerate() {
            *f += cfg.nu * tree.nodes[tree.leaf_for_row(data, i)].value;
        }
        target_sizes.push(t);
        sizes.push(tree.n_terminals());
        trees.push(tree);
    }
    Ok(TreeEnsemble {
        f0,
        nu: cfg.nu,
        trees,
        target_sizes,
        sizes,
        deltas,
    })
}

/// `F_m(x) = f0 + nu * sum_{k <= m} f_k(x)`.
pub fn memory_predict(ens: &TreeEnsemble, nu: f64, x: &[f64], m: usize) -> f64 {
    ens.f0
        + nu * ens.trees[..m.min(ens.trees.len())]
            .iter()
            .map(|t| crate::tree::predict_tree(t, x))
            .sum::<f64>()
}
