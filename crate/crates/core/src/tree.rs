//! Least-squares regression trees grown best-first to a prescribed number of
//! terminal nodes, with an optional incentive (`kappa`) for re-splitting on
//! variables already used along the root path.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use crate::dataset::{ColumnKind, Dataset};
use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// Left iff `x <= threshold`.
    Threshold(f64),
    /// Left iff the level id is in the (sorted) set.
    LeftSet(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub var: usize,
    pub rule: SplitRule,
}

impl SplitSpec {
    #[inline]
    pub fn goes_left(&self, x: f64) -> bool {
        match &self.rule {
            SplitRule::Threshold(t) => x <= *t,
            SplitRule::LeftSet(set) => x >= 0.0 && set.binary_search(&(x as u32)).is_ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf,
    Split {
        split: SplitSpec,
        left: usize,
        right: usize,
        improvement: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub depth: usize,
    /// Sorted variables split on by the ancestors of this node.
    pub path_vars: Vec<usize>,
    pub n_rows: usize,
    pub value: f64,
    pub kind: NodeKind,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }
}

/// Arena-allocated binary tree; `nodes[0]` is the root and every child has a
/// larger index than its parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn n_terminals(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    /// Index of the leaf reached by `value_of(var)`.
    #[inline]
    pub fn leaf_by(&self, value_of: impl Fn(usize) -> f64) -> usize {
        let mut idx = 0;
        loop {
            match &self.nodes[idx].kind {
                NodeKind::Leaf => return idx,
                NodeKind::Split {
                    split, left, right, ..
                } => {
                    idx = if split.goes_left(value_of(split.var)) {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn leaf_for(&self, x: &[f64]) -> usize {
        self.leaf_by(|j| x[j])
    }

    pub fn leaf_for_row(&self, data: &Dataset, row: usize) -> usize {
        self.leaf_by(|j| data.value(row, j))
    }
}

pub fn predict_tree(tree: &Tree, x: &[f64]) -> f64 {
    tree.nodes[tree.leaf_for(x)].value
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeGrowthConfig {
    pub target_terminals: usize,
    pub min_node_rows: usize,
    pub kappa: f64,
}

impl TreeGrowthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_terminals < 2 {
            return domain("trees need at least two terminal nodes");
        }
        if self.min_node_rows < 1 {
            return domain("min_node_rows must be at least 1");
        }
        if !(self.kappa >= 1.0) {
            return domain(format!("kappa {} must be >= 1", self.kappa));
        }
        Ok(())
    }
}

/// Terminal-node count `2 + floor(gamma)` with `gamma` exponential of mean
/// `lbar - 2`; always 2 when `lbar == 2`.
pub fn sample_tree_size<R: Rng + ?Sized>(lbar: f64, rng: &mut R) -> Result<usize> {
    if !(lbar >= 2.0) {
        return domain(format!("average tree size {lbar} must be >= 2"));
    }
    if lbar == 2.0 {
        return Ok(2);
    }
    let exp = Exp::new(1.0 / (lbar - 2.0)).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let gamma: f64 = exp.sample(rng);
    Ok(2 + gamma.floor() as usize)
}

/// Best split of `rows` on a single variable under squared-error impurity.
/// Returns `None` when no partition leaves `min_node_rows` on both sides.
pub fn best_split(
    data: &Dataset,
    rows: &[usize],
    var: usize,
    targets: &[f64],
    min_node_rows: usize,
) -> Option<(SplitSpec, f64)> {
    let column = data.column(var);
    match &column.kind {
        ColumnKind::Numeric => {
            let mut pairs: Vec<(f64, f64)> = rows
                .iter()
                .map(|&i| (column.values[i], targets[i]))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            scan_numeric(&pairs, min_node_rows.max(1))
                .map(|(t, z)| (SplitSpec { var, rule: SplitRule::Threshold(t) }, z))
        }
        ColumnKind::Categorical { levels } => {
            let mut sums = vec![(0.0f64, 0usize); levels.len()];
            for &i in rows {
                let l = column.values[i] as usize;
                sums[l].0 += targets[i];
                sums[l].1 += 1;
            }
            scan_categorical(&sums, min_node_rows.max(1))
                .map(|(set, z)| (SplitSpec { var, rule: SplitRule::LeftSet(set) }, z))
        }
    }
}

/// `pairs` sorted by value. Threshold placed midway between adjacent
/// distinct values; ties in improvement keep the smaller threshold.
fn scan_numeric(pairs: &[(f64, f64)], min_rows: usize) -> Option<(f64, f64)> {
    let n = pairs.len();
    if n < 2 * min_rows {
        return None;
    }
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let base = total * total / n as f64;
    let mut best: Option<(f64, f64)> = None;
    let mut left_sum = 0.0;
    for k in 0..n - 1 {
        left_sum += pairs[k].1;
        let n_left = k + 1;
        if pairs[k].0 == pairs[k + 1].0 || n_left < min_rows || n - n_left < min_rows {
            continue;
        }
        let right_sum = total - left_sum;
        let z = left_sum * left_sum / n_left as f64 + right_sum * right_sum / (n - n_left) as f64
            - base;
        let z = z.max(0.0);
        if best.is_none_or(|(_, bz)| z > bz) {
            best = Some((0.5 * (pairs[k].0 + pairs[k + 1].0), z));
        }
    }
    best
}

/// Per-level `(target sum, count)`. Levels present in the node are ordered by
/// mean target (ties by level id) and scanned like an ordinal variable.
fn scan_categorical(sums: &[(f64, usize)], min_rows: usize) -> Option<(Vec<u32>, f64)> {
    let mut present: Vec<usize> = (0..sums.len()).filter(|&l| sums[l].1 > 0).collect();
    if present.len() < 2 {
        return None;
    }
    present.sort_by(|&a, &b| {
        let ma = sums[a].0 / sums[a].1 as f64;
        let mb = sums[b].0 / sums[b].1 as f64;
        ma.total_cmp(&mb).then(a.cmp(&b))
    });
    let n: usize = present.iter().map(|&l| sums[l].1).sum();
    let total: f64 = present.iter().map(|&l| sums[l].0).sum();
    let base = total * total / n as f64;
    let mut best: Option<(usize, f64)> = None;
    let (mut left_sum, mut n_left) = (0.0, 0usize);
    for k in 0..present.len() - 1 {
        left_sum += sums[present[k]].0;
        n_left += sums[present[k]].1;
        if n_left < min_rows || n - n_left < min_rows {
            continue;
        }
        let right_sum = total - left_sum;
        let z = (left_sum * left_sum / n_left as f64
            + right_sum * right_sum / (n - n_left) as f64
            - base)
            .max(0.0);
        if best.is_none_or(|(_, bz)| z > bz) {
            best = Some((k + 1, z));
        }
    }
    best.map(|(k, z)| {
        let mut set: Vec<u32> = present[..k].iter().map(|&l| l as u32).collect();
        set.sort_unstable();
        (set, z)
    })
}

struct Candidate {
    split: SplitSpec,
    improvement: f64,
    priority: f64,
}

struct Grower<'a> {
    data: &'a Dataset,
    targets: &'a [f64],
    rows: &'a [usize],
    /// For numeric variables: positions into `rows` sorted by value.
    sorted: Vec<Option<Vec<u32>>>,
    /// Node index of each position in `rows`.
    node_of: Vec<usize>,
    cfg: TreeGrowthConfig,
}

impl Grower<'_> {
    fn candidate(&self, node: usize, path_vars: &[usize]) -> Option<Candidate> {
        let mut best: Option<Candidate> = None;
        let mut pairs = Vec::new();
        for var in 0..self.data.n_vars() {
            let column = self.data.column(var);
            let found = match &self.sorted[var] {
                Some(order) => {
                    pairs.clear();
                    pairs.extend(order.iter().filter_map(|&p| {
                        let p = p as usize;
                        (self.node_of[p] == node).then(|| {
                            let i = self.rows[p];
                            (column.values[i], self.targets[i])
                        })
                    }));
                    scan_numeric(&pairs, self.cfg.min_node_rows)
                        .map(|(t, z)| (SplitRule::Threshold(t), z))
                }
                None => {
                    let mut sums = vec![(0.0f64, 0usize); column.kind.n_levels()];
                    for (p, &i) in self.rows.iter().enumerate() {
                        if self.node_of[p] == node {
                            let l = column.values[i] as usize;
                            sums[l].0 += self.targets[i];
                            sums[l].1 += 1;
                        }
                    }
                    scan_categorical(&sums, self.cfg.min_node_rows)
                        .map(|(s, z)| (SplitRule::LeftSet(s), z))
                }
            };
            if let Some((rule, z)) = found {
                let kappa = if path_vars.binary_search(&var).is_ok() {
                    self.cfg.kappa
                } else {
                    1.0
                };
                let priority = kappa * z;
                if best.as_ref().is_none_or(|b| priority > b.priority) {
                    best = Some(Candidate {
                        split: SplitSpec { var, rule },
                        improvement: z,
                        priority,
                    });
                }
            }
        }
        best
    }
}

/// Grow a tree on `rows` (indices into `data`) fitting `targets` (indexed by
/// row id). Growth is best-first: the frontier leaf with the largest
/// kappa-weighted improvement is split until `target_terminals` leaves exist
/// or no leaf admits a split. Node values are mean targets.
pub fn grow_tree(
    data: &Dataset,
    targets: &[f64],
    rows: &[usize],
    cfg: &TreeGrowthConfig,
) -> Result<Tree> {
    cfg.validate()?;
    if rows.is_empty() {
        return domain("cannot grow a tree on an empty row set");
    }
    let sorted = (0..data.n_vars())
        .map(|var| {
            let column = data.column(var);
            column.kind.is_numeric().then(|| {
                let mut order: Vec<u32> = (0..rows.len() as u32).collect();
                order.sort_by(|&a, &b| {
                    column.values[rows[a as usize]].total_cmp(&column.values[rows[b as usize]])
                });
                order
            })
        })
        .collect();
    let mut grower = Grower {
        data,
        targets,
        rows,
        sorted,
        node_of: vec![0; rows.len()],
        cfg: *cfg,
    };

    let root_sum: f64 = rows.iter().map(|&i| targets[i]).sum();
    let mut nodes = vec![TreeNode {
        depth: 0,
        path_vars: Vec::new(),
        n_rows: rows.len(),
        value: root_sum / rows.len() as f64,
        kind: NodeKind::Leaf,
    }];
    let mut frontier: Vec<(usize, Candidate)> = Vec::new();
    if let Some(c) = grower.candidate(0, &[]) {
        frontier.push((0, c));
    }
    let mut n_leaves = 1;

    while n_leaves < cfg.target_terminals && !frontier.is_empty() {
        // highest priority; ties to the lowest node index
        let mut pick = 0;
        for k in 1..frontier.len() {
            let (node_k, ref ck) = frontier[k];
            let (node_p, ref cp) = frontier[pick];
            if ck.priority > cp.priority || (ck.priority == cp.priority && node_k < node_p) {
                pick = k;
            }
        }
        let (node, cand) = frontier.swap_remove(pick);

        let left = nodes.len();
        let right = left + 1;
        let mut stats = [(0.0f64, 0usize); 2];
        for (p, &i) in rows.iter().enumerate() {
            if grower.node_of[p] == node {
                let side = if cand.split.goes_left(data.value(i, cand.split.var)) {
                    0
                } else {
                    1
                };
                grower.node_of[p] = left + side;
                stats[side].0 += targets[i];
                stats[side].1 += 1;
            }
        }
        let mut path_vars = nodes[node].path_vars.clone();
        if let Err(pos) = path_vars.binary_search(&cand.split.var) {
            path_vars.insert(pos, cand.split.var);
        }
        let depth = nodes[node].depth + 1;
        for (sum, count) in stats {
            nodes.push(TreeNode {
                depth,
                path_vars: path_vars.clone(),
                n_rows: count,
                value: sum / count as f64,
                kind: NodeKind::Leaf,
            });
        }
        nodes[node].kind = NodeKind::Split {
            split: cand.split,
            left,
            right,
            improvement: cand.improvement,
        };
        n_leaves += 1;
        for child in [left, right] {
            if let Some(c) = grower.candidate(child, &path_vars) {
                frontier.push((child, c));
            }
        }
    }
    Ok(Tree { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Task};
    use crate::rng;

    fn numeric_data(cols: Vec<Vec<f64>>) -> Dataset {
        let n = cols[0].len();
        Dataset::new(
            cols.into_iter()
                .enumerate()
                .map(|(j, v)| Column::numeric(format!("x{}", j + 1), v))
                .collect(),
            vec![0.0; n],
            Task::Regression,
        )
        .unwrap()
    }

    fn sse(v: &[f64]) -> f64 {
        if v.is_empty() {
            return 0.0;
        }
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum()
    }

    #[test]
    fn tree_size_draws() {
        let mut r = rng::stream(7, 0);
        for _ in 0..100 {
            assert_eq!(sample_tree_size(2.0, &mut r).unwrap(), 2);
            assert!(sample_tree_size(4.0, &mut r).unwrap() >= 2);
        }
        assert!(sample_tree_size(1.5, &mut r).is_err());
    }

    #[test]
    fn tree_size_mean_matches_series() {
        // E floor(gamma) = sum_{k>=1} P(gamma >= k) = sum_k exp(-k / 2)
        let analytic: f64 = (1..200).map(|k| (-(k as f64) / 2.0).exp()).sum();
        let mut r = rng::stream(11, 0);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| (sample_tree_size(4.0, &mut r).unwrap() - 2) as f64)
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - analytic).abs() < 3.0 * se, "{mean} vs {analytic} (se {se})");
    }

    #[test]
    fn perfect_split_recovers_threshold() {
        let x = vec![0.1, 0.2, 0.4, 0.5, 0.6, 0.9];
        let t = vec![1.0, 1.0, 1.0, 1.0, 5.0, 5.0];
        let data = numeric_data(vec![x]);
        let rows: Vec<usize> = (0..6).collect();
        let (spec, z) = best_split(&data, &rows, 0, &t, 1).unwrap();
        assert_eq!(spec.rule, SplitRule::Threshold(0.55));
        assert!((z - sse(&t)).abs() < 1e-12);
    }

    #[test]
    fn split_matches_exhaustive_enumeration() {
        let x = vec![0.3, 0.1, 0.8, 0.5, 0.5, 0.95];
        let t = vec![2.0, -1.0, 0.5, 3.0, 1.0, -2.0];
        let data = numeric_data(vec![x.clone()]);
        let rows: Vec<usize> = (0..6).collect();
        for min_rows in [1, 2] {
            let mut best = (f64::NEG_INFINITY, f64::NAN);
            let mut cuts: Vec<f64> = x.clone();
            cuts.sort_by(f64::total_cmp);
            cuts.dedup();
            for w in cuts.windows(2) {
                let thr = 0.5 * (w[0] + w[1]);
                let l: Vec<f64> = (0..6).filter(|&i| x[i] <= thr).map(|i| t[i]).collect();
                let r: Vec<f64> = (0..6).filter(|&i| x[i] > thr).map(|i| t[i]).collect();
                if l.len() < min_rows || r.len() < min_rows {
                    continue;
                }
                let z = sse(&t) - sse(&l) - sse(&r);
                if z > best.0 + 1e-12 {
                    best = (z, thr);
                }
            }
            let (spec, z) = best_split(&data, &rows, 0, &t, min_rows).unwrap();
            assert_eq!(spec.rule, SplitRule::Threshold(best.1));
            assert!((z - best.0).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_targets_have_no_gain() {
        let data = numeric_data(vec![vec![1.0, 2.0, 3.0, 4.0]]);
        let rows: Vec<usize> = (0..4).collect();
        let r = best_split(&data, &rows, 0, &[2.0; 4], 1);
        assert!(r.is_none_or(|(_, z)| z == 0.0));
        let same_x = numeric_data(vec![vec![1.0; 4]]);
        assert!(best_split(&same_x, &rows, 0, &[1.0, 2.0, 3.0, 4.0], 1).is_none());
    }

    #[test]
    fn categorical_split_orders_levels_by_mean() {
        let ids = vec![0, 0, 1, 1, 2, 2, 3, 3];
        let t = vec![5.0, 5.0, 0.0, 0.0, 4.0, 6.0, 1.0, -1.0];
        let data = Dataset::new(
            vec![Column::categorical(
                "c",
                vec!["a".into(), "b".into(), "c".into(), "d".into()],
                ids,
            )],
            vec![0.0; 8],
            Task::Regression,
        )
        .unwrap();
        let rows: Vec<usize> = (0..8).collect();
        let (spec, z) = best_split(&data, &rows, 0, &t, 1).unwrap();
        assert_eq!(spec.rule, SplitRule::LeftSet(vec![1, 3]));
        let l = [0.0, 0.0, 1.0, -1.0];
        let r = [5.0, 5.0, 4.0, 6.0];
        assert!((z - (sse(&t) - sse(&l) - sse(&r))).abs() < 1e-12);
        assert!(spec.goes_left(1.0) && !spec.goes_left(0.0));
        // unseen levels route right
        assert!(!spec.goes_left(crate::dataset::UNSEEN_LEVEL));
    }

    #[test]
    fn stump_is_global_best_split() {
        let x1 = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let x2 = vec![3.0, 1.0, 4.0, 1.5, 5.0, 9.0, 2.0, 6.0];
        let t = vec![0.0, 0.1, 0.0, 0.2, 2.0, 2.1, 0.0, 2.2];
        let data = numeric_data(vec![x1, x2]);
        let rows: Vec<usize> = (0..8).collect();
        let cfg = TreeGrowthConfig { target_terminals: 2, min_node_rows: 1, kappa: 1.0 };
        let tree = grow_tree(&data, &t, &rows, &cfg).unwrap();
        assert_eq!(tree.n_terminals(), 2);
        let best = (0..2)
            .filter_map(|v| best_split(&data, &rows, v, &t, 1))
            .fold(None::<(SplitSpec, f64)>, |acc, c| match acc {
                Some(a) if a.1 >= c.1 => Some(a),
                _ => Some(c),
            })
            .unwrap();
        match &tree.nodes[0].kind {
            NodeKind::Split { split, improvement, .. } => {
                assert_eq!(*split, best.0);
                assert!((improvement - best.1).abs() < 1e-12);
            }
            NodeKind::Leaf => panic!("root not split"),
        }
    }

    #[test]
    fn leaf_values_are_training_means() {
        let n = 60;
        let x1: Vec<f64> = (0..n).map(|i| ((i * 37) % 60) as f64 / 60.0).collect();
        let x2: Vec<f64> = (0..n).map(|i| ((i * 13) % 17) as f64).collect();
        let t: Vec<f64> = (0..n).map(|i| (x1[i] * 6.0).sin() + 0.1 * x2[i]).collect();
        let data = numeric_data(vec![x1, x2]);
        let rows: Vec<usize> = (0..n).step_by(2).collect();
        let cfg = TreeGrowthConfig { target_terminals: 6, min_node_rows: 3, kappa: 1.0 };
        let tree = grow_tree(&data, &t, &rows, &cfg).unwrap();
        assert_eq!(tree.n_terminals(), 6);
        for (idx, node) in tree.nodes.iter().enumerate() {
            if !node.is_leaf() {
                continue;
            }
            let members: Vec<f64> = rows
                .iter()
                .filter(|&&i| tree.leaf_for_row(&data, i) == idx)
                .map(|&i| t[i])
                .collect();
            assert_eq!(members.len(), node.n_rows);
            assert!(node.n_rows >= 3);
            let m = members.iter().sum::<f64>() / members.len() as f64;
            for &i in &rows {
                if tree.leaf_for_row(&data, i) == idx {
                    assert!((predict_tree(&tree, &data.row(i)) - m).abs() < 1e-12);
                }
            }
        }
        for node in &tree.nodes {
            if let NodeKind::Split { improvement, .. } = node.kind {
                assert!(improvement >= 0.0);
            }
        }
    }

    #[test]
    fn threshold_boundary_goes_left() {
        let tree = Tree {
            nodes: vec![
                TreeNode {
                    depth: 0,
                    path_vars: vec![],
                    n_rows: 2,
                    value: 1.5,
                    kind: NodeKind::Split {
                        split: SplitSpec { var: 0, rule: SplitRule::Threshold(0.5) },
                        left: 1,
                        right: 2,
                        improvement: 0.5,
                    },
                },
                TreeNode { depth: 1, path_vars: vec![0], n_rows: 1, value: 1.0, kind: NodeKind::Leaf },
                TreeNode { depth: 1, path_vars: vec![0], n_rows: 1, value: 2.0, kind: NodeKind::Leaf },
            ],
        };
        assert_eq!(predict_tree(&tree, &[0.3]), 1.0);
        assert_eq!(predict_tree(&tree, &[0.5]), 1.0);
        assert_eq!(predict_tree(&tree, &[0.51]), 2.0);
    }

    /// x2 is x1 with rows 9 and 10 swapped: both split the root identically,
    /// but x2 separates the secondary step inside the left child exactly.
    fn kappa_instance() -> (Dataset, Vec<f64>) {
        let n = 40;
        let x1: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let mut x2 = x1.clone();
        x2.swap(9, 10);
        let t: Vec<f64> = (0..n)
            .map(|i| {
                if i >= 20 {
                    10.0
                } else if (i >= 11 || i == 9) && i != 10 {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        (numeric_data(vec![x1, x2]), t)
    }

    fn split_vars(tree: &Tree) -> Vec<usize> {
        tree.nodes
            .iter()
            .filter_map(|n| match &n.kind {
                NodeKind::Split { split, .. } => Some(split.var),
                NodeKind::Leaf => None,
            })
            .collect()
    }

    #[test]
    fn kappa_favours_reusing_root_variable() {
        let (data, t) = kappa_instance();
        let rows: Vec<usize> = (0..40).collect();
        let plain = TreeGrowthConfig { target_terminals: 3, min_node_rows: 1, kappa: 1.0 };
        let tree1 = grow_tree(&data, &t, &rows, &plain).unwrap();
        assert_eq!(split_vars(&tree1), vec![0, 1]);
        let tree10 = grow_tree(&data, &t, &rows, &TreeGrowthConfig { kappa: 10.0, ..plain }).unwrap();
        assert_eq!(split_vars(&tree10), vec![0, 0]);
    }

    #[test]
    fn column_order_invariance_without_ties() {
        let n = 80;
        let mut r = rng::stream(3, 0);
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| r.random::<f64>()).collect()).collect();
        let t: Vec<f64> = (0..n).map(|i| cols[0][i] * cols[1][i] + (cols[2][i] * 5.0).cos()).collect();
        let a = numeric_data(cols.clone());
        let b = numeric_data(vec![cols[2].clone(), cols[0].clone(), cols[1].clone()]);
        let rows: Vec<usize> = (0..n).collect();
        let cfg = TreeGrowthConfig { target_terminals: 7, min_node_rows: 2, kappa: 1.0 };
        let ta = grow_tree(&a, &t, &rows, &cfg).unwrap();
        let tb = grow_tree(&b, &t, &rows, &cfg).unwrap();
        for i in 0..n {
            assert_eq!(predict_tree(&ta, &a.row(i)), predict_tree(&tb, &b.row(i)));
        }
    }

    #[test]
    fn empty_rows_rejected() {
        let data = numeric_data(vec![vec![1.0, 2.0]]);
        let cfg = TreeGrowthConfig { target_terminals: 2, min_node_rows: 1, kappa: 1.0 };
        assert!(grow_tree(&data, &[0.0, 1.0], &[], &cfg).is_err());
    }
}
