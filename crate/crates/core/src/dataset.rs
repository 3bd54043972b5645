//! Tabular data: columns with a numeric or categorical kind, a response, and
//! the quantile/winsorizing helpers used to build linear basis terms.
//!
//! Values are stored column-major as `f64`. Categorical values hold their
//! dense level id (`0..levels.len()`); rows coming from unseen levels at
//! prediction time carry [`UNSEEN_LEVEL`].

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Level id assigned to categorical values not seen during training.
pub const UNSEEN_LEVEL: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    BinaryClassification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical { levels: Vec<String> },
}

impl ColumnKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, ColumnKind::Numeric)
    }

    pub fn n_levels(&self) -> usize {
        match self {
            ColumnKind::Numeric => 0,
            ColumnKind::Categorical { levels } => levels.len(),
        }
    }
}

/// Name and kind of one predictor, without its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub values: Vec<f64>,
}

impl Column {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Numeric,
            values,
        }
    }

    pub fn categorical(name: impl Into<String>, levels: Vec<String>, ids: Vec<usize>) -> Self {
        Column {
            name: name.into(),
            kind: ColumnKind::Categorical { levels },
            values: ids.into_iter().map(|v| v as f64).collect(),
        }
    }

    pub fn variable(&self) -> Variable {
        Variable {
            name: self.name.clone(),
            kind: self.kind.clone(),
        }
    }
}

/// Immutable training table.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Column>,
    response: Vec<f64>,
    task: Task,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, response: Vec<f64>, task: Task) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return domain("dataset has no rows");
        }
        for c in &columns {
            if c.values.len() != n {
                return Err(Error::Schema(format!(
                    "column '{}' has {} values, response has {}",
                    c.name,
                    c.values.len(),
                    n
                )));
            }
            match &c.kind {
                ColumnKind::Numeric => {
                    if let Some(i) = c.values.iter().position(|v| !v.is_finite()) {
                        return Err(Error::Schema(format!(
                            "column '{}' row {} is not finite",
                            c.name, i
                        )));
                    }
                }
                ColumnKind::Categorical { levels } => {
                    let k = levels.len() as f64;
                    if let Some(i) = c
                        .values
                        .iter()
                        .position(|&v| v < 0.0 || v >= k || v.fract() != 0.0)
                    {
                        return Err(Error::Schema(format!(
                            "column '{}' row {} is not a level id",
                            c.name, i
                        )));
                    }
                }
            }
        }
        if response.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema("response contains non-finite values".into()));
        }
        if task == Task::BinaryClassification && response.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(Error::Schema(
                "binary classification responses must be -1 or +1".into(),
            ));
        }
        Ok(Dataset {
            columns,
            response,
            task,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_vars(&self) -> usize {
        self.columns.len()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    #[inline]
    pub fn value(&self, row: usize, var: usize) -> f64 {
        self.columns[var].values[row]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[i]).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n_rows()).map(|i| self.row(i)).collect()
    }

    pub fn variables(&self) -> Vec<Variable> {
        self.columns.iter().map(Column::variable).collect()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// A new dataset made of the given rows (in order, duplicates allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                kind: c.kind.clone(),
                values: rows.iter().map(|&i| c.values[i]).collect(),
            })
            .collect();
        Dataset {
            columns,
            response: rows.iter().map(|&i| self.response[i]).collect(),
            task: self.task,
        }
    }

    /// Same predictors, different response.
    pub fn with_response(&self, response: Vec<f64>) -> Result<Dataset> {
        self.with_response_checked(response, self.task)
    }

    pub fn with_task(&self, task: Task) -> Result<Dataset> {
        Dataset::new(self.columns.clone(), self.response.clone(), task)
    }

    /// Same predictors, new response and task.
    pub fn with_target(&self, response: Vec<f64>, task: Task) -> Result<Dataset> {
        self.with_response_checked(response, task)
    }

    fn with_response_checked(&self, response: Vec<f64>, task: Task) -> Result<Dataset> {
        if response.len() != self.n_rows() {
            return Err(Error::Schema(format!(
                "replacement response has {} values, expected {}",
                response.len(),
                self.n_rows()
            )));
        }
        Dataset::new(self.columns.clone(), response, task)
    }
}

/// Column-kind declarations for [`load_csv`].
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub target: String,
    pub categorical: Vec<String>,
    pub task: Task,
}

impl CsvSchema {
    pub fn regression(target: impl Into<String>) -> Self {
        CsvSchema {
            target: target.into(),
            categorical: Vec::new(),
            task: Task::Regression,
        }
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn parse_number(token: &str, row: u64, column: &str) -> Result<f64> {
    if token.is_empty() {
        return Err(Error::Parse {
            row,
            message: format!("missing value in column '{column}'"),
        });
    }
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            message: format!("'{token}' in numeric column '{column}' is not a finite number"),
        }),
    }
}

/// Read a training table. Columns listed in `schema.categorical` get level ids
/// in first-appearance order; every other non-target column is numeric.
pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = reader(path.as_ref())?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let target_idx = header
        .iter()
        .position(|h| *h == schema.target)
        .ok_or_else(|| Error::Schema(format!("response column '{}' not found", schema.target)))?;
    for name in &schema.categorical {
        if !header.contains(name) {
            return Err(Error::Schema(format!("unknown categorical column '{name}'")));
        }
        if *name == schema.target {
            return Err(Error::Schema("the response cannot be categorical".into()));
        }
    }

    let predictors: Vec<usize> = (0..header.len()).filter(|&c| c != target_idx).collect();
    let is_cat: Vec<bool> = predictors
        .iter()
        .map(|&c| schema.categorical.contains(&header[c]))
        .collect();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); predictors.len()];
    let mut level_maps: Vec<HashMap<String, usize>> = vec![HashMap::new(); predictors.len()];
    let mut level_names: Vec<Vec<String>> = vec![Vec::new(); predictors.len()];
    let mut response = Vec::new();

    for rec in rdr.records() {
        let rec = rec?;
        let row = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        response.push(parse_number(&rec[target_idx], row, &schema.target)?);
        for (slot, &c) in predictors.iter().enumerate() {
            let token = &rec[c];
            if is_cat[slot] {
                if token.is_empty() {
                    return Err(Error::Parse {
                        row,
                        message: format!("missing value in column '{}'", header[c]),
                    });
                }
                let next = level_maps[slot].len();
                let id = *level_maps[slot].entry(token.to_string()).or_insert_with(|| {
                    level_names[slot].push(token.to_string());
                    next
                });
                values[slot].push(id as f64);
            } else {
                values[slot].push(parse_number(token, row, &header[c])?);
            }
        }
    }

    let columns = predictors
        .iter()
        .enumerate()
        .map(|(slot, &c)| Column {
            name: header[c].clone(),
            kind: if is_cat[slot] {
                ColumnKind::Categorical {
                    levels: std::mem::take(&mut level_names[slot]),
                }
            } else {
                ColumnKind::Numeric
            },
            values: std::mem::take(&mut values[slot]),
        })
        .collect();
    Dataset::new(columns, response, schema.task)
}

/// Read rows for an already-fitted variable set. Columns are matched by
/// name; categorical labels map to the training level ids, unseen labels to
/// [`UNSEEN_LEVEL`]. The response is returned when `target` is present in
/// the file.
pub fn read_rows(
    path: impl AsRef<Path>,
    vars: &[Variable],
    target: Option<&str>,
) -> Result<(Vec<Vec<f64>>, Option<Vec<f64>>)> {
    let mut rdr = reader(path.as_ref())?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let positions: Vec<usize> = vars
        .iter()
        .map(|v| {
            header
                .iter()
                .position(|h| *h == v.name)
                .ok_or_else(|| Error::Schema(format!("column '{}' not found", v.name)))
        })
        .collect::<Result<_>>()?;
    let target_pos = target.and_then(|t| header.iter().position(|h| h == t));
    let level_maps: Vec<Option<HashMap<&str, usize>>> = vars
        .iter()
        .map(|v| match &v.kind {
            ColumnKind::Numeric => None,
            ColumnKind::Categorical { levels } => Some(
                levels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.as_str(), i))
                    .collect(),
            ),
        })
        .collect();

    let mut rows = Vec::new();
    let mut response = target_pos.map(|_| Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::Parse {
                row: line,
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let mut row = Vec::with_capacity(vars.len());
        for (j, &p) in positions.iter().enumerate() {
            let token = &rec[p];
            match &level_maps[j] {
                None => row.push(parse_number(token, line, &vars[j].name)?),
                Some(map) => row.push(map.get(token).map_or(UNSEEN_LEVEL, |&id| id as f64)),
            }
        }
        rows.push(row);
        if let (Some(p), Some(resp)) = (target_pos, response.as_mut()) {
            resp.push(parse_number(&rec[p], line, target.unwrap_or_default())?);
        }
    }
    Ok((rows, response))
}

/// A dataset over a fitted variable set, read with [`read_rows`]. Every
/// categorical label must be a training level. Without a response column the
/// response is all zeros and the task is regression; the flag reports whether
/// the response was present.
pub fn load_for_variables(
    path: impl AsRef<Path>,
    vars: &[Variable],
    target: Option<&str>,
    task: Task,
) -> Result<(Dataset, bool)> {
    let (rows, response) = read_rows(path, vars, target)?;
    let columns = vars
        .iter()
        .enumerate()
        .map(|(j, v)| Column {
            name: v.name.clone(),
            kind: v.kind.clone(),
            values: rows.iter().map(|r| r[j]).collect(),
        })
        .collect();
    match response {
        Some(y) => Ok((Dataset::new(columns, y, task)?, true)),
        None => Ok((Dataset::new(columns, vec![0.0; rows.len()], Task::Regression)?, false)),
    }
}

/// Empirical quantile with linear interpolation between order statistics at
/// 1-based position `1 + (n - 1) q`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return domain("quantile of an empty sequence");
    }
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("quantile level {q} outside [0, 1]"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, q))
}

pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

pub fn median(values: &[f64]) -> Result<f64> {
    quantile(values, 0.5)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population (divide-by-N) standard deviation.
pub(crate) fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarLimits {
    pub lower: f64,
    pub upper: f64,
}

/// Per-variable winsorizing limits; `None` for categorical variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinsorLimits {
    pub beta: f64,
    pub limits: Vec<Option<VarLimits>>,
}

impl WinsorLimits {
    pub fn get(&self, var: usize) -> Option<&VarLimits> {
        self.limits.get(var).and_then(Option::as_ref)
    }
}

pub fn compute_winsor_limits(data: &Dataset, beta: f64) -> Result<WinsorLimits> {
    if !(0.0..0.5).contains(&beta) {
        return domain(format!("winsorizing fraction {beta} outside [0, 0.5)"));
    }
    let limits = data
        .columns()
        .iter()
        .map(|c| {
            if !c.kind.is_numeric() {
                return Ok(None);
            }
            let mut sorted = c.values.clone();
            sorted.sort_by(f64::total_cmp);
            Ok(Some(VarLimits {
                lower: quantile_sorted(&sorted, beta),
                upper: quantile_sorted(&sorted, 1.0 - beta),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(WinsorLimits { beta, limits })
}

#[inline]
pub fn winsorize(x: f64, limits: &VarLimits) -> f64 {
    limits.upper.min(limits.lower.max(x))
}
