use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::CategoryMatrix;

pub const DEFAULT_GROUP_THRESHOLD: f64 = 0.7;

/// Sample Pearson correlation. Constant inputs are degenerate, not zero.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::invalid("correlation needs at least two observations"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::degenerate("correlation undefined for a constant series"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pairwise correlations between matrix rows; `None` where undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i][j]
    }

    /// Labels of rows whose correlations are undefined (constant rows).
    pub fn undefined_rows(&self) -> Vec<&str> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(i, _)| self.values[*i][*i].is_none())
            .map(|(_, l)| l.as_str())
            .collect()
    }
}

pub fn correlation_matrix(matrix: &CategoryMatrix) -> CorrelationMatrix {
    let rows = matrix.rows();
    let k = rows.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = if i == j {
                pearson(&rows[i], &rows[i]).ok().map(|_| 1.0)
            } else {
                pearson(&rows[i], &rows[j]).ok()
            };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    CorrelationMatrix {
        labels: matrix.categories().to_vec(),
        values,
    }
}

/// A set of categories analysed together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryGroup {
    /// Member labels joined by "+".
    pub label: String,
    pub members: Vec<String>,
}

/// Connected components of the graph with an edge wherever r ≥ `threshold`.
/// Groups and their members follow the label order of `corr`.
pub fn collapse_groups(corr: &CorrelationMatrix, threshold: f64) -> Result<Vec<CategoryGroup>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid(format!("group threshold {threshold} outside (0, 1]")));
    }
    let k = corr.labels.len();
    let mut uf = UnionFind::<usize>::new(k);
    for i in 0..k {
        for j in i + 1..k {
            if corr.values[i][j].is_some_and(|r| r >= threshold) {
                uf.union(i, j);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..k {
        let root = uf.find(i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(i),
            None => groups.push((root, vec![i])),
        }
    }
    Ok(groups
        .into_iter()
        .map(|(_, idx)| {
            let members: Vec<String> = idx.iter().map(|&i| corr.labels[i].clone()).collect();
            CategoryGroup {
                label: members.join("+"),
                members,
            }
        })
        .collect())
}

/// Sum member rows into one row per group.
pub fn group_matrix(matrix: &CategoryMatrix, groups: &[CategoryGroup]) -> Result<CategoryMatrix> {
    let mut values = Vec::with_capacity(groups.len());
    for g in groups {
        let mut row = vec![0.0; matrix.len()];
        for m in &g.members {
            let src = matrix
                .row(m)
                .ok_or_else(|| Error::invalid(format!("group member {m:?} not in matrix")))?;
            for (acc, v) in row.iter_mut().zip(src) {
                *acc += v;
            }
        }
        values.push(row);
    }
    CategoryMatrix::new(matrix.start(), groups.iter().map(|g| g.label.clone()).collect(), values)
}
