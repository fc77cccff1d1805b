//! Clustering accuracy and relative-error metrics.

use crate::divergence::{raw_divergences, ObjectiveSet};
use crate::error::{Error, Result};
use crate::matrix::{col_sums, AsData, DenseMatrix};

/// Assigns each row of `W` to the column holding its largest entry after
/// every column has been scaled to sum to one. Ties go to the smaller column.
pub fn cluster_assign(w: &DenseMatrix) -> Vec<usize> {
    let sums = col_sums(w);
    (0..w.rows())
        .map(|i| {
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for (k, (&v, &s)) in w.row(i).iter().zip(&sums).enumerate() {
                let scaled = if s > 0.0 { v / s } else { 0.0 };
                if scaled > best_val {
                    best_val = scaled;
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, `O(n³)`). Returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    const INF: i64 = i64::MAX / 4;
    // 1-based with a virtual column 0.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    assignment
}

/// `|C_i ∩ C̃_j|` for true class `i` and predicted cluster `j`, padded to a
/// square matrix.
fn overlap_counts(predicted: &[usize], truth: &[usize]) -> Vec<Vec<i64>> {
    let k = predicted
        .iter()
        .chain(truth)
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let mut counts = vec![vec![0i64; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        counts[t][p] += 1;
    }
    counts
}

/// Fraction of rows whose predicted cluster matches their class under the
/// best one-to-one relabeling of clusters.
pub fn clustering_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("no rows to score".into()));
    }
    let counts = overlap_counts(predicted, truth);
    let cost: Vec<Vec<i64>> = counts
        .iter()
        .map(|r| r.iter().map(|c| -c).collect())
        .collect();
    let matched: i64 = min_cost_assignment(&cost)
        .iter()
        .enumerate()
        .map(|(i, &j)| counts[i][j])
        .sum();
    Ok(matched as f64 / truth.len() as f64)
}

/// `D_β(X, WH) / e_β − 1` for every objective.
pub fn relative_errors<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
) -> Result<Vec<f64>> {
    let raw = raw_divergences(x, w, h, obj)?;
    Ok(obj.normalize(&raw).into_iter().map(|v| v - 1.0).collect())
}
