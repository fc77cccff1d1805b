//! Weighted-sum sweeps over the weight simplex.
//!
//! Every point is an independent fixed-weight solve from the same
//! initialization, so grid points run in parallel and come back ordered.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divergence::{Beta, ObjectiveSet};
use crate::error::{Error, Result};
use crate::matrix::{AsData, FactorPair};
use crate::mu::{solve_weighted, SolverConfig};

/// Shape of a solved factor pair, kept instead of the factors themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSummary {
    pub rank: usize,
    pub w_norm: f64,
    pub h_norm: f64,
    pub min_entry: f64,
}

impl From<&FactorPair> for FactorSummary {
    fn from(fp: &FactorPair) -> Self {
        Self {
            rank: fp.rank(),
            w_norm: fp.w.frobenius_norm(),
            h_norm: fp.h.frobenius_norm(),
            min_entry: fp.min_entry(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub lambda: Vec<f64>,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    pub factors: FactorSummary,
    /// Another point of the sweep is better in every objective.
    pub dominated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub betas: Vec<Beta>,
    pub ref_errors: Vec<f64>,
    pub points: Vec<ParetoPoint>,
}

impl Sweep {
    /// Points not dominated by any other point of the sweep.
    pub fn frontier(&self) -> Vec<&ParetoPoint> {
        self.points.iter().filter(|p| !p.dominated).collect()
    }

    /// CSV with one row per point: weights, normalized and raw divergences.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["ell".to_string()];
        header.extend(self.betas.iter().map(|b| format!("lambda_{b}")));
        header.extend(self.betas.iter().map(|b| format!("Dbar_{b}")));
        header.extend(self.betas.iter().map(|b| format!("D_{b}")));
        header.push("dominated".into());
        writeln!(out, "{}", header.join(","))?;
        for p in &self.points {
            let mut f = vec![p.lambda[0].to_string()];
            f.extend(p.lambda.iter().map(|v| v.to_string()));
            f.extend(p.normalized.iter().map(|v| v.to_string()));
            f.extend(p.raw.iter().map(|v| v.to_string()));
            f.push(u8::from(p.dominated).to_string());
            writeln!(out, "{}", f.join(","))?;
        }
        Ok(())
    }
}

/// `grid` evenly spaced weights `(ℓ, 1−ℓ)` for `ℓ = 0, 1/(grid−1), …, 1`.
pub fn two_objective_grid(grid: usize) -> Result<Vec<Vec<f64>>> {
    if grid < 2 {
        return Err(Error::InvalidArgument(format!("grid must be at least 2, got {grid}")));
    }
    Ok((0..grid)
        .map(|i| {
            let ell = i as f64 / (grid - 1) as f64;
            vec![ell, 1.0 - ell]
        })
        .collect())
}

/// `a` dominates `b`: no worse in every objective and better in one, with
/// differences below `tol` (relative) treated as ties.
pub fn dominates(a: &[f64], b: &[f64], tol: f64) -> bool {
    let slack = |u: f64, v: f64| tol * u.abs().max(v.abs());
    let no_worse = a.iter().zip(b).all(|(&u, &v)| u <= v + slack(u, v));
    let better = a.iter().zip(b).any(|(&u, &v)| u < v - slack(u, v));
    no_worse && better
}

/// Flags every point dominated by another one.
pub fn mark_dominated(points: &mut [ParetoPoint], tol: f64) {
    let flags: Vec<bool> = points
        .iter()
        .map(|p| {
            points
                .iter()
                .any(|q| dominates(&q.normalized, &p.normalized, tol))
        })
        .collect();
    for (p, f) in points.iter_mut().zip(flags) {
        p.dominated = f;
    }
}

const DOMINANCE_TOL: f64 = 1e-9;

/// Solves the weighted problem once per weight vector.
pub fn sweep_weights<X: AsData + Sync + ?Sized>(
    x: &X,
    init: &FactorPair,
    betas: &[Beta],
    ref_errors: &[f64],
    weights: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<Sweep> {
    let sets: Vec<ObjectiveSet> = weights
        .iter()
        .map(|lam| ObjectiveSet::new(betas.to_vec(), ref_errors.to_vec(), lam.clone()))
        .collect::<Result<_>>()?;
    let mut points: Vec<ParetoPoint> = sets
        .par_iter()
        .map(|obj| {
            let (factors, trace) = solve_weighted(x, init, obj, cfg)?;
            let last = trace.last();
            Ok(ParetoPoint {
                lambda: obj.weights().to_vec(),
                raw: last.raw.clone(),
                normalized: last.normalized.clone(),
                factors: FactorSummary::from(&factors),
                dominated: false,
            })
        })
        .collect::<Result<_>>()?;
    mark_dominated(&mut points, DOMINANCE_TOL);
    Ok(Sweep {
        betas: betas.to_vec(),
        ref_errors: ref_errors.to_vec(),
        points,
    })
}

/// Two-objective sweep over `λ = (ℓ, 1−ℓ)` on a grid of `grid` points,
/// ordered by increasing `ℓ`.
pub fn sweep<X: AsData + Sync + ?Sized>(
    x: &X,
    init: &FactorPair,
    betas: &[Beta],
    ref_errors: &[f64],
    grid: usize,
    cfg: &SolverConfig,
) -> Result<Sweep> {
    if betas.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "a gridded sweep needs exactly two objectives, got {}; pass explicit weights instead",
            betas.len()
        )));
    }
    sweep_weights(x, init, betas, ref_errors, &two_objective_grid(grid)?, cfg)
}
