use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::divergence::{Beta, ObjectiveSet};
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, FactorPair};
use crate::mu::{SolveTrace, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Fixed weights.
    Weighted,
    /// Weights tuned toward the worst objective.
    Robust,
}

/// Normalized errors and weights of one iteration, as stored in a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedRow {
    pub iter: usize,
    pub normalized: Vec<f64>,
    pub lambda: Vec<f64>,
    pub max_normalized: f64,
}

/// A solved factorization as written to disk (JSON).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub betas: Vec<Beta>,
    pub ref_errors: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `rows x rank`.
    pub w: Vec<f64>,
    /// Row-major `rank x cols`.
    pub h: Vec<f64>,
    pub final_errors: Vec<f64>,
    pub final_normalized: Vec<f64>,
    pub config: SolverConfig,
    pub input: Option<String>,
    pub init: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<NormalizedRow>,
}

impl Model {
    pub fn new(
        kind: ModelKind,
        factors: &FactorPair,
        objectives: &ObjectiveSet,
        trace: &SolveTrace,
        config: &SolverConfig,
    ) -> Self {
        let last = trace.last();
        Self {
            kind,
            rows: factors.w.rows(),
            cols: factors.h.cols(),
            rank: factors.rank(),
            betas: objectives.betas().to_vec(),
            ref_errors: objectives.ref_errors().to_vec(),
            weights: objectives.weights().to_vec(),
            w: factors.w.as_slice().to_vec(),
            h: factors.h.as_slice().to_vec(),
            final_errors: last.raw.clone(),
            final_normalized: last.normalized.clone(),
            config: config.clone(),
            input: None,
            init: String::new(),
            trace: Vec::new(),
        }
    }

    /// Stores the normalized errors and weights of every traced iteration.
    pub fn with_trace(mut self, trace: &SolveTrace) -> Self {
        self.trace = trace
            .rows
            .iter()
            .map(|r| NormalizedRow {
                iter: r.iter,
                normalized: r.normalized.clone(),
                lambda: r.lambda.clone(),
                max_normalized: r.max_normalized,
            })
            .collect();
        self
    }

    pub fn factors(&self) -> Result<FactorPair> {
        let w = DenseMatrix::from_vec(self.rows, self.rank, self.w.clone())?;
        let h = DenseMatrix::from_vec(self.rank, self.cols, self.h.clone())?;
        FactorPair::new(w, h)
    }

    pub fn objectives(&self) -> Result<ObjectiveSet> {
        ObjectiveSet::new(self.betas.clone(), self.ref_errors.clone(), self.weights.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: Model = serde_json::from_str(text)?;
        if model.w.len() != model.rows * model.rank || model.h.len() != model.rank * model.cols {
            return Err(Error::Dimension("factor lengths disagree with the model shape".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
