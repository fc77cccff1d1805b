//! Distributionally robust NMF: minimize `max_β D_β / e_β` by alternating
//! multiplicative updates with a dual step on the simplex weights.
//!
//! After each (W, H) update the weight of the currently worst objective `β*`
//! grows by `ρ_k = 1/k` and the weights are renormalized.

use crate::divergence::{Beta, ObjectiveSet};
use crate::error::{Error, Result};
use crate::matrix::{AsData, FactorPair};
use crate::mu::{Alternating, SolveTrace, SolverConfig, WeightSchedule};

/// `λ ← (λ + ρ e_{β*}) / ‖λ + ρ e_{β*}‖₁`.
pub fn lambda_update(lambda: &[f64], star: usize, rho: f64) -> Result<Vec<f64>> {
    if star >= lambda.len() {
        return Err(Error::InvalidArgument(format!(
            "index {star} out of range for {} weights",
            lambda.len()
        )));
    }
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidArgument(format!("step {rho} must be finite and >= 0")));
    }
    let total: f64 = lambda.iter().sum();
    if lambda.iter().any(|l| !(*l >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "weights {lambda:?} are not on the simplex"
        )));
    }
    let mut next = lambda.to_vec();
    next[star] += rho;
    let norm: f64 = next.iter().sum();
    next.iter_mut().for_each(|l| *l /= norm);
    Ok(next)
}

struct HarmonicDualStep;

impl WeightSchedule for HarmonicDualStep {
    fn next_weights(&mut self, k: usize, raw: &[f64], obj: &ObjectiveSet) -> Option<Vec<f64>> {
        let (star, _) = obj.argmax_normalized(raw);
        let rho = 1.0 / k as f64;
        Some(lambda_update(obj.weights(), star, rho).expect("weights stay on the simplex"))
    }
}

/// Result of a robust solve.
#[derive(Debug, Clone)]
pub struct RobustSolution {
    pub factors: FactorPair,
    /// Objectives with the final weights.
    pub objectives: ObjectiveSet,
    pub trace: SolveTrace,
}

/// Robust solve over `betas` normalized by `ref_errors`, starting from
/// uniform weights.
///
/// Each iteration performs one `W` update and one `H` update under the
/// current weights, then moves the weights toward the objective with the
/// largest normalized error.
pub fn solve_dr<X: AsData + ?Sized>(
    x: &X,
    init: &FactorPair,
    betas: &[Beta],
    ref_errors: &[f64],
    cfg: &SolverConfig,
) -> Result<RobustSolution> {
    if betas.len() == 1 {
        log::info!("a single objective makes the robust solve a plain weighted solve");
    }
    let uniform = vec![1.0 / betas.len() as f64; betas.len()];
    let obj = ObjectiveSet::new(betas.to_vec(), ref_errors.to_vec(), uniform)?;
    let solver = Alternating::new(x.as_data(), &obj, cfg)?;
    let (factors, objectives, trace) = solver.run(init, obj, &mut HarmonicDualStep)?;
    Ok(RobustSolution {
        factors,
        objectives,
        trace,
    })
}
