//! Reference errors `e_β` used to put the objectives on a common scale.
//!
//! Each `e_β` is the error reached by a single-objective solve from the shared
//! initialization, so that `D_β / e_β = 1` at that solve's output.

use rayon::prelude::*;

use crate::divergence::{Beta, ObjectiveSet};
use crate::error::Result;
use crate::matrix::{AsData, FactorPair};
use crate::mu::{solve_weighted, SolverConfig};

/// Smallest admissible reference error. Smaller values are raised to it.
pub const E_MIN: f64 = 1e-12;

/// Reference errors and the single-objective solutions that produced them.
#[derive(Debug, Clone)]
pub struct ReferenceErrors {
    pub betas: Vec<Beta>,
    pub values: Vec<f64>,
    /// Whether `values[i]` was raised to [`E_MIN`].
    pub floored: Vec<bool>,
    pub solutions: Vec<FactorPair>,
}

impl ReferenceErrors {
    pub fn any_floored(&self) -> bool {
        self.floored.iter().any(|f| *f)
    }
}

/// Runs one single-objective solve per β from `init` and records its final
/// error.
///
/// The solves are the ordinary [`solve_weighted`] with all weight on one β and
/// a unit reference; they run concurrently and are returned in input order.
pub fn compute_reference_errors<X: AsData + Sync + ?Sized>(
    x: &X,
    init: &FactorPair,
    betas: &[Beta],
    cfg: &SolverConfig,
) -> Result<ReferenceErrors> {
    let runs: Vec<(f64, FactorPair)> = betas
        .par_iter()
        .map(|&beta| {
            let obj = ObjectiveSet::one_hot(vec![beta], 0)?;
            let (factors, trace) = solve_weighted(x, init, &obj, cfg)?;
            Ok((trace.last().raw[0], factors))
        })
        .collect::<Result<_>>()?;

    let mut out = ReferenceErrors {
        betas: betas.to_vec(),
        values: Vec::with_capacity(betas.len()),
        floored: Vec::with_capacity(betas.len()),
        solutions: Vec::with_capacity(betas.len()),
    };
    for (beta, (e, factors)) in betas.iter().zip(runs) {
        let floored = !(e >= E_MIN);
        if floored {
            log::warn!("reference error for beta {beta} is {e}; raised to {E_MIN}");
        }
        out.values.push(if floored { E_MIN } else { e });
        out.floored.push(floored);
        out.solutions.push(factors);
    }
    Ok(out)
}

/// Assembles an objective set, renormalizing `weights` to sum to one.
pub fn build_objective_set(
    betas: Vec<Beta>,
    ref_errors: Vec<f64>,
    weights: Vec<f64>,
) -> Result<ObjectiveSet> {
    ObjectiveSet::new(betas, ref_errors, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::raw_divergences;
    use crate::matrix::{matmul, DenseMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (DenseMatrix, FactorPair) {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = DenseMatrix::from_fn(12, 10, |_, _| 0.05 + rng.gen::<f64>());
        let w = DenseMatrix::from_fn(12, 3, |_, _| 0.1 + rng.gen::<f64>());
        let h = DenseMatrix::from_fn(3, 10, |_, _| 0.1 + rng.gen::<f64>());
        (x, FactorPair::new(w, h).unwrap())
    }

    #[test]
    fn normalization_anchors_at_one() {
        let (x, init) = setup();
        let betas = vec![Beta::IS, Beta::KL, Beta::FRO];
        let refs = compute_reference_errors(&x, &init, &betas, &SolverConfig::with_iters(50))
            .unwrap();
        assert!(!refs.any_floored());
        let obj = build_objective_set(betas.clone(), refs.values.clone(), vec![1.0; 3]).unwrap();
        for (i, sol) in refs.solutions.iter().enumerate() {
            let raw = raw_divergences(&x, &sol.w, &sol.h, &obj).unwrap();
            let normalized = obj.normalize(&raw);
            assert!((normalized[i] - 1.0).abs() < 1e-12, "beta {}", betas[i]);
        }
    }

    #[test]
    fn exact_factorization_is_floored() {
        let (_, init) = setup();
        let x = matmul(&init.w, &init.h).unwrap();
        let refs = compute_reference_errors(&x, &init, &[Beta::FRO], &SolverConfig::with_iters(5))
            .unwrap();
        assert_eq!(refs.values, vec![E_MIN]);
        assert!(refs.floored[0]);
    }

    #[test]
    fn reference_solves_are_deterministic() {
        let (x, init) = setup();
        let cfg = SolverConfig::with_iters(30);
        let a = compute_reference_errors(&x, &init, &[Beta::KL, Beta::FRO], &cfg).unwrap();
        let b = compute_reference_errors(&x, &init, &[Beta::KL, Beta::FRO], &cfg).unwrap();
        assert_eq!(a.values, b.values);
        assert!(a.values.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn weight_normalization() {
        let betas = vec![Beta::KL, Beta::FRO];
        let o = build_objective_set(betas.clone(), vec![1.0, 1.0], vec![2.0, 2.0]).unwrap();
        assert_eq!(o.weights(), &[0.5, 0.5]);
        let o = build_objective_set(betas.clone(), vec![1.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(o.weights(), &[0.25, 0.75]);
        let again = build_objective_set(betas, vec![1.0, 1.0], o.weights().to_vec()).unwrap();
        assert_eq!(again.weights(), o.weights());
        let single = build_objective_set(vec![Beta::IS], vec![3.0], vec![7.0]).unwrap();
        assert_eq!(single.weights(), &[1.0]);
        assert!(build_objective_set(vec![Beta::IS], vec![3.0], vec![0.0]).is_err());
        assert!(build_objective_set(vec![Beta::IS], vec![-3.0], vec![1.0]).is_err());
    }
}
