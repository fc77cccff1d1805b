//! Multiplicative updates for the weighted-sum objective.
//!
//! An update of `H` takes the ratio of the negative and positive parts of the
//! gradient, `H ∘ [∇₋] / [∇₊]`, and falls back to the convex combination
//! `(1−γ)H + γH⁺` with `γ = 1/2, 1/4, …` whenever the full step would
//! increase the objective. `W` is updated by applying the same rule to the
//! transposed problem `Xᵀ ≈ HᵀWᵀ`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::divergence::{check_shapes, divergences, Beta, BetaKind, Fitted, ObjectiveSet};
use crate::error::{Error, Result};
use crate::matrix::{
    col_sums, matmul, matmul_tn, tmul_pattern, AsData, DataRef, DenseMatrix, FactorPair,
    EPS_FLOOR,
};

/// Iteration budget and numerical safeguards for a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Entry floor applied after every update.
    pub floor: f64,
    /// Step halvings allowed before an update is abandoned.
    pub max_halvings: u32,
    pub seed: u64,
    /// Record every `log_stride`-th iteration in the trace (the last one is
    /// always kept).
    pub log_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            floor: EPS_FLOOR,
            max_halvings: 64,
            seed: 0,
            log_stride: 1,
        }
    }
}

impl SolverConfig {
    pub fn with_iters(max_iters: usize) -> Self {
        Self {
            max_iters,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.floor > 0.0) || !self.floor.is_finite() {
            return Err(Error::InvalidArgument("floor must be positive".into()));
        }
        if self.log_stride == 0 {
            return Err(Error::InvalidArgument("log_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// One recorded iteration of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// 0 is the initial point.
    pub iter: usize,
    /// `D_β(X, WH)` per objective.
    pub raw: Vec<f64>,
    /// `D_β(X, WH) / e_β` per objective.
    pub normalized: Vec<f64>,
    /// Weighted objective under the weights in `lambda`.
    pub weighted: f64,
    /// Weights in force during this iteration's updates.
    pub lambda: Vec<f64>,
    pub halvings_w: u32,
    pub halvings_h: u32,
    /// Either update hit the halving cap and was abandoned.
    pub stalled: bool,
    /// Index of the largest normalized divergence.
    pub argmax: usize,
    pub max_normalized: f64,
}

/// Per-iteration record of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub betas: Vec<Beta>,
    pub rows: Vec<TraceRow>,
}

impl SolveTrace {
    pub fn last(&self) -> &TraceRow {
        self.rows.last().expect("a trace always holds the initial point")
    }

    pub fn weighted_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.weighted).collect()
    }

    /// Iterations whose weighted objective exceeds the previous record.
    pub fn monotonicity_violations(&self) -> Vec<usize> {
        self.rows
            .windows(2)
            .filter(|p| p[1].weighted > p[0].weighted)
            .map(|p| p[1].iter)
            .collect()
    }

    pub fn total_halvings(&self) -> u64 {
        self.rows
            .iter()
            .map(|r| u64::from(r.halvings_w) + u64::from(r.halvings_h))
            .sum()
    }

    /// Writes the trace as CSV with full-precision numbers.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = vec!["iter".to_string()];
        header.extend(self.betas.iter().map(|b| format!("D_{b}")));
        header.extend(self.betas.iter().map(|b| format!("Dbar_{b}")));
        header.push("weighted".into());
        header.extend(self.betas.iter().map(|b| format!("lambda_{b}")));
        header.extend(
            ["halvings_w", "halvings_h", "stalled", "argmax_beta", "max_normalized"]
                .map(String::from),
        );
        writeln!(out, "{}", header.join(","))?;
        for r in &self.rows {
            let mut f: Vec<String> = vec![r.iter.to_string()];
            f.extend(r.raw.iter().map(|v| v.to_string()));
            f.extend(r.normalized.iter().map(|v| v.to_string()));
            f.push(r.weighted.to_string());
            f.extend(r.lambda.iter().map(|v| v.to_string()));
            f.push(r.halvings_w.to_string());
            f.push(r.halvings_h.to_string());
            f.push(u8::from(r.stalled).to_string());
            f.push(self.betas[r.argmax].to_string());
            f.push(r.max_normalized.to_string());
            writeln!(out, "{}", f.join(","))?;
        }
        Ok(())
    }
}

/// Outcome of a single multiplicative update.
#[derive(Debug, Clone)]
pub struct MuStep {
    /// The updated factor (unchanged when `stalled`).
    pub factor: DenseMatrix,
    pub halvings: u32,
    pub stalled: bool,
    pub objective_before: f64,
    pub objective_after: f64,
}

// Objective state at an iterate: raw divergences, their weighted sum, and the
// fitted product that the next gradient reuses.
struct Eval {
    raw: Vec<f64>,
    weighted: f64,
    fit: Fitted,
}

impl Eval {
    fn compute(
        x: DataRef<'_>,
        w: &DenseMatrix,
        h: &DenseMatrix,
        obj: &ObjectiveSet,
    ) -> Result<Self> {
        let fit = Fitted::compute(x, w, h)?;
        let raw = divergences(x, &fit, obj.betas())?;
        let weighted = obj.weighted(&raw);
        Ok(Eval { raw, weighted, fit })
    }
}

fn check_sparse_support(x: DataRef<'_>, betas: &[Beta]) -> Result<()> {
    if x.is_sparse() {
        if let Some(b) = betas.iter().find(|b| !b.has_sparse_path()) {
            return Err(Error::InvalidArgument(format!(
                "the sparse path supports beta in {{1, 2}}, got {b}; densify the data first"
            )));
        }
    }
    Ok(())
}

/// `(∇₊, ∇₋)` of `Σ c_β D_β(X, WH)` with respect to `H`, reusing a fit.
fn split_from_fit(
    x: DataRef<'_>,
    w: &DenseMatrix,
    h: &DenseMatrix,
    fit: &Fitted,
    terms: &[(Beta, f64)],
) -> Result<(DenseMatrix, DenseMatrix)> {
    match (x, fit) {
        (DataRef::Dense(xd), Fitted::Dense(y)) => {
            let kinds: Vec<(BetaKind, f64)> = terms.iter().map(|(b, c)| (b.kind(), *c)).collect();
            let mut p = DenseMatrix::zeros(y.rows(), y.cols());
            let mut q = DenseMatrix::zeros(y.rows(), y.cols());
            let entries = xd.as_slice().iter().zip(y.as_slice());
            for ((pv, qv), (&xv, &yv)) in p
                .as_mut_slice()
                .iter_mut()
                .zip(q.as_mut_slice().iter_mut())
                .zip(entries)
            {
                if !(yv > 0.0) {
                    return Err(Error::Domain(format!("(WH)_ij = {yv} is not positive")));
                }
                let (mut ps, mut qs) = (0.0, 0.0);
                for &(kind, c) in &kinds {
                    // y^(β-1) and x y^(β-2)
                    let (a, b) = match kind {
                        BetaKind::ItakuraSaito => {
                            let inv = 1.0 / yv;
                            (inv, xv * inv * inv)
                        }
                        BetaKind::KullbackLeibler => (1.0, xv / yv),
                        BetaKind::Frobenius => (yv, xv),
                        BetaKind::General(beta) => {
                            let t = yv.powf(beta - 2.0);
                            (t * yv, t * xv)
                        }
                    };
                    ps += c * a;
                    qs += c * b;
                }
                *pv = ps;
                *qv = qs;
            }
            Ok((matmul_tn(w, &p)?, matmul_tn(w, &q)?))
        }
        (DataRef::Sparse(xs), Fitted::Sparse { support, .. }) => {
            let (r, n) = (w.cols(), h.cols());
            let mut plus = DenseMatrix::zeros(r, n);
            let mut s = vec![0.0; xs.nnz()];
            for &(beta, c) in terms {
                match beta.kind() {
                    BetaKind::KullbackLeibler => {
                        // Wᵀ 1 is the column sums of W broadcast along each row.
                        let cs = col_sums(w);
                        for (k, v) in cs.iter().enumerate() {
                            for j in 0..n {
                                let cur = plus.get(k, j);
                                plus.set(k, j, cur + c * v);
                            }
                        }
                        for ((sv, &xv), &yv) in s.iter_mut().zip(xs.values()).zip(support) {
                            if !(yv > 0.0) {
                                return Err(Error::Domain(format!("(WH)_ij = {yv} on the support")));
                            }
                            *sv += c * (xv / yv);
                        }
                    }
                    BetaKind::Frobenius => {
                        let gram_h = matmul(&matmul_tn(w, w)?, h)?;
                        for (pv, g) in plus.as_mut_slice().iter_mut().zip(gram_h.as_slice()) {
                            *pv += c * g;
                        }
                        for (sv, &xv) in s.iter_mut().zip(xs.values()) {
                            *sv += c * xv;
                        }
                    }
                    _ => {
                        return Err(Error::InvalidArgument(format!(
                            "the sparse path supports beta in {{1, 2}}, got {beta}"
                        )))
                    }
                }
            }
            Ok((plus, tmul_pattern(w, xs, &s)))
        }
        _ => unreachable!("fit computed for a different storage kind"),
    }
}

// Per-objective coefficients λ_β / e_β of the active objectives. With a single
// active objective the update ratio does not depend on its scale, so the
// coefficient is 1 and the iterates coincide with the unweighted solve.
fn gradient_terms(obj: &ObjectiveSet) -> Vec<(Beta, f64)> {
    let active: Vec<usize> = obj.active().collect();
    if active.len() == 1 {
        return vec![(obj.betas()[active[0]], 1.0)];
    }
    active
        .into_iter()
        .map(|i| (obj.betas()[i], obj.weights()[i] / obj.ref_errors()[i]))
        .collect()
}

/// Positive and negative parts of `∇_H D_β(X, WH)`:
/// `∇₊ = Wᵀ(WH)^(β−1)` and `∇₋ = Wᵀ((WH)^(β−2) ∘ X)`.
pub fn grad_split_h<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    beta: Beta,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let x = x.as_data();
    check_sparse_support(x, &[beta])?;
    let fit = Fitted::compute(x, w, h)?;
    split_from_fit(x, w, h, &fit, &[(beta, 1.0)])
}

/// Gradient split of the weighted objective: `Σ_β (λ_β / e_β) ∇±` over the
/// objectives with positive weight.
pub fn grad_split_h_weighted<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
) -> Result<(DenseMatrix, DenseMatrix)> {
    let x = x.as_data();
    check_sparse_support(x, obj.betas())?;
    let fit = Fitted::compute(x, w, h)?;
    let terms: Vec<(Beta, f64)> = obj
        .active()
        .map(|i| (obj.betas()[i], obj.weights()[i] / obj.ref_errors()[i]))
        .collect();
    split_from_fit(x, w, h, &fit, &terms)
}

struct Update {
    h: Option<DenseMatrix>,
    eval: Option<Eval>,
    halvings: u32,
}

// Multiplicative update of `h` with the halving line search. `None` in the
// result means the step was abandoned and `h` is kept.
fn update_h(
    x: DataRef<'_>,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
    cfg: &SolverConfig,
    current: &Eval,
) -> Result<Update> {
    let terms = gradient_terms(obj);
    let (plus, minus) = split_from_fit(x, w, h, &current.fit, &terms)?;
    let mut full = h.clone();
    for ((v, &num), &den) in full
        .as_mut_slice()
        .iter_mut()
        .zip(minus.as_slice())
        .zip(plus.as_slice())
    {
        let next = *v * num / den;
        if !next.is_finite() {
            return Err(Error::Numeric(format!(
                "update ratio {num}/{den} produced a non-finite entry"
            )));
        }
        *v = next.max(cfg.floor);
    }

    let mut gamma = 1.0;
    let mut halvings = 0;
    let mut candidate = full.clone();
    loop {
        let eval = Eval::compute(x, w, &candidate, obj)?;
        // NaN compares false and is rejected.
        if eval.weighted <= current.weighted {
            return Ok(Update {
                h: Some(candidate),
                eval: Some(eval),
                halvings,
            });
        }
        if halvings >= cfg.max_halvings {
            log::warn!(
                "line search stalled after {halvings} halvings at objective {}",
                current.weighted
            );
            return Ok(Update {
                h: None,
                eval: None,
                halvings,
            });
        }
        halvings += 1;
        gamma *= 0.5;
        for ((c, &old), &new) in candidate
            .as_mut_slice()
            .iter_mut()
            .zip(h.as_slice())
            .zip(full.as_slice())
        {
            *c = ((1.0 - gamma) * old + gamma * new).max(cfg.floor);
        }
    }
}

/// One multiplicative update of `H` for the weighted objective.
///
/// The weighted objective never increases; when `cfg.max_halvings` halvings
/// do not produce a decrease, `H` is returned unchanged with `stalled` set.
pub fn mu_step_h<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
    cfg: &SolverConfig,
) -> Result<MuStep> {
    cfg.validate()?;
    let x = x.as_data();
    check_sparse_support(x, obj.betas())?;
    let current = Eval::compute(x, w, h, obj)?;
    let up = update_h(x, w, h, obj, cfg, &current)?;
    let stalled = up.h.is_none();
    Ok(MuStep {
        factor: up.h.unwrap_or_else(|| h.clone()),
        halvings: up.halvings,
        stalled,
        objective_before: current.weighted,
        objective_after: up.eval.map_or(current.weighted, |e| e.weighted),
    })
}

/// One multiplicative update of `W`: the `H` update applied to `Xᵀ ≈ HᵀWᵀ`.
pub fn mu_step_w<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
    cfg: &SolverConfig,
) -> Result<MuStep> {
    let xt = x.as_data().transpose();
    let step = mu_step_h(&xt, &h.transpose(), &w.transpose(), obj, cfg)?;
    Ok(MuStep {
        factor: step.factor.transpose(),
        ..step
    })
}

fn transpose_fit(
    fit: Fitted,
    xt: DataRef<'_>,
    wt: &DenseMatrix,
    ht: &DenseMatrix,
) -> Result<Fitted> {
    match fit {
        Fitted::Dense(p) => Ok(Fitted::Dense(p.transpose())),
        Fitted::Sparse { .. } => Fitted::compute(xt, wt, ht),
    }
}

/// Alternating solver state shared by the fixed-weight and robust solvers.
pub(crate) struct Alternating<'a> {
    x: DataRef<'a>,
    xt: crate::matrix::DataMatrix,
    cfg: &'a SolverConfig,
}

/// What the per-iteration hook may change: the weights for the next
/// iteration.
pub(crate) trait WeightSchedule {
    /// Called after iteration `k` (1-based) with the raw divergences of the
    /// new iterate. Returns new weights, or `None` to keep them.
    fn next_weights(&mut self, k: usize, raw: &[f64], obj: &ObjectiveSet) -> Option<Vec<f64>>;
}

pub(crate) struct FixedWeights;

impl WeightSchedule for FixedWeights {
    fn next_weights(&mut self, _: usize, _: &[f64], _: &ObjectiveSet) -> Option<Vec<f64>> {
        None
    }
}

impl<'a> Alternating<'a> {
    pub(crate) fn new(x: DataRef<'a>, obj: &ObjectiveSet, cfg: &'a SolverConfig) -> Result<Self> {
        cfg.validate()?;
        check_sparse_support(x, obj.betas())?;
        Ok(Self {
            x,
            xt: x.transpose(),
            cfg,
        })
    }

    pub(crate) fn run(
        &self,
        init: &FactorPair,
        mut obj: ObjectiveSet,
        schedule: &mut dyn WeightSchedule,
    ) -> Result<(FactorPair, ObjectiveSet, SolveTrace)> {
        let x = self.x;
        let xt = self.xt.as_data();
        let cfg = self.cfg;
        init.check_target(x.shape())?;
        let mut w = init.w.clone();
        let mut h = init.h.clone();
        w.floor_at(cfg.floor);
        h.floor_at(cfg.floor);
        check_shapes(x, &w, &h)?;

        let mut eval = Eval::compute(x, &w, &h, &obj)?;
        let mut trace = SolveTrace {
            betas: obj.betas().to_vec(),
            rows: vec![row(0, &eval, &obj, obj.weights().to_vec(), 0, 0, false)],
        };

        for k in 1..=cfg.max_iters {
            let before = eval.weighted;

            // W update on the transposed problem.
            let wt = w.transpose();
            let ht = h.transpose();
            let eval_t = Eval {
                fit: transpose_fit(eval.fit, xt, &ht, &wt)?,
                raw: eval.raw,
                weighted: eval.weighted,
            };
            let up = update_h(xt, &ht, &wt, &obj, cfg, &eval_t)?;
            let (halvings_w, stalled_w) = (up.halvings, up.h.is_none());
            if let Some(next_wt) = up.h {
                w = next_wt.transpose();
            }
            let back = up.eval.unwrap_or(eval_t);
            eval = Eval {
                fit: transpose_fit(back.fit, x, &w, &h)?,
                raw: back.raw,
                weighted: back.weighted,
            };

            // H update.
            let up = update_h(x, &w, &h, &obj, cfg, &eval)?;
            let (halvings_h, stalled_h) = (up.halvings, up.h.is_none());
            if let Some(next_h) = up.h {
                h = next_h;
            }
            if let Some(e) = up.eval {
                eval = e;
            }

            let lambda = obj.weights().to_vec();
            let recorded = row(
                k,
                &eval,
                &obj,
                lambda,
                halvings_w,
                halvings_h,
                stalled_w || stalled_h,
            );
            if let Some(next) = schedule.next_weights(k, &eval.raw, &obj) {
                obj.set_weights_unchecked(next);
                eval.weighted = obj.weighted(&eval.raw);
            }

            log::debug!(
                "iter {k}: objective {} (relative change {:.3e})",
                recorded.weighted,
                (before - recorded.weighted) / before.abs().max(f64::MIN_POSITIVE)
            );
            if k % cfg.log_stride == 0 || k == cfg.max_iters {
                trace.rows.push(recorded);
            }
        }

        let factors = FactorPair { w, h };
        Ok((factors, obj, trace))
    }
}

fn row(
    iter: usize,
    eval: &Eval,
    obj: &ObjectiveSet,
    lambda: Vec<f64>,
    halvings_w: u32,
    halvings_h: u32,
    stalled: bool,
) -> TraceRow {
    let (argmax, max_normalized) = obj.argmax_normalized(&eval.raw);
    TraceRow {
        iter,
        raw: eval.raw.clone(),
        normalized: obj.normalize(&eval.raw),
        weighted: eval.weighted,
        lambda,
        halvings_w,
        halvings_h,
        stalled,
        argmax,
        max_normalized,
    }
}

/// Minimizes the weighted objective with fixed weights by alternating one
/// `W` update and one `H` update per iteration for `cfg.max_iters`
/// iterations.
pub fn solve_weighted<X: AsData + ?Sized>(
    x: &X,
    init: &FactorPair,
    obj: &ObjectiveSet,
    cfg: &SolverConfig,
) -> Result<(FactorPair, SolveTrace)> {
    let solver = Alternating::new(x.as_data(), obj, cfg)?;
    let (factors, _, trace) = solver.run(init, obj.clone(), &mut FixedWeights)?;
    Ok((factors, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{beta_div_matrix, weighted_objective};
    use crate::matrix::SparseMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_mat(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DenseMatrix {
        DenseMatrix::from_fn(m, n, |_, _| 0.1 + rng.gen::<f64>())
    }

    fn instance(seed: u64, m: usize, n: usize, r: usize) -> (DenseMatrix, DenseMatrix, DenseMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (rand_mat(&mut rng, m, n), rand_mat(&mut rng, m, r), rand_mat(&mut rng, r, n))
    }

    fn b(v: f64) -> Beta {
        Beta::new(v).unwrap()
    }

    // Central differences of an objective in each entry of H.
    fn fd_gradient(h: &DenseMatrix, f: impl Fn(&DenseMatrix) -> f64) -> DenseMatrix {
        let step = 1e-6;
        DenseMatrix::from_fn(h.rows(), h.cols(), |i, j| {
            let mut hp = h.clone();
            hp.set(i, j, h.get(i, j) + step);
            let mut hm = h.clone();
            hm.set(i, j, h.get(i, j) - step);
            (f(&hp) - f(&hm)) / (2.0 * step)
        })
    }

    fn diff(plus: &DenseMatrix, minus: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(plus.rows(), plus.cols(), |i, j| plus.get(i, j) - minus.get(i, j))
    }

    #[test]
    fn split_matches_finite_differences() {
        let (x, w, h) = instance(5, 8, 6, 2);
        for beta in [0.0, 0.5, 1.0, 1.5, 2.0] {
            let (p, m) = grad_split_h(&x, &w, &h, b(beta)).unwrap();
            assert!(p.min_value() > 0.0 && m.min_value() > 0.0);
            let fd = fd_gradient(&h, |hh| beta_div_matrix(&x, &w, hh, b(beta)).unwrap());
            let err = fd.max_rel_diff(&diff(&p, &m));
            assert!(err <= 1e-5, "beta {beta}: {err}");
        }
    }

    #[test]
    fn split_closed_forms() {
        let (x, w, h) = instance(6, 7, 5, 3);
        let wh = matmul(&w, &h).unwrap();
        let (p, m) = grad_split_h(&x, &w, &h, Beta::FRO).unwrap();
        assert!(p.max_rel_diff(&matmul(&w.transpose(), &wh).unwrap()) < 1e-14);
        assert!(m.max_rel_diff(&matmul(&w.transpose(), &x).unwrap()) < 1e-14);

        let (p, m) = grad_split_h(&x, &w, &h, Beta::KL).unwrap();
        let ones = DenseMatrix::filled(7, 5, 1.0);
        let ratio = DenseMatrix::from_fn(7, 5, |i, j| x.get(i, j) / wh.get(i, j));
        assert!(p.max_rel_diff(&matmul(&w.transpose(), &ones).unwrap()) < 1e-14);
        assert!(m.max_rel_diff(&matmul(&w.transpose(), &ratio).unwrap()) < 1e-14);
    }

    #[test]
    fn weighted_split_cases() {
        let (x, w, h) = instance(8, 8, 6, 2);
        let betas = vec![Beta::KL, Beta::FRO];
        let one_hot = ObjectiveSet::new(betas.clone(), vec![2.0, 4.0], vec![1.0, 0.0]).unwrap();
        let (p, m) = grad_split_h_weighted(&x, &w, &h, &one_hot).unwrap();
        let (p1, m1) = grad_split_h(&x, &w, &h, Beta::KL).unwrap();
        assert!(p.max_rel_diff(&p1.scale(0.5)) < 1e-14);
        assert!(m.max_rel_diff(&m1.scale(0.5)) < 1e-14);

        let even = ObjectiveSet::new(betas.clone(), vec![1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let (p, _) = grad_split_h_weighted(&x, &w, &h, &even).unwrap();
        let (p2, _) = grad_split_h(&x, &w, &h, Beta::FRO).unwrap();
        let mean = DenseMatrix::from_fn(2, 6, |i, j| 0.5 * p1.get(i, j) + 0.5 * p2.get(i, j));
        assert!(p.max_rel_diff(&mean) < 1e-14);

        let obj = ObjectiveSet::new(vec![Beta::IS, Beta::KL], vec![3.0, 0.7], vec![0.3, 0.7])
            .unwrap();
        let (p, m) = grad_split_h_weighted(&x, &w, &h, &obj).unwrap();
        let fd = fd_gradient(&h, |hh| weighted_objective(&x, &w, hh, &obj).unwrap());
        assert!(fd.max_rel_diff(&diff(&p, &m)) <= 1e-5);
    }

    #[test]
    fn fixed_point_is_kept() {
        let (_, w, h) = instance(9, 6, 5, 2);
        let x = matmul(&w, &h).unwrap();
        let cfg = SolverConfig::default();
        for beta in [0.0, 1.0, 2.0] {
            let obj = ObjectiveSet::one_hot(vec![b(beta)], 0).unwrap();
            let step = mu_step_h(&x, &w, &h, &obj, &cfg).unwrap();
            assert!(step.factor.max_rel_diff(&h) < 1e-14, "beta {beta}");
            let step = mu_step_w(&x, &w, &h, &obj, &cfg).unwrap();
            assert!(step.factor.max_rel_diff(&w) < 1e-14, "beta {beta}");
        }
    }

    #[test]
    fn frobenius_step_is_lee_seung() {
        let (x, w, h) = instance(10, 9, 7, 3);
        let obj = ObjectiveSet::one_hot(vec![Beta::FRO], 0).unwrap();
        let step = mu_step_h(&x, &w, &h, &obj, &SolverConfig::default()).unwrap();
        assert_eq!(step.halvings, 0);
        let num = matmul(&w.transpose(), &x).unwrap();
        let den = matmul(&matmul(&w.transpose(), &w).unwrap(), &h).unwrap();
        let expected = DenseMatrix::from_fn(3, 7, |i, j| h.get(i, j) * num.get(i, j) / den.get(i, j));
        assert!(step.factor.max_rel_diff(&expected) < 1e-14);
    }

    #[test]
    fn w_step_is_transposed_h_step() {
        let (x, w, h) = instance(12, 10, 8, 3);
        let obj = ObjectiveSet::new(vec![Beta::IS, Beta::KL], vec![2.0, 1.0], vec![0.5, 0.5])
            .unwrap();
        let cfg = SolverConfig::default();
        let sw = mu_step_w(&x, &w, &h, &obj, &cfg).unwrap();
        let sh = mu_step_h(&x.transpose(), &h.transpose(), &w.transpose(), &obj, &cfg).unwrap();
        assert_eq!(sw.factor, sh.factor.transpose());
    }

    #[test]
    fn steps_never_increase_the_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let obj = ObjectiveSet::new(vec![Beta::IS, Beta::KL], vec![1.0, 1.0], vec![0.5, 0.5])
            .unwrap();
        let cfg = SolverConfig::default();
        for _ in 0..1000 {
            let x = rand_mat(&mut rng, 10, 8);
            let w = rand_mat(&mut rng, 10, 3);
            let h = rand_mat(&mut rng, 3, 8);
            let s = mu_step_h(&x, &w, &h, &obj, &cfg).unwrap();
            assert!(s.objective_after <= s.objective_before);
            assert!(weighted_objective(&x, &w, &s.factor, &obj).unwrap() <= s.objective_before);
            assert!(s.factor.min_value() >= cfg.floor);
            let s = mu_step_w(&x, &w, &h, &obj, &cfg).unwrap();
            assert!(s.objective_after <= s.objective_before);
        }
    }

    #[test]
    fn stall_keeps_the_factor() {
        // A floor far above the optimum makes every candidate worse than the
        // current point, so the search must give up and keep H.
        let x = DenseMatrix::filled(4, 3, 0.5);
        let w = DenseMatrix::filled(4, 2, 0.5);
        let h = DenseMatrix::filled(2, 3, 1.0);
        for beta in [Beta::IS, Beta::KL, Beta::FRO] {
            let obj = ObjectiveSet::one_hot(vec![beta], 0).unwrap();
            for max_halvings in [0, 3, 64] {
                let cfg = SolverConfig {
                    floor: 100.0,
                    max_halvings,
                    ..SolverConfig::default()
                };
                let s = mu_step_h(&x, &w, &h, &obj, &cfg).unwrap();
                assert!(s.stalled);
                assert_eq!(s.halvings, max_halvings);
                assert_eq!(s.factor, h);
                assert_eq!(s.objective_after, s.objective_before);
            }
        }
    }

    #[test]
    fn solve_trace_is_monotone_and_floored() {
        let (x, w, h) = instance(13, 12, 10, 3);
        let init = FactorPair::new(w, h).unwrap();
        let obj = ObjectiveSet::new(vec![Beta::IS, Beta::FRO], vec![1.0, 1.0], vec![0.5, 0.5])
            .unwrap();
        let cfg = SolverConfig::with_iters(200);
        let (fp, trace) = solve_weighted(&x, &init, &obj, &cfg).unwrap();
        assert_eq!(trace.rows.len(), 201);
        assert!(trace.monotonicity_violations().is_empty());
        assert!(fp.min_entry() >= EPS_FLOOR);
        let direct = weighted_objective(&x, &fp.w, &fp.h, &obj).unwrap();
        assert!((direct - trace.last().weighted).abs() <= 1e-12 * direct);
    }

    #[test]
    fn exact_factorization_stays_at_zero() {
        let (_, w, h) = instance(14, 8, 6, 2);
        let x = matmul(&w, &h).unwrap();
        let init = FactorPair::new(w, h).unwrap();
        let obj = ObjectiveSet::one_hot(vec![Beta::KL], 0).unwrap();
        let (_, trace) = solve_weighted(&x, &init, &obj, &SolverConfig::with_iters(20)).unwrap();
        assert!(trace.rows.iter().all(|r| r.weighted < 1e-12));
    }

    #[test]
    fn log_stride_thins_the_trace() {
        let (x, w, h) = instance(15, 6, 5, 2);
        let init = FactorPair::new(w, h).unwrap();
        let obj = ObjectiveSet::one_hot(vec![Beta::FRO], 0).unwrap();
        let cfg = SolverConfig {
            max_iters: 10,
            log_stride: 4,
            ..SolverConfig::default()
        };
        let (_, trace) = solve_weighted(&x, &init, &obj, &cfg).unwrap();
        let iters: Vec<_> = trace.rows.iter().map(|r| r.iter).collect();
        assert_eq!(iters, vec![0, 4, 8, 10]);
    }

    #[test]
    fn sparse_rejects_unsupported_beta() {
        let x = SparseMatrix::from_triplets(3, 3, vec![(0, 0, 1.0), (2, 1, 3.0)]).unwrap();
        let init = FactorPair::new(DenseMatrix::filled(3, 1, 1.0), DenseMatrix::filled(1, 3, 1.0))
            .unwrap();
        let obj = ObjectiveSet::one_hot(vec![Beta::IS], 0).unwrap();
        assert!(matches!(
            solve_weighted(&x, &init, &obj, &SolverConfig::with_iters(1)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let (x, w, h) = instance(16, 5, 4, 2);
        let init = FactorPair::new(w, h).unwrap();
        let obj = ObjectiveSet::one_hot(vec![Beta::KL, Beta::FRO], 1).unwrap();
        let (_, trace) = solve_weighted(&x, &init, &obj, &SolverConfig::with_iters(3)).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("iter,D_1,D_2,Dbar_1,Dbar_2,weighted,lambda_1,lambda_2"));
    }
}
