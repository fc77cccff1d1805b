//! β-divergences between a data matrix and its low-rank approximation, plus
//! the normalized and weighted-sum objectives built on top of them.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matrix::{
    col_sums, matmul, matmul_tn, row_sums, wh_at_support, AsData, DataRef, DenseMatrix,
};

/// Exponent of the β-divergence family. Any finite `β ≥ 0` is accepted.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Beta(f64);

impl Beta {
    pub const IS: Beta = Beta(0.0);
    pub const KL: Beta = Beta(1.0);
    pub const FRO: Beta = Beta(2.0);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(Beta(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "beta must be finite and nonnegative, got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether the O(Kr) sparse path supports this divergence.
    pub fn has_sparse_path(self) -> bool {
        self.0 == 1.0 || self.0 == 2.0
    }

    #[inline]
    pub(crate) fn kind(self) -> BetaKind {
        match self.0 {
            0.0 => BetaKind::ItakuraSaito,
            1.0 => BetaKind::KullbackLeibler,
            2.0 => BetaKind::Frobenius,
            b => BetaKind::General(b),
        }
    }
}

impl TryFrom<f64> for Beta {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Beta::new(v)
    }
}

impl From<Beta> for f64 {
    fn from(b: Beta) -> f64 {
        b.0
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum BetaKind {
    ItakuraSaito,
    KullbackLeibler,
    Frobenius,
    General(f64),
}

/// Objectives `Ω` with their reference errors `e_β` and simplex weights `λ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSet {
    betas: Vec<Beta>,
    ref_errors: Vec<f64>,
    weights: Vec<f64>,
}

impl ObjectiveSet {
    /// Validates and renormalizes `weights` onto the unit simplex.
    pub fn new(betas: Vec<Beta>, ref_errors: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidArgument("objective set is empty".into()));
        }
        if ref_errors.len() != betas.len() || weights.len() != betas.len() {
            return dim_err(format!(
                "{} betas, {} reference errors and {} weights",
                betas.len(),
                ref_errors.len(),
                weights.len()
            ));
        }
        for (i, a) in betas.iter().enumerate() {
            if betas[..i].contains(a) {
                return Err(Error::InvalidArgument(format!("beta {a} listed twice")));
            }
        }
        if let Some(e) = ref_errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "reference errors must be finite and positive, got {e}"
            )));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("weights are all zero".into()));
        }
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(Self {
            betas,
            ref_errors,
            weights,
        })
    }

    /// Unit reference errors with all weight on `betas[index]`.
    pub fn one_hot(betas: Vec<Beta>, index: usize) -> Result<Self> {
        let n = betas.len();
        if index >= n {
            return Err(Error::InvalidArgument(format!(
                "index {index} out of range for {n} objectives"
            )));
        }
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Self::new(betas, vec![1.0; n], weights)
    }

    pub fn betas(&self) -> &[Beta] {
        &self.betas
    }

    pub fn ref_errors(&self) -> &[f64] {
        &self.ref_errors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    /// Same objectives and references, new weights (renormalized).
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.betas.clone(), self.ref_errors.clone(), weights)
    }

    /// Same objectives and weights, new reference errors.
    pub fn with_ref_errors(&self, ref_errors: Vec<f64>) -> Result<Self> {
        Self::new(self.betas.clone(), ref_errors, self.weights.clone())
    }

    /// Replaces the weights without renormalizing; callers guarantee they
    /// already lie on the simplex.
    pub(crate) fn set_weights_unchecked(&mut self, weights: Vec<f64>) {
        debug_assert_eq!(weights.len(), self.betas.len());
        self.weights = weights;
    }

    /// `D_β / e_β` for each raw divergence value.
    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter().zip(&self.ref_errors).map(|(d, e)| d / e).collect()
    }

    /// `Σ λ_β D_β / e_β`. Zero-weight terms are skipped.
    pub fn weighted(&self, raw: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((d, e), l) in raw.iter().zip(&self.ref_errors).zip(&self.weights) {
            if *l > 0.0 {
                acc += l * (d / e);
            }
        }
        acc
    }

    /// Index and value of the largest normalized divergence; ties go to the
    /// smallest β.
    pub fn argmax_normalized(&self, raw: &[f64]) -> (usize, f64) {
        let norm = self.normalize(raw);
        let mut best = 0;
        for i in 1..norm.len() {
            let better = norm[i] > norm[best]
                || (norm[i] == norm[best] && self.betas[i] < self.betas[best]);
            if better {
                best = i;
            }
        }
        (best, norm[best])
    }

    /// Indices of the objectives with positive weight.
    pub(crate) fn active(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.betas.len()).filter(|&i| self.weights[i] > 0.0)
    }
}

/// Scalar β-divergence `D_β(x, y)`.
///
/// For β = 1 the `x = 0` case evaluates to its limit `y`. β = 0 requires
/// `x > 0`.
pub fn beta_div_scalar(x: f64, y: f64, beta: Beta) -> Result<f64> {
    if !(y > 0.0) {
        return Err(Error::Domain(format!("D_{beta}({x}, {y}): y must be positive")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("D_{beta}({x}, {y}): x must be nonnegative")));
    }
    if x <= 0.0 && matches!(beta.kind(), BetaKind::ItakuraSaito) {
        return Err(Error::Domain(format!("D_0({x}, {y}): x must be positive")));
    }
    Ok(term(x, y, beta.kind()))
}

#[inline]
fn term(x: f64, y: f64, kind: BetaKind) -> f64 {
    if x == y {
        return 0.0;
    }
    match kind {
        BetaKind::ItakuraSaito => {
            let q = x / y;
            q - q.ln() - 1.0
        }
        BetaKind::KullbackLeibler => {
            if x == 0.0 {
                y
            } else {
                x * (x / y).ln() - x + y
            }
        }
        BetaKind::Frobenius => {
            let d = x - y;
            0.5 * d * d
        }
        BetaKind::General(b) => {
            let yb1 = y.powf(b - 1.0);
            (x.powf(b) + (b - 1.0) * yb1 * y - b * x * yb1) / (b * (b - 1.0))
        }
    }
}

/// The approximation `WH` in whatever form the data's storage needs.
pub(crate) enum Fitted {
    /// Full `m x n` product.
    Dense(DenseMatrix),
    /// `(WH)_{ij}` on the support of the data, plus the two global sums the
    /// KL and Frobenius objectives need: `Σ_{ij} (WH)_{ij}` and `‖WH‖²_F`.
    Sparse {
        support: Vec<f64>,
        total: f64,
        norm_sq: f64,
    },
}

impl Fitted {
    pub(crate) fn compute(x: DataRef<'_>, w: &DenseMatrix, h: &DenseMatrix) -> Result<Self> {
        check_shapes(x, w, h)?;
        match x {
            DataRef::Dense(_) => Ok(Fitted::Dense(matmul(w, h)?)),
            DataRef::Sparse(s) => {
                let support = wh_at_support(w, h, s)?;
                let total = col_sums(w)
                    .iter()
                    .zip(row_sums(h))
                    .map(|(a, b)| a * b)
                    .sum();
                // ‖WH‖² = <WᵀW, HHᵀ>
                let wtw = matmul_tn(w, w)?;
                let hht = matmul(h, &h.transpose())?;
                let norm_sq = wtw
                    .as_slice()
                    .iter()
                    .zip(hht.as_slice())
                    .map(|(a, b)| a * b)
                    .sum();
                Ok(Fitted::Sparse {
                    support,
                    total,
                    norm_sq,
                })
            }
        }
    }
}

pub(crate) fn check_shapes(x: DataRef<'_>, w: &DenseMatrix, h: &DenseMatrix) -> Result<()> {
    let (m, n) = x.shape();
    if w.cols() != h.rows() || w.rows() != m || h.cols() != n {
        return dim_err(format!(
            "factors {}x{} * {}x{} do not match a {m}x{n} target",
            w.rows(),
            w.cols(),
            h.rows(),
            h.cols()
        ));
    }
    Ok(())
}

/// Raw divergences `D_β(X, WH)` for each β given a precomputed fit.
pub(crate) fn divergences(x: DataRef<'_>, fit: &Fitted, betas: &[Beta]) -> Result<Vec<f64>> {
    betas
        .iter()
        .map(|&beta| match (x, fit) {
            (DataRef::Dense(xd), Fitted::Dense(y)) => dense_divergence(xd, y, beta),
            (
                DataRef::Sparse(xs),
                Fitted::Sparse {
                    support,
                    total,
                    norm_sq,
                },
            ) => match beta.kind() {
                BetaKind::KullbackLeibler => {
                    let mut acc = 0.0;
                    for (&v, &y) in xs.values().iter().zip(support) {
                        if !(y > 0.0) {
                            return Err(Error::Domain(format!("(WH)_ij = {y} on the support")));
                        }
                        acc += v * (v / y).ln() - v;
                    }
                    Ok((acc + total).max(0.0))
                }
                BetaKind::Frobenius => {
                    let cross: f64 = xs.values().iter().zip(support).map(|(v, y)| v * y).sum();
                    Ok((0.5 * (xs.frobenius_sq() - 2.0 * cross + norm_sq)).max(0.0))
                }
                _ => Err(Error::InvalidArgument(format!(
                    "the sparse path supports beta in {{1, 2}}, got {beta}"
                ))),
            },
            _ => unreachable!("fit computed for a different storage kind"),
        })
        .collect()
}

fn dense_divergence(x: &DenseMatrix, y: &DenseMatrix, beta: Beta) -> Result<f64> {
    let kind = beta.kind();
    let n = x.cols();
    let row_sum = |i: usize| -> Result<f64> {
        let mut acc = 0.0;
        for (&xv, &yv) in x.row(i).iter().zip(&y.as_slice()[i * n..(i + 1) * n]) {
            if !(yv > 0.0) {
                return Err(Error::Domain(format!("(WH)_ij = {yv} is not positive")));
            }
            if matches!(kind, BetaKind::ItakuraSaito) && !(xv > 0.0) {
                return Err(Error::Domain(format!(
                    "Itakura-Saito requires positive data, found {xv} in row {i}"
                )));
            }
            acc += term(xv, yv, kind);
        }
        Ok(acc)
    };
    // Row partials are summed in row order so the result does not depend on
    // the thread count.
    let partials: Vec<f64> = if x.rows() * n >= 1 << 15 {
        (0..x.rows())
            .into_par_iter()
            .map(row_sum)
            .collect::<Result<_>>()?
    } else {
        (0..x.rows()).map(row_sum).collect::<Result<_>>()?
    };
    Ok(partials.iter().sum())
}

/// `D_β(X, WH) = Σ_{ij} D_β(X_ij, (WH)_ij)`.
///
/// Sparse data is evaluated without forming `WH` and only supports β ∈ {1, 2}.
pub fn beta_div_matrix<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    beta: Beta,
) -> Result<f64> {
    let x = x.as_data();
    if x.is_sparse() && !beta.has_sparse_path() {
        return Err(Error::InvalidArgument(format!(
            "the sparse path supports beta in {{1, 2}}, got {beta}"
        )));
    }
    let fit = Fitted::compute(x, w, h)?;
    Ok(divergences(x, &fit, &[beta])?[0])
}

/// Raw `D_β(X, WH)` for every β of the set, sharing one product.
pub fn raw_divergences<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
) -> Result<Vec<f64>> {
    let x = x.as_data();
    let fit = Fitted::compute(x, w, h)?;
    divergences(x, &fit, obj.betas())
}

/// `Σ_β λ_β D_β(X, WH) / e_β`.
pub fn weighted_objective<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
) -> Result<f64> {
    Ok(obj.weighted(&raw_divergences(x, w, h, obj)?))
}

/// The β maximizing `D_β / e_β` and that maximum. Ties go to the smaller β.
pub fn max_normalized<X: AsData + ?Sized>(
    x: &X,
    w: &DenseMatrix,
    h: &DenseMatrix,
    obj: &ObjectiveSet,
) -> Result<(Beta, f64)> {
    let raw = raw_divergences(x, w, h, obj)?;
    let (i, v) = obj.argmax_normalized(&raw);
    Ok((obj.betas()[i], v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SparseMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn b(v: f64) -> Beta {
        Beta::new(v).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn scalar_hand_values() {
        let kl = beta_div_scalar(2.0, 1.0, Beta::KL).unwrap();
        assert!((kl - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((kl - 0.386294).abs() < 1e-6);
        let is = beta_div_scalar(1.0, 2.0, Beta::IS).unwrap();
        assert!((is - (2f64.ln() - 0.5)).abs() < 1e-15);
        assert!((is - 0.193147).abs() < 1e-6);
        assert_eq!(beta_div_scalar(3.0, 1.0, Beta::FRO).unwrap(), 2.0);
        for beta in [0.0, 0.5, 1.0, 1.5, 2.0, 3.0] {
            assert_eq!(beta_div_scalar(1.7, 1.7, b(beta)).unwrap(), 0.0);
        }
    }

    #[test]
    fn scalar_domain_errors() {
        assert!(beta_div_scalar(1.0, 0.0, Beta::KL).is_err());
        assert!(beta_div_scalar(0.0, 1.0, Beta::IS).is_err());
        assert!(beta_div_scalar(-1.0, 1.0, Beta::FRO).is_err());
        assert_eq!(beta_div_scalar(0.0, 2.5, Beta::KL).unwrap(), 2.5);
        assert!(Beta::new(-0.5).is_err());
        assert!(Beta::new(f64::NAN).is_err());
    }

    #[test]
    fn branches_match_direct_formulas() {
        let (x, y) = (0.7_f64, 1.9_f64);
        let fro = 0.5 * (x - y) * (x - y);
        let kl = x * (x / y).ln() - x + y;
        let is = x / y - (x / y).ln() - 1.0;
        assert!(rel(beta_div_scalar(x, y, Beta::FRO).unwrap(), fro) < 1e-15);
        assert!(rel(beta_div_scalar(x, y, Beta::KL).unwrap(), kl) < 1e-15);
        assert!(rel(beta_div_scalar(x, y, Beta::IS).unwrap(), is) < 1e-15);
        // the generic branch evaluated at β = 2 also reduces to ½(x−y)²
        assert!(rel(term(x, y, BetaKind::General(2.0)), fro) < 1e-12);
    }

    #[test]
    fn continuity_at_special_betas() {
        for &(x, y) in &[(0.3, 1.2), (2.0, 0.5), (1.0, 1.1)] {
            for (special, kind) in [(0.0, Beta::IS), (1.0, Beta::KL)] {
                let exact = beta_div_scalar(x, y, kind).unwrap();
                for delta in [-1e-6, 1e-6] {
                    let beta = special + delta;
                    if beta < 0.0 {
                        continue;
                    }
                    let near = beta_div_scalar(x, y, b(beta)).unwrap();
                    assert!(rel(near, exact) < 1e-4, "beta {beta}: {near} vs {exact}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn scalar_nonnegative_and_zero_iff_equal(
            x in 1e-3f64..50.0,
            y in 1e-3f64..50.0,
            bi in 0usize..6,
        ) {
            let beta = b([0.0, 0.5, 1.0, 1.5, 2.0, 3.0][bi]);
            let d = beta_div_scalar(x, y, beta).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert_eq!(beta_div_scalar(x, x, beta).unwrap(), 0.0);
            if (x - y).abs() > 1e-2 * x.max(y) {
                prop_assert!(d > 0.0);
            }
        }
    }

    fn random_dense(rng: &mut ChaCha8Rng, m: usize, n: usize, lo: f64) -> DenseMatrix {
        DenseMatrix::from_fn(m, n, |_, _| lo + rng.gen::<f64>())
    }

    #[test]
    fn matrix_reduces_to_scalar_and_vanishes_at_exact_fit() {
        let w = DenseMatrix::from_rows(&[[2.0]]).unwrap();
        let h = DenseMatrix::from_rows(&[[1.5]]).unwrap();
        let x = DenseMatrix::from_rows(&[[1.0]]).unwrap();
        for beta in [0.0, 1.0, 1.5, 2.0] {
            let d = beta_div_matrix(&x, &w, &h, b(beta)).unwrap();
            assert_eq!(d, beta_div_scalar(1.0, 3.0, b(beta)).unwrap());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = random_dense(&mut rng, 6, 2, 0.1);
        let h = random_dense(&mut rng, 2, 5, 0.1);
        let x = matmul(&w, &h).unwrap();
        for beta in [0.0, 1.0, 1.5, 2.0] {
            assert!(beta_div_matrix(&x, &w, &h, b(beta)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn sparse_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (m, n, r) = (30, 20, 3);
        let mut trip = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.gen::<f64>() < 0.3 {
                    trip.push((i, j, rng.gen_range(1.0..5.0f64).floor()));
                }
            }
        }
        let xs = SparseMatrix::from_triplets(m, n, trip).unwrap();
        let xd = xs.to_dense();
        let w = random_dense(&mut rng, m, r, 0.05);
        let h = random_dense(&mut rng, r, n, 0.05);
        for beta in [Beta::KL, Beta::FRO] {
            let ds = beta_div_matrix(&xs, &w, &h, beta).unwrap();
            let dd = beta_div_matrix(&xd, &w, &h, beta).unwrap();
            assert!(rel(ds, dd) < 1e-10, "beta {beta}: {ds} vs {dd}");
        }
        assert!(beta_div_matrix(&xs, &w, &h, Beta::IS).is_err());
    }

    #[test]
    fn scaling_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_dense(&mut rng, 8, 7, 0.1);
        let w = random_dense(&mut rng, 8, 2, 0.1);
        let h = random_dense(&mut rng, 2, 7, 0.1);
        for beta in [0.0, 0.5, 1.0, 1.5, 2.0] {
            for alpha in [0.5, 3.0] {
                let lhs = beta_div_matrix(&x.scale(alpha), &w, &h.scale(alpha), b(beta)).unwrap();
                let rhs = alpha.powf(beta) * beta_div_matrix(&x, &w, &h, b(beta)).unwrap();
                assert!(rel(lhs, rhs) < 1e-10, "beta {beta} alpha {alpha}");
            }
        }
    }

    #[test]
    fn dimension_and_sparse_beta_errors() {
        let x = DenseMatrix::filled(3, 3, 1.0);
        let w = DenseMatrix::filled(3, 2, 1.0);
        let h = DenseMatrix::filled(2, 4, 1.0);
        assert!(matches!(
            beta_div_matrix(&x, &w, &h, Beta::FRO),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn weighted_objective_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_dense(&mut rng, 5, 4, 0.2);
        let w = random_dense(&mut rng, 5, 2, 0.2);
        let h = random_dense(&mut rng, 2, 4, 0.2);
        let betas = vec![Beta::KL, Beta::FRO];
        let d1 = beta_div_matrix(&x, &w, &h, Beta::KL).unwrap();
        let d2 = beta_div_matrix(&x, &w, &h, Beta::FRO).unwrap();

        let one_hot = ObjectiveSet::new(betas.clone(), vec![0.5, 2.0], vec![0.0, 1.0]).unwrap();
        assert!(rel(weighted_objective(&x, &w, &h, &one_hot).unwrap(), d2 / 2.0) < 1e-15);

        let anchored = ObjectiveSet::new(betas.clone(), vec![d1, d2], vec![0.5, 0.5]).unwrap();
        assert!((weighted_objective(&x, &w, &h, &anchored).unwrap() - 1.0).abs() < 1e-15);

        let exact = matmul(&w, &h).unwrap();
        assert!(weighted_objective(&exact, &w, &h, &anchored).unwrap() < 1e-12);
    }

    #[test]
    fn objective_set_validation() {
        let betas = vec![Beta::KL, Beta::FRO];
        assert!(ObjectiveSet::new(betas.clone(), vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(ObjectiveSet::new(betas.clone(), vec![1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(ObjectiveSet::new(betas.clone(), vec![1.0], vec![1.0, 1.0]).is_err());
        assert!(ObjectiveSet::new(vec![Beta::KL, Beta::KL], vec![1.0; 2], vec![1.0; 2]).is_err());
        assert!(ObjectiveSet::new(vec![], vec![], vec![]).is_err());
        let o = ObjectiveSet::new(betas, vec![1.0, 1.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(o.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn argmax_and_ties() {
        let o = ObjectiveSet::new(vec![Beta::IS, Beta::KL], vec![1.0, 1.0], vec![1.0, 1.0])
            .unwrap();
        assert_eq!(o.argmax_normalized(&[1.2, 0.9]), (0, 1.2));
        assert_eq!(o.argmax_normalized(&[0.9, 1.2]), (1, 1.2));
        assert_eq!(o.argmax_normalized(&[1.0, 1.0]).0, 0);
        // listed out of order: the tie still goes to the smaller beta
        let o = ObjectiveSet::new(vec![Beta::FRO, Beta::KL], vec![1.0, 1.0], vec![1.0, 1.0])
            .unwrap();
        assert_eq!(o.argmax_normalized(&[1.0, 1.0]).0, 1);

        let single = ObjectiveSet::one_hot(vec![Beta::FRO], 0).unwrap();
        let x = DenseMatrix::filled(2, 2, 1.0);
        let w = DenseMatrix::filled(2, 1, 0.5);
        let h = DenseMatrix::filled(1, 2, 0.5);
        assert_eq!(max_normalized(&x, &w, &h, &single).unwrap().0, Beta::FRO);
    }
}
