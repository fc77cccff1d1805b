use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{AsData, DataRef, DenseMatrix, FactorPair, EPS_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Uniform entries in `(0, s]` with `s = 2 sqrt(mean(X) / r)`, so that
    /// `E[(WH)_ij] = mean(X)`.
    Random,
    /// Nonnegative double SVD: positive parts of the leading singular pairs.
    Svd,
}

/// Initial factors of rank `r` for `x`. Deterministic for a given seed; every
/// entry is at least [`EPS_FLOOR`].
pub fn init_factors<X: AsData + ?Sized>(
    x: &X,
    r: usize,
    mode: InitMode,
    seed: u64,
) -> Result<FactorPair> {
    let x = x.as_data();
    let (m, n) = x.shape();
    if r == 0 || r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} must be between 1 and min({m}, {n})"
        )));
    }
    match mode {
        InitMode::Random => random_init(x, r, seed),
        InitMode::Svd => nndsvd(x, r),
    }
}

fn random_init(x: DataRef<'_>, r: usize, seed: u64) -> Result<FactorPair> {
    let (m, n) = x.shape();
    let total: f64 = match x {
        DataRef::Dense(d) => d.sum(),
        DataRef::Sparse(s) => s.values().iter().sum(),
    };
    let mean = total / (m * n) as f64;
    let scale = 2.0 * (mean / r as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // 1 - U[0, 1) lies in (0, 1]
    let w = DenseMatrix::from_fn(m, r, |_, _| scale * (1.0 - rng.gen::<f64>()));
    let h = DenseMatrix::from_fn(r, n, |_, _| scale * (1.0 - rng.gen::<f64>()));
    FactorPair::new(w, h)
}

fn split_signs(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (
        v.iter().map(|x| x.max(0.0)).collect(),
        v.iter().map(|x| (-x).max(0.0)).collect(),
    )
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn nndsvd(x: DataRef<'_>, r: usize) -> Result<FactorPair> {
    let dense = match x {
        DataRef::Dense(d) => d.clone(),
        DataRef::Sparse(s) => s.to_dense(),
    };
    let (m, n) = dense.shape();
    let a = DMatrix::from_row_slice(m, n, dense.as_slice());
    let svd = a.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numeric("SVD did not converge".into())),
    };
    let sv = svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));

    let mut w = DenseMatrix::zeros(m, r);
    let mut h = DenseMatrix::zeros(r, n);
    for (k, &idx) in order.iter().take(r).enumerate() {
        let s = sv[idx].max(0.0);
        let uk: Vec<f64> = u.column(idx).iter().copied().collect();
        let vk: Vec<f64> = vt.row(idx).iter().copied().collect();
        let (wk, hk) = if k == 0 {
            // The leading pair of a nonnegative matrix has a single sign.
            let uk: Vec<f64> = uk.iter().map(|v| v.abs()).collect();
            let vk: Vec<f64> = vk.iter().map(|v| v.abs()).collect();
            (scaled(&uk, s.sqrt()), scaled(&vk, s.sqrt()))
        } else {
            let (up, un) = split_signs(&uk);
            let (vp, vn) = split_signs(&vk);
            let (nup, nvp, nun, nvn) = (norm(&up), norm(&vp), norm(&un), norm(&vn));
            let (x, y, nx, ny) = if nup * nvp >= nun * nvn {
                (up, vp, nup, nvp)
            } else {
                (un, vn, nun, nvn)
            };
            let mass = nx * ny;
            if mass == 0.0 {
                (vec![0.0; m], vec![0.0; n])
            } else {
                let c = (s * mass).sqrt();
                (scaled(&x, c / nx), scaled(&y, c / ny))
            }
        };
        for (i, v) in wk.into_iter().enumerate() {
            w.set(i, k, v);
        }
        for (j, v) in hk.into_iter().enumerate() {
            h.set(k, j, v);
        }
    }
    w.floor_at(EPS_FLOOR);
    h.floor_at(EPS_FLOOR);
    FactorPair::new(w, h)
}

fn scaled(v: &[f64], c: f64) -> Vec<f64> {
    v.iter().map(|x| c * x).collect()
}
