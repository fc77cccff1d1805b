use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::divergence::Beta;
use crate::error::{Error, Result};
use crate::matrix::{matmul, DenseMatrix};

/// Parameters of a synthetic low-rank matrix with mixed noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// `‖N‖_F / ‖W̃H̃‖_F` before clipping.
    pub noise_level: f64,
    /// Noise families to mix: 0 (multiplicative Gaussian), 1 (Poisson),
    /// 2 (additive Gaussian).
    pub noise_betas: Vec<Beta>,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            m: 200,
            n: 200,
            r: 10,
            noise_level: 0.2,
            noise_betas: vec![Beta::IS, Beta::KL, Beta::FRO],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    /// `max(0, W̃H̃ + N)`.
    pub x: DenseMatrix,
    pub w_true: DenseMatrix,
    pub h_true: DenseMatrix,
    /// The noise before clipping.
    pub noise: DenseMatrix,
}

impl SynthSpec {
    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.r == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if !(self.noise_level >= 0.0) || !self.noise_level.is_finite() {
            return Err(Error::InvalidArgument("noise level must be finite and >= 0".into()));
        }
        if self.noise_level > 0.0 && self.noise_betas.is_empty() {
            return Err(Error::InvalidArgument("noise requires at least one noise family".into()));
        }
        if let Some(b) = self.noise_betas.iter().find(|b| ![0.0, 1.0, 2.0].contains(&b.value())) {
            return Err(Error::InvalidArgument(format!("no noise model for beta {b}")));
        }
        Ok(())
    }
}

// Σ over the requested families of N_β / ‖N_β‖_F. `None` when a draw is
// degenerate (a family or the mix has zero norm).
fn draw_mixture(spec: &SynthSpec, clean: &DenseMatrix, rng: &mut ChaCha8Rng) -> Option<DenseMatrix> {
    let (m, n) = (spec.m, spec.n);
    let poisson = Poisson::new(1.0).expect("valid rate");
    let mut mix = DenseMatrix::zeros(m, n);
    for kind in [0.0, 1.0, 2.0] {
        if !spec.noise_betas.iter().any(|b| b.value() == kind) {
            continue;
        }
        let part = DenseMatrix::from_fn(m, n, |i, j| match kind as u8 {
            0 => {
                let g: f64 = StandardNormal.sample(rng);
                clean.get(i, j) * g
            }
            1 => poisson.sample(rng),
            _ => StandardNormal.sample(rng),
        });
        let norm = part.frobenius_norm();
        if !(norm > 0.0) {
            return None;
        }
        for (acc, v) in mix.as_mut_slice().iter_mut().zip(part.as_slice()) {
            *acc += v / norm;
        }
    }
    (mix.frobenius_norm() > 0.0).then_some(mix)
}

/// Draws `W̃`, `H̃` uniform on `[0, 1]` and returns `X = max(0, W̃H̃ + N)` with
/// `‖N‖_F = noise_level · ‖W̃H̃‖_F`, together with the ground truth.
pub fn synth_generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w_true = DenseMatrix::from_fn(spec.m, spec.r, |_, _| rng.gen::<f64>());
    let h_true = DenseMatrix::from_fn(spec.r, spec.n, |_, _| rng.gen::<f64>());
    let clean = matmul(&w_true, &h_true)?;

    let noise = if spec.noise_level == 0.0 {
        DenseMatrix::zeros(spec.m, spec.n)
    } else {
        // One retry with fresh draws, then give up.
        let mix = match draw_mixture(spec, &clean, &mut rng) {
            Some(mix) => mix,
            None => {
                log::warn!("degenerate noise draw for seed {}; retrying", spec.seed);
                draw_mixture(spec, &clean, &mut rng).ok_or_else(|| {
                    Error::Numeric(format!("noise draw for seed {} has zero norm", spec.seed))
                })?
            }
        };
        let scale = spec.noise_level * clean.frobenius_norm() / mix.frobenius_norm();
        mix.scale(scale)
    };

    let mut x = clean;
    for (v, e) in x.as_mut_slice().iter_mut().zip(noise.as_slice()) {
        *v = (*v + e).max(0.0);
    }
    Ok(SynthData {
        x,
        w_true,
        h_true,
        noise,
    })
}
