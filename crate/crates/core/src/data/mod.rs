//! Data generation, file formats and factor initialization.

mod init;
mod io;
mod model;
mod synth;

pub use init::{init_factors, InitMode};
pub use io::{
    load_dense, load_labels, load_matrix, load_sparse, read_dense, read_labels, read_sparse,
    save_dense, save_sparse, write_dense, write_sparse, Labels,
};
pub use model::{Model, ModelKind, NormalizedRow};
pub use synth::{synth_generate, SynthData, SynthSpec};

use crate::divergence::Beta;
use crate::matrix::DenseMatrix;

/// Floor for data entries fed to divergences with β < 1, which are undefined
/// at zero.
pub const DATA_FLOOR: f64 = 1e-12;

/// Whether any objective needs strictly positive data.
pub fn needs_positive_data(betas: &[Beta]) -> bool {
    betas.iter().any(|b| b.value() < 1.0)
}

/// Raises entries below [`DATA_FLOOR`] to it and returns how many changed.
pub fn clamp_positive(x: &mut DenseMatrix) -> usize {
    let mut changed = 0;
    for v in x.as_mut_slice() {
        if *v < DATA_FLOOR {
            *v = DATA_FLOOR;
            changed += 1;
        }
    }
    if changed > 0 {
        log::warn!("clamped {changed} data entries to {DATA_FLOOR:e}");
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clamping_counts_changes() {
        let mut x = DenseMatrix::from_rows(&[[0.0, 1.0], [1e-20, 2.0]]).unwrap();
        assert_eq!(clamp_positive(&mut x), 2);
        assert_eq!(x.min_value(), DATA_FLOOR);
        assert_eq!(clamp_positive(&mut x), 0);
        assert!(needs_positive_data(&[Beta::IS, Beta::FRO]));
        assert!(!needs_positive_data(&[Beta::KL, Beta::FRO]));
    }
}
