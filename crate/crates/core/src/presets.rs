//! Reference parameter values used as defaults by the simulation tools.

use num_complex::Complex64;

use crate::hermitian::HermitianMatrix;

/// A 3x3 polarimetric covariance matrix observed over forested terrain,
/// widely used as a realistic simulation target. Entries are in natural
/// intensity units and span four orders of magnitude.
pub fn forest_covariance() -> HermitianMatrix {
    let c = Complex64::new;
    HermitianMatrix::new(
        3,
        vec![
            c(360932.0, 0.0),
            c(11050.0, 3759.0),
            c(63896.0, 1581.0),
            c(11050.0, -3759.0),
            c(98960.0, 0.0),
            c(6593.0, 6868.0),
            c(63896.0, -1581.0),
            c(6593.0, -6868.0),
            c(208843.0, 0.0),
        ],
    )
    .expect("reference covariance is Hermitian")
}

/// Same matrix with its (0, 0) intensity replaced, the one-parameter family
/// used by sensitivity sweeps. The replacement keeps the matrix Hermitian;
/// positive definiteness depends on the value and is checked by the caller.
pub fn forest_covariance_with_first_intensity(x: f64) -> HermitianMatrix {
    let base = forest_covariance();
    let mut entries = base.entries().to_vec();
    entries[0] = Complex64::new(x, 0.0);
    HermitianMatrix::new(3, entries).expect("replacing a diagonal entry keeps symmetry")
}

/// The nominal (0, 0) intensity of [`forest_covariance`].
pub const FOREST_FIRST_INTENSITY: f64 = 360932.0;
