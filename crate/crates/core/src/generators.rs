//! Synthetic test data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};
use crate::oracle::{sample_data, StepData};

/// `jump·1_{(0,L)}` on `n` cell centres of `(−L, L)`.
pub fn step_1d(n: usize, half_length: f64, jump: f64) -> Result<ScalarField> {
    sample_data(&StepData::new(half_length, jump, 0.0)?, n)
}

/// `jump·1_{(0,L)}(x) + slope·x` on `n` cell centres of `(−L, L)`.
pub fn affine_step_1d(n: usize, half_length: f64, jump: f64, slope: f64) -> Result<ScalarField> {
    sample_data(&StepData::new(half_length, jump, slope)?, n)
}

/// Offsets from the image centre, normalised by half the side length.
fn centred(n: usize, k: usize) -> (f64, f64) {
    let c = (n as f64 - 1.0) / 2.0;
    let half = n as f64 / 2.0;
    (((k / n) as f64 - c) / half, ((k % n) as f64 - c) / half)
}

fn square_grid(n: usize) -> Result<GridSpec> {
    if n < 8 {
        return Err(Error::InvalidGrid(format!("image side {n} < 8")));
    }
    GridSpec::image(n, n)
}

/// `n × n` disc holding a linear cone whose apex is a sharp spike; flat
/// background outside. Values lie in `[0.1, 0.9]`.
pub fn circle_2d(n: usize) -> Result<ScalarField> {
    const RADIUS: f64 = 0.7;
    let grid = square_grid(n)?;
    ScalarField::from_fn(&grid, |k| {
        let (y, x) = centred(n, k);
        let r = (x * x + y * y).sqrt();
        if r < RADIUS {
            0.3 + 0.6 * (1.0 - r / RADIUS)
        } else {
            0.1
        }
    })
}

/// `n × n` square pyramid (level sets are squares) whose central square of
/// half-width 1/2 rises with twice the slope of the outer band. Values lie in
/// `[0.05, 0.95]`.
pub fn pyramid_square_2d(n: usize) -> Result<ScalarField> {
    const INNER: f64 = 0.5;
    const SLOPE: f64 = 0.6;
    let grid = square_grid(n)?;
    ScalarField::from_fn(&grid, |k| {
        let (y, x) = centred(n, k);
        let d = x.abs().max(y.abs());
        let v = if d >= INNER {
            SLOPE * (1.0 - d)
        } else {
            SLOPE * (1.0 - INNER) + 2.0 * SLOPE * (INNER - d)
        };
        0.05 + v
    })
}

/// Adds i.i.d. `N(0, variance)` samples drawn from a ChaCha8 stream seeded
/// with `seed`.
pub fn add_gaussian_noise(f: &ScalarField, variance: f64, seed: u64) -> Result<ScalarField> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance {variance} must be non-negative"
        )));
    }
    if variance == 0.0 {
        return Ok(f.clone());
    }
    let normal = Normal::new(0.0, variance.sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScalarField::new(
        f.grid().clone(),
        f.values().iter().map(|v| v + normal.sample(&mut rng)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_is_identity() {
        let f = circle_2d(16).unwrap();
        assert_eq!(add_gaussian_noise(&f, 0.0, 3).unwrap(), f);
        assert!(add_gaussian_noise(&f, -1.0, 3).is_err());
    }

    #[test]
    fn noise_statistics() {
        let f = ScalarField::zeros(&GridSpec::image(256, 256).unwrap());
        let g = add_gaussian_noise(&f, 0.01, 42).unwrap();
        let n = g.len() as f64;
        let mean = g.values().iter().sum::<f64>() / n;
        let var = g.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((var - 0.01).abs() < 0.05 * 0.01, "{var}");
        assert!(mean.abs() < 1e-3);
    }

    #[test]
    fn noise_is_seeded() {
        let f = pyramid_square_2d(32).unwrap();
        let a = add_gaussian_noise(&f, 0.01, 7).unwrap();
        let b = add_gaussian_noise(&f, 0.01, 7).unwrap();
        let c = add_gaussian_noise(&f, 0.01, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn circle_rotation_invariant() {
        for n in [31, 64] {
            let f = circle_2d(n).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(f.at2(i, j), f.at2(j, n - 1 - i));
                }
            }
        }
    }

    #[test]
    fn pyramid_slopes() {
        let n = 128;
        let f = pyramid_square_2d(n).unwrap();
        let row = n / 2;
        let inner = f.at2(row, 50) - f.at2(row, 49);
        let outer = f.at2(row, 20) - f.at2(row, 19);
        assert!((inner / outer - 2.0).abs() < 1e-9);
        let v = f.values();
        assert!(v.iter().all(|&x| (0.05..=0.95).contains(&x)));
    }

    #[test]
    fn one_dimensional_data() {
        let f = step_1d(20, 1.0, 2.0).unwrap();
        assert_eq!(f.values()[9], 0.0);
        assert_eq!(f.values()[10], 2.0);
        let g = affine_step_1d(20, 1.0, 1.0, 1.0).unwrap();
        assert!((g.values()[0] + 0.95).abs() < 1e-12);
        assert!(circle_2d(4).is_err());
    }
}
