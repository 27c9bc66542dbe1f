//! Image quality measures.

use crate::diff_ops::gaussian_filter;
use crate::error::Result;
use crate::field::ScalarField;

const SSIM_SIGMA: f64 = 1.5;
const SSIM_WINDOW: usize = 11;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

fn outside_unit_range(f: &ScalarField) -> bool {
    f.values().iter().any(|&v| !(0.0..=1.0).contains(&v))
}

/// Mean local SSIM with an 11-tap Gaussian window (σ = 1.5), `K₁ = 0.01`,
/// `K₂ = 0.03` and dynamic range 1.
///
/// Values outside `[0, 1]` are used as they are, with a warning.
pub fn ssim(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.grid().check_same(b.grid(), "ssim")?;
    if outside_unit_range(a) || outside_unit_range(b) {
        log::warn!("ssim input outside [0, 1]; dynamic range taken as 1");
    }
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let blur = |f: ScalarField| gaussian_filter(&f, SSIM_SIGMA, SSIM_WINDOW);
    let mu_a = blur(a.clone())?;
    let mu_b = blur(b.clone())?;
    let aa = blur(a.zip_map(a, |x, y| x * y)?)?;
    let bb = blur(b.zip_map(b, |x, y| x * y)?)?;
    let ab = blur(a.zip_map(b, |x, y| x * y)?)?;

    let mut total = 0.0;
    for i in 0..a.len() {
        let (ma, mb) = (mu_a.values()[i], mu_b.values()[i]);
        let va = aa.values()[i] - ma * ma;
        let vb = bb.values()[i] - mb * mb;
        let cov = ab.values()[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    Ok(total / a.len() as f64)
}

/// Peak signal-to-noise ratio in dB for unit peak; `+∞` for identical inputs.
pub fn psnr(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    a.grid().check_same(b.grid(), "psnr")?;
    let mse = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        / a.len() as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    })
}

/// `‖a − b‖` with the cell-volume weighting of the energies.
pub fn l2_distance(a: &ScalarField, b: &ScalarField) -> Result<f64> {
    Ok(a.sub(b)?.norm_l2())
}
