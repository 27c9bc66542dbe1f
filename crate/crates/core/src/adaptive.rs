//! Spatially varying L∞ weights `β(x) = c/(|∇v(x)| + ε)`.
//!
//! Large slopes get small weights, so `w` is free to follow them there.

use crate::diff_ops::{gaussian_filter, gradient};
use crate::error::{Error, Result};
use crate::field::ScalarField;

fn check(c: f64, eps: f64) -> Result<()> {
    if !(c > 0.0 && c.is_finite() && eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need c > 0 and eps > 0; got c = {c}, eps = {eps}"
        )));
    }
    Ok(())
}

fn rule(v: &ScalarField, c: f64, eps: f64) -> Result<ScalarField> {
    let mags = gradient(v).magnitudes();
    ScalarField::new(
        v.grid().clone(),
        mags.into_iter().map(|m| c / (m + eps)).collect(),
    )
}

/// Weights from the forward-difference gradient of the Gaussian-smoothed data.
pub fn beta_from_data(
    f: &ScalarField,
    c: f64,
    eps: f64,
    sigma: f64,
    window: usize,
) -> Result<ScalarField> {
    check(c, eps)?;
    rule(&gaussian_filter(f, sigma, window)?, c, eps)
}

/// Weights from the gradient of a clean reference image.
pub fn beta_from_reference(u_ref: &ScalarField, c: f64, eps: f64) -> Result<ScalarField> {
    check(c, eps)?;
    rule(u_ref, c, eps)
}
