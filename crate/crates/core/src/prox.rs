//! Proximal maps and projections used by the splitting solver.

use crate::error::{Error, Result};
use crate::field::{magnitudes, ScalarField, VectorField};

/// Pointwise soft-thresholding of vector magnitudes, in place.
pub(crate) fn shrink_in_place(comps: &mut [Vec<f64>], tau: f64) {
    let mags = magnitudes(comps);
    for c in comps.iter_mut() {
        for (v, &m) in c.iter_mut().zip(&mags) {
            *v = if m > tau { *v * (m - tau) / m } else { 0.0 };
        }
    }
}

/// `v(x)·max(|v(x)| − τ, 0)/|v(x)|`, the prox of `τ Σ|v(x)|`.
pub fn shrink_vector(v: &VectorField, tau: f64) -> Result<VectorField> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must be non-negative")));
    }
    let mut comps = v.components().to_vec();
    if tau > 0.0 {
        shrink_in_place(&mut comps, tau);
    }
    Ok(VectorField::from_raw(v.grid().clone(), comps))
}

/// Euclidean projection onto `{z : Σ|z_i| ≤ radius}`.
pub fn project_l1_ball(v: &[f64], radius: f64) -> Vec<f64> {
    let theta = l1_threshold(v, None, radius);
    v.iter()
        .map(|&x| x.signum() * (x.abs() - theta).max(0.0))
        .collect()
}

/// Euclidean projection onto `{z : Σ c_i|z_i| ≤ radius}` for positive `c`.
pub fn project_weighted_l1_ball(v: &[f64], weights: &[f64], radius: f64) -> Vec<f64> {
    assert_eq!(v.len(), weights.len());
    let theta = l1_threshold(v, Some(weights), radius);
    v.iter()
        .zip(weights)
        .map(|(&x, &c)| x.signum() * (x.abs() - theta * c).max(0.0))
        .collect()
}

/// Soft-threshold level θ of the (weighted) L1-ball projection; 0 when `v`
/// is already feasible. Sort-based: breakpoints `|v_i|/c_i` in decreasing
/// order, θ from the largest active prefix.
fn l1_threshold(v: &[f64], weights: Option<&[f64]>, radius: f64) -> f64 {
    let c = |i: usize| weights.map_or(1.0, |w| w[i]);
    let norm: f64 = v.iter().enumerate().map(|(i, x)| c(i) * x.abs()).sum();
    if norm <= radius {
        return 0.0;
    }
    if radius <= 0.0 {
        return (0..v.len()).map(|i| v[i].abs() / c(i)).fold(0.0, f64::max);
    }
    let mut order: Vec<(f64, usize)> = v
        .iter()
        .enumerate()
        .filter(|(_, x)| **x != 0.0)
        .map(|(i, x)| (x.abs() / c(i), i))
        .collect();
    order.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let (mut s, mut q) = (0.0, 0.0);
    let mut theta = 0.0;
    for &(t, i) in &order {
        let ci = c(i);
        let s_next = s + ci * v[i].abs();
        let q_next = q + ci * ci;
        let th = (s_next - radius) / q_next;
        if t <= th {
            break;
        }
        s = s_next;
        q = q_next;
        theta = th;
    }
    theta
}

/// Prox of `τ·max_i β_i m_i` over non-negative magnitudes `m`, by Moreau
/// decomposition: `m − P_C(m)` with `C = {y : Σ|y_i|/β_i ≤ τ}`. The result
/// clamps every `β_i m_i` to a common level.
pub(crate) fn prox_linf_magnitudes(mags: &[f64], tau: f64, beta: Option<&[f64]>) -> Vec<f64> {
    match beta {
        None => {
            let theta = l1_threshold(mags, None, tau);
            mags.iter().map(|&m| m.min(theta)).collect()
        }
        Some(b) => {
            let inv: Vec<f64> = b.iter().map(|x| 1.0 / x).collect();
            let theta = l1_threshold(mags, Some(&inv), tau);
            mags.iter()
                .zip(&inv)
                .map(|(&m, &c)| m.min(theta * c))
                .collect()
        }
    }
}

pub(crate) fn prox_linf_in_place(comps: &mut [Vec<f64>], tau: f64, beta: Option<&[f64]>) {
    let mags = magnitudes(comps);
    let clamped = prox_linf_magnitudes(&mags, tau, beta);
    for c in comps.iter_mut() {
        for ((v, &m), &t) in c.iter_mut().zip(&mags).zip(&clamped) {
            *v = if m > 0.0 { *v * (t / m) } else { 0.0 };
        }
    }
}

/// Prox of `τ·max_x β(x)|w(x)|` (β ≡ 1 without a map). Directions are kept;
/// only the pointwise magnitudes are clamped.
pub fn prox_linf(v: &VectorField, tau: f64, beta_map: Option<&ScalarField>) -> Result<VectorField> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau = {tau} must be positive")));
    }
    if let Some(b) = beta_map {
        v.grid().check_same(b.grid(), "prox_linf beta map")?;
    }
    let mut comps = v.components().to_vec();
    prox_linf_in_place(&mut comps, tau, beta_map.map(|b| b.values()));
    Ok(VectorField::from_raw(v.grid().clone(), comps))
}
