//! Forward-difference gradient with Neumann boundary, its negative adjoint,
//! the symmetrised gradient used by TGV, and Gaussian smoothing.

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField, VectorField};

/// Visits every flat index together with its coordinate along `axis`.
#[inline]
fn for_each_along(grid: &GridSpec, axis: usize, mut f: impl FnMut(usize, usize, usize)) {
    let n = grid.sizes()[axis];
    let stride = grid.stride(axis);
    let outer = grid.len() / (n * stride);
    for o in 0..outer {
        let base = o * n * stride;
        for c in 0..n {
            let row = base + c * stride;
            for inner in 0..stride {
                f(row + inner, c, stride);
            }
        }
    }
}

/// `out = D x` where `D` is the forward difference along `axis` restricted to
/// the first `active` samples; entries with `c + 1 >= active` are zero.
pub(crate) fn fwd_diff(grid: &GridSpec, x: &[f64], axis: usize, active: usize, out: &mut [f64]) {
    let inv_h = 1.0 / grid.spacing()[axis];
    for_each_along(grid, axis, |i, c, s| {
        out[i] = if c + 1 < active {
            (x[i + s] - x[i]) * inv_h
        } else {
            0.0
        };
    });
}

/// `out += scale * Dᵀ y` for the operator of [`fwd_diff`].
pub(crate) fn fwd_diff_adjoint_acc(
    grid: &GridSpec,
    y: &[f64],
    axis: usize,
    active: usize,
    scale: f64,
    out: &mut [f64],
) {
    let k = scale / grid.spacing()[axis];
    let last = active.saturating_sub(1);
    for_each_along(grid, axis, |i, c, s| {
        let mut v = 0.0;
        if c >= 1 && c - 1 < last {
            v += y[i - s];
        }
        if c < last {
            v -= y[i];
        }
        out[i] += k * v;
    });
}

pub(crate) fn gradient_into(grid: &GridSpec, u: &[f64], out: &mut [Vec<f64>]) {
    for (axis, comp) in out.iter_mut().enumerate() {
        fwd_diff(grid, u, axis, grid.sizes()[axis], comp);
    }
}

pub(crate) fn divergence_into(grid: &GridSpec, p: &[Vec<f64>], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    for (axis, comp) in p.iter().enumerate() {
        fwd_diff_adjoint_acc(grid, comp, axis, grid.sizes()[axis], -1.0, out);
    }
}

/// Forward differences divided by the spacing; the last slice along each
/// axis is zero.
pub fn gradient(u: &ScalarField) -> VectorField {
    let grid = u.grid();
    let mut comps = vec![vec![0.0; grid.len()]; grid.dims()];
    gradient_into(grid, u.values(), &mut comps);
    VectorField::from_raw(grid.clone(), comps)
}

/// Negative adjoint of [`gradient`]: `⟨∇u, p⟩ = −⟨u, div p⟩`.
pub fn divergence(p: &VectorField) -> ScalarField {
    let grid = p.grid();
    let mut out = vec![0.0; grid.len()];
    divergence_into(grid, p.components(), &mut out);
    ScalarField::from_raw(grid.clone(), out)
}

/// Number of stored components of the symmetrised gradient.
pub(crate) fn sym_components(dims: usize) -> usize {
    dims * (dims + 1) / 2
}

/// Symmetrised gradient of a field living on the gradient's staggered grid.
///
/// Component `k` of `w` is meaningful only for coordinates `< n_k - 1` along
/// axis `k`, so the diagonal entry `∂_k w_k` uses differences between those
/// samples only. Output order: diagonal entries, then `½(∂_l w_k + ∂_k w_l)`
/// for `k < l`.
pub(crate) fn sym_gradient_into(grid: &GridSpec, w: &[Vec<f64>], out: &mut [Vec<f64>]) {
    let dims = grid.dims();
    let n = grid.sizes();
    for k in 0..dims {
        fwd_diff(grid, &w[k], k, n[k] - 1, &mut out[k]);
    }
    if dims == 2 {
        let mut tmp = vec![0.0; grid.len()];
        fwd_diff(grid, &w[0], 1, n[1], &mut out[2]);
        fwd_diff(grid, &w[1], 0, n[0], &mut tmp);
        for (o, t) in out[2].iter_mut().zip(&tmp) {
            *o = 0.5 * (*o + t);
        }
    }
}

/// Adjoint of [`sym_gradient_into`] under the pairing that counts each
/// off-diagonal entry twice (Frobenius pairing of symmetric matrices).
pub(crate) fn sym_gradient_adjoint_into(grid: &GridSpec, q: &[Vec<f64>], out: &mut [Vec<f64>]) {
    let dims = grid.dims();
    let n = grid.sizes();
    for o in out.iter_mut() {
        o.iter_mut().for_each(|v| *v = 0.0);
    }
    for k in 0..dims {
        fwd_diff_adjoint_acc(grid, &q[k], k, n[k] - 1, 1.0, &mut out[k]);
    }
    if dims == 2 {
        fwd_diff_adjoint_acc(grid, &q[2], 1, n[1], 1.0, &mut out[0]);
        fwd_diff_adjoint_acc(grid, &q[2], 0, n[0], 1.0, &mut out[1]);
    }
}

/// Pointwise Frobenius norm of a symmetric-matrix field stored as in
/// [`sym_gradient_into`].
pub(crate) fn sym_magnitudes(q: &[Vec<f64>]) -> Vec<f64> {
    match q {
        [a] => a.iter().map(|v| v.abs()).collect(),
        [a, b, c] => a
            .iter()
            .zip(b)
            .zip(c)
            .map(|((x, y), z)| (x * x + y * y + 2.0 * z * z).sqrt())
            .collect(),
        _ => unreachable!("symmetric fields have 1 or 3 components"),
    }
}

/// Sampled Gaussian of odd length `window`, normalised to sum 1.
pub fn gaussian_kernel(sigma: f64, window: usize) -> Vec<f64> {
    let r = (window / 2) as isize;
    let mut k: Vec<f64> = (-r..=r)
        .map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian smoothing with a normalised sampled kernel.
///
/// `sigma` and `window` are in grid points. Samples outside the grid are
/// mirrored about the boundary cell face (`x[-1] = x[0]`, `x[-2] = x[1]`),
/// which keeps the filter symmetric and therefore mean preserving. A window
/// wider than an axis is clamped to the largest odd size that fits.
pub fn gaussian_filter(f: &ScalarField, sigma: f64, window: usize) -> Result<ScalarField> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    if window < 3 || window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "window = {window} must be odd and at least 3"
        )));
    }
    let grid = f.grid();
    let mut cur = f.values().to_vec();
    let mut next = vec![0.0; cur.len()];
    for axis in 0..grid.dims() {
        let n = grid.sizes()[axis];
        let mut win = window;
        if win > n {
            win = if n % 2 == 1 { n } else { n - 1 };
            log::warn!("gaussian window {window} exceeds axis {axis} of size {n}; clamped to {win}");
        }
        if win < 3 {
            continue;
        }
        let kernel = gaussian_kernel(sigma, win);
        let r = (win / 2) as isize;
        let ni = n as isize;
        for_each_along(grid, axis, |i, c, s| {
            let base = i - c * s;
            let mut acc = 0.0;
            for (t, kv) in kernel.iter().enumerate() {
                let mut j = c as isize + t as isize - r;
                if j < 0 {
                    j = -1 - j;
                } else if j >= ni {
                    j = 2 * ni - 1 - j;
                }
                acc += kv * cur[base + j as usize * s];
            }
            next[i] = acc;
        });
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(ScalarField::from_raw(grid.clone(), cur))
}
