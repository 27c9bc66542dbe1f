//! Discrete energies. Every integral is a cell-volume weighted sum; vector
//! magnitudes are Euclidean.

use crate::diff_ops::{gradient_into, sym_components, sym_gradient_into, sym_magnitudes};
use crate::error::Result;
use crate::field::{magnitudes, Beta, GridSpec, RegParams, ScalarField, VectorField};

fn fidelity(u: &ScalarField, f: &ScalarField) -> f64 {
    let s: f64 = u
        .values()
        .iter()
        .zip(f.values())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    0.5 * u.grid().cell_volume() * s
}

/// `Σ vol·|∇u − w|` over all grid points.
fn radon_norm_of_residual(grid: &GridSpec, u: &[f64], w: Option<&[Vec<f64>]>) -> f64 {
    let mut g = vec![vec![0.0; grid.len()]; grid.dims()];
    gradient_into(grid, u, &mut g);
    if let Some(w) = w {
        for (gc, wc) in g.iter_mut().zip(w) {
            gc.iter_mut().zip(wc).for_each(|(a, b)| *a -= b);
        }
    }
    grid.cell_volume() * magnitudes(&g).iter().sum::<f64>()
}

/// `max_x β(x)|w(x)|`, or `β·max|w|` for uniform β.
pub fn weighted_linf(w: &VectorField, beta: &Beta) -> f64 {
    let m = w.magnitudes();
    match beta {
        Beta::Uniform(b) => b * m.into_iter().fold(0.0, f64::max),
        Beta::Map(map) => m
            .iter()
            .zip(map.values())
            .fold(0.0, |acc, (a, b)| acc.max(a * b)),
    }
}

/// `½‖f − u‖² + α‖∇u − w‖₁ + ‖βw‖∞`.
pub fn energy_tvlinf(
    u: &ScalarField,
    w: &VectorField,
    f: &ScalarField,
    p: &RegParams,
) -> Result<f64> {
    let grid = u.grid();
    grid.check_same(f.grid(), "energy_tvlinf(u, f)")?;
    grid.check_same(w.grid(), "energy_tvlinf(u, w)")?;
    if let Beta::Map(m) = &p.beta {
        grid.check_same(m.grid(), "energy_tvlinf(u, beta)")?;
    }
    Ok(fidelity(u, f)
        + p.alpha * radon_norm_of_residual(grid, u.values(), Some(w.components()))
        + weighted_linf(w, &p.beta))
}

/// `½‖f − u‖² + α TV(u)`.
pub fn energy_tv(u: &ScalarField, f: &ScalarField, alpha: f64) -> Result<f64> {
    u.grid().check_same(f.grid(), "energy_tv")?;
    Ok(fidelity(u, f) + alpha * radon_norm_of_residual(u.grid(), u.values(), None))
}

/// Discrete total variation `Σ vol·|∇u|`.
pub fn total_variation(u: &ScalarField) -> f64 {
    radon_norm_of_residual(u.grid(), u.values(), None)
}

/// `Σ vol·|Ew|` with the staggered symmetrised gradient.
pub fn sym_radon_norm(w: &VectorField) -> f64 {
    let grid = w.grid();
    let mut ew = vec![vec![0.0; grid.len()]; sym_components(grid.dims())];
    sym_gradient_into(grid, w.components(), &mut ew);
    grid.cell_volume() * sym_magnitudes(&ew).iter().sum::<f64>()
}

/// `½‖f − u‖² + α‖∇u − w‖₁ + β‖Ew‖₁`; in 1D `Ew` is the derivative of `w`.
pub fn energy_tgv(
    u: &ScalarField,
    w: &VectorField,
    f: &ScalarField,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let grid = u.grid();
    grid.check_same(f.grid(), "energy_tgv(u, f)")?;
    grid.check_same(w.grid(), "energy_tgv(u, w)")?;
    Ok(fidelity(u, f)
        + alpha * radon_norm_of_residual(grid, u.values(), Some(w.components()))
        + beta * sym_radon_norm(w))
}
