//! Second-order TGV denoising by a diagonally preconditioned primal-dual
//! (Chambolle–Pock) iteration.
//!
//! Minimises `½‖f − u‖² + α‖∇u − w‖₁ + β‖Ew‖₁` with the volume weights
//! divided out. `w` lives on the staggered grid of the forward gradient:
//! component `k` is pinned to zero on the last slice along axis `k`, and the
//! symmetrised gradient `E` only differences the remaining samples. In 1D
//! this makes `‖Ew‖₁` exactly the total variation of `w` over the `n − 1`
//! edges.

use std::f64::consts::SQRT_2;

use crate::diff_ops::{
    divergence_into, gradient_into, sym_components, sym_gradient_adjoint_into, sym_gradient_into,
};
use crate::energy::energy_tgv;
use crate::error::{Error, Result};
use crate::field::{magnitudes, GridSpec, RegParams, ScalarField, SolveReport, VectorField};

/// Minimiser pair and iterate history.
#[derive(Debug, Clone)]
pub struct TgvSolution {
    pub u: ScalarField,
    pub w: VectorField,
    pub report: SolveReport,
}

/// Projects each point of `q` onto the Euclidean ball of radius `r`.
fn project_pointwise(q: &mut [Vec<f64>], r: f64) {
    let m = magnitudes(q);
    for c in q.iter_mut() {
        for (v, &mi) in c.iter_mut().zip(&m) {
            if mi > r {
                *v *= r / mi;
            }
        }
    }
}

/// `E` with the off-diagonal entry scaled by √2 so the Frobenius norm is
/// the plain Euclidean norm of the stored components.
fn apply_e(grid: &GridSpec, w: &[Vec<f64>], out: &mut [Vec<f64>]) {
    sym_gradient_into(grid, w, out);
    if out.len() == 3 {
        out[2].iter_mut().for_each(|v| *v *= SQRT_2);
    }
}

/// Euclidean adjoint of [`apply_e`]; `scaled` is scratch of the shape of `q`.
fn apply_e_adjoint(grid: &GridSpec, q: &[Vec<f64>], scaled: &mut [Vec<f64>], out: &mut [Vec<f64>]) {
    for (s, c) in scaled.iter_mut().zip(q) {
        s.copy_from_slice(c);
    }
    if q.len() == 3 {
        scaled[2].iter_mut().for_each(|v| *v /= SQRT_2);
    }
    sym_gradient_adjoint_into(grid, scaled, out);
}

/// Zeroes `w_k` on the last slice along axis `k`.
fn mask_padding(grid: &GridSpec, w: &mut [Vec<f64>]) {
    for (k, c) in w.iter_mut().enumerate() {
        let n = grid.sizes()[k];
        for (i, v) in c.iter_mut().enumerate() {
            if grid.coord(i, k) == n - 1 {
                *v = 0.0;
            }
        }
    }
}

/// Diagonal step sizes `τ_j = 1/Σ_i|K_ij|`, `σ_i = 1/Σ_j|K_ij|` for the
/// stacked operator `K(u, w) = (∇u − w, Ew)`, taken from interior rows and
/// columns (boundary sums are smaller, so these are safe everywhere).
struct Steps {
    tau_u: f64,
    tau_w: Vec<f64>,
    sigma_p: Vec<f64>,
    sigma_q: Vec<f64>,
}

impl Steps {
    fn new(grid: &GridSpec) -> Self {
        let inv_h: Vec<f64> = grid.spacing().iter().map(|h| 1.0 / h).collect();
        let dims = grid.dims();
        let tau_u = 1.0 / inv_h.iter().map(|x| 2.0 * x).sum::<f64>();
        let tau_w = (0..dims)
            .map(|k| {
                let off: f64 = (0..dims)
                    .filter(|&l| l != k)
                    .map(|l| 2.0 * inv_h[l] / SQRT_2)
                    .sum();
                1.0 / (1.0 + 2.0 * inv_h[k] + off)
            })
            .collect();
        let sigma_p = (0..dims).map(|k| 1.0 / (2.0 * inv_h[k] + 1.0)).collect();
        let mut sigma_q: Vec<f64> = (0..dims).map(|k| 1.0 / (2.0 * inv_h[k])).collect();
        if dims == 2 {
            sigma_q.push(1.0 / ((2.0 * inv_h[0] + 2.0 * inv_h[1]) / SQRT_2));
        }
        Self {
            tau_u,
            tau_w,
            sigma_p,
            sigma_q,
        }
    }
}

/// Minimises `½‖f − u‖² + α‖∇u − w‖₁ + β‖Ew‖₁` over `(u, w)`.
///
/// Uses `p.max_iters` and `p.tol` (relative change of `u`); the weights in
/// `p` are ignored in favour of `alpha` and `beta`.
pub fn solve_tgv(f: &ScalarField, alpha: f64, beta: f64, p: &RegParams) -> Result<TgvSolution> {
    for (name, v) in [("alpha", alpha), ("beta", beta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
        }
    }
    if p.max_iters == 0 || !(p.tol > 0.0) {
        return Err(Error::InvalidParameter("max_iters and tol must be positive".into()));
    }
    let grid = f.grid().clone();
    let n = grid.len();
    let dims = grid.dims();
    let nq = sym_components(dims);
    let steps = Steps::new(&grid);
    let fv = f.values();

    let mut u = fv.to_vec();
    let mut w = vec![vec![0.0; n]; dims];
    let mut u_bar = u.clone();
    let mut w_bar = w.clone();
    let mut pd = vec![vec![0.0; n]; dims];
    let mut qd = vec![vec![0.0; n]; nq];

    let mut g = vec![vec![0.0; n]; dims];
    let mut ew = vec![vec![0.0; n]; nq];
    let mut div = vec![0.0; n];
    let mut etq = vec![vec![0.0; n]; dims];
    let mut scratch = vec![vec![0.0; n]; nq];
    let mut u_old = u.clone();
    let mut w_old = w.clone();
    let mut report = SolveReport::default();

    for _ in 0..p.max_iters {
        // dual ascent
        gradient_into(&grid, &u_bar, &mut g);
        apply_e(&grid, &w_bar, &mut ew);
        for k in 0..dims {
            let s = steps.sigma_p[k];
            for i in 0..n {
                pd[k][i] += s * (g[k][i] - w_bar[k][i]);
            }
        }
        for (k, s) in steps.sigma_q.iter().enumerate() {
            for i in 0..n {
                qd[k][i] += s * ew[k][i];
            }
        }
        project_pointwise(&mut pd, alpha);
        project_pointwise(&mut qd, beta);

        // primal descent
        u_old.copy_from_slice(&u);
        for (wo, wc) in w_old.iter_mut().zip(&w) {
            wo.copy_from_slice(wc);
        }
        divergence_into(&grid, &pd, &mut div);
        let t = steps.tau_u;
        for i in 0..n {
            u[i] = (u[i] + t * div[i] + t * fv[i]) / (1.0 + t);
        }
        apply_e_adjoint(&grid, &qd, &mut scratch, &mut etq);
        for k in 0..dims {
            let t = steps.tau_w[k];
            for i in 0..n {
                w[k][i] += t * (pd[k][i] - etq[k][i]);
            }
        }
        mask_padding(&grid, &mut w);

        for i in 0..n {
            u_bar[i] = 2.0 * u[i] - u_old[i];
        }
        for k in 0..dims {
            for i in 0..n {
                w_bar[k][i] = 2.0 * w[k][i] - w_old[k][i];
            }
        }

        let du: f64 = u.iter().zip(&u_old).map(|(a, b)| (a - b) * (a - b)).sum();
        let unorm: f64 = u.iter().map(|a| a * a).sum();
        let rel_change = (du / unorm.max(f64::MIN_POSITIVE)).sqrt();
        let uf = ScalarField::from_raw(grid.clone(), u.clone());
        let wf = VectorField::from_raw(grid.clone(), w.clone());
        report.push(energy_tgv(&uf, &wf, f, alpha, beta)?, rel_change);
        if rel_change < p.tol {
            report.converged = true;
            break;
        }
    }

    Ok(TgvSolution {
        u: ScalarField::from_raw(grid.clone(), u),
        w: VectorField::from_raw(grid, w),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> RegParams {
        RegParams::new(1.0, 1.0).tol(1e-10).max_iters(100_000)
    }

    #[test]
    fn constant_data_is_a_fixed_point() {
        let g = GridSpec::image(9, 7).unwrap();
        let f = ScalarField::constant(&g, 0.4);
        let s = solve_tgv(&f, 0.3, 0.5, &params()).unwrap();
        assert!(s.u.sub(&f).unwrap().max_abs() < 1e-9);
        assert!(s.w.max_magnitude() < 1e-9);
    }

    #[test]
    fn affine_data_is_in_the_kernel() {
        // the staggered w carries the slope on every edge, so ∇u − w and Ew vanish
        let g = GridSpec::line(60, 0.1).unwrap();
        let f = ScalarField::from_fn(&g, |i| 0.5 * i as f64 * 0.1 - 1.0).unwrap();
        let s = solve_tgv(&f, 0.5, 0.5, &params()).unwrap();
        assert!(s.report.converged);
        assert!(s.u.sub(&f).unwrap().max_abs() < 1e-6);
    }

    #[test]
    fn energy_below_candidates() {
        let g = GridSpec::line(80, 1.0 / 80.0).unwrap();
        let f = ScalarField::from_fn(&g, |i| {
            let x = i as f64 / 80.0;
            if x < 0.5 { x } else { 1.5 - 2.0 * x }.max(0.0) + 0.05 * ((i * 7919) % 13) as f64 / 13.0
        })
        .unwrap();
        let (alpha, beta) = (0.02, 0.01);
        let s = solve_tgv(&f, alpha, beta, &params()).unwrap();
        let best = energy_tgv(&s.u, &s.w, &f, alpha, beta).unwrap();
        let zero = VectorField::zeros(&g);
        let mean = ScalarField::constant(&g, f.mean());
        for (u, w) in [(&f, &zero), (&mean, &zero), (&s.u, &zero)] {
            assert!(best <= energy_tgv(u, w, &f, alpha, beta).unwrap() + 1e-12);
        }
        for k in 0..g.len() {
            let mut v = s.u.values().to_vec();
            v[k] += 1e-3;
            let u = ScalarField::new(g.clone(), v).unwrap();
            assert!(best <= energy_tgv(&u, &s.w, &f, alpha, beta).unwrap() + 1e-9);
        }
    }

    #[test]
    fn image_energy_decreases() {
        let g = GridSpec::image(12, 10).unwrap();
        let f = ScalarField::from_fn(&g, |k| ((k * 31) % 17) as f64 / 17.0).unwrap();
        let s = solve_tgv(&f, 0.1, 0.2, &RegParams::new(0.1, 0.2).tol(1e-6)).unwrap();
        let start = energy_tgv(&f, &VectorField::zeros(&g), &f, 0.1, 0.2).unwrap();
        assert!(s.report.final_energy().unwrap() < start);
        // w stays pinned on the last slice along its own axis
        for j in 0..10 {
            assert_eq!(s.w.component(0)[11 * 10 + j], 0.0);
        }
        for i in 0..12 {
            assert_eq!(s.w.component(1)[i * 10 + 9], 0.0);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = ScalarField::zeros(&GridSpec::line(5, 1.0).unwrap());
        assert!(solve_tgv(&f, 0.0, 1.0, &params()).is_err());
        assert!(solve_tgv(&f, 1.0, f64::NAN, &params()).is_err());
        assert!(solve_tgv(&f, 1.0, 1.0, &params().max_iters(0)).is_err());
    }
}
