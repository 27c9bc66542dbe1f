//! Split-Bregman solver for L2–TVL∞ denoising, TV as the `w ≡ 0` case, and
//! the Bregman outer iteration that restores contrast.
//!
//! The splitting enforces `d = ∇u − w` with penalty `μ`. One sweep is
//!
//! ```text
//! u ← (I + μ∇ᵀ∇)⁻¹ (f + μ∇ᵀ(d + w − b))
//! d ← shrink(∇u − w + b, α/μ)
//! w ← prox_{‖βw‖∞/(μ·vol)}(∇u − d + b)
//! b ← b + ∇u − d − w
//! ```
//!
//! where `vol` is the grid cell volume: the L∞ term is not an integral, so
//! its weight relative to the volume-weighted quadratic penalty carries one
//! factor of `1/vol`.
//!
//! Without an explicit `μ` the penalty starts at `α·min h` and is rebalanced
//! every few sweeps so that primal and dual residuals stay within a factor
//! of ten of each other (`b` is rescaled with it). Rebalancing stops after
//! a fixed number of sweeps, leaving a fixed-penalty scheme.

use crate::diff_ops::{divergence_into, gradient_into};
use crate::error::Result;
use crate::field::{dot, magnitudes, Beta, GridSpec, RegParams, ScalarField, SolveReport, VectorField};
use crate::prox::{prox_linf_in_place, shrink_in_place};
use crate::tgv::solve_tgv;

/// Constraint residual must fall below this fraction of `‖∇u‖`.
const SPLIT_RESIDUAL_RTOL: f64 = 1e-4;
/// Lower bound on the `‖∇u‖` used above, as a fraction of `‖∇f‖`.
const GRAD_FLOOR_FRACTION: f64 = 1e-3;
/// Inner conjugate-gradient controls for the 2D `u` update.
const CG_TOL: f64 = 1e-8;
const CG_MAX_ITERS: usize = 30;
/// Penalty rebalancing: check period, residual ratio that triggers a change,
/// change factor, and the sweep after which `μ` is frozen.
const BALANCE_EVERY: usize = 10;
const BALANCE_RATIO: f64 = 10.0;
const BALANCE_FACTOR: f64 = 2.0;
const BALANCE_UNTIL: usize = 5000;

/// Full iterate of the splitting scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub u: ScalarField,
    pub w: VectorField,
    /// Splitting variable standing in for `∇u − w`.
    pub d: VectorField,
    /// Scaled dual (Bregman) variable.
    pub b: VectorField,
}

impl SplitState {
    /// `u = f`, everything else zero.
    pub fn initial(f: &ScalarField) -> Self {
        let grid = f.grid();
        Self {
            u: f.clone(),
            w: VectorField::zeros(grid),
            d: VectorField::zeros(grid),
            b: VectorField::zeros(grid),
        }
    }

    fn check(&self, grid: &GridSpec) -> Result<()> {
        grid.check_same(self.u.grid(), "initial u")?;
        grid.check_same(self.w.grid(), "initial w")?;
        grid.check_same(self.d.grid(), "initial d")?;
        grid.check_same(self.b.grid(), "initial b")
    }
}

/// Minimiser pair and iterate history.
#[derive(Debug, Clone)]
pub struct TvlSolution {
    pub u: ScalarField,
    pub w: VectorField,
    pub report: SolveReport,
}

/// Which regulariser the Bregman outer loop wraps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerModel {
    Tv,
    /// Uses `RegParams::beta`, uniform or spatially varying.
    TvlInf,
    /// Second-order TGV with the given second-order weight.
    Tgv { beta: f64 },
}

/// Solves `(I + μ∇ᵀ∇) u = rhs`.
enum USolver {
    /// Constant-coefficient tridiagonal system, factorised once.
    Tridiagonal { k: f64, c_prime: Vec<f64>, inv_den: Vec<f64> },
    Cg { mu: f64 },
}

impl USolver {
    fn new(grid: &GridSpec, mu: f64) -> Self {
        if grid.dims() == 1 {
            let n = grid.len();
            let h = grid.spacing()[0];
            let k = mu / (h * h);
            let diag = |i: usize| 1.0 + if i == 0 || i == n - 1 { k } else { 2.0 * k };
            let mut c_prime = vec![0.0; n];
            let mut inv_den = vec![0.0; n];
            inv_den[0] = 1.0 / diag(0);
            c_prime[0] = -k * inv_den[0];
            for i in 1..n {
                let den = diag(i) + k * c_prime[i - 1];
                inv_den[i] = 1.0 / den;
                c_prime[i] = -k * inv_den[i];
            }
            USolver::Tridiagonal { k, c_prime, inv_den }
        } else {
            USolver::Cg { mu }
        }
    }

    fn solve(&self, grid: &GridSpec, rhs: &[f64], u: &mut [f64], scratch: &mut CgScratch) {
        match self {
            USolver::Tridiagonal { k, c_prime, inv_den } => {
                let n = rhs.len();
                // forward sweep stores d' in u
                u[0] = rhs[0] * inv_den[0];
                for i in 1..n {
                    u[i] = (rhs[i] + k * u[i - 1]) * inv_den[i];
                }
                for i in (0..n - 1).rev() {
                    u[i] -= c_prime[i] * u[i + 1];
                }
            }
            USolver::Cg { mu } => conjugate_gradient(grid, *mu, rhs, u, scratch),
        }
    }
}

struct CgScratch {
    r: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
    grad: Vec<Vec<f64>>,
}

impl CgScratch {
    fn new(grid: &GridSpec) -> Self {
        Self {
            r: vec![0.0; grid.len()],
            p: vec![0.0; grid.len()],
            ap: vec![0.0; grid.len()],
            grad: vec![vec![0.0; grid.len()]; grid.dims()],
        }
    }
}

/// `out = x − μ div ∇x`.
fn apply_u_operator(grid: &GridSpec, mu: f64, x: &[f64], grad: &mut [Vec<f64>], out: &mut [f64]) {
    gradient_into(grid, x, grad);
    divergence_into(grid, grad, out);
    for (o, xi) in out.iter_mut().zip(x) {
        *o = xi - mu * *o;
    }
}

/// Warm-started CG on the SPD system `(I + μ∇ᵀ∇)u = rhs`.
fn conjugate_gradient(grid: &GridSpec, mu: f64, rhs: &[f64], u: &mut [f64], s: &mut CgScratch) {
    apply_u_operator(grid, mu, u, &mut s.grad, &mut s.ap);
    for i in 0..u.len() {
        s.r[i] = rhs[i] - s.ap[i];
        s.p[i] = s.r[i];
    }
    let rhs_norm = dot(rhs, rhs).sqrt().max(f64::MIN_POSITIVE);
    let mut rr = dot(&s.r, &s.r);
    for _ in 0..CG_MAX_ITERS {
        if rr.sqrt() <= CG_TOL * rhs_norm {
            break;
        }
        apply_u_operator(grid, mu, &s.p, &mut s.grad, &mut s.ap);
        let a = rr / dot(&s.p, &s.ap);
        for i in 0..u.len() {
            u[i] += a * s.p[i];
            s.r[i] -= a * s.ap[i];
        }
        let rr_next = dot(&s.r, &s.r);
        let beta = rr_next / rr;
        for i in 0..u.len() {
            s.p[i] = s.r[i] + beta * s.p[i];
        }
        rr = rr_next;
    }
}

fn weighted_norm(vol: f64, comps: &[Vec<f64>]) -> f64 {
    (vol * comps.iter().map(|c| dot(c, c)).sum::<f64>()).sqrt()
}

/// Runs the splitting scheme from `state`. `with_w = false` pins `w` to 0.
fn split_bregman(
    f: &ScalarField,
    p: &RegParams,
    state: SplitState,
    with_w: bool,
) -> Result<TvlSolution> {
    p.validate()?;
    let grid = f.grid().clone();
    state.check(&grid)?;
    if let Beta::Map(m) = &p.beta {
        grid.check_same(m.grid(), "beta map")?;
    }
    let n = grid.len();
    let dims = grid.dims();
    let vol = grid.cell_volume();
    let mut mu = p.effective_mu(&grid);
    let adaptive = p.mu.is_none();
    let (beta_scale, beta_map) = match &p.beta {
        Beta::Uniform(b) => (*b, None),
        Beta::Map(m) => (1.0, Some(m.values())),
    };

    let mut u = state.u.into_values();
    let mut w = state.w.into_components();
    let mut d = state.d.into_components();
    let mut b = state.b.into_components();
    if !with_w {
        w.iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v = 0.0));
    }

    let fv = f.values();
    let mut solver = USolver::new(&grid, mu);
    let mut z_prev = vec![vec![0.0; n]; dims];
    let mut dual_div = vec![0.0; n];
    let mut scratch = CgScratch::new(&grid);
    let mut tmp = vec![vec![0.0; n]; dims];
    let mut g = vec![vec![0.0; n]; dims];
    let mut div = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut u_prev = u.clone();
    let mut report = SolveReport::default();
    gradient_into(&grid, fv, &mut g);
    // keeps the residual test meaningful when ∇u → 0
    let grad_floor = GRAD_FLOOR_FRACTION * weighted_norm(vol, &g);

    for iter in 0..p.max_iters {
        for k in 0..dims {
            for i in 0..n {
                z_prev[k][i] = d[k][i] + w[k][i];
                tmp[k][i] = z_prev[k][i] - b[k][i];
            }
        }
        divergence_into(&grid, &tmp, &mut div);
        for i in 0..n {
            rhs[i] = fv[i] - mu * div[i];
        }
        u_prev.copy_from_slice(&u);
        solver.solve(&grid, &rhs, &mut u, &mut scratch);
        gradient_into(&grid, &u, &mut g);

        for k in 0..dims {
            for i in 0..n {
                d[k][i] = g[k][i] - w[k][i] + b[k][i];
            }
        }
        shrink_in_place(&mut d, p.alpha / mu);

        if with_w {
            for k in 0..dims {
                for i in 0..n {
                    w[k][i] = g[k][i] - d[k][i] + b[k][i];
                }
            }
            prox_linf_in_place(&mut w, beta_scale / (mu * vol), beta_map);
        }

        for k in 0..dims {
            for i in 0..n {
                tmp[k][i] = g[k][i] - d[k][i] - w[k][i];
                b[k][i] += tmp[k][i];
            }
        }

        let residual = weighted_norm(vol, &tmp);
        if adaptive && iter < BALANCE_UNTIL && (iter + 1) % BALANCE_EVERY == 0 {
            for k in 0..dims {
                for i in 0..n {
                    z_prev[k][i] -= d[k][i] + w[k][i];
                }
            }
            divergence_into(&grid, &z_prev, &mut dual_div);
            let dual = mu * (vol * dot(&dual_div, &dual_div)).sqrt();
            let factor = if residual > BALANCE_RATIO * dual {
                BALANCE_FACTOR
            } else if dual > BALANCE_RATIO * residual {
                1.0 / BALANCE_FACTOR
            } else {
                1.0
            };
            if factor != 1.0 {
                mu *= factor;
                b.iter_mut()
                    .for_each(|c| c.iter_mut().for_each(|v| *v /= factor));
                solver = USolver::new(&grid, mu);
            }
        }
        let grad_norm = weighted_norm(vol, &g);
        let du: f64 = u.iter().zip(&u_prev).map(|(a, c)| (a - c) * (a - c)).sum();
        let rel_change = du.sqrt() / dot(&u, &u).sqrt().max(f64::MIN_POSITIVE);

        for k in 0..dims {
            for i in 0..n {
                tmp[k][i] = g[k][i] - w[k][i];
            }
        }
        let fid: f64 = u.iter().zip(fv).map(|(a, c)| (a - c) * (a - c)).sum();
        let coupling: f64 = magnitudes(&tmp).iter().sum();
        let linf = linf_term(&w, &p.beta);
        report.push(0.5 * vol * fid + p.alpha * vol * coupling + linf, residual);

        if rel_change < p.tol
            && residual <= SPLIT_RESIDUAL_RTOL * grad_norm.max(grad_floor) + 1e-14
        {
            report.converged = true;
            break;
        }
    }

    Ok(TvlSolution {
        u: ScalarField::from_raw(grid.clone(), u),
        w: VectorField::from_raw(grid, w),
        report,
    })
}

fn linf_term(w: &[Vec<f64>], beta: &Beta) -> f64 {
    let m = magnitudes(w);
    match beta {
        Beta::Uniform(b) => b * m.into_iter().fold(0.0, f64::max),
        Beta::Map(map) => m
            .iter()
            .zip(map.values())
            .fold(0.0, |acc, (a, c)| acc.max(a * c)),
    }
}

/// Minimises `½‖f − u‖² + α‖∇u − w‖₁ + ‖βw‖∞` over `(u, w)`.
///
/// Starts from `u = f` with `w = d = b = 0`. Non-convergence within
/// `max_iters` is reported through `report.converged`, not as an error.
pub fn solve_tvlinf(f: &ScalarField, p: &RegParams) -> Result<TvlSolution> {
    split_bregman(f, p, SplitState::initial(f), true)
}

/// [`solve_tvlinf`] from an arbitrary starting iterate.
pub fn solve_tvlinf_from(f: &ScalarField, p: &RegParams, init: SplitState) -> Result<TvlSolution> {
    split_bregman(f, p, init, true)
}

/// ROF denoising `½‖f − u‖² + α TV(u)` by the same scheme with `w ≡ 0`.
/// `alpha` overrides `p.alpha`; the β entry of `p` is ignored.
pub fn solve_tv(f: &ScalarField, alpha: f64, p: &RegParams) -> Result<(ScalarField, SolveReport)> {
    let p = RegParams {
        alpha,
        beta: Beta::Uniform(1.0),
        ..p.clone()
    };
    let sol = split_bregman(f, &p, SplitState::initial(f), false)?;
    Ok((sol.u, sol.report))
}

/// Bregman iteration: solve with data `f + v`, then add the residual
/// `f − u` to `v`. Starts from `v = 0` and returns every outer iterate.
pub fn bregman_iterate(
    f: &ScalarField,
    p: &RegParams,
    outer_iters: usize,
    model: InnerModel,
) -> Result<Vec<(ScalarField, SolveReport)>> {
    if outer_iters == 0 {
        return Err(crate::Error::InvalidParameter("outer_iters must be at least 1".into()));
    }
    let mut v = ScalarField::zeros(f.grid());
    let mut out = Vec::with_capacity(outer_iters);
    for _ in 0..outer_iters {
        let data = f.add(&v)?;
        let (u, report) = match model {
            InnerModel::Tv => solve_tv(&data, p.alpha, p)?,
            InnerModel::TvlInf => {
                let s = solve_tvlinf(&data, p)?;
                (s.u, s.report)
            }
            InnerModel::Tgv { beta } => {
                let s = solve_tgv(&data, p.alpha, beta, p)?;
                (s.u, s.report)
            }
        };
        v = v.add(&f.sub(&u)?)?;
        out.push((u, report));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff_ops::gradient;
    use crate::energy::{energy_tv, energy_tvlinf};

    #[test]
    fn tridiagonal_matches_operator() {
        let g = GridSpec::line(9, 0.3).unwrap();
        let mu = 0.7;
        let rhs: Vec<f64> = (0..9).map(|i| ((i * 5) % 7) as f64 - 3.0).collect();
        let mut u = vec![0.0; 9];
        let mut s = CgScratch::new(&g);
        USolver::new(&g, mu).solve(&g, &rhs, &mut u, &mut s);
        let mut back = vec![0.0; 9];
        apply_u_operator(&g, mu, &u, &mut s.grad, &mut back);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_matches_operator() {
        let g = GridSpec::image(6, 7).unwrap();
        let mu = 0.4;
        let rhs: Vec<f64> = (0..42).map(|i| ((i * 5) % 11) as f64 - 5.0).collect();
        let mut u = vec![0.0; 42];
        let mut s = CgScratch::new(&g);
        conjugate_gradient(&g, mu, &rhs, &mut u, &mut s);
        let mut back = vec![0.0; 42];
        apply_u_operator(&g, mu, &u, &mut s.grad, &mut back);
        for (a, b) in back.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_data_is_fixed_point() {
        for g in [GridSpec::line(20, 0.1).unwrap(), GridSpec::image(8, 8).unwrap()] {
            let f = ScalarField::constant(&g, 0.4);
            let s = solve_tvlinf(&f, &RegParams::new(0.5, 1.0)).unwrap();
            assert!(s.report.converged);
            assert_eq!(s.report.iterations, 1);
            assert!(s.u.values().iter().all(|v| (v - 0.4).abs() < 1e-12));
            assert_eq!(s.w.max_magnitude(), 0.0);
            let (u, r) = solve_tv(&f, 0.5, &RegParams::new(0.5, 1.0)).unwrap();
            assert!(r.converged);
            assert!(u.values().iter().all(|v| (v - 0.4).abs() < 1e-12));
        }
    }

    #[test]
    fn tv_large_alpha_flattens_to_mean() {
        // step of height 1 on (−1, 1): flat once α ≥ h·L/2 = 0.5
        let n = 200;
        let g = GridSpec::line(n, 2.0 / n as f64).unwrap();
        let f = ScalarField::from_fn(&g, |i| if i >= n / 2 { 1.0 } else { 0.0 }).unwrap();
        let (u, r) = solve_tv(&f, 0.6, &RegParams::new(0.6, 1.0).tol(1e-10).max_iters(20000)).unwrap();
        assert!(r.converged);
        assert!(u.values().iter().all(|v| (v - 0.5).abs() < 1e-6));
    }

    #[test]
    fn tv_step_contrast_reduction() {
        // each plateau moves by α/L towards the mean while α < L/4
        let n = 400;
        let g = GridSpec::line(n, 2.0 / n as f64).unwrap();
        let f = ScalarField::from_fn(&g, |i| if i >= n / 2 { 1.0 } else { 0.0 }).unwrap();
        let alpha = 0.1;
        let (u, _) = solve_tv(&f, alpha, &RegParams::new(alpha, 1.0).tol(1e-10).max_iters(20000)).unwrap();
        assert!((u.values()[0] - alpha).abs() < 1e-6);
        assert!((u.values()[n - 1] - (1.0 - alpha)).abs() < 1e-6);
    }

    #[test]
    fn solution_beats_simple_candidates() {
        let n = 120;
        let g = GridSpec::line(n, 2.0 / n as f64).unwrap();
        let f = ScalarField::from_fn(&g, |i| {
            let x = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
            x + if x > 0.0 { 1.0 } else { 0.0 } + 0.05 * ((i * 37 % 11) as f64 - 5.0) / 5.0
        })
        .unwrap();
        let p = RegParams::new(0.3, 0.35).tol(1e-9).max_iters(50000);
        let s = solve_tvlinf(&f, &p).unwrap();
        let e = energy_tvlinf(&s.u, &s.w, &f, &p).unwrap();
        let e_f = energy_tvlinf(&f, &gradient(&f), &f, &p).unwrap();
        let e_tv = energy_tv(&f, &f, 0.3).unwrap();
        let mean = ScalarField::constant(&g, f.mean());
        let e_mean = energy_tv(&mean, &f, 0.3).unwrap();
        assert!(e <= e_f && e <= e_tv && e <= e_mean);
    }

    #[test]
    fn bregman_single_outer_equals_solve() {
        let g = GridSpec::line(64, 1.0 / 64.0).unwrap();
        let f = ScalarField::from_fn(&g, |i| ((i as f64) * 0.2).sin()).unwrap();
        let p = RegParams::new(0.05, 0.2);
        let traj = bregman_iterate(&f, &p, 1, InnerModel::TvlInf).unwrap();
        let s = solve_tvlinf(&f, &p).unwrap();
        assert_eq!(traj.len(), 1);
        assert_eq!(traj[0].0, s.u);
        assert!(bregman_iterate(&f, &p, 0, InnerModel::Tv).is_err());
    }

    #[test]
    fn histories_match_iterations() {
        let g = GridSpec::image(12, 12).unwrap();
        let f = ScalarField::from_fn(&g, |i| ((i * 13) % 7) as f64 / 7.0).unwrap();
        let s = solve_tvlinf(&f, &RegParams::new(0.1, 5.0).max_iters(17).tol(1e-14)).unwrap();
        assert_eq!(s.report.iterations, 17);
        assert_eq!(s.report.energy_history.len(), 17);
        assert_eq!(s.report.residual_history.len(), 17);
        assert!(!s.report.converged);
    }
}
