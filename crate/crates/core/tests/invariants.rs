use tvlinf::energy::{energy_tv, energy_tvlinf};
use tvlinf::generators::{add_gaussian_noise, circle_2d};
use tvlinf::oracle::{build_certificate, exact_solution_tv_regime, sample_data, StepData};
use tvlinf::*;

fn affine_step(n: usize) -> ScalarField {
    sample_data(&StepData::new(1.0, 1.0, 1.0).unwrap(), n).unwrap()
}

fn rel(a: &ScalarField, b: &ScalarField) -> f64 {
    a.sub(b).unwrap().norm_l2() / b.norm_l2().max(1e-300)
}

#[test]
fn solution_does_not_depend_on_initialisation() {
    for f in [affine_step(300), add_gaussian_noise(&circle_2d(24).unwrap(), 0.01, 5).unwrap()] {
        let area = f.grid().domain_measure();
        let p = RegParams::new(0.1, 0.3 * 0.1 * area).tol(1e-9).max_iters(100_000);
        let a = solve_tvlinf(&f, &p).unwrap();
        let mut zero = SplitState::initial(&f);
        zero.u = ScalarField::zeros(f.grid());
        let b = solve_tvlinf_from(&f, &p, zero).unwrap();
        assert!(a.report.converged && b.report.converged);
        assert!(rel(&a.u, &b.u) < 1e-5, "{}", rel(&a.u, &b.u));
    }
}

#[test]
fn huge_beta_reduces_to_tv() {
    for f in [affine_step(400), add_gaussian_noise(&circle_2d(20).unwrap(), 0.01, 2).unwrap()] {
        let alpha = 0.05;
        let beta = 1e3 * alpha * f.grid().domain_measure();
        let p = RegParams::new(alpha, beta).tol(1e-10).max_iters(100_000);
        let a = solve_tvlinf(&f, &p).unwrap();
        let (b, _) = solve_tv(&f, alpha, &p).unwrap();
        assert!(rel(&a.u, &b) < 1e-6);
    }
}

#[test]
fn tv_regime_matches_taut_string() {
    let f = add_gaussian_noise(&affine_step(500), 0.02, 8).unwrap();
    for alpha in [0.01, 0.1, 0.4] {
        let exact = exact_solution_tv_regime(&f, alpha).unwrap();
        let s = solve_tvlinf(&f, &RegParams::new(alpha, 2.5 * alpha * 2.0).tol(1e-10).max_iters(200_000)).unwrap();
        assert!(rel(&s.u, &exact) < 1e-5, "alpha {alpha}: {}", rel(&s.u, &exact));
        let (tv, _) = solve_tv(&f, alpha, &RegParams::new(alpha, 1.0).tol(1e-10).max_iters(200_000)).unwrap();
        assert!(energy_tv(&exact, &f, alpha).unwrap() <= energy_tv(&tv, &f, alpha).unwrap() + 1e-9);
    }
}

#[test]
fn energy_settles_monotonically() {
    let f = add_gaussian_noise(&circle_2d(32).unwrap(), 0.01, 1).unwrap();
    let p = RegParams::new(0.2, 0.3 * 0.2 * 1024.0).tol(1e-8).max_iters(20_000);
    let s = solve_tvlinf(&f, &p).unwrap();
    let e = &s.report.energy_history;
    let burn = e.len() / 2;
    for w in e[burn..].windows(2) {
        assert!(w[1] <= w[0] + 1e-8, "{} -> {}", w[0], w[1]);
    }
    let final_e = energy_tvlinf(&s.u, &s.w, &f, &p).unwrap();
    assert!((final_e - e[e.len() - 1]).abs() < 1e-9 * final_e.abs().max(1.0));
}

#[test]
fn energy_beats_simple_candidates() {
    let f = add_gaussian_noise(&affine_step(200), 0.01, 4).unwrap();
    let p = RegParams::new(0.2, 0.3).tol(1e-10).max_iters(100_000);
    let s = solve_tvlinf(&f, &p).unwrap();
    let best = energy_tvlinf(&s.u, &s.w, &f, &p).unwrap();
    let zero = VectorField::zeros(f.grid());
    let mean = ScalarField::constant(f.grid(), f.mean());
    assert!(best <= energy_tvlinf(&f, &zero, &f, &p).unwrap());
    assert!(best <= energy_tvlinf(&mean, &zero, &f, &p).unwrap());
    assert!(best <= energy_tvlinf(&s.u, &zero, &f, &p).unwrap() + 1e-9);
    // the solver's pair also certifies itself
    assert!(build_certificate(&s.u, &s.w, &f, 0.2, 0.3).unwrap().passes(1e-4));
}

#[test]
fn output_is_finite_and_bounded_by_data_range() {
    let f = add_gaussian_noise(&circle_2d(24).unwrap(), 0.05, 11).unwrap();
    let (lo, hi) = f.values().iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    let s = solve_tvlinf(&f, &RegParams::new(0.3, 100.0).tol(1e-8).max_iters(50_000)).unwrap();
    for &v in s.u.values() {
        assert!(v.is_finite() && v >= lo - 1e-6 && v <= hi + 1e-6);
    }
    assert!((s.u.mean() - f.mean()).abs() < 1e-6);
}

#[test]
fn repeated_solves_are_bit_identical() {
    let f = add_gaussian_noise(&circle_2d(16).unwrap(), 0.01, 3).unwrap();
    let p = RegParams::new(0.1, 50.0).tol(1e-6);
    let a = solve_tvlinf(&f, &p).unwrap();
    let b = solve_tvlinf(&f, &p).unwrap();
    assert_eq!(a.u, b.u);
    assert_eq!(a.w, b.w);
    let ta = solve_tgv(&f, 0.1, 0.2, &p).unwrap();
    let tb = solve_tgv(&f, 0.1, 0.2, &p).unwrap();
    assert_eq!(ta.u, tb.u);
}

#[test]
fn bregman_residuals_do_not_increase() {
    let f = add_gaussian_noise(&affine_step(300), 0.01, 6).unwrap();
    let p = RegParams::new(0.3, 0.35).tol(1e-10).max_iters(100_000);
    for model in [InnerModel::TvlInf, InnerModel::Tv] {
        let runs = bregman_iterate(&f, &p, 4, model).unwrap();
        let res: Vec<f64> = runs.iter().map(|(u, _)| f.sub(u).unwrap().norm_l2()).collect();
        for w in res.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{res:?}");
        }
    }
}
