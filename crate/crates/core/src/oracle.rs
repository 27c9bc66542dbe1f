//! Exact solutions and dual certificates for the 1D problem
//!
//! ```text
//! min_{u,w} ½‖f − u‖² + α‖Du − w‖ + β‖w‖∞   on (−L, L)
//! ```
//!
//! for the data `f(x) = h·1_{(0,L)}(x) + λx`.
//!
//! A pair `(u, w)` is optimal iff a dual function `φ` vanishing at both ends
//! satisfies `φ′ = u − f`, `φ ∈ α Sgn(Du − w)`, `‖φ‖₁ ≤ β` and, when
//! `w ≠ 0`, `⟨φ, w⟩ = β‖w‖∞`. [`build_certificate`] checks the discrete
//! version of these conditions on grid fields.

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField, VectorField};

/// Step (plus optional slope) data on `(−L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepData {
    /// `L`
    pub half_length: f64,
    /// `h`, the jump at the origin.
    pub jump: f64,
    /// `λ ≥ 0`; zero gives the pure step.
    pub slope: f64,
}

impl StepData {
    pub fn new(half_length: f64, jump: f64, slope: f64) -> Result<Self> {
        if !(half_length > 0.0 && jump > 0.0 && slope >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need L > 0, h > 0, λ ≥ 0; got L = {half_length}, h = {jump}, λ = {slope}"
            )));
        }
        Ok(Self {
            half_length,
            jump,
            slope,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + if x > 0.0 { self.jump } else { 0.0 }
    }

    pub fn domain_measure(&self) -> f64 {
        2.0 * self.half_length
    }
}

/// Solution type for given data and weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Affine on each half with a reduced jump at the origin.
    YellowAffineJump,
    /// `β/α ≥ |Ω|`: the regulariser reduces to `α TV`.
    TvRegime,
    /// Any other solution type; no closed form here.
    OtherRegion,
}

fn yellow_inequalities(data: &StepData, alpha: f64, beta: f64) -> bool {
    let (l, h, lam) = (data.half_length, data.jump, data.slope);
    lam > 0.0
        && beta < alpha * l + lam * l.powi(3) / 6.0
        && beta > 4.0 * alpha * l / 3.0 - h * l * l / 6.0
        && beta > 2.0 * alpha * l / 3.0
        && beta < 4.0 * alpha * l / 3.0
}

pub fn classify_region(data: &StepData, alpha: f64, beta: f64) -> Region {
    if yellow_inequalities(data, alpha, beta) {
        Region::YellowAffineJump
    } else if beta >= alpha * data.domain_measure() {
        Region::TvRegime
    } else {
        Region::OtherRegion
    }
}

/// Closed form of the affine-jump solution.
///
/// `u(x) = c₁x + h − c₂` on `(0, L)`, `u(x) = c₁x + c₂` on `(−L, 0)`,
/// `w ≡ c₁`, with dual `φ(x) = (c₁ − λ)x²/2 − c₂|x| + c₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YellowSolution {
    pub data: StepData,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl YellowSolution {
    pub fn u(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.c1 * x + self.data.jump - self.c2
        } else {
            self.c1 * x + self.c2
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        (self.c1 - self.data.slope) * x * x / 2.0 - self.c2 * x.abs() + self.c3
    }

    /// `‖w‖∞`, equal to the slope of `u`.
    pub fn w_mag(&self) -> f64 {
        self.c1
    }

    /// `u(0⁺) − u(0⁻)`.
    pub fn jump_size(&self) -> f64 {
        self.data.jump - 2.0 * self.c2
    }

    /// Samples `u` at the points of [`sample_points`] and sets `w = c₁` on
    /// every edge except the padding slot.
    pub fn sample(&self, n: usize) -> Result<(ScalarField, VectorField)> {
        let (grid, xs) = sample_points(self.data.half_length, n)?;
        let u = ScalarField::new(grid.clone(), xs.iter().map(|&x| self.u(x)).collect())?;
        let mut w = vec![self.c1; n];
        w[n - 1] = 0.0;
        let w = VectorField::new(grid, vec![w])?;
        Ok((u, w))
    }
}

pub fn exact_solution_yellow(data: &StepData, alpha: f64, beta: f64) -> Result<YellowSolution> {
    if classify_region(data, alpha, beta) != Region::YellowAffineJump {
        return Err(Error::WrongRegion(format!(
            "(α, β) = ({alpha}, {beta}) with L = {}, h = {}, λ = {}",
            data.half_length, data.jump, data.slope
        )));
    }
    let l = data.half_length;
    Ok(YellowSolution {
        data: *data,
        c1: 6.0 * (alpha * l - beta) / l.powi(3) + data.slope,
        c2: (4.0 * alpha * l - 3.0 * beta) / (l * l),
        c3: alpha,
    })
}

/// Cell-centred grid on `(−L, L)`: `x_i = −L + (i + ½)·2L/n`.
pub fn sample_points(half_length: f64, n: usize) -> Result<(GridSpec, Vec<f64>)> {
    let h = 2.0 * half_length / n as f64;
    let grid = GridSpec::line(n, h)?;
    let xs = (0..n).map(|i| -half_length + (i as f64 + 0.5) * h).collect();
    Ok((grid, xs))
}

/// Samples the data on `n ≥ 16` cell centres; for even `n` the jump falls
/// between the two central samples.
pub fn sample_data(data: &StepData, n: usize) -> Result<ScalarField> {
    if n < 16 {
        return Err(Error::InvalidParameter(format!("n = {n} < 16")));
    }
    let (grid, xs) = sample_points(data.half_length, n)?;
    ScalarField::new(grid, xs.iter().map(|&x| data.eval(x)).collect())
}

/// Exact minimiser of `½Σ(x_i − y_i)² + λΣ|x_{i+1} − x_i|` (Condat's direct
/// taut-string algorithm).
pub fn rof_1d_exact(y: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    let (mut k, mut k0, mut kplus, mut kminus) = (0usize, 0usize, 0usize, 0usize);
    let (mut umin, mut umax) = (lambda, -lambda);
    let (mut vmin, mut vmax) = (y[0] - lambda, y[0] + lambda);
    let two_lambda = 2.0 * lambda;
    loop {
        while k == n - 1 {
            if umin < 0.0 {
                while k0 <= kminus {
                    x[k0] = vmin;
                    k0 += 1;
                }
                kminus = k0;
                k = k0;
                vmin = y[k];
                umin = lambda;
                umax = vmin + umin - vmax;
            } else if umax > 0.0 {
                while k0 <= kplus {
                    x[k0] = vmax;
                    k0 += 1;
                }
                kplus = k0;
                k = k0;
                vmax = y[k];
                umax = -lambda;
                umin = vmax + umax - vmin;
            } else {
                vmin += umin / (k - k0 + 1) as f64;
                while k0 <= k {
                    x[k0] = vmin;
                    k0 += 1;
                }
                return x;
            }
        }
        umin += y[k + 1] - vmin;
        if umin < -lambda {
            while k0 <= kminus {
                x[k0] = vmin;
                k0 += 1;
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmin = y[k];
            vmax = vmin + two_lambda;
            umin = lambda;
            umax = -lambda;
            continue;
        }
        umax += y[k + 1] - vmax;
        if umax > lambda {
            while k0 <= kplus {
                x[k0] = vmax;
                k0 += 1;
            }
            k = k0;
            kminus = k0;
            kplus = k0;
            vmax = y[k];
            vmin = vmax - two_lambda;
            umin = lambda;
            umax = -lambda;
        } else {
            k += 1;
            if umin >= lambda {
                kminus = k;
                vmin += (umin - lambda) / (kminus - k0 + 1) as f64;
                umin = lambda;
            }
            if umax <= -lambda {
                kplus = k;
                vmax += (umax + lambda) / (kplus - k0 + 1) as f64;
                umax = -lambda;
            }
        }
    }
}

/// Exact discrete solution in the TV regime: the ROF minimiser of the
/// sampled data with weight `alpha`.
pub fn exact_solution_tv_regime(f: &ScalarField, alpha: f64) -> Result<ScalarField> {
    let grid = f.grid();
    if grid.dims() != 1 {
        return Err(Error::UnsupportedDimension {
            expected: 1,
            got: grid.dims(),
        });
    }
    // the cell width cancels in the TV term, leaving weight α/h
    let lambda = alpha / grid.spacing()[0];
    ScalarField::new(grid.clone(), rof_1d_exact(f.values(), lambda))
}

/// Edges whose `|∇u − w|` exceeds both 10× the median and this fraction of
/// the maximum count as the jump set.
const JUMP_REL_MAX: f64 = 1e-3;

/// Dual function and optimality-condition residuals of a 1D pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate1D {
    /// `φ` on edge `i` (between samples `i` and `i + 1`); the last entry is
    /// the value at the right boundary.
    pub phi: ScalarField,
    /// `|φ(L)|`
    pub r_boundary: f64,
    /// `max|φ| − α`, clipped at 0.
    pub r_linf: f64,
    /// `‖φ‖₁ − β`, clipped at 0.
    pub r_l1: f64,
    /// `|⟨φ, w⟩ − β‖w‖∞|` when `w ≠ 0`, else 0.
    pub r_pairing: f64,
    /// `max |φ − α sgn(∇u − w)|` over the jump set.
    pub r_sign: f64,
    /// `α‖∇u − w‖₁ − ⟨φ, ∇u − w⟩`, which vanishes iff `φ = α sgn(∇u − w)`
    /// wherever `∇u ≠ w` (given `|φ| ≤ α`); catches diffuse slopes the jump
    /// set misses.
    pub r_coupling: f64,
    /// Number of edges treated as jumps.
    pub jump_edges: usize,
}

impl Certificate1D {
    pub fn max_residual(&self) -> f64 {
        [
            self.r_boundary,
            self.r_linf,
            self.r_l1,
            self.r_pairing,
            self.r_sign,
            self.r_coupling,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual() < tol
    }
}

/// Integrates `u − f` from the left boundary into `φ` and evaluates the
/// optimality residuals against `(alpha, beta)`.
pub fn build_certificate(
    u: &ScalarField,
    w: &VectorField,
    f: &ScalarField,
    alpha: f64,
    beta: f64,
) -> Result<Certificate1D> {
    let grid = u.grid();
    if grid.dims() != 1 {
        return Err(Error::UnsupportedDimension {
            expected: 1,
            got: grid.dims(),
        });
    }
    grid.check_same(f.grid(), "certificate f")?;
    grid.check_same(w.grid(), "certificate w")?;
    let n = grid.len();
    let h = grid.spacing()[0];
    let (uv, fv, wv) = (u.values(), f.values(), w.component(0));

    let mut phi = Vec::with_capacity(n);
    let mut acc = 0.0;
    for i in 0..n {
        acc += h * (uv[i] - fv[i]);
        phi.push(acc);
    }

    let r_boundary = phi[n - 1].abs();
    let r_linf = (phi[..n - 1].iter().fold(0.0f64, |m, p| m.max(p.abs())) - alpha).max(0.0);
    let l1: f64 = h * phi.iter().map(|p| p.abs()).sum::<f64>();
    let r_l1 = (l1 - beta).max(0.0);
    let w_inf = wv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let r_pairing = if w_inf > 0.0 {
        let pairing: f64 = h * phi.iter().zip(wv).map(|(p, v)| p * v).sum::<f64>();
        (pairing - beta * w_inf).abs()
    } else {
        0.0
    };

    let g: Vec<f64> = (0..n - 1)
        .map(|i| (uv[i + 1] - uv[i]) / h - wv[i])
        .collect();
    let jumps = jump_set(&g);
    let r_sign = jumps
        .iter()
        .map(|&i| (phi[i] - alpha * g[i].signum()).abs())
        .fold(0.0, f64::max);
    let (tv, paired) = g
        .iter()
        .zip(&phi)
        .fold((0.0, 0.0), |(t, q), (gi, p)| (t + h * gi.abs(), q + h * p * gi));
    let r_coupling = (alpha * tv - paired).abs();

    Ok(Certificate1D {
        phi: ScalarField::new(grid.clone(), phi)?,
        r_boundary,
        r_linf,
        r_l1,
        r_pairing,
        r_sign,
        r_coupling,
        jump_edges: jumps.len(),
    })
}

/// Indices of `g` whose magnitude exceeds 10× the median magnitude and a
/// small fraction of the maximum.
pub fn jump_set(g: &[f64]) -> Vec<usize> {
    if g.is_empty() {
        return Vec::new();
    }
    let mut mags: Vec<f64> = g.iter().map(|v| v.abs()).collect();
    let max = mags.iter().fold(0.0f64, |m, v| m.max(*v));
    mags.sort_unstable_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    let threshold = (10.0 * median).max(JUMP_REL_MAX * max);
    g.iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > threshold)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_data() -> StepData {
        StepData::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn classification_examples() {
        let d = unit_data();
        assert_eq!(classify_region(&d, 0.3, 0.35), Region::YellowAffineJump);
        assert_eq!(classify_region(&d, 1.0, 2.0), Region::TvRegime);
        assert_eq!(classify_region(&d, 0.3, 0.45), Region::OtherRegion);
        // pure step data never takes the affine-jump form
        let step = StepData::new(1.0, 1.0, 0.0).unwrap();
        assert_ne!(classify_region(&step, 0.3, 0.35), Region::YellowAffineJump);
    }

    #[test]
    fn yellow_constants() {
        let s = exact_solution_yellow(&unit_data(), 0.3, 0.35).unwrap();
        assert!((s.c1 - 0.7).abs() < 1e-12);
        assert!((s.c2 - 0.15).abs() < 1e-12);
        assert_eq!(s.c3, 0.3);
        assert!((s.u(1e-12) - 0.85).abs() < 1e-9);
        assert!((s.u(-1e-12) - 0.15).abs() < 1e-9);
        assert!(s.jump_size() > 0.0 && s.jump_size() < 1.0);
        assert!(matches!(
            exact_solution_yellow(&unit_data(), 0.3, 0.45),
            Err(Error::WrongRegion(_))
        ));
    }

    #[test]
    fn slope_recovered_when_beta_is_alpha_l() {
        let s = exact_solution_yellow(&unit_data(), 0.3, 0.3).unwrap();
        assert!((s.c1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_dual_satisfies_conditions() {
        let s = exact_solution_yellow(&unit_data(), 0.3, 0.35).unwrap();
        assert!(s.phi(-1.0).abs() < 1e-12 && s.phi(1.0).abs() < 1e-12);
        assert_eq!(s.phi(0.0), 0.3);
        // φ′(−L) = u(−L) − f(−L) > 0
        assert!(s.u(-1.0) - unit_data().eval(-1.0) > 0.0);
        // ∫φ = β by Simpson on each smooth half
        let simpson = |a: f64, b: f64| (b - a) / 6.0 * (s.phi(a) + 4.0 * s.phi((a + b) / 2.0) + s.phi(b));
        assert!((simpson(-1.0, 0.0) + simpson(0.0, 1.0) - 0.35).abs() < 1e-12);
    }

    #[test]
    fn sampling() {
        let step = StepData::new(1.0, 1.0, 0.0).unwrap();
        let f = sample_data(&step, 16).unwrap();
        assert!(f.values()[..8].iter().all(|&v| v == 0.0));
        assert!(f.values()[8..].iter().all(|&v| v == 1.0));
        let g = sample_data(&unit_data(), 16).unwrap();
        for (i, v) in g.values().iter().enumerate() {
            let x = -1.0 + (i as f64 + 0.5) / 8.0;
            let expected = x + if i >= 8 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15);
        }
        let big = sample_data(&unit_data(), 10_000).unwrap();
        assert!((big.mean() - 0.5).abs() < 1e-3);
        assert!(sample_data(&unit_data(), 8).is_err());
    }

    #[test]
    fn trivial_certificate() {
        let f = sample_data(&unit_data(), 64).unwrap();
        let w = VectorField::zeros(f.grid());
        let c = build_certificate(&f, &w, &f, 0.3, 0.35).unwrap();
        assert!(c.phi.values().iter().all(|&p| p == 0.0));
        assert_eq!((c.r_boundary, c.r_linf, c.r_l1, c.r_pairing), (0.0, 0.0, 0.0, 0.0));
        // the data jump needs φ = α there, so (f, 0) is not optimal
        assert_eq!(c.jump_edges, 1);
        assert!((c.r_sign - 0.3).abs() < 1e-15);
        assert!((c.r_coupling - 0.3 * crate::energy::total_variation(&f)).abs() < 1e-12);
    }

    #[test]
    fn sampled_closed_form_certificate() {
        let s = exact_solution_yellow(&unit_data(), 0.3, 0.35).unwrap();
        let n = 4000;
        let (u, w) = s.sample(n).unwrap();
        let f = sample_data(&unit_data(), n).unwrap();
        let c = build_certificate(&u, &w, &f, 0.3, 0.35).unwrap();
        assert!(c.max_residual() < 1e-3, "{c:?}");
        assert_eq!(c.jump_edges, 1);
        // discrete φ on edge i equals the analytic φ at x_i + h/2
        let h = 2.0 / n as f64;
        for (i, p) in c.phi.values().iter().enumerate().step_by(97) {
            let x = -1.0 + (i as f64 + 1.0) * h;
            assert!((p - s.phi(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn perturbation_raises_residual() {
        let s = exact_solution_yellow(&unit_data(), 0.3, 0.35).unwrap();
        let (u, w) = s.sample(400).unwrap();
        let f = sample_data(&unit_data(), 400).unwrap();
        let base = build_certificate(&u, &w, &f, 0.3, 0.35).unwrap();
        let mut vals = u.values().to_vec();
        vals[100] += 0.1;
        let up = ScalarField::new(u.grid().clone(), vals).unwrap();
        let bumped = build_certificate(&up, &w, &f, 0.3, 0.35).unwrap();
        assert!(bumped.r_boundary > base.r_boundary);
        assert!(bumped.max_residual() > base.max_residual());
    }

    #[test]
    fn certificate_rejects_2d() {
        let f = ScalarField::zeros(&GridSpec::image(4, 4).unwrap());
        let w = VectorField::zeros(f.grid());
        assert!(matches!(
            build_certificate(&f, &w, &f, 1.0, 1.0),
            Err(Error::UnsupportedDimension { expected: 1, got: 2 })
        ));
    }

    /// Brute-force ROF check: the discrete KKT conditions with `w = 0`.
    fn assert_rof_optimal(y: &[f64], lambda: f64) {
        let x = rof_1d_exact(y, lambda);
        let mut phi = 0.0;
        for i in 0..y.len() {
            phi += x[i] - y[i];
            if i + 1 < y.len() {
                assert!(phi.abs() <= lambda * (1.0 + 1e-12) + 1e-12);
                let d = x[i + 1] - x[i];
                if d != 0.0 {
                    assert!((phi - lambda * d.signum()).abs() < 1e-9 * lambda.max(1.0));
                }
            }
        }
        assert!(phi.abs() < 1e-9);
    }

    #[test]
    fn taut_string_is_optimal() {
        let mut seed = 17u64;
        for trial in 0..200 {
            let n = 2 + trial % 37;
            let y: Vec<f64> = (0..n)
                .map(|_| {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                    ((seed >> 33) as f64 / (1u64 << 31) as f64) * 4.0 - 2.0
                })
                .collect();
            let lambda = 0.05 + (trial % 7) as f64 * 0.3;
            assert_rof_optimal(&y, lambda);
        }
    }

    #[test]
    fn taut_string_step() {
        let y: Vec<f64> = (0..10).map(|i| if i >= 5 { 1.0 } else { 0.0 }).collect();
        let x = rof_1d_exact(&y, 1.0);
        // each plateau moves by λ/5 towards the mean
        assert!((x[0] - 0.2).abs() < 1e-12 && (x[9] - 0.8).abs() < 1e-12);
    }
}
