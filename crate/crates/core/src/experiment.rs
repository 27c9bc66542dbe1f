//! Experiment configuration and the commands driven by it.
//!
//! A configuration is a flat `key = value` text (`#` starts a comment);
//! later assignments override earlier ones, which is how command-line flags
//! take precedence over a config file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::adaptive::{beta_from_data, beta_from_reference};
use crate::error::{Error, Result};
use crate::field::{Beta, RegParams, ScalarField, SolveReport, VectorField};
use crate::generators::{
    add_gaussian_noise, affine_step_1d, circle_2d, pyramid_square_2d, step_1d,
};
use crate::io::{field_csv, history_csv, profile_csv, read_pgm, read_signal_csv, write_pgm, PgmDepth};
use crate::metrics::{l2_distance, psnr, ssim};
use crate::oracle::{
    build_certificate, classify_region, exact_solution_tv_regime, exact_solution_yellow,
    sample_points, Certificate1D, Region, StepData,
};
use crate::solver::{bregman_iterate, solve_tv, solve_tvlinf, InnerModel};
use crate::tgv::solve_tgv;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Tv,
    Tgv,
    TvlInf,
    /// TVL∞ with `β(x)` from the weight rule.
    TvlInfSa,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tv" => Ok(Model::Tv),
            "tgv" => Ok(Model::Tgv),
            "tvlinf" => Ok(Model::TvlInf),
            "tvlinf_sa" => Ok(Model::TvlInfSa),
            other => Err(Error::Config(format!(
                "unknown model {other:?} (expected tv, tgv, tvlinf or tvlinf_sa)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Tv => "tv",
            Model::Tgv => "tgv",
            Model::TvlInf => "tvlinf",
            Model::TvlInfSa => "tvlinf_sa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Synthetic {
    Step,
    AffineStep,
    Circle,
    Pyramid,
}

impl Synthetic {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "step" => Ok(Synthetic::Step),
            "affine-step" => Ok(Synthetic::AffineStep),
            "circle" => Ok(Synthetic::Circle),
            "pyramid" | "pyramid-in-square" => Ok(Synthetic::Pyramid),
            other => Err(Error::Config(format!(
                "unknown synthetic input {other:?} (expected step, affine-step, circle or pyramid)"
            ))),
        }
    }

    pub fn is_1d(self) -> bool {
        matches!(self, Synthetic::Step | Synthetic::AffineStep)
    }
}

/// Where the data comes from: a file (`.pgm` image or `.csv` signal) or a
/// generator, written `synthetic:NAME`.
#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    File(PathBuf),
    Synthetic(Synthetic),
}

/// Source image for the `β(x)` rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaRule {
    /// Gaussian-smoothed data.
    Data,
    /// Clean synthetic image.
    Reference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub mu: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub bregman_outer: usize,
    pub c: Option<f64>,
    pub eps: f64,
    pub sigma: f64,
    pub window: usize,
    pub beta_rule: BetaRule,
    /// Uniform β values tried by `compare`.
    pub beta_sweep: Vec<f64>,
    pub input: Option<Input>,
    /// Samples (1D) or side length (2D) of synthetic inputs.
    pub size: Option<usize>,
    pub half_length: f64,
    pub jump: f64,
    pub slope: f64,
    /// Variance of the added Gaussian noise.
    pub noise: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub strict: bool,
    pub cert_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::TvlInf,
            alpha: None,
            beta: None,
            mu: None,
            tol: 1e-6,
            max_iters: 20_000,
            bregman_outer: 1,
            c: None,
            eps: 1e-4,
            sigma: 2.0,
            window: 9,
            beta_rule: BetaRule::Data,
            beta_sweep: Vec::new(),
            input: None,
            size: None,
            half_length: 1.0,
            jump: 1.0,
            slope: 1.0,
            noise: 0.0,
            seed: 0,
            out: PathBuf::from("out"),
            strict: false,
            cert_tol: 5e-3,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl ExperimentConfig {
    /// Parses `key = value` lines over the defaults.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_kv(&fs::read_to_string(path)?)
    }

    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = Model::parse(value)?,
            "alpha" => self.alpha = Some(parse_num(key, value)?),
            "beta" => self.beta = Some(parse_num(key, value)?),
            "mu" => self.mu = Some(parse_num(key, value)?),
            "tol" => self.tol = parse_num(key, value)?,
            "max_iters" | "max-iters" => self.max_iters = parse_num(key, value)?,
            "bregman" | "bregman_outer" => self.bregman_outer = parse_num(key, value)?,
            "c" => self.c = Some(parse_num(key, value)?),
            "eps" => self.eps = parse_num(key, value)?,
            "sigma" => self.sigma = parse_num(key, value)?,
            "window" => self.window = parse_num(key, value)?,
            "beta_rule" => {
                self.beta_rule = match value {
                    "data" => BetaRule::Data,
                    "reference" => BetaRule::Reference,
                    other => {
                        return Err(Error::Config(format!(
                            "beta_rule must be data or reference, got {other:?}"
                        )))
                    }
                }
            }
            "beta_sweep" => {
                self.beta_sweep = value
                    .split(',')
                    .map(|s| parse_num(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "in" | "input" => {
                self.input = Some(match value.strip_prefix("synthetic:") {
                    Some(name) => Input::Synthetic(Synthetic::parse(name)?),
                    None => Input::File(PathBuf::from(value)),
                })
            }
            "size" => self.size = Some(parse_num(key, value)?),
            "half_length" => self.half_length = parse_num(key, value)?,
            "jump" => self.jump = parse_num(key, value)?,
            "slope" => self.slope = parse_num(key, value)?,
            "noise" => self.noise = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "strict" => self.strict = parse_num(key, value)?,
            "cert_tol" => self.cert_tol = parse_num(key, value)?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_none() {
            return Err(Error::Config("no input given".into()));
        }
        let need = |name: &str, v: Option<f64>| match v {
            Some(x) if x > 0.0 && x.is_finite() => Ok(()),
            Some(x) => Err(Error::Config(format!("{name} = {x} must be positive"))),
            None => Err(Error::Config(format!(
                "model {} needs {name}",
                self.model.name()
            ))),
        };
        need("alpha", self.alpha)?;
        match self.model {
            Model::Tv => {}
            Model::Tgv | Model::TvlInf => need("beta", self.beta)?,
            Model::TvlInfSa => {
                need("c", self.c)?;
                if self.beta_rule == BetaRule::Reference
                    && !matches!(self.input, Some(Input::Synthetic(_)))
                {
                    return Err(Error::Config(
                        "beta_rule = reference needs a synthetic input".into(),
                    ));
                }
            }
        }
        if self.bregman_outer == 0 {
            return Err(Error::Config("bregman must be at least 1".into()));
        }
        Ok(())
    }

    fn reg_params(&self) -> RegParams {
        let mut p = RegParams::new(self.alpha.unwrap_or(1.0), self.beta.unwrap_or(1.0))
            .tol(self.tol)
            .max_iters(self.max_iters);
        p.mu = self.mu;
        p
    }

    fn step_data(&self, synthetic: Synthetic) -> Result<StepData> {
        let slope = if synthetic == Synthetic::AffineStep {
            self.slope
        } else {
            0.0
        };
        StepData::new(self.half_length, self.jump, slope)
    }
}

/// Data for one run: the (possibly noisy) input, the clean source when
/// known, and sample coordinates for 1D profiles.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub clean: Option<ScalarField>,
    pub noisy: ScalarField,
    pub x: Option<Vec<f64>>,
    pub step: Option<StepData>,
}

pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Config("no input given".into()))?;
    let (clean, x, step, observed) = match input {
        Input::Synthetic(s) if s.is_1d() => {
            let n = cfg.size.unwrap_or(1000);
            let data = cfg.step_data(*s)?;
            let f = if *s == Synthetic::Step {
                step_1d(n, data.half_length, data.jump)?
            } else {
                affine_step_1d(n, data.half_length, data.jump, data.slope)?
            };
            let (_, xs) = sample_points(data.half_length, n)?;
            (Some(f.clone()), Some(xs), Some(data), f)
        }
        Input::Synthetic(s) => {
            let n = cfg.size.unwrap_or(96);
            let f = match s {
                Synthetic::Circle => circle_2d(n)?,
                _ => pyramid_square_2d(n)?,
            };
            (Some(f.clone()), None, None, f)
        }
        Input::File(path) => {
            let is_csv = path
                .extension()
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if is_csv {
                let f = read_signal_csv(path)?;
                let h = f.grid().spacing()[0];
                let xs = (0..f.len()).map(|i| i as f64 * h).collect();
                (None, Some(xs), None, f)
            } else {
                (None, None, None, read_pgm(path)?)
            }
        }
    };
    let noisy = add_gaussian_noise(&observed, cfg.noise, cfg.seed)?;
    Ok(Dataset {
        clean,
        noisy,
        x,
        step,
    })
}

/// Result of one denoising run.
#[derive(Debug, Clone)]
pub struct Denoised {
    pub u: ScalarField,
    /// `w` of the last TVL∞/TGV solve; `None` for TV and Bregman runs.
    pub w: Option<VectorField>,
    pub reports: Vec<SolveReport>,
    /// Weight map used by `tvlinf_sa`.
    pub beta_map: Option<ScalarField>,
}

impl Denoised {
    pub fn converged(&self) -> bool {
        self.reports.iter().all(|r| r.converged)
    }
}

fn beta_map(cfg: &ExperimentConfig, data: &Dataset) -> Result<ScalarField> {
    let c = cfg.c.unwrap_or(1.0);
    match cfg.beta_rule {
        BetaRule::Data => beta_from_data(&data.noisy, c, cfg.eps, cfg.sigma, cfg.window),
        BetaRule::Reference => {
            let clean = data.clean.as_ref().ok_or_else(|| {
                Error::Config("beta_rule = reference needs a synthetic input".into())
            })?;
            beta_from_reference(clean, c, cfg.eps)
        }
    }
}

/// Runs the configured model (with Bregman passes when `bregman_outer > 1`).
pub fn denoise(cfg: &ExperimentConfig, data: &Dataset) -> Result<Denoised> {
    cfg.validate()?;
    let mut p = cfg.reg_params();
    let alpha = p.alpha;
    let mut map = None;
    if cfg.model == Model::TvlInfSa {
        let m = beta_map(cfg, data)?;
        p.beta = Beta::Map(m.clone());
        map = Some(m);
    }
    let f = &data.noisy;
    let out = if cfg.bregman_outer > 1 {
        let model = match cfg.model {
            Model::Tv => InnerModel::Tv,
            Model::Tgv => InnerModel::Tgv {
                beta: cfg.beta.unwrap_or(1.0),
            },
            Model::TvlInf | Model::TvlInfSa => InnerModel::TvlInf,
        };
        let runs = bregman_iterate(f, &p, cfg.bregman_outer, model)?;
        let u = runs.last().map(|r| r.0.clone()).expect("at least one pass");
        Denoised {
            u,
            w: None,
            reports: runs.into_iter().map(|r| r.1).collect(),
            beta_map: map,
        }
    } else {
        match cfg.model {
            Model::Tv => {
                let (u, r) = solve_tv(f, alpha, &p)?;
                Denoised {
                    u,
                    w: None,
                    reports: vec![r],
                    beta_map: map,
                }
            }
            Model::Tgv => {
                let s = solve_tgv(f, alpha, cfg.beta.unwrap_or(1.0), &p)?;
                Denoised {
                    u: s.u,
                    w: Some(s.w),
                    reports: vec![s.report],
                    beta_map: map,
                }
            }
            Model::TvlInf | Model::TvlInfSa => {
                let s = solve_tvlinf(f, &p)?;
                Denoised {
                    u: s.u,
                    w: Some(s.w),
                    reports: vec![s.report],
                    beta_map: map,
                }
            }
        }
    };
    if cfg.strict && !out.converged() {
        let its: Vec<String> = out.reports.iter().map(|r| r.iterations.to_string()).collect();
        return Err(Error::NotConverged(format!(
            "stopped after {} iterations without meeting tol = {}",
            its.join("+"),
            cfg.tol
        )));
    }
    Ok(out)
}

/// Exact discrete or closed-form solution for noise-free 1D step data, when
/// one is available for the configured model.
pub fn exact_reference(cfg: &ExperimentConfig, data: &Dataset) -> Result<Option<ScalarField>> {
    let (Some(step), Some(alpha)) = (data.step, cfg.alpha) else {
        return Ok(None);
    };
    if cfg.bregman_outer > 1 {
        return Ok(None);
    }
    match cfg.model {
        Model::Tv => exact_solution_tv_regime(&data.noisy, alpha).map(Some),
        Model::TvlInf => {
            let beta = cfg.beta.unwrap_or(f64::INFINITY);
            match classify_region(&step, alpha, beta) {
                Region::TvRegime => exact_solution_tv_regime(&data.noisy, alpha).map(Some),
                Region::YellowAffineJump if cfg.noise == 0.0 => {
                    let s = exact_solution_yellow(&step, alpha, beta)?;
                    Ok(Some(s.sample(data.noisy.len())?.0))
                }
                _ => Ok(None),
            }
        }
        _ => Ok(None),
    }
}

/// Quality figures of a run against the clean data, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub ssim_noisy: f64,
    pub ssim: f64,
    pub psnr_noisy: f64,
    pub psnr: f64,
    pub l2_to_clean: f64,
}

pub fn score(clean: &ScalarField, noisy: &ScalarField, u: &ScalarField) -> Result<Scores> {
    Ok(Scores {
        ssim_noisy: ssim(clean, noisy)?,
        ssim: ssim(clean, u)?,
        psnr_noisy: psnr(clean, noisy)?,
        psnr: psnr(clean, u)?,
        l2_to_clean: l2_distance(clean, u)?,
    })
}

/// Everything `denoise` produced and wrote.
#[derive(Debug, Clone)]
pub struct DenoiseOutcome {
    pub data: Dataset,
    pub result: Denoised,
    pub scores: Option<Scores>,
    pub exact: Option<ScalarField>,
    /// `max|u − u_exact|` when an exact solution is known.
    pub max_err_exact: Option<f64>,
    pub report: String,
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Denoises and writes `report.txt`, `history.csv`, and either
/// `noisy.pgm`/`denoised.pgm` (2D) or `profile.csv` (1D) into `cfg.out`.
pub fn run_denoise(cfg: &ExperimentConfig) -> Result<DenoiseOutcome> {
    cfg.validate()?;
    let data = load_dataset(cfg)?;
    let result = denoise(cfg, &data)?;
    ensure_dir(&cfg.out)?;

    let exact = exact_reference(cfg, &data)?;
    let max_err_exact = exact.as_ref().map(|e| {
        e.values()
            .iter()
            .zip(result.u.values())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    });
    let is_2d = data.noisy.grid().dims() == 2;
    let scores = match &data.clean {
        Some(clean) if is_2d => Some(score(clean, &data.noisy, &result.u)?),
        _ => None,
    };

    if is_2d {
        write_pgm(&cfg.out.join("noisy.pgm"), &data.noisy, PgmDepth::Sixteen)?;
        write_pgm(&cfg.out.join("denoised.pgm"), &result.u, PgmDepth::Sixteen)?;
    } else {
        let x = data.x.clone().unwrap_or_default();
        fs::write(
            cfg.out.join("profile.csv"),
            profile_csv(&x, &data.noisy, &result.u, exact.as_ref())?,
        )?;
    }
    fs::write(cfg.out.join("history.csv"), history_csv(&result.reports))?;

    let mut report = String::new();
    let _ = writeln!(report, "model: {}", cfg.model.name());
    if let Some(a) = cfg.alpha {
        let _ = writeln!(report, "alpha: {a}");
    }
    if let Some(b) = cfg.beta.filter(|_| cfg.model != Model::TvlInfSa) {
        let _ = writeln!(report, "beta: {b}");
    }
    if let Some(m) = &result.beta_map {
        let (lo, hi) = m
            .values()
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        let _ = writeln!(report, "beta_map_range: {lo} {hi}");
    }
    let _ = writeln!(report, "bregman_outer: {}", cfg.bregman_outer);
    let iters: Vec<String> = result.reports.iter().map(|r| r.iterations.to_string()).collect();
    let _ = writeln!(report, "iterations: {}", iters.join(" "));
    let _ = writeln!(report, "converged: {}", result.converged());
    if let Some(e) = result.reports.last().and_then(|r| r.final_energy()) {
        let _ = writeln!(report, "final_energy: {e}");
    }
    let _ = writeln!(report, "l2_to_data: {}", l2_distance(&data.noisy, &result.u)?);
    if let Some(s) = &scores {
        let _ = writeln!(report, "ssim_noisy: {}", s.ssim_noisy);
        let _ = writeln!(report, "ssim: {}", s.ssim);
        let _ = writeln!(report, "psnr_noisy: {}", s.psnr_noisy);
        let _ = writeln!(report, "psnr: {}", s.psnr);
    }
    if let Some(e) = max_err_exact {
        let _ = writeln!(report, "max_abs_err_exact: {e}");
    }
    fs::write(cfg.out.join("report.txt"), &report)?;

    Ok(DenoiseOutcome {
        data,
        result,
        scores,
        exact,
        max_err_exact,
        report,
    })
}

/// Certificate of a 1D run.
#[derive(Debug, Clone)]
pub struct VerifyOutcome {
    pub certificate: Certificate1D,
    pub passed: bool,
    pub report: String,
}

/// Solves a 1D problem and checks the optimality conditions of the result.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyOutcome> {
    cfg.validate()?;
    if !matches!(cfg.model, Model::Tv | Model::TvlInf) {
        return Err(Error::Config("verify supports the tv and tvlinf models".into()));
    }
    if cfg.bregman_outer > 1 {
        return Err(Error::Config("verify checks single solves only".into()));
    }
    let data = load_dataset(cfg)?;
    if data.noisy.grid().dims() != 1 {
        return Err(Error::UnsupportedDimension {
            expected: 1,
            got: data.noisy.grid().dims(),
        });
    }
    let result = denoise(cfg, &data)?;
    let alpha = cfg.alpha.unwrap_or(1.0);
    let beta = match cfg.model {
        Model::Tv => f64::INFINITY,
        _ => cfg.beta.unwrap_or(1.0),
    };
    let w = result
        .w
        .clone()
        .unwrap_or_else(|| VectorField::zeros(data.noisy.grid()));
    let certificate = build_certificate(&result.u, &w, &data.noisy, alpha, beta)?;
    let passed = certificate.passes(cfg.cert_tol);
    let c = &certificate;
    let mut report = String::new();
    let _ = writeln!(report, "iterations: {}", result.reports[0].iterations);
    let _ = writeln!(report, "converged: {}", result.converged());
    for (name, v) in [
        ("r_boundary", c.r_boundary),
        ("r_linf", c.r_linf),
        ("r_l1", c.r_l1),
        ("r_pairing", c.r_pairing),
        ("r_sign", c.r_sign),
        ("r_coupling", c.r_coupling),
    ] {
        let _ = writeln!(report, "{name}: {v:.3e}");
    }
    let _ = writeln!(report, "jump_edges: {}", c.jump_edges);
    let _ = writeln!(
        report,
        "{} (max residual {:.3e}, tol {:.1e})",
        if passed { "PASS" } else { "FAIL" },
        c.max_residual(),
        cfg.cert_tol
    );
    Ok(VerifyOutcome {
        certificate,
        passed,
        report,
    })
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub label: String,
    pub ssim: f64,
    pub psnr: f64,
    pub converged: bool,
}

/// Runs TV, every β of `beta_sweep` with uniform TVL∞, and the spatially
/// adapted model when `c` is set, on one clean synthetic image; writes
/// `compare.csv`.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    let alpha = cfg
        .alpha
        .ok_or_else(|| Error::Config("compare needs alpha".into()))?;
    if cfg.input.is_none() {
        return Err(Error::Config("no input given".into()));
    }
    let data = load_dataset(cfg)?;
    let clean = data
        .clean
        .clone()
        .ok_or_else(|| Error::Config("compare needs a synthetic input".into()))?;
    let mut rows = vec![CompareRow {
        label: "noisy".into(),
        ssim: ssim(&clean, &data.noisy)?,
        psnr: psnr(&clean, &data.noisy)?,
        converged: true,
    }];
    let mut push = |label: String, c: &ExperimentConfig| -> Result<()> {
        let d = denoise(c, &data)?;
        rows.push(CompareRow {
            label,
            ssim: ssim(&clean, &d.u)?,
            psnr: psnr(&clean, &d.u)?,
            converged: d.converged(),
        });
        Ok(())
    };
    let tv = ExperimentConfig {
        model: Model::Tv,
        ..cfg.clone()
    };
    push(format!("tv alpha={alpha}"), &tv)?;
    let sweep = if cfg.beta_sweep.is_empty() {
        cfg.beta.into_iter().collect()
    } else {
        cfg.beta_sweep.clone()
    };
    for b in sweep {
        let c = ExperimentConfig {
            model: Model::TvlInf,
            beta: Some(b),
            ..cfg.clone()
        };
        push(format!("tvlinf beta={b}"), &c)?;
    }
    if let Some(cv) = cfg.c {
        let c = ExperimentConfig {
            model: Model::TvlInfSa,
            ..cfg.clone()
        };
        push(format!("tvlinf_sa c={cv}"), &c)?;
    }
    ensure_dir(&cfg.out)?;
    let mut csv = String::from("label,ssim,psnr,converged\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.label, r.ssim, r.psnr, r.converged);
    }
    fs::write(cfg.out.join("compare.csv"), csv)?;
    Ok(rows)
}

/// Writes the clean and noisy data: `clean.pgm`/`noisy.pgm` for images,
/// `signal.csv` (`x,f,clean`) for 1D data.
pub fn run_generate(cfg: &ExperimentConfig) -> Result<Dataset> {
    if cfg.input.is_none() {
        return Err(Error::Config("no input given".into()));
    }
    let data = load_dataset(cfg)?;
    ensure_dir(&cfg.out)?;
    match (&data.clean, &data.x) {
        (Some(clean), Some(x)) => {
            let mut csv = String::from("x,f,clean\n");
            for i in 0..x.len() {
                let _ = writeln!(csv, "{},{},{}", x[i], data.noisy.values()[i], clean.values()[i]);
            }
            fs::write(cfg.out.join("signal.csv"), csv)?;
        }
        (Some(clean), None) => {
            write_pgm(&cfg.out.join("clean.pgm"), clean, PgmDepth::Sixteen)?;
            write_pgm(&cfg.out.join("noisy.pgm"), &data.noisy, PgmDepth::Sixteen)?;
            fs::write(cfg.out.join("noisy.csv"), field_csv(&data.noisy))?;
        }
        _ => return Err(Error::Config("generate needs a synthetic input".into())),
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_parsing_and_overrides() {
        let mut cfg = ExperimentConfig::from_kv(
            "# comment\nmodel = tvlinf_sa\nalpha=0.4\nc = 2 # trailing\nin = synthetic:pyramid\nbeta_sweep = 1, 2,3\n",
        )
        .unwrap();
        assert_eq!(cfg.model, Model::TvlInfSa);
        assert_eq!(cfg.alpha, Some(0.4));
        assert_eq!(cfg.beta_sweep, vec![1.0, 2.0, 3.0]);
        assert_eq!(cfg.input, Some(Input::Synthetic(Synthetic::Pyramid)));
        cfg.set("alpha", "0.5").unwrap();
        assert_eq!(cfg.alpha, Some(0.5));
        cfg.validate().unwrap();
    }

    #[test]
    fn config_errors() {
        assert!(ExperimentConfig::from_kv("alpha 3").is_err());
        assert!(ExperimentConfig::from_kv("bogus = 1").is_err());
        assert!(ExperimentConfig::from_kv("model = rof").is_err());
        assert!(ExperimentConfig::from_kv("in = synthetic:square").is_err());
        let cfg = ExperimentConfig::from_kv("model = tvlinf\nalpha = 1\nin = synthetic:circle").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = ExperimentConfig::from_kv("model = tv\nalpha = 1").unwrap();
        assert!(cfg.validate().is_err());
        let cfg =
            ExperimentConfig::from_kv("model = tvlinf_sa\nalpha = 1\nc = 1\nbeta_rule = reference\nin = x.pgm")
                .unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn strict_reports_non_convergence() {
        let cfg = ExperimentConfig::from_kv(
            "model = tvlinf\nalpha = 0.3\nbeta = 0.35\nin = synthetic:affine-step\nsize = 64\nmax_iters = 3\nstrict = true",
        )
        .unwrap();
        let data = load_dataset(&cfg).unwrap();
        assert!(matches!(denoise(&cfg, &data), Err(Error::NotConverged(_))));
    }
}
