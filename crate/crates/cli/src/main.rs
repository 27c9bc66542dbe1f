use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tvlinf::experiment::{run_compare, run_denoise, run_generate, run_verify, ExperimentConfig};
use tvlinf::Error;

/// L2–TVL∞ denoising experiments.
#[derive(Parser, Debug)]
#[command(name = "tvlinf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Denoise an image, signal or synthetic input and write results to --out.
    Denoise(Opts),
    /// Solve a 1D problem and check its optimality certificate.
    Verify(Opts),
    /// Write clean and noisy synthetic data.
    Generate(Opts),
    /// Compare TV, a uniform-β sweep and spatially adapted β on synthetic data.
    Compare(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// key = value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// tv, tgv, tvlinf or tvlinf_sa.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Splitting penalty; adaptive when omitted.
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Number of Bregman passes.
    #[arg(long)]
    bregman: Option<usize>,
    /// Numerator of the β(x) rule.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Pre-smoothing width of the β(x) rule.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    window: Option<usize>,
    /// data or reference.
    #[arg(long)]
    beta_rule: Option<String>,
    /// Comma-separated uniform β values for compare.
    #[arg(long)]
    beta_sweep: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Gaussian noise variance.
    #[arg(long)]
    noise: Option<f64>,
    /// Samples (1D) or side length (2D) of synthetic inputs.
    #[arg(long)]
    size: Option<usize>,
    /// Input file (.pgm or .csv) or synthetic:NAME.
    #[arg(long = "in")]
    input: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat non-convergence as an error (exit code 2).
    #[arg(long)]
    strict: bool,
    /// Certificate tolerance for verify.
    #[arg(long)]
    cert_tol: Option<f64>,
}

impl Opts {
    fn config(&self) -> tvlinf::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let mut set = |key: &str, value: Option<String>| match value {
            Some(v) => cfg.set(key, &v),
            None => Ok(()),
        };
        let s = |v: Option<f64>| v.map(|x| x.to_string());
        set("model", self.model.clone())?;
        set("alpha", s(self.alpha))?;
        set("beta", s(self.beta))?;
        set("mu", s(self.mu))?;
        set("tol", s(self.tol))?;
        set("max_iters", self.max_iters.map(|x| x.to_string()))?;
        set("bregman", self.bregman.map(|x| x.to_string()))?;
        set("c", s(self.c))?;
        set("eps", s(self.eps))?;
        set("sigma", s(self.sigma))?;
        set("window", self.window.map(|x| x.to_string()))?;
        set("beta_rule", self.beta_rule.clone())?;
        set("beta_sweep", self.beta_sweep.clone())?;
        set("seed", self.seed.map(|x| x.to_string()))?;
        set("noise", s(self.noise))?;
        set("size", self.size.map(|x| x.to_string()))?;
        set("in", self.input.clone())?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        set("cert_tol", s(self.cert_tol))?;
        if self.strict {
            cfg.strict = true;
        }
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NotConverged(_) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> tvlinf::Result<u8> {
    match cli.command {
        Command::Denoise(o) => {
            let out = run_denoise(&o.config()?)?;
            print!("{}", out.report);
        }
        Command::Verify(o) => {
            let out = run_verify(&o.config()?)?;
            print!("{}", out.report);
            if !out.passed {
                return Ok(2);
            }
        }
        Command::Generate(o) => {
            let cfg = o.config()?;
            run_generate(&cfg)?;
            println!("wrote {}", cfg.out.display());
        }
        Command::Compare(o) => {
            for r in run_compare(&o.config()?)? {
                println!(
                    "{:<28} ssim {:.4}  psnr {:6.2}{}",
                    r.label,
                    r.ssim,
                    r.psnr,
                    if r.converged { "" } else { "  (not converged)" }
                );
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
