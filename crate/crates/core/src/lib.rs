//! L2–TVL∞ denoising: the infimal convolution of total variation with the
//! L∞ norm of the gradient, solved by split Bregman, together with exact 1D
//! solutions, dual-certificate checks, Bregman iteration, spatially adapted
//! weights, and TV/TGV reference solvers.

pub mod adaptive;
pub mod diff_ops;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod field;
pub mod generators;
pub mod io;
pub mod metrics;
pub mod oracle;
pub mod prox;
pub mod solver;
pub mod tgv;

pub use error::{Error, Result};
pub use field::{Beta, GridSpec, RegParams, ScalarField, SolveReport, VectorField};
pub use solver::{bregman_iterate, solve_tv, solve_tvlinf, solve_tvlinf_from, InnerModel, SplitState, TvlSolution};
pub use tgv::{solve_tgv, TgvSolution};
