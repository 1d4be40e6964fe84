//! Experiment presets, two-mesh convergence errors, ladder studies, and
//! report emission (CSV plus an aligned text table).
//!
//! The two-mesh principle estimates errors without an exact solution by
//! comparing a solve against the solve on a uniformly refined grid at
//! coincident nodes; successive error ratios give the observed order.

use crate::error::{Error, Result};
use crate::exponent::VariableExponent;
use crate::model::{build_transformed_problem, ModelSpec, TransformedProblem};
use crate::solver::{solve_all_with, SolutionGrid, SolveOptions};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

/// Which grid parameter a ladder refines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Time,
    Space,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Time => write!(f, "time"),
            Axis::Space => write!(f, "space"),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Axis::Time),
            "space" => Ok(Axis::Space),
            other => Err(Error::Config(format!(
                "axis must be 'time' or 'space', got '{other}'"
            ))),
        }
    }
}

/// Configuration of one convergence ladder.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Preset id: 1, 2 or 3.
    pub example: u8,
    /// Initial fractional order α₀ = α(0).
    pub alpha0: f64,
    /// Coarsest time-step count.
    pub n: usize,
    /// Coarsest cell count.
    pub m: usize,
    pub axis: Axis,
    /// Number of error rows (each solve pairs a grid with its refinement).
    pub levels: usize,
    pub jacobi_nodes: usize,
    pub legendre_nodes: usize,
}

impl ExperimentConfig {
    pub fn new(example: u8, alpha0: f64) -> Self {
        Self {
            example,
            alpha0,
            n: 16,
            m: 32,
            axis: Axis::Time,
            levels: 4,
            jacobi_nodes: 32,
            legendre_nodes: 8,
        }
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            jacobi_nodes: self.jacobi_nodes,
            legendre_nodes: self.legendre_nodes,
        }
    }
}

/// One row of a convergence report.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub n: usize,
    pub m: usize,
    pub error: f64,
    /// log₂ of the previous error over this one; absent on the first row.
    pub order: Option<f64>,
}

/// Errors and observed orders along one refinement ladder.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub example: String,
    pub alpha0: f64,
    pub axis: Axis,
    /// ½ + 3/2·α₀ on the time axis, 2 on the space axis.
    pub theory_order: f64,
    pub rows: Vec<ReportRow>,
}

/// The proven convergence order for a refinement axis.
pub fn theory_order(axis: Axis, alpha0: f64) -> f64 {
    match axis {
        Axis::Time => 0.5 + 1.5 * alpha0,
        Axis::Space => 2.0,
    }
}

/// Builds the model data and exponent of preset `example` ∈ {1, 2, 3}.
///
/// All three share T = 1, the log-price interval (0, 1), initial data
/// sin(πx) and zero boundary data; they differ in (σ, r), the exponent
/// path, and the forcing:
/// - example 1: σ = 0.45, r = 0.03, α(t) = α₀ − t/11 (note α′(0) ≠ 0),
/// - example 2: σ = 0.50, r = 0.25, α(t) = α₀ − t²/11, zero forcing,
/// - example 3: σ = 0.40, r = 0.10, α(t) = α₀ + t³/11.
///
/// Examples 1 and 3 use the forcing f(x) = (σ²/2 − r)·π·cos(πx).
pub fn preset_model(example: u8, alpha0: f64) -> Result<(ModelSpec, VariableExponent)> {
    use std::f64::consts::{E, PI};
    let (sigma, rate) = match example {
        1 => (0.45, 0.03),
        2 => (0.5, 0.25),
        3 => (0.4, 0.1),
        other => {
            return Err(Error::Config(format!(
                "unknown example preset {other} (expected 1, 2 or 3)"
            )))
        }
    };
    let expiry = 1.0;
    let alpha = match example {
        1 => VariableExponent::new(
            Arc::new(move |t: f64| alpha0 - t / 11.0),
            Arc::new(|_| -1.0 / 11.0),
            Arc::new(|_| 0.0),
            false,
            expiry,
        )?,
        2 => VariableExponent::new(
            Arc::new(move |t: f64| alpha0 - t * t / 11.0),
            Arc::new(|t: f64| -2.0 * t / 11.0),
            Arc::new(|_| -2.0 / 11.0),
            true,
            expiry,
        )?,
        _ => VariableExponent::new(
            Arc::new(move |t: f64| alpha0 + t * t * t / 11.0),
            Arc::new(|t: f64| 3.0 * t * t / 11.0),
            Arc::new(|t: f64| 6.0 * t / 11.0),
            true,
            expiry,
        )?,
    };
    let forcing: crate::model::SpaceTimeFn = if example == 2 {
        Arc::new(|_, _| 0.0)
    } else {
        let coeff = (0.5 * sigma * sigma - rate) * PI;
        Arc::new(move |x: f64, _| coeff * (PI * x).cos())
    };
    let spec = ModelSpec {
        sigma,
        rate,
        expiry,
        s_domain: (1.0, E),
        x_domain: (0.0, 1.0),
        terminal_payoff: Arc::new(|s: f64| (PI * s.ln()).sin()),
        terminal_payoff_deriv: Some(Arc::new(|s: f64| PI * (PI * s.ln()).cos() / s)),
        left_boundary: Arc::new(|_| 0.0),
        right_boundary: Arc::new(|_| 0.0),
        forcing,
    };
    Ok((spec, alpha))
}

/// Preset transformed into ω-form, ready for the solver.
pub fn preset_problem(example: u8, alpha0: f64) -> Result<TransformedProblem> {
    let (spec, alpha) = preset_model(example, alpha0)?;
    build_transformed_problem(&spec, &alpha)
}

fn check_pair(coarse: &SolutionGrid, fine: &SolutionGrid, axis: Axis) -> Result<()> {
    if coarse.meta.x_domain != fine.meta.x_domain || coarse.meta.expiry != fine.meta.expiry {
        return Err(Error::Config(
            "two-mesh comparison requires identical domains".into(),
        ));
    }
    let (n_ok, m_ok) = match axis {
        Axis::Time => (fine.meta.n == 2 * coarse.meta.n, fine.meta.m == coarse.meta.m),
        Axis::Space => (fine.meta.n == coarse.meta.n, fine.meta.m == 2 * coarse.meta.m),
    };
    if !n_ok || !m_ok {
        return Err(Error::Config(format!(
            "two-mesh {axis} comparison needs a doubled grid: coarse ({}, {}), fine ({}, {})",
            coarse.meta.n, coarse.meta.m, fine.meta.n, fine.meta.m
        )));
    }
    Ok(())
}

/// Discrete norm of the two-mesh difference on the time axis:
/// sqrt(τ·Σ_{n=1}^N h·Σ_j |U^{2n}_j(2N, M) − U^n_j(N, M)|²), with τ the
/// coarse grid's step.
pub fn two_mesh_norm_time(coarse: &SolutionGrid, fine: &SolutionGrid) -> Result<f64> {
    check_pair(coarse, fine, Axis::Time)?;
    let tau = coarse.meta.expiry / coarse.meta.n as f64;
    let h = (coarse.meta.x_domain.1 - coarse.meta.x_domain.0) / coarse.meta.m as f64;
    let mut acc = 0.0;
    for n in 1..=coarse.meta.n {
        for (a, b) in coarse.u[n].iter().zip(&fine.u[2 * n]) {
            let d = b - a;
            acc += d * d;
        }
    }
    Ok((tau * h * acc).sqrt())
}

/// Spatial counterpart: fine values at even nodes x_{2j}(N, 2M) against
/// coarse values at x_j(N, M).
pub fn two_mesh_norm_space(coarse: &SolutionGrid, fine: &SolutionGrid) -> Result<f64> {
    check_pair(coarse, fine, Axis::Space)?;
    let tau = coarse.meta.expiry / coarse.meta.n as f64;
    let h = (coarse.meta.x_domain.1 - coarse.meta.x_domain.0) / coarse.meta.m as f64;
    let mut acc = 0.0;
    for n in 1..=coarse.meta.n {
        for (j, a) in coarse.u[n].iter().enumerate() {
            // coarse interior node j+1 coincides with fine node 2(j+1).
            let d = fine.u[n][2 * (j + 1) - 1] - a;
            acc += d * d;
        }
    }
    Ok((tau * h * acc).sqrt())
}

/// Two-mesh temporal error at (N, M): runs (N, M) and (2N, M).
pub fn two_mesh_error_time(problem: &TransformedProblem, n: usize, m: usize) -> Result<f64> {
    two_mesh_error_time_with(problem, n, m, &SolveOptions::default())
}

pub fn two_mesh_error_time_with(
    problem: &TransformedProblem,
    n: usize,
    m: usize,
    options: &SolveOptions,
) -> Result<f64> {
    let coarse = solve_all_with(problem, n, m, options)?;
    let fine = solve_all_with(problem, 2 * n, m, options)?;
    two_mesh_norm_time(&coarse, &fine)
}

/// Two-mesh spatial error at (N, M): runs (N, M) and (N, 2M).
pub fn two_mesh_error_space(problem: &TransformedProblem, n: usize, m: usize) -> Result<f64> {
    two_mesh_error_space_with(problem, n, m, &SolveOptions::default())
}

pub fn two_mesh_error_space_with(
    problem: &TransformedProblem,
    n: usize,
    m: usize,
    options: &SolveOptions,
) -> Result<f64> {
    let coarse = solve_all_with(problem, n, m, options)?;
    let fine = solve_all_with(problem, n, 2 * m, options)?;
    two_mesh_norm_space(&coarse, &fine)
}

/// Runs a refinement ladder for a preset configuration.
///
/// Each solve is performed once: level i compares the grid refined i times
/// with the grid refined i+1 times, so a ladder of `levels` rows costs
/// `levels + 1` solves.
pub fn convergence_study(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    if config.levels < 1 {
        return Err(Error::Config("a ladder needs at least one level".into()));
    }
    let problem = preset_problem(config.example, config.alpha0)?;
    let options = config.options();
    let mut rows = Vec::with_capacity(config.levels);
    let mut previous_error: Option<f64> = None;
    let (mut n, mut m) = (config.n, config.m);
    let mut current = solve_all_with(&problem, n, m, &options)?;
    for _ in 0..config.levels {
        let (next_n, next_m) = match config.axis {
            Axis::Time => (2 * n, m),
            Axis::Space => (n, 2 * m),
        };
        let next = solve_all_with(&problem, next_n, next_m, &options)?;
        let error = match config.axis {
            Axis::Time => two_mesh_norm_time(&current, &next)?,
            Axis::Space => two_mesh_norm_space(&current, &next)?,
        };
        let order = previous_error.map(|prev| (prev / error).log2());
        rows.push(ReportRow { n, m, error, order });
        previous_error = Some(error);
        (n, m) = (next_n, next_m);
        current = next;
    }
    Ok(ConvergenceReport {
        example: config.example.to_string(),
        alpha0: config.alpha0,
        axis: config.axis,
        theory_order: theory_order(config.axis, config.alpha0),
        rows,
    })
}

/// CSV rendering with the fixed header
/// `example,alpha0,axis,N,M,error,order,theory_order`. Floating-point
/// values use the shortest round-trip decimal form; the order field is
/// empty on the first row.
pub fn render_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("example,alpha0,axis,N,M,error,order,theory_order\n");
    for row in &report.rows {
        let order = row.order.map(|o| o.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            report.example,
            report.alpha0,
            report.axis,
            row.n,
            row.m,
            row.error,
            order,
            report.theory_order
        ));
    }
    out
}

/// Aligned text table mirroring the usual convergence-table layout.
pub fn render_table(report: &ConvergenceReport) -> String {
    let mut out = format!(
        "example {}  alpha0 = {}  axis = {}  (theory order {:.2})\n",
        report.example, report.alpha0, report.axis, report.theory_order
    );
    out.push_str(&format!(
        "{:>8} {:>8} {:>14} {:>8}\n",
        "N", "M", "error", "order"
    ));
    for row in &report.rows {
        let order = row
            .order
            .map(|o| format!("{o:.2}"))
            .unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "{:>8} {:>8} {:>14.4e} {:>8}\n",
            row.n, row.m, row.error, order
        ));
    }
    out
}

/// Writes the CSV report to `path`.
pub fn emit_report(report: &ConvergenceReport, path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(report))?;
    Ok(())
}
