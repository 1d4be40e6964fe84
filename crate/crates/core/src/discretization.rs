//! Time grid, product-quadrature convolution weights, and the 1-D P1
//! finite-element machinery.
//!
//! The convolution weights realize exact product integration: the unknown
//! is replaced by its piecewise-linear interpolant in time and the
//! convolutions with q′ (via q-differences) and β_{α₀} (via closed-form
//! antiderivatives) are carried out exactly at the grid endpoints, so the
//! only interpolation error is that of the interpolant itself.

use crate::error::{Error, Result};
use crate::exponent::VariableExponent;
use crate::kernel::eval_q;
use crate::model::TransformedProblem;
use crate::quad::{JacobiRule, LegendreRule};
use crate::special::gamma_raw;

/// B₁(t) = t^{α₀}/Γ(α₀+1), the antiderivative of β_{α₀} (so β_{α₀} ∗ 1 = B₁).
pub fn b1(alpha0: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t.powf(alpha0) / gamma_raw(alpha0 + 1.0)
}

/// B₂(t) = t^{α₀+1}/Γ(α₀+2), the second antiderivative (β_{α₀} ∗ t = B₂).
pub fn b2(alpha0: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t.powf(alpha0 + 1.0) / gamma_raw(alpha0 + 2.0)
}

/// Uniform time grid t_n = n·τ with τ = T/N.
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    /// Number of steps N.
    pub count: usize,
    /// Step size τ = T/N.
    pub step: f64,
}

impl TimeGrid {
    pub fn new(count: usize, horizon: f64) -> Result<Self> {
        if count == 0 {
            return Err(Error::Config("time grid needs at least one step".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::Config(format!(
                "time horizon must be positive, got {horizon}"
            )));
        }
        Ok(Self {
            count,
            step: horizon / count as f64,
        })
    }

    pub fn node(&self, n: usize) -> f64 {
        self.step * n as f64
    }

    pub fn horizon(&self) -> f64 {
        self.step * self.count as f64
    }
}

/// Precomputed convolution weights for one uniform grid.
///
/// The uniform grid makes the weights lag-stationary: the coefficient of
/// the value at t_j in the row for t_n depends only on l = n−j, so a single
/// array per kernel suffices. `beta_node0[n]` is the extra weight
/// multiplying the value at t₀ when the convolved function does not vanish
/// there (the scheme's unknown does, but the forcing χ need not).
#[derive(Debug, Clone)]
pub struct LagWeights {
    /// w_l: lag weights of the q′ convolution, l = 0..N−1.
    pub q_lags: Vec<f64>,
    /// w̃_l: lag weights of the β_{α₀} convolution, l = 0..N−1.
    pub beta_lags: Vec<f64>,
    /// Weight of the t₀ endpoint, indexed by n = 1..N (entry 0 unused).
    pub beta_node0: Vec<f64>,
}

/// Closed-form β_{α₀} product-quadrature weights.
///
/// w̃_0 = τ^{α₀}/Γ(α₀+2); w̃_l = [B₂((l+1)τ) − 2·B₂(lτ) + B₂((l−1)τ)]/τ for
/// l ≥ 1. `beta_node0[n]` is fixed by the partition-of-unity identity
/// Σ_l w̃_l + node0[n] = B₁(t_n), which makes the rule exact on constants.
/// `alpha0` may be 1 (the classical limit, β₁ ≡ 1).
pub fn beta_lag_weights(alpha0: f64, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(alpha0 > 0.0 && alpha0 <= 1.0) {
        return Err(Error::Domain(format!(
            "beta weights require alpha0 in (0, 1], got {alpha0}"
        )));
    }
    let n = grid.count;
    let tau = grid.step;
    let mut lags = Vec::with_capacity(n);
    lags.push(b2(alpha0, tau) / tau);
    for l in 1..n {
        let lf = l as f64;
        lags.push(
            (b2(alpha0, (lf + 1.0) * tau) - 2.0 * b2(alpha0, lf * tau)
                + b2(alpha0, (lf - 1.0) * tau))
                / tau,
        );
    }
    let mut node0 = vec![0.0; n + 1];
    let mut prefix = 0.0;
    for (idx, entry) in node0.iter_mut().enumerate().skip(1) {
        prefix += lags[idx - 1];
        *entry = b1(alpha0, grid.node(idx)) - prefix;
    }
    Ok((lags, node0))
}

/// Product-quadrature weights of the q′ convolution.
///
/// The inner integral over each cell is exact via the antiderivative
/// identity ∫ q′(t−s) ds = q-difference, leaving smooth one-dimensional
/// integrals handled by the supplied Gauss–Legendre rule:
/// w_0 = (1/τ)∫₀^τ [q(θ) − 1] dθ and
/// w_l = (1/τ)∫₀^τ [q(θ + lτ) − q(θ + (l−1)τ)] dθ for l ≥ 1.
/// No pointwise q′ value is ever needed, so exponents with α′(0) ≠ 0 are
/// handled by the same formulas.
pub fn q_lag_weights(
    alpha: &VariableExponent,
    grid: &TimeGrid,
    rule: &JacobiRule,
    gl: &LegendreRule,
) -> Vec<f64> {
    let n = grid.count;
    let tau = grid.step;
    let count = gl.nodes.len();
    // θ nodes on (0, τ) with weights summing to 1 (the 1/τ average).
    let thetas: Vec<f64> = gl.nodes.iter().map(|x| 0.5 * (1.0 + x) * tau).collect();
    let avg_w: Vec<f64> = gl.weights.iter().map(|w| 0.5 * w).collect();
    let mut lags = Vec::with_capacity(n);
    // The first cell touches t = 0, where q′ can be singular when
    // α′(0) ≠ 0; its average is integrated adaptively instead of by the
    // fixed rule so the lag weights stay accurate in that case too.
    let a0 = crate::quad::adaptive_simpson(|t| eval_q(alpha, rule, t), 0.0, tau, 1e-13) / tau;
    lags.push(a0 - 1.0);
    let mut prev_avg = a0;
    for l in 1..n {
        let mut cur_avg = 0.0;
        for i in 0..count {
            cur_avg += avg_w[i] * eval_q(alpha, rule, thetas[i] + l as f64 * tau);
        }
        lags.push(cur_avg - prev_avg);
        prev_avg = cur_avg;
    }
    lags
}

/// Symmetric tridiagonal matrix stored as diagonal + one off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        debug_assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    /// a·self + b·other, entrywise.
    pub fn linear_comb(a: f64, first: &SymTridiag, b: f64, second: &SymTridiag) -> SymTridiag {
        debug_assert_eq!(first.size(), second.size());
        SymTridiag {
            diag: first
                .diag
                .iter()
                .zip(&second.diag)
                .map(|(x, y)| a * x + b * y)
                .collect(),
            off: first
                .off
                .iter()
                .zip(&second.off)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        }
    }

    /// LDLᵀ factorization; fails if a pivot is not strictly positive
    /// (i.e. the matrix is not positive definite).
    pub fn ldlt(&self) -> Result<LdlFactor> {
        let n = self.diag.len();
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut di = self.diag[i];
            if i > 0 {
                di -= l[i - 1] * l[i - 1] * d[i - 1];
            }
            if !(di > 0.0) {
                return Err(Error::Numerical(format!(
                    "tridiagonal system lost positive definiteness at row {i} (pivot {di})"
                )));
            }
            d[i] = di;
            if i + 1 < n {
                l[i] = self.off[i] / di;
            }
        }
        Ok(LdlFactor { d, l })
    }
}

/// LDLᵀ factors of a symmetric positive definite tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    d: Vec<f64>,
    l: Vec<f64>,
}

impl LdlFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        debug_assert_eq!(rhs.len(), n);
        let mut x = rhs.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }
}

/// P1 finite-element space on a uniform partition of (ā, b̄) with the
/// homogeneous Dirichlet rows eliminated.
#[derive(Debug, Clone)]
pub struct FemSpace {
    /// Number of cells M.
    pub cell_count: usize,
    /// Mesh width h = (b̄−ā)/M.
    pub h: f64,
    pub x_domain: (f64, f64),
    /// Interior mass matrix, (h/6)·[1, 4, 1].
    pub mass: SymTridiag,
    /// Interior stiffness matrix, (1/h)·[−1, 2, −1].
    pub stiffness: SymTridiag,
}

impl FemSpace {
    /// Full grid node x_j, j = 0..M.
    pub fn x_node(&self, j: usize) -> f64 {
        self.x_domain.0 + self.h * j as f64
    }

    /// The interior nodes x_1..x_{M−1} carrying degrees of freedom.
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.cell_count).map(|j| self.x_node(j)).collect()
    }
}

/// Assembles mass and stiffness matrices for M cells on `x_domain`.
pub fn assemble_fem(m: usize, x_domain: (f64, f64)) -> Result<FemSpace> {
    if m < 2 {
        return Err(Error::Domain(format!(
            "FEM space needs at least 2 cells, got {m}"
        )));
    }
    if !(x_domain.0 < x_domain.1) {
        return Err(Error::Domain(format!(
            "FEM domain must be a proper interval, got ({}, {})",
            x_domain.0, x_domain.1
        )));
    }
    let h = (x_domain.1 - x_domain.0) / m as f64;
    let interior = m - 1;
    let mass = SymTridiag {
        diag: vec![4.0 * h / 6.0; interior],
        off: vec![h / 6.0; interior - 1],
    };
    let stiffness = SymTridiag {
        diag: vec![2.0 / h; interior],
        off: vec![-1.0 / h; interior - 1],
    };
    Ok(FemSpace {
        cell_count: m,
        h,
        x_domain,
        mass,
        stiffness,
    })
}

/// 3-point Gauss–Legendre nodes/weights on (−1, 1), used per cell for the
/// spatial inner products (exact to the h² accuracy the scheme needs).
const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [
    0.555_555_555_555_555_6,
    0.888_888_888_888_888_9,
    0.555_555_555_555_555_6,
];

/// Interior vector of pairings (f, Λ_j) with the P1 basis.
pub fn pair_with_basis<F: Fn(f64) -> f64>(fem: &FemSpace, f: F) -> Vec<f64> {
    let m = fem.cell_count;
    let h = fem.h;
    let mut out = vec![0.0; m - 1];
    for cell in 0..m {
        let left = fem.x_node(cell);
        let mid = left + 0.5 * h;
        for (xi, wi) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
            let x = mid + 0.5 * h * xi;
            let w = 0.5 * h * wi;
            let local = (x - left) / h;
            let fval = f(x);
            if cell >= 1 {
                out[cell - 1] += w * fval * (1.0 - local);
            }
            if cell + 1 <= m - 1 {
                out[cell] += w * fval * local;
            }
        }
    }
    out
}

/// Interior vector of pairings (f, Λ_j′) with the P1 basis derivatives.
pub fn pair_with_basis_grad<F: Fn(f64) -> f64>(fem: &FemSpace, f: F) -> Vec<f64> {
    let m = fem.cell_count;
    let h = fem.h;
    let mut out = vec![0.0; m - 1];
    for cell in 0..m {
        let left = fem.x_node(cell);
        let mid = left + 0.5 * h;
        for (xi, wi) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
            let x = mid + 0.5 * h * xi;
            let w = 0.5 * h * wi;
            let fval = f(x);
            if cell >= 1 {
                out[cell - 1] += w * fval * (-1.0 / h);
            }
            if cell + 1 <= m - 1 {
                out[cell] += w * fval * (1.0 / h);
            }
        }
    }
    out
}

/// Endpoint product integration of q against the piecewise-linear
/// interpolant of the sampled function `values` (values[j] at t_j):
/// returns (q ∗ Π values)(t_n). Used for the homogenization correction.
fn q_convolve_endpoint(
    alpha: &VariableExponent,
    rule: &JacobiRule,
    grid: &TimeGrid,
    values: &[f64],
    n: usize,
) -> f64 {
    let tau = grid.step;
    let tn = grid.node(n);
    let mut acc = 0.0;
    for cell in 1..=n {
        let a = grid.node(cell - 1);
        let mid = a + 0.5 * tau;
        let (va, vb) = (values[cell - 1], values[cell]);
        for (xi, wi) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
            let s = mid + 0.5 * tau * xi;
            let w = 0.5 * tau * wi;
            let local = (s - a) / tau;
            acc += w * eval_q(alpha, rule, tn - s) * (va * (1.0 - local) + vb * local);
        }
    }
    acc
}

/// Assembles the interior load vector at time level `n`, pairing the
/// ω-equation forcing with each P1 basis function.
///
/// Three parts:
/// - static part: B₁(t_n)·[−½σ²·(c̄*′, Λ′) − λ·(c̄*, Λ)] in weak form
///   (the exact β-convolution of a time constant is B₁),
/// - χ part: the discrete β-convolution Σ_l w̃_l·(χ(·, t_{n−l}), Λ) plus
///   the t₀ endpoint weight when χ(·, 0) ≠ 0,
/// - homogenization part: −(q ∗ e^{−θx}∂ₜL)(t_n) by the same
///   piecewise-linear product rule with q in place of β.
pub fn assemble_load(
    problem: &TransformedProblem,
    fem: &FemSpace,
    grid: &TimeGrid,
    weights: &LagWeights,
    rule: &JacobiRule,
    n: usize,
) -> Vec<f64> {
    debug_assert!(n >= 1 && n <= grid.count);
    let alpha0 = problem.alpha.alpha0();
    let tn = grid.node(n);
    let sigma = problem.sigma;
    let interior = fem.cell_count - 1;

    // Static part.
    let grad_pairing = pair_with_basis_grad(fem, |x| (problem.c_star_prime)(x));
    let value_pairing = pair_with_basis(fem, |x| (problem.c_star)(x));
    let scale = b1(alpha0, tn);
    let mut load: Vec<f64> = (0..interior)
        .map(|j| {
            scale * (-0.5 * sigma * sigma * grad_pairing[j] - problem.lambda * value_pairing[j])
        })
        .collect();

    // χ part: discrete convolution against the β lag weights.
    for l in 0..n {
        let t = grid.node(n - l);
        let pairing = pair_with_basis(fem, |x| (problem.chi)(x, t));
        let w = weights.beta_lags[l];
        for j in 0..interior {
            load[j] += w * pairing[j];
        }
    }
    let pairing0 = pair_with_basis(fem, |x| (problem.chi)(x, 0.0));
    let w0 = weights.beta_node0[n];
    for j in 0..interior {
        load[j] += w0 * pairing0[j];
    }

    // Homogenization correction.
    if let Some(h) = &problem.homogenization {
        let (xa, xb) = problem.x_domain;
        let width = xb - xa;
        let theta = problem.transform.exponent_coeff;
        // ∂ₜL is linear in x: split into its value at ā and its slope so
        // only two scalar time convolutions are needed.
        let at_left: Vec<f64> = (0..=n).map(|j| (h.dt_l)(xa, grid.node(j))).collect();
        let slope: Vec<f64> = (0..=n)
            .map(|j| (h.dt_l)(xb, grid.node(j)) - (h.dt_l)(xa, grid.node(j)))
            .collect();
        let conv_left = q_convolve_endpoint(&problem.alpha, rule, grid, &at_left, n);
        let conv_slope = q_convolve_endpoint(&problem.alpha, rule, grid, &slope, n);
        let pair_exp = pair_with_basis(fem, |x| (-theta * x).exp());
        let pair_exp_ramp = pair_with_basis(fem, |x| (-theta * x).exp() * (x - xa) / width);
        for j in 0..interior {
            load[j] -= conv_left * pair_exp[j] + conv_slope * pair_exp_ramp[j];
        }
    }

    load
}
