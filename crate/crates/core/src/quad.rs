//! Quadrature rules: Gauss–Jacobi for the singular kernel weight,
//! Gauss–Legendre for smooth integrands, and an adaptive Simpson routine
//! used by the brute-force verification paths.

use crate::error::{Error, Result};
use crate::special::gamma_raw;
use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss rule for the weight (1−ς)^{α₀−1} ς^{−α₀} on (0, 1).
///
/// This is the weight of the kernel integral defining q; factoring it out
/// leaves a smooth integrand, so the rule converges spectrally.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    /// Quadrature abscissae, strictly increasing inside (0, 1).
    pub nodes: Vec<f64>,
    /// Positive quadrature weights (the singular weight is folded in).
    pub weights: Vec<f64>,
    /// Power of ς in the weight: −α₀.
    pub exponent_left: f64,
    /// Power of (1−ς) in the weight: α₀−1.
    pub exponent_right: f64,
}

/// Gauss–Legendre rule on (−1, 1).
#[derive(Debug, Clone)]
pub struct LegendreRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Golub–Welsch: nodes and weights of the Gauss rule from the three-term
/// recurrence coefficients (`alphas`, `betas`) of the orthogonal
/// polynomials and the zeroth moment `mu0`. `betas[0]` is unused.
fn golub_welsch(alphas: &[f64], betas: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = alphas.len();
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        jacobi[(k, k)] = alphas[k];
        if k > 0 {
            let b = betas[k].sqrt();
            jacobi[(k, k - 1)] = b;
            jacobi[(k - 1, k)] = b;
        }
    }
    let eigen = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eigen.eigenvectors[(0, k)];
            (eigen.eigenvalues[k], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Builds the Gauss–Jacobi rule for the weight (1−ς)^{α₀−1} ς^{−α₀} on
/// (0, 1), exact for polynomial factors of degree ≤ 2·count−1.
pub fn build_jacobi_rule(alpha0: f64, count: usize) -> Result<JacobiRule> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(Error::Domain(format!(
            "Jacobi rule requires alpha0 in (0, 1), got {alpha0}"
        )));
    }
    if count < 4 {
        return Err(Error::Domain(format!(
            "Jacobi rule requires at least 4 nodes, got {count}"
        )));
    }
    // On (−1, 1) the weight is (1−x)^a (1+x)^b with a = α₀−1, b = −α₀, so
    // a + b = −1. The general Jacobi recurrence degenerates there; the
    // specialized coefficients below are the a + b = −1 limits.
    let mut alphas = vec![0.0; count];
    let mut betas = vec![0.0; count];
    alphas[0] = 1.0 - 2.0 * alpha0;
    for k in 1..count {
        let kf = k as f64;
        alphas[k] = (2.0 * alpha0 - 1.0) / (4.0 * kf * kf - 1.0);
        betas[k] = if k == 1 {
            2.0 * alpha0 * (1.0 - alpha0)
        } else {
            (kf + alpha0 - 1.0) * (kf - alpha0) / ((2.0 * kf - 1.0) * (2.0 * kf - 1.0))
        };
    }
    // Zeroth moment: ∫ = B(α₀, 1−α₀) = Γ(α₀)Γ(1−α₀); the map x → (1+x)/2
    // to (0, 1) leaves the weights unchanged because a + b + 1 = 0.
    let mu0 = gamma_raw(alpha0) * gamma_raw(1.0 - alpha0);
    let (nodes, weights) = golub_welsch(&alphas, &betas, mu0);
    let nodes: Vec<f64> = nodes.into_iter().map(|x| 0.5 * (1.0 + x)).collect();
    Ok(JacobiRule {
        nodes,
        weights,
        exponent_left: -alpha0,
        exponent_right: alpha0 - 1.0,
    })
}

/// Builds the Gauss–Legendre rule with `count` nodes on (−1, 1).
pub fn build_legendre_rule(count: usize) -> Result<LegendreRule> {
    if count < 1 {
        return Err(Error::Domain("Legendre rule needs at least 1 node".into()));
    }
    let alphas = vec![0.0; count];
    let mut betas = vec![0.0; count];
    for k in 1..count {
        let kf = k as f64;
        betas[k] = kf * kf / (4.0 * kf * kf - 1.0);
    }
    let (nodes, weights) = golub_welsch(&alphas, &betas, 2.0);
    Ok(LegendreRule { nodes, weights })
}

impl LegendreRule {
    /// Integrates `f` over (a, b).
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    (fa + 4.0 * fm + fb) * h / 6.0
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive Simpson quadrature of `f` over (a, b) with absolute tolerance
/// `tol`. Used only by slow verification paths; the production scheme uses
/// fixed Gauss rules.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_step(&f, a, b, fa, fm, fb, whole, tol, 48)
}
