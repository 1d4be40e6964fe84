//! The variable-exponent kernel machinery: 𝒢(t) = t^{α₀−α(t)} and the
//! smooth convolution kernel q = β_{α₀} ∗ k, where k(t) = t^{−α(t)}/Γ(1−α(t))
//! is the raw memory kernel. Pre-convolving with β_{α₀} removes the
//! singularity: q is bounded with q(0) = 1, which is what makes the product
//! quadrature in time well behaved.

use crate::error::{Error, Result};
use crate::exponent::VariableExponent;
use crate::quad::JacobiRule;
use crate::special::{digamma, gamma_raw};

/// 𝒢(t) = t^{α₀−α(t)}, with the limit value 𝒢(0) = 1.
pub fn eval_g(alpha: &VariableExponent, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t == 0.0 {
        return 1.0;
    }
    t.powf(alpha.alpha0() - alpha.alpha(t))
}

/// ∂ₜ 𝒢(t) = 𝒢(t)·(−α′(t)·ln t + (α₀−α(t))/t), with the limit value 0 at
/// t = 0 (valid when α′(0) = 0).
fn eval_g_deriv(alpha: &VariableExponent, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    eval_g(alpha, t) * (-alpha.alpha_deriv(t) * t.ln() + (alpha.alpha0() - alpha.alpha(t)) / t)
}

/// Evaluates q(t) = (1/Γ(α₀)) ∫₀¹ (1−ς)^{α₀−1} ς^{−α₀} 𝒢(tς)/Γ(1−α(tς)) dς
/// with the supplied Gauss–Jacobi rule (the singular weight is folded into
/// the rule's weights).
///
/// At t = 0 the value is snapped to exactly 1 so rule tolerance does not
/// leak into the convolution weights.
pub fn eval_q(alpha: &VariableExponent, rule: &JacobiRule, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if t == 0.0 {
        return 1.0;
    }
    let mut acc = 0.0;
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        let u = t * s;
        acc += w * eval_g(alpha, u) / gamma_raw(1.0 - alpha.alpha(u));
    }
    acc / gamma_raw(alpha.alpha0())
}

fn q_prime_quadrature(alpha: &VariableExponent, rule: &JacobiRule, t: f64) -> f64 {
    let mut acc = 0.0;
    for (s, w) in rule.nodes.iter().zip(&rule.weights) {
        let u = t * s;
        let a = alpha.alpha(u);
        let g = eval_g(alpha, u);
        let dg = if u == 0.0 { 0.0 } else { s * eval_g_deriv(alpha, u) };
        acc += w * (dg + s * alpha.alpha_deriv(u) * digamma(1.0 - a) * g) / gamma_raw(1.0 - a);
    }
    acc / gamma_raw(alpha.alpha0())
}

/// Evaluates q′(t) by differentiating the q integral under the integral
/// sign. The derivation of the t = 0 limit requires α′(0) = 0, so the
/// exponent must carry `flat_at_zero`; use [`eval_q_prime_lenient`] to
/// evaluate anyway at t > 0 for exponents with α′(0) ≠ 0.
pub fn eval_q_prime(alpha: &VariableExponent, rule: &JacobiRule, t: f64) -> Result<f64> {
    if !alpha.flat_at_zero() {
        return Err(Error::Precondition(
            "eval_q_prime requires an exponent with alpha'(0) = 0 (flat_at_zero)".into(),
        ));
    }
    Ok(q_prime_quadrature(alpha, rule, t))
}

/// q′(t) by the same quadrature without the α′(0) = 0 precondition.
///
/// For exponents with α′(0) ≠ 0 the integrand is finite for every t > 0
/// (and the harness runs such exponents deliberately), but the returned
/// value at t = 0 is a formal limit, not a derivative.
pub fn eval_q_prime_lenient(alpha: &VariableExponent, rule: &JacobiRule, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    q_prime_quadrature(alpha, rule, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive_simpson, build_jacobi_rule};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn quadratic_alpha(t_max: f64) -> VariableExponent {
        VariableExponent::new(
            Arc::new(|t: f64| 0.4 - t * t / 11.0),
            Arc::new(|t: f64| -2.0 * t / 11.0),
            Arc::new(|_| -2.0 / 11.0),
            true,
            t_max,
        )
        .unwrap()
    }

    /// Independent evaluation of the q integral: endpoint power
    /// substitutions remove both weight singularities, then adaptive
    /// Simpson integrates the smooth remainders.
    fn oracle_q(alpha: &VariableExponent, t: f64) -> f64 {
        let a0 = alpha.alpha0();
        let f = |s: f64| eval_g(alpha, t * s) / gamma_raw(1.0 - alpha.alpha(t * s));
        // Left half ς ∈ (0, ½): ς = z^{1/(1−α₀)} absorbs ς^{−α₀}.
        let p = 1.0 / (1.0 - a0);
        let left = p * adaptive_simpson(
            |z: f64| {
                let s = z.powf(p);
                (1.0 - s).powf(a0 - 1.0) * f(s)
            },
            0.0,
            0.5f64.powf(1.0 - a0),
            1e-13,
        );
        // Right half ς ∈ (½, 1): 1−ς = y^{1/α₀} absorbs (1−ς)^{α₀−1}.
        let r = 1.0 / a0;
        let right = r * adaptive_simpson(
            |y: f64| {
                let s = 1.0 - y.powf(r);
                s.powf(-a0) * f(s)
            },
            0.0,
            0.5f64.powf(a0),
            1e-13,
        );
        (left + right) / gamma_raw(a0)
    }

    #[test]
    fn g_constant_exponent_is_one() {
        let alpha = VariableExponent::constant(0.6, 1.0).unwrap();
        for t in [0.0, 0.2, 0.9] {
            assert_eq!(eval_g(&alpha, t), 1.0);
        }
    }

    #[test]
    fn g_known_value() {
        let alpha = quadratic_alpha(1.0);
        // 0.5^{0.25/11}, reference from 30-digit arithmetic.
        assert_relative_eq!(
            eval_g(&alpha, 0.5),
            0.984_370_089_905_855_7,
            max_relative = 1e-14
        );
        assert_eq!(eval_g(&alpha, 0.0), 1.0);
    }

    #[test]
    fn q_at_zero_is_exactly_one() {
        let alpha = quadratic_alpha(1.0);
        let rule = build_jacobi_rule(alpha.alpha0(), 32).unwrap();
        assert_eq!(eval_q(&alpha, &rule, 0.0), 1.0);
    }

    #[test]
    fn q_constant_exponent_collapses_to_one() {
        for a0 in [0.1, 0.5, 0.9] {
            let alpha = VariableExponent::constant(a0, 1.0).unwrap();
            let rule = build_jacobi_rule(a0, 32).unwrap();
            let mut worst: f64 = 0.0;
            for i in 0..=1000 {
                let t = i as f64 / 1000.0;
                worst = worst.max((eval_q(&alpha, &rule, t) - 1.0).abs());
            }
            assert!(worst <= 1e-10, "alpha0 = {a0}: max |q - 1| = {worst:e}");
        }
    }

    #[test]
    fn q_matches_adaptive_oracle() {
        let alpha = quadratic_alpha(1.0);
        let rule = build_jacobi_rule(alpha.alpha0(), 32).unwrap();
        for t in [0.25, 1.0] {
            let got = eval_q(&alpha, &rule, t);
            let want = oracle_q(&alpha, t);
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
    }

    #[test]
    fn q_prime_constant_exponent_is_zero() {
        let alpha = VariableExponent::constant(0.7, 1.0).unwrap();
        let rule = build_jacobi_rule(0.7, 32).unwrap();
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            assert!(eval_q_prime(&alpha, &rule, t).unwrap().abs() <= 1e-8);
        }
    }

    #[test]
    fn q_prime_zero_limit() {
        let alpha = quadratic_alpha(1.0);
        let rule = build_jacobi_rule(alpha.alpha0(), 32).unwrap();
        assert!(eval_q_prime(&alpha, &rule, 0.0).unwrap().abs() <= 1e-10);
        // Finite differences of q shrink towards the same limit.
        let mut prev = f64::INFINITY;
        for h in [1e-2, 1e-3, 1e-4] {
            let fd = (eval_q(&alpha, &rule, 2.0 * h) - eval_q(&alpha, &rule, 0.0)) / (2.0 * h);
            assert!(fd.abs() < prev.abs() + 1e-12);
            prev = fd;
        }
        assert!(prev.abs() <= 1e-3);
    }

    #[test]
    fn q_prime_matches_centered_difference() {
        let alpha = quadratic_alpha(1.0);
        let rule = build_jacobi_rule(alpha.alpha0(), 32).unwrap();
        let h = 1e-5;
        let t = 0.5;
        let fd = (eval_q(&alpha, &rule, t + h) - eval_q(&alpha, &rule, t - h)) / (2.0 * h);
        let got = eval_q_prime(&alpha, &rule, t).unwrap();
        assert!((got - fd).abs() <= 1e-6, "{got} vs {fd}");
    }

    #[test]
    fn q_prime_consistency_random_points() {
        let alpha = quadratic_alpha(1.0);
        let rule = build_jacobi_rule(alpha.alpha0(), 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
        let h = 1e-5;
        for _ in 0..20 {
            let t: f64 = rng.gen_range(0.01..0.99);
            let fd = (eval_q(&alpha, &rule, t + h) - eval_q(&alpha, &rule, t - h)) / (2.0 * h);
            let got = eval_q_prime(&alpha, &rule, t).unwrap();
            assert!((got - fd).abs() <= 1e-6, "t = {t}: {got} vs {fd}");
        }
    }

    #[test]
    fn q_and_q_prime_bounded() {
        let alpha = quadratic_alpha(1.0);
        let rule = build_jacobi_rule(alpha.alpha0(), 32).unwrap();
        let mut bound_q: f64 = 0.0;
        let mut bound_qp: f64 = 0.0;
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            bound_q = bound_q.max(eval_q(&alpha, &rule, t).abs());
            bound_qp = bound_qp.max(eval_q_prime(&alpha, &rule, t).unwrap().abs());
        }
        assert!(bound_q.is_finite() && bound_qp.is_finite());
        println!("uniform bounds on [0,1]: |q| <= {bound_q:.6}, |q'| <= {bound_qp:.6}");
    }

    #[test]
    fn q_prime_requires_flat_exponent() {
        // α′(0) = −1/11 ≠ 0: the strict entry point refuses, the lenient
        // one still produces a finite value at t > 0.
        let alpha = VariableExponent::new(
            Arc::new(|t: f64| 0.4 - t / 11.0),
            Arc::new(|_| -1.0 / 11.0),
            Arc::new(|_| 0.0),
            false,
            1.0,
        )
        .unwrap();
        let rule = build_jacobi_rule(0.4, 32).unwrap();
        assert!(matches!(
            eval_q_prime(&alpha, &rule, 0.5),
            Err(Error::Precondition(_))
        ));
        assert!(eval_q_prime_lenient(&alpha, &rule, 0.5).is_finite());
    }
}
