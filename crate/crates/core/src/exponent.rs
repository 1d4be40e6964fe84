//! The time-dependent fractional order α(t).

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The variable exponent α(t) on [0, T], supplied with its first two
/// derivatives. `alpha0` is α(0); `flat_at_zero` asserts α′(0) = 0, the
/// hypothesis under which the differentiated kernel formula is derived.
#[derive(Clone)]
pub struct VariableExponent {
    eval: TimeFn,
    eval_deriv: TimeFn,
    eval_second_deriv: TimeFn,
    alpha0: f64,
    flat_at_zero: bool,
    t_max: f64,
}

impl fmt::Debug for VariableExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableExponent")
            .field("alpha0", &self.alpha0)
            .field("flat_at_zero", &self.flat_at_zero)
            .field("t_max", &self.t_max)
            .finish_non_exhaustive()
    }
}

/// Number of samples used for the construction-time range check.
const RANGE_CHECK_SAMPLES: usize = 1000;

impl VariableExponent {
    /// Builds a variable exponent valid on [0, t_max].
    ///
    /// Construction samples α on a dense grid and rejects exponents leaving
    /// (0, 1); it also rejects `flat_at_zero = true` when α′(0) ≠ 0.
    pub fn new(
        eval: TimeFn,
        eval_deriv: TimeFn,
        eval_second_deriv: TimeFn,
        flat_at_zero: bool,
        t_max: f64,
    ) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(Error::Domain(format!(
                "exponent horizon must be positive, got {t_max}"
            )));
        }
        for i in 0..=RANGE_CHECK_SAMPLES {
            let t = t_max * i as f64 / RANGE_CHECK_SAMPLES as f64;
            let a = eval(t);
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Domain(format!(
                    "alpha(t) must stay inside (0, 1); alpha({t}) = {a}"
                )));
            }
        }
        if flat_at_zero && eval_deriv(0.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "flat_at_zero requires alpha'(0) = 0, got {}",
                eval_deriv(0.0)
            )));
        }
        let alpha0 = eval(0.0);
        Ok(Self {
            eval,
            eval_deriv,
            eval_second_deriv,
            alpha0,
            flat_at_zero,
            t_max,
        })
    }

    /// Constant exponent α(t) ≡ α₀.
    pub fn constant(alpha0: f64, t_max: f64) -> Result<Self> {
        Self::new(
            Arc::new(move |_| alpha0),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            true,
            t_max,
        )
    }

    pub fn alpha(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn alpha_deriv(&self, t: f64) -> f64 {
        (self.eval_deriv)(t)
    }

    pub fn alpha_second_deriv(&self, t: f64) -> f64 {
        (self.eval_second_deriv)(t)
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn flat_at_zero(&self) -> bool {
        self.flat_at_zero
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks_range() {
        // α wanders above 1 inside the horizon.
        let bad = VariableExponent::new(
            Arc::new(|t| 0.9 + t),
            Arc::new(|_| 1.0),
            Arc::new(|_| 0.0),
            false,
            1.0,
        );
        assert!(bad.is_err());
        // α hits 0.
        let bad = VariableExponent::new(
            Arc::new(|t| 0.5 - t),
            Arc::new(|_| -1.0),
            Arc::new(|_| 0.0),
            false,
            1.0,
        );
        assert!(bad.is_err());
        assert!(VariableExponent::constant(1.2, 1.0).is_err());
    }

    #[test]
    fn alpha0_is_value_at_zero() {
        let a = VariableExponent::new(
            Arc::new(|t: f64| 0.4 - t * t / 11.0),
            Arc::new(|t: f64| -2.0 * t / 11.0),
            Arc::new(|_| -2.0 / 11.0),
            true,
            1.0,
        )
        .unwrap();
        assert_eq!(a.alpha0(), 0.4);
        assert!(a.flat_at_zero());
        assert_eq!(a.alpha_deriv(0.0), 0.0);
    }

    #[test]
    fn flat_flag_requires_zero_slope() {
        let bad = VariableExponent::new(
            Arc::new(|t: f64| 0.4 - t / 11.0),
            Arc::new(|_| -1.0 / 11.0),
            Arc::new(|_| 0.0),
            true,
            1.0,
        );
        assert!(bad.is_err());
        // Same exponent with the honest flag is fine.
        let ok = VariableExponent::new(
            Arc::new(|t: f64| 0.4 - t / 11.0),
            Arc::new(|_| -1.0 / 11.0),
            Arc::new(|_| 0.0),
            false,
            1.0,
        );
        assert!(ok.is_ok());
    }
}
