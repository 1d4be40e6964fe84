//! Acceptance suite: one test per criterion, each printing a
//! `[PASS] criterion n: ...` line (visible with `--nocapture`; a failing
//! assertion fails the test and surfaces the offending values).

use fracbs::discretization::{b2, beta_lag_weights, TimeGrid};
use fracbs::exponent::VariableExponent;
use fracbs::harness::{convergence_study, preset_problem, render_csv, Axis, ExperimentConfig};
use fracbs::kernel::{eval_q, eval_q_prime};
use fracbs::quad::build_jacobi_rule;
use fracbs::solver::{dense_oracle_solve, solve_all};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::Instant;

fn time_config(example: u8, alpha0: f64) -> ExperimentConfig {
    ExperimentConfig {
        axis: Axis::Time,
        n: 16,
        m: 32,
        levels: 4,
        ..ExperimentConfig::new(example, alpha0)
    }
}

fn space_config(example: u8, alpha0: f64) -> ExperimentConfig {
    ExperimentConfig {
        axis: Axis::Space,
        n: 32,
        m: 32,
        levels: 4,
        ..ExperimentConfig::new(example, alpha0)
    }
}

fn final_order(config: &ExperimentConfig) -> (f64, f64) {
    let report = convergence_study(config).unwrap();
    let last = report.rows.last().unwrap();
    (last.error, last.order.unwrap())
}

#[test]
fn criterion_1_temporal_orders_example_1() {
    let start = Instant::now();
    let reference = [(0.1, 0.64), (0.4, 1.19), (0.7, 1.65), (0.9, 1.94)];
    for (alpha0, expected) in reference {
        let (_, order) = final_order(&time_config(1, alpha0));
        let theory = 0.5 + 1.5 * alpha0;
        assert!(
            (order - expected).abs() <= 0.15,
            "alpha0 = {alpha0}: final temporal order {order} vs reference {expected}"
        );
        assert!(
            order >= theory - 0.15,
            "alpha0 = {alpha0}: final temporal order {order} below theory {theory}"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "temporal ladders took {elapsed:?}, budget is 60 s"
    );
    println!(
        "[PASS] criterion 1: example 1 temporal orders within 0.15 of reference \
         values and theory at four alpha0, in {elapsed:.2?}"
    );
}

#[test]
fn criterion_2_spatial_orders_example_1() {
    let report = convergence_study(&space_config(1, 0.7)).unwrap();
    for row in report.rows.iter().skip(1) {
        let order = row.order.unwrap();
        assert!(
            (1.95..=2.05).contains(&order),
            "M = {}: spatial order {order} outside [1.95, 2.05]",
            row.m
        );
    }
    println!("[PASS] criterion 2: example 1 spatial orders all in [1.95, 2.05] up to M = 256");
}

#[test]
fn criterion_3_examples_2_and_3_orders() {
    let (_, order2) = final_order(&time_config(2, 0.9));
    assert!(
        (order2 - 1.86).abs() <= 0.15 && order2 >= (0.5 + 1.5 * 0.9) - 0.15,
        "example 2 alpha0 = 0.9: final temporal order {order2}"
    );
    let (_, order3) = final_order(&time_config(3, 0.1));
    assert!(
        (order3 - 0.65).abs() <= 0.15 && order3 >= (0.5 + 1.5 * 0.1) - 0.15,
        "example 3 alpha0 = 0.1: final temporal order {order3}"
    );
    for (example, alpha0) in [(2u8, 0.9), (3u8, 0.1)] {
        let report = convergence_study(&space_config(example, alpha0)).unwrap();
        for row in report.rows.iter().skip(1) {
            let order = row.order.unwrap();
            assert!(
                (1.95..=2.05).contains(&order),
                "example {example}: spatial order {order} outside [1.95, 2.05]"
            );
        }
    }
    println!(
        "[PASS] criterion 3: examples 2 and 3 temporal orders match reference \
         values and spatial orders are second order"
    );
}

#[test]
fn criterion_4_error_magnitudes() {
    // Reference final-ladder errors: example 1, alpha0 = 0.7, N = 128 and
    // example 2, alpha0 = 0.4, N = 128.
    let checks = [(1u8, 0.7, 1.5554e-5), (2u8, 0.4, 2.5898e-4)];
    for (example, alpha0, reference) in checks {
        let (error, _) = final_order(&time_config(example, alpha0));
        let ratio = error / reference;
        assert!(
            (1.0 / 3.0..=3.0).contains(&ratio),
            "example {example}, alpha0 = {alpha0}: error {error} vs reference {reference}"
        );
    }
    println!("[PASS] criterion 4: final-level error magnitudes within a factor of 3 of reference values");
}

#[test]
fn criterion_5_kernel_properties() {
    let rule = build_jacobi_rule(0.5, 32).unwrap();
    // Constant exponent: q collapses to 1 identically.
    let constant = VariableExponent::constant(0.5, 1.0).unwrap();
    let worst = (1..=1000)
        .map(|i| (eval_q(&constant, &rule, i as f64 / 1000.0) - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-10, "constant-exponent collapse max |q - 1| = {worst}");
    // q(0) = 1 exactly.
    let varying = VariableExponent::new(
        Arc::new(|t: f64| 0.4 - t * t / 11.0),
        Arc::new(|t: f64| -2.0 * t / 11.0),
        Arc::new(|_| -2.0 / 11.0),
        true,
        1.0,
    )
    .unwrap();
    let rule4 = build_jacobi_rule(0.4, 32).unwrap();
    assert_eq!(eval_q(&varying, &rule4, 0.0), 1.0);
    // q' against a centered finite difference at 20 interior points.
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0a5e);
    for _ in 0..20 {
        let t: f64 = rng.gen_range(0.05..0.95);
        let analytic = eval_q_prime(&varying, &rule4, t).unwrap();
        let fd = (eval_q(&varying, &rule4, t + h) - eval_q(&varying, &rule4, t - h)) / (2.0 * h);
        assert!(
            (analytic - fd).abs() <= 1e-6,
            "t = {t}: q' = {analytic} vs finite difference {fd}"
        );
    }
    println!("[PASS] criterion 5: kernel collapse, q(0) = 1 and q' consistency all hold");
}

#[test]
fn criterion_6_beta_weight_positive_definiteness() {
    let grid = TimeGrid::new(32, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0a5f);
    for alpha0 in [0.1, 0.4, 0.7, 0.9] {
        let (lags, _) = beta_lag_weights(alpha0, &grid).unwrap();
        for _ in 0..100 {
            let v: Vec<f64> = (0..=32)
                .map(|j| if j == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) })
                .collect();
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            let mut form = 0.0;
            for n in 1..=32usize {
                for j in 1..=n {
                    form += lags[n - j] * v[j] * v[n];
                }
            }
            assert!(
                form >= -1e-12 * norm2,
                "alpha0 = {alpha0}: quadratic form {form} below -1e-12 * {norm2}"
            );
        }
    }
    println!("[PASS] criterion 6: beta-weight quadratic form nonnegative for 100 random vectors at four alpha0");
}

#[test]
fn criterion_7_linear_exactness() {
    // On omega(t) = c*t the piecewise-linear interpolant is exact, so the
    // discrete convolution must reproduce c * B2(t_n).
    for alpha0 in [0.2, 0.5, 0.8] {
        let grid = TimeGrid::new(32, 1.0).unwrap();
        let (lags, _) = beta_lag_weights(alpha0, &grid).unwrap();
        let c = 0.73;
        for n in [1usize, 7, 32] {
            let discrete: f64 = (1..=n).map(|j| lags[n - j] * c * grid.node(j)).sum();
            let exact = c * b2(alpha0, grid.node(n));
            let rel = ((discrete - exact) / exact).abs();
            assert!(rel <= 1e-11, "alpha0 = {alpha0}, n = {n}: relative error {rel}");
        }
    }
    println!("[PASS] criterion 7: product rule exact on linear histories to 1e-11");
}

#[test]
fn criterion_8_oracle_equivalence() {
    for (example, alpha0) in [(1u8, 0.7), (2u8, 0.9), (3u8, 0.1)] {
        let problem = preset_problem(example, alpha0).unwrap();
        for (n, m) in [(2usize, 3usize), (4, 4), (8, 8)] {
            let fast = solve_all(&problem, n, m).unwrap();
            let slow = dense_oracle_solve(&problem, n, m).unwrap();
            let mut worst = 0.0_f64;
            for (a, b) in fast.w.iter().zip(&slow.w) {
                for (x, y) in a.iter().zip(b) {
                    worst = worst.max((x - y).abs());
                }
            }
            assert!(
                worst <= 1e-10,
                "example {example}, (N, M) = ({n}, {m}): max |fast - oracle| = {worst:e}"
            );
        }
    }
    println!("[PASS] criterion 8: fast solver matches the dense oracle to 1e-10 on all examples");
}

#[test]
fn criterion_9_deterministic_reports() {
    let config = time_config(1, 0.7);
    let first = render_csv(&convergence_study(&config).unwrap());
    let second = render_csv(&convergence_study(&config).unwrap());
    assert_eq!(first.as_bytes(), second.as_bytes());
    println!("[PASS] criterion 9: repeated studies render byte-identical CSV");
}
