//! Small numeric helpers shared across modules.

/// Natural log of the gamma function, Lanczos approximation (g = 7, n = 9).
///
/// Absolute error below 1e-13 for x > 0, which is plenty for the rejection
/// sampler and log-binomial weights that call it.
pub fn ln_gamma(x: f64) -> f64 {
    // Coefficients from Godfrey's tabulation of the Lanczos series.
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection Gamma(x)Gamma(1-x) = pi / sin(pi x) keeps the series
        // argument away from the poles.
        let pi = std::f64::consts::PI;
        return pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// ln(k!) for integer k.
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        0.0
    } else {
        ln_gamma(k as f64 + 1.0)
    }
}

/// Volume of the unit ball in `R^dim`: pi^{dim/2} / Gamma(dim/2 + 1).
///
/// Exact closed forms for the dimensions this crate supports (`dim <= 7`),
/// the gamma expression above that.
pub fn unit_ball_volume(dim: usize) -> f64 {
    use std::f64::consts::PI;
    match dim {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        4 => PI * PI / 2.0,
        5 => 8.0 * PI * PI / 15.0,
        6 => PI * PI * PI / 6.0,
        7 => 16.0 * PI * PI * PI / 105.0,
        _ => {
            let d = dim as f64;
            (d / 2.0 * PI.ln() - ln_gamma(d / 2.0 + 1.0)).exp()
        }
    }
}

/// Surface content of the unit sphere boundary in `R^dim`: dim * v_dim.
pub fn unit_sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

/// Positive part, `max(x, 0)`.
#[inline]
pub fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Negative part with the sign convention `x_- = min(x, 0)`, so `neg(x) <= 0`
/// and `x = pos(x) + neg(x)`; squares satisfy `x^2 = pos(x)^2 + neg(x)^2`.
#[inline]
pub fn neg(x: f64) -> f64 {
    x.min(0.0)
}

/// Mean and standard error of the mean. Returns `(0, 0)` on empty input so
/// callers can treat "no samples" as a degenerate exact zero.
pub fn mean_se(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = ss / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// Upper Clopper-Pearson confidence limit for a binomial proportion:
/// the largest `p` such that observing `successes` or fewer out of `n` still
/// has probability at least `1 - level`. Used with `level = 0.99`.
pub fn binomial_upper_limit(successes: u64, n: u64, level: f64) -> f64 {
    use statrs::distribution::{Beta, ContinuousCDF};
    assert!(n > 0 && successes <= n);
    if successes == n {
        return 1.0;
    }
    let beta = Beta::new(successes as f64 + 1.0, (n - successes) as f64)
        .expect("valid beta parameters");
    beta.inverse_cdf(level)
}
