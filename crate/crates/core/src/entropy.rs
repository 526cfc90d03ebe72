//! Phi-entropies and their inequality family, evaluated exactly on the
//! one-point state space.
//!
//! When the ground space is a single site, a Poisson process is just a
//! Poisson count `eta` and a functional is a function of that count. Every
//! expectation becomes a truncated series against the Poisson weights, so
//! entropy inequalities can be asserted to 1e-10 instead of at Monte Carlo
//! confidence. [`CountModel`] is that engine; the checks on it cover the
//! modified Phi-Sobolev inequality, its power-function specialization, the
//! Poincare and modified log-Sobolev endpoints, and the Beckner form.

use std::fmt;
use std::sync::Arc;

use num::rational::Ratio;
use thiserror::Error;

use crate::calculus::InequalityReport;
use crate::numeric::{neg, pos};

/// Exact rational scalar for the atom-count parts of variance proxies.
pub type Rational = Ratio<i128>;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("power entropy ratio must lie strictly inside (1, 2), got {0}")]
    RatioOutOfRange(f64),
    #[error("{phi} needs a nonnegative functional; {label} is {value} at count {count}")]
    NegativeValue {
        phi: String,
        label: String,
        value: f64,
        count: u64,
    },
}

/// The convex functions Phi generating the entropies in scope.
///
/// `Ent_Phi(F) = E[Phi(F)] - Phi(E[F])`. The admissible class consists of
/// convex functions whose inverse second derivative is concave; the three
/// registered shapes are `x log x`, the powers `x^{2/r}` with `r` strictly
/// between 1 and 2, and affine functions (which generate zero entropy).
#[derive(Clone, Debug)]
pub enum PhiFunction {
    XLogX,
    /// `Phi(x) = x^{2/r}`; the exponent `p = 2/r` lies in (1, 2).
    PowerRatio { r: f64 },
    Affine { slope: f64, intercept: f64 },
}

impl PhiFunction {
    /// Power-function entropy generator; rejects ratios outside (1, 2).
    pub fn power_ratio(r: f64) -> Result<Self, EntropyError> {
        if !(r > 1.0 && r < 2.0) {
            return Err(EntropyError::RatioOutOfRange(r));
        }
        Ok(PhiFunction::PowerRatio { r })
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            PhiFunction::XLogX => {
                if x == 0.0 {
                    0.0
                } else {
                    x * x.ln()
                }
            }
            PhiFunction::PowerRatio { r } => x.powf(2.0 / r),
            PhiFunction::Affine { slope, intercept } => slope * x + intercept,
        }
    }

    /// First derivative. For the power functions the derivative at 0 is
    /// defined as 0, which extends the Phi-Sobolev integrand to functionals
    /// that vanish with positive probability. For `x log x` the derivative
    /// diverges to negative infinity at 0 and callers must handle that case.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            PhiFunction::XLogX => {
                if x == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    x.ln() + 1.0
                }
            }
            PhiFunction::PowerRatio { r } => {
                let p = 2.0 / r;
                if x == 0.0 {
                    0.0
                } else {
                    p * x.powf(p - 1.0)
                }
            }
            PhiFunction::Affine { slope, .. } => *slope,
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match self {
            PhiFunction::XLogX => 1.0 / x,
            PhiFunction::PowerRatio { r } => {
                let p = 2.0 / r;
                p * (p - 1.0) * x.powf(p - 2.0)
            }
            PhiFunction::Affine { .. } => 0.0,
        }
    }

    /// Whether `Ent_Phi` is only defined for nonnegative functionals.
    pub fn requires_nonnegative(&self) -> bool {
        !matches!(self, PhiFunction::Affine { .. })
    }

    /// Grid check of membership in the admissible class: strict convexity
    /// and concavity of `1/Phi''` on the sampled points. Affine functions
    /// are admissible by convention (their entropy vanishes identically).
    pub fn is_admissible_on(&self, grid: &[f64]) -> bool {
        if matches!(self, PhiFunction::Affine { .. }) {
            return true;
        }
        let inv_curv: Vec<f64> = grid.iter().map(|&x| 1.0 / self.second_derivative(x)).collect();
        for window in grid.windows(3).zip(inv_curv.windows(3)) {
            let ([x0, x1, x2], [g0, g1, g2]) = window else {
                unreachable!()
            };
            if self.second_derivative(*x1) <= 0.0 {
                return false;
            }
            // Concavity: g1 lies on or above the chord from (x0,g0) to (x2,g2).
            let chord = g0 + (g2 - g0) * (x1 - x0) / (x2 - x0);
            if *g1 < chord - 1e-9 * (1.0 + g1.abs()) {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiFunction::XLogX => write!(f, "x-log-x"),
            PhiFunction::PowerRatio { r } => write!(f, "power[r={r}]"),
            PhiFunction::Affine { slope, intercept } => {
                write!(f, "affine[{slope},{intercept}]")
            }
        }
    }
}

/// The Phi-Sobolev integrand `Phi(a) - Phi(b) - Phi'(b)(a - b)` for an
/// add-one move from value `b` to value `a`, with the conventions spelled
/// out on [`PhiFunction::derivative`]: the term is exactly 0 when `a == b`,
/// and `x log x` at `b == 0` with a nonzero move yields positive infinity.
pub fn sobolev_integrand(phi: &PhiFunction, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if b == 0.0 && matches!(phi, PhiFunction::XLogX) {
        return f64::INFINITY;
    }
    phi.value(a) - phi.value(b) - phi.derivative(b) * (a - b)
}

/// `psi(a) = (3p-1)a^p + (2p+1)b^p - 2p a b^{p-1} - 3p b a^{p-1}`, the
/// pointwise gap between the Beckner integrand and the Phi-Sobolev
/// integrand for `Phi(x) = x^p`. Nonnegative for `p` in (1, 2] with its
/// unique zero at `a = b`, which is what makes the Beckner form a
/// consequence of the Phi-Sobolev inequality.
pub fn psi_nonneg(a: f64, b: f64, p: f64) -> f64 {
    (3.0 * p - 1.0) * a.powf(p) + (2.0 * p + 1.0) * b.powf(p)
        - 2.0 * p * a * b.powf(p - 1.0)
        - 3.0 * p * b * a.powf(p - 1.0)
}

/// The Beckner right-hand integrand `(6/r)(a - b)(a^{p-1} - b^{p-1})`,
/// `p = 2/r`, for an add-one move from `b` to `a`.
pub fn beckner_integrand(a: f64, b: f64, r: f64) -> f64 {
    let p = 2.0 / r;
    3.0 * p * (a - b) * (a.powf(p - 1.0) - b.powf(p - 1.0))
}

/// A functional of a Poisson count with an exact series engine behind it.
///
/// `eta` is Poisson with mean `lambda` and `F = f(eta)`. Expectations are
/// truncated series over the Poisson weights; the truncation level comes
/// from `lambda`, and the declared polynomial growth degree of `|f|` and
/// every series evaluation verifies a geometric bound on its neglected
/// tail, aborting if the bound exceeds 1e-12 relative to the sum.
#[derive(Clone)]
pub struct CountModel {
    label: String,
    lambda: f64,
    f: Arc<dyn Fn(u64) -> f64 + Send + Sync>,
    growth_degree: u32,
    rational_gap: Option<Arc<dyn Fn(u64) -> Rational + Send + Sync>>,
    truncation: u64,
}

impl fmt::Debug for CountModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CountModel")
            .field("label", &self.label)
            .field("lambda", &self.lambda)
            .field("growth_degree", &self.growth_degree)
            .field("truncation", &self.truncation)
            .finish()
    }
}

impl CountModel {
    pub fn new(
        label: impl Into<String>,
        lambda: f64,
        growth_degree: u32,
        f: impl Fn(u64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        assert!(
            lambda > 0.0 && lambda.is_finite(),
            "count model needs a positive finite mean, got {lambda}"
        );
        let truncation = truncation_level(lambda, growth_degree);
        CountModel {
            label: label.into(),
            lambda,
            f: Arc::new(f),
            growth_degree,
            rational_gap: None,
            truncation,
        }
    }

    /// Attaches exact rational increments `f(k) - f(k-1)` (defined for
    /// `k >= 1`), unlocking the exact variance-proxy path.
    pub fn with_rational_gap(
        mut self,
        gap: impl Fn(u64) -> Rational + Send + Sync + 'static,
    ) -> Self {
        self.rational_gap = Some(Arc::new(gap));
        self
    }

    /// Overrides the truncation level; used by the self-consistency oracle
    /// that recomputes every quantity at doubled depth.
    pub fn with_truncation(mut self, truncation: u64) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn value(&self, k: u64) -> f64 {
        (self.f)(k)
    }

    /// `E[g(eta)]` as a truncated series. Aborts when the geometric tail
    /// bound at the truncation level is not negligible; that means the
    /// level is too small for this `lambda` and integrand, never that the
    /// answer should be trusted less.
    pub fn expectation(&self, g: impl Fn(u64) -> f64) -> f64 {
        let k_max = self.truncation;
        let mut weight = (-self.lambda).exp();
        let mut sum = weight * g(0);
        for k in 1..=k_max {
            weight *= self.lambda / k as f64;
            sum += weight * g(k);
        }
        // One pmf step past the truncation level: the weight ratio is
        // lambda/(k+1), and a polynomial integrand of the declared degree
        // grows by at most ((k+1)/k)^degree per step.
        let step = self.lambda / (k_max + 1) as f64
            * ((k_max + 1) as f64 / k_max as f64).powi(self.growth_degree as i32);
        let last = weight * (1.0 + g(k_max).abs());
        assert!(
            step < 1.0,
            "{}: truncation level {} cannot bound the series tail at lambda {}",
            self.label,
            k_max,
            self.lambda
        );
        let tail_bound = last * step / (1.0 - step);
        assert!(
            tail_bound <= 1e-12 * (1.0 + sum.abs()),
            "{}: neglected series tail may reach {tail_bound:.3e} at truncation level {}",
            self.label,
            k_max
        );
        sum
    }

    pub fn mean(&self) -> f64 {
        self.expectation(|k| self.value(k))
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.expectation(|k| {
            let d = self.value(k) - mean;
            d * d
        })
    }

    /// Rejects models taking negative values (below the truncation level)
    /// under a Phi that needs nonnegativity.
    fn require_nonnegative(&self, phi_name: impl Into<String>) -> Result<(), EntropyError> {
        for k in 0..=self.truncation {
            let value = self.value(k);
            if value < 0.0 {
                return Err(EntropyError::NegativeValue {
                    phi: phi_name.into(),
                    label: self.label.clone(),
                    value,
                    count: k,
                });
            }
        }
        Ok(())
    }

    /// `Ent_Phi(F) = E[Phi(F)] - Phi(E[F])`, exactly.
    pub fn phi_entropy(&self, phi: &PhiFunction) -> Result<f64, EntropyError> {
        if phi.requires_nonnegative() {
            self.require_nonnegative(phi.to_string())?;
        }
        Ok(self.expectation(|k| phi.value(self.value(k))) - phi.value(self.mean()))
    }

    /// Modified Phi-Sobolev inequality:
    /// `Ent_Phi(F) <= E[ integral of (D_x Phi(F) - Phi'(F) D_x F) d mu ]`.
    /// On the one-point space the intensity integral is `lambda` times the
    /// single add-one term.
    pub fn check_phi_sobolev(&self, phi: &PhiFunction) -> Result<InequalityReport, EntropyError> {
        let lhs = self.phi_entropy(phi)?;
        let rhs = self.lambda
            * self.expectation(|k| sobolev_integrand(phi, self.value(k + 1), self.value(k)));
        Ok(InequalityReport::new(
            format!("phi-sobolev[{phi}] {}", self.label),
            lhs,
            rhs,
            1e-10,
        ))
    }

    /// Modified log-Sobolev inequality: the Phi-Sobolev check at `x log x`.
    pub fn check_log_sobolev(&self) -> Result<InequalityReport, EntropyError> {
        self.check_phi_sobolev(&PhiFunction::XLogX)
    }

    /// Poincare inequality `Var(F) <= E[ integral of (D_x F)^2 d mu ]`.
    pub fn check_poincare(&self) -> InequalityReport {
        let lhs = self.variance();
        let rhs = self.lambda
            * self.expectation(|k| {
                let d = self.value(k + 1) - self.value(k);
                d * d
            });
        InequalityReport::new(format!("poincare {}", self.label), lhs, rhs, 1e-10)
    }

    /// Beckner inequality
    /// `Ent_r(F) <= (6/r) E[ integral of (D_x F)(D_x F^{2/r-1}) d mu ]`
    /// for `r` in (1, 2).
    pub fn check_beckner(&self, r: f64) -> Result<InequalityReport, EntropyError> {
        let phi = PhiFunction::power_ratio(r)?;
        let lhs = self.phi_entropy(&phi)?;
        let rhs = self.lambda
            * self.expectation(|k| beckner_integrand(self.value(k + 1), self.value(k), r));
        Ok(InequalityReport::new(
            format!("beckner[r={r}] {}", self.label),
            lhs,
            rhs,
            1e-10,
        ))
    }

    /// `V^+` at count `k`: the intensity part clips the negative add-one
    /// move, the atom part clips the positive remove-one move.
    pub fn vplus_at(&self, k: u64) -> f64 {
        let up = neg(self.value(k + 1) - self.value(k));
        let down = if k == 0 {
            0.0
        } else {
            pos(self.value(k) - self.value(k - 1))
        };
        self.lambda * up * up + k as f64 * down * down
    }

    /// `V^-` at count `k`: the clippings of `V^+` swapped.
    pub fn vminus_at(&self, k: u64) -> f64 {
        let up = pos(self.value(k + 1) - self.value(k));
        let down = if k == 0 {
            0.0
        } else {
            neg(self.value(k) - self.value(k - 1))
        };
        self.lambda * up * up + k as f64 * down * down
    }

    /// Unclipped `V` at count `k`; equals `V^+ + V^-` pointwise.
    pub fn vtotal_at(&self, k: u64) -> f64 {
        let up = self.value(k + 1) - self.value(k);
        let down = if k == 0 {
            0.0
        } else {
            self.value(k) - self.value(k - 1)
        };
        self.lambda * up * up + k as f64 * down * down
    }

    /// Exact `V^+` at count `k`, available when rational increments are
    /// attached and the add-one increment is nonnegative (so the intensity
    /// part vanishes exactly and no irrational `lambda` enters). Returns
    /// `None` otherwise.
    pub fn vplus_exact(&self, k: u64) -> Option<Rational> {
        let gap = self.rational_gap.as_ref()?;
        let up = gap(k + 1);
        if up < Rational::from_integer(0) {
            return None;
        }
        let down = if k == 0 {
            Rational::from_integer(0)
        } else {
            let d = gap(k);
            if d > Rational::from_integer(0) {
                d
            } else {
                Rational::from_integer(0)
            }
        };
        Some(Rational::from_integer(k as i128) * down * down)
    }
}

/// Truncation level `max(60, ceil(lambda + 12 sqrt(lambda) + 12 degree))`:
/// Poisson tails decay faster than any polynomial can grow, and twelve
/// standard deviations of margin push the neglected mass far below the
/// 1e-12 budget that every series evaluation re-verifies.
pub fn truncation_level(lambda: f64, growth_degree: u32) -> u64 {
    let level = (lambda + 12.0 * lambda.sqrt() + 12.0 * growth_degree as f64).ceil() as u64;
    level.max(60)
}

/// Plug-in Phi-entropy of a sample with a jackknife standard error.
/// The leave-one-out values recompute both moments in O(1) from running
/// sums, so the whole estimate is linear in the sample size.
pub fn phi_entropy_from_samples(
    samples: &[f64],
    phi: &PhiFunction,
) -> Result<(f64, f64), EntropyError> {
    if phi.requires_nonnegative() {
        if let Some((k, &value)) = samples
            .iter()
            .enumerate()
            .find(|(_, &x)| x < 0.0)
        {
            return Err(EntropyError::NegativeValue {
                phi: phi.to_string(),
                label: "sample".into(),
                value,
                count: k as u64,
            });
        }
    }
    let n = samples.len();
    assert!(n >= 2, "jackknife needs at least two samples");
    let sum: f64 = samples.iter().sum();
    let sum_phi: f64 = samples.iter().map(|&x| phi.value(x)).sum();
    let estimate = sum_phi / n as f64 - phi.value(sum / n as f64);
    let mut loo = Vec::with_capacity(n);
    for &x in samples {
        let m = (n - 1) as f64;
        loo.push((sum_phi - phi.value(x)) / m - phi.value((sum - x) / m));
    }
    let loo_mean = loo.iter().sum::<f64>() / n as f64;
    let var: f64 = loo
        .iter()
        .map(|&v| (v - loo_mean) * (v - loo_mean))
        .sum::<f64>();
    let se = ((n - 1) as f64 / n as f64 * var).sqrt();
    Ok((estimate, se))
}

/// Largest `m` with `m^5 <= k`.
fn integer_fifth_root(k: u64) -> u64 {
    let mut m = (k as f64).powf(0.2).round() as u64;
    while m > 0 && fifth_power(m) > k {
        m -= 1;
    }
    while fifth_power(m + 1) <= k {
        m += 1;
    }
    m
}

fn fifth_power(m: u64) -> u64 {
    let m = m as u128;
    let p = m * m * m * m * m;
    u64::try_from(p).unwrap_or(u64::MAX)
}

/// Partial sums of `1/j` up to `n_max`, shared by the closures of
/// [`harmonic_model`] so each evaluation is O(1).
fn harmonic_table(n_max: u64) -> Arc<Vec<f64>> {
    let mut table = Vec::with_capacity(n_max as usize + 1);
    table.push(0.0);
    let mut sum = 0.0;
    for j in 1..=n_max {
        sum += 1.0 / j as f64;
        table.push(sum);
    }
    Arc::new(table)
}

/// `F(k) = sum_{j<=k} 1/j`, nondecreasing with increment `1/k`, so its
/// `V^+` at count `k >= 1` is exactly `1/k`. Rational increments attached.
pub fn harmonic_model(lambda: f64) -> CountModel {
    let depth = truncation_level(lambda, 1).saturating_mul(2) + 2;
    let table = harmonic_table(depth.max(100_002));
    CountModel::new("harmonic-sum", lambda, 1, move |k| {
        table[usize::try_from(k).expect("count exceeds harmonic table")]
    })
    .with_rational_gap(|k| Rational::new(1, k as i128))
}

/// Bounded staircase `F(k) = sum_{j<=floor(k^{1/5})} 1/j^2`: flat except at
/// perfect fifth powers `k = m^5`, where it steps by `1/m^2`, so its `V^+`
/// there is exactly `m^5 (1/m^2)^2 = m`.
pub fn staircase_model(lambda: f64) -> CountModel {
    CountModel::new("bounded-staircase", lambda, 0, |k| {
        let m = integer_fifth_root(k);
        (1..=m).map(|j| 1.0 / (j * j) as f64).sum()
    })
    .with_rational_gap(|k| {
        let m = integer_fifth_root(k);
        if fifth_power(m) == k {
            Rational::new(1, (m * m) as i128)
        } else {
            Rational::from_integer(0)
        }
    })
}

/// The standard battery of count functionals the inequality grids run
/// over: linear, capped, harmonic, concave root, and a strictly positive
/// bounded one. All are nonnegative; the last is bounded away from zero,
/// so it exercises the log-Sobolev path without the infinite-slack
/// convention.
pub fn battery_models(lambda: f64) -> Vec<CountModel> {
    vec![
        CountModel::new("count", lambda, 1, |k| k as f64),
        CountModel::new("capped-count", lambda, 0, |k| k.min(10) as f64),
        harmonic_model(lambda),
        CountModel::new("sqrt-shift", lambda, 1, |k| ((k + 1) as f64).sqrt()),
        CountModel::new("exp-decay-shift", lambda, 0, |k| (-(k as f64)).exp() + 1.0),
    ]
}
