//! Difference-operator calculus for Poisson functionals.
//!
//! For a functional `F` of a configuration `eta`, the add-one difference is
//! `D_x F = F(eta + delta_x) - F(eta)` and the remove-one difference at an
//! atom `x` of `eta` is `F(eta) - F(eta - delta_x)`. The variance proxies
//! built from clipped squares of these differences are
//!
//! ```text
//! V+ = Integral (D_x F)_-^2 dmu + Sum_{x in eta} (F(eta) - F(eta - delta_x))_+^2
//! V- = Integral (D_x F)_+^2 dmu + Sum_{x in eta} (F(eta) - F(eta - delta_x))_-^2
//! V  = Integral (D_x F)^2  dmu + Sum_{x in eta} (F(eta) - F(eta - delta_x))^2
//! ```
//!
//! with the clipping convention `x_+ = max(x, 0)`, `x_- = min(x, 0)`. The
//! eta-sums are evaluated exactly (they are finite sums over the atoms); the
//! mu-integrals are Monte Carlo averages against the normalized base
//! distribution scaled by the total mass.

use crate::numeric::{mean_se, neg, pos};
use crate::process::{IntensitySpec, Point, PointConfiguration};
use crate::stream::RandomStream;

/// A real-valued functional of a point configuration.
///
/// Implementations must be permutation-invariant in the atoms; evaluation
/// order is a representation detail. `remove_one_diffs` may be overridden
/// with a faster batched path (for hull functionals, removing a non-vertex
/// atom changes nothing); the override is cross-checked against the generic
/// path on a deterministic subsample of calls.
pub trait Functional<M: Clone = ()> {
    fn evaluate(&self, config: &PointConfiguration<M>) -> f64;

    /// `F(eta + delta_x) - F(eta)`.
    fn add_one_diff(&self, config: &PointConfiguration<M>, point: &Point<M>) -> f64 {
        self.evaluate(&config.with_added(point.clone())) - self.evaluate(config)
    }

    /// `F(eta) - F(eta - delta_{x_i})` for the atom at `index`.
    fn remove_one_diff(&self, config: &PointConfiguration<M>, index: usize) -> f64 {
        self.evaluate(config) - self.evaluate(&config.without(index))
    }

    /// All remove-one differences. Override when one shared precomputation
    /// serves every atom; the default just loops.
    fn remove_one_diffs(&self, config: &PointConfiguration<M>) -> Vec<f64> {
        (0..config.len())
            .map(|i| self.remove_one_diff(config, i))
            .collect()
    }

    /// True when `remove_one_diffs` runs a specialized path that should be
    /// spot-checked against the definition.
    fn has_fast_remove_path(&self) -> bool {
        false
    }
}

/// Result of checking an exact pointwise identity.
#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub discrepancy: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityReport {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let discrepancy = (lhs - rhs).abs();
        IdentityReport {
            label: label.into(),
            lhs,
            rhs,
            discrepancy,
            tolerance,
            pass: discrepancy <= tolerance,
        }
    }
}

/// Result of checking a one-sided bound `lhs <= rhs`. Slack is `rhs - lhs`;
/// the check passes when the slack is no worse than `-tolerance`, so an
/// infinite right-hand side passes trivially.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl InequalityReport {
    pub fn new(label: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = rhs - lhs;
        let pass = if rhs == f64::INFINITY && lhs.is_finite() {
            true
        } else {
            slack >= -tolerance
        };
        InequalityReport {
            label: label.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            pass,
        }
    }
}

/// Checks the product rule
/// `D_x(FG) = (D_x F) G(eta) + F(eta) (D_x G) + (D_x F)(D_x G)`
/// at one configuration and one added point. The relative tolerance scales
/// with the magnitude of both sides.
pub fn check_product_rule<M: Clone>(
    f: &dyn Functional<M>,
    g: &dyn Functional<M>,
    config: &PointConfiguration<M>,
    point: &Point<M>,
) -> IdentityReport {
    let extended = config.with_added(point.clone());
    let (f0, g0) = (f.evaluate(config), g.evaluate(config));
    let (f1, g1) = (f.evaluate(&extended), g.evaluate(&extended));
    let (df, dg) = (f1 - f0, g1 - g0);
    let lhs = f1 * g1 - f0 * g0;
    let rhs = df * g0 + f0 * dg + df * dg;
    let tolerance = 1e-10 * (1.0 + lhs.abs() + rhs.abs());
    IdentityReport::new("product rule", lhs, rhs, tolerance)
}

/// Variance proxies of one configuration, split into the exact eta-part and
/// the Monte Carlo mu-part. `v_* = eta_* + mu_*`; the standard errors cover
/// the mu-part only. Estimated from common add-one draws, so the pointwise
/// identity `x^2 = x_+^2 + x_-^2` makes `v_total = v_plus + v_minus` hold
/// exactly and `v_total >= max(v_plus, v_minus)` surely, not just in the
/// mean.
#[derive(Clone, Debug)]
pub struct VarianceProxies {
    pub v_plus: f64,
    pub v_minus: f64,
    pub v_total: f64,
    pub se_plus: f64,
    pub se_minus: f64,
    pub se_total: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub eta_total: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub mu_total: f64,
    pub n_mu_samples: usize,
}

/// Estimates the variance proxies of `f` at `config`.
///
/// The eta-part is the exact finite sum over atoms. The mu-part averages
/// `n_mu_samples` common add-one draws from the intensity's base
/// distribution, scaled by the total mass. When the functional advertises a
/// fast batched remove path, one atom per call (chosen from the stream) is
/// re-evaluated through the definitional path; disagreement is a bug in the
/// functional, so it panics rather than returning corrupt certificates.
pub fn estimate_variance_proxies<M: Clone>(
    f: &dyn Functional<M>,
    config: &PointConfiguration<M>,
    intensity: &IntensitySpec<M>,
    n_mu_samples: usize,
    stream: &mut RandomStream,
) -> VarianceProxies {
    let diffs = f.remove_one_diffs(config);
    assert_eq!(diffs.len(), config.len());
    if f.has_fast_remove_path() && !config.is_empty() {
        let probe = stream.index(config.len());
        let reference = f.remove_one_diff(config, probe);
        let got = diffs[probe];
        assert!(
            (got - reference).abs() <= 1e-9 * (1.0 + reference.abs()),
            "fast remove-one path disagrees with definition at atom {probe}: \
             fast {got}, definition {reference}"
        );
    }

    let eta_plus: f64 = diffs.iter().map(|&d| pos(d) * pos(d)).sum();
    let eta_minus: f64 = diffs.iter().map(|&d| neg(d) * neg(d)).sum();
    let eta_total: f64 = diffs.iter().map(|&d| d * d).sum();

    let lambda = intensity.total_mass();
    let mut sq_neg = Vec::with_capacity(n_mu_samples);
    let mut sq_pos = Vec::with_capacity(n_mu_samples);
    let mut sq_all = Vec::with_capacity(n_mu_samples);
    for _ in 0..n_mu_samples {
        let x = intensity.sample_base_point(stream);
        let d = f.add_one_diff(config, &x);
        sq_neg.push(neg(d) * neg(d));
        sq_pos.push(pos(d) * pos(d));
        sq_all.push(d * d);
    }
    let (m_neg, se_neg) = mean_se(&sq_neg);
    let (m_pos, se_pos) = mean_se(&sq_pos);
    let (m_all, se_all) = mean_se(&sq_all);

    let (mu_plus, mu_minus, mu_total) = (lambda * m_neg, lambda * m_pos, lambda * m_all);
    VarianceProxies {
        v_plus: eta_plus + mu_plus,
        v_minus: eta_minus + mu_minus,
        v_total: eta_total + mu_total,
        se_plus: lambda * se_neg,
        se_minus: lambda * se_pos,
        se_total: lambda * se_all,
        eta_plus,
        eta_minus,
        eta_total,
        mu_plus,
        mu_minus,
        mu_total,
        n_mu_samples,
    }
}

/// Functional counting the atoms, `F(eta) = |eta|`. The simplest linear
/// functional; every difference is exactly one.
pub struct CountFunctional;

impl<M: Clone> Functional<M> for CountFunctional {
    fn evaluate(&self, config: &PointConfiguration<M>) -> f64 {
        config.len() as f64
    }
}

/// Linear functional `F(eta) = sum_{x in eta} g(x)` for a kernel on
/// locations.
pub struct LinearFunctional<G: Fn(&[f64]) -> f64> {
    pub kernel: G,
}

impl<M: Clone, G: Fn(&[f64]) -> f64> Functional<M> for LinearFunctional<G> {
    fn evaluate(&self, config: &PointConfiguration<M>) -> f64 {
        config.iter().map(|p| (self.kernel)(&p.coords)).sum()
    }

    fn remove_one_diffs(&self, config: &PointConfiguration<M>) -> Vec<f64> {
        config.iter().map(|p| (self.kernel)(&p.coords)).collect()
    }

    fn has_fast_remove_path(&self) -> bool {
        true
    }
}
