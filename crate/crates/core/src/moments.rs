//! Explicit moment and tail bounds driven by the variance proxies, plus
//! verification harnesses.
//!
//! The chain is: the recursive L^p estimate bounds growth of centered
//! moments in terms of `V^+`, closing the recursion gives moment bounds
//! with the explicit constant `kappa`, and Markov plus moment optimization
//! gives sub-Gaussian tails with constant `log(2)/(8 kappa)`. Everything
//! here is checked exactly on [`CountModel`]s and empirically through
//! [`verify_tail`].

use rayon::prelude::*;
use thiserror::Error;

use crate::calculus::InequalityReport;
use crate::entropy::CountModel;
use crate::numeric::{binomial_upper_limit, mean_se, neg, pos};
use crate::process::poisson_count;
use crate::stream::RandomStream;

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("one-sided tail bound is only asserted for t >= {threshold:.6}, got t = {t}")]
    BelowValidity { t: f64, threshold: f64 },
}

/// `kappa_p = (1/2) (1 - (1 - 1/p)^{p/2})^{-1}`, strictly increasing in
/// `p > 1`, from 1/2 at `p -> 1` up to the limit [`kappa_limit`].
pub fn kappa_p(p: f64) -> f64 {
    assert!(p > 1.0, "kappa_p needs p > 1, got {p}");
    0.5 / (1.0 - (1.0 - 1.0 / p).powf(p / 2.0))
}

/// `kappa = sqrt(e) / (2 (sqrt(e) - 1))`, the supremum of `kappa_p`.
pub fn kappa_limit() -> f64 {
    let s = 0.5f64.exp();
    s / (2.0 * (s - 1.0))
}

/// The constants of the sub-Gaussian tail bounds.
#[derive(Clone, Copy, Debug)]
pub struct ConcentrationConstants {
    /// `kappa`, about 1.2707470.
    pub kappa: f64,
    /// One-sided exponent `log(2)/(8 kappa)`, about 0.0681830.
    pub one_sided: f64,
    /// Two-sided exponent `log(2)/(16 kappa)`, exactly half the one-sided.
    pub two_sided: f64,
    /// Validity threshold `4 sqrt(kappa)` of the one-sided bounds at unit
    /// proxy level, about 4.5090967.
    pub threshold: f64,
}

pub fn concentration_constants() -> ConcentrationConstants {
    let kappa = kappa_limit();
    ConcentrationConstants {
        kappa,
        one_sided: 2f64.ln() / (8.0 * kappa),
        two_sided: 2f64.ln() / (16.0 * kappa),
        threshold: 4.0 * kappa.sqrt(),
    }
}

/// Which centered part a moment statement addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentSide {
    Plus,
    Minus,
    TwoSided,
}

/// Closed-form centered moment bound: `sqrt(2 kappa p v_norm)` for the
/// positive and negative parts (with `v_norm` the `p/2`-norm of `V^+`
/// resp. `V^-`), and `sqrt(8 kappa p v_norm)` two-sided (with `V`). The
/// same bounds circulate in the literature with `sqrt(6 kappa)` in place
/// of both `sqrt(2 kappa)` and `sqrt(8 kappa)`.
pub fn moment_bound(p: f64, v_norm: f64, side: MomentSide) -> f64 {
    assert!(p >= 2.0, "moment bounds start at p = 2, got {p}");
    assert!(v_norm >= 0.0, "proxy norm must be nonnegative, got {v_norm}");
    let kappa = kappa_limit();
    match side {
        MomentSide::Plus | MomentSide::Minus => (2.0 * kappa * p * v_norm).sqrt(),
        MomentSide::TwoSided => (8.0 * kappa * p * v_norm).sqrt(),
    }
}

/// `|| pos(F - mean) ||_q` on the exact engine.
fn clipped_norm(model: &CountModel, mean: f64, q: f64, side: MomentSide) -> f64 {
    model
        .expectation(|k| {
            let d = model.value(k) - mean;
            let part = match side {
                MomentSide::Plus => pos(d),
                MomentSide::Minus => -neg(d),
                MomentSide::TwoSided => d.abs(),
            };
            part.powf(q)
        })
        .powf(1.0 / q)
}

/// `|| V^side ||_q` on the exact engine.
fn proxy_norm(model: &CountModel, q: f64, side: MomentSide) -> f64 {
    model
        .expectation(|k| {
            let v = match side {
                MomentSide::Plus => model.vplus_at(k),
                MomentSide::Minus => model.vminus_at(k),
                MomentSide::TwoSided => model.vtotal_at(k),
            };
            v.powf(q)
        })
        .powf(1.0 / q)
}

/// Exact check of the closed-form moment bound on a count model.
pub fn verify_moment_bound(model: &CountModel, p: f64, side: MomentSide) -> InequalityReport {
    assert!(p >= 2.0, "moment bounds start at p = 2, got {p}");
    let mean = model.mean();
    let lhs = clipped_norm(model, mean, p, side);
    let rhs = moment_bound(p, proxy_norm(model, p / 2.0, side), side);
    let side_name = match side {
        MomentSide::Plus => "plus",
        MomentSide::Minus => "minus",
        MomentSide::TwoSided => "two-sided",
    };
    InequalityReport::new(
        format!("moment-bound[p={p},{side_name}] {}", model.label()),
        lhs,
        rhs,
        1e-10,
    )
}

/// Exact check of the recursive L^p estimate
/// `||pos||_p^p <= ||pos||_{p-1}^p + (p-1) ||V^+||_{p/2} ||pos||_p^{p-2}`
/// with `pos = (F - E[F])_+`. The left side minus the first right-hand
/// term is the power entropy of `pos^{p-1}` at ratio `2 - 2/p`, which ties
/// this recursion to the Phi-Sobolev family.
pub fn recursive_lp_check(model: &CountModel, p: f64) -> InequalityReport {
    assert!(p >= 2.0, "the recursion is used from p = 2 upward, got {p}");
    let mean = model.mean();
    let norm_p = clipped_norm(model, mean, p, MomentSide::Plus);
    let norm_prev = clipped_norm(model, mean, p - 1.0, MomentSide::Plus);
    let lhs = norm_p.powf(p);
    let rhs = norm_prev.powf(p)
        + (p - 1.0) * proxy_norm(model, p / 2.0, MomentSide::Plus) * norm_p.powf(p - 2.0);
    InequalityReport::new(
        format!("recursive-lp[p={p}] {}", model.label()),
        lhs,
        rhs,
        1e-10,
    )
}

/// Self-bounding moment bound: when `V^+ <= c F^alpha` almost surely with
/// `alpha` in [0, 2), the positive part satisfies
/// `||.||_p <= 2 sqrt(2 c kappa p) mean^{alpha/2} + (8 c kappa p)^{1/(2-alpha)}`.
pub fn self_bounding_moment_bound(p: f64, c_sb: f64, alpha: f64, mean_f: f64) -> f64 {
    assert!(p >= 2.0, "moment bounds start at p = 2, got {p}");
    assert!((0.0..2.0).contains(&alpha), "alpha must lie in [0, 2), got {alpha}");
    assert!(c_sb >= 0.0 && mean_f >= 0.0, "coefficient and mean must be nonnegative");
    let kappa = kappa_limit();
    2.0 * (2.0 * c_sb * kappa * p).sqrt() * mean_f.powf(alpha / 2.0)
        + (8.0 * c_sb * kappa * p).powf(1.0 / (2.0 - alpha))
}

/// A tail statement to verify: which deviation event, the certified
/// almost-sure proxy level behind it, and the bound's constants.
#[derive(Clone, Debug)]
pub enum BoundSpec {
    /// `P(F - E[F] >= t) <= exp(-c t^2 / L)` given `V^+ <= L` a.s.;
    /// asserted for `t >= 4 sqrt(kappa L)`.
    UpperTail { level: f64 },
    /// `P(F - E[F] <= -t) <= exp(-c t^2 / L)` given `V^- <= L` a.s.;
    /// asserted for `t >= 4 sqrt(kappa L)`.
    LowerTail { level: f64 },
    /// `P(|F - E[F]| >= t) <= 2 exp(-c t^2 / (2L))` given `V <= L` a.s.,
    /// for every `t >= 0`.
    TwoSided { level: f64 },
    /// `P(|F - E[F]| >= t) <= 2 exp(-C min(t^2 / (c mean^alpha), t^{2-alpha}/c))`
    /// given `V^+ <= c F^alpha` a.s. The absolute constant `C` is not
    /// pinned down by the theory here; it is caller-supplied and every
    /// report carries an "unverified constant" annotation.
    SelfBounding {
        coeff: f64,
        alpha: f64,
        constant: f64,
        mean: f64,
    },
}

impl BoundSpec {
    /// Smallest `t` at which the bound is asserted.
    pub fn validity_threshold(&self) -> f64 {
        match self {
            BoundSpec::UpperTail { level } | BoundSpec::LowerTail { level } => {
                4.0 * (kappa_limit() * level).sqrt()
            }
            BoundSpec::TwoSided { .. } | BoundSpec::SelfBounding { .. } => 0.0,
        }
    }

    /// Bound value at deviation `t`. Refuses `t` below the validity
    /// threshold rather than extrapolating a statement nobody made.
    pub fn evaluate(&self, t: f64) -> Result<f64, MomentError> {
        let threshold = self.validity_threshold();
        if t < threshold {
            return Err(MomentError::BelowValidity { t, threshold });
        }
        let constants = concentration_constants();
        Ok(match self {
            BoundSpec::UpperTail { level } | BoundSpec::LowerTail { level } => {
                (-constants.one_sided * t * t / level).exp()
            }
            BoundSpec::TwoSided { level } => 2.0 * (-constants.two_sided * t * t / level).exp(),
            BoundSpec::SelfBounding {
                coeff,
                alpha,
                constant,
                mean,
            } => {
                if t == 0.0 {
                    return Ok(2.0);
                }
                let gaussian_arm = t * t / (coeff * mean.powf(*alpha));
                let heavy_arm = t.powf(2.0 - alpha) / coeff;
                2.0 * (-constant * gaussian_arm.min(heavy_arm)).exp()
            }
        })
    }

    /// Whether the verified event is two-sided (`|F - mean| >= t`).
    pub fn two_sided_event(&self) -> bool {
        matches!(
            self,
            BoundSpec::TwoSided { .. } | BoundSpec::SelfBounding { .. }
        )
    }

    pub fn description(&self) -> String {
        match self {
            BoundSpec::UpperTail { level } => format!("upper tail, V+ <= {level}"),
            BoundSpec::LowerTail { level } => format!("lower tail, V- <= {level}"),
            BoundSpec::TwoSided { level } => format!("two-sided tail, V <= {level}"),
            BoundSpec::SelfBounding {
                coeff,
                alpha,
                constant,
                mean,
            } => format!(
                "self-bounding tail, V+ <= {coeff} F^{alpha}, mean {mean:.6}, \
                 unverified constant C = {constant}"
            ),
        }
    }
}

/// One grid point of an empirical tail check. A row is a violation only
/// when it is testable (the bound is not below what `n_reps` replications
/// can resolve) and the 99% upper confidence limit of the empirical tail
/// still exceeds the bound. The sensitivity counts re-evaluate the event
/// with the centering shifted down and up by three standard errors of the
/// estimated mean.
#[derive(Clone, Debug)]
pub struct TailRow {
    pub t: f64,
    pub n_exceed: u64,
    pub empirical: f64,
    pub ci99_upper: f64,
    pub bound: f64,
    pub testable: bool,
    pub violated: bool,
    pub n_exceed_mean_low: u64,
    pub n_exceed_mean_high: u64,
}

#[derive(Clone, Debug)]
pub struct TailReport {
    pub label: String,
    pub spec_description: String,
    pub mean: f64,
    pub mean_se: f64,
    pub n_reps: u64,
    pub rows: Vec<TailRow>,
    pub pass: bool,
}

fn exceedances(samples: &[f64], mean: f64, t: f64, spec: &BoundSpec) -> u64 {
    samples
        .iter()
        .filter(|&&x| match spec {
            BoundSpec::UpperTail { .. } => x - mean >= t,
            BoundSpec::LowerTail { .. } => x - mean <= -t,
            _ => (x - mean).abs() >= t,
        })
        .count() as u64
}

/// Empirical verification of a tail bound on a grid of deviations.
///
/// The centering uses the exact mean when the caller has one; otherwise it
/// is estimated from an independent run ten times larger than the
/// verification run, and each row carries sensitivity counts at the mean
/// shifted by three standard errors. Replications draw from per-index
/// child streams, so the result is independent of thread count.
pub fn verify_tail(
    label: &str,
    sampler: &(dyn Fn(&mut RandomStream) -> f64 + Sync),
    exact_mean: Option<f64>,
    spec: &BoundSpec,
    t_grid: &[f64],
    n_reps: u64,
    stream: &RandomStream,
) -> Result<TailReport, MomentError> {
    for &t in t_grid {
        // Surfaces an out-of-range grid before any sampling runs.
        spec.evaluate(t)?;
    }
    let (mean, mean_se) = match exact_mean {
        Some(m) => (m, 0.0),
        None => {
            let mean_parent = stream.child(0);
            let pilot: Vec<f64> = (0..10 * n_reps)
                .into_par_iter()
                .map(|i| sampler(&mut mean_parent.child(i)))
                .collect();
            mean_se(&pilot)
        }
    };
    let rep_parent = stream.child(1);
    let samples: Vec<f64> = (0..n_reps)
        .into_par_iter()
        .map(|i| sampler(&mut rep_parent.child(i)))
        .collect();
    let rows: Vec<TailRow> = t_grid
        .iter()
        .map(|&t| {
            let n_exceed = exceedances(&samples, mean, t, spec);
            let empirical = n_exceed as f64 / n_reps as f64;
            let ci99_upper = binomial_upper_limit(n_exceed, n_reps, 0.99);
            let bound = spec.evaluate(t).expect("grid validated above");
            let testable = bound >= 5.0 / n_reps as f64;
            TailRow {
                t,
                n_exceed,
                empirical,
                ci99_upper,
                bound,
                testable,
                violated: testable && ci99_upper > bound,
                n_exceed_mean_low: exceedances(&samples, mean - 3.0 * mean_se, t, spec),
                n_exceed_mean_high: exceedances(&samples, mean + 3.0 * mean_se, t, spec),
            }
        })
        .collect();
    let pass = rows.iter().all(|row| !row.violated);
    Ok(TailReport {
        label: label.into(),
        spec_description: spec.description(),
        mean,
        mean_se,
        n_reps,
        rows,
        pass,
    })
}

/// Tail verification for a count model, centered at its exact mean.
pub fn verify_tail_count_model(
    model: &CountModel,
    spec: &BoundSpec,
    t_grid: &[f64],
    n_reps: u64,
    stream: &RandomStream,
) -> Result<TailReport, MomentError> {
    let sampler = move |s: &mut RandomStream| model.value(poisson_count(model.lambda(), s));
    verify_tail(
        model.label(),
        &sampler,
        Some(model.mean()),
        spec,
        t_grid,
        n_reps,
        stream,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{harmonic_model, PhiFunction};

    fn count_model(lambda: f64) -> CountModel {
        CountModel::new("count", lambda, 1, |k| k as f64)
    }

    #[test]
    fn kappa_at_two_is_exactly_one() {
        assert_eq!(kappa_p(2.0), 1.0);
    }

    #[test]
    fn kappa_endpoints_match_closed_forms() {
        // Convergence to 1/2 is only like sqrt(p - 1), so probe very close.
        assert!((kappa_p(1.0 + 1e-8) - 0.5).abs() <= 1e-3);
        assert!((kappa_p(1e6) - 1.270747).abs() <= 1e-5);
        assert!((kappa_limit() - 1.2707470412683992).abs() <= 1e-15);
    }

    #[test]
    fn kappa_is_strictly_increasing_on_a_dense_grid() {
        // Log-spaced grid over (1, 1e4].
        let mut previous = kappa_p(1.0 + 1e-6);
        for i in 1..=10_000 {
            let p = 1.0 + 1e-6 * (1e10f64).powf(i as f64 / 10_000.0);
            let value = kappa_p(p);
            assert!(value > previous, "not increasing at p = {p}");
            previous = value;
        }
        assert!(previous < kappa_limit());
    }

    #[test]
    fn concentration_constants_match_frozen_values() {
        let c = concentration_constants();
        assert!((c.one_sided - 0.06818304096424245).abs() <= 1e-16);
        assert!((c.two_sided - 0.034091520482121225).abs() <= 1e-16);
        assert!((c.threshold - 4.509096656792177).abs() <= 1e-14);
        assert!((c.two_sided - c.one_sided / 2.0).abs() <= 1e-18);
    }

    #[test]
    fn moment_bound_closed_forms() {
        assert_eq!(moment_bound(3.0, 0.0, MomentSide::Plus), 0.0);
        let one_sided = moment_bound(2.0, 1.0, MomentSide::Plus);
        assert!((one_sided - 2.2545483283960883).abs() <= 1e-14);
        let two_sided = moment_bound(2.0, 1.0, MomentSide::TwoSided);
        assert!((two_sided - 2.0 * one_sided).abs() <= 1e-14);
    }

    #[test]
    fn moment_bound_holds_exactly_on_count_models() {
        for &lambda in &[1.0, 5.0] {
            let model = count_model(lambda);
            for &p in &[2.0, 3.0, 4.0] {
                for side in [MomentSide::Plus, MomentSide::Minus, MomentSide::TwoSided] {
                    let report = verify_moment_bound(&model, p, side);
                    assert!(report.pass, "{}: slack {}", report.label, report.slack);
                }
            }
        }
        let capped = CountModel::new("capped", 3.0, 0, |k| k.min(10) as f64);
        assert!(verify_moment_bound(&capped, 2.0, MomentSide::Plus).pass);
    }

    #[test]
    fn moment_bound_is_trivial_for_constants() {
        let model = CountModel::new("const", 2.0, 0, |_| 4.25);
        let report = verify_moment_bound(&model, 2.0, MomentSide::TwoSided);
        assert!(report.lhs.abs() <= 1e-12 && report.rhs.abs() <= 1e-12 && report.pass);
    }

    #[test]
    fn recursion_holds_along_the_chain_and_never_contradicts_closed_form() {
        let model = count_model(1.0);
        for &p in &[2.0, 3.0, 4.0] {
            let recursion = recursive_lp_check(&model, p);
            assert!(recursion.pass && recursion.slack >= 0.0, "{}", recursion.label);
            let closed_form = verify_moment_bound(&model, p, MomentSide::Plus);
            assert!(closed_form.pass && closed_form.slack >= 0.0, "{}", closed_form.label);
        }
    }

    #[test]
    fn recursion_entropy_term_matches_power_entropy_of_clipped_power() {
        // The recursion's left side minus its first term is the power
        // entropy of pos^{p-1} at ratio 2 - 2/p; compute it both ways.
        let model = count_model(1.0);
        let p = 3.0;
        let mean = model.mean();
        let via_norms = clipped_norm(&model, mean, p, MomentSide::Plus).powf(p)
            - clipped_norm(&model, mean, p - 1.0, MomentSide::Plus).powf(p);
        let clipped_power = CountModel::new("pos-power", 1.0, 2, move |k| {
            pos(k as f64 - mean).powf(p - 1.0)
        });
        let phi = PhiFunction::power_ratio(2.0 - 2.0 / p).unwrap();
        let via_entropy = clipped_power.phi_entropy(&phi).unwrap();
        assert!((via_norms - via_entropy).abs() <= 1e-12);
    }

    #[test]
    fn harmonic_proxy_norm_matches_direct_expectation() {
        // V+ of the harmonic sum is 1/k at k >= 1 and 0 at k = 0, so its
        // 1-norm is E[1/eta restricted to eta >= 1].
        let model = harmonic_model(2.0);
        let direct = model.expectation(|k| if k == 0 { 0.0 } else { 1.0 / k as f64 });
        let via_proxy = proxy_norm(&model, 1.0, MomentSide::Plus);
        assert!((direct - via_proxy).abs() <= 1e-14);
        assert!(recursive_lp_check(&model, 2.0).pass);
    }

    #[test]
    fn tail_bound_at_threshold_simplifies_to_one_quarter() {
        let spec = BoundSpec::UpperTail { level: 1.0 };
        let bound = spec.evaluate(spec.validity_threshold()).unwrap();
        assert_eq!(bound, 0.25);
    }

    #[test]
    fn tail_bound_scales_threshold_with_proxy_level() {
        let spec = BoundSpec::LowerTail { level: 4.0 };
        let threshold = spec.validity_threshold();
        assert!((threshold - 2.0 * 4.0 * kappa_limit().sqrt()).abs() <= 1e-12);
        assert_eq!(spec.evaluate(threshold).unwrap(), 0.25);
        assert!(matches!(
            spec.evaluate(threshold - 0.01),
            Err(MomentError::BelowValidity { .. })
        ));
    }

    #[test]
    fn two_sided_bound_is_valid_from_zero_and_halves_the_exponent() {
        let spec = BoundSpec::TwoSided { level: 3.0 };
        assert_eq!(spec.evaluate(0.0).unwrap(), 2.0);
        let constants = concentration_constants();
        let t = 2.5;
        let expected = 2.0 * (-constants.one_sided / 2.0 * t * t / 3.0).exp();
        assert!((spec.evaluate(t).unwrap() - expected).abs() <= 1e-15);
    }

    #[test]
    fn self_bounding_tail_with_zero_alpha_is_pure_gaussian_shape() {
        let spec = BoundSpec::SelfBounding {
            coeff: 2.0,
            alpha: 0.0,
            constant: 0.7,
            mean: 5.0,
        };
        for t in [0.5f64, 1.0, 3.0] {
            let expected = 2.0 * (-0.7 * t * t / 2.0).exp();
            assert!((spec.evaluate(t).unwrap() - expected).abs() <= 1e-15);
        }
        assert!(spec.description().contains("unverified constant"));
    }

    #[test]
    fn self_bounding_moment_bound_closed_forms() {
        assert_eq!(self_bounding_moment_bound(2.0, 0.0, 0.5, 3.0), 0.0);
        let value = self_bounding_moment_bound(2.0, 1.0, 0.0, 9.0);
        assert!((value - 9.018193313584354).abs() <= 1e-14);
        let mut previous = 0.0;
        for i in 0..20 {
            let p = 2.0 + i as f64;
            let value = self_bounding_moment_bound(p, 0.5, 1.2, 4.0);
            assert!(value > previous);
            previous = value;
        }
    }

    #[test]
    fn harmonic_tail_has_no_violations() {
        // V+(k) = 1/k <= 1 and V(k) = lambda gap(k+1)^2 + k gap(k)^2 <= 2
        // at lambda = 2, certified by monotonicity of the gaps.
        let model = harmonic_model(2.0);
        let stream = RandomStream::substream(17, 5);
        let upper = BoundSpec::UpperTail { level: 1.0 };
        let report = verify_tail_count_model(
            &model,
            &upper,
            &[4.51, 5.0, 6.0],
            20_000,
            &stream,
        )
        .unwrap();
        assert!(report.pass, "upper: {:?}", report.rows);
        let two_sided = BoundSpec::TwoSided { level: 2.0 };
        let report = verify_tail_count_model(
            &model,
            &two_sided,
            &[0.5, 1.0, 2.0, 5.0],
            20_000,
            &stream.sibling(6),
        )
        .unwrap();
        assert!(report.pass, "two-sided: {:?}", report.rows);
    }

    #[test]
    fn constant_functional_never_deviates() {
        let model = CountModel::new("const", 2.0, 0, |_| 1.5);
        let stream = RandomStream::substream(17, 7);
        let report = verify_tail_count_model(
            &model,
            &BoundSpec::UpperTail { level: 1.0 },
            &[4.51],
            5_000,
            &stream,
        )
        .unwrap();
        assert_eq!(report.rows[0].n_exceed, 0);
        assert!(report.pass);
    }

    #[test]
    fn estimated_mean_path_reports_sensitivity() {
        let model = count_model(4.0);
        let stream = RandomStream::substream(17, 8);
        let sampler = move |s: &mut RandomStream| model.value(poisson_count(4.0, s));
        let report = verify_tail(
            "count-estimated-mean",
            &sampler,
            None,
            &BoundSpec::TwoSided { level: 9.0 },
            &[1.0, 4.0],
            2_000,
            &stream,
        )
        .unwrap();
        assert!(report.mean_se > 0.0);
        assert!((report.mean - 4.0).abs() <= 5.0 * report.mean_se);
        let row = &report.rows[0];
        // Shifting the center cannot shrink both sensitivity counts below
        // the two-sided count at the center... it can shift them, so just
        // require the columns to be populated and sane.
        assert!(row.n_exceed_mean_low <= report.n_reps);
        assert!(row.n_exceed_mean_high <= report.n_reps);
        assert!(report.pass);
    }

    #[test]
    fn out_of_range_grid_is_rejected_before_sampling() {
        let model = count_model(1.0);
        let stream = RandomStream::substream(17, 9);
        let result = verify_tail_count_model(
            &model,
            &BoundSpec::UpperTail { level: 1.0 },
            &[1.0],
            100,
            &stream,
        );
        assert!(matches!(result, Err(MomentError::BelowValidity { .. })));
    }

    #[test]
    fn untestable_rows_are_flagged_not_failed() {
        let model = count_model(1.0);
        let stream = RandomStream::substream(17, 10);
        // At t = 40 the bound is ~1e-47, far below 5/n.
        let report = verify_tail_count_model(
            &model,
            &BoundSpec::UpperTail { level: 1.0 },
            &[40.0],
            1_000,
            &stream,
        )
        .unwrap();
        assert!(!report.rows[0].testable);
        assert!(!report.rows[0].violated);
        assert!(report.pass);
    }
}
