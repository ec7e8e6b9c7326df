//! Breakpoints of the gain ratio and the resulting channel classification.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::{g1, g2, hull_envelope, Orientation};
use crate::error::{invalid, Result};
use crate::model::{optimal_on_probability, PbcParams, Receiver};
use crate::regions::Frame;

/// Gain-ratio thresholds for fixed dark currents `s1 <= s2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoints {
    pub alpha4: f64,
    pub alpha3: f64,
    pub alpha23: f64,
    pub alpha2: f64,
    pub alpha12: f64,
    pub alpha1: f64,
}

impl Breakpoints {
    pub fn as_array(&self) -> [f64; 6] {
        [self.alpha4, self.alpha3, self.alpha23, self.alpha2, self.alpha12, self.alpha1]
    }
}

pub fn breakpoints(s1: f64, s2: f64) -> Result<Breakpoints> {
    if !(s1 >= 0.0 && s1.is_finite() && s2.is_finite()) {
        return Err(invalid("s1", format!("dark currents must be finite and >= 0, got ({s1}, {s2})")));
    }
    if s1 > s2 {
        return Err(invalid("s2", format!("expected s1 <= s2, got ({s1}, {s2})")));
    }
    Ok(breakpoints_unchecked(s1, s2))
}

pub(crate) fn breakpoints_unchecked(s1: f64, s2: f64) -> Breakpoints {
    if s1 == s2 {
        return Breakpoints {
            alpha4: 1.0,
            alpha3: 1.0,
            alpha23: 1.0,
            alpha2: 1.0,
            alpha12: 1.0,
            alpha1: 1.0,
        };
    }
    let q1 = optimal_on_probability(s1);
    let q2 = optimal_on_probability(s2);
    Breakpoints {
        alpha4: s1 / s2,
        alpha3: g1(0.0, s1, s2),
        alpha23: g2(q1, s1, s2),
        alpha2: g2(1.0, s1, s2),
        alpha12: g1(q2, s1, s2),
        alpha1: (1.0 + s1) / (1.0 + s2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Degraded,
    LessNoisy,
    MoreCapable,
    EffectivelyLessNoisy,
    StrongerConditionOptimal,
    Unresolved,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Degraded => "degraded",
            Verdict::LessNoisy => "less-noisy",
            Verdict::MoreCapable => "more-capable",
            Verdict::EffectivelyLessNoisy => "effectively-less-noisy",
            Verdict::StrongerConditionOptimal => "stronger-condition-optimal",
            Verdict::Unresolved => "unresolved",
        })
    }
}

/// Classes the stronger receiver belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Memberships {
    pub degraded: bool,
    pub less_noisy: bool,
    pub more_capable: bool,
    pub effectively_less_noisy: bool,
}

/// Interval of the canonical gain ratio that decided the verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakpointInterval {
    pub lower: f64,
    pub upper: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelClass {
    pub verdict: Verdict,
    /// Caller label of the receiver that decodes both messages.
    pub stronger_receiver: Option<Receiver>,
    pub witness: BreakpointInterval,
    pub memberships: Memberships,
    /// Set when a stronger-condition evaluation could not decide.
    pub inconclusive: bool,
}

impl ChannelClass {
    /// Whether superposition coding is known to achieve capacity.
    pub fn superposition_optimal(&self) -> bool {
        self.verdict != Verdict::Unresolved
    }
}

impl fmt::Display for ChannelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.verdict)?;
        if let Some(r) = self.stronger_receiver {
            write!(f, " (receiver {})", r.number())?;
        }
        write!(f, " on {}", self.witness.label)
    }
}

fn interval(lower: f64, upper: f64, label: &str) -> BreakpointInterval {
    BreakpointInterval {
        lower,
        upper,
        label: label.to_string(),
    }
}

/// Classifies a channel by comparing its gain ratio with the breakpoints.
///
/// Boundary values go to the stronger class. Gain ratios strictly between
/// `alpha23` and `alpha2` come back [`Verdict::Unresolved`]; see
/// [`classify_with_stronger`].
pub fn classify(params: &PbcParams) -> ChannelClass {
    let bp = breakpoints_unchecked(params.s1, params.s2);
    let a = params.alpha;
    let m = |degraded, less_noisy, more_capable, effectively_less_noisy| Memberships {
        degraded,
        less_noisy,
        more_capable,
        effectively_less_noisy,
    };
    let (verdict, strong, witness, memberships) = if a >= 1.0 {
        (Verdict::Degraded, Some(Receiver::One), interval(1.0, f64::INFINITY, "[1, inf)"), m(true, true, true, true))
    } else if params.s1 == params.s2 {
        // identical dark currents: receiver 1 is a thinned copy of receiver 2
        (Verdict::Degraded, Some(Receiver::Two), interval(0.0, 1.0, "[0, 1)"), m(true, true, true, true))
    } else if a >= bp.alpha1 {
        (Verdict::LessNoisy, Some(Receiver::One), interval(bp.alpha1, 1.0, "[alpha1, 1)"), m(false, true, true, true))
    } else if a >= bp.alpha12 {
        (
            Verdict::MoreCapable,
            Some(Receiver::One),
            interval(bp.alpha12, bp.alpha1, "[alpha12, alpha1)"),
            m(false, false, true, true),
        )
    } else if a >= bp.alpha2 {
        (
            Verdict::MoreCapable,
            Some(Receiver::One),
            interval(bp.alpha2, bp.alpha12, "[alpha2, alpha12)"),
            m(false, false, true, false),
        )
    } else if a <= bp.alpha4 {
        (Verdict::LessNoisy, Some(Receiver::Two), interval(0.0, bp.alpha4, "[0, alpha4]"), m(false, true, true, true))
    } else if a <= bp.alpha3 {
        (
            Verdict::MoreCapable,
            Some(Receiver::Two),
            interval(bp.alpha4, bp.alpha3, "(alpha4, alpha3]"),
            m(false, false, true, true),
        )
    } else if a <= bp.alpha23 {
        (
            Verdict::EffectivelyLessNoisy,
            Some(Receiver::Two),
            interval(bp.alpha3, bp.alpha23, "(alpha3, alpha23]"),
            m(false, false, false, true),
        )
    } else {
        (
            Verdict::Unresolved,
            None,
            interval(bp.alpha23, bp.alpha2, "(alpha23, alpha2)"),
            Memberships::default(),
        )
    };
    ChannelClass {
        verdict,
        stronger_receiver: strong.map(|r| params.published(r)),
        witness,
        memberships,
        inconclusive: false,
    }
}

/// [`classify`], resolving the `(alpha23, alpha2)` band with
/// [`stronger_condition_check`] on a `grid_size`-point weight grid.
pub fn classify_with_stronger(params: &PbcParams, grid_size: usize) -> Result<ChannelClass> {
    let mut class = classify(params);
    if class.verdict != Verdict::Unresolved {
        return Ok(class);
    }
    let report = stronger_condition_check(params, grid_size)?;
    if let Some(r) = report.optimal_receiver() {
        class.verdict = Verdict::StrongerConditionOptimal;
        class.stronger_receiver = Some(r);
    } else {
        class.inconclusive = report.inconclusive();
    }
    Ok(class)
}

/// Effectively-less-noisy verdict per receiver, caller labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ElnVerdict {
    pub receiver1: bool,
    pub receiver2: bool,
}

impl ElnVerdict {
    fn publish(params: &PbcParams, canon1: bool, canon2: bool) -> Self {
        if params.swapped {
            Self {
                receiver1: canon2,
                receiver2: canon1,
            }
        } else {
            Self {
                receiver1: canon1,
                receiver2: canon2,
            }
        }
    }
}

/// Threshold form: canonical receiver 1 iff `alpha >= alpha12`, receiver 2
/// iff `alpha <= alpha23`.
pub fn effectively_less_noisy_check(params: &PbcParams) -> ElnVerdict {
    let bp = breakpoints_unchecked(params.s1, params.s2);
    ElnVerdict::publish(params, params.alpha >= bp.alpha12, params.alpha <= bp.alpha23)
}

/// Envelope form: the sampled envelope of `I1 - I2` must coincide with the
/// difference on `[0, q2]` (receiver 1), and that of `I2 - I1` on `[q1, 1]`
/// (receiver 2). Uses a 4097-point hull with the interval endpoint inserted.
pub fn effectively_less_noisy_by_envelope(params: &PbcParams) -> ElnVerdict {
    let q1 = optimal_on_probability(params.s1);
    let q2 = optimal_on_probability(params.s2);
    let check = |orientation: Orientation, lo: f64, hi: f64, pin: f64| {
        let mut xs: Vec<f64> = (0..4097).map(|i| i as f64 / 4096.0).collect();
        xs.push(pin);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let sign = if orientation == Orientation::OneMinusTwo { 1.0 } else { -1.0 };
        let samples: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| (x, sign * (params.rate(Receiver::One, x) - params.rate(Receiver::Two, x))))
            .collect();
        let env = hull_envelope(&samples).expect("grid is sorted");
        let tol = 1e-12 * params.scale * (1.0 + params.alpha);
        env.q
            .iter()
            .zip(env.value.iter().zip(&env.raw))
            .filter(|(&x, _)| x >= lo && x <= hi)
            .all(|(_, (v, r))| v - r <= tol)
    };
    if params.s1 == params.s2 {
        return ElnVerdict::publish(params, params.alpha >= 1.0, params.alpha <= 1.0);
    }
    ElnVerdict::publish(
        params,
        check(Orientation::OneMinusTwo, 0.0, q2, q2),
        check(Orientation::TwoMinusOne, q1, 1.0, q1),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

/// Stronger-condition evaluation for one choice of stronger receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongerCheck {
    pub outcome: Outcome,
    /// Smallest `I(U;Y_s) - I(U;Y_w)` over the grid.
    pub min_margin: f64,
    pub worst_lambda: f64,
    /// Grid weights at which the weighted-sum maximizer was not isolated.
    pub nonunique: usize,
}

/// Both orientations, caller labels: `receiver1` treats receiver 1 as the
/// receiver that decodes both messages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongerConditionReport {
    pub grid_size: usize,
    pub receiver1: StrongerCheck,
    pub receiver2: StrongerCheck,
}

impl StrongerConditionReport {
    pub fn optimal_receiver(&self) -> Option<Receiver> {
        if self.receiver1.outcome == Outcome::Holds {
            Some(Receiver::One)
        } else if self.receiver2.outcome == Outcome::Holds {
            Some(Receiver::Two)
        } else {
            None
        }
    }

    pub fn holds(&self) -> bool {
        self.optimal_receiver().is_some()
    }

    pub fn inconclusive(&self) -> bool {
        !self.holds()
            && (self.receiver1.outcome == Outcome::Inconclusive || self.receiver2.outcome == Outcome::Inconclusive)
    }
}

/// Margin below which the less-noisy inequality counts as violated.
pub const STRONGER_TOL: f64 = 1e-9;

/// Checks, for each `lambda` on a uniform grid of `[0, 1]`, that the input
/// maximizing `I_w(p) + C[lambda I_s - I_w](p)` satisfies
/// `I(U;Y_s) >= I(U;Y_w)`.
///
/// Weights where the maximizer is not isolated (objective flat to 1e-13
/// across `p* +- 1e-5`) are counted in `nonunique`; a violation seen only at
/// such weights yields [`Outcome::Inconclusive`].
pub fn stronger_condition_check(params: &PbcParams, grid_size: usize) -> Result<StrongerConditionReport> {
    if grid_size < 2 {
        return Err(invalid("lambda_grid_size", format!("need at least 2 points, got {grid_size}")));
    }
    let one = orientation_check(params, Receiver::One, grid_size);
    let two = orientation_check(params, Receiver::Two, grid_size);
    Ok(StrongerConditionReport {
        grid_size,
        receiver1: one,
        receiver2: two,
    })
}

fn orientation_check(params: &PbcParams, strong: Receiver, n: usize) -> StrongerCheck {
    let frame = Frame::new(params, strong);
    let tol = STRONGER_TOL * params.scale;
    let rows: Vec<(f64, f64, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lambda = i as f64 / (n - 1) as f64;
            let w = frame.superposition_max(lambda);
            let (us, uw) = frame.cloud_rates(&w.decomposition);
            let env = frame.envelope(lambda, 1.0);
            let obj = |p: f64| frame.i_w(p) + env.eval(p);
            let h = 1e-5;
            let flat = [w.p_star - h, w.p_star + h]
                .iter()
                .filter(|x| (0.0..=1.0).contains(*x))
                .any(|&x| obj(x) >= w.value - 1e-13);
            (lambda, us - uw, flat)
        })
        .collect();
    let mut worst = (f64::INFINITY, 0.0);
    let mut fails_unique = false;
    let mut fails_flat = false;
    for &(lambda, margin, flat) in &rows {
        if margin < worst.0 {
            worst = (margin, lambda);
        }
        if margin < -tol {
            if flat {
                fails_flat = true;
            } else {
                fails_unique = true;
            }
        }
    }
    let outcome = if fails_unique {
        Outcome::Fails
    } else if fails_flat {
        Outcome::Inconclusive
    } else {
        Outcome::Holds
    };
    StrongerCheck {
        outcome,
        min_margin: worst.0,
        worst_lambda: worst.1,
        nonunique: rows.iter().filter(|r| r.2).count(),
    }
}

/// Effectively-less-noisy thresholds under an average-power constraint
/// `E[X] <= sigma`, on the canonical gain ratio `params.alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AvgPowerThresholds {
    pub sigma: f64,
    /// Canonical receiver 1 is effectively less noisy iff `alpha >= threshold1`.
    pub threshold1: f64,
    /// Canonical receiver 2 is effectively less noisy iff `alpha <= threshold2`.
    pub threshold2: f64,
    /// Verdicts in caller labels.
    pub verdict: ElnVerdict,
}

pub fn classify_avg_power(params: &PbcParams, sigma: f64) -> Result<AvgPowerThresholds> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(invalid("sigma", format!("must lie in (0, 1], got {sigma}")));
    }
    let (s1, s2) = (params.s1, params.s2);
    let threshold1 = g1(sigma.min(optimal_on_probability(s2)), s1, s2);
    let threshold2 = g2(sigma.min(optimal_on_probability(s1)), s1, s2);
    Ok(AvgPowerThresholds {
        sigma,
        threshold1,
        threshold2,
        verdict: ElnVerdict::publish(params, params.alpha >= threshold1, params.alpha <= threshold2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(alpha: f64, s1: f64, s2: f64) -> PbcParams {
        PbcParams::new(alpha, s1, s2).unwrap()
    }

    #[test]
    fn reference_breakpoints() {
        let b = breakpoints(0.1, 1.0).unwrap();
        assert!((b.alpha4 - 0.1).abs() < 1e-15);
        assert!((b.alpha1 - 0.55).abs() < 1e-15);
        assert!((b.alpha23 - 0.27).abs() < 0.005);
        assert!((b.alpha2 - 0.40).abs() < 0.005);
        assert!((b.alpha3 - 0.235_878).abs() < 1e-6);
        assert!((b.alpha12 - 0.444_417).abs() < 1e-6);
        assert_eq!(breakpoints(0.7, 0.7).unwrap().as_array(), [1.0; 6]);
        assert_eq!(breakpoints(0.0, 0.0).unwrap().as_array(), [1.0; 6]);
        assert!(breakpoints(1.0, 0.1).is_err());
    }

    #[test]
    fn alpha3_from_its_defining_logs() {
        // g1(0) written out without the L helper
        let (s1, s2): (f64, f64) = (0.1, 1.0);
        let num = (1.0 + s2) * ((1.0 + s2) / s2).ln() - 1.0;
        let den = (1.0 + s1) * ((1.0 + s1) / s1).ln() - 1.0;
        assert!((breakpoints(s1, s2).unwrap().alpha3 - num / den).abs() < 1e-14);
    }

    #[test]
    fn verdicts_on_reference_channel() {
        let c = classify(&p(1.2, 0.1, 1.0));
        assert_eq!((c.verdict, c.stronger_receiver), (Verdict::Degraded, Some(Receiver::One)));
        let c = classify(&p(0.28, 0.1, 1.0));
        assert_eq!(c.verdict, Verdict::Unresolved);
        assert_eq!(c.witness.label, "(alpha23, alpha2)");
        let c = classify(&p(0.25, 0.1, 1.0));
        assert_eq!((c.verdict, c.stronger_receiver), (Verdict::EffectivelyLessNoisy, Some(Receiver::Two)));
        assert!(!c.memberships.more_capable);
        let c = classify(&p(0.5, 0.1, 1.0));
        assert_eq!(c.verdict, Verdict::MoreCapable);
        assert!(c.memberships.effectively_less_noisy);
        let c = classify(&p(0.42, 0.1, 1.0));
        assert!(!c.memberships.effectively_less_noisy);
        assert_eq!(classify(&p(0.05, 0.1, 1.0)).verdict, Verdict::LessNoisy);
    }

    #[test]
    fn swapped_receivers_are_relabelled() {
        let direct = classify(&PbcParams::from_gains(0.5, 1.0, 0.1, 1.0).unwrap());
        let mirrored = classify(&PbcParams::from_gains(1.0, 0.5, 1.0, 0.1).unwrap());
        assert_eq!(direct.verdict, mirrored.verdict);
        assert_eq!(direct.stronger_receiver, Some(Receiver::One));
        assert_eq!(mirrored.stronger_receiver, Some(Receiver::Two));
    }

    #[test]
    fn eln_boundaries_are_inclusive() {
        let b = breakpoints(0.1, 1.0).unwrap();
        for (alpha, r1, r2) in [(b.alpha12, true, false), (b.alpha23, false, true), (0.5 * b.alpha4, false, true)] {
            let params = p(alpha, 0.1, 1.0);
            let t = effectively_less_noisy_check(&params);
            let e = effectively_less_noisy_by_envelope(&params);
            assert_eq!((t.receiver1, t.receiver2), (r1, r2), "alpha={alpha}");
            assert_eq!(t, e, "alpha={alpha}");
        }
    }

    #[test]
    fn stronger_condition_band() {
        let r = stronger_condition_check(&p(0.28, 0.1, 1.0), 201).unwrap();
        assert_eq!(r.optimal_receiver(), Some(Receiver::Two));
        let r = stronger_condition_check(&p(0.34, 0.1, 1.0), 201).unwrap();
        assert!(!r.holds());
        assert_eq!(r.receiver2.outcome, Outcome::Fails);
        let r = stronger_condition_check(&p(0.5, 0.1, 1.0), 51).unwrap();
        assert_eq!(r.optimal_receiver(), Some(Receiver::One));
        let c = classify_with_stronger(&p(0.28, 0.1, 1.0), 201).unwrap();
        assert_eq!(c.verdict, Verdict::StrongerConditionOptimal);
    }

    #[test]
    fn average_power_thresholds() {
        let params = p(0.3, 0.1, 1.0);
        let b = breakpoints(0.1, 1.0).unwrap();
        let t = classify_avg_power(&params, 1.0).unwrap();
        assert!((t.threshold1 - b.alpha12).abs() < 1e-15);
        assert!((t.threshold2 - b.alpha23).abs() < 1e-15);
        let q1 = optimal_on_probability(0.1);
        let t = classify_avg_power(&params, q1).unwrap();
        assert!((t.threshold2 - 0.270_089).abs() < 1e-6);
        // g2 increases, so a tighter power cap lowers the receiver-2 threshold
        let t = classify_avg_power(&params, 0.2).unwrap();
        let (s1, s2): (f64, f64) = (0.1, 1.0);
        let direct = (0.2 - s2 * (0.2 / s2).ln_1p()) / (0.2 - s1 * (0.2 / s1).ln_1p());
        assert!((t.threshold2 - direct).abs() < 1e-12);
        assert!(t.threshold2 < b.alpha23);
        assert!(!t.verdict.receiver2);
        assert!(classify_avg_power(&p(0.5 * t.threshold2, 0.1, 1.0), 0.2).unwrap().verdict.receiver2);
        assert!(classify_avg_power(&params, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn breakpoint_ordering(a in 1e-3f64..10.0, b in 1e-3f64..10.0) {
            let (s1, s2) = if a <= b { (a, b) } else { (b, a) };
            let v = breakpoints(s1, s2).unwrap().as_array();
            for w in v.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-10, "{v:?}");
            }
        }

        #[test]
        fn implication_chain(alpha in 0.0f64..1.5, s1 in 0.0f64..3.0, ds in 0.01f64..3.0) {
            let params = p(alpha, s1, s1 + ds);
            let c = classify(&params);
            let m = c.memberships;
            prop_assert!(!m.degraded || m.less_noisy);
            prop_assert!(!m.less_noisy || (m.more_capable && m.effectively_less_noisy));
            if c.stronger_receiver == Some(Receiver::One) && m.effectively_less_noisy {
                prop_assert!(m.more_capable);
            }
            prop_assert_eq!(c.verdict == Verdict::Unresolved, c.stronger_receiver.is_none());
        }

        #[test]
        fn threshold_and_envelope_agree(alpha in 0.0f64..1.2, s1 in 0.01f64..3.0, ds in 0.05f64..3.0) {
            let params = p(alpha, s1, s1 + ds);
            let b = breakpoints(params.s1, params.s2).unwrap();
            prop_assume!((alpha - b.alpha12).abs() > 1e-3 && (alpha - b.alpha23).abs() > 1e-3);
            prop_assert_eq!(effectively_less_noisy_check(&params), effectively_less_noisy_by_envelope(&params));
        }
    }
}
