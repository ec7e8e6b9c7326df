//! Channel parametrization and the per-unit-time mutual-information rates of
//! the Poisson broadcast channel under a Bernoulli (on/off) input.
//!
//! Each receiver `i` sees a Poisson process of rate `A_i (x(t) + s_i)`. After
//! normalizing by `A_2` the channel is described by the gain ratio
//! `alpha = A_1 / A_2` and the two dark-current rates; all rates are in nats
//! per unit time and carry the `scale = A_2` multiplier.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::special::{binary_entropy, neg_log1m_minus};

/// Receiver label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Receiver {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Receiver {
    pub fn other(self) -> Self {
        match self {
            Receiver::One => Receiver::Two,
            Receiver::Two => Receiver::One,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Receiver::One => 1,
            Receiver::Two => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Receiver::One),
            2 => Some(Receiver::Two),
            _ => None,
        }
    }
}

/// Canonical channel triple `(alpha, s1, s2)` with `s1 <= s2`, plus the
/// common rate multiplier.
///
/// The fields always describe the canonical orientation. When the caller's
/// receivers arrive with `s1 > s2` they are exchanged and `swapped` is set;
/// the label-taking functions in this crate ([`mutual_info_rate`],
/// [`optimal_input`], the classification and region results) translate back
/// through that flag so callers only ever see their own labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PbcParams {
    pub alpha: f64,
    pub s1: f64,
    pub s2: f64,
    pub scale: f64,
    pub swapped: bool,
}

impl PbcParams {
    /// Channel with gains `(alpha, 1)` and dark currents `(s1, s2)`.
    pub fn new(alpha: f64, s1: f64, s2: f64) -> Result<Self> {
        Self::from_gains(alpha, 1.0, s1, s2)
    }

    /// Channel with raw gains `(a1, a2)`.
    pub fn from_gains(a1: f64, a2: f64, s1: f64, s2: f64) -> Result<Self> {
        for (name, v) in [("a1", a1), ("a2", a2), ("s1", s1), ("s2", s2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        let (g_weak, g_strong, swapped) = if s1 <= s2 {
            (a1, a2, false)
        } else {
            (a2, a1, true)
        };
        if g_strong <= 0.0 {
            let name = if swapped { "a1" } else { "a2" };
            return Err(invalid(name, "gain of the noisier receiver must be positive"));
        }
        let (c1, c2) = if swapped { (s2, s1) } else { (s1, s2) };
        Ok(Self {
            alpha: g_weak / g_strong,
            s1: c1,
            s2: c2,
            scale: g_strong,
            swapped,
        })
    }

    /// Copy with a different canonical gain ratio.
    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    /// Canonical label of the caller's receiver `r`.
    pub fn canonical(&self, r: Receiver) -> Receiver {
        if self.swapped {
            r.other()
        } else {
            r
        }
    }

    /// Caller label of the canonical receiver `r` (the map is an involution).
    pub fn published(&self, r: Receiver) -> Receiver {
        self.canonical(r)
    }

    /// `(gain, dark current)` of the caller's receiver `r`.
    pub fn receiver(&self, r: Receiver) -> (f64, f64) {
        match self.canonical(r) {
            Receiver::One => (self.alpha * self.scale, self.s1),
            Receiver::Two => (self.scale, self.s2),
        }
    }

    /// Gain multiplying `phi(q, s)` for the canonical receiver `r`.
    pub fn canonical_gain(&self, r: Receiver) -> f64 {
        match r {
            Receiver::One => self.alpha * self.scale,
            Receiver::Two => self.scale,
        }
    }

    pub fn canonical_dark(&self, r: Receiver) -> f64 {
        match r {
            Receiver::One => self.s1,
            Receiver::Two => self.s2,
        }
    }

    /// Rate `I_r(q)` of the canonical receiver `r`.
    pub fn rate(&self, r: Receiver, q: f64) -> f64 {
        self.canonical_gain(r) * unit_rate(q, self.canonical_dark(r))
    }

    /// Single-user capacity `max_q I_r(q)` of the canonical receiver `r`.
    pub fn capacity(&self, r: Receiver) -> f64 {
        let s = self.canonical_dark(r);
        self.rate(r, optimal_on_probability(s))
    }
}

/// Bernoulli input law: the probability that the input is on.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct InputDist(f64);

impl InputDist {
    pub fn new(q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid("q", format!("must lie in [0, 1], got {q}")));
        }
        Ok(Self(q))
    }

    pub fn q(self) -> f64 {
        self.0
    }
}

/// `phi(q, s) = -(q+s) ln(q+s) + q (1+s) ln(1+s) + (1-q) s ln s`, the rate of
/// a unit-gain receiver with dark current `s`, written in the equivalent form
/// `q (1+s) ln(1 + 1/s) - (q+s) ln(1 + q/s)` which avoids cancellation near
/// `q = 0`.
pub fn unit_rate(q: f64, s: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    if s == 0.0 {
        return -q * q.ln();
    }
    q * (1.0 + s) * (1.0 / s).ln_1p() - (q + s) * (q / s).ln_1p()
}

/// First and second derivative of [`unit_rate`] in `q`.
fn unit_rate_derivs(q: f64, s: f64) -> (f64, f64) {
    let d1 = if s == 0.0 {
        -q.ln() - 1.0
    } else {
        (1.0 + s) * (1.0 / s).ln_1p() - (q / s).ln_1p() - 1.0
    };
    (d1, -1.0 / (q + s))
}

/// Maximizer of `phi(., s)`: `(1+s)^(1+s) / (e s^s) - s`, equal to `1/e` at `s = 0`.
pub fn optimal_on_probability(s: f64) -> f64 {
    if s == 0.0 {
        return (-1.0f64).exp();
    }
    // (1+s) ln(1 + 1/s) - 1 = L(w) / w with w = 1/(1+s)
    let w = 1.0 / (1.0 + s);
    s * (neg_log1m_minus(w) / w).exp_m1()
}

/// `I_which(q)` in nats per unit time for the caller's receiver `which`.
pub fn mutual_info_rate(which: Receiver, q: InputDist, params: &PbcParams) -> f64 {
    params.rate(params.canonical(which), q.q())
}

/// Capacity-achieving input for the caller's receiver `which`.
pub fn optimal_input(which: Receiver, params: &PbcParams) -> InputDist {
    let (_, s) = params.receiver(which);
    InputDist(optimal_on_probability(s))
}

/// `(I'_which(q), I''_which(q))`.
///
/// Rejected at the endpoints `q in {0, 1}` when the receiver has no dark
/// current.
pub fn mutual_info_derivs(which: Receiver, q: InputDist, params: &PbcParams) -> Result<(f64, f64)> {
    let (gain, s) = params.receiver(which);
    let q = q.q();
    if s == 0.0 && (q == 0.0 || q == 1.0) {
        return Err(Error::Domain { q });
    }
    let (d1, d2) = unit_rate_derivs(q, s);
    Ok((gain * d1, gain * d2))
}

/// Transition probabilities of the slotted binary channel with slot width
/// `delta`: `P(count | off) = a_i`, `P(count | on) = b_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryApprox {
    pub delta: f64,
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl BinaryApprox {
    fn probs(&self, which: Receiver) -> (f64, f64) {
        match which {
            Receiver::One => (self.a1, self.b1),
            Receiver::Two => (self.a2, self.b2),
        }
    }

    /// Exact `I(X; Y_which) / delta` of the slotted binary channel for a
    /// `Bernoulli(q)` input.
    pub fn mutual_info_rate(&self, which: Receiver, q: InputDist) -> f64 {
        let (a, b) = self.probs(which);
        let q = q.q();
        let out = a + q * (b - a);
        let info = binary_entropy(out) - q * binary_entropy(b) - (1.0 - q) * binary_entropy(a);
        info / self.delta
    }
}

/// First-order slotted approximation `a_i = A_i s_i delta`, `b_i = A_i (1 + s_i) delta`,
/// in the caller's receiver labels.
pub fn binary_approx(params: &PbcParams, delta: f64) -> Result<BinaryApprox> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", format!("must be positive, got {delta}")));
    }
    let (g1, s1) = params.receiver(Receiver::One);
    let (g2, s2) = params.receiver(Receiver::Two);
    let approx = BinaryApprox {
        delta,
        a1: g1 * s1 * delta,
        a2: g2 * s2 * delta,
        b1: g1 * (1.0 + s1) * delta,
        b2: g2 * (1.0 + s2) * delta,
    };
    for prob in [approx.b1, approx.b2] {
        if prob > 1.0 {
            return Err(Error::SlotTooWide { delta, prob });
        }
    }
    Ok(approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(alpha: f64, s1: f64, s2: f64) -> PbcParams {
        PbcParams::new(alpha, s1, s2).unwrap()
    }

    fn q(x: f64) -> InputDist {
        InputDist::new(x).unwrap()
    }

    /// Textbook form with explicit `x ln x` terms, kept apart from the
    /// rearranged production formula.
    fn textbook_rate(q: f64, s: f64) -> f64 {
        use crate::special::xlogx;
        -xlogx(q + s) + q * (1.0 + s) * (1.0 + s).ln() + (1.0 - q) * xlogx(s)
    }

    #[test]
    fn rates_vanish_on_deterministic_inputs() {
        let params = p(0.7, 0.3, 1.0);
        assert_eq!(mutual_info_rate(Receiver::One, q(0.0), &params), 0.0);
        assert_eq!(mutual_info_rate(Receiver::Two, q(1.0), &p(1.0, 0.0, 1.0)), 0.0);
    }

    #[test]
    fn rate_at_half_matches_reference_value() {
        let v = mutual_info_rate(Receiver::One, q(0.5), &p(1.0, 0.1, 1.0));
        assert!((v - 0.243_786_718_502_270_9).abs() < 1e-12, "{v}");
        assert!((v - textbook_rate(0.5, 0.1)).abs() < 1e-14);
    }

    #[test]
    fn maximizer_closed_form() {
        assert!((optimal_on_probability(0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((optimal_on_probability(1.0) - (4.0 / std::f64::consts::E - 1.0)).abs() < 1e-14);
        assert!((optimal_on_probability(0.1) - 0.414_324_806_976_952_2).abs() < 1e-12);
        // swapped labels follow the caller
        let params = p(0.5, 1.0, 0.1);
        assert!(params.swapped);
        assert!((optimal_input(Receiver::Two, &params).q() - 0.414_324_806_976_952_2).abs() < 1e-12);
    }

    #[test]
    fn first_derivative_vanishes_at_maximizer() {
        for s in [0.0, 0.1, 1.0, 7.0] {
            let params = p(1.0, s, s.max(1.0));
            let qs = optimal_input(Receiver::One, &params);
            let (d1, d2) = mutual_info_derivs(Receiver::One, qs, &params).unwrap();
            assert!(d1.abs() < 1e-12, "s={s}: {d1}");
            assert!(d2 < 0.0);
        }
    }

    #[test]
    fn second_derivative_difference_matches_closed_form() {
        let params = p(0.4, 0.1, 1.0);
        let kappa = (params.alpha * params.s2 - params.s1) / (1.0 - params.alpha);
        for x in [0.05, 0.2, kappa, 0.7, 0.95] {
            let (_, d1) = mutual_info_derivs(Receiver::One, q(x), &params).unwrap();
            let (_, d2) = mutual_info_derivs(Receiver::Two, q(x), &params).unwrap();
            let expected = ((params.alpha - 1.0) * x + params.alpha * params.s2 - params.s1)
                / ((x + params.s1) * (x + params.s2));
            assert!((d2 - d1 - expected).abs() < 1e-13);
        }
        let (_, d1) = mutual_info_derivs(Receiver::One, q(kappa), &params).unwrap();
        let (_, d2) = mutual_info_derivs(Receiver::Two, q(kappa), &params).unwrap();
        assert!((d2 - d1).abs() < 1e-13);
    }

    #[test]
    fn second_derivative_matches_finite_differences() {
        // Terms linear in q drop out of a central second difference, leaving
        // -[(x+h)ln(x+h) + (x-h)ln(x-h) - 2x ln x] at x = q + s, which is
        // evaluated through ln_1p to keep the h = 1e-5 stencil free of
        // cancellation.
        let params = p(1.0, 0.1, 1.0);
        let (x, h): (f64, f64) = (0.5 + 1.0, 1e-5);
        let u = h / x;
        let second = -(x * ((u).ln_1p() + (-u).ln_1p()) + h * ((u).ln_1p() - (-u).ln_1p()));
        let fd = second / (h * h);
        let (_, d2) = mutual_info_derivs(Receiver::Two, q(0.5), &params).unwrap();
        assert!((fd - d2).abs() < 1e-6, "{fd} vs {d2}");
    }

    #[test]
    fn endpoint_derivatives_rejected_without_dark_current() {
        let params = p(1.0, 0.0, 1.0);
        assert!(matches!(
            mutual_info_derivs(Receiver::One, q(0.0), &params),
            Err(Error::Domain { .. })
        ));
        assert!(mutual_info_derivs(Receiver::One, q(1.0), &params).is_err());
        assert!(mutual_info_derivs(Receiver::Two, q(0.0), &params).is_ok());
    }

    #[test]
    fn slotted_probabilities() {
        let b = binary_approx(&p(1.0, 0.0, 1.0), 1e-3).unwrap();
        assert_eq!(b.a1, 0.0);
        assert!((b.b1 - 1e-3).abs() < 1e-18);
        let b = binary_approx(&p(0.5, 0.1, 1.0), 1e-2).unwrap();
        assert!((b.a1 - 5e-4).abs() < 1e-16);
        assert!((b.b1 - 5.5e-3).abs() < 1e-16);
        assert!(matches!(
            binary_approx(&p(1.0, 0.1, 1.0), 0.6),
            Err(Error::SlotTooWide { .. })
        ));
    }

    #[test]
    fn slotted_rate_converges_monotonically() {
        let params = p(0.8, 0.2, 1.0);
        for x in [0.1, 0.3, 0.5, 0.9] {
            let mut last = f64::INFINITY;
            for k in 2..=6 {
                let b = binary_approx(&params, 10f64.powi(-k)).unwrap();
                let err = (b.mutual_info_rate(Receiver::Two, q(x))
                    - mutual_info_rate(Receiver::Two, q(x), &params))
                .abs();
                assert!(err < last, "q={x} k={k}: {err} !< {last}");
                last = err;
            }
            assert!(last < 1e-4);
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(PbcParams::new(-1.0, 0.1, 1.0).is_err());
        assert!(PbcParams::new(1.0, f64::NAN, 1.0).is_err());
        assert!(PbcParams::from_gains(1.0, 0.0, 0.1, 1.0).is_err());
        assert!(InputDist::new(1.5).is_err());
    }

    proptest! {
        #[test]
        fn scale_covariance(a1 in 0.01f64..5.0, a2 in 0.01f64..5.0, s1 in 0.0f64..3.0, s2 in 0.0f64..3.0, x in 0.0f64..1.0) {
            let raw = PbcParams::from_gains(a1, a2, s1, s2).unwrap();
            let norm = PbcParams::from_gains(a1 / a2, 1.0, s1, s2).unwrap();
            for r in [Receiver::One, Receiver::Two] {
                let lhs = mutual_info_rate(r, q(x), &raw);
                let rhs = a2 * mutual_info_rate(r, q(x), &norm);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn rates_strictly_concave(s in 0.0f64..10.0, x in 0.001f64..0.999) {
            let params = p(1.0, s, s + 1.0);
            let (_, d2) = mutual_info_derivs(Receiver::One, q(x), &params).unwrap();
            prop_assert!(d2 < 0.0);
            prop_assert!((unit_rate(x, s) - textbook_rate(x, s)).abs() < 1e-12);
        }
    }
}
