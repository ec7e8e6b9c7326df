//! Capacity-region boundaries traced through their supporting hyperplanes.
//!
//! All computations run in a "strong frame": the receiver that decodes both
//! messages under superposition coding is `s`, the other is `w`, and the
//! hyperplane is `lambda R_s + R_w`. Results are published in the caller's
//! receiver labels.

use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{classify, ChannelClass};
use crate::envelope::{InputDecomposition, Orientation, PiecewiseEnvelope};
use crate::error::{Error, Result};
use crate::model::{PbcParams, Receiver};
use crate::optim::{golden_max, golden_min};

const P_TOL: f64 = 1e-10;

/// Rate pair in nats per unit time, caller labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub r1: f64,
    pub r2: f64,
}

/// Pareto boundary of a capacity region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBoundary {
    /// Sorted by increasing `r1`.
    pub points: Vec<RatePoint>,
    /// Weight on the stronger receiver's rate in the hyperplane that produced
    /// each point (the weaker receiver's rate has weight 1).
    pub lambdas: Vec<f64>,
    pub strong: Receiver,
    pub regime: ChannelClass,
}

/// Maximizer of a weighted sum rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedSumRate {
    pub lambda: f64,
    pub value: f64,
    /// Mean of the optimal input.
    pub p_star: f64,
    /// Optimal `p(u)`, `p(x | u)`.
    pub decomposition: InputDecomposition,
    pub rates: RatePoint,
}

/// Strong-frame view of a canonical channel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame<'a> {
    params: &'a PbcParams,
    /// Canonical label of the strong receiver.
    strong: Receiver,
}

impl<'a> Frame<'a> {
    /// `strong` in caller labels.
    pub(crate) fn new(params: &'a PbcParams, strong: Receiver) -> Self {
        Self {
            params,
            strong: params.canonical(strong),
        }
    }

    pub(crate) fn i_s(&self, p: f64) -> f64 {
        self.params.rate(self.strong, p)
    }

    pub(crate) fn i_w(&self, p: f64) -> f64 {
        self.params.rate(self.strong.other(), p)
    }

    /// Envelope of `c_s I_s - c_w I_w`.
    pub(crate) fn envelope(&self, c_s: f64, c_w: f64) -> PiecewiseEnvelope {
        let p = self.params;
        match self.strong {
            Receiver::One => PiecewiseEnvelope::from_coefficients(
                Orientation::OneMinusTwo,
                c_s * p.alpha * p.scale,
                c_w * p.scale,
                p.s1,
                p.s2,
            ),
            Receiver::Two => PiecewiseEnvelope::from_coefficients(
                Orientation::TwoMinusOne,
                c_w * p.alpha * p.scale,
                c_s * p.scale,
                p.s1,
                p.s2,
            ),
        }
    }

    /// `(R_s, R_w)` to caller labels.
    pub(crate) fn publish(&self, r_s: f64, r_w: f64) -> RatePoint {
        match self.params.published(self.strong) {
            Receiver::One => RatePoint { r1: r_s, r2: r_w },
            Receiver::Two => RatePoint { r1: r_w, r2: r_s },
        }
    }

    pub(crate) fn capacity_s(&self) -> f64 {
        self.params.capacity(self.strong)
    }

    /// `(I(U;Y_s), I(U;Y_w))` for the input described by `d`.
    pub(crate) fn cloud_rates(&self, d: &InputDecomposition) -> (f64, f64) {
        let p = d.mean();
        (
            self.i_s(p) - d.average(|x| self.i_s(x)),
            self.i_w(p) - d.average(|x| self.i_w(x)),
        )
    }

    /// `max_p I_w(p) + C[lambda I_s - I_w](p)` for `lambda <= 1`.
    pub(crate) fn superposition_max(&self, lambda: f64) -> WeightedSumRate {
        let env = self.envelope(lambda, 1.0);
        let (p_star, value) = golden_max(|p| self.i_w(p) + env.eval(p), 0.0, 1.0, P_TOL);
        let decomposition = env.decompose(p_star);
        let r_s = decomposition.average(|x| self.i_s(x));
        let r_w = self.i_w(p_star) - decomposition.average(|x| self.i_w(x));
        WeightedSumRate {
            lambda,
            value,
            p_star,
            decomposition,
            rates: self.publish(r_s, r_w),
        }
    }
}

/// `max lambda R_s + R_w` over the superposition region without a sum-rate
/// constraint, where `s = strong` (caller label) decodes both messages.
///
/// For `lambda <= 1` this is `max_p I_w(p) + C[lambda I_s - I_w](p)`. For
/// `lambda > 1` the value is `lambda` times the `lambda = 1` value, the
/// hyperplane of the outer bound without a sum constraint; the reported
/// maximizer is the `lambda = 1` one.
pub fn weighted_sum_rate(lambda: f64, params: &PbcParams, strong: Receiver) -> Result<WeightedSumRate> {
    check_lambda(lambda)?;
    let frame = Frame::new(params, strong);
    if lambda <= 1.0 {
        Ok(frame.superposition_max(lambda))
    } else {
        let mut at_one = frame.superposition_max(1.0);
        at_one.lambda = lambda;
        at_one.value *= lambda;
        Ok(at_one)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(crate::error::invalid("lambda", format!("must be finite and >= 0, got {lambda}")))
    }
}

/// Strong-frame evaluation of a candidate input for the sum-constrained
/// superposition region `R_s <= A`, `R_w <= I_w(p) - B`, `R_s + R_w <= I_s(p)`.
fn constrained_point(frame: &Frame, lambda: f64, d: &InputDecomposition) -> (f64, f64, f64) {
    let p = d.mean();
    let a = d.average(|x| frame.i_s(x));
    let b = d.average(|x| frame.i_w(x));
    let (is, iw) = (frame.i_s(p), frame.i_w(p));
    let (r_s, r_w) = if lambda <= 1.0 {
        let r_w = (iw - b).min(is).max(0.0);
        ((a).min(is - r_w).max(0.0), r_w)
    } else {
        (a, (iw - b).min(is - a).max(0.0))
    };
    (lambda * r_s + r_w, r_s, r_w)
}

/// Inner maximization of the Lagrangian for the sum-constrained region at
/// multiplier `mu`; returns the value and the maximizing input.
fn lagrangian(frame: &Frame, lambda: f64, mu: f64) -> (f64, InputDecomposition) {
    // Coefficients (c_s, c_w) on the decomposition terms (A, B) and
    // (k_s, k_w) on (I_s(p), I_w(p)).
    let (c_s, c_w, k_s, k_w) = if lambda <= 1.0 {
        let c = 1.0 - lambda + mu * lambda;
        (mu * lambda, c, (1.0 - mu) * lambda, c)
    } else {
        (lambda - 1.0 + mu, mu, 1.0 - mu, mu)
    };
    let env = frame.envelope(c_s, c_w);
    let (p, v) = golden_max(
        |p| k_s * frame.i_s(p) + k_w * frame.i_w(p) + env.eval(p),
        0.0,
        1.0,
        P_TOL,
    );
    (v, env.decompose(p))
}

/// `max lambda R_s + R_w` over the superposition region with the sum-rate
/// constraint `R_s + R_w <= I(X; Y_s)`, as needed for more-capable channels.
///
/// Solved through its Lagrangian dual in the multiplier that weighs the two
/// active constraints; the primal input is recovered by mixing the inner
/// maximizers on either side of the optimal multiplier. `value` is the
/// primal value of the returned input.
pub fn constrained_weighted_sum_rate(
    lambda: f64,
    params: &PbcParams,
    strong: Receiver,
) -> Result<WeightedSumRate> {
    check_lambda(lambda)?;
    let frame = Frame::new(params, strong);
    Ok(constrained_in_frame(&frame, lambda).0)
}

/// Returns the primal solution and the dual bound.
pub(crate) fn constrained_in_frame(frame: &Frame, lambda: f64) -> (WeightedSumRate, f64) {
    let (mu, dual) = golden_min(|mu| lagrangian(frame, lambda, mu).0, 0.0, 1.0, 1e-9);
    let delta = 1e-6;
    let lo = lagrangian(frame, lambda, (mu - delta).max(0.0)).1;
    let hi = lagrangian(frame, lambda, (mu + delta).min(1.0)).1;
    let mid = lagrangian(frame, lambda, mu).1;
    let (theta, _) = golden_max(
        |th| constrained_point(frame, lambda, &lo.mix(th, &hi)).0,
        0.0,
        1.0,
        1e-10,
    );
    let mut best = lo.mix(theta, &hi);
    for cand in [mid, lo, hi] {
        if constrained_point(frame, lambda, &cand).0 > constrained_point(frame, lambda, &best).0 {
            best = cand;
        }
    }
    let (value, r_s, r_w) = constrained_point(frame, lambda, &best);
    (
        WeightedSumRate {
            lambda,
            value,
            p_star: best.mean(),
            decomposition: best,
            rates: frame.publish(r_s, r_w),
        },
        dual,
    )
}

/// Default hyperplane weights: 0, 1 and 64 log-spaced values in `[1e-3, 16]`.
fn base_lambdas() -> Vec<f64> {
    let mut l: Vec<f64> = (0..64)
        .map(|i| (1e-3f64.ln() + (16f64.ln() - 1e-3f64.ln()) * i as f64 / 63.0).exp())
        .collect();
    l.push(0.0);
    l.push(1.0);
    l.sort_by(f64::total_cmp);
    l.dedup();
    l
}

/// Traces a boundary with the per-lambda solver `point`, refining the weight
/// grid where consecutive points are far apart until `n_points` hyperplanes
/// have been evaluated.
fn trace(
    n_points: usize,
    point: impl Fn(f64) -> (f64, f64) + Sync,
) -> (Vec<(f64, f64)>, Vec<f64>) {
    let mut lambdas = base_lambdas();
    let mut pts: Vec<(f64, f64)> = lambdas.par_iter().map(|&l| point(l)).collect();
    while lambdas.len() < n_points {
        let budget = n_points - lambdas.len();
        let mut gaps: Vec<(f64, usize)> = pts
            .windows(2)
            .enumerate()
            .map(|(i, w)| ((w[1].0 - w[0].0).hypot(w[1].1 - w[0].1), i))
            .filter(|(g, _)| *g > 1e-9)
            .collect();
        if gaps.is_empty() {
            break;
        }
        gaps.sort_by(|a, b| b.0.total_cmp(&a.0));
        gaps.truncate(budget);
        let mids: Vec<f64> = gaps
            .iter()
            .map(|&(_, i)| 0.5 * (lambdas[i] + lambdas[i + 1]))
            .filter(|m| !lambdas.contains(m))
            .collect();
        if mids.is_empty() {
            break;
        }
        let new: Vec<(f64, f64)> = mids.par_iter().map(|&l| point(l)).collect();
        let mut merged: Vec<(f64, (f64, f64))> =
            lambdas.iter().copied().zip(pts.iter().copied()).chain(mids.into_iter().zip(new)).collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        lambdas = merged.iter().map(|m| m.0).collect();
        pts = merged.iter().map(|m| m.1).collect();
    }
    (pts, lambdas)
}

/// Keeps Pareto-nondominated points, sorted by `r1`.
fn pareto(points: Vec<RatePoint>, lambdas: Vec<f64>) -> (Vec<RatePoint>, Vec<f64>) {
    let mut items: Vec<(RatePoint, f64)> = points.into_iter().zip(lambdas).collect();
    items.sort_by(|a, b| a.0.r1.total_cmp(&b.0.r1).then(b.0.r2.total_cmp(&a.0.r2)));
    let mut kept: Vec<(RatePoint, f64)> = Vec::new();
    for (pt, l) in items.into_iter().rev() {
        // scanning from the largest r1 down: keep only strictly larger r2
        let dominated = kept.last().is_some_and(|(k, _)| k.r2 >= pt.r2 - 1e-13);
        if !dominated {
            kept.push((pt, l));
        }
    }
    kept.reverse();
    kept.into_iter().unzip()
}

fn strong_receiver(class: &ChannelClass) -> Option<Receiver> {
    class.stronger_receiver
}

/// Boundary of the capacity region of a less noisy or effectively less noisy
/// channel (the superposition region without a sum constraint).
pub fn region_less_noisy(params: &PbcParams, n_points: usize) -> Result<RegionBoundary> {
    let class = classify(params);
    let m = class.memberships;
    let strong = match strong_receiver(&class) {
        Some(r) if m.less_noisy || m.effectively_less_noisy => r,
        _ => {
            return Err(Error::RegimeMismatch {
                operation: "region_less_noisy",
                required: "less noisy or effectively less noisy",
                actual: class.to_string(),
            })
        }
    };
    let frame = Frame::new(params, strong);
    let (pts, lambdas) = trace(n_points, |l| {
        let w = frame.superposition_max(l.min(1.0));
        let r = w.rates;
        (r.r1, r.r2)
    });
    let points = pts.into_iter().map(|(r1, r2)| RatePoint { r1, r2 }).collect();
    let (points, lambdas) = pareto(points, lambdas);
    Ok(RegionBoundary {
        points,
        lambdas,
        strong,
        regime: class,
    })
}

/// Boundary of the capacity region of a more capable channel (the
/// superposition region with the sum constraint).
pub fn region_more_capable(params: &PbcParams, n_points: usize) -> Result<RegionBoundary> {
    let class = classify(params);
    let strong = match strong_receiver(&class) {
        Some(r) if class.memberships.more_capable => r,
        _ => {
            return Err(Error::RegimeMismatch {
                operation: "region_more_capable",
                required: "more capable",
                actual: class.to_string(),
            })
        }
    };
    let frame = Frame::new(params, strong);
    let (pts, lambdas) = trace(n_points, |l| {
        if l > 1.0 {
            let c = frame.capacity_s();
            let r = frame.publish(c, 0.0);
            return (r.r1, r.r2);
        }
        let r = constrained_in_frame(&frame, l).0.rates;
        (r.r1, r.r2)
    });
    let points = pts.into_iter().map(|(r1, r2)| RatePoint { r1, r2 }).collect();
    let (points, lambdas) = pareto(points, lambdas);
    Ok(RegionBoundary {
        points,
        lambdas,
        strong,
        regime: class,
    })
}
