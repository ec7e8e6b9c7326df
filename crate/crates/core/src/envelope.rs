//! Upper concave envelopes of rate differences.
//!
//! For a binary input the envelope of a weighted difference of the two
//! receiver rates has a closed form: it follows the raw difference on one
//! side of a breakpoint and a chord to an endpoint on the other. The
//! breakpoint is the preimage of the coefficient ratio under one of the two
//! monotone ratio functions [`g1`] and [`g2`]. A generic sampled
//! convex-hull envelope ([`hull_envelope`]) serves as an independent check
//! and as the engine for discrete channels.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{unit_rate, PbcParams};
use crate::optim::bisect_increasing;
use crate::special::{neg_log1m_minus, scaled_minus_log1p};

/// Which difference the envelope is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    /// `w1 I1 - w2 I2`: raw on `[0, t]`, chord to `q = 1` beyond.
    OneMinusTwo,
    /// `w2 I2 - w1 I1`: chord from `q = 0` up to `r`, raw beyond.
    TwoMinusOne,
}

/// Selector for [`invert_g`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GFunction {
    G1,
    G2,
}

/// `(1+s2) L((1-x)/(1+s2)) / ((1+s1) L((1-x)/(1+s1)))` with `L(u) = -ln(1-u) - u`.
///
/// Increasing from `g1(0)` to `(1+s1)/(1+s2)` at `x = 1`.
pub fn g1(x: f64, s1: f64, s2: f64) -> f64 {
    if s1 == s2 {
        return 1.0;
    }
    if x >= 1.0 {
        return (1.0 + s1) / (1.0 + s2);
    }
    let y = 1.0 - x;
    let num = (1.0 + s2) * neg_log1m_minus(y / (1.0 + s2));
    let den = (1.0 + s1) * neg_log1m_minus(y / (1.0 + s1));
    if den.is_infinite() {
        return 0.0;
    }
    num / den
}

/// `s2 M(x/s2) / (s1 M(x/s1))` with `M(v) = v - ln(1+v)`.
///
/// Increasing from `s1/s2` at `x = 0`.
pub fn g2(x: f64, s1: f64, s2: f64) -> f64 {
    if s1 == s2 {
        return 1.0;
    }
    if x <= 0.0 {
        return s1 / s2;
    }
    scaled_minus_log1p(x, s2) / scaled_minus_log1p(x, s1)
}

/// Solves `g(x) = target` on `[0, 1]`; targets at or below `g(0)` give 0 and
/// targets at or above `g(1)` give 1.
pub fn invert_g(which: GFunction, target: f64, s1: f64, s2: f64) -> f64 {
    let g = |x: f64| match which {
        GFunction::G1 => g1(x, s1, s2),
        GFunction::G2 => g2(x, s1, s2),
    };
    if target <= g(0.0) {
        return 0.0;
    }
    if target >= g(1.0) {
        return 1.0;
    }
    bisect_increasing(g, target, 0.0, 1.0, 1e-13)
}

/// One atom of an input mixture: `P(U = j) = weight`, `P(X = 1 | U = j) = p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportPoint {
    pub weight: f64,
    pub p: f64,
}

/// Mixture of Bernoulli inputs whose mean is a queried `q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDecomposition {
    pub support: Vec<SupportPoint>,
}

impl InputDecomposition {
    pub fn point(p: f64) -> Self {
        Self {
            support: vec![SupportPoint { weight: 1.0, p }],
        }
    }

    /// Builds a decomposition, dropping zero-weight atoms and merging atoms
    /// that share a point.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut support: Vec<SupportPoint> = Vec::new();
        for (weight, p) in atoms {
            if weight <= 0.0 {
                continue;
            }
            match support.iter_mut().find(|a| (a.p - p).abs() <= 1e-15) {
                Some(a) => a.weight += weight,
                None => support.push(SupportPoint { weight, p }),
            }
        }
        support.sort_by(|a, b| a.p.total_cmp(&b.p));
        Self { support }
    }

    /// `theta * self + (1 - theta) * other`.
    pub fn mix(&self, theta: f64, other: &Self) -> Self {
        let a = self.support.iter().map(|s| (theta * s.weight, s.p));
        let b = other.support.iter().map(|s| ((1.0 - theta) * s.weight, s.p));
        Self::from_atoms(a.chain(b))
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().map(|s| s.weight * s.p).sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.support.iter().map(|s| s.weight).sum()
    }

    /// `sum_j beta_j f(p_j)`.
    pub fn average(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.support.iter().map(|s| s.weight * f(s.p)).sum()
    }
}

/// Analytic envelope of `w1 I1 - w2 I2` (or its negation-orientation
/// counterpart) for a canonical channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiecewiseEnvelope {
    pub orientation: Orientation,
    /// `t` for [`Orientation::OneMinusTwo`], `r` for [`Orientation::TwoMinusOne`].
    pub breakpoint: f64,
    /// Coefficient on `phi(., s1)`, gains folded in.
    c1: f64,
    /// Coefficient on `phi(., s2)`, gains folded in.
    c2: f64,
    s1: f64,
    s2: f64,
}

/// Straight piece of an envelope, given by its endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearSegment {
    pub from: (f64, f64),
    pub to: (f64, f64),
}

impl PiecewiseEnvelope {
    /// Envelope of `w1 I1 - w2 I2` ([`Orientation::OneMinusTwo`]) or
    /// `w2 I2 - w1 I1` ([`Orientation::TwoMinusOne`]) with nonnegative weights.
    pub fn new(orientation: Orientation, w1: f64, w2: f64, params: &PbcParams) -> Result<Self> {
        if !(w1 >= 0.0 && w2 >= 0.0 && w1.is_finite() && w2.is_finite()) {
            return Err(invalid("weights", format!("must be finite and >= 0, got ({w1}, {w2})")));
        }
        Ok(Self::from_coefficients(
            orientation,
            w1 * params.alpha * params.scale,
            w2 * params.scale,
            params.s1,
            params.s2,
        ))
    }

    pub(crate) fn from_coefficients(orientation: Orientation, c1: f64, c2: f64, s1: f64, s2: f64) -> Self {
        let breakpoint = match orientation {
            // c1 phi1 - c2 phi2: a pure positive multiple of phi1 is concave.
            Orientation::OneMinusTwo if c2 == 0.0 => 1.0,
            Orientation::OneMinusTwo => invert_g(GFunction::G1, c1 / c2, s1, s2),
            // c2 phi2 - c1 phi1 with c2 = 0 is convex, so the chord spans everything.
            Orientation::TwoMinusOne if c2 == 0.0 => 1.0,
            Orientation::TwoMinusOne => invert_g(GFunction::G2, c1 / c2, s1, s2),
        };
        Self {
            orientation,
            breakpoint,
            c1,
            c2,
            s1,
            s2,
        }
    }

    /// The difference whose envelope this is, evaluated at `q`.
    pub fn raw(&self, q: f64) -> f64 {
        let d = self.c1 * unit_rate(q, self.s1) - self.c2 * unit_rate(q, self.s2);
        match self.orientation {
            Orientation::OneMinusTwo => d,
            Orientation::TwoMinusOne => -d,
        }
    }

    pub fn eval(&self, q: f64) -> f64 {
        let b = self.breakpoint;
        match self.orientation {
            Orientation::OneMinusTwo if q > b => (1.0 - q) / (1.0 - b) * self.raw(b),
            Orientation::TwoMinusOne if q < b => q / b * self.raw(b),
            _ => self.raw(q),
        }
    }

    /// Interval on which the envelope coincides with the raw difference.
    pub fn analytic_segment(&self) -> (f64, f64) {
        match self.orientation {
            Orientation::OneMinusTwo => (0.0, self.breakpoint),
            Orientation::TwoMinusOne => (self.breakpoint, 1.0),
        }
    }

    /// The chord piece, absent when the breakpoint sits at the far end.
    pub fn linear_segment(&self) -> Option<LinearSegment> {
        let b = self.breakpoint;
        match self.orientation {
            Orientation::OneMinusTwo if b < 1.0 => Some(LinearSegment {
                from: (b, self.raw(b)),
                to: (1.0, 0.0),
            }),
            Orientation::TwoMinusOne if b > 0.0 => Some(LinearSegment {
                from: (0.0, 0.0),
                to: (b, self.raw(b)),
            }),
            _ => None,
        }
    }

    /// Mixture attaining the envelope at `q`: the point itself on the raw
    /// piece, otherwise the two chord endpoints.
    pub fn decompose(&self, q: f64) -> InputDecomposition {
        let b = self.breakpoint;
        match self.orientation {
            Orientation::OneMinusTwo if q > b => {
                let w = (1.0 - q) / (1.0 - b);
                InputDecomposition::from_atoms([(w, b), (1.0 - w, 1.0)])
            }
            Orientation::TwoMinusOne if q < b => {
                let w = q / b;
                InputDecomposition::from_atoms([(w, b), (1.0 - w, 0.0)])
            }
            _ => InputDecomposition::point(q),
        }
    }
}

/// Envelope of `I1 - I2` or `I2 - I1`.
pub fn analytic_envelope(orientation: Orientation, params: &PbcParams) -> PiecewiseEnvelope {
    PiecewiseEnvelope::from_coefficients(
        orientation,
        params.alpha * params.scale,
        params.scale,
        params.s1,
        params.s2,
    )
}

/// Envelope of `lambda I1 - I2` ([`Orientation::OneMinusTwo`]) or
/// `lambda I2 - I1` ([`Orientation::TwoMinusOne`]).
///
/// Equivalent to [`analytic_envelope`] at gain ratio `lambda * alpha`
/// (respectively `alpha / lambda`, scaled by `lambda`). Values of `lambda`
/// above 1 are accepted.
pub fn scaled_envelope(lambda: f64, orientation: Orientation, params: &PbcParams) -> Result<PiecewiseEnvelope> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    match orientation {
        Orientation::OneMinusTwo => PiecewiseEnvelope::new(orientation, lambda, 1.0, params),
        Orientation::TwoMinusOne => PiecewiseEnvelope::new(orientation, 1.0, lambda, params),
    }
}

/// Upper concave envelope of a sampled function, as the upper convex hull of
/// the sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEnvelope {
    pub q: Vec<f64>,
    pub raw: Vec<f64>,
    pub value: Vec<f64>,
    /// Sample indices of the hull vertices, increasing.
    pub vertices: Vec<usize>,
}

impl SampledEnvelope {
    /// Hull-vertex segment `(left, right)` containing `q` (vertex indices
    /// into `vertices`).
    fn segment(&self, q: f64) -> (usize, usize) {
        let v = &self.vertices;
        let k = v.partition_point(|&i| self.q[i] < q);
        if k == 0 {
            (0, 0)
        } else if k == v.len() {
            (v.len() - 1, v.len() - 1)
        } else if self.q[v[k]] == q {
            (k, k)
        } else {
            (k - 1, k)
        }
    }

    /// Envelope at an arbitrary `q` in the sampled range (linear between hull vertices).
    pub fn eval(&self, q: f64) -> f64 {
        let (a, b) = self.segment(q);
        let (ia, ib) = (self.vertices[a], self.vertices[b]);
        if a == b {
            return self.raw[ia];
        }
        let w = (self.q[ib] - q) / (self.q[ib] - self.q[ia]);
        w * self.raw[ia] + (1.0 - w) * self.raw[ib]
    }

    /// Mixture of at most two hull vertices with mean `q`.
    pub fn decompose(&self, q: f64) -> InputDecomposition {
        let (a, b) = self.segment(q);
        let (ia, ib) = (self.vertices[a], self.vertices[b]);
        if a == b {
            return InputDecomposition::point(self.q[ia]);
        }
        let w = (self.q[ib] - q) / (self.q[ib] - self.q[ia]);
        InputDecomposition::from_atoms([(w, self.q[ia]), (1.0 - w, self.q[ib])])
    }

    /// Decomposition at the `i`-th sample.
    pub fn decompose_at(&self, i: usize) -> InputDecomposition {
        self.decompose(self.q[i])
    }
}

/// Indices of the upper convex hull of `(q[i], v[i])`, written into `hull`.
///
/// `q` must be strictly increasing. Collinear interior points are dropped,
/// so a flat stretch is represented by its two ends.
pub(crate) fn upper_hull_into(q: &[f64], v: &[f64], hull: &mut Vec<usize>) {
    hull.clear();
    for i in 0..q.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (q[b] - q[a]) * (v[i] - v[a]) - (v[b] - v[a]) * (q[i] - q[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
}

/// Upper concave envelope of `samples`, sorted by strictly increasing `q`.
pub fn hull_envelope(samples: &[(f64, f64)]) -> Result<SampledEnvelope> {
    if samples.is_empty() {
        return Err(invalid("samples", "at least one sample is required"));
    }
    for (i, w) in samples.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(Error::UnsortedSamples { index: i + 1 });
        }
    }
    let q: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let raw: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let mut vertices = Vec::new();
    upper_hull_into(&q, &raw, &mut vertices);
    let mut value = vec![0.0; q.len()];
    for seg in vertices.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        for i in a..=b {
            let w = (q[b] - q[i]) / (q[b] - q[a]);
            value[i] = w * raw[a] + (1.0 - w) * raw[b];
        }
        value[a] = raw[a];
        value[b] = raw[b];
    }
    if vertices.len() == 1 {
        value[0] = raw[0];
    }
    Ok(SampledEnvelope {
        q,
        raw,
        value,
        vertices,
    })
}
