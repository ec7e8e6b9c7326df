//! Parameter-space studies: optimality maps over `(alpha, s2)` and the
//! fraction of a parameter box where superposition coding is known optimal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{classify, ChannelClass, Verdict};
use crate::error::{invalid, Result};
use crate::model::PbcParams;

/// The box `(alpha, s1, s2) in [0,1] x [0,b] x [0,kb]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxSpec {
    pub b: f64,
    pub k: f64,
}

impl BoxSpec {
    pub fn new(b: f64, k: f64) -> Result<Self> {
        for (name, v) in [("b", b), ("k", k)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { b, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapCell {
    Degraded,
    /// Superposition coding optimal without the channel being degraded.
    Optimal,
    Blank,
}

impl MapCell {
    pub fn of(class: &ChannelClass) -> Self {
        match class.verdict {
            Verdict::Degraded => MapCell::Degraded,
            Verdict::Unresolved => MapCell::Blank,
            _ => MapCell::Optimal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityMap {
    pub s1: f64,
    pub alphas: Vec<f64>,
    pub s2s: Vec<f64>,
    /// `classes[i][j]` is the cell `(alphas[i], s2s[j])`.
    pub classes: Vec<Vec<ChannelClass>>,
}

impl OptimalityMap {
    pub fn cell(&self, i: usize, j: usize) -> MapCell {
        MapCell::of(&self.classes[i][j])
    }

    pub fn count(&self, kind: MapCell) -> usize {
        self.classes.iter().flatten().filter(|c| MapCell::of(c) == kind).count()
    }
}

/// Classifies every `(alpha, s2)` cell for a fixed `s1`.
pub fn optimality_map(s1: f64, alphas: &[f64], s2s: &[f64]) -> Result<OptimalityMap> {
    if let Some(&s2) = s2s.iter().find(|&&s2| !(s2 > s1 && s2.is_finite())) {
        return Err(invalid("s2", format!("grid values must exceed s1 = {s1}, got {s2}")));
    }
    let classes = alphas
        .par_iter()
        .map(|&alpha| s2s.iter().map(|&s2| PbcParams::new(alpha, s1, s2).map(|p| classify(&p))).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    Ok(OptimalityMap {
        s1,
        alphas: alphas.to_vec(),
        s2s: s2s.to_vec(),
        classes,
    })
}

/// Box fractions from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fractions {
    /// Lower bound on the superposition-optimal fraction (less noisy cells).
    pub less_noisy: f64,
    pub degraded: f64,
}

/// Closed-form fractions. The less noisy fraction integrates the gap
/// `(1+s1)/(1+s2) - s1/s2` over `s1 <= s2`:
///
/// `1 - [ b0^2/2 (ln((1+kb)/kb) - ln((1+b0)/b0)) - ln(1+b0)/2
///        + b0 (ln(1+kb) - ln(1+b0) + 1/2) ] / (k b^2)`, `b0 = min(b, kb)`.
pub fn fraction_closed_form(spec: BoxSpec) -> Fractions {
    let BoxSpec { b, k } = spec;
    let kb = k * b;
    let b0 = b.min(kb);
    let log_ratio = |x: f64| (1.0 / x).ln_1p();
    let inner = b0 * b0 / 2.0 * (log_ratio(kb) - log_ratio(b0)) - b0.ln_1p() / 2.0
        + b0 * (kb.ln_1p() - b0.ln_1p() + 0.5);
    Fractions {
        less_noisy: 1.0 - inner / (k * b * b),
        degraded: if k >= 1.0 { 0.5 / k } else { 1.0 - 0.5 * k },
    }
}

/// Monte Carlo estimate with standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FractionEstimate {
    pub less_noisy: f64,
    pub less_noisy_se: f64,
    pub degraded: f64,
    pub degraded_se: f64,
    pub samples: u64,
}

const CHUNKS: u64 = 64;

/// Uniform samples over the box. A sample counts as less noisy when its
/// canonical `alpha` (the reciprocal if `s1 > s2`) lies outside
/// `(s1/s2, (1+s1)/(1+s2))`, and as degraded when it is at least 1.
///
/// The work is split into a fixed number of chunks, each on its own ChaCha
/// stream of the master seed, so the result does not depend on threads.
pub fn fraction_monte_carlo(spec: BoxSpec, n_samples: u64, seed: u64) -> Result<FractionEstimate> {
    if n_samples < 10_000 {
        return Err(invalid("n_samples", format!("must be at least 10000, got {n_samples}")));
    }
    let BoxSpec { b, k } = spec;
    let counts: Vec<(u64, u64)> = (0..CHUNKS)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = n_samples / CHUNKS + u64::from(c < n_samples % CHUNKS);
            let (mut ln, mut dg) = (0, 0);
            for _ in 0..n {
                let alpha: f64 = rng.gen();
                let s1 = b * rng.gen::<f64>();
                let s2 = k * b * rng.gen::<f64>();
                let (a, lo, hi) = if s1 <= s2 {
                    (alpha, s1 / s2, (1.0 + s1) / (1.0 + s2))
                } else {
                    (1.0 / alpha, s2 / s1, (1.0 + s2) / (1.0 + s1))
                };
                ln += u64::from(a <= lo || a >= hi);
                dg += u64::from(a >= 1.0);
            }
            (ln, dg)
        })
        .collect();
    let (ln, dg) = counts.iter().fold((0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1));
    let n = n_samples as f64;
    let se = |p: f64| (p * (1.0 - p) / n).sqrt();
    let (pl, pd) = (ln as f64 / n, dg as f64 / n);
    Ok(FractionEstimate {
        less_noisy: pl,
        less_noisy_se: se(pl),
        degraded: pd,
        degraded_se: se(pd),
        samples: n_samples,
    })
}
