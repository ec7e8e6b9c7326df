//! Binary-input discrete memoryless broadcast channels: mutual information,
//! envelope-based classification, and the skewed binary BC sweep.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{marton_dual, FunctionalGrid, MutualInfoFunctional};
use crate::envelope::upper_hull_into;
use crate::error::{invalid, Result};
use crate::model::Receiver;
use crate::special::xlogx;

/// Transition rows `rows_i[x][y] = P(Y_i = y | X = x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinaryBC {
    pub rows1: [Vec<f64>; 2],
    pub rows2: [Vec<f64>; 2],
}

impl BinaryBC {
    pub fn new(rows1: [Vec<f64>; 2], rows2: [Vec<f64>; 2]) -> Result<Self> {
        for (name, rows) in [("rows1", &rows1), ("rows2", &rows2)] {
            if rows[0].len() != rows[1].len() || rows[0].is_empty() {
                return Err(invalid(name, "both rows need the same nonzero length"));
            }
            for row in rows {
                if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return Err(invalid(name, format!("not a probability vector: {row:?}")));
                }
            }
        }
        Ok(Self { rows1, rows2 })
    }

    fn rows(&self, which: Receiver) -> &[Vec<f64>; 2] {
        match which {
            Receiver::One => &self.rows1,
            Receiver::Two => &self.rows2,
        }
    }
}

impl MutualInfoFunctional for BinaryBC {
    fn f1(&self, q: f64) -> f64 {
        dmbc_mutual_info(self, Receiver::One, q)
    }

    fn f2(&self, q: f64) -> f64 {
        dmbc_mutual_info(self, Receiver::Two, q)
    }
}

/// `I(X; Y_which)` in nats for `X ~ Bernoulli(q)`.
pub fn dmbc_mutual_info(ch: &BinaryBC, which: Receiver, q: f64) -> f64 {
    let [r0, r1] = ch.rows(which);
    let mut h_out = 0.0;
    let mut h_cond = 0.0;
    for (&a, &b) in r0.iter().zip(r1) {
        h_out -= xlogx((1.0 - q) * a + q * b);
        h_cond -= (1.0 - q) * xlogx(a) + q * xlogx(b);
    }
    (h_out - h_cond).max(0.0)
}

/// Crossover parameters of the skewed binary BC, both in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewedParams {
    pub p1: f64,
    pub p2: f64,
}

impl SkewedParams {
    pub fn new(p1: f64, p2: f64) -> Result<Self> {
        for (name, v) in [("p1", p1), ("p2", p2)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(name, format!("must lie in (0, 1), got {v}")));
            }
        }
        Ok(Self { p1, p2 })
    }
}

/// Receiver 1 is a Z channel (input 0 noiseless, input 1 flips to 0 with
/// probability `p1`); receiver 2 is its mirror image (input 1 noiseless,
/// input 0 flips to 1 with probability `p2`).
pub fn skewed_channel(p: SkewedParams) -> BinaryBC {
    BinaryBC {
        rows1: [vec![1.0, 0.0], vec![p.p1, 1.0 - p.p1]],
        rows2: [vec![1.0 - p.p2, p.p2], vec![0.0, 1.0]],
    }
}

/// Relative entropy `D(a || b)` in nats (infinite when `a` is not absolutely
/// continuous with respect to `b`).
fn kl(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == 0.0 {
                0.0
            } else if y == 0.0 {
                f64::INFINITY
            } else {
                x * (x / y).ln()
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "verdict", content = "receiver")]
pub enum DmbcVerdict {
    MoreCapable(Receiver),
    EffectivelyLessNoisy(Receiver),
    StrongerConditionOptimal(Receiver),
    /// A Marton witness beats every superposition scheme.
    MartonExceedsSuperposition,
    Unresolved,
}

impl DmbcVerdict {
    pub fn superposition_optimal(&self) -> bool {
        matches!(
            self,
            DmbcVerdict::MoreCapable(_) | DmbcVerdict::EffectivelyLessNoisy(_) | DmbcVerdict::StrongerConditionOptimal(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmbcOptions {
    /// Input-probability grid for the sampled envelopes.
    pub grid: usize,
    /// Number of weights `lambda` on `[0, 1]`.
    pub lambda_grid: usize,
    /// Run the Marton comparison on cells the envelope tests leave open.
    pub marton: bool,
}

impl Default for DmbcOptions {
    fn default() -> Self {
        Self {
            grid: 1025,
            lambda_grid: 101,
            marton: true,
        }
    }
}

/// Per-receiver flags, indexed by receiver number minus one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmbcClass {
    pub verdict: DmbcVerdict,
    pub more_capable: [bool; 2],
    pub effectively_less_noisy: [bool; 2],
    pub stronger_condition: [bool; 2],
    /// Achievable Marton sum rate (witness value); NaN when not computed.
    pub marton: f64,
    pub superposition: f64,
}

/// Reusable buffers for one classification.
#[derive(Debug, Default)]
struct Scratch {
    v: Vec<f64>,
    hull: Vec<usize>,
}

/// Grid data in the frame where `s` is the strong receiver.
struct View<'a> {
    q: &'a [f64],
    fs: &'a [f64],
    fw: &'a [f64],
}

impl View<'_> {
    /// For each `lambda`, the grid maximizer `p*` of `F_w + C[lambda F_s - F_w]`
    /// and the cloud-rate margin `I(U;Y_s) - I(U;Y_w)` of its decomposition.
    fn maximizers(&self, lambdas: &[f64], s: &mut Scratch) -> Vec<(usize, f64)> {
        let n = self.q.len();
        lambdas
            .iter()
            .map(|&lambda| {
                s.v.clear();
                s.v.extend((0..n).map(|i| lambda * self.fs[i] - self.fw[i]));
                upper_hull_into(self.q, &s.v, &mut s.hull);
                let mut best = (f64::NEG_INFINITY, 0, 0, 0);
                for seg in s.hull.windows(2) {
                    let (a, b) = (seg[0], seg[1]);
                    let slope = (s.v[b] - s.v[a]) / (self.q[b] - self.q[a]);
                    for i in a..=b {
                        let val = self.fw[i] + s.v[a] + slope * (self.q[i] - self.q[a]);
                        if val > best.0 {
                            best = (val, i, a, b);
                        }
                    }
                }
                let (_, i, a, b) = best;
                let margin = if i == a || i == b {
                    0.0
                } else {
                    let w = (self.q[b] - self.q[i]) / (self.q[b] - self.q[a]);
                    let avg = |f: &[f64]| w * f[a] + (1.0 - w) * f[b];
                    (self.fs[i] - avg(self.fs)) - (self.fw[i] - avg(self.fw))
                };
                (i, margin)
            })
            .collect()
    }

    /// Whether `C[F_s - F_w]` equals `F_s - F_w` at each grid index in `at`.
    fn envelope_tight(&self, at: &[usize], s: &mut Scratch) -> bool {
        let n = self.q.len();
        s.v.clear();
        s.v.extend((0..n).map(|i| self.fs[i] - self.fw[i]));
        upper_hull_into(self.q, &s.v, &mut s.hull);
        at.iter().all(|&i| {
            let k = s.hull.partition_point(|&h| h < i);
            if k < s.hull.len() && s.hull[k] == i {
                return true;
            }
            let (a, b) = (s.hull[k - 1], s.hull[k]);
            let w = (self.q[b] - self.q[i]) / (self.q[b] - self.q[a]);
            w * s.v[a] + (1.0 - w) * s.v[b] - s.v[i] <= 1e-12
        })
    }
}

/// Classifies a binary-input BC with sampled envelopes.
///
/// More capable is decided from the sign of `I1 - I2` on the grid together
/// with the exact endpoint slopes `D(row_1 || row_0)` at `q = 0` and
/// `D(row_0 || row_1)` at `q = 1`. Effectively less noisy requires the
/// envelope of the rate difference to be tight at every weighted-sum
/// maximizer `p*(lambda)`; the stronger condition requires nonnegative cloud
/// margins at those maximizers. Cells left open are compared against an
/// achievable Marton witness.
pub fn classify_dmbc(ch: &BinaryBC, opts: &DmbcOptions) -> Result<DmbcClass> {
    if opts.grid < 3 || opts.lambda_grid < 2 {
        return Err(invalid("grid", "need at least 3 input points and 2 weights"));
    }
    let g = FunctionalGrid::new(ch, opts.grid);
    let mut s = Scratch::default();
    let lambdas: Vec<f64> = (0..opts.lambda_grid).map(|i| i as f64 / (opts.lambda_grid - 1) as f64).collect();

    let slope0 = |r: Receiver| kl(&ch.rows(r)[1], &ch.rows(r)[0]);
    let slope1 = |r: Receiver| kl(&ch.rows(r)[0], &ch.rows(r)[1]);
    let min_diff = g.f1.iter().zip(&g.f2).map(|(a, b)| a - b).fold(f64::INFINITY, f64::min);
    let max_diff = g.f1.iter().zip(&g.f2).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
    let (one, two) = (Receiver::One, Receiver::Two);
    let mc1 = min_diff >= -1e-12 && !(slope0(one) < slope0(two)) && !(slope1(one) < slope1(two));
    let mc2 = max_diff <= 1e-12 && !(slope0(two) < slope0(one)) && !(slope1(two) < slope1(one));

    let mut eln = [false; 2];
    let mut stronger = [false; 2];
    for (k, view) in [
        View { q: &g.q, fs: &g.f1, fw: &g.f2 },
        View { q: &g.q, fs: &g.f2, fw: &g.f1 },
    ]
    .iter()
    .enumerate()
    {
        let maxima = view.maximizers(&lambdas, &mut s);
        let at: Vec<usize> = maxima.iter().map(|m| m.0).collect();
        eln[k] = view.envelope_tight(&at, &mut s);
        stronger[k] = maxima.iter().all(|m| m.1 >= -1e-9);
    }

    let c1 = g.f1.iter().cloned().fold(0.0, f64::max);
    let c2 = g.f2.iter().cloned().fold(0.0, f64::max);
    let superposition = c1.max(c2);
    let pick = |flags: [bool; 2]| {
        if flags[0] {
            Some(one)
        } else if flags[1] {
            Some(two)
        } else {
            None
        }
    };
    let mut marton = f64::NAN;
    let verdict = if let Some(r) = pick([mc1, mc2]) {
        DmbcVerdict::MoreCapable(r)
    } else if let Some(r) = pick(eln) {
        DmbcVerdict::EffectivelyLessNoisy(r)
    } else if let Some(r) = pick(stronger) {
        DmbcVerdict::StrongerConditionOptimal(r)
    } else if opts.marton {
        let dual = marton_dual(ch, opts.grid);
        marton = dual.witness.map_or(f64::NAN, |w| w.sum_rate(ch));
        if marton > superposition + 1e-9 {
            DmbcVerdict::MartonExceedsSuperposition
        } else {
            DmbcVerdict::Unresolved
        }
    } else {
        DmbcVerdict::Unresolved
    };
    Ok(DmbcClass {
        verdict,
        more_capable: [mc1, mc2],
        effectively_less_noisy: eln,
        stronger_condition: stronger,
        marton,
        superposition,
    })
}

/// Cell fractions of a skewed sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepFractions {
    pub effectively_less_noisy: f64,
    pub stronger_condition: f64,
    pub marton_exceeds: f64,
    pub unresolved: f64,
    /// `effectively_less_noisy + stronger_condition` (+ more capable cells).
    pub superposition_optimal: f64,
    pub more_capable_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkewedSweep {
    pub grid_n: usize,
    /// Cell centres `(i + 1/2) / n`.
    pub axis: Vec<f64>,
    /// `verdicts[i * n + j]` is the cell `(p1, p2) = (axis[i], axis[j])`.
    pub verdicts: Vec<DmbcVerdict>,
    pub fractions: SweepFractions,
}

impl SkewedSweep {
    pub fn verdict(&self, i: usize, j: usize) -> DmbcVerdict {
        self.verdicts[i * self.grid_n + j]
    }
}

/// Classifies every cell of a `grid_n x grid_n` grid over `(p1, p2)`.
pub fn skewed_sweep(grid_n: usize, opts: &DmbcOptions) -> Result<SkewedSweep> {
    if grid_n < 100 {
        return Err(invalid("grid_n", format!("must be at least 100, got {grid_n}")));
    }
    let axis: Vec<f64> = (0..grid_n).map(|i| (i as f64 + 0.5) / grid_n as f64).collect();
    let verdicts: Vec<DmbcVerdict> = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|c| {
            let p = SkewedParams::new(axis[c / grid_n], axis[c % grid_n]).expect("cell centres are interior");
            classify_dmbc(&skewed_channel(p), opts).map(|r| r.verdict)
        })
        .collect::<Result<_>>()?;
    let total = verdicts.len() as f64;
    let frac = |pred: &dyn Fn(&DmbcVerdict) -> bool| verdicts.iter().filter(|v| pred(v)).count() as f64 / total;
    let more_capable_cells = verdicts.iter().filter(|v| matches!(v, DmbcVerdict::MoreCapable(_))).count();
    let fractions = SweepFractions {
        effectively_less_noisy: frac(&|v| matches!(v, DmbcVerdict::EffectivelyLessNoisy(_))),
        stronger_condition: frac(&|v| matches!(v, DmbcVerdict::StrongerConditionOptimal(_))),
        marton_exceeds: frac(&|v| *v == DmbcVerdict::MartonExceedsSuperposition),
        unresolved: frac(&|v| *v == DmbcVerdict::Unresolved),
        superposition_optimal: frac(&|v| v.superposition_optimal()),
        more_capable_cells,
    };
    Ok(SkewedSweep {
        grid_n,
        axis,
        verdicts,
        fractions,
    })
}
