//! Maximum sum rates of the Marton inner bound (randomized time-division
//! form for binary inputs), the UV outer bound and superposition coding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::upper_hull_into;
use crate::model::{mutual_info_rate, InputDist, PbcParams, Receiver};
use crate::optim::{golden_max, golden_min, nelder_mead_max, SimplexOptions};
use crate::regions::Frame;

/// The pair `q -> I(X; Y_1)`, `q -> I(X; Y_2)` for `X ~ Bernoulli(q)`.
///
/// Both maps must vanish at `q = 0` and `q = 1` (a deterministic input
/// carries no information); the UV evaluation relies on it.
pub trait MutualInfoFunctional: Sync {
    fn f1(&self, q: f64) -> f64;
    fn f2(&self, q: f64) -> f64;
}

impl MutualInfoFunctional for PbcParams {
    fn f1(&self, q: f64) -> f64 {
        mutual_info_rate(Receiver::One, InputDist::new(q.clamp(0.0, 1.0)).unwrap(), self)
    }

    fn f2(&self, q: f64) -> f64 {
        mutual_info_rate(Receiver::Two, InputDist::new(q.clamp(0.0, 1.0)).unwrap(), self)
    }
}

/// `|W| = 5` time-sharing input: `P(W = j) = beta[j]`, `P(X = 1 | W = j) =
/// p[j]`; symbols `j < k` carry receiver 1's private message, the rest
/// receiver 2's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartonWitness {
    pub k: usize,
    pub beta: [f64; 5],
    pub p: [f64; 5],
}

impl MartonWitness {
    /// Sum rate of this witness, evaluated from scratch.
    pub fn sum_rate(&self, f: &dyn MutualInfoFunctional) -> f64 {
        marton_objective(f, self.k, &self.beta, &self.p)
    }
}

fn marton_objective(f: &dyn MutualInfoFunctional, k: usize, beta: &[f64; 5], p: &[f64; 5]) -> f64 {
    let mean: f64 = beta.iter().zip(p).map(|(b, x)| b * x).sum();
    let (mut c1, mut c2, mut private) = (0.0, 0.0, 0.0);
    for j in 0..5 {
        let (a, b) = (f.f1(p[j]), f.f2(p[j]));
        c1 += beta[j] * a;
        c2 += beta[j] * b;
        private += beta[j] * if j < k { a } else { b };
    }
    (f.f1(mean) - c1).min(f.f2(mean) - c2) + private
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartonOptions {
    /// Random starts per split point `k`.
    pub starts: usize,
    pub seed: u64,
    /// Grid size for the dual bound's sampled envelopes.
    pub dual_grid: usize,
}

impl Default for MartonOptions {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0x5eed,
            dual_grid: 4097,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartonResult {
    pub value: f64,
    pub witness: MartonWitness,
    /// Number of local optima whose values differ by more than 1e-7.
    pub distinct_optima: usize,
    /// Upper bound from the Lagrangian dual.
    pub dual_bound: f64,
}

fn softmax5(z: &[f64]) -> [f64; 5] {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; 5];
    let mut s = 0.0;
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - m).exp();
        s += *o;
    }
    out.iter_mut().for_each(|o| *o /= s);
    out
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Coordinate refinement of a witness: golden search on each `p_j`, then on
/// each pairwise transfer of weight.
fn polish(f: &dyn MutualInfoFunctional, w: &mut MartonWitness) {
    let obj = |w: &MartonWitness| w.sum_rate(f);
    let mut best = obj(w);
    for _ in 0..8 {
        let start = best;
        for j in 0..5 {
            if w.beta[j] <= 0.0 {
                continue;
            }
            let mut t = *w;
            let (x, v) = golden_max(
                |x| {
                    t.p[j] = x;
                    obj(&t)
                },
                (w.p[j] - 0.05).max(0.0),
                (w.p[j] + 0.05).min(1.0),
                1e-12,
            );
            if v > best {
                w.p[j] = x;
                best = v;
            }
        }
        for i in 0..5 {
            for j in 0..5 {
                if i == j || w.beta[i] + w.beta[j] <= 0.0 {
                    continue;
                }
                let total = w.beta[i] + w.beta[j];
                let mut t = *w;
                let (x, v) = golden_max(
                    |x| {
                        t.beta[i] = x;
                        t.beta[j] = total - x;
                        obj(&t)
                    },
                    0.0,
                    total,
                    1e-13,
                );
                if v > best {
                    w.beta[i] = x;
                    w.beta[j] = total - x;
                    best = v;
                }
            }
        }
        if best - start < 1e-14 {
            break;
        }
    }
}

/// Maximum Marton sum rate
/// `min{I(W;Y1), I(W;Y2)} + sum_{j<k} beta_j I(X;Y1|W=j) + sum_{j>=k} beta_j I(X;Y2|W=j)`.
///
/// Seeded multistart Nelder-Mead over all split points `k`, each local
/// optimum refined coordinatewise; the witness recovered from the dual
/// problem joins the candidates.
pub fn marton_sum_rate(f: &dyn MutualInfoFunctional, opts: &MartonOptions) -> MartonResult {
    let dual = marton_dual(f, opts.dual_grid);
    let runs: Vec<(usize, u64)> = (0..=5)
        .flat_map(|k| (0..opts.starts as u64).map(move |s| (k, s)))
        .collect();
    let simplex = SimplexOptions {
        max_evals: 3000,
        f_tol: 1e-15,
        step: 1.0,
    };
    let mut locals: Vec<MartonWitness> = runs
        .par_iter()
        .map(|&(k, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ ((k as u64) << 32) ^ s);
            let x0: Vec<f64> = (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let decode = |x: &[f64]| MartonWitness {
                k,
                beta: softmax5(&x[..5]),
                p: std::array::from_fn(|j| logistic(x[5 + j])),
            };
            let (x, _) = nelder_mead_max(|x| decode(x).sum_rate(f), &x0, simplex);
            let (x, _) = nelder_mead_max(|x| decode(x).sum_rate(f), &x, SimplexOptions { step: 0.1, ..simplex });
            decode(&x)
        })
        .collect();
    if let Some(w) = dual.witness {
        locals.push(w);
    }
    locals.par_iter_mut().for_each(|w| polish(f, w));
    let mut values: Vec<f64> = locals.iter().map(|w| w.sum_rate(f)).collect();
    let best = (0..locals.len()).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let witness = locals[best];
    values.sort_by(|a, b| b.total_cmp(a));
    values.dedup_by(|a, b| (*a - *b).abs() <= 1e-7);
    MartonResult {
        value: witness.sum_rate(f),
        witness,
        distinct_optima: values.len(),
        dual_bound: dual.value,
    }
}

/// Result of [`marton_dual`].
#[derive(Debug, Clone, PartialEq)]
pub struct MartonDual {
    pub value: f64,
    pub mu: f64,
    /// Primal witness read off the dual solution, when one was recovered.
    pub witness: Option<MartonWitness>,
}

/// Sampled values of the two functionals on a uniform grid of `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct FunctionalGrid {
    pub q: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl FunctionalGrid {
    pub(crate) fn new(f: &dyn MutualInfoFunctional, n: usize) -> Self {
        let q: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let f1 = q.iter().map(|&x| f.f1(x)).collect();
        let f2 = q.iter().map(|&x| f.f2(x)).collect();
        Self { q, f1, f2 }
    }
}

/// Scratch buffers for repeated dual evaluations.
#[derive(Debug, Default)]
pub(crate) struct DualScratch {
    h: Vec<f64>,
    hull: Vec<usize>,
}

/// `max_p mu F1(p) + (1-mu) F2(p) + C[h_mu](p)` on the grid, with
/// `h_mu = max{(1-mu)(F1-F2), mu (F2-F1)}`; returns the value and the
/// maximizing grid index.
fn dual_inner(g: &FunctionalGrid, mu: f64, s: &mut DualScratch) -> (f64, usize) {
    let n = g.q.len();
    s.h.clear();
    s.h.extend((0..n).map(|i| {
        let d = g.f1[i] - g.f2[i];
        ((1.0 - mu) * d).max(-mu * d)
    }));
    upper_hull_into(&g.q, &s.h, &mut s.hull);
    let mut best = (f64::NEG_INFINITY, 0);
    for seg in s.hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let slope = (s.h[b] - s.h[a]) / (g.q[b] - g.q[a]);
        for i in a..=b {
            let env = s.h[a] + slope * (g.q[i] - g.q[a]);
            let v = mu * g.f1[i] + (1.0 - mu) * g.f2[i] + env;
            if v > best.0 {
                best = (v, i);
            }
        }
    }
    if s.hull.len() == 1 {
        let i = s.hull[0];
        best = (mu * g.f1[i] + (1.0 - mu) * g.f2[i] + s.h[i], i);
    }
    best
}

/// Dual value `min_mu` of [`dual_inner`], for a precomputed grid.
pub(crate) fn marton_dual_on_grid(g: &FunctionalGrid, s: &mut DualScratch) -> (f64, f64) {
    let (mu, v) = golden_min(|mu| dual_inner(g, mu, s).0, 0.0, 1.0, 1e-9);
    (v, mu)
}

/// Lagrangian dual of the Marton sum rate,
/// `min_mu max_p mu F1(p) + (1-mu) F2(p) + C[h_mu](p)`, evaluated on an
/// `n`-point grid. Independent of [`marton_sum_rate`]'s primal search.
pub fn marton_dual(f: &dyn MutualInfoFunctional, n: usize) -> MartonDual {
    let g = FunctionalGrid::new(f, n.max(3));
    let mut s = DualScratch::default();
    let (value, mu) = marton_dual_on_grid(&g, &mut s);
    // Read a witness off the hull segments under the maximizer on either
    // side of mu; each hull vertex is labelled by the active branch of h.
    let witness = [mu - 1e-6, mu + 1e-6, mu]
        .iter()
        .filter_map(|&m| {
            let m = m.clamp(0.0, 1.0);
            let (_, i) = dual_inner(&g, m, &mut s);
            let hull = s.hull.clone();
            let k = hull.partition_point(|&v| v < i);
            let atoms: Vec<(f64, usize)> = if k < hull.len() && hull[k] == i {
                vec![(1.0, i)]
            } else if k == 0 || k == hull.len() {
                return None;
            } else {
                let (a, b) = (hull[k - 1], hull[k]);
                let w = (g.q[b] - g.q[i]) / (g.q[b] - g.q[a]);
                vec![(w, a), (1.0 - w, b)]
            };
            let mut one = Vec::new();
            let mut two = Vec::new();
            for (w, v) in atoms {
                if g.f1[v] - g.f2[v] >= 0.0 {
                    one.push((w, g.q[v]));
                } else {
                    two.push((w, g.q[v]));
                }
            }
            let mut beta = [0.0; 5];
            let mut p = [0.5; 5];
            for (j, (w, x)) in one.iter().chain(two.iter()).enumerate() {
                beta[j] = *w;
                p[j] = *x;
            }
            Some(MartonWitness { k: one.len(), beta, p })
        })
        .max_by(|a, b| a.sum_rate(f).total_cmp(&b.sum_rate(f)));
    MartonDual { value, mu, witness }
}

/// `P(U = u, V = v) = weights[u][v]`, `X = x_map[u][v]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UvWitness {
    pub weights: [[f64; 3]; 3],
    pub x_map: [[u8; 3]; 3],
}

impl UvWitness {
    /// `(I(V;Y1) + I(U;Y2|V), I(V;Y1|U) + I(U;Y2), I(V;Y1) + I(U;Y2))`.
    pub fn sum_bounds(&self, f: &dyn MutualInfoFunctional) -> [f64; 3] {
        let w = &self.weights;
        let x = |u: usize, v: usize| self.x_map[u][v] as f64;
        let mut mean = 0.0;
        let mut pu = [0.0; 3];
        let mut pv = [0.0; 3];
        let mut mu = [0.0; 3];
        let mut mv = [0.0; 3];
        for u in 0..3 {
            for v in 0..3 {
                mean += w[u][v] * x(u, v);
                pu[u] += w[u][v];
                pv[v] += w[u][v];
                mu[u] += w[u][v] * x(u, v);
                mv[v] += w[u][v] * x(u, v);
            }
        }
        let cond = |m: f64, p: f64| if p > 0.0 { (m / p).clamp(0.0, 1.0) } else { 0.0 };
        // Terms F_i(x(u, v)) vanish: a deterministic input carries no information.
        let (f1m, f2m) = (f.f1(mean), f.f2(mean));
        let (mut sv1, mut sv2, mut su1, mut su2) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..3 {
            let qv = cond(mv[j], pv[j]);
            let qu = cond(mu[j], pu[j]);
            sv1 += pv[j] * f.f1(qv);
            sv2 += pv[j] * f.f2(qv);
            su1 += pu[j] * f.f1(qu);
            su2 += pu[j] * f.f2(qu);
        }
        let i_v_y1 = f1m - sv1;
        let i_u_y2_given_v = sv2;
        let i_v_y1_given_u = su1;
        let i_u_y2 = f2m - su2;
        [
            i_v_y1 + i_u_y2_given_v,
            i_v_y1_given_u + i_u_y2,
            i_v_y1 + i_u_y2,
        ]
    }

    pub fn sum_rate(&self, f: &dyn MutualInfoFunctional) -> f64 {
        let b = self.sum_bounds(f);
        b[0].min(b[1]).min(b[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvOptions {
    pub starts_per_map: usize,
    pub seed: u64,
    /// Search one map per orbit under row and column relabelling.
    pub dedupe: bool,
}

impl Default for UvOptions {
    fn default() -> Self {
        Self {
            starts_per_map: 12,
            seed: 0x5eed,
            dedupe: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UvResult {
    pub value: f64,
    pub witness: UvWitness,
    pub maps_searched: usize,
    /// Number of maps whose best value is within 1e-7 of the optimum.
    pub optimal_maps: usize,
}

const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn map_code(m: &[[u8; 3]; 3]) -> u16 {
    let mut c = 0u16;
    for row in m {
        for &b in row {
            c = (c << 1) | b as u16;
        }
    }
    c
}

fn decode_map(code: u16) -> [[u8; 3]; 3] {
    std::array::from_fn(|u| std::array::from_fn(|v| ((code >> (8 - (3 * u + v))) & 1) as u8))
}

/// Representatives of the 512 maps `x(u, v)`, one per relabelling orbit when
/// `dedupe` is set.
fn candidate_maps(dedupe: bool) -> Vec<[[u8; 3]; 3]> {
    let all = (0u16..512).map(decode_map);
    if !dedupe {
        return all.collect();
    }
    all.filter(|m| {
        let code = map_code(m);
        PERMS.iter().all(|r| {
            PERMS.iter().all(|c| {
                let t: [[u8; 3]; 3] = std::array::from_fn(|u| std::array::from_fn(|v| m[r[u]][c[v]]));
                map_code(&t) >= code
            })
        })
    })
    .collect()
}

/// Maximum UV outer-bound sum rate over `|U| = |V| = 3` and deterministic
/// `x(u, v)`: the smallest of the three sum constraints the bound implies,
/// maximized per map by seeded multistart Nelder-Mead on softmax weights.
pub fn uv_sum_rate(f: &dyn MutualInfoFunctional, opts: &UvOptions) -> UvResult {
    let maps = candidate_maps(opts.dedupe);
    let simplex = SimplexOptions {
        max_evals: 4000,
        f_tol: 1e-15,
        step: 1.0,
    };
    let per_map: Vec<(f64, UvWitness)> = maps
        .par_iter()
        .map(|&x_map| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ map_code(&x_map) as u64);
            let decode = |z: &[f64]| {
                let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
                let s: f64 = e.iter().sum();
                UvWitness {
                    weights: std::array::from_fn(|u| std::array::from_fn(|v| e[3 * u + v] / s)),
                    x_map,
                }
            };
            let mut best: Option<(f64, UvWitness)> = None;
            for _ in 0..opts.starts_per_map {
                let z0: Vec<f64> = (0..9).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let (z, _) = nelder_mead_max(|z| decode(z).sum_rate(f), &z0, simplex);
                let (z, v) = nelder_mead_max(|z| decode(z).sum_rate(f), &z, SimplexOptions { step: 0.2, ..simplex });
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, decode(&z)));
                }
            }
            best.unwrap()
        })
        .collect();
    let (value, witness) = per_map
        .iter()
        .copied()
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    UvResult {
        value,
        witness,
        maps_searched: maps.len(),
        optimal_maps: per_map.iter().filter(|m| m.0 >= value - 1e-7).count(),
    }
}

/// Largest sum rate achievable by superposition coding, over both choices
/// of the receiver that decodes both messages:
/// `max_p min{I_w(p) + C[I_s - I_w](p), I_s(p)}`.
pub fn superposition_sum_rate(params: &PbcParams) -> f64 {
    [Receiver::One, Receiver::Two]
        .iter()
        .map(|&strong| {
            let frame = Frame::new(params, strong);
            let env = frame.envelope(1.0, 1.0);
            golden_max(|p| (frame.i_w(p) + env.eval(p)).min(frame.i_s(p)), 0.0, 1.0, 1e-10).1
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(alpha: f64, s1: f64, s2: f64) -> PbcParams {
        PbcParams::new(alpha, s1, s2).unwrap()
    }

    fn quick() -> MartonOptions {
        MartonOptions {
            starts: 8,
            ..Default::default()
        }
    }

    #[test]
    fn identical_receivers_give_single_user_capacity() {
        let params = p(1.0, 0.5, 0.5);
        let c = params.capacity(Receiver::One);
        let m = marton_sum_rate(&params, &quick());
        assert!((m.value - c).abs() < 1e-9, "{} vs {c}", m.value);
        assert!((superposition_sum_rate(&params) - c).abs() < 1e-12);
        let u = uv_sum_rate(&params, &UvOptions { starts_per_map: 2, ..Default::default() });
        assert!((u.value - c).abs() < 1e-7, "{} vs {c}", u.value);
    }

    #[test]
    fn witnesses_recompute() {
        let params = p(0.34, 0.1, 1.0);
        let m = marton_sum_rate(&params, &quick());
        assert!((m.witness.sum_rate(&params) - m.value).abs() < 1e-12);
        assert!((m.witness.beta.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.value <= m.dual_bound + 1e-7);
    }

    #[test]
    fn uv_plug_in_witnesses() {
        // V = X, U constant gives I(X;Y1); U = X, V constant gives I(X;Y2).
        let params = p(0.34, 0.1, 1.0);
        let q = 0.4;
        let v_is_x = UvWitness {
            weights: [[1.0 - q, q, 0.0], [0.0; 3], [0.0; 3]],
            x_map: [[0, 1, 0], [0, 0, 0], [0, 0, 0]],
        };
        let b = v_is_x.sum_bounds(&params);
        assert!((b[0] - params.f1(q)).abs() < 1e-14);
        let u_is_x = UvWitness {
            weights: [[1.0 - q, 0.0, 0.0], [q, 0.0, 0.0], [0.0; 3]],
            x_map: [[0, 0, 0], [1, 0, 0], [0, 0, 0]],
        };
        let b = u_is_x.sum_bounds(&params);
        assert!((b[1] - params.f2(q)).abs() < 1e-14);
    }

    #[test]
    fn map_orbits() {
        let reps = candidate_maps(true);
        assert!(reps.len() < 512 / 6);
        // every map is a relabelling of some representative
        let codes: std::collections::HashSet<u16> = reps.iter().map(map_code).collect();
        for code in 0u16..512 {
            let m = decode_map(code);
            let hit = PERMS.iter().any(|r| {
                PERMS.iter().any(|c| {
                    let t: [[u8; 3]; 3] = std::array::from_fn(|u| std::array::from_fn(|v| m[r[u]][c[v]]));
                    codes.contains(&map_code(&t))
                })
            });
            assert!(hit);
        }
    }

    #[test]
    fn superposition_in_less_noisy_regime_is_strong_capacity() {
        let params = p(0.8, 0.1, 1.0);
        let c1 = params.capacity(Receiver::One);
        assert!((superposition_sum_rate(&params) - c1).abs() < 1e-12);
    }
}
