//! Scalar and low-dimensional search routines shared by the envelope, region
//! and bound computations.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Returns `(x_max, f(x_max))`. The bracket is shrunk until it is narrower
/// than `tol`; the endpoints are compared at the end so that a maximum sitting
/// on the boundary is not lost to the interior probes.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

/// Bisection for `g(x) = target` with `g` nondecreasing on `[lo, hi]`.
///
/// The caller guarantees `g(lo) <= target <= g(hi)`.
pub fn bisect_increasing(
    g: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Options for [`nelder_mead_max`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Stop once the spread of objective values across the simplex drops below this.
    pub f_tol: f64,
    /// Initial edge length of the simplex.
    pub step: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            f_tol: 1e-14,
            step: 0.25,
        }
    }
}

/// Nelder-Mead simplex search maximizing `f` over an unconstrained vector.
///
/// Callers map bounded variables onto the real line themselves (logistic or
/// softmax coordinates).
pub fn nelder_mead_max(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    opts: SimplexOptions,
) -> (Vec<f64>, f64) {
    let n = x0.len();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.step;
        pts.push(p);
    }
    // Work with -f so the textbook minimization steps read naturally.
    let mut vals: Vec<f64> = pts.iter().map(|p| -f(p)).collect();
    let mut evals = n + 1;
    let mut order: Vec<usize> = (0..=n).collect();
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while evals < opts.max_evals {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        if (vals[worst] - vals[best]).abs() <= opts.f_tol {
            break;
        }
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..n] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x / n as f64;
            }
        }
        let along = |out: &mut Vec<f64>, coef: f64, pts: &Vec<Vec<f64>>| {
            for k in 0..n {
                out[k] = centroid[k] + coef * (pts[worst][k] - centroid[k]);
            }
        };
        along(&mut trial, -1.0, &pts);
        let fr = -f(&trial);
        evals += 1;
        if fr < vals[best] {
            along(&mut trial2, -2.0, &pts);
            let fe = -f(&trial2);
            evals += 1;
            if fe < fr {
                pts[worst].clone_from(&trial2);
                vals[worst] = fe;
            } else {
                pts[worst].clone_from(&trial);
                vals[worst] = fr;
            }
        } else if fr < vals[second] {
            pts[worst].clone_from(&trial);
            vals[worst] = fr;
        } else {
            let coef = if fr < vals[worst] { -0.5 } else { 0.5 };
            along(&mut trial2, coef, &pts);
            let fc = -f(&trial2);
            evals += 1;
            if fc < vals[worst].min(fr) {
                pts[worst].clone_from(&trial2);
                vals[worst] = fc;
            } else {
                // shrink toward the best vertex
                let anchor = pts[best].clone();
                for &i in &order[1..] {
                    for k in 0..n {
                        pts[i][k] = anchor[k] + 0.5 * (pts[i][k] - anchor[k]);
                    }
                    vals[i] = -f(&pts[i]);
                    evals += 1;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    (pts[best].clone(), -vals[best])
}
