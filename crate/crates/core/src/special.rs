//! Cancellation-free forms of the logarithmic expressions that appear in the
//! rate functionals and breakpoint formulas.

/// `-ln(1 - u) - u` for `u` in `[0, 1]`; infinite at `u = 1`.
pub(crate) fn neg_log1m_minus(u: f64) -> f64 {
    if u >= 1.0 {
        return f64::INFINITY;
    }
    if u.abs() < 0.05 {
        // sum_{k>=2} u^k / k
        let mut term = u * u;
        let mut sum = 0.0;
        for k in 2..24 {
            sum += term / k as f64;
            term *= u;
        }
        sum
    } else {
        -(-u).ln_1p() - u
    }
}

/// `v - ln(1 + v)` for `v >= 0`.
pub(crate) fn minus_log1p(v: f64) -> f64 {
    if v.abs() < 0.05 {
        // sum_{k>=2} (-1)^k v^k / k
        let mut term = v * v;
        let mut sum = 0.0;
        for k in 2..24 {
            let signed = if k % 2 == 0 { term } else { -term };
            sum += signed / k as f64;
            term *= v;
        }
        sum
    } else {
        v - v.ln_1p()
    }
}

/// `s * (x/s - ln(1 + x/s))`, continuously extended to `x` at `s = 0`.
pub(crate) fn scaled_minus_log1p(x: f64, s: f64) -> f64 {
    if s == 0.0 {
        x
    } else {
        s * minus_log1p(x / s)
    }
}

/// `x ln x` with `0 ln 0 = 0`.
pub(crate) fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy in nats, accurate for arguments near 0 and 1.
pub(crate) fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.ln() - (1.0 - p) * (-p).ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_and_direct_branches_agree() {
        for &u in &[0.0499, 0.0501] {
            let direct = -(-u as f64).ln_1p() - u;
            assert!((neg_log1m_minus(u) - direct).abs() < 1e-15);
            let direct = u - (u as f64).ln_1p();
            assert!((minus_log1p(u) - direct).abs() < 1e-15);
        }
        assert!(neg_log1m_minus(1.0).is_infinite());
        assert!((neg_log1m_minus(1e-6) / (5e-13 + 1e-18 / 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_is_symmetric() {
        for &p in &[1e-9, 0.1, 0.3] {
            assert!((binary_entropy(p) - binary_entropy(1.0 - p)).abs() < 1e-12);
        }
        assert!((binary_entropy(0.5) - std::f64::consts::LN_2).abs() < 1e-15);
    }
}
