//! One-dimensional search helpers for the capacity optimizer.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes `f` over `[lo, hi]` by golden-section search.
///
/// Both endpoints are evaluated too, so an optimum sitting on a bound is
/// returned exactly rather than approached from inside.
pub(crate) fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    if hi <= lo {
        return (lo, f(lo));
    }
    let mut best = (lo, f(lo));
    let f_hi = f(hi);
    if f_hi > best.1 {
        best = (hi, f_hi);
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    for (x, fx) in [(c, fc), (d, fd)] {
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// `n` points log-spaced over `[lo, hi]`, endpoints included.
pub(crate) fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `n` points evenly spaced over `[lo, hi]`, endpoints included.
pub(crate) fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_interior_maximum() {
        let (x, fx) = golden_max(|x| -(x - 0.3).powi(2), -2.0, 5.0, 1e-9);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-8);
        assert_abs_diff_eq!(fx, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn returns_bound_when_monotone() {
        let (x, _) = golden_max(|x| x, 1.0, 2.0, 1e-6);
        assert_eq!(x, 2.0);
        let (x, _) = golden_max(|x| -x, 1.0, 2.0, 1e-6);
        assert_eq!(x, 1.0);
    }

    #[test]
    fn spacing() {
        let g = log_space(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert_abs_diff_eq!(g[3], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g[6], 1e3, epsilon = 1e-9);
        assert_eq!(lin_space(2.0, 4.0, 3), vec![2.0, 3.0, 4.0]);
        assert_eq!(log_space(5.0, 5.0, 10), vec![5.0]);
    }
}
