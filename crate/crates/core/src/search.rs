//! One-dimensional search helpers.

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns `(argmax, max)`, taking the endpoints into account so a monotone
/// `f` yields the larger endpoint.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 200 {
        if fc >= fd {
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
        iters += 1;
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_gives_endpoint() {
        let (x, v) = golden_max(|x| x, 0.0, 2.0, 1e-10);
        assert_eq!(x, 2.0);
        assert_eq!(v, 2.0);
    }
}
