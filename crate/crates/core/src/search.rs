//! One-dimensional searches for unimodal objectives.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimizes a convex (or unimodal) function on `[lo, hi]` by golden-section
/// search until the bracket is narrower than `tol`. The endpoints are always
/// evaluated, so boundary minima are returned exactly.
pub fn minimize_unimodal<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc <= fd {
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
    let mid = 0.5 * (a + b);
    let mut best = (mid, f(mid));
    for x in [lo, hi, c, d] {
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Maximizes a concave function on `[lo, hi]`.
pub fn maximize_unimodal<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = minimize_unimodal(|t| -f(t), lo, hi, tol);
    (x, -v)
}

/// Maximizes a concave function on `[0, ∞)`. The bracket doubles until the
/// objective stops increasing or `cap` is reached, then golden-section search
/// runs on the final bracket.
pub fn maximize_concave_halfline<F: Fn(f64) -> f64>(f: F, cap: f64, tol: f64) -> (f64, f64) {
    let f0 = f(0.0);
    let mut hi = 1.0;
    let mut prev = f0;
    loop {
        let fh = f(hi);
        if fh <= prev || hi >= cap {
            break;
        }
        prev = fh;
        hi *= 2.0;
    }
    let hi = hi.min(cap);
    maximize_unimodal(f, 0.0, hi, tol * hi.max(1.0))
}
