//! One-dimensional minimization and small least-squares helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimizer of a unimodal `f` on `[a, b]`.
pub fn golden_min(mut a: f64, mut b: f64, tol: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iter = 0;
    while (b - a).abs() > tol * (1.0 + c.abs() + d.abs()) && iter < 200 {
        if fc < fd {
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
        iter += 1;
    }
    0.5 * (a + b)
}

/// Least-squares fit `y ≈ c0 * x0 + c1 * x1`; returns the coefficients and the residual sum of squares.
pub fn lsq2(x0: &[f64], x1: &[f64], y: &[f64]) -> ([f64; 2], f64) {
    let (mut s00, mut s01, mut s11, mut t0, mut t1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&a, &b), &v) in x0.iter().zip(x1).zip(y) {
        s00 += a * a;
        s01 += a * b;
        s11 += b * b;
        t0 += a * v;
        t1 += b * v;
    }
    let det = s00 * s11 - s01 * s01;
    let c = if det.abs() <= 1e-300 || det.abs() < 1e-14 * s00 * s11 {
        [t0 / s00, 0.0]
    } else {
        [(t0 * s11 - t1 * s01) / det, (s00 * t1 - s01 * t0) / det]
    };
    let rss = x0
        .iter()
        .zip(x1)
        .zip(y)
        .map(|((&a, &b), &v)| (v - c[0] * a - c[1] * b).powi(2))
        .sum();
    (c, rss)
}

/// Ordinary least-squares line `y = a + b x`; returns `(a, b, standard error of b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let se = if x.len() > 2 {
        let rss: f64 = x.iter().zip(y).map(|(u, v)| (v - a - b * u).powi(2)).sum();
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (a, b, se)
}
