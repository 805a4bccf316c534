use super::grid::Grid;
use crate::error::{Error, Result};
use crate::special::sphere_area;

/// 8-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub(crate) const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// `∫_a^b g` by one 8-point Gauss-Legendre panel.
#[inline]
pub(crate) fn gl8(a: f64, b: f64, g: impl Fn(f64) -> f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * GL8.iter().map(|&(x, w)| w * g(mid + half * x)).sum::<f64>()
}

/// `∫_{R^N} f(|y|) dy` for a radial `f`: Gauss-Legendre on every grid interval plus an
/// analytic power-law tail beyond `r_max` whose exponent is read off the last two nodes.
pub fn radial_moment(grid: &Grid, n: usize, f: impl Fn(f64) -> f64) -> Result<f64> {
    let nf = n as f64;
    let rs = grid.radii();
    let mut body = 0.0;
    for w in rs.windows(2) {
        body += gl8(w[0], w[1], |r| f(r) * r.powi(n as i32 - 1));
    }
    let m = rs.len() - 1;
    let (r1, r0) = (rs[m], rs[m - 1]);
    let (f1, f0) = (f(r1), f(r0));
    let tail = if f1 == 0.0 {
        0.0
    } else {
        if f0 == 0.0 || f1.signum() != f0.signum() {
            return Err(Error::Divergent("integrand changes sign at the end of the grid".into()));
        }
        let e = -(f1 / f0).ln() / (r1 / r0).ln();
        if !(e > nf + 0.1) {
            return Err(Error::Divergent(format!(
                "integrand decays like r^-{e:.3}, not integrable in dimension {n}"
            )));
        }
        f1 * r1.powi(n as i32) / (e - nf)
    };
    Ok(sphere_area(n) * (body + tail))
}

/// Finite-difference weights (Fornberg) for derivatives `0..=order` at `x0` from nodes `xs`.
pub(crate) fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
