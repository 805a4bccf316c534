use super::ground_state::GroundState;
use super::profile::{PowerTail, RadialProfile};
use super::quadrature::gl8;
use crate::error::{invalid, Result};

/// Decaying solution of `-Δw = V^{p-1}` in `R^N`.
#[derive(Debug, Clone)]
pub struct AuxProfileW {
    pub w: RadialProfile,
    /// `m(r_max) = ∫_0^{r_max} t^{N-1} V^{p-1}`.
    pub mass: f64,
}

impl AuxProfileW {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        self.w.eval(r)
    }

    /// Decay exponent of `w`: `min(N-2, (p-1)(N-2)-2)`.
    pub fn decay_exponent(n: usize, p: f64) -> f64 {
        let nf = n as f64;
        (nf - 2.0).min((p - 1.0) * (nf - 2.0) - 2.0)
    }
}

/// `w(r) = ∫_r^∞ s^{1-N} ∫_0^s t^{N-1} V^{p-1}(t) dt ds` by nested Gauss-Legendre quadrature on
/// the profile grid, closed with the exact integral of the `b r^{2-N}` far field of `V`.
pub fn solve_w(gs: &GroundState) -> Result<AuxProfileW> {
    let pair = gs.pair;
    let nf = pair.nf();
    let p = pair.p();
    if !((p - 1.0) * (nf - 2.0) > 2.0) {
        return Err(invalid(format!(
            "(p-1)(N-2) = {} must exceed 2 for w to exist",
            (p - 1.0) * (nf - 2.0)
        )));
    }
    let n1 = pair.n() as i32 - 1;
    let src = |t: f64| gs.v.eval(t).powf(p - 1.0);
    let grid = gs.grid().clone();
    let rs = grid.radii();
    let m = rs.len();

    // m(r_i) = ∫_0^{r_i} t^{N-1} V^{p-1}
    let mut mass = vec![0.0; m];
    for i in 1..m {
        mass[i] = mass[i - 1] + gl8(rs[i - 1], rs[i], |t| t.powi(n1) * src(t));
    }

    // Beyond r_max: V^{p-1} ≈ b^{p-1} r^{-(p-1)(N-2)}, integrated exactly.
    let big_r = grid.r_max();
    let bp = gs.b.powf(p - 1.0);
    let alpha = nf - (p - 1.0) * (nf - 2.0);
    let m_end = mass[m - 1];
    let law = if alpha.abs() < 1e-12 {
        PowerTail {
            terms: vec![((m_end - bp * big_r.ln()) / (nf - 2.0) + bp / (nf - 2.0).powi(2), nf - 2.0)],
            log_term: Some((bp / (nf - 2.0), nf - 2.0)),
        }
    } else {
        PowerTail {
            terms: vec![
                ((m_end - bp * big_r.powf(alpha) / alpha) / (nf - 2.0), nf - 2.0),
                (bp / (alpha * (nf - 2.0 - alpha)), nf - 2.0 - alpha),
            ],
            log_term: None,
        }
    };

    let mut wf = vec![0.0; m];
    let mut wd = vec![0.0; m];
    let mut wdd = vec![0.0; m];
    wf[m - 1] = law.eval(big_r);
    for i in (0..m - 1).rev() {
        let (a, b) = (rs[i], rs[i + 1]);
        let m_a = mass[i];
        wf[i] = wf[i + 1]
            + gl8(a, b, |s| {
                let inner = m_a + gl8(a, s, |t| t.powi(n1) * src(t));
                inner / s.powi(n1)
            });
    }
    for i in 0..m {
        let r = rs[i];
        if i == 0 {
            wd[i] = 0.0;
            wdd[i] = -src(0.0) / nf;
        } else {
            wd[i] = -mass[i] / r.powi(n1);
            wdd[i] = -(nf - 1.0) / r * wd[i] - src(r);
        }
    }
    Ok(AuxProfileW { w: RadialProfile::new(grid, wf, wd, wdd, law), mass: m_end })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{solve_ground_state, GridOpts};
    use crate::CriticalPair;
    use approx::assert_relative_eq;

    /// Adaptive Simpson on `[a, b]`.
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40)
    }

    /// For `V = (1+r^2/24)^{-2}` in `R^6`: with `x = r^2/24`, `m = 6912 g(x)` where
    /// `g(x) = x - 2 ln(1+x) + x/(1+x)`, and `w(r) = 6 ∫_{x_r}^∞ g(x)/x^3 dx`.
    fn w_oracle(r: f64) -> f64 {
        let g = |x: f64| {
            if x < 1e-3 {
                x.powi(3) / 3.0 - x.powi(4) / 2.0 + 3.0 * x.powi(5) / 5.0
            } else {
                x - 2.0 * x.ln_1p() + x / (1.0 + x)
            }
        };
        let x0 = r * r / 24.0;
        // x = x0 + t/(1-t) maps [0,1) onto [x0, ∞)
        let integrand = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let x = x0 + t / (1.0 - t);
            let jac = 1.0 / (1.0 - t).powi(2);
            if x == 0.0 {
                return 1.0 / 3.0 * jac / 1.0;
            }
            g(x) / x.powi(3) * jac
        };
        6.0 * simpson(&integrand, 0.0, 1.0, 1e-11)
    }

    #[test]
    fn matches_independent_quadrature() {
        let gs = solve_ground_state(CriticalPair::new(6, 2.0).unwrap(), &GridOpts::default()).unwrap();
        let w = solve_w(&gs).unwrap();
        for r in [0.0, 0.5, 2.0, 10.0, 100.0] {
            assert_relative_eq!(w.eval(r), w_oracle(r), max_relative = 1e-5);
        }
    }

    #[test]
    fn regular_positive_decaying() {
        for (n, p) in [(6, 2.0), (6, 1.8), (8, 5.0 / 3.0)] {
            let gs = solve_ground_state(CriticalPair::new(n, p).unwrap(), &GridOpts::default()).unwrap();
            let w = solve_w(&gs).unwrap();
            assert_eq!(w.w.derivs()[0], 0.0);
            assert!(w.w.values().iter().all(|&x| x > 0.0));
            assert!(w.w.values().windows(2).all(|v| v[1] < v[0]));
            let rmax = gs.grid().r_max();
            assert!(w.eval(rmax) < 1e-3 * w.eval(0.0));
            // decay exponent min{N-2, (p-1)(N-2)-2} from a log-log slope over the last decade
            let expected = AuxProfileW::decay_exponent(n, p);
            let slope = -(w.eval(rmax) / w.eval(rmax / 10.0)).ln() / 10f64.ln();
            assert!((slope - expected).abs() < 0.05, "N={n} p={p}: {slope} vs {expected}");
        }
    }

    #[test]
    fn equation_residual() {
        let gs = solve_ground_state(CriticalPair::new(6, 1.8).unwrap(), &GridOpts::default()).unwrap();
        let w = solve_w(&gs).unwrap();
        let rs = gs.grid().radii();
        let p = gs.pair.p();
        for i in (3..rs.len() - 3).step_by(97) {
            let wts = crate::radial::quadrature::fornberg_weights(rs[i], &rs[i - 2..=i + 2], 2);
            let d = |k: usize| -> f64 { (0..5).map(|j| wts[k][j] * w.w.values()[i - 2 + j]).sum() };
            let lap = d(2) + 5.0 / rs[i] * d(1);
            let src = gs.v.values()[i].powf(p - 1.0);
            let scale = d(2).abs() + (5.0 / rs[i] * d(1)).abs() + src;
            assert!((lap + src).abs() / scale < 1e-7, "r={}", rs[i]);
        }
    }

    #[test]
    fn rejects_small_p() {
        let gs = solve_ground_state(CriticalPair::new(6, 1.4).unwrap(), &GridOpts::default()).unwrap();
        assert!(solve_w(&gs).is_err());
    }
}
