use super::grid::Grid;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Closed-form far-field law `Σ c_i r^{-e_i} + c_log ln(r) r^{-e_log}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerTail {
    pub terms: Vec<(f64, f64)>,
    pub log_term: Option<(f64, f64)>,
}

impl PowerTail {
    pub fn power(c: f64, e: f64) -> Self {
        Self { terms: vec![(c, e)], log_term: None }
    }

    /// Value, first and second derivative at `r > 0`.
    pub fn eval3(&self, r: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for &(c, e) in &self.terms {
            let f = c * r.powf(-e);
            out[0] += f;
            out[1] += -e * f / r;
            out[2] += e * (e + 1.0) * f / (r * r);
        }
        if let Some((c, e)) = self.log_term {
            let l = r.ln();
            let base = c * r.powf(-e);
            out[0] += base * l;
            out[1] += base / r * (1.0 - e * l);
            out[2] += base / (r * r) * (-2.0 * e - 1.0 + e * (e + 1.0) * l);
        }
        out
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval3(r)[0]
    }

    /// The same law multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|&(c, e)| (s * c, e)).collect(),
            log_term: self.log_term.map(|(c, e)| (s * c, e)),
        }
    }

    /// Slowest decay exponent among the terms.
    pub fn leading_exponent(&self) -> f64 {
        let mut e = self.terms.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        if let Some((_, el)) = self.log_term {
            e = e.min(el);
        }
        e
    }
}

/// A radial function sampled on a [`Grid`] with first and second derivatives,
/// interpolated by piecewise quintic Hermite polynomials and continued by a [`PowerTail`].
#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: Arc<Grid>,
    f: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    tail: PowerTail,
}

impl RadialProfile {
    pub fn new(grid: Arc<Grid>, f: Vec<f64>, d1: Vec<f64>, d2: Vec<f64>, tail: PowerTail) -> Self {
        assert_eq!(f.len(), grid.len());
        assert_eq!(d1.len(), grid.len());
        assert_eq!(d2.len(), grid.len());
        Self { grid, f, d1, d2, tail }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn derivs(&self) -> &[f64] {
        &self.d1
    }

    pub fn second_derivs(&self) -> &[f64] {
        &self.d2
    }

    pub fn tail(&self) -> &PowerTail {
        &self.tail
    }

    /// Interpolation degree between nodes.
    pub fn interp_order(&self) -> usize {
        5
    }

    /// Value at radius `r >= 0`.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        self.eval_with_deriv(r).0
    }

    /// Value and first derivative at radius `r >= 0`.
    #[inline]
    pub fn eval_with_deriv(&self, r: f64) -> (f64, f64) {
        if r >= self.grid.r_max() {
            let t = self.tail.eval3(r);
            return (t[0], t[1]);
        }
        let i = self.grid.locate(r);
        let rs = self.grid.radii();
        let h = rs[i + 1] - rs[i];
        let t = (r - rs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        let h3 = 0.5 * t3 - t4 + 0.5 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let g0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let g1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let g2 = t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4;
        let g3 = 1.5 * t2 - 4.0 * t3 + 2.5 * t4;
        let g4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let g5 = -g0;
        let (f0, f1) = (self.f[i], self.f[i + 1]);
        let (a0, a1) = (h * self.d1[i], h * self.d1[i + 1]);
        let (b0, b1) = (h * h * self.d2[i], h * h * self.d2[i + 1]);
        let val = f0 * h0 + a0 * h1 + b0 * h2 + f1 * h5 + a1 * h4 + b1 * h3;
        let der = (f0 * g0 + a0 * g1 + b0 * g2 + f1 * g5 + a1 * g4 + b1 * g3) / h;
        (val, der)
    }
}
