//! Leading-order reduced energy `F(mu0, r, lambda)` and its interior maximum.

use crate::energy::InteractionConstants;
use crate::error::{invalid, Error, Result};
use crate::optimize::golden_min;
use crate::radial::GroundState;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Search rectangle `(m_lo, m_hi) x (l_lo, l_hi)` in `(M0, Lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub m_lo: f64,
    pub m_hi: f64,
    pub l_lo: f64,
    pub l_hi: f64,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self { m_lo: 0.125, m_hi: 8.0, l_lo: 0.125, l_hi: 8.0 }
    }
}

impl SearchBox {
    fn expanded(&self, f: f64) -> Self {
        Self { m_lo: self.m_lo / f, m_hi: self.m_hi * f, l_lo: self.l_lo / f, l_hi: self.l_hi * f }
    }

    fn valid(&self) -> bool {
        0.0 < self.m_lo && self.m_lo < self.m_hi && 0.0 < self.l_lo && self.l_lo < self.l_hi
    }
}

/// `F = -B1 / (r lambda)^{N-2} + B2 U_{0,mu0}(r) / lambda^{N/(q+1)}` for one ground state.
#[derive(Debug, Clone)]
pub struct ReducedLandscape<'a> {
    pub b1: f64,
    pub b2: f64,
    pub gs: &'a GroundState,
    pub search: SearchBox,
}

/// Location of the interior maximum of `F*(M0, Lambda) = F(M0, 1, Lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorMax {
    pub m0: f64,
    pub lambda: f64,
    pub value: f64,
    /// Maximum over the box minus maximum over its boundary.
    pub margin: f64,
    pub search: SearchBox,
    /// Number of factor-2 box expansions needed.
    pub expansions: usize,
}

impl InteriorMax {
    /// A point of the critical orbit `(M0/t, t, Lambda/t)` of the three-variable landscape.
    pub fn orbit_point(&self, t: f64) -> (f64, f64, f64) {
        (self.m0 / t, t, self.lambda / t)
    }
}

/// Largest number of box expansions tried by [`ReducedLandscape::find_interior_max`].
pub const MAX_EXPANSIONS: usize = 12;

impl<'a> ReducedLandscape<'a> {
    pub fn new(b1: f64, b2: f64, gs: &'a GroundState) -> Result<Self> {
        if !(b1 > 0.0 && b2 > 0.0) {
            return Err(invalid("B1 and B2 must be positive"));
        }
        Ok(Self { b1, b2, gs, search: SearchBox::default() })
    }

    pub fn from_constants(c: &InteractionConstants, gs: &'a GroundState) -> Result<Self> {
        Self::new(c.b1, c.b2, gs)
    }

    pub fn with_box(mut self, search: SearchBox) -> Result<Self> {
        if !search.valid() {
            return Err(invalid("search box needs 0 < lo < hi in both directions"));
        }
        self.search = search;
        Ok(self)
    }

    fn s(&self) -> f64 {
        self.gs.pair.nf() - 2.0
    }

    fn au(&self) -> f64 {
        self.gs.pair.u_scale_exp()
    }

    /// `U_{0,M0}(1) = M0^{N/(q+1)} U_{0,1}(M0)`.
    pub fn inner_value(&self, mu0: f64, r: f64) -> f64 {
        mu0.powf(self.au()) * self.gs.u.eval(mu0 * r)
    }

    pub fn f(&self, mu0: f64, r: f64, lambda: f64) -> f64 {
        -self.b1 / (r * lambda).powf(self.s()) + self.b2 * self.inner_value(mu0, r) / lambda.powf(self.au())
    }

    /// `F*(M0, Lambda) = F(M0, 1, Lambda)`.
    pub fn f_star(&self, m0: f64, lambda: f64) -> f64 {
        self.f(m0, 1.0, lambda)
    }

    /// `Lambda(M0) = [(q+1)(N-2) B1 / (B2 N U_{0,M0}(1))]^{(p+1)/N}`, the maximizer in `Lambda`.
    pub fn lambda_star(&self, m0: f64) -> f64 {
        let pair = &self.gs.pair;
        let base = (pair.q() + 1.0) * self.s() * self.b1 / (self.b2 * pair.nf() * self.inner_value(m0, 1.0));
        base.powf((pair.p() + 1.0) / pair.nf())
    }

    /// `|dF*/dLambda|` at `Lambda(M0)` by central difference, relative to the derivative of the
    /// polygon term alone.
    pub fn stationarity_residual(&self, m0: f64) -> f64 {
        let l = self.lambda_star(m0);
        let h = 1e-5 * l;
        let d = (self.f_star(m0, l + h) - self.f_star(m0, l - h)) / (2.0 * h);
        let scale = self.s() * self.b1 / l.powf(self.s() + 1.0);
        d.abs() / scale
    }

    /// `F1*(M0) = F*(M0, Lambda(M0))` evaluated directly.
    pub fn f1_star(&self, m0: f64) -> f64 {
        self.f_star(m0, self.lambda_star(m0))
    }

    /// `F1*(M0)` from `tau B2 [N B2 / ((q+1)(N-2) B1)]^{(p+1)/(q+1)} U^{(p+1)(N-2)/N}`,
    /// `U = U_{0,M0}(1)`.
    pub fn f1_star_closed(&self, m0: f64) -> f64 {
        let pair = &self.gs.pair;
        let (n, p, q) = (pair.nf(), pair.p(), pair.q());
        let u = self.inner_value(m0, 1.0);
        pair.tau()
            * self.b2
            * (n * self.b2 / ((q + 1.0) * self.s() * self.b1)).powf((p + 1.0) / (q + 1.0))
            * u.powf((p + 1.0) * self.s() / n)
    }

    fn log_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
        (0..m).map(|i| lo * (hi / lo).powf(i as f64 / (m - 1) as f64)).collect()
    }

    /// `F*` on an `m x m` log grid of the current box, row-major in `M0`.
    pub fn scan(&self, m: usize) -> Vec<(f64, f64, f64)> {
        let b = self.search;
        let ms = Self::log_grid(b.m_lo, b.m_hi, m);
        let ls = Self::log_grid(b.l_lo, b.l_hi, m);
        ms.par_iter().flat_map_iter(|&m0| ls.iter().map(move |&l| (m0, l, self.f_star(m0, l)))).collect()
    }

    /// CSV dump `M0,Lambda,Fstar` of [`scan`](Self::scan).
    pub fn scan_csv(&self, m: usize) -> String {
        let mut s = String::from("M0,Lambda,Fstar\n");
        for (a, b, c) in self.scan(m) {
            let _ = writeln!(s, "{a:.16e},{b:.16e},{c:.16e}");
        }
        s
    }

    /// Grid scan plus refinement in the current box only; errors when the maximum is on the boundary.
    pub fn interior_max_in_box(&self, resolution: usize) -> Result<InteriorMax> {
        if resolution < 64 {
            return Err(invalid("grid resolution must be at least 64"));
        }
        let m = resolution;
        let vals = self.scan(m);
        let on_edge = |i: usize| {
            let (a, b) = (i / m, i % m);
            a == 0 || b == 0 || a == m - 1 || b == m - 1
        };
        let (mut best, mut best_edge) = ((0usize, f64::NEG_INFINITY), f64::NEG_INFINITY);
        for (i, v) in vals.iter().enumerate() {
            if v.2 > best.1 {
                best = (i, v.2);
            }
            if on_edge(i) {
                best_edge = best_edge.max(v.2);
            }
        }
        if on_edge(best.0) || best.1 <= best_edge {
            return Err(Error::NoInteriorMax(format!(
                "maximum {:.6e} of F* lies on the boundary of [{}, {}] x [{}, {}]",
                best.1, self.search.m_lo, self.search.m_hi, self.search.l_lo, self.search.l_hi
            )));
        }
        // refine: inner maximization in Lambda by golden section, outer in M0
        let step = (self.search.m_hi / self.search.m_lo).powf(1.0 / (m - 1) as f64);
        let m_grid = vals[best.0].0;
        let (lo, hi) = ((m_grid / step).ln(), (m_grid * step).ln());
        let inner = |m0: f64| -> (f64, f64) {
            let l0 = self.lambda_star(m0);
            let t = golden_min((l0 / 4.0).ln(), (4.0 * l0).ln(), 1e-12, |x| -self.f_star(m0, x.exp())).exp();
            (t, self.f_star(m0, t))
        };
        let m0 = golden_min(lo, hi, 1e-12, |x| -inner(x.exp()).1).exp();
        let (lambda, value) = inner(m0);
        Ok(InteriorMax { m0, lambda, value, margin: value - best_edge, search: self.search, expansions: 0 })
    }

    /// Interior maximum, enlarging the box by factors of two until the maximum is interior.
    pub fn find_interior_max(&self, resolution: usize) -> Result<InteriorMax> {
        let mut land = self.clone();
        for expansions in 0..=MAX_EXPANSIONS {
            match land.interior_max_in_box(resolution) {
                Ok(mut found) => {
                    found.expansions = expansions;
                    return Ok(found);
                }
                Err(Error::NoInteriorMax(_)) => land.search = land.search.expanded(2.0),
                Err(e) => return Err(e),
            }
        }
        Err(Error::NoInteriorMax(format!("no interior maximum after {MAX_EXPANSIONS} box expansions")))
    }

    /// Number of sign changes of `dF*/dLambda` on a log grid of `Lambda`.
    pub fn sign_changes_in_lambda(&self, m0: f64, lo: f64, hi: f64, points: usize) -> usize {
        let ls = Self::log_grid(lo, hi, points);
        let d: Vec<f64> = ls
            .iter()
            .map(|&l| {
                let h = 1e-6 * l;
                self.f_star(m0, l + h) - self.f_star(m0, l - h)
            })
            .collect();
        d.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
    }
    /// Largest relative defect of `F(mu0, r, lambda) = F(r mu0, 1, r lambda)` over `points`
    /// log-uniform random parameter triples in `[0.1, 10]^3`.
    pub fn scaling_defect(&self, points: usize, seed: u64) -> f64 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || 10f64.powf(rng.random_range(-1.0..1.0));
        let mut worst: f64 = 0.0;
        for _ in 0..points {
            let (m0, r, l) = (draw(), draw(), draw());
            let (a, b) = (self.f(m0, r, l), self.f(r * m0, 1.0, r * l));
            worst = worst.max((a - b).abs() / a.abs().max(b.abs()));
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::interaction_constants;
    use crate::radial::{solve_ground_state, solve_w, GridOpts};
    use crate::CriticalPair;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::OnceLock;

    fn setup() -> &'static (GroundState, InteractionConstants) {
        static CELL: OnceLock<(GroundState, InteractionConstants)> = OnceLock::new();
        CELL.get_or_init(|| {
            let gs = solve_ground_state(CriticalPair::new(6, 2.0).unwrap(), &GridOpts::default()).unwrap();
            let w = solve_w(&gs).unwrap();
            let c = interaction_constants(&gs, &w).unwrap();
            (gs, c)
        })
    }

    #[test]
    fn scaling_identity() {
        let (gs, c) = setup();
        let land = ReducedLandscape::from_constants(c, gs).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (m0, r, l) = (rng.random_range(0.1..10.0), rng.random_range(0.1..10.0), rng.random_range(0.1..10.0));
            assert_relative_eq!(land.f(m0, r, l), land.f(r * m0, 1.0, r * l), max_relative = 1e-12);
            let t: f64 = rng.random_range(0.1..10.0);
            assert_relative_eq!(land.f(t * m0, r / t, t * l), land.f(m0 * r, 1.0, r * l), max_relative = 1e-12);
        }
        assert!(land.scaling_defect(100, 7) < 1e-12);
    }

    #[test]
    fn f_examples() {
        let (gs, c) = setup();
        let land = ReducedLandscape::from_constants(c, gs).unwrap();
        let small = land.f(1.0, 1.0, 1e6).abs();
        assert!(small < 1e-6 * land.f(1.0, 1.0, 1.0).abs());
        // B1 = B2 = 1 with U_{0,mu0}(r) = 1 and r = lambda = 1 cancels exactly
        let unit = ReducedLandscape::new(1.0, 1.0, gs).unwrap();
        // mu0^2 / (1 + mu0^2/24)^2 = 1 at mu0 = 12 - sqrt(120)
        let mu0 = 12.0 - 120f64.sqrt();
        assert_relative_eq!(unit.inner_value(mu0, 1.0), 1.0, max_relative = 1e-7);
        assert!(unit.f(mu0, 1.0, 1.0).abs() < 1e-7);
    }

    #[test]
    fn lambda_star_is_stationary_and_increasing() {
        let (gs, c) = setup();
        let land = ReducedLandscape::from_constants(c, gs).unwrap();
        for m0 in [0.5, 1.0, 2.0] {
            assert!(land.stationarity_residual(m0) < 1e-8, "{}", land.stationarity_residual(m0));
        }
        let ms: Vec<f64> = (0..40).map(|i| 6.0 * 1.2f64.powi(i)).collect();
        assert!(ms.windows(2).all(|w| land.lambda_star(w[1]) > land.lambda_star(w[0])));
    }

    #[test]
    fn lambda_star_unit_base() {
        let (gs, _) = setup();
        let pair = gs.pair;
        let m0 = 1.3;
        let u = gs.u.eval(m0) * m0.powf(pair.u_scale_exp());
        let b1 = pair.nf() * u / ((pair.q() + 1.0) * (pair.nf() - 2.0));
        let land = ReducedLandscape::new(b1, 1.0, gs).unwrap();
        assert_relative_eq!(land.lambda_star(m0), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn f1_star_two_ways_positive_and_decaying() {
        let (gs, c) = setup();
        let land = ReducedLandscape::from_constants(c, gs).unwrap();
        for m0 in [0.1, 1.0, 4.0, 30.0] {
            assert_relative_eq!(land.f1_star(m0), land.f1_star_closed(m0), max_relative = 1e-8);
            assert!(land.f1_star(m0) > 0.0);
        }
        assert!(land.f1_star(1e4) < 1e-6 * land.f1_star(5.0));
    }

    #[test]
    fn interior_maximum() {
        let (gs, c) = setup();
        let land = ReducedLandscape::from_constants(c, gs).unwrap();
        let mx = land.find_interior_max(64).unwrap();
        assert!(mx.margin > 0.0);
        // M0^2 U_{0,1}(M0) = M0^2 / (1 + M0^2/24)^2 peaks at M0 = sqrt(24)
        assert_relative_eq!(mx.m0, 24f64.sqrt(), max_relative = 1e-4);
        assert_relative_eq!(mx.lambda, land.lambda_star(mx.m0), max_relative = 1e-4);
        let boxed = land.clone().with_box(SearchBox { m_lo: 0.125, m_hi: 2.0, l_lo: 0.125, l_hi: 8.0 }).unwrap();
        assert!(matches!(boxed.interior_max_in_box(64), Err(Error::NoInteriorMax(_))));
        let tiny = land.clone().with_box(SearchBox { m_lo: 0.5, m_hi: 1.0, l_lo: 2.0, l_hi: 3.0 }).unwrap();
        let grown = tiny.find_interior_max(64).unwrap();
        assert!(grown.expansions > 0 && grown.margin > 0.0);
        assert_relative_eq!(grown.m0, mx.m0, max_relative = 1e-4);
    }

    #[test]
    fn argmax_is_invariant_under_common_rescaling() {
        let (gs, c) = setup();
        let a = ReducedLandscape::new(c.b1, c.b2, gs).unwrap().find_interior_max(64).unwrap();
        let b = ReducedLandscape::new(10.0 * c.b1, 10.0 * c.b2, gs).unwrap().find_interior_max(64).unwrap();
        assert_relative_eq!(a.m0, b.m0, max_relative = 1e-6);
        assert_relative_eq!(a.lambda, b.lambda, max_relative = 1e-6);
        assert_relative_eq!(10.0 * a.value, b.value, max_relative = 1e-9);
    }

    #[test]
    fn single_sign_change_in_lambda() {
        let (gs, c) = setup();
        let land = ReducedLandscape::from_constants(c, gs).unwrap();
        for m0 in [0.2, 1.0, 4.9, 20.0, 100.0] {
            assert_eq!(land.sign_changes_in_lambda(m0, 1e-4, 1e4, 2000), 1, "M0={m0}");
        }
    }

    #[test]
    fn csv_dump() {
        let (gs, c) = setup();
        let csv = ReducedLandscape::from_constants(c, gs).unwrap().scan_csv(64);
        assert!(csv.starts_with("M0,Lambda,Fstar\n"));
        assert_eq!(csv.lines().count(), 64 * 64 + 1);
    }
}
