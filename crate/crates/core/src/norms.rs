//! Weighted sup-norms, the pointwise error of the ansatz, the second-order remainder, and the
//! plan-based checks of their decay and domination properties.

use crate::bubble::{dist, Ansatz, AnsatzPoint, PhiMode};
use crate::energy::member_seed;
use crate::error::{invalid, Result};
use crate::optimize::linear_fit;
use crate::pair::CriticalPair;
use crate::polygon::PolygonConfig;
use crate::radial::{AuxProfileW, GroundState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    Star1,
    Star2,
    StarStar1,
    StarStar2,
}

/// Weight `Σ_j mu^alpha (1 + mu|y - x_j|)^{-beta}` of one of the four norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub kind: NormKind,
    pub alpha: f64,
    pub beta: f64,
}

impl WeightedNormSpec {
    pub fn new(pair: &CriticalPair, kind: NormKind) -> Self {
        let (au, av, tau) = (pair.u_scale_exp(), pair.v_scale_exp(), pair.tau());
        let alpha = match kind {
            NormKind::Star1 => au,
            NormKind::Star2 => av,
            NormKind::StarStar1 => au + 2.0,
            NormKind::StarStar2 => av + 2.0,
        };
        Self { kind, alpha, beta: alpha + tau }
    }

    pub fn weight(&self, cfg: &PolygonConfig, y: &[f64]) -> f64 {
        let mu = cfg.mu();
        let scale = mu.powf(self.alpha);
        cfg.centers().iter().map(|c| scale * (1.0 + mu * dist(y, c)).powf(-self.beta)).sum()
    }
}

/// Where a plan point came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stratum {
    Center,
    /// Draws around `x_1` at scale `1/mu`, `1/k` or `1`.
    Core,
    Mid,
    Unit,
    SectorBoundary,
    /// Inner bubble region at scales `1/mu0`.
    Inner,
    /// Far-field shells; the outermost shell is the plan boundary.
    Far,
    Boundary,
}

/// Points over which sup-norms are approximated. All fields are invariant under the rotation
/// and reflection group, so the plan only covers the sector of `x_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub points: Vec<Vec<f64>>,
    pub strata: Vec<Stratum>,
}

impl SamplePlan {
    /// `per_scale` random draws at each scale near `x_1` and at the inner bubble, plus the
    /// centers, sector-boundary points and far shells.
    pub fn new(cfg: &PolygonConfig, per_scale: usize, seed: u64) -> Self {
        let n = cfg.n();
        let (k, mu, mu0, r) = (cfg.k() as f64, cfg.mu(), cfg.mu0(), cfg.r());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut plan = SamplePlan { points: vec![], strata: vec![] };
        for c in cfg.centers() {
            plan.push(c.clone(), Stratum::Center);
        }
        plan.push(vec![0.0; n], Stratum::Inner);
        let x1 = cfg.centers()[0].clone();
        let gauss = |rng: &mut ChaCha8Rng, s: f64| -> Vec<f64> { (0..n).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect() };
        for (scale, stratum) in [(1.0 / mu, Stratum::Core), (r / k, Stratum::Mid), (r, Stratum::Unit)] {
            for _ in 0..per_scale {
                let d = gauss(&mut rng, scale);
                let y: Vec<f64> = x1.iter().zip(&d).map(|(a, b)| a + b).collect();
                plan.push(fold(cfg, &y), stratum);
            }
        }
        for s in [0.25, 0.5, 1.0, 2.0, 4.0] {
            for _ in 0..per_scale / 5 + 1 {
                plan.push(fold(cfg, &gauss(&mut rng, s / mu0)), Stratum::Inner);
            }
        }
        let half = PI / k;
        for t in [0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0] {
            let mut y = vec![0.0; n];
            y[0] = t * r * half.cos();
            y[1] = t * r * half.sin();
            plan.push(fold(cfg, &y), Stratum::SectorBoundary);
        }
        let shells = [2.0, 4.0, 8.0, 16.0, 32.0];
        for (i, s) in shells.iter().enumerate() {
            let stratum = if i + 1 == shells.len() { Stratum::Boundary } else { Stratum::Far };
            for _ in 0..per_scale / 5 + 1 {
                let g = gauss(&mut rng, 1.0);
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                let rad = s * r.max(1.0 / mu0);
                plan.push(fold(cfg, &g.iter().map(|v| rad * v / norm).collect::<Vec<_>>()), stratum);
            }
        }
        plan
    }

    fn push(&mut self, y: Vec<f64>, s: Stratum) {
        self.points.push(y);
        self.strata.push(s);
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Appends the points of another plan.
    pub fn extend(&mut self, other: &SamplePlan) {
        self.points.extend(other.points.iter().cloned());
        self.strata.extend(other.strata.iter().copied());
    }
}

fn fold(cfg: &PolygonConfig, y: &[f64]) -> Vec<f64> {
    cfg.fold_into_first_sector(y).0
}

/// Plan maximum of `|f| / weight`: a lower bound of the weighted sup-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanNorm {
    pub value: f64,
    pub argmax: usize,
    /// The maximum sits on the outermost shell, so the plan may not cover the true sup.
    pub on_boundary: bool,
}

pub fn weighted_ratio(plan: &SamplePlan, fvals: &[f64], cfg: &PolygonConfig, spec: &WeightedNormSpec) -> Result<PlanNorm> {
    if fvals.len() != plan.len() {
        return Err(invalid(format!("{} values for {} plan points", fvals.len(), plan.len())));
    }
    let mut best = PlanNorm { value: 0.0, argmax: 0, on_boundary: false };
    for (i, (y, f)) in plan.points.iter().zip(fvals).enumerate() {
        let ratio = f.abs() / spec.weight(cfg, y);
        if ratio > best.value {
            best = PlanNorm { value: ratio, argmax: i, on_boundary: plan.strata[i] == Stratum::Boundary };
        }
    }
    Ok(best)
}

/// `(l1, l2)`: `l1 = -V_0^p + V^p + |V*|^{p-1} V*`, `l2 = -U_0^q + Σ U_j^q + |U*|^{q-1} U*`.
pub fn error_term_at(f: &AnsatzPoint, pair: &CriticalPair) -> (f64, f64) {
    let (p, q) = (pair.p(), pair.q());
    let spow = |x: f64, e: f64| x.abs().powf(e - 1.0) * x;
    let l1 = -f.v0.powf(p) + f.v_sum.powf(p) + spow(f.v_star(), p);
    let l2 = -f.u0.powf(q) + f.uq_sum + spow(f.u_star(), q);
    (l1, l2)
}

/// `(l1, l2)` of the ansatz with asymptotic `phi` at `y`.
pub fn error_term(cfg: &PolygonConfig, gs: &GroundState, w: &AuxProfileW, y: &[f64]) -> Result<(f64, f64)> {
    Ok(error_term_at(&Ansatz::new(cfg, gs, PhiMode::Asymptotic(w))?.eval(y), cfg.pair()))
}

/// `|a + w|^{e-1}(a + w) - |a|^{e-1} a - e |a|^{e-1} w`.
pub fn remainder(a: f64, w: f64, e: f64) -> f64 {
    let spow = |x: f64| x.abs().powf(e - 1.0) * x;
    spow(a + w) - spow(a) - e * a.abs().powf(e - 1.0) * w
}

/// `(N1(omega2), N2(omega1))` with `N1` built on `V*` and exponent `p`, `N2` on `U*` and `q`.
pub fn nonlinearity(f: &AnsatzPoint, pair: &CriticalPair, omega1: f64, omega2: f64) -> (f64, f64) {
    (remainder(f.v_star(), omega2, pair.p()), remainder(f.u_star(), omega1, pair.q()))
}

/// Plan estimate of `||(l1, l2)||_** = ||l1||_{**,1} + ||l2||_{**,2}`.
pub fn error_norm(cfg: &PolygonConfig, gs: &GroundState, w: &AuxProfileW, plan: &SamplePlan) -> Result<(f64, bool)> {
    let ansatz = Ansatz::new(cfg, gs, PhiMode::Asymptotic(w))?;
    let pair = cfg.pair();
    let vals: Vec<(f64, f64)> = plan.points.par_iter().map(|y| error_term_at(&ansatz.eval(y), pair)).collect();
    let l1: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let l2: Vec<f64> = vals.iter().map(|v| v.1).collect();
    let n1 = weighted_ratio(plan, &l1, cfg, &WeightedNormSpec::new(pair, NormKind::StarStar1))?;
    let n2 = weighted_ratio(plan, &l2, cfg, &WeightedNormSpec::new(pair, NormKind::StarStar2))?;
    Ok((n1.value + n2.value, n1.on_boundary || n2.on_boundary))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorNormRow {
    pub k: usize,
    pub mu: f64,
    pub l_norm: f64,
    /// `l_norm · mu^{N/(2(q+1))}`.
    pub scaled: f64,
    pub coverage_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorNormTable {
    pub rows: Vec<ErrorNormRow>,
    /// `None` for a single row.
    pub strictly_decreasing: Option<bool>,
    /// Log-log slope of `l_norm` against `mu`, its standard error and the threshold `-N/(2(q+1))`.
    pub slope: Option<(f64, f64)>,
    pub slope_threshold: f64,
    pub slope_ok: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
pub fn error_norm_check(
    gs: &GroundState,
    w: &AuxProfileW,
    mu0: f64,
    r: f64,
    lambda: f64,
    k_list: &[usize],
    per_scale: usize,
    seed: u64,
) -> Result<ErrorNormTable> {
    if k_list.is_empty() || k_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("k list must be non-empty and strictly increasing"));
    }
    let pair = gs.pair;
    let decay = pair.nf() / (2.0 * (pair.q() + 1.0));
    let mut rows = vec![];
    for &k in k_list {
        let cfg = PolygonConfig::new(pair, k, mu0, r, lambda)?;
        let plan = SamplePlan::new(&cfg, per_scale, member_seed(seed, k));
        let (l_norm, warn) = error_norm(&cfg, gs, w, &plan)?;
        rows.push(ErrorNormRow { k, mu: cfg.mu(), l_norm, scaled: l_norm * cfg.mu().powf(decay), coverage_warning: warn });
    }
    let strictly_decreasing = (rows.len() > 1).then(|| rows.windows(2).all(|w| w[1].scaled < w[0].scaled));
    let slope = (rows.len() > 1).then(|| {
        let x: Vec<f64> = rows.iter().map(|r| r.mu.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.l_norm.ln()).collect();
        let (_, b, se) = linear_fit(&x, &y);
        (b, se)
    });
    let slope_ok = slope.map(|(b, se)| b <= -decay + 2.0 * se);
    Ok(ErrorNormTable { rows, strictly_decreasing, slope, slope_threshold: -decay, slope_ok })
}

impl ErrorNormTable {
    pub const CSV_HEADER: &'static str = "k,mu,l_norm,scaled";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{},{:.16e},{:.16e},{:.16e}", r.k, r.mu, r.l_norm, r.scaled);
        }
        s
    }
}

/// `||N(omega)||_** / eps^p` for the synthetic corrections `omega_1 = eps · w_{*,1}`,
/// `omega_2 = eps · w_{*,2}`.
pub fn nonlinearity_ratio(cfg: &PolygonConfig, gs: &GroundState, w: &AuxProfileW, plan: &SamplePlan, eps: f64) -> Result<f64> {
    let pair = cfg.pair();
    let ansatz = Ansatz::new(cfg, gs, PhiMode::Asymptotic(w))?;
    let (s1, s2) = (WeightedNormSpec::new(pair, NormKind::Star1), WeightedNormSpec::new(pair, NormKind::Star2));
    let vals: Vec<(f64, f64)> = plan
        .points
        .par_iter()
        .map(|y| nonlinearity(&ansatz.eval(y), pair, eps * s1.weight(cfg, y), eps * s2.weight(cfg, y)))
        .collect();
    let n1: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let n2: Vec<f64> = vals.iter().map(|v| v.1).collect();
    let a = weighted_ratio(plan, &n1, cfg, &WeightedNormSpec::new(pair, NormKind::StarStar1))?;
    let b = weighted_ratio(plan, &n2, cfg, &WeightedNormSpec::new(pair, NormKind::StarStar2))?;
    Ok((a.value + b.value) / eps.powf(pair.p()))
}

/// Smallest `C` with `[Σ_j (1+mu|y-x_j|)^{-(N/(p+1)+tau)}]^p <= C Σ_j (1+mu|y-x_j|)^{-(N/(q+1)+2+tau)}`
/// over the plan.
pub fn domination_constant(cfg: &PolygonConfig, plan: &SamplePlan) -> f64 {
    let pair = cfg.pair();
    let (s2, ss1) = (WeightedNormSpec::new(pair, NormKind::Star2), WeightedNormSpec::new(pair, NormKind::StarStar1));
    let mu = cfg.mu();
    let sum = |y: &[f64], beta: f64| -> f64 { cfg.centers().iter().map(|c| (1.0 + mu * dist(y, c)).powf(-beta)).sum() };
    plan.points.iter().map(|y| sum(y, s2.beta).powf(pair.p()) / sum(y, ss1.beta)).fold(0.0, f64::max)
}

/// Smallest `C` with `U(y) <= C Σ_j mu^{N/(q+1)} (1+mu|y-x_j|)^{-(N/(q+1)+tau)}` over the plan.
pub fn envelope_constant(cfg: &PolygonConfig, gs: &GroundState, w: &AuxProfileW, plan: &SamplePlan) -> Result<f64> {
    let ansatz = Ansatz::new(cfg, gs, PhiMode::Asymptotic(w))?;
    let spec = WeightedNormSpec::new(cfg.pair(), NormKind::Star1);
    Ok(plan.points.iter().map(|y| ansatz.eval(y).u_proj() / spec.weight(cfg, y)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{solve_ground_state, solve_w, GridOpts};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn setup() -> &'static (GroundState, AuxProfileW) {
        static CELL: OnceLock<(GroundState, AuxProfileW)> = OnceLock::new();
        CELL.get_or_init(|| {
            let gs = solve_ground_state(CriticalPair::new(6, 2.0).unwrap(), &GridOpts::default()).unwrap();
            let w = solve_w(&gs).unwrap();
            (gs, w)
        })
    }

    const L1_SNAPSHOT: f64 = 7286.718682324514;
    const L2_SNAPSHOT: f64 = -37356.033303515986;

    #[test]
    fn exponent_table() {
        let pair = CriticalPair::new(6, 2.0).unwrap();
        let t = pair.tau();
        let cases = [
            (NormKind::Star1, 2.0),
            (NormKind::Star2, 2.0),
            (NormKind::StarStar1, 4.0),
            (NormKind::StarStar2, 4.0),
        ];
        for (kind, a) in cases {
            let s = WeightedNormSpec::new(&pair, kind);
            assert_relative_eq!(s.alpha, a, max_relative = 1e-14);
            assert_relative_eq!(s.beta, a + t, max_relative = 1e-14);
        }
    }

    proptest! {
        #[test]
        fn norm_identities(n in 5usize..12, s in 0.01f64..1.0) {
            let lo = 2.0 / (n as f64 - 2.0);
            let hi = (n as f64 + 2.0) / (n as f64 - 2.0);
            let pair = CriticalPair::new(n, lo + s * (hi - lo)).unwrap();
            let nf = n as f64;
            let (p, q) = (pair.p(), pair.q());
            prop_assert!((nf / (q + 1.0) + 2.0 - p * nf / (p + 1.0)).abs() < 1e-12);
            prop_assert!((nf / (p + 1.0) + 2.0 - q * nf / (q + 1.0)).abs() < 1e-12);
        }

        #[test]
        fn ratio_is_monotone_in_the_plan(split in 1usize..40, seed in 0u64..1000) {
            let pair = CriticalPair::new(6, 2.0).unwrap();
            let cfg = PolygonConfig::new(pair, 5, 1.0, 1.0, 0.5).unwrap();
            let full = SamplePlan::new(&cfg, 10, seed);
            let spec = WeightedNormSpec::new(&pair, NormKind::Star2);
            let f: Vec<f64> = full.points.iter().map(|y| (y[0] - 0.3).sin() * spec.weight(&cfg, y)).collect();
            let cut = split.min(full.len());
            let part = SamplePlan { points: full.points[..cut].to_vec(), strata: full.strata[..cut].to_vec() };
            let a = weighted_ratio(&part, &f[..cut], &cfg, &spec).unwrap().value;
            let b = weighted_ratio(&full, &f, &cfg, &spec).unwrap().value;
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn ratio_examples() {
        let pair = CriticalPair::new(6, 2.0).unwrap();
        let cfg = PolygonConfig::new(pair, 6, 1.0, 1.0, 0.5).unwrap();
        let plan = SamplePlan::new(&cfg, 20, 1);
        let spec = WeightedNormSpec::new(&pair, NormKind::StarStar1);
        let wv: Vec<f64> = plan.points.iter().map(|y| spec.weight(&cfg, y)).collect();
        assert_relative_eq!(weighted_ratio(&plan, &wv, &cfg, &spec).unwrap().value, 1.0, max_relative = 1e-14);
        assert_eq!(weighted_ratio(&plan, &vec![0.0; plan.len()], &cfg, &spec).unwrap().value, 0.0);
        assert!(weighted_ratio(&plan, &wv[1..], &cfg, &spec).is_err());
    }

    #[test]
    fn plan_covers_centers_and_boundary() {
        let pair = CriticalPair::new(6, 2.0).unwrap();
        let cfg = PolygonConfig::new(pair, 8, 1.0, 1.0, 1.0).unwrap();
        let plan = SamplePlan::new(&cfg, 30, 2);
        for c in cfg.centers() {
            assert!(plan.points.contains(c));
        }
        assert!(plan.strata.contains(&Stratum::SectorBoundary));
        assert!(plan.points.iter().zip(&plan.strata).all(|(y, s)| *s == Stratum::Center || cfg.sector_of(y) == 1));
    }

    #[test]
    fn v_sum_is_uniformly_dominated() {
        let (gs, _) = setup();
        let spec = WeightedNormSpec::new(&gs.pair, NormKind::Star2);
        let ratios: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&k| {
                let cfg = PolygonConfig::new(gs.pair, k, 1.0, 1.0, 1.0).unwrap();
                let plan = SamplePlan::new(&cfg, 100, 4);
                let a = Ansatz::new(&cfg, gs, PhiMode::Omit).unwrap();
                let f: Vec<f64> = plan.points.iter().map(|y| a.eval(y).v_sum).collect();
                weighted_ratio(&plan, &f, &cfg, &spec).unwrap().value
            })
            .collect();
        let (lo, hi) = ratios.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        assert!(hi / lo < 2.0, "{ratios:?}");
    }

    #[test]
    fn error_term_examples() {
        let (gs, w) = setup();
        let cfg = PolygonConfig::new(gs.pair, 1, 1.0, 1.0, 2.0).unwrap();
        // no inner bubble: the single outer bubble solves the system, so l1 vanishes exactly
        let a = Ansatz::new(&cfg, gs, PhiMode::Asymptotic(w)).unwrap().without_inner();
        for y in [[0.3, 0.9, 0.0, 0.1, 0.0, 0.0], [5.0, 1.0, 0.0, 0.0, 0.0, 0.0]] {
            assert_eq!(error_term_at(&a.eval(&y), &gs.pair).0, 0.0);
        }
        // far from both bubbles everything decays
        let near = error_term(&cfg, gs, w, &[3.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap().0.abs();
        let far = error_term(&cfg, gs, w, &[30.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap().0.abs();
        assert!(far < 1e-3 * near);
    }

    #[test]
    fn error_term_near_x1_matches_closed_form_bubbles() {
        let (gs, w) = setup();
        let cfg = PolygonConfig::new(gs.pair, 8, 1.0, 1.0, 1.0).unwrap();
        let y = [1.01, 0.0, 0.0, 0.0, 0.0, 0.0];
        let (l1, l2) = error_term(&cfg, gs, w, &y).unwrap();
        // closed-form bubbles for (6, 2): U = V = mu^2 (1 + (mu d)^2/24)^{-2}
        let bubble = |mu: f64, d: f64| mu * mu / (1.0 + (mu * d).powi(2) / 24.0).powi(2);
        let inner = bubble(1.0, dist(&y, &[0.0; 6]));
        let parts: Vec<f64> = cfg.centers().iter().map(|c| bubble(cfg.mu(), dist(&y, c))).collect();
        let sum: f64 = parts.iter().sum();
        let sq: f64 = parts.iter().map(|u| u * u).sum();
        let phi = crate::bubble::phi_coefficient(&cfg, gs) * w.eval(cfg.mu() * dist(&y, &cfg.centers()[0]));
        let vs = inner - sum;
        let us = inner - sum - phi;
        let e1 = -inner * inner + sum * sum + vs.abs() * vs;
        let e2 = -inner * inner + sq + us.abs() * us;
        assert_relative_eq!(l1, e1, max_relative = 1e-5);
        assert_relative_eq!(l2, e2, max_relative = 1e-5);
        // regression snapshot of this configuration
        assert_relative_eq!(l1, L1_SNAPSHOT, max_relative = 1e-8);
        assert_relative_eq!(l2, L2_SNAPSHOT, max_relative = 1e-8);
        // near x_1 the inner-bubble and interaction terms dominate l2 with a negative sign
        assert!(l2 < 0.0);
    }

    #[test]
    fn remainder_algebra() {
        assert_eq!(remainder(0.7, 0.0, 2.0), 0.0);
        assert_relative_eq!(remainder(1.0, 0.1, 2.0), 0.01, max_relative = 1e-12);
        assert_relative_eq!(remainder(-2.0, 0.5, 2.0), -0.25, max_relative = 1e-12);
    }

    #[test]
    fn error_norm_decays() {
        let (gs, w) = setup();
        let t = error_norm_check(gs, w, 1.0, 1.0, 1.0, &[8, 16, 32], 200, 9).unwrap();
        assert_eq!(t.strictly_decreasing, Some(true), "{t:?}");
        assert_eq!(t.slope_ok, Some(true), "{t:?}");
        let one = error_norm_check(gs, w, 1.0, 1.0, 1.0, &[8], 50, 9).unwrap();
        assert!(one.strictly_decreasing.is_none() && one.slope.is_none());
        assert!(t.to_csv().starts_with("k,mu,l_norm,scaled\n"));
    }

    #[test]
    fn nonlinearity_scales_with_eps_to_the_p() {
        let (gs, w) = setup();
        let cfg = PolygonConfig::new(gs.pair, 8, 1.0, 1.0, 1.0).unwrap();
        let plan = SamplePlan::new(&cfg, 100, 3);
        let a = nonlinearity_ratio(&cfg, gs, w, &plan, 1e-2).unwrap();
        let b = nonlinearity_ratio(&cfg, gs, w, &plan, 1e-3).unwrap();
        assert!(a.max(b) / a.min(b) < 2.0, "{a} {b}");
    }

    #[test]
    fn domination_and_envelope_constants_are_bounded() {
        let (gs, w) = setup();
        let mut dom = vec![];
        let mut env = vec![];
        for k in [8, 16, 32] {
            let cfg = PolygonConfig::new(gs.pair, k, 1.0, 1.0, 1.0).unwrap();
            let plan = SamplePlan::new(&cfg, 200, 5);
            dom.push(domination_constant(&cfg, &plan));
            env.push(envelope_constant(&cfg, gs, w, &plan).unwrap());
        }
        for c in [&dom, &env] {
            assert!(c.windows(2).all(|p| p[1] <= 1.5 * p[0]), "{dom:?} {env:?}");
        }
    }
}
