//! Importance-sampled Monte Carlo over `R^N` with reproducible parallel sub-streams.
//!
//! Every batch of samples draws from its own ChaCha8 stream (`seed`, `stream = batch index`),
//! batches are evaluated in parallel and merged in index order, so results are bit-identical
//! for a given `(seed, n, proposal)` regardless of the thread count.

use crate::error::{Error, Result};
use crate::polygon::PolygonConfig;
use crate::special::{gamma_half, sphere_area};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples per batch (one RNG stream each).
pub const BATCH: usize = 4096;
/// Largest single-sample contribution, relative to the mean absolute contribution, before an
/// estimate is flagged unreliable.
pub const WEIGHT_RATIO_LIMIT: f64 = 1e3;

/// Scalar Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub proposal_id: String,
    /// Largest `|f/g|` over the mean `|f/g|`.
    pub max_weight_ratio: f64,
    pub reliable: bool,
}

impl McEstimate {
    pub fn rel_stderr(&self) -> f64 {
        self.stderr / self.value.abs()
    }
}

/// Vector-valued estimate sharing one set of samples, with the covariance of the means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McVector {
    pub mean: Vec<f64>,
    /// Covariance matrix of the estimated means (sample covariance divided by `n`).
    pub cov: Vec<Vec<f64>>,
    pub n: u64,
    pub seed: u64,
    pub proposal_id: String,
    pub max_weight_ratio: Vec<f64>,
}

impl McVector {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn component(&self, i: usize) -> McEstimate {
        McEstimate {
            value: self.mean[i],
            stderr: self.cov[i][i].max(0.0).sqrt(),
            n: self.n,
            seed: self.seed,
            proposal_id: self.proposal_id.clone(),
            max_weight_ratio: self.max_weight_ratio[i],
            reliable: self.max_weight_ratio[i] <= WEIGHT_RATIO_LIMIT,
        }
    }

    /// `Σ c_i X_i` with its exact standard error from the shared-sample covariance.
    pub fn combine(&self, coeffs: &[f64]) -> McEstimate {
        assert_eq!(coeffs.len(), self.len());
        let value = coeffs.iter().zip(&self.mean).map(|(c, m)| c * m).sum();
        let var: f64 = (0..self.len())
            .flat_map(|i| (0..self.len()).map(move |j| (i, j)))
            .map(|(i, j)| coeffs[i] * coeffs[j] * self.cov[i][j])
            .sum();
        let ratio = coeffs
            .iter()
            .zip(&self.max_weight_ratio)
            .filter(|(c, _)| **c != 0.0)
            .map(|(_, r)| *r)
            .fold(0.0, f64::max);
        McEstimate {
            value,
            stderr: var.max(0.0).sqrt(),
            n: self.n,
            seed: self.seed,
            proposal_id: self.proposal_id.clone(),
            max_weight_ratio: ratio,
            reliable: ratio <= WEIGHT_RATIO_LIMIT,
        }
    }

    /// Control-variate estimate of component `target` using component `cv` with known integral.
    pub fn control_variate(&self, target: usize, cv: usize, known: f64) -> McEstimate {
        let var_h = self.cov[cv][cv];
        let beta = if var_h > 0.0 { self.cov[target][cv] / var_h } else { 0.0 };
        let mut est = self.component(target);
        est.value -= beta * (self.mean[cv] - known);
        let var = self.cov[target][target] - beta * self.cov[target][cv];
        est.stderr = var.max(0.0).sqrt();
        est
    }
}

/// Isotropic mixture component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Component {
    /// Multivariate Student-t with integer degrees of freedom `nu` and scale `scale`.
    StudentT { center: Vec<f64>, scale: f64, nu: u32 },
    /// Density `∝ |y-c|^{2-N} (1 + |y-c|^2/sigma^2)^{-beta}`, `beta > 1`: follows the Newton
    /// kernel singularity at `c`.
    Kernel { center: Vec<f64>, sigma: f64, beta: f64 },
}

impl Component {
    fn center(&self) -> &[f64] {
        match self {
            Component::StudentT { center, .. } | Component::Kernel { center, .. } => center,
        }
    }

    fn log_norm(&self, n: usize) -> f64 {
        match *self {
            Component::StudentT { scale, nu, .. } => {
                let nuf = nu as f64;
                (gamma_half(nu as usize + n) / gamma_half(nu as usize)).ln()
                    - 0.5 * n as f64 * (nuf * PI).ln()
                    - n as f64 * scale.ln()
            }
            Component::Kernel { sigma, beta, .. } => {
                (2.0 * (beta - 1.0) / (sphere_area(n) * sigma * sigma)).ln()
            }
        }
    }
}

/// Weighted mixture of isotropic components in `R^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    dim: usize,
    components: Vec<Component>,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    norms: Vec<f64>,
    id: String,
}

/// `x^{-m/2}` for `x > 0` without `powf`.
#[inline]
fn half_power(x: f64, m: usize) -> f64 {
    let whole = x.powi((m / 2) as i32);
    if m % 2 == 1 {
        1.0 / (whole * x.sqrt())
    } else {
        1.0 / whole
    }
}

impl Mixture {
    /// Builds a mixture; weights are normalized to sum to one.
    pub fn new(dim: usize, parts: Vec<(f64, Component)>, id: impl Into<String>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("empty mixture".into()));
        }
        let total: f64 = parts.iter().map(|p| p.0).sum();
        let mut weights = Vec::new();
        let mut components = Vec::new();
        for (w, c) in parts {
            if !(w > 0.0) || c.center().len() != dim {
                return Err(Error::InvalidParameter("mixture weights must be positive and centers in R^dim".into()));
            }
            match &c {
                Component::StudentT { scale, nu, .. } if !(*scale > 0.0) || *nu == 0 => {
                    return Err(Error::InvalidParameter("Student-t needs scale > 0 and nu >= 1".into()))
                }
                Component::Kernel { sigma, beta, .. } if !(*sigma > 0.0) || !(*beta > 1.0) => {
                    return Err(Error::InvalidParameter("kernel component needs sigma > 0 and beta > 1".into()))
                }
                _ => {}
            }
            weights.push(w / total);
            components.push(c);
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let norms = components.iter().map(|c| c.log_norm(dim).exp()).collect();
        Ok(Self { dim, components, weights, cumulative, norms, id: id.into() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    /// Mixture density at `y`.
    pub fn density(&self, y: &[f64]) -> f64 {
        (0..self.components.len()).map(|i| self.component_density(i, y)).sum()
    }

    /// Weighted density of component `i` at `y`.
    #[inline]
    fn component_density(&self, i: usize, y: &[f64]) -> f64 {
        let c = &self.components[i];
        let rho2: f64 = c.center().iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let g = match *c {
            Component::StudentT { scale, nu, .. } => {
                half_power(1.0 + rho2 / (nu as f64 * scale * scale), nu as usize + self.dim)
            }
            Component::Kernel { sigma, beta, .. } => {
                let radial = 1.0 / rho2.powi(self.dim as i32 / 2 - 1) / if self.dim % 2 == 1 { rho2.sqrt() } else { 1.0 };
                radial * (1.0 + rho2 / (sigma * sigma)).powf(-beta)
            }
        };
        self.weights[i] * self.norms[i] * g
    }

    /// Whether component `i` is invariant under rotations in the `(y1, y2)` plane.
    fn is_axial(&self, i: usize) -> bool {
        let c = self.components[i].center();
        c[0] == 0.0 && c[1] == 0.0
    }

    /// Draws one point into `out`.
    pub fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        let u: f64 = rng.random();
        let idx = self.cumulative.iter().position(|&c| u < c).unwrap_or(self.components.len() - 1);
        for o in out.iter_mut() {
            *o = rng.sample(StandardNormal);
        }
        match &self.components[idx] {
            Component::StudentT { center, scale, nu } => {
                let chi2: f64 = (0..*nu).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
                let f = scale / (chi2 / *nu as f64).sqrt();
                for (o, c) in out.iter_mut().zip(center) {
                    *o = c + f * *o;
                }
            }
            Component::Kernel { center, sigma, beta } => {
                let norm = out.iter().map(|x| x * x).sum::<f64>().sqrt();
                let v: f64 = 1.0 - rng.random::<f64>();
                // t = rho^2/sigma^2 has density (beta-1)(1+t)^{-beta}
                let t = v.powf(-1.0 / (beta - 1.0)) - 1.0;
                let rho = sigma * t.sqrt();
                for (o, c) in out.iter_mut().zip(center) {
                    *o = c + rho * *o / norm;
                }
            }
        }
    }
}

/// How samples are drawn and weighted.
#[derive(Debug, Clone, Copy)]
pub enum Sampling<'a> {
    /// Plain importance sampling over `R^N`.
    Whole(&'a Mixture),
    /// Samples folded into the sector `Omega_1` of a `k`-fold rotation symmetry; the integrand
    /// must be invariant under the rotations. The estimate covers all of `R^N`.
    Folded { mixture: &'a Mixture, k: usize },
}

impl Sampling<'_> {
    fn mixture(&self) -> &Mixture {
        match self {
            Sampling::Whole(m) | Sampling::Folded { mixture: m, .. } => m,
        }
    }

    fn id(&self) -> String {
        match self {
            Sampling::Whole(m) => m.id().to_string(),
            Sampling::Folded { mixture, k } => format!("{}/fold{k}", mixture.id()),
        }
    }
}

/// Point sampler for a [`Sampling`] scheme: returns the point and its effective density.
pub struct Sampler<'a> {
    scheme: Sampling<'a>,
    rot: Vec<(f64, f64)>,
}

impl<'a> Sampler<'a> {
    pub fn new(scheme: Sampling<'a>) -> Self {
        let rot = match scheme {
            Sampling::Whole(_) => vec![],
            Sampling::Folded { k, .. } => (0..k)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / k as f64;
                    (t.cos(), t.sin())
                })
                .collect(),
        };
        Self { scheme, rot }
    }

    /// Draws a point into `y` and returns the density against which `f(y)` must be divided.
    pub fn draw(&self, rng: &mut ChaCha8Rng, y: &mut [f64], scratch: &mut [f64]) -> f64 {
        let mix = self.scheme.mixture();
        mix.sample(rng, y);
        match self.scheme {
            Sampling::Whole(_) => mix.density(y),
            Sampling::Folded { k, .. } => {
                let j = crate::polygon::sector_index(k, y[0], y[1]);
                let (c, s) = self.rot[j - 1];
                let (a, b) = (y[0], y[1]);
                y[0] = c * a + s * b;
                y[1] = -s * a + c * b;
                // density of the folded point: sum over the k preimages, spread over k sectors
                let mut total = 0.0;
                for i in 0..mix.components.len() {
                    if mix.is_axial(i) {
                        total += k as f64 * mix.component_density(i, y);
                        continue;
                    }
                    scratch.copy_from_slice(y);
                    for &(c, s) in &self.rot {
                        scratch[0] = c * y[0] - s * y[1];
                        scratch[1] = s * y[0] + c * y[1];
                        total += mix.component_density(i, scratch);
                    }
                }
                total / k as f64
            }
        }
    }
}

#[derive(Clone)]
struct Stats {
    n: u64,
    mean: Vec<f64>,
    comoment: Vec<Vec<f64>>,
    max_abs: Vec<f64>,
    sum_abs: Vec<f64>,
}

impl Stats {
    fn new(m: usize) -> Self {
        Self { n: 0, mean: vec![0.0; m], comoment: vec![vec![0.0; m]; m], max_abs: vec![0.0; m], sum_abs: vec![0.0; m] }
    }

    fn push(&mut self, x: &[f64], delta: &mut [f64]) {
        self.n += 1;
        let nf = self.n as f64;
        for i in 0..x.len() {
            delta[i] = x[i] - self.mean[i];
            self.mean[i] += delta[i] / nf;
            self.max_abs[i] = self.max_abs[i].max(x[i].abs());
            self.sum_abs[i] += x[i].abs();
        }
        for (i, xi) in x.iter().enumerate() {
            let after = xi - self.mean[i];
            for (c, d) in self.comoment[i].iter_mut().zip(delta.iter()) {
                *c += d * after;
            }
        }
    }

    fn merge(&mut self, o: &Stats) {
        if o.n == 0 {
            return;
        }
        let (na, nb) = (self.n as f64, o.n as f64);
        let n = na + nb;
        let m = self.mean.len();
        let d: Vec<f64> = (0..m).map(|i| o.mean[i] - self.mean[i]).collect();
        for i in 0..m {
            for j in 0..m {
                self.comoment[i][j] += o.comoment[i][j] + d[i] * d[j] * na * nb / n;
            }
            self.mean[i] += d[i] * nb / n;
            self.max_abs[i] = self.max_abs[i].max(o.max_abs[i]);
            self.sum_abs[i] += o.sum_abs[i];
        }
        self.n += o.n;
    }
}

/// Estimates `∫_{R^N} f` for a vector integrand `f(y, out)` with `m` components.
pub fn integrate_vec<F>(f: F, m: usize, scheme: Sampling<'_>, n: u64, seed: u64) -> Result<McVector>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let dim = scheme.mixture().dim();
    let sampler = Sampler::new(scheme);
    let batches = n.div_ceil(BATCH as u64);
    let per_batch: Vec<Stats> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = (n - b * BATCH as u64).min(BATCH as u64);
            let mut st = Stats::new(m);
            let (mut y, mut scratch) = (vec![0.0; dim], vec![0.0; dim]);
            let (mut out, mut delta) = (vec![0.0; m], vec![0.0; m]);
            for _ in 0..count {
                let g = sampler.draw(&mut rng, &mut y, &mut scratch);
                f(&y, &mut out);
                for o in out.iter_mut() {
                    *o = if *o == 0.0 { 0.0 } else { *o / g };
                }
                st.push(&out, &mut delta);
            }
            st
        })
        .collect();
    let mut total = Stats::new(m);
    for s in &per_batch {
        total.merge(s);
    }
    let nf = total.n as f64;
    let cov = total
        .comoment
        .iter()
        .map(|row| row.iter().map(|c| c / (nf - 1.0) / nf).collect())
        .collect();
    let max_weight_ratio = (0..m)
        .map(|i| if total.sum_abs[i] > 0.0 { total.max_abs[i] / (total.sum_abs[i] / nf) } else { 0.0 })
        .collect();
    Ok(McVector { mean: total.mean, cov, n: total.n, seed, proposal_id: sampler.scheme.id(), max_weight_ratio })
}

/// Estimates `∫_{R^N} f` for a scalar integrand.
pub fn integrate<F>(f: F, scheme: Sampling<'_>, n: u64, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    Ok(integrate_vec(|y, out| out[0] = f(y), 1, scheme, n, seed)?.component(0))
}

/// Proposal families keyed by the concentration sets of the integrals they serve.
#[derive(Debug, Clone, PartialEq)]
pub enum ProposalClass {
    /// Rotation-invariant integrands of the ansatz, sampled in the folded sector: cores of `x_1`
    /// at scales `1/mu` and `1/k`, the segment toward the neighbouring center, the inner
    /// bubble at the origin and a broad background.
    Sector,
    /// Newton potential at `y` of a density concentrated at all outer centers.
    Potential { y: Vec<f64> },
    /// A single bubble of scale `1/mu` at `center`, with a broad background.
    Bubble { center: Vec<f64>, mu: f64 },
}

/// The registered mixture for a proposal class.
pub fn proposal(cfg: &PolygonConfig, class: &ProposalClass) -> Result<Mixture> {
    let n = cfg.n();
    let (k, mu, mu0, r) = (cfg.k() as f64, cfg.mu(), cfg.mu0(), cfg.r());
    let x1 = cfg.centers()[0].clone();
    let origin = vec![0.0; n];
    let broad = 2.0 * r.max(1.0 / mu0);
    let t = |center: Vec<f64>, scale: f64| Component::StudentT { center, scale, nu: 1 };
    match class {
        ProposalClass::Sector => {
            let mut parts = vec![
                (0.30, t(x1.clone(), 2.0 / mu)),
                (0.15, t(x1.clone(), r / k)),
                (0.25, t(origin.clone(), 1.0 / mu0)),
                (0.20, t(origin, broad)),
            ];
            if cfg.k() > 1 {
                let mid: Vec<f64> = x1.iter().zip(&cfg.centers()[1]).map(|(a, b)| 0.5 * (a + b)).collect();
                parts.push((0.10, t(mid, r / k)));
            }
            Mixture::new(n, parts, "sector")
        }
        ProposalClass::Potential { y } => {
            let mut parts = vec![
                (0.45, Component::Kernel { center: y.clone(), sigma: 3.0 / mu, beta: 1.5 }),
                (0.15, t(y.clone(), r / k)),
                (0.10, t(origin, broad)),
            ];
            for c in cfg.centers() {
                parts.push((0.30 / k, t(c.clone(), 2.0 / mu)));
            }
            Mixture::new(n, parts, "potential")
        }
        ProposalClass::Bubble { center, mu } => Mixture::new(
            n,
            vec![(0.8, t(center.clone(), 2.0 / mu)), (0.2, t(center.clone(), 20.0 / mu))],
            "bubble",
        ),
    }
}
