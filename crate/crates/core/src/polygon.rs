//! Regular k-gon configurations, the polygon interaction sum and the discrete symmetry group.

use crate::error::{invalid, Error, Result};
use crate::pair::CriticalPair;
use crate::special::zeta;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of the polygon ansatz: `k` outer bubbles of scale `mu` on a circle of radius `r`,
/// plus an inner bubble of scale `mu0` at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolygonConfig {
    pair: CriticalPair,
    k: usize,
    mu0: f64,
    r: f64,
    lambda: f64,
    mu: f64,
    centers: Vec<Vec<f64>>,
}

impl PolygonConfig {
    /// Configuration with `mu = lambda * k^{(p+1)(N-2)/N}`.
    ///
    /// `k = 1` is accepted for single-bubble checks; the polygon interaction then vanishes.
    pub fn new(pair: CriticalPair, k: usize, mu0: f64, r: f64, lambda: f64) -> Result<Self> {
        let mu = lambda * (k as f64).powf(pair.mu_k_exp());
        Self::build(pair, k, mu0, r, lambda, mu)
    }

    /// Configuration with the scale `mu` given directly (`lambda` is then derived).
    pub fn with_mu(pair: CriticalPair, k: usize, mu0: f64, r: f64, mu: f64) -> Result<Self> {
        let lambda = mu / (k as f64).powf(pair.mu_k_exp());
        Self::build(pair, k, mu0, r, lambda, mu)
    }

    fn build(pair: CriticalPair, k: usize, mu0: f64, r: f64, lambda: f64, mu: f64) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        for (name, v) in [("mu0", mu0), ("r", r), ("lambda", lambda), ("mu", mu)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name}={v} must be positive and finite")));
            }
        }
        let centers = polygon_centers(k, r, pair.n())?;
        Ok(Self { pair, k, mu0, r, lambda, mu, centers })
    }

    pub fn pair(&self) -> &CriticalPair {
        &self.pair
    }

    pub fn n(&self) -> usize {
        self.pair.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// The same configuration rescaled by `(mu0, r, mu) -> (t mu0, r/t, t mu)`.
    pub fn rescaled(&self, t: f64) -> Result<Self> {
        Self::with_mu(self.pair, self.k, t * self.mu0, self.r / t, t * self.mu)
    }

    /// Angular half-width `pi/k` of each sector.
    pub fn sector_half_angle(&self) -> f64 {
        PI / self.k as f64
    }

    /// Radius `pi/(2 r0 k)` of the core ball `S` around `x_1`, with `r0 = max(r, 1/r)`.
    pub fn core_radius(&self) -> f64 {
        let r0 = self.r.max(1.0 / self.r);
        PI / (2.0 * r0 * self.k as f64)
    }

    /// 1-based index of the sector containing `y` (angular distance to `x_j` at most `pi/k`).
    ///
    /// Points on a sector boundary go to the lower index; points on the axis `y' = 0` go to sector 1.
    pub fn sector_of(&self, y: &[f64]) -> usize {
        sector_index(self.k, y[0], y[1])
    }

    /// Rotates `y` into the sector `Omega_1`, returning the rotated point and the sector it came from.
    pub fn fold_into_first_sector(&self, y: &[f64]) -> (Vec<f64>, usize) {
        let j = self.sector_of(y);
        let mut z = y.to_vec();
        rotate_in_place(&mut z, -angle_of(j, self.k));
        (z, j)
    }

    /// `Phi_j` (rotation by `2(j-1)pi/k`), optionally followed by the reflection `Psi_h`.
    pub fn apply_symmetry(&self, point: &[f64], j: usize, h: Option<usize>) -> Result<Vec<f64>> {
        apply_symmetry(self.k, point, j, h)
    }
}

fn angle_of(j: usize, k: usize) -> f64 {
    2.0 * PI * (j as f64 - 1.0) / k as f64
}

fn rotate_in_place(y: &mut [f64], theta: f64) {
    let (s, c) = theta.sin_cos();
    let (a, b) = (y[0], y[1]);
    y[0] = c * a - s * b;
    y[1] = s * a + c * b;
}

/// 1-based sector index of the point with planar coordinates `(y1, y2)`; boundary ties go to the lower index.
pub fn sector_index(k: usize, y1: f64, y2: f64) -> usize {
    if k == 1 || (y1 == 0.0 && y2 == 0.0) {
        return 1;
    }
    let width = 2.0 * PI / k as f64;
    let mut phi = y2.atan2(y1);
    if phi < 0.0 {
        phi += 2.0 * PI;
    }
    // Sector j covers [(j-1.5) width, (j-0.5) width]; the shared edge belongs to the lower index.
    let s = phi / width;
    let m = s.round();
    let m = if (s - s.floor() - 0.5).abs() == 0.0 { s.floor() } else { m };
    (m as usize % k) + 1
}

/// The `k` vertices `x_j = (r cos(2(j-1)pi/k), r sin(2(j-1)pi/k), 0, ..., 0)` in `R^n`.
pub fn polygon_centers(k: usize, r: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if !(r > 0.0) || n < 2 {
        return Err(invalid(format!("need r > 0 and n >= 2, got r={r}, n={n}")));
    }
    Ok((1..=k)
        .map(|j| {
            let (s, c) = angle_of(j, k).sin_cos();
            let mut x = vec![0.0; n];
            x[0] = r * c;
            x[1] = r * s;
            x
        })
        .collect())
}

/// `Σ_{j=2}^k |x_j - x_1|^{-s} = (2r)^{-s} Σ_{m=1}^{k-1} sin^{-s}(m pi/k)`.
///
/// Mirror terms `m` and `k - m` are equal and are summed as pairs, smallest first.
pub fn pairwise_sum(k: usize, r: f64, s: f64) -> Result<f64> {
    if k < 2 {
        return Err(invalid("pairwise_sum needs k >= 2"));
    }
    if !(r > 0.0) || !(s > 1.0) {
        return Err(invalid(format!("need r > 0 and s > 1, got r={r}, s={s}")));
    }
    let kf = k as f64;
    // Largest term is sin(pi/k)^{-s} ~ (k/pi)^s.
    if s * (kf / PI).ln().max(0.0) + (k as f64).ln() > 700.0 {
        return Err(Error::Overflow(format!("k={k}, s={s} overflows f64")));
    }
    let term = |m: usize| (m as f64 * PI / kf).sin().powf(-s);
    let half = (k - 1) / 2;
    let mut acc = 0.0;
    if k.is_multiple_of(2) {
        acc += term(k / 2);
    }
    for m in (1..=half).rev() {
        acc += 2.0 * term(m);
    }
    Ok(acc * (2.0 * r).powf(-s))
}

/// Limit of `r^s k^{-s} Σ_{j>=2} |x_j - x_1|^{-s}` as `k -> ∞`, equal to `2 zeta(s) / (2 pi)^s`.
pub fn btilde11(s: f64) -> f64 {
    2.0 * zeta(s) / (2.0 * PI).powf(s)
}

/// `Phi_j` followed by the optional reflection `Psi_h` (negating coordinate `h`, 1-based).
pub fn apply_symmetry(k: usize, point: &[f64], j: usize, h: Option<usize>) -> Result<Vec<f64>> {
    if j == 0 || j > k {
        return Err(Error::IndexOutOfRange(format!("rotation index j={j} not in 1..={k}")));
    }
    let n = point.len();
    if n < 2 {
        return Err(invalid("points need at least two coordinates"));
    }
    let mut y = point.to_vec();
    rotate_in_place(&mut y, angle_of(j, k));
    if let Some(h) = h {
        if h < 2 || h > n {
            return Err(Error::IndexOutOfRange(format!("reflection index h={h} not in 2..={n}")));
        }
        y[h - 1] = -y[h - 1];
    }
    Ok(y)
}
