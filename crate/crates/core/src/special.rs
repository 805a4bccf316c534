//! Small special-function helpers: sphere areas, Riemann zeta at real `s > 1`.

use std::f64::consts::PI;

/// `Gamma(n/2)` for a positive integer `n`, by the half-integer recurrence.
pub fn gamma_half(n: usize) -> f64 {
    assert!(n > 0, "gamma_half needs n >= 1");
    let (mut g, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere `S^{N-1}` in `R^N`.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Newton kernel constant `1/((N-2)|S^{N-1}|)`, so that `-Δ(γ|y|^{2-N}) = δ`.
pub fn newton_constant(n: usize) -> f64 {
    1.0 / ((n as f64 - 2.0) * sphere_area(n))
}

/// Riemann zeta for real `s > 1`: direct partial sum plus Euler-Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta needs s > 1");
    const M: usize = 32;
    // Kahan-free: terms decrease monotonically, sum from small to large.
    let head: f64 = (1..M).rev().map(|n| (n as f64).powf(-s)).sum();
    let m = M as f64;
    // f(M)/2 + ∫_M^∞ + Bernoulli corrections B2, B4, B6.
    let tail = m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s) + s / 12.0 * m.powf(-s - 1.0)
        - s * (s + 1.0) * (s + 2.0) / 720.0 * m.powf(-s - 3.0)
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) / 30240.0 * m.powf(-s - 5.0);
    head + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas_known() {
        assert_relative_eq!(sphere_area(2), 2.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(sphere_area(6), PI.powi(3), max_relative = 1e-15);
        assert_relative_eq!(sphere_area(5), 8.0 * PI * PI / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn zeta_even_values() {
        assert_relative_eq!(zeta(2.0), PI.powi(2) / 6.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(4.0), PI.powi(4) / 90.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(6.0), PI.powi(6) / 945.0, max_relative = 1e-14);
        assert_relative_eq!(zeta(3.0), 1.202_056_903_159_594_3, max_relative = 1e-14);
    }
}
