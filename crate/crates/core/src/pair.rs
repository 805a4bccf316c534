//! Exponent pairs on the critical hyperbola `1/(p+1) + 1/(q+1) = (N-2)/N`.

use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Exponent pair `(p, q)` in dimension `N`, with `q` derived from `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    n: usize,
    p: f64,
    q: f64,
    tau: f64,
}

/// Which decay law the `U` component of the ground state follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailBranch {
    /// `p > N/(N-2)`: `U ~ a r^{-(N-2)}`.
    Standard,
    /// `p = N/(N-2)`: `U ~ a r^{-(N-2)} log r`.
    Logarithmic,
    /// `p < N/(N-2)`: `U ~ a r^{-(p(N-2)-2)}`.
    Slow,
}

impl CriticalPair {
    /// Builds the pair for dimension `n` and lower exponent `p`.
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 5 {
            return Err(invalid(format!("dimension N={n} must be at least 5")));
        }
        if !p.is_finite() {
            return Err(invalid("p must be finite"));
        }
        let nf = n as f64;
        let lo = 2.0 / (nf - 2.0);
        let hi = (nf + 2.0) / (nf - 2.0);
        // The upper endpoint is admissible; accept it up to rounding of the caller's input.
        if p <= lo || p > hi * (1.0 + 4.0 * f64::EPSILON) {
            return Err(invalid(format!(
                "p={p} outside the admissible range ({lo}, {hi}] for N={n}"
            )));
        }
        let p = p.min(hi);
        let inv_q1 = (nf - 2.0) / nf - 1.0 / (p + 1.0);
        let q = if p == hi { hi } else { 1.0 / inv_q1 - 1.0 };
        let tau = nf / ((p + 1.0) * (nf - 2.0));
        Ok(Self { n, p, q, tau })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `|1/(p+1) + 1/(q+1) - (N-2)/N|`.
    pub fn hyperbola_defect(&self) -> f64 {
        let nf = self.nf();
        (1.0 / (self.p + 1.0) + 1.0 / (self.q + 1.0) - (nf - 2.0) / nf).abs()
    }

    /// Whether `p` lies in `(N/(N-2), (N+2)/(N-2)]`, where the multi-bubble construction applies.
    pub fn in_theorem_range(&self) -> bool {
        let nf = self.nf();
        self.n >= 6 && self.p > nf / (nf - 2.0)
    }

    /// Whether `p = q = (N+2)/(N-2)`.
    pub fn is_symmetric_point(&self) -> bool {
        let nf = self.nf();
        self.p == (nf + 2.0) / (nf - 2.0)
    }

    /// Scaling exponent of the `U` component, `N/(q+1)`.
    pub fn u_scale_exp(&self) -> f64 {
        self.nf() / (self.q + 1.0)
    }

    /// Scaling exponent of the `V` component, `N/(p+1)`.
    pub fn v_scale_exp(&self) -> f64 {
        self.nf() / (self.p + 1.0)
    }

    /// Exponent `(p+1)(N-2)/N = 1/tau` linking `mu` to `k`.
    pub fn mu_k_exp(&self) -> f64 {
        1.0 / self.tau
    }

    pub fn tail_branch(&self) -> TailBranch {
        let nf = self.nf();
        let crit = nf / (nf - 2.0);
        if (self.p - crit).abs() <= 1e-12 * crit {
            TailBranch::Logarithmic
        } else if self.p > crit {
            TailBranch::Standard
        } else {
            TailBranch::Slow
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn six_two_is_symmetric() {
        let c = CriticalPair::new(6, 2.0).unwrap();
        assert_relative_eq!(c.q(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(c.tau(), 0.5, max_relative = 1e-15);
        assert!(c.is_symmetric_point());
        assert!(c.in_theorem_range());
    }

    #[test]
    fn eight_five_thirds() {
        let c = CriticalPair::new(8, 5.0 / 3.0).unwrap();
        assert_relative_eq!(c.q(), 5.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn six_five_thirds_gives_seventeen_sevenths() {
        // 1/(q+1) = 2/3 - 3/8 = 7/24
        let c = CriticalPair::new(6, 5.0 / 3.0).unwrap();
        assert_relative_eq!(c.q(), 17.0 / 7.0, max_relative = 1e-13);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(CriticalPair::new(4, 2.0).is_err());
        assert!(CriticalPair::new(6, 0.5).is_err());
        assert!(CriticalPair::new(6, 2.5).is_err());
        assert!(CriticalPair::new(6, f64::NAN).is_err());
    }

    #[test]
    fn branch_classification() {
        assert_eq!(CriticalPair::new(6, 2.0).unwrap().tail_branch(), TailBranch::Standard);
        assert_eq!(CriticalPair::new(6, 1.5).unwrap().tail_branch(), TailBranch::Logarithmic);
        assert_eq!(CriticalPair::new(6, 1.2).unwrap().tail_branch(), TailBranch::Slow);
        assert!(!CriticalPair::new(6, 1.5).unwrap().in_theorem_range());
        assert!(!CriticalPair::new(5, 2.0).unwrap().in_theorem_range());
    }

    proptest! {
        #[test]
        fn hyperbola_and_ordering(n in 5usize..12, t in 0.001f64..1.0) {
            let nf = n as f64;
            let lo = 2.0 / (nf - 2.0);
            let hi = (nf + 2.0) / (nf - 2.0);
            let p = lo + t * (hi - lo);
            let c = CriticalPair::new(n, p).unwrap();
            prop_assert!(c.hyperbola_defect() < 1e-12);
            prop_assert!(c.p() <= hi && hi <= c.q() * (1.0 + 1e-12));
            prop_assert!(c.tau() > 0.0 && c.tau() < 1.0);
            // identities used by the weighted norms
            prop_assert!((c.u_scale_exp() + 2.0 - c.p() * c.v_scale_exp()).abs() < 1e-12 * c.q().max(1.0) * nf);
            prop_assert!((c.v_scale_exp() + 2.0 - c.q() * c.u_scale_exp()).abs() < 1e-10 * c.q().max(1.0) * nf);
        }
    }
}
