use super::profile::PowerTail;
use crate::error::{Error, Result};
use crate::optimize::{golden_min, lsq2};
use crate::pair::{CriticalPair, TailBranch};
use serde::{Deserialize, Serialize};

/// Two-term far-field fit `f(r) ≈ r^{-e} (c + d r^{-kappa})`, or `r^{-e} (c ln r + d)` for the log branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Leading coefficient (the tail constant).
    pub c: f64,
    /// Correction coefficient.
    pub d: f64,
    /// Decay exponent used by the model.
    pub e: f64,
    /// Correction exponent (ignored by the log model).
    pub kappa: f64,
    pub logarithmic: bool,
    /// Root-mean-square relative residual of the fit.
    pub rel_rms: f64,
}

impl TailFit {
    pub fn model(&self, r: f64) -> f64 {
        self.law().eval(r)
    }

    pub fn law(&self) -> PowerTail {
        if self.logarithmic {
            PowerTail { terms: vec![(self.d, self.e)], log_term: Some((self.c, self.e)) }
        } else {
            PowerTail { terms: vec![(self.c, self.e), (self.d, self.e + self.kappa)], log_term: None }
        }
    }

    /// The law rescaled so that it passes through `value` at `r`.
    pub fn anchored_law(&self, r: f64, value: f64) -> PowerTail {
        self.law().scaled(value / self.model(r))
    }
}

/// Tail constants of the ground state and the diagnostics behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    /// `a`: coefficient of the leading far-field law of `U`.
    pub a: f64,
    /// `b = lim r^{N-2} V(r)`.
    pub b: f64,
    pub branch: TailBranch,
    pub u_fit: TailFit,
    pub v_fit: TailFit,
    /// Decay exponent of `U` from a free-exponent fit.
    pub u_exponent: f64,
    /// Decay exponent of `V` from a free-exponent fit.
    pub v_exponent: f64,
    /// Fitted correction exponent of `U` in the slow branch.
    pub u_correction_exponent: Option<f64>,
    /// Outer radius of the fit window (the window is the last decade below it).
    pub fit_radius: f64,
}

/// Largest relative rms residual accepted from a tail fit.
pub const TAIL_FIT_TOL: f64 = 1e-3;

fn window(r: &[f64], f: &[f64], r_hi: f64) -> (Vec<f64>, Vec<f64>) {
    r.iter()
        .zip(f)
        .filter(|(&x, &y)| x >= r_hi / 10.0 && x <= r_hi && y > 0.0)
        .map(|(&x, &y)| (x, y))
        .unzip()
}

/// Fits `f ≈ r^{-e}(c + d r^{-kappa})` with `e` and `kappa` fixed.
pub fn fit_power(r: &[f64], f: &[f64], r_hi: f64, e: f64, kappa: f64) -> Result<TailFit> {
    let (rs, fs) = window(r, f, r_hi);
    if rs.len() < 8 {
        return Err(Error::TailFit(format!("only {} usable nodes in [{}, {}]", rs.len(), r_hi / 10.0, r_hi)));
    }
    let r_ref = rs[0];
    let y: Vec<f64> = rs.iter().zip(&fs).map(|(x, v)| v * x.powf(e)).collect();
    let ones = vec![1.0; rs.len()];
    let x1: Vec<f64> = rs.iter().map(|x| (x / r_ref).powf(-kappa)).collect();
    let ([c, d_scaled], rss) = lsq2(&ones, &x1, &y);
    let rel_rms = (rss / rs.len() as f64).sqrt() / c.abs();
    Ok(TailFit { c, d: d_scaled * r_ref.powf(kappa), e, kappa, logarithmic: false, rel_rms })
}

/// Fits `f ≈ r^{-e}(c ln r + d)`.
pub fn fit_log(r: &[f64], f: &[f64], r_hi: f64, e: f64) -> Result<TailFit> {
    let (rs, fs) = window(r, f, r_hi);
    if rs.len() < 8 {
        return Err(Error::TailFit("too few nodes for the logarithmic fit".into()));
    }
    let y: Vec<f64> = rs.iter().zip(&fs).map(|(x, v)| v * x.powf(e)).collect();
    let logs: Vec<f64> = rs.iter().map(|x| x.ln()).collect();
    let ones = vec![1.0; rs.len()];
    let ([c, d], rss) = lsq2(&logs, &ones, &y);
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rel_rms = (rss / rs.len() as f64).sqrt() / scale;
    Ok(TailFit { c, d, e, kappa: 0.0, logarithmic: true, rel_rms })
}

/// Decay exponent minimizing the residual of the two-term fit with correction exponent `kappa`.
pub fn fitted_exponent(r: &[f64], f: &[f64], r_hi: f64, e_guess: f64, kappa: f64) -> f64 {
    golden_min(e_guess - 1.0, e_guess + 1.0, 1e-10, |e| {
        fit_power(r, f, r_hi, e, kappa).map(|t| t.rel_rms).unwrap_or(f64::INFINITY)
    })
}

/// Decay exponent of `U` in the chosen branch.
pub fn u_decay_exponent(pair: &CriticalPair) -> f64 {
    let nf = pair.nf();
    match pair.tail_branch() {
        TailBranch::Standard | TailBranch::Logarithmic => nf - 2.0,
        TailBranch::Slow => pair.p() * (nf - 2.0) - 2.0,
    }
}

/// Correction exponent of `V`: the `U^q` source shifts the tail by `r^{-(q e_U - N)}`.
pub fn v_correction_exponent(pair: &CriticalPair) -> f64 {
    pair.q() * u_decay_exponent(pair) - pair.nf()
}

/// Fits the far-field laws of both components on the last decade below `r_hi`.
pub fn fit_tails(pair: &CriticalPair, r: &[f64], u: &[f64], v: &[f64], r_hi: f64) -> Result<TailReport> {
    let nf = pair.nf();
    let e_v = nf - 2.0;
    let kappa_v = v_correction_exponent(pair);
    let v_fit = fit_power(r, v, r_hi, e_v, kappa_v)?;
    let v_exponent = fitted_exponent(r, v, r_hi, e_v, kappa_v);
    let branch = pair.tail_branch();
    let (u_fit, u_exponent, u_corr) = match branch {
        TailBranch::Standard => {
            let kappa_u = pair.p() * (nf - 2.0) - nf;
            let fit = fit_power(r, u, r_hi, nf - 2.0, kappa_u)?;
            (fit, fitted_exponent(r, u, r_hi, nf - 2.0, kappa_u), None)
        }
        TailBranch::Logarithmic => {
            let fit = fit_log(r, u, r_hi, nf - 2.0)?;
            // Log-log slope over the window, which includes the log factor's drift.
            let (rs, us) = window(r, u, r_hi);
            let slope = -(us[us.len() - 1] / us[0]).ln() / (rs[rs.len() - 1] / rs[0]).ln();
            (fit, slope, None)
        }
        TailBranch::Slow => {
            let e = pair.p() * (nf - 2.0) - 2.0;
            let kappa1 = golden_min(0.05, 6.0, 1e-8, |k| {
                fit_power(r, u, r_hi, e, k).map(|t| t.rel_rms).unwrap_or(f64::INFINITY)
            });
            let fit = fit_power(r, u, r_hi, e, kappa1)?;
            (fit, fitted_exponent(r, u, r_hi, e, kappa1), Some(kappa1))
        }
    };
    let tol = if branch == TailBranch::Logarithmic { 10.0 * TAIL_FIT_TOL } else { TAIL_FIT_TOL };
    for (name, fit) in [("U", &u_fit), ("V", &v_fit)] {
        if !(fit.rel_rms < tol) || !(fit.c > 0.0) {
            return Err(Error::TailFit(format!(
                "{name} tail fit residual {:.3e} (coefficient {:.6e}); r_max too small?",
                fit.rel_rms, fit.c
            )));
        }
    }
    Ok(TailReport {
        a: u_fit.c,
        b: v_fit.c,
        branch,
        u_fit,
        v_fit,
        u_exponent,
        v_exponent,
        u_correction_exponent: u_corr,
        fit_radius: r_hi,
    })
}
