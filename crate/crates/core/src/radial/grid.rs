use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Grid and integrator settings for the radial solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridOpts {
    /// Outer radius of the grid.
    pub r_max: f64,
    /// Total number of nodes, including `r = 0` and `r = r_max`.
    pub nodes: usize,
    /// RK4 substeps per grid interval.
    pub substeps: usize,
}

impl Default for GridOpts {
    fn default() -> Self {
        Self { r_max: 1e4, nodes: 4096, substeps: 4 }
    }
}

/// Radial grid: uniform on `[0, 1]`, log-uniform on `[1, r_max]`, with matched step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    r: Vec<f64>,
    n_uniform: usize,
    log_step: f64,
}

impl Grid {
    pub fn new(opts: &GridOpts) -> Result<Self> {
        if !(opts.r_max > 10.0) || !opts.r_max.is_finite() {
            return Err(invalid(format!("r_max={} must exceed 10", opts.r_max)));
        }
        if opts.nodes < 64 {
            return Err(invalid(format!("nodes={} must be at least 64", opts.nodes)));
        }
        if opts.substeps == 0 {
            return Err(invalid("substeps must be positive"));
        }
        let intervals = (opts.nodes - 1) as f64;
        let log_span = opts.r_max.ln();
        // Uniform step h on [0,1] and log step h on [1, r_max]: (1 + ln r_max)/h intervals.
        let n_uniform = ((intervals / (1.0 + log_span)).round() as usize).max(8);
        if n_uniform + 8 > opts.nodes - 1 {
            return Err(invalid("too few nodes for the log part of the grid"));
        }
        let n_log = opts.nodes - 1 - n_uniform;
        let log_step = log_span / n_log as f64;
        let mut r = Vec::with_capacity(opts.nodes);
        r.extend((0..=n_uniform).map(|i| i as f64 / n_uniform as f64));
        r.extend((1..n_log).map(|i| (i as f64 * log_step).exp()));
        r.push(opts.r_max);
        Ok(Self { r, n_uniform, log_step })
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("grid is never empty")
    }

    /// Index `i` of the interval `[r_i, r_{i+1}]` containing `r`, for `0 <= r <= r_max`.
    pub fn locate(&self, r: f64) -> usize {
        let last = self.r.len() - 2;
        let guess = if r < 1.0 {
            (r * self.n_uniform as f64) as usize
        } else {
            self.n_uniform + (r.ln() / self.log_step) as usize
        };
        let mut i = guess.min(last);
        while i > 0 && r < self.r[i] {
            i -= 1;
        }
        while i < last && r > self.r[i + 1] {
            i += 1;
        }
        i
    }
}
