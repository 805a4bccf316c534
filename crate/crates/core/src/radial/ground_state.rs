use super::grid::{Grid, GridOpts};
use super::profile::RadialProfile;
use super::quadrature::{fornberg_weights, radial_moment};
use super::tail::{fit_tails, TailReport};
use crate::error::{invalid, Error, Result};
use crate::pair::CriticalPair;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Relative divergence of the two bracketing trajectories at which the blend weight is fixed.
const BLEND_DIVERGENCE: f64 = 1e-2;
/// Relative divergence beyond which the blended trajectory is replaced by the fitted tail law.
const CUT_DIVERGENCE: f64 = 1e-3;

/// Diagnostics of the shooting solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingReport {
    /// Lower and upper bracketing values of `V(0)` at termination.
    pub bracket: (f64, f64),
    /// Width of the final bracket.
    pub margin: f64,
    pub iterations: usize,
    /// Weight of the upper trajectory in the blended solution.
    pub blend: f64,
    /// Radius at which the blend weight was fixed.
    pub blend_radius: f64,
    /// Largest radius where the integrated trajectory is kept; the tail law takes over beyond it.
    pub reliable_radius: f64,
}

/// Radial ground state `(U, V)` with `U(0) = 1`, its tail constants and energy.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub pair: CriticalPair,
    pub u: RadialProfile,
    pub v: RadialProfile,
    /// Tail constant of `U`.
    pub a: f64,
    /// Tail constant of `V`.
    pub b: f64,
    /// Ground energy `(2/N) ∫ U^{q+1}`.
    pub energy: f64,
    /// Shooting value `V(0)`.
    pub beta: f64,
    pub tails: TailReport,
    pub shooting: ShootingReport,
    pub opts: GridOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    /// `V(0)` too large: `U` is driven through zero.
    High,
    /// `V(0)` too small: `V` is driven through zero.
    Low,
}

struct Trajectory {
    /// `[u, u', v, v']` at grid nodes while both components stay positive.
    states: Vec<[f64; 4]>,
    side: Side,
}

struct System {
    n1: f64,
    p: f64,
    q: f64,
}

impl System {
    #[inline]
    fn rhs(&self, r: f64, s: &[f64; 4]) -> [f64; 4] {
        let fu = s[2].abs().powf(self.p) * s[2].signum();
        let fv = s[0].abs().powf(self.q) * s[0].signum();
        [s[1], -self.n1 / r * s[1] - fu, s[3], -self.n1 / r * s[3] - fv]
    }

    fn rk4(&self, r0: f64, h: f64, s: &[f64; 4]) -> [f64; 4] {
        let add = |a: &[f64; 4], b: &[f64; 4], c: f64| std::array::from_fn(|i| a[i] + c * b[i]);
        let k1 = self.rhs(r0, s);
        let k2 = self.rhs(r0 + 0.5 * h, &add(s, &k1, 0.5 * h));
        let k3 = self.rhs(r0 + 0.5 * h, &add(s, &k2, 0.5 * h));
        let k4 = self.rhs(r0 + h, &add(s, &k3, h));
        std::array::from_fn(|i| s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    }
}

/// Power series of the regular solution through `(u, v)(0) = (1, beta)`, up to `r^4`.
fn series_start(pair: &CriticalPair, beta: f64, r: f64) -> [f64; 4] {
    let nf = pair.nf();
    let (p, q) = (pair.p(), pair.q());
    let u2 = -beta.powf(p) / (2.0 * nf);
    let v2 = -1.0 / (2.0 * nf);
    let u4 = -p * beta.powf(p - 1.0) * v2 / (4.0 * (nf + 2.0));
    let v4 = -q * u2 / (4.0 * (nf + 2.0));
    let r2 = r * r;
    [
        1.0 + u2 * r2 + u4 * r2 * r2,
        2.0 * u2 * r + 4.0 * u4 * r2 * r,
        beta + v2 * r2 + v4 * r2 * r2,
        2.0 * v2 * r + 4.0 * v4 * r2 * r,
    ]
}

/// `v + r v'/(N-2)`: vanishes on the decaying law `r^{2-N}`, tends to the constant mode otherwise.
#[inline]
fn harmonic_defect(r: f64, s: &[f64; 4], nf: f64) -> f64 {
    s[2] + r * s[3] / (nf - 2.0)
}

fn shoot(pair: &CriticalPair, grid: &Grid, substeps: usize, beta: f64) -> Trajectory {
    let sys = System { n1: pair.nf() - 1.0, p: pair.p(), q: pair.q() };
    let rs = grid.radii();
    let mut states = Vec::with_capacity(rs.len());
    states.push([1.0, 0.0, beta, 0.0]);
    let mut s = series_start(pair, beta, rs[1]);
    states.push(s);
    for w in rs[1..].windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for m in 0..substeps {
            s = sys.rk4(w[0] + m as f64 * h, h, &s);
        }
        if s[0] <= 0.0 || s[2] <= 0.0 || !s.iter().all(|x| x.is_finite()) {
            let last = states.last().expect("at least two states");
            // Whichever component would reach zero first along the step decides the side.
            let frac = |a: f64, b: f64| if b <= 0.0 { a / (a - b) } else { f64::INFINITY };
            let side = if frac(last[0], s[0]) <= frac(last[2], s[2]) { Side::High } else { Side::Low };
            return Trajectory { states, side };
        }
        states.push(s);
    }
    let end = states.last().expect("nonempty");
    let side = if harmonic_defect(grid.r_max(), end, pair.nf()) > 0.0 { Side::High } else { Side::Low };
    Trajectory { states, side }
}

/// Solves the radial ground-state system by shooting on `beta = V(0)` with `U(0) = 1`.
pub fn solve_ground_state(pair: CriticalPair, opts: &GridOpts) -> Result<GroundState> {
    let grid = Arc::new(Grid::new(opts)?);
    let nf = pair.nf();
    let run = |b: f64| shoot(&pair, &grid, opts.substeps, b);

    // Bracket.
    let mut iterations = 0;
    let mut lo = 1.0;
    let mut hi = 1.0;
    let first = run(1.0).side;
    loop {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::Shooting("could not bracket V(0)".into()));
        }
        match first {
            Side::High => {
                lo *= 0.5;
                if run(lo).side == Side::Low {
                    break;
                }
                hi = lo;
            }
            Side::Low => {
                hi *= 2.0;
                if run(hi).side == Side::High {
                    break;
                }
                lo = hi;
            }
        }
    }
    // Bisect down to adjacent doubles.
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if iterations > 400 {
            return Err(Error::Shooting("bisection did not converge".into()));
        }
        match run(mid).side {
            Side::High => hi = mid,
            Side::Low => lo = mid,
        }
    }
    let t_lo = run(lo);
    let t_hi = run(hi);
    let rs = grid.radii();
    let len = t_lo.states.len().min(t_hi.states.len());
    let divergence = |i: usize| {
        let (a, b) = (&t_lo.states[i], &t_hi.states[i]);
        ((b[0] - a[0]) / a[0]).abs().max(((b[2] - a[2]) / a[2]).abs())
    };
    let last_below = |tol: f64| (0..len).take_while(|&i| divergence(i) <= tol).last().unwrap_or(0);
    let i_blend = last_below(BLEND_DIVERGENCE);
    let i_cut = last_below(CUT_DIVERGENCE).min(i_blend);
    let a_lo = harmonic_defect(rs[i_blend], &t_lo.states[i_blend], nf);
    let a_hi = harmonic_defect(rs[i_blend], &t_hi.states[i_blend], nf);
    let blend = if a_hi != a_lo { -a_lo / (a_hi - a_lo) } else { 0.5 };
    let blended: Vec<[f64; 4]> = (0..=i_cut)
        .map(|i| {
            let (a, b) = (&t_lo.states[i], &t_hi.states[i]);
            std::array::from_fn(|c| a[c] + blend * (b[c] - a[c]))
        })
        .collect();
    let beta = lo + blend * (hi - lo);
    let reliable_radius = rs[i_cut];
    if reliable_radius < 100.0 {
        return Err(Error::Shooting(format!(
            "trajectory reliable only up to r={reliable_radius:.3e}; tails cannot be fitted"
        )));
    }

    let shooting = ShootingReport {
        bracket: (lo, hi),
        margin: hi - lo,
        iterations,
        blend,
        blend_radius: rs[i_blend],
        reliable_radius,
    };
    assemble(pair, opts, grid, &blended, beta, shooting)
}

/// Rebuilds a ground state from its integrated nodes `(U, U', V, V')` up to the reliable
/// radius (e.g. a cached profile), refitting the tails exactly as the solver does.
pub fn rebuild_ground_state(
    pair: CriticalPair,
    opts: &GridOpts,
    head: &[[f64; 4]],
    shooting: ShootingReport,
) -> Result<GroundState> {
    let grid = Arc::new(Grid::new(opts)?);
    let i_cut = head.len().checked_sub(1).ok_or_else(|| invalid("no nodes to rebuild from"))?;
    if i_cut >= grid.len() || grid.radii()[i_cut] != shooting.reliable_radius {
        return Err(invalid("cached nodes do not end at the reliable radius of this grid"));
    }
    let beta = head[0][2];
    assemble(pair, opts, grid, head, beta, shooting)
}

fn assemble(
    pair: CriticalPair,
    opts: &GridOpts,
    grid: Arc<Grid>,
    blended: &[[f64; 4]],
    beta: f64,
    shooting: ShootingReport,
) -> Result<GroundState> {
    let nf = pair.nf();
    let rs = grid.radii();
    let i_cut = blended.len() - 1;
    let reliable_radius = shooting.reliable_radius;
    let r_head = &rs[..=i_cut];
    let u_head: Vec<f64> = blended.iter().map(|s| s[0]).collect();
    let v_head: Vec<f64> = blended.iter().map(|s| s[2]).collect();
    let tails = fit_tails(&pair, r_head, &u_head, &v_head, reliable_radius)?;
    let u_law = tails.u_fit.anchored_law(reliable_radius, u_head[i_cut]);
    let v_law = tails.v_fit.anchored_law(reliable_radius, v_head[i_cut]);

    let m = rs.len();
    let (mut uf, mut ud, mut udd) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let (mut vf, mut vd, mut vdd) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let (p, q) = (pair.p(), pair.q());
    for i in 0..m {
        let r = rs[i];
        if i <= i_cut {
            let s = blended[i];
            uf[i] = s[0];
            ud[i] = s[1];
            vf[i] = s[2];
            vd[i] = s[3];
            if i == 0 {
                udd[i] = -beta.powf(p) / nf;
                vdd[i] = -1.0 / nf;
            } else {
                udd[i] = -(nf - 1.0) / r * s[1] - s[2].powf(p);
                vdd[i] = -(nf - 1.0) / r * s[3] - s[0].powf(q);
            }
        } else {
            [uf[i], ud[i], udd[i]] = u_law.eval3(r);
            [vf[i], vd[i], vdd[i]] = v_law.eval3(r);
        }
    }
    let u = RadialProfile::new(grid.clone(), uf, ud, udd, u_law);
    let v = RadialProfile::new(grid.clone(), vf, vd, vdd, v_law);
    let energy = 2.0 / nf * radial_moment(&grid, pair.n(), |r| u.eval(r).powf(q + 1.0))?;
    Ok(GroundState { pair, a: tails.a, b: tails.b, u, v, energy, beta, tails, shooting, opts: *opts })
}

impl GroundState {
    /// Integrated nodes `(U, U', V, V')` up to the reliable radius.
    pub fn head_nodes(&self) -> Vec<[f64; 4]> {
        let rs = self.grid().radii();
        let (u, du, v, dv) = (self.u.values(), self.u.derivs(), self.v.values(), self.v.derivs());
        (0..rs.len())
            .take_while(|&i| rs[i] <= self.shooting.reliable_radius)
            .map(|i| [u[i], du[i], v[i], dv[i]])
            .collect()
    }
}

/// Re-fits the far-field laws of a solved ground state.
pub fn tail_constants(gs: &GroundState) -> Result<TailReport> {
    let rs = gs.u.grid().radii();
    fit_tails(&gs.pair, rs, gs.u.values(), gs.v.values(), gs.shooting.reliable_radius)
}

/// Scaled residuals of the two radial equations at the nodes, from 5-point finite differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeResidual {
    pub max_u: f64,
    pub max_v: f64,
    /// Radius where the larger residual occurs.
    pub worst_radius: f64,
}

impl GroundState {
    pub fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    pub fn n(&self) -> usize {
        self.pair.n()
    }

    /// `∫_{R^N} U^{pu} V^{pv}`.
    pub fn moment(&self, pu: f64, pv: f64) -> Result<f64> {
        radial_moment(self.grid(), self.n(), |r| {
            let mut f = 1.0;
            if pu != 0.0 {
                f *= self.u.eval(r).powf(pu);
            }
            if pv != 0.0 {
                f *= self.v.eval(r).powf(pv);
            }
            f
        })
    }

    /// `∫_{R^N} ∇U · ∇V = |S^{N-1}| ∫ U'V' r^{N-1} dr`.
    pub fn gradient_pairing(&self) -> Result<f64> {
        radial_moment(self.grid(), self.n(), |r| self.u.eval_with_deriv(r).1 * self.v.eval_with_deriv(r).1)
    }

    /// Residuals `|u'' + (N-1)u'/r + v^p|` (and the `v` analogue), divided by the sum of the
    /// magnitudes of the three terms, at interior nodes up to `r_limit`.
    pub fn ode_residual(&self, r_limit: f64) -> OdeResidual {
        let rs = self.grid().radii();
        let nf = self.pair.nf();
        let (p, q) = (self.pair.p(), self.pair.q());
        let (u, v) = (self.u.values(), self.v.values());
        let mut out = OdeResidual { max_u: 0.0, max_v: 0.0, worst_radius: 0.0 };
        for i in 2..rs.len() - 2 {
            if rs[i] > r_limit {
                break;
            }
            let w = fornberg_weights(rs[i], &rs[i - 2..=i + 2], 2);
            let d = |f: &[f64], k: usize| -> f64 { (0..5).map(|j| w[k][j] * f[i - 2 + j]).sum() };
            let (u1, u2, v1, v2) = (d(u, 1), d(u, 2), d(v, 1), d(v, 2));
            let r = rs[i];
            let ru = (u2 + (nf - 1.0) / r * u1 + v[i].powf(p)).abs()
                / (u2.abs() + ((nf - 1.0) / r * u1).abs() + v[i].powf(p));
            let rv = (v2 + (nf - 1.0) / r * v1 + u[i].powf(q)).abs()
                / (v2.abs() + ((nf - 1.0) / r * v1).abs() + u[i].powf(q));
            if ru.max(rv) > out.max_u.max(out.max_v) {
                out.worst_radius = r;
            }
            out.max_u = out.max_u.max(ru);
            out.max_v = out.max_v.max(rv);
        }
        out
    }
}
