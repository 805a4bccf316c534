use crate::artifacts::Artifacts;
use crate::config::RunConfig;
use crate::CliError;
use crownlab_core::energy::member_seed;
use crownlab_core::radial::{ShootingReport, TailReport};
use crownlab_core::{
    error_norm_check, eval_phi_asymptotic, eval_phi_mc, expansion_convergence, interaction_constants, rebuild_ground_state,
    scaling_defect, solve_ground_state, solve_w, CriticalPair, GridOpts, GroundState, InteractionConstants, PolygonConfig,
    ReducedLandscape, SearchBox,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

const PROFILE_CSV: &str = "ground_state.csv";
const PROFILE_JSON: &str = "ground_state.json";

/// Tolerances of the scaling-check command.
const ANSATZ_SCALING_TOL: f64 = 1e-8;
const LANDSCAPE_SCALING_TOL: f64 = 1e-12;
const STATIONARITY_TOL: f64 = 1e-8;
/// Half-width, in standard errors, of the band accepted around a unit phi ratio.
const PHI_BAND: f64 = 5.0;

#[derive(Debug, Serialize, Deserialize)]
struct ProfileSummary {
    n: usize,
    p: f64,
    q: f64,
    grid: GridOpts,
    beta: f64,
    a: f64,
    b: f64,
    energy: f64,
    tails: TailReport,
    shooting: ShootingReport,
}

fn pair(cfg: &RunConfig) -> Result<CriticalPair, CliError> {
    Ok(CriticalPair::new(cfg.pair.n, cfg.pair.p)?)
}

fn profile_csv(gs: &GroundState) -> String {
    let mut s = String::from("r,U,V,dU,dV\n");
    let (u, du, v, dv) = (gs.u.values(), gs.u.derivs(), gs.v.values(), gs.v.derivs());
    for (i, r) in gs.grid().radii().iter().enumerate() {
        let _ = writeln!(s, "{r:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", u[i], v[i], du[i], dv[i]);
    }
    s
}

fn write_profile(gs: &GroundState, art: &Artifacts) -> Result<(), CliError> {
    art.write_text(PROFILE_CSV, &profile_csv(gs))?;
    let summary = ProfileSummary {
        n: gs.pair.n(),
        p: gs.pair.p(),
        q: gs.pair.q(),
        grid: gs.opts,
        beta: gs.beta,
        a: gs.a,
        b: gs.b,
        energy: gs.energy,
        tails: gs.tails.clone(),
        shooting: gs.shooting.clone(),
    };
    art.write_json(PROFILE_JSON, summary)
}

/// Rebuilds the ground state from a cached profile when it matches the configured pair and grid.
fn load_cached(dir: &Path, pair: CriticalPair, grid: &GridOpts) -> Option<GroundState> {
    let summary: ProfileSummary = serde_json::from_str(&std::fs::read_to_string(dir.join(PROFILE_JSON)).ok()?).ok()?;
    if summary.n != pair.n() || summary.p != pair.p() || summary.grid != *grid {
        return None;
    }
    let text = std::fs::read_to_string(dir.join(PROFILE_CSV)).ok()?;
    let mut lines = text.lines();
    if lines.next()? != "r,U,V,dU,dV" {
        return None;
    }
    let mut head = vec![];
    for line in lines {
        let f: Vec<f64> = line.split(',').map(str::parse).collect::<Result<_, _>>().ok()?;
        let [r, u, v, du, dv] = f[..] else { return None };
        if r > summary.shooting.reliable_radius {
            break;
        }
        head.push([u, du, v, dv]);
    }
    rebuild_ground_state(pair, grid, &head, summary.shooting).ok()
}

/// Cached ground state, or a fresh solve that refreshes the cache.
fn ground_state_for(cfg: &RunConfig, art: &Artifacts) -> Result<GroundState, CliError> {
    let pair = pair(cfg)?;
    if let Some(gs) = load_cached(art.dir(), pair, &cfg.grid) {
        return Ok(gs);
    }
    let gs = solve_ground_state(pair, &cfg.grid)?;
    write_profile(&gs, art)?;
    Ok(gs)
}

fn fail_on(checks: &[(&str, bool)]) -> Result<(), CliError> {
    let failed: Vec<String> = checks.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Trend(failed))
    }
}

fn checks_map(checks: &[(&str, bool)]) -> std::collections::BTreeMap<String, bool> {
    checks.iter().map(|(n, ok)| (n.to_string(), *ok)).collect()
}

fn increasing_k(cfg: &RunConfig) -> Result<Vec<usize>, CliError> {
    let ks = cfg.k_list();
    if ks.is_empty() || ks.windows(2).any(|w| w[1] <= w[0]) || ks[0] == 0 {
        return Err(CliError::Config("polygon.k must be a positive, strictly increasing list".into()));
    }
    Ok(ks)
}

pub fn ground_state(cfg: &RunConfig, art: &Artifacts) -> Result<(), CliError> {
    let gs = solve_ground_state(pair(cfg)?, &cfg.grid)?;
    write_profile(&gs, art)
}

fn constants_for(cfg: &RunConfig, art: &Artifacts) -> Result<(GroundState, crownlab_core::AuxProfileW, InteractionConstants), CliError> {
    let gs = ground_state_for(cfg, art)?;
    let w = solve_w(&gs)?;
    let c = interaction_constants(&gs, &w)?;
    Ok((gs, w, c))
}

pub fn constants(cfg: &RunConfig, art: &Artifacts) -> Result<(), CliError> {
    let (_, _, c) = constants_for(cfg, art)?;
    art.write_json("constants.json", c)
}

#[derive(Serialize)]
struct PhiRow {
    k: usize,
    mu: f64,
    seed: u64,
    phi_mc: f64,
    stderr: f64,
    phi_asymptotic: f64,
    ratio: f64,
    ratio_stderr: f64,
}

pub fn phi_check(cfg: &RunConfig, art: &Artifacts) -> Result<(), CliError> {
    let ks = increasing_k(cfg)?;
    let gs = ground_state_for(cfg, art)?;
    let w = solve_w(&gs)?;
    let p = &cfg.polygon;
    let mut rows = vec![];
    for &k in &ks {
        let pc = PolygonConfig::new(gs.pair, k, p.mu0, p.r, p.lambda)?;
        let x1 = pc.centers()[0].clone();
        let seed = member_seed(cfg.mc.seed, k);
        let mc = eval_phi_mc(&pc, &gs, &x1, cfg.mc.samples, seed)?;
        let asym = eval_phi_asymptotic(&pc, &gs, &w, &x1)?;
        rows.push(PhiRow {
            k,
            mu: pc.mu(),
            seed,
            phi_mc: mc.value,
            stderr: mc.stderr,
            phi_asymptotic: asym,
            ratio: mc.value / asym,
            ratio_stderr: mc.stderr / asym,
        });
    }
    let mut csv = String::from("k,mu,phi_mc,stderr,phi_asymptotic,ratio\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.k, r.mu, r.phi_mc, r.stderr, r.phi_asymptotic, r.ratio);
    }
    let trend = rows.windows(2).all(|w| (w[1].ratio - 1.0).abs() <= (w[0].ratio - 1.0).abs());
    let last = rows.last().expect("non-empty k list");
    let band = (last.ratio - 1.0).abs() <= PHI_BAND * last.ratio_stderr;
    let checks = [("ratio_trend_non_increasing", trend), ("last_ratio_within_band", band)];
    art.write_text("phi_check.csv", &csv)?;
    #[derive(Serialize)]
    struct Out {
        samples: u64,
        band_stderr: f64,
        rows: Vec<PhiRow>,
        checks: std::collections::BTreeMap<String, bool>,
    }
    art.write_json("phi_check.json", Out { samples: cfg.mc.samples, band_stderr: PHI_BAND, rows, checks: checks_map(&checks) })?;
    fail_on(&checks)
}

pub fn expansion(cfg: &RunConfig, art: &Artifacts) -> Result<(), CliError> {
    let ks = increasing_k(cfg)?;
    let (gs, w, c) = constants_for(cfg, art)?;
    let p = &cfg.polygon;
    let table = expansion_convergence(&gs, &w, &c, p.mu0, p.r, p.lambda, &ks, cfg.mc.samples, cfg.mc.seed)?;
    art.write_text("expansion.csv", &table.to_csv())?;
    let checks = [("scaled_residual_non_increasing", table.trend_ok.unwrap_or(true)), ("term_signs", table.signs_ok)];
    #[derive(Serialize)]
    struct Out {
        samples: u64,
        table: crownlab_core::ExpansionTable,
    }
    art.write_json("expansion.json", Out { samples: cfg.mc.samples, table })?;
    fail_on(&checks)
}

pub fn error_norm(cfg: &RunConfig, art: &Artifacts) -> Result<(), CliError> {
    let ks = increasing_k(cfg)?;
    let gs = ground_state_for(cfg, art)?;
    let w = solve_w(&gs)?;
    let p = &cfg.polygon;
    let table = error_norm_check(&gs, &w, p.mu0, p.r, p.lambda, &ks, cfg.norms.per_scale, cfg.mc.seed)?;
    art.write_text("error_norm.csv", &table.to_csv())?;
    let checks = [
        ("scaled_norm_strictly_decreasing", table.strictly_decreasing.unwrap_or(true)),
        ("slope_below_threshold", table.slope_ok.unwrap_or(true)),
    ];
    #[derive(Serialize)]
    struct Out {
        per_scale: usize,
        table: crownlab_core::ErrorNormTable,
    }
    art.write_json("error_norm.json", Out { per_scale: cfg.norms.per_scale, table })?;
    fail_on(&checks)
}

#[derive(Serialize)]
struct TailPoint {
    m0: f64,
    f1_star: f64,
    f1_star_closed: f64,
}

pub fn landscape(cfg: &RunConfig, art: &Artifacts) -> Result<(), CliError> {
    let (gs, _, c) = constants_for(cfg, art)?;
    let l = &cfg.landscape;
    let search = SearchBox { m_lo: l.m_lo, m_hi: l.m_hi, l_lo: l.l_lo, l_hi: l.l_hi };
    let land = ReducedLandscape::from_constants(&c, &gs)?.with_box(search)?;
    let best = land.find_interior_max(l.resolution)?;
    art.write_text("landscape.csv", &land.clone().with_box(best.search)?.scan_csv(l.resolution))?;

    let probes = [0.5, 1.0, 2.0, best.m0];
    let stationarity: Vec<(f64, f64)> = probes.iter().map(|&m| (m, land.stationarity_residual(m))).collect();
    let tail: Vec<TailPoint> = (0..=8)
        .map(|i| {
            let m0 = best.m0 * 2f64.powi(i);
            TailPoint { m0, f1_star: land.f1_star(m0), f1_star_closed: land.f1_star_closed(m0) }
        })
        .collect();
    let tail_monotone = tail.windows(2).all(|w| w[1].f1_star < w[0].f1_star && w[1].f1_star > 0.0);
    let n = tail.len();
    let tail_exponent = (tail[n - 1].f1_star / tail[n - 2].f1_star).log2();
    let checks = [
        ("stationarity", stationarity.iter().all(|(_, r)| *r < STATIONARITY_TOL)),
        ("interior_margin_positive", best.margin > 0.0),
        ("f1_tail_monotone", tail_monotone),
    ];
    #[derive(Serialize)]
    struct Out {
        b1: f64,
        b2: f64,
        resolution: usize,
        maximizer: crownlab_core::InteriorMax,
        lambda_at_maximizer: f64,
        stationarity: Vec<(f64, f64)>,
        f1_tail: Vec<TailPoint>,
        tail_exponent: f64,
        expected_tail_exponent: f64,
        checks: std::collections::BTreeMap<String, bool>,
    }
    let out = Out {
        b1: land.b1,
        b2: land.b2,
        resolution: l.resolution,
        maximizer: best,
        lambda_at_maximizer: land.lambda_star(best.m0),
        stationarity,
        f1_tail: tail,
        tail_exponent,
        expected_tail_exponent: -(gs.pair.nf() - 2.0),
        checks: checks_map(&checks),
    };
    art.write_json("landscape.json", out)?;
    fail_on(&checks)
}

pub fn scaling_check(cfg: &RunConfig, art: &Artifacts) -> Result<(), CliError> {
    let ks = increasing_k(cfg)?;
    let (gs, w, c) = constants_for(cfg, art)?;
    let p = &cfg.polygon;
    let pc = PolygonConfig::new(gs.pair, ks[0], p.mu0, p.r, p.lambda)?;
    let ansatz: Vec<(f64, f64)> = [0.7, 3.0]
        .iter()
        .map(|&t| Ok((t, scaling_defect(&pc, &gs, &w, t, 100, cfg.mc.seed)?)))
        .collect::<Result<_, CliError>>()?;
    let land = ReducedLandscape::from_constants(&c, &gs)?;
    let f_defect = land.scaling_defect(100, cfg.mc.seed);
    let checks = [
        ("ansatz_covariance", ansatz.iter().all(|(_, d)| *d < ANSATZ_SCALING_TOL)),
        ("landscape_invariance", f_defect < LANDSCAPE_SCALING_TOL),
    ];
    #[derive(Serialize)]
    struct Out {
        k: usize,
        ansatz_defect: Vec<(f64, f64)>,
        ansatz_tol: f64,
        landscape_defect: f64,
        landscape_tol: f64,
        checks: std::collections::BTreeMap<String, bool>,
    }
    let out = Out {
        k: ks[0],
        ansatz_defect: ansatz,
        ansatz_tol: ANSATZ_SCALING_TOL,
        landscape_defect: f_defect,
        landscape_tol: LANDSCAPE_SCALING_TOL,
        checks: checks_map(&checks),
    };
    art.write_json("scaling_check.json", out)?;
    fail_on(&checks)
}
