//! Seeded trials, parallel sweeps and their CSV output.

mod config;

pub use config::{ChiChoice, Estimator, RawConfig, SweepConfig, TrialPoint, GRID_KEYS, SCALAR_KEYS};

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{GsbmError, Result};
use crate::generator::{sample_instance, GeometricGraph, Labeling};
use crate::geometry::BlockGrid;
use crate::metrics::{agreement, neighborhood_mistakes, StageTimes, TrialResult};
use crate::phase1::{run_phase1, Phase1Result};
use crate::phase2::{genie_all, refine_all};
use crate::rng::derive_seed;
use crate::theory::{practical_chi, solve_parameters, solve_parameters_with_chi, DerivedParams};
use crate::visibility::VisibilityGraph;

/// Caps the sweep worker pool when set to a positive integer.
pub const THREADS_ENV: &str = "GSBM_LAB_THREADS";

pub const CSV_HEADER: &str = "trial_id,seed,d,lambda,n,a,b,chi,delta,n_vertices,n_edges,visibility_connected,\
phase1_agreement,final_agreement,exact_success,max_block_mistakes,max_nbhd_mistakes,t_generate_ms,t_phase1_ms,t_phase2_ms";

/// Block size and occupancy threshold for a point.
pub fn resolve_parameters(point: &TrialPoint) -> Result<DerivedParams> {
    let params = &point.params;
    let mut derived = match point.chi {
        ChiChoice::Theory => solve_parameters(params)
            .or_else(|_| solve_parameters_with_chi(params, practical_chi(params.lambda, params.d)))?,
        ChiChoice::Practical => solve_parameters_with_chi(params, practical_chi(params.lambda, params.d))?,
        ChiChoice::Fixed(chi) => solve_parameters_with_chi(params, chi)?,
    };
    if let Some(delta) = point.delta {
        derived.delta = delta;
        derived.delta_fallback = false;
        let (a, b) = (params.a.value(), params.b.value());
        derived.m_budget = 5.0 / ((a - b).powi(2) * delta);
    }
    Ok(derived)
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Grid and visibility graph for a sampled instance.
pub fn block_structure(g: &GeometricGraph, chi: f64, delta: f64) -> Result<(BlockGrid, VisibilityGraph)> {
    let p = g.params();
    let grid = BlockGrid::build(g.positions(), p.n, p.d, chi)?;
    let vg = VisibilityGraph::build(&grid, delta)?;
    Ok((grid, vg))
}

/// Phase I over a fresh block structure; `Ok(None)` when the visibility graph is disconnected.
pub fn phase1_labels(
    g: &GeometricGraph,
    chi: f64,
    delta: f64,
) -> Result<(BlockGrid, VisibilityGraph, Option<Phase1Result>)> {
    let (grid, vg) = block_structure(g, chi, delta)?;
    let p = g.params();
    let res = match run_phase1(g, &grid, &vg, p.a, p.b) {
        Ok(r) => Some(r),
        Err(GsbmError::VisibilityDisconnected) => None,
        Err(e) => return Err(e),
    };
    Ok((grid, vg, res))
}

/// Best-sign neighbourhood mistake maximum of `sigma`.
fn max_nbhd(g: &GeometricGraph, sigma: &Labeling, sign: Option<i8>) -> Result<usize> {
    let signs: &[i8] = match sign {
        Some(1) => &[1],
        Some(_) => &[-1],
        None => &[1, -1],
    };
    let mut best = usize::MAX;
    for &s in signs {
        let worst = neighborhood_mistakes(g, sigma, g.truth(), s)?.into_iter().max().unwrap_or(0) as usize;
        best = best.min(worst);
    }
    Ok(best)
}

/// One seeded run of the selected estimator. A disconnected visibility graph
/// is recorded as a failed trial with zero agreement.
pub fn run_trial(point: &TrialPoint, trial_id: usize, seed: u64, record_timing: bool) -> Result<TrialResult> {
    point.params.require_distinct()?;
    let derived = resolve_parameters(point)?;
    let (chi, delta) = (derived.chi, derived.delta);
    let (a, b) = (point.params.a.value(), point.params.b.value());

    let start = Instant::now();
    let g = sample_instance(&point.params, seed)?;
    let mut times = StageTimes { generate_ms: millis(start), ..StageTimes::default() };

    let start = Instant::now();
    let (_, vg, phase1) = phase1_labels(&g, chi, delta)?;
    let phase1_time = millis(start);
    let connected = vg.connected();

    let (final_labels, phase1_agreement, max_block, nbhd) = match point.estimator {
        Estimator::Genie => {
            let start = Instant::now();
            let labels = genie_all(&g, a, b)?;
            times.phase2_ms = millis(start);
            let nbhd = max_nbhd(&g, &labels, None)?;
            (labels, None, 0, nbhd)
        }
        Estimator::TwoPhase | Estimator::Phase1Only => {
            times.phase1_ms = phase1_time;
            match &phase1 {
                None => {
                    let failed = Labeling::zeros(g.num_vertices());
                    let nbhd = max_nbhd(&g, &failed, Some(1))?;
                    (failed, Some(0.0), 0, nbhd)
                }
                Some(r) => {
                    let p1 = agreement(&r.sigma_hat, g.truth())?;
                    let sign = r.root_vertex.map(|u| g.truth().get(u));
                    let nbhd = max_nbhd(&g, &r.sigma_hat, sign)?;
                    let labels = if point.estimator == Estimator::TwoPhase {
                        let start = Instant::now();
                        let refined = refine_all(&g, &r.sigma_hat, a, b)?;
                        times.phase2_ms = millis(start);
                        refined
                    } else {
                        r.sigma_hat.clone()
                    };
                    (labels, Some(p1), r.max_block_mistakes(), nbhd)
                }
            }
        }
    };
    let final_agreement = agreement(&final_labels, g.truth())?;
    Ok(TrialResult {
        trial_id,
        seed,
        params: point.params,
        chi,
        delta,
        n_vertices: g.num_vertices(),
        n_edges: g.num_edges(),
        visibility_connected: connected,
        phase1_agreement,
        final_agreement,
        exact_success: final_agreement == 1.0,
        max_block_mistakes: max_block,
        max_neighborhood_mistakes: nbhd,
        times: if record_timing { times } else { StageTimes::default() },
    })
}

/// Seed of trial `trial` at grid point `point`.
pub fn trial_seed(base: u64, point: usize, trial: usize) -> u64 {
    derive_seed(&[base, point as u64, trial as u64])
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Every trial of every grid point, grid-major then by trial index.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<Vec<TrialResult>>> {
    let points = config.points()?;
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|p| (0..config.trials).map(move |t| (p, t))).collect();
    let work = || -> Result<Vec<TrialResult>> {
        jobs.par_iter()
            .map(|&(p, t)| run_trial(&points[p], t, trial_seed(config.seed, p, t), config.record_timing))
            .collect()
    };
    let flat = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| GsbmError::InvalidInput(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let mut grouped: Vec<Vec<TrialResult>> = Vec::with_capacity(points.len());
    let mut it = flat.into_iter();
    for _ in 0..points.len() {
        grouped.push(it.by_ref().take(config.trials).collect());
    }
    Ok(grouped)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn write_row<W: Write>(out: &mut W, r: &TrialResult) -> Result<()> {
    let p = &r.params;
    writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}",
        r.trial_id,
        r.seed,
        p.d,
        p.lambda,
        p.n,
        p.a,
        p.b,
        r.chi,
        r.delta,
        r.n_vertices,
        r.n_edges,
        r.visibility_connected as u8,
        fmt_opt(r.phase1_agreement),
        r.final_agreement,
        r.exact_success as u8,
        r.max_block_mistakes,
        r.max_neighborhood_mistakes,
        r.times.generate_ms,
        r.times.phase1_ms,
        r.times.phase2_ms,
    )?;
    Ok(())
}

/// Summary line of one grid point: means of the numeric columns, rates of the
/// boolean ones and maxima of the mistake counts; `trial_id` reads `summary`
/// and `seed` holds the trial count.
fn write_summary<W: Write>(out: &mut W, rows: &[TrialResult]) -> Result<()> {
    let Some(first) = rows.first() else {
        return Ok(());
    };
    let p = &first.params;
    let phase1 = if rows.iter().all(|r| r.phase1_agreement.is_some()) {
        Some(mean(rows.iter().filter_map(|r| r.phase1_agreement)))
    } else {
        None
    };
    writeln!(
        out,
        "summary,{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3},{:.3},{:.3}",
        rows.len(),
        p.d,
        p.lambda,
        p.n,
        p.a,
        p.b,
        first.chi,
        first.delta,
        mean(rows.iter().map(|r| r.n_vertices as f64)),
        mean(rows.iter().map(|r| r.n_edges as f64)),
        mean(rows.iter().map(|r| r.visibility_connected as u8 as f64)),
        fmt_opt(phase1),
        mean(rows.iter().map(|r| r.final_agreement)),
        mean(rows.iter().map(|r| r.exact_success as u8 as f64)),
        rows.iter().map(|r| r.max_block_mistakes).max().unwrap_or(0),
        rows.iter().map(|r| r.max_neighborhood_mistakes).max().unwrap_or(0),
        mean(rows.iter().map(|r| r.times.generate_ms)),
        mean(rows.iter().map(|r| r.times.phase1_ms)),
        mean(rows.iter().map(|r| r.times.phase2_ms)),
    )?;
    Ok(())
}

/// Header, then each point's trial rows followed by its summary row.
pub fn write_csv<W: Write>(grouped: &[Vec<TrialResult>], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for rows in grouped {
        for r in rows {
            write_row(&mut out, r)?;
        }
        write_summary(&mut out, rows)?;
    }
    out.flush()?;
    Ok(())
}
