//! Recovery statistics and diagnostics.

use crate::error::{invalid, GsbmError, Result};
use crate::generator::{GeometricGraph, Labeling, ModelParams};
use crate::geometry::BlockGrid;

/// Best matched fraction over a global sign flip; zeros in `sigma` never match.
pub fn agreement(sigma: &Labeling, truth: &Labeling) -> Result<f64> {
    if sigma.len() != truth.len() {
        return Err(GsbmError::DimensionMismatch { expected: truth.len(), got: sigma.len() });
    }
    if truth.has_zeros() {
        return invalid("ground truth must be nonzero");
    }
    if truth.is_empty() {
        return Ok(1.0);
    }
    let (mut same, mut flipped) = (0usize, 0usize);
    for (&s, &t) in sigma.values().iter().zip(truth.values()) {
        if s == t {
            same += 1;
        } else if s == -t {
            flipped += 1;
        }
    }
    Ok(same.max(flipped) as f64 / truth.len() as f64)
}

/// For each `u`, vertices within the visibility radius (u included) with
/// `sigma(v) != sign * truth(v)`; zero labels count as mistakes.
pub fn neighborhood_mistakes(g: &GeometricGraph, sigma: &Labeling, truth: &Labeling, sign: i8) -> Result<Vec<u32>> {
    if sigma.len() != g.num_vertices() || truth.len() != g.num_vertices() {
        return invalid("labelings must cover the graph");
    }
    if sign != 1 && sign != -1 {
        return invalid(format!("relative sign must be +1 or -1, got {sign}"));
    }
    let wrong: Vec<bool> = (0..g.num_vertices()).map(|v| sigma.get(v) != sign * truth.get(v)).collect();
    Ok((0..g.num_vertices())
        .map(|u| {
            let own = wrong[u] as u32;
            own + g.visible_from(u).filter(|&v| wrong[v]).count() as u32
        })
        .collect())
}

/// Maximal circular runs of nonempty blocks in a one-dimensional grid.
pub fn count_empty_block_segments(grid: &BlockGrid) -> Result<usize> {
    if grid.dim() != 1 {
        return invalid(format!("segment counting needs d = 1, got d = {}", grid.dim()));
    }
    let m = grid.num_blocks();
    let empty: Vec<bool> = (0..m).map(|b| grid.vertices(b).is_empty()).collect();
    if empty.iter().all(|&e| e) {
        return Ok(0);
    }
    if !empty.iter().any(|&e| e) {
        return Ok(1);
    }
    // a run starts at each nonempty block whose circular predecessor is empty
    Ok((0..m).filter(|&b| !empty[b] && empty[(b + m - 1) % m]).count())
}

/// Per-stage wall-clock durations in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimes {
    pub generate_ms: f64,
    pub phase1_ms: f64,
    pub phase2_ms: f64,
}

/// Outcome of one seeded trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial_id: usize,
    pub seed: u64,
    pub params: ModelParams,
    pub chi: f64,
    pub delta: f64,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub visibility_connected: bool,
    /// `None` when the estimator has no first stage.
    pub phase1_agreement: Option<f64>,
    pub final_agreement: f64,
    pub exact_success: bool,
    pub max_block_mistakes: usize,
    pub max_neighborhood_mistakes: usize,
    pub times: StageTimes,
}
