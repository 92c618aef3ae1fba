//! Phase I: an almost-exact labeling built block by block.
//!
//! The root block is labeled by counting common neighbours with a pivot
//! vertex; every other occupied block copies the sign pattern of its parent
//! in the BFS tree by thresholding edge counts into the parent's majority
//! class. All thresholds are compared in exact integer arithmetic.

use std::io::Write;

use crate::error::{invalid, GsbmError, Result};
use crate::generator::{common_neighbor_count, EdgeQuery, GeometricGraph, Labeling};
use crate::geometry::BlockGrid;
use crate::prob::Prob;
use crate::visibility::VisibilityGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Result {
    /// Nonzero exactly on vertices of occupied blocks.
    pub sigma_hat: Labeling,
    /// Pivot of the root block, labeled +1; `None` when nothing is occupied.
    pub root_vertex: Option<usize>,
    /// `(block, mistakes)` against `truth(root) * truth`, one entry per occupied block, ascending.
    pub per_block_mistakes: Vec<(usize, usize)>,
}

impl Phase1Result {
    pub fn max_block_mistakes(&self) -> usize {
        self.per_block_mistakes.iter().map(|&(_, m)| m).max().unwrap_or(0)
    }
}

fn require_distinct(a: Prob, b: Prob) -> Result<()> {
    if a == b {
        return invalid("a and b must differ");
    }
    Ok(())
}

/// Labels `set` relative to its lowest-id vertex, which gets +1.
///
/// Another vertex gets +1 iff its common-neighbour count with the pivot
/// inside `set` exceeds `(a+b)^2 (|set|-2) / 4`. Output is aligned with `set`.
pub fn pairwise_classify<G: EdgeQuery + ?Sized>(g: &G, set: &[u32], a: Prob, b: Prob) -> Result<Vec<i8>> {
    require_distinct(a, b)?;
    let Some(&u0) = set.iter().min() else {
        return invalid("pairwise classification needs a nonempty set");
    };
    let (s, q) = Prob::sum_ratio(a, b);
    // N > s^2 (|S|-2) / (4 q^2)  <=>  4 N q^2 > s^2 (|S|-2)
    let rhs = s * s * (set.len() as u128).saturating_sub(2);
    let scale = 4 * q * q;
    Ok(set
        .iter()
        .map(|&u| {
            if u == u0 {
                return 1;
            }
            let count = common_neighbor_count(g, u0 as usize, u as usize, set) as u128;
            if count * scale > rhs {
                1
            } else {
                -1
            }
        })
        .collect())
}

/// Labels `targets` from the labeled, mutually visible `reference` set.
///
/// The reference's majority class `m` (ties go to +1) is the anchor: a
/// target joins `m` iff its edge count into that class reaches
/// `(a+b)/2` of the class size, with the comparison reversed when `a < b`.
pub fn propagate<G: EdgeQuery + ?Sized>(
    g: &G,
    reference: &[u32],
    targets: &[u32],
    labels: &Labeling,
    a: Prob,
    b: Prob,
) -> Result<Vec<i8>> {
    require_distinct(a, b)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for &v in reference {
        match labels.get(v as usize) {
            1 => plus.push(v),
            -1 => minus.push(v),
            _ => return invalid(format!("reference vertex {v} is unlabeled")),
        }
    }
    let (m, class) = if plus.len() >= minus.len() { (1i8, plus) } else { (-1i8, minus) };
    let (s, q) = Prob::sum_ratio(a, b);
    // d >= s |class| / (2q)  <=>  2 q d >= s |class|
    let rhs = s * class.len() as u128;
    let assortative = a > b;
    Ok(targets
        .iter()
        .map(|&u| {
            let hits = class.iter().filter(|&&v| g.has_edge(u as usize, v as usize)).count() as u128;
            let reaches = 2 * q * hits >= rhs;
            if reaches == assortative {
                m
            } else {
                -m
            }
        })
        .collect())
}

/// Runs Phase I over the BFS schedule of `vg`.
pub fn run_phase1(
    g: &GeometricGraph,
    grid: &BlockGrid,
    vg: &VisibilityGraph,
    a: Prob,
    b: Prob,
) -> Result<Phase1Result> {
    require_distinct(a, b)?;
    if grid.num_vertices() != g.num_vertices() {
        return invalid("block grid and graph disagree on the vertex count");
    }
    let mut sigma = Labeling::zeros(g.num_vertices());
    let Some(root) = vg.root() else {
        return Ok(Phase1Result { sigma_hat: sigma, root_vertex: None, per_block_mistakes: Vec::new() });
    };
    if !vg.connected() {
        return Err(GsbmError::VisibilityDisconnected);
    }
    let (order, parent) = vg.bfs_order(root)?;

    let root_set = grid.vertices(root);
    for (&v, label) in root_set.iter().zip(pairwise_classify(g, root_set, a, b)?) {
        sigma.set(v as usize, label);
    }
    // parent[k] describes order[k + 1]
    for (&(child, par), &next) in parent.iter().zip(&order[1..]) {
        debug_assert_eq!(child, next);
        let targets = grid.vertices(child);
        let labels = propagate(g, grid.vertices(par), targets, &sigma, a, b)?;
        for (&v, label) in targets.iter().zip(labels) {
            sigma.set(v as usize, label);
        }
    }

    let u0 = *root_set.iter().min().expect("occupied block is nonempty") as usize;
    let sign = g.truth().get(u0);
    let mut per_block_mistakes: Vec<(usize, usize)> = order
        .iter()
        .map(|&blk| {
            let wrong = grid
                .vertices(blk)
                .iter()
                .filter(|&&v| sigma.get(v as usize) != sign * g.truth().get(v as usize))
                .count();
            (blk, wrong)
        })
        .collect();
    per_block_mistakes.sort_unstable();
    Ok(Phase1Result { sigma_hat: sigma, root_vertex: Some(u0), per_block_mistakes })
}

/// One `b <block> <label>...` line per occupied block, in ascending block order.
pub fn write_block_labels<W: Write>(result: &Phase1Result, grid: &BlockGrid, mut out: W) -> Result<()> {
    for &(blk, _) in &result.per_block_mistakes {
        write!(out, "b {blk}")?;
        for &v in grid.vertices(blk) {
            write!(out, " {}", result.sigma_hat.get(v as usize))?;
        }
        writeln!(out)?;
    }
    Ok(())
}
