//! The (chi, delta)-visibility graph over occupied blocks.
//!
//! Built from block occupancy alone, so the propagation schedule never
//! depends on labels or edges.

use std::collections::VecDeque;

use crate::dsu::DisjointSets;
use crate::error::{invalid, GsbmError, Result};
use crate::geometry::{blocks_mutually_visible, BlockGrid};

/// `(child, parent)` pairs of a spanning tree, in discovery order.
pub type TreeEdges = Vec<(usize, usize)>;

#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityGraph {
    /// Occupied block ids, ascending.
    pub occupied: Vec<usize>,
    /// Unordered pairs `(i, j)` with `i < j`, ascending.
    pub edges: Vec<(usize, usize)>,
    pub delta: f64,
    /// BFS order from the root, empty when disconnected.
    pub order: Vec<usize>,
    /// `(child, parent)` over the spanning tree, in BFS order.
    pub parent: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    slot: Vec<Option<usize>>,
}

/// Blocks holding strictly more than `delta * log n` vertices.
pub fn occupied_blocks(grid: &BlockGrid, delta: f64) -> Result<Vec<usize>> {
    if !(delta.is_finite() && delta > 0.0) {
        return invalid(format!("delta must be positive, got {delta}"));
    }
    let threshold = delta * grid.torus().log_n();
    Ok((0..grid.num_blocks()).filter(|&b| grid.vertices(b).len() as f64 > threshold).collect())
}

/// Per-axis index offsets that can reach a visible block.
fn offset_reach(grid: &BlockGrid) -> usize {
    let r = grid.torus().visibility_radius();
    (r / grid.block_side()).ceil() as usize + 1
}

/// Distinct block ids whose per-axis index lies within `reach` of `block` (wrapping).
fn blocks_within(grid: &BlockGrid, block: usize, reach: usize) -> Vec<usize> {
    let m = grid.side_count();
    let axis: Vec<Vec<usize>> = grid
        .block_coords(block)
        .into_iter()
        .map(|k| {
            if 2 * reach + 1 >= m {
                (0..m).collect()
            } else {
                (0..=2 * reach).map(|o| (k + m + o - reach) % m).collect()
            }
        })
        .collect();
    let mut acc = vec![0usize];
    for choices in &axis {
        acc = acc.iter().flat_map(|&prefix| choices.iter().map(move |&k| prefix * m + k)).collect();
    }
    acc.sort_unstable();
    acc.dedup();
    acc
}

impl VisibilityGraph {
    pub fn build(grid: &BlockGrid, delta: f64) -> Result<Self> {
        let occupied = occupied_blocks(grid, delta)?;
        let mut slot = vec![None; grid.num_blocks()];
        for (i, &b) in occupied.iter().enumerate() {
            slot[b] = Some(i);
        }
        let reach = offset_reach(grid);
        let mut adjacency = vec![Vec::new(); occupied.len()];
        let mut edges = Vec::new();
        for (i, &b) in occupied.iter().enumerate() {
            for c in blocks_within(grid, b, reach) {
                if c <= b || slot[c].is_none() {
                    continue;
                }
                if blocks_mutually_visible(b, c, grid) {
                    edges.push((b, c));
                    adjacency[i].push(c);
                    adjacency[slot[c].unwrap()].push(b);
                }
            }
        }
        edges.sort_unstable();
        for list in adjacency.iter_mut() {
            list.sort_unstable();
        }
        let mut vg = VisibilityGraph { occupied, edges, delta, order: Vec::new(), parent: Vec::new(), adjacency, slot };
        if let Some(&root) = vg.occupied.first() {
            if vg.connected() {
                let (order, parent) = vg.bfs_order(root)?;
                vg.order = order;
                vg.parent = parent;
            }
        }
        Ok(vg)
    }

    pub fn is_occupied(&self, block: usize) -> bool {
        self.slot.get(block).is_some_and(|s| s.is_some())
    }

    /// Occupied neighbours of an occupied block, ascending.
    pub fn neighbors(&self, block: usize) -> &[usize] {
        match self.slot.get(block).copied().flatten() {
            Some(i) => &self.adjacency[i],
            None => &[],
        }
    }

    /// Lowest-index occupied block.
    pub fn root(&self) -> Option<usize> {
        self.occupied.first().copied()
    }

    pub fn parent_of(&self, block: usize) -> Option<usize> {
        self.parent.iter().find(|&&(c, _)| c == block).map(|&(_, p)| p)
    }

    fn reach_count(&self, root: usize) -> usize {
        let mut seen = vec![false; self.occupied.len()];
        let mut queue = VecDeque::from([root]);
        seen[self.slot[root].unwrap()] = true;
        let mut count = 1;
        while let Some(b) = queue.pop_front() {
            for &c in self.neighbors(b) {
                let s = self.slot[c].unwrap();
                if !seen[s] {
                    seen[s] = true;
                    count += 1;
                    queue.push_back(c);
                }
            }
        }
        count
    }

    /// Vacuously true with at most one occupied block.
    pub fn connected(&self) -> bool {
        match self.root() {
            None => true,
            Some(root) => self.reach_count(root) == self.occupied.len(),
        }
    }

    /// Breadth-first order from `root`; frontier ties broken by ascending id.
    pub fn bfs_order(&self, root: usize) -> Result<(Vec<usize>, TreeEdges)> {
        if !self.is_occupied(root) {
            return invalid(format!("root block {root} is not occupied"));
        }
        let mut seen = vec![false; self.occupied.len()];
        let mut order = Vec::with_capacity(self.occupied.len());
        let mut parent = Vec::with_capacity(self.occupied.len().saturating_sub(1));
        let mut queue = VecDeque::from([root]);
        seen[self.slot[root].unwrap()] = true;
        while let Some(b) = queue.pop_front() {
            order.push(b);
            for &c in self.neighbors(b) {
                let s = self.slot[c].unwrap();
                if !seen[s] {
                    seen[s] = true;
                    parent.push((c, b));
                    queue.push_back(c);
                }
            }
        }
        if order.len() != self.occupied.len() {
            return Err(GsbmError::VisibilityDisconnected);
        }
        Ok((order, parent))
    }
}

pub fn build_visibility_graph(grid: &BlockGrid, delta: f64) -> Result<VisibilityGraph> {
    VisibilityGraph::build(grid, delta)
}

/// Size of the largest king-adjacent (wrapping) cluster of unoccupied blocks.
pub fn max_unoccupied_cluster(grid: &BlockGrid, delta: f64) -> Result<usize> {
    if !(delta.is_finite() && delta > 0.0) {
        return invalid(format!("delta must be positive, got {delta}"));
    }
    let threshold = delta * grid.torus().log_n();
    let blocks = grid.num_blocks();
    let empty: Vec<bool> = (0..blocks).map(|b| grid.vertices(b).len() as f64 <= threshold).collect();
    let mut sets = DisjointSets::new(blocks);
    for b in (0..blocks).filter(|&b| empty[b]) {
        for c in blocks_within(grid, b, 1) {
            if c > b && empty[c] {
                sets.union(b, c);
            }
        }
    }
    let mut sizes = vec![0usize; blocks];
    let mut best = 0;
    for b in (0..blocks).filter(|&b| empty[b]) {
        let r = sets.find(b);
        sizes[r] += 1;
        best = best.max(sizes[r]);
    }
    Ok(best)
}
