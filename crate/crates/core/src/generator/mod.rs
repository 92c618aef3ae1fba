//! Sampling GSBM(lambda, n, a, b, d) instances.
//!
//! Vertices come from a homogeneous Poisson point process on the torus, labels
//! are i.i.d. uniform signs, and each mutually visible pair is joined with
//! probability `a` (same label) or `b` (different labels).

mod io;
mod spatial;

pub use io::{read_instance, write_instance};
pub use spatial::CellIndex;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, GsbmError, Result};
use crate::geometry::{PointSet, Torus};
use crate::prob::Prob;
use crate::rng::{stream_rng, Stream};

/// The GSBM parameter tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub lambda: f64,
    pub n: f64,
    pub a: Prob,
    pub b: Prob,
    pub d: usize,
}

impl ModelParams {
    pub fn new(lambda: f64, n: f64, a: Prob, b: Prob, d: usize) -> Result<Self> {
        let p = ModelParams { lambda, n, a, b, d };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor for float probabilities with short decimal forms.
    pub fn from_f64(lambda: f64, n: f64, a: f64, b: f64, d: usize) -> Result<Self> {
        Self::new(lambda, n, Prob::from_f64(a)?, Prob::from_f64(b)?, d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return invalid(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.n.is_finite() && self.n >= 2.0) {
            return invalid(format!("n must be at least 2, got {}", self.n));
        }
        if self.d == 0 {
            return invalid("dimension must be at least 1");
        }
        Ok(())
    }

    /// Recovery algorithms need distinguishable communities.
    pub fn require_distinct(&self) -> Result<()> {
        if self.a == self.b {
            return invalid("a and b must differ");
        }
        Ok(())
    }

    pub fn torus(&self) -> Result<Torus> {
        Torus::new(self.n, self.d)
    }
}

/// Vertex labels in {-1, 0, +1}; 0 marks an unlabeled vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Labeling(Vec<i8>);

impl Labeling {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.iter().any(|v| !matches!(v, -1..=1)) {
            return invalid("labels must be -1, 0 or +1");
        }
        Ok(Labeling(values))
    }

    pub fn zeros(len: usize) -> Self {
        Labeling(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, v: usize) -> i8 {
        self.0[v]
    }

    pub fn set(&mut self, v: usize, label: i8) {
        debug_assert!(matches!(label, -1..=1));
        self.0[v] = label;
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Labeling {
        Labeling(self.0.iter().map(|&x| -x).collect())
    }

    pub fn has_zeros(&self) -> bool {
        self.0.contains(&0)
    }
}

/// Read access to an edge set; lets tests observe which pairs an algorithm inspects.
pub trait EdgeQuery {
    fn has_edge(&self, u: usize, v: usize) -> bool;
}

/// A sampled instance: positions, ground truth and a sorted-adjacency edge set.
#[derive(Debug, Clone)]
pub struct GeometricGraph {
    params: ModelParams,
    seed: u64,
    torus: Torus,
    radius: f64,
    radius_sq: f64,
    positions: PointSet,
    truth: Labeling,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    index: CellIndex,
}

impl GeometricGraph {
    /// Assemble a graph from explicit parts, checking every model invariant.
    pub fn from_parts(
        params: ModelParams,
        seed: u64,
        positions: PointSet,
        truth: Labeling,
        edges: &[(usize, usize)],
    ) -> Result<Self> {
        params.validate()?;
        let torus = params.torus()?;
        if positions.len() != truth.len() {
            return invalid("positions and labels differ in length");
        }
        if truth.has_zeros() {
            return invalid("ground-truth labels must be nonzero");
        }
        if !positions.is_empty() && positions.dim() != params.d {
            return Err(GsbmError::DimensionMismatch { expected: params.d, got: positions.dim() });
        }
        if let Some(p) = positions.iter().find(|p| !torus.contains(p)) {
            return invalid(format!("point {p:?} lies outside the region"));
        }
        let radius = torus.visibility_radius();
        let radius_sq = radius * radius;
        let count = positions.len();
        for &(u, v) in edges {
            if u >= count || v >= count {
                return invalid(format!("edge ({u}, {v}) references a missing vertex"));
            }
            if u == v {
                return invalid(format!("self-loop at {u}"));
            }
            if torus.distance_sq(positions.get(u), positions.get(v)) > radius_sq {
                return invalid(format!("edge ({u}, {v}) exceeds the visibility radius"));
            }
        }
        let index = CellIndex::build(&positions, &torus, radius);
        let (offsets, targets) = build_adjacency(count, edges.iter().copied());
        for u in 0..count {
            if targets[offsets[u]..offsets[u + 1]].windows(2).any(|w| w[0] == w[1]) {
                return invalid(format!("duplicate edge at vertex {u}"));
            }
        }
        Ok(GeometricGraph { params, seed, torus, radius, radius_sq, positions, truth, offsets, targets, index })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn visibility_radius(&self) -> f64 {
        self.radius
    }

    pub fn positions(&self) -> &PointSet {
        &self.positions
    }

    pub fn position(&self, v: usize) -> &[f64] {
        self.positions.get(v)
    }

    pub fn truth(&self) -> &Labeling {
        &self.truth
    }

    pub fn num_vertices(&self) -> usize {
        self.truth.len()
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn spatial_index(&self) -> &CellIndex {
        &self.index
    }

    /// Sorted neighbour ids of `u`.
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices())
            .flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u, v as usize)).filter(|&(u, v)| u < v))
    }

    pub fn distance(&self, u: usize, v: usize) -> f64 {
        self.torus.distance_sq(self.position(u), self.position(v)).sqrt()
    }

    /// Within `(log n)^{1/d}` of each other (boundary included).
    #[inline]
    pub fn is_visible(&self, u: usize, v: usize) -> bool {
        self.torus.distance_sq(self.position(u), self.position(v)) <= self.radius_sq
    }

    /// Every vertex other than `u` visible from `u`, in spatial-index order.
    pub fn visible_from(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.index.candidates(self.position(u)).map(|v| v as usize).filter(move |&v| v != u && self.is_visible(u, v))
    }

    /// Same positions and edges under a different ground truth.
    pub fn with_truth(&self, truth: Labeling) -> Result<Self> {
        if truth.len() != self.num_vertices() || truth.has_zeros() {
            return invalid("replacement truth must be a full nonzero labeling");
        }
        let mut g = self.clone();
        g.truth = truth;
        Ok(g)
    }
}

impl EdgeQuery for GeometricGraph {
    #[inline]
    fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }
}

fn build_adjacency(count: usize, edges: impl Iterator<Item = (usize, usize)> + Clone) -> (Vec<usize>, Vec<u32>) {
    let mut offsets = vec![0usize; count + 1];
    for (u, v) in edges.clone() {
        offsets[u + 1] += 1;
        offsets[v + 1] += 1;
    }
    for i in 0..count {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut targets = vec![0u32; offsets[count]];
    for (u, v) in edges {
        targets[fill[u]] = v as u32;
        fill[u] += 1;
        targets[fill[v]] = u as u32;
        fill[v] += 1;
    }
    for u in 0..count {
        targets[offsets[u]..offsets[u + 1]].sort_unstable();
    }
    (offsets, targets)
}

/// Poisson(lambda n) many points, i.i.d. uniform on the region, numbered in
/// spatial-index cell order so that nearby vertices have nearby ids.
pub fn sample_point_process(params: &ModelParams, seed: u64) -> Result<PointSet> {
    params.validate()?;
    let torus = params.torus()?;
    let mut rng = stream_rng(seed, Stream::Points);
    let mean = params.lambda * params.n;
    let count = Poisson::new(mean)
        .map_err(|e| GsbmError::InvalidInput(format!("Poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    let side = torus.side();
    let half = side / 2.0;
    let mut points = PointSet::with_capacity(params.d, count);
    let mut buf = vec![0.0; params.d];
    for _ in 0..count {
        for x in buf.iter_mut() {
            *x = (-half + side * rng.random::<f64>()).min(half);
        }
        points.push(&buf);
    }
    let index = CellIndex::build(&points, &torus, torus.visibility_radius());
    let mut ordered = PointSet::with_capacity(params.d, count);
    for cell in 0..index.num_cells() {
        for &v in index.members(cell) {
            ordered.push(points.get(v as usize));
        }
    }
    Ok(ordered)
}

/// I.i.d. uniform +-1 labels.
pub fn sample_labels(count: usize, seed: u64) -> Labeling {
    let mut rng = stream_rng(seed, Stream::Labels);
    Labeling((0..count).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect())
}

/// One Bernoulli trial per visible unordered pair, swept cell by cell.
pub fn sample_edges(positions: PointSet, truth: Labeling, params: &ModelParams, seed: u64) -> Result<GeometricGraph> {
    params.validate()?;
    if positions.len() != truth.len() {
        return invalid("positions and labels differ in length");
    }
    let torus = params.torus()?;
    let radius = torus.visibility_radius();
    let radius_sq = radius * radius;
    let index = CellIndex::build(&positions, &torus, radius);
    let (pa, pb) = (params.a.value(), params.b.value());
    let mut rng = stream_rng(seed, Stream::Edges);
    let mut edges: Vec<(usize, usize)> = Vec::new();

    let mut trial = |u: u32, v: u32, edges: &mut Vec<(usize, usize)>| {
        let (u, v) = (u as usize, v as usize);
        if torus.distance_sq(positions.get(u), positions.get(v)) <= radius_sq {
            let p = if truth.get(u) == truth.get(v) { pa } else { pb };
            if rng.random::<f64>() < p {
                edges.push((u.min(v), u.max(v)));
            }
        }
    };
    for cell in 0..index.num_cells() {
        let here = index.members(cell);
        for &other in index.neighbor_cells(cell) {
            let other = other as usize;
            if other < cell {
                continue;
            }
            if other == cell {
                for (i, &u) in here.iter().enumerate() {
                    for &v in &here[i + 1..] {
                        trial(u, v, &mut edges);
                    }
                }
            } else {
                for &u in here {
                    for &v in index.members(other) {
                        trial(u, v, &mut edges);
                    }
                }
            }
        }
    }

    let (offsets, targets) = build_adjacency(positions.len(), edges.iter().copied());
    Ok(GeometricGraph { params: *params, seed, torus, radius, radius_sq, positions, truth, offsets, targets, index })
}

/// Points, labels and edges from one master seed.
pub fn sample_instance(params: &ModelParams, seed: u64) -> Result<GeometricGraph> {
    let points = sample_point_process(params, seed)?;
    let truth = sample_labels(points.len(), seed);
    sample_edges(points, truth, params, seed)
}

/// Vertices of `set` other than `u0`, `u` joined to both.
pub fn common_neighbor_count<G: EdgeQuery + ?Sized>(g: &G, u0: usize, u: usize, set: &[u32]) -> usize {
    set.iter().map(|&v| v as usize).filter(|&v| v != u && v != u0 && g.has_edge(u0, v) && g.has_edge(u, v)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, n: f64, a: f64, b: f64, d: usize) -> ModelParams {
        ModelParams::from_f64(lambda, n, a, b, d).unwrap()
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = params(2.0, 500.0, 0.7, 0.2, 2);
        let g1 = sample_instance(&p, 11).unwrap();
        let g2 = sample_instance(&p, 11).unwrap();
        assert_eq!(g1.positions(), g2.positions());
        assert_eq!(g1.truth(), g2.truth());
        assert_eq!(g1.edges().collect::<Vec<_>>(), g2.edges().collect::<Vec<_>>());
        let g3 = sample_instance(&p, 12).unwrap();
        assert_ne!(g1.positions(), g3.positions());
    }

    #[test]
    fn empty_labels() {
        assert!(sample_labels(0, 3).is_empty());
    }

    #[test]
    fn label_balance() {
        let l = sample_labels(100_000, 5);
        assert!(!l.has_zeros());
        let frac = l.values().iter().filter(|&&x| x == 1).count() as f64 / 1e5;
        assert!((frac - 0.5).abs() <= 3.0 * 0.5 / 1e5f64.sqrt());
    }

    #[test]
    fn degenerate_edge_probabilities() {
        let p0 = params(2.0, 300.0, 0.0, 0.0, 1);
        assert_eq!(sample_instance(&p0, 1).unwrap().num_edges(), 0);

        let p1 = params(2.0, 300.0, 1.0, 1.0, 2);
        let g = sample_instance(&p1, 1).unwrap();
        let n = g.num_vertices();
        for u in 0..n {
            for v in 0..n {
                if u != v {
                    assert_eq!(g.has_edge(u, v), g.is_visible(u, v), "pair {u} {v}");
                }
            }
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_local() {
        let p = params(3.0, 400.0, 0.6, 0.3, 2);
        let g = sample_instance(&p, 9).unwrap();
        for u in 0..g.num_vertices() {
            assert!(g.neighbors(u).windows(2).all(|w| w[0] < w[1]));
            for &v in g.neighbors(u) {
                let v = v as usize;
                assert_ne!(u, v);
                assert!(g.has_edge(v, u));
                assert!(g.distance(u, v) <= g.visibility_radius());
            }
        }
    }

    #[test]
    fn visible_from_matches_brute_force() {
        let p = params(2.0, 150.0, 0.5, 0.5, 2);
        let g = sample_instance(&p, 2).unwrap();
        for u in 0..g.num_vertices() {
            let mut fast: Vec<usize> = g.visible_from(u).collect();
            fast.sort_unstable();
            let slow: Vec<usize> = (0..g.num_vertices()).filter(|&v| v != u && g.is_visible(u, v)).collect();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn common_neighbours() {
        let p = params(2.0, 100.0, 1.0, 1.0, 1);
        let g = sample_instance(&p, 4).unwrap();
        assert_eq!(common_neighbor_count(&g, 0, 1, &[]), 0);
    }

    #[test]
    fn from_parts_rejects_long_edges() {
        let p = params(1.0, 100.0, 0.5, 0.1, 1);
        let mut pts = PointSet::new(1);
        pts.push(&[0.0]);
        pts.push(&[40.0]);
        let truth = Labeling::new(vec![1, -1]).unwrap();
        assert!(GeometricGraph::from_parts(p, 0, pts.clone(), truth.clone(), &[(0, 1)]).is_err());
        assert!(GeometricGraph::from_parts(p, 0, pts.clone(), truth.clone(), &[(0, 0)]).is_err());
        assert!(GeometricGraph::from_parts(p, 0, pts, truth, &[]).is_ok());
    }
}
