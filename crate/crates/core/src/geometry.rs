//! Torus metric, unit-ball volumes and the block partition of the region.
//!
//! The region is the cube `[-L/2, L/2]^d` with `L = n^{1/d}`, with opposite
//! faces identified. Blocks are addressed by integer ids in row-major order
//! (axis 0 most significant).

use crate::error::{invalid, GsbmError, Result};

/// Relative slack used when comparing a closed-block sup distance against the
/// visibility radius. Interval endpoints are products `k * side`, so an exact
/// tie such as two adjacent half-radius blocks can land one ulp above.
const VISIBILITY_SLACK: f64 = 1e-9;

/// Volume of the unit Euclidean ball in `d` dimensions, `pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d == 0 {
        return invalid("dimension must be at least 1");
    }
    // nu_d = nu_{d-2} * 2 pi / d, seeded with nu_0 = 1 and nu_1 = 2.
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    Ok(v)
}

/// The toroidal region `S_{d,n}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Torus {
    d: usize,
    n: f64,
    side: f64,
}

impl Torus {
    pub fn new(n: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return invalid("dimension must be at least 1");
        }
        if !(n.is_finite() && n > 1.0) {
            return invalid(format!("n must be finite and > 1, got {n}"));
        }
        Ok(Torus { d, n, side: n.powf(1.0 / d as f64) })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Side length `n^{1/d}`.
    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn log_n(&self) -> f64 {
        self.n.ln()
    }

    /// `(log n)^{1/d}`.
    pub fn visibility_radius(&self) -> f64 {
        self.log_n().powf(1.0 / self.d as f64)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let h = self.side / 2.0;
        p.len() == self.d && p.iter().all(|&x| (-h..=h).contains(&x))
    }

    /// Wrapped distance along one axis.
    #[inline]
    pub fn axis_gap(&self, x: f64, y: f64) -> f64 {
        let g = (x - y).abs();
        g.min(self.side - g).max(0.0)
    }

    /// Squared torus distance without dimension checks.
    #[inline]
    pub fn distance_sq(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), v.len());
        u.iter()
            .zip(v)
            .map(|(&x, &y)| {
                let g = self.axis_gap(x, y);
                g * g
            })
            .sum()
    }

    pub fn distance(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        for p in [u, v] {
            if p.len() != self.d {
                return Err(GsbmError::DimensionMismatch { expected: self.d, got: p.len() });
            }
        }
        Ok(self.distance_sq(u, v).sqrt())
    }
}

/// A validated point of the region.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>, torus: &Torus) -> Result<Self> {
        if coords.len() != torus.dim() {
            return Err(GsbmError::DimensionMismatch { expected: torus.dim(), got: coords.len() });
        }
        if !torus.contains(&coords) {
            return invalid(format!("point {coords:?} lies outside the region"));
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }
}

/// Torus distance between two points of `S_{d,n}`.
pub fn torus_distance(u: &Point, v: &Point, n: f64, d: usize) -> Result<f64> {
    Torus::new(n, d)?.distance(u.coords(), v.coords())
}

/// Flat storage for many points of one dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointSet {
    d: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(d: usize) -> Self {
        PointSet { d, coords: Vec::new() }
    }

    pub fn with_capacity(d: usize, n: usize) -> Self {
        PointSet { d, coords: Vec::with_capacity(d * n) }
    }

    pub fn from_flat(d: usize, coords: Vec<f64>) -> Result<Self> {
        if d == 0 || !coords.len().is_multiple_of(d) {
            return invalid("flat coordinate buffer does not match the dimension");
        }
        Ok(PointSet { d, coords })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.d).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.d);
        self.coords.extend_from_slice(p);
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d.max(1))
    }

    pub fn to_points(&self, torus: &Torus) -> Result<Vec<Point>> {
        self.iter().map(|p| Point::new(p.to_vec(), torus)).collect()
    }
}

/// Partition of the region into hypercube blocks of volume `chi * log n`.
///
/// When `L / side` is not integral the last block along each axis is shorter.
#[derive(Debug, Clone)]
pub struct BlockGrid {
    torus: Torus,
    chi: f64,
    block_side: f64,
    side_count: usize,
    block_vertices: Vec<Vec<u32>>,
    vertex_block: Vec<u32>,
}

/// Refuse grids with more blocks than this.
const MAX_BLOCKS: usize = 1 << 28;

impl BlockGrid {
    pub fn build(points: &PointSet, n: f64, d: usize, chi: f64) -> Result<Self> {
        let torus = Torus::new(n, d)?;
        if !(chi.is_finite() && chi > 0.0) {
            return invalid(format!("chi must be positive, got {chi}"));
        }
        if points.dim() != d && !points.is_empty() {
            return Err(GsbmError::DimensionMismatch { expected: d, got: points.dim() });
        }
        let log_n = torus.log_n();
        if log_n <= 0.0 {
            return invalid("log n must be positive");
        }
        let block_side = (chi * log_n).powf(1.0 / d as f64);
        let ratio = torus.side() / block_side;
        let side_count = ((ratio * (1.0 - 1e-12)).ceil() as usize).max(1);
        let num_blocks = side_count
            .checked_pow(d as u32)
            .filter(|&b| b <= MAX_BLOCKS)
            .ok_or_else(|| GsbmError::InvalidInput(format!("chi = {chi} yields too many blocks")))?;

        let mut grid = BlockGrid {
            torus,
            chi,
            block_side,
            side_count,
            block_vertices: vec![Vec::new(); num_blocks],
            vertex_block: Vec::with_capacity(points.len()),
        };
        for (v, p) in points.iter().enumerate() {
            let b = grid.block_of(p);
            grid.block_vertices[b].push(v as u32);
            grid.vertex_block.push(b as u32);
        }
        Ok(grid)
    }

    pub fn torus(&self) -> &Torus {
        &self.torus
    }

    pub fn dim(&self) -> usize {
        self.torus.dim()
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn block_side(&self) -> f64 {
        self.block_side
    }

    pub fn side_count(&self) -> usize {
        self.side_count
    }

    pub fn num_blocks(&self) -> usize {
        self.block_vertices.len()
    }

    pub fn vertices(&self, block: usize) -> &[u32] {
        &self.block_vertices[block]
    }

    pub fn block_of_vertex(&self, v: usize) -> usize {
        self.vertex_block[v] as usize
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_block.len()
    }

    /// Index along one axis; exact boundaries go to the larger index and the
    /// upper face of the region goes to the last block.
    #[inline]
    pub fn axis_index(&self, x: f64) -> usize {
        let off = x + self.torus.side() / 2.0;
        let k = (off / self.block_side).floor();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.side_count - 1)
        }
    }

    pub fn block_of(&self, p: &[f64]) -> usize {
        p.iter().fold(0, |id, &x| id * self.side_count + self.axis_index(x))
    }

    pub fn block_coords(&self, mut id: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for slot in out.iter_mut().rev() {
            *slot = id % self.side_count;
            id /= self.side_count;
        }
        out
    }

    pub fn block_id(&self, coords: &[usize]) -> usize {
        coords.iter().fold(0, |id, &k| id * self.side_count + k)
    }

    /// Closed interval `[lo, hi]` of axis index `k`, in offsets from the lower face.
    pub fn axis_interval(&self, k: usize) -> (f64, f64) {
        let lo = k as f64 * self.block_side;
        let hi = if k + 1 == self.side_count { self.torus.side() } else { (k + 1) as f64 * self.block_side };
        (lo, hi)
    }

    /// Largest wrapped distance between a point of axis interval `i` and one of `j`.
    pub fn axis_sup_gap(&self, i: usize, j: usize) -> f64 {
        let len = self.torus.side();
        let (a_lo, a_hi) = self.axis_interval(i);
        let (b_lo, b_hi) = self.axis_interval(j);
        let lo = b_lo - a_hi;
        let hi = b_hi - a_lo;
        let half = len / 2.0;
        if hi - lo >= len {
            return half;
        }
        let k = ((lo - half) / len).ceil();
        if half + k * len <= hi {
            return half;
        }
        let tent = |delta: f64| {
            let r = delta.rem_euclid(len);
            r.min(len - r)
        };
        tent(lo).max(tent(hi))
    }

    /// `sup_{x in B_i, y in B_j} ||x - y||` over the closed blocks.
    pub fn block_sup_distance(&self, i: usize, j: usize) -> f64 {
        let ci = self.block_coords(i);
        let cj = self.block_coords(j);
        ci.iter()
            .zip(&cj)
            .map(|(&a, &b)| {
                let g = self.axis_sup_gap(a, b);
                g * g
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Whether every pair of points in the two closed blocks lies within `(log n)^{1/d}`.
pub fn blocks_mutually_visible(i: usize, j: usize, grid: &BlockGrid) -> bool {
    let r = grid.torus().visibility_radius();
    grid.block_sup_distance(i, j) <= r * (1.0 + VISIBILITY_SLACK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(1).unwrap(), 2.0);
        assert!((unit_ball_volume(2).unwrap() - PI).abs() < 1e-15);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
        assert!((unit_ball_volume(4).unwrap() - PI * PI / 2.0).abs() < 1e-14);
        assert!(unit_ball_volume(0).is_err());
    }

    #[test]
    fn distance_examples() {
        let t = Torus::new(100.0, 1).unwrap();
        assert!((t.distance(&[-49.0], &[49.0]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(t.distance(&[3.5], &[3.5]).unwrap(), 0.0);
        let t2 = Torus::new(10_000.0, 2).unwrap();
        assert!((t2.distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 5.0).abs() < 1e-12);
        assert!(matches!(t2.distance(&[0.0], &[1.0, 1.0]), Err(GsbmError::DimensionMismatch { .. })));
    }

    #[test]
    fn point_validation() {
        let t = Torus::new(100.0, 2).unwrap();
        assert!(Point::new(vec![5.0, -5.0], &t).is_ok());
        assert!(Point::new(vec![5.1, 0.0], &t).is_err());
        assert!(Point::new(vec![0.0], &t).is_err());
    }

    #[test]
    fn empty_grid_and_ceiling_convention() {
        let n = 10f64.exp();
        let g = BlockGrid::build(&PointSet::new(1), n, 1, 0.5).unwrap();
        assert!((g.block_side() - 5.0).abs() < 1e-12);
        assert_eq!(g.side_count(), (n / 5.0).ceil() as usize);
        assert!((0..g.num_blocks()).all(|b| g.vertices(b).is_empty()));
        let (lo, hi) = g.axis_interval(g.side_count() - 1);
        assert!(hi - lo < 5.0);
    }

    #[test]
    fn corner_and_boundary_points() {
        let n = 10_000.0;
        let mut ps = PointSet::new(2);
        ps.push(&[-50.0, -50.0]);
        ps.push(&[50.0, 50.0]);
        let g = BlockGrid::build(&ps, n, 2, 1.0).unwrap();
        assert_eq!(g.block_of_vertex(0), 0);
        assert_eq!(g.block_of_vertex(1), g.num_blocks() - 1);
        // an exact interior boundary goes to the larger index
        let s = g.block_side();
        assert_eq!(g.axis_index(-50.0 + s), 1);
    }

    #[test]
    fn adjacent_half_radius_blocks_are_visible() {
        let n = 1e5;
        let g = BlockGrid::build(&PointSet::new(1), n, 1, 0.5).unwrap();
        assert!(blocks_mutually_visible(10, 11, &g));
        assert!(blocks_mutually_visible(10, 10, &g));
        assert!((g.block_sup_distance(10, 11) - n.ln()).abs() < 1e-9);
        assert!(!blocks_mutually_visible(10, 12, &g));
        assert!(!blocks_mutually_visible(10, 13, &g));
        // wrap-around neighbours
        assert!(blocks_mutually_visible(0, g.num_blocks() - 1, &g));
    }

    #[test]
    fn same_block_sup_is_diagonal() {
        let n = 1e5;
        let d = 2;
        let chi = 0.2;
        let g = BlockGrid::build(&PointSet::new(d), n, d, chi).unwrap();
        let id = g.block_id(&[3, 4]);
        let expect = (d as f64).sqrt() * g.block_side();
        assert!((g.block_sup_distance(id, id) - expect).abs() < 1e-9);
        // chi <= d^{-d/2} makes a block self-visible
        assert!(chi <= 0.5);
        assert!(blocks_mutually_visible(id, id, &g));
    }

    #[test]
    fn antipodal_axis_gap_caps_at_half_side() {
        let n = 16.0;
        let g = BlockGrid::build(&PointSet::new(1), n, 1, 1.0).unwrap();
        for i in 0..g.side_count() {
            for j in 0..g.side_count() {
                assert!(g.axis_sup_gap(i, j) <= n / 2.0 + 1e-12);
            }
        }
    }
}
