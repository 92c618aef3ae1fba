//! Uniform cell grid for fixed-radius neighbour queries on the torus.

use crate::geometry::{PointSet, Torus};

/// Cells of side `>= radius`; any two points within `radius` of each other sit
/// in the same or king-adjacent cells (with wraparound).
#[derive(Debug, Clone)]
pub struct CellIndex {
    d: usize,
    per_axis: usize,
    cell_side: f64,
    half: f64,
    offsets: Vec<usize>,
    members: Vec<u32>,
    /// Distinct neighbour cells (including self) of every cell, CSR layout.
    nbr_offsets: Vec<usize>,
    nbr_cells: Vec<u32>,
}

impl CellIndex {
    pub fn build(points: &PointSet, torus: &Torus, radius: f64) -> Self {
        let d = torus.dim();
        let side = torus.side();
        let per_axis = ((side / radius).floor() as usize).max(1);
        let cell_side = side / per_axis as f64;
        let num_cells = per_axis.pow(d as u32);

        let mut index = CellIndex {
            d,
            per_axis,
            cell_side,
            half: side / 2.0,
            offsets: vec![0; num_cells + 1],
            members: vec![0; points.len()],
            nbr_offsets: Vec::with_capacity(num_cells + 1),
            nbr_cells: Vec::new(),
        };

        let cell_of: Vec<usize> = points.iter().map(|p| index.cell_of(p)).collect();
        for &c in &cell_of {
            index.offsets[c + 1] += 1;
        }
        for c in 0..num_cells {
            index.offsets[c + 1] += index.offsets[c];
        }
        let mut fill = index.offsets.clone();
        for (v, &c) in cell_of.iter().enumerate() {
            index.members[fill[c]] = v as u32;
            fill[c] += 1;
        }

        // Per-axis neighbour index sets: {-1, 0, +1} with wrap, or every
        // index when the axis has fewer than three cells.
        let axis_nbrs: Vec<Vec<usize>> = (0..per_axis)
            .map(|k| {
                if per_axis >= 3 {
                    vec![(k + per_axis - 1) % per_axis, k, (k + 1) % per_axis]
                } else {
                    (0..per_axis).collect()
                }
            })
            .collect();
        index.nbr_offsets.push(0);
        let mut coords = vec![0usize; d];
        for c in 0..num_cells {
            index.decode(c, &mut coords);
            let mut acc = vec![0usize];
            for &k in &coords {
                let mut next = Vec::with_capacity(acc.len() * 3);
                for &prefix in &acc {
                    for &nk in &axis_nbrs[k] {
                        next.push(prefix * per_axis + nk);
                    }
                }
                acc = next;
            }
            acc.sort_unstable();
            acc.dedup();
            index.nbr_cells.extend(acc.into_iter().map(|x| x as u32));
            index.nbr_offsets.push(index.nbr_cells.len());
        }
        index
    }

    fn decode(&self, mut c: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = c % self.per_axis;
            c /= self.per_axis;
        }
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn num_cells(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn cell_of(&self, p: &[f64]) -> usize {
        debug_assert_eq!(p.len(), self.d);
        p.iter().fold(0, |id, &x| {
            let k = ((x + self.half) / self.cell_side).floor();
            let k = if k <= 0.0 { 0 } else { (k as usize).min(self.per_axis - 1) };
            id * self.per_axis + k
        })
    }

    pub fn members(&self, cell: usize) -> &[u32] {
        &self.members[self.offsets[cell]..self.offsets[cell + 1]]
    }

    pub fn neighbor_cells(&self, cell: usize) -> &[u32] {
        &self.nbr_cells[self.nbr_offsets[cell]..self.nbr_offsets[cell + 1]]
    }

    /// Every vertex in the cells around `p` (a superset of the vertices visible from `p`).
    pub fn candidates<'a>(&'a self, p: &[f64]) -> impl Iterator<Item = u32> + 'a {
        let cell = self.cell_of(p);
        self.neighbor_cells(cell).iter().flat_map(move |&c| self.members(c as usize).iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_region_falls_back_to_all_cells() {
        let torus = Torus::new(4.0, 2).unwrap();
        let r = torus.visibility_radius();
        let idx = CellIndex::build(&PointSet::new(2), &torus, r);
        assert_eq!(idx.per_axis(), 1);
        assert_eq!(idx.neighbor_cells(0), &[0]);
    }

    #[test]
    fn neighbour_sets_are_symmetric() {
        let torus = Torus::new(200.0, 2).unwrap();
        let idx = CellIndex::build(&PointSet::new(2), &torus, 2.0);
        for c in 0..idx.num_cells() {
            assert_eq!(idx.neighbor_cells(c).len(), 9);
            for &o in idx.neighbor_cells(c) {
                assert!(idx.neighbor_cells(o as usize).contains(&(c as u32)));
            }
        }
    }
}
