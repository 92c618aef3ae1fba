//! Phase II: per-vertex Poisson likelihood test against a first-stage labeling.

use crate::error::{invalid, GsbmError, Result};
use crate::generator::{GeometricGraph, Labeling};

/// Edge and visible non-edge counts from one vertex, split by label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DegreeProfile {
    pub d1_plus: u32,
    pub d1_minus: u32,
    pub dm1_plus: u32,
    pub dm1_minus: u32,
}

impl DegreeProfile {
    /// The profile seen with the two classes swapped.
    pub fn swapped(self) -> Self {
        DegreeProfile {
            d1_plus: self.dm1_plus,
            d1_minus: self.dm1_minus,
            dm1_plus: self.d1_plus,
            dm1_minus: self.d1_minus,
        }
    }

    pub fn as_array(self) -> [u32; 4] {
        [self.d1_plus, self.d1_minus, self.dm1_plus, self.dm1_minus]
    }

    fn record(&mut self, label: i8, edge: bool) {
        match (label, edge) {
            (1, true) => self.d1_plus += 1,
            (1, false) => self.d1_minus += 1,
            (-1, true) => self.dm1_plus += 1,
            (-1, false) => self.dm1_minus += 1,
            _ => {}
        }
    }
}

/// Four nonnegative Poisson intensities, ordered like [`DegreeProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityVector(pub [f64; 4]);

impl IntensityVector {
    pub fn new(values: [f64; 4]) -> Result<Self> {
        if values.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return invalid(format!("intensities must be finite and nonnegative, got {values:?}"));
        }
        Ok(IntensityVector(values))
    }
}

/// Profile of `u` against the vertices of `set` (u and zero labels skipped).
pub fn degree_profile_in(g: &GeometricGraph, u: usize, sigma: &Labeling, set: &[u32]) -> DegreeProfile {
    let mut profile = DegreeProfile::default();
    let nbrs = g.neighbors(u);
    for &v in set {
        let v = v as usize;
        if v == u || sigma.get(v) == 0 || !g.is_visible(u, v) {
            continue;
        }
        profile.record(sigma.get(v), nbrs.binary_search(&(v as u32)).is_ok());
    }
    profile
}

/// Profile of `u` against every other vertex, via the spatial index.
pub fn degree_profile(g: &GeometricGraph, u: usize, sigma: &Labeling) -> DegreeProfile {
    let mut visible = [0u32; 2];
    for v in g.spatial_index().candidates(g.position(u)) {
        let v = v as usize;
        let s = sigma.get(v);
        if v != u && s != 0 && g.is_visible(u, v) {
            visible[(s < 0) as usize] += 1;
        }
    }
    let mut edges = [0u32; 2];
    for &v in g.neighbors(u) {
        match sigma.get(v as usize) {
            1 => edges[0] += 1,
            -1 => edges[1] += 1,
            _ => {}
        }
    }
    DegreeProfile {
        d1_plus: edges[0],
        d1_minus: visible[0] - edges[0],
        dm1_plus: edges[1],
        dm1_minus: visible[1] - edges[1],
    }
}

/// Probabilities enter the logarithms clamped to this distance from {0, 1}.
pub const LOG_CLAMP: f64 = 1e-12;

fn clamp_prob(x: f64) -> f64 {
    x.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP)
}

/// `(ln(a/b), ln((1-a)/(1-b)))` with both probabilities clamped.
pub fn log_ratios(a: f64, b: f64) -> Result<(f64, f64)> {
    if !((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)) {
        return invalid(format!("probabilities must lie in [0, 1], got a = {a}, b = {b}"));
    }
    let (a, b) = (clamp_prob(a), clamp_prob(b));
    Ok(((a / b).ln(), ((1.0 - a) / (1.0 - b)).ln()))
}

/// Log-likelihood ratio of "u is +1" against "u is -1".
pub fn tau(profile: DegreeProfile, a: f64, b: f64) -> Result<f64> {
    let (edge_w, gap_w) = log_ratios(a, b)?;
    Ok(tau_with(profile, edge_w, gap_w))
}

fn tau_with(p: DegreeProfile, edge_w: f64, gap_w: f64) -> f64 {
    let edge_diff = p.d1_plus as f64 - p.dm1_plus as f64;
    let gap_diff = p.d1_minus as f64 - p.dm1_minus as f64;
    // skip zero weights so an infinite count gap never meets 0 * inf
    let mut t = 0.0;
    if edge_w != 0.0 {
        t += edge_w * edge_diff;
    }
    if gap_w != 0.0 {
        t += gap_w * gap_diff;
    }
    t
}

/// Sign with `sign(0) = +1`.
fn decide(t: f64) -> i8 {
    if t >= 0.0 {
        1
    } else {
        -1
    }
}

/// `sign(tau)` of `u` against `sigma_hat` over all of V.
pub fn refine(g: &GeometricGraph, u: usize, sigma_hat: &Labeling, a: f64, b: f64) -> Result<i8> {
    Ok(decide(tau(degree_profile(g, u, sigma_hat), a, b)?))
}

/// [`refine`] applied to every vertex.
pub fn refine_all(g: &GeometricGraph, sigma_hat: &Labeling, a: f64, b: f64) -> Result<Labeling> {
    let (edge_w, gap_w) = log_ratios(a, b)?;
    if sigma_hat.len() != g.num_vertices() {
        return Err(GsbmError::DimensionMismatch { expected: g.num_vertices(), got: sigma_hat.len() });
    }
    // cell order: consecutive vertices share candidate cells, which stay cached
    let index = g.spatial_index();
    let mut values = vec![0i8; g.num_vertices()];
    for cell in 0..index.num_cells() {
        for &u in index.members(cell) {
            let u = u as usize;
            values[u] = decide(tau_with(degree_profile(g, u, sigma_hat), edge_w, gap_w));
        }
    }
    Labeling::new(values)
}

/// Classifies `u` knowing the true labels of every other vertex.
pub fn genie_estimate(g: &GeometricGraph, u: usize, sigma0: &Labeling, a: f64, b: f64) -> Result<i8> {
    refine(g, u, sigma0, a, b)
}

/// [`genie_estimate`] for every vertex against the graph's own ground truth.
pub fn genie_all(g: &GeometricGraph, a: f64, b: f64) -> Result<Labeling> {
    refine_all(g, g.truth(), a, b)
}
