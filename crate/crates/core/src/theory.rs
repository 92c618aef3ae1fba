//! Chernoff-Hellinger divergence, recovery regimes and the block-size solver.
//!
//! Intensities are expressed in units of `log n`.

use crate::error::{invalid, GsbmError, Result};
use crate::generator::ModelParams;
use crate::geometry::unit_ball_volume;
use crate::phase2::{log_ratios, IntensityVector};

/// Absolute tolerance of every scalar root search.
pub const ROOT_TOL: f64 = 1e-12;
/// Strict inequalities become concrete choices by this factor.
pub const SAFETY: f64 = 0.99;
/// Width of the band around 1 reported as [`Regime::Boundary`].
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Occupancy threshold used when no constraint on delta is satisfiable.
pub const FALLBACK_DELTA: f64 = 1e-3;

/// `D_t(x || y) = sum_i t x_i + (1-t) y_i - x_i^t y_i^(1-t)`.
pub fn ch_divergence_t(x: &IntensityVector, y: &IntensityVector, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("t must lie in [0, 1], got {t}"));
    }
    Ok(d_t(x, y, t))
}

fn d_t(x: &IntensityVector, y: &IntensityVector, t: f64) -> f64 {
    x.0.iter()
        .zip(&y.0)
        .filter(|(xi, yi)| xi != yi)
        .map(|(&xi, &yi)| t * xi + (1.0 - t) * yi - xi.powf(t) * yi.powf(1.0 - t))
        .sum()
}

/// `max_t D_t(x || y)` and its maximiser, by golden-section search (`D_t` is concave in `t`).
pub fn ch_divergence_plus(x: &IntensityVector, y: &IntensityVector) -> (f64, f64) {
    if x == y {
        return (0.0, 0.5);
    }
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (d_t(x, y, c), d_t(x, y, d));
    while hi - lo > 1e-11 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = d_t(x, y, c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = d_t(x, y, d);
        }
    }
    let t = (lo + hi) / 2.0;
    (d_t(x, y, t), t)
}

/// Degree-profile intensities for a +1 vertex (`x`) and a -1 vertex (`y`).
pub fn profile_intensities(lambda: f64, d: usize, a: f64, b: f64) -> Result<(IntensityVector, IntensityVector)> {
    let scale = lambda * unit_ball_volume(d)? / 2.0;
    let x = IntensityVector::new([a, 1.0 - a, b, 1.0 - b].map(|p| scale * p))?;
    let y = IntensityVector::new([b, 1.0 - b, a, 1.0 - a].map(|p| scale * p))?;
    Ok((x, y))
}

/// `lambda nu_d (1 - sqrt(ab) - sqrt((1-a)(1-b)))`.
pub fn ch_value(lambda: f64, d: usize, a: f64, b: f64) -> Result<f64> {
    Ok(lambda * unit_ball_volume(d)? * hellinger_gap(a, b))
}

fn hellinger_gap(a: f64, b: f64) -> f64 {
    1.0 - (a * b).sqrt() - ((1.0 - a) * (1.0 - b)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Achievable,
    ImpossibleDivergence,
    ImpossibleSparseD1,
    Boundary,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Achievable => "achievable",
            Regime::ImpossibleDivergence => "impossible-divergence",
            Regime::ImpossibleSparseD1 => "impossible-sparse-d1",
            Regime::Boundary => "boundary",
        }
    }
}

pub fn classify_regime(params: &ModelParams) -> Result<Regime> {
    params.validate()?;
    let (lambda, d) = (params.lambda, params.d);
    if d == 1 && lambda < 1.0 {
        return Ok(Regime::ImpossibleSparseD1);
    }
    let ch = ch_value(lambda, d, params.a.value(), params.b.value())?;
    Ok(if (ch - 1.0).abs() <= BOUNDARY_TOL {
        Regime::Boundary
    } else if ch < 1.0 {
        Regime::ImpossibleDivergence
    } else if d >= 2 || lambda > 1.0 {
        Regime::Achievable
    } else {
        Regime::Boundary
    })
}

/// Critical intensity `1 / (nu_d (1 - sqrt(ab) - sqrt((1-a)(1-b))))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// Infinite when `a = b`.
    pub critical: f64,
    /// `max(critical, 1)` for `d = 1`, else `critical`.
    pub achievable_above: f64,
}

pub fn threshold_curve(a: f64, b: f64, d: usize) -> Result<Threshold> {
    if !((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b)) {
        return invalid(format!("probabilities must lie in [0, 1], got a = {a}, b = {b}"));
    }
    let gap = hellinger_gap(a, b);
    let critical = if a == b || gap <= 0.0 { f64::INFINITY } else { 1.0 / (unit_ball_volume(d)? * gap) };
    let achievable_above = if d == 1 { critical.max(1.0) } else { critical };
    Ok(Threshold { critical, achievable_above })
}

/// Bisection for the boundary of `{x : pred(x)}` on `[lo, hi]`, with `pred(lo)` true and `pred(hi)` false.
fn bisect(mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> f64 {
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest chi with `nu (1 - 3 sqrt(d) chi^(1/d) / 2)^d >= (nu + 1/lambda) / 2`.
pub fn chi_ball_bound(lambda: f64, d: usize) -> Result<f64> {
    let nu = unit_ball_volume(d)?;
    let target = (nu + 1.0 / lambda) / 2.0;
    if nu <= target {
        return Err(GsbmError::Infeasible(format!("lambda nu_d = {} does not exceed 1", lambda * nu)));
    }
    let sd = (d as f64).sqrt();
    let dd = d as f64;
    let lhs = |chi: f64| nu * (1.0 - 1.5 * sd * chi.powf(1.0 / dd)).powi(d as i32);
    let hi = (2.0 / (3.0 * sd)).powi(d as i32);
    Ok(bisect(0.0, hi, |chi| lhs(chi) >= target))
}

/// `[(1 if d = 1 else nu_d) - 1/lambda] / 2`, an exclusive upper bound.
pub fn chi_occupancy_bound(lambda: f64, d: usize) -> Result<f64> {
    let base = if d == 1 { 1.0 } else { unit_ball_volume(d)? };
    Ok((base - 1.0 / lambda) / 2.0)
}

/// The Chernoff rate `g(x) = x (ln x - ln mu) + mu - x`, decreasing on `(0, mu]`.
pub fn occupancy_rate(x: f64, mu: f64) -> f64 {
    if x == 0.0 {
        mu
    } else {
        x * (x.ln() - mu.ln()) + mu - x
    }
}

/// Root of `g(gamma) = (1 + mu) / 2` on `(0, mu)`; needs `mu > 1`.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail
pub fn occupancy_constant(mu: f64) -> Result<f64> {
    if !(mu > 1.0) {
        return Err(GsbmError::Infeasible(format!("expected count factor {mu} does not exceed 1")));
    }
    let target = (1.0 + mu) / 2.0;
    Ok(bisect(0.0, mu, |x| occupancy_rate(x, mu) >= target))
}

/// Volume, in units of `log n`, guaranteed for the visible neighbourhood of a block.
pub fn neighbourhood_volume(chi: f64, d: usize) -> Result<f64> {
    if d == 1 {
        return Ok(((1.0 / chi).floor() - 1.0) * chi);
    }
    let nu = unit_ball_volume(d)?;
    let inner = 1.0 - 1.5 * (d as f64).sqrt() * chi.powf(1.0 / d as f64);
    Ok(if inner > 0.0 { nu * inner.powi(d as i32) - chi } else { -chi })
}

/// `1 - sqrt(d) chi^(1/d) / 2`.
pub fn shrunk_radius(chi: f64, d: usize) -> f64 {
    1.0 - (d as f64).sqrt() * chi.powf(1.0 / d as f64) / 2.0
}

/// Blocks other than the centre lying inside the shrunk ball around an interior block.
pub fn visible_block_count(chi: f64, d: usize) -> usize {
    let r = shrunk_radius(chi, d);
    if r <= 0.0 {
        return 0;
    }
    let side = chi.powf(1.0 / d as f64);
    let r_sq = r * r * (1.0 + 1e-12);
    let reach = (r / side).ceil() as i64 + 1;
    let mut count = 0usize;
    let mut offset = vec![-reach; d];
    loop {
        if offset.iter().any(|&o| o != 0) {
            let far: f64 = offset.iter().map(|&o| ((o.abs() as f64 + 0.5) * side).powi(2)).sum();
            if far <= r_sq {
                count += 1;
            }
        }
        let mut k = 0;
        while k < d {
            offset[k] += 1;
            if offset[k] <= reach {
                break;
            }
            offset[k] = -reach;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    count
}

/// `nu_d (1 + sqrt(d) chi^(1/d))^d / chi`: blocks any neighbourhood can meet.
pub fn neighbourhood_block_bound(chi: f64, d: usize) -> Result<f64> {
    let nu = unit_ball_volume(d)?;
    Ok(nu * (1.0 + (d as f64).sqrt() * chi.powf(1.0 / d as f64)).powi(d as i32) / chi)
}

/// `(2 sqrt(d))^-d`: the largest block whose king neighbours are all visible.
pub fn king_visible_chi(d: usize) -> f64 {
    1.0 / (4.0 * d as f64).powf(d as f64 / 2.0)
}

/// Constants driving the two-phase algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedParams {
    pub chi: f64,
    pub delta: f64,
    /// Per-block mistake budget `5 / ((a-b)^2 delta)`.
    pub m_budget: f64,
    pub eta: f64,
    pub rho: f64,
    pub kappa: f64,
    /// Occupancy constant of the visible neighbourhood, when it exists.
    pub gamma_prime: Option<f64>,
    /// Upper bound on delta from neighbourhood occupancy, when it exists.
    pub delta_bound: Option<f64>,
    pub r_d: f64,
    pub k_visible: usize,
    pub practical_chi: f64,
    pub ch_value: f64,
    pub regime: Regime,
    /// Whether delta came from the fallback rather than a constraint.
    pub delta_fallback: bool,
}

impl DerivedParams {
    /// Re-checks the defining inequalities of a solver-chosen `chi` and `delta`.
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail
    pub fn check(&self, params: &ModelParams) -> Result<()> {
        let (lambda, d) = (params.lambda, params.d);
        let nu = unit_ball_volume(d)?;
        let lhs = nu * (1.0 - 1.5 * (d as f64).sqrt() * self.chi.powf(1.0 / d as f64)).powi(d as i32);
        let fail = |what: &str| Err(GsbmError::Infeasible(format!("{what} violated")));
        if lhs < (nu + 1.0 / lambda) / 2.0 {
            return fail("ball clause");
        }
        if self.chi >= chi_occupancy_bound(lambda, d)? {
            return fail("occupancy clause");
        }
        if let Some(bound) = self.delta_bound {
            if !(self.delta < bound) {
                return fail("neighbourhood occupancy bound on delta");
            }
        }
        if self.eta > 0.0 && !(self.delta < self.eta / self.kappa) {
            return fail("dispersion bound on delta");
        }
        let (a, b) = (params.a.value(), params.b.value());
        let m = 5.0 / ((a - b).powi(2) * self.delta);
        if (self.m_budget - m).abs() > 1e-9 * m.abs() {
            return fail("mistake budget");
        }
        Ok(())
    }
}

/// Solver-chosen `chi`: 0.99 times the largest value meeting both block-size clauses.
pub fn theory_chi(lambda: f64, d: usize) -> Result<f64> {
    let occupancy = chi_occupancy_bound(lambda, d)?;
    if occupancy <= 0.0 {
        return Err(GsbmError::Infeasible(format!("no positive block size: lambda = {lambda} too small for d = {d}")));
    }
    let ball = chi_ball_bound(lambda, d)?;
    Ok(SAFETY * ball.min(occupancy))
}

/// A block size usable at moderate `n`.
///
/// For `d = 1, lambda > 2` this is the half-radius partition, where every
/// block is occupied w.h.p.; for `d >= 2` it is [`king_visible_chi`] unless
/// the solver allows larger blocks; otherwise the solver value.
pub fn practical_chi(lambda: f64, d: usize) -> f64 {
    let theory = theory_chi(lambda, d).ok();
    if d == 1 {
        if lambda > 2.0 {
            return 0.5;
        }
        return theory.unwrap_or(0.5);
    }
    theory.map_or(king_visible_chi(d), |t| t.max(king_visible_chi(d)))
}

pub fn solve_parameters(params: &ModelParams) -> Result<DerivedParams> {
    params.validate()?;
    let chi = theory_chi(params.lambda, params.d)?;
    solve_parameters_with_chi(params, chi)
}

/// All derived constants for a given `chi`; delta falls back when unconstrained.
pub fn solve_parameters_with_chi(params: &ModelParams, chi: f64) -> Result<DerivedParams> {
    params.validate()?;
    if !(chi.is_finite() && chi > 0.0) {
        return invalid(format!("chi must be positive, got {chi}"));
    }
    let (lambda, d) = (params.lambda, params.d);
    let (a, b) = (params.a.value(), params.b.value());
    let nu = unit_ball_volume(d)?;
    let ch = ch_value(lambda, d, a, b)?;
    let (edge_w, gap_w) = log_ratios(a, b)?;
    let rho = 2.0 * (edge_w.abs() + gap_w.abs());
    let eta = if rho > 0.0 { (ch - 1.0) / rho } else { f64::NEG_INFINITY };
    let kappa = neighbourhood_block_bound(chi, d)?;
    let r_d = shrunk_radius(chi, d);

    let gamma_prime = occupancy_constant(lambda * neighbourhood_volume(chi, d)?).ok();
    let delta_bound = gamma_prime.map(|g| if d == 1 { g * chi } else { g * chi / (nu * r_d.powi(d as i32)) });
    let limits: Vec<f64> = delta_bound.into_iter().chain((eta > 0.0).then(|| eta / kappa)).collect();
    let (delta, delta_fallback) = match limits.iter().copied().reduce(f64::min) {
        Some(limit) => (SAFETY * limit, false),
        None => (FALLBACK_DELTA, true),
    };
    Ok(DerivedParams {
        chi,
        delta,
        m_budget: 5.0 / ((a - b).powi(2) * delta),
        eta,
        rho,
        kappa,
        gamma_prime,
        delta_bound,
        r_d,
        k_visible: visible_block_count(chi, d),
        practical_chi: practical_chi(lambda, d),
        ch_value: ch,
        regime: classify_regime(params)?,
        delta_fallback,
    })
}
