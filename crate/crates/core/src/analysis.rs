//! Statistical probes of the walk's structural properties.
//!
//! Every probe is a pure function of its inputs and seed. Thresholds are
//! left to callers; the conventional one throughout the crate is
//! [`SIGMA_THRESHOLD`] standard errors.
//!
//! Stream lanes used by the nested experiments:
//!
//! | probe | lane 0 | lane 1 | lane `2 + j` / `1 + j` |
//! |---|---|---|---|
//! | [`mean_value_residual`] | walks from `x` | outer sample points `y_j` (stream `j`) | walks from `y_j` (lane `2 + j`) |
//! | [`estimate_regularity`] | probe placement | walks from probe 0 | walks from probe `j` (lane `1 + j`) |
//! | [`irregularity_witness`] | row 0 | row 1 | row `j` on lane `j` |

use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::estimator::{
    accumulate, check_truncation, estimate_on_lane, BoundaryData, Estimate,
};
use crate::exec::{chunk_count, chunk_range, Executor};
use crate::geometry::{Cone, Domain};
use crate::oracle::radial_profile;
use crate::point::Point;
use crate::stats::RunningStats;
use crate::stochastic::RngStream;
use crate::walk::{run_until_exit_ball, run_walk, run_walk_observed, WalkConfig};

/// Number of standard errors used for statistical pass/fail decisions
/// (two-sided false-alarm rate about 6e-5 per check).
pub const SIGMA_THRESHOLD: f64 = 4.0;

/// Trials allowed per requested regularity probe point.
pub const PROBE_TRIALS: u32 = 10_000;

/// A statistic expected to vanish, with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub residual: f64,
    pub stderr: f64,
}

impl Residual {
    /// `|residual| / stderr`; zero when both vanish.
    pub fn z_score(&self) -> f64 {
        if self.residual == 0.0 {
            0.0
        } else {
            self.residual.abs() / self.stderr
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score() < sigmas
    }
}

/// Checks the one-radius mean-value identity of the walk value:
/// `u(x) = average of u over the sampling ball of x`.
///
/// The right side is a nested Monte Carlo average over `n_outer` points
/// `y_j` uniform in the sampling ball of radius `epsilon ∧ dist(x, ∂D)`
/// (for the sphere walk: uniform on the sampling sphere of radius
/// `epsilon ∧ dist(x, ∂D) / 2`), each valued with `n_inner` walks. `u(x)`
/// itself uses `n_inner` walks. The standard error combines the error of
/// `u(x)` with the spread of the inner estimates, which already contains the
/// inner Monte Carlo noise.
#[allow(clippy::too_many_arguments)]
pub fn mean_value_residual<E: Executor>(
    exec: &E,
    domain: &Domain,
    data: &BoundaryData,
    x: &Point,
    config: &WalkConfig,
    n_outer: u64,
    n_inner: u64,
    seed: u64,
) -> Result<Residual> {
    if n_outer < 2 {
        return Err(param("n_outer", "need at least 2 outer samples"));
    }
    let depth = domain.distance_to_boundary(x)?;
    let radius = config.step_radius(depth);
    let at_x = estimate_on_lane(exec, domain, data, x, config, n_inner, seed, 0)?;
    let mut outer = RunningStats::new();
    for j in 0..n_outer {
        let w = config.draw(&mut RngStream::new(seed, 1, j), domain.dim());
        let y = *x + w * radius;
        let inner = estimate_on_lane(exec, domain, data, &y, config, n_inner, seed, 2 + j)?;
        outer.push(inner.mean);
    }
    Ok(Residual {
        residual: at_x.mean - outer.mean(),
        stderr: libm::sqrt(at_x.stderr * at_x.stderr + outer.variance() / n_outer as f64),
    })
}

/// Monte Carlo check of the second-order averaging expansion
/// `avg_{B_eps(x)} u = u(x) + eps^2 / (2 (N + 2)) Δu(x) + o(eps^2)`.
///
/// Returns the sample mean of
/// `u(x + eps w) - u(x) - eps^2 / (2 (N + 2)) laplacian_at_x` over `w`
/// uniform in the unit ball, with its standard error. For quadratic `u` the
/// expectation is exactly zero.
pub fn averaging_residual<E, U>(
    exec: &E,
    u: U,
    laplacian_at_x: f64,
    x: &Point,
    epsilon: f64,
    n_samples: u64,
    seed: u64,
) -> Result<Residual>
where
    E: Executor,
    U: Fn(&Point) -> f64 + Sync + Send,
{
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(param("epsilon", "must be positive"));
    }
    if n_samples < 2 {
        return Err(param("n_samples", "need at least 2 samples"));
    }
    let dim = x.dim();
    let center = u(x);
    let correction = epsilon * epsilon / (2.0 * (dim as f64 + 2.0)) * laplacian_at_x;
    let (stats, _) = accumulate(exec, n_samples, |i| {
        let w = RngStream::new(seed, 0, i).sample_unit_ball(dim);
        Ok(Some(u(&(*x + w * epsilon)) - center - correction))
    })?;
    Ok(Residual {
        residual: stats.mean(),
        stderr: stats.stderr(),
    })
}

/// Radial overshoot `|x_tau - x0| - r` of the stopped walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Overshoot {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// Statistics of the stopping position on first leaving `B_r(x0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitMeasureStats {
    pub n: u64,
    /// Mean of the unit directions `(x_tau - x0) / |x_tau - x0|`.
    pub mean_direction: Point,
    pub mean_direction_stderr: Point,
    /// Row-major `N x N` covariance of the unit directions.
    pub direction_covariance: Vec<f64>,
    /// Standard error of each diagonal second moment `E[u_k^2]`.
    pub covariance_diag_stderr: Vec<f64>,
    pub radial_overshoot: Overshoot,
}

impl ExitMeasureStats {
    pub fn dim(&self) -> usize {
        self.mean_direction.dim()
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.direction_covariance[i * self.dim() + j]
    }
}

#[derive(Clone)]
struct DirectionAcc {
    first: Vec<RunningStats>,
    second: Vec<RunningStats>,
    overshoot: RunningStats,
}

impl DirectionAcc {
    fn new(dim: usize) -> Self {
        Self {
            first: alloc::vec![RunningStats::new(); dim],
            second: alloc::vec![RunningStats::new(); dim * dim],
            overshoot: RunningStats::new(),
        }
    }

    fn push(&mut self, u: &Point, overshoot: f64) {
        let dim = u.dim();
        for i in 0..dim {
            self.first[i].push(u[i]);
            for j in i..dim {
                self.second[i * dim + j].push(u[i] * u[j]);
            }
        }
        self.overshoot.push(overshoot);
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.first.iter_mut().zip(&other.first) {
            a.merge(b);
        }
        for (a, b) in self.second.iter_mut().zip(&other.second) {
            a.merge(b);
        }
        self.overshoot.merge(&other.overshoot);
    }
}

/// Aggregates `n` stopped walks (first exit from `B_r(x0)`).
///
/// Requires `dist(x0, ∂D) >= 2r` and `epsilon < r`.
pub fn exit_measure_stats<E: Executor>(
    exec: &E,
    domain: &Domain,
    x0: &Point,
    r: f64,
    config: &WalkConfig,
    n: u64,
    seed: u64,
) -> Result<ExitMeasureStats> {
    config.validate()?;
    if r.is_nan() || config.epsilon >= r {
        return Err(param("epsilon", "must be smaller than r"));
    }
    if n < 2 {
        return Err(param("n", "need at least 2 walks"));
    }
    let dim = domain.dim();
    let partials = exec.map(chunk_count(n), |c| -> Result<DirectionAcc> {
        let mut acc = DirectionAcc::new(dim);
        for k in chunk_range(c, n) {
            let out = run_until_exit_ball(domain, x0, config, r, &mut RngStream::new(seed, 0, k))?;
            let v = out.stop_point - *x0;
            let len = v.norm();
            acc.push(&(v * (1.0 / len)), len - r);
        }
        Ok(acc)
    });
    let mut acc = DirectionAcc::new(dim);
    for part in partials {
        acc.merge(&part?);
    }

    let mut mean_direction = Point::zeros(dim)?;
    let mut mean_direction_stderr = Point::zeros(dim)?;
    for i in 0..dim {
        mean_direction.as_mut_slice()[i] = acc.first[i].mean();
        mean_direction_stderr.as_mut_slice()[i] = acc.first[i].stderr();
    }
    let mut direction_covariance = alloc::vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let c = acc.second[i * dim + j].mean() - mean_direction[i] * mean_direction[j];
            direction_covariance[i * dim + j] = c;
            direction_covariance[j * dim + i] = c;
        }
    }
    let covariance_diag_stderr = (0..dim).map(|i| acc.second[i * dim + i].stderr()).collect();
    Ok(ExitMeasureStats {
        n,
        mean_direction,
        mean_direction_stderr,
        direction_covariance,
        covariance_diag_stderr,
        radial_overshoot: Overshoot {
            mean: acc.overshoot.mean(),
            min: acc.overshoot.min(),
            max: acc.overshoot.max(),
        },
    })
}

/// A binomial proportion with its standard error `sqrt(p (1 - p) / n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proportion {
    pub p: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Proportion {
    fn from_stats(stats: &RunningStats) -> Self {
        let p = stats.mean();
        Self {
            p,
            stderr: libm::sqrt(p * (1.0 - p) / stats.count() as f64),
            n: stats.count(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularityProbe {
    pub x0: Point,
    /// Estimated `P(X_exit ∈ B_delta(y0))`.
    pub probability: Proportion,
}

/// Finite-probe evidence for walk-regularity of a boundary point.
///
/// A finite probe set can only be *consistent with* walk-regularity; it
/// cannot certify it.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub y0: Point,
    pub delta: f64,
    pub delta_hat: f64,
    pub epsilon: f64,
    pub probes: Vec<RegularityProbe>,
}

impl RegularityReport {
    pub fn min_probability(&self) -> f64 {
        self.probes
            .iter()
            .map(|p| p.probability.p)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_probability(&self) -> f64 {
        self.probes
            .iter()
            .map(|p| p.probability.p)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn check_boundary_point(domain: &Domain, y0: &Point) -> Result<()> {
    y0.check_dim(domain.dim())?;
    let sd = domain.signed_distance(y0);
    if !(0.0..=1e-9).contains(&sd) {
        return Err(Error::NotOnBoundary);
    }
    Ok(())
}

/// Places up to `count` probe points uniformly in `B_radius(center) ∩ D`.
fn place_probes(
    domain: &Domain,
    center: &Point,
    radius: f64,
    count: usize,
    stream: &mut RngStream,
) -> Result<Vec<Point>> {
    let mut probes = Vec::with_capacity(count);
    let budget = PROBE_TRIALS as u64 * count as u64;
    for trial in 0..budget {
        if probes.len() == count {
            break;
        }
        if probes.is_empty() && trial == PROBE_TRIALS as u64 {
            break;
        }
        let x = *center + stream.sample_unit_ball(domain.dim()) * radius;
        if domain.signed_distance(&x) < 0.0 {
            probes.push(x);
        }
    }
    if probes.is_empty() {
        return Err(Error::NoInteriorProbe(PROBE_TRIALS));
    }
    Ok(probes)
}

/// For probe points `x0` in `B_delta_hat(y0) ∩ D`, estimates the probability
/// that the walk from `x0` exits within `B_delta(y0)`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_regularity<E: Executor>(
    exec: &E,
    domain: &Domain,
    y0: &Point,
    delta: f64,
    delta_hat: f64,
    config: &WalkConfig,
    probe_count: usize,
    n_walks: u64,
    seed: u64,
) -> Result<RegularityReport> {
    config.validate()?;
    check_boundary_point(domain, y0)?;
    if !(delta_hat > 0.0 && delta_hat < delta) {
        return Err(param("delta_hat", "must lie in (0, delta)"));
    }
    if probe_count == 0 || n_walks < 2 {
        return Err(param("n_walks", "need at least one probe and two walks"));
    }
    let probes = place_probes(
        domain,
        y0,
        delta_hat,
        probe_count,
        &mut RngStream::new(seed, 0, 0),
    )?;
    let mut report = RegularityReport {
        y0: *y0,
        delta,
        delta_hat,
        epsilon: config.epsilon,
        probes: Vec::with_capacity(probes.len()),
    };
    for (j, x0) in probes.iter().enumerate() {
        let lane = 1 + j as u64;
        let (stats, truncated) = accumulate(exec, n_walks, |k| {
            let out = run_walk(domain, x0, config, &mut RngStream::new(seed, lane, k))?;
            if out.truncated_by_cap {
                return Ok(None);
            }
            Ok(Some(if out.exit_point.distance(y0) < delta { 1.0 } else { 0.0 }))
        })?;
        check_truncation(truncated, n_walks)?;
        report.probes.push(RegularityProbe {
            x0: *x0,
            probability: Proportion::from_stats(&stats),
        });
    }
    Ok(report)
}

/// Estimates `P(∃ n: |X_n - y0| >= delta)` for walks started at `x0`: the
/// fraction of walks whose excursion from `y0` (positions and exit point)
/// reaches `delta`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_escape_probability<E: Executor>(
    exec: &E,
    domain: &Domain,
    y0: &Point,
    delta: f64,
    x0: &Point,
    config: &WalkConfig,
    n_walks: u64,
    seed: u64,
) -> Result<Proportion> {
    config.validate()?;
    y0.check_dim(domain.dim())?;
    domain.distance_to_boundary(x0)?;
    if delta.is_nan() || delta <= 0.0 {
        return Err(param("delta", "must be positive"));
    }
    if n_walks < 2 {
        return Err(param("n_walks", "need at least 2 walks"));
    }
    let (stats, truncated) = accumulate(exec, n_walks, |k| {
        let out = run_walk_observed(
            domain,
            x0,
            config,
            &mut RngStream::new(seed, 0, k),
            y0,
            |_, _| {},
        )?;
        if out.truncated_by_cap {
            return Ok(None);
        }
        Ok(Some(if out.max_excursion >= delta { 1.0 } else { 0.0 }))
    })?;
    check_truncation(truncated, n_walks)?;
    Ok(Proportion::from_stats(&stats))
}

/// Escape bound of the exterior-cone argument:
/// `(v(R) - v(2 + R)) / (v(R) - v(3 + R))` with the radial profile `v`.
///
/// Evaluated in a cancellation-free form. The value lies in `(0, 1)`, is
/// exactly `2/3` for `N = 1`, and for `N >= 2` decreases strictly from 1 (as
/// `R -> 0`) to `2/3` (as `R -> inf`).
pub fn cone_bound_theta0(dim: usize, ratio: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::InvalidDimension(dim));
    }
    if ratio.is_nan() || ratio <= 0.0 {
        return Err(param("R", "must be positive"));
    }
    Ok(match dim {
        1 => 2.0 / 3.0,
        2 => libm::log1p(2.0 / ratio) / libm::log1p(3.0 / ratio),
        n => {
            // 1 - (R / (R + c))^(N - 2) = -expm1(-(N - 2) ln(1 + c / R))
            let k = (n - 2) as f64;
            let part = |c: f64| -libm::expm1(-k * libm::log1p(c / ratio));
            part(2.0) / part(3.0)
        }
    })
}

/// Same quotient evaluated literally through [`radial_profile`]; loses
/// accuracy for large `R` but serves as an independent cross-check.
pub fn cone_bound_theta0_direct(dim: usize, ratio: f64) -> f64 {
    let v = |t| radial_profile(dim, t);
    (v(ratio) - v(2.0 + ratio)) / (v(ratio) - v(3.0 + ratio))
}

/// Probe radius `delta / (4 + 2R)` inside which the cone bound applies to
/// starting points.
pub fn escape_probe_radius(delta: f64, ratio: f64) -> f64 {
    delta / (4.0 + 2.0 * ratio)
}

/// Samples `n` points of the closed cone (excluding its tip) and reports
/// whether all of them lie outside the domain.
pub fn verify_exterior_cone(domain: &Domain, cone: &Cone, n: u64, seed: u64) -> Result<bool> {
    cone.tip().check_dim(domain.dim())?;
    let dim = domain.dim();
    let mut stream = RngStream::new(seed, 0, 0);
    let tan = libm::tan(cone.half_angle());
    for _ in 0..n {
        let along = cone.height() * stream.uniform();
        let w = stream.sample_unit_ball(dim);
        let lateral = w - *cone.axis() * w.dot(cone.axis());
        let x = *cone.tip() + *cone.axis() * along + lateral * (along * tan);
        if cone.contains(&x) && domain.signed_distance(&x) < 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MartingaleReport {
    /// `max_k |mean_k - x0_k| / stderr_k` over coordinates.
    pub max_deviation_in_stderr: f64,
    /// Empirical mean of one step from `x0`.
    pub mean: Point,
    pub stderr: Point,
    /// Step radius at `x0`.
    pub radius: f64,
}

/// Simulates one walk step from `x0` `n` times and compares the mean
/// position with `x0` coordinatewise.
pub fn martingale_check<E: Executor>(
    exec: &E,
    domain: &Domain,
    x0: &Point,
    config: &WalkConfig,
    n: u64,
    seed: u64,
) -> Result<MartingaleReport> {
    let depth = domain.distance_to_boundary(x0)?;
    if n < 2 {
        return Err(param("n", "need at least 2 samples"));
    }
    let dim = domain.dim();
    let radius = config.step_radius(depth);
    let partials = exec.map(chunk_count(n), |c| {
        let mut acc = alloc::vec![RunningStats::new(); dim];
        for k in chunk_range(c, n) {
            let w = config.draw(&mut RngStream::new(seed, 0, k), dim);
            let y = *x0 + w * radius;
            for (i, s) in acc.iter_mut().enumerate() {
                s.push(y[i]);
            }
        }
        acc
    });
    let mut acc = alloc::vec![RunningStats::new(); dim];
    for part in partials {
        for (a, b) in acc.iter_mut().zip(&part) {
            a.merge(b);
        }
    }
    let mut mean = Point::zeros(dim)?;
    let mut stderr = Point::zeros(dim)?;
    let mut worst: f64 = 0.0;
    for (i, s) in acc.iter().enumerate() {
        mean.as_mut_slice()[i] = s.mean();
        stderr.as_mut_slice()[i] = s.stderr();
        worst = worst.max((s.mean() - x0[i]).abs() / s.stderr());
    }
    Ok(MartingaleReport {
        max_deviation_in_stderr: worst,
        mean,
        stderr,
        radius,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessRow {
    pub epsilon: f64,
    pub start_distance: f64,
    pub x0: Point,
    /// Walk value of `F(y) = |y - y0|` at `x0`.
    pub estimate: Estimate,
}

/// Walk values of `F(y) = |y - y0|` at starting points `y0 + d * direction`
/// approaching `y0`, for every `(epsilon, d)` pair. `F(y0) = 0`, so values
/// bounded away from zero witness that `y0` is not walk-regular.
///
/// Row `j` (epsilon-major order) uses lane `j`.
#[allow(clippy::too_many_arguments)]
pub fn irregularity_witness<E: Executor>(
    exec: &E,
    domain: &Domain,
    y0: &Point,
    direction: &Point,
    epsilons: &[f64],
    start_distances: &[f64],
    config: &WalkConfig,
    n_walks: u64,
    seed: u64,
) -> Result<Vec<WitnessRow>> {
    check_boundary_point(domain, y0)?;
    direction.check_dim(domain.dim())?;
    let dir = direction
        .normalized()
        .ok_or(param("direction", "must be nonzero"))?;
    if epsilons.is_empty() || start_distances.is_empty() {
        return Err(Error::Empty("epsilons and start distances"));
    }
    let data = BoundaryData::DistanceTo(*y0);
    let mut rows = Vec::with_capacity(epsilons.len() * start_distances.len());
    for &epsilon in epsilons {
        let cfg = config.with_epsilon(epsilon)?;
        for &d in start_distances {
            let x0 = *y0 + dir * d;
            let lane = rows.len() as u64;
            let estimate = estimate_on_lane(exec, domain, &data, &x0, &cfg, n_walks, seed, lane)?;
            rows.push(WitnessRow {
                epsilon,
                start_distance: d,
                x0,
                estimate,
            });
        }
    }
    Ok(rows)
}

/// Upper bound on the probability that a planar walk started at distance
/// `start_distance` from the puncture of a unit punctured disk stops at the
/// puncture when stopping within `stop_tolerance` of the boundary:
/// `ln(1/d) / ln(1/stop_tolerance)`, from optional stopping of the
/// nonnegative martingale `-ln|x|`.
pub fn puncture_capture_bound(start_distance: f64, stop_tolerance: f64) -> f64 {
    libm::log(1.0 / start_distance) / libm::log(1.0 / stop_tolerance)
}
