//! Monte Carlo estimation of the walk value `u(x0) = E[F(X_exit)]`.
//!
//! Walk `k` of an estimate always draws from `RngStream::new(seed, lane, k)`,
//! walks are grouped into fixed chunks of [`CHUNK`](crate::exec::CHUNK), and
//! per-chunk Welford summaries are merged in chunk order. The result is
//! therefore a pure function of the inputs, bit-for-bit, whatever executor
//! runs the chunks.

use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::exec::{chunk_count, chunk_range, Executor};
use crate::geometry::Domain;
use crate::oracle::HarmonicOracle;
use crate::point::Point;
use crate::stats::RunningStats;
use crate::stochastic::RngStream;
use crate::walk::{run_walk, WalkConfig, WalkOutcome};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.96;

/// Boundary data, evaluable on the boundary and on a neighbourhood of it.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryData {
    /// The coordinate `y[axis]` (0-based).
    Coordinate(usize),
    Constant(f64),
    /// `|y - y0|`.
    DistanceTo(Point),
    /// Trace of a harmonic oracle.
    HarmonicTrace(HarmonicOracle),
    /// Values on a finite point set, extended by [`tietze_extend`].
    Tabulated { points: Vec<Point>, values: Vec<f64> },
    /// `sum_i c_i F_i`.
    Combination(Vec<(f64, BoundaryData)>),
}

impl BoundaryData {
    pub fn tabulated(points: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("tabulated boundary data"));
        }
        if points.len() != values.len() {
            return Err(param("values", "need one value per point"));
        }
        let dim = points[0].dim();
        for p in &points {
            p.check_dim(dim)?;
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::Tabulated { points, values })
    }

    pub fn eval(&self, y: &Point) -> Result<f64> {
        match self {
            Self::Coordinate(axis) => {
                if *axis >= y.dim() {
                    return Err(param("axis", "coordinate index exceeds dimension"));
                }
                Ok(y[*axis])
            }
            Self::Constant(c) => Ok(*c),
            Self::DistanceTo(y0) => {
                y0.check_dim(y.dim())?;
                Ok(y.distance(y0))
            }
            Self::HarmonicTrace(oracle) => oracle.trace(y),
            Self::Tabulated { points, values } => tietze_extend(points, values, y),
            Self::Combination(terms) => {
                let mut acc = 0.0;
                for (c, f) in terms {
                    acc += c * f.eval(y)?;
                }
                Ok(acc)
            }
        }
    }

    /// Checks dimensions and oracle regions against `domain`.
    pub fn check(&self, domain: &Domain) -> Result<()> {
        let dim = domain.dim();
        match self {
            Self::Coordinate(axis) if *axis >= dim => {
                Err(param("axis", "coordinate index exceeds dimension"))
            }
            Self::Constant(c) if !c.is_finite() => Err(Error::NonFinite),
            Self::DistanceTo(y0) => y0.check_dim(dim),
            Self::HarmonicTrace(oracle) => oracle.check_region(domain),
            Self::Tabulated { points, .. } => points[0].check_dim(dim),
            Self::Combination(terms) => terms.iter().try_for_each(|(_, f)| f.check(domain)),
            _ => Ok(()),
        }
    }
}

/// Hausdorff's extension of data given on a finite set `A`:
/// `min_{y in A} { F(y) + |x - y| / dist(x, A) - 1 }` off `A`, and `F(x)`
/// on `A`.
///
/// The `- 1` sits inside the minimum; it is constant and could be pulled
/// out.
pub fn tietze_extend(points: &[Point], values: &[f64], x: &Point) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("tabulated boundary data"));
    }
    if points.len() != values.len() {
        return Err(param("values", "need one value per point"));
    }
    let mut dist_a = f64::INFINITY;
    let mut at = None;
    for (i, p) in points.iter().enumerate() {
        p.check_dim(x.dim())?;
        let d = p.distance(x);
        if d < dist_a {
            dist_a = d;
            at = Some(i);
        }
    }
    if dist_a == 0.0 {
        return Ok(values[at.expect("nonempty")]);
    }
    Ok(points
        .iter()
        .zip(values)
        .map(|(p, f)| f + p.distance(x) / dist_a - 1.0)
        .fold(f64::INFINITY, f64::min))
}

/// A Monte Carlo mean with its uncertainty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
    /// Number of samples in the mean (truncated walks excluded).
    pub n: u64,
    /// `mean ± 1.96 stderr`.
    pub ci95: (f64, f64),
    pub truncated_count: u64,
    /// Smallest and largest sample.
    pub min: f64,
    pub max: f64,
}

impl Estimate {
    pub fn from_stats(stats: &RunningStats, truncated_count: u64) -> Self {
        let mean = stats.mean();
        let stderr = stats.stderr();
        Self {
            mean,
            stderr,
            n: stats.count(),
            ci95: (mean - Z95 * stderr, mean + Z95 * stderr),
            truncated_count,
            min: stats.min(),
            max: stats.max(),
        }
    }
}

/// Runs `sample(i)` for `i in 0..n` in fixed chunks and merges the
/// summaries in order. `Ok(None)` marks a truncated walk.
pub fn accumulate<E, F>(exec: &E, n: u64, sample: F) -> Result<(RunningStats, u64)>
where
    E: Executor,
    F: Fn(u64) -> Result<Option<f64>> + Sync + Send,
{
    let partials = exec.map(chunk_count(n), |c| -> Result<(RunningStats, u64)> {
        let mut stats = RunningStats::new();
        let mut truncated = 0;
        for i in chunk_range(c, n) {
            match sample(i)? {
                Some(v) => stats.push(v),
                None => truncated += 1,
            }
        }
        Ok((stats, truncated))
    });
    let mut total = RunningStats::new();
    let mut truncated = 0;
    for part in partials {
        let (stats, t) = part?;
        total.merge(&stats);
        truncated += t;
    }
    Ok((total, truncated))
}

/// Fails when more than 0.1% of the walks were truncated (or all were).
pub(crate) fn check_truncation(truncated: u64, total: u64) -> Result<()> {
    if truncated == total || truncated.saturating_mul(1000) > total {
        Err(Error::TooManyTruncated { truncated, total })
    } else {
        Ok(())
    }
}

/// Estimates `u(x0)` from `n_walks` walks on lane `lane`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_on_lane<E: Executor>(
    exec: &E,
    domain: &Domain,
    data: &BoundaryData,
    x0: &Point,
    config: &WalkConfig,
    n_walks: u64,
    seed: u64,
    lane: u64,
) -> Result<Estimate> {
    config.validate()?;
    domain.distance_to_boundary(x0)?;
    data.check(domain)?;
    if n_walks < 2 {
        return Err(param("n_walks", "need at least 2 walks"));
    }
    let (stats, truncated) = accumulate(exec, n_walks, |k| {
        let mut stream = RngStream::new(seed, lane, k);
        let out = run_walk(domain, x0, config, &mut stream)?;
        if out.truncated_by_cap {
            Ok(None)
        } else {
            data.eval(&out.exit_point).map(Some)
        }
    })?;
    check_truncation(truncated, n_walks)?;
    Ok(Estimate::from_stats(&stats, truncated))
}

/// Estimates `u(x0) = E[F(X_exit)]` with walks `derive_stream(seed, 0..n_walks)`.
pub fn estimate_value<E: Executor>(
    exec: &E,
    domain: &Domain,
    data: &BoundaryData,
    x0: &Point,
    config: &WalkConfig,
    n_walks: u64,
    seed: u64,
) -> Result<Estimate> {
    estimate_on_lane(exec, domain, data, x0, config, n_walks, seed, 0)
}

/// Per-point estimates over a grid. Grid point `i` uses lane `i`, so a
/// one-point grid reproduces [`estimate_value`].
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEstimate {
    /// `(grid index, point, estimate)` for every interior grid point.
    pub entries: Vec<(usize, Point, Estimate)>,
    /// Indices of grid points outside the domain.
    pub skipped: Vec<usize>,
}

pub fn estimate_field<E: Executor>(
    exec: &E,
    domain: &Domain,
    data: &BoundaryData,
    grid: &[Point],
    config: &WalkConfig,
    n_walks: u64,
    seed: u64,
) -> Result<FieldEstimate> {
    if grid.is_empty() {
        return Err(Error::Empty("grid"));
    }
    let mut field = FieldEstimate {
        entries: Vec::new(),
        skipped: Vec::new(),
    };
    for (i, x) in grid.iter().enumerate() {
        if !domain.contains(x)? {
            field.skipped.push(i);
            continue;
        }
        let est = estimate_on_lane(exec, domain, data, x, config, n_walks, seed, i as u64)?;
        field.entries.push((i, *x, est));
    }
    Ok(field)
}

/// The individual outcomes of walks `0..n` on `lane`, in index order.
pub fn walk_outcomes<E: Executor>(
    exec: &E,
    domain: &Domain,
    x0: &Point,
    config: &WalkConfig,
    n: u64,
    seed: u64,
    lane: u64,
) -> Result<Vec<WalkOutcome>> {
    config.validate()?;
    domain.distance_to_boundary(x0)?;
    let chunks = exec.map(chunk_count(n), |c| -> Result<Vec<WalkOutcome>> {
        chunk_range(c, n)
            .map(|k| run_walk(domain, x0, config, &mut RngStream::new(seed, lane, k)))
            .collect()
    });
    let mut out = Vec::with_capacity(n as usize);
    for chunk in chunks {
        out.extend(chunk?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    #[test]
    fn tietze_examples() {
        let a = [p(&[1.0, 0.0])];
        for x in [p(&[0.0, 0.0]), p(&[3.0, -2.0])] {
            assert!((tietze_extend(&a, &[2.5], &x).unwrap() - 2.5).abs() < 1e-15);
        }
        let a = [p(&[1.0, 0.0]), p(&[-1.0, 0.0])];
        let v = tietze_extend(&a, &[0.0, 10.0], &p(&[0.9, 0.0])).unwrap();
        assert!(v.abs() < 1e-12, "{v}");
        assert_eq!(tietze_extend(&a, &[0.0, 10.0], &a[1]).unwrap(), 10.0);
        assert!(tietze_extend(&[], &[], &p(&[0.0])).is_err());
    }

    #[test]
    fn tietze_is_continuous_at_the_samples() {
        let a = [p(&[1.0, 0.0]), p(&[0.0, 1.0]), p(&[-1.0, -1.0])];
        let f = [0.5, -2.0, 3.0];
        let dir = p(&[0.6, 0.8]);
        for (pt, val) in a.iter().zip(f) {
            let mut prev = f64::INFINITY;
            for k in 1..12 {
                let h = libm::pow(10.0, -(k as f64));
                let v = tietze_extend(&a, &f, &(*pt + dir * h)).unwrap();
                let gap = (v - val).abs();
                assert!(gap <= prev + 1e-15);
                prev = gap;
            }
            assert!(prev < 1e-9);
        }
    }

    #[test]
    fn constant_data_is_exact() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.2).unwrap();
        let est = estimate_value(
            &Serial,
            &ball,
            &BoundaryData::Constant(0.7),
            &p(&[0.1, 0.2]),
            &cfg,
            3000,
            1,
        )
        .unwrap();
        assert_eq!(est.mean, 0.7);
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.n, 3000);
        assert_eq!(est.ci95, (0.7, 0.7));
    }

    #[test]
    fn linear_data_matches_harmonic_extension() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
        let est = estimate_value(
            &Serial,
            &ball,
            &BoundaryData::Coordinate(0),
            &p(&[0.3, 0.4]),
            &cfg,
            100_000,
            2,
        )
        .unwrap();
        assert!((est.mean - 0.3).abs() < 4.0 * est.stderr + 1e-3, "{est:?}");
        assert_eq!(est.truncated_count, 0);
        assert!(est.min >= -1.0 && est.max <= 1.0);
    }

    #[test]
    fn harmonic_quadratic_data() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
        let data = BoundaryData::HarmonicTrace(
            HarmonicOracle::diagonal_quadratic(&[1.0, -1.0]).unwrap(),
        );
        let est =
            estimate_value(&Serial, &ball, &data, &p(&[0.3, 0.4]), &cfg, 50_000, 3).unwrap();
        assert!((est.mean + 0.07).abs() < 4.0 * est.stderr + 1e-3, "{est:?}");
    }

    #[test]
    fn single_point_field_matches_value() {
        let square = Domain::unit_cube(2).unwrap();
        let cfg = WalkConfig::for_domain(&square, 0.1).unwrap();
        let data = BoundaryData::Coordinate(1);
        let x = p(&[0.4, 0.3]);
        let v = estimate_value(&Serial, &square, &data, &x, &cfg, 2000, 9).unwrap();
        let f = estimate_field(&Serial, &square, &data, &[x], &cfg, 2000, 9).unwrap();
        assert_eq!(f.entries.len(), 1);
        assert_eq!(f.entries[0].2, v);
        assert!(f.skipped.is_empty());
    }

    #[test]
    fn field_skips_exterior_points_and_rejects_empty_grid() {
        let square = Domain::unit_cube(2).unwrap();
        let cfg = WalkConfig::for_domain(&square, 0.1).unwrap();
        let data = BoundaryData::Constant(2.0);
        let grid = [p(&[0.5, 0.5]), p(&[1.5, 0.5]), p(&[0.0, 0.5]), p(&[0.2, 0.9])];
        let f = estimate_field(&Serial, &square, &data, &grid, &cfg, 100, 1).unwrap();
        assert_eq!(f.skipped, vec![1, 2]);
        assert!(f.entries.iter().all(|(_, _, e)| e.mean == 2.0));
        assert_eq!(
            estimate_field(&Serial, &square, &data, &[], &cfg, 100, 1),
            Err(Error::Empty("grid"))
        );
    }

    #[test]
    fn truncation_is_reported_as_error() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::new(0.01, 1e-6, 3, crate::walk::WalkKind::BallWalk).unwrap();
        let r = estimate_value(
            &Serial,
            &ball,
            &BoundaryData::Constant(1.0),
            &p(&[0.0, 0.0]),
            &cfg,
            100,
            1,
        );
        assert_eq!(
            r,
            Err(Error::TooManyTruncated {
                truncated: 100,
                total: 100
            })
        );
    }

    #[test]
    fn preconditions() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
        let c = BoundaryData::Constant(1.0);
        assert!(estimate_value(&Serial, &ball, &c, &p(&[0.0, 0.0]), &cfg, 1, 1).is_err());
        assert_eq!(
            estimate_value(&Serial, &ball, &c, &p(&[2.0, 0.0]), &cfg, 10, 1),
            Err(Error::Exterior)
        );
        let bad = BoundaryData::Coordinate(2);
        assert!(estimate_value(&Serial, &ball, &bad, &p(&[0.0, 0.0]), &cfg, 10, 1).is_err());
        let pole_inside = BoundaryData::HarmonicTrace(HarmonicOracle::fundamental(p(&[0.1, 0.0])));
        assert!(
            estimate_value(&Serial, &ball, &pole_inside, &p(&[0.5, 0.0]), &cfg, 10, 1).is_err()
        );
    }
}
