//! The ball walk, the sphere walk, and the walk stopped on leaving a ball.
//!
//! The ball walk moves from `x` to a uniform point of the ball of radius
//! `epsilon ∧ dist(x, ∂D)` around `x`; the sphere walk moves to a uniform
//! point of the sphere of radius `epsilon ∧ dist(x, ∂D) / 2`. Both are
//! martingales that accumulate at the boundary without ever reaching it, so
//! a finite simulation needs a truncation rule: a walk stops as soon as its
//! distance to the boundary drops below `stop_tolerance` and reports the
//! nearest boundary point as its exit point. A walk also stops when a step
//! would fail to stay strictly inside in floating point, which only happens
//! once the distance is at the resolution of the coordinates.
//!
//! Walks that exhaust `max_steps` are flagged, never silently dropped.

use crate::error::{param, Error, Result};
use crate::geometry::Domain;
use crate::point::Point;
use crate::stochastic::RngStream;

/// Default step cap.
pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

/// Default stop tolerance as a fraction of the domain diameter.
pub const DEFAULT_STOP_FRACTION: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalkKind {
    BallWalk,
    SphereWalk,
}

/// Simulation parameters shared by every walk of an experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkConfig {
    pub epsilon: f64,
    pub stop_tolerance: f64,
    pub max_steps: u64,
    pub kind: WalkKind,
}

impl WalkConfig {
    pub fn new(epsilon: f64, stop_tolerance: f64, max_steps: u64, kind: WalkKind) -> Result<Self> {
        let cfg = Self {
            epsilon,
            stop_tolerance,
            max_steps,
            kind,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Ball walk with the default stop tolerance (`1e-4 · diam(D)`, capped
    /// below `epsilon`) and step cap.
    pub fn for_domain(domain: &Domain, epsilon: f64) -> Result<Self> {
        let stop = (DEFAULT_STOP_FRACTION * domain.diameter()).min(0.5 * epsilon);
        Self::new(epsilon, stop, DEFAULT_MAX_STEPS, WalkKind::BallWalk)
    }

    pub fn with_kind(mut self, kind: WalkKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn with_stop_tolerance(mut self, stop_tolerance: f64) -> Result<Self> {
        self.stop_tolerance = stop_tolerance;
        self.validate()?;
        Ok(self)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.epsilon = epsilon;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(param("epsilon", "must lie in (0, 1)"));
        }
        if !(self.stop_tolerance > 0.0 && self.stop_tolerance < self.epsilon) {
            return Err(param("stop_tolerance", "must lie in (0, epsilon)"));
        }
        if self.max_steps == 0 {
            return Err(param("max_steps", "must be at least 1"));
        }
        Ok(())
    }

    /// Step radius at a point whose distance to the boundary is `depth`.
    #[inline]
    pub fn step_radius(&self, depth: f64) -> f64 {
        match self.kind {
            WalkKind::BallWalk => self.epsilon.min(depth),
            WalkKind::SphereWalk => self.epsilon.min(0.5 * depth),
        }
    }

    #[inline]
    pub(crate) fn draw(&self, stream: &mut RngStream, dim: usize) -> Point {
        match self.kind {
            WalkKind::BallWalk => stream.sample_unit_ball(dim),
            WalkKind::SphereWalk => stream.sample_unit_sphere(dim),
        }
    }
}

/// Terminal record of one walk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkOutcome {
    /// Nearest boundary point to the last position.
    pub exit_point: Point,
    pub steps: u64,
    pub truncated_by_cap: bool,
    /// `sup |x_n - anchor|` over all positions and the exit point; the anchor
    /// is the start point unless [`run_walk_observed`] is given another one.
    pub max_excursion: f64,
}

/// First position of a walk outside `B_r(x0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StoppedOutcome {
    pub stop_point: Point,
    pub stop_step: u64,
}

fn interior_depth(domain: &Domain, x: &Point) -> Result<f64> {
    let depth = domain.distance_to_boundary(x)?;
    Ok(depth)
}

/// `x + (epsilon ∧ dist(x, ∂D)) w` for `w` in the open unit ball.
pub fn ball_walk_step(domain: &Domain, x: &Point, epsilon: f64, w: &Point) -> Result<Point> {
    w.check_dim(domain.dim())?;
    let depth = interior_depth(domain, x)?;
    Ok(*x + *w * epsilon.min(depth))
}

/// `x + (epsilon ∧ dist(x, ∂D) / 2) w` for `w` on the unit sphere.
pub fn sphere_walk_step(domain: &Domain, x: &Point, epsilon: f64, w: &Point) -> Result<Point> {
    w.check_dim(domain.dim())?;
    let depth = interior_depth(domain, x)?;
    Ok(*x + *w * epsilon.min(0.5 * depth))
}

/// Runs one walk from `x0` until it is within `stop_tolerance` of the boundary.
pub fn run_walk(
    domain: &Domain,
    x0: &Point,
    config: &WalkConfig,
    stream: &mut RngStream,
) -> Result<WalkOutcome> {
    run_walk_observed(domain, x0, config, stream, x0, |_, _| {})
}

/// [`run_walk`] measuring excursions from `anchor` and reporting every
/// position `(step, x_step)`, starting with `(0, x0)`, to `observer`.
pub fn run_walk_observed(
    domain: &Domain,
    x0: &Point,
    config: &WalkConfig,
    stream: &mut RngStream,
    anchor: &Point,
    mut observer: impl FnMut(u64, &Point),
) -> Result<WalkOutcome> {
    anchor.check_dim(domain.dim())?;
    let mut depth = interior_depth(domain, x0)?;
    let dim = domain.dim();
    let mut x = *x0;
    let mut steps = 0u64;
    let mut max_excursion = x.distance(anchor);
    let mut truncated_by_cap = false;
    observer(0, &x);

    while depth >= config.stop_tolerance {
        if steps == config.max_steps {
            truncated_by_cap = true;
            break;
        }
        let w = config.draw(stream, dim);
        let next = x + w * config.step_radius(depth);
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        let next_depth = domain.depth(&next);
        if next_depth <= 0.0 {
            // Rounding pushed the step onto the boundary: `depth` is at the
            // floating-point resolution of the coordinates.
            break;
        }
        x = next;
        depth = next_depth;
        steps += 1;
        max_excursion = max_excursion.max(x.distance(anchor));
        observer(steps, &x);
    }

    let exit_point = domain.project_interior(&x);
    max_excursion = max_excursion.max(exit_point.distance(anchor));
    Ok(WalkOutcome {
        exit_point,
        steps,
        truncated_by_cap,
        max_excursion,
    })
}

/// Runs a walk from `x0` until the first position outside `B_r(x0)`.
///
/// Requires `B_{2r}(x0) ⊂ D`, checked as `dist(x0, ∂D) >= 2r`.
pub fn run_until_exit_ball(
    domain: &Domain,
    x0: &Point,
    config: &WalkConfig,
    r: f64,
    stream: &mut RngStream,
) -> Result<StoppedOutcome> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(param("r", "must be positive"));
    }
    if interior_depth(domain, x0)? < 2.0 * r {
        return Err(param("r", "requires dist(x0, boundary) >= 2r"));
    }
    let dim = domain.dim();
    let mut x = *x0;
    for step in 1..=config.max_steps {
        let depth = domain.depth(&x);
        let w = config.draw(stream, dim);
        x = x + w * config.step_radius(depth);
        if !x.is_finite() {
            return Err(Error::NonFinite);
        }
        if x.distance(x0) >= r {
            return Ok(StoppedOutcome {
                stop_point: x,
                stop_step: step,
            });
        }
    }
    Err(Error::StepCap(config.max_steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::derive_stream;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    fn close(a: &Point, b: &Point) -> bool {
        a.distance(b) < 1e-15
    }

    #[test]
    fn ball_step_examples() {
        let ball = Domain::unit_ball(2).unwrap();
        let x = p(&[0.5, 0.0]);
        let y = ball_walk_step(&ball, &x, 0.2, &p(&[0.5, -0.5])).unwrap();
        assert!(close(&y, &p(&[0.6, -0.1])));
        let y = ball_walk_step(&ball, &x, 0.8, &p(&[0.5, 0.0])).unwrap();
        assert!(close(&y, &p(&[0.75, 0.0])));
        let y = ball_walk_step(&ball, &x, 0.8, &p(&[0.0, 0.0])).unwrap();
        assert_eq!(y, x);
        assert_eq!(
            ball_walk_step(&ball, &p(&[1.0, 0.0]), 0.1, &p(&[0.0, 0.0])),
            Err(Error::Exterior)
        );
    }

    #[test]
    fn sphere_step_examples() {
        let ball = Domain::unit_ball(2).unwrap();
        let y = sphere_walk_step(&ball, &p(&[0.0, 0.0]), 0.1, &p(&[1.0, 0.0])).unwrap();
        assert!(close(&y, &p(&[0.1, 0.0])));
        let y = sphere_walk_step(&ball, &p(&[0.8, 0.0]), 0.5, &p(&[0.0, 1.0])).unwrap();
        assert!(close(&y, &p(&[0.8, 0.1])));
        let mut s = derive_stream(3, 0);
        for _ in 0..10_000 {
            let x = s.sample_unit_ball(2) * 0.999;
            let y = sphere_walk_step(&ball, &x, 0.9, &s.sample_unit_sphere(2)).unwrap();
            assert!(ball.contains(&y).unwrap());
        }
    }

    #[test]
    fn config_validation() {
        assert!(WalkConfig::new(0.1, 1e-4, 10, WalkKind::BallWalk).is_ok());
        assert!(WalkConfig::new(1.5, 1e-4, 10, WalkKind::BallWalk).is_err());
        assert!(WalkConfig::new(0.0, 1e-4, 10, WalkKind::BallWalk).is_err());
        assert!(WalkConfig::new(0.1, 0.2, 10, WalkKind::BallWalk).is_err());
        assert!(WalkConfig::new(0.1, 1e-4, 0, WalkKind::BallWalk).is_err());
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
        assert_eq!(cfg.stop_tolerance, 2e-4);
        assert_eq!(cfg.max_steps, DEFAULT_MAX_STEPS);
    }

    #[test]
    fn start_near_boundary_exits_immediately() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
        let x0 = p(&[0.99995, 0.0]);
        let out = run_walk(&ball, &x0, &cfg, &mut derive_stream(1, 0)).unwrap();
        assert_eq!(out.steps, 0);
        assert_eq!(out.exit_point, p(&[1.0, 0.0]));
        assert!(!out.truncated_by_cap);
    }

    #[test]
    fn exterior_start_is_an_error() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
        let r = run_walk(&ball, &p(&[1.5, 0.0]), &cfg, &mut derive_stream(1, 0));
        assert_eq!(r, Err(Error::Exterior));
    }

    #[test]
    fn walks_are_reproducible_and_end_on_boundary() {
        let square = Domain::unit_cube(2).unwrap();
        let cfg = WalkConfig::for_domain(&square, 0.1).unwrap();
        let x0 = p(&[0.3, 0.6]);
        for k in 0..200 {
            let a = run_walk(&square, &x0, &cfg, &mut derive_stream(5, k)).unwrap();
            let b = run_walk(&square, &x0, &cfg, &mut derive_stream(5, k)).unwrap();
            assert_eq!(a, b);
            assert!(!square.contains(&a.exit_point).unwrap());
            assert!(square.signed_distance(&a.exit_point).abs() < 1e-9);
            assert!(!a.truncated_by_cap);
        }
    }

    #[test]
    fn every_position_is_interior_and_steps_are_bounded() {
        let ann = Domain::annulus(p(&[0.0, 0.0, 0.0]), 0.3, 1.0).unwrap();
        for kind in [WalkKind::BallWalk, WalkKind::SphereWalk] {
            let cfg = WalkConfig::for_domain(&ann, 0.2).unwrap().with_kind(kind);
            let x0 = p(&[0.6, 0.0, 0.1]);
            for k in 0..50 {
                let mut prev = x0;
                run_walk_observed(&ann, &x0, &cfg, &mut derive_stream(6, k), &x0, |_, x| {
                    assert!(ann.contains(x).unwrap());
                    let d = ann.distance_to_boundary(&prev).unwrap();
                    assert!(x.distance(&prev) <= cfg.step_radius(d) * (1.0 + 1e-12));
                    prev = *x;
                })
                .unwrap();
            }
        }
    }

    #[test]
    fn step_cap_flags_truncation() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::new(0.01, 1e-6, 5, WalkKind::BallWalk).unwrap();
        let out = run_walk(&ball, &p(&[0.0, 0.0]), &cfg, &mut derive_stream(1, 0)).unwrap();
        assert!(out.truncated_by_cap);
        assert_eq!(out.steps, 5);
        assert!(!ball.contains(&out.exit_point).unwrap());
    }

    #[test]
    fn excursion_tracks_anchor() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.1).unwrap();
        let x0 = p(&[0.2, 0.1]);
        let anchor = p(&[1.0, 0.0]);
        let mut seen: f64 = 0.0;
        let out = run_walk_observed(&ball, &x0, &cfg, &mut derive_stream(2, 0), &anchor, |_, x| {
            seen = seen.max(x.distance(&anchor));
        })
        .unwrap();
        assert_eq!(
            out.max_excursion,
            seen.max(out.exit_point.distance(&anchor))
        );
    }

    #[test]
    fn stopped_walk_lands_in_shell() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.05).unwrap();
        let x0 = p(&[0.0, 0.0]);
        for k in 0..500 {
            let out = run_until_exit_ball(&ball, &x0, &cfg, 0.3, &mut derive_stream(4, k)).unwrap();
            let r = out.stop_point.distance(&x0);
            assert!((0.3..0.35).contains(&r));
            assert!(out.stop_step >= 1);
        }
    }

    #[test]
    fn stopped_walk_checks_preconditions() {
        let ball = Domain::unit_ball(2).unwrap();
        let cfg = WalkConfig::for_domain(&ball, 0.05).unwrap();
        let mut s = derive_stream(4, 0);
        assert!(run_until_exit_ball(&ball, &p(&[0.5, 0.0]), &cfg, 0.3, &mut s).is_err());
        let capped = WalkConfig::new(0.05, 1e-4, 2, WalkKind::BallWalk).unwrap();
        assert_eq!(
            run_until_exit_ball(&ball, &p(&[0.0, 0.0]), &capped, 0.3, &mut s),
            Err(Error::StepCap(2))
        );
    }
}
