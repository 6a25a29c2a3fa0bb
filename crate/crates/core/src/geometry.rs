//! Bounded open domains described by distance oracles.
//!
//! Every shape exposes a signed distance whose sign is exact (negative
//! strictly inside the open set, zero on the boundary, positive outside) and
//! whose magnitude never exceeds the true Euclidean distance to the boundary.
//! The magnitude is exact for all primitive shapes from the inside, which is
//! the only direction the walks query. Two places under-estimate:
//!
//! * a [`Shape::HalfspaceIntersection`] queried from the *outside* returns
//!   the largest facet violation, a lower bound on the distance to the
//!   polytope;
//! * a [`Shape::Difference`] `A \ closure(B)` uses `max(sd_A, -sd_B)`. The
//!   complement of the difference is `A^c ∪ closure(B)`, so the interior
//!   depth is exactly `min(depth_A, dist_B)` whenever both component values
//!   are exact, and a lower bound otherwise (the constant `c` of the
//!   contract is the product of the component constants).
//!
//! A lower bound on the sampling radius keeps every ball-walk step inside
//! the domain, which is all the walk needs.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::point::{Point, MAX_DIM};

const BISECTION_STEPS: usize = 80;
const DYKSTRA_SWEEPS: usize = 200_000;
const MAX_VALIDATION_SUBSETS: u64 = 2_000_000;

/// The primitive and composite shapes a [`Domain`] can take.
#[derive(Clone, Debug)]
pub enum Shape {
    Ball {
        center: Point,
        radius: f64,
    },
    /// Open axis-aligned box.
    Box {
        min: Point,
        max: Point,
    },
    Annulus {
        center: Point,
        inner_radius: f64,
        outer_radius: f64,
    },
    /// Open ball with its center removed; the center belongs to the boundary.
    PuncturedBall {
        center: Point,
        radius: f64,
    },
    /// Bounded open polytope `{x : n_i . x < b_i for all i}`.
    HalfspaceIntersection(Polytope),
    /// `A \ closure(B)`. The subtrahend must be a primitive shape.
    Difference(Box<Domain>, Box<Domain>),
}

/// A validated bounded polytope with unit facet normals.
#[derive(Clone, Debug)]
pub struct Polytope {
    facets: Vec<(Point, f64)>,
    diameter: f64,
}

impl Polytope {
    pub fn facets(&self) -> &[(Point, f64)] {
        &self.facets
    }
}

/// A bounded open region of `R^N`.
///
/// Domains are immutable after construction and `Sync`, so any number of
/// walkers can query them concurrently.
#[derive(Clone, Debug)]
pub struct Domain {
    shape: Shape,
    dim: usize,
}

fn positive(value: f64) -> bool {
    value.is_finite() && value > 0.0
}

impl Domain {
    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        if !positive(radius) {
            return Err(Error::InvalidDomain("ball radius must be positive"));
        }
        Ok(Self {
            dim: center.dim(),
            shape: Shape::Ball { center, radius },
        })
    }

    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(Point::zeros(dim)?, 1.0)
    }

    pub fn cuboid(min: Point, max: Point) -> Result<Self> {
        max.check_dim(min.dim())?;
        if min.as_slice().iter().zip(max.as_slice()).any(|(a, b)| a >= b) {
            return Err(Error::InvalidDomain("box corners must be strictly ordered per axis"));
        }
        Ok(Self {
            dim: min.dim(),
            shape: Shape::Box { min, max },
        })
    }

    pub fn unit_cube(dim: usize) -> Result<Self> {
        let max = Point::new(&[1.0; MAX_DIM][..dim.min(MAX_DIM)])?;
        Self::cuboid(Point::zeros(dim)?, max)
    }

    pub fn annulus(center: Point, inner_radius: f64, outer_radius: f64) -> Result<Self> {
        if !positive(inner_radius) || !positive(outer_radius) || inner_radius >= outer_radius {
            return Err(Error::InvalidDomain(
                "annulus radii must satisfy 0 < inner < outer",
            ));
        }
        Ok(Self {
            dim: center.dim(),
            shape: Shape::Annulus {
                center,
                inner_radius,
                outer_radius,
            },
        })
    }

    pub fn punctured_ball(center: Point, radius: f64) -> Result<Self> {
        if !positive(radius) {
            return Err(Error::InvalidDomain("ball radius must be positive"));
        }
        Ok(Self {
            dim: center.dim(),
            shape: Shape::PuncturedBall { center, radius },
        })
    }

    /// Builds the polytope `{x : n_i . x < b_i}` from `(n_i, b_i)` pairs.
    ///
    /// Boundedness and a nonempty interior are verified by enumerating
    /// vertices and extreme rays of the recession cone, which is
    /// combinatorial in the number of facets; inputs needing more than two
    /// million subsets are rejected.
    pub fn halfspaces(facets: Vec<(Point, f64)>) -> Result<Self> {
        let first = facets
            .first()
            .ok_or(Error::InvalidDomain("polytope needs at least one facet"))?;
        let dim = first.0.dim();
        let mut unit = Vec::with_capacity(facets.len());
        for (normal, offset) in facets {
            normal.check_dim(dim)?;
            if !offset.is_finite() {
                return Err(Error::NonFinite);
            }
            let len = normal.norm();
            if !positive(len) {
                return Err(Error::InvalidDomain("facet normal must be nonzero"));
            }
            unit.push((normal * (1.0 / len), offset / len));
        }
        let diameter = linalg::validate_polytope(&unit, dim)?;
        Ok(Self {
            dim,
            shape: Shape::HalfspaceIntersection(Polytope {
                facets: unit,
                diameter,
            }),
        })
    }

    /// `outer \ closure(hole)`. The hole must be a primitive shape; nest
    /// differences through the first argument to cut several holes.
    ///
    /// Nonemptiness and connectedness of the result are not verified.
    pub fn difference(outer: Domain, hole: Domain) -> Result<Self> {
        if outer.dim != hole.dim {
            return Err(Error::DimensionMismatch {
                expected: outer.dim,
                found: hole.dim,
            });
        }
        if matches!(hole.shape, Shape::Difference(..)) {
            return Err(Error::InvalidDomain(
                "the subtrahend of a difference must be a primitive shape",
            ));
        }
        Ok(Self {
            dim: outer.dim,
            shape: Shape::Difference(Box::new(outer), Box::new(hole)),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// Upper bound on the diameter; exact for every shape except
    /// differences, which report the diameter of the outer shape.
    pub fn diameter(&self) -> f64 {
        match &self.shape {
            Shape::Ball { radius, .. } | Shape::PuncturedBall { radius, .. } => 2.0 * radius,
            Shape::Box { min, max } => (*max - *min).norm(),
            Shape::Annulus { outer_radius, .. } => 2.0 * outer_radius,
            Shape::HalfspaceIntersection(p) => p.diameter,
            Shape::Difference(a, _) => a.diameter(),
        }
    }

    /// Signed distance: negative inside, zero on the boundary, positive
    /// outside. The sign is exact; see the module docs for the magnitude.
    #[inline]
    pub fn signed_distance(&self, x: &Point) -> f64 {
        match &self.shape {
            Shape::Ball { center, radius } => x.distance(center) - radius,
            Shape::Box { min, max } => {
                let mut inside_max = f64::NEG_INFINITY;
                let mut outside_sq = 0.0;
                let mut outside = false;
                for i in 0..self.dim {
                    let q = (min[i] - x[i]).max(x[i] - max[i]);
                    if q > 0.0 {
                        outside = true;
                        outside_sq += q * q;
                    }
                    inside_max = inside_max.max(q);
                }
                if outside {
                    libm::sqrt(outside_sq)
                } else {
                    inside_max
                }
            }
            Shape::Annulus {
                center,
                inner_radius,
                outer_radius,
            } => {
                let rho = x.distance(center);
                (inner_radius - rho).max(rho - outer_radius)
            }
            Shape::PuncturedBall { center, radius } => {
                let rho = x.distance(center);
                if rho < *radius {
                    -(radius - rho).min(rho)
                } else {
                    rho - radius
                }
            }
            Shape::HalfspaceIntersection(p) => p
                .facets
                .iter()
                .map(|(n, b)| n.dot(x) - b)
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Difference(a, b) => a.signed_distance(x).max(-b.signed_distance(x)),
        }
    }

    /// Interior depth used by the walk hot loop: positive inside, `<= 0`
    /// elsewhere. No dimension check.
    #[inline]
    pub(crate) fn depth(&self, x: &Point) -> f64 {
        -self.signed_distance(x)
    }

    pub fn contains(&self, x: &Point) -> Result<bool> {
        x.check_dim(self.dim)?;
        Ok(self.signed_distance(x) < 0.0)
    }

    /// Distance from an interior point to the boundary (a lower bound for
    /// differences, exact otherwise).
    pub fn distance_to_boundary(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim)?;
        let depth = self.depth(x);
        if depth > 0.0 {
            Ok(depth)
        } else {
            Err(Error::Exterior)
        }
    }

    /// A point of the boundary close to the interior point `x`.
    ///
    /// For primitive shapes this is the exact nearest boundary point
    /// (`K = 1`). For differences the candidate comes from whichever
    /// component limits the depth and is then moved onto the boundary of the
    /// difference by bisection along the segment from `x`, so the distance is
    /// at most the distance to that component's boundary.
    pub fn nearest_boundary_point(&self, x: &Point) -> Result<Point> {
        self.distance_to_boundary(x)?;
        Ok(self.project_interior(x))
    }

    pub(crate) fn project_interior(&self, x: &Point) -> Point {
        match &self.shape {
            Shape::Difference(a, b) => {
                let depth_a = a.depth(x);
                let gap_b = b.signed_distance(x);
                let candidate = if depth_a <= gap_b {
                    a.project_interior(x)
                } else {
                    b.closest_boundary_point(x)
                };
                let candidate = self.push_outside(x, candidate);
                self.bisect_to_boundary(x, &candidate)
            }
            _ => {
                let q = self.closest_boundary_point(x);
                self.push_outside(x, q)
            }
        }
    }

    /// Moves a boundary candidate `q` of interior `x` outward along the ray
    /// from `x` by a few ulps until rounding no longer leaves it inside.
    fn push_outside(&self, x: &Point, q: Point) -> Point {
        let ray = q - *x;
        let mut out = q;
        let mut stretch = f64::EPSILON;
        while self.signed_distance(&out) < 0.0 && stretch < 1e-6 {
            out = *x + ray * (1.0 + stretch);
            stretch *= 2.0;
        }
        out
    }

    /// Closest boundary point of a primitive shape from either side.
    fn closest_boundary_point(&self, x: &Point) -> Point {
        let radial = |center: &Point, radius: f64| -> Point {
            let dir = (*x - *center)
                .normalized()
                .unwrap_or_else(|| Point::basis(self.dim, 0).expect("valid dim"));
            *center + dir * radius
        };
        match &self.shape {
            Shape::Ball { center, radius } => radial(center, *radius),
            Shape::Box { min, max } => {
                let mut p = *x;
                if self.signed_distance(x) > 0.0 {
                    for (i, c) in p.as_mut_slice().iter_mut().enumerate() {
                        *c = c.clamp(min[i], max[i]);
                    }
                } else {
                    let mut best = (f64::INFINITY, 0, 0.0);
                    for i in 0..self.dim {
                        if x[i] - min[i] < best.0 {
                            best = (x[i] - min[i], i, min[i]);
                        }
                        if max[i] - x[i] < best.0 {
                            best = (max[i] - x[i], i, max[i]);
                        }
                    }
                    p.as_mut_slice()[best.1] = best.2;
                }
                p
            }
            Shape::Annulus {
                center,
                inner_radius,
                outer_radius,
            } => {
                let rho = x.distance(center);
                if (rho - inner_radius).abs() <= (outer_radius - rho).abs() {
                    radial(center, *inner_radius)
                } else {
                    radial(center, *outer_radius)
                }
            }
            Shape::PuncturedBall { center, radius } => {
                let rho = x.distance(center);
                if rho <= radius - rho {
                    *center
                } else {
                    radial(center, *radius)
                }
            }
            Shape::HalfspaceIntersection(p) => {
                if self.signed_distance(x) > 0.0 {
                    dykstra_projection(&p.facets, x)
                } else {
                    let (n, b) = p
                        .facets
                        .iter()
                        .min_by(|(n1, b1), (n2, b2)| {
                            (b1 - n1.dot(x)).total_cmp(&(b2 - n2.dot(x)))
                        })
                        .expect("validated polytope has facets");
                    *x + *n * (b - n.dot(x))
                }
            }
            Shape::Difference(..) => self.project_interior(x),
        }
    }

    /// Given interior `x` and exterior `outside`, returns an exterior point
    /// on the segment within floating-point resolution of the boundary.
    fn bisect_to_boundary(&self, x: &Point, outside: &Point) -> Point {
        if self.signed_distance(outside) < 0.0 {
            return *outside;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let delta = *outside - *x;
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.signed_distance(&(*x + delta * mid)) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if hi == 1.0 {
            *outside
        } else {
            *x + delta * hi
        }
    }
}

/// Euclidean projection onto `{y : n_i . y <= b_i}` by Dykstra's
/// alternating projections.
fn dykstra_projection(facets: &[(Point, f64)], x: &Point) -> Point {
    let mut y = *x;
    let mut increments = alloc::vec![Point::zeros(x.dim()).expect("valid dim"); facets.len()];
    for _ in 0..DYKSTRA_SWEEPS {
        let before = y;
        for ((n, b), inc) in facets.iter().zip(increments.iter_mut()) {
            let z = y + *inc;
            let violation = (n.dot(&z) - b).max(0.0);
            let projected = z - *n * violation;
            *inc = z - projected;
            y = projected;
        }
        if before.distance(&y) <= 1e-15 * (1.0 + y.norm()) {
            break;
        }
    }
    y
}

/// A finite circular cone `{tip + v : 0 <= v.axis <= height, angle(v, axis) <= half_angle}`.
#[derive(Clone, Copy, Debug)]
pub struct Cone {
    tip: Point,
    axis: Point,
    half_angle: f64,
    height: f64,
}

impl Cone {
    pub fn new(tip: Point, axis: Point, half_angle: f64, height: f64) -> Result<Self> {
        axis.check_dim(tip.dim())?;
        let axis = axis
            .normalized()
            .ok_or(Error::InvalidCone("axis must be nonzero"))?;
        if !(half_angle > 0.0 && half_angle < FRAC_PI_2) {
            return Err(Error::InvalidCone("half angle must lie in (0, pi/2)"));
        }
        if !positive(height) {
            return Err(Error::InvalidCone("height must be positive"));
        }
        Ok(Self {
            tip,
            axis,
            half_angle,
            height,
        })
    }

    pub fn tip(&self) -> &Point {
        &self.tip
    }

    pub fn axis(&self) -> &Point {
        &self.axis
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    /// The ratio `R` such that for small `rho` the ball of radius `R rho`
    /// centred on the axis at distance `rho (1 + R)` from the tip touches the
    /// lateral surface: `R / (1 + R) = sin(half_angle)`.
    pub fn ratio(&self) -> f64 {
        let s = libm::sin(self.half_angle);
        s / (1.0 - s)
    }

    /// Center and radius of the inscribed ball used with scale `rho`.
    pub fn inscribed_ball(&self, rho: f64) -> (Point, f64) {
        let r = self.ratio();
        (self.tip + self.axis * (rho * (1.0 + r)), r * rho)
    }

    /// Membership in the closed cone.
    pub fn contains(&self, x: &Point) -> bool {
        let v = *x - self.tip;
        let along = v.dot(&self.axis);
        if !(0.0..=self.height).contains(&along) {
            return false;
        }
        let radial = (v - self.axis * along).norm();
        radial <= along * libm::tan(self.half_angle)
    }
}

/// `R` for a cone; see [`Cone::ratio`].
pub fn cone_parameters(cone: &Cone) -> f64 {
    cone.ratio()
}

mod linalg {
    //! Tiny dense elimination routines for polytope validation.

    use super::*;

    const TOL: f64 = 1e-10;

    type Matrix = [[f64; MAX_DIM + 1]; MAX_DIM + 1];

    /// Row-reduces the first `rows` rows of `m` over `cols` columns in place
    /// (partial pivoting) and returns the pivot columns.
    fn row_reduce(m: &mut Matrix, rows: usize, cols: usize) -> ([usize; MAX_DIM + 1], usize) {
        let mut pivots = [0usize; MAX_DIM + 1];
        let mut rank = 0;
        for col in 0..cols {
            if rank == rows {
                break;
            }
            let (best, val) = (rank..rows)
                .map(|r| (r, m[r][col].abs()))
                .fold((rank, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            if val <= TOL {
                continue;
            }
            m.swap(rank, best);
            let p = m[rank][col];
            for v in &mut m[rank][..=cols] {
                *v /= p;
            }
            let pivot_row = m[rank];
            for (r, row) in m.iter_mut().enumerate().take(rows) {
                let f = row[col];
                if r != rank && f != 0.0 {
                    for (v, pv) in row[..=cols].iter_mut().zip(&pivot_row[..=cols]) {
                        *v -= f * pv;
                    }
                }
            }
            pivots[rank] = col;
            rank += 1;
        }
        (pivots, rank)
    }

    fn load(facets: &[(Point, f64)], subset: &[usize], dim: usize) -> Matrix {
        let mut m = [[0.0; MAX_DIM + 1]; MAX_DIM + 1];
        for (row, &i) in subset.iter().enumerate() {
            m[row][..dim].copy_from_slice(facets[i].0.as_slice());
            m[row][dim] = facets[i].1;
        }
        m
    }

    fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
        if k > n {
            return Ok(());
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            f(&idx)?;
            let mut i = k;
            while i > 0 && idx[i - 1] == i - 1 + n - k {
                i -= 1;
            }
            if i == 0 {
                return Ok(());
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    /// Rank of the normals by Gram-Schmidt accumulation.
    fn normal_rank(facets: &[(Point, f64)]) -> usize {
        let mut basis: Vec<Point> = Vec::new();
        for (n, _) in facets {
            let mut r = *n;
            for b in &basis {
                r = r - *b * r.dot(b);
            }
            if r.norm() > TOL {
                basis.push(r * (1.0 / r.norm()));
            }
        }
        basis.len()
    }

    fn binomial(n: usize, k: usize) -> u64 {
        let k = k.min(n.saturating_sub(k));
        let mut acc: u64 = 1;
        for i in 0..k {
            acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
        }
        acc
    }

    /// Checks that the polytope is bounded with nonempty interior and
    /// returns its diameter.
    pub(super) fn validate_polytope(facets: &[(Point, f64)], dim: usize) -> Result<f64> {
        let m = facets.len();
        if m < dim + 1 {
            return Err(Error::InvalidDomain(
                "a bounded polytope needs at least dim + 1 facets",
            ));
        }
        if binomial(m, dim) > MAX_VALIDATION_SUBSETS
            || binomial(m, dim - 1) > MAX_VALIDATION_SUBSETS
        {
            return Err(Error::InvalidDomain("too many facets to validate"));
        }
        let rank = normal_rank(facets);
        if rank < dim {
            return Err(Error::InvalidDomain("polytope is unbounded (normals do not span)"));
        }

        // The recession cone {d : n_i . d <= 0} is pointed; it is trivial iff
        // none of its candidate extreme rays (dim - 1 active constraints) lies in it.
        for_each_subset(m, dim - 1, |s| {
            let mut mm = load(facets, s, dim);
            let (pivots, r) = row_reduce(&mut mm, dim - 1, dim);
            if r != dim - 1 {
                return Ok(());
            }
            let mut is_pivot = [false; MAX_DIM];
            for &p in &pivots[..r] {
                is_pivot[p] = true;
            }
            let free = (0..dim).find(|&c| !is_pivot[c]).expect("one free column");
            let mut d = Point::zeros(dim)?;
            d.as_mut_slice()[free] = 1.0;
            for (row, &p) in pivots[..r].iter().enumerate() {
                d.as_mut_slice()[p] = -mm[row][free];
            }
            let scale = d.norm();
            let dots = facets.iter().map(|(n, _)| n.dot(&d) / scale);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in dots {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi <= TOL || lo >= -TOL {
                return Err(Error::InvalidDomain("polytope is unbounded"));
            }
            Ok(())
        })?;

        let mut vertices: Vec<Point> = Vec::new();
        for_each_subset(m, dim, |s| {
            let mut mm = load(facets, s, dim);
            let (_, r) = row_reduce(&mut mm, dim, dim);
            if r != dim {
                return Ok(());
            }
            let mut v = Point::zeros(dim)?;
            for (row, c) in v.as_mut_slice().iter_mut().enumerate() {
                *c = mm[row][dim];
            }
            let feasible = facets
                .iter()
                .all(|(n, b)| n.dot(&v) - b <= TOL * (1.0 + b.abs()));
            if feasible {
                vertices.push(v);
            }
            Ok(())
        })?;
        if vertices.is_empty() {
            return Err(Error::InvalidDomain("polytope is empty"));
        }
        let mut centroid = Point::zeros(dim)?;
        for v in &vertices {
            centroid = centroid + *v;
        }
        centroid = centroid * (1.0 / vertices.len() as f64);
        let slack = facets
            .iter()
            .map(|(n, b)| n.dot(&centroid) - b)
            .fold(f64::NEG_INFINITY, f64::max);
        if slack >= -TOL {
            return Err(Error::InvalidDomain("polytope has empty interior"));
        }
        let mut diameter: f64 = 0.0;
        for (i, a) in vertices.iter().enumerate() {
            for b in &vertices[i + 1..] {
                diameter = diameter.max(a.distance(b));
            }
        }
        Ok(diameter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::derive_stream;

    fn p(c: &[f64]) -> Point {
        Point::new(c).unwrap()
    }

    fn shapes_2d() -> Vec<Domain> {
        vec![
            Domain::unit_ball(2).unwrap(),
            Domain::cuboid(p(&[0.0, 0.0]), p(&[1.0, 2.0])).unwrap(),
            Domain::annulus(p(&[0.0, 0.0]), 0.5, 1.0).unwrap(),
            Domain::punctured_ball(p(&[0.0, 0.0]), 1.0).unwrap(),
            triangle(),
        ]
    }

    fn triangle() -> Domain {
        Domain::halfspaces(vec![
            (p(&[-1.0, 0.0]), 0.0),
            (p(&[0.0, -1.0]), 0.0),
            (p(&[1.0, 1.0]), 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn membership_examples() {
        let ball = Domain::unit_ball(2).unwrap();
        assert!(ball.contains(&p(&[0.0, 0.0])).unwrap());
        assert!(!ball.contains(&p(&[1.0, 0.0])).unwrap());
        let punctured = Domain::punctured_ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert!(!punctured.contains(&p(&[0.0, 0.0])).unwrap());
        assert!(punctured.contains(&p(&[0.1, 0.0])).unwrap());
        assert!(matches!(
            ball.contains(&p(&[0.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let ball = Domain::unit_ball(2).unwrap();
        assert_eq!(ball.distance_to_boundary(&p(&[0.5, 0.0])).unwrap(), 0.5);
        let ann = Domain::annulus(p(&[0.0, 0.0]), 0.5, 1.0).unwrap();
        let d = ann.distance_to_boundary(&p(&[0.7, 0.0])).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        let punctured = Domain::punctured_ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(punctured.distance_to_boundary(&p(&[0.1, 0.0])).unwrap(), 0.1);
        assert_eq!(
            ball.distance_to_boundary(&p(&[2.0, 0.0])),
            Err(Error::Exterior)
        );
    }

    #[test]
    fn projection_examples() {
        let ball = Domain::unit_ball(2).unwrap();
        assert_eq!(
            ball.nearest_boundary_point(&p(&[0.5, 0.0])).unwrap(),
            p(&[1.0, 0.0])
        );
        let square = Domain::unit_cube(2).unwrap();
        assert_eq!(
            square.nearest_boundary_point(&p(&[0.1, 0.5])).unwrap(),
            p(&[0.0, 0.5])
        );
        let punctured = Domain::punctured_ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert_eq!(
            punctured.nearest_boundary_point(&p(&[0.1, 0.0])).unwrap(),
            p(&[0.0, 0.0])
        );
        assert!(ball.nearest_boundary_point(&p(&[1.5, 0.0])).is_err());
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(Domain::ball(p(&[0.0]), 0.0).is_err());
        assert!(Domain::ball(p(&[0.0]), f64::NAN).is_err());
        assert!(Domain::cuboid(p(&[0.0, 1.0]), p(&[1.0, 1.0])).is_err());
        assert!(Domain::annulus(p(&[0.0]), 1.0, 0.5).is_err());
        // A wedge is unbounded.
        assert!(Domain::halfspaces(vec![
            (p(&[-1.0, 0.0]), 0.0),
            (p(&[0.0, -1.0]), 0.0),
            (p(&[1.0, -1.0]), 1.0),
        ])
        .is_err());
        // A strip is unbounded.
        assert!(Domain::halfspaces(vec![
            (p(&[1.0, 0.0]), 1.0),
            (p(&[-1.0, 0.0]), 1.0),
            (p(&[-1.0, 0.0]), 2.0),
        ])
        .is_err());
        // Empty intersection.
        assert!(Domain::halfspaces(vec![
            (p(&[1.0, 0.0]), -1.0),
            (p(&[-1.0, 0.0]), -1.0),
            (p(&[0.0, 1.0]), 1.0),
            (p(&[0.0, -1.0]), 1.0),
        ])
        .is_err());
        let ball = Domain::unit_ball(2).unwrap();
        let nested = Domain::difference(ball.clone(), ball.clone()).unwrap();
        assert!(Domain::difference(ball, nested).is_err());
    }

    #[test]
    fn polytope_metadata() {
        let tri = triangle();
        assert!((tri.diameter() - 2f64.sqrt()).abs() < 1e-12);
        let interval = Domain::halfspaces(vec![(p(&[1.0]), 1.0), (p(&[-1.0]), 1.0)]).unwrap();
        assert_eq!(interval.diameter(), 2.0);
        assert!(Domain::halfspaces(vec![(p(&[1.0]), 1.0), (p(&[2.0]), 1.0)]).is_err());
        let d = tri.distance_to_boundary(&p(&[0.25, 0.25])).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn balls_of_boundary_radius_stay_inside() {
        let mut stream = derive_stream(11, 0);
        for domain in shapes_2d() {
            let mut checked = 0;
            while checked < 300 {
                let x = stream.sample_unit_ball(2) * 1.2 + p(&[0.3, 0.5]);
                let Ok(d) = domain.distance_to_boundary(&x) else {
                    continue;
                };
                checked += 1;
                for _ in 0..30 {
                    let u = stream.sample_unit_sphere(2);
                    let t = d * (1.0 - 1e-9) * (2.0 * stream.uniform() - 1.0);
                    assert!(domain.contains(&(x + u * t)).unwrap(), "{domain:?} {x:?}");
                }
            }
        }
    }

    #[test]
    fn nearest_point_matches_distance_for_primitives() {
        let mut stream = derive_stream(12, 0);
        for domain in shapes_2d() {
            let mut checked = 0;
            while checked < 500 {
                let x = stream.sample_unit_ball(2) * 1.2 + p(&[0.3, 0.5]);
                let Ok(d) = domain.distance_to_boundary(&x) else {
                    continue;
                };
                checked += 1;
                let q = domain.nearest_boundary_point(&x).unwrap();
                assert!(!domain.contains(&q).unwrap());
                assert!((q.distance(&x) - d).abs() < 1e-12, "{domain:?} {x:?}");
                assert!(domain.signed_distance(&q).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn difference_distance_is_a_safe_lower_bound() {
        let square = Domain::cuboid(p(&[-1.0, -1.0]), p(&[1.0, 1.0])).unwrap();
        let holes = [
            Domain::ball(p(&[0.3, 0.2]), 0.4).unwrap(),
            Domain::cuboid(p(&[-0.8, -0.8]), p(&[-0.2, 0.0])).unwrap(),
            Domain::halfspaces(vec![
                (p(&[-1.0, 0.0]), -0.1),
                (p(&[0.0, -1.0]), 0.5),
                (p(&[1.0, 1.0]), 0.6),
            ])
            .unwrap(),
        ];
        let mut stream = derive_stream(13, 0);
        for (k, hole) in holes.into_iter().enumerate() {
            let exact = k < 2;
            let domain = Domain::difference(square.clone(), hole).unwrap();
            let mut checked = 0;
            while checked < 100 {
                let x = stream.sample_unit_ball(2) * 1.4;
                let Ok(d) = domain.distance_to_boundary(&x) else {
                    continue;
                };
                checked += 1;
                for _ in 0..100 {
                    let y = x + stream.sample_unit_ball(2) * d;
                    assert!(domain.contains(&y).unwrap());
                }
                let q = domain.nearest_boundary_point(&x).unwrap();
                assert!(!domain.contains(&q).unwrap());
                // The boundary is at least `d` away; ball and box gaps are exact.
                assert!(d <= q.distance(&x) * (1.0 + 1e-9) + 1e-12, "{x:?} {q:?} {d}");
                if exact {
                    assert!(q.distance(&x) <= d * (1.0 + 1e-9) + 1e-12, "{x:?} {q:?} {d}");
                }
                assert!(domain.signed_distance(&q).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn dykstra_projects_onto_polytope_corner() {
        let tri = triangle();
        if let Shape::HalfspaceIntersection(poly) = tri.shape() {
            let q = dykstra_projection(poly.facets(), &p(&[-1.0, -2.0]));
            assert!(q.distance(&p(&[0.0, 0.0])) < 1e-12);
            let q = dykstra_projection(poly.facets(), &p(&[1.0, 1.0]));
            assert!(q.distance(&p(&[0.5, 0.5])) < 1e-12);
        } else {
            unreachable!();
        }
    }

    #[test]
    fn cone_ratio_examples() {
        let tip = p(&[0.0, 0.0]);
        let axis = p(&[1.0, 0.0]);
        let c = Cone::new(tip, axis, core::f64::consts::FRAC_PI_6, 1.0).unwrap();
        assert!((cone_parameters(&c) - 1.0).abs() < 1e-12);
        let c = Cone::new(tip, axis, libm::asin(1.0 / 3.0), 1.0).unwrap();
        assert!((c.ratio() - 0.5).abs() < 1e-12);
        let c = Cone::new(tip, axis, FRAC_PI_2 - 1e-9, 1.0).unwrap();
        assert!(c.ratio() > 1e17);
        assert!(Cone::new(tip, axis, FRAC_PI_2, 1.0).is_err());
        assert!(Cone::new(tip, axis, 0.0, 1.0).is_err());
        assert!(Cone::new(tip, axis, 0.3, -1.0).is_err());
        assert!(Cone::new(tip, p(&[0.0, 0.0]), 0.3, 1.0).is_err());
    }

    #[test]
    fn inscribed_ball_touches_cone_wall() {
        let c = Cone::new(p(&[1.0, 0.0, 0.0]), p(&[2.0, 0.0, 0.0]), 0.6, 1.0).unwrap();
        let (z0, radius) = c.inscribed_ball(0.01);
        assert!((z0.distance(c.tip()) - 0.01 * (1.0 + c.ratio())).abs() < 1e-15);
        let mut stream = derive_stream(5, 0);
        for _ in 0..2000 {
            let u = stream.sample_unit_sphere(3);
            assert!(c.contains(&(z0 + u * (radius * (1.0 - 1e-9)))));
        }
        // Slightly larger balls leave the cone.
        let outside = (0..2000).any(|_| {
            let u = stream.sample_unit_sphere(3);
            !c.contains(&(z0 + u * (radius * 1.05)))
        });
        assert!(outside);
    }
}
