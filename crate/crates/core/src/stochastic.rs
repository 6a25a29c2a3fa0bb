//! Reproducible random streams and exact samplers on the unit ball and sphere.
//!
//! Streams are counter-based: a ChaCha8 keystream keyed by
//! `(master_seed, lane)` and positioned on the 64-bit ChaCha stream
//! `stream_index`. Any `(master_seed, lane, stream_index)` triple can be
//! materialised independently of every other, so walks can be re-run one at
//! a time and parallel execution needs no coordination.
//!
//! Gaussian variates come from `rand_distr`'s ziggurat sampler, which is a
//! deterministic function of the stream's output words.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Open01, StandardNormal};

use crate::point::Point;

/// One independent random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    lane: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

/// The stream used by walk `walk_index` of an experiment seeded with
/// `master_seed` (lane 0).
pub fn derive_stream(master_seed: u64, walk_index: u64) -> RngStream {
    RngStream::new(master_seed, 0, walk_index)
}

impl RngStream {
    /// A stream keyed by `(master_seed, lane)` at position `stream_index`.
    ///
    /// Lanes partition experiments that need several families of streams
    /// (one lane per grid point, per nested Monte Carlo stage, ...).
    pub fn new(master_seed: u64, lane: u64, stream_index: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&lane.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            lane,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn lane(&self) -> u64 {
        self.lane
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.sample(Open01)
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on the unit sphere of `R^dim`: a normalised Gaussian vector.
    /// The (probability zero) zero vector is redrawn.
    ///
    /// `dim` must lie in `1..=16`.
    pub fn sample_unit_sphere(&mut self, dim: usize) -> Point {
        let mut g = Point::zeros(dim).expect("dimension in 1..=16");
        loop {
            for c in g.as_mut_slice() {
                *c = self.normal();
            }
            if let Some(u) = g.normalized() {
                return u;
            }
        }
    }

    /// Uniform on the open unit ball of `R^dim`: a uniform direction scaled
    /// by `U^(1/dim)`. Draws that round to `|w| >= 1` are rejected.
    pub fn sample_unit_ball(&mut self, dim: usize) -> Point {
        loop {
            let dir = self.sample_unit_sphere(dim);
            let radius = libm::pow(self.uniform(), 1.0 / dim as f64);
            let w = dir * radius;
            if w.norm_squared() < 1.0 {
                return w;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Mean and standard error of `f` over `n` draws.
    fn moment(n: usize, mut f: impl FnMut() -> f64) -> (f64, f64) {
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = f();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let var = (s2 / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn streams_are_deterministic() {
        let mut a = derive_stream(42, 7);
        let mut b = derive_stream(42, 7);
        for _ in 0..100 {
            assert_eq!(a.sample_unit_ball(3), b.sample_unit_ball(3));
        }
    }

    #[test]
    fn neighbouring_streams_differ() {
        for k in 0..1000u64 {
            let first = derive_stream(9, k).next_u64();
            assert_ne!(first, derive_stream(9, k + 1).next_u64());
            assert_ne!(first, derive_stream(10, k).next_u64());
            assert_ne!(first, RngStream::new(9, 1, k).next_u64());
        }
    }

    #[test]
    fn ball_second_moment_2d() {
        let mut s = derive_stream(1, 0);
        let (m, se) = moment(1_000_000, || s.sample_unit_ball(2).norm_squared());
        assert!((m - 0.5).abs() < 4.0 * se, "{m} {se}");
    }

    #[test]
    fn ball_second_moment_3d() {
        let mut s = derive_stream(2, 0);
        let (m, se) = moment(1_000_000, || s.sample_unit_ball(3).norm_squared());
        assert!((m - 0.6).abs() < 4.0 * se, "{m} {se}");
    }

    #[test]
    fn ball_samples_are_strictly_inside() {
        let mut s = derive_stream(3, 0);
        for dim in 1..=16 {
            for _ in 0..2000 {
                assert!(s.sample_unit_ball(dim).norm() < 1.0);
            }
        }
    }

    #[test]
    fn sphere_samples_have_unit_norm() {
        let mut s = derive_stream(4, 0);
        for dim in 1..=16 {
            for _ in 0..2000 {
                assert!((s.sample_unit_sphere(dim).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sphere_coordinate_means_vanish() {
        let n = 1_000_000;
        for dim in [2usize, 3] {
            let mut s = derive_stream(5, dim as u64);
            let mut sums = [0.0; 3];
            for _ in 0..n {
                let w = s.sample_unit_sphere(dim);
                for (k, acc) in sums.iter_mut().enumerate().take(dim) {
                    *acc += w[k];
                }
            }
            let bound = 4.0 * (1.0 / dim as f64).sqrt() / (n as f64).sqrt();
            for acc in &sums[..dim] {
                assert!((acc / n as f64).abs() < bound);
            }
        }
    }

    #[test]
    fn sphere_first_coordinate_second_moment_3d() {
        let mut s = derive_stream(6, 0);
        let (m, se) = moment(1_000_000, || {
            let w = s.sample_unit_sphere(3);
            w[0] * w[0]
        });
        assert!((m - 1.0 / 3.0).abs() < 4.0 * se, "{m} {se}");
    }

    #[test]
    fn radius_power_is_uniform_ks() {
        // |w|^N ~ U(0,1); Kolmogorov-Smirnov at the 0.999 level.
        let n = 100_000;
        for dim in [1usize, 2, 3, 7] {
            let mut s = derive_stream(8, dim as u64);
            let mut v: Vec<f64> = (0..n)
                .map(|_| libm::pow(s.sample_unit_ball(dim).norm(), dim as f64))
                .collect();
            v.sort_by(f64::total_cmp);
            let d = v
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    let lo = x - i as f64 / n as f64;
                    let hi = (i + 1) as f64 / n as f64 - x;
                    lo.max(hi)
                })
                .fold(0.0, f64::max);
            // Asymptotic 0.999 quantile of sqrt(n) D is 1.9495.
            assert!(d * (n as f64).sqrt() < 1.9495, "dim {dim}: {d}");
        }
    }
}
