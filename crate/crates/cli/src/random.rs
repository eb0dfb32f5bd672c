//! Seeded random starts and random subspaces.

use feasibility::linalg::{AffineFrame, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng, dim: usize) -> Point {
    let coords: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    Point::new(coords).expect("gaussian samples are finite")
}

/// `count` points uniformly distributed in `B_radius(center)`.
pub fn uniform_ball(center: &Point, radius: f64, count: usize, seed: u64) -> Vec<Point> {
    let mut rng = rng(seed);
    let dim = center.dim();
    (0..count)
        .map(|_| {
            let dir = loop {
                if let Some(d) = gaussian(&mut rng, dim).normalized() {
                    break d;
                }
            };
            let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
            center.add_scaled(r, &dir)
        })
        .collect()
}

/// A uniformly random `k`-dimensional linear subspace of `R^dim` through `offset`.
pub fn subspace(rng: &mut impl Rng, offset: &Point, k: usize) -> AffineFrame {
    loop {
        let spanning: Vec<Point> = (0..k).map(|_| gaussian(rng, offset.dim())).collect();
        if let Ok(f) = AffineFrame::new(offset.clone(), &spanning) {
            if f.dim_subspace() == k {
                return f;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_samples_are_seeded_and_inside() {
        let c = Point::from_slice(&[1.0, -1.0, 0.5]).unwrap();
        let a = uniform_ball(&c, 0.5, 50, 3);
        assert_eq!(a, uniform_ball(&c, 0.5, 50, 3));
        assert!(a.iter().all(|p| p.distance(&c) <= 0.5));
        assert_ne!(a, uniform_ball(&c, 0.5, 50, 4));
    }

    #[test]
    fn subspaces_have_requested_dimension() {
        let mut r = rng(1);
        let f = subspace(&mut r, &Point::zeros(5), 3);
        assert_eq!(f.dim_subspace(), 3);
        assert_eq!(f.dim_ambient(), 5);
    }
}
