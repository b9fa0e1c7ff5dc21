use rand::Rng;

use crate::params::squared_distance;

const MAX_LLOYD_ITERATIONS: usize = 100;
const CENTER_MOTION_TOL: f64 = 1e-9;

/// Lloyd's algorithm with k-means++ seeding. Returns `k` centers.
pub fn kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(k >= 1 && k <= points.len());
    let dim = points[0].len();

    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = d2.iter().rposition(|d| *d > 0.0).unwrap_or(0);
            for (i, d) in d2.iter().enumerate() {
                if *d > 0.0 && target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[next].clone());
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, centers.last().unwrap()));
        }
    }

    let mut labels = vec![0usize; points.len()];
    for _ in 0..MAX_LLOYD_ITERATIONS {
        for (label, p) in labels.iter_mut().zip(points) {
            *label = nearest(p, &centers);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (&l, p) in labels.iter().zip(points) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut motion = 0.0f64;
        for c in 0..k {
            // Empty clusters keep their previous center.
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            motion = motion.max(squared_distance(&new, &centers[c]).sqrt());
            centers[c] = new;
        }
        if motion < CENTER_MOTION_TOL {
            break;
        }
    }
    centers
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = squared_distance(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Largest `k ≤ |points|` whose K-means centers are pairwise farther apart
/// than `min_separation`; returns those centers. Never empty.
pub fn constrained_kmeans<R: Rng + ?Sized>(points: &[Vec<f64>], min_separation: f64, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(!points.is_empty(), "constrained_kmeans needs at least one point");
    let limit = min_separation * min_separation;
    for k in (2..=points.len()).rev() {
        let centers = kmeans(points, k, rng);
        let separated =
            centers.iter().enumerate().all(|(i, a)| centers[i + 1..].iter().all(|b| squared_distance(a, b) > limit));
        if separated {
            return centers;
        }
    }
    kmeans(points, 1, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand_distr::{Distribution, Normal};

    fn blobs() -> (Vec<Vec<f64>>, [Vec<f64>; 2]) {
        let mut rng = stream(5, 0);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let mut pts = Vec::new();
        for c in [[0.2, 0.3], [0.7, 0.8]] {
            for _ in 0..20 {
                pts.push(vec![c[0] + noise.sample(&mut rng), c[1] + noise.sample(&mut rng)]);
            }
        }
        // Brute-force blob means.
        let mean = |r: std::ops::Range<usize>| {
            let n = r.len() as f64;
            let s = pts[r].iter().fold(vec![0.0, 0.0], |a, p| vec![a[0] + p[0], a[1] + p[1]]);
            vec![s[0] / n, s[1] / n]
        };
        let means = [mean(0..20), mean(20..40)];
        (pts, means)
    }

    #[test]
    fn two_blobs_give_two_centers() {
        let (pts, means) = blobs();
        let mut centers = constrained_kmeans(&pts, 0.3, &mut stream(9, 1));
        assert_eq!(centers.len(), 2);
        centers.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for (c, m) in centers.iter().zip(&means) {
            assert!(squared_distance(c, m).sqrt() < 1e-9);
        }
    }

    #[test]
    fn identical_points_give_one_center() {
        let pts = vec![vec![0.5, 0.5]; 10];
        let centers = constrained_kmeans(&pts, 0.01, &mut stream(1, 1));
        assert_eq!(centers, vec![vec![0.5, 0.5]]);
    }

    #[test]
    fn centers_respect_separation() {
        let mut rng = stream(77, 0);
        let pts: Vec<Vec<f64>> = (0..50).map(|_| vec![rng.random(), rng.random(), rng.random()]).collect();
        let centers = constrained_kmeans(&pts, 0.23, &mut stream(77, 1));
        assert!(!centers.is_empty());
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                assert!(squared_distance(&centers[i], &centers[j]).sqrt() > 0.23);
            }
        }
    }
}
