//! Uniform-grid index over one chain's archived samples, for
//! "is any archived sample closer than ε" queries.

use std::collections::HashMap;

use crate::params::squared_distance;

#[derive(Debug, Clone)]
pub struct ArchiveIndex {
    cell: f64,
    cells: HashMap<Vec<i64>, Vec<Vec<f64>>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    len: usize,
}

impl ArchiveIndex {
    /// `cell` should equal the query radius so only adjacent cells matter.
    pub fn new(dim: usize, cell: f64) -> Self {
        assert!(cell > 0.0);
        Self { cell, cells: HashMap::new(), lo: vec![f64::INFINITY; dim], hi: vec![f64::NEG_INFINITY; dim], len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn key(&self, x: &[f64]) -> Vec<i64> {
        x.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    pub fn insert(&mut self, x: &[f64]) {
        for (j, v) in x.iter().enumerate() {
            self.lo[j] = self.lo[j].min(*v);
            self.hi[j] = self.hi[j].max(*v);
        }
        let key = self.key(x);
        self.cells.entry(key).or_default().push(x.to_vec());
        self.len += 1;
    }

    /// Squared distance from `x` to the axis-aligned box of `key`.
    fn cell_gap2(&self, x: &[f64], key: &[i64]) -> f64 {
        x.iter()
            .zip(key)
            .map(|(v, k)| {
                let lo = *k as f64 * self.cell;
                let hi = lo + self.cell;
                let d = if *v < lo {
                    lo - v
                } else if *v > hi {
                    v - hi
                } else {
                    0.0
                };
                d * d
            })
            .sum()
    }

    /// True if some indexed sample lies strictly closer than `radius` to `x`.
    pub fn any_within(&self, x: &[f64], radius: f64) -> bool {
        if self.len == 0 {
            return false;
        }
        let r2 = radius * radius;
        let gap2: f64 = x
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let d = if *v < self.lo[j] {
                    self.lo[j] - v
                } else if *v > self.hi[j] {
                    v - self.hi[j]
                } else {
                    0.0
                };
                d * d
            })
            .sum();
        if gap2 >= r2 {
            return false;
        }
        let hit = |pts: &Vec<Vec<f64>>| pts.iter().any(|p| squared_distance(p, x) < r2);
        let dim = x.len();
        let span = ((radius / self.cell).ceil() as i64).max(1);
        let neighbours = (2 * span + 1).checked_pow(dim as u32);
        match neighbours {
            Some(nb) if (nb as usize) < self.cells.len() => {
                let base = self.key(x);
                let mut offset = vec![-span; dim];
                loop {
                    let key: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
                    if let Some(pts) = self.cells.get(&key) {
                        if self.cell_gap2(x, &key) < r2 && hit(pts) {
                            return true;
                        }
                    }
                    let mut d = 0;
                    while d < dim {
                        offset[d] += 1;
                        if offset[d] <= span {
                            break;
                        }
                        offset[d] = -span;
                        d += 1;
                    }
                    if d == dim {
                        return false;
                    }
                }
            }
            _ => self.cells.iter().any(|(key, pts)| self.cell_gap2(x, key) < r2 && hit(pts)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in proptest::collection::vec(proptest::collection::vec(0.0..1.0f64, 3), 1..200),
            q in proptest::collection::vec(-0.2..1.2f64, 3),
            radius in 0.01..0.4f64,
        ) {
            let mut idx = ArchiveIndex::new(3, radius);
            for p in &pts {
                idx.insert(p);
            }
            let brute = pts.iter().any(|p| squared_distance(p, &q) < radius * radius);
            prop_assert_eq!(idx.any_within(&q, radius), brute);
        }

        #[test]
        fn matches_brute_force_high_dim(
            pts in proptest::collection::vec(proptest::collection::vec(0.0..1.0f64, 8), 1..60),
            q in proptest::collection::vec(0.0..1.0f64, 8),
        ) {
            let mut idx = ArchiveIndex::new(8, 0.5);
            for p in &pts {
                idx.insert(p);
            }
            let brute = pts.iter().any(|p| squared_distance(p, &q) < 0.25);
            prop_assert_eq!(idx.any_within(&q, 0.5), brute);
        }
    }
}
