use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stiffness-variation coefficients, one per model segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn distance(&self, other: &[f64]) -> f64 {
        euclidean(&self.0, other)
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl std::ops::Index<usize> for ParameterVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Axis-aligned search box, one closed interval per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SearchBox(pub Vec<[f64; 2]>);

impl SearchBox {
    pub fn unit(n: usize) -> Self {
        Self(vec![[0.0, 1.0]; n])
    }

    pub fn new(bounds: Vec<[f64; 2]>) -> Result<Self> {
        let b = Self(bounds);
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::InvalidConfig("search box has no dimensions".into()));
        }
        for (j, [lo, hi]) in self.0.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidConfig(format!("degenerate search interval [{lo}, {hi}] in dimension {j}")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn lo(&self, j: usize) -> f64 {
        self.0[j][0]
    }

    pub fn hi(&self, j: usize) -> f64 {
        self.0[j][1]
    }

    pub fn width(&self, j: usize) -> f64 {
        self.0[j][1] - self.0[j][0]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.0.len() && x.iter().zip(&self.0).all(|(v, [lo, hi])| *v >= *lo && *v <= *hi)
    }
}
