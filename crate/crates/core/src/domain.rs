//! Axis-aligned box domains and the points that live inside them.

use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Closed interval `[low, high]` with `low < high`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "interval [{low}, {high}] has a non-finite bound"
            )));
        }
        if low >= high {
            return Err(Error::InvalidDomain(format!(
                "interval [{low}, {high}] must satisfy low < high"
            )));
        }
        Ok(Self { low, high })
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }
}

/// A box `[low_1, high_1] x ... x [low_d, high_d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    dims: Vec<Interval>,
}

impl Domain {
    pub fn new(dims: Vec<Interval>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDomain("domain has no dimensions".into()));
        }
        Ok(Self { dims })
    }

    /// Builds a domain from `[[low, high], ...]` pairs.
    pub fn from_bounds(bounds: &[[f64; 2]]) -> Result<Self> {
        let dims = bounds
            .iter()
            .map(|&[lo, hi]| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            dims: vec![
                Interval {
                    low: 0.0,
                    high: 1.0
                };
                dim.max(1)
            ],
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.dims
    }

    pub fn interval(&self, d: usize) -> Interval {
        self.dims[d]
    }

    pub fn center(&self) -> Point {
        Point(self.dims.iter().map(Interval::center).collect())
    }

    pub fn volume(&self) -> f64 {
        self.dims.iter().map(Interval::width).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims.len() && self.dims.iter().zip(x).all(|(iv, &v)| iv.contains(v))
    }

    /// Errors unless `x` has the right dimensionality and lies in the box.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dims.len() {
            return Err(Error::Dimension {
                expected: self.dims.len(),
                got: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        Ok(())
    }

    /// Index of the widest dimension, lowest index on ties.
    pub fn widest_dim(&self) -> usize {
        let mut best = 0;
        for (d, iv) in self.dims.iter().enumerate().skip(1) {
            if iv.width() > self.dims[best].width() {
                best = d;
            }
        }
        best
    }

    /// Splits along dimension `d` at `at`, returning `([.., at], [at, ..])`.
    ///
    /// Fails if `at` is not strictly inside the interval.
    pub fn split(&self, d: usize, at: f64) -> Result<(Domain, Domain)> {
        let iv = self.dims[d];
        if !(iv.low < at && at < iv.high) {
            return Err(Error::InvalidDomain(format!(
                "split coordinate {at} is not inside ({}, {})",
                iv.low, iv.high
            )));
        }
        let mut lower = self.clone();
        let mut upper = self.clone();
        lower.dims[d].high = at;
        upper.dims[d].low = at;
        Ok((lower, upper))
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.dim() == other.dim()
            && self
                .dims
                .iter()
                .zip(&other.dims)
                .all(|(a, b)| b.low <= a.low && a.high <= b.high)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, iv) in self.dims.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{}, {}]", iv.low, iv.high)?;
        }
        write!(f, "]")
    }
}

/// A coordinate vector. Dimensionality is checked against a [`Domain`] where it matters.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}
