//! Dyadic intervals `[j 2^k, (j+1) 2^k)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// `2^k` as an exact double.
#[inline]
pub fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// A dyadic interval of length `2^scale` starting at `position * 2^scale`.
///
/// The derived ordering sorts by scale first, then position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    pub scale: i32,
    pub position: i64,
}

impl DyadicInterval {
    pub const fn new(scale: i32, position: i64) -> Self {
        Self { scale, position }
    }

    /// `[0, 1)`.
    pub const fn unit() -> Self {
        Self::new(0, 0)
    }

    /// The interval of the given scale containing `x` (half-open convention).
    pub fn containing(x: f64, scale: i32) -> Self {
        Self::new(scale, (x / pow2(scale)).floor() as i64)
    }

    pub fn len(&self) -> f64 {
        pow2(self.scale)
    }

    pub fn start(&self) -> f64 {
        self.position as f64 * self.len()
    }

    pub fn end(&self) -> f64 {
        (self.position + 1) as f64 * self.len()
    }

    pub fn center(&self) -> f64 {
        (self.position as f64 + 0.5) * self.len()
    }

    pub fn parent(&self) -> Self {
        Self::new(self.scale + 1, self.position.div_euclid(2))
    }

    pub fn left(&self) -> Self {
        Self::new(self.scale - 1, 2 * self.position)
    }

    pub fn right(&self) -> Self {
        Self::new(self.scale - 1, 2 * self.position + 1)
    }

    /// `+1` when this interval is the left half of its parent, `-1` otherwise.
    pub fn sign(&self) -> f64 {
        if self.position.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.start() <= x && x < self.end()
    }

    /// Whether `other ⊆ self`.
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        if other.scale > self.scale {
            return false;
        }
        let shift = (self.scale - other.scale) as u32;
        other.position >> shift == self.position
    }

    /// Ancestor `levels` generations up.
    pub fn ancestor(&self, levels: u32) -> Self {
        Self::new(self.scale + levels as i32, self.position >> levels)
    }

    /// All dyadic subintervals of `self` at the given (finer or equal) scale, left to right.
    pub fn descendants(&self, scale: i32) -> impl Iterator<Item = DyadicInterval> {
        let shift = (self.scale - scale).max(0) as u32;
        let first = self.position << shift;
        let count = 1i64 << shift;
        (first..first + count).map(move |p| DyadicInterval::new(scale, p))
    }

    /// Every dyadic subinterval `J ⊆ self` with `scale(J) >= min_scale`, coarse to fine.
    pub fn subintervals(&self, min_scale: i32) -> impl Iterator<Item = DyadicInterval> + '_ {
        (min_scale..=self.scale)
            .rev()
            .flat_map(move |k| self.descendants(k))
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scale, self.position)
    }
}

impl FromStr for DyadicInterval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (k, j) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("interval key `{s}` is not of the form k:j")))?;
        let scale = k
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad scale in `{s}`")))?;
        let position = j
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad position in `{s}`")))?;
        Ok(Self::new(scale, position))
    }
}

impl Serialize for DyadicInterval {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DyadicInterval {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
