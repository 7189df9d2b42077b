//! Seeded ensembles and summary statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Independent stream for ensemble member `index`. Members never share
/// state, so results do not depend on evaluation order or thread count.
pub fn member_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Probability levels reported by [`Quantiles`].
pub const QUANTILE_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
}

impl Quantiles {
    /// Linear-interpolation quantiles. Empty input yields an empty report.
    pub fn of(samples: &[f64]) -> Self {
        let mut sorted: Vec<f64> = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let values = if sorted.is_empty() {
            Vec::new()
        } else {
            QUANTILE_LEVELS.iter().map(|q| quantile_sorted(&sorted, *q)).collect()
        };
        Self {
            levels: QUANTILE_LEVELS.to_vec(),
            values,
        }
    }
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let t = pos - lo as f64;
    sorted[lo] + t * (sorted[hi] - sorted[lo])
}

pub fn median(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

/// `[min, max]` of a sample, or `None` if empty.
pub fn band(samples: &[f64]) -> Option<(f64, f64)> {
    samples.iter().fold(None, |acc, &x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}

/// `|a - b| / |b|`.
pub fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
