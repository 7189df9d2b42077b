//! Haar functions, Haar expansions, analysis and synthesis.
//!
//! Conventions: `h_I = |I|^{-1/2}(-1_{I_left} + 1_{I_right})`,
//! `h¹_I = |I|^{-1/2} 1_I`, and `g_I = 2^{-1/2}(h_{I_left} - h_{I_right})`,
//! which takes the values `-, +, +, -` (times `|I|^{-1/2}`) on the quarters of `I`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{check_support, check_window, CellAccumulator, Levels};
use crate::interval::DyadicInterval;
use crate::step::PiecewiseConstant;

/// Which member of the Haar alphabet to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HaarVariant {
    /// `h⁰_I = h_I`, mean zero.
    Oscillation,
    /// `h¹_I`, the normalized indicator.
    Mean,
    /// `g_I`, the shifted companion of `h_I`.
    Shifted,
}

pub fn haar_eval(interval: DyadicInterval, variant: HaarVariant, x: f64) -> f64 {
    if !interval.contains_point(x) {
        return 0.0;
    }
    let amp = interval.len().sqrt().recip();
    let t = (x - interval.start()) / interval.len();
    match variant {
        HaarVariant::Mean => amp,
        HaarVariant::Oscillation => {
            if t < 0.5 {
                -amp
            } else {
                amp
            }
        }
        HaarVariant::Shifted => {
            if (0.25..0.75).contains(&t) {
                amp
            } else {
                -amp
            }
        }
    }
}

pub fn haar_function(interval: DyadicInterval) -> PiecewiseConstant {
    let amp = interval.len().sqrt().recip();
    PiecewiseConstant::from_parts(
        vec![interval.start(), interval.center(), interval.end()],
        vec![-amp, amp],
    )
}

pub fn mean_function(interval: DyadicInterval) -> PiecewiseConstant {
    PiecewiseConstant::indicator_of(interval).scale(interval.len().sqrt().recip())
}

pub fn shifted_function(interval: DyadicInterval) -> PiecewiseConstant {
    let amp = interval.len().sqrt().recip();
    let (l, r) = (interval.left(), interval.right());
    PiecewiseConstant::from_parts(
        vec![l.start(), l.center(), r.start(), r.center(), r.end()],
        vec![-amp, amp, amp, -amp],
    )
}

pub fn variant_function(interval: DyadicInterval, variant: HaarVariant) -> PiecewiseConstant {
    match variant {
        HaarVariant::Oscillation => haar_function(interval),
        HaarVariant::Mean => mean_function(interval),
        HaarVariant::Shifted => shifted_function(interval),
    }
}

/// Coefficients of a function in the Haar basis of a root interval, for
/// intervals down to `min_scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HaarExpansion {
    pub root: DyadicInterval,
    pub min_scale: i32,
    /// Coefficient of `|root|^{-1/2} 1_root`.
    pub mean: f64,
    pub coeffs: BTreeMap<DyadicInterval, f64>,
}

impl HaarExpansion {
    pub fn zero(root: DyadicInterval, min_scale: i32) -> Self {
        Self {
            root,
            min_scale,
            mean: 0.0,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn coeff(&self, interval: &DyadicInterval) -> f64 {
        self.coeffs.get(interval).copied().unwrap_or(0.0)
    }

    /// `mean² + Σ c_I²`.
    pub fn energy(&self) -> f64 {
        self.mean * self.mean + self.coeffs.values().map(|c| c * c).sum::<f64>()
    }

    /// `|I|^{-1} ∫_I f` for the synthesized function, read off the expansion.
    pub fn average_on(&self, interval: &DyadicInterval) -> f64 {
        let mut total = self.mean / self.root.len().sqrt();
        let mut child = *interval;
        while child.scale < self.root.scale {
            let parent = child.parent();
            let c = self.coeff(&parent);
            if c != 0.0 {
                total += -c * child.sign() / parent.len().sqrt();
            }
            child = parent;
        }
        total
    }
}

/// Haar analysis of `f` on `root` for every dyadic `I ⊆ root` with
/// `scale(I) >= min_scale`. Zero coefficients are kept, so every key of
/// the window is present.
pub fn analyze(
    f: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<HaarExpansion> {
    check_window(root, min_scale)?;
    check_support(f, root)?;
    let levels = Levels::from_function(f, root, min_scale);
    Ok(expansion_from_levels(&levels))
}

pub(crate) fn expansion_from_levels(levels: &Levels) -> HaarExpansion {
    let mut coeffs = BTreeMap::new();
    for (l, row) in levels.haar.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            coeffs.insert(levels.interval(l, j), *c);
        }
    }
    HaarExpansion {
        root: levels.root,
        min_scale: levels.min_scale,
        mean: levels.root_average() * levels.root.len().sqrt(),
        coeffs,
    }
}

/// `mean · |root|^{-1/2} 1_root + Σ c_I h_I`, on cells of scale
/// `min(min_scale, finest key scale) - 1`.
pub fn synthesize(e: &HaarExpansion) -> PiecewiseConstant {
    let finest_key = e.coeffs.keys().map(|i| i.scale).min().unwrap_or(e.root.scale);
    let finest = e.min_scale.min(finest_key).min(e.root.scale) - 1;
    let mut acc = CellAccumulator::new(e.root, finest);
    acc.add_mean(e.root, e.mean);
    for (i, c) in &e.coeffs {
        if *c != 0.0 {
            acc.add_haar(*i, *c);
        }
    }
    acc.into_function()
}

/// Expansion with i.i.d. standard normal coefficients on every `I ⊆ root`
/// of scale `root.scale - depth + 1 ..= root.scale`. The synthesized
/// function is constant on cells of scale `root.scale - depth`, which is
/// also the returned `min_scale`.
pub fn random_expansion<R: Rng>(
    rng: &mut R,
    root: DyadicInterval,
    depth: u32,
    mean_zero: bool,
) -> HaarExpansion {
    let min_scale = root.scale - depth as i32;
    let mean = if mean_zero {
        0.0
    } else {
        rng.sample(StandardNormal)
    };
    let mut coeffs = BTreeMap::new();
    if depth > 0 {
        for i in root.subintervals(min_scale + 1) {
            coeffs.insert(i, rng.sample(StandardNormal));
        }
    }
    HaarExpansion {
        root,
        min_scale,
        mean,
        coeffs,
    }
}

/// A random step function on `root`, constant on cells of scale `root.scale - depth`.
pub fn random_step<R: Rng>(
    rng: &mut R,
    root: DyadicInterval,
    depth: u32,
    mean_zero: bool,
) -> PiecewiseConstant {
    synthesize(&random_expansion(rng, root, depth, mean_zero)).simplified()
}

/// `|f|` for a random `f` of the given depth.
pub fn random_nonnegative<R: Rng>(rng: &mut R, root: DyadicInterval, depth: u32) -> PiecewiseConstant {
    random_step(rng, root, depth, false).abs().simplified()
}
