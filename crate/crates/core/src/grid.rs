//! Dense dyadic bookkeeping inside a root interval: per-scale coefficient
//! tables for analysis and per-scale indicator tables for synthesis.

use crate::error::{Error, Result};
use crate::interval::{pow2, DyadicInterval};
use crate::step::PiecewiseConstant;

pub(crate) fn check_window(root: DyadicInterval, min_scale: i32) -> Result<()> {
    if min_scale > root.scale {
        return Err(Error::ScaleWindow {
            min_scale,
            root_scale: root.scale,
        });
    }
    Ok(())
}

pub(crate) fn check_support(f: &PiecewiseConstant, root: DyadicInterval) -> Result<()> {
    if let Some((lo, hi)) = f.support() {
        if lo < root.start() || hi > root.end() {
            return Err(Error::SupportEscapesRoot { lo, hi, root });
        }
    }
    Ok(())
}

/// `∫ f` over the cells `[start + i w, start + (i+1) w)`, `i < n`.
pub(crate) fn cell_integrals(f: &PiecewiseConstant, start: f64, width: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let end = start + n as f64 * width;
    for (a, b, v) in f.pieces() {
        if v == 0.0 || b <= start || a >= end {
            continue;
        }
        let a = a.max(start);
        let b = b.min(end);
        let first = (((a - start) / width).floor() as usize).min(n - 1);
        let mut i = first;
        while i < n {
            let lo = start + i as f64 * width;
            if lo >= b {
                break;
            }
            let hi = lo + width;
            let overlap = hi.min(b) - lo.max(a);
            if overlap > 0.0 {
                out[i] += v * overlap;
            }
            i += 1;
        }
    }
    out
}

/// Haar coefficients `⟨f, h_I⟩` and averages `|I|^{-1} ∫_I f` for every
/// `I ⊆ root` with scale in `[min_scale, root.scale]`.
///
/// Level `l` holds the `2^l` intervals of scale `root.scale - l`, left to right.
#[derive(Clone, Debug)]
pub(crate) struct Levels {
    pub root: DyadicInterval,
    pub min_scale: i32,
    pub haar: Vec<Vec<f64>>,
    pub avg: Vec<Vec<f64>>,
}

impl Levels {
    pub fn from_function(f: &PiecewiseConstant, root: DyadicInterval, min_scale: i32) -> Self {
        let depth = (root.scale - min_scale) as usize;
        let n = 1usize << (depth + 1);
        let ints = cell_integrals(f, root.start(), pow2(min_scale - 1), n);
        Self::from_half_cell_integrals(root, min_scale, ints)
    }

    /// `values` are cell values at scale `min_scale - 1`.
    pub fn from_cell_values(root: DyadicInterval, min_scale: i32, values: &[f64]) -> Self {
        let w = pow2(min_scale - 1);
        Self::from_half_cell_integrals(root, min_scale, values.iter().map(|v| v * w).collect())
    }

    fn from_half_cell_integrals(root: DyadicInterval, min_scale: i32, mut ints: Vec<f64>) -> Self {
        let depth = (root.scale - min_scale) as usize;
        let mut haar = vec![Vec::new(); depth + 1];
        let mut avg = vec![Vec::new(); depth + 1];
        for level in (0..=depth).rev() {
            let len = pow2(root.scale - level as i32);
            let norm = len.sqrt();
            let n = 1usize << level;
            let mut h = Vec::with_capacity(n);
            let mut a = Vec::with_capacity(n);
            let mut next = Vec::with_capacity(n);
            for j in 0..n {
                let (l, r) = (ints[2 * j], ints[2 * j + 1]);
                h.push((r - l) / norm);
                let total = l + r;
                a.push(total / len);
                next.push(total);
            }
            haar[level] = h;
            avg[level] = a;
            ints = next;
        }
        Self {
            root,
            min_scale,
            haar,
            avg,
        }
    }

    pub fn depth(&self) -> usize {
        (self.root.scale - self.min_scale) as usize
    }

    pub fn interval(&self, level: usize, j: usize) -> DyadicInterval {
        DyadicInterval::new(
            self.root.scale - level as i32,
            (self.root.position << level) + j as i64,
        )
    }

    /// `⟨f, h_I^ε⟩`: the Haar coefficient for `ε = 0`, `√|I| · avg_I f` for `ε = 1`.
    pub fn letter(&self, mean: bool, level: usize, j: usize) -> f64 {
        if mean {
            self.avg[level][j] * pow2(self.root.scale - level as i32).sqrt()
        } else {
            self.haar[level][j]
        }
    }

    /// Mean of `f` over the root.
    pub fn root_average(&self) -> f64 {
        self.avg[0][0]
    }
}

/// Accumulates `Σ c_I · (1_I, h_I, h¹_I or g_I)` inside a root and
/// materializes the sum on cells of scale `finest`.
#[derive(Clone, Debug)]
pub(crate) struct CellAccumulator {
    root: DyadicInterval,
    finest: i32,
    levels: Vec<Vec<f64>>,
}

impl CellAccumulator {
    pub fn new(root: DyadicInterval, finest: i32) -> Self {
        debug_assert!(finest <= root.scale);
        let depth = (root.scale - finest) as usize;
        let levels = (0..=depth).map(|l| vec![0.0; 1usize << l]).collect();
        Self {
            root,
            finest,
            levels,
        }
    }

    fn slot(&self, interval: DyadicInterval) -> (usize, usize) {
        let level = (self.root.scale - interval.scale) as usize;
        debug_assert!(interval.scale >= self.finest, "{interval} finer than {}", self.finest);
        debug_assert!(self.root.contains(&interval));
        let j = (interval.position - (self.root.position << level)) as usize;
        (level, j)
    }

    pub fn add_indicator(&mut self, interval: DyadicInterval, c: f64) {
        let (l, j) = self.slot(interval);
        self.levels[l][j] += c;
    }

    /// `c · h¹_I`.
    pub fn add_mean(&mut self, interval: DyadicInterval, c: f64) {
        self.add_indicator(interval, c / interval.len().sqrt());
    }

    /// `c · h_I`: `-|I|^{-1/2}` on the left half, `+|I|^{-1/2}` on the right.
    pub fn add_haar(&mut self, interval: DyadicInterval, c: f64) {
        let a = c / interval.len().sqrt();
        self.add_indicator(interval.left(), -a);
        self.add_indicator(interval.right(), a);
    }

    /// `c · g_I`: `-, +, +, -` times `|I|^{-1/2}` on the four quarters.
    pub fn add_shifted(&mut self, interval: DyadicInterval, c: f64) {
        let a = c / interval.len().sqrt();
        let (l, r) = (interval.left(), interval.right());
        self.add_indicator(l.left(), -a);
        self.add_indicator(l.right(), a);
        self.add_indicator(r.left(), a);
        self.add_indicator(r.right(), -a);
    }

    pub fn into_values(mut self) -> Vec<f64> {
        for l in 0..self.levels.len() - 1 {
            let (upper, lower) = self.levels.split_at_mut(l + 1);
            let coarse = &upper[l];
            let fine = &mut lower[0];
            for (j, c) in coarse.iter().enumerate() {
                if *c != 0.0 {
                    fine[2 * j] += c;
                    fine[2 * j + 1] += c;
                }
            }
        }
        self.levels.pop().unwrap_or_default()
    }

    pub fn into_function(self) -> PiecewiseConstant {
        let start = self.root.start();
        let width = pow2(self.finest);
        PiecewiseConstant::from_cells(start, width, self.into_values())
    }
}

/// Cell values at `scale` for a function supported in `root`.
pub(crate) fn cell_values(f: &PiecewiseConstant, root: DyadicInterval, scale: i32) -> Vec<f64> {
    let n = 1usize << (root.scale - scale);
    let w = pow2(scale);
    cell_integrals(f, root.start(), w, n)
        .into_iter()
        .map(|x| x / w)
        .collect()
}

/// Repeats every cell value `2^levels` times.
pub(crate) fn refine(values: &[f64], levels: u32) -> Vec<f64> {
    let k = 1usize << levels;
    values
        .iter()
        .flat_map(|v| std::iter::repeat_n(*v, k))
        .collect()
}
