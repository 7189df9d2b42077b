//! Compactly supported step functions with exact breakpoint arithmetic.
//!
//! A [`PiecewiseConstant`] holds breakpoints `x_0 < ... < x_m` and values
//! `v_1..v_m`; the function equals `v_i` on `[x_{i-1}, x_i)` and vanishes
//! outside `[x_0, x_m)`. Integrals, inner products and norms are closed-form
//! sums over merged breakpoints, so identities between such functions can be
//! checked to machine precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::DyadicInterval;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepRepr", into = "StepRepr")]
pub struct PiecewiseConstant {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

/// JSON form: `{"breakpoints": [...], "values": [...]}`.
#[derive(Serialize, Deserialize)]
struct StepRepr {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<StepRepr> for PiecewiseConstant {
    type Error = Error;

    fn try_from(r: StepRepr) -> Result<Self> {
        PiecewiseConstant::new(r.breakpoints, r.values)
    }
}

impl From<PiecewiseConstant> for StepRepr {
    fn from(f: PiecewiseConstant) -> Self {
        StepRepr {
            breakpoints: f.breakpoints,
            values: f.values,
        }
    }
}

impl PiecewiseConstant {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() && values.is_empty() {
            return Ok(Self::zero());
        }
        let expected = breakpoints.len().saturating_sub(1);
        if breakpoints.len() < 2 || values.len() != expected {
            return Err(Error::ValueCount {
                breakpoints: breakpoints.len(),
                expected,
                got: values.len(),
            });
        }
        if breakpoints.iter().any(|x| !x.is_finite())
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidBreakpoints);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// Constructor for callers that already guarantee the invariants.
    pub(crate) fn from_parts(breakpoints: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert!(breakpoints.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(
            (breakpoints.is_empty() && values.is_empty())
                || breakpoints.len() == values.len() + 1
        );
        Self {
            breakpoints,
            values,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `c · 1_[a, b)`.
    pub fn constant_on(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![c])
    }

    /// `1_[a, b)`.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::constant_on(a, b, 1.0)
    }

    pub fn indicator_of(interval: DyadicInterval) -> Self {
        Self::from_parts(vec![interval.start(), interval.end()], vec![1.0])
    }

    /// Values on consecutive cells `[start + i w, start + (i+1) w)`.
    pub fn from_cells(start: f64, width: f64, values: Vec<f64>) -> Self {
        if values.is_empty() {
            return Self::zero();
        }
        let breakpoints = (0..=values.len())
            .map(|i| start + i as f64 * width)
            .collect();
        Self::from_parts(breakpoints, values)
    }

    /// Builds a step function from jump events `(x, Δv)`, read left to right.
    ///
    /// Events at equal positions are merged. Running sums use compensated
    /// summation and the result is independent of the input order of
    /// events at distinct positions.
    pub fn from_jumps(mut events: Vec<(f64, f64)>) -> Self {
        events.retain(|e| e.1 != 0.0);
        crate::par::sort_by_position(&mut events);
        Self::from_sorted_jumps(&events)
    }

    pub(crate) fn from_sorted_jumps(events: &[(f64, f64)]) -> Self {
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0;
            while i < events.len() && events[i].0 == x {
                let d = events[i].1;
                let t = sum + d;
                if sum.abs() >= d.abs() {
                    comp += (sum - t) + d;
                } else {
                    comp += (d - t) + sum;
                }
                sum = t;
                i += 1;
            }
            breakpoints.push(x);
            values.push(sum + comp);
        }
        if breakpoints.len() < 2 {
            return Self::zero();
        }
        // the value after the last jump is zero by construction
        values.pop();
        Self::from_parts(breakpoints, values)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// `(a, b, v)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (w[0], w[1], *v))
    }

    /// Smallest `[lo, hi)` outside of which the function vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|v| *v != 0.0)?;
        let last = self.values.iter().rposition(|v| *v != 0.0)?;
        Some((self.breakpoints[first], self.breakpoints[last + 1]))
    }

    /// Value at `x` using the right-continuous representative.
    pub fn eval(&self, x: f64) -> f64 {
        match self.piece_index(x) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    fn piece_index(&self, x: f64) -> Option<usize> {
        if self.values.is_empty() || x < self.breakpoints[0] {
            return None;
        }
        let i = self.breakpoints.partition_point(|b| *b <= x);
        if i >= self.breakpoints.len() {
            None
        } else {
            Some(i - 1)
        }
    }

    /// `x ↦ f(x - y)`.
    pub fn translate(&self, y: f64) -> Self {
        Self::from_parts(
            self.breakpoints.iter().map(|x| x + y).collect(),
            self.values.clone(),
        )
    }

    /// `x ↦ λ^{-1/p} f(x / λ)`, an isometry of `L^p`.
    pub fn dilate(&self, lambda: f64, p: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidDilation(lambda));
        }
        if !(p > 0.0) {
            return Err(Error::InvalidExponent(p));
        }
        let factor = lambda.powf(-1.0 / p);
        Ok(Self::from_parts(
            self.breakpoints.iter().map(|x| x * lambda).collect(),
            self.values.iter().map(|v| v * factor).collect(),
        ))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_parts(
            self.breakpoints.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )
    }

    pub fn abs(&self) -> Self {
        Self::from_parts(
            self.breakpoints.clone(),
            self.values.iter().map(|v| v.abs()).collect(),
        )
    }

    /// Pointwise `op(f, g)` on the union of both breakpoint sets.
    /// `op(0, 0)` must be `0`.
    pub fn combine(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        let xs = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        if xs.len() < 2 {
            return Self::zero();
        }
        let mut a = Cursor::new(self);
        let mut b = Cursor::new(other);
        let values = xs[..xs.len() - 1]
            .iter()
            .map(|&x| op(a.advance_to(x), b.advance_to(x)))
            .collect();
        Self::from_parts(xs, values)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a * b)
    }

    /// Linear combination `Σ c_i f_i`, evaluated on the merged breakpoints.
    pub fn linear_combination(terms: &[(f64, &PiecewiseConstant)]) -> Self {
        terms.iter().fold(Self::zero(), |acc, (c, f)| {
            acc.combine(f, |a, b| a + c * b)
        })
    }

    pub fn integral(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v * (b - a)).sum()
    }

    /// `∫_lo^hi f`, walking only the pieces that meet `[lo, hi)`.
    pub fn integral_over(&self, lo: f64, hi: f64) -> f64 {
        if self.values.is_empty() || hi <= lo {
            return 0.0;
        }
        let mut i = self.breakpoints.partition_point(|b| *b <= lo).max(1) - 1;
        let mut total = 0.0;
        while i < self.values.len() && self.breakpoints[i] < hi {
            let a = self.breakpoints[i].max(lo);
            let b = self.breakpoints[i + 1].min(hi);
            if b > a {
                total += self.values[i] * (b - a);
            }
            i += 1;
        }
        total
    }

    /// `(Σ |v_i|^p (x_i - x_{i-1}))^{1/p}`, or `max |v_i|` for `p = ∞`.
    /// Exponents below one give the usual quasi-norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        if p == 2.0 {
            return self
                .pieces()
                .map(|(a, b, v)| v * v * (b - a))
                .sum::<f64>()
                .sqrt();
        }
        self.pieces()
            .map(|(a, b, v)| v.abs().powf(p) * (b - a))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// `‖f - g‖_∞`.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.sub(other).lp_norm(f64::INFINITY)
    }

    /// Same function with equal neighbouring pieces merged and zero ends trimmed.
    pub fn simplified(&self) -> Self {
        let Some((lo, hi)) = self.support() else {
            return Self::zero();
        };
        let mut xs = vec![lo];
        let mut vs: Vec<f64> = Vec::new();
        for (a, b, v) in self.pieces() {
            if b <= lo || a >= hi {
                continue;
            }
            if vs.last() == Some(&v) {
                *xs.last_mut().unwrap() = b;
            } else {
                vs.push(v);
                xs.push(b);
            }
        }
        Self::from_parts(xs, vs)
    }

    /// Whether every breakpoint lies on the grid `2^scale ℤ`.
    pub fn is_resolved_at(&self, scale: i32) -> bool {
        let w = crate::interval::pow2(scale);
        self.simplified()
            .breakpoints
            .iter()
            .all(|x| (x / w).fract() == 0.0)
    }
}

/// `∫ f g`, exact over merged breakpoints.
pub fn inner_product(f: &PiecewiseConstant, g: &PiecewiseConstant) -> f64 {
    let mut total = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    let (fb, gb) = (&f.breakpoints, &g.breakpoints);
    while i < f.values.len() && j < g.values.len() {
        let a = fb[i].max(gb[j]);
        let b = fb[i + 1].min(gb[j + 1]);
        if b > a {
            total += f.values[i] * g.values[j] * (b - a);
        }
        if fb[i + 1] <= gb[j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    total
}

fn merge_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}

/// Left-to-right evaluation cursor for monotone query points.
struct Cursor<'a> {
    f: &'a PiecewiseConstant,
    next: usize,
}

impl<'a> Cursor<'a> {
    fn new(f: &'a PiecewiseConstant) -> Self {
        Self { f, next: 0 }
    }

    fn advance_to(&mut self, x: f64) -> f64 {
        let bp = &self.f.breakpoints;
        while self.next < bp.len() && bp[self.next] <= x {
            self.next += 1;
        }
        if self.next == 0 || self.next >= bp.len() {
            0.0
        } else {
            self.f.values[self.next - 1]
        }
    }
}
