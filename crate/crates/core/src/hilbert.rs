//! Principal-value Hilbert transform of step functions and the correlation
//! kernels of the averaged Haar shift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::{haar_function, shifted_function};
use crate::interval::DyadicInterval;
use crate::step::{inner_product, PiecewiseConstant};

/// `p.v. ∫ f(t) / (x − t) dt`, in closed form. Rejects `x` on a breakpoint.
pub fn hilbert_pv(f: &PiecewiseConstant, x: f64) -> Result<f64> {
    if f.breakpoints().contains(&x) {
        return Err(Error::AtBreakpoint(x));
    }
    Ok(f
        .pieces()
        .map(|(a, b, v)| v * ((x - a) / (x - b)).abs().ln())
        .sum())
}

/// Continuous piecewise-linear function, zero outside its nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::ValueCount {
                breakpoints: nodes.len(),
                expected: nodes.len(),
                got: values.len(),
            });
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidBreakpoints);
        }
        if let Some(v) = nodes.iter().chain(&values).find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(*v));
        }
        Ok(Self { nodes, values })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.nodes.len();
        if n == 0 || x < self.nodes[0] || x > self.nodes[n - 1] {
            return 0.0;
        }
        let i = self.nodes.partition_point(|t| *t <= x);
        if i == n {
            return self.values[n - 1];
        }
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }
}

/// `C(y) = ∫ f(t) g(t + y) dt`. Nodes are the differences of breakpoints,
/// where `C` is evaluated exactly; `C` is linear in between.
pub fn cross_correlation(f: &PiecewiseConstant, g: &PiecewiseConstant) -> PiecewiseLinear {
    let mut nodes: Vec<f64> = f
        .breakpoints()
        .iter()
        .flat_map(|a| g.breakpoints().iter().map(move |b| b - a))
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let values = nodes
        .iter()
        .map(|y| inner_product(f, &g.translate(-y)))
        .collect();
    PiecewiseLinear { nodes, values }
}

/// `γ₀(y) = ∫ g(t) h(t + y) dt` for `h = h_{[0,1)}`, `g = g_{[0,1)}`.
pub fn gamma0() -> PiecewiseLinear {
    let unit = DyadicInterval::unit();
    cross_correlation(&shifted_function(unit), &haar_function(unit))
}

/// `Σ_{j=j_min}^{j_max} 2^{-j} γ₀(x / 2^j)`.
pub fn gamma_sum(x: f64, j_min: i32, j_max: i32) -> f64 {
    let g = gamma0();
    gamma_sum_with(&g, x, j_min, j_max)
}

pub fn gamma_sum_with(g: &PiecewiseLinear, x: f64, j_min: i32, j_max: i32) -> f64 {
    (j_min..=j_max)
        .map(|j| {
            let s = crate::interval::pow2(j);
            g.eval(x / s) / s
        })
        .sum()
}
