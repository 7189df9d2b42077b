//! Power iteration for `‖T‖` given `T` and `T*` as black boxes.

use serde::{Deserialize, Serialize};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    /// Relative change of the Rayleigh quotient that counts as stagnation.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    /// `sqrt` of the final Rayleigh quotient of `T*T`.
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `‖T*T x − ρ x‖ / ρ` at the final iterate.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Iterates `x ← T*T x / ‖T*T x‖` from `start`. The Rayleigh quotient
/// `‖T x‖²` never decreases along the iteration, so the estimate is at least
/// `‖T start‖ / ‖start‖`.
pub fn operator_norm<A, B>(apply: A, adjoint: B, start: Vec<f64>, cfg: PowerConfig) -> PowerResult
where
    A: Fn(&[f64]) -> Vec<f64>,
    B: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = start;
    if normalize(&mut x) == 0.0 {
        return PowerResult {
            norm: 0.0,
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
        };
    }
    let mut rho_prev = f64::NAN;
    let mut rho = 0.0;
    let mut residual = 0.0;
    for it in 1..=cfg.max_iterations {
        let y = apply(&x);
        rho = dot(&y, &y);
        let mut z = adjoint(&y);
        if rho == 0.0 {
            return PowerResult {
                norm: 0.0,
                iterations: it,
                converged: true,
                relative_residual: 0.0,
            };
        }
        residual = z
            .iter()
            .zip(&x)
            .map(|(zi, xi)| (zi - rho * xi).powi(2))
            .sum::<f64>()
            .sqrt()
            / rho;
        if (rho - rho_prev).abs() <= cfg.tolerance * rho {
            return PowerResult {
                norm: rho.sqrt(),
                iterations: it,
                converged: true,
                relative_residual: residual,
            };
        }
        rho_prev = rho;
        normalize(&mut z);
        x = z;
    }
    PowerResult {
        norm: rho.sqrt(),
        iterations: cfg.max_iterations,
        converged: false,
        relative_residual: residual,
    }
}
