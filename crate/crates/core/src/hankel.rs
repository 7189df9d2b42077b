//! Hankel operators `H_b φ = P₊(b φ̄)` on the trigonometric model and
//! two-sided bounds for `‖H_b‖`.
//!
//! `H_b` is antilinear. Its linear avatar is the matrix `A[n][m] = b̂(n+m)`
//! acting on `conj φ`; both have the same singular values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::member_rng;
use crate::error::{Error, Result};
use crate::fourier::SpectralPolynomial;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub const NORM_TOLERANCE: f64 = 1e-10;
pub const NORM_MAX_ITERATIONS: usize = 100_000;
/// Converged iterates must also satisfy `‖AᴴA x − ρx‖ ≤ this · ρ`.
const NORM_RESIDUAL: f64 = 1e-5;
const NORM_START_SEED: u64 = 0x4a4b;

#[derive(Clone, Debug, PartialEq)]
pub struct HankelMatrix {
    entries: DMatrix<Complex64>,
    /// Set when `M` is below the analytic degree plus one, so entries with
    /// `n + m ≥ M` that would be nonzero are cut off.
    pub truncation_warning: Option<String>,
}

impl HankelMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entry(&self, n: usize, m: usize) -> Complex64 {
        self.entries[(n, m)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Coefficients of `P₊(b φ̄)` for analytic `φ` given by `φ_0..φ_{M−1}`.
    pub fn apply_antilinear(&self, phi: &[Complex64]) -> Vec<Complex64> {
        let v = DVector::from_iterator(phi.len(), phi.iter().map(|c| c.conj()));
        (&self.entries * v).iter().copied().collect()
    }
}

/// Smallest size that holds every nonzero entry.
pub fn exact_size(b: &SpectralPolynomial) -> usize {
    b.analytic_degree().map_or(1, |d| d + 1)
}

pub fn hankel_matrix(b: &SpectralPolynomial, m: usize) -> HankelMatrix {
    let entries = DMatrix::from_fn(m, m, |r, c| b.coeff((r + c) as i64));
    let needed = exact_size(b);
    let truncation_warning = (m < needed && b.analytic_degree().is_some())
        .then(|| format!("size {m} truncates a symbol of analytic degree {}; need {needed}", needed - 1));
    HankelMatrix {
        entries,
        truncation_warning,
    }
}

/// `P₊(b φ̄)` straight from the definition.
pub fn hankel_apply(b: &SpectralPolynomial, phi: &SpectralPolynomial) -> SpectralPolynomial {
    b.multiply(&phi.conj()).proj_plus()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelNorm {
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub truncated: bool,
}

fn cnorm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value of the `M × M` Hankel matrix by power iteration on
/// `AᴴA`, from a fixed pseudo-random start.
pub fn hankel_norm(b: &SpectralPolynomial, m: usize) -> HankelNorm {
    let h = hankel_matrix(b, m);
    let a = h.matrix();
    let truncated = h.truncation_warning.is_some();
    let mut rng = member_rng(NORM_START_SEED, m as u64);
    let mut x = DVector::from_fn(m, |_, _| {
        Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let n0 = cnorm(&x);
    x /= Complex64::new(n0, 0.0);
    let ah = a.adjoint();
    let mut rho_prev = f64::NAN;
    let mut rho = 0.0;
    for it in 1..=NORM_MAX_ITERATIONS {
        let y = a * &x;
        rho = y.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if rho == 0.0 {
            return HankelNorm {
                sigma: 0.0,
                iterations: it,
                converged: true,
                truncated,
            };
        }
        let mut z = &ah * y;
        let residual = cnorm(&(&z - &x * Complex64::new(rho, 0.0))) / rho;
        if (rho - rho_prev).abs() <= NORM_TOLERANCE * rho && residual <= NORM_RESIDUAL {
            return HankelNorm {
                sigma: rho.sqrt(),
                iterations: it,
                converged: true,
                truncated,
            };
        }
        rho_prev = rho;
        let nz = cnorm(&z);
        z /= Complex64::new(nz, 0.0);
        x = z;
    }
    HankelNorm {
        sigma: rho.sqrt(),
        iterations: NORM_MAX_ITERATIONS,
        converged: false,
        truncated,
    }
}

/// `‖H_b‖` at the exact size.
pub fn sigma0(b: &SpectralPolynomial) -> HankelNorm {
    hankel_norm(b, exact_size(b))
}

/// `⟨P₊b, ψφ⟩ = Σ_{k≥0} b̂(k) conj((ψφ)^(k))`.
pub fn dual_pairing(b: &SpectralPolynomial, psi: &SpectralPolynomial, phi: &SpectralPolynomial) -> Complex64 {
    let prod = psi.multiply(phi);
    (0..=b.band() as i64).map(|k| b.coeff(k) * prod.coeff(k).conj()).sum()
}

/// Max of `|⟨P₊b, ψφ⟩|` over `samples` random unit analytic `ψ` of degree
/// below the exact size, each paired with its optimal unit `φ`. For fixed
/// `ψ` the optimum is `‖A conj ψ‖`. Sample `i` uses stream `i` of `seed`, so
/// the bound is nondecreasing in `samples`.
pub fn nehari_lower_bound(b: &SpectralPolynomial, samples: usize, seed: u64) -> f64 {
    let h = hankel_matrix(b, exact_size(b));
    let m = h.size();
    let mut best: f64 = 0.0;
    for i in 0..samples {
        let mut rng = member_rng(seed, i as u64);
        let psi: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let psi: Vec<Complex64> = psi.iter().map(|c| c / norm).collect();
        let v = h.apply_antilinear(&psi);
        best = best.max(v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    }
    best
}

pub const DEFAULT_NEHARI_ITERATIONS: usize = 20_000;
/// Stop once the best objective has not improved by this much (relative)
/// over `STALL_WINDOW` iterations, or once the weighted lower bound is this
/// close to it. Early Lawson iterates oscillate, hence the long window.
pub const STAGNATION: f64 = 1e-8;
const STALL_WINDOW: usize = 500;
/// Lawson weights are floored at this fraction of the largest weight to keep
/// the normal equations positive definite.
const WEIGHT_FLOOR: f64 = 1e-14;
/// Dense-grid oversampling over the optimizer points for the final sup.
const REFINE_OVERSAMPLING: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NehariEstimate {
    pub sigma0: f64,
    /// Refined sup norm of `P₊b − a` for the best `a` found.
    pub inf_estimate: f64,
    pub gap: f64,
    pub budget: usize,
    pub sample_points: usize,
    /// Best sampled objective; never above `inf_estimate`.
    pub sampled_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best sampled objective after each iteration.
    #[serde(skip)]
    pub history: Vec<f64>,
    /// Coefficients `a_1..a_D` of `a = Σ a_k e^{−ikθ}`.
    #[serde(skip)]
    pub anti_analytic: Vec<Complex64>,
}

/// Minimizes `max_i |P₊b(θ_i) − a(θ_i)|` over `a = Σ_{k=1}^{D} a_k e^{−ikθ}`
/// on `8·(band + D)` equispaced points by Lawson's reweighted least squares.
/// Replacing `b` by `P₊b` only moves `a`, so the infimum is unchanged.
pub fn nehari_inf_estimate(b: &SpectralPolynomial, budget: usize, iterations: usize) -> Result<NehariEstimate> {
    if budget < b.band() {
        return Err(Error::BudgetTooSmall {
            budget,
            band: b.band(),
        });
    }
    let s0 = sigma0(b);
    if !s0.converged {
        return Err(Error::Precondition(format!(
            "Hankel norm did not converge in {} iterations",
            s0.iterations
        )));
    }
    let target = b.proj_plus();
    let d = budget;
    let n = 8 * (b.band() + d).max(1);
    let thetas: Vec<f64> = (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64).collect();
    let f: Vec<Complex64> = thetas.iter().map(|t| target.eval(*t)).collect();
    // basis[i][k−1] = e^{−ikθ_i}
    let basis: Vec<Vec<Complex64>> = thetas
        .iter()
        .map(|t| (1..=d).map(|k| Complex64::from_polar(1.0, -(k as f64) * t)).collect())
        .collect();

    let residual = |a: &[Complex64]| -> Vec<Complex64> {
        f.iter()
            .zip(&basis)
            .map(|(fi, row)| fi - row.iter().zip(a).map(|(e, c)| e * c).sum::<Complex64>())
            .collect()
    };

    // powers[i][j] = e^{i(j − (d−1))θ_i}, the Toeplitz symbols of the Gram matrix
    let powers: Vec<Vec<Complex64>> = thetas
        .iter()
        .map(|t| {
            (0..(2 * d).saturating_sub(1))
                .map(|j| Complex64::from_polar(1.0, (j as f64 - (d as f64 - 1.0)) * t))
                .collect()
        })
        .collect();

    let mut best_a = vec![ZERO; d];
    let r0 = residual(&best_a);
    let mut best = r0.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut history = Vec::new();
    let mut weights = vec![1.0 / n as f64; n];
    let mut converged = d == 0 || best == 0.0;
    // (iteration, best objective) at the last relative improvement above STAGNATION
    let mut progress = (0, best);
    let mut floor: f64 = 0.0;
    let mut done = 0;

    while !converged && done < iterations {
        done += 1;
        // G[k][l] = Σ w_i e^{i(k−l)θ_i}, rhs[k] = Σ w_i e^{ikθ_i} f_i
        let mut gram_diag = vec![ZERO; 2 * d - 1];
        let mut rhs = DVector::from_element(d, ZERO);
        for i in 0..n {
            let w = weights[i];
            for (g, p) in gram_diag.iter_mut().zip(&powers[i]) {
                *g += p * w;
            }
            let wf = f[i] * w;
            for (k, e) in basis[i].iter().enumerate() {
                rhs[k] += e.conj() * wf;
            }
        }
        let gram = DMatrix::from_fn(d, d, |k, l| gram_diag[k + d - 1 - l]);
        let Some(chol) = gram.cholesky() else {
            break;
        };
        let a: Vec<Complex64> = chol.solve(&rhs).iter().copied().collect();
        let r = residual(&a);
        let mags: Vec<f64> = r.iter().map(|c| c.norm()).collect();
        let objective = mags.iter().copied().fold(0.0, f64::max);
        // the weighted L² optimum never exceeds the sampled minimax value
        let weighted_l2 = mags
            .iter()
            .zip(&weights)
            .map(|(m, w)| w * m * m)
            .sum::<f64>()
            .sqrt();
        floor = floor.max(weighted_l2);
        if objective < best {
            best = objective;
            best_a = a;
        }
        history.push(best);
        if best - floor <= STAGNATION * best {
            converged = true;
            break;
        }
        if progress.1 - best > STAGNATION * best {
            progress = (done, best);
        } else if done - progress.0 >= STALL_WINDOW {
            converged = true;
            break;
        }
        let total: f64 = weights.iter().zip(&mags).map(|(w, m)| w * m).sum();
        if total == 0.0 {
            converged = true;
            break;
        }
        weights.iter_mut().zip(&mags).for_each(|(w, m)| *w *= m / total);
        let top = weights.iter().copied().fold(0.0, f64::max);
        weights.iter_mut().for_each(|w| *w = w.max(top * WEIGHT_FLOOR));
    }

    let mut beta_pairs: Vec<(i64, Complex64)> = target.terms().collect();
    beta_pairs.extend(best_a.iter().enumerate().map(|(k, c)| (-(k as i64 + 1), -c)));
    let beta = SpectralPolynomial::from_pairs(&beta_pairs);
    let inf_estimate = sup_norm(&beta, REFINE_OVERSAMPLING * n).max(best);
    Ok(NehariEstimate {
        sigma0: s0.sigma,
        inf_estimate,
        gap: inf_estimate - s0.sigma,
        budget,
        sample_points: n,
        sampled_objective: best,
        iterations: done,
        converged,
        history,
        anti_analytic: best_a,
    })
}

/// `max_θ |p(θ)|` from a grid of `points` samples, with every grid-local
/// maximum refined by golden-section search on its two neighbouring cells.
pub fn sup_norm(p: &SpectralPolynomial, points: usize) -> f64 {
    let points = points.max(4 * p.band() + 4);
    let h = std::f64::consts::TAU / points as f64;
    let mags: Vec<f64> = (0..points).map(|i| p.eval(i as f64 * h).norm()).collect();
    let mut best = mags.iter().copied().fold(0.0, f64::max);
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    for i in 0..points {
        let prev = mags[(i + points - 1) % points];
        let next = mags[(i + 1) % points];
        if mags[i] < prev || mags[i] < next {
            continue;
        }
        let (mut lo, mut hi) = ((i as f64 - 1.0) * h, (i as f64 + 1.0) * h);
        let mut x1 = hi - invphi * (hi - lo);
        let mut x2 = lo + invphi * (hi - lo);
        let (mut f1, mut f2) = (p.eval(x1).norm(), p.eval(x2).norm());
        for _ in 0..80 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + invphi * (hi - lo);
                f2 = p.eval(x2).norm();
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - invphi * (hi - lo);
                f1 = p.eval(x1).norm();
            }
        }
        best = best.max(f1).max(f2);
    }
    best
}

/// One row of a Hankel batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelReport {
    pub sigma0: f64,
    pub lower: f64,
    pub inf_estimate: f64,
    pub gap: f64,
    pub budget: usize,
    pub seed: u64,
}

pub fn hankel_report(
    b: &SpectralPolynomial,
    budget: usize,
    samples: usize,
    seed: u64,
    iterations: usize,
) -> Result<HankelReport> {
    let est = nehari_inf_estimate(b, budget, iterations)?;
    Ok(HankelReport {
        sigma0: est.sigma0,
        lower: nehari_lower_bound(b, samples, seed),
        inf_estimate: est.inf_estimate,
        gap: est.gap,
        budget,
        seed,
    })
}
