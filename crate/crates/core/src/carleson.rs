//! Carleson embedding: the `P^{(0,1,0)}(b, ·)` operator norm against the
//! dyadic BMO norm of `b`, and the stopping-time decomposition by
//! coefficient size.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::{band, member_rng, Quantiles};
use crate::error::Result;
use crate::grid::{check_support, check_window, Levels};
use crate::haar::{analyze, random_expansion, random_nonnegative, random_step, synthesize, HaarExpansion};
use crate::interval::{pow2, DyadicInterval};
use crate::maximal::{bmo_norm, dyadic_maximal};
use crate::par;
use crate::paraproduct::{paraproduct_levels, Signature};
use crate::power::{operator_norm, PowerConfig, PowerResult};
use crate::step::PiecewiseConstant;

/// Size of the random perturbation added to the best testing vector before
/// power iteration. Small enough that the starting Rayleigh quotient stays
/// within `1e-8` of the testing supremum.
const START_PERTURBATION: f64 = 1e-4;
const START_SEED: u64 = 0x5eed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub p: f64,
    /// `None` for `p ≠ 2`.
    pub op_norm_estimate: Option<f64>,
    pub testing_sup: f64,
    pub bmo: f64,
    pub power: Option<PowerResult>,
}

/// `T f = (b_I · avg_I f)_I`, so that `‖P^{(0,1,0)}(b, f)‖₂ = ‖T f‖`.
/// Cell coordinates are orthonormal: `u_i = √w · f_i`.
struct Embedding<'a> {
    b: &'a Levels,
}

impl Embedding<'_> {
    fn depth(&self) -> usize {
        self.b.depth()
    }

    fn cells(&self) -> usize {
        1 << self.depth()
    }

    fn len(&self, level: usize) -> f64 {
        pow2(self.b.root.scale - level as i32)
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let d = self.depth();
        let sw = self.len(d).sqrt();
        let mut sums: Vec<f64> = u.iter().map(|x| x * sw).collect();
        let mut out = vec![Vec::new(); d + 1];
        for level in (0..=d).rev() {
            let len = self.len(level);
            out[level] = sums
                .iter()
                .zip(&self.b.haar[level])
                .map(|(s, c)| c * s / len)
                .collect();
            sums = sums.chunks(2).map(|p| p.iter().sum()).collect();
        }
        out.concat()
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let d = self.depth();
        let mut acc = vec![0.0; 1];
        let mut offset = 0;
        for level in 0..=d {
            let n = 1usize << level;
            let len = self.len(level);
            let mut next: Vec<f64> = if level == 0 {
                vec![0.0]
            } else {
                acc.iter().flat_map(|v| [*v, *v]).collect()
            };
            for j in 0..n {
                next[j] += self.b.haar[level][j] * y[offset + j] / len;
            }
            offset += n;
            acc = next;
        }
        let sw = self.len(d).sqrt();
        acc.into_iter().map(|v| v * sw).collect()
    }

    /// `‖T h¹_J‖²` for every `J`, level by level.
    fn testing_squares(&self) -> Vec<Vec<f64>> {
        let d = self.depth();
        let mut energy: Vec<Vec<f64>> = vec![Vec::new(); d + 1];
        for level in (0..=d).rev() {
            energy[level] = (0..1usize << level)
                .map(|j| {
                    let own = self.b.haar[level][j].powi(2);
                    if level == d {
                        own
                    } else {
                        own + energy[level + 1][2 * j] + energy[level + 1][2 * j + 1]
                    }
                })
                .collect();
        }
        // Σ_{I ⊋ J} b_I² / |I|², accumulated top-down
        let mut above: Vec<Vec<f64>> = vec![vec![0.0]];
        for level in 1..=d {
            let len = self.len(level - 1);
            let row = (0..1usize << level)
                .map(|j| above[level - 1][j / 2] + self.b.haar[level - 1][j / 2].powi(2) / (len * len))
                .collect();
            above.push(row);
        }
        (0..=d)
            .map(|level| {
                let len = self.len(level);
                (0..1usize << level)
                    .map(|j| energy[level][j] / len + len * above[level][j])
                    .collect()
            })
            .collect()
    }

    fn testing_vector(&self, level: usize, j: usize) -> Vec<f64> {
        let d = self.depth();
        let mut u = vec![0.0; self.cells()];
        let per = 1usize << (d - level);
        let value = (self.len(d) / self.len(level)).sqrt();
        u[j * per..(j + 1) * per].iter_mut().for_each(|x| *x = value);
        u
    }
}

/// Starting vector `x₀ + ε r` with `r ⊥ x₀` and the sign of `r` chosen so
/// the linear term of the Rayleigh quotient is nonnegative.
pub(crate) fn perturbed_start<A, B>(x0: Vec<f64>, apply: A, adjoint: B, seed: u64) -> Vec<f64>
where
    A: Fn(&[f64]) -> Vec<f64>,
    B: Fn(&[f64]) -> Vec<f64>,
{
    let mut rng = member_rng(seed, 0);
    let n0: f64 = x0.iter().map(|v| v * v).sum::<f64>();
    let mut r: Vec<f64> = (0..x0.len()).map(|_| rng.sample(StandardNormal)).collect();
    if n0 > 0.0 {
        let proj: f64 = r.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>() / n0;
        r.iter_mut().zip(&x0).for_each(|(a, b)| *a -= proj * b);
    }
    let nr = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nr == 0.0 {
        return x0;
    }
    let gram_r = adjoint(&apply(&r));
    let sign = if gram_r.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let scale = sign * START_PERTURBATION * n0.sqrt() / nr;
    x0.iter().zip(&r).map(|(a, b)| a + scale * b).collect()
}

pub fn embedding_report(
    b: &PiecewiseConstant,
    p: f64,
    root: DyadicInterval,
    min_scale: i32,
    power_iters: usize,
) -> Result<EmbeddingReport> {
    check_window(root, min_scale)?;
    check_support(b, root)?;
    if !(p >= 1.0) {
        return Err(crate::Error::InvalidExponent(p));
    }
    let levels = Levels::from_function(b, root, min_scale);
    let bmo = bmo_norm(&analyze(b, root, min_scale)?);
    let op = Embedding { b: &levels };
    if p != 2.0 {
        let testing_sup = testing_sup_lp(&levels, p);
        return Ok(EmbeddingReport {
            p,
            op_norm_estimate: None,
            testing_sup,
            bmo,
            power: None,
        });
    }
    let squares = op.testing_squares();
    let (mut best, mut at) = (0.0f64, (0usize, 0usize));
    for (level, row) in squares.iter().enumerate() {
        for (j, s) in row.iter().enumerate() {
            if *s > best {
                best = *s;
                at = (level, j);
            }
        }
    }
    let testing_sup = best.sqrt();
    let apply = |u: &[f64]| op.apply(u);
    let adjoint = |y: &[f64]| op.adjoint(y);
    let start = perturbed_start(op.testing_vector(at.0, at.1), apply, adjoint, START_SEED);
    let cfg = PowerConfig {
        max_iterations: power_iters,
        ..PowerConfig::default()
    };
    let power = operator_norm(apply, adjoint, start, cfg);
    Ok(EmbeddingReport {
        p,
        op_norm_estimate: Some(power.norm),
        testing_sup,
        bmo,
        power: Some(power),
    })
}

/// `sup_J ‖P^{(0,1,0)}(b, |J|^{-1/p} 1_J)‖_p`, evaluated literally.
fn testing_sup_lp(b: &Levels, p: f64) -> f64 {
    let root = b.root;
    let candidates: Vec<DyadicInterval> = root.subintervals(b.min_scale).collect();
    par::map(&candidates, |j| {
        let f = PiecewiseConstant::indicator_of(*j).scale(j.len().powf(-1.0 / p));
        let lf = Levels::from_function(&f, root, b.min_scale);
        paraproduct_levels(Signature::P010, b, &lf)
            .into_function()
            .lp_norm(p)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingEnsemble {
    pub ensemble_size: usize,
    pub depth: u32,
    pub seed: u64,
    /// `min (testing_sup − bmo)` over the ensemble.
    pub min_testing_margin: f64,
    pub ratio_band: (f64, f64),
    pub ratio_quantiles: Quantiles,
    pub all_converged: bool,
}

/// Random symbols on `[0,1)` resolved at `2^{-depth}`.
pub fn embedding_ensemble(
    ensemble_size: usize,
    depth: u32,
    seed: u64,
    power_iters: usize,
) -> Result<EmbeddingEnsemble> {
    let root = DyadicInterval::unit();
    let reports = par::map_range(ensemble_size, |k| {
        let mut rng = member_rng(seed, k as u64);
        let b = random_step(&mut rng, root, depth, false);
        embedding_report(&b, 2.0, root, -(depth as i32), power_iters)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = reports
        .iter()
        .filter(|r| r.bmo > 0.0)
        .map(|r| r.op_norm_estimate.unwrap_or(f64::NAN) / r.bmo)
        .collect();
    Ok(EmbeddingEnsemble {
        ensemble_size,
        depth,
        seed,
        min_testing_margin: reports
            .iter()
            .map(|r| r.testing_sup - r.bmo)
            .fold(f64::INFINITY, f64::min),
        ratio_band: band(&ratios).unwrap_or((f64::NAN, f64::NAN)),
        ratio_quantiles: Quantiles::of(&ratios),
        all_converged: reports
            .iter()
            .all(|r| r.power.map(|p| p.converged).unwrap_or(false)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingDecomposition {
    /// `𝒟_k = {I : 2^k ≤ |⟨f,h_I⟩|/√|I| < 2^{k+1}}`.
    pub classes: BTreeMap<i32, Vec<DyadicInterval>>,
    /// Inclusion-maximal elements of each class.
    pub maximal: BTreeMap<i32, Vec<DyadicInterval>>,
    /// `Σ_k 4^k Σ_{I* ∈ 𝒟_k*} |I*|`.
    pub carleson_sum: f64,
}

/// `k` with `2^k ≤ x < 2^{k+1}`, for `x > 0`.
fn dyadic_exponent(x: f64) -> i32 {
    let mut k = x.log2().floor() as i32;
    while pow2(k) > x {
        k -= 1;
    }
    while pow2(k + 1) <= x {
        k += 1;
    }
    k
}

pub fn stopping_decomposition(f: &HaarExpansion, root: DyadicInterval) -> StoppingDecomposition {
    let mut classes: BTreeMap<i32, Vec<DyadicInterval>> = BTreeMap::new();
    for (i, c) in &f.coeffs {
        if *c == 0.0 || !root.contains(i) {
            continue;
        }
        classes
            .entry(dyadic_exponent(c.abs() / i.len().sqrt()))
            .or_default()
            .push(*i);
    }
    let mut maximal = BTreeMap::new();
    let mut carleson_sum = 0.0;
    for (k, members) in &classes {
        let set: BTreeSet<DyadicInterval> = members.iter().copied().collect();
        let tops: Vec<DyadicInterval> = members
            .iter()
            .copied()
            .filter(|i| {
                let mut j = *i;
                while j.scale < root.scale {
                    j = j.parent();
                    if set.contains(&j) {
                        return false;
                    }
                }
                true
            })
            .collect();
        carleson_sum += pow2(2 * k) * tops.iter().map(|i| i.len()).sum::<f64>();
        maximal.insert(*k, tops);
    }
    StoppingDecomposition {
        classes,
        maximal,
        carleson_sum,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximalEnsemble {
    pub ensemble_size: usize,
    pub depth: u32,
    pub seed: u64,
    /// `max ‖Mf‖₂ / ‖f‖₂` over random nonnegative `f`.
    pub max_maximal_ratio: f64,
    /// `max carleson_sum / ‖f‖₂²` over random `f`.
    pub carleson_constant: f64,
    pub carleson_quantiles: Quantiles,
}

pub fn maximal_ensemble(ensemble_size: usize, depth: u32, seed: u64) -> Result<MaximalEnsemble> {
    let root = DyadicInterval::unit();
    let min_scale = -(depth as i32);
    let rows = par::map_range(ensemble_size, |k| -> Result<(f64, f64)> {
        let mut rng = member_rng(seed, k as u64);
        let f = random_nonnegative(&mut rng, root, depth);
        let m = dyadic_maximal(&f, root, min_scale)?;
        let e = random_expansion(&mut rng, root, depth, false);
        let s = stopping_decomposition(&e, root);
        let norm2 = synthesize(&e).lp_norm(2.0).powi(2);
        Ok((m.lp_norm(2.0) / f.lp_norm(2.0), s.carleson_sum / norm2))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let carleson: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(MaximalEnsemble {
        ensemble_size,
        depth,
        seed,
        max_maximal_ratio: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        carleson_constant: carleson.iter().copied().fold(0.0, f64::max),
        carleson_quantiles: Quantiles::of(&carleson),
    })
}
