//! Monte-Carlo average of translated and dilated Haar shifts,
//! `∫₀^Y ∫₁² Tr_y Dil_λ 𝔥 Dil_{1/λ} Tr_{−y} f (dλ/λ)(dy/Y)`, and its
//! comparison with the principal-value Hilbert transform.

use std::f64::consts::LN_2;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::member_rng;
use crate::error::{Error, Result};
use crate::hilbert::hilbert_pv;
use crate::interval::pow2;
use crate::par;
use crate::shift::line_shift_events;
use crate::step::PiecewiseConstant;

/// Dyadic scales `2^finest ..= 2^coarsest` kept in every shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleWindow {
    pub finest: i32,
    pub coarsest: i32,
}

impl std::str::FromStr for ScaleWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("scale window `{s}` is not of the form a:b")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<i32>()
                .map_err(|_| Error::Parse(format!("bad scale `{t}` in `{s}`")))
        };
        Ok(Self {
            finest: parse(a)?,
            coarsest: parse(b)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AveragingConfig {
    /// Translation range `Y`.
    pub y_range: f64,
    pub n_y: usize,
    pub n_lambda: usize,
    pub scales: ScaleWindow,
    pub seed: u64,
}

impl AveragingConfig {
    /// `Y = 2^10`, `256 × 256` samples, scales `[−8, 12]`.
    pub fn reference(seed: u64) -> Self {
        Self {
            y_range: 1024.0,
            n_y: 256,
            n_lambda: 256,
            scales: ScaleWindow {
                finest: -8,
                coarsest: 12,
            },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.y_range > 0.0 && self.y_range.is_finite()) {
            return Err(Error::InvalidConfig(format!("Y must be positive, got {}", self.y_range)));
        }
        if self.n_y == 0 || self.n_lambda == 0 {
            return Err(Error::InvalidConfig("sample counts must be at least 1".into()));
        }
        if self.scales.finest > self.scales.coarsest {
            return Err(Error::InvalidConfig(format!(
                "scale window {}:{} is empty",
                self.scales.finest, self.scales.coarsest
            )));
        }
        Ok(())
    }
}

/// Translation/dilation pairs `(y, λ)` with a common weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: Vec<(f64, f64)>,
    pub weight: f64,
}

impl SampleSet {
    pub fn new(samples: Vec<(f64, f64)>, weight: f64) -> Self {
        Self { samples, weight }
    }

    /// Stratified `y = (i + u) Y / n_y` and `λ = 2^{(l + u)/n_λ}` (density
    /// `∝ dλ/λ` on `[1, 2]`), on the product grid. The weight carries the
    /// `ln 2` mass of `dλ/λ`.
    pub fn draw(cfg: &AveragingConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = member_rng(cfg.seed, 0);
        let ys: Vec<f64> = (0..cfg.n_y)
            .map(|i| (i as f64 + rng.random::<f64>()) * cfg.y_range / cfg.n_y as f64)
            .collect();
        let lambdas: Vec<f64> = (0..cfg.n_lambda)
            .map(|l| ((l as f64 + rng.random::<f64>()) / cfg.n_lambda as f64).exp2())
            .collect();
        let samples = ys
            .iter()
            .flat_map(|y| lambdas.iter().map(move |l| (*y, *l)))
            .collect();
        Ok(Self {
            samples,
            weight: LN_2 / (cfg.n_y * cfg.n_lambda) as f64,
        })
    }

    /// Every translation shifted by `m`.
    pub fn translated(&self, m: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|(y, l)| (y + m, *l)).collect(),
            weight: self.weight,
        }
    }
}

fn check_window_covers(f: &PiecewiseConstant, scales: ScaleWindow) -> Result<()> {
    let Some((lo, hi)) = f.support() else {
        return Ok(());
    };
    let len = hi - lo;
    if pow2(scales.coarsest) < 2.0 * len || pow2(scales.finest) >= len {
        return Err(Error::InvalidConfig(format!(
            "scale window {}:{} does not straddle the support length {len}",
            scales.finest, scales.coarsest
        )));
    }
    Ok(())
}

pub fn averaged_shift(f: &PiecewiseConstant, cfg: &AveragingConfig) -> Result<PiecewiseConstant> {
    let samples = SampleSet::draw(cfg)?;
    averaged_shift_with(f, &samples, cfg.scales)
}

/// Exact weighted sum over the sample set. Each sample contributes its jump
/// events; the merged events are summed left to right with compensation, so
/// the output does not depend on the thread count.
pub fn averaged_shift_with(
    f: &PiecewiseConstant,
    samples: &SampleSet,
    scales: ScaleWindow,
) -> Result<PiecewiseConstant> {
    check_window_covers(f, scales)?;
    if f.is_zero() {
        return Ok(PiecewiseConstant::zero());
    }
    let w = samples.weight;
    let per_sample = par::map(&samples.samples, |&(y, lambda)| {
        let mut events = Vec::new();
        if let Ok(u) = f.translate(-y).dilate(lambda.recip(), 2.0) {
            line_shift_events(&u, scales.finest, scales.coarsest, lambda, y, &mut events);
        }
        events.iter_mut().for_each(|e| e.1 *= w);
        events
    });
    let total: usize = per_sample.iter().map(Vec::len).sum();
    let mut events = Vec::with_capacity(total);
    for chunk in per_sample {
        events.extend(chunk);
    }
    Ok(PiecewiseConstant::from_jumps(events))
}

/// Points spaced `2^{finest − 1}` over `[s₀ − 2L, s₁ + 2L]`, dropping those
/// within `2^finest` of a breakpoint of `f`.
pub fn comparison_grid(f: &PiecewiseConstant, scales: ScaleWindow) -> Vec<f64> {
    let Some((lo, hi)) = f.support() else {
        return Vec::new();
    };
    let len = hi - lo;
    let (a, b) = (lo - 2.0 * len, hi + 2.0 * len);
    let step = pow2(scales.finest - 1);
    let radius = pow2(scales.finest);
    let n = ((b - a) / step).floor() as usize;
    (0..n)
        .map(|k| a + (k as f64 + 0.5) * step)
        .filter(|x| f.breakpoints().iter().all(|t| (x - t).abs() > radius))
        .collect()
}

/// `⟨a, b⟩ / (‖a‖ ‖b‖)`.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// `(x, averaged(x), Hf(x))` on the comparison grid.
pub fn triples(f: &PiecewiseConstant, averaged: &PiecewiseConstant, scales: ScaleWindow) -> Result<Vec<(f64, f64, f64)>> {
    comparison_grid(f, scales)
        .into_iter()
        .map(|x| Ok((x, averaged.eval(x), hilbert_pv(f, x)?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionFit {
    pub name: String,
    /// Least-squares `c` in `Hf ≈ c · averaged`.
    pub c_hat: f64,
    /// Cosine between `c_hat · averaged` and `Hf`; the sign of `c_hat` is
    /// absorbed, so a negative constant does not flip it.
    pub cosine_similarity: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Renamed so it cannot collide with the CLI's echoed `config`.
    #[serde(rename = "averaging")]
    pub config: AveragingConfig,
    pub fits: Vec<FunctionFit>,
    /// `(max c_hat − min c_hat) / |mean c_hat|`.
    pub dispersion: f64,
}

pub fn fit_one(name: &str, f: &PiecewiseConstant, averaged: &PiecewiseConstant, scales: ScaleWindow) -> Result<FunctionFit> {
    let rows = triples(f, averaged, scales)?;
    let a: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let e: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let ee: f64 = e.iter().map(|x| x * x).sum();
    if !(aa > 1e-300 && ee > 1e-300) {
        return Err(Error::DegenerateFit(format!("`{name}` has a vanishing comparison vector")));
    }
    let ae: f64 = a.iter().zip(&e).map(|(x, y)| x * y).sum();
    let c_hat = ae / aa;
    let scaled: Vec<f64> = a.iter().map(|x| c_hat * x).collect();
    Ok(FunctionFit {
        name: name.to_string(),
        c_hat,
        cosine_similarity: cosine_similarity(&scaled, &e),
        points: rows.len(),
    })
}

/// Fits `c` separately for each named test function under one shared sample set.
pub fn fit_constant(functions: &[(String, PiecewiseConstant)], cfg: &AveragingConfig) -> Result<FitReport> {
    if functions.len() < 2 {
        return Err(Error::InvalidConfig("fit_constant needs at least two test functions".into()));
    }
    let samples = SampleSet::draw(cfg)?;
    let mut fits = Vec::with_capacity(functions.len());
    for (name, f) in functions {
        let averaged = averaged_shift_with(f, &samples, cfg.scales)?;
        fits.push(fit_one(name, f, &averaged, cfg.scales)?);
    }
    let cs: Vec<f64> = fits.iter().map(|f| f.c_hat).collect();
    let (lo, hi) = crate::ensemble::band(&cs).unwrap_or((0.0, 0.0));
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    Ok(FitReport {
        config: cfg.clone(),
        fits,
        dispersion: (hi - lo) / mean.abs(),
    })
}

/// The three test functions of the reference experiment.
pub fn standard_test_functions() -> Vec<(String, PiecewiseConstant)> {
    vec![
        ("indicator".to_string(), PiecewiseConstant::indicator(0.0, 1.0).expect("valid")),
        (
            "stacked".to_string(),
            PiecewiseConstant::new(vec![0.0, 0.25, 0.75, 1.0], vec![1.0, 2.0, 1.0]).expect("valid"),
        ),
        (
            "skewed".to_string(),
            PiecewiseConstant::new(vec![-0.3, 0.1, 0.45, 1.2], vec![0.5, 1.5, 0.8]).expect("valid"),
        ),
    ]
}

/// Looks up a test function by name.
pub fn test_function(name: &str) -> Option<PiecewiseConstant> {
    standard_test_functions()
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, f)| f)
}
