//! Experiment drivers behind the `dyadic` binary. Every report embeds its
//! configuration and is a pure function of it, so reruns serialize to the
//! same bytes regardless of thread count.

use serde::{Deserialize, Serialize};

use crate::averaging::{self, AveragingConfig, FitReport, SampleSet};
use crate::carleson::{embedding_ensemble, embedding_report, maximal_ensemble, EmbeddingEnsemble, EmbeddingReport, MaximalEnsemble};
use crate::ensemble::member_rng;
use crate::error::{Error, Result};
use crate::fourier::{block_identity_check, commutator_identity_check, SpectralPolynomial};
use crate::haar::{analyze, haar_function, random_step, synthesize};
use crate::hankel::{hankel_report, HankelReport};
use crate::hilbert::gamma0;
use crate::interval::DyadicInterval;
use crate::maximal::bmo_norm;
use crate::paraproduct::{holder_estimate, product_decomposition, product_decomposition_general, HolderReport, Signature};
use crate::shift::{calibrate_degenerate, DegenerateCalibration, DEGENERATE_ALPHA, DEGENERATE_C, KAPPA};
use crate::shift::{commutator_decomposed, commutator_ensemble, commutator_norm_vs_bmo, CommutatorEnsemble, CommutatorReport};
use crate::step::{inner_product, PiecewiseConstant};
use crate::par;

pub const SCHEMA: u32 = 1;
pub const MAX_DEPTH: u32 = 20;

/// Sup-norm tolerance for identities between step functions.
pub const STEP_TOLERANCE: f64 = 1e-10;
/// `ℓ²` tolerance for identities on the trigonometric model.
pub const SPECTRAL_TOLERANCE: f64 = 1e-12;
/// Sandwich slack for `lower ≤ sigma0 ≤ inf_estimate`.
pub const SANDWICH_SLACK: f64 = 1e-6;
pub const HANKEL_IDENTITY_BAND: usize = 8;
/// Depth at which the degenerate-term constants are solved for.
pub const CALIBRATION_DEPTH: u32 = 3;
/// The frozen calibration report, regenerated by `dyadic calibrate`.
pub const CALIBRATION_JSON: &str = include_str!("../calibration/degenerate.json");

pub fn stored_calibration() -> Result<DegenerateCalibration> {
    serde_json::from_str(CALIBRATION_JSON).map_err(|e| Error::Parse(e.to_string()))
}

pub fn fresh_calibration() -> Result<DegenerateCalibration> {
    calibrate_degenerate(CALIBRATION_DEPTH)
}

/// Largest deviation between the stored report and the constants in code.
pub fn calibration_drift(stored: &DegenerateCalibration) -> f64 {
    [
        stored.kappa - KAPPA,
        stored.alpha - DEGENERATE_ALPHA,
        stored.c - DEGENERATE_C,
    ]
    .iter()
    .map(|d| d.abs())
    .fold(0.0, f64::max)
}

/// Orthonormality is checked on at most this many levels.
const ORTHONORMAL_LEVELS: u32 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub instances: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(identity: &str, residuals: &[f64], tolerance: f64) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        Self {
            identity: identity.to_string(),
            instances: residuals.len(),
            max_residual,
            tolerance,
            passed: residuals.iter().all(|r| *r <= tolerance),
        }
    }
}

fn collect(rows: Vec<Result<f64>>) -> Result<Vec<f64>> {
    rows.into_iter().collect()
}

/// Runs every exact-identity suite on `instances` random inputs of the
/// given depth. Depth 0 degenerates to single-interval inputs.
pub fn verify_suites(depth: u32, seed: u64, instances: usize) -> Result<Vec<IdentityCheck>> {
    if depth > MAX_DEPTH {
        return Err(Error::InvalidConfig(format!("depth {depth} exceeds {MAX_DEPTH}")));
    }
    let root = DyadicInterval::unit();
    let min = -(depth as i32);
    // one stream family per suite
    let stream = |suite: u64, k: usize| member_rng(seed, (suite << 32) | k as u64);

    let roundtrip = collect(par::map_range(instances, |k| {
        let f = random_step(&mut stream(1, k), root, depth, false);
        Ok(synthesize(&analyze(&f, root, min)?).sup_distance(&f))
    }))?;

    let levels = depth.min(ORTHONORMAL_LEVELS) as i32;
    let basis: Vec<PiecewiseConstant> = root
        .subintervals(-levels + 1)
        .map(haar_function)
        .chain(std::iter::once(PiecewiseConstant::indicator_of(root)))
        .collect();
    let orthonormal: Vec<f64> = par::map_range(basis.len(), |i| {
        basis
            .iter()
            .enumerate()
            .map(|(j, g)| (inner_product(&basis[i], g) - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    });

    let product = collect(par::map_range(instances, |k| {
        let mut rng = stream(3, k);
        let f1 = random_step(&mut rng, root, depth, true);
        let f2 = random_step(&mut rng, root, depth, true);
        Ok(product_decomposition(&f1, &f2, root, min)?.residual)
    }))?;

    let product_general = collect(par::map_range(instances, |k| {
        let mut rng = stream(4, k);
        let f1 = random_step(&mut rng, root, depth, false);
        let f2 = random_step(&mut rng, root, depth, false);
        Ok(product_decomposition_general(&f1, &f2, root, min)?.residual)
    }))?;

    let commutator = collect(par::map_range(instances, |k| {
        let mut rng = stream(5, k);
        let b = random_step(&mut rng, root, depth, true);
        let f = random_step(&mut rng, root, depth, true);
        Ok(commutator_decomposed(&b, &f, root, min)?.residual)
    }))?;

    let n = HANKEL_IDENTITY_BAND;
    let spectral = par::map_range(instances, |k| -> Result<(f64, f64, f64, f64)> {
        let mut rng = stream(6, k);
        let b = SpectralPolynomial::random(&mut rng, n);
        let f = SpectralPolynomial::random(&mut rng, n);
        let (upper, lower) = block_identity_check(&b, &f, 2 * n)?;
        let involution = f.hilbert_alg().hilbert_alg().sub(&f).l2_norm();
        Ok((commutator_identity_check(&b, &f, 2 * n)?, upper, lower, involution))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let pick = |i: usize| -> Vec<f64> {
        spectral
            .iter()
            .map(|r| [r.0, r.1, r.2, r.3][i])
            .collect()
    };

    let drift = calibration_drift(&stored_calibration()?);

    Ok(vec![
        IdentityCheck::new("calibration_matches_code", &[drift], STEP_TOLERANCE),
        IdentityCheck::new("haar_reconstruction", &roundtrip, STEP_TOLERANCE),
        IdentityCheck::new("haar_orthonormality", &orthonormal, STEP_TOLERANCE),
        IdentityCheck::new("product_three_paraproducts", &product, STEP_TOLERANCE),
        IdentityCheck::new("product_with_means", &product_general, STEP_TOLERANCE),
        IdentityCheck::new("commutator_five_terms", &commutator, STEP_TOLERANCE),
        IdentityCheck::new("hilbert_commutator_projections", &pick(0), SPECTRAL_TOLERANCE),
        IdentityCheck::new("block_plus_minus", &pick(1), SPECTRAL_TOLERANCE),
        IdentityCheck::new("block_minus_minus", &pick(2), SPECTRAL_TOLERANCE),
        IdentityCheck::new("hilbert_involution", &pick(3), SPECTRAL_TOLERANCE),
    ])
}

/// `b = h_[0,1)` with its BMO norm and the two norm estimates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSymbol {
    pub symbol: String,
    pub bmo: f64,
    pub embedding: EmbeddingReport,
    pub commutator: CommutatorReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsSections {
    pub reference: ReferenceSymbol,
    pub embedding: EmbeddingEnsemble,
    pub commutator: CommutatorEnsemble,
    pub maximal: MaximalEnsemble,
    pub holder: Vec<HolderReport>,
}

/// `(p1, p2)` pairs for the Hölder ensembles.
pub const HOLDER_EXPONENTS: [(f64, f64); 3] = [(2.0, 2.0), (4.0, 4.0), (3.0, 6.0)];

pub fn norms_sections(depth: u32, seed: u64, ensemble: usize, power_iters: usize) -> Result<NormsSections> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidConfig(format!("norms need depth in 1..={MAX_DEPTH}, got {depth}")));
    }
    let root = DyadicInterval::unit();
    let h = haar_function(root);
    let min = -(depth as i32);
    let reference = ReferenceSymbol {
        symbol: "h_[0,1)".into(),
        bmo: bmo_norm(&analyze(&h, root, min)?),
        embedding: embedding_report(&h, 2.0, root, min, power_iters)?,
        commutator: commutator_norm_vs_bmo(&h, root, min, power_iters)?,
    };
    let mut holder = Vec::new();
    for sig in [Signature::P100, Signature::P010, Signature::P001] {
        for (p1, p2) in HOLDER_EXPONENTS {
            holder.push(holder_estimate(sig, p1, p2, ensemble, depth, seed)?);
        }
    }
    Ok(NormsSections {
        reference,
        embedding: embedding_ensemble(ensemble, depth, seed, power_iters)?,
        commutator: commutator_ensemble(ensemble, depth, seed, power_iters)?,
        maximal: maximal_ensemble(ensemble, depth, seed)?,
        holder,
    })
}

/// One plot row: function name, grid point, averaged shift, exact transform.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftRow {
    pub function: String,
    pub x: f64,
    pub averaged: f64,
    pub exact: f64,
}

pub fn shift_average_run(functions: &[String], cfg: &AveragingConfig) -> Result<(FitReport, Vec<ShiftRow>)> {
    if functions.is_empty() {
        return Err(Error::InvalidConfig("no test functions given".into()));
    }
    cfg.validate()?;
    let named = functions
        .iter()
        .map(|n| {
            averaging::test_function(n)
                .map(|f| (n.clone(), f))
                .ok_or_else(|| Error::InvalidConfig(format!("unknown test function `{n}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = SampleSet::draw(cfg)?;
    let mut fits = Vec::new();
    let mut rows = Vec::new();
    for (name, f) in &named {
        let averaged = averaging::averaged_shift_with(f, &samples, cfg.scales)?;
        fits.push(averaging::fit_one(name, f, &averaged, cfg.scales)?);
        for (x, a, e) in averaging::triples(f, &averaged, cfg.scales)? {
            rows.push(ShiftRow {
                function: name.clone(),
                x,
                averaged: a,
                exact: e,
            });
        }
    }
    let cs: Vec<f64> = fits.iter().map(|f| f.c_hat).collect();
    let (lo, hi) = crate::ensemble::band(&cs).unwrap_or((0.0, 0.0));
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let report = FitReport {
        config: cfg.clone(),
        fits,
        dispersion: (hi - lo) / mean.abs(),
    };
    Ok((report, rows))
}

pub const GAMMA_GRID_STEP: f64 = 1e-3;
pub const GAMMA_GRID_HALF_WIDTH: f64 = 1.5;

/// `(x, γ₀(x))` for `x = k/1000` over `[−1.5, 1.5]`.
pub fn gamma0_samples() -> Vec<(f64, f64)> {
    let g = gamma0();
    let n = (GAMMA_GRID_HALF_WIDTH / GAMMA_GRID_STEP).round() as i64;
    (-n..=n)
        .map(|k| {
            let x = k as f64 / 1000.0;
            (x, g.eval(x))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HankelEntry {
    pub index: usize,
    pub symbol: SpectralPolynomial,
    #[serde(flatten)]
    pub report: HankelReport,
    pub identity_residual: f64,
    pub sandwich_holds: bool,
}

/// Sandwich `lower ≤ sigma0 ≤ inf_estimate + slack` and the commutator
/// identity against a random partner, for every symbol.
pub fn hankel_batch(
    symbols: &[SpectralPolynomial],
    budget: usize,
    samples: usize,
    seed: u64,
    iterations: usize,
) -> Result<Vec<HankelEntry>> {
    par::map_range(symbols.len(), |i| {
        let b = &symbols[i];
        let report = hankel_report(b, budget, samples, seed, iterations)?;
        let f = SpectralPolynomial::random(&mut member_rng(seed ^ 0x5eed, i as u64), b.band());
        let identity_residual = commutator_identity_check(b, &f, 2 * b.band())?;
        let sandwich_holds = report.lower <= report.sigma0 + 1e-10
            && report.sigma0 <= report.inf_estimate + SANDWICH_SLACK;
        Ok(HankelEntry {
            index: i,
            symbol: b.clone(),
            report,
            identity_residual,
            sandwich_holds,
        })
    })
    .into_iter()
    .collect()
}

pub fn random_symbols(count: usize, band: usize, seed: u64) -> Vec<SpectralPolynomial> {
    (0..count)
        .map(|i| SpectralPolynomial::random(&mut member_rng(seed, i as u64), band))
        .collect()
}
