//! The Haar shift `𝔥 f = Σ ⟨f, h_I⟩ g_I`, its coefficient form, and the
//! commutator `[b, 𝔥]` split into paraproducts.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::{band, member_rng, Quantiles};
use crate::error::{Error, Result};
use crate::grid::{cell_values, check_support, check_window, refine, CellAccumulator, Levels};
use crate::haar::{haar_function, random_step, HaarExpansion};
use crate::interval::{pow2, DyadicInterval};
use crate::maximal::bmo_norm;
use crate::par;
use crate::paraproduct::{paraproduct, require_mean_zero, require_resolved, tilde_paraproduct_with, Signature};
use crate::power::{operator_norm, PowerConfig, PowerResult};
use crate::step::PiecewiseConstant;

/// `⟨𝔥f, h_I⟩ = KAPPA · sgn(I) · ⟨f, h_{Par I}⟩`.
pub const KAPPA: f64 = FRAC_1_SQRT_2;

/// Overall factor of the degenerate commutator term.
pub const DEGENERATE_ALPHA: f64 = -FRAC_1_SQRT_2;
/// Weight of `h_{I_right}` relative to `h_{I_left}` in the degenerate term.
pub const DEGENERATE_C: f64 = 1.0;

const POWER_SEED: u64 = 0xc0fe;

/// `Σ ⟨f, h_I⟩ g_I` over `I ⊆ root` with scale `≥ min_scale`, on cells of
/// scale `min_scale - 2`.
pub fn haar_shift(f: &PiecewiseConstant, root: DyadicInterval, min_scale: i32) -> Result<PiecewiseConstant> {
    check_window(root, min_scale)?;
    check_support(f, root)?;
    let levels = Levels::from_function(f, root, min_scale);
    let mut acc = CellAccumulator::new(root, min_scale - 2);
    for (level, row) in levels.haar.iter().enumerate() {
        for (j, c) in row.iter().enumerate() {
            if *c != 0.0 {
                acc.add_shifted(levels.interval(level, j), *c);
            }
        }
    }
    Ok(acc.into_function())
}

/// Coefficient form: `out[I] = κ sgn(I) e[Par I]`, zero mean, one scale finer.
pub fn haar_shift_coeffs(e: &HaarExpansion) -> HaarExpansion {
    let mut out = HaarExpansion::zero(e.root, e.min_scale - 1);
    out.coeffs.insert(e.root, 0.0);
    for (i, c) in &e.coeffs {
        out.coeffs.insert(i.left(), KAPPA * c);
        out.coeffs.insert(i.right(), -KAPPA * c);
    }
    out
}

/// Jump events `(x, Δ)` of `Σ ⟨u, h_I⟩ g_I` over all dyadic `I` of the line
/// with scale in `[a, b]`, mapped through `t ↦ λ t + y` with jumps scaled by
/// `λ^{-1/2}`.
pub(crate) fn line_shift_events(u: &PiecewiseConstant, a: i32, b: i32, lambda: f64, y: f64, out: &mut Vec<(f64, f64)>) {
    let amp = lambda.sqrt().recip();
    let mut candidates: Vec<i64> = Vec::new();
    for k in a..=b {
        let len = pow2(k);
        candidates.clear();
        candidates.extend(u.breakpoints().iter().map(|t| (t / len).floor() as i64));
        candidates.dedup();
        for &pos in &candidates {
            let i = DyadicInterval::new(k, pos);
            let (s, m, e) = (i.start(), i.center(), i.end());
            let c = (u.integral_over(m, e) - u.integral_over(s, m)) / len.sqrt();
            if c == 0.0 {
                continue;
            }
            let v = c / len.sqrt() * amp;
            let q = 0.25 * len;
            out.push((lambda * s + y, -v));
            out.push((lambda * (s + q) + y, 2.0 * v));
            out.push((lambda * (e - q) + y, -2.0 * v));
            out.push((lambda * e + y, v));
        }
    }
}

/// `Σ ⟨f, h_I⟩ g_I` over all dyadic `I` of the line with scale in `[a, b]`.
pub fn line_haar_shift(f: &PiecewiseConstant, a: i32, b: i32) -> PiecewiseConstant {
    let mut events = Vec::new();
    line_shift_events(f, a, b, 1.0, 0.0, &mut events);
    PiecewiseConstant::from_jumps(events)
}

/// `b·𝔥f − 𝔥(b·f)` with both shifts on the same window.
pub fn commutator_direct(
    b: &PiecewiseConstant,
    f: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<PiecewiseConstant> {
    let shifted = haar_shift(f, root, min_scale)?;
    check_support(b, root)?;
    Ok(b.mul(&shifted).sub(&haar_shift(&b.mul(f), root, min_scale)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorDecomposition {
    /// `P^{(0,1,0)}(b, 𝔥f)`.
    pub p010_shifted: PiecewiseConstant,
    /// `−𝔥 P^{(0,1,0)}(b, f)`.
    pub shift_p010: PiecewiseConstant,
    /// `P^{(0,0,1)}(b, 𝔥f)`.
    pub p001_shifted: PiecewiseConstant,
    /// `−𝔥 P^{(0,0,1)}(b, f)`.
    pub shift_p001: PiecewiseConstant,
    /// `α Σ (⟨b,h_I⟩/√|I|) ⟨f,h_I⟩ (h_{I_left} + c h_{I_right})`.
    pub degenerate: PiecewiseConstant,
    /// `‖commutator_direct − Σ terms‖_∞`.
    pub residual: f64,
}

impl CommutatorDecomposition {
    pub fn terms(&self) -> [&PiecewiseConstant; 5] {
        [
            &self.p010_shifted,
            &self.shift_p010,
            &self.p001_shifted,
            &self.shift_p001,
            &self.degenerate,
        ]
    }

    pub fn sum(&self) -> PiecewiseConstant {
        self.terms()
            .iter()
            .fold(PiecewiseConstant::zero(), |acc, t| acc.add(t))
    }
}

/// The four non-degenerate terms, summed.
fn regular_terms(
    b: &PiecewiseConstant,
    f: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<[PiecewiseConstant; 4]> {
    let hf = haar_shift(f, root, min_scale)?;
    Ok([
        paraproduct(Signature::P010, b, &hf, root, min_scale)?,
        haar_shift(&paraproduct(Signature::P010, b, f, root, min_scale)?, root, min_scale)?.scale(-1.0),
        paraproduct(Signature::P001, b, &hf, root, min_scale)?,
        haar_shift(&paraproduct(Signature::P001, b, f, root, min_scale)?, root, min_scale)?.scale(-1.0),
    ])
}

/// Requires mean-zero `b`, `f` constant on cells of scale `min_scale`.
pub fn commutator_decomposed(
    b: &PiecewiseConstant,
    f: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<CommutatorDecomposition> {
    check_window(root, min_scale)?;
    check_support(b, root)?;
    check_support(f, root)?;
    require_mean_zero(b, root, "b")?;
    require_mean_zero(f, root, "f")?;
    require_resolved(b, min_scale, "b")?;
    require_resolved(f, min_scale, "f")?;
    let [a, bb, c, d] = regular_terms(b, f, root, min_scale)?;
    let degenerate =
        tilde_paraproduct_with(b, f, root, min_scale, DEGENERATE_C)?.scale(DEGENERATE_ALPHA);
    let mut out = CommutatorDecomposition {
        p010_shifted: a,
        shift_p010: bb,
        p001_shifted: c,
        shift_p001: d,
        degenerate,
        residual: 0.0,
    };
    out.residual = commutator_direct(b, f, root, min_scale)?.sup_distance(&out.sum());
    Ok(out)
}

/// Constants of the degenerate term fitted on basis pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegenerateCalibration {
    pub kappa: f64,
    pub alpha: f64,
    pub c: f64,
    pub depth: u32,
    pub min_scale: i32,
    pub pairs: usize,
    /// Worst `‖D − α(L + cR)‖_∞` over the calibration pairs.
    pub max_residual: f64,
}

/// Fits `D = α L + α c R` by least squares, where `D` is the commutator minus
/// the four regular terms and `L`, `R` collect the left- and right-child
/// parts of `Σ (⟨b,h_I⟩/√|I|) ⟨f,h_I⟩ h_{child}`. Pairs are `(h_J, h_J)` and
/// `(h_J, h_{J_child})` for `J ⊆ [0,1)` of depth below `depth`.
pub fn calibrate_degenerate(depth: u32) -> Result<DegenerateCalibration> {
    let root = DyadicInterval::unit();
    let min_scale = -(depth as i32) - 1;
    let mut pairs = Vec::new();
    for j in root.subintervals(-(depth as i32) + 1) {
        let hj = haar_function(j);
        pairs.push((hj.clone(), hj.clone()));
        pairs.push((hj.clone(), haar_function(j.left())));
        pairs.push((hj, haar_function(j.right())));
    }
    let finest = min_scale - 2;
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    let mut parts = Vec::new();
    for (b, f) in &pairs {
        let direct = commutator_direct(b, f, root, min_scale)?;
        let regular = regular_terms(b, f, root, min_scale)?
            .iter()
            .fold(PiecewiseConstant::zero(), |acc, t| acc.add(t));
        let d = direct.sub(&regular);
        let l = tilde_paraproduct_with(b, f, root, min_scale, 0.0)?;
        let r = tilde_paraproduct_with(b, f, root, min_scale, 1.0)?.sub(&l);
        let (dv, lv, rv) = (
            cell_values(&d, root, finest),
            cell_values(&l, root, finest),
            cell_values(&r, root, finest),
        );
        rows.extend((0..dv.len()).map(|i| (lv[i], rv[i], dv[i])));
        parts.push((d, l, r));
    }
    let a = DMatrix::from_fn(rows.len(), 2, |i, k| if k == 0 { rows[i].0 } else { rows[i].1 });
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let sol = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let (x, y) = (sol[0], sol[1]);
    if x == 0.0 {
        return Err(Error::DegenerateFit("left-child weight vanished".into()));
    }
    let max_residual = parts
        .iter()
        .map(|(d, l, r)| d.sup_distance(&l.scale(x).add(&r.scale(y))))
        .fold(0.0, f64::max);
    Ok(DegenerateCalibration {
        kappa: KAPPA,
        alpha: x,
        c: y / x,
        depth,
        min_scale,
        pairs: pairs.len(),
        max_residual,
    })
}

/// `[b, 𝔥]` as a map from cells of scale `m` to cells of scale `m − 1`, in
/// orthonormal coordinates.
pub(crate) struct CommutatorOperator {
    root: DyadicInterval,
    m: i32,
    /// `b` on cells of scale `m`.
    b: Vec<f64>,
}

impl CommutatorOperator {
    pub fn new(b: &PiecewiseConstant, root: DyadicInterval, m: i32) -> Self {
        Self {
            root,
            m,
            b: cell_values(b, root, m),
        }
    }

    pub fn domain_dim(&self) -> usize {
        self.b.len()
    }

    /// `𝔥` from values at scale `m` to values at scale `m − 1`.
    fn shift(&self, values: &[f64]) -> Vec<f64> {
        let levels = Levels::from_cell_values(self.root, self.m, &refine(values, 1));
        let mut acc = CellAccumulator::new(self.root, self.m - 1);
        for level in 0..levels.depth() {
            for (j, c) in levels.haar[level].iter().enumerate() {
                if *c != 0.0 {
                    acc.add_shifted(levels.interval(level, j), *c);
                }
            }
        }
        acc.into_values()
    }

    /// `𝔥*` from values at scale `m − 1` to values at scale `m`.
    fn shift_adjoint(&self, values: &[f64]) -> Vec<f64> {
        let levels = Levels::from_cell_values(self.root, self.m - 1, &refine(values, 1));
        let mut acc = CellAccumulator::new(self.root, self.m);
        let depth = (self.root.scale - self.m) as usize;
        for level in 0..depth {
            for j in 0..1usize << level {
                let c = KAPPA * (levels.haar[level + 1][2 * j] - levels.haar[level + 1][2 * j + 1]);
                if c != 0.0 {
                    acc.add_haar(levels.interval(level, j), c);
                }
            }
        }
        acc.into_values()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (w, wf) = (pow2(self.m), pow2(self.m - 1));
        let f: Vec<f64> = u.iter().map(|x| x / w.sqrt()).collect();
        let bf: Vec<f64> = f.iter().zip(&self.b).map(|(x, y)| x * y).collect();
        let b_fine = refine(&self.b, 1);
        let s = self.shift(&f);
        let t = self.shift(&bf);
        s.iter()
            .zip(&t)
            .zip(&b_fine)
            .map(|((s, t), b)| (b * s - t) * wf.sqrt())
            .collect()
    }

    pub fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        let (w, wf) = (pow2(self.m), pow2(self.m - 1));
        let v: Vec<f64> = y.iter().map(|x| x / wf.sqrt()).collect();
        let b_fine = refine(&self.b, 1);
        let bv: Vec<f64> = v.iter().zip(&b_fine).map(|(x, b)| x * b).collect();
        let s = self.shift_adjoint(&bv);
        let t = self.shift_adjoint(&v);
        s.iter()
            .zip(&t)
            .zip(&self.b)
            .map(|((s, t), b)| (s - b * t) * w.sqrt())
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    pub comm_norm_estimate: f64,
    pub bmo: f64,
    /// `None` when `bmo = 0`.
    pub ratio: Option<f64>,
    pub power: PowerResult,
}

/// Power-iteration estimate of `‖[b, 𝔥]‖_{2→2}` on functions constant on
/// cells of scale `min_scale`; `b` must be resolved at that scale.
pub fn commutator_norm_vs_bmo(
    b: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
    power_iters: usize,
) -> Result<CommutatorReport> {
    check_window(root, min_scale)?;
    check_support(b, root)?;
    require_resolved(b, min_scale, "b")?;
    let op = CommutatorOperator::new(b, root, min_scale);
    let mut rng = member_rng(POWER_SEED, 0);
    let start: Vec<f64> = (0..op.domain_dim()).map(|_| rng.sample(StandardNormal)).collect();
    let cfg = PowerConfig {
        max_iterations: power_iters,
        ..PowerConfig::default()
    };
    let power = operator_norm(|u| op.apply(u), |y| op.adjoint(y), start, cfg);
    let bmo = bmo_norm(&crate::haar::analyze(b, root, min_scale)?);
    Ok(CommutatorReport {
        comm_norm_estimate: power.norm,
        bmo,
        ratio: (bmo > 0.0).then(|| power.norm / bmo),
        power,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorEnsemble {
    pub ensemble_size: usize,
    pub depth: u32,
    pub seed: u64,
    pub ratio_band: (f64, f64),
    pub ratio_quantiles: Quantiles,
    pub all_converged: bool,
}

pub fn commutator_ensemble(
    ensemble_size: usize,
    depth: u32,
    seed: u64,
    power_iters: usize,
) -> Result<CommutatorEnsemble> {
    let root = DyadicInterval::unit();
    let reports = par::map_range(ensemble_size, |k| {
        let mut rng = member_rng(seed, k as u64);
        let b = random_step(&mut rng, root, depth, false);
        commutator_norm_vs_bmo(&b, root, -(depth as i32), power_iters)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = reports.iter().filter_map(|r| r.ratio).collect();
    Ok(CommutatorEnsemble {
        ensemble_size,
        depth,
        seed,
        ratio_band: band(&ratios).unwrap_or((f64::NAN, f64::NAN)),
        ratio_quantiles: Quantiles::of(&ratios),
        all_converged: reports.iter().all(|r| r.power.converged),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{analyze, mean_function, random_expansion, shifted_function, synthesize};
    use crate::step::inner_product;

    const UNIT: DyadicInterval = DyadicInterval::unit();

    #[test]
    fn shift_of_mother_wavelet() {
        let s = haar_shift(&haar_function(UNIT), UNIT, -3).unwrap();
        assert!(s.sup_distance(&shifted_function(UNIT)) < 1e-15);
        let one = PiecewiseConstant::indicator_of(UNIT);
        assert!(haar_shift(&one, UNIT, -3).unwrap().lp_norm(f64::INFINITY) == 0.0);
    }

    #[test]
    fn kappa_by_direct_integration() {
        for k in 0..5 {
            let mut rng = member_rng(67, k);
            let f = random_step(&mut rng, UNIT, 5, true);
            let s = haar_shift(&f, UNIT, -5).unwrap();
            for i in UNIT.subintervals(-5) {
                if i == UNIT {
                    continue;
                }
                let lhs = inner_product(&s, &haar_function(i));
                let rhs = i.sign() * inner_product(&f, &haar_function(i.parent()));
                if rhs.abs() > 1e-8 {
                    assert!((lhs / rhs - KAPPA).abs() < 1e-12);
                } else {
                    assert!(lhs.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn coefficient_form_matches_function_route() {
        let mut rng = member_rng(71, 0);
        let e = random_expansion(&mut rng, UNIT, 6, true);
        let via_functions = analyze(&haar_shift(&synthesize(&e), UNIT, e.min_scale).unwrap(), UNIT, e.min_scale - 1).unwrap();
        let via_coeffs = haar_shift_coeffs(&e);
        for (i, c) in &via_functions.coeffs {
            assert!((c - via_coeffs.coeff(i)).abs() < 1e-12, "{i}");
        }
        assert!(via_functions.mean.abs() < 1e-12);

        let mut unit = HaarExpansion::zero(UNIT, -2);
        unit.coeffs.insert(UNIT, 1.0);
        let out = haar_shift_coeffs(&unit);
        assert_eq!(out.coeff(&UNIT.left()), KAPPA);
        assert_eq!(out.coeff(&UNIT.right()), -KAPPA);
        assert!(haar_shift_coeffs(&HaarExpansion::zero(UNIT, -2)).coeffs.values().all(|c| *c == 0.0));
    }

    #[test]
    fn shift_contracts() {
        for k in 0..10 {
            let mut rng = member_rng(73, k);
            let f = random_step(&mut rng, UNIT, 6, false);
            let s = haar_shift(&f, UNIT, -6).unwrap();
            assert!(s.lp_norm(2.0) <= f.lp_norm(2.0) + 1e-12);
        }
        let mut rng = member_rng(73, 99);
        let f = random_step(&mut rng, UNIT, 6, true);
        let s = haar_shift(&f, UNIT, -6).unwrap();
        assert!((s.lp_norm(2.0) - f.lp_norm(2.0)).abs() < 1e-12);
    }

    #[test]
    fn parent_identity_for_mean_letters() {
        for k in 0..20 {
            let mut rng = member_rng(79, k);
            let scale = -rng.random_range(0..6i32);
            let i = DyadicInterval::new(scale, rng.random_range(-8..8));
            let lhs = mean_function(i).scale(2f64.sqrt()).sub(&mean_function(i.parent()));
            let rhs = haar_function(i.parent()).scale(-i.sign());
            assert!(lhs.sup_distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn line_shift_agrees_with_root_shift() {
        let mut rng = member_rng(83, 0);
        let f = random_step(&mut rng, UNIT, 5, true);
        let root = haar_shift(&f, UNIT, -5).unwrap();
        let line = line_haar_shift(&f, -5, 0);
        assert!(root.sup_distance(&line) < 1e-12);
    }

    #[test]
    fn line_shift_commutes_with_coarse_translation() {
        let f = PiecewiseConstant::new(vec![-0.3, 0.1, 0.7], vec![1.0, -2.5]).unwrap();
        let (a, b) = (-6, 3);
        for m in [-2i32, 1, 3] {
            let y = m as f64 * pow2(b);
            let lhs = line_haar_shift(&f.translate(y), a, b);
            let rhs = line_haar_shift(&f, a, b).translate(y);
            assert!(lhs.sup_distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn commutator_examples() {
        let c = PiecewiseConstant::indicator_of(UNIT).scale(3.0);
        let mut rng = member_rng(89, 0);
        let f = random_step(&mut rng, UNIT, 4, true);
        assert!(commutator_direct(&c, &f, UNIT, -4).unwrap().lp_norm(f64::INFINITY) < 1e-14);

        let h = haar_function(UNIT);
        let direct = commutator_direct(&h, &h, UNIT, -3).unwrap();
        assert!(direct.sup_distance(&h.mul(&shifted_function(UNIT))) < 1e-15);
        let d = commutator_decomposed(&h, &h, UNIT, -3).unwrap();
        assert!(d.residual <= 1e-12);
    }

    #[test]
    fn decomposition_on_random_pairs() {
        for k in 0..10 {
            let mut rng = member_rng(97, k);
            let b = random_step(&mut rng, UNIT, 5, true);
            let f = random_step(&mut rng, UNIT, 5, true);
            let d = commutator_decomposed(&b, &f, UNIT, -5).unwrap();
            assert!(d.residual <= 1e-10, "{}", d.residual);
        }
    }

    #[test]
    fn decomposition_checks_preconditions() {
        let f = PiecewiseConstant::indicator(0.0, 0.5).unwrap();
        let h = haar_function(UNIT);
        assert!(commutator_decomposed(&f, &h, UNIT, -3).is_err());
        let fine = haar_function(DyadicInterval::new(-4, 0));
        assert!(commutator_decomposed(&fine, &h, UNIT, -3).is_err());
    }

    #[test]
    fn calibration_recovers_constants() {
        let cal = calibrate_degenerate(3).unwrap();
        assert!((cal.alpha - DEGENERATE_ALPHA).abs() < 1e-12);
        assert!((cal.c - DEGENERATE_C).abs() < 1e-12);
        assert!(cal.max_residual < 1e-12);
    }

    #[test]
    fn operator_matches_direct_commutator() {
        let mut rng = member_rng(101, 0);
        let b = random_step(&mut rng, UNIT, 4, false);
        let f = random_step(&mut rng, UNIT, 4, false);
        let op = CommutatorOperator::new(&b, UNIT, -4);
        let w = pow2(-4);
        let u: Vec<f64> = cell_values(&f, UNIT, -4).iter().map(|v| v * w.sqrt()).collect();
        let out = op.apply(&u);
        let direct = commutator_direct(&b, &f, UNIT, -4).unwrap();
        let expected = cell_values(&direct, UNIT, -5);
        for (o, e) in out.iter().zip(&expected) {
            assert!((o / pow2(-5).sqrt() - e).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_adjoint_is_transpose() {
        let mut rng = member_rng(103, 0);
        let b = random_step(&mut rng, UNIT, 4, false);
        let op = CommutatorOperator::new(&b, UNIT, -4);
        let u: Vec<f64> = (0..16).map(|_| rng.sample(StandardNormal)).collect();
        let y: Vec<f64> = (0..32).map(|_| rng.sample(StandardNormal)).collect();
        let lhs: f64 = op.apply(&u).iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = u.iter().zip(op.adjoint(&y)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn commutator_norm_examples() {
        let c = PiecewiseConstant::indicator_of(UNIT).scale(2.0);
        let r = commutator_norm_vs_bmo(&c, UNIT, -4, 500).unwrap();
        assert!(r.comm_norm_estimate <= 1e-8);
        assert_eq!(r.ratio, None);

        let r = commutator_norm_vs_bmo(&haar_function(UNIT), UNIT, -4, 500).unwrap();
        assert!(r.power.converged);
        assert_eq!(r.bmo, 1.0);
        let ratio = r.ratio.unwrap();
        assert!(ratio > 0.0 && ratio < 10.0, "{ratio}");
    }
}
