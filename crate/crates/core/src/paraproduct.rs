//! Paraproducts `Σ_I (⟨f₁, h_I^{ε₁}⟩/√|I|) ⟨f₂, h_I^{ε₂}⟩ h_I^{ε₃}` and the
//! three-paraproduct decomposition of a pointwise product.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ensemble::{member_rng, Quantiles};
use crate::error::{Error, Result};
use crate::grid::{check_support, check_window, CellAccumulator, Levels};
use crate::haar::random_step;
use crate::interval::DyadicInterval;
use crate::par;
use crate::step::PiecewiseConstant;

/// Mean-zero tolerance for inputs of the product identity, relative to `‖f‖₂`.
pub const MEAN_ZERO_TOLERANCE: f64 = 1e-12;

/// `(ε₁, ε₂, ε₃)`; `true` selects the mean letter `h¹`, `false` the oscillation `h⁰`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature(pub bool, pub bool, pub bool);

impl Signature {
    pub const P100: Signature = Signature(true, false, false);
    pub const P010: Signature = Signature(false, true, false);
    pub const P001: Signature = Signature(false, false, true);
    pub const P000: Signature = Signature(false, false, false);

    pub fn from_bits(e1: u8, e2: u8, e3: u8) -> Result<Self> {
        let bit = |e: u8| match e {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::UnsupportedSignature(format!("component {e} is not 0 or 1"))),
        };
        Ok(Signature(bit(e1)?, bit(e2)?, bit(e3)?))
    }

    pub fn mean_count(&self) -> usize {
        [self.0, self.1, self.2].iter().filter(|e| **e).count()
    }

    /// At most one mean letter: the signatures with a boundedness claim.
    pub fn is_bounded_class(&self) -> bool {
        self.mean_count() <= 1
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0 as u8, self.1 as u8, self.2 as u8)
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let bits: Vec<u8> = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|t| t.trim().parse::<u8>())
            .collect::<std::result::Result<_, _>>()
            .map_err(serde::de::Error::custom)?;
        match bits.as_slice() {
            [a, b, c] => Signature::from_bits(*a, *b, *c).map_err(serde::de::Error::custom),
            _ => Err(serde::de::Error::custom(format!("bad signature `{s}`"))),
        }
    }
}

pub fn paraproduct(
    sig: Signature,
    f1: &PiecewiseConstant,
    f2: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<PiecewiseConstant> {
    check_window(root, min_scale)?;
    check_support(f1, root)?;
    check_support(f2, root)?;
    let a = Levels::from_function(f1, root, min_scale);
    let b = Levels::from_function(f2, root, min_scale);
    Ok(paraproduct_levels(sig, &a, &b).into_function())
}

pub(crate) fn paraproduct_levels(sig: Signature, a: &Levels, b: &Levels) -> CellAccumulator {
    let mut acc = CellAccumulator::new(a.root, a.min_scale - 1);
    for level in 0..=a.depth() {
        let norm = a.interval(level, 0).len().sqrt();
        for j in 0..1usize << level {
            let c = a.letter(sig.0, level, j) / norm * b.letter(sig.1, level, j);
            if c == 0.0 {
                continue;
            }
            let i = a.interval(level, j);
            if sig.2 {
                acc.add_mean(i, c);
            } else {
                acc.add_haar(i, c);
            }
        }
    }
    acc
}

/// `Σ_I (⟨b, h_I⟩/√|I|) ⟨f, h_I⟩ (h_{I_left} + c·h_{I_right})`, resolved two
/// scales below `min_scale`.
pub fn tilde_paraproduct_with(
    b: &PiecewiseConstant,
    f: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
    c: f64,
) -> Result<PiecewiseConstant> {
    check_window(root, min_scale)?;
    check_support(b, root)?;
    check_support(f, root)?;
    let lb = Levels::from_function(b, root, min_scale);
    let lf = Levels::from_function(f, root, min_scale);
    let mut acc = CellAccumulator::new(root, min_scale - 2);
    for level in 0..=lb.depth() {
        let norm = lb.interval(level, 0).len().sqrt();
        for j in 0..1usize << level {
            let w = lb.haar[level][j] / norm * lf.haar[level][j];
            if w == 0.0 {
                continue;
            }
            let i = lb.interval(level, j);
            acc.add_haar(i.left(), w);
            acc.add_haar(i.right(), c * w);
        }
    }
    Ok(acc.into_function())
}

/// [`tilde_paraproduct_with`] with equal weights on both children.
pub fn tilde_paraproduct(
    b: &PiecewiseConstant,
    f: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<PiecewiseConstant> {
    tilde_paraproduct_with(b, f, root, min_scale, 1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductDecomposition {
    pub p100: PiecewiseConstant,
    pub p001: PiecewiseConstant,
    pub p010: PiecewiseConstant,
    /// Present only for the general variant: `μ₁f₂ + μ₂f₁ − μ₁μ₂ 1_root`.
    pub correction: Option<PiecewiseConstant>,
    /// `‖f₁f₂ − Σ terms‖_∞`.
    pub residual: f64,
}

impl ProductDecomposition {
    pub fn sum(&self) -> PiecewiseConstant {
        let mut s = self.p100.add(&self.p001).add(&self.p010);
        if let Some(c) = &self.correction {
            s = s.add(c);
        }
        s
    }
}

pub(crate) fn require_mean_zero(f: &PiecewiseConstant, root: DyadicInterval, name: &str) -> Result<()> {
    let mean = f.integral() / root.len();
    if mean.abs() > MEAN_ZERO_TOLERANCE * f.lp_norm(2.0).max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!(
            "{name} must have mean zero on {root}, found mean {mean:e}"
        )));
    }
    Ok(())
}

pub(crate) fn require_resolved(f: &PiecewiseConstant, min_scale: i32, name: &str) -> Result<()> {
    if !f.is_resolved_at(min_scale) {
        return Err(Error::Precondition(format!(
            "{name} must be constant on dyadic cells of scale {min_scale}"
        )));
    }
    Ok(())
}

/// `f₁f₂ = P^{(1,0,0)} + P^{(0,0,1)} + P^{(0,1,0)}` for mean-zero inputs that
/// are constant on cells of scale `min_scale`.
pub fn product_decomposition(
    f1: &PiecewiseConstant,
    f2: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<ProductDecomposition> {
    check_window(root, min_scale)?;
    check_support(f1, root)?;
    check_support(f2, root)?;
    require_mean_zero(f1, root, "f1")?;
    require_mean_zero(f2, root, "f2")?;
    require_resolved(f1, min_scale, "f1")?;
    require_resolved(f2, min_scale, "f2")?;
    decompose(f1, f2, root, min_scale, None)
}

/// Variant for inputs with nonzero means: the paraproducts act on the
/// mean-zero parts and the analytic correction is returned alongside.
pub fn product_decomposition_general(
    f1: &PiecewiseConstant,
    f2: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<ProductDecomposition> {
    check_window(root, min_scale)?;
    check_support(f1, root)?;
    check_support(f2, root)?;
    let one = PiecewiseConstant::indicator_of(root);
    let m1 = f1.integral() / root.len();
    let m2 = f2.integral() / root.len();
    let g1 = f1.sub(&one.scale(m1));
    let g2 = f2.sub(&one.scale(m2));
    let correction = f2
        .scale(m1)
        .add(&f1.scale(m2))
        .sub(&one.scale(m1 * m2));
    let mut d = decompose(&g1, &g2, root, min_scale, Some(correction))?;
    d.residual = f1.mul(f2).sup_distance(&d.sum());
    Ok(d)
}

fn decompose(
    f1: &PiecewiseConstant,
    f2: &PiecewiseConstant,
    root: DyadicInterval,
    min_scale: i32,
    correction: Option<PiecewiseConstant>,
) -> Result<ProductDecomposition> {
    let a = Levels::from_function(f1, root, min_scale);
    let b = Levels::from_function(f2, root, min_scale);
    let mut d = ProductDecomposition {
        p100: paraproduct_levels(Signature::P100, &a, &b).into_function(),
        p001: paraproduct_levels(Signature::P001, &a, &b).into_function(),
        p010: paraproduct_levels(Signature::P010, &a, &b).into_function(),
        correction,
        residual: 0.0,
    };
    d.residual = f1.mul(f2).sup_distance(&d.sum());
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub operation: String,
    pub signature: Signature,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
    pub ensemble_size: usize,
    pub depth: u32,
    pub seed: u64,
    /// Pairs with a nonzero denominator.
    pub evaluated: usize,
    pub max_ratio: f64,
    pub quantiles: Quantiles,
}

/// Empirical `‖P(f₁,f₂)‖_q / (‖f₁‖_{p₁} ‖f₂‖_{p₂})` over random pairs on `[0,1)`.
pub fn holder_estimate(
    sig: Signature,
    p1: f64,
    p2: f64,
    ensemble_size: usize,
    depth: u32,
    seed: u64,
) -> Result<HolderReport> {
    if !sig.is_bounded_class() {
        return Err(Error::UnsupportedSignature(format!(
            "{sig} has more than one mean letter"
        )));
    }
    for p in [p1, p2] {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
    }
    let q = 1.0 / (1.0 / p1 + 1.0 / p2);
    let root = DyadicInterval::unit();
    let min_scale = -(depth as i32);
    let ratios = par::map_range(ensemble_size, |k| -> Result<Option<f64>> {
        let mut rng = member_rng(seed, k as u64);
        let f1 = random_step(&mut rng, root, depth, false);
        let f2 = random_step(&mut rng, root, depth, false);
        holder_ratio(sig, &f1, &f2, p1, p2, root, min_scale)
    });
    let ratios: Vec<f64> = ratios
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(HolderReport {
        operation: "holder_estimate".into(),
        signature: sig,
        p1,
        p2,
        q,
        ensemble_size,
        depth,
        seed,
        evaluated: ratios.len(),
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        quantiles: Quantiles::of(&ratios),
    })
}

/// `None` when either input has zero norm.
pub fn holder_ratio(
    sig: Signature,
    f1: &PiecewiseConstant,
    f2: &PiecewiseConstant,
    p1: f64,
    p2: f64,
    root: DyadicInterval,
    min_scale: i32,
) -> Result<Option<f64>> {
    let q = 1.0 / (1.0 / p1 + 1.0 / p2);
    let den = f1.lp_norm(p1) * f2.lp_norm(p2);
    if den == 0.0 {
        return Ok(None);
    }
    let p = paraproduct(sig, f1, f2, root, min_scale)?;
    Ok(Some(p.lp_norm(q) / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::{analyze, haar_function, mean_function, random_expansion, synthesize};
    use crate::step::inner_product;

    const UNIT: DyadicInterval = DyadicInterval::unit();

    /// Literal triple loop over intervals and letters, via inner products.
    fn naive(sig: Signature, f1: &PiecewiseConstant, f2: &PiecewiseConstant, min: i32) -> PiecewiseConstant {
        let letter = |mean: bool, i: DyadicInterval| {
            if mean {
                mean_function(i)
            } else {
                haar_function(i)
            }
        };
        let mut out = PiecewiseConstant::zero();
        for i in UNIT.subintervals(min) {
            let c = inner_product(f1, &letter(sig.0, i)) / i.len().sqrt()
                * inner_product(f2, &letter(sig.1, i));
            if c != 0.0 {
                out = out.add(&letter(sig.2, i).scale(c));
            }
        }
        out
    }

    #[test]
    fn single_interval_examples() {
        let h = haar_function(UNIT);
        let p = paraproduct(Signature::P001, &h, &h, UNIT, -3).unwrap();
        assert!(p.sup_distance(&PiecewiseConstant::indicator_of(UNIT)) < 1e-15);

        let hl = haar_function(DyadicInterval::new(-1, 0));
        let one = PiecewiseConstant::indicator_of(UNIT);
        let p = paraproduct(Signature::P010, &hl, &one, UNIT, -3).unwrap();
        assert!(p.sup_distance(&hl) < 1e-15);
    }

    #[test]
    fn matches_naive_sum() {
        for (k, sig) in [Signature::P010, Signature::P100, Signature::P001, Signature::P000]
            .into_iter()
            .enumerate()
        {
            let mut rng = member_rng(17, k as u64);
            let f1 = synthesize(&random_expansion(&mut rng, UNIT, 6, true));
            let f2 = synthesize(&random_expansion(&mut rng, UNIT, 6, true));
            let fast = paraproduct(sig, &f1, &f2, UNIT, -6).unwrap();
            let slow = naive(sig, &f1, &f2, -6);
            assert!(fast.sup_distance(&slow) < 1e-11, "{sig}");
        }
    }

    #[test]
    fn product_identity_basis_cases() {
        let h = haar_function(UNIT);
        let d = product_decomposition(&h, &h, UNIT, -3).unwrap();
        assert!(d.p001.sup_distance(&PiecewiseConstant::indicator_of(UNIT)) < 1e-15);
        assert!(d.p100.is_zero() || d.p100.lp_norm(f64::INFINITY) < 1e-15);
        assert!(d.p010.is_zero() || d.p010.lp_norm(f64::INFINITY) < 1e-15);
        assert_eq!(d.residual, 0.0);

        let d = product_decomposition(&h, &haar_function(DyadicInterval::new(-1, 0)), UNIT, -3).unwrap();
        assert!(d.residual <= 1e-12);
    }

    #[test]
    fn product_identity_rejects_means() {
        let f = PiecewiseConstant::indicator(0.0, 0.5).unwrap();
        let h = haar_function(UNIT);
        assert!(matches!(
            product_decomposition(&f, &h, UNIT, -3),
            Err(Error::Precondition(_))
        ));
        let d = product_decomposition_general(&f, &h, UNIT, -3).unwrap();
        assert!(d.residual <= 1e-14);
    }

    #[test]
    fn general_variant_on_random_pairs() {
        for k in 0..10 {
            let mut rng = member_rng(23, k);
            let f1 = random_step(&mut rng, UNIT, 6, false);
            let f2 = random_step(&mut rng, UNIT, 6, false);
            let d = product_decomposition_general(&f1, &f2, UNIT, -6).unwrap();
            assert!(d.residual <= 1e-10, "{}", d.residual);
        }
    }

    #[test]
    fn duality_of_010_and_001() {
        for k in 0..10 {
            let mut rng = member_rng(29, k);
            let b = random_step(&mut rng, UNIT, 6, false);
            let f = random_step(&mut rng, UNIT, 6, false);
            let g = random_step(&mut rng, UNIT, 6, false);
            let lhs = inner_product(&paraproduct(Signature::P010, &b, &f, UNIT, -6).unwrap(), &g);
            let rhs = inner_product(&f, &paraproduct(Signature::P001, &b, &g, UNIT, -6).unwrap());
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
        }
    }

    #[test]
    fn multiplier_against_constant() {
        let mut rng = member_rng(31, 0);
        let b = random_step(&mut rng, UNIT, 5, true);
        let one = PiecewiseConstant::indicator_of(UNIT);
        let p = paraproduct(Signature::P010, &b, &one, UNIT, -5).unwrap();
        // avg_I 1 = 1, so only the Haar part of b survives
        assert!(p.sup_distance(&b) < 1e-12);
        let e = analyze(&p, UNIT, -5).unwrap();
        assert!(e.mean.abs() < 1e-14);
    }

    #[test]
    fn tilde_single_term() {
        let h = haar_function(UNIT);
        let t = tilde_paraproduct_with(&h, &h, UNIT, -3, 1.0).unwrap();
        let expected = haar_function(UNIT.left()).add(&haar_function(UNIT.right()));
        assert!(t.sup_distance(&expected) < 1e-15);
        let zero = PiecewiseConstant::indicator_of(UNIT);
        assert!(tilde_paraproduct(&zero, &h, UNIT, -3).unwrap().is_zero());
    }

    #[test]
    fn holder_single_pair() {
        let h = haar_function(UNIT);
        let r = holder_ratio(Signature::P001, &h, &h, 4.0, 4.0, UNIT, -3).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-15);
        let zero = PiecewiseConstant::zero();
        assert_eq!(holder_ratio(Signature::P010, &h, &zero, 4.0, 4.0, UNIT, -3).unwrap(), None);
        assert!(paraproduct(Signature::P010, &h, &zero, UNIT, -3).unwrap().is_zero());
    }

    #[test]
    fn holder_rejects_fractional_class() {
        assert!(holder_estimate(Signature(true, true, true), 4.0, 4.0, 4, 3, 1).is_err());
        assert!(holder_estimate(Signature(true, true, false), 4.0, 4.0, 4, 3, 1).is_err());
        assert!(holder_estimate(Signature::P010, 1.0, 4.0, 4, 3, 1).is_err());
    }

    #[test]
    fn signature_text() {
        let s = Signature::P010;
        assert_eq!(serde_json::to_string(&s).unwrap(), "\"(0,1,0)\"");
        assert_eq!(serde_json::from_str::<Signature>("\"(0,1,0)\"").unwrap(), s);
        assert!(Signature::from_bits(0, 2, 0).is_err());
    }
}
