use dyadic_harmonic::carleson::{embedding_report, maximal_ensemble, stopping_decomposition};
use dyadic_harmonic::ensemble::member_rng;
use dyadic_harmonic::haar::{haar_function, random_expansion, random_step, variant_function};
use dyadic_harmonic::maximal::bmo_norm;
use dyadic_harmonic::paraproduct::{
    holder_estimate, holder_ratio, paraproduct, product_decomposition, product_decomposition_general,
    tilde_paraproduct, tilde_paraproduct_with, Signature,
};
use dyadic_harmonic::{analyze, inner_product, DyadicInterval, Error, HaarExpansion, HaarVariant, PiecewiseConstant};

const UNIT: DyadicInterval = DyadicInterval::unit();

fn variant(bit: bool) -> HaarVariant {
    if bit {
        HaarVariant::Mean
    } else {
        HaarVariant::Oscillation
    }
}

/// The defining sum, one inner product at a time.
fn naive(sig: Signature, f1: &PiecewiseConstant, f2: &PiecewiseConstant, min_scale: i32) -> PiecewiseConstant {
    let mut out = PiecewiseConstant::zero();
    for i in UNIT.subintervals(min_scale) {
        let a = inner_product(f1, &variant_function(i, variant(sig.0))) / i.len().sqrt();
        let b = inner_product(f2, &variant_function(i, variant(sig.1)));
        out = out.add(&variant_function(i, variant(sig.2)).scale(a * b));
    }
    out
}

#[test]
fn signature_parsing() {
    assert_eq!(Signature::from_bits(0, 1, 0).unwrap(), Signature::P010);
    assert!(Signature::from_bits(2, 0, 0).is_err());
    assert!(Signature::from_bits(1, 1, 1).is_ok());
    assert!(!Signature::from_bits(1, 1, 1).unwrap().is_bounded_class());
    assert!(!Signature::from_bits(1, 1, 0).unwrap().is_bounded_class());
    assert!(Signature::P100.is_bounded_class());
    let s: Signature = serde_json::from_str("\"(0,1,0)\"").unwrap();
    assert_eq!(s, Signature::P010);
    assert_eq!(serde_json::to_string(&Signature::P001).unwrap(), "\"(0,0,1)\"");
}

#[test]
fn paraproduct_examples() {
    let h = haar_function(UNIT);
    let p = paraproduct(Signature::P001, &h, &h, UNIT, -3).unwrap();
    assert!(p.sup_distance(&PiecewiseConstant::indicator_of(UNIT)) < 1e-15);

    let hl = haar_function(DyadicInterval::new(-1, 0));
    let p = paraproduct(Signature::P010, &hl, &PiecewiseConstant::indicator_of(UNIT), UNIT, -3).unwrap();
    assert!(p.sup_distance(&hl) < 1e-15);

    let outside = PiecewiseConstant::indicator(-1.0, 0.5).unwrap();
    assert!(matches!(
        paraproduct(Signature::P010, &outside, &h, UNIT, -3),
        Err(Error::SupportEscapesRoot { .. })
    ));
}

#[test]
fn every_signature_matches_naive_sum() {
    let depth: i32 = 6;
    let mut rng = member_rng(21, 0);
    let f1 = random_step(&mut rng, UNIT, depth as u32, true);
    let f2 = random_step(&mut rng, UNIT, depth as u32, true);
    for bits in 0..8u8 {
        let sig = Signature::from_bits(bits >> 2 & 1, bits >> 1 & 1, bits & 1).unwrap();
        let fast = paraproduct(sig, &f1, &f2, UNIT, -depth).unwrap();
        let slow = naive(sig, &f1, &f2, -depth);
        assert!(fast.sup_distance(&slow) < 1e-10, "{sig}: {}", fast.sup_distance(&slow));
    }
}

#[test]
fn bilinear_in_both_arguments() {
    let mut rng = member_rng(22, 0);
    let [f, g, k]: [PiecewiseConstant; 3] = std::array::from_fn(|_| random_step(&mut rng, UNIT, 5, false));
    let (a, b) = (1.75, -0.5);
    for sig in [Signature::P100, Signature::P010, Signature::P001, Signature::P000] {
        let p = |x: &PiecewiseConstant, y: &PiecewiseConstant| paraproduct(sig, x, y, UNIT, -5).unwrap();
        let lhs = p(&f.scale(a).add(&g.scale(b)), &k);
        let rhs = p(&f, &k).scale(a).add(&p(&g, &k).scale(b));
        assert!(lhs.sup_distance(&rhs) < 1e-12);
        let lhs = p(&k, &f.scale(a).add(&g.scale(b)));
        let rhs = p(&k, &f).scale(a).add(&p(&k, &g).scale(b));
        assert!(lhs.sup_distance(&rhs) < 1e-12);
    }
}

#[test]
fn duality_between_embedding_and_adjoint() {
    for k in 0..20 {
        let mut rng = member_rng(23, k);
        let [b, f, g]: [PiecewiseConstant; 3] = std::array::from_fn(|_| random_step(&mut rng, UNIT, 6, false));
        let lhs = inner_product(&paraproduct(Signature::P010, &b, &f, UNIT, -6).unwrap(), &g);
        let rhs = inner_product(&f, &paraproduct(Signature::P001, &b, &g, UNIT, -6).unwrap());
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
    }
}

#[test]
fn embedding_against_indicator_is_haar_part() {
    let mut rng = member_rng(24, 0);
    let b = random_step(&mut rng, UNIT, 6, false);
    let p = paraproduct(Signature::P010, &b, &PiecewiseConstant::indicator_of(UNIT), UNIT, -6).unwrap();
    let mean = b.integral() / UNIT.len();
    let want = b.sub(&PiecewiseConstant::indicator_of(UNIT).scale(mean));
    assert!(p.sup_distance(&want) < 1e-12);
}

#[test]
fn tilde_examples() {
    let h = haar_function(UNIT);
    let z = tilde_paraproduct(&PiecewiseConstant::indicator_of(UNIT), &h, UNIT, -3).unwrap();
    assert!(z.is_zero() || z.lp_norm(f64::INFINITY) == 0.0);
    let t = tilde_paraproduct_with(&h, &h, UNIT, -3, 0.5).unwrap();
    let want = haar_function(UNIT.left()).add(&haar_function(UNIT.right()).scale(0.5));
    assert!(t.sup_distance(&want) < 1e-15);
}

#[test]
fn product_decomposition_examples() {
    let j = DyadicInterval::new(-2, 1);
    let h = haar_function(j);
    let d = product_decomposition(&h, &h, UNIT, -4).unwrap();
    assert!(d.p001.sup_distance(&PiecewiseConstant::indicator_of(j).scale(j.len().recip())) < 1e-15);
    assert!(d.p100.lp_norm(f64::INFINITY) < 1e-15);
    assert!(d.p010.lp_norm(f64::INFINITY) < 1e-15);
    assert_eq!(d.residual, 0.0);

    let d = product_decomposition(&haar_function(UNIT), &haar_function(UNIT.left()), UNIT, -3).unwrap();
    assert!(d.residual <= 1e-12);

    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let mut rng = member_rng(25, k);
        let f1 = random_step(&mut rng, UNIT, 8, true);
        let f2 = random_step(&mut rng, UNIT, 8, true);
        worst = worst.max(product_decomposition(&f1, &f2, UNIT, -8).unwrap().residual);
    }
    assert!(worst <= 1e-10, "worst {worst}");
}

#[test]
fn product_decomposition_preconditions() {
    let one = PiecewiseConstant::indicator_of(UNIT);
    let h = haar_function(UNIT);
    assert!(matches!(product_decomposition(&one, &h, UNIT, -3), Err(Error::Precondition(_))));
    let fine = haar_function(DyadicInterval::new(-5, 0));
    assert!(matches!(product_decomposition(&fine, &h, UNIT, -3), Err(Error::Precondition(_))));

    // the general variant carries the mean correction
    let mut rng = member_rng(26, 0);
    let f1 = random_step(&mut rng, UNIT, 6, false);
    let f2 = random_step(&mut rng, UNIT, 6, false);
    let d = product_decomposition_general(&f1, &f2, UNIT, -6).unwrap();
    assert!(d.correction.is_some());
    assert!(d.residual <= 1e-10, "{}", d.residual);
}

#[test]
fn holder_examples() {
    let h = haar_function(UNIT);
    assert_eq!(
        holder_ratio(Signature::P010, &h, &PiecewiseConstant::zero(), 4.0, 4.0, UNIT, -3).unwrap(),
        None
    );
    assert!(paraproduct(Signature::P010, &h, &PiecewiseConstant::zero(), UNIT, -3).unwrap().lp_norm(2.0) == 0.0);
    let r = holder_ratio(Signature::P001, &h, &h, 4.0, 4.0, UNIT, -3).unwrap().unwrap();
    assert!((r - 1.0).abs() < 1e-14, "{r}");

    assert!(matches!(
        holder_estimate(Signature::from_bits(1, 1, 1).unwrap(), 2.0, 2.0, 4, 3, 1),
        Err(Error::UnsupportedSignature(_))
    ));
    assert!(matches!(holder_estimate(Signature::P010, 1.0, 2.0, 4, 3, 1), Err(Error::InvalidExponent(_))));
}

#[test]
fn holder_supremum_is_stable() {
    let a = holder_estimate(Signature::P010, 4.0, 4.0, 1000, 8, 42).unwrap();
    let b = holder_estimate(Signature::P010, 4.0, 4.0, 2000, 8, 42).unwrap();
    assert!(a.max_ratio.is_finite() && a.max_ratio > 0.0);
    assert!(b.max_ratio >= a.max_ratio, "nested ensembles");
    assert!((b.max_ratio - a.max_ratio) / a.max_ratio < 0.5);
    assert_eq!(a, holder_estimate(Signature::P010, 4.0, 4.0, 1000, 8, 42).unwrap());
}

#[test]
fn embedding_examples() {
    for j in [UNIT, DyadicInterval::new(-2, 3)] {
        let r = embedding_report(&haar_function(j), 2.0, UNIT, -5, 500).unwrap();
        assert!((r.bmo - j.len().powf(-0.5)).abs() < 1e-12);
        assert!(r.testing_sup >= r.bmo - 1e-10);
        assert!(r.op_norm_estimate.unwrap() >= r.testing_sup - 1e-8);
    }
    let r = embedding_report(&PiecewiseConstant::indicator_of(UNIT).scale(3.0), 2.0, UNIT, -4, 500).unwrap();
    assert_eq!((r.op_norm_estimate.unwrap(), r.testing_sup, r.bmo), (0.0, 0.0, 0.0));

    // other exponents report the testing quantity only
    let r = embedding_report(&haar_function(UNIT), 3.0, UNIT, -4, 500).unwrap();
    assert!(r.op_norm_estimate.is_none());
}

#[test]
fn testing_sup_dominates_bmo() {
    for k in 0..50 {
        let mut rng = member_rng(27, k);
        let b = random_step(&mut rng, UNIT, 6, false);
        let r = embedding_report(&b, 2.0, UNIT, -6, 2000).unwrap();
        assert!(r.testing_sup >= r.bmo - 1e-10);
        assert!(r.op_norm_estimate.unwrap() >= r.testing_sup - 1e-8);
    }
}

#[test]
fn stopping_examples() {
    let e = analyze(&haar_function(UNIT), UNIT, -3).unwrap();
    let s = stopping_decomposition(&e, UNIT);
    assert_eq!(s.classes.len(), 1);
    assert_eq!(s.classes[&0], vec![UNIT]);
    assert_eq!(s.maximal[&0], vec![UNIT]);
    assert_eq!(s.carleson_sum, 1.0);

    let s = stopping_decomposition(&HaarExpansion::zero(UNIT, -3), UNIT);
    assert!(s.classes.is_empty() && s.maximal.is_empty());
    assert_eq!(s.carleson_sum, 0.0);
}

#[test]
fn stopping_classes_partition_nonzero_coefficients() {
    let mut rng = member_rng(28, 0);
    let e = random_expansion(&mut rng, UNIT, 7, true);
    let s = stopping_decomposition(&e, UNIT);
    let total: usize = s.classes.values().map(Vec::len).sum();
    assert_eq!(total, e.coeffs.values().filter(|c| **c != 0.0).count());
    for (k, class) in &s.classes {
        for i in class {
            let v = e.coeff(i).abs() / i.len().sqrt();
            assert!(2f64.powi(*k) <= v && v < 2f64.powi(k + 1));
        }
        let maximal = &s.maximal[k];
        for i in class {
            assert!(maximal.iter().any(|m| m.contains(i)));
        }
        for a in maximal {
            assert!(maximal.iter().filter(|b| *b != a).all(|b| !b.contains(a)));
        }
    }
    assert!(bmo_norm(&e) > 0.0);
}

#[test]
fn carleson_constant_is_stable() {
    let a = maximal_ensemble(500, 8, 29).unwrap();
    let b = maximal_ensemble(1000, 8, 29).unwrap();
    assert!(a.carleson_constant.is_finite() && a.carleson_constant > 0.0);
    assert!((b.carleson_constant - a.carleson_constant).abs() / a.carleson_constant < 0.5);
    assert!(a.max_maximal_ratio <= 2.0 && b.max_maximal_ratio <= 2.0);
}
