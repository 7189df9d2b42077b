use dyadic_harmonic::ensemble::member_rng;
use dyadic_harmonic::haar::{haar_function, mean_function, random_expansion, random_step, shifted_function};
use dyadic_harmonic::harness::{calibration_drift, stored_calibration, CALIBRATION_DEPTH};
use dyadic_harmonic::shift::{
    calibrate_degenerate, commutator_decomposed, commutator_direct, commutator_ensemble, commutator_norm_vs_bmo,
    haar_shift, haar_shift_coeffs, DEGENERATE_ALPHA, DEGENERATE_C, KAPPA,
};
use dyadic_harmonic::{analyze, inner_product, synthesize, DyadicInterval, Error, HaarExpansion, PiecewiseConstant};
use rand::Rng;

const UNIT: DyadicInterval = DyadicInterval::unit();

#[test]
fn shift_examples() {
    let g = haar_shift(&haar_function(UNIT), UNIT, -3).unwrap();
    assert!(g.sup_distance(&shifted_function(UNIT)) < 1e-15);
    assert!(haar_shift(&PiecewiseConstant::indicator_of(UNIT), UNIT, -3)
        .unwrap()
        .lp_norm(f64::INFINITY)
        .eq(&0.0));
    assert!(matches!(
        haar_shift(&PiecewiseConstant::indicator(0.0, 2.0).unwrap(), UNIT, -3),
        Err(Error::SupportEscapesRoot { .. })
    ));
}

#[test]
fn coefficient_identity_with_calibrated_kappa() {
    let mut rng = member_rng(31, 0);
    let f = random_step(&mut rng, UNIT, 6, false);
    let sf = haar_shift(&f, UNIT, -6).unwrap();
    for i in UNIT.subintervals(-6).filter(|i| *i != UNIT) {
        let lhs = inner_product(&sf, &haar_function(i));
        let rhs = KAPPA * i.sign() * inner_product(&f, &haar_function(i.parent()));
        assert!((lhs - rhs).abs() < 1e-12, "{i}: {lhs} vs {rhs}");
    }
    assert!((KAPPA - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-16);
}

#[test]
fn shift_is_a_contraction() {
    for k in 0..30 {
        let mut rng = member_rng(32, k);
        let f = random_step(&mut rng, UNIT, 6, k % 2 == 0);
        let sf = haar_shift(&f, UNIT, -6).unwrap();
        let n = f.lp_norm(2.0);
        assert!(sf.lp_norm(2.0) <= n + 1e-12);
        let mean = f.integral();
        // orthonormal g family: only the mean is lost
        assert!((sf.lp_norm(2.0).powi(2) - (n * n - mean * mean)).abs() < 1e-12 * n * n.max(1.0));
    }
}

#[test]
fn shift_is_linear() {
    let mut rng = member_rng(33, 0);
    let f = random_step(&mut rng, UNIT, 5, false);
    let g = random_step(&mut rng, UNIT, 5, false);
    let lhs = haar_shift(&f.scale(2.0).sub(&g.scale(0.25)), UNIT, -5).unwrap();
    let rhs = haar_shift(&f, UNIT, -5)
        .unwrap()
        .scale(2.0)
        .sub(&haar_shift(&g, UNIT, -5).unwrap().scale(0.25));
    assert!(lhs.sup_distance(&rhs) < 1e-12);
}

#[test]
fn coefficient_form_examples() {
    let mut e = HaarExpansion::zero(UNIT, -2);
    e.coeffs.insert(UNIT, 1.0);
    let out = haar_shift_coeffs(&e);
    assert_eq!(out.coeff(&UNIT.left()), KAPPA);
    assert_eq!(out.coeff(&UNIT.right()), -KAPPA);
    assert_eq!(out.mean, 0.0);
    let z = haar_shift_coeffs(&HaarExpansion::zero(UNIT, -2));
    assert!(z.coeffs.values().all(|c| *c == 0.0) && z.mean == 0.0);
}

#[test]
fn coefficient_form_matches_function_route() {
    for k in 0..20 {
        let mut rng = member_rng(34, k);
        let e = random_expansion(&mut rng, UNIT, 5, false);
        let out = haar_shift_coeffs(&e);
        let via = analyze(&haar_shift(&synthesize(&e), UNIT, e.min_scale).unwrap(), UNIT, out.min_scale - 1).unwrap();
        for (i, c) in &out.coeffs {
            assert!((via.coeff(i) - c).abs() < 1e-12, "{i}");
        }
        assert!(via.mean.abs() < 1e-12);
    }
}

#[test]
fn parent_sign_identity_for_means() {
    let mut rng = member_rng(35, 0);
    for _ in 0..50 {
        let i = DyadicInterval::new(rng.random_range(-10..3), rng.random_range(-100..100));
        let p = i.parent();
        let lhs = mean_function(i).scale(2f64.sqrt()).sub(&mean_function(p));
        let rhs = haar_function(p).scale(-i.sign());
        assert!(lhs.sup_distance(&rhs) < 1e-12 * p.len().powf(-0.5));
    }
}

#[test]
fn commutator_direct_examples() {
    let mut rng = member_rng(36, 0);
    let f = random_step(&mut rng, UNIT, 5, false);
    let c = PiecewiseConstant::indicator_of(UNIT).scale(2.5);
    assert!(commutator_direct(&c, &f, UNIT, -5).unwrap().lp_norm(f64::INFINITY) < 1e-12);

    let h = haar_function(UNIT);
    let got = commutator_direct(&h, &h, UNIT, -3).unwrap();
    assert!(got.sup_distance(&h.mul(&shifted_function(UNIT))) < 1e-15);
}

#[test]
fn decomposition_examples() {
    let mut rng = member_rng(37, 0);
    let f = random_step(&mut rng, UNIT, 5, true);
    let d = commutator_decomposed(&PiecewiseConstant::zero(), &f, UNIT, -5).unwrap();
    assert!(d.terms().iter().all(|t| t.lp_norm(f64::INFINITY) == 0.0));
    assert_eq!(d.residual, 0.0);

    let h = haar_function(UNIT);
    let d = commutator_decomposed(&h, &h, UNIT, -3).unwrap();
    assert!(d.residual <= 1e-12);
    // the four regular terms vanish, so the degenerate one carries everything
    let direct = commutator_direct(&h, &h, UNIT, -3).unwrap();
    assert!(d.degenerate.sup_distance(&direct) <= 1e-12);

    let one = PiecewiseConstant::indicator_of(UNIT);
    assert!(matches!(commutator_decomposed(&one, &h, UNIT, -3), Err(Error::Precondition(_))));
}

#[test]
fn decomposition_residual_hundred_pairs() {
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let mut rng = member_rng(38, k);
        let b = random_step(&mut rng, UNIT, 7, true);
        let f = random_step(&mut rng, UNIT, 7, true);
        worst = worst.max(commutator_decomposed(&b, &f, UNIT, -7).unwrap().residual);
    }
    assert!(worst <= 1e-10, "worst {worst}");
}

#[test]
fn calibration_is_rederived() {
    let fresh = calibrate_degenerate(CALIBRATION_DEPTH).unwrap();
    let stored = stored_calibration().unwrap();
    assert!((fresh.kappa - stored.kappa).abs() < 1e-15);
    assert!((fresh.alpha - stored.alpha).abs() < 1e-12);
    assert!((fresh.c - stored.c).abs() < 1e-12);
    assert_eq!((fresh.depth, fresh.min_scale, fresh.pairs), (stored.depth, stored.min_scale, stored.pairs));
    assert!(fresh.max_residual < 1e-12);
    assert!(calibration_drift(&stored) < 1e-12);
    assert!((DEGENERATE_ALPHA + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert_eq!(DEGENERATE_C, 1.0);
}

#[test]
fn commutator_norm_examples() {
    let c = PiecewiseConstant::indicator_of(UNIT).scale(-1.5);
    let r = commutator_norm_vs_bmo(&c, UNIT, -4, 500).unwrap();
    assert!(r.comm_norm_estimate <= 1e-8);
    assert_eq!(r.ratio, None);

    let r = commutator_norm_vs_bmo(&haar_function(UNIT), UNIT, -4, 500).unwrap();
    assert!(r.power.converged);
    let ratio = r.ratio.unwrap();
    assert!(ratio > 0.0 && ratio < 10.0, "{ratio}");
}

#[test]
fn commutator_band_is_stable() {
    let a = commutator_ensemble(40, 5, 39, 2000).unwrap();
    let b = commutator_ensemble(80, 5, 39, 2000).unwrap();
    assert!(a.all_converged && b.all_converged);
    assert!(a.ratio_band.0 > 0.0 && a.ratio_band.1.is_finite());
    assert!(b.ratio_band.0 <= a.ratio_band.0 && b.ratio_band.1 >= a.ratio_band.1);
    assert!((b.ratio_band.1 - a.ratio_band.1) / a.ratio_band.1 < 0.5);
}
