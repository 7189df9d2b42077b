//! Trigonometric polynomials `Σ_{|k| ≤ N} c_k e^{ikθ}` with exact
//! coefficient arithmetic, the projections `P±` and `H = P₊ − P₋`.
//!
//! Frequency zero belongs to `P₊`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralPolynomial {
    band: usize,
    /// `coeffs[k + band] = c_k`.
    coeffs: Vec<Complex64>,
}

impl SpectralPolynomial {
    pub fn new(band: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != 2 * band + 1 {
            return Err(Error::InvalidConfig(format!(
                "band {band} needs {} coefficients, got {}",
                2 * band + 1,
                coeffs.len()
            )));
        }
        if let Some(c) = coeffs.iter().find(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite(if c.re.is_finite() { c.im } else { c.re }));
        }
        Ok(Self { band, coeffs })
    }

    pub fn zero(band: usize) -> Self {
        Self {
            band,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * band + 1],
        }
    }

    /// `c · e^{ikθ}`.
    pub fn monomial(k: i64, c: Complex64) -> Self {
        let mut p = Self::zero(k.unsigned_abs() as usize);
        p.set(k, c);
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    /// Smallest band holding every listed frequency.
    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Self {
        let band = pairs.iter().map(|(k, _)| k.unsigned_abs() as usize).max().unwrap_or(0);
        let mut p = Self::zero(band);
        for (k, c) in pairs {
            let slot = &mut p.coeffs[(k + band as i64) as usize];
            *slot += c;
        }
        p
    }

    /// Independent standard complex normal coefficients on `[−band, band]`.
    pub fn random<R: Rng>(rng: &mut R, band: usize) -> Self {
        let coeffs = (0..2 * band + 1)
            .map(|_| {
                Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                    * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        Self { band, coeffs }
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// `c_k`, zero outside the band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.band {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k + self.band as i64) as usize]
    }

    pub fn set(&mut self, k: i64, c: Complex64) {
        assert!(k.unsigned_abs() as usize <= self.band, "frequency {k} outside band {}", self.band);
        self.coeffs[(k + self.band as i64) as usize] = c;
    }

    /// `(k, c_k)` for every frequency in the band.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.band as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - n, *c))
    }

    /// Same polynomial on a band of at least `band`.
    pub fn widen(&self, band: usize) -> Self {
        let band = band.max(self.band);
        let mut p = Self::zero(band);
        for (k, c) in self.terms() {
            p.set(k, c);
        }
        p
    }

    fn zip(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let band = self.band.max(other.band);
        let n = band as i64;
        let coeffs = (-n..=n).map(|k| op(self.coeff(k), other.coeff(k))).collect();
        Self { band, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            band: self.band,
            coeffs: self.coeffs.iter().map(|x| x * c).collect(),
        }
    }

    /// Exact coefficient convolution; the band is the sum of the bands.
    pub fn multiply(&self, other: &Self) -> Self {
        let band = self.band + other.band;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 2 * band + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Self { band, coeffs }
    }

    /// `θ ↦ conj f(θ)`: `c_k ↦ conj c_{−k}`.
    pub fn conj(&self) -> Self {
        Self {
            band: self.band,
            coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
        }
    }

    fn keep(&self, pred: impl Fn(i64) -> bool) -> Self {
        let n = self.band as i64;
        Self {
            band: self.band,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if pred(i as i64 - n) { *c } else { Complex64::new(0.0, 0.0) })
                .collect(),
        }
    }

    /// Keeps `k ≥ 0`.
    pub fn proj_plus(&self) -> Self {
        self.keep(|k| k >= 0)
    }

    /// Keeps `k < 0`.
    pub fn proj_minus(&self) -> Self {
        self.keep(|k| k < 0)
    }

    /// `P₊f − P₋f`.
    pub fn hilbert_alg(&self) -> Self {
        let n = self.band as i64;
        Self {
            band: self.band,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i as i64 - n >= 0 { *c } else { -c })
                .collect(),
        }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.terms()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    /// `(Σ |c_k|²)^{1/2}`, the normalized `L²` norm on the circle.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest `k ≥ 0` with `c_k ≠ 0`, if any.
    pub fn analytic_degree(&self) -> Option<usize> {
        (0..=self.band as i64)
            .rev()
            .find(|k| self.coeff(*k) != Complex64::new(0.0, 0.0))
            .map(|k| k as usize)
    }
}

/// JSON form: an array of `[k, re, im]`.
impl Serialize for SpectralPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let triples: Vec<(i64, f64, f64)> = self.terms().map(|(k, c)| (k, c.re, c.im)).collect();
        triples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectralPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let triples = Vec::<(i64, f64, f64)>::deserialize(d)?;
        let pairs: Vec<(i64, Complex64)> = triples
            .into_iter()
            .map(|(k, re, im)| (k, Complex64::new(re, im)))
            .collect();
        Ok(Self::from_pairs(&pairs))
    }
}

/// `[b, H] f = b·Hf − H(b·f)`.
pub fn commutator_with_hilbert(b: &SpectralPolynomial, f: &SpectralPolynomial) -> SpectralPolynomial {
    b.multiply(&f.hilbert_alg()).sub(&b.multiply(f).hilbert_alg())
}

fn check_guard(b: &SpectralPolynomial, f: &SpectralPolynomial, guard: usize) -> Result<()> {
    let needed = b.band() + f.band();
    if needed > guard {
        return Err(Error::BandOverflow { needed, guard });
    }
    Ok(())
}

/// `‖[b, H] f − (2P₋(b P₊f) − 2P₊(b P₋f))‖₂`.
pub fn commutator_identity_check(b: &SpectralPolynomial, f: &SpectralPolynomial, guard: usize) -> Result<f64> {
    check_guard(b, f, guard)?;
    let lhs = commutator_with_hilbert(b, f);
    let two = Complex64::new(2.0, 0.0);
    let rhs = b
        .multiply(&f.proj_plus())
        .proj_minus()
        .scale(two)
        .sub(&b.multiply(&f.proj_minus()).proj_plus().scale(two));
    Ok(lhs.sub(&rhs).l2_norm())
}

/// Residuals of `P₊[b,H]P₋ f = −2P₊ b P₋ f` and `P₋[b,H]P₋ f = 0`.
pub fn block_identity_check(b: &SpectralPolynomial, f: &SpectralPolynomial, guard: usize) -> Result<(f64, f64)> {
    check_guard(b, f, guard)?;
    let fm = f.proj_minus();
    let c = commutator_with_hilbert(b, &fm);
    let upper = c
        .proj_plus()
        .add(&b.multiply(&fm).proj_plus().scale(Complex64::new(2.0, 0.0)))
        .l2_norm();
    let lower = c.proj_minus().l2_norm();
    Ok((upper, lower))
}
