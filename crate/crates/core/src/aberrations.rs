//! Complex aberration coefficients and the coherent transfer function.
//!
//! A system is described by coefficients `C_mn` weighting the monomials
//! `kx^m ky^n`. The transfer function is `χ(k) = exp(i E(k))` with
//! `E(k) = Σ C_mn kx^m ky^n`. Real parts of `C_mn` shift the phase (coherent
//! aberrations), imaginary parts scale the modulus by `exp(-Im E)`
//! (incoherent aberrations).

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default bound on the modulus exponent `-Im E(k)` (`exp(50) ≈ 5e21`).
pub const DEFAULT_AMPLIFICATION_LIMIT: f64 = 50.0;

/// One term `C_mn kx^m ky^n`; `value` has units of m^(m+n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AberrationCoefficient {
    pub m: u32,
    pub n: u32,
    pub value: Complex64,
}

/// Sparse set of aberration coefficients, at most one per `(m, n)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AberrationSet {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl AberrationSet {
    /// The identity system.
    pub fn empty() -> Self {
        AberrationSet::default()
    }

    /// Builds a set from coefficients; repeated `(m, n)` pairs are summed.
    pub fn from_coefficients(
        coefficients: impl IntoIterator<Item = AberrationCoefficient>,
    ) -> Result<Self> {
        let mut set = AberrationSet::empty();
        for c in coefficients {
            if !(c.value.re.is_finite() && c.value.im.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "coefficient C_{}{} is not finite",
                    c.m, c.n
                )));
            }
            *set.terms.entry((c.m, c.n)).or_default() += c.value;
        }
        Ok(set)
    }

    /// Returns a copy with `C_mn` replaced by `value`.
    pub fn with(mut self, m: u32, n: u32, value: Complex64) -> Result<Self> {
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "coefficient C_{m}{n} is not finite"
            )));
        }
        self.terms.insert((m, n), value);
        Ok(self)
    }

    /// Free-space propagation over `z` in the paraxial limit: `C_20 = C_02 = -z/(2k0)`.
    ///
    /// Negative `z` propagates backwards.
    pub fn defocus(z: f64, k0: f64) -> Result<Self> {
        check_wavenumber(k0)?;
        check_finite("defocus distance", z)?;
        let c = Complex64::new(-z / (2.0 * k0), 0.0);
        let mut terms = BTreeMap::new();
        terms.insert((2, 0), c);
        terms.insert((0, 2), c);
        Ok(AberrationSet { terms })
    }

    /// Incoherent tilt of strength `a_t` (meters) along direction `alpha` in the
    /// `(kx, ky)` plane. The modulus becomes `exp(-a_t (kx cos α + ky sin α))`.
    pub fn tilt(a_t: f64, alpha: f64) -> Result<Self> {
        if !(a_t.is_finite() && a_t >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tilt amplitude must be finite and >= 0, got {a_t}"
            )));
        }
        check_finite("tilt angle", alpha)?;
        let (sin, cos) = alpha.sin_cos();
        let mut terms = BTreeMap::new();
        terms.insert((1, 0), Complex64::new(0.0, a_t * cos));
        terms.insert((0, 1), Complex64::new(0.0, a_t * sin));
        Ok(AberrationSet { terms })
    }

    /// Spherical aberration `cs`: `C_40 = C_04 = C_22/2 = -cs/(8k0³)`, so that
    /// `E = -cs |k|⁴ / (8k0³)`.
    pub fn spherical(cs: f64, k0: f64) -> Result<Self> {
        check_wavenumber(k0)?;
        check_finite("spherical aberration", cs)?;
        let c = -cs / (8.0 * k0 * k0 * k0);
        let mut terms = BTreeMap::new();
        terms.insert((4, 0), Complex64::new(c, 0.0));
        terms.insert((0, 4), Complex64::new(c, 0.0));
        terms.insert((2, 2), Complex64::new(2.0 * c, 0.0));
        Ok(AberrationSet { terms })
    }

    pub fn get(&self, m: u32, n: u32) -> Option<Complex64> {
        self.terms.get(&(m, n)).copied()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = AberrationCoefficient> + '_ {
        self.terms
            .iter()
            .map(|(&(m, n), &value)| AberrationCoefficient { m, n, value })
    }

    /// Coefficient-wise sum. Propagating through the sum equals propagating
    /// through `self` and then `other`.
    pub fn add(&self, other: &AberrationSet) -> AberrationSet {
        let mut terms = self.terms.clone();
        for (&key, &value) in &other.terms {
            *terms.entry(key).or_default() += value;
        }
        AberrationSet { terms }
    }

    /// True iff no coefficient has an imaginary part, i.e. `|χ| ≡ 1`.
    pub fn is_coherent(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }

    /// The exponent `E(kx, ky) = Σ C_mn kx^m ky^n`.
    ///
    /// Terms are accumulated in mirror pairs `(m, n)` + `(n, m)` first, so a set
    /// with `C_mn = C_nm` gives `E(kx, ky) == E(ky, kx)` bit for bit.
    pub fn exponent(&self, kx: f64, ky: f64) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (&(m, n), &c) in &self.terms {
            if m > n {
                // picked up together with its mirror (n, m), or on its own below
                if !self.terms.contains_key(&(n, m)) {
                    total += c * monomial(kx, ky, m, n);
                }
                continue;
            }
            let mut pair = c * monomial(kx, ky, m, n);
            if m < n {
                if let Some(&mirror) = self.terms.get(&(n, m)) {
                    pair += mirror * monomial(kx, ky, n, m);
                }
            }
            total += pair;
        }
        total
    }

    /// `χ(kx, ky) = exp(i E)` with the default amplification guard.
    pub fn chi(&self, kx: f64, ky: f64) -> Result<Complex64> {
        self.chi_with_limit(kx, ky, DEFAULT_AMPLIFICATION_LIMIT)
    }

    /// `χ(kx, ky)`, failing when the modulus exponent `-Im E` exceeds `limit`.
    pub fn chi_with_limit(&self, kx: f64, ky: f64, limit: f64) -> Result<Complex64> {
        if !(kx.is_finite() && ky.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite frequency ({kx}, {ky})"
            )));
        }
        let e = self.exponent(kx, ky);
        let log_modulus = -e.im;
        if !(log_modulus <= limit) || !e.re.is_finite() {
            return Err(Error::Amplification {
                kx,
                ky,
                exponent: log_modulus,
                limit,
            });
        }
        Ok(Complex64::from_polar(log_modulus.exp(), e.re))
    }
}

impl fmt::Display for AberrationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "(identity)");
        }
        let mut first = true;
        for (&(m, n), c) in &self.terms {
            if !first {
                write!(f, ", ")?;
            }
            first = false;
            write!(f, "C{m}{n} = {:.6e}{:+.6e}i", c.re, c.im)?;
        }
        Ok(())
    }
}

// kx^m and ky^n are formed separately so that swapping the arguments of a
// mirrored monomial yields the same product bit for bit.
fn monomial(kx: f64, ky: f64, m: u32, n: u32) -> f64 {
    power(kx, m) * power(ky, n)
}

fn power(base: f64, exp: u32) -> f64 {
    let mut p = 1.0;
    for _ in 0..exp {
        p *= base;
    }
    p
}

fn check_wavenumber(k0: f64) -> Result<()> {
    if k0.is_finite() && k0 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "wavenumber must be positive, got {k0}"
        )))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be finite, got {v}"
        )))
    }
}
