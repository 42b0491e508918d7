//! Scalar abstraction shared by the exact and floating pipelines.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use crate::error::GhError;

pub type Rational = BigRational;

/// Field scalar used for Fourier coefficients, Lie coordinates and symbols.
///
/// `f32` and `f64` give the floating pipeline, [`Rational`] the exact one.
pub trait Scalar:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static
{
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn to_f64(&self) -> f64;
    fn magnitude(&self) -> Self;
    /// Square root when it exists in the scalar type. Exact scalars only
    /// return perfect squares.
    fn sqrt_checked(&self) -> Option<Self>;
    /// Zero test: exact for rationals, `|x| <= tol` for floats.
    fn is_negligible(&self, tol: f64) -> bool;
    /// The exact value, for exact scalars only.
    fn exact_value(&self) -> Option<Rational>;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;
            fn from_i64(v: i64) -> Self {
                v as $t
            }
            fn from_rational(q: &Rational) -> Self {
                rational_to_f64(q) as $t
            }
            fn to_f64(&self) -> f64 {
                *self as f64
            }
            fn magnitude(&self) -> Self {
                self.abs()
            }
            fn sqrt_checked(&self) -> Option<Self> {
                if *self < 0.0 {
                    None
                } else {
                    Some(self.sqrt())
                }
            }
            fn is_negligible(&self, tol: f64) -> bool {
                (*self as f64).abs() <= tol
            }
            fn exact_value(&self) -> Option<Rational> {
                None
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

impl Scalar for Rational {
    const EXACT: bool = true;
    fn from_i64(v: i64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn magnitude(&self) -> Self {
        self.abs()
    }
    fn sqrt_checked(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Some(Rational::new(rn, rd))
        } else {
            None
        }
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn exact_value(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

/// Correctly scaled conversion that survives numerators and denominators
/// far outside the f64 range.
pub fn rational_to_f64(q: &Rational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    let n = q.numer().abs();
    let d = q.denom().clone();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    // bring the quotient into ~64 significant bits
    let shift = nb - db - 64;
    let (n2, d2) = if shift > 0 {
        (n, d << shift as usize)
    } else {
        (n << (-shift) as usize, d)
    };
    let qt = (n2 / d2).to_f64().unwrap_or(f64::MAX);
    sign * qt * 2f64.powi(shift.clamp(-2000, 2000) as i32)
}

/// Natural log of a positive rational, accurate for huge magnitudes.
pub fn rational_ln(q: &Rational) -> f64 {
    bigint_ln(q.numer()) - bigint_ln(q.denom())
}

pub fn bigint_ln(n: &BigInt) -> f64 {
    let n = n.abs();
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (&n >> shift as usize).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn parse_rational(s: &str) -> Result<Rational, GhError> {
    let s = s.trim();
    let bad = || GhError::Spec(format!("not a rational literal: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| bad())?;
        let d: BigInt = b.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ip = ip.trim_start_matches(['-', '+']);
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{}{}", if ip.is_empty() { "0" } else { ip }, fp);
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let q = Rational::new(n, d);
        return Ok(if neg { -q } else { q });
    }
    let n: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(n))
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn imag_unit<S: Scalar>() -> Complex<S> {
    Complex::new(S::zero(), S::one())
}

pub fn c_real<S: Scalar>(x: S) -> Complex<S> {
    Complex::new(x, S::zero())
}

pub fn c_to_f64<S: Scalar>(z: &Complex<S>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn c_is_negligible<S: Scalar>(z: &Complex<S>, tol: f64) -> bool {
    z.re.is_negligible(tol) && z.im.is_negligible(tol)
}

pub fn one<S: Scalar>() -> S {
    S::one()
}

/// Serde helpers writing exact numbers as decimal strings.
pub mod ser {
    use num_bigint::BigInt;
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    use super::Rational;

    pub fn rational<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn bigint<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&n.to_string())
    }

    pub fn bigints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for n in v {
            seq.serialize_element(&n.to_string())?;
        }
        seq.end()
    }

    pub fn bigint_pairs<S: Serializer>(v: &[(BigInt, BigInt)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (a, b) in v {
            seq.serialize_element(&format!("{a}/{b}"))?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let q = Rational::new(BigInt::from(3), big.clone());
        assert_eq!(rational_to_f64(&q), 0.0);
        let q = Rational::new(BigInt::from(3) * &big, big * BigInt::from(2));
        assert!((rational_to_f64(&q) - 1.5).abs() < 1e-15);
        let ln = rational_ln(&Rational::new(
            BigInt::from(1),
            num_traits::pow(BigInt::from(10), 600),
        ));
        assert!((ln + 600.0 * 10f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn exact_sqrt() {
        assert_eq!(rat(9, 4).sqrt_checked(), Some(rat(3, 2)));
        assert_eq!(rat(2, 1).sqrt_checked(), None);
    }
}
