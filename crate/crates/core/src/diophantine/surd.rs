//! Exact arithmetic in `Q(sqrt d)`.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::scalar::Rational;

/// `a + b sqrt(d)` with `d > 1` squarefree-or-not but not a perfect square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Surd {
    pub a: Rational,
    pub b: Rational,
    pub d: BigInt,
}

impl Surd {
    pub fn new(a: Rational, b: Rational, d: BigInt) -> Self {
        Surd { a, b, d }
    }

    pub fn from_rational(a: Rational, d: &BigInt) -> Self {
        Surd {
            a,
            b: Rational::zero(),
            d: d.clone(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Surd::new(&self.a + &o.a, &self.b + &o.b, self.d.clone())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Surd::new(&self.a - &o.a, &self.b - &o.b, self.d.clone())
    }

    pub fn neg(&self) -> Self {
        Surd::new(-&self.a, -&self.b, self.d.clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let d = Rational::from_integer(self.d.clone());
        Surd::new(
            &self.a * &o.a + &self.b * &o.b * d,
            &self.a * &o.b + &self.b * &o.a,
            self.d.clone(),
        )
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Surd::new(&self.a * q, &self.b * q, self.d.clone())
    }

    /// `a^2 - d b^2`.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - &self.b * &self.b * Rational::from_integer(self.d.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Surd::new(&self.a / &n, -&self.b / &n, self.d.clone()))
    }

    /// Exact sign.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with d b^2
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * Rational::from_integer(self.d.clone());
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        Surd::new(&self.a - q, self.b.clone(), self.d.clone()).signum()
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        let mut n = self.approx_floor();
        while self.cmp_rational(&Rational::from_integer(n.clone())) == Ordering::Less {
            n -= 1;
        }
        while self.cmp_rational(&Rational::from_integer(&n + 1)) != Ordering::Less {
            n += 1;
        }
        n
    }

    fn approx_floor(&self) -> BigInt {
        // b sqrt(d) ~ sign(b) isqrt(b^2 d 4^k) / 2^k
        let k = 64usize;
        let scale = BigInt::one() << (2 * k);
        let b2d = &self.b * &self.b * Rational::from_integer(self.d.clone() * scale);
        let root = b2d.floor().to_integer().sqrt();
        let bs = Rational::new(root, BigInt::one() << k);
        let bs = if self.b.is_negative() { -bs } else { bs };
        (&self.a + bs).floor().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        crate::scalar::rational_to_f64(&self.a)
            + crate::scalar::rational_to_f64(&self.b)
                * crate::scalar::rational_to_f64(&Rational::from_integer(self.d.clone())).sqrt()
    }

    /// Rational enclosure `[lo, hi]` of width at most `2^-bits`.
    pub fn enclosure(&self, bits: u32) -> (Rational, Rational) {
        if self.b.is_zero() {
            return (self.a.clone(), self.a.clone());
        }
        let k = bits as usize + 8 + self.b.denom().bits() as usize;
        let scale = BigInt::one() << (2 * k);
        let b2d = &self.b * &self.b * Rational::from_integer(self.d.clone() * scale);
        let lo_int = b2d.floor().to_integer().sqrt();
        let hi_int = &lo_int + 1;
        let den = BigInt::one() << k;
        let lo = Rational::new(lo_int, den.clone());
        let hi = Rational::new(hi_int, den);
        if self.b.is_negative() {
            (&self.a - hi, &self.a - lo)
        } else {
            (&self.a + lo, &self.a + hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn golden() -> Surd {
        Surd::new(rat(1, 2), rat(1, 2), BigInt::from(5))
    }

    #[test]
    fn golden_identities() {
        let g = golden();
        // phi^2 = phi + 1
        let lhs = g.mul(&g);
        let rhs = g.add(&Surd::from_rational(rat(1, 1), &g.d));
        assert_eq!(lhs, rhs);
        assert_eq!(g.floor(), BigInt::from(1));
        assert_eq!(g.neg().floor(), BigInt::from(-2));
        let (lo, hi) = g.enclosure(80);
        assert!(g.cmp_rational(&lo) != Ordering::Less && g.cmp_rational(&hi) != Ordering::Greater);
    }

    #[test]
    fn sign_close_to_zero() {
        // 99/70 - sqrt 2 > 0, 140/99 - sqrt 2 < 0
        let s = Surd::new(rat(99, 70), rat(-1, 1), BigInt::from(2));
        assert_eq!(s.signum(), Ordering::Greater);
        let s = Surd::new(rat(140, 99), rat(-1, 1), BigInt::from(2));
        assert_eq!(s.signum(), Ordering::Less);
    }
}
