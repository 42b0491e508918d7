//! Exactly specified real numbers with rational enclosures.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::surd::Surd;
use crate::error::{GhError, Result};
use crate::scalar::{parse_rational, rational_to_f64, Rational};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RealSpec {
    Rational(#[serde(serialize_with = "crate::scalar::ser::rational")] Rational),
    /// `a + b sqrt(d)`
    QuadraticSurd {
        #[serde(serialize_with = "crate::scalar::ser::rational")]
        a: Rational,
        #[serde(serialize_with = "crate::scalar::ser::rational")]
        b: Rational,
        d: u64,
    },
    /// `sum_{n >= 1} base^{-n!}`; partial sums are materialized up to order
    /// `truncation`.
    LiouvilleSeries {
        base: u32,
        truncation: u32,
    },
    /// A decimal literal known to half a unit in its last digit.
    DecimalLiteral(String),
}

impl RealSpec {
    pub fn rational(n: i64, d: i64) -> Self {
        RealSpec::Rational(crate::scalar::rat(n, d))
    }

    pub fn golden() -> Self {
        RealSpec::QuadraticSurd {
            a: crate::scalar::rat(1, 2),
            b: crate::scalar::rat(1, 2),
            d: 5,
        }
    }

    pub fn sqrt(d: u64) -> Self {
        RealSpec::QuadraticSurd {
            a: Rational::zero(),
            b: Rational::one(),
            d,
        }
    }

    pub fn liouville(base: u32) -> Self {
        RealSpec::LiouvilleSeries {
            base,
            truncation: 8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RealSpec::QuadraticSurd { d, .. } => {
                let r = (*d as f64).sqrt().round() as u64;
                if *d < 2 || r * r == *d {
                    return Err(GhError::Spec(format!("sqrt({d}) is rational")));
                }
                Ok(())
            }
            RealSpec::LiouvilleSeries { base, truncation } => {
                if *base < 2 || *truncation < 1 {
                    return Err(GhError::Spec(
                        "Liouville series needs base >= 2 and truncation >= 1".into(),
                    ));
                }
                Ok(())
            }
            RealSpec::DecimalLiteral(s) => parse_rational(s).map(|_| ()),
            RealSpec::Rational(_) => Ok(()),
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealSpec::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            RealSpec::Rational(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_surd(&self) -> Option<Surd> {
        match self {
            RealSpec::QuadraticSurd { a, b, d } => {
                Some(Surd::new(a.clone(), b.clone(), BigInt::from(*d)))
            }
            _ => None,
        }
    }

    /// Negation, for the variants closed under it.
    pub fn neg(&self) -> Option<Self> {
        match self {
            RealSpec::Rational(q) => Some(RealSpec::Rational(-q)),
            RealSpec::QuadraticSurd { a, b, d } => Some(RealSpec::QuadraticSurd {
                a: -a,
                b: -b,
                d: *d,
            }),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealSpec::Rational(q) => rational_to_f64(q),
            RealSpec::QuadraticSurd { .. } => self.as_surd().unwrap().to_f64(),
            RealSpec::LiouvilleSeries { base, .. } => {
                let b = *base as f64;
                (1..=6u32).map(|n| b.powf(-(factorial_u64(n) as f64))).sum()
            }
            RealSpec::DecimalLiteral(s) => parse_rational(s)
                .map(|q| rational_to_f64(&q))
                .unwrap_or(f64::NAN),
        }
    }

    /// Rational `[lo, hi]` containing the number with `hi - lo <= 2^-bits`.
    pub fn enclosure(&self, bits: u32) -> Result<(Rational, Rational)> {
        match self {
            RealSpec::Rational(q) => Ok((q.clone(), q.clone())),
            RealSpec::QuadraticSurd { .. } => Ok(self.as_surd().unwrap().enclosure(bits)),
            RealSpec::LiouvilleSeries { base, truncation } => {
                let target = Rational::new(BigInt::one(), BigInt::one() << bits as usize);
                for n in 1..=*truncation {
                    let (lo, hi) = liouville_enclosure(*base, n);
                    if &hi - &lo <= target {
                        return Ok((lo, hi));
                    }
                }
                Err(GhError::PrecisionExhausted(format!(
                    "Liouville series base {base} needs more than {truncation} terms for 2^-{bits}"
                )))
            }
            RealSpec::DecimalLiteral(s) => {
                let (lo, hi) = decimal_enclosure(s)?;
                let target = Rational::new(BigInt::one(), BigInt::one() << bits as usize);
                if &hi - &lo > target {
                    return Err(GhError::PrecisionExhausted(format!(
                        "decimal {s} is known to {}",
                        rational_to_f64(&(&hi - &lo))
                    )));
                }
                Ok((lo, hi))
            }
        }
    }

    /// Best available enclosure, never failing for lack of precision.
    pub fn widest_useful_enclosure(&self, bits: u32) -> (Rational, Rational) {
        match self.enclosure(bits) {
            Ok(e) => e,
            Err(_) => match self {
                RealSpec::LiouvilleSeries { base, truncation } => {
                    liouville_enclosure(*base, *truncation)
                }
                RealSpec::DecimalLiteral(s) => decimal_enclosure(s).expect("validated"),
                _ => unreachable!(),
            },
        }
    }
}

pub fn factorial_u64(n: u32) -> u64 {
    (1..=n as u64).product()
}

pub fn factorial_big(n: u32) -> BigInt {
    (1..=n as u64).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Partial sum `p_k / q_k` with `q_k = base^{k!}`.
pub fn liouville_partial(base: u32, k: u32) -> (BigInt, BigInt) {
    let kf = factorial_u64(k) as usize;
    let b = BigInt::from(base);
    let q = num_traits::pow(b.clone(), kf);
    let mut p = BigInt::zero();
    for n in 1..=k {
        p += num_traits::pow(b.clone(), kf - factorial_u64(n) as usize);
    }
    (p, q)
}

/// `[S_n, S_n + 2 base^{-(n+1)!}]`.
pub fn liouville_enclosure(base: u32, n: u32) -> (Rational, Rational) {
    let (p, q) = liouville_partial(base, n);
    let lo = Rational::new(p, q);
    let tail = Rational::new(
        BigInt::from(2),
        num_traits::pow(BigInt::from(base), factorial_u64(n + 1) as usize),
    );
    let hi = &lo + tail;
    (lo, hi)
}

fn decimal_enclosure(s: &str) -> Result<(Rational, Rational)> {
    let x = parse_rational(s)?;
    let digits = s.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
    let h = Rational::new(
        BigInt::one(),
        BigInt::from(2) * num_traits::pow(BigInt::from(10), digits),
    );
    Ok((&x - &h, &x + &h))
}

/// Continued fraction data with convergents `p_k / q_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuedFraction {
    #[serde(serialize_with = "crate::scalar::ser::bigints")]
    pub quotients: Vec<BigInt>,
    #[serde(serialize_with = "crate::scalar::ser::bigint_pairs")]
    pub convergents: Vec<(BigInt, BigInt)>,
    /// The expansion ended exactly (rational input).
    pub terminated: bool,
}

fn convergents_of(quotients: &[BigInt]) -> Vec<(BigInt, BigInt)> {
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (quotients[0].clone(), BigInt::one());
    let mut out = vec![(p1.clone(), q1.clone())];
    for a in &quotients[1..] {
        let p2 = a * &p1 + &p0;
        let q2 = a * &q1 + &q0;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        out.push((p1.clone(), q1.clone()));
    }
    out
}

fn floor_rat(q: &Rational) -> BigInt {
    q.floor().to_integer()
}

/// First `depth` partial quotients (fewer if the number is rational).
pub fn continued_fraction(x: &RealSpec, depth: usize) -> Result<ContinuedFraction> {
    continued_fraction_signed(x, false, depth)
}

/// Expansion of `x` or of `-x`.
pub fn continued_fraction_signed(
    x: &RealSpec,
    negate: bool,
    depth: usize,
) -> Result<ContinuedFraction> {
    let (quotients, terminated, exhausted) = determinable_quotients(x, negate, depth)?;
    if exhausted {
        return Err(GhError::PrecisionExhausted(format!(
            "only {} quotients determined by the available precision",
            quotients.len()
        )));
    }
    let convergents = convergents_of(&quotients);
    Ok(ContinuedFraction {
        quotients,
        convergents,
        terminated,
    })
}

/// Up to `depth` quotients; `exhausted` reports that precision ran out
/// before `depth` was reached.
pub fn determinable_quotients(
    x: &RealSpec,
    negate: bool,
    depth: usize,
) -> Result<(Vec<BigInt>, bool, bool)> {
    if negate {
        if let Some(nx) = x.neg() {
            return determinable_quotients(&nx, false, depth);
        }
    }
    if depth == 0 {
        return Err(GhError::Spec("depth must be >= 1".into()));
    }
    x.validate()?;
    let mut quotients = Vec::new();
    let mut terminated = false;
    match x {
        RealSpec::Rational(q) => {
            let mut r = q.clone();
            while quotients.len() < depth {
                let a = floor_rat(&r);
                quotients.push(a.clone());
                let frac = &r - Rational::from_integer(a);
                if frac.is_zero() {
                    terminated = true;
                    break;
                }
                r = frac.recip();
            }
        }
        RealSpec::QuadraticSurd { .. } => {
            let mut r = x.as_surd().unwrap();
            while quotients.len() < depth {
                let a = r.floor();
                quotients.push(a.clone());
                let frac = r.sub(&Surd::from_rational(Rational::from_integer(a), &r.d));
                r = frac
                    .inv()
                    .ok_or_else(|| GhError::Numeric("surd expansion hit zero".into()))?;
            }
        }
        RealSpec::LiouvilleSeries { .. } | RealSpec::DecimalLiteral(_) => {
            let mut bits = 64u32;
            loop {
                let (lo, hi) = x.widest_useful_enclosure(bits);
                let (lo, hi) = if negate { (-hi, -lo) } else { (lo, hi) };
                quotients = interval_quotients(&lo, &hi, depth);
                if quotients.len() >= depth {
                    break;
                }
                if x.enclosure(bits).is_err() {
                    return Ok((quotients, false, true));
                }
                bits *= 2;
            }
        }
    }
    Ok((quotients, terminated, false))
}

/// Convergents `p/q` of `x` (or `-x`) with `q <= q_max`, as far as the
/// available precision determines them.
pub fn convergents_below(
    x: &RealSpec,
    negate: bool,
    q_max: &BigInt,
) -> Result<Vec<(BigInt, BigInt)>> {
    let mut depth = 16;
    loop {
        let (qs, terminated, exhausted) = determinable_quotients(x, negate, depth)?;
        if qs.is_empty() {
            return Ok(vec![]);
        }
        let conv = convergents_of(&qs);
        let past = conv.last().map(|(_, q)| q > q_max).unwrap_or(false);
        if terminated || exhausted || past || depth >= 1024 {
            return Ok(conv.into_iter().filter(|(_, q)| q <= q_max).collect());
        }
        depth *= 2;
    }
}

/// Quotients shared by every number in `[lo, hi]` (irrational interior
/// assumed, so an endpoint hitting an integer stops the expansion).
fn interval_quotients(lo: &Rational, hi: &Rational, depth: usize) -> Vec<BigInt> {
    let mut out = Vec::new();
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    while out.len() < depth {
        let a = floor_rat(&lo);
        if floor_rat(&hi) != a {
            break;
        }
        let ai = Rational::from_integer(a.clone());
        if lo == ai {
            break;
        }
        out.push(a);
        let nlo = (&hi - &ai).recip();
        let nhi = (&lo - &ai).recip();
        lo = nlo;
        hi = nhi;
    }
    out
}

/// Convergent witness of a Liouville series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiouvilleWitness {
    pub k: u32,
    #[serde(serialize_with = "ser_big")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub q: BigInt,
    /// Decimal digits of `q`.
    pub q_digits: usize,
    /// Enclosure of `|q alpha - p|` as `log10` bounds.
    pub gap_log10_lo: f64,
    pub gap_log10_hi: f64,
    /// `|q alpha - p| < 2 q^{1-k}` holds with exact arithmetic.
    pub verified: bool,
}

fn ser_big<S: serde::Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    let t = n.to_string();
    if t.len() <= 40 {
        s.serialize_str(&t)
    } else {
        s.serialize_str(&format!("<{} digits>", t.len()))
    }
}

/// Largest order whose partial sums are built as explicit integers.
pub const MATERIALIZE_MAX: u32 = 8;

/// Materialized witnesses `k = 1..=k_max`, each checked with exact rational
/// interval arithmetic against `2 q_k^{1-k}`.
pub fn liouville_witnesses(x: &RealSpec, k_max: u32) -> Result<Vec<LiouvilleWitness>> {
    let (base, truncation) = match x {
        RealSpec::LiouvilleSeries { base, truncation } => (*base, *truncation),
        _ => {
            return Err(GhError::Spec(
                "Liouville witnesses need a Liouville series".into(),
            ))
        }
    };
    x.validate()?;
    if k_max == 0 || k_max > truncation.min(MATERIALIZE_MAX) {
        return Err(GhError::Spec(format!(
            "k_max must lie in 1..={}",
            truncation.min(MATERIALIZE_MAX)
        )));
    }
    let mut out = Vec::new();
    let b = BigInt::from(base);
    for k in 1..=k_max {
        let (p, q) = liouville_partial(base, k);
        // q alpha - p = q * tail, tail in [b^{-(k+1)!}, 2 b^{-(k+1)!}]
        let tail_den = num_traits::pow(b.clone(), factorial_u64(k + 1) as usize);
        let lo = Rational::new(q.clone(), tail_den.clone());
        let hi = Rational::new(&q * 2, tail_den);
        let bound = Rational::new(
            BigInt::from(2),
            num_traits::pow(q.clone(), (k - 1) as usize),
        );
        let verified = hi < bound;
        out.push(LiouvilleWitness {
            k,
            q_digits: q.to_string().len(),
            gap_log10_lo: crate::scalar::rational_ln(&lo) / std::f64::consts::LN_10,
            gap_log10_hi: crate::scalar::rational_ln(&hi) / std::f64::consts::LN_10,
            p,
            q,
            verified,
        });
    }
    Ok(out)
}

/// Certificate that the `k`-th convergent mode `(p_k, -q_k)` of the field
/// `d_1 + alpha d_2` satisfies `|p_k - alpha q_k| < (1 + |xi|^2)^{-s}`.
///
/// Uses `|p_k - alpha q_k| <= 2 b^{k! - (k+1)!}` and `1 + |xi|^2 <= 3 b^{2 k!}`,
/// reducing the claim with `s = a/c` to `2^c 3^a < b^{k! (c k - 2a)}`, decided
/// on integers without materializing `q_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiouvilleDecayCertificate {
    pub k: u32,
    pub s: String,
    pub certified: bool,
    /// `ln(1 + |xi|^2)` lower bound.
    pub ln_lambda_lo: f64,
    /// `ln |p_k - alpha q_k|` upper bound.
    pub ln_sigma_hi: f64,
}

pub fn liouville_decay_certificate(
    base: u32,
    k: u32,
    s: &Rational,
) -> Result<LiouvilleDecayCertificate> {
    if base < 2 || k == 0 || s.is_negative() {
        return Err(GhError::Spec(
            "certificate needs base >= 2, k >= 1, s >= 0".into(),
        ));
    }
    let a = s.numer().clone();
    let c = s.denom().clone();
    let kf = factorial_big(k);
    let e: BigInt = &kf * (&c * BigInt::from(k) - &a * BigInt::from(2));
    let certified = if e <= BigInt::zero() {
        false
    } else {
        let cu = c
            .to_usize()
            .ok_or_else(|| GhError::Spec("s denominator too large".into()))?;
        let au = a
            .to_usize()
            .ok_or_else(|| GhError::Spec("s numerator too large".into()))?;
        let lhs = num_traits::pow(BigInt::from(2), cu) * num_traits::pow(BigInt::from(3), au);
        let log2b = (u32::BITS - 1 - base.leading_zeros()) as u64; // floor(log2 b)
        let lhs_bits = lhs.bits();
        if e.to_u64()
            .map(|ev| ev.saturating_mul(log2b) > lhs_bits)
            .unwrap_or(true)
        {
            true
        } else {
            let ev = e.to_usize().unwrap();
            num_traits::pow(BigInt::from(base), ev) > lhs
        }
    };
    let lnb = (base as f64).ln();
    let kf64 = factorial_u64(k) as f64;
    Ok(LiouvilleDecayCertificate {
        k,
        s: s.to_string(),
        certified,
        ln_lambda_lo: 2.0 * kf64 * lnb,
        ln_sigma_hi: std::f64::consts::LN_2 + (kf64 - factorial_u64(k + 1) as f64) * lnb,
    })
}
