//! Non-simultaneous approximability of the range-basis frequencies.
//!
//! Each block `l` carries pivot indices `j_p`, remaining indices `i_q` and
//! coefficients `v_p = (lambda_{1p}, .., lambda_{dp})`. The symbol of `L_p^l` at
//! `xi` is `s_{lp}(xi) = xi_{j_p} + v_p . xi''`, `xi'' = (xi_{i_q})_q`.
//!
//! Condition G: `(sum_{l,p} |s_{lp}|^2)^{1/2} >= C (1 + |xi|^2)^{-rho}` for
//! `xi != 0`. Condition I: for every `xi != 0` some `(l, p)` has
//! `|s_{lp}| >= B (1 + |xi''_l|)^{-M}`.
//!
//! Symbols are evaluated exactly (rational coefficients) or by rational
//! interval enclosures (irrational ones). Only the smooth threshold
//! `C (1+|xi|^2)^{-rho}` is computed in floating point, and a decision is
//! taken only outside a relative guard band around it.

pub mod real;
pub mod surd;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

pub use real::{
    continued_fraction, continued_fraction_signed, convergents_below, liouville_decay_certificate,
    liouville_partial, liouville_witnesses, ContinuedFraction, LiouvilleDecayCertificate,
    LiouvilleWitness, RealSpec,
};

use crate::error::{GhError, Result};
use crate::fields::RangeBasis;
use crate::scalar::{rational_to_f64, Rational};
use crate::spectral::{for_each_box_point, norm_sq};

/// Relative guard band around floating thresholds.
pub const GUARD: f64 = 1e-9;
/// Relative inflation applied to f64 images of exact interval endpoints.
const ROUND: f64 = 1e-14;
/// Largest number of box points scanned exhaustively.
pub const MAX_SCAN_POINTS: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsaBlock {
    pub j: Vec<usize>,
    pub i: Vec<usize>,
    /// `v[p][q]`
    pub v: Vec<Vec<RealSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsaFamily {
    pub dim: usize,
    pub blocks: Vec<NsaBlock>,
}

impl NsaFamily {
    pub fn new(dim: usize, blocks: Vec<NsaBlock>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(GhError::Spec("family needs at least one block".into()));
        }
        for (l, b) in blocks.iter().enumerate() {
            if b.j.is_empty() {
                return Err(GhError::Spec(format!("block {l} has no pivot index")));
            }
            let mut seen = vec![false; dim];
            for &k in b.j.iter().chain(&b.i) {
                if k >= dim || seen[k] {
                    return Err(GhError::Spec(format!(
                        "block {l}: bad or repeated index {k}"
                    )));
                }
                seen[k] = true;
            }
            if b.v.len() != b.j.len() || b.v.iter().any(|row| row.len() != b.i.len()) {
                return Err(GhError::Dimension(format!(
                    "block {l}: v must be {} x {}",
                    b.j.len(),
                    b.i.len()
                )));
            }
            for row in &b.v {
                for x in row {
                    x.validate()?;
                }
            }
        }
        Ok(NsaFamily { dim, blocks })
    }

    /// The single field `X_1 + v X_2` on `T^2`.
    pub fn single_field(v: RealSpec) -> Result<Self> {
        Self::new(
            2,
            vec![NsaBlock {
                j: vec![0],
                i: vec![1],
                v: vec![vec![v]],
            }],
        )
    }

    /// Blocks read off exact range bases.
    pub fn from_range_bases(dim: usize, rbs: &[RangeBasis<Rational>]) -> Result<Self> {
        let blocks = rbs
            .iter()
            .map(|rb| NsaBlock {
                j: rb.pivots.clone(),
                i: rb.others.clone(),
                v: (0..rb.rank())
                    .map(|p| rb.v(p).into_iter().map(RealSpec::Rational).collect())
                    .collect(),
            })
            .collect();
        Self::new(dim, blocks)
    }

    pub fn is_rational(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.v.iter().flatten().all(|x| x.is_rational()))
    }
}

#[derive(Clone, Debug)]
struct Row {
    j: usize,
    /// `(index, lo, hi)` scaled by `den`
    terms: Vec<(usize, i128, i128)>,
    den: i128,
    exact: bool,
    specs: Vec<(usize, RealSpec)>,
}

/// `|s|` enclosure for one row at one frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsInterval {
    pub lo: f64,
    pub hi: f64,
    pub exact_zero: bool,
}

impl AbsInterval {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

struct Evaluator {
    rows: Vec<Row>,
}

fn lcm_all(xs: impl Iterator<Item = BigInt>) -> BigInt {
    xs.fold(BigInt::one(), |a, b| a.lcm(&b))
}

impl Evaluator {
    fn new(fam: &NsaFamily, radius: f64) -> Result<Self> {
        let mut rows = Vec::new();
        for b in &fam.blocks {
            for (p, &jp) in b.j.iter().enumerate() {
                let specs: Vec<(usize, RealSpec)> =
                    b.i.iter().cloned().zip(b.v[p].iter().cloned()).collect();
                let exact = specs.iter().all(|(_, x)| x.is_rational());
                let row = if exact {
                    let den = lcm_all(
                        specs
                            .iter()
                            .map(|(_, x)| x.as_rational().unwrap().denom().clone()),
                    );
                    let den_i = den
                        .to_i128()
                        .ok_or_else(|| GhError::Numeric("denominator too large".into()))?;
                    let mut terms = Vec::new();
                    for (k, x) in &specs {
                        let q = x.as_rational().unwrap();
                        let n = (q * Rational::from_integer(den.clone())).to_integer();
                        let n = n
                            .to_i128()
                            .ok_or_else(|| GhError::Numeric("coefficient too large".into()))?;
                        terms.push((*k, n, n));
                    }
                    Row {
                        j: jp,
                        terms,
                        den: den_i,
                        exact,
                        specs,
                    }
                } else {
                    let vmax = specs
                        .iter()
                        .map(|(_, x)| x.to_f64().abs())
                        .fold(1.0, f64::max);
                    let used = (radius.max(1.0) * vmax * 4.0).log2().ceil() as i32;
                    let f = (100 - used).clamp(24, 64) as u32;
                    let den = 1i128 << f;
                    let mut terms = Vec::new();
                    for (k, x) in &specs {
                        let (lo, hi) = x.widest_useful_enclosure(f + 8);
                        let scale = Rational::from_integer(BigInt::from(den));
                        let lo = (lo * &scale).floor().to_integer().to_i128().unwrap();
                        let hi = (hi * &scale).ceil().to_integer().to_i128().unwrap();
                        terms.push((*k, lo, hi));
                    }
                    Row {
                        j: jp,
                        terms,
                        den,
                        exact,
                        specs,
                    }
                };
                rows.push(row);
            }
        }
        Ok(Evaluator { rows })
    }

    fn eval_row(&self, r: usize, xi: &[i64]) -> Result<AbsInterval> {
        let row = &self.rows[r];
        let base = xi[row.j] as i128 * row.den;
        let (mut lo, mut hi) = (base, base);
        for &(k, a, b) in &row.terms {
            let x = xi[k] as i128;
            let (u, w) = (a * x, b * x);
            lo += u.min(w);
            hi += u.max(w);
        }
        let d = row.den as f64;
        if row.exact {
            let v = (lo.unsigned_abs() as f64) / d;
            return Ok(AbsInterval {
                lo: v * (1.0 - ROUND),
                hi: v * (1.0 + ROUND),
                exact_zero: lo == 0,
            });
        }
        if lo > 0 || hi < 0 {
            let (a, b) = if lo > 0 { (lo, hi) } else { (-hi, -lo) };
            return Ok(AbsInterval {
                lo: a as f64 / d * (1.0 - ROUND),
                hi: b as f64 / d * (1.0 + ROUND),
                exact_zero: false,
            });
        }
        if row.terms.iter().all(|&(k, _, _)| xi[k] == 0) {
            let v = xi[row.j].unsigned_abs() as f64;
            return Ok(AbsInterval {
                lo: v,
                hi: v,
                exact_zero: v == 0.0,
            });
        }
        self.refine_row(r, xi, 1)
    }

    /// Rational interval evaluation at `256 * 4^level` bits.
    fn refine_row(&self, r: usize, xi: &[i64], level: u32) -> Result<AbsInterval> {
        let row = &self.rows[r];
        let mut bits = 256u32 << (2 * (level - 1));
        for _ in 0..3 {
            let mut lo = Rational::from_integer(BigInt::from(xi[row.j]));
            let mut hi = lo.clone();
            let mut exhausted = false;
            for (k, x) in &row.specs {
                let e = match x.enclosure(bits) {
                    Ok(e) => e,
                    Err(_) => {
                        exhausted = true;
                        x.widest_useful_enclosure(bits)
                    }
                };
                let c = Rational::from_integer(BigInt::from(xi[*k]));
                let (u, w) = (&e.0 * &c, &e.1 * &c);
                if u <= w {
                    lo += u;
                    hi += w;
                } else {
                    lo += w;
                    hi += u;
                }
            }
            if lo.is_positive() || hi.is_negative() {
                let (a, b) = if lo.is_positive() {
                    (lo, hi)
                } else {
                    (-hi, -lo)
                };
                return Ok(AbsInterval {
                    lo: rational_to_f64(&a) * (1.0 - ROUND),
                    hi: rational_to_f64(&b) * (1.0 + ROUND),
                    exact_zero: false,
                });
            }
            if lo.is_zero() && hi.is_zero() {
                return Ok(AbsInterval {
                    lo: 0.0,
                    hi: 0.0,
                    exact_zero: true,
                });
            }
            if exhausted {
                break;
            }
            bits *= 4;
        }
        Err(GhError::PrecisionExhausted(format!(
            "sign of symbol at {xi:?} undetermined"
        )))
    }

    fn eval(&self, xi: &[i64]) -> Result<Vec<AbsInterval>> {
        (0..self.rows.len()).map(|r| self.eval_row(r, xi)).collect()
    }

    fn refine_all(&self, xi: &[i64], level: u32) -> Result<Vec<AbsInterval>> {
        (0..self.rows.len())
            .map(|r| {
                if self.rows[r].exact {
                    self.eval_row(r, xi)
                } else {
                    self.refine_row(r, xi, level)
                }
            })
            .collect()
    }
}

/// Outcome of one condition over a lattice ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    /// Frequency minimizing the ratio to the threshold, lexicographic ties.
    pub worst_xi: Option<Vec<i64>>,
    pub worst_ratio: f64,
    /// Failing frequencies (first few, lexicographic).
    pub witnesses: Vec<Vec<i64>>,
    pub radius: f64,
    /// Radius of the exhaustively scanned ball.
    pub scanned_radius: i64,
    /// Convergent-derived frequencies checked beyond the scanned ball.
    pub extra_points: usize,
}

const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Decision {
    Pass,
    Fail,
    Unsure,
}

fn scanned_radius(dim: usize, radius: f64) -> i64 {
    let mut r = radius.floor().max(0.0) as i64;
    while r > 0 && (2 * r as u64 + 1).saturating_pow(dim as u32) > MAX_SCAN_POINTS {
        r -= 1;
    }
    r
}

/// Frequencies from convergents of `-v` for blocks with a single pivot and a
/// single remaining index, lying within `radius`.
fn convergent_points(fam: &NsaFamily, radius: f64) -> Result<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    let qmax = BigInt::from(radius.floor() as i64);
    for b in &fam.blocks {
        if b.j.len() != 1 || b.i.len() != 1 {
            continue;
        }
        for (p, q) in convergents_below(&b.v[0][0], true, &qmax)? {
            let (Some(p), Some(q)) = (p.to_i64(), q.to_i64()) else {
                continue;
            };
            if q == 0 || ((p as f64).powi(2) + (q as f64).powi(2)).sqrt() > radius {
                continue;
            }
            let mut xi = vec![0i64; fam.dim];
            xi[b.j[0]] = p;
            xi[b.i[0]] = q;
            out.push(xi);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

struct PointOutcome {
    xi: Vec<i64>,
    ratio: f64,
    fail: bool,
}

/// Scans the ball plus convergent points with `decide(xi, intervals)`,
/// returning `(decision, ratio)`; undecided points are re-evaluated at higher
/// precision.
fn scan<F>(fam: &NsaFamily, radius: f64, decide: F) -> Result<ConditionReport>
where
    F: Fn(&[i64], &[AbsInterval]) -> (Decision, f64) + Sync,
{
    if !(radius >= 1.0) {
        return Err(GhError::Spec("radius must be >= 1".into()));
    }
    let ev = Evaluator::new(fam, radius)?;
    let r = scanned_radius(fam.dim, radius);
    let r2 = radius * radius;
    let check = |xi: &[i64]| -> Result<PointOutcome> {
        let mut iv = ev.eval(xi)?;
        let (mut d, mut ratio) = decide(xi, &iv);
        let mut level = 1;
        while d == Decision::Unsure {
            level += 1;
            if level > 3 {
                return Err(GhError::PrecisionExhausted(format!(
                    "threshold comparison at {xi:?}"
                )));
            }
            iv = ev.refine_all(xi, level)?;
            let o = decide(xi, &iv);
            d = o.0;
            ratio = o.1;
        }
        Ok(PointOutcome {
            xi: xi.to_vec(),
            ratio,
            fail: d == Decision::Fail,
        })
    };
    let firsts: Vec<i64> = (-r..=r).collect();
    let chunks: Vec<Result<(Option<PointOutcome>, Vec<Vec<i64>>)>> = firsts
        .par_iter()
        .map(|&x0| {
            let mut worst: Option<PointOutcome> = None;
            let mut fails = Vec::new();
            let mut err = None;
            for_each_box_point(fam.dim - 1, r, |rest| {
                if err.is_some() {
                    return;
                }
                let mut xi = Vec::with_capacity(fam.dim);
                xi.push(x0);
                xi.extend_from_slice(rest);
                let n = norm_sq(&xi);
                if n == 0 || n as f64 > r2 {
                    return;
                }
                match check(&xi) {
                    Ok(o) => {
                        if o.fail && fails.len() < MAX_WITNESSES {
                            fails.push(o.xi.clone());
                        }
                        if worst.as_ref().map(|w| o.ratio < w.ratio).unwrap_or(true) {
                            worst = Some(o);
                        }
                    }
                    Err(e) => err = Some(e),
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok((worst, fails)),
            }
        })
        .collect();
    let mut worst: Option<PointOutcome> = None;
    let mut witnesses = Vec::new();
    for c in chunks {
        let (w, f) = c?;
        witnesses.extend(f);
        if let Some(w) = w {
            if worst.as_ref().map(|b| w.ratio < b.ratio).unwrap_or(true) {
                worst = Some(w);
            }
        }
    }
    let extra = convergent_points(fam, radius)?;
    let mut extra_points = 0;
    for xi in extra {
        if xi.iter().all(|k| k.abs() <= r) && norm_sq(&xi) as f64 <= (r * r) as f64 {
            continue;
        }
        extra_points += 1;
        let o = check(&xi)?;
        if o.fail {
            witnesses.push(o.xi.clone());
        }
        if worst.as_ref().map(|b| o.ratio < b.ratio).unwrap_or(true) {
            worst = Some(o);
        }
    }
    witnesses.sort();
    witnesses.truncate(MAX_WITNESSES);
    let holds = witnesses.is_empty();
    Ok(ConditionReport {
        holds,
        worst_ratio: worst.as_ref().map(|w| w.ratio).unwrap_or(f64::INFINITY),
        worst_xi: worst.map(|w| w.xi),
        witnesses,
        radius,
        scanned_radius: r,
        extra_points,
    })
}

fn ball_norm_sq(xi: &[i64]) -> f64 {
    xi.iter().map(|&k| (k as f64) * (k as f64)).sum()
}

/// Condition G with trial constants `(C, rho)` over `0 < |xi| <= radius`.
pub fn check_condition_g(
    fam: &NsaFamily,
    c: f64,
    rho: f64,
    radius: f64,
) -> Result<ConditionReport> {
    if !(c > 0.0) || !(rho >= 0.0) {
        return Err(GhError::Spec("need C > 0 and rho >= 0".into()));
    }
    scan(fam, radius, |xi, iv| {
        let t2 = c * c * (1.0 + ball_norm_sq(xi)).powf(-2.0 * rho);
        let s2_lo: f64 = iv.iter().map(|a| a.lo * a.lo).sum::<f64>() * (1.0 - ROUND);
        let s2_hi: f64 = iv.iter().map(|a| a.hi * a.hi).sum::<f64>() * (1.0 + ROUND);
        let ratio = ((s2_lo + s2_hi) * 0.5 / t2).sqrt();
        if iv.iter().all(|a| a.exact_zero) {
            return (Decision::Fail, 0.0);
        }
        if s2_lo >= t2 * (1.0 + GUARD) {
            (Decision::Pass, ratio)
        } else if s2_hi < t2 * (1.0 - GUARD) {
            (Decision::Fail, ratio)
        } else {
            (Decision::Unsure, ratio)
        }
    })
}

fn block_thresholds(fam: &NsaFamily, xi: &[i64], b: f64, m: f64) -> Vec<f64> {
    fam.blocks
        .iter()
        .flat_map(|blk| {
            let n2: f64 = blk.i.iter().map(|&k| (xi[k] as f64).powi(2)).sum();
            let t = b * (1.0 + n2.sqrt()).powf(-m);
            std::iter::repeat(t).take(blk.j.len())
        })
        .collect()
}

/// Condition I with trial constants `(B, M)` over `0 < |xi| <= radius`.
pub fn check_condition_i(fam: &NsaFamily, b: f64, m: f64, radius: f64) -> Result<ConditionReport> {
    if !(b > 0.0) || !(m >= 0.0) {
        return Err(GhError::Spec("need B > 0 and M >= 0".into()));
    }
    scan(fam, radius, |xi, iv| {
        let th = block_thresholds(fam, xi, b, m);
        let ratio = iv
            .iter()
            .zip(&th)
            .map(|(a, t)| a.mid() / t)
            .fold(0.0, f64::max);
        if iv.iter().zip(&th).any(|(a, t)| a.lo >= t * (1.0 + GUARD)) {
            (Decision::Pass, ratio)
        } else if iv
            .iter()
            .zip(&th)
            .all(|(a, t)| a.exact_zero || a.hi < t * (1.0 - GUARD))
        {
            (Decision::Fail, ratio)
        } else {
            (Decision::Unsure, ratio)
        }
    })
}

/// `min_xi max_{l,p} |s_{lp}(xi)| (1 + |xi''_l|)^M` over the ball, with its
/// minimizer. Zero means an exact simultaneous zero.
pub fn fit_b(fam: &NsaFamily, m: f64, radius: f64) -> Result<(f64, Option<Vec<i64>>)> {
    let rep = scan(fam, radius, |xi, iv| {
        let th = block_thresholds(fam, xi, 1.0, m);
        if iv.iter().all(|a| a.exact_zero) {
            return (Decision::Fail, 0.0);
        }
        (
            Decision::Pass,
            iv.iter()
                .zip(&th)
                .map(|(a, t)| a.mid() / t)
                .fold(0.0, f64::max),
        )
    })?;
    Ok((rep.worst_ratio, rep.worst_xi))
}

/// `min_xi S(xi) (1 + |xi|^2)^rho` over the ball.
pub fn fit_c(fam: &NsaFamily, rho: f64, radius: f64) -> Result<(f64, Option<Vec<i64>>)> {
    let rep = scan(fam, radius, |xi, iv| {
        if iv.iter().all(|a| a.exact_zero) {
            return (Decision::Fail, 0.0);
        }
        let s2: f64 = iv.iter().map(|a| a.mid() * a.mid()).sum();
        (
            Decision::Pass,
            s2.sqrt() * (1.0 + ball_norm_sq(xi)).powf(rho),
        )
    })?;
    Ok((rep.worst_ratio, rep.worst_xi))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NsaVerdict {
    pub g_holds: bool,
    pub i_holds: bool,
    pub agree: bool,
    pub c: f64,
    pub rho: f64,
    pub b: f64,
    pub m: f64,
    pub witnesses: Vec<Vec<i64>>,
    pub radius: f64,
    pub scanned_radius: i64,
}

/// Runs condition I with a fitted `B` (half the observed minimum) and
/// exponent `m`; when it holds, derives `C = B 2^{-M/2}`, `rho = M/2` and
/// confirms condition G. When it fails, confirms G fails for `C = 1`.
pub fn verify_equivalence(fam: &NsaFamily, m: f64, radius: f64) -> Result<NsaVerdict> {
    let (b_star, _) = fit_b(fam, m, radius)?;
    if b_star > 0.0 {
        let b = 0.5 * b_star;
        let ri = check_condition_i(fam, b, m, radius)?;
        let c = b * 2f64.powf(-m / 2.0);
        let rho = m / 2.0;
        let rg = check_condition_g(fam, c, rho, radius)?;
        let mut witnesses = ri.witnesses.clone();
        witnesses.extend(rg.witnesses.clone());
        witnesses.sort();
        witnesses.dedup();
        Ok(NsaVerdict {
            g_holds: rg.holds,
            i_holds: ri.holds,
            agree: rg.holds == ri.holds,
            c,
            rho,
            b,
            m,
            witnesses,
            radius,
            scanned_radius: ri.scanned_radius,
        })
    } else {
        let ri = check_condition_i(fam, 1.0, m, radius)?;
        let rg = check_condition_g(fam, 1.0, m / 2.0, radius)?;
        let mut witnesses = ri.witnesses.clone();
        witnesses.extend(rg.witnesses.clone());
        witnesses.sort();
        witnesses.dedup();
        Ok(NsaVerdict {
            g_holds: rg.holds,
            i_holds: ri.holds,
            agree: rg.holds == ri.holds,
            c: 1.0,
            rho: m / 2.0,
            b: 0.0,
            m,
            witnesses,
            radius,
            scanned_radius: ri.scanned_radius,
        })
    }
}
