//! Global hypoellipticity of systems: per-shell minimal symbols, exponent
//! fits, verdicts, Lie-hull side checks, singular solutions and the
//! product-level checks for operators with constant group fields.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::diophantine::real::{liouville_decay_certificate, LiouvilleDecayCertificate};
use crate::error::{GhError, Result};
use crate::fields::{lie_hull, LieElement, SystemSpec, FLOAT_TOL};
use crate::fit::{record_power_fit, PowerFit};
use crate::operator::{tilde_p_ellipticity, FourierData, OperatorSpec, QChoice};
use crate::scalar::{c_real, rational_to_f64, Rational, Scalar};
use crate::spectral::{for_each_box_point, norm_sq, spin_lambda, spin_matrix, GroupSpec, Mode};

/// SU(2) singular values at or below this count as zero.
pub const SU2_ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellMinimum {
    #[serde(serialize_with = "crate::scalar::ser::rational")]
    pub lambda: Rational,
    pub sigma_min: f64,
    /// Exact `sigma_min^2` on the rational torus path.
    #[serde(serialize_with = "ser_opt_rational")]
    pub sigma_sq: Option<Rational>,
    pub witness: Mode,
    /// Torus frequency of the witness for product-level minima.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<i64>>,
    pub is_zero: bool,
}

fn ser_opt_rational<Se: serde::Serializer>(
    q: &Option<Rational>,
    s: Se,
) -> std::result::Result<Se::Ok, Se::Error> {
    match q {
        Some(q) => s.serialize_some(&q.to_string()),
        None => s.serialize_none(),
    }
}

impl ShellMinimum {
    pub fn lambda_f64(&self) -> f64 {
        rational_to_f64(&self.lambda)
    }

    pub fn witness_label(&self) -> String {
        match &self.tau {
            Some(t) => format!(
                "tau={}:{}",
                format!("{t:?}").replace(' ', ""),
                self.witness.label()
            ),
            None => self.witness.label(),
        }
    }
}

fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn lex_less<V: PartialOrd>(a: &(V, Vec<i64>), b: &(V, Vec<i64>)) -> bool {
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Less) => true,
        Some(std::cmp::Ordering::Equal) => a.1 < b.1,
        _ => false,
    }
}

fn merge_min<V: PartialOrd>(
    mut a: BTreeMap<i64, (V, Vec<i64>)>,
    b: BTreeMap<i64, (V, Vec<i64>)>,
) -> BTreeMap<i64, (V, Vec<i64>)> {
    for (k, v) in b {
        match a.get(&k) {
            Some(cur) if !lex_less(&v, cur) => {}
            _ => {
                a.insert(k, v);
            }
        }
    }
    a
}

/// Minimum of `f` over each sphere `|xi|^2 = lambda`, `0 < lambda <= norm_max`,
/// ties broken by the lexicographically smallest `xi`. Parallel over the
/// first coordinate; the reduction is order independent.
fn box_scan<V, F>(dim: usize, norm_max: i64, f: F) -> BTreeMap<i64, (V, Vec<i64>)>
where
    V: PartialOrd + Send,
    F: Fn(&[i64]) -> V + Sync,
{
    let r = isqrt(norm_max);
    (-r..=r)
        .into_par_iter()
        .fold(
            BTreeMap::new,
            |mut acc: BTreeMap<i64, (V, Vec<i64>)>, x0| {
                let rest = norm_max - x0 * x0;
                let mut xi = vec![0i64; dim];
                xi[0] = x0;
                let mut visit = |xi: &[i64]| {
                    let l = norm_sq(xi);
                    if l == 0 || l > norm_max {
                        return;
                    }
                    let cand = (f(xi), xi.to_vec());
                    match acc.get(&l) {
                        Some(cur) if !lex_less(&cand, cur) => {}
                        _ => {
                            acc.insert(l, cand);
                        }
                    }
                };
                if dim == 1 {
                    visit(&xi);
                } else {
                    let r2 = isqrt(rest);
                    for_each_box_point(dim - 1, r2, |y| {
                        xi[1..].copy_from_slice(y);
                        visit(&xi);
                    });
                }
                acc
            },
        )
        .reduce(BTreeMap::new, merge_min)
}

/// Per-sphere minimum of `sum_p (v_p . xi)^2`: exact for rational vectors,
/// `f64` otherwise. Returns `(lambda, sigma^2 exact, sigma, xi)`.
fn quadratic_scan<S: Scalar>(
    vecs: &[Vec<S>],
    dim: usize,
    norm_max: i64,
) -> Vec<(i64, Option<Rational>, f64, Vec<i64>)> {
    let exact: Option<Vec<Vec<Rational>>> = vecs
        .iter()
        .map(|v| v.iter().map(|x| x.exact_value()).collect())
        .collect();
    if let Some(q) = exact {
        let den = q
            .iter()
            .flatten()
            .fold(BigInt::one(), |a, x| a.lcm(x.denom()));
        let ints: Vec<Vec<BigInt>> = q
            .iter()
            .map(|v| {
                v.iter()
                    .map(|x| (x * Rational::from_integer(den.clone())).to_integer())
                    .collect()
            })
            .collect();
        let r = BigInt::from(isqrt(norm_max).max(1));
        let bound: BigInt = ints
            .iter()
            .map(|v| {
                let s: BigInt = v.iter().map(|x| x.abs()).sum::<BigInt>() * &r;
                &s * &s
            })
            .sum();
        let d2 = Rational::from_integer(&den * &den);
        let fits = bound < (BigInt::one() << 120usize)
            && ints.iter().flatten().all(|x| x.to_i128().is_some());
        if fits {
            let iv: Vec<Vec<i128>> = ints
                .iter()
                .map(|v| v.iter().map(|x| x.to_i128().unwrap()).collect())
                .collect();
            let m = box_scan(dim, norm_max, |xi| {
                iv.iter()
                    .map(|v| {
                        let d: i128 = v.iter().zip(xi).map(|(a, b)| a * *b as i128).sum();
                        d * d
                    })
                    .sum::<i128>()
            });
            return m
                .into_iter()
                .map(|(l, (s, xi))| {
                    let q = Rational::from_integer(BigInt::from(s)) / &d2;
                    let f = rational_to_f64(&q).sqrt();
                    (l, Some(q), f, xi)
                })
                .collect();
        }
        let m = box_scan(dim, norm_max, |xi| {
            ints.iter()
                .map(|v| {
                    let d: BigInt = v.iter().zip(xi).map(|(a, b)| a * BigInt::from(*b)).sum();
                    &d * &d
                })
                .sum::<BigInt>()
        });
        return m
            .into_iter()
            .map(|(l, (s, xi))| {
                let q = Rational::from_integer(s) / &d2;
                let f = rational_to_f64(&q).sqrt();
                (l, Some(q), f, xi)
            })
            .collect();
    }
    let fv: Vec<Vec<f64>> = vecs
        .iter()
        .map(|v| v.iter().map(|x| x.to_f64()).collect())
        .collect();
    let m = box_scan(dim, norm_max, |xi| {
        fv.iter()
            .map(|v| {
                let d: f64 = v.iter().zip(xi).map(|(a, b)| a * *b as f64).sum();
                d * d
            })
            .sum::<f64>()
    });
    m.into_iter()
        .map(|(l, (s, xi))| (l, None, s.sqrt(), xi))
        .collect()
}

fn lambda_max_int(lambda_max: &Rational) -> Result<i64> {
    if lambda_max.is_negative() {
        return Err(GhError::Spec("lambda_max must be >= 0".into()));
    }
    lambda_max
        .floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| GhError::Spec("lambda_max too large".into()))
}

fn su2_stack(gens: &[LieElement<f64>], two_j: u32, shift: &[f64]) -> Result<DMatrix<Complex<f64>>> {
    let d = (two_j + 1) as usize;
    let mut m = DMatrix::<Complex<f64>>::zeros(gens.len() * d, d);
    for (p, g) in gens.iter().enumerate() {
        let b = spin_matrix(two_j, g)?;
        for r in 0..d {
            for c in 0..d {
                m[(p * d + r, c)] = b[r][c];
            }
            m[(p * d + r, r)] += Complex::new(0.0, shift[p]);
        }
    }
    Ok(m)
}

/// Smallest singular value and the column of the largest entry of its
/// right singular vector (1-based).
fn smallest_singular(m: DMatrix<Complex<f64>>) -> (f64, u32) {
    let svd = m.svd(false, true);
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
        .map(|(k, s)| (k, *s))
        .unwrap();
    let vt = svd.v_t.unwrap();
    let mut col = 0;
    let mut best = -1.0;
    for c in 0..vt.ncols() {
        let a = vt[(k, c)].norm();
        if a > best + 1e-12 {
            best = a;
            col = c;
        }
    }
    (s, col as u32 + 1)
}

/// Smallest `(sum_p ||L_p phi||^2)^{1/2}` over unit `phi` in each shell
/// `0 < lambda <= lambda_max`, for the generators `L_p` of all range bases.
///
/// Torus: `min_xi (sum_p (v_p . xi)^2)^{1/2}` over the sphere, exact for
/// rational data. SU(2): SVD of the stacked spin matrices (fields act on
/// columns, so one `(2j+1)`-block carries the whole spectrum).
pub fn shell_minima<S: Scalar>(
    system: &SystemSpec<S>,
    lambda_max: &Rational,
) -> Result<Vec<ShellMinimum>> {
    let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
    let gens = system.generators(tol)?;
    generator_minima(&system.group, &gens, lambda_max)
}

/// Shell minima for an explicit list of constant fields.
pub fn generator_minima<S: Scalar>(
    group: &GroupSpec,
    gens: &[LieElement<S>],
    lambda_max: &Rational,
) -> Result<Vec<ShellMinimum>> {
    if gens.is_empty() {
        return Err(GhError::ZeroMap);
    }
    for g in gens {
        if g.dim() != group.dim() {
            return Err(GhError::Dimension(format!(
                "generator of dim {} on {}",
                g.dim(),
                group.name()
            )));
        }
    }
    match group {
        GroupSpec::Torus(m) => {
            let vecs: Vec<Vec<S>> = gens.iter().map(|g| g.coords().to_vec()).collect();
            let rows = quadratic_scan(&vecs, *m, lambda_max_int(lambda_max)?);
            Ok(rows
                .into_iter()
                .map(|(l, q, s, xi)| {
                    let is_zero = match &q {
                        Some(q) => q.is_zero(),
                        None => s <= FLOAT_TOL,
                    };
                    ShellMinimum {
                        lambda: Rational::from_integer(l.into()),
                        sigma_min: s,
                        sigma_sq: q,
                        witness: Mode::Torus(xi),
                        tau: None,
                        is_zero,
                    }
                })
                .collect())
        }
        GroupSpec::Su2 => {
            let gf: Vec<LieElement<f64>> = gens.iter().map(|g| g.to_f64()).collect();
            let mut spins = Vec::new();
            let mut two_j = 1u32;
            while &spin_lambda(two_j) <= lambda_max {
                spins.push(two_j);
                two_j += 1;
            }
            let zero = vec![0.0; gf.len()];
            spins
                .par_iter()
                .map(|&two_j| {
                    let (s, col) = smallest_singular(su2_stack(&gf, two_j, &zero)?);
                    Ok(ShellMinimum {
                        lambda: spin_lambda(two_j),
                        sigma_min: s,
                        sigma_sq: None,
                        witness: Mode::Spin { two_j, row: 1, col },
                        tau: None,
                        is_zero: s <= SU2_ZERO_TOL,
                    })
                })
                .collect()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    #[serde(flatten)]
    pub fit: PowerFit,
    /// Largest `C` with `sigma >= C (1 + lambda)^{-rho}` on every positive tested shell.
    pub c_certified: f64,
    #[serde(serialize_with = "crate::scalar::ser::rational")]
    pub lambda0: Rational,
    /// Shells with `sigma_min = 0`, excluded from the fit.
    pub zero_lambdas: Vec<String>,
}

/// `sigma_min ~ C (1 + lambda)^{-rho}` over positive minima with
/// `lambda >= lambda0`, fitted on the running-minimum records.
pub fn fit_exponent(minima: &[ShellMinimum], lambda0: &Rational) -> Result<ExponentFit> {
    let used: Vec<&ShellMinimum> = minima.iter().filter(|m| &m.lambda >= lambda0).collect();
    let zero_lambdas: Vec<String> = used
        .iter()
        .filter(|m| m.is_zero)
        .map(|m| m.lambda.to_string())
        .collect();
    let pos: Vec<(f64, f64)> = used
        .iter()
        .filter(|m| !m.is_zero)
        .map(|m| (m.lambda_f64(), m.sigma_min))
        .collect();
    if pos.len() < 3 {
        return Err(GhError::InsufficientData(format!(
            "{} positive shells above lambda0, need 3",
            pos.len()
        )));
    }
    let fit = record_power_fit(&pos)
        .ok_or_else(|| GhError::InsufficientData("no positive minima".into()))?;
    let c_certified = pos
        .iter()
        .map(|(l, s)| s * (1.0 + l).powf(fit.rho))
        .fold(f64::INFINITY, f64::min);
    Ok(ExponentFit {
        fit,
        c_certified,
        lambda0: lambda0.clone(),
        zero_lambdas,
    })
}

/// A decay certificate from outside the shell scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayWitness {
    pub label: String,
    /// `ln(1 + lambda)`, as reported by the source.
    pub ln_lambda: f64,
    /// `ln sigma`, an upper bound.
    pub ln_sigma: f64,
    /// `sigma < (1 + lambda)^{-s}` is proved by the source.
    pub certified: bool,
}

/// Witnesses `xi_k = (-p_k, q_k)` of `d_1 + alpha d_2`, `alpha = sum base^{-n!}`,
/// each certified by big-integer arithmetic against the exponent `s`.
pub fn liouville_decay_witnesses(
    base: u32,
    ks: std::ops::RangeInclusive<u32>,
    s: &Rational,
) -> Result<Vec<DecayWitness>> {
    ks.map(|k| {
        let c: LiouvilleDecayCertificate = liouville_decay_certificate(base, k, s)?;
        Ok(DecayWitness {
            label: format!("liouville base {base} k={k}"),
            ln_lambda: c.ln_lambda_lo,
            ln_sigma: c.ln_sigma_hi,
            certified: c.certified,
        })
    })
    .collect()
}

#[derive(Clone, Debug)]
pub struct GhThresholds {
    /// Test exponent for super-polynomial decay.
    pub s: f64,
    pub min_witnesses: usize,
    /// Defaults to the smallest positive tested eigenvalue.
    pub lambda0: Option<Rational>,
    pub min_r_squared: f64,
}

impl Default for GhThresholds {
    fn default() -> Self {
        GhThresholds {
            s: 5.0,
            min_witnesses: 3,
            lambda0: None,
            min_r_squared: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GhVerdict {
    #[serde(rename = "consistent-gh")]
    ConsistentGH,
    FailZeroSymbol,
    FailSuperpolynomial,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GhReport {
    pub verdict: GhVerdict,
    pub reason: String,
    #[serde(serialize_with = "crate::scalar::ser::rational")]
    pub lambda0: Rational,
    #[serde(serialize_with = "crate::scalar::ser::rational")]
    pub lambda_max: Rational,
    pub fit: Option<ExponentFit>,
    /// Shells with an exact (or below-tolerance) zero symbol.
    pub zero_witnesses: Vec<ShellMinimum>,
    /// Decay faster than `(1 + lambda)^{-s}`.
    pub decay_witnesses: Vec<DecayWitness>,
    pub minima: Vec<ShellMinimum>,
}

/// Verdict from shell minima up to `lambda_max` plus external certificates.
///
/// Zero symbols on at least `min_witnesses` shells above `lambda0`, the last
/// one in the top quarter of the range, give `FailZeroSymbol`. At least
/// `min_witnesses` certificates of decay beyond `(1 + lambda)^{-s}` give
/// `FailSuperpolynomial`. Otherwise a record fit with `r^2 >= min_r_squared`
/// (or records that never decrease) gives `ConsistentGH`.
pub fn gh_verdict(
    minima: Vec<ShellMinimum>,
    lambda_max: &Rational,
    external: &[DecayWitness],
    th: &GhThresholds,
) -> GhReport {
    let lambda0 = th
        .lambda0
        .clone()
        .or_else(|| {
            minima
                .iter()
                .map(|m| m.lambda.clone())
                .find(|l| l > &Rational::zero())
        })
        .unwrap_or_else(Rational::one);
    let zeros: Vec<ShellMinimum> = minima
        .iter()
        .filter(|m| m.is_zero && m.lambda >= lambda0)
        .cloned()
        .collect();
    let mut decay: Vec<DecayWitness> = minima
        .iter()
        .filter(|m| !m.is_zero && m.lambda >= lambda0)
        .filter_map(|m| {
            let ll = (1.0 + m.lambda_f64()).ln();
            let ls = m.sigma_min.ln();
            (ls < -th.s * ll).then(|| DecayWitness {
                label: format!("shell {} at {}", m.lambda, m.witness_label()),
                ln_lambda: ll,
                ln_sigma: ls,
                certified: m.sigma_sq.is_some(),
            })
        })
        .collect();
    decay.extend(external.iter().filter(|w| w.certified).cloned());
    let fit = fit_exponent(&minima, &lambda0).ok();
    let lmax = rational_to_f64(lambda_max);
    let recurring = zeros.len() >= th.min_witnesses
        && zeros
            .last()
            .map(|z| z.lambda_f64() >= lmax / 4.0)
            .unwrap_or(false);
    let (verdict, reason) = if recurring {
        (
            GhVerdict::FailZeroSymbol,
            format!(
                "zero symbol on {} shells up to lambda = {}",
                zeros.len(),
                zeros.last().unwrap().lambda
            ),
        )
    } else if decay.len() >= th.min_witnesses {
        (
            GhVerdict::FailSuperpolynomial,
            format!(
                "{} witnesses decay faster than (1 + lambda)^-{}",
                decay.len(),
                th.s
            ),
        )
    } else if !zeros.is_empty() {
        (
            GhVerdict::Inconclusive,
            format!("{} isolated zero shells", zeros.len()),
        )
    } else {
        match &fit {
            Some(f) if f.fit.bounded_below => (
                GhVerdict::ConsistentGH,
                "running minimum bounded below on the tested range".to_string(),
            ),
            Some(f) if f.fit.r_squared >= th.min_r_squared => (
                GhVerdict::ConsistentGH,
                format!("power law rho = {:.4}", f.fit.rho),
            ),
            Some(f) => (
                GhVerdict::Inconclusive,
                format!("fit quality r^2 = {:.3}", f.fit.r_squared),
            ),
            None => (
                GhVerdict::Inconclusive,
                "fewer than 3 positive shells".to_string(),
            ),
        }
    };
    GhReport {
        verdict,
        reason,
        lambda0,
        lambda_max: lambda_max.clone(),
        fit,
        zero_witnesses: zeros,
        decay_witnesses: decay,
        minima,
    }
}

/// `shell_minima` followed by `gh_verdict`.
pub fn analyze_system<S: Scalar>(
    system: &SystemSpec<S>,
    lambda_max: &Rational,
    external: &[DecayWitness],
    th: &GhThresholds,
) -> Result<GhReport> {
    Ok(gh_verdict(
        shell_minima(system, lambda_max)?,
        lambda_max,
        external,
        th,
    ))
}

#[derive(Clone, Debug)]
pub struct SingularSolution<S: Scalar> {
    pub u: FourierData<S>,
    pub witnesses: Vec<Mode>,
    pub lambdas: Vec<Rational>,
}

/// `u = sum_nu 1 (x) phi_nu` on the witness modes, at torus frequency 0.
pub fn build_singular_solution<S: Scalar>(
    group: &GroupSpec,
    dim_t: usize,
    witnesses: &[Mode],
) -> Result<SingularSolution<S>> {
    if witnesses.is_empty() {
        return Err(GhError::InsufficientData("no witnesses".into()));
    }
    let lambdas: Vec<Rational> = witnesses
        .iter()
        .map(|m| group.mode_lambda(m))
        .collect::<Result<_>>()?;
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GhError::Spec(
            "witness eigenvalues must increase strictly".into(),
        ));
    }
    let u = FourierData::from_entries(
        group.clone(),
        dim_t,
        witnesses
            .iter()
            .map(|m| (vec![0; dim_t], m.clone(), c_real(S::one()))),
    )?;
    Ok(SingularSolution {
        u,
        witnesses: witnesses.to_vec(),
        lambdas,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularRow {
    #[serde(serialize_with = "crate::scalar::ser::rational")]
    pub lambda: Rational,
    pub witness: String,
    pub u_norm: f64,
    /// `||F_lambda(L_p u)||` per generator.
    pub image_norms: Vec<f64>,
    pub recorded_sigma: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularCheck {
    pub rows: Vec<SingularRow>,
    pub all_ok: bool,
}

/// `L_p u` for every generator of the system.
pub fn generator_images<S: Scalar>(
    sol: &SingularSolution<S>,
    system: &SystemSpec<S>,
) -> Result<Vec<FourierData<S>>> {
    let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
    system
        .generators(tol)?
        .iter()
        .map(|g| sol.u.act_g(g))
        .collect()
}

/// Companion check: `||F_lambda(u)|| = 1` and `||F_lambda(L_p u)|| <= sigma`
/// on each witness shell, `sigma` the recorded minimum for that shell.
pub fn check_singular_solution<S: Scalar>(
    sol: &SingularSolution<S>,
    system: &SystemSpec<S>,
    recorded: &[f64],
) -> Result<SingularCheck> {
    if recorded.len() != sol.witnesses.len() {
        return Err(GhError::Dimension("one recorded sigma per witness".into()));
    }
    let images = generator_images(sol, system)?;
    let mut rows = Vec::new();
    for ((l, w), &sig) in sol.lambdas.iter().zip(&sol.witnesses).zip(recorded) {
        let u_norm = sol.u.project_g(l)?.norm_sq().to_f64().sqrt();
        let image_norms: Vec<f64> = images
            .iter()
            .map(|im| Ok(im.project_g(l)?.norm_sq().to_f64().sqrt()))
            .collect::<Result<_>>()?;
        let ok = (u_norm - 1.0).abs() <= 1e-12
            && image_norms
                .iter()
                .all(|&n| n <= sig * (1.0 + 1e-9) + 1e-300);
        rows.push(SingularRow {
            lambda: l.clone(),
            witness: w.label(),
            u_norm,
            image_norms,
            recorded_sigma: sig,
            ok,
        });
    }
    let all_ok = rows.iter().all(|r| r.ok);
    Ok(SingularCheck { rows, all_ok })
}

/// Zero-symbol witnesses with strictly increasing eigenvalue, at most `k`.
pub fn zero_witness_modes(report: &GhReport, k: usize) -> Vec<(Mode, f64)> {
    report
        .zero_witnesses
        .iter()
        .take(k)
        .map(|m| (m.witness.clone(), m.sigma_min))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HullVerdict {
    HormanderHullFull,
    CommutativeHullObstruction,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HullReport {
    pub verdict: HullVerdict,
    pub hull_dim: usize,
    pub algebra_dim: usize,
    pub commutative: bool,
}

/// Lie hull of the range-basis generators: full hull is the Hormander case;
/// a commutative proper hull in a non-abelian group obstructs.
pub fn hull_checks<S: Scalar>(system: &SystemSpec<S>) -> Result<HullReport> {
    let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
    let gens = system.generators(tol)?;
    let hull = lie_hull(&system.group, &gens, tol)?;
    let commutative = hull.is_commutative(&system.group, tol)?;
    let verdict = if hull.is_full() {
        HullVerdict::HormanderHullFull
    } else if !system.group.is_abelian() && commutative {
        HullVerdict::CommutativeHullObstruction
    } else {
        HullVerdict::Neither
    };
    Ok(HullReport {
        verdict,
        hull_dim: hull.dim(),
        algebra_dim: system.group.dim(),
        commutative,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductCheck {
    /// `commuting-torus-fields` or `constant-group-fields`.
    pub mode: &'static str,
    /// Indices of the terms playing the constant role.
    pub entries: Vec<usize>,
    pub hypotheses: Vec<Hypothesis>,
    pub gh: Option<GhReport>,
    /// Every hypothesis holds and the system check is consistent with (GH).
    pub applies: bool,
}

fn q_is_psd<S: Scalar>(p: &OperatorSpec<S>) -> bool {
    // OperatorSpec validates constant forms on construction
    match &p.q {
        QChoice::ConstantForm(_) | QChoice::LaplacianT | QChoice::Zero => true,
    }
}

fn constant_lie<S: Scalar>(a: &crate::fields::CoefficientMap<S>) -> LieElement<S> {
    LieElement::new(a.comps.iter().map(|c| c.constant_term().re).collect())
}

/// Constant `a_l = L_l` and constant `W_l`: the fields `Y_l = L_l + W_l`
/// commute with `Delta_T + Delta_G`, and (GH) of `{Y_l}` on `T x G` is read
/// from `min sigma(sum_l |i (w_l . tau) + L_l|)` on each level
/// `mu + lambda <= level_max`.
pub fn product_check_commuting<S: Scalar>(
    p: &OperatorSpec<S>,
    level_max: &Rational,
    th: &GhThresholds,
) -> Result<ProductCheck> {
    let entries: Vec<usize> = p
        .terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.a.is_constant() && t.w.is_constant() && !t.a.is_zero())
        .map(|(l, _)| l)
        .collect();
    let ell = tilde_p_ellipticity(p)?.is_elliptic();
    let mut hyps = vec![
        Hypothesis {
            name: "Q positive semidefinite".into(),
            holds: q_is_psd(p),
        },
        Hypothesis {
            name: "Q - sum W^2 elliptic".into(),
            holds: ell,
        },
        Hypothesis {
            name: "constant entries present".into(),
            holds: !entries.is_empty(),
        },
    ];
    if entries.is_empty() {
        return Ok(ProductCheck {
            mode: "commuting-torus-fields",
            entries,
            hypotheses: hyps,
            gh: None,
            applies: false,
        });
    }
    hyps.push(Hypothesis {
        name: "W_l commute with Delta_T".into(),
        holds: true,
    });
    let ls: Vec<LieElement<S>> = entries
        .iter()
        .map(|&l| constant_lie(&p.terms[l].a))
        .collect();
    let ws: Vec<Vec<S>> = entries
        .iter()
        .map(|&l| p.terms[l].w.constant_vector().unwrap())
        .collect();
    let minima = product_minima(&p.group, p.dim_t, &ls, &ws, level_max)?;
    let gh = gh_verdict(minima, level_max, &[], th);
    let ok = gh.verdict == GhVerdict::ConsistentGH;
    hyps.push(Hypothesis {
        name: "{L_l + W_l} globally hypoelliptic on T x G".into(),
        holds: ok,
    });
    let applies = hyps.iter().all(|h| h.holds);
    Ok(ProductCheck {
        mode: "commuting-torus-fields",
        entries,
        hypotheses: hyps,
        gh: Some(gh),
        applies,
    })
}

/// Minima over levels `mu + lambda` of the stacked symbols `i(w_l . tau) + L_l`.
pub fn product_minima<S: Scalar>(
    group: &GroupSpec,
    dim_t: usize,
    ls: &[LieElement<S>],
    ws: &[Vec<S>],
    level_max: &Rational,
) -> Result<Vec<ShellMinimum>> {
    let nmax = lambda_max_int(level_max)?;
    match group {
        GroupSpec::Torus(m) => {
            let vecs: Vec<Vec<S>> = ls
                .iter()
                .zip(ws)
                .map(|(l, w)| {
                    w.iter()
                        .cloned()
                        .chain(l.coords().iter().cloned())
                        .collect()
                })
                .collect();
            let rows = quadratic_scan(&vecs, dim_t + m, nmax);
            Ok(rows
                .into_iter()
                .map(|(l, q, s, x)| {
                    let is_zero = match &q {
                        Some(q) => q.is_zero(),
                        None => s <= FLOAT_TOL,
                    };
                    ShellMinimum {
                        lambda: Rational::from_integer(l.into()),
                        sigma_min: s,
                        sigma_sq: q,
                        witness: Mode::Torus(x[dim_t..].to_vec()),
                        tau: Some(x[..dim_t].to_vec()),
                        is_zero,
                    }
                })
                .collect())
        }
        GroupSpec::Su2 => {
            let lf: Vec<LieElement<f64>> = ls.iter().map(|l| l.to_f64()).collect();
            let wf: Vec<Vec<f64>> = ws
                .iter()
                .map(|w| w.iter().map(|x| x.to_f64()).collect())
                .collect();
            let r = isqrt(nmax);
            let mut taus = Vec::new();
            for_each_box_point(dim_t, r, |t| {
                if norm_sq(t) <= nmax {
                    taus.push(t.to_vec());
                }
            });
            let mut jobs = Vec::new();
            for tau in &taus {
                let mu = Rational::from_integer(norm_sq(tau).into());
                let mut two_j = 0u32;
                loop {
                    let lev = &mu + spin_lambda(two_j);
                    if &lev > level_max {
                        break;
                    }
                    if !lev.is_zero() {
                        jobs.push((tau.clone(), two_j, lev));
                    }
                    two_j += 1;
                }
            }
            let rows: Vec<ShellMinimum> = jobs
                .par_iter()
                .map(|(tau, two_j, lev)| {
                    let shift: Vec<f64> = wf
                        .iter()
                        .map(|w| w.iter().zip(tau).map(|(a, b)| a * *b as f64).sum())
                        .collect();
                    let (s, col) = smallest_singular(su2_stack(&lf, *two_j, &shift)?);
                    Ok(ShellMinimum {
                        lambda: lev.clone(),
                        sigma_min: s,
                        sigma_sq: None,
                        witness: Mode::Spin {
                            two_j: *two_j,
                            row: 1,
                            col,
                        },
                        tau: Some(tau.clone()),
                        is_zero: s <= SU2_ZERO_TOL,
                    })
                })
                .collect::<Result<_>>()?;
            let mut best: BTreeMap<Rational, ShellMinimum> = BTreeMap::new();
            for m in rows {
                let replace = match best.get(&m.lambda) {
                    Some(cur) => {
                        m.sigma_min < cur.sigma_min
                            || (m.sigma_min == cur.sigma_min
                                && (&m.tau, &m.witness) < (&cur.tau, &cur.witness))
                    }
                    None => true,
                };
                if replace {
                    best.insert(m.lambda.clone(), m);
                }
            }
            Ok(best.into_values().collect())
        }
    }
}

/// Constant `a_l = L_l` with `W_l = 0`: `{L_l}` (GH) on `G`, `Q` positive
/// semidefinite and `Q - sum W^2` elliptic over the remaining terms.
pub fn product_check_constant_group<S: Scalar>(
    p: &OperatorSpec<S>,
    lambda_max: &Rational,
    th: &GhThresholds,
) -> Result<ProductCheck> {
    let entries: Vec<usize> = p
        .terms
        .iter()
        .enumerate()
        .filter(|(_, t)| t.a.is_constant() && t.w.is_zero() && !t.a.is_zero())
        .map(|(l, _)| l)
        .collect();
    let rest: Vec<_> = p
        .terms
        .iter()
        .enumerate()
        .filter(|(l, _)| !entries.contains(l))
        .map(|(_, t)| t.clone())
        .collect();
    let reduced = OperatorSpec {
        terms: rest,
        ..p.clone()
    };
    let mut hyps = vec![
        Hypothesis {
            name: "Q positive semidefinite".into(),
            holds: q_is_psd(p),
        },
        Hypothesis {
            name: "Q - sum W^2 elliptic over the remaining terms".into(),
            holds: tilde_p_ellipticity(&reduced)?.is_elliptic(),
        },
        Hypothesis {
            name: "constant entries present".into(),
            holds: !entries.is_empty(),
        },
    ];
    if entries.is_empty() {
        return Ok(ProductCheck {
            mode: "constant-group-fields",
            entries,
            hypotheses: hyps,
            gh: None,
            applies: false,
        });
    }
    let ls: Vec<LieElement<S>> = entries
        .iter()
        .map(|&l| constant_lie(&p.terms[l].a))
        .collect();
    let gh = gh_verdict(
        generator_minima(&p.group, &ls, lambda_max)?,
        lambda_max,
        &[],
        th,
    );
    hyps.push(Hypothesis {
        name: "{L_l} globally hypoelliptic on G".into(),
        holds: gh.verdict == GhVerdict::ConsistentGH,
    });
    let applies = hyps.iter().all(|h| h.holds);
    Ok(ProductCheck {
        mode: "constant-group-fields",
        entries,
        hypotheses: hyps,
        gh: Some(gh),
        applies,
    })
}
