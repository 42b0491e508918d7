//! Empirical probes: the shell-wise lower bound for `<P psi, psi>`, the
//! Poincare-type constant on `T^1`, and the graph-norm bound for torus fields.

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{apply_operator, freq_box, tilde_p_ellipticity, FourierData, OperatorSpec, TorusField};
use crate::error::{GhError, Result};
use crate::fields::{commutativity_check, FLOAT_TOL};
use crate::fit::{record_power_fit, PowerFit};
use crate::scalar::{rational_to_f64, Rational, Scalar};
use crate::spectral::{enumerate_shells, GroupSpec, Mode, Shell};
use crate::trig::{Freq, TrigPoly};

/// Per-shell seed derivation.
pub fn shell_seed(seed: u64, idx: usize) -> u64 {
    seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[derive(Clone, Debug)]
pub struct ProbeConfig {
    pub lambda_max: Rational,
    /// Shells below this are skipped; defaults to the smallest positive eigenvalue.
    pub lambda0: Option<Rational>,
    /// `psi` is supported on `|tau|_inf <= tau_radius`.
    pub tau_radius: i64,
    /// Random `psi` per shell on top of the single-mode trials.
    pub trials: usize,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            lambda_max: Rational::from_integer(100.into()),
            lambda0: None,
            tau_radius: 2,
            trials: 8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    #[serde(serialize_with = "crate::scalar::ser::rational")]
    pub lambda: Rational,
    /// Smallest sampled `<P psi, psi> / ||psi||^2`.
    pub min_ratio: f64,
    /// Label of the minimizing trial.
    pub witness: String,
    pub samples: usize,
    pub all_positive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    /// Sampled minima are upper bounds for the true shell minimum.
    pub empirical: bool,
    /// `diagonal` for constant coefficients on a torus, `sampled` otherwise.
    pub path: &'static str,
    pub seed: u64,
    pub rows: Vec<ProbeRow>,
    /// Fit of the ratios against `(1 + lambda)^{-rho}`.
    pub fit: Option<PowerFit>,
    /// Half the quadratic exponent: comparable to the system exponent.
    pub rho_amplitude: Option<f64>,
    pub all_positive: bool,
    pub warnings: Vec<String>,
}

fn probe_shells(group: &GroupSpec, cfg: &ProbeConfig) -> Result<Vec<Shell>> {
    let shells = enumerate_shells(group, &cfg.lambda_max)?;
    let zero = Rational::from_integer(0.into());
    let l0 = match &cfg.lambda0 {
        Some(l) => l.clone(),
        None => shells
            .iter()
            .map(|s| s.lambda.clone())
            .find(|l| l > &zero)
            .unwrap_or(zero.clone()),
    };
    Ok(shells
        .into_iter()
        .filter(|s| s.lambda >= l0 && s.lambda > zero)
        .collect())
}

/// Hypothesis checks that the probe itself can run.
fn hypothesis_warnings<S: Scalar>(p: &OperatorSpec<S>) -> Result<Vec<String>> {
    let mut w = Vec::new();
    let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
    for (l, t) in p.terms.iter().enumerate() {
        if !t.a.is_zero() && !commutativity_check(&p.group, &t.a, tol)? {
            w.push(format!("term {l}: values of a_l do not commute"));
        }
    }
    if !tilde_p_ellipticity(p)?.is_elliptic() {
        w.push("Q - sum W^2 is not elliptic".into());
    }
    Ok(w)
}

/// Per-shell minimum of `<P psi, psi> / ||psi||^2` over `psi` in
/// `C^infty(T; E_lambda)` truncated to a frequency box.
///
/// Constant coefficients on a torus are diagonal in `(tau, xi)`, with symbol
/// `q(tau) + sum_l (a_l . xi + w_l . tau)^2`, and the minimum is exact on the
/// box. Otherwise single-mode trials and seeded random combinations are
/// evaluated with `apply_operator`. For SU(2) only row 1 of each shell is
/// sampled: the fields act on columns, so every row gives the same ratios.
pub fn final_inequality_probe<S: Scalar>(
    p: &OperatorSpec<S>,
    cfg: &ProbeConfig,
) -> Result<ProbeReport> {
    let warnings = hypothesis_warnings(p)?;
    let shells = probe_shells(&p.group, cfg)?;
    let taus = freq_box(p.dim_t, cfg.tau_radius);
    let diagonal = p.group.is_abelian() && p.is_constant_coefficient();
    let rows: Vec<ProbeRow> = if diagonal {
        shells
            .par_iter()
            .map(|sh| diagonal_row(p, sh, &taus))
            .collect::<Result<_>>()?
    } else {
        let pf = p.to_f64();
        shells
            .par_iter()
            .enumerate()
            .map(|(idx, sh)| sampled_row(&pf, sh, &taus, cfg.trials, shell_seed(cfg.seed, idx)))
            .collect::<Result<_>>()?
    };
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (rational_to_f64(&r.lambda), r.min_ratio))
        .collect();
    let fit = record_power_fit(&pts);
    let rho_amplitude = fit.as_ref().map(|f| f.rho / 2.0);
    let all_positive = rows.iter().all(|r| r.all_positive);
    Ok(ProbeReport {
        empirical: !diagonal,
        path: if diagonal { "diagonal" } else { "sampled" },
        seed: cfg.seed,
        rows,
        fit,
        rho_amplitude,
        all_positive,
        warnings,
    })
}

fn dot<S: Scalar>(a: &[S], b: &[i64]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |s, (x, k)| s + x.clone() * S::from_i64(*k))
}

fn diagonal_row<S: Scalar>(p: &OperatorSpec<S>, sh: &Shell, taus: &[Freq]) -> Result<ProbeRow> {
    let consts: Vec<(Vec<S>, Vec<S>)> = p
        .all_terms()
        .map(|t| {
            let a: Vec<S> = t.a.comps.iter().map(|c| c.constant_term().re).collect();
            (
                a,
                t.w.constant_vector()
                    .unwrap_or_else(|| vec![S::zero(); p.dim_t]),
            )
        })
        .collect();
    let mut best: Option<(S, String)> = None;
    let mut all_positive = true;
    let mut samples = 0;
    for xi_mode in &sh.modes {
        let xi = match xi_mode {
            Mode::Torus(x) => x,
            _ => return Err(GhError::Spec("diagonal probe needs a torus group".into())),
        };
        for tau in taus {
            let mut v = p.q.symbol(tau);
            for (a, w) in &consts {
                let y = dot(a, xi) + dot(w, tau);
                v = v + y.clone() * y;
            }
            samples += 1;
            if !(v > S::zero()) || v.is_negligible(0.0) {
                all_positive = false;
            }
            if best.as_ref().map(|b| v < b.0).unwrap_or(true) {
                best = Some((v, format!("tau={tau:?} {}", xi_mode.label())));
            }
        }
    }
    let (v, witness) = best.ok_or_else(|| GhError::InsufficientData("empty shell".into()))?;
    Ok(ProbeRow {
        lambda: sh.lambda.clone(),
        min_ratio: v.to_f64(),
        witness,
        samples,
        all_positive,
    })
}

fn row_one(sh: &Shell) -> Vec<Mode> {
    sh.modes
        .iter()
        .filter(|m| match m {
            Mode::Spin { row, .. } => *row == 1,
            _ => true,
        })
        .cloned()
        .collect()
}

fn ratio(p: &OperatorSpec<f64>, psi: &FourierData<f64>) -> Result<f64> {
    let n = psi.norm_sq();
    Ok(apply_operator(p, psi)?.inner(psi).re / n)
}

fn sampled_row(
    p: &OperatorSpec<f64>,
    sh: &Shell,
    taus: &[Freq],
    trials: usize,
    seed: u64,
) -> Result<ProbeRow> {
    let modes = row_one(sh);
    let mut best = (f64::INFINITY, String::new());
    let mut all_positive = true;
    let mut samples = 0;
    let mut record = |r: f64, label: String, best: &mut (f64, String)| {
        samples += 1;
        if r <= 0.0 {
            all_positive = false;
        }
        if r < best.0 {
            *best = (r, label);
        }
    };
    for m in &modes {
        for tau in taus {
            let psi = FourierData::from_entries(
                p.group.clone(),
                p.dim_t,
                [(tau.clone(), m.clone(), Complex::new(1.0, 0.0))],
            )?;
            record(
                ratio(p, &psi)?,
                format!("tau={tau:?} {}", m.label()),
                &mut best,
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..trials {
        let mut psi = FourierData::zero(p.group.clone(), p.dim_t);
        for tau in taus {
            for m in &modes {
                let c = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                psi.insert(tau.clone(), m.clone(), c)?;
            }
        }
        if psi.is_empty() {
            continue;
        }
        record(ratio(p, &psi)?, format!("random #{k}"), &mut best);
    }
    Ok(ProbeRow {
        lambda: sh.lambda.clone(),
        min_ratio: best.0,
        witness: best.1,
        samples,
        all_positive,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareReport {
    pub delta: f64,
    /// Largest `||psi||^2 / (||psi||_A^2 + ||psi'||^2)` found.
    pub c: f64,
    /// Same search on a fresh sample (`seed + 1`).
    pub c_revalidated: f64,
    pub relative_change: f64,
    pub sets: usize,
    pub max_frequency: i64,
    pub seed: u64,
}

/// Random open set of measure exactly `delta` in `[0, 1)`: one to three
/// intervals with random lengths and gaps.
pub fn random_open_set<R: Rng>(rng: &mut R, delta: f64) -> Vec<(f64, f64)> {
    let r = rng.gen_range(1..=3usize);
    let split = |rng: &mut R, total: f64| -> Vec<f64> {
        let mut w: Vec<f64> = (0..r).map(|_| rng.gen_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x *= total / s);
        w
    };
    let lens = split(rng, delta);
    let gaps = split(rng, 1.0 - delta);
    let mut x = rng.gen_range(0.0..1.0);
    let mut out = Vec::with_capacity(r);
    for k in 0..r {
        out.push((x, x + lens[k]));
        x += lens[k] + gaps[k];
    }
    out
}

/// `int_A e^{2 pi i m x} dx` for a union of intervals (taken mod 1).
fn set_moment(set: &[(f64, f64)], m: i64) -> Complex<f64> {
    let mut s = Complex::new(0.0, 0.0);
    for &(a, b) in set {
        if m == 0 {
            s += Complex::new(b - a, 0.0);
        } else {
            let w = 2.0 * std::f64::consts::PI * m as f64;
            let e = |x: f64| Complex::new((w * x).cos(), (w * x).sin());
            s += (e(b) - e(a)) / Complex::new(0.0, w);
        }
    }
    s
}

/// Exact maximum of the ratio over trig polynomials of degree `<= k_max`
/// for one set: `1 / lambda_min(G_A + diag(k^2))`.
pub fn poincare_constant_for_set(set: &[(f64, f64)], k_max: i64) -> f64 {
    let ks: Vec<i64> = (-k_max..=k_max).collect();
    let n = ks.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let g = set_moment(set, ks[j] - ks[i]);
        if i == j {
            g + Complex::new((ks[i] * ks[i]) as f64, 0.0)
        } else {
            g
        }
    });
    let eig = nalgebra::SymmetricEigen::new(m);
    1.0 / eig.eigenvalues.min()
}

fn poincare_search(delta: f64, sets: usize, k_max: i64, seed: u64) -> f64 {
    let per_set: Vec<f64> = (0..sets)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(shell_seed(seed, i));
            poincare_constant_for_set(&random_open_set(&mut rng, delta), k_max)
        })
        .collect();
    // psi = 1 gives exactly 1 / delta
    per_set.into_iter().fold(1.0 / delta, f64::max)
}

/// Empirical constant `C(delta)` with
/// `||psi||^2 <= C (||psi||_{L^2(A)}^2 + ||psi'||^2)` for `|A| >= delta` on `T^1`.
pub fn poincare_estimate(delta: f64, sets: usize, k_max: i64, seed: u64) -> Result<PoincareReport> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(GhError::Spec(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    let c = poincare_search(delta, sets, k_max, seed);
    let c2 = poincare_search(delta, sets, k_max, seed.wrapping_add(1));
    Ok(PoincareReport {
        delta,
        c,
        c_revalidated: c2,
        relative_change: (c2 - c).abs() / c,
        sets,
        max_frequency: k_max,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphNormReport {
    /// Largest `||W psi|| / ||d psi||` over the samples.
    pub empirical: f64,
    /// `(sum_k ||b_k||_{l^1}^2)^{1/2}`, a bound for `sup |W|`.
    pub sup_bound: f64,
    pub within_bound: bool,
    pub samples: usize,
    /// Samples with `d psi = 0`.
    pub skipped: usize,
    pub seed: u64,
}

/// Empirical `||W psi|| <= C ||d psi||` on random trig polynomials.
pub fn graph_norm_bound<S: Scalar>(
    w: &TorusField<S>,
    trials: usize,
    bandwidth: i64,
    seed: u64,
) -> Result<GraphNormReport> {
    let n = w.dim_t();
    let wf = w.to_f64();
    let taus = freq_box(n, bandwidth);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut skipped = 0;
    for k in 0..trials {
        // the first sample is a constant
        let psi = if k == 0 {
            TrigPoly::constant(n, 1.0)
        } else {
            let mut p = TrigPoly::zero(n);
            for tau in &taus {
                p.add_term(
                    tau.clone(),
                    Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                );
            }
            p
        };
        let d: f64 = psi
            .terms()
            .iter()
            .map(|(tau, c)| crate::spectral::norm_sq(tau) as f64 * c.norm_sqr())
            .sum();
        if d <= 0.0 {
            skipped += 1;
            continue;
        }
        let r = (wf.apply_fn(&psi).norm_sq() / d).sqrt();
        best = best.max(r);
    }
    let sup_bound = w.sup_bound();
    Ok(GraphNormReport {
        empirical: best,
        sup_bound,
        within_bound: best <= sup_bound * (1.0 + 1e-12) + 1e-12,
        samples: trials,
        skipped,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{CoefficientMap, LieElement};
    use crate::operator::{FieldTerm, QChoice};
    use crate::scalar::rat;

    #[test]
    fn laplacian_alone_has_zero_minimum() {
        let g = GroupSpec::Torus(1);
        let p = OperatorSpec::<Rational>::new(g, 1, QChoice::LaplacianT, vec![], vec![]).unwrap();
        let cfg = ProbeConfig {
            lambda_max: rat(9, 1),
            ..Default::default()
        };
        let r = final_inequality_probe(&p, &cfg).unwrap();
        assert_eq!(r.path, "diagonal");
        assert!(r
            .rows
            .iter()
            .all(|row| row.min_ratio == 0.0 && row.witness.starts_with("tau=[0]")));
        assert!(!r.all_positive);
    }

    #[test]
    fn diagonal_and_sampled_agree() {
        // P = Delta_T - (d_x + 1/2 d_t)^2 on T^1 x T^1
        let g = GroupSpec::Torus(1);
        let a = CoefficientMap::constant(1, &LieElement::new(vec![rat(1, 1)]));
        let w = TorusField::constant(&[rat(1, 2)]);
        let p =
            OperatorSpec::new(g, 1, QChoice::LaplacianT, vec![FieldTerm { a, w }], vec![]).unwrap();
        let cfg = ProbeConfig {
            lambda_max: rat(16, 1),
            trials: 4,
            ..Default::default()
        };
        let d = final_inequality_probe(&p, &cfg).unwrap();
        let pf = p.to_f64();
        let shells = probe_shells(&pf.group, &cfg).unwrap();
        for (sh, row) in shells.iter().zip(&d.rows) {
            let s = sampled_row(&pf, sh, &freq_box(1, 2), 4, 1).unwrap();
            assert!((s.min_ratio - row.min_ratio).abs() < 1e-12);
        }
    }

    #[test]
    fn poincare_constants_case() {
        // A of measure 1/2, psi = 1: ratio 2
        let c = poincare_constant_for_set(&[(0.1, 0.6)], 0);
        assert!((c - 2.0).abs() < 1e-12);
        let r = poincare_estimate(0.5, 16, 8, 3).unwrap();
        assert!(r.c >= 2.0);
        assert!(poincare_estimate(0.0, 1, 1, 0).is_err());
    }

    #[test]
    fn random_sets_have_exact_measure() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let s = random_open_set(&mut rng, 0.3);
            let m: f64 = s.iter().map(|(a, b)| b - a).sum();
            assert!((m - 0.3).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_field_graph_norm() {
        let w = TorusField::constant(&[rat(-3, 2)]);
        let r = graph_norm_bound(&w, 20, 4, 9).unwrap();
        assert!((r.empirical - 1.5).abs() < 1e-12);
        assert_eq!(r.skipped, 1);
        assert!(r.within_bound);
    }
}
