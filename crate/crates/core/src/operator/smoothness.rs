//! Smoothness classification of truncated Fourier data from block norms.

use std::collections::BTreeMap;

use serde::Serialize;

use super::fourier::total_eigenvalue;
use super::FourierData;
use crate::error::{GhError, Result};
use crate::fit::least_squares;
use crate::scalar::{rational_to_f64, Rational, Scalar};

#[derive(Clone, Debug)]
pub struct SmoothnessConfig {
    /// Fitted decay at least this fast counts as smooth.
    pub s_smooth: f64,
    /// Below this `r^2` a power law is not reported.
    pub min_r2: f64,
    /// Growth of the local decay exponent that signals super-polynomial decay.
    pub min_acceleration: f64,
}

impl Default for SmoothnessConfig {
    fn default() -> Self {
        SmoothnessConfig {
            s_smooth: 3.0,
            min_r2: 0.5,
            min_acceleration: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmoothnessVerdict {
    ConsistentSmooth {
        s_max_tested: f64,
    },
    /// Block norms grow like `(1 + mu + lambda)^order`.
    DistributionOrder {
        order: f64,
    },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothnessReport {
    /// `(mu + lambda, largest block norm at that level)`.
    pub levels: Vec<(f64, f64)>,
    /// Least-squares slope of `ln norm` against `ln(1 + mu + lambda)` over nonzero levels.
    pub exponent: Option<f64>,
    pub r_squared: Option<f64>,
    /// Decay exponents between consecutive nonzero levels.
    pub local_decay: Vec<f64>,
    pub verdict: SmoothnessVerdict,
    pub theta: Option<f64>,
}

impl SmoothnessReport {
    pub fn is_smooth(&self) -> bool {
        matches!(self.verdict, SmoothnessVerdict::ConsistentSmooth { .. })
    }
}

/// Largest block norm per total eigenvalue `mu + lambda`. Levels listed in
/// `levels` but absent from the support enter with norm 0.
fn level_norms<S: Scalar>(
    f: &FourierData<S>,
    levels: Option<&[Rational]>,
) -> Result<BTreeMap<Rational, f64>> {
    let mut acc: BTreeMap<Rational, f64> = BTreeMap::new();
    if let Some(ls) = levels {
        for l in ls {
            acc.insert(l.clone(), 0.0);
        }
    }
    for b in f.blocks()? {
        let a = total_eigenvalue(b.mu, &b.lambda);
        let n = b.norm_sq.to_f64().sqrt();
        let e = acc.entry(a).or_insert(0.0);
        *e = e.max(n);
    }
    Ok(acc)
}

/// Classifies `f` from its block norms `||F^T_mu F^G_lambda f||` against
/// powers of `1 + mu + lambda`.
///
/// Smooth: no nonzero data beyond one level, a least-squares decay of at
/// least `s_smooth`, or local decay exponents that never decrease and grow
/// by at least `min_acceleration`. Otherwise a power law with adequate fit is
/// reported as a distribution order.
pub fn classify_smoothness<S: Scalar>(
    f: &FourierData<S>,
    levels: Option<&[Rational]>,
    cfg: &SmoothnessConfig,
) -> Result<SmoothnessReport> {
    let acc = level_norms(f, levels)?;
    if acc.len() < 3 {
        return Err(GhError::InsufficientData(format!(
            "{} distinct mu + lambda levels, need 3",
            acc.len()
        )));
    }
    let lv: Vec<(f64, f64)> = acc.iter().map(|(a, n)| (rational_to_f64(a), *n)).collect();
    let nz: Vec<(f64, f64)> = lv.iter().copied().filter(|&(_, n)| n > 0.0).collect();
    let mut report = SmoothnessReport {
        levels: lv,
        exponent: None,
        r_squared: None,
        local_decay: Vec::new(),
        verdict: SmoothnessVerdict::Inconclusive,
        theta: None,
    };
    let s_max = cfg.s_smooth;
    if nz.len() < 2 {
        report.verdict = SmoothnessVerdict::ConsistentSmooth {
            s_max_tested: s_max,
        };
        return Ok(report);
    }
    let xs: Vec<f64> = nz.iter().map(|(a, _)| (1.0 + a).ln()).collect();
    let ys: Vec<f64> = nz.iter().map(|(_, n)| n.ln()).collect();
    report.local_decay = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| -(y[1] - y[0]) / (x[1] - x[0]))
        .collect();
    let fit = least_squares(&xs, &ys);
    if let Some((slope, _, r2)) = fit {
        report.exponent = Some(slope);
        report.r_squared = Some(r2);
    }
    let d = &report.local_decay;
    let accelerating = d.len() >= 2
        && d.windows(2).all(|w| w[1] >= w[0])
        && d[d.len() - 1] - d[0] >= cfg.min_acceleration
        && d[0] > 0.0;
    report.verdict = match fit {
        _ if accelerating => SmoothnessVerdict::ConsistentSmooth {
            s_max_tested: s_max,
        },
        Some((slope, _, _)) if -slope >= cfg.s_smooth => SmoothnessVerdict::ConsistentSmooth {
            s_max_tested: s_max,
        },
        Some((slope, _, r2)) if r2 >= cfg.min_r2 => {
            SmoothnessVerdict::DistributionOrder { order: slope }
        }
        _ => SmoothnessVerdict::Inconclusive,
    };
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeReport {
    pub theta: f64,
    pub s: f64,
    /// `(1 + lambda)^s ||F^G_lambda f||` does not grow over the tested range.
    pub hypothesis_1: bool,
    /// `(1 + mu + lambda)^s` times the block norms inside the cone does not grow.
    pub hypothesis_2: bool,
    /// All blocks weighted by `(1 + mu + lambda)^{s theta / 2}` do not grow.
    pub combined: bool,
    pub smooth_consistent: bool,
}

/// A weighted sequence (sorted by level) does not grow: the maximum over the
/// upper half of the levels is at most the maximum over the lower half.
fn non_growing(vals: &[f64]) -> bool {
    if vals.len() < 2 {
        return true;
    }
    let h = vals.len() / 2;
    let head = vals[..h].iter().cloned().fold(0.0, f64::max);
    let tail = vals[h..].iter().cloned().fold(0.0, f64::max);
    tail <= head * (1.0 + 1e-12)
}

/// Cone test: decay of `||F^G_lambda f||` plus decay inside
/// `Lambda_theta = {(1 + lambda) <= (1 + mu)^theta}` implies decay of all
/// blocks, since `1 + mu + lambda <= (1 + lambda)^{2/theta}` off the cone.
pub fn cone_split_check<S: Scalar>(f: &FourierData<S>, theta: f64, s: f64) -> Result<ConeReport> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(GhError::Spec(format!(
            "theta must lie in (0, 1), got {theta}"
        )));
    }
    if !(s > 0.0) {
        return Err(GhError::Spec(format!("s must be positive, got {s}")));
    }
    let blocks = f.blocks()?;
    let mut per_lambda: BTreeMap<Rational, f64> = BTreeMap::new();
    for b in &blocks {
        *per_lambda.entry(b.lambda.clone()).or_insert(0.0) += b.norm_sq.to_f64();
    }
    let h1: Vec<f64> = per_lambda
        .iter()
        .map(|(l, n)| n.sqrt() * (1.0 + rational_to_f64(l)).powf(s))
        .collect();
    let mut cone: BTreeMap<Rational, f64> = BTreeMap::new();
    let mut all: BTreeMap<Rational, f64> = BTreeMap::new();
    for b in &blocks {
        let a = total_eigenvalue(b.mu, &b.lambda);
        let af = 1.0 + rational_to_f64(&a);
        let n = b.norm_sq.to_f64().sqrt();
        let lam = rational_to_f64(&b.lambda);
        if 1.0 + lam <= (1.0 + b.mu as f64).powf(theta) {
            let e = cone.entry(a.clone()).or_insert(0.0);
            *e = e.max(n * af.powf(s));
        }
        let e = all.entry(a).or_insert(0.0);
        *e = e.max(n * af.powf(s * theta / 2.0));
    }
    let hypothesis_1 = non_growing(&h1);
    let hypothesis_2 = non_growing(&cone.values().cloned().collect::<Vec<_>>());
    let combined = non_growing(&all.values().cloned().collect::<Vec<_>>());
    Ok(ConeReport {
        theta,
        s,
        hypothesis_1,
        hypothesis_2,
        combined,
        smooth_consistent: hypothesis_1 && hypothesis_2 && combined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c_real;
    use crate::spectral::{GroupSpec, Mode};
    use num_complex::Complex;

    fn data(f: impl Fn(i64) -> f64, n: i64) -> FourierData<f64> {
        // blocks at mu = 0, lambda = k^2 on T^1 x T^1
        FourierData::from_entries(
            GroupSpec::Torus(1),
            1,
            (1..=n).map(|k| (vec![0], Mode::Torus(vec![k]), c_real(f(k)))),
        )
        .unwrap()
    }

    #[test]
    fn geometric_decay_is_smooth() {
        let f = data(|k| 2f64.powi(-(k * k) as i32), 8);
        assert!(classify_smoothness(&f, None, &SmoothnessConfig::default())
            .unwrap()
            .is_smooth());
    }

    #[test]
    fn polynomial_growth_has_order() {
        let f = data(|k| (1.0 + (k * k) as f64).powi(2), 10);
        match classify_smoothness(&f, None, &SmoothnessConfig::default())
            .unwrap()
            .verdict
        {
            SmoothnessVerdict::DistributionOrder { order } => assert!((order - 2.0).abs() < 1e-9),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn too_few_levels() {
        let f = data(|_| 1.0, 2);
        assert!(classify_smoothness(&f, None, &SmoothnessConfig::default()).is_err());
    }

    #[test]
    fn zero_data_on_levels_is_smooth() {
        let f = FourierData::<f64>::zero(GroupSpec::Torus(1), 1);
        let lv: Vec<Rational> = (1..5).map(|k| Rational::from_integer(k.into())).collect();
        assert!(
            classify_smoothness(&f, Some(&lv), &SmoothnessConfig::default())
                .unwrap()
                .is_smooth()
        );
    }

    #[test]
    fn theta_range() {
        let f = data(|_| 1.0, 3);
        assert!(cone_split_check(&f, 1.0, 1.0).is_err());
        assert!(cone_split_check(&f, 0.0, 1.0).is_err());
    }

    #[test]
    fn cone_split_cases() {
        // decaying in both lambda and mu
        let mut good = FourierData::<f64>::zero(GroupSpec::Torus(1), 1);
        let mut bad = FourierData::<f64>::zero(GroupSpec::Torus(1), 1);
        for t in 0..12i64 {
            for x in 0..12i64 {
                let a = (t * t + x * x) as f64;
                good.insert(vec![t], Mode::Torus(vec![x]), Complex::new((-a).exp(), 0.0))
                    .unwrap();
                // unit mass deep inside the cone: x = 0, t large
                let c = if x == 0 { 1.0 } else { (-a).exp() };
                bad.insert(vec![t], Mode::Torus(vec![x]), Complex::new(c, 0.0))
                    .unwrap();
            }
        }
        assert!(
            cone_split_check(&good, 0.5, 10.0)
                .unwrap()
                .smooth_consistent
        );
        let r = cone_split_check(&bad, 0.5, 10.0).unwrap();
        assert!(!r.hypothesis_2 && !r.smooth_consistent);
    }
}
