//! Log-log power-law fits.

use serde::Serialize;

/// `(slope, intercept, r^2)` of the least-squares line through `(x, y)`.
/// A perfect fit (including constant data) has `r^2 = 1`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let scale = ys.iter().map(|y| y.abs()).fold(1.0, f64::max);
    let r2 = if ss_tot <= 1e-24 * scale * scale * nf {
        if ss_res <= 1e-20 * scale * scale * nf {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Some((slope, icpt, r2))
}

/// Fit of `y ~ C (1 + x)^{-rho}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub c: f64,
    pub rho: f64,
    pub r_squared: f64,
    /// Indices of the points entering the fit.
    pub used: Vec<usize>,
    /// Fewer than three running-minimum records: the data is bounded below
    /// by its minimum and `rho = 0`.
    pub bounded_below: bool,
}

/// Fits the lower envelope of positive data: only the running-minimum
/// records (points strictly below every earlier `y`, `x` ascending) enter
/// the least-squares fit of `ln y` against `ln(1 + x)`.
pub fn record_power_fit(points: &[(f64, f64)]) -> Option<PowerFit> {
    let mut used = Vec::new();
    let mut best = f64::INFINITY;
    for (k, &(_, y)) in points.iter().enumerate() {
        if y > 0.0 && y < best {
            best = y;
            used.push(k);
        }
    }
    if used.is_empty() {
        return None;
    }
    if used.len() < 3 {
        return Some(PowerFit {
            c: best,
            rho: 0.0,
            r_squared: 1.0,
            used,
            bounded_below: true,
        });
    }
    let xs: Vec<f64> = used.iter().map(|&k| (1.0 + points[k].0).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|&k| points[k].1.ln()).collect();
    let (slope, icpt, r2) = least_squares(&xs, &ys)?;
    Some(PowerFit {
        c: icpt.exp(),
        rho: -slope,
        r_squared: r2,
        used,
        bounded_below: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..40)
            .map(|k| (k as f64, (1.0 + k as f64).powf(-0.5)))
            .collect();
        let f = record_power_fit(&pts).unwrap();
        assert!((f.rho - 0.5).abs() < 1e-12);
        assert!((f.c - 1.0).abs() < 1e-12);
        assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn increasing_data_is_bounded_below() {
        let pts: Vec<(f64, f64)> = (1..10).map(|k| (k as f64, k as f64)).collect();
        let f = record_power_fit(&pts).unwrap();
        assert!(f.bounded_below);
        assert_eq!(f.rho, 0.0);
        assert_eq!(f.c, 1.0);
    }
}
