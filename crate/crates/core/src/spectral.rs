//! Eigen-shells of the Laplacian on a torus or on SU(2), and the action of
//! left-invariant fields on each shell.
//!
//! SU(2) basis: `X1, X2, X3` with `[X1,X2]=X3`, `[X2,X3]=X1`, `[X3,X1]=X2`.
//! In the spin-j representation `X3 = i diag(m)`, `m = -j..j`, so the
//! Casimir `-(X1^2+X2^2+X3^2)` equals `j(j+1)`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GhError, Result};
use crate::fields::LieElement;
use crate::scalar::{c_real, imag_unit, rational_to_f64, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupSpec {
    Torus(usize),
    Su2,
}

impl GroupSpec {
    pub fn torus(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(GhError::Spec("torus dimension must be >= 1".into()));
        }
        Ok(GroupSpec::Torus(m))
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        match self {
            GroupSpec::Torus(m) => *m,
            GroupSpec::Su2 => 3,
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, GroupSpec::Torus(_))
    }

    pub fn name(&self) -> String {
        match self {
            GroupSpec::Torus(m) => format!("T^{m}"),
            GroupSpec::Su2 => "SU(2)".into(),
        }
    }

    pub fn mode_lambda(&self, mode: &Mode) -> Result<Rational> {
        match (self, mode) {
            (GroupSpec::Torus(m), Mode::Torus(xi)) if xi.len() == *m => {
                Ok(Rational::from_integer(BigInt::from(norm_sq(xi))))
            }
            (GroupSpec::Su2, Mode::Spin { two_j, row, col })
                if *row >= 1 && *col >= 1 && *row <= two_j + 1 && *col <= two_j + 1 =>
            {
                Ok(spin_lambda(*two_j))
            }
            _ => Err(GhError::Dimension(format!(
                "mode {mode:?} not in {}",
                self.name()
            ))),
        }
    }
}

/// Basis function of an eigen-shell. Spin rows and columns run over
/// `1..=2j+1`, index `i` carrying weight `m = -j + (i-1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mode {
    Torus(Vec<i64>),
    Spin { two_j: u32, row: u32, col: u32 },
}

impl Mode {
    pub fn label(&self) -> String {
        match self {
            Mode::Torus(xi) => format!("{xi:?}").replace(' ', ""),
            Mode::Spin { two_j, row, col } => format!("j={}/2:({row},{col})", two_j),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shell {
    #[serde(serialize_with = "crate::scalar::ser::rational")]
    pub lambda: Rational,
    pub modes: Vec<Mode>,
}

impl Shell {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }
}

pub fn norm_sq(xi: &[i64]) -> i64 {
    xi.iter().map(|k| k * k).sum()
}

pub fn spin_lambda(two_j: u32) -> Rational {
    let j2 = two_j as i64;
    Rational::new(BigInt::from(j2 * (j2 + 2)), BigInt::from(4))
}

/// Visits every point of `Z^m` with `|xi|_inf <= r` in lexicographic order.
pub fn for_each_box_point(m: usize, r: i64, mut f: impl FnMut(&[i64])) {
    if m == 0 {
        f(&[]);
        return;
    }
    let mut xi = vec![-r; m];
    loop {
        f(&xi);
        let mut k = m;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if xi[k] < r {
                xi[k] += 1;
                for x in xi.iter_mut().skip(k + 1) {
                    *x = -r;
                }
                break;
            }
        }
    }
}

pub fn floor_sqrt_rational(q: &Rational) -> i64 {
    if q <= &Rational::zero() {
        return 0;
    }
    let fl = q.floor().to_integer();
    fl.sqrt().to_i64().unwrap_or(i64::MAX)
}

/// All shells with `lambda <= lambda_max`, sorted by eigenvalue, modes in
/// lexicographic order.
pub fn enumerate_shells(group: &GroupSpec, lambda_max: &Rational) -> Result<Vec<Shell>> {
    if lambda_max < &Rational::zero() {
        return Err(GhError::Spec("lambda_max must be >= 0".into()));
    }
    match group {
        GroupSpec::Torus(m) => {
            let r = floor_sqrt_rational(lambda_max);
            let lmax = lambda_max.floor().to_integer().to_i64().unwrap_or(i64::MAX);
            let mut buckets: BTreeMap<i64, Vec<Mode>> = BTreeMap::new();
            for_each_box_point(*m, r, |xi| {
                let l = norm_sq(xi);
                if l <= lmax {
                    buckets.entry(l).or_default().push(Mode::Torus(xi.to_vec()));
                }
            });
            Ok(buckets
                .into_iter()
                .map(|(l, modes)| Shell {
                    lambda: Rational::from_integer(l.into()),
                    modes,
                })
                .collect())
        }
        GroupSpec::Su2 => {
            let mut out = Vec::new();
            let mut two_j = 0u32;
            loop {
                let lambda = spin_lambda(two_j);
                if &lambda > lambda_max {
                    break;
                }
                out.push(Shell {
                    lambda,
                    modes: spin_modes(two_j),
                });
                two_j += 1;
            }
            Ok(out)
        }
    }
}

pub fn spin_modes(two_j: u32) -> Vec<Mode> {
    let d = two_j + 1;
    let mut v = Vec::with_capacity((d * d) as usize);
    for row in 1..=d {
        for col in 1..=d {
            v.push(Mode::Spin { two_j, row, col });
        }
    }
    v
}

/// Shell multiplicities `(lambda, d_lambda)` without materializing modes.
pub fn shell_dimensions(group: &GroupSpec, lambda_max: &Rational) -> Vec<(Rational, u64)> {
    match group {
        GroupSpec::Torus(m) => {
            let r = floor_sqrt_rational(lambda_max);
            let lmax = lambda_max.floor().to_integer().to_i64().unwrap_or(i64::MAX);
            let mut counts: BTreeMap<i64, u64> = BTreeMap::new();
            for_each_box_point(*m, r, |xi| {
                let l = norm_sq(xi);
                if l <= lmax {
                    *counts.entry(l).or_default() += 1;
                }
            });
            counts
                .into_iter()
                .map(|(l, c)| (Rational::from_integer(l.into()), c))
                .collect()
        }
        GroupSpec::Su2 => {
            let mut out = Vec::new();
            let mut two_j = 0u32;
            while &spin_lambda(two_j) <= lambda_max {
                out.push((spin_lambda(two_j), ((two_j as u64) + 1).pow(2)));
                two_j += 1;
            }
            out
        }
    }
}

/// Nonzero entries `(row, col, value)` (0-based) of `d pi_j(X_axis)`.
pub fn spin_generator<S: Scalar>(
    two_j: u32,
    axis: usize,
) -> Result<Vec<(usize, usize, Complex<S>)>> {
    let jj = two_j as i64;
    let d = (two_j + 1) as usize;
    let mut out = Vec::new();
    let i = imag_unit::<S>();
    for c in 0..d {
        let mm = 2 * c as i64 - jj; // 2m
        match axis {
            0 | 1 => {
                if c + 1 < d {
                    let up = half_ladder::<S>(jj, mm, 2)?;
                    let v = if axis == 0 {
                        i.clone() * c_real(up)
                    } else {
                        c_real(-up)
                    };
                    out.push((c + 1, c, v));
                }
                if c >= 1 {
                    let dn = half_ladder::<S>(jj, mm, -2)?;
                    let v = if axis == 0 {
                        i.clone() * c_real(dn)
                    } else {
                        c_real(dn)
                    };
                    out.push((c - 1, c, v));
                }
            }
            2 => {
                if mm != 0 {
                    out.push((c, c, i.clone() * c_real(S::from_ratio(mm, 2))));
                }
            }
            _ => return Err(GhError::Dimension(format!("su(2) has no axis {axis}"))),
        }
    }
    Ok(out)
}

/// `sqrt(j(j+1) - m(m +- 1)) / 2` from doubled quantum numbers.
fn half_ladder<S: Scalar>(jj: i64, mm: i64, shift: i64) -> Result<S> {
    let num = jj * (jj + 2) - mm * (mm + shift);
    S::from_ratio(num, 16).sqrt_checked().ok_or_else(|| {
        GhError::Spec(format!(
            "spin-{jj}/2 ladder coefficient sqrt({num}/16) is irrational; use a floating scalar"
        ))
    })
}

/// Dense `(2j+1) x (2j+1)` matrix of `d pi_j(X)`.
pub fn spin_matrix<S: Scalar>(two_j: u32, x: &LieElement<S>) -> Result<Vec<Vec<Complex<S>>>> {
    if x.dim() != 3 {
        return Err(GhError::Dimension(
            "su(2) element needs 3 coordinates".into(),
        ));
    }
    let d = (two_j + 1) as usize;
    let mut m = vec![vec![Complex::<S>::zero(); d]; d];
    for (axis, coef) in x.coords().iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        for (r, c, v) in spin_generator::<S>(two_j, axis)? {
            m[r][c] = m[r][c].clone() + v * c_real(coef.clone());
        }
    }
    Ok(m)
}

/// Matrix of the left-invariant field `X` on the shell, in the shell's mode
/// order. Torus fields are diagonal `i(v . xi)`; on SU(2) the field acts on
/// the column index of the matrix coefficients.
pub fn field_action<S: Scalar>(
    group: &GroupSpec,
    x: &LieElement<S>,
    shell: &Shell,
) -> Result<Vec<Vec<Complex<S>>>> {
    if x.dim() != group.dim() {
        return Err(GhError::Dimension(format!(
            "Lie element of dim {} on {}",
            x.dim(),
            group.name()
        )));
    }
    let n = shell.dim();
    let mut a = vec![vec![Complex::<S>::zero(); n]; n];
    match group {
        GroupSpec::Torus(_) => {
            for (k, mode) in shell.modes.iter().enumerate() {
                a[k][k] = torus_symbol(x, mode)?;
            }
        }
        GroupSpec::Su2 => {
            let two_j = match shell.modes.first() {
                Some(Mode::Spin { two_j, .. }) => *two_j,
                _ => return Err(GhError::Dimension("empty or non-spin shell".into())),
            };
            let d = (two_j + 1) as usize;
            if n != d * d {
                return Err(GhError::Dimension(
                    "spin shell must contain all (2j+1)^2 modes".into(),
                ));
            }
            let b = spin_matrix(two_j, x)?;
            for r in 0..d {
                for k in 0..d {
                    for c in 0..d {
                        a[r * d + k][r * d + c] = b[k][c].clone();
                    }
                }
            }
        }
    }
    Ok(a)
}

/// One diagonal block of [`field_action`]: on SU(2) the action is `d` copies
/// of `d pi_j(X)` (one per row index), so entry-wise residuals, defects and
/// norms agree with the full matrix. Torus shells return the full diagonal.
pub fn shell_block<S: Scalar>(
    group: &GroupSpec,
    x: &LieElement<S>,
    shell: &Shell,
) -> Result<Vec<Vec<Complex<S>>>> {
    match (group, shell.modes.first()) {
        (GroupSpec::Su2, Some(Mode::Spin { two_j, .. })) => {
            if x.dim() != 3 {
                return Err(GhError::Dimension(format!(
                    "Lie element of dim {} on SU(2)",
                    x.dim()
                )));
            }
            spin_matrix(*two_j, x)
        }
        _ => field_action(group, x, shell),
    }
}

/// `i (v . xi)` for a torus mode.
pub fn torus_symbol<S: Scalar>(x: &LieElement<S>, mode: &Mode) -> Result<Complex<S>> {
    match mode {
        Mode::Torus(xi) if xi.len() == x.dim() => {
            let s = xi
                .iter()
                .zip(x.coords())
                .fold(S::zero(), |acc, (k, v)| acc + S::from_i64(*k) * v.clone());
            Ok(Complex::new(S::zero(), s))
        }
        _ => Err(GhError::Dimension(format!(
            "mode {mode:?} for torus element of dim {}",
            x.dim()
        ))),
    }
}

/// Image of one basis mode under `X`: list of `(mode, coefficient)`.
pub fn act_on_mode<S: Scalar>(
    group: &GroupSpec,
    x: &LieElement<S>,
    mode: &Mode,
) -> Result<Vec<(Mode, Complex<S>)>> {
    match (group, mode) {
        (GroupSpec::Torus(_), Mode::Torus(_)) => {
            let s = torus_symbol(x, mode)?;
            Ok(if s.is_zero() {
                vec![]
            } else {
                vec![(mode.clone(), s)]
            })
        }
        (GroupSpec::Su2, Mode::Spin { two_j, row, col }) => {
            if x.dim() != 3 {
                return Err(GhError::Dimension(
                    "su(2) element needs 3 coordinates".into(),
                ));
            }
            let c0 = (*col - 1) as usize;
            let mut acc: BTreeMap<usize, Complex<S>> = BTreeMap::new();
            for (axis, coef) in x.coords().iter().enumerate() {
                if coef.is_zero() {
                    continue;
                }
                for (k, c, v) in spin_generator::<S>(*two_j, axis)? {
                    if c == c0 {
                        let e = acc.entry(k).or_insert_with(Complex::zero);
                        *e = e.clone() + v * c_real(coef.clone());
                    }
                }
            }
            Ok(acc
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(k, v)| {
                    (
                        Mode::Spin {
                            two_j: *two_j,
                            row: *row,
                            col: k as u32 + 1,
                        },
                        v,
                    )
                })
                .collect())
        }
        _ => Err(GhError::Dimension(format!(
            "mode {mode:?} not in {}",
            group.name()
        ))),
    }
}

/// Largest entry modulus of `sum_k A(X_k)^2 + lambda I` over an orthonormal
/// basis `X_k` of the algebra.
/// Exact scalars give exactly `0.0` when the identity holds.
pub fn casimir_residual<S: Scalar>(group: &GroupSpec, shell: &Shell) -> Result<f64> {
    let n = shell_block(group, &LieElement::<S>::zero(group.dim()), shell)?.len();
    let mut sum = vec![vec![Complex::<S>::zero(); n]; n];
    for k in 0..group.dim() {
        let a = shell_block(group, &LieElement::basis(group.dim(), k), shell)?;
        let a2 = mat_mul(&a, &a);
        for r in 0..n {
            for c in 0..n {
                sum[r][c] = sum[r][c].clone() + a2[r][c].clone();
            }
        }
    }
    let lam = S::from_rational(&shell.lambda);
    let mut worst = S::zero();
    for r in 0..n {
        sum[r][r] = sum[r][r].clone() + c_real(lam.clone());
        for c in 0..n {
            let v = sum[r][c].norm_sqr();
            if v > worst {
                worst = v;
            }
        }
    }
    Ok(worst.to_f64().sqrt())
}

/// Largest entry modulus of `A + A^*`.
pub fn anti_hermitian_defect<S: Scalar>(a: &[Vec<Complex<S>>]) -> f64 {
    let n = a.len();
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let v = a[r][c].clone() + a[c][r].conj();
            worst = worst.max(v.norm_sqr().to_f64().sqrt());
        }
    }
    worst
}

pub fn mat_mul<S: Scalar>(a: &[Vec<Complex<S>>], b: &[Vec<Complex<S>>]) -> Vec<Vec<Complex<S>>> {
    let n = a.len();
    let m = b.first().map(|r| r.len()).unwrap_or(0);
    let mut out = vec![vec![Complex::<S>::zero(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            let aik = &a[i][k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..m {
                if !bk[j].is_zero() {
                    out[i][j] = out[i][j].clone() + aik.clone() * bk[j].clone();
                }
            }
        }
    }
    out
}

pub fn to_dmatrix<S: Scalar>(a: &[Vec<Complex<S>>]) -> nalgebra::DMatrix<Complex<f64>> {
    let n = a.len();
    let m = a.first().map(|r| r.len()).unwrap_or(0);
    nalgebra::DMatrix::from_fn(n, m, |r, c| crate::scalar::c_to_f64(&a[r][c]))
}

pub fn operator_norm(a: &nalgebra::DMatrix<Complex<f64>>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// `|X| lambda^{1/2} - ||A(X)||` on a shell; never negative since
/// `||X phi||^2` is at most the sum over an orthonormal basis.
pub fn eigen_bound_margin<S: Scalar>(
    group: &GroupSpec,
    x: &LieElement<S>,
    shell: &Shell,
) -> Result<f64> {
    let a = shell_block(group, x, shell)?;
    let bound = (x.norm_sq().to_f64() * rational_to_f64(&shell.lambda)).sqrt();
    Ok(bound - operator_norm(&to_dmatrix(&a)))
}

/// Partial sums of `sum_{0 < lambda <= L} d_lambda lambda^{-2m}`, one entry
/// per shell, with `m = dim G`.
pub fn weyl_partial_sums(group: &GroupSpec, lambda_max: &Rational) -> Vec<(f64, f64)> {
    let m = group.dim() as i32;
    let mut acc = 0.0;
    let mut out = Vec::new();
    for (lam, d) in shell_dimensions(group, lambda_max) {
        let l = Scalar::to_f64(&lam);
        if l <= 0.0 {
            continue;
        }
        acc += d as f64 * l.powi(-2 * m);
        out.push((l, acc));
    }
    out
}

/// Analytic upper bound for the full Weyl series.
pub fn weyl_bound(group: &GroupSpec) -> f64 {
    match group {
        // shells |xi|_inf = r hold at most 2m(3r)^{m-1} points with |xi|^2 >= r^2
        GroupSpec::Torus(m) => 4.0 * *m as f64 * 3f64.powi(*m as i32 - 1),
        // (J+1)^2 (J(J+2)/4)^{-6} <= 16384 J^{-10}
        GroupSpec::Su2 => 16384.0 * 1.001,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn ladder_for_half_spin_is_rational() {
        let x = LieElement::<Rational>::basis(3, 0);
        assert!(spin_matrix(1, &x).is_ok());
        assert!(spin_matrix(2, &x).is_err());
        assert!(spin_matrix::<f64>(2, &LieElement::basis(3, 0)).is_ok());
    }

    #[test]
    fn box_lexicographic() {
        let mut v = Vec::new();
        for_each_box_point(2, 1, |x| v.push(x.to_vec()));
        assert_eq!(v.len(), 9);
        assert_eq!(v[0], vec![-1, -1]);
        assert_eq!(v[1], vec![-1, 0]);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn su2_lambda() {
        assert_eq!(spin_lambda(1), rat(3, 4));
        assert_eq!(spin_lambda(2), rat(2, 1));
    }

    #[test]
    fn full_action_repeats_the_block() {
        let g = GroupSpec::Su2;
        for sh in enumerate_shells(&g, &rat(12, 1)).unwrap() {
            let d = shell_block(&g, &LieElement::<f64>::basis(3, 0), &sh)
                .unwrap()
                .len();
            let mut full_sum = vec![vec![Complex::<f64>::zero(); d * d]; d * d];
            for k in 0..3 {
                let x = LieElement::<f64>::basis(3, k);
                let b = shell_block(&g, &x, &sh).unwrap();
                let a = field_action(&g, &x, &sh).unwrap();
                for r in 0..d * d {
                    for c in 0..d * d {
                        let want = if r / d == c / d {
                            b[r % d][c % d]
                        } else {
                            Complex::zero()
                        };
                        assert_eq!(a[r][c], want);
                    }
                }
                let a2 = mat_mul(&a, &a);
                for r in 0..d * d {
                    for c in 0..d * d {
                        full_sum[r][c] += a2[r][c];
                    }
                }
            }
            let lam = rational_to_f64(&sh.lambda);
            for r in 0..d * d {
                full_sum[r][r] += lam;
                assert!(full_sum[r].iter().all(|z| z.norm() < 1e-12));
            }
        }
    }
}
