//! Sparse double Fourier series on `T^n x G`.
//!
//! A coefficient sits at `(tau, mode)`: the basis function is
//! `e^{i tau . t}` times the orthonormal eigenfunction `mode` of the group.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{GhError, Result};
use crate::fields::LieElement;
use crate::scalar::{c_is_negligible, c_real, imag_unit, Rational, Scalar};
use crate::spectral::{act_on_mode, norm_sq, GroupSpec, Mode};
use crate::trig::{Freq, TrigPoly};

pub type Key = (Freq, Mode);

#[derive(Clone, Debug, PartialEq)]
pub struct FourierData<S: Scalar> {
    group: GroupSpec,
    dim_t: usize,
    coeffs: BTreeMap<Key, Complex<S>>,
}

/// Norm of the `(mu, lambda)` block.
#[derive(Clone, Debug, PartialEq)]
pub struct Block<S: Scalar> {
    pub mu: i64,
    pub lambda: Rational,
    pub norm_sq: S,
}

impl<S: Scalar> FourierData<S> {
    pub fn zero(group: GroupSpec, dim_t: usize) -> Self {
        FourierData {
            group,
            dim_t,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_entries(
        group: GroupSpec,
        dim_t: usize,
        entries: impl IntoIterator<Item = (Freq, Mode, Complex<S>)>,
    ) -> Result<Self> {
        let mut f = Self::zero(group, dim_t);
        for (tau, mode, c) in entries {
            f.insert(tau, mode, c)?;
        }
        Ok(f)
    }

    /// Adds `c` at `(tau, mode)` after validating the label.
    pub fn insert(&mut self, tau: Freq, mode: Mode, c: Complex<S>) -> Result<()> {
        if tau.len() != self.dim_t {
            return Err(GhError::Dimension(format!(
                "frequency {tau:?} on T^{}",
                self.dim_t
            )));
        }
        self.group.mode_lambda(&mode)?;
        self.accumulate(tau, mode, c);
        Ok(())
    }

    fn accumulate(&mut self, tau: Freq, mode: Mode, c: Complex<S>) {
        if c_is_negligible(&c, 0.0) {
            return;
        }
        let key = (tau, mode);
        match self.coeffs.get_mut(&key) {
            Some(e) => {
                *e = e.clone() + c;
                if c_is_negligible(e, 0.0) {
                    self.coeffs.remove(&key);
                }
            }
            None => {
                self.coeffs.insert(key, c);
            }
        }
    }

    fn like(&self) -> Self {
        Self::zero(self.group.clone(), self.dim_t)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn dim_t(&self) -> usize {
        self.dim_t
    }

    pub fn coeffs(&self) -> &BTreeMap<Key, Complex<S>> {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn get(&self, tau: &[i64], mode: &Mode) -> Complex<S> {
        self.coeffs
            .get(&(tau.to_vec(), mode.clone()))
            .cloned()
            .unwrap_or_else(Complex::zero)
    }

    pub fn same_space(&self, o: &Self) -> Result<()> {
        if self.group != o.group || self.dim_t != o.dim_t {
            return Err(GhError::Dimension(format!(
                "data on T^{} x {} against T^{} x {}",
                self.dim_t,
                self.group.name(),
                o.dim_t,
                o.group.name()
            )));
        }
        Ok(())
    }

    /// Parseval: `||f||^2 = sum |c|^2`.
    pub fn norm_sq(&self) -> S {
        self.coeffs
            .values()
            .fold(S::zero(), |a, c| a + c.norm_sqr())
    }

    /// `<f, g> = sum c_f conj(c_g)`.
    pub fn inner(&self, o: &Self) -> Complex<S> {
        let mut s = Complex::zero();
        for (k, c) in &self.coeffs {
            if let Some(d) = o.coeffs.get(k) {
                s = s + c.clone() * d.conj();
            }
        }
        s
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for ((tau, mode), c) in &o.coeffs {
            r.accumulate(tau.clone(), mode.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&c_real(-S::one())))
    }

    pub fn scale(&self, s: &Complex<S>) -> Self {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            r.accumulate(tau.clone(), mode.clone(), c.clone() * s.clone());
        }
        r
    }

    /// Multiplication by a function of `t` (a convolution in `tau`).
    pub fn mul_trig(&self, p: &TrigPoly<S>) -> Self {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            for (g, d) in p.terms() {
                let h: Freq = tau.iter().zip(g).map(|(a, b)| a + b).collect();
                r.accumulate(h, mode.clone(), c.clone() * d.clone());
            }
        }
        r
    }

    /// `d/dt_axis`, i.e. multiplication by `i tau_axis`.
    pub fn deriv_t(&self, axis: usize) -> Self {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            let k = S::from_i64(tau[axis]);
            r.accumulate(
                tau.clone(),
                mode.clone(),
                c.clone() * imag_unit::<S>() * c_real(k),
            );
        }
        r
    }

    /// Action of the left-invariant field `x` on the group variable.
    pub fn act_g(&self, x: &LieElement<S>) -> Result<Self> {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            for (m2, v) in act_on_mode(&self.group, x, mode)? {
                r.accumulate(tau.clone(), m2, c.clone() * v);
            }
        }
        Ok(r)
    }

    /// `Delta_T`: multiplication by `|tau|^2`.
    pub fn laplacian_t(&self) -> Self {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            r.accumulate(
                tau.clone(),
                mode.clone(),
                c.clone() * c_real(S::from_i64(norm_sq(tau))),
            );
        }
        r
    }

    /// `Delta_G`: multiplication by the shell eigenvalue.
    pub fn laplacian_g(&self) -> Result<Self> {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            let l = S::from_rational(&self.group.mode_lambda(mode)?);
            r.accumulate(tau.clone(), mode.clone(), c.clone() * c_real(l));
        }
        Ok(r)
    }

    /// Partial projection onto the group eigenvalue `lambda`.
    pub fn project_g(&self, lambda: &Rational) -> Result<Self> {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            if &self.group.mode_lambda(mode)? == lambda {
                r.coeffs.insert((tau.clone(), mode.clone()), c.clone());
            }
        }
        Ok(r)
    }

    /// Partial projection onto the torus eigenvalue `mu = |tau|^2`.
    pub fn project_t(&self, mu: i64) -> Self {
        let mut r = self.like();
        for ((tau, mode), c) in &self.coeffs {
            if norm_sq(tau) == mu {
                r.coeffs.insert((tau.clone(), mode.clone()), c.clone());
            }
        }
        r
    }

    /// Group eigenvalues present in the support.
    pub fn g_lambdas(&self) -> Result<BTreeSet<Rational>> {
        self.coeffs
            .keys()
            .map(|(_, m)| self.group.mode_lambda(m))
            .collect()
    }

    /// Squared block norms `||F^T_mu F^G_lambda f||^2`, sorted by `(mu, lambda)`.
    pub fn blocks(&self) -> Result<Vec<Block<S>>> {
        let mut acc: BTreeMap<(i64, Rational), S> = BTreeMap::new();
        for ((tau, mode), c) in &self.coeffs {
            let key = (norm_sq(tau), self.group.mode_lambda(mode)?);
            let e = acc.entry(key).or_insert_with(S::zero);
            *e = e.clone() + c.norm_sqr();
        }
        Ok(acc
            .into_iter()
            .map(|((mu, lambda), norm_sq)| Block {
                mu,
                lambda,
                norm_sq,
            })
            .collect())
    }

    pub fn map_scalar<T: Scalar>(&self, m: impl Fn(&S) -> T) -> FourierData<T> {
        let mut r = FourierData::zero(self.group.clone(), self.dim_t);
        for ((tau, mode), c) in &self.coeffs {
            r.accumulate(tau.clone(), mode.clone(), Complex::new(m(&c.re), m(&c.im)));
        }
        r
    }

    pub fn to_f64(&self) -> FourierData<f64> {
        self.map_scalar(|x| x.to_f64())
    }
}

/// `mu + lambda` for a block.
pub fn total_eigenvalue(mu: i64, lambda: &Rational) -> Rational {
    Rational::from_integer(BigInt::from(mu)) + lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn projections_partition_norm() {
        let g = GroupSpec::Torus(1);
        let f = FourierData::<Rational>::from_entries(
            g,
            1,
            vec![
                (vec![1], Mode::Torus(vec![2]), c_real(rat(1, 1))),
                (vec![0], Mode::Torus(vec![-2]), c_real(rat(2, 1))),
                (vec![3], Mode::Torus(vec![1]), c_real(rat(3, 1))),
            ],
        )
        .unwrap();
        let total = f.norm_sq();
        let mut sum = Rational::zero();
        for l in f.g_lambdas().unwrap() {
            let p = f.project_g(&l).unwrap();
            assert_eq!(p.project_g(&l).unwrap(), p);
            sum += p.norm_sq();
        }
        assert_eq!(sum, total);
        assert_eq!(f.project_t(9).norm_sq(), rat(9, 1));
    }
}
