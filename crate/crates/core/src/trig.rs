//! Sparse trigonometric polynomials on T^n.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{GhError, Result};
use crate::scalar::{c_is_negligible, c_real, c_to_f64, imag_unit, Scalar};

pub type Freq = Vec<i64>;

/// `f(t) = sum_tau c_tau e^{i tau . t}` with finitely many nonzero `c_tau`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<S: Scalar> {
    dim: usize,
    terms: BTreeMap<Freq, Complex<S>>,
}

impl<S: Scalar> TrigPoly<S> {
    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: S) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c_real(c));
        p
    }

    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (Freq, Complex<S>)>,
    ) -> Result<Self> {
        let mut p = Self::zero(dim);
        for (f, c) in terms {
            if f.len() != dim {
                return Err(GhError::Dimension(format!("frequency {f:?} in T^{dim}")));
            }
            p.add_term(f, c);
        }
        Ok(p)
    }

    /// `amp * cos(k t_axis)`.
    pub fn cos(dim: usize, axis: usize, k: i64, amp: S) -> Self {
        let half = amp / S::from_i64(2);
        let mut p = Self::zero(dim);
        p.add_term(unit(dim, axis, k), c_real(half.clone()));
        p.add_term(unit(dim, axis, -k), c_real(half));
        p
    }

    /// `amp * sin(k t_axis)`.
    pub fn sin(dim: usize, axis: usize, k: i64, amp: S) -> Self {
        let half = amp / S::from_i64(2);
        let mut p = Self::zero(dim);
        p.add_term(unit(dim, axis, k), Complex::new(S::zero(), -half.clone()));
        p.add_term(unit(dim, axis, -k), Complex::new(S::zero(), half));
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<Freq, Complex<S>> {
        &self.terms
    }

    pub fn coeff(&self, f: &[i64]) -> Complex<S> {
        self.terms.get(f).cloned().unwrap_or_else(Complex::zero)
    }

    pub fn add_term(&mut self, f: Freq, c: Complex<S>) {
        let e = self.terms.entry(f).or_insert_with(Complex::zero);
        *e = e.clone() + c;
        self.prune();
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c_is_negligible(c, 0.0));
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|f| f.iter().all(|&k| k == 0))
    }

    pub fn constant_term(&self) -> Complex<S> {
        self.coeff(&vec![0; self.dim])
    }

    /// Conjugate symmetry `c_{-tau} = conj(c_tau)`, within `tol` for floats.
    pub fn is_real(&self, tol: f64) -> bool {
        self.terms.iter().all(|(f, c)| {
            let neg: Freq = f.iter().map(|k| -k).collect();
            let d = self.coeff(&neg).conj() - c.clone();
            c_is_negligible(&d, tol)
        })
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (f, c) in &o.terms {
            let e = r.terms.entry(f.clone()).or_insert_with(Complex::zero);
            *e = e.clone() + c.clone();
        }
        r.prune();
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&c_real(-S::one())))
    }

    pub fn scale(&self, s: &Complex<S>) -> Self {
        let mut r = Self::zero(self.dim);
        for (f, c) in &self.terms {
            r.terms.insert(f.clone(), c.clone() * s.clone());
        }
        r.prune();
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r: BTreeMap<Freq, Complex<S>> = BTreeMap::new();
        for (f, c) in &self.terms {
            for (g, d) in &o.terms {
                let h: Freq = f.iter().zip(g).map(|(a, b)| a + b).collect();
                let e = r.entry(h).or_insert_with(Complex::zero);
                *e = e.clone() + c.clone() * d.clone();
            }
        }
        let mut p = TrigPoly {
            dim: self.dim,
            terms: r,
        };
        p.prune();
        p
    }

    /// Partial derivative in `t_axis`.
    pub fn deriv(&self, axis: usize) -> Self {
        let mut r = Self::zero(self.dim);
        for (f, c) in &self.terms {
            let k = S::from_i64(f[axis]);
            r.terms
                .insert(f.clone(), c.clone() * imag_unit::<S>() * c_real(k));
        }
        r.prune();
        r
    }

    /// L^2 inner product for the normalized Haar measure.
    pub fn inner(&self, o: &Self) -> Complex<S> {
        let mut s = Complex::zero();
        for (f, c) in &self.terms {
            if let Some(d) = o.terms.get(f) {
                s = s + c.clone() * d.conj();
            }
        }
        s
    }

    pub fn norm_sq(&self) -> S {
        self.terms.values().fold(S::zero(), |a, c| a + c.norm_sqr())
    }

    pub fn eval(&self, t: &[f64]) -> Complex<f64> {
        let mut s = Complex::new(0.0, 0.0);
        for (f, c) in &self.terms {
            let ph: f64 = f.iter().zip(t).map(|(k, x)| *k as f64 * x).sum();
            s += c_to_f64(c) * Complex::new(ph.cos(), ph.sin());
        }
        s
    }

    /// Bound on `sup |f|` by the l^1 norm of the coefficients.
    pub fn sup_bound(&self) -> f64 {
        self.terms.values().map(|c| c_to_f64(c).norm()).sum()
    }

    pub fn bandwidth(&self) -> i64 {
        self.terms
            .keys()
            .flat_map(|f| f.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn map_scalar<T: Scalar>(&self, m: impl Fn(&S) -> T) -> TrigPoly<T> {
        let mut r = TrigPoly::zero(self.dim);
        for (f, c) in &self.terms {
            r.terms.insert(f.clone(), Complex::new(m(&c.re), m(&c.im)));
        }
        r.prune();
        r
    }

    pub fn to_f64(&self) -> TrigPoly<f64> {
        self.map_scalar(|x| x.to_f64())
    }
}

impl<S: Scalar> TrigPoly<S> {
    pub fn one(dim: usize) -> Self {
        Self::constant(dim, S::one())
    }
}

pub fn unit(dim: usize, axis: usize, k: i64) -> Freq {
    let mut f = vec![0; dim];
    if dim > 0 {
        f[axis] = k;
    }
    f
}

/// `z` with `One` available for generic constructors.
pub fn c_one<S: Scalar>() -> Complex<S> {
    Complex::new(S::one(), S::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn cos_squared() {
        let c = TrigPoly::<Rational>::cos(1, 0, 1, rat(1, 1));
        let c2 = c.mul(&c);
        assert_eq!(c2.coeff(&[0]), c_real(rat(1, 2)));
        assert_eq!(c2.coeff(&[2]), c_real(rat(1, 4)));
        assert!(c2.is_real(0.0));
    }

    #[test]
    fn sin_is_real_and_derivative() {
        let s = TrigPoly::<Rational>::sin(1, 0, 1, rat(1, 1));
        assert!(s.is_real(0.0));
        let c = TrigPoly::<Rational>::cos(1, 0, 1, rat(1, 1));
        assert_eq!(s.deriv(0), c);
        let v = s.eval(&[0.3]);
        assert!((v.re - 0.3f64.sin()).abs() < 1e-15 && v.im.abs() < 1e-15);
    }
}
