//! Sum-of-squares operators `P = Q - sum_l (a_l(t, X) + W_l)^2` on
//! `T^n x G`, acting exactly on finite double Fourier series.

pub mod fourier;
pub mod probes;
pub mod smoothness;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex;
use rand::Rng;
use serde::Serialize;

pub use fourier::{Block, FourierData, Key};
pub use probes::{
    final_inequality_probe, graph_norm_bound, poincare_estimate, GraphNormReport, PoincareReport,
    ProbeConfig, ProbeReport, ProbeRow,
};
pub use smoothness::{
    classify_smoothness, cone_split_check, ConeReport, SmoothnessConfig, SmoothnessReport,
    SmoothnessVerdict,
};

use crate::error::{GhError, Result};
use crate::fields::{torus_grid, CoefficientMap, LieElement, SystemSpec, FLOAT_TOL};
use crate::linalg::{kernel_vector, symmetric_definiteness, Definiteness};
use crate::scalar::{c_real, Scalar};
use crate::spectral::{GroupSpec, Mode};
use crate::trig::{Freq, TrigPoly};

/// Real vector field `W = sum_k b_k(t) d/dt_k` on `T^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusField<S: Scalar> {
    dim_t: usize,
    comps: Vec<TrigPoly<S>>,
}

impl<S: Scalar> TorusField<S> {
    pub fn new(dim_t: usize, comps: Vec<TrigPoly<S>>) -> Result<Self> {
        if comps.len() != dim_t {
            return Err(GhError::Dimension(format!(
                "torus field needs {dim_t} components, got {}",
                comps.len()
            )));
        }
        for (k, c) in comps.iter().enumerate() {
            if c.dim() != dim_t {
                return Err(GhError::Dimension(format!(
                    "field component {k} lives on T^{}",
                    c.dim()
                )));
            }
            if !c.is_real(FLOAT_TOL) {
                return Err(GhError::NonReal(format!(
                    "field component {k} is not conjugate-symmetric"
                )));
            }
        }
        Ok(TorusField { dim_t, comps })
    }

    pub fn zero(dim_t: usize) -> Self {
        TorusField {
            dim_t,
            comps: vec![TrigPoly::zero(dim_t); dim_t],
        }
    }

    pub fn constant(v: &[S]) -> Self {
        let n = v.len();
        TorusField {
            dim_t: n,
            comps: v.iter().map(|c| TrigPoly::constant(n, c.clone())).collect(),
        }
    }

    pub fn dim_t(&self) -> usize {
        self.dim_t
    }

    pub fn comps(&self) -> &[TrigPoly<S>] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn is_constant(&self) -> bool {
        self.comps.iter().all(|c| c.is_constant())
    }

    /// Coefficients of a constant field.
    pub fn constant_vector(&self) -> Option<Vec<S>> {
        if !self.is_constant() {
            return None;
        }
        Some(self.comps.iter().map(|c| c.constant_term().re).collect())
    }

    /// `sum_k d b_k / dt_k`.
    pub fn divergence(&self) -> TrigPoly<S> {
        self.comps
            .iter()
            .enumerate()
            .fold(TrigPoly::zero(self.dim_t), |acc, (k, b)| {
                acc.add(&b.deriv(k))
            })
    }

    /// Skew-symmetry on the flat torus: `W^* = -W` iff `div W = 0`.
    pub fn is_divergence_free(&self, tol: f64) -> bool {
        let d = self.divergence();
        if S::EXACT {
            d.is_zero()
        } else {
            d.sup_bound() <= tol
        }
    }

    /// `W g` for a function `g` of `t`.
    pub fn apply_fn(&self, g: &TrigPoly<S>) -> TrigPoly<S> {
        self.comps
            .iter()
            .enumerate()
            .fold(TrigPoly::zero(self.dim_t), |acc, (k, b)| {
                acc.add(&b.mul(&g.deriv(k)))
            })
    }

    pub fn apply(&self, f: &FourierData<S>) -> FourierData<S> {
        let mut r = FourierData::zero(f.group().clone(), f.dim_t());
        for (k, b) in self.comps.iter().enumerate() {
            if !b.is_zero() {
                r = r.add(&f.deriv_t(k).mul_trig(b));
            }
        }
        r
    }

    /// `sup_t (sum_k |b_k(t)|^2)^{1/2}` bounded through the coefficient l^1 norms.
    pub fn sup_bound(&self) -> f64 {
        self.comps
            .iter()
            .map(|b| b.sup_bound().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn eval(&self, t: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|b| b.eval(t).re).collect()
    }

    pub fn to_f64(&self) -> TorusField<f64> {
        TorusField {
            dim_t: self.dim_t,
            comps: self.comps.iter().map(|c| c.to_f64()).collect(),
        }
    }
}

/// The operator `Q` on the torus factor.
#[derive(Clone, Debug, PartialEq)]
pub enum QChoice<S: Scalar> {
    /// `Delta_T`, symbol `|tau|^2`.
    LaplacianT,
    Zero,
    /// `-sum q_jk d_j d_k`, symbol `tau^T q tau` with `q` symmetric PSD.
    ConstantForm(Vec<Vec<S>>),
}

impl<S: Scalar> QChoice<S> {
    pub fn matrix(&self, n: usize) -> Vec<Vec<S>> {
        match self {
            QChoice::LaplacianT => (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { S::one() } else { S::zero() })
                        .collect()
                })
                .collect(),
            QChoice::Zero => vec![vec![S::zero(); n]; n],
            QChoice::ConstantForm(q) => q.clone(),
        }
    }

    pub fn symbol(&self, tau: &[i64]) -> S {
        let n = tau.len();
        match self {
            QChoice::LaplacianT => S::from_i64(crate::spectral::norm_sq(tau)),
            QChoice::Zero => S::zero(),
            QChoice::ConstantForm(q) => {
                let mut s = S::zero();
                for i in 0..n {
                    for j in 0..n {
                        s = s + q[i][j].clone() * S::from_i64(tau[i] * tau[j]);
                    }
                }
                s
            }
        }
    }

    pub fn apply(&self, f: &FourierData<S>) -> FourierData<S> {
        match self {
            QChoice::LaplacianT => f.laplacian_t(),
            QChoice::Zero => FourierData::zero(f.group().clone(), f.dim_t()),
            QChoice::ConstantForm(_) => {
                let mut r = FourierData::zero(f.group().clone(), f.dim_t());
                for ((tau, mode), c) in f.coeffs() {
                    let s = self.symbol(tau);
                    if !s.is_zero() {
                        r.insert(tau.clone(), mode.clone(), c.clone() * c_real(s))
                            .expect("label from valid data");
                    }
                }
                r
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            QChoice::LaplacianT => "laplacian",
            QChoice::Zero => "zero",
            QChoice::ConstantForm(_) => "constant-form",
        }
    }

    pub fn to_f64(&self) -> QChoice<f64> {
        match self {
            QChoice::LaplacianT => QChoice::LaplacianT,
            QChoice::Zero => QChoice::Zero,
            QChoice::ConstantForm(q) => QChoice::ConstantForm(
                q.iter()
                    .map(|r| r.iter().map(|x| x.to_f64()).collect())
                    .collect(),
            ),
        }
    }
}

/// One square `(a(t, X) + W)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldTerm<S: Scalar> {
    pub a: CoefficientMap<S>,
    pub w: TorusField<S>,
}

impl<S: Scalar> FieldTerm<S> {
    pub fn to_f64(&self) -> FieldTerm<f64> {
        FieldTerm {
            a: self.a.to_f64(),
            w: self.w.to_f64(),
        }
    }
}

/// `P = Q - sum_l (a_l(t, X) + W_l)^2`, plus the optional remainder
/// `R = -sum_k (b_k(t, X) + V_k)^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec<S: Scalar> {
    pub group: GroupSpec,
    pub dim_t: usize,
    pub q: QChoice<S>,
    pub terms: Vec<FieldTerm<S>>,
    pub remainder: Vec<FieldTerm<S>>,
}

impl<S: Scalar> OperatorSpec<S> {
    pub fn new(
        group: GroupSpec,
        dim_t: usize,
        q: QChoice<S>,
        terms: Vec<FieldTerm<S>>,
        remainder: Vec<FieldTerm<S>>,
    ) -> Result<Self> {
        let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
        for (name, list) in [("term", &terms), ("remainder term", &remainder)] {
            for (l, t) in list.iter().enumerate() {
                if t.a.dim_g() != group.dim() || t.a.dim_t != dim_t {
                    return Err(GhError::Dimension(format!(
                        "{name} {l}: map of shape T^{} -> R^{} on T^{dim_t} x {}",
                        t.a.dim_t,
                        t.a.dim_g(),
                        group.name()
                    )));
                }
                if t.w.dim_t() != dim_t {
                    return Err(GhError::Dimension(format!(
                        "{name} {l}: torus field on T^{}",
                        t.w.dim_t()
                    )));
                }
                if !t.w.is_divergence_free(tol) {
                    return Err(GhError::Spec(format!(
                        "{name} {l}: torus field is not skew-symmetric (divergence is nonzero)"
                    )));
                }
            }
        }
        if let QChoice::ConstantForm(m) = &q {
            if m.len() != dim_t || m.iter().any(|r| r.len() != dim_t) {
                return Err(GhError::Dimension(format!(
                    "constant form must be {dim_t} x {dim_t}"
                )));
            }
            for i in 0..dim_t {
                for j in 0..dim_t {
                    if !(m[i][j].clone() - m[j][i].clone()).is_negligible(tol) {
                        return Err(GhError::Spec("constant form is not symmetric".into()));
                    }
                }
            }
            if symmetric_definiteness(m, tol) == Definiteness::Indefinite {
                return Err(GhError::Spec(
                    "constant form is not positive semidefinite".into(),
                ));
            }
        }
        Ok(OperatorSpec {
            group,
            dim_t,
            q,
            terms,
            remainder,
        })
    }

    /// The system `{a_l}` read off the main terms.
    pub fn system(&self) -> Result<SystemSpec<S>> {
        SystemSpec::new(
            self.group.clone(),
            self.dim_t,
            self.terms.iter().map(|t| t.a.clone()).collect(),
        )
    }

    pub fn all_terms(&self) -> impl Iterator<Item = &FieldTerm<S>> {
        self.terms.iter().chain(self.remainder.iter())
    }

    /// Every `a_l` and every `W_l` has constant coefficients.
    pub fn is_constant_coefficient(&self) -> bool {
        self.all_terms()
            .all(|t| t.a.is_constant() && t.w.is_constant())
    }

    pub fn without_remainder(&self) -> Self {
        OperatorSpec {
            remainder: Vec::new(),
            ..self.clone()
        }
    }

    pub fn to_f64(&self) -> OperatorSpec<f64> {
        OperatorSpec {
            group: self.group.clone(),
            dim_t: self.dim_t,
            q: self.q.to_f64(),
            terms: self.terms.iter().map(|t| t.to_f64()).collect(),
            remainder: self.remainder.iter().map(|t| t.to_f64()).collect(),
        }
    }
}

fn check_space<S: Scalar>(p: &OperatorSpec<S>, f: &FourierData<S>) -> Result<()> {
    if f.group() != &p.group || f.dim_t() != p.dim_t {
        return Err(GhError::Dimension(format!(
            "data on T^{} x {} for an operator on T^{} x {}",
            f.dim_t(),
            f.group().name(),
            p.dim_t,
            p.group.name()
        )));
    }
    Ok(())
}

/// `P f` from the expanded form
/// `P(psi x phi) = (P~ psi) x phi - sum_l [ sum_{j,j'} (a_j' a_j psi) x (X_j' X_j phi)
///   + sum_j ((2 a_j W + (W a_j)) psi) x (X_j phi) ]`, `P~ = Q - sum W^2`.
pub fn apply_operator<S: Scalar>(
    p: &OperatorSpec<S>,
    f: &FourierData<S>,
) -> Result<FourierData<S>> {
    check_space(p, f)?;
    let m = p.group.dim();
    let mut out = p.q.apply(f);
    let needs_x = p.all_terms().any(|t| !t.a.is_zero());
    let xf: Vec<FourierData<S>> = if needs_x {
        (0..m)
            .map(|j| f.act_g(&LieElement::basis(m, j)))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let two = c_real(S::from_i64(2));
    for t in p.all_terms() {
        if !t.w.is_zero() {
            out = out.sub(&t.w.apply(&t.w.apply(f)));
        }
        for j in 0..m {
            let aj = &t.a.comps[j];
            if aj.is_zero() {
                continue;
            }
            for jp in 0..m {
                let ajp = &t.a.comps[jp];
                if ajp.is_zero() {
                    continue;
                }
                let c = ajp.mul(aj);
                let xx = xf[j].act_g(&LieElement::basis(m, jp))?;
                out = out.sub(&xx.mul_trig(&c));
            }
            if !t.w.is_zero() {
                let first = t.w.apply(&xf[j]).mul_trig(aj).scale(&two);
                let second = xf[j].mul_trig(&t.w.apply_fn(aj));
                out = out.sub(&first.add(&second));
            }
        }
    }
    Ok(out)
}

/// `Y f = a(t, X) f + W f`.
pub fn apply_y<S: Scalar>(term: &FieldTerm<S>, f: &FourierData<S>) -> Result<FourierData<S>> {
    let m = term.a.dim_g();
    let mut out = term.w.apply(f);
    for j in 0..m {
        let aj = &term.a.comps[j];
        if !aj.is_zero() {
            out = out.add(&f.act_g(&LieElement::basis(m, j))?.mul_trig(aj));
        }
    }
    Ok(out)
}

/// `P f` by composing the squares directly: `Q f - sum_l Y_l (Y_l f)`.
pub fn apply_composed<S: Scalar>(
    p: &OperatorSpec<S>,
    f: &FourierData<S>,
) -> Result<FourierData<S>> {
    check_space(p, f)?;
    let mut out = p.q.apply(f);
    for t in p.all_terms() {
        out = out.sub(&apply_y(t, &apply_y(t, f)?)?);
    }
    Ok(out)
}

/// `<P psi, psi>`.
pub fn quadratic_form<S: Scalar>(p: &OperatorSpec<S>, psi: &FourierData<S>) -> Result<Complex<S>> {
    Ok(apply_operator(p, psi)?.inner(psi))
}

pub fn partial_projection_g<S: Scalar>(
    f: &FourierData<S>,
    lambda: &crate::scalar::Rational,
) -> Result<FourierData<S>> {
    f.project_g(lambda)
}

pub fn partial_projection_t<S: Scalar>(f: &FourierData<S>, mu: i64) -> FourierData<S> {
    f.project_t(mu)
}

/// `<P psi, psi> - <Q psi, psi> - sum_l ||Y_l psi||^2` for `psi` supported on
/// a single group eigenvalue. Exact scalars give exactly zero.
pub fn energy_identity_residual<S: Scalar>(
    p: &OperatorSpec<S>,
    psi: &FourierData<S>,
) -> Result<Complex<S>> {
    if !p.remainder.is_empty() {
        return Err(GhError::Spec(
            "energy identity is stated without the remainder term".into(),
        ));
    }
    if psi.g_lambdas()?.len() > 1 {
        return Err(GhError::Spec(
            "energy identity needs data on a single group eigenvalue".into(),
        ));
    }
    let lhs = quadratic_form(p, psi)?;
    let mut rhs = p.q.apply(psi).inner(psi);
    for t in &p.terms {
        rhs = rhs + c_real(apply_y(t, psi)?.norm_sq());
    }
    Ok(lhs - rhs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Ellipticity {
    /// Smallest eigenvalue of the principal symbol matrix over the tested points.
    Elliptic { min_eigenvalue: f64, exact: bool },
    NotElliptic {
        witness_tau: Vec<f64>,
        at_t: Option<Vec<f64>>,
    },
}

impl Ellipticity {
    pub fn is_elliptic(&self) -> bool {
        matches!(self, Ellipticity::Elliptic { .. })
    }
}

/// Principal symbol matrix of `P~ = Q - sum W^2` at `t`: `q + sum b(t) b(t)^T`.
fn symbol_matrix_at(q: &[Vec<f64>], fields: &[TorusField<f64>], t: &[f64]) -> DMatrix<f64> {
    let n = q.len();
    let mut m = DMatrix::from_fn(n, n, |i, j| q[i][j]);
    for w in fields {
        let b = w.eval(t);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += b[i] * b[j];
            }
        }
    }
    m
}

/// Ellipticity of `P~ = Q - sum_l W_l^2` on the torus factor.
///
/// Constant-coefficient fields are decided exactly from
/// `q + sum_l w_l w_l^T`; otherwise the symbol matrix is sampled on a grid.
pub fn tilde_p_ellipticity<S: Scalar>(p: &OperatorSpec<S>) -> Result<Ellipticity> {
    let n = p.dim_t;
    if n == 0 {
        return Ok(Ellipticity::Elliptic {
            min_eigenvalue: f64::INFINITY,
            exact: true,
        });
    }
    let fields: Vec<&TorusField<S>> = p.all_terms().map(|t| &t.w).collect();
    let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
    if fields.iter().all(|w| w.is_constant()) {
        let mut m = p.q.matrix(n);
        for w in &fields {
            let v = w.constant_vector().unwrap();
            for i in 0..n {
                for j in 0..n {
                    m[i][j] = m[i][j].clone() + v[i].clone() * v[j].clone();
                }
            }
        }
        let mf: Vec<Vec<f64>> = m
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64()).collect())
            .collect();
        let min_eig = SymmetricEigen::new(DMatrix::from_fn(n, n, |i, j| mf[i][j]))
            .eigenvalues
            .min();
        return Ok(match symmetric_definiteness(&m, tol) {
            Definiteness::Definite => Ellipticity::Elliptic {
                min_eigenvalue: min_eig,
                exact: S::EXACT,
            },
            _ => {
                let k = kernel_vector(&m, tol).unwrap_or_else(|| vec![S::one(); n]);
                Ellipticity::NotElliptic {
                    witness_tau: integer_direction(&k),
                    at_t: None,
                }
            }
        });
    }
    let q: Vec<Vec<f64>> =
        p.q.matrix(n)
            .iter()
            .map(|r| r.iter().map(|x| x.to_f64()).collect())
            .collect();
    let wf: Vec<TorusField<f64>> = fields.iter().map(|w| w.to_f64()).collect();
    let res = match n {
        1 => 256,
        2 => 48,
        3 => 16,
        _ => 6,
    };
    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for t in torus_grid(n, res) {
        let eig = SymmetricEigen::new(symbol_matrix_at(&q, &wf, &t));
        let (k, &lmin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        if best.as_ref().map(|b| lmin < b.0).unwrap_or(true) {
            best = Some((
                lmin,
                eig.eigenvectors.column(k).iter().cloned().collect(),
                t,
            ));
        }
    }
    let (lmin, v, t) = best.unwrap();
    if lmin > FLOAT_TOL {
        Ok(Ellipticity::Elliptic {
            min_eigenvalue: lmin,
            exact: false,
        })
    } else {
        Ok(Ellipticity::NotElliptic {
            witness_tau: v,
            at_t: Some(t),
        })
    }
}

/// Kernel direction with exact entries scaled to integers.
fn integer_direction<S: Scalar>(k: &[S]) -> Vec<f64> {
    if S::EXACT {
        let q: Vec<crate::scalar::Rational> = k.iter().map(|x| x.exact_value().unwrap()).collect();
        let den = q.iter().fold(num_bigint::BigInt::from(1), |a, x| {
            num_integer::Integer::lcm(&a, x.denom())
        });
        q.iter()
            .map(|x| {
                crate::scalar::rational_to_f64(
                    &(x * crate::scalar::Rational::from_integer(den.clone())),
                )
            })
            .collect()
    } else {
        k.iter().map(|x| x.to_f64()).collect()
    }
}

/// Random real trigonometric polynomial with small rational coefficients:
/// `terms` frequencies drawn from `|tau|_inf <= bandwidth`.
pub fn random_real_trig<S: Scalar, R: Rng>(
    rng: &mut R,
    dim: usize,
    bandwidth: i64,
    terms: usize,
) -> TrigPoly<S> {
    let mut p = TrigPoly::zero(dim);
    for _ in 0..terms {
        let tau: Freq = (0..dim)
            .map(|_| rng.gen_range(-bandwidth..=bandwidth))
            .collect();
        let re = random_small::<S, R>(rng);
        let neg: Freq = tau.iter().map(|k| -k).collect();
        if tau == neg {
            p.add_term(tau, c_real(re));
        } else {
            let im = random_small::<S, R>(rng);
            p.add_term(tau, Complex::new(re.clone(), im.clone()));
            p.add_term(neg, Complex::new(re, -im));
        }
    }
    p
}

/// Uniform draw from `{n/d : |n| <= 4, 1 <= d <= 4}`.
pub fn random_small<S: Scalar, R: Rng>(rng: &mut R) -> S {
    let n = rng.gen_range(-4i64..=4);
    let d = rng.gen_range(1i64..=4);
    S::from_ratio(n, d)
}

/// Random divergence-free field: a constant part plus shear terms
/// `c e^{i tau t} (tau_k e_j - tau_j e_k)`.
pub fn random_skew_field<S: Scalar, R: Rng>(
    rng: &mut R,
    dim: usize,
    bandwidth: i64,
    terms: usize,
) -> TorusField<S> {
    let mut comps: Vec<TrigPoly<S>> = (0..dim)
        .map(|_| TrigPoly::constant(dim, random_small::<S, R>(rng)))
        .collect();
    if dim >= 2 {
        for _ in 0..terms {
            let j = rng.gen_range(0..dim);
            let mut k = rng.gen_range(0..dim - 1);
            if k >= j {
                k += 1;
            }
            let g = random_real_trig::<S, R>(rng, dim, bandwidth, 1);
            // tau_k d/dt_j - tau_j d/dt_k applied to g, divided by i
            let mut bj = TrigPoly::zero(dim);
            let mut bk = TrigPoly::zero(dim);
            for (tau, c) in g.terms() {
                bj.add_term(tau.clone(), c.clone() * c_real(S::from_i64(tau[k])));
                bk.add_term(tau.clone(), c.clone() * c_real(S::from_i64(-tau[j])));
            }
            comps[j] = comps[j].add(&bj);
            comps[k] = comps[k].add(&bk);
        }
    }
    TorusField { dim_t: dim, comps }
}

/// Random data on the given frequencies and modes.
pub fn random_data<S: Scalar, R: Rng>(
    rng: &mut R,
    group: &GroupSpec,
    taus: &[Freq],
    modes: &[Mode],
) -> Result<FourierData<S>> {
    let dim_t = taus.first().map(|t| t.len()).unwrap_or(0);
    let mut f = FourierData::zero(group.clone(), dim_t);
    for tau in taus {
        for m in modes {
            let c = Complex::new(random_small::<S, R>(rng), random_small::<S, R>(rng));
            f.insert(tau.clone(), m.clone(), c)?;
        }
    }
    Ok(f)
}

/// All frequencies with `|tau|_inf <= r`.
pub fn freq_box(dim: usize, r: i64) -> Vec<Freq> {
    let mut out = Vec::new();
    crate::spectral::for_each_box_point(dim, r, |x| out.push(x.to_vec()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};
    use crate::trig::unit;
    use num_traits::Zero;

    fn t1t1() -> GroupSpec {
        GroupSpec::Torus(1)
    }

    #[test]
    fn laplacian_eigenfunction() {
        let p =
            OperatorSpec::<Rational>::new(t1t1(), 1, QChoice::LaplacianT, vec![], vec![]).unwrap();
        let f = FourierData::from_entries(
            t1t1(),
            1,
            vec![(vec![2], Mode::Torus(vec![1]), c_real(rat(1, 1)))],
        )
        .unwrap();
        assert_eq!(apply_operator(&p, &f).unwrap(), f.scale(&c_real(rat(4, 1))));
    }

    #[test]
    fn cos_squared_field() {
        // P = -(cos(t) d_x)^2 on 1 x e^{ix}
        let a = CoefficientMap::new(1, vec![TrigPoly::cos(1, 0, 1, rat(1, 1))]).unwrap();
        let term = FieldTerm {
            a,
            w: TorusField::zero(1),
        };
        let p = OperatorSpec::new(t1t1(), 1, QChoice::Zero, vec![term], vec![]).unwrap();
        let f = FourierData::from_entries(
            t1t1(),
            1,
            vec![(vec![0], Mode::Torus(vec![1]), c_real(rat(1, 1)))],
        )
        .unwrap();
        let pf = apply_operator(&p, &f).unwrap();
        assert_eq!(pf.len(), 3);
        assert_eq!(pf.get(&[0], &Mode::Torus(vec![1])), c_real(rat(1, 2)));
        assert_eq!(pf.get(&[2], &Mode::Torus(vec![1])), c_real(rat(1, 4)));
        assert_eq!(pf.get(&[-2], &Mode::Torus(vec![1])), c_real(rat(1, 4)));
        assert_eq!(pf, apply_composed(&p, &f).unwrap());
    }

    #[test]
    fn empty_operator_is_zero() {
        let p = OperatorSpec::<Rational>::new(t1t1(), 1, QChoice::Zero, vec![], vec![]).unwrap();
        let f = FourierData::from_entries(
            t1t1(),
            1,
            vec![(vec![5], Mode::Torus(vec![-3]), c_real(rat(7, 2)))],
        )
        .unwrap();
        assert!(apply_operator(&p, &f).unwrap().is_empty());
    }

    #[test]
    fn energy_example() {
        // P = Delta_T - (d_x + d_t)^2, psi = e^{i(t+x)}: <P psi, psi> = 1 + 4
        let a = CoefficientMap::constant(1, &LieElement::new(vec![rat(1, 1)]));
        let w = TorusField::constant(&[rat(1, 1)]);
        let p = OperatorSpec::new(
            t1t1(),
            1,
            QChoice::LaplacianT,
            vec![FieldTerm { a, w }],
            vec![],
        )
        .unwrap();
        let psi = FourierData::from_entries(
            t1t1(),
            1,
            vec![(vec![1], Mode::Torus(vec![1]), c_real(rat(1, 1)))],
        )
        .unwrap();
        assert_eq!(quadratic_form(&p, &psi).unwrap(), c_real(rat(5, 1)));
        assert!(energy_identity_residual(&p, &psi).unwrap().is_zero());
    }

    #[test]
    fn divergence_rejected() {
        let w = TorusField::new(1, vec![TrigPoly::cos(1, 0, 1, rat(1, 1))]).unwrap();
        let a = CoefficientMap::constant(1, &LieElement::new(vec![rat(1, 1)]));
        let err = OperatorSpec::new(
            t1t1(),
            1,
            QChoice::LaplacianT,
            vec![FieldTerm { a, w }],
            vec![],
        )
        .unwrap_err();
        assert!(err.to_string().contains("skew-symmetric"));
    }

    #[test]
    fn ellipticity_cases() {
        let a = CoefficientMap::constant(1, &LieElement::new(vec![rat(1, 1)]));
        let p = OperatorSpec::new(
            t1t1(),
            1,
            QChoice::Zero,
            vec![FieldTerm {
                a: a.clone(),
                w: TorusField::constant(&[rat(1, 1)]),
            }],
            vec![],
        )
        .unwrap();
        assert!(tilde_p_ellipticity(&p).unwrap().is_elliptic());
        let p0 = OperatorSpec::new(
            t1t1(),
            1,
            QChoice::Zero,
            vec![FieldTerm {
                a,
                w: TorusField::zero(1),
            }],
            vec![],
        )
        .unwrap();
        match tilde_p_ellipticity(&p0).unwrap() {
            Ellipticity::NotElliptic { witness_tau, .. } => assert_eq!(witness_tau, vec![1.0]),
            e => panic!("{e:?}"),
        }
        // variable field on T^2 that vanishes nowhere in direction 1 only
        let w =
            TorusField::new(2, vec![TrigPoly::constant(2, rat(1, 1)), TrigPoly::zero(2)]).unwrap();
        let b = CoefficientMap::constant(2, &LieElement::new(vec![rat(1, 1)]));
        let p2 = OperatorSpec::new(
            t1t1(),
            2,
            QChoice::Zero,
            vec![FieldTerm { a: b, w }],
            vec![],
        )
        .unwrap();
        assert!(!tilde_p_ellipticity(&p2).unwrap().is_elliptic());
        let _ = unit(2, 0, 1);
    }
}
