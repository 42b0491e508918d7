//! Lie algebra elements, coefficient maps `a(t) = sum_j a_j(t) X_j` and the
//! range basis `L_p` with expansion functions `alpha_p`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{GhError, Result};
use crate::linalg::{gram_pivots, rref, solve};
use crate::scalar::Scalar;
use crate::spectral::GroupSpec;
use crate::trig::TrigPoly;

/// Default tolerance for floating rank decisions.
pub const FLOAT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct LieElement<S: Scalar> {
    coords: Vec<S>,
}

impl<S: Scalar> LieElement<S> {
    pub fn new(coords: Vec<S>) -> Self {
        LieElement { coords }
    }

    pub fn zero(dim: usize) -> Self {
        LieElement {
            coords: vec![S::zero(); dim],
        }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut c = vec![S::zero(); dim];
        c[k] = S::one();
        LieElement { coords: c }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn add(&self, o: &Self) -> Self {
        LieElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        LieElement {
            coords: self
                .coords
                .iter()
                .zip(&o.coords)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        LieElement {
            coords: self.coords.iter().map(|a| a.clone() * s.clone()).collect(),
        }
    }

    pub fn norm_sq(&self) -> S {
        self.coords
            .iter()
            .fold(S::zero(), |acc, a| acc + a.clone() * a.clone())
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coords.iter().all(|a| a.is_negligible(tol))
    }

    pub fn to_f64(&self) -> LieElement<f64> {
        LieElement {
            coords: self.coords.iter().map(|a| a.to_f64()).collect(),
        }
    }
}

fn check_dim<S: Scalar>(group: &GroupSpec, x: &LieElement<S>) -> Result<()> {
    if x.dim() != group.dim() {
        return Err(GhError::Dimension(format!(
            "element of dim {} in Lie({})",
            x.dim(),
            group.name()
        )));
    }
    Ok(())
}

/// Lie bracket. Tori are abelian; su(2) brackets are the cross product in
/// the `X1, X2, X3` basis.
pub fn bracket<S: Scalar>(
    group: &GroupSpec,
    x: &LieElement<S>,
    y: &LieElement<S>,
) -> Result<LieElement<S>> {
    check_dim(group, x)?;
    check_dim(group, y)?;
    match group {
        GroupSpec::Torus(m) => Ok(LieElement::zero(*m)),
        GroupSpec::Su2 => {
            let a = &x.coords;
            let b = &y.coords;
            Ok(LieElement::new(vec![
                a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
                a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
                a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
            ]))
        }
    }
}

/// Subalgebra generated by a set of elements, stored as a reduced row
/// echelon basis (canonical for exact scalars).
#[derive(Clone, Debug, PartialEq)]
pub struct LieHull<S: Scalar> {
    pub basis: Vec<LieElement<S>>,
    pub ambient_dim: usize,
}

impl<S: Scalar> LieHull<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim
    }

    pub fn contains(&self, x: &LieElement<S>, tol: f64) -> bool {
        let mut rows: Vec<Vec<S>> = self.basis.iter().map(|b| b.coords.clone()).collect();
        rows.push(x.coords.clone());
        rref(&rows, tol).1.len() == self.dim()
    }

    pub fn is_commutative(&self, group: &GroupSpec, tol: f64) -> Result<bool> {
        for i in 0..self.basis.len() {
            for k in i + 1..self.basis.len() {
                if !bracket(group, &self.basis[i], &self.basis[k])?.is_negligible(tol) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Gram-Schmidt orthonormalization in floating point.
    pub fn orthonormal_basis(&self) -> Vec<LieElement<f64>> {
        let mut out: Vec<LieElement<f64>> = Vec::new();
        for b in &self.basis {
            let mut v = b.to_f64();
            for u in &out {
                let d: f64 = v.coords.iter().zip(&u.coords).map(|(a, b)| a * b).sum();
                v = v.sub(&u.scale(&d));
            }
            let n = v.norm_sq().sqrt();
            if n > FLOAT_TOL {
                out.push(v.scale(&(1.0 / n)));
            }
        }
        out
    }
}

fn span_basis<S: Scalar>(elems: &[LieElement<S>], tol: f64) -> Vec<LieElement<S>> {
    let rows: Vec<Vec<S>> = elems.iter().map(|e| e.coords.clone()).collect();
    rref(&rows, tol)
        .0
        .into_iter()
        .map(LieElement::new)
        .collect()
}

/// Smallest subalgebra containing `set`, by iterated brackets until the
/// span stops growing.
pub fn lie_hull<S: Scalar>(
    group: &GroupSpec,
    set: &[LieElement<S>],
    tol: f64,
) -> Result<LieHull<S>> {
    for x in set {
        check_dim(group, x)?;
    }
    let mut basis = span_basis(set, tol);
    loop {
        let before = basis.len();
        let mut cand = basis.clone();
        for i in 0..basis.len() {
            for k in i + 1..basis.len() {
                cand.push(bracket(group, &basis[i], &basis[k])?);
            }
        }
        basis = span_basis(&cand, tol);
        if basis.len() == before {
            break;
        }
    }
    Ok(LieHull {
        basis,
        ambient_dim: group.dim(),
    })
}

/// `a(t) = sum_j a_j(t) X_j` with real trigonometric polynomials `a_j` on
/// `T^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMap<S: Scalar> {
    pub dim_t: usize,
    pub comps: Vec<TrigPoly<S>>,
}

impl<S: Scalar> CoefficientMap<S> {
    pub fn new(dim_t: usize, comps: Vec<TrigPoly<S>>) -> Result<Self> {
        for (j, c) in comps.iter().enumerate() {
            if c.dim() != dim_t {
                return Err(GhError::Dimension(format!(
                    "component {j} lives on T^{}",
                    c.dim()
                )));
            }
            if !c.is_real(FLOAT_TOL) {
                return Err(GhError::NonReal(format!(
                    "component {j} is not conjugate-symmetric"
                )));
            }
        }
        Ok(CoefficientMap { dim_t, comps })
    }

    /// Constant map `t -> x`.
    pub fn constant(dim_t: usize, x: &LieElement<S>) -> Self {
        CoefficientMap {
            dim_t,
            comps: x
                .coords
                .iter()
                .map(|c| TrigPoly::constant(dim_t, c.clone()))
                .collect(),
        }
    }

    /// `f(t) x` for a scalar function `f`.
    pub fn scalar_times(f: &TrigPoly<S>, x: &LieElement<S>) -> Self {
        CoefficientMap {
            dim_t: f.dim(),
            comps: x
                .coords
                .iter()
                .map(|c| f.scale(&crate::scalar::c_real(c.clone())))
                .collect(),
        }
    }

    pub fn dim_g(&self) -> usize {
        self.comps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn is_constant(&self) -> bool {
        self.comps.iter().all(|c| c.is_constant())
    }

    pub fn eval(&self, t: &[f64]) -> LieElement<f64> {
        LieElement::new(self.comps.iter().map(|c| c.eval(t).re).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        CoefficientMap {
            dim_t: self.dim_t,
            comps: self
                .comps
                .iter()
                .zip(&o.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> CoefficientMap<f64> {
        CoefficientMap {
            dim_t: self.dim_t,
            comps: self.comps.iter().map(|c| c.to_f64()).collect(),
        }
    }
}

/// A system `{a_l(t, X)}` of coefficient maps over a group.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec<S: Scalar> {
    pub group: GroupSpec,
    pub dim_t: usize,
    pub maps: Vec<CoefficientMap<S>>,
}

impl<S: Scalar> SystemSpec<S> {
    pub fn new(group: GroupSpec, dim_t: usize, maps: Vec<CoefficientMap<S>>) -> Result<Self> {
        for (l, a) in maps.iter().enumerate() {
            if a.dim_g() != group.dim() {
                return Err(GhError::Dimension(format!(
                    "map {l} has {} components on {}",
                    a.dim_g(),
                    group.name()
                )));
            }
            if a.dim_t != dim_t {
                return Err(GhError::Dimension(format!(
                    "map {l} lives on T^{}",
                    a.dim_t
                )));
            }
        }
        Ok(SystemSpec { group, dim_t, maps })
    }

    /// System of constant fields `{X_1, .., X_N}`.
    pub fn constant(group: GroupSpec, fields: &[LieElement<S>]) -> Result<Self> {
        let maps = fields
            .iter()
            .map(|x| CoefficientMap::constant(0, x))
            .collect();
        Self::new(group, 0, maps)
    }

    pub fn range_bases(&self, tol: f64) -> Result<Vec<RangeBasis<S>>> {
        self.maps.iter().map(|a| range_basis(a, tol)).collect()
    }

    /// All `L_p^l` over all maps.
    pub fn generators(&self, tol: f64) -> Result<Vec<LieElement<S>>> {
        Ok(self
            .range_bases(tol)?
            .into_iter()
            .flat_map(|rb| rb.generators)
            .collect())
    }

    pub fn to_f64(&self) -> SystemSpec<f64> {
        SystemSpec {
            group: self.group.clone(),
            dim_t: self.dim_t,
            maps: self.maps.iter().map(|m| m.to_f64()).collect(),
        }
    }
}

/// Pivot split of a coefficient map: `a_{j_p}` linearly independent,
/// `a_{i_q} = sum_p lambda_{qp} a_{j_p}`, `L_p = X_{j_p} + sum_q lambda_{qp} X_{i_q}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RangeBasis<S: Scalar> {
    pub pivots: Vec<usize>,
    pub others: Vec<usize>,
    /// `lambda[q][p]`
    pub lambda: Vec<Vec<S>>,
    pub generators: Vec<LieElement<S>>,
    pub alphas: Vec<TrigPoly<S>>,
}

impl<S: Scalar> RangeBasis<S> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// `sum_p alpha_p(t) L_p` as a coefficient map.
    pub fn reconstruct(&self) -> CoefficientMap<S> {
        let m = self.generators[0].dim();
        let dim_t = self.alphas[0].dim();
        let mut comps = vec![TrigPoly::zero(dim_t); m];
        for (alpha, l) in self.alphas.iter().zip(&self.generators) {
            for (j, c) in l.coords().iter().enumerate() {
                if !c.is_zero() {
                    comps[j] = comps[j].add(&alpha.scale(&crate::scalar::c_real(c.clone())));
                }
            }
        }
        CoefficientMap { dim_t, comps }
    }

    /// `v_p = (lambda_{1p}, .., lambda_{dp})`.
    pub fn v(&self, p: usize) -> Vec<S> {
        self.lambda.iter().map(|row| row[p].clone()).collect()
    }
}

/// Real Gram matrix `<a_j, a_k>` of the components.
pub fn gram<S: Scalar>(a: &CoefficientMap<S>) -> Vec<Vec<S>> {
    let m = a.dim_g();
    (0..m)
        .map(|j| (0..m).map(|k| a.comps[j].inner(&a.comps[k]).re).collect())
        .collect()
}

pub fn range_basis<S: Scalar>(a: &CoefficientMap<S>, tol: f64) -> Result<RangeBasis<S>> {
    if a.is_zero() {
        return Err(GhError::ZeroMap);
    }
    let g = gram(a);
    let pivots = gram_pivots(&g, tol);
    let others: Vec<usize> = (0..a.dim_g()).filter(|j| !pivots.contains(j)).collect();
    let sub: Vec<Vec<S>> = pivots
        .iter()
        .map(|&x| pivots.iter().map(|&y| g[x][y].clone()).collect())
        .collect();
    let mut lambda = Vec::new();
    for &i in &others {
        let rhs: Vec<S> = pivots.iter().map(|&p| g[p][i].clone()).collect();
        let x = solve(&sub, &rhs, tol)
            .ok_or_else(|| GhError::Numeric("singular pivot Gram block".into()))?;
        lambda.push(x);
    }
    let m = a.dim_g();
    let mut generators = Vec::new();
    for (p, &jp) in pivots.iter().enumerate() {
        let mut c = vec![S::zero(); m];
        c[jp] = S::one();
        for (q, &iq) in others.iter().enumerate() {
            c[iq] = lambda[q][p].clone();
        }
        generators.push(LieElement::new(c));
    }
    let alphas = pivots.iter().map(|&jp| a.comps[jp].clone()).collect();
    Ok(RangeBasis {
        pivots,
        others,
        lambda,
        generators,
        alphas,
    })
}

/// Whether the range of `a` spans a commutative subspace: all brackets of
/// the range basis vanish.
pub fn commutativity_check<S: Scalar>(
    group: &GroupSpec,
    a: &CoefficientMap<S>,
    tol: f64,
) -> Result<bool> {
    if group.is_abelian() {
        return Ok(true);
    }
    let rb = range_basis(a, tol)?;
    for i in 0..rb.generators.len() {
        for k in i + 1..rb.generators.len() {
            if !bracket(group, &rb.generators[i], &rb.generators[k])?.is_negligible(tol) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `D(t, gamma) = (sum_p alpha_p(t) gamma_p)^2`.
pub fn d_value<S: Scalar>(rb: &RangeBasis<S>, t: &[f64], gamma: &[f64]) -> Result<f64> {
    if gamma.len() != rb.rank() {
        return Err(GhError::Dimension(format!(
            "gamma has {} entries, rank is {}",
            gamma.len(),
            rb.rank()
        )));
    }
    let s: f64 = rb
        .alphas
        .iter()
        .zip(gamma)
        .map(|(a, g)| a.eval(t).re * g)
        .sum();
    Ok(s * s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaDelta {
    pub alpha: f64,
    pub delta: f64,
    /// `(alpha_i, delta(alpha_i))` over the threshold grid.
    pub table: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct AlphaDeltaConfig {
    /// Grid points per axis of `T^n`.
    pub grid: usize,
    /// Unit vectors sampled in `R^{m'}`.
    pub n_gamma: usize,
    /// Number of threshold steps.
    pub steps: usize,
    pub seed: u64,
}

impl Default for AlphaDeltaConfig {
    fn default() -> Self {
        AlphaDeltaConfig {
            grid: 256,
            n_gamma: 64,
            steps: 64,
            seed: 0,
        }
    }
}

/// Uniform grid on `T^n` with `r` points per axis.
pub fn torus_grid(n: usize, r: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let step = std::f64::consts::TAU / r as f64;
    let total = r.pow(n as u32);
    for idx in 0..total {
        let mut t = Vec::with_capacity(n);
        let mut k = idx;
        for _ in 0..n {
            t.push((k % r) as f64 * step);
            k /= r;
        }
        t.reverse();
        out.push(t);
    }
    out
}

/// Unit vectors in `R^k`: `+1` for `k = 1`, equally spaced half-circle
/// angles for `k = 2`, seeded Gaussian directions otherwise.
pub fn unit_sphere_sample(k: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    match k {
        0 => vec![vec![]],
        1 => vec![vec![1.0]],
        2 => (0..n)
            .map(|i| {
                let th = std::f64::consts::PI * i as f64 / n as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| loop {
                    let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let nn: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if nn > 1e-6 {
                        break v.iter().map(|x| x / nn).collect();
                    }
                })
                .collect()
        }
    }
}

/// Grid measure of `{t : D(t, gamma) > alpha}`.
pub fn superlevel_fraction<S: Scalar>(
    rb: &RangeBasis<S>,
    gamma: &[f64],
    alpha: f64,
    grid: &[Vec<f64>],
) -> Result<f64> {
    let mut hit = 0usize;
    for t in grid {
        if d_value(rb, t, gamma)? > alpha {
            hit += 1;
        }
    }
    Ok(hit as f64 / grid.len() as f64)
}

/// Scans thresholds `alpha_i = A i / steps`, `A = min_gamma max_t D`, and
/// records `delta(alpha) = min_gamma |{D > alpha}|`. Returns the pair with
/// the largest product `alpha * delta` (ties to the larger alpha).
pub fn estimate_alpha_delta<S: Scalar>(
    rb: &RangeBasis<S>,
    cfg: &AlphaDeltaConfig,
) -> Result<AlphaDelta> {
    let n = rb.alphas[0].dim();
    let grid = torus_grid(n, cfg.grid);
    let gammas = unit_sphere_sample(rb.rank(), cfg.n_gamma, cfg.seed);
    let vals: Vec<Vec<f64>> = grid
        .iter()
        .map(|t| rb.alphas.iter().map(|a| a.eval(t).re).collect())
        .collect();
    let d_table: Vec<Vec<f64>> = gammas
        .iter()
        .map(|g| {
            vals.iter()
                .map(|v| {
                    let s: f64 = v.iter().zip(g).map(|(a, b)| a * b).sum();
                    s * s
                })
                .collect()
        })
        .collect();
    let big_a = d_table
        .iter()
        .map(|row| row.iter().cloned().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let mut table = Vec::new();
    let mut best = (0.0, 0.0);
    let mut best_prod = -1.0;
    for i in 0..=cfg.steps {
        let alpha = big_a * i as f64 / cfg.steps as f64;
        let delta = d_table
            .iter()
            .map(|row| row.iter().filter(|&&d| d > alpha).count() as f64 / row.len() as f64)
            .fold(f64::INFINITY, f64::min);
        table.push((alpha, delta));
        let prod = alpha * delta;
        if prod >= best_prod && delta > 0.0 {
            best_prod = prod;
            best = (alpha, delta);
        }
    }
    Ok(AlphaDelta {
        alpha: best.0,
        delta: best.1,
        table,
    })
}
