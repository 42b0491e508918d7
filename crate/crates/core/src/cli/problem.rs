//! TOML problem files.
//!
//! ```toml
//! [group]
//! kind = "torus"        # or "su2"
//! dim = 2
//!
//! [torus]
//! dim = 0               # n of the T^n factor
//!
//! [[system.fields]]
//! constant = ["1", "golden"]
//!
//! [[operator.terms]]
//! constant = ["2", "0", "0"]
//! a = [{ direction = 0, freq = [1], re = "1/2" }]
//! w_constant = ["1"]
//!
//! [analysis]
//! lambda_max = "10000"
//! seed = 7
//! ```
//!
//! Numbers are strings: `"p/q"`, decimals (exact), `"golden"`, `"sqrt(d)"`,
//! `"liouville(b)"`, or tables `{ surd = { a, b, d } }`,
//! `{ liouville = { base, truncation } }`, `{ decimal = "0.1" }`. A decimal
//! table is an approximate value and switches the run to floating point, as
//! does any irrational entry.

use std::path::Path;

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::diophantine::RealSpec;
use crate::error::{GhError, Result};
use crate::fields::{CoefficientMap, SystemSpec};
use crate::operator::{FieldTerm, OperatorSpec, QChoice, TorusField};
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::spectral::GroupSpec;
use crate::trig::TrigPoly;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    group: RawGroup,
    torus: Option<RawTorus>,
    system: Option<RawSystem>,
    operator: Option<RawOperator>,
    #[serde(default)]
    analysis: Analysis,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    kind: String,
    dim: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTorus {
    dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    fields: Vec<RawMap>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawValue {
    Int(i64),
    Str(String),
    Table(RawValueTable),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValueTable {
    surd: Option<RawSurd>,
    liouville: Option<RawLiouville>,
    decimal: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurd {
    a: String,
    b: String,
    d: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLiouville {
    base: u32,
    truncation: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    /// Lie algebra direction for `a`, torus axis for `W`.
    #[serde(alias = "axis")]
    direction: usize,
    freq: Vec<i64>,
    re: RawValue,
    im: Option<RawValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    #[serde(default)]
    constant: Vec<RawValue>,
    #[serde(default)]
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawQ {
    Name(String),
    Form { form: Vec<Vec<RawValue>> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOpTerm {
    #[serde(default)]
    constant: Vec<RawValue>,
    #[serde(default)]
    a: Vec<RawTerm>,
    #[serde(default)]
    w_constant: Vec<RawValue>,
    #[serde(default)]
    w: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperator {
    q: RawQ,
    #[serde(default)]
    terms: Vec<RawOpTerm>,
    #[serde(default)]
    remainder: Vec<RawOpTerm>,
}

/// Analysis parameters. Every randomized command needs `seed`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Analysis {
    pub lambda_max: String,
    pub lambda0: Option<String>,
    pub radius: f64,
    pub seed: Option<u64>,
    pub s: f64,
    pub min_witnesses: usize,
    pub min_r_squared: f64,
    /// Exponent `M` for the second Diophantine condition.
    pub m: f64,
    pub theta: f64,
    pub smooth_s: f64,
    pub truncation: usize,
    pub probe_lambda_max: Option<String>,
    pub probe_tau_radius: i64,
    pub probe_trials: usize,
    pub energy_samples: usize,
    pub poincare_delta: String,
    pub poincare_sets: usize,
    pub poincare_max_frequency: i64,
    pub graph_trials: usize,
    pub graph_bandwidth: i64,
    /// Liouville orders used as external decay certificates.
    pub liouville_orders: Vec<u32>,
}

impl Default for Analysis {
    fn default() -> Self {
        Analysis {
            lambda_max: "100".into(),
            lambda0: None,
            radius: 100.0,
            seed: None,
            s: 5.0,
            min_witnesses: 3,
            min_r_squared: 0.5,
            m: 1.0,
            theta: 0.5,
            smooth_s: 3.0,
            truncation: 20,
            probe_lambda_max: None,
            probe_tau_radius: 2,
            probe_trials: 8,
            energy_samples: 20,
            poincare_delta: "1/2".into(),
            poincare_sets: 32,
            poincare_max_frequency: 16,
            graph_trials: 64,
            graph_bandwidth: 6,
            liouville_orders: vec![11, 12, 13],
        }
    }
}

impl Analysis {
    pub fn lambda_max(&self) -> Result<Rational> {
        nonneg(&self.lambda_max, "lambda_max")
    }

    pub fn lambda0(&self) -> Result<Option<Rational>> {
        self.lambda0
            .as_deref()
            .map(|s| nonneg(s, "lambda0"))
            .transpose()
    }

    pub fn probe_lambda_max(&self) -> Result<Rational> {
        match &self.probe_lambda_max {
            Some(s) => nonneg(s, "probe_lambda_max"),
            None => self.lambda_max(),
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| GhError::Spec("analysis.seed is required for randomized probes".into()))
    }
}

fn nonneg(s: &str, name: &str) -> Result<Rational> {
    let q = parse_rational(s)?;
    if q < Rational::zero() {
        return Err(GhError::Spec(format!("{name} must be >= 0")));
    }
    Ok(q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub index: usize,
    pub freq: Vec<i64>,
    pub re: RealSpec,
    pub im: RealSpec,
}

/// Constant part plus trigonometric terms, over `len` directions.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    pub constant: Vec<RealSpec>,
    pub terms: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpTermSpec {
    pub a: MapSpec,
    pub w: MapSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QSpec {
    Laplacian,
    Zero,
    Form(Vec<Vec<RealSpec>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorFile {
    pub q: QSpec,
    pub terms: Vec<OpTermSpec>,
    pub remainder: Vec<OpTermSpec>,
}

#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub group: GroupSpec,
    pub dim_t: usize,
    pub system: Option<Vec<MapSpec>>,
    pub operator: Option<OperatorFile>,
    pub analysis: Analysis,
}

fn parse_value(v: &RawValue) -> Result<RealSpec> {
    let r = match v {
        RawValue::Int(n) => RealSpec::Rational(Rational::from_integer((*n).into())),
        RawValue::Str(s) => {
            let t = s.trim();
            if t == "golden" {
                RealSpec::golden()
            } else if let Some(d) = t.strip_prefix("sqrt(").and_then(|x| x.strip_suffix(')')) {
                let d: u64 = d
                    .trim()
                    .parse()
                    .map_err(|_| GhError::Spec(format!("bad surd {t:?}")))?;
                RealSpec::sqrt(d)
            } else if let Some(b) = t
                .strip_prefix("liouville(")
                .and_then(|x| x.strip_suffix(')'))
            {
                let b: u32 = b
                    .trim()
                    .parse()
                    .map_err(|_| GhError::Spec(format!("bad Liouville base {t:?}")))?;
                RealSpec::liouville(b)
            } else {
                RealSpec::Rational(parse_rational(t)?)
            }
        }
        RawValue::Table(t) => match (&t.surd, &t.liouville, &t.decimal) {
            (Some(s), None, None) => RealSpec::QuadraticSurd {
                a: parse_rational(&s.a)?,
                b: parse_rational(&s.b)?,
                d: s.d,
            },
            (None, Some(l), None) => RealSpec::LiouvilleSeries {
                base: l.base,
                truncation: l.truncation.unwrap_or(8),
            },
            (None, None, Some(d)) => RealSpec::DecimalLiteral(d.clone()),
            _ => {
                return Err(GhError::Spec(
                    "a number table needs exactly one of surd, liouville, decimal".into(),
                ))
            }
        },
    };
    r.validate()?;
    Ok(r)
}

fn parse_terms(ts: &[RawTerm]) -> Result<Vec<Term>> {
    ts.iter()
        .map(|t| {
            Ok(Term {
                index: t.direction,
                freq: t.freq.clone(),
                re: parse_value(&t.re)?,
                im: match &t.im {
                    Some(v) => parse_value(v)?,
                    None => RealSpec::rational(0, 1),
                },
            })
        })
        .collect()
}

fn parse_map(constant: &[RawValue], terms: &[RawTerm]) -> Result<MapSpec> {
    Ok(MapSpec {
        constant: constant.iter().map(parse_value).collect::<Result<_>>()?,
        terms: parse_terms(terms)?,
    })
}

impl MapSpec {
    fn values(&self) -> impl Iterator<Item = &RealSpec> {
        self.constant
            .iter()
            .chain(self.terms.iter().flat_map(|t| [&t.re, &t.im]))
    }

    pub fn is_empty(&self) -> bool {
        self.constant.is_empty() && self.terms.is_empty()
    }

    /// Trigonometric polynomials per direction; `what` names the map in errors.
    pub fn polys<S: Scalar>(
        &self,
        len: usize,
        dim_t: usize,
        what: &str,
    ) -> Result<Vec<TrigPoly<S>>> {
        if !self.constant.is_empty() && self.constant.len() != len {
            return Err(GhError::Dimension(format!(
                "{what}: constant part needs {len} entries, got {}",
                self.constant.len()
            )));
        }
        let mut out = vec![TrigPoly::zero(dim_t); len];
        for (k, c) in self.constant.iter().enumerate() {
            out[k].add_term(vec![0; dim_t], Complex::new(real_to::<S>(c), S::zero()));
        }
        for t in &self.terms {
            if t.index >= len {
                return Err(GhError::Dimension(format!(
                    "{what}: direction {} out of range 0..{len}",
                    t.index
                )));
            }
            if t.freq.len() != dim_t {
                return Err(GhError::Dimension(format!(
                    "{what}: frequency {:?} is not in Z^{dim_t}",
                    t.freq
                )));
            }
            out[t.index].add_term(
                t.freq.clone(),
                Complex::new(real_to::<S>(&t.re), real_to::<S>(&t.im)),
            );
        }
        Ok(out)
    }

    /// Constant coordinates, if there are no trigonometric terms.
    pub fn constant_only(&self) -> Option<&[RealSpec]> {
        (self.terms.is_empty() && !self.constant.is_empty()).then_some(&self.constant[..])
    }
}

/// Exact value for rationals; the nearest double otherwise.
pub fn real_to<S: Scalar>(r: &RealSpec) -> S {
    match r.as_rational() {
        Some(q) => S::from_rational(q),
        None => S::from_rational(&Rational::from_float(r.to_f64()).unwrap_or_else(Rational::zero)),
    }
}

impl ProblemFile {
    pub fn parse_str(src: &str) -> Result<Self> {
        let raw: RawProblem =
            toml::from_str(src).map_err(|e| GhError::Spec(format!("schema violation: {e}")))?;
        let group = match raw.group.kind.as_str() {
            "torus" => GroupSpec::torus(raw.group.dim.unwrap_or(1))?,
            "su2" => {
                if raw.group.dim.map(|d| d != 3).unwrap_or(false) {
                    return Err(GhError::Spec("su2 has dimension 3".into()));
                }
                GroupSpec::Su2
            }
            k => {
                return Err(GhError::Spec(format!(
                    "schema violation: unknown group kind {k:?}"
                )))
            }
        };
        let dim_t = raw.torus.map(|t| t.dim).unwrap_or(0);
        let system = raw
            .system
            .map(|s| {
                s.fields
                    .iter()
                    .map(|f| parse_map(&f.constant, &f.terms))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        let op_term = |t: &RawOpTerm| -> Result<OpTermSpec> {
            Ok(OpTermSpec {
                a: parse_map(&t.constant, &t.a)?,
                w: parse_map(&t.w_constant, &t.w)?,
            })
        };
        let operator = match raw.operator {
            Some(o) => Some(OperatorFile {
                q: match o.q {
                    RawQ::Name(n) if n == "laplacian" => QSpec::Laplacian,
                    RawQ::Name(n) if n == "zero" => QSpec::Zero,
                    RawQ::Name(n) => {
                        return Err(GhError::Spec(format!("schema violation: unknown Q {n:?}")))
                    }
                    RawQ::Form { form } => QSpec::Form(
                        form.iter()
                            .map(|r| r.iter().map(parse_value).collect::<Result<Vec<_>>>())
                            .collect::<Result<_>>()?,
                    ),
                },
                terms: o.terms.iter().map(op_term).collect::<Result<_>>()?,
                remainder: o.remainder.iter().map(op_term).collect::<Result<_>>()?,
            }),
            None => None,
        };
        let pf = ProblemFile {
            group,
            dim_t,
            system,
            operator,
            analysis: raw.analysis,
        };
        pf.analysis.lambda_max()?;
        pf.analysis.lambda0()?;
        // validates dimensions, conjugate symmetry and skew-symmetry
        if pf.is_exact() {
            pf.validate::<Rational>()?;
        } else {
            pf.validate::<f64>()?;
        }
        Ok(pf)
    }

    pub fn parse(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| GhError::Spec(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&src)
    }

    fn validate<S: Scalar>(&self) -> Result<()> {
        if self.system.is_some() {
            self.system_spec::<S>()?;
        }
        if self.operator.is_some() {
            self.operator_spec::<S>()?;
        }
        Ok(())
    }

    fn values(&self) -> Vec<&RealSpec> {
        let mut v: Vec<&RealSpec> = Vec::new();
        if let Some(s) = &self.system {
            for m in s {
                v.extend(m.values());
            }
        }
        if let Some(o) = &self.operator {
            if let QSpec::Form(f) = &o.q {
                v.extend(f.iter().flatten());
            }
            for t in o.terms.iter().chain(&o.remainder) {
                v.extend(t.a.values());
                v.extend(t.w.values());
            }
        }
        v
    }

    /// Every number is rational: the run stays exact.
    pub fn is_exact(&self) -> bool {
        self.values().iter().all(|r| r.is_rational())
    }

    pub fn system_spec<S: Scalar>(&self) -> Result<SystemSpec<S>> {
        let fields = self
            .system
            .as_ref()
            .ok_or_else(|| GhError::Spec("missing [system] section".into()))?;
        if fields.is_empty() {
            return Err(GhError::Spec("[system] needs at least one field".into()));
        }
        let maps = fields
            .iter()
            .enumerate()
            .map(|(l, f)| {
                CoefficientMap::new(
                    self.dim_t,
                    f.polys(self.group.dim(), self.dim_t, &format!("field {l}"))?,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        SystemSpec::new(self.group.clone(), self.dim_t, maps)
    }

    pub fn operator_spec<S: Scalar>(&self) -> Result<OperatorSpec<S>> {
        let o = self
            .operator
            .as_ref()
            .ok_or_else(|| GhError::Spec("missing [operator] section".into()))?;
        let n = self.dim_t;
        if n == 0 {
            return Err(GhError::Spec(
                "an operator needs a torus factor: set [torus] dim >= 1".into(),
            ));
        }
        let q = match &o.q {
            QSpec::Laplacian => QChoice::LaplacianT,
            QSpec::Zero => QChoice::Zero,
            QSpec::Form(f) => QChoice::ConstantForm(
                f.iter()
                    .map(|r| r.iter().map(real_to::<S>).collect())
                    .collect(),
            ),
        };
        let build = |list: &[OpTermSpec], name: &str| -> Result<Vec<FieldTerm<S>>> {
            list.iter()
                .enumerate()
                .map(|(l, t)| {
                    let a = CoefficientMap::new(
                        n,
                        t.a.polys(self.group.dim(), n, &format!("{name} {l} a"))?,
                    )?;
                    let w = if t.w.is_empty() {
                        TorusField::zero(n)
                    } else {
                        TorusField::new(n, t.w.polys(n, n, &format!("{name} {l} W"))?)?
                    };
                    Ok(FieldTerm { a, w })
                })
                .collect()
        };
        OperatorSpec::new(
            self.group.clone(),
            n,
            q,
            build(&o.terms, "term")?,
            build(&o.remainder, "remainder")?,
        )
    }

    /// Liouville bases `b` of fields `X_1 + alpha X_2`, `alpha = sum b^{-n!}`.
    pub fn liouville_fields(&self) -> Vec<u32> {
        let mut out = Vec::new();
        if let Some(fields) = &self.system {
            for f in fields {
                if let Some(c) = f.constant_only() {
                    if c.len() == 2 && c[0] == RealSpec::rational(1, 1) {
                        if let RealSpec::LiouvilleSeries { base, .. } = c[1] {
                            out.push(base);
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_torus_system() {
        let pf = ProblemFile::parse_str(
            r#"
[group]
kind = "torus"
dim = 2
[[system.fields]]
constant = ["1", "1/2"]
[[system.fields]]
constant = ["3", 1]
"#,
        )
        .unwrap();
        assert!(pf.is_exact());
        let s = pf.system_spec::<Rational>().unwrap();
        assert_eq!(s.maps.len(), 2);
    }

    #[test]
    fn unknown_group_kind() {
        let e = ProblemFile::parse_str("[group]\nkind = \"heisenberg\"\n").unwrap_err();
        assert!(e.to_string().contains("schema violation"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn divergence_names_skew_symmetry() {
        let e = ProblemFile::parse_str(
            r#"
[group]
kind = "torus"
dim = 1
[torus]
dim = 1
[operator]
q = "laplacian"
[[operator.terms]]
constant = ["1"]
w = [{ axis = 0, freq = [1], re = "1/2" }, { axis = 0, freq = [-1], re = "1/2" }]
"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("skew-symmetric"), "{e}");
    }

    #[test]
    fn irrational_switches_to_float() {
        let pf = ProblemFile::parse_str(
            "[group]\nkind = \"torus\"\ndim = 2\n[[system.fields]]\nconstant = [\"1\", \"golden\"]\n",
        )
        .unwrap();
        assert!(!pf.is_exact());
        let s = pf.system_spec::<f64>().unwrap();
        assert!((s.maps[0].comps[1].constant_term().re - 1.618033988749895).abs() < 1e-15);
    }
}
