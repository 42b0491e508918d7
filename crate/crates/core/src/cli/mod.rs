//! Batch front end: problem files in, deterministic JSON or CSV reports out.

pub mod problem;

use std::str::FromStr;

use num_complex::Complex;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

pub use problem::{Analysis, ProblemFile};

use crate::diophantine::{
    liouville_partial, liouville_witnesses, verify_equivalence, NsaBlock, NsaFamily, RealSpec,
};
use crate::error::{GhError, Result};
use crate::fields::{commutativity_check, CoefficientMap, LieElement, SystemSpec, FLOAT_TOL};
use crate::ghcheck::{
    analyze_system, build_singular_solution, check_singular_solution, generator_images,
    hull_checks, liouville_decay_witnesses, product_check_commuting, product_check_constant_group,
    zero_witness_modes, DecayWitness, GhReport, GhThresholds, GhVerdict,
};
use crate::operator::{
    classify_smoothness, energy_identity_residual, final_inequality_probe, freq_box,
    graph_norm_bound, poincare_estimate, random_data, tilde_p_ellipticity, OperatorSpec,
    ProbeConfig, SmoothnessConfig, SmoothnessReport, TorusField,
};
use crate::scalar::{parse_rational, rational_to_f64, Rational, Scalar};
use crate::spectral::{
    anti_hermitian_defect, casimir_residual, eigen_bound_margin, enumerate_shells, shell_block,
    weyl_bound, weyl_partial_sums, GroupSpec, Mode,
};
use crate::trig::TrigPoly;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckSystem,
    AnalyzeOperator,
    Diophantine,
    Counterexample,
    Inequalities,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckSystem => "check-system",
            Command::AnalyzeOperator => "analyze-operator",
            Command::Diophantine => "diophantine",
            Command::Counterexample => "counterexample",
            Command::Inequalities => "inequalities",
        }
    }
}

impl FromStr for Command {
    type Err = GhError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "check-system" => Command::CheckSystem,
            "analyze-operator" => Command::AnalyzeOperator,
            "diophantine" => Command::Diophantine,
            "counterexample" => Command::Counterexample,
            "inequalities" => Command::Inequalities,
            _ => return Err(GhError::Spec(format!("unknown command {s:?}"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = GhError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(GhError::Spec(format!("unknown format {s:?}"))),
        }
    }
}

/// One CSV row per shell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShellRow {
    pub lambda: String,
    pub sigma_min: Option<f64>,
    pub witness: String,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub command: Command,
    pub exact: bool,
    pub parameters: Value,
    pub result: Value,
    pub shells: Vec<ShellRow>,
}

/// Command-line overrides of the analysis section.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub lambda_max: Option<String>,
    pub radius: Option<f64>,
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| GhError::Numeric(format!("serialization: {e}")))
}

fn thresholds(a: &Analysis) -> Result<GhThresholds> {
    Ok(GhThresholds {
        s: a.s,
        min_witnesses: a.min_witnesses,
        lambda0: a.lambda0()?,
        min_r_squared: a.min_r_squared,
    })
}

fn s_rational(a: &Analysis) -> Result<Rational> {
    Rational::from_float(a.s).ok_or_else(|| GhError::Spec("s must be finite".into()))
}

fn liouville_external(pf: &ProblemFile) -> Result<Vec<DecayWitness>> {
    let s = s_rational(&pf.analysis)?;
    let mut out = Vec::new();
    for base in pf.liouville_fields() {
        for &k in &pf.analysis.liouville_orders {
            out.extend(liouville_decay_witnesses(base, k..=k, &s)?);
        }
    }
    Ok(out)
}

/// Runs `cmd` on a parsed problem.
pub fn run(cmd: Command, pf: &ProblemFile, ov: &Overrides) -> Result<Report> {
    let mut pf = pf.clone();
    if let Some(l) = &ov.lambda_max {
        pf.analysis.lambda_max = l.clone();
    }
    if let Some(r) = ov.radius {
        pf.analysis.radius = r;
    }
    pf.analysis.lambda_max()?;
    let exact = pf.is_exact();
    let (result, shells) = if exact {
        dispatch::<Rational>(cmd, &pf)?
    } else {
        dispatch::<f64>(cmd, &pf)?
    };
    let parameters = json!({
        "group": pf.group.name(),
        "torus_dim": pf.dim_t,
        "analysis": to_value(&pf.analysis)?,
    });
    Ok(Report {
        command: cmd,
        exact,
        parameters,
        result,
        shells,
    })
}

fn dispatch<S: Scalar>(cmd: Command, pf: &ProblemFile) -> Result<(Value, Vec<ShellRow>)> {
    match cmd {
        Command::CheckSystem => check_system::<S>(pf),
        Command::AnalyzeOperator => analyze_operator::<S>(pf),
        Command::Diophantine => diophantine(pf),
        Command::Counterexample => counterexample::<S>(pf),
        Command::Inequalities => inequalities::<S>(pf),
    }
}

fn gh_rows(gh: &GhReport) -> Vec<ShellRow> {
    gh.minima
        .iter()
        .map(|m| {
            let ratio = gh.fit.as_ref().map(|f| {
                let floor = f.c_certified * (1.0 + m.lambda_f64()).powf(-f.fit.rho);
                m.sigma_min / floor
            });
            ShellRow {
                lambda: m.lambda.to_string(),
                sigma_min: Some(m.sigma_min),
                witness: m.witness_label(),
                ratio,
            }
        })
        .collect()
}

fn check_system<S: Scalar>(pf: &ProblemFile) -> Result<(Value, Vec<ShellRow>)> {
    let sys = pf.system_spec::<S>()?;
    let lmax = pf.analysis.lambda_max()?;
    let gh = analyze_system(
        &sys,
        &lmax,
        &liouville_external(pf)?,
        &thresholds(&pf.analysis)?,
    )?;
    let hull = hull_checks(&sys)?;
    let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
    let comm: Vec<bool> = sys
        .maps
        .iter()
        .map(|a| commutativity_check(&sys.group, a, tol))
        .collect::<Result<_>>()?;
    let rows = gh_rows(&gh);
    Ok((
        json!({ "gh": to_value(&gh)?, "hull": to_value(&hull)?, "commutativity": comm }),
        rows,
    ))
}

/// The system `{a_l}` of the nonzero main terms.
fn operator_system<S: Scalar>(p: &OperatorSpec<S>) -> Result<Option<SystemSpec<S>>> {
    let maps: Vec<CoefficientMap<S>> = p
        .terms
        .iter()
        .filter(|t| !t.a.is_zero())
        .map(|t| t.a.clone())
        .collect();
    if maps.is_empty() {
        return Ok(None);
    }
    Ok(Some(SystemSpec::new(p.group.clone(), p.dim_t, maps)?))
}

fn analyze_operator<S: Scalar>(pf: &ProblemFile) -> Result<(Value, Vec<ShellRow>)> {
    let p = pf.operator_spec::<S>()?;
    let a = &pf.analysis;
    let lmax = a.lambda_max()?;
    let th = thresholds(a)?;
    let ell = tilde_p_ellipticity(&p)?;
    let tol = if S::EXACT { 0.0 } else { FLOAT_TOL };
    let comm: Vec<bool> = p
        .terms
        .iter()
        .map(|t| {
            if t.a.is_zero() {
                Ok(true)
            } else {
                commutativity_check(&p.group, &t.a, tol)
            }
        })
        .collect::<Result<_>>()?;
    let sys = operator_system(&p)?;
    let gh = match &sys {
        Some(s) => Some(analyze_system(s, &lmax, &[], &th)?),
        None => None,
    };
    let hull = match &sys {
        Some(s) => Some(hull_checks(s)?),
        None => None,
    };
    let cfg = ProbeConfig {
        lambda_max: a.probe_lambda_max()?,
        lambda0: a.lambda0()?,
        tau_radius: a.probe_tau_radius,
        trials: a.probe_trials,
        seed: a.seed()?,
    };
    let mut probe = final_inequality_probe(&p, &cfg)?;
    match &gh {
        Some(g) if g.verdict != GhVerdict::ConsistentGH => probe
            .warnings
            .push(format!("system check returned {:?}", g.verdict)),
        None => probe.warnings.push("no group fields".into()),
        _ => {}
    }
    let mut products = Vec::new();
    let level = a.probe_lambda_max()?;
    let pc = product_check_commuting(&p, &level, &th)?;
    if !pc.entries.is_empty() {
        products.push(to_value(&pc)?);
    }
    let pg = product_check_constant_group(&p, &lmax, &th)?;
    if !pg.entries.is_empty() {
        products.push(to_value(&pg)?);
    }
    let mut rows: Vec<ShellRow> = match &gh {
        Some(g) => gh_rows(g),
        None => Vec::new(),
    };
    for r in &mut rows {
        r.ratio = None;
    }
    for pr in &probe.rows {
        let l = pr.lambda.to_string();
        match rows.iter_mut().find(|r| r.lambda == l) {
            Some(r) => r.ratio = Some(pr.min_ratio),
            None => rows.push(ShellRow {
                lambda: l,
                sigma_min: None,
                witness: pr.witness.clone(),
                ratio: Some(pr.min_ratio),
            }),
        }
    }
    rows.sort_by(|x, y| {
        parse_rational(&x.lambda)
            .unwrap()
            .cmp(&parse_rational(&y.lambda).unwrap())
    });
    let result = json!({
        "ellipticity": to_value(&ell)?,
        "commutativity": comm,
        "gh": gh.as_ref().map(to_value).transpose()?,
        "hull": hull.as_ref().map(to_value).transpose()?,
        "probe": to_value(&probe)?,
        "product_checks": products,
    });
    Ok((result, rows))
}

/// Blocks from the system: exact range bases for rational data, otherwise
/// constant fields normalized to a unit first coordinate.
fn family(pf: &ProblemFile) -> Result<NsaFamily> {
    let m = match pf.group {
        GroupSpec::Torus(m) => m,
        GroupSpec::Su2 => {
            return Err(GhError::Spec(
                "the Diophantine conditions are stated on tori".into(),
            ))
        }
    };
    if pf.is_exact() {
        let sys = pf.system_spec::<Rational>()?;
        return NsaFamily::from_range_bases(m, &sys.range_bases(0.0)?);
    }
    let fields = pf
        .system
        .as_ref()
        .ok_or_else(|| GhError::Spec("missing [system] section".into()))?;
    let blocks = fields
        .iter()
        .enumerate()
        .map(|(l, f)| {
            let c = f.constant_only().ok_or_else(|| {
                GhError::Spec(format!("field {l}: irrational fields must be constant"))
            })?;
            if c.first() != Some(&RealSpec::rational(1, 1)) {
                return Err(GhError::Spec(format!(
                    "field {l}: irrational fields need first coordinate 1"
                )));
            }
            Ok(NsaBlock {
                j: vec![0],
                i: (1..m).collect(),
                v: vec![c[1..].to_vec()],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    NsaFamily::new(m, blocks)
}

fn diophantine(pf: &ProblemFile) -> Result<(Value, Vec<ShellRow>)> {
    let fam = family(pf)?;
    let v = verify_equivalence(&fam, pf.analysis.m, pf.analysis.radius)?;
    let mut lw = Vec::new();
    for base in pf.liouville_fields() {
        lw.push(to_value(&liouville_witnesses(
            &RealSpec::liouville(base),
            3,
        )?)?);
    }
    Ok((
        json!({ "family": to_value(&fam)?, "nsa": to_value(&v)?, "liouville_witnesses": lw }),
        Vec::new(),
    ))
}

#[derive(Serialize)]
struct Closure {
    witnesses: Vec<String>,
    lambdas: Vec<String>,
    check: crate::ghcheck::SingularCheck,
    u: SmoothnessReport,
    images: Vec<SmoothnessReport>,
    /// `u` is not smooth while every `L u` is.
    closure_holds: bool,
}

fn closure<S: Scalar>(
    sys: &SystemSpec<S>,
    dim_t: usize,
    modes: &[Mode],
    recorded: &[f64],
    sc: &SmoothnessConfig,
) -> Result<Closure> {
    let sol = build_singular_solution::<S>(&sys.group, dim_t, modes)?;
    let check = check_singular_solution(&sol, sys, recorded)?;
    let levels = &sol.lambdas;
    let u = classify_smoothness(&sol.u, Some(levels), sc)?;
    let images = generator_images(&sol, sys)?
        .iter()
        .map(|im| classify_smoothness(im, Some(levels), sc))
        .collect::<Result<Vec<_>>>()?;
    let closure_holds = !u.is_smooth() && images.iter().all(|r| r.is_smooth()) && check.all_ok;
    Ok(Closure {
        witnesses: modes.iter().map(|m| m.label()).collect(),
        lambdas: levels.iter().map(|l| l.to_string()).collect(),
        check,
        u,
        images,
        closure_holds,
    })
}

/// Singular solution for `X_1 + alpha X_2`, `alpha` Liouville: witnesses
/// `(-p_k, q_k)`, fields evaluated exactly with the truncated series.
pub fn liouville_closure(
    base: u32,
    truncation: u32,
    count: u32,
    sc: &SmoothnessConfig,
) -> Result<Value> {
    let ws = liouville_witnesses(&RealSpec::liouville(base), count)?;
    let (p, q) = liouville_partial(base, truncation);
    let alpha = Rational::new(p, q);
    let x = LieElement::new(vec![Rational::from_integer(1.into()), alpha]);
    let sys = SystemSpec::constant(GroupSpec::Torus(2), &[x])?;
    let modes: Vec<Mode> = ws
        .iter()
        .map(|w| {
            let p =
                w.p.to_i64()
                    .ok_or_else(|| GhError::PrecisionExhausted("witness exceeds i64".into()))?;
            let q =
                w.q.to_i64()
                    .ok_or_else(|| GhError::PrecisionExhausted("witness exceeds i64".into()))?;
            Ok(Mode::Torus(vec![-p, q]))
        })
        .collect::<Result<_>>()?;
    let recorded: Vec<f64> = ws.iter().map(|w| 10f64.powf(w.gap_log10_hi)).collect();
    let c = closure(&sys, 0, &modes, &recorded, sc)?;
    Ok(json!({ "liouville_witnesses": to_value(&ws)?, "closure": to_value(&c)? }))
}

fn counterexample<S: Scalar>(pf: &ProblemFile) -> Result<(Value, Vec<ShellRow>)> {
    let sys = pf.system_spec::<S>()?;
    let a = &pf.analysis;
    let lmax = a.lambda_max()?;
    let gh = analyze_system(&sys, &lmax, &liouville_external(pf)?, &thresholds(a)?)?;
    let sc = SmoothnessConfig {
        s_smooth: a.smooth_s,
        ..Default::default()
    };
    let rows = gh_rows(&gh);
    let summary = json!({ "verdict": to_value(&gh.verdict)?, "reason": gh.reason, "lambda_max": lmax.to_string() });
    let result = match gh.verdict {
        GhVerdict::FailZeroSymbol => {
            let w = zero_witness_modes(&gh, a.truncation);
            let modes: Vec<Mode> = w.iter().map(|x| x.0.clone()).collect();
            let rec: Vec<f64> = w.iter().map(|x| x.1).collect();
            let c = closure(&sys, 0, &modes, &rec, &sc)?;
            json!({ "gh": summary, "singular_solution": to_value(&c)? })
        }
        GhVerdict::FailSuperpolynomial if !pf.liouville_fields().is_empty() => {
            let base = pf.liouville_fields()[0];
            json!({ "gh": summary, "singular_solution": liouville_closure(base, 5, 3, &sc)? })
        }
        _ => json!({ "gh": summary, "singular_solution": Value::Null }),
    };
    Ok((result, rows))
}

fn inequalities<S: Scalar>(pf: &ProblemFile) -> Result<(Value, Vec<ShellRow>)> {
    let a = &pf.analysis;
    let seed = a.seed()?;
    let mut out = serde_json::Map::new();
    let mut fields: Vec<TorusField<S>> = Vec::new();
    if pf.operator.is_some() {
        let p = pf.operator_spec::<S>()?.without_remainder();
        let shells: Vec<_> = enumerate_shells(&p.group, &a.probe_lambda_max()?)?;
        let taus = freq_box(p.dim_t, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        let mut exact_zero = true;
        for k in 0..a.energy_samples {
            let sh = &shells[k % shells.len()];
            let psi = random_data::<S, _>(&mut rng, &p.group, &taus, &sh.modes)?;
            let r = energy_identity_residual(&p, &psi)?;
            exact_zero &= r.is_zero();
            worst = worst.max(Complex::new(r.re.to_f64(), r.im.to_f64()).norm());
        }
        out.insert(
            "energy".into(),
            json!({ "samples": a.energy_samples, "max_residual": worst, "exact_zero": S::EXACT && exact_zero }),
        );
        fields = p
            .terms
            .iter()
            .map(|t| t.w.clone())
            .filter(|w| !w.is_zero())
            .collect();
    }
    if fields.is_empty() && pf.dim_t <= 1 {
        fields.push(TorusField::new(1, vec![TrigPoly::cos(1, 0, 1, S::one())])?);
    }
    let graph: Vec<Value> = fields
        .iter()
        .map(|w| {
            to_value(&graph_norm_bound(
                w,
                a.graph_trials,
                a.graph_bandwidth,
                seed,
            )?)
        })
        .collect::<Result<_>>()?;
    out.insert("graph_norm".into(), Value::Array(graph));
    let delta = rational_to_f64(&parse_rational(&a.poincare_delta)?);
    out.insert(
        "poincare".into(),
        to_value(&poincare_estimate(
            delta,
            a.poincare_sets,
            a.poincare_max_frequency,
            seed,
        )?)?,
    );
    let sweep_max = a.probe_lambda_max()?;
    let mut cas = 0.0f64;
    let mut skew = 0.0f64;
    let mut margin = f64::INFINITY;
    let mut shells_checked = 0usize;
    for sh in enumerate_shells(&pf.group, &sweep_max)? {
        cas = cas.max(casimir_residual::<f64>(&pf.group, &sh)?);
        for k in 0..pf.group.dim() {
            let x = LieElement::<f64>::basis(pf.group.dim(), k);
            skew = skew.max(anti_hermitian_defect(&shell_block(&pf.group, &x, &sh)?));
            margin = margin.min(eigen_bound_margin(&pf.group, &x, &sh)?);
        }
        shells_checked += 1;
    }
    out.insert(
        "casimir".into(),
        json!({ "shells": shells_checked, "max_residual": cas, "max_anti_hermitian_defect": skew, "min_eigen_bound_margin": margin }),
    );
    let ws = weyl_partial_sums(&pf.group, &a.lambda_max()?);
    let monotone = ws.windows(2).all(|w| w[1].1 >= w[0].1);
    let last = ws.last().map(|x| x.1).unwrap_or(0.0);
    out.insert(
        "weyl".into(),
        json!({ "terms": ws.len(), "partial_sum": last, "bound": weyl_bound(&pf.group), "monotone": monotone, "bounded": last <= weyl_bound(&pf.group) }),
    );
    Ok((Value::Object(out), Vec::new()))
}

/// Renders the report; JSON object keys are sorted, output ends in a newline.
pub fn render(r: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let v = json!({
                "command": r.command.name(),
                "tool": "ghlab",
                "version": VERSION,
                "scalar": if r.exact { "exact" } else { "float" },
                "parameters": r.parameters,
                "result": r.result,
            });
            let mut s =
                serde_json::to_string_pretty(&v).map_err(|e| GhError::Numeric(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["lambda", "sigma_min", "witness", "ratio"])
                .map_err(|e| GhError::Numeric(e.to_string()))?;
            let f = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            for row in &r.shells {
                w.write_record([
                    row.lambda.clone(),
                    f(row.sigma_min),
                    row.witness.clone(),
                    f(row.ratio),
                ])
                .map_err(|e| GhError::Numeric(e.to_string()))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| GhError::Numeric(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| GhError::Numeric(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MAIN: &str = r#"
[group]
kind = "torus"
dim = 2
[[system.fields]]
constant = ["1", "1/2"]
[[system.fields]]
constant = ["1/3", "1"]
[analysis]
lambda_max = "400"
"#;

    #[test]
    fn main_example_is_consistent() {
        let pf = ProblemFile::parse_str(MAIN).unwrap();
        let r = run(Command::CheckSystem, &pf, &Overrides::default()).unwrap();
        assert_eq!(r.result["gh"]["verdict"], "consistent-gh");
        let csv = render(&r, Format::Csv).unwrap();
        assert_eq!(csv.lines().count(), r.shells.len() + 1);
        assert!(csv.starts_with("lambda,sigma_min,witness,ratio\n"));
    }

    #[test]
    fn json_round_trip_and_determinism() {
        let pf = ProblemFile::parse_str(MAIN).unwrap();
        let a = render(
            &run(Command::CheckSystem, &pf, &Overrides::default()).unwrap(),
            Format::Json,
        )
        .unwrap();
        let b = render(
            &run(Command::CheckSystem, &pf, &Overrides::default()).unwrap(),
            Format::Json,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", a);
    }

    #[test]
    fn three_shell_table() {
        let pf = ProblemFile::parse_str(&MAIN.replace("\"400\"", "\"2\"")).unwrap();
        let r = run(Command::CheckSystem, &pf, &Overrides::default()).unwrap();
        assert_eq!(r.shells.len(), 2);
        let pf = ProblemFile::parse_str(&MAIN.replace("\"400\"", "\"4\"")).unwrap();
        let r = run(Command::CheckSystem, &pf, &Overrides::default()).unwrap();
        // shells 1, 2, 4
        assert_eq!(render(&r, Format::Csv).unwrap().lines().count(), 4);
    }

    #[test]
    fn seed_is_mandatory() {
        let pf = ProblemFile::parse_str(MAIN).unwrap();
        let e = run(Command::Inequalities, &pf, &Overrides::default()).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
