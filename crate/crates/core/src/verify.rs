//! Named identity checks and the suite runner.
//!
//! Every check produces a [`CheckResult`]; computational failures become
//! failed results with the error text in `note`, so a suite always completes.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fourier;
use crate::measures::{BuiltIn, MeasureFamily, Support};
use crate::orthosys::{cancellation_scale, scaled_error};
use crate::poly::Polynomial;
use crate::secondary_chain::{pade_check, AssocRoute, SecondaryChain};

pub const SCHEMA_VERSION: u32 = 1;

/// Every registered check, in report order.
pub const CHECK_IDS: [&str; 16] = [
    "assoc_orthogonality",
    "assoc_routes",
    "chain_moments",
    "chebyshev_identity",
    "continued_fraction",
    "density_normalization",
    "eigenproduct",
    "fixed_point",
    "genfun",
    "identity_43",
    "identity_61",
    "isometry",
    "multiint_vs_direct",
    "pade_asym",
    "reduction",
    "wronskian",
];

/// Check parameters: `n`, `tolerance` and check-specific keys.
pub type Params = BTreeMap<String, Value>;

/// A real or complex number in a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Number::Real(v)
    }
}

impl From<Complex64> for Number {
    fn from(z: Complex64) -> Self {
        Number::Complex { re: z.re, im: z.im }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub schema_version: u32,
    pub check_id: String,
    pub family: String,
    pub params: Params,
    pub expected: Number,
    pub actual: Number,
    /// Relative error, or absolute error where the expected value is zero.
    pub rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub results: Vec<CheckResult>,
    pub summary: SuiteSummary,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }
}

/// Default tolerance by support: compact families are checked tighter than
/// those whose reducers come from special-function tails.
pub fn default_tolerance(family: &MeasureFamily) -> f64 {
    if family.support().is_compact() {
        1e-6
    } else {
        1e-4
    }
}

fn param_usize(params: &Params, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_u64()
            .map(|n| n as usize)
            .ok_or_else(|| Error::InvalidInput(format!("parameter `{key}` must be a non-negative integer"))),
    }
}

fn param_f64(params: &Params, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| Error::InvalidInput(format!("parameter `{key}` must be a number"))),
    }
}

/// Outcome of one check before packaging.
struct Outcome {
    expected: Number,
    actual: Number,
    error: f64,
    note: Option<String>,
    /// Extra condition that must hold besides `error <= tolerance`.
    also: bool,
}

impl Outcome {
    fn real(expected: f64, actual: f64) -> Self {
        let error = if expected == 0.0 {
            actual.abs()
        } else {
            ((actual - expected) / expected).abs()
        };
        Self { expected: expected.into(), actual: actual.into(), error, note: None, also: true }
    }

    /// A discrepancy that should be zero, reported as an absolute error.
    fn zero(actual: f64) -> Self {
        Self { expected: 0.0.into(), actual: actual.into(), error: actual.abs(), note: None, also: true }
    }

    fn with_note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }
}

fn needs_closed_forms(check_id: &str) -> bool {
    !matches!(check_id, "wronskian" | "assoc_routes" | "chebyshev_identity")
}

/// Runs one check on `family`. Fails only for an unknown check id or
/// malformed parameters; numerical failures are reported in the result.
pub fn run_check(check_id: &str, family: &MeasureFamily, params: &Params) -> Result<CheckResult> {
    if !CHECK_IDS.contains(&check_id) {
        return Err(Error::UnknownCheck(check_id.to_string()));
    }
    let tolerance = param_f64(params, "tolerance", default_tolerance_for(check_id, family))?;
    if !(tolerance > 0.0 && tolerance < 1.0) {
        return Err(Error::InvalidInput(format!("tolerance must lie in (0, 1), got {tolerance}")));
    }
    let outcome = match evaluate(check_id, family, params) {
        Ok(o) => o,
        Err(e @ Error::InvalidInput(_)) => return Err(e),
        Err(e) => Outcome {
            expected: f64::NAN.into(),
            actual: f64::NAN.into(),
            error: f64::INFINITY,
            note: Some(e.to_string()),
            also: false,
        },
    };
    let passed = outcome.also && outcome.error <= tolerance;
    Ok(CheckResult {
        schema_version: SCHEMA_VERSION,
        check_id: check_id.to_string(),
        family: family.name().to_string(),
        params: params.clone(),
        expected: outcome.expected,
        actual: outcome.actual,
        rel_error: outcome.error,
        tolerance,
        passed,
        note: outcome.note,
    })
}

fn default_tolerance_for(check_id: &str, family: &MeasureFamily) -> f64 {
    match check_id {
        "wronskian" | "chebyshev_identity" | "continued_fraction" => 1e-9,
        "assoc_routes" | "fixed_point" => 1e-8,
        "pade_asym" => 1e-2,
        "genfun" => 1e-10,
        "multiint_vs_direct" | "isometry" | "reduction" | "eigenproduct" => 1e-7,
        "assoc_orthogonality" => 1e-6,
        _ => default_tolerance(family),
    }
}

fn chain_for(family: &MeasureFamily) -> Result<SecondaryChain> {
    SecondaryChain::new(family, family.n_max() - 1)
}

/// Deterministic test polynomial with coefficients in [-1, 1].
pub fn sample_polynomial(degree: usize, seed: u64) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Polynomial::new((0..=degree).map(|_| rng.gen_range(-1.0..=1.0)).collect())
}

fn far_point(support: &Support, r: f64) -> Complex64 {
    support.far_point(r)
}

fn probe_points() -> [Complex64; 10] {
    [
        Complex64::new(2.0, 0.0),
        Complex64::new(-1.5, 0.0),
        Complex64::new(0.5, 0.5),
        Complex64::new(0.2, -0.8),
        Complex64::new(1.5, 1.5),
        Complex64::new(-0.5, 2.0),
        Complex64::new(3.0, -1.0),
        Complex64::new(0.9, 0.3),
        Complex64::new(-2.5, -0.5),
        Complex64::new(0.0, 4.0),
    ]
}

fn evaluate(check_id: &str, family: &MeasureFamily, params: &Params) -> Result<Outcome> {
    if needs_closed_forms(check_id) && !family.has_closed_forms() {
        return Err(Error::CapabilityMissing {
            family: family.name().to_string(),
            capability: "the closed forms this check needs",
        });
    }
    let n = param_usize(params, "n", 1)?;
    match check_id {
        "identity_43" => identity_43(family, n),
        "identity_61" => {
            require(n >= 1, "identity_61 needs n >= 1")?;
            let chain = chain_for(family)?;
            let (s, _) = family.recurrence(n)?;
            let t = family.recurrence(n - 1)?.1;
            let value = chain.integrate_level(n, |x| x, 1e-11)?.value * t * t;
            // The mean of rho_n can be zero; scale by its spread in that case.
            let expected = s * t * t;
            let mut o = Outcome::real(expected, value);
            o.error = (value - expected).abs() / expected.abs().max(t * t * family.recurrence(n)?.1);
            Ok(o)
        }
        "density_normalization" => {
            let chain = chain_for(family)?;
            Ok(Outcome::real(1.0, chain.integrate_level(n, |_| 1.0, 1e-11)?.value))
        }
        "chain_moments" => {
            let chain = chain_for(family)?;
            let (s, t) = family.recurrence(n)?;
            let c1 = chain.integrate_level(n, |x| x, 1e-11)?.value;
            let c2 = chain.integrate_level(n, |x| x * x, 1e-11)?.value;
            let d0 = c2 - c1 * c1;
            let e_mean = (c1 - s).abs() / s.abs().max(t);
            let e_var = ((d0 - t * t) / (t * t)).abs();
            let mut o = Outcome::real(t * t, d0);
            o.error = e_mean.max(e_var);
            Ok(o.with_note(format!("c1 = {c1} (s_n = {s}), d0 = {d0} (t_n^2 = {})", t * t)))
        }
        "wronskian" => {
            let sys = crate::orthosys::generate(family, n + 1)?;
            let t = family.recurrence(n)?.1;
            let w = sys.wronskian(n);
            let mut o = Outcome::real(1.0 / t, w.coeff(0));
            o.error = sys.wronskian_error(n)?;
            Ok(o.with_note("coefficient errors scaled by cancelling-product magnitudes".into()))
        }
        "chebyshev_identity" => {
            require(family.builtin_kind() == Some(BuiltIn::Chebyshev2), "chebyshev_identity applies to chebyshev2")?;
            require(n >= 1, "chebyshev_identity needs n >= 1")?;
            let sys = crate::orthosys::generate(family, n + 1)?;
            let mut o = Outcome::real(1.0, sys.turan(n).coeff(0));
            o.error = sys.turan_error(n);
            Ok(o)
        }
        "fixed_point" => {
            require(
                matches!(family.builtin_kind(), Some(BuiltIn::Chebyshev2 | BuiltIn::Chebyshev2Unit)),
                "fixed_point applies to the chebyshev families",
            )?;
            let chain = chain_for(family)?;
            let Support::Compact { a, b } = family.support() else { unreachable!() };
            let mut worst: f64 = 0.0;
            for i in 0..=100 {
                let x = a + (b - a) * i as f64 / 100.0;
                worst = worst.max((chain.density(n, x)? - family.density(x)?).abs());
            }
            Ok(Outcome::zero(worst).with_note("max |rho_n - rho| over 101 grid points".into()))
        }
        "pade_asym" => {
            let chain = chain_for(family)?;
            let r = param_f64(params, "radius", 1e4)?;
            let z = far_point(&family.support(), r);
            let p = pade_check(&chain, n, z)?;
            Ok(Outcome {
                expected: p.rhs.into(),
                actual: p.lhs.into(),
                error: p.ratio_error(),
                note: Some(format!("z = {z}")),
                also: true,
            })
        }
        "continued_fraction" => {
            let chain = chain_for(family)?;
            let mut worst: f64 = 0.0;
            let mut used = 0;
            for z in probe_points() {
                if family.support().distance(z) < 0.25 {
                    continue;
                }
                used += 1;
                let exact = family.stieltjes(z)?;
                let v = chain.continued_fraction_eval(n, z)?;
                worst = worst.max((v - exact).norm() / exact.norm());
            }
            let mut o = Outcome::zero(worst);
            o.expected = 0.0.into();
            Ok(o.with_note(format!("max relative error over {used} points, depth {n}")))
        }
        "assoc_routes" => {
            let chain = chain_for(family)?;
            let size = param_usize(params, "size", 4)?;
            let k = n;
            let shifted = chain.associated_system(k, size, AssocRoute::ShiftedRecurrence)?;
            let closed = chain.associated_system(k, size, AssocRoute::ClosedForm)?;
            let matrix = chain.associated_system(k, size, AssocRoute::MatrixProduct)?;
            let b = chain.base();
            let tk = family.recurrence(k)?.1;
            let mut worst: f64 = 0.0;
            for j in 0..=size {
                let idx = j + k + 1;
                let mut scale = cancellation_scale(&[(b.p(k), b.q(idx)), (b.q(k), b.p(idx))]);
                scale.iter_mut().for_each(|s| *s *= tk);
                worst = worst.max(scaled_error(closed.p(j), shifted.p(j), &scale));
                worst = worst.max(scaled_error(matrix.p(j), shifted.p(j), &scale));
            }
            Ok(Outcome::zero(worst).with_note(format!("associated system of level {}, P_0..P_{size}", k + 1)))
        }
        "assoc_orthogonality" => {
            require(n >= 1, "assoc_orthogonality needs n >= 1")?;
            let chain = chain_for(family)?;
            let size = param_usize(params, "size", 4)?;
            let sys = chain.associated_system(n - 1, size, AssocRoute::ClosedForm)?;
            let mut worst: f64 = 0.0;
            for i in 0..=size {
                for j in i..=size {
                    let (pi, pj) = (sys.p(i), sys.p(j));
                    let v = chain.integrate_level(n, |x| pi.eval(x) * pj.eval(x), 1e-11)?.value;
                    worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
            Ok(Outcome::zero(worst).with_note(format!("max |<P_i, P_j> - delta_ij| at level {n}")))
        }
        "multiint_vs_direct" => {
            let chain = chain_for(family)?;
            let degree = param_usize(params, "degree", 6)?;
            let seed = param_usize(params, "seed", 0)? as u64;
            let m = param_usize(params, "m", 4)?;
            let f = sample_polynomial(degree, seed);
            let direct = fourier::fourier_direct(chain.base(), |x| f.eval(x), n)?;
            let multi = fourier::fourier_multiint(&chain, |x| f.eval(x), n, m)?;
            let mut o = Outcome::real(direct, multi);
            o.error = (multi - direct).abs();
            Ok(o.with_note("absolute error".into()))
        }
        "isometry" => {
            let chain = chain_for(family)?;
            let seed = param_usize(params, "seed", 0)? as u64;
            let f = sample_polynomial(param_usize(params, "degree_f", 5)?, seed);
            let g = sample_polynomial(param_usize(params, "degree_g", 4)?, seed + 1);
            let r = fourier::isometry_check(&chain, &f, &g, n)?;
            let mut o = Outcome::real(r.lhs, r.rhs);
            o.error = r.abs_error();
            Ok(o.with_note("absolute error".into()))
        }
        "reduction" => {
            require(n >= 1, "reduction needs n >= 1")?;
            let chain = chain_for(family)?;
            let seed = param_usize(params, "seed", 0)? as u64;
            let f = sample_polynomial(param_usize(params, "degree", 5)?, seed);
            let r = fourier::reduction_check(&chain, &f, chain.base().p(n), n - 1)?;
            let mut o = Outcome::real(r.lhs, r.rhs);
            o.error = r.abs_error();
            Ok(o.with_note(format!("<f, P_{n}> against the level-{n} form; absolute error")))
        }
        "eigenproduct" => {
            let chain = chain_for(family)?;
            let a = param_f64(params, "a", 1.0)?;
            let direct = fourier::fourier_direct(chain.base(), |x| 1.0 / (x + a), n)?;
            let product = fourier::eigen_product(&chain, a, n)?;
            let mut o = Outcome::real(direct, product);
            o.error = (product - direct).abs();
            Ok(o.with_note("absolute error".into()))
        }
        "genfun" => {
            require(
                family.builtin_kind() == Some(BuiltIn::Chebyshev2Unit),
                "genfun applies to chebyshev2_01",
            )?;
            let t = param_f64(params, "t", 0.3)?;
            let x = param_f64(params, "x", 0.5)?;
            let terms = param_usize(params, "terms", 30)?;
            let r = fourier::generating_function_check(t, x, terms)?;
            let mut o = Outcome::real(r.closed_form, r.partial_sum);
            o.error = r.abs_error();
            Ok(o.with_note("absolute error".into()))
        }
        _ => Err(Error::UnknownCheck(check_id.to_string())),
    }
}

fn require(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidInput(what.to_string()))
    }
}

/// The closed forms quoted for the worked examples, by integrand index `m`.
pub fn example_closed_form(family: BuiltIn, m: usize) -> Option<f64> {
    let m = m as f64;
    match family {
        BuiltIn::Lebesgue01 => Some((m + 1.0).powi(2) / (4.0 * (2.0 * m + 1.0) * (2.0 * m + 3.0))),
        BuiltIn::Exponential => Some((m + 1.0).powi(2)),
        BuiltIn::Gaussian => Some(m + 1.0),
        BuiltIn::Chebyshev2 | BuiltIn::Chebyshev2Unit => None,
    }
}

/// `int rho / ((P_m phi/2 - Q_m)^2 + pi^2 rho^2 P_m^2) = t_m^2` with `m = n - 1`.
fn identity_43(family: &MeasureFamily, n: usize) -> Result<Outcome> {
    require(n >= 1, "identity_43 needs n >= 1")?;
    let m = n - 1;
    let chain = SecondaryChain::new(family, family.n_max() - 1)?;
    let actual = crate::secondary_chain::integrate_fallible(
        |x| chain.identity_integrand(m, x),
        &family.support(),
        1e-11,
    )?
    .value;
    let t = family.recurrence(m)?.1;
    let expected = t * t;
    let mut o = Outcome::real(expected, actual);
    if let Some(kind) = family.builtin_kind() {
        if let Some(at_m) = example_closed_form(kind, m) {
            let at_n = example_closed_form(kind, n).unwrap_or(f64::NAN);
            let err_m = ((actual - at_m) / at_m).abs();
            let err_n = ((actual - at_n) / at_n).abs();
            o.error = o.error.max(err_m);
            let matched = if err_m <= err_n { "integrand index" } else { "level index" };
            o = o.with_note(format!(
                "closed form at integrand index m={m}: {at_m} (rel err {err_m:.2e}); \
                 at level index n={n}: {at_n} (rel err {err_n:.2e}); matching reading: {matched}"
            ));
        }
    }
    Ok(o)
}

/// The parameter sweep used by [`run_suite`] for one family.
pub fn suite_plan(family: &MeasureFamily, max_n: usize) -> Vec<(&'static str, Params)> {
    let kind = family.builtin_kind();
    let compact = family.support().is_compact();
    let mut plan: Vec<(&'static str, Params)> = Vec::new();
    let mut push = |id: &'static str, p: Value| {
        let Value::Object(map) = p else { unreachable!() };
        plan.push((id, map.into_iter().collect()));
    };
    let closed = family.has_closed_forms();
    for n in 0..=max_n.min(10) {
        push("wronskian", json!({ "n": n }));
    }
    for k in 0..max_n.min(4) {
        if k + 6 <= family.n_max() {
            push("assoc_routes", json!({ "n": k }));
        }
    }
    if kind == Some(BuiltIn::Chebyshev2) {
        for n in 1..=max_n.min(10) {
            push("chebyshev_identity", json!({ "n": n }));
        }
    }
    if !closed {
        return plan;
    }
    for n in 1..=max_n {
        push("identity_43", json!({ "n": n }));
        push("identity_61", json!({ "n": n }));
        push("density_normalization", json!({ "n": n }));
        if compact {
            push("chain_moments", json!({ "n": n }));
        }
    }
    for n in 0..=max_n {
        push("pade_asym", json!({ "n": n }));
    }
    for d in 0..=max_n.min(8) {
        push("continued_fraction", json!({ "n": d }));
    }
    if matches!(kind, Some(BuiltIn::Chebyshev2 | BuiltIn::Chebyshev2Unit)) {
        for n in 1..=max_n {
            push("fixed_point", json!({ "n": n }));
        }
    }
    if compact {
        for n in 1..=max_n.min(3) {
            push("assoc_orthogonality", json!({ "n": n }));
        }
        for n in 0..=max_n.min(3) {
            push("multiint_vs_direct", json!({ "n": n }));
            push("isometry", json!({ "n": n }));
        }
        for n in 1..=max_n.min(3) {
            push("reduction", json!({ "n": n }));
        }
    }
    if family.support().distance(Complex64::new(-1.0, 0.0)) > 0.0 && kind != Some(BuiltIn::Chebyshev2) {
        for n in 0..=max_n {
            push("eigenproduct", json!({ "n": n, "a": 1.0 }));
        }
    } else if kind == Some(BuiltIn::Chebyshev2) {
        for n in 0..=max_n {
            push("eigenproduct", json!({ "n": n, "a": 2.0 }));
        }
    }
    if kind == Some(BuiltIn::Chebyshev2Unit) {
        for (t, x) in [(0.3, 0.5), (-0.4, 0.25), (0.45, 0.9)] {
            push("genfun", json!({ "t": t, "x": x, "terms": 30 }));
        }
    }
    plan
}

/// Runs the full sweep over `families`; results are sorted by check id,
/// family and parameters.
pub fn run_suite(families: &[MeasureFamily], max_n: usize, only: Option<&str>) -> Result<SuiteReport> {
    if let Some(id) = only {
        if !CHECK_IDS.contains(&id) {
            return Err(Error::UnknownCheck(id.to_string()));
        }
    }
    let mut results = Vec::new();
    for family in families {
        for (id, params) in suite_plan(family, max_n) {
            if only.is_some_and(|o| o != id) {
                continue;
            }
            results.push(run_check(id, family, &params)?);
        }
    }
    results.sort_by(|a, b| {
        (a.check_id.as_str(), a.family.as_str())
            .cmp(&(b.check_id.as_str(), b.family.as_str()))
            .then_with(|| params_key(&a.params).cmp(&params_key(&b.params)))
    });
    let passed = results.iter().filter(|r| r.passed).count();
    let summary = SuiteSummary { total: results.len(), passed, failed: results.len() - passed };
    Ok(SuiteReport { results, summary })
}

/// Sort key: integers compare numerically, everything else by text.
fn params_key(p: &Params) -> Vec<(String, i128, String)> {
    p.iter()
        .map(|(k, v)| {
            let num = v.as_f64().map(|x| (x * 1e6) as i128).unwrap_or(0);
            (k.clone(), num, v.to_string())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::get_family;

    fn params(v: Value) -> Params {
        let Value::Object(m) = v else { panic!() };
        m.into_iter().collect()
    }

    #[test]
    fn identity_43_examples() {
        let r = run_check("identity_43", &get_family("lebesgue01").unwrap(), &params(json!({"n": 1}))).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(matches!(r.expected, Number::Real(v) if (v - 1.0 / 12.0).abs() < 1e-16));
        assert!(r.note.as_deref().unwrap().contains("matching reading: integrand index"));
        let r = run_check("identity_43", &get_family("exponential").unwrap(), &params(json!({"n": 1}))).unwrap();
        assert!(r.passed && r.expected == Number::Real(1.0), "{r:?}");
        let r = run_check("identity_43", &get_family("gaussian").unwrap(), &params(json!({"n": 3}))).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(matches!(r.expected, Number::Real(v) if (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn unknown_check_is_an_error() {
        let f = get_family("lebesgue01").unwrap();
        assert!(matches!(run_check("no_such", &f, &Params::new()), Err(Error::UnknownCheck(_))));
        assert!(matches!(run_suite(&[f], 2, Some("no_such")), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn computational_errors_become_failed_results() {
        let f = get_family("lebesgue01").unwrap();
        let r = run_check("density_normalization", &f, &params(json!({"n": 40}))).unwrap();
        assert!(!r.passed && r.note.is_some());
    }

    #[test]
    fn suites_pass() {
        let cheb = run_suite(&[get_family("chebyshev2").unwrap()], 4, None).unwrap();
        let failures: Vec<_> = cheb.results.iter().filter(|r| !r.passed).collect();
        assert!(failures.is_empty(), "{failures:#?}");
        let leb = run_suite(&[get_family("lebesgue01").unwrap()], 5, None).unwrap();
        let failures: Vec<_> = leb.results.iter().filter(|r| !r.passed).collect();
        assert!(failures.is_empty(), "{failures:#?}");
        let empty = run_suite(&[], 4, None).unwrap();
        assert!(empty.results.is_empty() && empty.all_passed());
    }

    #[test]
    fn suite_order_is_deterministic() {
        let fams = [get_family("chebyshev2_01").unwrap(), get_family("chebyshev2").unwrap()];
        let a = run_suite(&fams, 2, None).unwrap();
        let b = run_suite(&fams, 2, None).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let keys: Vec<_> = a.results.iter().map(|r| (r.check_id.clone(), r.family.clone())).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    /// Each identity of the theory maps to at least one registered check.
    #[test]
    fn registry_is_complete() {
        let required = [
            ("density formula", "density_normalization"),
            ("integral identity", "identity_43"),
            ("first-moment identity", "identity_61"),
            ("isometry", "isometry"),
            ("level isometry", "isometry"),
            ("chain reduction", "reduction"),
            ("associated polynomials", "assoc_routes"),
            ("associated orthonormality", "assoc_orthogonality"),
            ("worked examples", "identity_43"),
            ("generating function", "genfun"),
            ("wronskian", "wronskian"),
            ("pade", "pade_asym"),
            ("chain moments", "chain_moments"),
            ("fixed point", "fixed_point"),
            ("multiple integral", "multiint_vs_direct"),
            ("eigenfunction", "eigenproduct"),
            ("continued fraction", "continued_fraction"),
            ("chebyshev identity", "chebyshev_identity"),
        ];
        for (what, id) in required {
            assert!(CHECK_IDS.contains(&id), "{what} has no check");
        }
        let mut sorted = CHECK_IDS.to_vec();
        sorted.sort();
        assert_eq!(sorted, CHECK_IDS.to_vec());
        let planned: std::collections::BTreeSet<&str> = BuiltIn::ALL
            .iter()
            .flat_map(|b| suite_plan(&MeasureFamily::builtin(*b).unwrap(), 4).into_iter().map(|(id, _)| id))
            .collect();
        for id in CHECK_IDS {
            assert!(planned.contains(id), "{id} never runs in the suite");
        }
    }

    #[test]
    fn result_round_trips_through_json() {
        let r = run_check("pade_asym", &get_family("gaussian").unwrap(), &params(json!({"n": 1}))).unwrap();
        let line = serde_json::to_string(&r).unwrap();
        let back: CheckResult = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
        assert!(line.contains("\"schema_version\":1"));
    }
}
