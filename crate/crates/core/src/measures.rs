//! Catalog of probability measures: closed-form density, reducer, Stieltjes
//! transform and three-term recurrence coefficients.
//!
//! Recurrence convention: the orthonormal polynomials satisfy
//! `x P_n = t_n P_{n+1} + s_n P_n + t_{n-1} P_{n-1}`, and `recurrence(n)`
//! returns `(s_n, t_n)`.
//!
//! The reducer is `phi(x) = lim S(x - i eps) + S(x + i eps)`, i.e. twice the
//! real part of the boundary value of the Stieltjes transform. Its sign is
//! fixed by that limit, not by convention.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::special;

pub const DEFAULT_N_MAX: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Support {
    Compact { a: f64, b: f64 },
    HalfLine { a: f64 },
    RealLine,
}

impl Support {
    /// Euclidean distance from `z` to the support.
    pub fn distance(&self, z: Complex64) -> f64 {
        match *self {
            Support::Compact { a, b } => {
                if z.re < a {
                    (z - a).norm()
                } else if z.re > b {
                    (z - b).norm()
                } else {
                    z.im.abs()
                }
            }
            Support::HalfLine { a } => {
                if z.re < a {
                    (z - a).norm()
                } else {
                    z.im.abs()
                }
            }
            Support::RealLine => z.im.abs(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Compact { a, b } => x >= a && x <= b,
            Support::HalfLine { a } => x >= a,
            Support::RealLine => x.is_finite(),
        }
    }

    pub fn is_interior(&self, x: f64) -> bool {
        match *self {
            Support::Compact { a, b } => x > a && x < b,
            Support::HalfLine { a } => x > a && x.is_finite(),
            Support::RealLine => x.is_finite(),
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(self, Support::Compact { .. })
    }

    /// A point at distance ~`r` from the origin, off the support, along the
    /// real axis where possible.
    pub fn far_point(&self, r: f64) -> Complex64 {
        match self {
            Support::Compact { .. } => Complex64::new(r, 0.0),
            Support::HalfLine { .. } => Complex64::new(-r, 0.0),
            Support::RealLine => Complex64::new(0.0, r),
        }
    }
}

impl fmt::Display for Support {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Support::Compact { a, b } => write!(f, "[{a}, {b}]"),
            Support::HalfLine { a } => write!(f, "[{a}, inf)"),
            Support::RealLine => write!(f, "(-inf, inf)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltIn {
    /// Uniform density on [0, 1] (shifted Legendre).
    Lebesgue01,
    /// `exp(-x)` on [0, inf) (Laguerre).
    Exponential,
    /// Standard normal density (Hermite).
    Gaussian,
    /// `(2/pi) sqrt(1 - x^2)` on [-1, 1] (Chebyshev, second kind).
    Chebyshev2,
    /// `(8/pi) sqrt(x (1 - x))` on [0, 1].
    Chebyshev2Unit,
}

impl BuiltIn {
    pub const ALL: [BuiltIn; 5] = [
        BuiltIn::Lebesgue01,
        BuiltIn::Exponential,
        BuiltIn::Gaussian,
        BuiltIn::Chebyshev2,
        BuiltIn::Chebyshev2Unit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltIn::Lebesgue01 => "lebesgue01",
            BuiltIn::Exponential => "exponential",
            BuiltIn::Gaussian => "gaussian",
            BuiltIn::Chebyshev2 => "chebyshev2",
            BuiltIn::Chebyshev2Unit => "chebyshev2_01",
        }
    }

    pub fn support(self) -> Support {
        match self {
            BuiltIn::Lebesgue01 | BuiltIn::Chebyshev2Unit => Support::Compact { a: 0.0, b: 1.0 },
            BuiltIn::Exponential => Support::HalfLine { a: 0.0 },
            BuiltIn::Gaussian => Support::RealLine,
            BuiltIn::Chebyshev2 => Support::Compact { a: -1.0, b: 1.0 },
        }
    }

    pub fn recurrence(self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        match self {
            BuiltIn::Lebesgue01 => {
                (0.5, (nf + 1.0) / (2.0 * ((2.0 * nf + 1.0) * (2.0 * nf + 3.0)).sqrt()))
            }
            BuiltIn::Exponential => (2.0 * nf + 1.0, nf + 1.0),
            BuiltIn::Gaussian => (0.0, (nf + 1.0).sqrt()),
            BuiltIn::Chebyshev2 => (0.0, 0.5),
            BuiltIn::Chebyshev2Unit => (0.5, 0.25),
        }
    }

    fn density(self, x: f64) -> f64 {
        if !self.support().contains(x) {
            return 0.0;
        }
        match self {
            BuiltIn::Lebesgue01 => 1.0,
            BuiltIn::Exponential => (-x).exp(),
            BuiltIn::Gaussian => (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
            BuiltIn::Chebyshev2 => 2.0 / PI * ((1.0 - x) * (1.0 + x)).sqrt(),
            BuiltIn::Chebyshev2Unit => 8.0 / PI * (x * (1.0 - x)).sqrt(),
        }
    }

    fn reducer(self, x: f64) -> f64 {
        match self {
            BuiltIn::Lebesgue01 => 2.0 * (x / (1.0 - x)).ln(),
            BuiltIn::Exponential => 2.0 * special::exp_neg_ei(x),
            // 2 sqrt(pi/2) exp(-x^2/2) erfi(x/sqrt 2) = 2 sqrt 2 F(x/sqrt 2)
            BuiltIn::Gaussian => 2.0 * 2f64.sqrt() * special::dawson(x / 2f64.sqrt()),
            BuiltIn::Chebyshev2 => 4.0 * x,
            BuiltIn::Chebyshev2Unit => 8.0 * (2.0 * x - 1.0),
        }
    }

    fn stieltjes(self, z: Complex64) -> Complex64 {
        match self {
            // ln(z / (z - 1)) = -log1p(-1/z)
            BuiltIn::Lebesgue01 => -complex_log1p(-z.inv()),
            // -exp(-z) E1(-z)
            BuiltIn::Exponential => -special::exp_e1(-z),
            BuiltIn::Gaussian => {
                let scale = Complex64::new(0.0, -(0.5 * PI).sqrt());
                if z.im >= 0.0 {
                    scale * special::faddeeva_upper(z / 2f64.sqrt())
                } else {
                    (scale * special::faddeeva_upper(z.conj() / 2f64.sqrt())).conj()
                }
            }
            BuiltIn::Chebyshev2 => chebyshev2_transform(z),
            BuiltIn::Chebyshev2Unit => 2.0 * chebyshev2_transform(2.0 * z - 1.0),
        }
    }
}

impl FromStr for BuiltIn {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BuiltIn::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownFamily(s.to_string()))
    }
}

/// `2 (z - sqrt(z^2 - 1))`, written as `2 / (z + sqrt(z-1) sqrt(z+1))` to avoid
/// cancellation; the product of principal roots has its cut on [-1, 1].
fn chebyshev2_transform(z: Complex64) -> Complex64 {
    let root = (z - 1.0).sqrt() * (z + 1.0).sqrt();
    2.0 / (z + root)
}

/// `ln(1 + w)` accurate for small `|w|`.
pub fn complex_log1p(w: Complex64) -> Complex64 {
    let u = 1.0 + w;
    if u == Complex64::new(1.0, 0.0) {
        w
    } else {
        u.ln() * w / (u - 1.0)
    }
}

/// A measure known only through its recurrence coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CustomRecurrence {
    pub name: String,
    pub support: Support,
    pub coefficients: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomFile {
    name: String,
    support: String,
    a: Option<f64>,
    b: Option<f64>,
    recurrence: Vec<[f64; 2]>,
}

impl CustomRecurrence {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: CustomFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let support = match raw.support.as_str() {
            "compact" => match (raw.a, raw.b) {
                (Some(a), Some(b)) if a < b => Support::Compact { a, b },
                _ => return Err(Error::Parse("compact support needs a < b".into())),
            },
            "halfline" => Support::HalfLine {
                a: raw.a.ok_or_else(|| Error::Parse("halfline support needs a".into()))?,
            },
            "realline" => Support::RealLine,
            other => return Err(Error::Parse(format!("unknown support kind `{other}`"))),
        };
        if raw.recurrence.is_empty() {
            return Err(Error::Parse("recurrence table is empty".into()));
        }
        if BuiltIn::from_str(&raw.name).is_ok() {
            return Err(Error::Parse(format!("`{}` is a built-in family name", raw.name)));
        }
        let coefficients: Vec<(f64, f64)> = raw.recurrence.iter().map(|r| (r[0], r[1])).collect();
        if let Some((n, _)) = coefficients.iter().enumerate().find(|(_, c)| !(c.1 > 0.0)) {
            return Err(Error::Parse(format!("t_{n} must be positive")));
        }
        Ok(Self { name: raw.name, support, coefficients })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    BuiltIn(BuiltIn),
    Custom(Arc<CustomRecurrence>),
}

/// A named probability measure.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureFamily {
    kind: Kind,
    n_max: usize,
}

/// Looks up a built-in family by name and checks its construction invariants.
pub fn get_family(name: &str) -> Result<MeasureFamily> {
    MeasureFamily::builtin(name.parse()?)
}

impl MeasureFamily {
    pub fn builtin(which: BuiltIn) -> Result<Self> {
        let family = Self { kind: Kind::BuiltIn(which), n_max: DEFAULT_N_MAX };
        family.check_invariants()?;
        Ok(family)
    }

    pub fn custom(custom: CustomRecurrence) -> Result<Self> {
        let n_max = custom.coefficients.len();
        let family = Self { kind: Kind::Custom(Arc::new(custom)), n_max };
        family.check_invariants()?;
        Ok(family)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Result<Self> {
        if let Kind::Custom(c) = &self.kind {
            if n_max > c.coefficients.len() {
                return Err(Error::IndexOutOfRange { index: n_max, limit: c.coefficients.len() });
            }
        }
        self.n_max = n_max;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            Kind::BuiltIn(b) => b.name(),
            Kind::Custom(c) => &c.name,
        }
    }

    pub fn builtin_kind(&self) -> Option<BuiltIn> {
        match self.kind {
            Kind::BuiltIn(b) => Some(b),
            Kind::Custom(_) => None,
        }
    }

    pub fn support(&self) -> Support {
        match &self.kind {
            Kind::BuiltIn(b) => b.support(),
            Kind::Custom(c) => c.support,
        }
    }

    /// Number of recurrence terms the family is sized for.
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn has_closed_forms(&self) -> bool {
        matches!(self.kind, Kind::BuiltIn(_))
    }

    /// `(s_n, t_n)`. Built-in families have closed forms for every `n`;
    /// custom tables end at their last row.
    pub fn recurrence(&self, n: usize) -> Result<(f64, f64)> {
        match &self.kind {
            Kind::BuiltIn(b) => Ok(b.recurrence(n)),
            Kind::Custom(c) => c
                .coefficients
                .get(n)
                .copied()
                .ok_or(Error::IndexOutOfRange { index: n, limit: c.coefficients.len() }),
        }
    }

    fn missing(&self, capability: &'static str) -> Error {
        Error::CapabilityMissing { family: self.name().to_string(), capability }
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        match self.kind {
            Kind::BuiltIn(b) => Ok(b.density(x)),
            Kind::Custom(_) => Err(self.missing("a density")),
        }
    }

    pub fn reducer(&self, x: f64) -> Result<f64> {
        match self.kind {
            Kind::BuiltIn(b) => {
                if !self.support().is_interior(x) {
                    return Err(Error::OutOfDomain { what: "the reducer", x });
                }
                Ok(b.reducer(x))
            }
            Kind::Custom(_) => Err(self.missing("a reducer")),
        }
    }

    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        match self.kind {
            Kind::BuiltIn(b) => {
                if self.support().distance(z) < 1e-12 {
                    return Err(Error::OnSupport { family: self.name().to_string(), z });
                }
                Ok(b.stieltjes(z))
            }
            Kind::Custom(_) => Err(self.missing("a Stieltjes transform")),
        }
    }

    /// `int x^k rho(x) dx`, exact given exact recurrence coefficients.
    pub fn moment(&self, k: usize) -> Result<f64> {
        Ok(self.moments(k)?[k])
    }

    /// Moments of orders `0..=k_max`.
    pub fn moments(&self, k_max: usize) -> Result<Vec<f64>> {
        moments_from_recurrence(|n| self.recurrence(n), k_max)
    }

    /// `c_2 - c_1^2`.
    pub fn d0(&self) -> Result<f64> {
        let m = self.moments(2)?;
        Ok(m[2] - m[1] * m[1])
    }

    fn check_invariants(&self) -> Result<()> {
        for n in 0..self.n_max {
            let (s, t) = self.recurrence(n)?;
            if !(t > 0.0) || !s.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{}: recurrence coefficient t_{n} = {t} is not positive",
                    self.name()
                )));
            }
        }
        if !self.has_closed_forms() {
            return Ok(());
        }
        let support = self.support();
        let tol = if support.is_compact() { 1e-10 } else { 1e-8 };
        let mass = quad::integrate(|x| self.density(x).unwrap_or(f64::NAN), &support, 1e-12)?;
        if (mass.value - 1.0).abs() > tol {
            return Err(Error::InvalidInput(format!(
                "{}: density integrates to {}",
                self.name(),
                mass.value
            )));
        }
        let z = Complex64::new(0.3, 0.7);
        let (up, down) = (self.stieltjes(z)?, self.stieltjes(z.conj())?);
        if (up.conj() - down).norm() > 1e-12 * up.norm() {
            return Err(Error::InvalidInput(format!("{}: S(conj z) != conj S(z)", self.name())));
        }
        let far = support.far_point(1e6);
        let asym = (far * self.stieltjes(far)? - 1.0).norm();
        if asym > 1e-4 {
            return Err(Error::InvalidInput(format!(
                "{}: |z S(z) - 1| = {asym} at z = {far}",
                self.name()
            )));
        }
        Ok(())
    }
}

/// Moments `e_0^T J^k e_0` of the Jacobi matrix built from `recurrence`.
pub fn moments_from_recurrence<R>(recurrence: R, k_max: usize) -> Result<Vec<f64>>
where
    R: Fn(usize) -> Result<(f64, f64)>,
{
    // A (k_max + 1)-square truncation reproduces every moment up to k_max.
    let size = k_max / 2 + 1;
    let mut diag = Vec::with_capacity(size);
    let mut off = Vec::with_capacity(size);
    for n in 0..size {
        let (s, t) = recurrence(n)?;
        diag.push(s);
        off.push(t);
    }
    let mut v = vec![0.0; size + 1];
    v[0] = 1.0;
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(1.0);
    for _ in 0..k_max {
        let mut next = vec![0.0; size + 1];
        for i in 0..size {
            let mut acc = diag[i] * v[i];
            if i > 0 {
                acc += off[i - 1] * v[i - 1];
            }
            if i + 1 < size {
                acc += off[i] * v[i + 1];
            }
            next[i] = acc;
        }
        v = next;
        out.push(v[0]);
    }
    Ok(out)
}

/// Families by name: the built-ins plus any registered custom definitions.
#[derive(Clone, Debug, Default)]
pub struct FamilyCatalog {
    custom: Vec<MeasureFamily>,
}

impl FamilyCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, custom: CustomRecurrence) -> Result<()> {
        if self.custom.iter().any(|f| f.name() == custom.name) {
            return Err(Error::InvalidInput(format!("family `{}` already registered", custom.name)));
        }
        self.custom.push(MeasureFamily::custom(custom)?);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<MeasureFamily> {
        if let Some(f) = self.custom.iter().find(|f| f.name() == name) {
            return Ok(f.clone());
        }
        get_family(name)
    }

    pub fn names(&self) -> Vec<String> {
        BuiltIn::ALL
            .iter()
            .map(|b| b.name().to_string())
            .chain(self.custom.iter().map(|f| f.name().to_string()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(b: BuiltIn) -> MeasureFamily {
        MeasureFamily::builtin(b).unwrap()
    }

    #[test]
    fn recurrence_examples() {
        let (s, t) = get_family("lebesgue01").unwrap().recurrence(0).unwrap();
        assert_eq!(s, 0.5);
        assert!((t - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-16);
        assert!((t - 0.288_675_13).abs() < 1e-8);
        assert_eq!(get_family("gaussian").unwrap().recurrence(3).unwrap(), (0.0, 2.0));
        assert_eq!(get_family("chebyshev2").unwrap().recurrence(5).unwrap(), (0.0, 0.5));
        assert!(matches!(get_family("nope"), Err(Error::UnknownFamily(_))));
    }

    /// Gram-Schmidt on monomials with exact moments gives (s_0, t_0) and (s_1, t_1).
    #[test]
    fn first_recurrence_terms_match_gram_schmidt() {
        // Exact moments of each family, computed by hand.
        let cases: [(BuiltIn, [f64; 5]); 4] = [
            (BuiltIn::Lebesgue01, [1.0, 0.5, 1.0 / 3.0, 0.25, 0.2]),
            (BuiltIn::Exponential, [1.0, 1.0, 2.0, 6.0, 24.0]),
            (BuiltIn::Gaussian, [1.0, 0.0, 1.0, 0.0, 3.0]),
            // (8/pi) sqrt(x(1-x)) on [0,1]: Catalan-type moments 1, 1/2, 5/16, 7/32, 21/128
            (BuiltIn::Chebyshev2Unit, [1.0, 0.5, 5.0 / 16.0, 7.0 / 32.0, 21.0 / 128.0]),
        ];
        for (b, m) in cases {
            let s0 = m[1];
            let t0 = (m[2] - m[1] * m[1]).sqrt();
            // P1 = (x - s0)/t0; s1 = <x P1, P1>, t1 from the norm of x P1 - s1 P1 - t0 P0
            let ip = |a: &[f64], c: &[f64]| -> f64 {
                let mut s = 0.0;
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in c.iter().enumerate() {
                        s += x * y * m[i + j];
                    }
                }
                s
            };
            let p1 = [-s0 / t0, 1.0 / t0];
            let xp1 = [0.0, -s0 / t0, 1.0 / t0];
            let s1 = ip(&xp1, &p1);
            let r = [xp1[0] - s1 * p1[0] - t0, xp1[1] - s1 * p1[1], xp1[2]];
            let t1 = ip(&r, &r).sqrt();
            let (es0, et0) = b.recurrence(0);
            let (es1, et1) = b.recurrence(1);
            assert!((s0 - es0).abs() < 1e-14 && (t0 - et0).abs() < 1e-14, "{b:?} level 0");
            assert!((s1 - es1).abs() < 1e-12 && (t1 - et1).abs() < 1e-12, "{b:?} level 1");
        }
    }

    #[test]
    fn moment_examples() {
        let leb = fam(BuiltIn::Lebesgue01);
        assert_eq!(leb.moment(0).unwrap(), 1.0);
        assert!((leb.moment(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(fam(BuiltIn::Gaussian).moment(1).unwrap(), 0.0);
        for k in 0..=10 {
            assert!((leb.moment(k).unwrap() - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
        let lag = fam(BuiltIn::Exponential);
        let mut fact = 1.0;
        for k in 0..=10 {
            if k > 0 {
                fact *= k as f64;
            }
            assert!((lag.moment(k).unwrap() - fact).abs() < 1e-12 * fact);
        }
    }

    #[test]
    fn moments_agree_with_quadrature() {
        for b in BuiltIn::ALL {
            let f = fam(b);
            let support = f.support();
            let tol = if support.is_compact() { 1e-8 } else { 1e-6 };
            for k in 0..=8 {
                let q = quad::integrate(|x| x.powi(k) * f.density(x).unwrap(), &support, 1e-12)
                    .unwrap()
                    .value;
                let m = f.moment(k as usize).unwrap();
                let err = if m.abs() < 1e-12 { q.abs() } else { ((q - m) / m).abs() };
                assert!(err < tol, "{b:?} k={k}: {q} vs {m}");
            }
        }
    }

    #[test]
    fn d0_examples() {
        assert!((fam(BuiltIn::Lebesgue01).d0().unwrap() - 1.0 / 12.0).abs() < 1e-16);
        assert!((fam(BuiltIn::Gaussian).d0().unwrap() - 1.0).abs() < 1e-16);
        assert!((fam(BuiltIn::Chebyshev2).d0().unwrap() - 0.25).abs() < 1e-16);
        for b in BuiltIn::ALL {
            let f = fam(b);
            let t0 = f.recurrence(0).unwrap().1;
            let d0 = f.d0().unwrap();
            assert!(((d0 - t0 * t0) / d0).abs() < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn stieltjes_examples() {
        let leb = fam(BuiltIn::Lebesgue01);
        let s = leb.stieltjes(Complex64::new(2.0, 0.0)).unwrap();
        assert!((s.re - 2f64.ln()).abs() < 1e-15 && s.im == 0.0);
        let q = quad::integrate(|t| 1.0 / (2.0 - t), &leb.support(), 1e-13).unwrap().value;
        assert!((s.re - q).abs() < 1e-12);

        let cheb = fam(BuiltIn::Chebyshev2);
        let z = Complex64::new(0.0, 1e6);
        let s = cheb.stieltjes(z).unwrap();
        assert!((s - Complex64::new(0.0, -1e-6)).norm() < 1e-15);

        let unit = fam(BuiltIn::Chebyshev2Unit);
        let s = unit.stieltjes(Complex64::new(-1.0, 0.0)).unwrap();
        assert!((s.re - (-12.0 + 8.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(s.im.abs() < 1e-15);

        let err = leb.stieltjes(Complex64::new(0.5, 0.0)).unwrap_err();
        assert!(matches!(err, Error::OnSupport { .. }));
        assert!(fam(BuiltIn::Gaussian).stieltjes(Complex64::new(3.0, 0.0)).is_err());
    }

    /// S(z) = int rho(t)/(z - t) dt by quadrature at off-support points.
    #[test]
    fn stieltjes_matches_quadrature() {
        let points = [
            Complex64::new(2.0, 0.0),
            Complex64::new(-1.5, 0.0),
            Complex64::new(0.3, 0.8),
            Complex64::new(0.5, -0.4),
            Complex64::new(-2.0, 3.0),
        ];
        for b in BuiltIn::ALL {
            let f = fam(b);
            for &z in &points {
                if f.support().distance(z) < 0.1 {
                    continue;
                }
                let re = quad::integrate(|t| (f.density(t).unwrap() / (z - t)).re, &f.support(), 1e-13)
                    .unwrap()
                    .value;
                let im = quad::integrate(|t| (f.density(t).unwrap() / (z - t)).im, &f.support(), 1e-13)
                    .unwrap()
                    .value;
                let s = f.stieltjes(z).unwrap();
                let q = Complex64::new(re, im);
                assert!((s - q).norm() < 1e-10 * s.norm(), "{b:?} z={z}: {s} vs {q}");
            }
        }
    }

    #[test]
    fn reducer_examples() {
        let leb = fam(BuiltIn::Lebesgue01);
        assert_eq!(leb.reducer(0.5).unwrap(), 0.0);
        assert!((leb.reducer(0.75).unwrap() - 2.0 * 3f64.ln()).abs() < 1e-15);
        assert_eq!(fam(BuiltIn::Gaussian).reducer(0.0).unwrap(), 0.0);
        assert!(matches!(leb.reducer(1.0), Err(Error::OutOfDomain { .. })));
        assert!(fam(BuiltIn::Exponential).reducer(0.0).is_err());
    }

    /// phi(x) = 2 PV int rho(t)/(x - t) dt, by subtracting the singularity:
    /// PV int_0^1 dt/(x - t) = ln(x/(1-x)).
    #[test]
    fn lebesgue_reducer_principal_value() {
        let x: f64 = 0.75;
        let pv = (x / (1.0 - x)).ln();
        assert!((2.0 * pv - fam(BuiltIn::Lebesgue01).reducer(x).unwrap()).abs() < 1e-15);
        assert!((2.0 * pv - 2.197_224_58).abs() < 1e-8);
    }

    #[test]
    fn reducer_matches_epsilon_limit() {
        let eps = 1e-6;
        for b in BuiltIn::ALL {
            let f = fam(b);
            let points: Vec<f64> = match f.support() {
                Support::Compact { a, b } => (1..=20).map(|i| a + (b - a) * i as f64 / 21.0).collect(),
                Support::HalfLine { a } => (1..=20).map(|i| a + 0.4 * i as f64).collect(),
                Support::RealLine => (1..=20).map(|i| -4.0 + 8.0 * i as f64 / 21.0).collect(),
            };
            for x in points {
                let up = f.stieltjes(Complex64::new(x, eps)).unwrap();
                let down = f.stieltjes(Complex64::new(x, -eps)).unwrap();
                let limit = (up + down).re;
                let phi = f.reducer(x).unwrap();
                assert!((limit - phi).abs() < 1e-4, "{b:?} x={x}: {limit} vs {phi}");
                // Stieltjes-Perron: the jump recovers the density.
                let jump = ((down - up) / Complex64::new(0.0, 2.0 * PI)).re;
                assert!((jump - f.density(x).unwrap()).abs() < 1e-4, "{b:?} x={x}");
            }
        }
    }

    /// mu = rho / (phi^2/4 + pi^2 rho^2) integrates to d0 on compact supports.
    #[test]
    fn secondary_measure_mass_is_d0() {
        for b in [BuiltIn::Lebesgue01, BuiltIn::Chebyshev2, BuiltIn::Chebyshev2Unit] {
            let f = fam(b);
            let mass = quad::integrate(
                |x| {
                    let r = f.density(x).unwrap();
                    let p = f.reducer(x).unwrap();
                    r / (0.25 * p * p + PI * PI * r * r)
                },
                &f.support(),
                1e-12,
            )
            .unwrap()
            .value;
            let d0 = f.d0().unwrap();
            assert!(((mass - d0) / d0).abs() < 1e-6, "{b:?}: {mass} vs {d0}");
        }
    }

    #[test]
    fn custom_family_file() {
        let text = r#"
            name = "legendre-copy"
            support = "compact"
            a = 0.0
            b = 1.0
            recurrence = [[0.5, 0.28867513459481287], [0.5, 0.2581988897471611], [0.5, 0.2535462764]]
        "#;
        let custom = CustomRecurrence::from_toml_str(text).unwrap();
        let mut catalog = FamilyCatalog::new();
        catalog.register(custom).unwrap();
        let f = catalog.get("legendre-copy").unwrap();
        assert_eq!(f.n_max(), 3);
        assert!((f.moment(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(f.density(0.5), Err(Error::CapabilityMissing { .. })));
        assert!(matches!(f.recurrence(3), Err(Error::IndexOutOfRange { .. })));
        assert!(catalog.get("gaussian").is_ok());

        let bad = text.replace("0.2535462764", "-1.0");
        assert!(CustomRecurrence::from_toml_str(&bad).is_err());
        let builtin_name = text.replace("legendre-copy", "gaussian");
        assert!(CustomRecurrence::from_toml_str(&builtin_name).is_err());
    }
}
