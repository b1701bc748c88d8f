//! Fourier coefficients `C_n(f) = <f, P_n>` in the base measure, computed
//! directly and through the chain: as a multiple integral of a divided
//! difference against `rho_0 ... rho_n`, through the isometry relations, and
//! for `f = 1/(x + a)` as a product of level Stieltjes transforms.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{get_family, BuiltIn};
use crate::orthosys::{generate, OrthoSystem};
use crate::poly::{divided_difference, Polynomial};
use crate::quad;
use crate::secondary_chain::{integrate_fallible, SecondaryChain};

/// Largest `n` accepted by the multiple-integral route (`n + 1` dimensions).
pub const MAX_MULTIINT_N: usize = quad::MAX_TENSOR_DIM - 1;

/// A function whose Fourier coefficients can be requested from the CLI.
#[derive(Clone, Debug, PartialEq)]
pub enum FourierFunction {
    Polynomial(Polynomial),
    /// `1/(x + a)`.
    Rational { a: f64 },
}

impl FourierFunction {
    /// Parses `c0,c1,...` (ascending coefficients) or `rational:<a>`.
    pub fn parse(spec: &str) -> Result<Self> {
        if let Some(rest) = spec.strip_prefix("rational:") {
            let a: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad rational parameter `{rest}`")))?;
            if !a.is_finite() {
                return Err(Error::Parse(format!("bad rational parameter `{rest}`")));
            }
            return Ok(FourierFunction::Rational { a });
        }
        let coeffs = spec
            .split(',')
            .map(|c| {
                let v: f64 = c.trim().parse().map_err(|_| Error::Parse(format!("bad coefficient `{c}`")))?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse(format!("bad coefficient `{c}`")))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(FourierFunction::Polynomial(Polynomial::new(coeffs)))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FourierFunction::Polynomial(p) => p.eval(x),
            FourierFunction::Rational { a } => 1.0 / (x + a),
        }
    }
}

/// One row of a Fourier-coefficient comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierReport {
    pub n: usize,
    pub direct: f64,
    pub multiint: f64,
    pub product_form: Option<f64>,
    pub discrepancy: f64,
    /// `|multiint(m + 2) - multiint(m)|` for non-polynomial `f`.
    pub grid_delta: Option<f64>,
}

/// `<f, P_n>` by quadrature against the base density.
pub fn fourier_direct<F>(sys: &OrthoSystem, f: F, n: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if n > sys.size() {
        return Err(Error::IndexOutOfRange { index: n, limit: sys.size() });
    }
    let family = sys.family();
    let tol = if family.support().is_compact() { 1e-10 } else { 1e-8 };
    let r = integrate_fallible(
        |x| {
            let rho = family.density(x)?;
            if rho == 0.0 {
                return Ok(0.0);
            }
            let (p, _) = sys.eval_pq(x, n)?;
            Ok(f(x) * p[n] * rho)
        },
        &family.support(),
        tol,
    )?;
    Ok(r.value)
}

/// `C_n(f) = (1/a_n) int f[t_0, ..., t_n] rho_0(t_0) ... rho_n(t_n)`, with a
/// Gauss rule of `m + j` points (or more, to avoid node collisions) in
/// dimension `j`.
pub fn fourier_multiint<F>(chain: &SecondaryChain, f: F, n: usize, m: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if n > MAX_MULTIINT_N {
        return Err(Error::IndexOutOfRange { index: n, limit: MAX_MULTIINT_N });
    }
    if n > chain.max_level() {
        return Err(Error::IndexOutOfRange { index: n, limit: chain.max_level() });
    }
    let rules = quad::collision_free_rules(|dim, size| chain.level_rule(dim, size), n + 1, m)?;
    let integral = quad::tensor_integrate(|t| divided_difference(&f, t), &rules)?;
    Ok(integral / chain.base().a(n))
}

/// `F_n(f) = T_{rho_n}(... T_{rho_0}(f))` for polynomial `f`, exactly.
pub fn composed_operator(chain: &SecondaryChain, f: &Polynomial, n: usize) -> Result<Polynomial> {
    let mut g = f.clone();
    for k in 0..=n {
        g = chain.level_system(k, 0)?.apply_t_poly(&g)?;
    }
    Ok(g)
}

/// Two sides of an inner-product identity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentitySides {
    pub lhs: f64,
    pub rhs: f64,
}

impl IdentitySides {
    pub fn abs_error(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

fn level_inner(chain: &SecondaryChain, n: usize, f: &Polynomial, g: &Polynomial) -> Result<f64> {
    Ok(chain.integrate_level(n, |x| f.eval(x) * g.eval(x), 1e-12)?.value)
}

/// Covariance in `rho_n` against `t_n^2 <T f, T g>` in `rho_{n+1}`.
/// At `n = 0` this is the isometry onto the unnormalized secondary measure.
pub fn isometry_check(chain: &SecondaryChain, f: &Polynomial, g: &Polynomial, n: usize) -> Result<IdentitySides> {
    let one = Polynomial::constant(1.0);
    let lhs = level_inner(chain, n, f, g)? - level_inner(chain, n, f, &one)? * level_inner(chain, n, g, &one)?;
    let level = chain.level_system(n, 0)?;
    let (tf, tg) = (level.apply_t_poly(f)?, level.apply_t_poly(g)?);
    let t = chain.level_recurrence(n, 0)?.1;
    let rhs = t * t * level_inner(chain, n + 1, &tf, &tg)?;
    Ok(IdentitySides { lhs, rhs })
}

/// `<f, g>` in `rho` against `t_0^2 ... t_n^2 <F_n f, F_n g>` in `rho_{n+1}`.
/// Holds when `g` and its images are orthogonal to constants at every step,
/// e.g. `g = P_m` with `n < m`.
pub fn reduction_check(chain: &SecondaryChain, f: &Polynomial, g: &Polynomial, n: usize) -> Result<IdentitySides> {
    let lhs = level_inner(chain, 0, f, g)?;
    let (ff, fg) = (composed_operator(chain, f, n)?, composed_operator(chain, g, n)?);
    let scale = (0..=n).try_fold(1.0, |acc, k| Ok::<f64, Error>(acc * chain.level_recurrence(0, k)?.1.powi(2)))?;
    let rhs = scale * level_inner(chain, n + 1, &ff, &fg)?;
    Ok(IdentitySides { lhs, rhs })
}

fn check_shift(chain: &SecondaryChain, a: f64) -> Result<()> {
    let z = num_complex::Complex64::new(-a, 0.0);
    if !a.is_finite() || chain.family().support().distance(z) < 1e-12 {
        return Err(Error::OnSupport { family: chain.family().name().to_string(), z });
    }
    Ok(())
}

/// `C_n(1/(x + a)) = -(1/a_n) prod_{k=0}^n S_k(-a)`.
pub fn eigen_product(chain: &SecondaryChain, a: f64, n: usize) -> Result<f64> {
    check_shift(chain, a)?;
    let z = num_complex::Complex64::new(-a, 0.0);
    let mut prod = 1.0;
    for k in 0..=n {
        prod *= chain.stieltjes(k, z)?.re;
    }
    Ok(-prod / chain.base().a(n))
}

/// `T(f)(x)` by quadrature of the difference quotient, and `S(-a) f(x)`, for
/// `f = 1/(t + a)`.
pub fn eigenfunction_check(chain: &SecondaryChain, a: f64, x: f64) -> Result<IdentitySides> {
    check_shift(chain, a)?;
    let family = chain.family();
    let f = |t: f64| 1.0 / (t + a);
    let fx = f(x);
    let lhs = integrate_fallible(
        |t| {
            let rho = family.density(t)?;
            if rho == 0.0 {
                return Ok(0.0);
            }
            let quotient = if (t - x).abs() < 1e-12 { -fx * fx } else { (f(t) - fx) / (t - x) };
            Ok(quotient * rho)
        },
        &family.support(),
        1e-12,
    )?
    .value;
    let rhs = chain.stieltjes(0, num_complex::Complex64::new(-a, 0.0))?.re * fx;
    Ok(IdentitySides { lhs, rhs })
}

/// Partial sum of the generating function of the `chebyshev2_01` family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GeneratingFunctionCheck {
    pub partial_sum: f64,
    pub closed_form: f64,
}

impl GeneratingFunctionCheck {
    pub fn abs_error(&self) -> f64 {
        (self.partial_sum - self.closed_form).abs()
    }
}

/// `sum_{n=0}^{terms} t^{n+1} P_n(x)` against `t / ((t + 1)^2 - 4 t x)`.
pub fn generating_function_check(t: f64, x: f64, terms: usize) -> Result<GeneratingFunctionCheck> {
    if !(t.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("|t| must be below 1, got {t}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain { what: "the generating function", x });
    }
    let sys = generate(&get_family(BuiltIn::Chebyshev2Unit.name())?, 0)?;
    let (p, _) = sys.eval_pq(x, terms)?;
    let mut power = t;
    let mut sum = 0.0;
    for pn in &p {
        sum += power * pn;
        power *= t;
    }
    Ok(GeneratingFunctionCheck { partial_sum: sum, closed_form: t / ((t + 1.0).powi(2) - 4.0 * t * x) })
}

/// Direct, multiple-integral and (for `1/(x + a)`) product-form coefficients
/// for `n = 0..=max_n`.
pub fn fourier_table(chain: &SecondaryChain, f: &FourierFunction, max_n: usize, m: usize) -> Result<Vec<FourierReport>> {
    if let FourierFunction::Rational { a } = f {
        check_shift(chain, *a)?;
    }
    let sys = chain.base();
    (0..=max_n)
        .map(|n| {
            let direct = fourier_direct(sys, |x| f.eval(x), n)?;
            let multiint = fourier_multiint(chain, |x| f.eval(x), n, m)?;
            let (product_form, grid_delta) = match f {
                FourierFunction::Polynomial(_) => (None, None),
                FourierFunction::Rational { a } => {
                    let refined = fourier_multiint(chain, |x| f.eval(x), n, m + 2)?;
                    (Some(eigen_product(chain, *a, n)?), Some((refined - multiint).abs()))
                }
            };
            Ok(FourierReport { n, direct, multiint, product_form, discrepancy: (direct - multiint).abs(), grid_delta })
        })
        .collect()
}
