//! The chain of normalized secondary measures `rho_0 = rho, rho_1, rho_2, ...`.
//!
//! Every level quantity is expressed through level-0 data: the base family's
//! `rho`, `phi`, `S` and the polynomials `P_n`, `Q_n`. With
//! `B_m(x) = P_m(x) phi(x)/2 - Q_m(x)`,
//!
//! ```text
//! rho_n(x) = rho(x) / (t_{n-1}^2 (B_{n-1}^2 + pi^2 rho^2 P_{n-1}^2))
//! S_n(z)   = (Q_n - P_n S) / (t_{n-1} (Q_{n-1} - P_{n-1} S))
//! ```
//!
//! The recurrence of `rho_n` is the base recurrence shifted by `n`.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{moments_from_recurrence, MeasureFamily};
use crate::orthosys::{generate, OrthoSystem};
use crate::poly::Polynomial;
use crate::quad::{self, IntegrationResult, QuadratureRule};

/// Denominators below this are treated as underflow.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Above this cancellation ratio the closed-form quotient for `S_n` is
/// abandoned in favour of the continued-fraction tail.
pub const QUOTIENT_CONDITION_LIMIT: f64 = 1e4;

const FRACTION_MAX_TERMS: usize = 100_000;

#[derive(Clone, Debug)]
pub struct SecondaryChain {
    base: OrthoSystem,
    max_level: usize,
}

impl SecondaryChain {
    /// Chain with levels `0..=max_level`. The base system holds every
    /// polynomial the family's recurrence table allows.
    pub fn new(family: &MeasureFamily, max_level: usize) -> Result<Self> {
        let size = family.n_max();
        if max_level >= size {
            return Err(Error::IndexOutOfRange { index: max_level, limit: size.saturating_sub(1) });
        }
        Ok(Self { base: generate(family, size)?, max_level })
    }

    pub fn base(&self) -> &OrthoSystem {
        &self.base
    }

    pub fn family(&self) -> &MeasureFamily {
        self.base.family()
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n > self.max_level {
            return Err(Error::IndexOutOfRange { index: n, limit: self.max_level });
        }
        Ok(())
    }

    /// `(s_j, t_j)` of `rho_n`.
    pub fn level_recurrence(&self, n: usize, j: usize) -> Result<(f64, f64)> {
        self.family().recurrence(n + j)
    }

    /// `int x^k rho_n` for `k = 0..=k_max`, from the shifted recurrence.
    pub fn level_moments(&self, n: usize, k_max: usize) -> Result<Vec<f64>> {
        moments_from_recurrence(|j| self.level_recurrence(n, j), k_max)
    }

    /// `m`-point Gauss rule for `rho_n`.
    pub fn level_rule(&self, n: usize, m: usize) -> Result<QuadratureRule> {
        quad::gauss_rule(|j| self.level_recurrence(n, j), m)
    }

    /// Orthonormal system of `rho_n` by the shifted recurrence.
    pub fn level_system(&self, n: usize, size: usize) -> Result<OrthoSystem> {
        OrthoSystem::at_level(self.family(), n, size)
    }

    /// `rho(x) / (B_m(x)^2 + pi^2 rho(x)^2 P_m(x)^2)`, the integrand whose
    /// integral is `t_m^2`. Vanishes off the interior of the support.
    pub fn identity_integrand(&self, m: usize, x: f64) -> Result<f64> {
        let family = self.family();
        if !family.support().is_interior(x) {
            return Ok(0.0);
        }
        let rho = family.density(x)?;
        if rho == 0.0 {
            return Ok(0.0);
        }
        let phi = family.reducer(x)?;
        let (p, q) = self.base.eval_pq(x, m)?;
        let b = p[m] * phi / 2.0 - q[m];
        let den = b * b + (PI * rho * p[m]).powi(2);
        if den < DENOMINATOR_FLOOR {
            return Err(Error::DegenerateDenominator { level: m + 1, x });
        }
        Ok(rho / den)
    }

    /// Density of `rho_n` at `x`; zero outside the interior of the support.
    pub fn density(&self, n: usize, x: f64) -> Result<f64> {
        self.check_level(n)?;
        if n == 0 {
            return self.family().density(x);
        }
        let t = self.base.recurrence(n - 1)?.1;
        Ok(self.identity_integrand(n - 1, x)? / (t * t))
    }

    /// Reducer of `rho_n`: twice the real part of `S_n` on the support.
    pub fn reducer(&self, n: usize, x: f64) -> Result<f64> {
        self.check_level(n)?;
        let family = self.family();
        let phi = family.reducer(x)?;
        if n == 0 {
            return Ok(phi);
        }
        let rho = family.density(x)?;
        let (p, q) = self.base.eval_pq(x, n)?;
        let b_now = p[n] * phi / 2.0 - q[n];
        let b_prev = p[n - 1] * phi / 2.0 - q[n - 1];
        let pr2 = (PI * rho).powi(2);
        let den = b_prev * b_prev + pr2 * p[n - 1] * p[n - 1];
        if den < DENOMINATOR_FLOOR {
            return Err(Error::DegenerateDenominator { level: n, x });
        }
        let t = self.base.recurrence(n - 1)?.1;
        Ok(2.0 / t * (b_now * b_prev + pr2 * p[n] * p[n - 1]) / den)
    }

    /// Stieltjes transform of `rho_n`.
    ///
    /// Uses the closed-form quotient where it is well conditioned; where the
    /// numerator or denominator cancels (large `|z|`), evaluates the
    /// continued fraction of the shifted recurrence instead.
    pub fn stieltjes(&self, n: usize, z: Complex64) -> Result<Complex64> {
        self.check_level(n)?;
        let s = self.family().stieltjes(z)?;
        if n == 0 {
            return Ok(s);
        }
        let (p, q) = self.base.eval_pq_complex(z, n)?;
        let num = q[n] - p[n] * s;
        let den = q[n - 1] - p[n - 1] * s;
        let cond = |a: Complex64, b: Complex64, d: Complex64| (a.norm() + b.norm()) / d.norm();
        let worst = cond(q[n], p[n] * s, num).max(if n > 1 {
            cond(q[n - 1], p[n - 1] * s, den)
        } else {
            1.0
        });
        if worst.is_finite() && worst <= QUOTIENT_CONDITION_LIMIT {
            let t = self.base.recurrence(n - 1)?.1;
            return Ok(num / (t * den));
        }
        self.fraction_tail(n, z)
    }

    /// `1/(z - s_n - t_n^2/(z - s_{n+1} - ...))` by the modified Lentz method.
    pub fn fraction_tail(&self, n: usize, z: Complex64) -> Result<Complex64> {
        // Tiny enough to act as zero, large enough that its square does not
        // underflow inside complex division.
        const TINY: f64 = 1e-150;
        let tiny = Complex64::new(TINY, 0.0);
        let mut g = z - self.level_recurrence(n, 0)?.0;
        if g.norm() < TINY {
            g = tiny;
        }
        let mut c = g;
        let mut d = Complex64::new(0.0, 0.0);
        for j in 1..FRACTION_MAX_TERMS {
            let s = match self.level_recurrence(n, j) {
                Ok((s, _)) => s,
                // A finite table ends the fraction.
                Err(Error::IndexOutOfRange { .. }) => break,
                Err(e) => return Err(e),
            };
            let t = self.level_recurrence(n, j - 1)?.1;
            let a = Complex64::new(-t * t, 0.0);
            let b = z - s;
            d = b + a * d;
            if d.norm() < TINY {
                d = tiny;
            }
            c = b + a / c;
            if c.norm() < TINY {
                c = tiny;
            }
            d = d.inv();
            let delta = c * d;
            g *= delta;
            if (delta - 1.0).norm() < 1e-15 {
                break;
            }
        }
        Ok(g.inv())
    }

    /// `eps_n(z) = int P_n(t) rho(t) / (z - t) dt = Q_n... = S * prod_{k=1}^n t_{k-1} S_k`.
    pub fn epsilon(&self, n: usize, z: Complex64) -> Result<Complex64> {
        let mut e = self.stieltjes(0, z)?;
        for k in 1..=n {
            e *= self.base.recurrence(k - 1)?.1 * self.stieltjes(k, z)?;
        }
        Ok(e)
    }

    /// Evaluates the finite continued fraction down from the level
    /// `depth + 1` transform, returning the level-0 value.
    pub fn continued_fraction_eval(&self, depth: usize, z: Complex64) -> Result<Complex64> {
        if depth + 1 > self.max_level {
            return Err(Error::IndexOutOfRange { index: depth, limit: self.max_level.saturating_sub(1) });
        }
        let mut s = self.stieltjes(depth + 1, z)?;
        for level in (0..=depth).rev() {
            let (sj, tj) = self.base.recurrence(level)?;
            let den = z - sj - tj * tj * s;
            if den.norm() < DENOMINATOR_FLOOR {
                return Err(Error::ZeroDivision { level, z });
            }
            s = den.inv();
        }
        Ok(s)
    }

    /// Integrates `f(x) rho_n(x)` over the support, propagating the first
    /// evaluation error instead of masking it.
    pub fn integrate_level<F>(&self, n: usize, f: F, tol: f64) -> Result<IntegrationResult>
    where
        F: Fn(f64) -> f64,
    {
        self.check_level(n)?;
        integrate_fallible(
            |x| {
                let rho = self.density(n, x)?;
                Ok(if rho == 0.0 { 0.0 } else { f(x) * rho })
            },
            &self.family().support(),
            tol,
        )
    }

    /// Orthonormal system of `rho_{k+1}` with polynomials up to index `size`.
    pub fn associated_system(&self, k: usize, size: usize, route: AssocRoute) -> Result<OrthoSystem> {
        let limit = self.base.size();
        if k + 1 + size > limit {
            return Err(Error::IndexOutOfRange { index: k + 1 + size, limit });
        }
        match route {
            AssocRoute::ClosedForm => {
                let b = &self.base;
                let tk = b.recurrence(k)?.1;
                let (p, q): (Vec<_>, Vec<_>) = (0..=size)
                    .map(|n| {
                        let j = n + k + 1;
                        let p = &(b.p(k) * b.q(j)) - &(b.q(k) * b.p(j));
                        let q = &(b.p(k + 1) * b.q(j)) - &(b.p(j) * b.q(k + 1));
                        (p.scale(tk), q)
                    })
                    .unzip();
                OrthoSystem::from_parts(self.family(), k + 1, p, q)
            }
            AssocRoute::MatrixProduct => {
                let pi = self.transfer_matrix(k)?;
                let (p, q): (Vec<_>, Vec<_>) = (0..=size)
                    .map(|n| {
                        let j = n + k + 1;
                        let (pj, qj) = (self.base.p(j), self.base.q(j));
                        (&(&pi[0][0] * pj) + &(&pi[0][1] * qj), &(&pi[1][0] * pj) + &(&pi[1][1] * qj))
                    })
                    .unzip();
                OrthoSystem::from_parts(self.family(), k + 1, p, q)
            }
            AssocRoute::ShiftedRecurrence => self.level_system(k + 1, size),
        }
    }

    /// `M_k M_{k-1} ... M_0` with `M_j = (1/t_j) [[0, t_j^2], [-1, x - s_j]]`.
    pub fn transfer_matrix(&self, k: usize) -> Result<[[Polynomial; 2]; 2]> {
        let mut acc = [
            [Polynomial::constant(1.0), Polynomial::zero()],
            [Polynomial::zero(), Polynomial::constant(1.0)],
        ];
        for j in 0..=k {
            let (s, t) = self.base.recurrence(j)?;
            let m = [
                [Polynomial::zero(), Polynomial::constant(t)],
                [Polynomial::constant(-1.0 / t), Polynomial::new(vec![-s / t, 1.0 / t])],
            ];
            acc = mat_mul(&m, &acc);
        }
        Ok(acc)
    }
}

fn mat_mul(a: &[[Polynomial; 2]; 2], b: &[[Polynomial; 2]; 2]) -> [[Polynomial; 2]; 2] {
    let entry = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]]
}

/// Construction route for the associated orthonormal systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssocRoute {
    /// `t_k (P_k Q_{n+k+1} - Q_k P_{n+k+1})` and `P_{k+1} Q_{n+k+1} - P_{n+k+1} Q_{k+1}`.
    ClosedForm,
    /// Transfer matrix applied to `(P_{n+k+1}, Q_{n+k+1})`.
    MatrixProduct,
    /// Three-term recurrence with coefficients shifted by `k + 1`.
    ShiftedRecurrence,
}

impl AssocRoute {
    pub const ALL: [AssocRoute; 3] =
        [AssocRoute::ClosedForm, AssocRoute::MatrixProduct, AssocRoute::ShiftedRecurrence];

    pub fn name(self) -> &'static str {
        match self {
            AssocRoute::ClosedForm => "closed_form",
            AssocRoute::MatrixProduct => "matrix_product",
            AssocRoute::ShiftedRecurrence => "shifted_recurrence",
        }
    }
}

/// [`quad::integrate`] for an integrand that can fail; the first failure is
/// returned in place of the quadrature result.
pub fn integrate_fallible<F>(f: F, support: &crate::measures::Support, tol: f64) -> Result<IntegrationResult>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let result = quad::integrate(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        support,
        tol,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => result,
    }
}

/// Remainder of the `[n/n+1]` Pade approximant against its predicted size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PadeCheck {
    /// `(S(z) - Q_{n+1}(z)/P_{n+1}(z)) z^(2n+3)`.
    pub lhs: Complex64,
    /// `prod_{k<=n} t_k^2`.
    pub rhs: f64,
}

impl PadeCheck {
    pub fn ratio_error(&self) -> f64 {
        (self.lhs / self.rhs - 1.0).norm()
    }
}

/// Pade remainder at large `|z|`. The difference `S - Q_{n+1}/P_{n+1}` is
/// formed as `eps_{n+1}(z) / P_{n+1}(z)`, which avoids subtracting two nearly
/// equal numbers.
pub fn pade_check(chain: &SecondaryChain, n: usize, z: Complex64) -> Result<PadeCheck> {
    let eps = chain.epsilon(n + 1, z)?;
    let (p, _) = chain.base().eval_pq_complex(z, n + 1)?;
    let lhs = eps / p[n + 1] * z.powi(2 * n as i32 + 3);
    Ok(PadeCheck { lhs, rhs: pade_rhs(chain.base(), n)? })
}

/// The same remainder by direct subtraction; only meaningful at moderate `|z|`.
pub fn pade_check_direct(sys: &OrthoSystem, n: usize, z: Complex64) -> Result<PadeCheck> {
    let s = sys.family().stieltjes(z)?;
    let (p, q) = sys.eval_pq_complex(z, n + 1)?;
    let lhs = (s - q[n + 1] / p[n + 1]) * z.powi(2 * n as i32 + 3);
    Ok(PadeCheck { lhs, rhs: pade_rhs(sys, n)? })
}

fn pade_rhs(sys: &OrthoSystem, n: usize) -> Result<f64> {
    (0..=n).try_fold(1.0, |acc, k| Ok(acc * sys.recurrence(k)?.1.powi(2)))
}
