//! Orthonormal polynomials `P_n`, secondary polynomials `Q_n` and the operator
//! `T(f)(x) = int (f(t) - f(x)) / (t - x) rho(t) dt` on polynomials.
//!
//! A system may sit at a shifted level `k`: it is then built from the
//! recurrence `j -> (s_{j+k}, t_{j+k})` of the base family, which is the
//! recurrence of the `k`-th normalized secondary measure.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::{moments_from_recurrence, MeasureFamily};
use crate::poly::Polynomial;
use crate::quad;

#[derive(Clone, Debug)]
pub struct OrthoSystem {
    family: MeasureFamily,
    level: usize,
    recurrence: Vec<(f64, f64)>,
    p: Vec<Polynomial>,
    q: Vec<Polynomial>,
    a: Vec<f64>,
}

/// Orthonormal system of `family` with polynomials `P_0..=P_n`.
pub fn generate(family: &MeasureFamily, n: usize) -> Result<OrthoSystem> {
    OrthoSystem::at_level(family, 0, n)
}

impl OrthoSystem {
    /// System of the level-`level` secondary measure, by the shifted recurrence.
    pub fn at_level(family: &MeasureFamily, level: usize, n: usize) -> Result<Self> {
        let limit = family.n_max();
        if n > limit {
            return Err(Error::IndexOutOfRange { index: n, limit });
        }
        let recurrence = (0..n.max(1))
            .map(|j| family.recurrence(j + level))
            .collect::<Result<Vec<_>>>()?;
        let mut p = vec![Polynomial::constant(1.0)];
        let mut q = vec![Polynomial::zero()];
        let mut a = vec![1.0];
        let x = Polynomial::identity();
        for j in 0..n {
            let (s, t) = recurrence[j];
            let shifted = &x - &Polynomial::constant(s);
            let (mut next_p, mut next_q) = (&shifted * &p[j], &shifted * &q[j]);
            if j == 0 {
                next_q = Polynomial::constant(1.0);
            } else {
                let t_prev = recurrence[j - 1].1;
                next_p = &next_p - &p[j - 1].scale(t_prev);
                next_q = &next_q - &q[j - 1].scale(t_prev);
            }
            p.push(next_p.scale(1.0 / t));
            q.push(next_q.scale(1.0 / t));
            a.push(a[j] / t);
        }
        Ok(Self { family: family.clone(), level, recurrence, p, q, a })
    }

    /// Assembles a system from precomputed polynomials (used by alternative
    /// construction routes).
    pub(crate) fn from_parts(
        family: &MeasureFamily,
        level: usize,
        p: Vec<Polynomial>,
        q: Vec<Polynomial>,
    ) -> Result<Self> {
        let n = p.len().saturating_sub(1);
        let recurrence = (0..n.max(1))
            .map(|j| family.recurrence(j + level))
            .collect::<Result<Vec<_>>>()?;
        let a = p.iter().map(|poly| poly.leading()).collect();
        Ok(Self { family: family.clone(), level, recurrence, p, q, a })
    }

    pub fn family(&self) -> &MeasureFamily {
        &self.family
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Highest polynomial index held.
    pub fn size(&self) -> usize {
        self.p.len() - 1
    }

    pub fn p(&self, n: usize) -> &Polynomial {
        &self.p[n]
    }

    pub fn q(&self, n: usize) -> &Polynomial {
        &self.q[n]
    }

    pub fn ps(&self) -> &[Polynomial] {
        &self.p
    }

    pub fn qs(&self) -> &[Polynomial] {
        &self.q
    }

    /// Leading coefficient `a_n` of `P_n`.
    pub fn a(&self, n: usize) -> f64 {
        self.a[n]
    }

    /// `(s_j, t_j)` of this system's measure.
    pub fn recurrence(&self, j: usize) -> Result<(f64, f64)> {
        match self.recurrence.get(j) {
            Some(&c) => Ok(c),
            None => self.family.recurrence(j + self.level),
        }
    }

    /// Moments of this system's measure up to order `k_max`.
    pub fn moments(&self, k_max: usize) -> Result<Vec<f64>> {
        moments_from_recurrence(|j| self.recurrence(j), k_max)
    }

    /// `T(f)` computed exactly from the moments of this system's measure:
    /// `T(x^i)(x) = sum_{j<i} m_j x^{i-1-j}`.
    pub fn apply_t_poly(&self, f: &Polynomial) -> Result<Polynomial> {
        let Some(deg) = f.degree() else {
            return Ok(Polynomial::zero());
        };
        if deg == 0 {
            return Ok(Polynomial::zero());
        }
        let m = self.moments(deg - 1)?;
        let mut out = vec![0.0; deg];
        for i in 1..=deg {
            let fi = f.coeff(i);
            for (j, mj) in m.iter().enumerate().take(i) {
                out[i - 1 - j] += fi * mj;
            }
        }
        Ok(Polynomial::new(out))
    }

    /// `P_0(x)..=P_n(x)` and `Q_0(x)..=Q_n(x)` by the recurrence, which is
    /// better conditioned than summing monomial coefficients.
    pub fn eval_pq(&self, x: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let (p, q) = self.eval_pq_complex(Complex64::new(x, 0.0), n)?;
        Ok((p.iter().map(|v| v.re).collect(), q.iter().map(|v| v.re).collect()))
    }

    pub fn eval_pq_complex(&self, z: Complex64, n: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let mut p = Vec::with_capacity(n + 1);
        let mut q = Vec::with_capacity(n + 1);
        p.push(Complex64::new(1.0, 0.0));
        q.push(Complex64::new(0.0, 0.0));
        for j in 0..n {
            let (s, t) = self.recurrence(j)?;
            let (np, nq) = if j == 0 {
                ((z - s) / t, Complex64::new(1.0 / t, 0.0))
            } else {
                let t_prev = self.recurrence(j - 1)?.1;
                (
                    ((z - s) * p[j] - t_prev * p[j - 1]) / t,
                    ((z - s) * q[j] - t_prev * q[j - 1]) / t,
                )
            };
            p.push(np);
            q.push(nq);
        }
        Ok((p, q))
    }

    /// `<P_n, P_m>` against the base density by quadrature. Only level-0
    /// systems carry a density here; shifted levels go through the chain.
    pub fn orthonormality_check(&self, n: usize, m: usize) -> Result<f64> {
        if self.level != 0 {
            return Err(Error::InvalidInput(
                "orthonormality_check needs a level-0 system".into(),
            ));
        }
        let limit = self.size();
        if n.max(m) > limit {
            return Err(Error::IndexOutOfRange { index: n.max(m), limit });
        }
        let family = &self.family;
        if !family.has_closed_forms() {
            family.density(0.0)?;
        }
        let (pn, pm) = (&self.p[n], &self.p[m]);
        let r = quad::integrate(
            |x| match family.density(x) {
                Ok(0.0) => 0.0,
                Ok(rho) => pn.eval(x) * pm.eval(x) * rho,
                Err(_) => f64::NAN,
            },
            &family.support(),
            1e-12,
        )?;
        Ok(r.value)
    }

    /// `Q_{n+1} P_n - P_{n+1} Q_n`, which should be the constant `1/t_n`.
    pub fn wronskian(&self, n: usize) -> Polynomial {
        &(&self.q[n + 1] * &self.p[n]) - &(&self.p[n + 1] * &self.q[n])
    }

    /// Largest coefficient error of the Wronskian identity at index `n`.
    /// Each coefficient is measured against the size of the products that
    /// cancel to produce it, with the constant term also floored at `1/t_n`.
    pub fn wronskian_error(&self, n: usize) -> Result<f64> {
        let t = self.recurrence(n)?.1;
        let w = self.wronskian(n);
        let scale = cancellation_scale(&[
            (&self.q[n + 1], &self.p[n]),
            (&self.p[n + 1], &self.q[n]),
        ]);
        Ok(scaled_error(&w, &Polynomial::constant(1.0 / t), &scale))
    }

    /// `max_n |a_n - prod_{k<n} 1/t_k| / a_n`.
    pub fn leading_coefficient_error(&self) -> Result<f64> {
        let mut prod = 1.0;
        let mut worst: f64 = 0.0;
        for n in 0..=self.size() {
            if n > 0 {
                prod /= self.recurrence(n - 1)?.1;
            }
            worst = worst.max((self.a[n] - prod).abs() / prod);
            worst = worst.max((self.p[n].leading() - prod).abs() / prod);
        }
        Ok(worst)
    }

    /// `P_n^2 - P_{n-1} P_{n+1}` (identically 1 for the Chebyshev family).
    pub fn turan(&self, n: usize) -> Polynomial {
        &(&self.p[n] * &self.p[n]) - &(&self.p[n - 1] * &self.p[n + 1])
    }

    pub fn turan_error(&self, n: usize) -> f64 {
        let scale = cancellation_scale(&[(&self.p[n], &self.p[n]), (&self.p[n - 1], &self.p[n + 1])]);
        scaled_error(&self.turan(n), &Polynomial::constant(1.0), &scale)
    }
}

/// Coefficientwise `sum |a_i b_j|` over `i + j = k` for each product pair.
pub fn cancellation_scale(pairs: &[(&Polynomial, &Polynomial)]) -> Vec<f64> {
    let len = pairs
        .iter()
        .map(|(a, b)| a.coeffs().len() + b.coeffs().len())
        .max()
        .unwrap_or(0);
    let mut scale = vec![0.0; len];
    for (a, b) in pairs {
        for (i, x) in a.coeffs().iter().enumerate() {
            for (j, y) in b.coeffs().iter().enumerate() {
                scale[i + j] += (x * y).abs();
            }
        }
    }
    scale
}

/// `max_k |actual_k - expected_k| / max(|expected_k|, scale_k)`.
pub fn scaled_error(actual: &Polynomial, expected: &Polynomial, scale: &[f64]) -> f64 {
    let len = actual.coeffs().len().max(expected.coeffs().len()).max(scale.len());
    (0..len)
        .map(|k| {
            let (x, y) = (actual.coeff(k), expected.coeff(k));
            let denom = y.abs().max(scale.get(k).copied().unwrap_or(0.0));
            if denom == 0.0 {
                (x - y).abs()
            } else {
                (x - y).abs() / denom
            }
        })
        .fold(0.0, f64::max)
}

/// `max_k |a_k - b_k| / max(|a_k|, |b_k|, floor)`.
pub fn coefficient_distance(a: &Polynomial, b: &Polynomial, floor: f64) -> f64 {
    let len = a.coeffs().len().max(b.coeffs().len());
    (0..len)
        .map(|k| {
            let (x, y) = (a.coeff(k), b.coeff(k));
            (x - y).abs() / x.abs().max(y.abs()).max(floor)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{get_family, BuiltIn};

    fn sys(name: &str, n: usize) -> OrthoSystem {
        generate(&get_family(name).unwrap(), n).unwrap()
    }

    #[test]
    fn generate_examples() {
        let s = sys("lebesgue01", 1);
        assert_eq!(s.q(1).degree(), Some(0));
        assert!((s.q(1).coeff(0) - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        assert!((s.q(1).coeff(0) - 3.464_101_6).abs() < 1e-7);

        assert!((sys("chebyshev2", 3).p(2).eval(1.0) - 3.0).abs() < 1e-14);

        let g = sys("gaussian", 2);
        let r = 1.0 / 2f64.sqrt();
        let c = g.p(2).coeffs();
        assert!((c[0] + r).abs() < 1e-15 && c[1].abs() < 1e-15 && (c[2] - r).abs() < 1e-15);
        assert!(g.q(0).is_zero());
        assert_eq!(g.p(0).coeffs(), &[1.0]);
    }

    /// Q_1 from its definition: int (P_1(t) - P_1(X))/(t - X) dt = slope of P_1.
    #[test]
    fn q1_matches_defining_integral() {
        let s = sys("lebesgue01", 3);
        let x0 = 0.37;
        let fam = s.family().clone();
        for n in 1..=3 {
            let pn = s.p(n).clone();
            let quotient = pn.newton_quotient(x0).unwrap();
            let val = quad::integrate(|t| quotient.eval(t) * fam.density(t).unwrap(), &fam.support(), 1e-13)
                .unwrap()
                .value;
            assert!((val - s.q(n).eval(x0)).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn degrees_and_leading_coefficients() {
        for b in BuiltIn::ALL {
            let s = generate(&crate::measures::MeasureFamily::builtin(b).unwrap(), 12).unwrap();
            for n in 1..=12 {
                assert_eq!(s.p(n).degree(), Some(n));
                assert_eq!(s.q(n).degree(), Some(n - 1));
                assert!(s.a(n) > 0.0);
            }
            assert!(s.leading_coefficient_error().unwrap() < 1e-12, "{b:?}");
        }
        let c = sys("chebyshev2_01", 6);
        for n in 0..=6 {
            assert!((c.a(n) - 4f64.powi(n as i32)).abs() < 1e-12 * c.a(n));
        }
    }

    #[test]
    fn apply_t_examples() {
        let s = sys("lebesgue01", 8);
        assert!(s.apply_t_poly(&Polynomial::constant(3.0)).unwrap().is_zero());
        let t1 = s.apply_t_poly(s.p(1)).unwrap();
        assert!((t1.coeff(0) - 3.464_101_6).abs() < 1e-7 && t1.degree() == Some(0));
        for b in BuiltIn::ALL {
            let s = generate(&crate::measures::MeasureFamily::builtin(b).unwrap(), 6).unwrap();
            for n in 1..=6 {
                let t = s.apply_t_poly(s.p(n)).unwrap();
                assert_eq!(t.degree(), Some(n - 1));
                assert!(coefficient_distance(&t, s.q(n), 0.0) < 1e-10, "{b:?} n={n}");
            }
        }
    }

    #[test]
    fn orthonormality_examples() {
        let s = sys("lebesgue01", 8);
        assert!((s.orthonormality_check(3, 3).unwrap() - 1.0).abs() < 1e-8);
        assert!(s.orthonormality_check(2, 5).unwrap().abs() < 1e-8);
        let g = sys("gaussian", 8);
        assert!((g.orthonormality_check(4, 4).unwrap() - 1.0).abs() < 1e-6);
        for b in BuiltIn::ALL {
            let fam = crate::measures::MeasureFamily::builtin(b).unwrap();
            let s = generate(&fam, 8).unwrap();
            let tol = if fam.support().is_compact() { 1e-8 } else { 1e-6 };
            for n in 0..=8 {
                for m in n..=8 {
                    let v = s.orthonormality_check(n, m).unwrap();
                    let want = if n == m { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < tol, "{b:?} ({n},{m}) = {v}");
                }
            }
        }
    }

    #[test]
    fn wronskian_identity() {
        for b in BuiltIn::ALL {
            let s = generate(&crate::measures::MeasureFamily::builtin(b).unwrap(), 11).unwrap();
            for n in 0..=10 {
                let err = s.wronskian_error(n).unwrap();
                assert!(err < 1e-9, "{b:?} n={n}: {err}");
            }
        }
    }

    #[test]
    fn chebyshev_turan_identity() {
        let s = sys("chebyshev2", 11);
        for n in 1..=10 {
            assert!(s.turan_error(n) < 1e-9, "n={n}");
            for &x in &[-0.9, -0.2, 0.4, 1.0] {
                let (p, _) = s.eval_pq(x, n + 1).unwrap();
                assert!((p[n] * p[n] - p[n - 1] * p[n + 1] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recurrence_evaluation_matches_coefficients() {
        let s = sys("exponential", 10);
        let z = Complex64::new(1.3, -0.4);
        let (p, q) = s.eval_pq_complex(z, 10).unwrap();
        for n in 0..=10 {
            assert!((p[n] - s.p(n).eval_complex(z)).norm() < 1e-9 * p[n].norm().max(1.0));
            assert!((q[n] - s.q(n).eval_complex(z)).norm() < 1e-9 * q[n].norm().max(1.0));
        }
    }

    #[test]
    fn custom_system_limits() {
        let custom = crate::measures::CustomRecurrence {
            name: "short".into(),
            support: crate::measures::Support::RealLine,
            coefficients: vec![(0.0, 1.0), (0.0, 2f64.sqrt())],
        };
        let fam = crate::measures::MeasureFamily::custom(custom).unwrap();
        let s = generate(&fam, 2).unwrap();
        assert!((s.p(2).coeff(2) - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(generate(&fam, 3).is_err());
        assert!(matches!(s.orthonormality_check(1, 1), Err(Error::CapabilityMissing { .. })));
    }
}
