//! Dense real polynomials in the monomial basis, plus Newton divided differences.
//!
//! Coefficients are stored in ascending order (`coeffs[k]` multiplies `x^k`).
//! The zero polynomial is the empty vector; nonzero polynomials never carry
//! trailing zeros. Only exact zeros are stripped, so rounding residue in a
//! leading coefficient survives arithmetic and is visible to callers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `x`
    pub fn identity() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    /// Builds a polynomial from ascending coefficients, stripping exact trailing zeros.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Leading coefficient (0 for the zero polynomial).
    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiplies by `x`.
    pub fn shift_up(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Keeps only the coefficients of degree `<= degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        Self::new(self.coeffs.iter().take(degree + 1).copied().collect())
    }

    /// The polynomial `t -> (p(t) - p(x0)) / (t - x0)`, by synthetic division.
    ///
    /// Constants map to the zero polynomial. The zero polynomial itself is rejected.
    pub fn newton_quotient(&self, x0: f64) -> Result<Self> {
        let n = match self.degree() {
            None => {
                return Err(Error::InvalidInput(
                    "newton quotient of the zero polynomial".into(),
                ))
            }
            Some(0) => return Ok(Self::zero()),
            Some(n) => n,
        };
        // Horner's partial sums b_k = c_{k+1} + x0 * b_{k+1} are the quotient coefficients.
        let mut q = vec![0.0; n];
        let mut acc = 0.0;
        for k in (1..=n).rev() {
            acc = acc * x0 + self.coeffs[k];
            q[k - 1] = acc;
        }
        Ok(Self::new(q))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*x")?,
                _ => write!(f, "{c}*x^{k}")?,
            }
        }
        Ok(())
    }
}

fn combine(a: &[f64], b: &[f64], sign: f64) -> Polynomial {
    let n = a.len().max(b.len());
    let coeffs = (0..n)
        .map(|k| a.get(k).copied().unwrap_or(0.0) + sign * b.get(k).copied().unwrap_or(0.0))
        .collect();
    Polynomial::new(coeffs)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        combine(&self.coeffs, &rhs.coeffs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        combine(&self.coeffs, &rhs.coeffs, -1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Minimum admissible spacing between divided-difference nodes.
pub fn collision_threshold(nodes: &[f64]) -> f64 {
    let scale = nodes.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    1e-9 * (1.0 + scale)
}

/// Newton divided difference `f[t_0, ..., t_n]` via the triangular table.
///
/// Nodes closer than [`collision_threshold`] are refused; confluent
/// differences are never formed.
pub fn divided_difference<F>(f: F, nodes: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = nodes.iter().map(|&t| f(t)).collect();
    divided_difference_values(nodes, &values)
}

/// Same as [`divided_difference`] with the function values precomputed.
pub fn divided_difference_values(nodes: &[f64], values: &[f64]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::InvalidInput("divided difference needs at least one node".into()));
    }
    if nodes.len() != values.len() {
        return Err(Error::InvalidInput("node/value length mismatch".into()));
    }
    let threshold = collision_threshold(nodes);
    for i in 0..nodes.len() {
        for j in 0..i {
            if (nodes[i] - nodes[j]).abs() <= threshold {
                return Err(Error::NodeCollision { a: nodes[j], b: nodes[i], threshold });
            }
        }
    }
    let mut table = values.to_vec();
    let n = nodes.len();
    for level in 1..n {
        for i in (level..n).rev() {
            table[i] = (table[i] - table[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    Ok(table[n - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    #[test]
    fn eval_examples() {
        assert_eq!(Polynomial::zero().eval(3.0), 0.0);
        let p1 = p(&[-3f64.sqrt(), 2.0 * 3f64.sqrt()]);
        assert!(p1.eval(0.5).abs() < 1e-15);
        assert_eq!(p(&[1.0, 0.0, -1.0]).eval(2.0), -3.0);
    }

    #[test]
    fn arithmetic_examples() {
        let x = Polynomial::identity();
        assert_eq!((&x * &x).coeffs(), &[0.0, 0.0, 1.0]);
        let q = p(&[1.0, 2.0, 3.0]);
        assert!((&q - &q).is_zero());
        assert_eq!((&q - &q).degree(), None);
        assert_eq!(p(&[2.0, 4.0]).scale(0.5).coeffs(), &[1.0, 2.0]);
        assert!(p(&[1.0, 0.0, 0.0]).coeffs().len() == 1);
    }

    #[test]
    fn newton_quotient_examples() {
        assert_eq!(p(&[0.0, 0.0, 1.0]).newton_quotient(1.0).unwrap().coeffs(), &[1.0, 1.0]);
        let r3 = 3f64.sqrt();
        let q = p(&[-r3, 2.0 * r3]).newton_quotient(0.3).unwrap();
        assert_eq!(q.degree(), Some(0));
        assert!((q.coeff(0) - 2.0 * r3).abs() < 1e-15);
        assert!(p(&[5.0]).newton_quotient(2.0).unwrap().is_zero());
        assert!(Polynomial::zero().newton_quotient(1.0).is_err());
    }

    #[test]
    fn divided_difference_examples() {
        assert_eq!(divided_difference(|_| 4.2, &[0.3, 0.7]).unwrap(), 0.0);
        assert!((divided_difference(|x| x * x, &[0.0, 1.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        // f[1,2] = 7, f[2,4] = 28, f[1,2,4] = 21/3.
        assert!((divided_difference(|x| x * x * x, &[1.0, 2.0, 4.0]).unwrap() - 7.0).abs() < 1e-14);
        assert_eq!(divided_difference(|x| x.exp(), &[0.5]).unwrap(), 0.5f64.exp());
    }

    #[test]
    fn divided_difference_rejects_collisions() {
        let err = divided_difference(|x| x, &[0.1, 0.2, 0.1 + 1e-12]).unwrap_err();
        assert!(matches!(err, Error::NodeCollision { .. }));
        assert!(divided_difference(|x| x, &[]).is_err());
    }

    fn poly_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0..1.0f64, 1..=9)
    }

    /// Nodes in [-1, 1] with pairwise gaps >= 0.05.
    fn spaced_nodes(count: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.05..0.4f64, count).prop_flat_map(|gaps| {
            let total: f64 = gaps.iter().sum();
            (-1.0..(1.0 - total).max(-1.0 + 1e-9)).prop_map(move |start| {
                let mut x = start;
                let mut out = vec![x];
                for g in &gaps[1..] {
                    x += g;
                    out.push(x);
                }
                out
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn quotient_reconstructs(c in poly_strategy(), x0 in -1.0..1.0f64, t in -1.0..1.0f64) {
            let poly = p(&c);
            prop_assume!(!poly.is_zero());
            let q = poly.newton_quotient(x0).unwrap();
            let lhs = q.eval(t) * (t - x0) + poly.eval(x0);
            let rhs = poly.eval(t);
            let scale = c.iter().map(|a| a.abs()).sum::<f64>().max(1e-300);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale.max(rhs.abs()));
        }

        #[test]
        fn annihilates_low_degree(nodes in (2usize..=6).prop_flat_map(spaced_nodes), c in prop::collection::vec(-1.0..1.0f64, 5)) {
            let n = nodes.len() - 1;
            let poly = p(&c[..n]);
            let dd = divided_difference(|x| poly.eval(x), &nodes).unwrap();
            prop_assert!(dd.abs() < 1e-10);
            let dd_mono = divided_difference(|x| x.powi(n as i32), &nodes).unwrap();
            prop_assert!((dd_mono - 1.0).abs() < 1e-10);
        }

        #[test]
        fn symmetric_in_nodes(nodes in (2usize..=6).prop_flat_map(spaced_nodes), seed in 0usize..720) {
            let f = |x: f64| (1.3 * x).sin() + x.powi(4);
            let base = divided_difference(f, &nodes).unwrap();
            let mut perm = nodes.clone();
            let mut s = seed;
            for i in (1..perm.len()).rev() {
                perm.swap(i, s % (i + 1));
                s /= i + 1;
            }
            let other = divided_difference(f, &perm).unwrap();
            // Magnitude of the terms f(t_k) / prod (t_k - t_j) that cancel in the sum.
            let scale: f64 = (0..nodes.len())
                .map(|k| {
                    let denom: f64 = (0..nodes.len())
                        .filter(|&j| j != k)
                        .map(|j| (nodes[k] - nodes[j]).abs())
                        .product();
                    f(nodes[k]).abs() / denom
                })
                .sum();
            prop_assert!((base - other).abs() <= 1e-12 * scale.max(base.abs()));
        }
    }
}
