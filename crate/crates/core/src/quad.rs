//! Numerical integration.
//!
//! * [`integrate`]: tanh-sinh (double exponential) on a compact interval, with
//!   `x = a - ln u` for half-lines and `x = tan(pi (u - 1/2))` for the real line.
//! * [`gauss_rule`]: Gaussian rule of a probability measure from its Jacobi
//!   matrix (Golub-Welsch), eigenvalues by implicit QL.
//! * [`tensor_integrate`]: product rules for the multiple integrals.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measures::Support;
use crate::poly::collision_threshold;

/// Half-width of the truncated tanh-sinh abscissa range. At `t = 4` the
/// nodes sit about 5e-38 from the ends of (0, 1).
const T_MAX: f64 = 4.0;
const MIN_LEVEL: usize = 3;
pub const EVALUATION_BUDGET: usize = 1 << 20;
pub const TOL_ABS: f64 = 1e-14;
pub const MAX_GRID_POINTS: u128 = 10_000_000;
pub const MAX_TENSOR_DIM: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleKind {
    TanhSinh,
    GaussJacobiMatrix,
    MappedHalfLine,
    MappedRealLine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        pairwise_sum(
            &self
                .nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(x))
                .collect::<Vec<_>>(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Fixed-order pairwise summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// A tanh-sinh node on (0, 1): `u`, `1 - u` (both accurate), and `du/dt`.
#[derive(Clone, Copy)]
struct UnitNode {
    u: f64,
    v: f64,
    weight: f64,
}

fn unit_node(t: f64) -> UnitNode {
    let s = 0.5 * PI * t.sinh();
    let e = (-2.0 * s.abs()).exp();
    let small = e / (1.0 + e);
    let large = 1.0 / (1.0 + e);
    let (u, v) = if s >= 0.0 { (large, small) } else { (small, large) };
    // du/dt = (pi/4) cosh t sech^2 s, with sech^2 s = 4 e / (1 + e)^2
    let weight = 0.25 * PI * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    UnitNode { u, v, weight }
}

/// Maps a unit node into the support. Returns `None` when the image collapses
/// onto an endpoint (the node is then skipped).
fn map_node(support: &Support, node: UnitNode) -> Option<(f64, f64)> {
    let UnitNode { u, v, weight } = node;
    match *support {
        Support::Compact { a, b } => {
            let len = b - a;
            let x = if u <= 0.5 { a + len * u } else { b - len * v };
            if x <= a || x >= b {
                None
            } else {
                Some((x, weight * len))
            }
        }
        Support::HalfLine { a } => {
            if u == 0.0 {
                return None;
            }
            let y = if u <= 0.5 { -u.ln() } else { -(-v).ln_1p() };
            let x = a + y;
            if !x.is_finite() || x <= a {
                None
            } else {
                Some((x, weight / u))
            }
        }
        Support::RealLine => {
            let x = if u <= 0.5 {
                -1.0 / (PI * u).tan()
            } else {
                1.0 / (PI * v).tan()
            };
            if !x.is_finite() {
                None
            } else {
                Some((x, weight * PI * (1.0 + x * x)))
            }
        }
    }
}

fn rule_kind(support: &Support) -> RuleKind {
    match support {
        Support::Compact { .. } => RuleKind::TanhSinh,
        Support::HalfLine { .. } => RuleKind::MappedHalfLine,
        Support::RealLine => RuleKind::MappedRealLine,
    }
}

/// Integrates `f` over `support` to relative tolerance `tol` (absolute floor
/// [`TOL_ABS`]).
///
/// The error estimate is the last level-to-level difference of the
/// step-halving ladder. Exceeding [`EVALUATION_BUDGET`] yields
/// [`Error::BudgetExhausted`] carrying the best value.
pub fn integrate<F>(f: F, support: &Support, tol: f64) -> Result<IntegrationResult>
where
    F: Fn(f64) -> f64,
{
    let evaluations = std::cell::Cell::new(0usize);
    let eval_at = |t: f64| -> Result<f64> {
        match map_node(support, unit_node(t)) {
            None => Ok(0.0),
            Some((x, w)) => {
                evaluations.set(evaluations.get() + 1);
                let y = f(x);
                if !y.is_finite() {
                    return Err(Error::NonFinite { x });
                }
                Ok(w * y)
            }
        }
    };

    let mut h = 1.0;
    let n0 = T_MAX as i64;
    let mut terms = Vec::new();
    for k in -n0..=n0 {
        terms.push(eval_at(k as f64)?);
    }
    let mut estimate = h * pairwise_sum(&terms);
    let mut level = 0;
    loop {
        level += 1;
        h *= 0.5;
        let half_count = (T_MAX / h) as i64;
        terms.clear();
        let mut k = -half_count + 1;
        while k <= half_count {
            terms.push(eval_at(k as f64 * h)?);
            k += 2;
        }
        let next = 0.5 * estimate + h * pairwise_sum(&terms);
        let diff = (next - estimate).abs();
        estimate = next;
        if level >= MIN_LEVEL && diff <= (tol * next.abs()).max(TOL_ABS) {
            return Ok(IntegrationResult { value: next, error_estimate: diff, evaluations: evaluations.get() });
        }
        if evaluations.get() >= EVALUATION_BUDGET || 2 * half_count as usize > EVALUATION_BUDGET {
            return Err(Error::BudgetExhausted { value: next, error_estimate: diff });
        }
    }
}

/// Tanh-sinh values at successive levels, exposed for convergence diagnostics.
pub fn tanh_sinh_levels<F>(f: F, support: &Support, levels: usize) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    let eval_at = |t: f64| -> Result<f64> {
        match map_node(support, unit_node(t)) {
            None => Ok(0.0),
            Some((x, w)) => {
                let y = f(x);
                if !y.is_finite() {
                    return Err(Error::NonFinite { x });
                }
                Ok(w * y)
            }
        }
    };
    let n0 = T_MAX as i64;
    let mut h = 1.0;
    let terms: Result<Vec<f64>> = (-n0..=n0).map(|k| eval_at(k as f64)).collect();
    let mut estimate = pairwise_sum(&terms?);
    let mut out = vec![estimate];
    for _ in 0..levels {
        h *= 0.5;
        let half_count = (T_MAX / h) as i64;
        let mut terms = Vec::new();
        let mut k = -half_count + 1;
        while k <= half_count {
            terms.push(eval_at(k as f64 * h)?);
            k += 2;
        }
        estimate = 0.5 * estimate + h * pairwise_sum(&terms);
        out.push(estimate);
    }
    Ok(out)
}

/// A truncated tanh-sinh rule at a fixed level (nodes in the support).
pub fn tanh_sinh_rule(support: &Support, level: usize) -> QuadratureRule {
    let h = 0.5f64.powi(level as i32);
    let count = (T_MAX / h) as i64;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for k in -count..=count {
        if let Some((x, w)) = map_node(support, unit_node(k as f64 * h)) {
            nodes.push(x);
            weights.push(w * h);
        }
    }
    QuadratureRule { nodes, weights, kind: rule_kind(support) }
}

/// Eigenvalues of the symmetric tridiagonal matrix (`diag`, `offdiag`) and the
/// first components of the normalized eigenvectors, by implicit QL with
/// Wilkinson shifts.
pub fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if offdiag.len() + 1 < n {
        return Err(Error::InvalidInput("off-diagonal too short".into()));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&offdiag[..n - 1]);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    let max_iter = 50 * n;
    let mut total_iter = 0;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total_iter += 1;
            if total_iter > max_iter {
                return Err(Error::EigenFailure { size: n });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let fz = z[i + 1];
                z[i + 1] = s * z[i] + c * fz;
                z[i] = c * z[i] - s * fz;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok((order.iter().map(|&i| d[i]).collect(), order.iter().map(|&i| z[i]).collect()))
}

/// `m`-point Gaussian rule for the probability measure with recurrence
/// coefficients `recurrence(k) = (s_k, t_k)`.
pub fn gauss_rule<R>(recurrence: R, m: usize) -> Result<QuadratureRule>
where
    R: Fn(usize) -> Result<(f64, f64)>,
{
    if m == 0 {
        return Err(Error::InvalidInput("gauss rule needs at least one node".into()));
    }
    let mut diag = Vec::with_capacity(m);
    let mut off = Vec::with_capacity(m);
    for k in 0..m {
        let (s, t) = recurrence(k)?;
        diag.push(s);
        if k + 1 < m {
            off.push(t);
        }
    }
    let (nodes, first) = tridiagonal_eigen(&diag, &off)?;
    let weights = first.iter().map(|v| v * v).collect();
    Ok(QuadratureRule { nodes, weights, kind: RuleKind::GaussJacobiMatrix })
}

fn min_cross_gap(a: &[f64], b: &[f64]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    for &x in a {
        for &y in b {
            let gap = (x - y).abs();
            if best.map_or(true, |(g, _, _)| gap < g) {
                best = Some((gap, x, y));
            }
        }
    }
    best.map(|(_, x, y)| (x, y))
}

/// Builds one rule per dimension with sizes `m, m+1, m+2, ...`, bumping a
/// dimension by one point (up to three times) whenever one of its nodes comes
/// within the divided-difference collision threshold of an earlier dimension.
pub fn collision_free_rules<B>(build: B, dims: usize, m: usize) -> Result<Vec<QuadratureRule>>
where
    B: Fn(usize, usize) -> Result<QuadratureRule>,
{
    let mut rules: Vec<QuadratureRule> = Vec::with_capacity(dims);
    let mut size = m;
    for dim in 0..dims {
        if dim > 0 {
            size += 1;
        }
        let mut attempt = 0;
        loop {
            let rule = build(dim, size)?;
            let mut clash = None;
            for prev in &rules {
                let mut all = prev.nodes.clone();
                all.extend_from_slice(&rule.nodes);
                let threshold = collision_threshold(&all);
                if let Some((x, y)) = min_cross_gap(&prev.nodes, &rule.nodes) {
                    if (x - y).abs() <= threshold {
                        clash = Some((x, y, threshold));
                        break;
                    }
                }
            }
            match clash {
                None => {
                    rules.push(rule);
                    break;
                }
                Some((a, b, threshold)) => {
                    attempt += 1;
                    if attempt > 3 {
                        return Err(Error::NodeCollision { a, b, threshold });
                    }
                    size += 1;
                }
            }
        }
    }
    Ok(rules)
}

/// Sum of `kernel(t_0, ..., t_{d-1}) * prod w_i` over the tensor grid.
///
/// The summation order is fixed (pairwise within every dimension), so the
/// result is bit-reproducible.
pub fn tensor_integrate<K>(kernel: K, rules: &[QuadratureRule]) -> Result<f64>
where
    K: Fn(&[f64]) -> Result<f64>,
{
    if rules.is_empty() || rules.len() > MAX_TENSOR_DIM {
        return Err(Error::InvalidInput(format!(
            "tensor dimension must be in 1..={MAX_TENSOR_DIM}, got {}",
            rules.len()
        )));
    }
    let points: u128 = rules.iter().map(|r| r.len() as u128).product();
    if points > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge { points, limit: MAX_GRID_POINTS });
    }
    let mut point = vec![0.0; rules.len()];
    nested_sum(&kernel, rules, 0, &mut point)
}

fn nested_sum<K>(kernel: &K, rules: &[QuadratureRule], dim: usize, point: &mut [f64]) -> Result<f64>
where
    K: Fn(&[f64]) -> Result<f64>,
{
    let rule = &rules[dim];
    let mut parts = Vec::with_capacity(rule.len());
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        point[dim] = x;
        let inner = if dim + 1 == rules.len() {
            kernel(point)?
        } else {
            nested_sum(kernel, rules, dim + 1, point)?
        };
        parts.push(w * inner);
    }
    Ok(pairwise_sum(&parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: Support = Support::Compact { a: 0.0, b: 1.0 };

    fn legendre01(k: usize) -> Result<(f64, f64)> {
        let n = k as f64;
        Ok((0.5, (n + 1.0) / (2.0 * ((2.0 * n + 1.0) * (2.0 * n + 3.0)).sqrt())))
    }

    fn cheb2(_: usize) -> Result<(f64, f64)> {
        Ok((0.0, 0.5))
    }

    #[test]
    fn integrate_examples() {
        let r = integrate(|_| 1.0, &UNIT, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.error_estimate >= 0.0);

        let r = integrate(|x| (x / (1.0 - x)).ln().powi(2), &UNIT, 1e-8).unwrap();
        assert!((r.value - PI * PI / 3.0).abs() < 1e-8 * PI * PI / 3.0, "{}", r.value);

        let r = integrate(|x| (-x).exp(), &Support::HalfLine { a: 0.0 }, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);

        let r = integrate(|x| (-0.5 * x * x).exp(), &Support::RealLine, 1e-10).unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn log_squared_against_midpoint_oracle() {
        // Independent midpoint refinement; the endpoint log^2 singularity makes
        // it converge like h log^2 h, so compare loosely.
        let f = |x: f64| (x / (1.0 - x)).ln().powi(2);
        let n = 2_000_000;
        let h = 1.0 / n as f64;
        let mid: f64 = (0..n).map(|i| f((i as f64 + 0.5) * h)).sum::<f64>() * h;
        let ts = integrate(f, &UNIT, 1e-12).unwrap().value;
        assert!((mid - ts).abs() < 1e-4, "{mid} vs {ts}");
    }

    #[test]
    fn reproduces_unit_moments() {
        for k in 0..=10 {
            let r = integrate(|x| x.powi(k), &UNIT, 1e-12).unwrap();
            assert!((r.value - 1.0 / (k as f64 + 1.0)).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn sqrt_endpoint_singularity() {
        let r = integrate(|x| 1.0 / x.sqrt(), &UNIT, 1e-10).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let err = integrate(|x| if x > 0.5 { f64::NAN } else { 1.0 }, &UNIT, 1e-10).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn budget_exhaustion_carries_value() {
        // Discontinuous integrand forces the ladder to keep refining.
        let err = integrate(|x| if x < 1.0 / 3.0 { 1.0 } else { 0.0 }, &UNIT, 1e-15).unwrap_err();
        match err {
            Error::BudgetExhausted { value, .. } => assert!((value - 1.0 / 3.0).abs() < 1e-4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gauss_rule_examples() {
        let r = gauss_rule(legendre01, 1).unwrap();
        assert_eq!(r.nodes, vec![0.5]);
        assert_eq!(r.weights, vec![1.0]);

        let r = gauss_rule(legendre01, 2).unwrap();
        let d = 1.0 / (2.0 * 3f64.sqrt());
        assert!((r.nodes[0] - (0.5 - d)).abs() < 1e-15);
        assert!((r.nodes[1] - (0.5 + d)).abs() < 1e-15);
        assert!((r.weights[0] - 0.5).abs() < 1e-15 && (r.weights[1] - 0.5).abs() < 1e-15);

        for m in 1..=12 {
            let r = gauss_rule(cheb2, m).unwrap();
            for (k, x) in r.nodes.iter().enumerate() {
                let expected = ((m - k) as f64 * PI / (m as f64 + 1.0)).cos();
                assert!((x - expected).abs() < 1e-14, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn gauss_rule_exactness_and_mass() {
        for m in 1..=12 {
            let r = gauss_rule(legendre01, m).unwrap();
            assert_eq!(r.nodes.len(), r.weights.len());
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(r.nodes.windows(2).all(|w| w[0] < w[1]));
            for k in 0..2 * m {
                let got = r.apply(|x| x.powi(k as i32));
                let want = 1.0 / (k as f64 + 1.0);
                assert!(((got - want) / want).abs() < 1e-9, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn eigen_failure_is_not_triggered_by_diagonal_input() {
        let (vals, first) = tridiagonal_eigen(&[3.0, 1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
        assert_eq!(first, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn tensor_examples() {
        let a = gauss_rule(legendre01, 3).unwrap();
        let b = gauss_rule(legendre01, 4).unwrap();
        let one = tensor_integrate(|_| Ok(1.0), &[a.clone(), b.clone()]).unwrap();
        assert!((one - 1.0).abs() < 1e-14);
        let prod = tensor_integrate(|t| Ok(t[0] * t[1]), &[a.clone(), a.clone()]).unwrap();
        assert!((prod - 0.25).abs() < 1e-14);
        let rules = vec![a.clone(); 6];
        assert!(tensor_integrate(|_| Ok(1.0), &rules).is_err());
    }

    #[test]
    fn tensor_grid_limit() {
        let big = QuadratureRule {
            nodes: vec![0.5; 400],
            weights: vec![1.0 / 400.0; 400],
            kind: RuleKind::GaussJacobiMatrix,
        };
        let err = tensor_integrate(|_| Ok(1.0), &[big.clone(), big.clone(), big]).unwrap_err();
        assert!(matches!(err, Error::GridTooLarge { .. }));
    }

    #[test]
    fn collision_bump_resolves_shared_nodes() {
        // Chebyshev-U rules of sizes 5 and 7 share the node 0.
        let rules = collision_free_rules(|_, size| gauss_rule(cheb2, size), 4, 5).unwrap();
        let sizes: Vec<usize> = rules.iter().map(|r| r.len()).collect();
        assert_eq!(sizes[0], 5);
        assert_eq!(sizes[1], 6);
        assert!(sizes[2] >= 8, "{sizes:?}");
        for i in 0..rules.len() {
            for j in 0..i {
                for x in &rules[i].nodes {
                    for y in &rules[j].nodes {
                        assert!((x - y).abs() > 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn ladder_reaches_three_digits_by_level_six_on_log_integrand() {
        // Lebesgue level-one identity integrand: 1 / (ln^2(x/(1-x)) + pi^2).
        let f = |x: f64| 1.0 / ((x / (1.0 - x)).ln().powi(2) + PI * PI);
        let levels = tanh_sinh_levels(f, &UNIT, 6).unwrap();
        let exact = 1.0 / 12.0;
        assert!(((levels[6] - exact) / exact).abs() < 5e-4, "{levels:?}");
    }

    #[test]
    fn summation_is_deterministic() {
        let rule = tanh_sinh_rule(&UNIT, 6);
        let a = rule.apply(|x| (3.0 * x).sin());
        let b = rule.apply(|x| (3.0 * x).sin());
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
