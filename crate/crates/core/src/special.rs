//! Special functions needed by the closed-form reducers and Stieltjes transforms:
//! the exponential integrals Ei and E1, Dawson's integral / erfi, and the
//! Faddeeva function.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Switch point between the power series and the asymptotic expansion of Ei.
const EI_ASYMPTOTIC_FROM: f64 = 40.0;
/// Switch point for Dawson's integral.
const DAWSON_ASYMPTOTIC_FROM: f64 = 6.0;

/// `exp(-x) * Ei(x)` for `x > 0`. Never overflows.
pub fn exp_neg_ei(x: f64) -> f64 {
    assert!(x > 0.0, "exp_neg_ei requires x > 0, got {x}");
    if x < EI_ASYMPTOTIC_FROM {
        ei_series(x) * (-x).exp()
    } else {
        // (1/x) * sum k!/x^k, truncated at the smallest term.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let next = term * k / x;
            if next >= term || next < 1e-18 * sum {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / x
    }
}

/// Exponential integral Ei(x) for `x > 0`.
pub fn ei(x: f64) -> f64 {
    assert!(x > 0.0, "ei requires x > 0, got {x}");
    if x < EI_ASYMPTOTIC_FROM {
        ei_series(x)
    } else {
        exp_neg_ei(x) * x.exp()
    }
}

// gamma + ln x + sum x^k / (k k!); every term is positive for x > 0.
fn ei_series(x: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow_over_fact = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        pow_over_fact *= x / kf;
        let term = pow_over_fact / kf;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    EULER_GAMMA + x.ln() + sum
}

/// Dawson's integral `F(y) = exp(-y^2) * int_0^y exp(t^2) dt`.
pub fn dawson(y: f64) -> f64 {
    let a = y.abs();
    let value = if a == 0.0 {
        0.0
    } else if a < DAWSON_ASYMPTOTIC_FROM {
        // exp(-y^2) * sum y^(2k+1) / (k! (2k+1)); positive terms.
        let y2 = a * a;
        let mut pow = a;
        let mut sum = a;
        for k in 1..400 {
            let kf = k as f64;
            pow *= y2 / kf;
            let term = pow / (2.0 * kf + 1.0);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum * (-y2).exp()
    } else {
        // 1/(2y) * sum (2k-1)!! / (2y^2)^k
        let inv = 1.0 / (2.0 * a * a);
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let next = term * (2.0 * k as f64 - 1.0) * inv;
            if next >= term || next < 1e-18 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * a)
    };
    value.copysign(y)
}

/// Imaginary error function erfi(y) = 2/sqrt(pi) * exp(y^2) * F(y).
pub fn erfi(y: f64) -> f64 {
    2.0 / PI.sqrt() * (y * y).exp() * dawson(y)
}

/// `exp(w) * E1(w)` for complex `w` off the closed negative real axis.
pub fn exp_e1(w: Complex64) -> Complex64 {
    let r = w.norm();
    // The power series loses about exp(|w| + Re w) relative accuracy.
    let use_series = r < 1.0 || (r + w.re <= 4.0 && r < 500.0);
    if use_series {
        e1_series(w) * w.exp()
    } else {
        exp_e1_continued_fraction(w)
    }
}

fn e1_series(w: Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow_over_fact = Complex64::new(1.0, 0.0);
    let minus_w = -w;
    for k in 1..2000 {
        let kf = k as f64;
        pow_over_fact = pow_over_fact * minus_w / kf;
        let term = pow_over_fact / kf;
        sum += term;
        if term.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - w.ln() - sum
}

// Modified Lentz on 1/(w+1- 1/(w+3- 4/(w+5- ...))).
fn exp_e1_continued_fraction(w: Complex64) -> Complex64 {
    const TINY: f64 = 1e-300;
    let mut b = w + 1.0;
    let mut c = Complex64::new(1.0 / TINY, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..200_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = an * d + b;
        if d.norm() < TINY {
            d = Complex64::new(TINY, 0.0);
        }
        c = b + an / c;
        if c.norm() < TINY {
            c = Complex64::new(TINY, 0.0);
        }
        d = d.inv();
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h
}

const FADDEEVA_TERMS: usize = 40;

fn faddeeva_coefficients() -> &'static (f64, Vec<f64>) {
    static COEFFS: OnceLock<(f64, Vec<f64>)> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let n = FADDEEVA_TERMS;
        let l = (n as f64 / 2f64.sqrt()).sqrt();
        // a_k = (1/pi) int_0^pi psi(L tan(theta/2)) cos(k theta) dtheta with
        // psi(t) = exp(-t^2) (L^2 + t^2); the integrand is smooth and periodic,
        // so the trapezoid rule converges geometrically.
        let samples = 4096;
        let h = PI / samples as f64;
        let psi: Vec<f64> = (0..=samples)
            .map(|j| {
                if j == samples {
                    return 0.0;
                }
                let t = l * (0.5 * j as f64 * h).tan();
                (-t * t).exp() * (l * l + t * t)
            })
            .collect();
        let coeffs = (1..=n)
            .map(|k| {
                let mut s = 0.5 * psi[0];
                for (j, v) in psi.iter().enumerate().take(samples).skip(1) {
                    s += v * (k as f64 * j as f64 * h).cos();
                }
                s * h / PI
            })
            .collect();
        (l, coeffs)
    })
}

/// Faddeeva function `w(z) = exp(-z^2) erfc(-iz)` in the closed upper half plane.
///
/// Rational expansion in `(L + iz)/(L - iz)` with 40 terms.
pub fn faddeeva_upper(z: Complex64) -> Complex64 {
    debug_assert!(z.im >= 0.0);
    let (l, coeffs) = faddeeva_coefficients();
    let i = Complex64::i();
    let denom = *l - i * z;
    let zz = (*l + i * z) / denom;
    let p = coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * zz + a);
    2.0 * p / (denom * denom) + 1.0 / (PI.sqrt() * denom)
}
