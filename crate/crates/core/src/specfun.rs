//! Scalar special functions used by the closed forms.
//!
//! `Psi(n, n; z)` here is the Tricomi confluent hypergeometric function
//! `U(n, n, z)`, fixed by the integral identity
//! `Gamma(n) U(n, n, z) = int_0^inf exp(-z t) t^(n-1) / (1 + t) dt`.

use crate::error::{Error, Result};
use crate::numerics::{quad_adaptive, QuadSpec};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;

/// Truncation policy for series evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    max_terms: usize,
    rel_tol: f64,
}

impl SeriesControl {
    pub fn new(max_terms: usize, rel_tol: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::InvalidParam {
                name: "max_terms",
                value: 0.0,
                range: ">= 1",
            });
        }
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::InvalidParam {
                name: "rel_tol",
                value: rel_tol,
                range: "(0, 1)",
            });
        }
        Ok(Self { max_terms, rel_tol })
    }

    pub fn max_terms(&self) -> usize {
        self.max_terms
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 200,
            rel_tol: 1e-10,
        }
    }
}

/// `psi(k)` for a positive integer: `-C + sum_{i<k} 1/i`.
pub fn digamma_nat(k: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain {
            func: "digamma_nat",
            arg: k as f64,
            expected: "k >= 1",
        });
    }
    Ok(-EULER_GAMMA + harmonic(k - 1))
}

/// `H_n = 1 + 1/2 + ... + 1/n`, with `H_0 = 0`.
pub fn harmonic(n: u32) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// `ln(n!)`.
pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn check_positive(func: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            arg: x,
            expected: "finite and > 0",
        })
    }
}

/// `x K1(x)` for `x >= 0`, continuous at the origin where it equals 1.
///
/// Uses the power-plus-logarithm series below 2 and Steed's continued
/// fraction above. Every value satisfies `exp(-x) <= x K1(x) <= 1`.
pub fn x_bessel_k1(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Ok(1.0);
    }
    check_positive("x_bessel_k1", x)?;
    let xk = if x < 2.0 { xk1_series(x) } else { xk1_steed(x) };
    assert!(
        (-x).exp() <= xk && xk <= 1.0,
        "x K1(x) = {xk:e} violates exp(-x) <= x K1(x) <= 1 at x = {x:e}"
    );
    Ok(xk)
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_positive("bessel_k1", x)?;
    Ok(x_bessel_k1(x)? / x)
}

fn xk1_series(x: f64) -> f64 {
    let t = 0.25 * x * x;
    // term = t^k / (k! (k+1)!)
    let mut term = 1.0;
    let mut psi_a = -EULER_GAMMA; // psi(k + 1)
    let mut psi_b = 1.0 - EULER_GAMMA; // psi(k + 2)
    let mut s_i1 = 0.0;
    let mut s_psi = 0.0;
    for k in 0..80 {
        s_i1 += term;
        s_psi += (psi_a + psi_b) * term;
        if term < 1e-18 * s_i1 {
            break;
        }
        let k1 = (k + 1) as f64;
        let k2 = (k + 2) as f64;
        term *= t / (k1 * k2);
        psi_a += 1.0 / k1;
        psi_b += 1.0 / k2;
    }
    1.0 + 2.0 * t * (0.5 * x).ln() * s_i1 - t * s_psi
}

fn xk1_steed(x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    let h = a1 * h;
    let k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    k0 * (x + 0.5 - h)
}

/// Exponential integral `E1(x) = int_1^inf exp(-x t) / t dt`.
pub fn exp_integral_e1(x: f64) -> Result<f64> {
    check_positive("exp_integral_e1", x)?;
    if x <= 1.0 {
        Ok(e1_series(x))
    } else {
        Ok(scaled_e1_fraction(x) * (-x).exp())
    }
}

/// `exp(x) E1(x)`, which stays representable for large `x`.
pub fn scaled_exp_integral_e1(x: f64) -> Result<f64> {
    check_positive("scaled_exp_integral_e1", x)?;
    if x <= 1.0 {
        Ok(x.exp() * e1_series(x))
    } else {
        Ok(scaled_e1_fraction(x))
    }
}

fn e1_series(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..200 {
        let fk = k as f64;
        term *= -x / fk;
        let contrib = term / fk;
        sum += contrib;
        if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

// Modified Lentz evaluation of the continued fraction for exp(x) E1(x).
fn scaled_e1_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `ln Psi(n, n; z)`; finite wherever `tricomi_psi` would overflow.
pub fn ln_tricomi_psi(n: u32, z: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain {
            func: "tricomi_psi",
            arg: n as f64,
            expected: "n >= 1",
        });
    }
    check_positive("tricomi_psi", z)?;

    // Substituting t = u / z:
    //   Psi(n, n; z) = z^(1-n) int_0^inf [u^(n-1) e^(-u) / (n-1)!] / (z + u) du
    let shape = (n - 1) as f64;
    let ln_norm = ln_factorial(n - 1);
    let integrand = move |u: f64| {
        if u <= 0.0 {
            return if n == 1 { 1.0 / z } else { 0.0 };
        }
        (-u + shape * u.ln() - ln_norm).exp() / (z + u)
    };

    let spec = QuadSpec::default().with_tolerances(0.0, 1e-12);
    let knee = z.min(1.0);
    let head = quad_adaptive(integrand, 0.0, knee, &spec)?;
    let tail = quad_adaptive(
        integrand,
        knee,
        f64::INFINITY,
        &QuadSpec::semi_infinite(shape.max(1.0)).with_tolerances(0.0, 1e-12),
    )?;
    let g = head.value + tail.value;
    if !(g > 0.0) {
        return Err(Error::Degenerate(format!(
            "tricomi_psi({n}, {z:e}): integral evaluated to {g:e}"
        )));
    }
    Ok(-shape * z.ln() + g.ln())
}

/// Tricomi function `Psi(n, n; z) = U(n, n, z)` for integer `n >= 1`, `z > 0`,
/// evaluated from its defining integral.
pub fn tricomi_psi(n: u32, z: f64) -> Result<f64> {
    ln_tricomi_psi(n, z).map(f64::exp)
}

/// `Psi(n, n; z)` from the polynomial-division identity
/// `Gamma(n) Psi = sum_{k=0}^{n-2} (-1)^(n-2-k) k! / z^(k+1) + (-1)^(n-1) e^z E1(z)`
/// with `E1` from its logarithmic series / continued fraction.
///
/// Alternating terms cancel badly for large `z` and large `n`; this path is a
/// cross-check for moderate arguments, not a replacement for `tricomi_psi`.
pub fn tricomi_psi_reduced(n: u32, z: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain {
            func: "tricomi_psi_reduced",
            arg: n as f64,
            expected: "n >= 1",
        });
    }
    check_positive("tricomi_psi_reduced", z)?;
    let mut acc = 0.0;
    let mut fact = 1.0;
    for k in 0..n.saturating_sub(1) {
        if k > 0 {
            fact *= k as f64;
        }
        let sign = if (n - 2 - k) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * fact / z.powi(k as i32 + 1);
    }
    let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
    acc += sign * scaled_exp_integral_e1(z)?;
    Ok(acc / ln_factorial(n - 1).exp())
}
