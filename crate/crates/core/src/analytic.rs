//! Closed-form outage, capacity and finite-SNR diversity evaluators.
//!
//! Every evaluator that ships an approximation also has a numerically exact
//! counterpart (adaptive quadrature) that serves as its reference.

use std::f64::consts::LN_2;

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::model::{DerivedCoeffs, SystemParams, TargetRates};
use crate::numerics::{quad_adaptive, root_bracketed, series_accumulate, QuadSpec};
use crate::specfun::{self, SeriesControl, EULER_GAMMA};

/// Largest excursion outside [0, 1] treated as rounding noise.
const CLAMP_SLACK: f64 = 1e-6;

fn clamp_probability(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        return Ok(value);
    }
    if value.is_finite() && value > -CLAMP_SLACK && value < 1.0 + CLAMP_SLACK {
        debug!("{what}: clamping {value:e} into [0, 1]");
        return Ok(value.clamp(0.0, 1.0));
    }
    Err(Error::OutOfRange { what, value })
}

fn check_nonneg(func: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            arg: x,
            expected: ">= 0",
        })
    }
}

fn check_pos(func: &'static str, x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            func,
            arg: x,
            expected: "> 0",
        })
    }
}

/// CDF of `Z = a X Y / (b X + c)` with `X ~ Exp(omega1)`, `Y ~ Exp(omega2)`:
/// `F(z) = 1 - exp(-z b / (a omega2)) u K1(u)`, `u = sqrt(4 z c / (a omega1 omega2))`.
pub fn cdf_z(z: f64, a: f64, b: f64, c: f64, omega1: f64, omega2: f64) -> Result<f64> {
    check_nonneg("cdf_z", z)?;
    check_pos("cdf_z", a)?;
    check_nonneg("cdf_z", b)?;
    check_nonneg("cdf_z", c)?;
    check_pos("cdf_z", omega1)?;
    check_pos("cdf_z", omega2)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    let u = (4.0 * z * c / (a * omega1 * omega2)).sqrt();
    let survival = (-z * b / (a * omega2)).exp() * specfun::x_bessel_k1(u)?;
    clamp_probability("cdf_z", 1.0 - survival)
}

/// The two links of the exchange. `One` is the SNR observed at S1 (data of
/// S2), `Two` the SNR observed at S2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    One,
    Two,
}

/// `Pr(gamma_i < tau)`.
pub fn marginal_outage(
    params: &SystemParams,
    coeffs: &DerivedCoeffs,
    tau: f64,
    direction: Direction,
) -> Result<f64> {
    check_nonneg("marginal_outage", tau)?;
    match direction {
        Direction::One => cdf_z(
            tau,
            params.p2 / params.sigma2,
            coeffs.b,
            coeffs.c,
            params.omega1,
            params.omega2,
        ),
        Direction::Two => cdf_z(
            tau,
            params.p1 / params.sigma2,
            coeffs.b,
            coeffs.c,
            params.omega2,
            params.omega1,
        ),
    }
}

/// Intersection `(X0, Y0)` of the outage boundaries
/// `Y = k1 (b + c / X)` and `X = k2 (b + c / Y)` in the `(|h1|^2, |h2|^2)`
/// plane, with `k1 = sigma2 tau1 / P2`, `k2 = sigma2 tau2 / P1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerPoint {
    pub x0: f64,
    pub y0: f64,
}

impl CornerPoint {
    /// Largest relative residual of the two boundary equations.
    pub fn residual(&self, params: &SystemParams, coeffs: &DerivedCoeffs, tau1: f64, tau2: f64) -> f64 {
        let (k1, k2) = boundary_slopes(params, tau1, tau2);
        let ry = (self.y0 - k1 * (coeffs.b + coeffs.c / self.x0)).abs() / self.y0;
        let rx = (self.x0 - k2 * (coeffs.b + coeffs.c / self.y0)).abs() / self.x0;
        rx.max(ry)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerMethod {
    /// Positive roots of the two quadratics.
    ClosedForm,
    /// Bracketed root of the fixed-point equation in `X`.
    RootSolve,
}

fn boundary_slopes(params: &SystemParams, tau1: f64, tau2: f64) -> (f64, f64) {
    (params.sigma2 * tau1 / params.p2, params.sigma2 * tau2 / params.p1)
}

/// `(phi + sqrt(phi^2 + q)) / den`, without cancellation for negative `phi`.
fn positive_root(phi: f64, q: f64, den: f64) -> f64 {
    let disc = (phi * phi + q).sqrt();
    if phi >= 0.0 {
        (phi + disc) / den
    } else {
        q / (disc - phi) / den
    }
}

pub fn corner_point(
    params: &SystemParams,
    coeffs: &DerivedCoeffs,
    tau1: f64,
    tau2: f64,
    method: CornerMethod,
) -> Result<CornerPoint> {
    check_pos("corner_point", tau1)?;
    check_pos("corner_point", tau2)?;
    let (b, c) = (coeffs.b, coeffs.c);
    let (p1, p2, s2) = (params.p1, params.p2, params.sigma2);
    match method {
        CornerMethod::ClosedForm => {
            let phi1 = s2 * tau1 * tau2 * b * b / p1 + p2 * tau2 * c / p1 - tau1 * c;
            let phi2 = s2 * tau1 * tau2 * b * b / p2 + p1 * tau1 * c / p2 - tau2 * c;
            let x0 = positive_root(
                phi1,
                4.0 * s2 * tau1 * tau1 * tau2 * b * b * c / p1,
                2.0 * tau1 * b,
            );
            let y0 = positive_root(
                phi2,
                4.0 * s2 * tau2 * tau2 * tau1 * b * b * c / p2,
                2.0 * tau2 * b,
            );
            Ok(CornerPoint { x0, y0 })
        }
        CornerMethod::RootSolve => {
            let (k1, k2) = boundary_slopes(params, tau1, tau2);
            let y_of = |x: f64| k1 * (b + c / x);
            let h = |x: f64| x - k2 * (b + c / y_of(x));
            let lo = k2 * b;
            let hi = k2 * (b + c / (k1 * b));
            let x0 = root_bracketed(h, lo, hi, 1e-15 * hi).inspect_err(|_| {
                warn!("corner_point: no root for tau = ({tau1:e}, {tau2:e}), b = {b:e}, c = {c:e}, {params:?}");
            })?;
            Ok(CornerPoint { x0, y0: y_of(x0) })
        }
    }
}

/// How the two finite-range integrals of the joint outage are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegralMethod {
    /// Second-order Taylor expansion of the integrand about the midpoint.
    Taylor,
    /// Adaptive Gauss–Kronrod; the reference.
    Quadrature,
}

/// `int_0^v exp(-kappa / z - z / omega) dz`.
fn corner_integral(kappa: f64, omega: f64, v: f64, method: IntegralMethod) -> Result<f64> {
    let h = |z: f64| {
        if z <= 0.0 {
            0.0
        } else {
            (-kappa / z - z / omega).exp()
        }
    };
    match method {
        IntegralMethod::Quadrature => {
            let spec = QuadSpec::default().with_tolerances(1e-300, 1e-12);
            Ok(quad_adaptive(h, 0.0, v, &spec)?.value)
        }
        IntegralMethod::Taylor => {
            let nu = v / 2.0;
            let h0 = h(nu);
            let slope = kappa / (nu * nu) - 1.0 / omega;
            let derivs = [h0, h0 * slope, h0 * (slope * slope - 2.0 * kappa / (nu * nu * nu))];
            let mut sum = 0.0;
            let mut fact = 1.0;
            for (n, d) in derivs.iter().enumerate() {
                if n > 0 {
                    fact *= n as f64;
                }
                let p = n as i32 + 1;
                sum += d / (fact * p as f64) * ((v - nu).powi(p) - (-nu).powi(p));
            }
            Ok(sum)
        }
    }
}

/// `Pr(gamma1 < tau1, gamma2 < tau2)`.
pub fn joint_outage(
    params: &SystemParams,
    coeffs: &DerivedCoeffs,
    tau1: f64,
    tau2: f64,
    method: IntegralMethod,
) -> Result<f64> {
    check_nonneg("joint_outage", tau1)?;
    check_nonneg("joint_outage", tau2)?;
    if tau1 == 0.0 || tau2 == 0.0 {
        return Ok(0.0);
    }
    let (b, c) = (coeffs.b, coeffs.c);
    let (p1, p2, s2) = (params.p1, params.p2, params.sigma2);
    let (o1, o2) = (params.omega1, params.omega2);
    let cp = corner_point(params, coeffs, tau1, tau2, CornerMethod::ClosedForm)?;

    let e1 = (-s2 * tau1 * b / (p2 * o2)).exp();
    let e2 = (-s2 * tau2 * b / (p1 * o1)).exp();
    let i1 = corner_integral(s2 * tau2 * c / (p1 * o1), o2, cp.y0, method)?;
    let i2 = corner_integral(s2 * tau1 * c / (p2 * o2), o1, cp.x0, method)?;
    let both_above = (-cp.x0 / o1 - cp.y0 / o2).exp();
    let joint = 1.0 - both_above - e2 * i1 / o2 - e1 * i2 / o1;

    match method {
        IntegralMethod::Quadrature => clamp_probability("joint_outage", joint),
        IntegralMethod::Taylor => {
            if !(-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&joint) {
                warn!("joint_outage (taylor): {joint:e} outside [0, 1], clamped");
            }
            Ok(joint.clamp(0.0, 1.0))
        }
    }
}

/// Probability that either direction misses its rate target.
pub fn outage_exact(params: &SystemParams, targets: &TargetRates, method: IntegralMethod) -> Result<f64> {
    let coeffs = params.coeffs();
    let f1 = marginal_outage(params, &coeffs, targets.tau1, Direction::One)?;
    let f2 = marginal_outage(params, &coeffs, targets.tau2, Direction::Two)?;
    let joint = joint_outage(params, &coeffs, targets.tau1, targets.tau2, method)?;
    let p = f1 + f2 - joint;
    match method {
        IntegralMethod::Quadrature => clamp_probability("outage_exact", p),
        IntegralMethod::Taylor => Ok(p.clamp(0.0, 1.0)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Lower and upper outage bounds obtained by bounding the corner integrals
/// with the Bessel sandwich `exp(-x) <= x K1(x) <= 1`.
pub fn outage_bounds(params: &SystemParams, targets: &TargetRates) -> Result<OutageBounds> {
    let coeffs = params.coeffs();
    let (tau1, tau2) = (targets.tau1, targets.tau2);
    if tau1 == 0.0 || tau2 == 0.0 {
        // One direction never fails; the outage is the other marginal.
        let f1 = marginal_outage(params, &coeffs, tau1, Direction::One)?;
        let f2 = marginal_outage(params, &coeffs, tau2, Direction::Two)?;
        let p = f1.max(f2);
        return Ok(OutageBounds { lower: p, upper: p });
    }
    let (b, c) = (coeffs.b, coeffs.c);
    let (p1, p2, s2) = (params.p1, params.p2, params.sigma2);
    let (o1, o2) = (params.omega1, params.omega2);
    let cp = corner_point(params, &coeffs, tau1, tau2, CornerMethod::ClosedForm)?;
    let both_above = (-cp.x0 / o1 - cp.y0 / o2).exp();
    let t2 = (-s2 * tau2 * b / (p1 * o1) - cp.y0 / o2).exp();
    let t1 = (-s2 * tau1 * b / (p2 * o2) - cp.x0 / o1).exp();
    let u1 = (4.0 * s2 * tau1 * c / (p2 * o1 * o2)).sqrt();
    let u2 = (4.0 * s2 * tau2 * c / (p1 * o1 * o2)).sqrt();
    let lower = 1.0 + both_above - t2 - t1;
    let upper = 1.0 + both_above - t2 * specfun::x_bessel_k1(u2)? - t1 * specfun::x_bessel_k1(u1)?;
    Ok(OutageBounds {
        lower: clamp_probability("outage_bounds", lower)?,
        upper: clamp_probability("outage_bounds", upper)?,
    })
}

/// High-SNR outage: `2 - exp(-s2 tau2 b / (P1 omega1)) - exp(-s2 tau1 b / (P2 omega2))`.
pub fn outage_high_snr(params: &SystemParams, targets: &TargetRates) -> f64 {
    let b = params.coeffs().b;
    let e2 = (-params.sigma2 * targets.tau2 * b / (params.p1 * params.omega1)).exp();
    let e1 = (-params.sigma2 * targets.tau1 * b / (params.p2 * params.omega2)).exp();
    (2.0 - e2 - e1).clamp(0.0, 1.0)
}

/// Per-direction constants `(s, w)` of the capacity integrals
/// `int_0^inf exp(-s z) u K1(u) / (1 + z) dz`, `u = sqrt(4 w z)`.
fn capacity_directions(params: &SystemParams, coeffs: &DerivedCoeffs) -> [(f64, f64); 2] {
    let (o1, o2, s2) = (params.omega1, params.omega2, params.sigma2);
    [
        (s2 * coeffs.b / (params.p2 * o2), s2 * coeffs.c / (params.p2 * o1 * o2)),
        (s2 * coeffs.b / (params.p1 * o1), s2 * coeffs.c / (params.p1 * o1 * o2)),
    ]
}

/// Length over which `exp(-s z - 2 sqrt(w z))` falls by `1/e`.
fn decay_length(s: f64, w: f64) -> f64 {
    let r = if w > 0.0 {
        // (sqrt(w + s) - sqrt(w)) / s, rationalized
        1.0 / ((w + s).sqrt() + w.sqrt())
    } else {
        1.0 / s.sqrt()
    };
    (r * r).max(1e-300)
}

fn capacity_integral<F: Fn(f64) -> f64>(f: F, s: f64, w: f64) -> Result<f64> {
    let spec = QuadSpec::semi_infinite(decay_length(s, w)).with_tolerances(1e-15, 1e-11);
    Ok(quad_adaptive(f, 0.0, f64::INFINITY, &spec)?.value)
}

/// Ergodic sum capacity by quadrature of `(1 - F_i(z)) / (1 + z)` for both
/// directions. The reference for every other capacity evaluator.
pub fn capacity_quadrature(params: &SystemParams) -> Result<f64> {
    capacity_quadrature_with(params, &params.coeffs())
}

pub fn capacity_quadrature_with(params: &SystemParams, coeffs: &DerivedCoeffs) -> Result<f64> {
    let mut total = 0.0;
    for (s, w) in capacity_directions(params, coeffs) {
        let f = |z: f64| {
            let xk = specfun::x_bessel_k1((4.0 * w * z).sqrt()).unwrap_or(0.0);
            (-s * z).exp() * xk / (1.0 + z)
        };
        total += capacity_integral(f, s, w)?;
    }
    Ok(total / (2.0 * LN_2))
}

/// How `J_l = int_0^inf exp(-s t) t^l ln t / (1 + t) dt` terms are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JMethod {
    /// Closed-form approximation `J_l ~ l! s^-(l+1) (psi(l+1) - ln s)`,
    /// which yields the tight upper bound `C_e^t`.
    Approximate,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCapacity {
    pub value: f64,
    /// Terms summed per direction.
    pub terms: [usize; 2],
    /// Magnitude of the last retained term, summed over directions (in bits).
    pub tail_estimate: f64,
}

/// `s^(l+1) J_l / l!` in the scaled form
/// `int_0^inf [u^(l+1) e^(-u) / (l+1)!] (ln u - ln s) / (s + u) du * (l+1)`.
fn scaled_j(l: u32, s: f64) -> Result<f64> {
    let shape = (l + 1) as f64;
    let ln_norm = specfun::ln_factorial(l + 1);
    let ln_s = s.ln();
    let g = move |u: f64| {
        if u <= 0.0 {
            0.0
        } else {
            (-u + shape * u.ln() - ln_norm).exp() * (u.ln() - ln_s) / (s + u)
        }
    };
    let fin = QuadSpec::default().with_tolerances(1e-16, 1e-12);
    let tail = QuadSpec::semi_infinite(shape.max(1.0)).with_tolerances(1e-16, 1e-12);
    // The integrand changes sign at u = s.
    let head = quad_adaptive(g, 0.0, s, &fin)?.value;
    let rest = quad_adaptive(g, s, f64::INFINITY, &tail)?.value;
    Ok(head + rest)
}

fn series_direction(s: f64, w: f64, control: &SeriesControl, j_method: JMethod) -> Result<(f64, usize, f64)> {
    let q1 = specfun::tricomi_psi(1, s)?;
    if w == 0.0 {
        return Ok((q1, 0, 0.0));
    }
    let (ln_w, ln_s) = (w.ln(), s.ln());
    let mut failure: Option<Error> = None;
    let term = |l: usize| -> f64 {
        if failure.is_some() {
            return 0.0;
        }
        let l32 = l as u32;
        let lf = l as f64;
        let hl = specfun::harmonic(l32);
        let hl1 = hl + 1.0 / (lf + 1.0);
        let computed = (|| -> Result<f64> {
            let ln_pref = (lf + 1.0) * ln_w - specfun::ln_factorial(l32);
            let psi_part = (ln_pref + specfun::ln_tricomi_psi(l32 + 2, s)?).exp();
            let j_part = match j_method {
                JMethod::Approximate => {
                    ((lf + 1.0) * (ln_w - ln_s) - specfun::ln_factorial(l32 + 1)).exp()
                        * (specfun::digamma_nat(l32 + 1)? - ln_s)
                }
                JMethod::Quadrature => {
                    ((lf + 1.0) * (ln_w - ln_s) - specfun::ln_factorial(l32)).exp() * scaled_j(l32, s)?
                }
            };
            Ok((ln_w + 2.0 * EULER_GAMMA - hl - hl1) * psi_part + j_part)
        })();
        match computed {
            Ok(t) => t,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        }
    };
    let sum = series_accumulate(term, control);
    if let Some(e) = failure {
        return Err(e);
    }
    if !sum.converged {
        return Err(Error::SeriesFailed {
            what: "capacity_series",
            terms: sum.terms_used,
            last: sum.tail_estimate,
        });
    }
    Ok((q1 + sum.sum, sum.terms_used, sum.tail_estimate))
}

/// Ergodic capacity as `Q1 + Q2 + Q3`: a `Psi(1, 1; s)` term plus an
/// `l`-series of `Psi(l + 2, l + 2; s)` and `J_l` terms, per direction.
pub fn capacity_series(params: &SystemParams, control: &SeriesControl, j_method: JMethod) -> Result<SeriesCapacity> {
    capacity_series_with(params, &params.coeffs(), control, j_method)
}

pub fn capacity_series_with(
    params: &SystemParams,
    coeffs: &DerivedCoeffs,
    control: &SeriesControl,
    j_method: JMethod,
) -> Result<SeriesCapacity> {
    let mut value = 0.0;
    let mut tail = 0.0;
    let mut terms = [0; 2];
    for (k, (s, w)) in capacity_directions(params, coeffs).into_iter().enumerate() {
        let (v, n, t) = series_direction(s, w, control, j_method)?;
        value += v;
        tail += t;
        terms[k] = n;
    }
    Ok(SeriesCapacity {
        value: value / (2.0 * LN_2),
        terms,
        tail_estimate: tail / (2.0 * LN_2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityBounds {
    pub lower: f64,
    /// `C_e^t`.
    pub tight_upper: f64,
    /// `sum_i Psi(1, 1; s_i) / (2 ln 2)`.
    pub loose_upper: f64,
}

/// `lower <= C_e <= C_e^t <= loose_upper`. The lower bound replaces `u K1(u)`
/// by `exp(-u)` in both directions.
pub fn capacity_bounds(params: &SystemParams) -> Result<CapacityBounds> {
    let coeffs = params.coeffs();
    let mut lower = 0.0;
    let mut loose = 0.0;
    for (s, w) in capacity_directions(params, &coeffs) {
        lower += capacity_integral(|z: f64| (-s * z - (4.0 * w * z).sqrt()).exp() / (1.0 + z), s, w)?;
        loose += specfun::tricomi_psi(1, s)?;
    }
    let tight = capacity_series_with(params, &coeffs, &SeriesControl::default(), JMethod::Approximate)?;
    if tight.value > loose / (2.0 * LN_2) {
        warn!(
            "capacity_bounds: approximate tight bound {:e} exceeds the Psi-sum bound {:e}; the J_l approximation is poor here",
            tight.value,
            loose / (2.0 * LN_2)
        );
    }
    Ok(CapacityBounds {
        lower: lower / (2.0 * LN_2),
        tight_upper: tight.value,
        loose_upper: loose / (2.0 * LN_2),
    })
}

fn check_dmt_args(func: &'static str, r: f64, gamma: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain {
            func,
            arg: r,
            expected: "multiplexing gain r > 0",
        });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain {
            func,
            arg: gamma,
            expected: "SNR gamma > 0",
        });
    }
    Ok(())
}

/// `((1 + gamma)^r - 1) / gamma`.
fn threshold_ratio(r: f64, gamma: f64) -> f64 {
    (r * gamma.ln_1p()).exp_m1() / gamma
}

/// Corner abscissa for `P1 = P2 = gamma sigma2` and `tau1 = tau2 = (1 + gamma)^r - 1`,
/// where `X0 = Y0`.
pub fn x0_symmetric(r: f64, gamma: f64, coeffs: &DerivedCoeffs) -> Result<f64> {
    check_dmt_args("x0_symmetric", r, gamma)?;
    let g = threshold_ratio(r, gamma);
    let (b, c) = (coeffs.b, coeffs.c);
    Ok(0.5 * b * g * (1.0 + (1.0 + 4.0 * c / (b * b * g)).sqrt()))
}

/// Derivatives with respect to `gamma`: `a = dX0/dgamma` and
/// `b = d/dgamma [((1 + gamma)^r - 1) / gamma]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmtCoefficients {
    pub a: f64,
    pub b: f64,
}

pub fn dmt_coefficients(r: f64, gamma: f64, coeffs: &DerivedCoeffs) -> Result<DmtCoefficients> {
    check_dmt_args("dmt_coefficients", r, gamma)?;
    let g = threshold_ratio(r, gamma);
    let lead = r * gamma * ((r - 1.0) * gamma.ln_1p()).exp();
    let db = (lead - (r * gamma.ln_1p()).exp_m1()) / (gamma * gamma);
    let (b, c) = (coeffs.b, coeffs.c);
    let root = (1.0 + 4.0 * c / (b * b * g)).sqrt();
    let da = db * (0.5 * b * (1.0 + root) - c / (b * g * root));
    Ok(DmtCoefficients { a: da, b: db })
}

/// Outage lower bound in the symmetric setting, as a function of `(r, gamma)`.
/// Only the coefficients and fading means of `params` are used.
pub fn outage_lower_symmetric(r: f64, gamma: f64, params: &SystemParams) -> Result<f64> {
    let coeffs = params.coeffs();
    let x0 = x0_symmetric(r, gamma, &coeffs)?;
    let g = threshold_ratio(r, gamma);
    let (o1, o2) = (params.omega1, params.omega2);
    let both = (-(1.0 / o1 + 1.0 / o2) * x0).exp();
    let t12 = (-coeffs.b * g / o1 - x0 / o2).exp();
    let t21 = (-coeffs.b * g / o2 - x0 / o1).exp();
    Ok(1.0 + both - t12 - t21)
}

/// Finite-SNR diversity gain `-gamma d ln P_L / d gamma` of the symmetric
/// lower-bound outage `P_L`, for `P1 = P2 = gamma sigma2` and rates
/// `R = r log2(1 + gamma) / 2`.
pub fn dmt(r: f64, gamma: f64, params: &SystemParams) -> Result<f64> {
    check_dmt_args("dmt", r, gamma)?;
    let coeffs = params.coeffs();
    let x0 = x0_symmetric(r, gamma, &coeffs)?;
    let g = threshold_ratio(r, gamma);
    let DmtCoefficients { a, b: bb } = dmt_coefficients(r, gamma, &coeffs)?;
    let (o1, o2) = (params.omega1, params.omega2);
    let b = coeffs.b;
    let sum_inv = 1.0 / o1 + 1.0 / o2;
    let both = (-sum_inv * x0).exp();
    let mut num = a * sum_inv * both;
    let mut den = 1.0 + both;
    for (oi, oj) in [(o1, o2), (o2, o1)] {
        let e = (-b * g / oi - x0 / oj).exp();
        num -= (bb * b / oi + a / oj) * e;
        den -= e;
    }
    if !(den > 0.0) {
        return Err(Error::Degenerate(format!(
            "dmt: lower-bound outage underflows to {den:e} at gamma = {gamma:e}, r = {r}"
        )));
    }
    Ok(gamma * num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use proptest::prelude::*;

    fn reference(snr_db: f64, lambda: f64) -> SystemParams {
        SystemParams::reference(10f64.powf(snr_db / 10.0), lambda).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn cdf_limits() {
        assert_eq!(cdf_z(0.0, 3.0, 2.5, 4.0 / 3.0, 8.0, 8.0).unwrap(), 0.0);
        let (a, c, o1, o2) = (3.0, 4.0 / 3.0, 8.0, 2.0);
        let z = 1e4 * a * o1 * o2 / c;
        assert!(1.0 - cdf_z(z, a, 2.5, c, o1, o2).unwrap() < 1e-8);
        for z in [0.1, 1.0, 7.0] {
            let want = 1.0 - (-z * 2.5 / (a * o2)).exp();
            assert!((cdf_z(z, a, 2.5, 0.0, o1, o2).unwrap() - want).abs() < 1e-15);
        }
        assert!(cdf_z(-1.0, a, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(cdf_z(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn cdf_matches_conditional_integral() {
        // F(z) = 1 - int_0^inf exp(-x/o1)/o1 * exp(-z(bx + c)/(a x o2)) dx
        let (a, b, c, o1, o2) = (5.0, 1.7, 0.9, 3.0, 0.6);
        for z in [0.05, 0.4, 2.0, 9.0] {
            let surv = oracle::semi_infinite(
                |x| (-x / o1).exp() / o1 * (-z * (b * x + c) / (a * x * o2)).exp(),
                -30.0,
                6.0,
            );
            let got = cdf_z(z, a, b, c, o1, o2).unwrap();
            assert!((got - (1.0 - surv)).abs() < 1e-9, "z={z}: {got} vs {}", 1.0 - surv);
        }
    }

    #[test]
    fn marginal_is_cdf_with_direction_ordering() {
        let mut p = reference(20.0, 0.75).with_d1(0.3).unwrap();
        p.p1 = 40.0;
        let k = p.coeffs();
        let f1 = marginal_outage(&p, &k, 3.0, Direction::One).unwrap();
        let f2 = marginal_outage(&p, &k, 3.0, Direction::Two).unwrap();
        let c1 = cdf_z(3.0, p.p2 / p.sigma2, k.b, k.c, p.omega1, p.omega2).unwrap();
        let c2 = cdf_z(3.0, p.p1 / p.sigma2, k.b, k.c, p.omega2, p.omega1).unwrap();
        assert!((f1 - c1).abs() < 1e-12 && (f2 - c2).abs() < 1e-12);
        assert_eq!(marginal_outage(&p, &k, 0.0, Direction::One).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_corner_unit_multiplexing() {
        let k = DerivedCoeffs { b: 2.5, c: 4.0 / 3.0 };
        let want = 0.5 * k.b * (1.0 + (1.0 + 4.0 * k.c / (k.b * k.b)).sqrt());
        assert!((want - 2.9517).abs() < 1e-4);
        assert!(rel(x0_symmetric(1.0, 100.0, &k).unwrap(), want) < 1e-14);
    }

    #[test]
    fn symmetric_corner_matches_general_corner() {
        let p = reference(20.0, 0.75);
        let k = p.coeffs();
        for r in [0.25, 0.5, 1.0, 1.5] {
            for gamma in [3.0, 100.0, 1e3] {
                let q = p.with_symmetric_snr(gamma).unwrap();
                let tau = (r * f64::ln_1p(gamma)).exp_m1();
                let cp = corner_point(&q, &k, tau, tau, CornerMethod::RootSolve).unwrap();
                let cf = corner_point(&q, &k, tau, tau, CornerMethod::ClosedForm).unwrap();
                let x = x0_symmetric(r, gamma, &k).unwrap();
                assert!(rel(cp.x0, x) < 1e-9 && rel(cp.y0, x) < 1e-9);
                assert!(rel(cf.x0, cf.y0) < 1e-12);
            }
        }
    }

    #[test]
    fn corner_vanishes_at_high_snr() {
        let t = TargetRates::symmetric(1.0).unwrap();
        let mut last = f64::INFINITY;
        for db in [20.0, 40.0, 60.0, 80.0] {
            let p = reference(db, 0.75);
            let cp = corner_point(&p, &p.coeffs(), t.tau1, t.tau2, CornerMethod::ClosedForm).unwrap();
            assert!(cp.x0 < last);
            last = cp.x0;
        }
        assert!(last < 1e-3);
        let k = DerivedCoeffs { b: 2.5, c: 4.0 / 3.0 };
        assert!(x0_symmetric(0.5, 1e12, &k).unwrap() < 1e-2);
    }

    /// The corner `y0` using the cross term exactly as it is commonly printed,
    /// `P2 tau2 c / P2`, in place of `P1 tau1 c / P2`.
    fn y0_with_unsymmetrized_cross_term(p: &SystemParams, k: &DerivedCoeffs, t1: f64, t2: f64) -> f64 {
        let phi2 = p.sigma2 * t1 * t2 * k.b * k.b / p.p2 + p.p2 * t2 * k.c / p.p2 - t2 * k.c;
        positive_root(phi2, 4.0 * p.sigma2 * t2 * t2 * t1 * k.b * k.b * k.c / p.p2, 2.0 * t2 * k.b)
    }

    #[test]
    fn unsymmetrized_cross_term_misses_the_root() {
        let mut p = reference(20.0, 0.6).with_d1(0.35).unwrap();
        p.p1 = 250.0;
        let k = p.coeffs();
        let exact = corner_point(&p, &k, 3.0, 15.0, CornerMethod::RootSolve).unwrap();
        assert!(rel(y0_with_unsymmetrized_cross_term(&p, &k, 3.0, 15.0), exact.y0) > 1e-3);
    }

    #[test]
    fn joint_outage_vanishes_with_targets() {
        let p = reference(10.0, 0.5);
        let k = p.coeffs();
        assert_eq!(joint_outage(&p, &k, 0.0, 3.0, IntegralMethod::Quadrature).unwrap(), 0.0);
        let tiny = joint_outage(&p, &k, 1e-9, 1e-9, IntegralMethod::Quadrature).unwrap();
        assert!(tiny < 1e-8);
        let t = TargetRates::symmetric(0.0).unwrap();
        assert_eq!(outage_exact(&p, &t, IntegralMethod::Quadrature).unwrap(), 0.0);
    }

    #[test]
    fn outage_equals_tail_form() {
        // P_out = 1 + E - e2 T1 / o2 - e1 T2 / o1, with T the same integrands
        // taken from the corner to infinity.
        let mut p = reference(15.0, 0.6).with_d1(0.3).unwrap();
        p.p1 = 60.0;
        let t = TargetRates::new(1.0, 0.7).unwrap();
        let k = p.coeffs();
        let (s2, b, c) = (p.sigma2, k.b, k.c);
        let (o1, o2) = (p.omega1, p.omega2);
        let cp = corner_point(&p, &k, t.tau1, t.tau2, CornerMethod::RootSolve).unwrap();
        let k1 = s2 * t.tau2 * c / (p.p1 * o1);
        let k2 = s2 * t.tau1 * c / (p.p2 * o2);
        let tail1 = oracle::semi_infinite(|z| (-k1 / z - z / o2).exp(), cp.y0.ln(), 7.0);
        let tail2 = oracle::semi_infinite(|z| (-k2 / z - z / o1).exp(), cp.x0.ln(), 8.0);
        let e1 = (-s2 * t.tau1 * b / (p.p2 * o2)).exp();
        let e2 = (-s2 * t.tau2 * b / (p.p1 * o1)).exp();
        let both = (-cp.x0 / o1 - cp.y0 / o2).exp();
        let want = 1.0 + both - e2 * tail1 / o2 - e1 * tail2 / o1;
        let got = outage_exact(&p, &t, IntegralMethod::Quadrature).unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn taylor_matches_quadrature_on_a_near_polynomial_integrand() {
        // Tiny kappa and omega >> v: the integrand is almost linear.
        let q = corner_integral(1e-9, 1e3, 0.2, IntegralMethod::Quadrature).unwrap();
        let t = corner_integral(1e-9, 1e3, 0.2, IntegralMethod::Taylor).unwrap();
        assert!(rel(t, q) < 1e-6);
        let exact = oracle::finite(|z| if z > 0.0 { (-0.3 / z - z / 2.0).exp() } else { 0.0 }, 0.0, 1.5);
        let q = corner_integral(0.3, 2.0, 1.5, IntegralMethod::Quadrature).unwrap();
        assert!(rel(q, exact) < 1e-9);
    }

    #[test]
    fn outage_decreases_with_snr() {
        let t = TargetRates::symmetric(1.0).unwrap();
        let mut last = 1.0;
        for db in (0..=30).step_by(5) {
            let v = outage_exact(&reference(db as f64, 0.75), &t, IntegralMethod::Quadrature).unwrap();
            assert!(v <= last, "{db} dB: {v} > {last}");
            last = v;
        }
    }

    #[test]
    fn reference_outage_values() {
        let t = TargetRates::symmetric(1.0).unwrap();
        let v0 = outage_exact(&reference(0.0, 0.75), &t, IntegralMethod::Quadrature).unwrap();
        let v20 = outage_exact(&reference(20.0, 0.75), &t, IntegralMethod::Quadrature).unwrap();
        assert!((v0 - 0.85772).abs() < 1e-4, "{v0}");
        assert!((v20 - 0.022637).abs() < 1e-5, "{v20}");
    }

    #[test]
    fn bounds_at_zero_rate() {
        let t = TargetRates::symmetric(0.0).unwrap();
        let b = outage_bounds(&reference(10.0, 0.3), &t).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }

    #[test]
    fn symmetric_lower_bound_matches_general_lower_bound() {
        let p = reference(20.0, 0.75);
        for r in [0.25, 0.5, 0.75] {
            let t = TargetRates::from_multiplexing_gain(r, 100.0).unwrap();
            let general = outage_bounds(&p, &t).unwrap().lower;
            let sym = outage_lower_symmetric(r, 100.0, &p).unwrap();
            assert!(rel(sym, general) < 1e-10);
        }
    }

    #[test]
    fn high_snr_limit() {
        let t = TargetRates::symmetric(1.0).unwrap();
        let mut p = reference(20.0, 0.75);
        p.sigma2 = 1e-12;
        assert!(outage_high_snr(&p, &t) < 1e-9);
        let p = reference(40.0, 0.75);
        let exact = outage_exact(&p, &t, IntegralMethod::Quadrature).unwrap();
        let bounds = outage_bounds(&p, &t).unwrap();
        let hs = outage_high_snr(&p, &t);
        for v in [exact, bounds.lower, bounds.upper] {
            assert!((v - hs).abs() < 1e-3);
        }
    }

    #[test]
    fn capacity_extremes_vanish() {
        for lam in [1e-6, 1.0 - 1e-6] {
            let c = capacity_quadrature(&reference(20.0, lam)).unwrap();
            assert!((0.0..1e-2).contains(&c), "lambda {lam}: {c}");
        }
    }

    #[test]
    fn capacity_quadrature_matches_fading_expectation() {
        // E[log2(1 + gamma1) + log2(1 + gamma2)] / 2 over the two exponential gains.
        let p = reference(20.0, 0.5).with_d1(0.35).unwrap();
        let k = p.coeffs();
        let a = p.p1 / p.sigma2;
        let (o1, o2) = (p.omega1, p.omega2);
        let want = oracle::semi_infinite_2d(
            |x, y| {
                let pdf = (-x / o1 - y / o2).exp() / (o1 * o2);
                let g1 = a * x * y / (k.b * x + k.c);
                let g2 = a * x * y / (k.b * y + k.c);
                pdf * (g1.ln_1p() + g2.ln_1p())
            },
            [-30.0, -30.0],
            [(60.0 * o1).ln(), (60.0 * o2).ln()],
            3000,
        ) / (2.0 * LN_2);
        let got = capacity_quadrature(&p).unwrap();
        assert!(rel(got, want) < 1e-8, "{got} vs {want}");
    }

    #[test]
    fn series_matches_quadrature() {
        for lam in [0.3, 0.5, 0.75] {
            let p = reference(20.0, lam);
            let q = capacity_quadrature(&p).unwrap();
            let s = capacity_series(&p, &SeriesControl::default(), JMethod::Quadrature).unwrap();
            assert!(rel(s.value, q) < 1e-6, "lambda {lam}: {} vs {q}", s.value);
            assert!(s.terms[0] > 1 && s.terms[0] < 200);
        }
    }

    #[test]
    fn series_without_relay_penalty_is_first_term() {
        let p = reference(20.0, 0.75);
        let k = DerivedCoeffs { b: p.coeffs().b, c: 0.0 };
        let s = capacity_series_with(&p, &k, &SeriesControl::default(), JMethod::Quadrature).unwrap();
        let want: f64 = capacity_directions(&p, &k)
            .iter()
            .map(|&(s, _)| specfun::tricomi_psi(1, s).unwrap())
            .sum::<f64>()
            / (2.0 * LN_2);
        assert!(rel(s.value, want) < 1e-14);
        let q = capacity_quadrature_with(&p, &k).unwrap();
        assert!(rel(q, want) < 1e-9);
    }

    #[test]
    fn series_reports_exhaustion() {
        let p = reference(0.0, 0.05);
        let err = capacity_series(&p, &SeriesControl::new(3, 1e-14).unwrap(), JMethod::Quadrature).unwrap_err();
        assert!(matches!(err, Error::SeriesFailed { .. }));
    }

    #[test]
    fn capacity_bound_chain() {
        for lam in [0.1, 0.3, 0.5, 0.75, 0.9] {
            let p = reference(20.0, lam);
            let ce = capacity_quadrature(&p).unwrap();
            let b = capacity_bounds(&p).unwrap();
            assert!(b.lower <= ce + 1e-9, "lambda {lam}");
            assert!(ce <= b.tight_upper + 1e-9, "lambda {lam}");
            assert!(b.tight_upper <= b.loose_upper + 1e-9, "lambda {lam}");
        }
    }

    #[test]
    fn unit_multiplexing_has_flat_threshold_ratio() {
        let k = DerivedCoeffs { b: 2.5, c: 4.0 / 3.0 };
        assert!(dmt_coefficients(1.0, 100.0, &k).unwrap().b.abs() < 1e-16);
        assert!(x0_symmetric(0.0, 100.0, &k).is_err());
        assert!(dmt(-0.5, 100.0, &reference(20.0, 0.75)).is_err());
    }

    #[test]
    fn derivative_coefficients_match_finite_differences() {
        let k = reference(20.0, 0.75).coeffs();
        for (r, gamma) in [(0.5, 100.0), (0.25, 10.0), (0.75, 31.6), (1.5, 5.0)] {
            let h = 1e-4 * gamma;
            let c = dmt_coefficients(r, gamma, &k).unwrap();
            let fa = (x0_symmetric(r, gamma + h, &k).unwrap() - x0_symmetric(r, gamma - h, &k).unwrap()) / (2.0 * h);
            let fb = (threshold_ratio(r, gamma + h) - threshold_ratio(r, gamma - h)) / (2.0 * h);
            assert!(rel(c.a, fa) < 1e-4, "A at ({r}, {gamma}): {} vs {fa}", c.a);
            assert!(rel(c.b, fb) < 1e-4, "B at ({r}, {gamma}): {} vs {fb}", c.b);
        }
    }

    #[test]
    fn dmt_is_log_derivative_of_lower_bound() {
        let p = reference(20.0, 0.75);
        for r in [0.25, 0.5, 0.75] {
            for db in [10.0, 15.0, 20.0] {
                let gamma = 10f64.powf(db / 10.0);
                let h = 1e-4 * gamma;
                let lp = outage_lower_symmetric(r, gamma + h, &p).unwrap().ln();
                let lm = outage_lower_symmetric(r, gamma - h, &p).unwrap().ln();
                let fd = -gamma * (lp - lm) / (2.0 * h);
                let d = dmt(r, gamma, &p).unwrap();
                assert!(rel(d, fd) < 1e-6, "({r}, {db} dB): {d} vs {fd}");
            }
        }
    }

    #[test]
    fn diversity_grows_with_snr_and_falls_with_rate() {
        let p = reference(20.0, 0.75);
        let ds: Vec<f64> = [5.0, 10.0, 15.0, 20.0]
            .iter()
            .map(|db: &f64| dmt(0.5, 10f64.powf(db / 10.0), &p).unwrap())
            .collect();
        assert!(ds.windows(2).all(|w| w[1] > w[0]), "{ds:?}");
        assert!((ds[3] - 0.4351).abs() < 1e-3);
        let dr: Vec<f64> = [0.25, 0.5, 0.75, 1.0].iter().map(|&r| dmt(r, 100.0, &p).unwrap()).collect();
        assert!(dr.windows(2).all(|w| w[1] < w[0]), "{dr:?}");
    }

    fn random_params() -> impl Strategy<Value = (SystemParams, TargetRates)> {
        (0.05f64..0.95, 0.0f64..40.0, 0.1f64..0.9, 0.0f64..1.0, 0.3f64..2.0, 0.3f64..2.0, 0.3f64..2.0).prop_map(
            |(lam, db, d1, eps, asym, t1, t2)| {
                let snr = 10f64.powf(db / 10.0);
                let p = SystemParams::new(snr, snr * asym, 1.0, 1.0, lam, eps, d1, 3.0).unwrap();
                (p, TargetRates::new(t1, t2).unwrap())
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cdf_is_monotone_and_bounded(a in 0.1f64..100.0, b in 0.0f64..5.0, c in 0.0f64..5.0,
                                      o1 in 0.1f64..50.0, o2 in 0.1f64..50.0) {
            let mut last = 0.0;
            for i in 0..60 {
                let z = 1e-3 * 1.3f64.powi(i);
                let f = cdf_z(z, a, b, c, o1, o2).unwrap();
                prop_assert!((0.0..=1.0).contains(&f));
                prop_assert!(f >= last - 1e-15);
                last = f;
            }
        }

        #[test]
        fn corner_methods_agree((p, t) in random_params()) {
            let k = p.coeffs();
            let a = corner_point(&p, &k, t.tau1, t.tau2, CornerMethod::ClosedForm).unwrap();
            let b = corner_point(&p, &k, t.tau1, t.tau2, CornerMethod::RootSolve).unwrap();
            prop_assert!(rel(a.x0, b.x0) < 1e-9 && rel(a.y0, b.y0) < 1e-9);
            prop_assert!(a.residual(&p, &k, t.tau1, t.tau2) < 1e-9);
            prop_assert!(b.residual(&p, &k, t.tau1, t.tau2) < 1e-9);
        }

        #[test]
        fn joint_below_each_marginal((p, t) in random_params()) {
            let k = p.coeffs();
            let j = joint_outage(&p, &k, t.tau1, t.tau2, IntegralMethod::Quadrature).unwrap();
            let f1 = marginal_outage(&p, &k, t.tau1, Direction::One).unwrap();
            let f2 = marginal_outage(&p, &k, t.tau2, Direction::Two).unwrap();
            prop_assert!(j <= f1.min(f2) + 1e-12);
        }

        #[test]
        fn outage_bound_chain((p, t) in random_params()) {
            let exact = outage_exact(&p, &t, IntegralMethod::Quadrature).unwrap();
            let b = outage_bounds(&p, &t).unwrap();
            prop_assert!(b.lower <= exact + 1e-9, "{} > {}", b.lower, exact);
            prop_assert!(exact <= b.upper + 1e-9, "{} > {}", exact, b.upper);
        }

        #[test]
        fn capacity_bound_ordering((p, _t) in random_params()) {
            // C_e <= C_e^t is not guaranteed away from the high-SNR regime;
            // see the capacity sweep integration test.
            let ce = capacity_quadrature(&p).unwrap();
            let b = capacity_bounds(&p).unwrap();
            prop_assert!(b.lower <= ce + 1e-9);
            prop_assert!(ce <= b.loose_upper + 1e-9);
        }
    }
}
