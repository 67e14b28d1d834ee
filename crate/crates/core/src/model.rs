//! Protocol model: parameters, fading draws, harvested relay power,
//! end-to-end SNRs and achievable rates.
//!
//! Sources S1 and S2 exchange data through a relay in two half slots. In the
//! multiple-access slot the relay diverts a fraction `lambda` of its received
//! power to an energy harvester and forwards the remaining signal in the
//! broadcast slot, powered only by what it harvested.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::specfun;

/// Full protocol parameterization. All quantities are linear (not dB).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Transmit power of S1.
    pub p1: f64,
    /// Transmit power of S2.
    pub p2: f64,
    /// Total noise power `sigma_a^2 + sigma_b^2`.
    pub sigma2: f64,
    /// Energy conversion efficiency, `0 < eta <= 1`.
    pub eta: f64,
    /// Power splitting ratio, `0 < lambda < 1`.
    pub lambda: f64,
    /// Share of the noise added by passband-to-baseband conversion.
    pub epsilon: f64,
    /// Normalized S1-to-relay distance (S1 to S2 is 1).
    pub d1: f64,
    pub path_loss_exp: f64,
    /// Mean squared gain of the S1-relay channel.
    pub omega1: f64,
    /// Mean squared gain of the S2-relay channel.
    pub omega2: f64,
}

fn require(name: &'static str, value: f64, ok: bool, range: &'static str) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParam { name, value, range })
    }
}

impl SystemParams {
    /// Builds parameters with fading means set by the geometry:
    /// `omega1 = d1^-alpha`, `omega2 = (1 - d1)^-alpha`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        p1: f64,
        p2: f64,
        sigma2: f64,
        eta: f64,
        lambda: f64,
        epsilon: f64,
        d1: f64,
        path_loss_exp: f64,
    ) -> Result<Self> {
        require("d1", d1, d1 > 0.0 && d1 < 1.0, "0 < d1 < 1")?;
        require(
            "path_loss_exp",
            path_loss_exp,
            path_loss_exp.is_finite() && path_loss_exp >= 0.0,
            "finite and >= 0",
        )?;
        let params = Self {
            p1,
            p2,
            sigma2,
            eta,
            lambda,
            epsilon,
            d1,
            path_loss_exp,
            omega1: d1.powf(-path_loss_exp),
            omega2: (1.0 - d1).powf(-path_loss_exp),
        };
        params.validate()?;
        Ok(params)
    }

    /// Defaults of the reference setup: relay midway, `eta = 1`,
    /// `epsilon = 1/2`, path-loss exponent 3, unit noise, given SNR and `lambda`.
    pub fn reference(snr_linear: f64, lambda: f64) -> Result<Self> {
        Self::new(snr_linear, snr_linear, 1.0, 1.0, lambda, 0.5, 0.5, 3.0)
    }

    pub fn validate(&self) -> Result<()> {
        require("p1", self.p1, self.p1 > 0.0 && self.p1.is_finite(), "finite and > 0")?;
        require("p2", self.p2, self.p2 > 0.0 && self.p2.is_finite(), "finite and > 0")?;
        require(
            "sigma2",
            self.sigma2,
            self.sigma2 > 0.0 && self.sigma2.is_finite(),
            "finite and > 0",
        )?;
        require("eta", self.eta, self.eta > 0.0 && self.eta <= 1.0, "0 < eta <= 1")?;
        require(
            "lambda",
            self.lambda,
            self.lambda > 0.0 && self.lambda < 1.0,
            "0 < lambda < 1",
        )?;
        require(
            "epsilon",
            self.epsilon,
            (0.0..=1.0).contains(&self.epsilon),
            "0 <= epsilon <= 1",
        )?;
        require("d1", self.d1, self.d1 > 0.0 && self.d1 < 1.0, "0 < d1 < 1")?;
        require(
            "omega1",
            self.omega1,
            self.omega1 > 0.0 && self.omega1.is_finite(),
            "finite and > 0",
        )?;
        require(
            "omega2",
            self.omega2,
            self.omega2 > 0.0 && self.omega2.is_finite(),
            "finite and > 0",
        )?;
        Ok(())
    }

    /// Same parameters with both transmit powers set to `snr * sigma2`.
    pub fn with_symmetric_snr(mut self, snr_linear: f64) -> Result<Self> {
        self.p1 = snr_linear * self.sigma2;
        self.p2 = snr_linear * self.sigma2;
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    /// Moves the relay and recomputes both fading means.
    pub fn with_d1(self, d1: f64) -> Result<Self> {
        Self::new(
            self.p1,
            self.p2,
            self.sigma2,
            self.eta,
            self.lambda,
            self.epsilon,
            d1,
            self.path_loss_exp,
        )
    }

    pub fn coeffs(&self) -> DerivedCoeffs {
        derived_coeffs(self)
    }
}

/// `b = 1 + epsilon lambda / (1 - lambda)` and `c = 1 / (eta lambda)`, the two
/// constants through which the SNRs depend on the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedCoeffs {
    pub b: f64,
    pub c: f64,
}

pub fn derived_coeffs(params: &SystemParams) -> DerivedCoeffs {
    let lambda = params.lambda;
    DerivedCoeffs {
        b: 1.0 + params.epsilon * lambda / (1.0 - lambda),
        c: 1.0 / (params.eta * lambda),
    }
}

/// Rate targets `T1`, `T2` (bits/s/Hz) and the SNR thresholds
/// `tau_i = 2^(2 T_i) - 1` they induce under the half-duplex rate law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetRates {
    pub t1: f64,
    pub t2: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl TargetRates {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        require("t1", t1, t1 >= 0.0 && t1.is_finite(), "finite and >= 0")?;
        require("t2", t2, t2 >= 0.0 && t2.is_finite(), "finite and >= 0")?;
        Ok(Self {
            t1,
            t2,
            tau1: rate_threshold(t1),
            tau2: rate_threshold(t2),
        })
    }

    pub fn symmetric(t: f64) -> Result<Self> {
        Self::new(t, t)
    }

    /// Symmetric targets `R = r * log2(1 + snr) / 2`, for which
    /// `tau = (1 + snr)^r - 1`.
    pub fn from_multiplexing_gain(r: f64, snr_linear: f64) -> Result<Self> {
        require("r", r, r >= 0.0 && r.is_finite(), "finite and >= 0")?;
        require("snr", snr_linear, snr_linear > 0.0, "> 0")?;
        let t = 0.5 * r * snr_linear.ln_1p() / std::f64::consts::LN_2;
        let tau = (r * snr_linear.ln_1p()).exp_m1();
        Ok(Self {
            t1: t,
            t2: t,
            tau1: tau,
            tau2: tau,
        })
    }
}

/// `2^(2 t) - 1`.
pub fn rate_threshold(t: f64) -> f64 {
    if t < 0.25 {
        (2.0 * t * std::f64::consts::LN_2).exp_m1()
    } else {
        (2.0 * t).exp2() - 1.0
    }
}

/// One fading realization: squared channel gains `|h1|^2`, `|h2|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub g1: f64,
    pub g2: f64,
}

/// Random stream for `(seed, index)`: ChaCha8 keyed by `seed`, with `index`
/// selecting one of its 2^64 independent streams.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Rayleigh block fading: `|h_i|^2` exponential with mean `omega_i`.
pub fn sample_channel<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> ChannelDraw {
    let e1: f64 = rng.sample(Exp1);
    let e2: f64 = rng.sample(Exp1);
    ChannelDraw {
        g1: params.omega1 * e1,
        g2: params.omega2 * e2,
    }
}

/// Relay transmit power `eta lambda (P1 g1 + P2 g2)`: everything harvested in
/// the first half slot spent over the second.
pub fn relay_power(params: &SystemParams, draw: &ChannelDraw) -> f64 {
    params.eta * params.lambda * (params.p1 * draw.g1 + params.p2 * draw.g2)
}

/// End-to-end SNRs after self-interference cancellation. `gamma1` is observed
/// at S1 (carrying S2's data), `gamma2` at S2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSnrs {
    pub gamma1: f64,
    pub gamma2: f64,
}

/// `gamma1 = (P2/s2) g1 g2 / (b g1 + c)`, `gamma2 = (P1/s2) g1 g2 / (b g2 + c)`.
/// Zero gains give zero SNR.
pub fn end_to_end_snrs(params: &SystemParams, draw: &ChannelDraw) -> LinkSnrs {
    snrs_with(params, &params.coeffs(), draw)
}

#[inline]
pub(crate) fn snrs_with(params: &SystemParams, k: &DerivedCoeffs, draw: &ChannelDraw) -> LinkSnrs {
    let (g1, g2) = (draw.g1, draw.g2);
    if g1 <= 0.0 || g2 <= 0.0 {
        return LinkSnrs {
            gamma1: 0.0,
            gamma2: 0.0,
        };
    }
    let prod = g1 * g2 / params.sigma2;
    LinkSnrs {
        gamma1: params.p2 * prod / (k.b * g1 + k.c),
        gamma2: params.p1 * prod / (k.b * g2 + k.c),
    }
}

/// The same SNRs written as the direct-link SNR divided by the
/// `1 + epsilon lambda/(1-lambda) + 1/(eta lambda g)` degradation of the
/// harvest-powered relay.
pub fn end_to_end_snrs_harvest_form(params: &SystemParams, draw: &ChannelDraw) -> LinkSnrs {
    let (g1, g2) = (draw.g1, draw.g2);
    if g1 <= 0.0 || g2 <= 0.0 {
        return LinkSnrs {
            gamma1: 0.0,
            gamma2: 0.0,
        };
    }
    let el = params.eta * params.lambda;
    let base = 1.0 + params.epsilon * params.lambda / (1.0 - params.lambda);
    LinkSnrs {
        gamma1: params.p2 * g2 / params.sigma2 / (base + 1.0 / (el * g1)),
        gamma2: params.p1 * g1 / params.sigma2 / (base + 1.0 / (el * g2)),
    }
}

/// SNRs with the relay normalization taken exactly, i.e. keeping the
/// `(1 - lambda) sigma_a^2 + sigma_b^2` noise terms that the approximate
/// normalization drops. Used only to measure that approximation.
pub fn end_to_end_snrs_exact_normalization(params: &SystemParams, draw: &ChannelDraw) -> LinkSnrs {
    let (g1, g2) = (draw.g1, draw.g2);
    if g1 <= 0.0 || g2 <= 0.0 {
        return LinkSnrs {
            gamma1: 0.0,
            gamma2: 0.0,
        };
    }
    let lam = params.lambda;
    let sigma_b2 = params.epsilon * params.sigma2;
    let sigma_a2 = params.sigma2 - sigma_b2;
    let received = params.p1 * g1 + params.p2 * g2;
    let beta2 = 1.0 / ((1.0 - lam) * received + (1.0 - lam) * sigma_a2 + sigma_b2);
    let gain = beta2 * relay_power(params, draw);
    let fwd_noise = (1.0 - lam) * sigma_a2 + sigma_b2;
    let gamma = |g_self: f64, p_other: f64, g_other: f64| {
        g_self * gain * (1.0 - lam) * p_other * g_other / (g_self * gain * fwd_noise + params.sigma2)
    };
    LinkSnrs {
        gamma1: gamma(g1, params.p2, g2),
        gamma2: gamma(g2, params.p1, g1),
    }
}

/// Half-duplex rates `R_i = log2(1 + gamma_i) / 2`.
pub fn achievable_rates(snrs: &LinkSnrs) -> (f64, f64) {
    (half_duplex_rate(snrs.gamma1), half_duplex_rate(snrs.gamma2))
}

#[inline]
pub fn half_duplex_rate(gamma: f64) -> f64 {
    0.5 * gamma.ln_1p() / std::f64::consts::LN_2
}

/// Relay-free comparison scheme: S1 and S2 talk over their unit-distance
/// direct link in two equal half-duplex slots, one per direction, with the
/// same transmit powers. The direct link is Rayleigh with mean
/// `1^-alpha = 1` and is shared (reciprocal) by both directions.
///
/// This time-sharing is a modeling convention, chosen so that the
/// comparison uses the same time, spectrum and source energy as the relay
/// protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonCoopBaseline {
    pub omega_direct: f64,
    /// Mean SNR received at S1 (from S2) and at S2 (from S1).
    pub mean_snr1: f64,
    pub mean_snr2: f64,
}

impl NonCoopBaseline {
    pub fn new(params: &SystemParams) -> Self {
        let omega_direct = 1f64.powf(-params.path_loss_exp);
        Self {
            omega_direct,
            mean_snr1: params.p2 * omega_direct / params.sigma2,
            mean_snr2: params.p1 * omega_direct / params.sigma2,
        }
    }

    /// `Pr(log2(1 + mean_snr g)/2 < t)` for one direction with mean SNR `mean_snr`.
    pub fn direction_outage(mean_snr: f64, t: f64) -> f64 {
        -(-rate_threshold(t) / mean_snr).exp_m1()
    }

    /// Either direction below target; both directions see the same gain `g`.
    pub fn outage(&self, targets: &TargetRates) -> f64 {
        let need = (targets.tau1 / self.mean_snr1).max(targets.tau2 / self.mean_snr2);
        -(-need).exp_m1()
    }

    /// Sum of the two directions' ergodic half-duplex rates:
    /// `E[ln(1 + m g)] = Psi(1, 1; 1/m)` for unit-mean exponential `g`.
    pub fn capacity(&self) -> Result<f64> {
        let c1 = specfun::scaled_exp_integral_e1(1.0 / self.mean_snr1)?;
        let c2 = specfun::scaled_exp_integral_e1(1.0 / self.mean_snr2)?;
        Ok((c1 + c2) / (2.0 * std::f64::consts::LN_2))
    }
}
