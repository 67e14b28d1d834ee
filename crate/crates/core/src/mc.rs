//! Monte Carlo reference estimators.
//!
//! Draws are split into fixed chunks of [`CHUNK_SIZE`]; chunk `k` consumes
//! stream `k` of a ChaCha8 generator keyed by the root seed. Chunks run in
//! parallel and their partial results are merged in chunk order, so every
//! estimate is bit-identical for any number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    self, end_to_end_snrs_exact_normalization, half_duplex_rate, sample_channel, snrs_with, substream,
    LinkSnrs, SystemParams, TargetRates,
};

pub const CHUNK_SIZE: u64 = 1 << 16;

/// Minimum number of outage events per stencil point of the diversity estimate.
pub const MIN_EVENTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub std_err: f64,
    pub n: u64,
    pub seed: u64,
}

impl Estimate {
    fn from_count(count: u64, n: u64, seed: u64) -> Self {
        let p = count as f64 / n as f64;
        let var = if n > 1 {
            p * (1.0 - p) * n as f64 / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean: p,
            std_err: (var / n as f64).sqrt(),
            n,
            seed,
        }
    }

    fn from_moments(m: &Moments, seed: u64) -> Self {
        let var = if m.n > 1 { m.m2 / (m.n - 1) as f64 } else { 0.0 };
        Self {
            mean: m.mean,
            std_err: (var / m.n as f64).sqrt(),
            n: m.n,
            seed,
        }
    }
}

/// Which SNR expression the simulator applies to each draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrModel {
    /// The relay normalization used by every closed form.
    #[default]
    Approximate,
    /// Normalization including the noise terms; measures the approximation.
    ExactNormalization,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64),
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParam {
            name: "n",
            value: 0.0,
            range: ">= 1",
        });
    }
    Ok(())
}

/// Runs `body(rng, len)` for each chunk in parallel and returns the chunk
/// results in chunk order.
fn map_chunks<T, F>(n: u64, seed: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_SIZE.min(n - k * CHUNK_SIZE);
            body(&mut substream(seed, k), len)
        })
        .collect()
}

fn snrs_for(params: &SystemParams, coeffs: &model::DerivedCoeffs, draw: &model::ChannelDraw, m: SnrModel) -> LinkSnrs {
    match m {
        SnrModel::Approximate => snrs_with(params, coeffs, draw),
        SnrModel::ExactNormalization => end_to_end_snrs_exact_normalization(params, draw),
    }
}

/// Event frequencies of one outage simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEvents {
    /// Either direction below target.
    pub either: Estimate,
    pub first: Estimate,
    pub second: Estimate,
    pub both: Estimate,
}

/// Monte Carlo `Pr(R1 < T1 or R2 < T2)`.
pub fn estimate_outage(params: &SystemParams, targets: &TargetRates, n: u64, seed: u64) -> Result<Estimate> {
    Ok(estimate_outage_events(params, targets, n, seed, SnrModel::Approximate)?.either)
}

pub fn estimate_outage_with(
    params: &SystemParams,
    targets: &TargetRates,
    n: u64,
    seed: u64,
    snr_model: SnrModel,
) -> Result<Estimate> {
    Ok(estimate_outage_events(params, targets, n, seed, snr_model)?.either)
}

pub fn estimate_outage_events(
    params: &SystemParams,
    targets: &TargetRates,
    n: u64,
    seed: u64,
    snr_model: SnrModel,
) -> Result<OutageEvents> {
    check_n(n)?;
    params.validate()?;
    let coeffs = params.coeffs();
    let counts = map_chunks(n, seed, |rng, len| {
        let mut c = [0u64; 3];
        for _ in 0..len {
            let s = snrs_for(params, &coeffs, &sample_channel(params, rng), snr_model);
            let o1 = s.gamma1 < targets.tau1;
            let o2 = s.gamma2 < targets.tau2;
            c[0] += o1 as u64;
            c[1] += o2 as u64;
            c[2] += (o1 && o2) as u64;
        }
        c
    });
    let [first, second, both] = counts
        .iter()
        .fold([0u64; 3], |acc, c| [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]]);
    Ok(OutageEvents {
        either: Estimate::from_count(first + second - both, n, seed),
        first: Estimate::from_count(first, n, seed),
        second: Estimate::from_count(second, n, seed),
        both: Estimate::from_count(both, n, seed),
    })
}

/// Monte Carlo ergodic sum rate `E[R1 + R2]` in bits/s/Hz.
pub fn estimate_capacity(params: &SystemParams, n: u64, seed: u64) -> Result<Estimate> {
    Ok(estimate_rates(params, n, seed)?.sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimates {
    pub sum: Estimate,
    pub first: Estimate,
    pub second: Estimate,
}

/// Sum rate and the two per-direction ergodic rates from the same draws.
pub fn estimate_rates(params: &SystemParams, n: u64, seed: u64) -> Result<RateEstimates> {
    check_n(n)?;
    params.validate()?;
    let coeffs = params.coeffs();
    let parts = map_chunks(n, seed, |rng, len| {
        let mut m = [Moments::default(); 3];
        for _ in 0..len {
            let s = snrs_with(params, &coeffs, &sample_channel(params, rng));
            let (r1, r2) = (half_duplex_rate(s.gamma1), half_duplex_rate(s.gamma2));
            m[0].push(r1 + r2);
            m[1].push(r1);
            m[2].push(r2);
        }
        m
    });
    let m = parts.into_iter().fold([Moments::default(); 3], |acc, c| {
        [acc[0].merge(c[0]), acc[1].merge(c[1]), acc[2].merge(c[2])]
    });
    Ok(RateEstimates {
        sum: Estimate::from_moments(&m[0], seed),
        first: Estimate::from_moments(&m[1], seed),
        second: Estimate::from_moments(&m[2], seed),
    })
}

/// `n` sorted draws of `Z = a X Y / (b X + c)`, `X ~ Exp(omega1)`, `Y ~ Exp(omega2)`.
pub fn sample_z_sorted(a: f64, b: f64, c: f64, omega1: f64, omega2: f64, n: u64, seed: u64) -> Result<Vec<f64>> {
    check_n(n)?;
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidParam {
                name,
                value: v,
                range: "finite and >= 0",
            });
        }
    }
    for (name, v) in [("omega1", omega1), ("omega2", omega2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParam {
                name,
                value: v,
                range: "finite and > 0",
            });
        }
    }
    let chunks = map_chunks(n, seed, |rng, len| {
        use rand::Rng;
        use rand_distr::Exp1;
        (0..len)
            .map(|_| {
                let x = omega1 * rng.sample::<f64, _>(Exp1);
                let y = omega2 * rng.sample::<f64, _>(Exp1);
                a * x * y / (b * x + c)
            })
            .collect::<Vec<f64>>()
    });
    let mut z: Vec<f64> = chunks.into_iter().flatten().collect();
    z.par_sort_unstable_by(f64::total_cmp);
    Ok(z)
}

/// Empirical CDF of `Z` at each point of an ascending grid.
pub fn empirical_cdf_z(
    a: f64,
    b: f64,
    c: f64,
    omega1: f64,
    omega2: f64,
    z_grid: &[f64],
    n: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if let Some(w) = z_grid.windows(2).find(|w| !(w[0] <= w[1])) {
        return Err(Error::Domain {
            func: "empirical_cdf_z",
            arg: w[1],
            expected: "an ascending z grid",
        });
    }
    let z = sample_z_sorted(a, b, c, omega1, omega2, n, seed)?;
    Ok(z_grid
        .iter()
        .map(|&g| (g, z.partition_point(|&v| v <= g) as f64 / n as f64))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityEstimate {
    pub value: f64,
    pub std_err: f64,
    /// Outage estimates at `gamma / delta` and `gamma * delta`.
    pub lower: Estimate,
    pub upper: Estimate,
}

/// Finite-difference diversity `-d ln P_out / d ln gamma` at `gamma_db` for
/// `P1 = P2 = gamma sigma2` and symmetric rates `r log2(1 + gamma) / 2`.
/// Both stencil points reuse the same channel draws.
pub fn estimate_diversity_fd(
    template: &SystemParams,
    r: f64,
    gamma_db: f64,
    delta_db: f64,
    n: u64,
    seed: u64,
) -> Result<DiversityEstimate> {
    check_n(n)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain {
            func: "estimate_diversity_fd",
            arg: r,
            expected: "r > 0 (r = 0 gives zero outage)",
        });
    }
    if !(delta_db > 0.0 && delta_db.is_finite()) {
        return Err(Error::InvalidParam {
            name: "delta_db",
            value: delta_db,
            range: "finite and > 0",
        });
    }
    let db_to_lin = |db: f64| 10f64.powf(db / 10.0);
    let stencil = [gamma_db - delta_db, gamma_db + delta_db].map(|db| {
        let g = db_to_lin(db);
        let p = template.with_symmetric_snr(g)?;
        let t = TargetRates::from_multiplexing_gain(r, g)?;
        Ok::<_, Error>((p, t))
    });
    let [(p_lo, t_lo), (p_hi, t_hi)] = [stencil[0].clone()?, stencil[1].clone()?];
    let (k_lo, k_hi) = (p_lo.coeffs(), p_hi.coeffs());

    // Fading draws do not depend on transmit power, so one draw serves both points.
    let counts = map_chunks(n, seed, |rng, len| {
        let mut c = [0u64; 3];
        for _ in 0..len {
            let d = sample_channel(&p_lo, rng);
            let s_lo = snrs_with(&p_lo, &k_lo, &d);
            let s_hi = snrs_with(&p_hi, &k_hi, &d);
            let o_lo = s_lo.gamma1 < t_lo.tau1 || s_lo.gamma2 < t_lo.tau2;
            let o_hi = s_hi.gamma1 < t_hi.tau1 || s_hi.gamma2 < t_hi.tau2;
            c[0] += o_lo as u64;
            c[1] += o_hi as u64;
            c[2] += (o_lo && o_hi) as u64;
        }
        c
    });
    let [n_lo, n_hi, n_both] = counts
        .iter()
        .fold([0u64; 3], |acc, c| [acc[0] + c[0], acc[1] + c[1], acc[2] + c[2]]);
    let events = n_lo.min(n_hi);
    if events < MIN_EVENTS {
        return Err(Error::InsufficientSamples {
            events,
            required: MIN_EVENTS,
        });
    }
    let nf = n as f64;
    let (pl, ph, pb) = (n_lo as f64 / nf, n_hi as f64 / nf, n_both as f64 / nf);
    let span = 2.0 * delta_db * std::f64::consts::LN_10 / 10.0;
    // Delta method on ln(pl) - ln(ph) with the covariance from shared draws.
    let var = (1.0 - pl) / pl + (1.0 - ph) / ph - 2.0 * (pb - pl * ph) / (pl * ph);
    Ok(DiversityEstimate {
        value: (pl.ln() - ph.ln()) / span,
        std_err: (var.max(0.0) / nf).sqrt() / span,
        lower: Estimate::from_count(n_lo, n, seed),
        upper: Estimate::from_count(n_hi, n, seed),
    })
}
