//! Single-path mmWave channel through a passive RIS.
//!
//! The BS has `M` half-wave spaced antennas, the UE a single antenna and the
//! RIS `N` elements. For angles `(φ1, φ2, φ3, φ4)` the effective channel seen
//! at the BS under RIS phases `θ` is
//!
//! ```text
//! h(θ) = g(θ) · a_M(φ2),   g(θ) = Σ_n exp(i(θ_n + π n (sin φ4 − sin φ1)))
//! ```
//!
//! so `‖h‖² = M |g|²`. The BS observes the received energy `Y = ‖y‖²` of a
//! unit pilot, `y = √P h + w` with `w ~ CN(0, σ² I_M)`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// BS antenna count.
    pub m: usize,
    /// RIS element count.
    pub n: usize,
    /// Transmit power (linear).
    pub power: f64,
    /// Noise variance per receive antenna (linear).
    pub sigma_w2: f64,
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(m: usize, n: usize, power: f64, sigma_w2: f64, seed: u64) -> Result<Self> {
        let cfg = SystemConfig {
            m,
            n,
            power,
            sigma_w2,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Unit transmit power with the noise variance set from an SNR in dB.
    pub fn from_snr_db(m: usize, n: usize, snr_db: f64, seed: u64) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::param(format!("snr_db must be finite, got {snr_db}")));
        }
        Self::new(m, n, 1.0, 10f64.powf(-snr_db / 10.0), seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::param("M and N must be at least 1"));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::param(format!(
                "P must be positive, got {}",
                self.power
            )));
        }
        if !(self.sigma_w2 >= 0.0 && self.sigma_w2.is_finite()) {
            return Err(Error::param(format!(
                "sigma_w2 must be non-negative, got {}",
                self.sigma_w2
            )));
        }
        Ok(())
    }

    /// `10·log10(P / σ²)`; `+∞` for a noiseless configuration.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.power / self.sigma_w2).log10()
    }

    pub fn noiseless(mut self) -> Self {
        self.sigma_w2 = 0.0;
        self
    }
}

/// The four path angles of the cascaded BS–RIS–UE channel, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelRealization {
    /// AoA at the RIS from the BS side.
    pub phi1: f64,
    /// AoD at the BS.
    pub phi2: f64,
    /// UE-side angle; inert for a single-antenna UE.
    pub phi3: f64,
    /// RIS angle towards the UE.
    pub phi4: f64,
}

impl ChannelRealization {
    pub fn new(phi1: f64, phi2: f64, phi3: f64, phi4: f64) -> Result<Self> {
        let ch = ChannelRealization {
            phi1,
            phi2,
            phi3,
            phi4,
        };
        for (name, v) in [
            ("phi1", phi1),
            ("phi2", phi2),
            ("phi3", phi3),
            ("phi4", phi4),
        ] {
            if !(v.is_finite() && (0.0..TAU).contains(&v)) {
                return Err(Error::param(format!("{name} = {v} is outside [0, 2π)")));
            }
        }
        Ok(ch)
    }

    /// Sine-domain offset `sin φ4 − sin φ1`, in [−2, 2].
    pub fn mu(&self) -> f64 {
        self.phi4.sin() - self.phi1.sin()
    }

    /// [`mu`](Self::mu) aliased into [−1, 1), where the RIS phasor is periodic.
    pub fn wrapped_mu(&self) -> f64 {
        wrap_sine(self.mu())
    }

    pub fn angles(&self) -> [f64; 4] {
        [self.phi1, self.phi2, self.phi3, self.phi4]
    }
}

/// Wrap a sine-domain value into [−1, 1).
pub fn wrap_sine(x: f64) -> f64 {
    (x + 1.0).rem_euclid(2.0) - 1.0
}

/// How elements outside a codeword's active set behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Deactivation {
    /// Passive elements keep unit amplitude with fixed pseudo-random phases.
    RandomPhase,
    /// Zero amplitude. Not physically realizable; analytic tests only.
    Idealized,
}

/// A RIS configuration: one phase per element plus its place in the
/// hierarchical codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    pub phases: Vec<f64>,
    /// 0 for target (narrow) codewords, 1..=L for probing layers.
    pub layer: usize,
    /// 1-based beam index within the layer.
    pub index_in_layer: usize,
    /// Beam center in the sine domain.
    pub center_omega: f64,
    /// Elements `0..active_count` carry the beam ramp.
    pub active_count: usize,
    pub deactivation: Deactivation,
}

impl Codeword {
    /// A fully active codeword with the given phases (layer 0, no metadata).
    pub fn from_phases(phases: Vec<f64>) -> Self {
        let n = phases.len();
        Codeword {
            phases,
            layer: 0,
            index_in_layer: 1,
            center_omega: 0.0,
            active_count: n,
            deactivation: Deactivation::RandomPhase,
        }
    }

    /// Phases `θ_n = π n (sin φ1 − sin φ4) mod 2π`, coherently combining `ch`.
    pub fn aligned(n: usize, ch: &ChannelRealization) -> Self {
        let slope = -PI * ch.mu();
        Self::from_phases((0..n).map(|k| (slope * k as f64).rem_euclid(TAU)).collect())
    }

    fn amplitude(&self, element: usize) -> f64 {
        match self.deactivation {
            Deactivation::Idealized if element >= self.active_count => 0.0,
            _ => 1.0,
        }
    }
}

/// Steering vector `[exp(iπ k sin φ)]_{k=0..n}` of a half-wave spaced ULA.
pub fn steering_vector(n_elems: usize, angle: f64) -> Result<Vec<Complex64>> {
    if n_elems == 0 {
        return Err(Error::param("steering vector needs at least one element"));
    }
    let s = PI * angle.sin();
    Ok((0..n_elems)
        .map(|k| Complex64::from_polar(1.0, s * k as f64))
        .collect())
}

/// RIS combining gain `g` such that `h(Φ) = g · a_M(φ2)`.
pub fn channel_gain(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    cw: &Codeword,
) -> Result<Complex64> {
    if cw.phases.len() != cfg.n {
        return Err(Error::DimensionMismatch {
            expected: cfg.n,
            got: cw.phases.len(),
        });
    }
    let slope = PI * ch.mu();
    Ok(cw
        .phases
        .iter()
        .enumerate()
        .map(|(k, &theta)| Complex64::from_polar(cw.amplitude(k), theta + slope * k as f64))
        .sum())
}

/// `‖h(Φ)‖² = M |g|²`.
pub fn channel_strength(cfg: &SystemConfig, ch: &ChannelRealization, cw: &Codeword) -> Result<f64> {
    Ok(cfg.m as f64 * channel_gain(cfg, ch, cw)?.norm_sqr())
}

/// Magnitude of a uniform ramp's gain, `|sin(πNx/2) / sin(πx/2)|` with
/// `x = μ − ω`.
pub fn dirichlet_gain(n: usize, mu: f64, omega: f64) -> f64 {
    let half = 0.5 * PI * (mu - omega);
    let den = half.sin();
    if den.abs() < 1e-12 {
        // x is a multiple of 2: every term is ±1 with the same sign pattern.
        return n as f64;
    }
    ((n as f64 * half).sin() / den).abs()
}

/// Observation of one pilot: received energy under a probing codeword.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub value: f64,
    /// 0-based index into the probing codebook.
    pub action_index: usize,
}

/// Received energy `‖√P g a_M(φ2) + w‖²` for a precomputed gain.
pub fn energy_from_gain<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    gain: Complex64,
    rng: &mut R,
) -> f64 {
    let amp = cfg.power.sqrt() * gain;
    if cfg.sigma_w2 == 0.0 {
        return cfg.m as f64 * amp.norm_sqr();
    }
    let s = PI * ch.phi2.sin();
    let sd = (0.5 * cfg.sigma_w2).sqrt();
    (0..cfg.m)
        .map(|k| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let y =
                amp * Complex64::from_polar(1.0, s * k as f64) + Complex64::new(sd * re, sd * im);
            y.norm_sqr()
        })
        .sum()
}

/// One noisy pilot under codeword `cw`, tagged with its probing index.
pub fn simulate_feedback<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    cw: &Codeword,
    action_index: usize,
    rng: &mut R,
) -> Result<Feedback> {
    let gain = channel_gain(cfg, ch, cw)?;
    Ok(Feedback {
        value: energy_from_gain(cfg, ch, gain, rng),
        action_index,
    })
}

/// Four independent angles uniform on [0, 2π).
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R) -> ChannelRealization {
    let mut draw = || {
        let v = rng.random::<f64>() * TAU;
        // Rounding can land exactly on 2π.
        if v >= TAU {
            0.0
        } else {
            v
        }
    };
    ChannelRealization {
        phi1: draw(),
        phi2: draw(),
        phi3: draw(),
        phi4: draw(),
    }
}

/// 0-based index of the strongest codeword; lowest index wins ties.
pub fn true_class(
    cfg: &SystemConfig,
    ch: &ChannelRealization,
    narrow: &[Codeword],
) -> Result<usize> {
    if narrow.is_empty() {
        return Err(Error::param("empty codebook"));
    }
    let mut best = 0;
    let mut best_strength = f64::NEG_INFINITY;
    for (c, cw) in narrow.iter().enumerate() {
        let s = channel_strength(cfg, ch, cw)?;
        if s > best_strength {
            best = c;
            best_strength = s;
        }
    }
    Ok(best)
}
