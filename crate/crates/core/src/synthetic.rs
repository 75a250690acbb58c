//! Forward-model count generator used to test the estimators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::counts::CountRecord;
use crate::density::DensityMatrix;
use crate::error::{Result, TomoError};
use crate::linear::TomographySet;
use crate::projection::{two_photon_ket, WaveplateSetting};

/// Poisson means at or above this are drawn from a rounded normal.
pub const POISSON_NORMAL_THRESHOLD: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// `n_nu = N s_nu` exactly.
    #[default]
    Noiseless,
    Poisson,
    /// Every waveplate angle is jittered by a centered Gaussian before the
    /// Poisson draw.
    PoissonPlusJitter,
}

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub rho_true: DensityMatrix,
    /// Expected total counts over a complete basis.
    pub total_flux: f64,
    /// Jitter standard deviation, radians.
    pub delta_theta: f64,
    pub noise_mode: NoiseMode,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.total_flux > 0.0) || !self.total_flux.is_finite() {
            return Err(TomoError::InvalidInput(format!(
                "total flux must be positive, got {}",
                self.total_flux
            )));
        }
        if !(self.delta_theta >= 0.0) || !self.delta_theta.is_finite() {
            return Err(TomoError::InvalidInput(format!(
                "angle jitter must be nonnegative, got {}",
                self.delta_theta
            )));
        }
        if self.rho_true.dim() != 4 {
            return Err(TomoError::InvalidDimension {
                expected: 4,
                got: self.rho_true.dim(),
            });
        }
        if !self.rho_true.is_physical() {
            return Err(TomoError::NotPhysical {
                min_eigenvalue: self.rho_true.min_eigenvalue(),
            });
        }
        Ok(())
    }

    /// Generator seeded from `seed` on the given substream.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Poisson variate: inversion for small means, rounded normal above the threshold.
pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if mean < POISSON_NORMAL_THRESHOLD {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        k as f64
    } else {
        let z: f64 = StandardNormal.sample(rng);
        (mean + mean.sqrt() * z).round().max(0.0)
    }
}

/// Draw one dataset on the design's settings, using stream 0 of the seed.
pub fn generate_counts(cfg: &GeneratorConfig, set: &TomographySet) -> Result<CountRecord> {
    generate_counts_with(cfg, set, &mut cfg.rng(0))
}

/// Draw one dataset from a caller-supplied generator.
pub fn generate_counts_with<R: Rng + ?Sized>(
    cfg: &GeneratorConfig,
    set: &TomographySet,
    rng: &mut R,
) -> Result<CountRecord> {
    cfg.validate()?;
    let rho = cfg.rho_true.matrix();
    let jitter = if cfg.noise_mode == NoiseMode::PoissonPlusJitter && cfg.delta_theta > 0.0 {
        Some(
            Normal::new(0.0, cfg.delta_theta)
                .map_err(|e| TomoError::InvalidInput(e.to_string()))?,
        )
    } else {
        None
    };
    let mut counts = Vec::with_capacity(set.len());
    for st in &set.states {
        let ket = match &jitter {
            Some(normal) => {
                let a = st.setting.to_array().map(|x| x + normal.sample(rng));
                two_photon_ket(&WaveplateSetting::from_array(a)?)
            }
            None => st.ket,
        };
        let mean = (cfg.total_flux * rho.expectation(&ket).re).max(0.0);
        counts.push(match cfg.noise_mode {
            NoiseMode::Noiseless => mean,
            NoiseMode::Poisson | NoiseMode::PoissonPlusJitter => poisson(rng, mean),
        });
    }
    let settings = set.states.iter().map(|s| s.setting).collect();
    CountRecord::new(counts, settings, cfg.delta_theta)
}

/// How a sampled dataset is turned into `s_nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SNormalization {
    /// Divide by the configured flux.
    #[default]
    TrueFlux,
    /// Divide by the sampled `n_1 + n_2 + n_3 + n_4`, as the estimators do.
    Sampled,
}

/// `s_nu` of one dataset drawn on substream `stream`.
pub fn sample_s(
    cfg: &GeneratorConfig,
    set: &TomographySet,
    stream: u64,
    normalization: SNormalization,
) -> Result<Vec<f64>> {
    let rec = generate_counts_with(cfg, set, &mut cfg.rng(stream))?;
    let norm = match normalization {
        SNormalization::TrueFlux => cfg.total_flux,
        SNormalization::Sampled => rec.normalization(),
    };
    if !(norm > 0.0) {
        return Err(TomoError::ZeroFlux);
    }
    Ok(rec.counts().iter().map(|n| n / norm).collect())
}

/// Running per-component mean and variance (Welford), mergeable across threads.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Moments {
    pub count: u64,
    pub mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, m2), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / n;
            *m2 += d * (v - *m);
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
            self.mean[i] += d * nb / n;
        }
        self.count += other.count;
        self
    }

    /// Unbiased sample variance of each component.
    pub fn variance(&self) -> Vec<f64> {
        let d = (self.count.max(2) - 1) as f64;
        self.m2.iter().map(|m| m / d).collect()
    }
}

/// Sample moments of `s_nu` over `trials` datasets on substreams `1..=trials`.
pub fn s_moments(
    cfg: &GeneratorConfig,
    set: &TomographySet,
    trials: u64,
    normalization: SNormalization,
) -> Result<Moments> {
    let mut acc = Moments::new(set.len());
    for k in 1..=trials {
        acc.push(&sample_s(cfg, set, k, normalization)?);
    }
    Ok(acc)
}
