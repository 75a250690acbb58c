use crate::error::{Result, TomoError};
use crate::projection::{table1_states, WaveplateSetting};

/// Default RMS waveplate setting error, degrees.
pub const DEFAULT_DELTA_THETA_DEG: f64 = 0.25;

/// Counts from one 16-setting two-qubit experiment.
///
/// Counts are nonnegative reals so that noiseless and averaged data are
/// accepted as-is.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    counts: Vec<f64>,
    settings: Vec<WaveplateSetting>,
    /// RMS waveplate angle error, radians.
    pub delta_theta: f64,
}

impl CountRecord {
    pub fn new(
        counts: Vec<f64>,
        settings: Vec<WaveplateSetting>,
        delta_theta: f64,
    ) -> Result<Self> {
        if counts.len() != 16 {
            return Err(TomoError::InvalidDimension {
                expected: 16,
                got: counts.len(),
            });
        }
        if settings.len() != counts.len() {
            return Err(TomoError::InvalidDimension {
                expected: counts.len(),
                got: settings.len(),
            });
        }
        if let Some((i, c)) = counts
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_finite() || **c < 0.0)
        {
            return Err(TomoError::InvalidInput(format!(
                "count {} is {c}, expected a finite nonnegative number",
                i + 1
            )));
        }
        if !delta_theta.is_finite() || delta_theta < 0.0 {
            return Err(TomoError::InvalidInput(format!(
                "delta_theta must be finite and nonnegative, got {delta_theta}"
            )));
        }
        Ok(Self {
            counts,
            settings,
            delta_theta,
        })
    }

    /// Counts on the standard design with the default angle error.
    pub fn with_table1(counts: Vec<f64>) -> Result<Self> {
        let settings = table1_states().into_iter().map(|s| s.setting).collect();
        Self::new(counts, settings, DEFAULT_DELTA_THETA_DEG.to_radians())
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn settings(&self) -> &[WaveplateSetting] {
        &self.settings
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Sum of the first four counts, which project onto a complete basis.
    pub fn normalization(&self) -> f64 {
        self.counts.iter().take(4).sum()
    }

    pub fn with_delta_theta(mut self, delta_theta: f64) -> Result<Self> {
        if !delta_theta.is_finite() || delta_theta < 0.0 {
            return Err(TomoError::InvalidInput(format!(
                "delta_theta must be finite and nonnegative, got {delta_theta}"
            )));
        }
        self.delta_theta = delta_theta;
        Ok(self)
    }

    /// Same settings, new counts.
    pub fn with_counts(&self, counts: Vec<f64>) -> Result<Self> {
        Self::new(counts, self.settings.clone(), self.delta_theta)
    }
}
