//! Monte Carlo check of the analytic error bars.
//!
//! Datasets are drawn from the estimate with the measured flux and angle
//! error, one generator substream per trial, and their spread is compared
//! with the predicted variances. Trials run on a rayon pool capped by
//! `TOMO_KIT_THREADS`; results are accumulated in trial order, so the report
//! does not depend on the thread count.

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tomo_core::synthetic::generate_counts_with;
use tomo_core::uncertainty::{lambda_variances_with, rho_element_errors};
use tomo_core::{
    all_measures, mle_reconstruct, propagate_errors, CountRecord, CovarianceModel, DensityMatrix,
    ErrorOptions, GeneratorConfig, Moments, NoiseMode, OptimizerOptions, SPath,
};

use crate::ingest::Dataset;

pub const THREADS_ENV: &str = "TOMO_KIT_THREADS";
pub const VALIDATION_SCHEMA: &str = "tomo-validate/1";

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    pub trials: u64,
    pub seed: u64,
    pub covariance: CovarianceModel,
    pub tolerance: f64,
    /// Also fit every trial and compare measure spreads.
    pub mle: bool,
    pub optimizer: OptimizerOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpreadRow {
    pub name: String,
    pub empirical: f64,
    pub predicted: f64,
    /// `empirical / predicted`, absent when the prediction is zero.
    pub ratio: Option<f64>,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    pub trials: u64,
    pub seed: u64,
    pub flux: f64,
    pub delta_theta_deg: f64,
    /// How each simulated `s` was normalized: by the true flux for the
    /// approximate model, by the sampled flux for the exact one.
    pub normalization: String,
    pub tolerance: f64,
    /// Variance of each `s_nu` against `Lambda_nu`.
    pub s_variance: Vec<SpreadRow>,
    /// Standard deviation of each linear-estimate element.
    pub element_sigma: Vec<SpreadRow>,
    /// Standard deviation of each measure over fitted trials. Not gated:
    /// the prediction ignores the fit's own contribution.
    pub measure_sigma: Vec<SpreadRow>,
    pub fitted_trials: u64,
    pub passed: bool,
}

/// Thread count from `TOMO_KIT_THREADS`, or `None` for rayon's default.
pub fn thread_cap() -> anyhow::Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("{THREADS_ENV} must be a positive integer, got `{v}`"),
        },
    }
}

struct Trial {
    s: Vec<f64>,
    elements: Vec<f64>,
    measures: Option<[f64; 5]>,
}

fn row(name: String, empirical: f64, predicted: f64, tol: f64) -> SpreadRow {
    let ratio = (predicted > 0.0).then(|| empirical / predicted);
    let within_tolerance = match ratio {
        Some(r) => (r - 1.0).abs() <= tol,
        None => empirical == 0.0,
    };
    SpreadRow {
        name,
        empirical,
        predicted,
        ratio,
        within_tolerance,
    }
}

pub fn validate(
    rho: &DensityMatrix,
    record: &CountRecord,
    data: &Dataset,
    opts: &ValidationOptions,
) -> anyhow::Result<ValidationReport> {
    if opts.trials < 2 {
        bail!("need at least 2 Monte Carlo trials, got {}", opts.trials);
    }
    let set = &data.set;
    let flux = record.normalization();
    let cfg = GeneratorConfig {
        rho_true: rho.clone(),
        total_flux: flux,
        delta_theta: record.delta_theta,
        noise_mode: NoiseMode::PoissonPlusJitter,
        seed: opts.seed,
    };
    cfg.validate().context("simulation settings")?;
    let sampled = opts.covariance == CovarianceModel::Exact;

    let run = |k: u64| -> anyhow::Result<Trial> {
        let mut rng = cfg.rng(k);
        let sim = generate_counts_with(&cfg, set, &mut rng)?;
        let norm = if sampled { sim.normalization() } else { flux };
        if !(norm > 0.0) {
            bail!("trial {k} drew zero normalization counts");
        }
        let s: Vec<f64> = sim.counts().iter().map(|n| n / norm).collect();
        let elements = set
            .combine(&s)
            .as_slice()
            .iter()
            .flat_map(|z| [z.re, z.im])
            .collect();
        let measures = if opts.mle {
            let fit = mle_reconstruct(&sim, set, &opts.optimizer)?;
            let m = all_measures(&fit.rho)?;
            Some([m.entropy, m.linear_entropy, m.concurrence, m.tangle, m.eof])
        } else {
            None
        };
        Ok(Trial {
            s,
            elements,
            measures,
        })
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let trials: Vec<Trial> = pool.build()?.install(|| {
        (1..=opts.trials)
            .into_par_iter()
            .map(run)
            .collect::<anyhow::Result<_>>()
    })?;

    let mut s_acc = Moments::new(set.len());
    let mut e_acc = Moments::new(32);
    let mut m_acc = Moments::new(5);
    for t in &trials {
        s_acc.push(&t.s);
        e_acc.push(&t.elements);
        if let Some(m) = &t.measures {
            m_acc.push(m);
        }
    }

    let s_true = set.probabilities(rho.matrix());
    let budget = lambda_variances_with(flux, record.delta_theta, &s_true, set, opts.covariance)?;
    let tol = opts.tolerance;
    let s_var = s_acc.variance();
    let s_variance: Vec<SpreadRow> = (0..set.len())
        .map(|nu| {
            row(
                format!("s{} {}", nu + 1, data.labels[nu]),
                s_var[nu],
                budget.lambda[nu],
                tol,
            )
        })
        .collect();

    let predicted = rho_element_errors(&budget, set);
    let e_var = e_acc.variance();
    let mut element_sigma = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let k = 4 * i + j;
            let empirical = (e_var[2 * k] + e_var[2 * k + 1]).sqrt();
            element_sigma.push(row(
                format!("rho[{}][{}]", i + 1, j + 1),
                empirical,
                predicted[i][j],
                tol,
            ));
        }
    }

    let mut measure_sigma = Vec::new();
    if m_acc.count >= 2 {
        let bars = propagate_errors(
            rho,
            record,
            set,
            &ErrorOptions {
                s_path: SPath::Estimated,
                covariance: opts.covariance,
            },
        )?;
        let want = [
            bars.entropy,
            bars.linear_entropy,
            bars.concurrence.concurrence,
            bars.concurrence.tangle,
            bars.concurrence.eof,
        ];
        let names = ["entropy", "linear_entropy", "concurrence", "tangle", "eof"];
        for (k, v) in m_acc.variance().iter().enumerate() {
            measure_sigma.push(row(names[k].to_string(), v.sqrt(), want[k], tol));
        }
    }

    let passed = s_variance
        .iter()
        .chain(&element_sigma)
        .all(|r| r.within_tolerance);
    Ok(ValidationReport {
        schema: VALIDATION_SCHEMA.to_string(),
        trials: opts.trials,
        seed: opts.seed,
        flux,
        delta_theta_deg: record.delta_theta.to_degrees(),
        normalization: if sampled { "sampled" } else { "true_flux" }.to_string(),
        tolerance: tol,
        s_variance,
        element_sigma,
        measure_sigma,
        fitted_trials: m_acc.count,
        passed,
    })
}
