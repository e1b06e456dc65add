//! Concentration of coherence for Haar-random pure inputs: Lévy-type tail
//! bounds, Lipschitz constants and Monte Carlo estimates.
//!
//! Sampling is split into fixed-size chunks; chunk k draws from its own
//! generator seeded with `sub_seed(seed, k)`, so results do not depend on how
//! chunks are scheduled across threads.

use std::f64::consts::{LN_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::coherence::l1_offdiag;
use crate::error::{Error, Result};
use crate::linalg::trace_norm_hermitian;
use crate::states::{haar_random_vector, rng_from_seed, sub_seed};

/// Samples drawn from one sub-seeded generator.
pub const CHUNK_SIZE: usize = 1024;
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Standard-normal quantile used for Wilson intervals (≈ 3σ).
pub const WILSON_Z: f64 = 3.0;

fn levy_denominator() -> f64 {
    18.0 * PI.powi(3) * LN_2
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::out_of_range(name, value, "finite and > 0"));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::out_of_range("epsilon", epsilon, "finite and >= 0"));
    }
    Ok(())
}

/// 2·exp(−dε² / (18π³ η_C² η_ch² ln 2))
pub fn levy_bound(d: usize, epsilon: f64, eta_c: f64, eta_ch: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    check_epsilon(epsilon)?;
    check_positive("eta_c", eta_c)?;
    check_positive("eta_ch", eta_ch)?;
    let exponent = d as f64 * epsilon * epsilon / (levy_denominator() * eta_c * eta_c * eta_ch * eta_ch);
    Ok(2.0 * (-exponent).exp())
}

/// 2·exp(−(d−1)²ε² / (18π³ η_ch² d ln 2)), the bound for c_l1/(d−1).
pub fn corollary_bound(d: usize, epsilon: f64, eta_ch: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    check_epsilon(epsilon)?;
    check_positive("eta_ch", eta_ch)?;
    let dm1 = d as f64 - 1.0;
    let exponent = dm1 * dm1 * epsilon * epsilon / (levy_denominator() * eta_ch * eta_ch * d as f64);
    Ok(2.0 * (-exponent).exp())
}

/// Lipschitz constant d/(d−1) of c_l1/(d−1) with respect to the trace norm.
pub fn lipschitz_scaled_l1(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    Ok(d as f64 / (d as f64 - 1.0))
}

/// Lipschitz constant of the unscaled c_l1: (d − 1)·d/(d − 1) = d.
pub fn lipschitz_raw_l1(d: usize) -> Result<f64> {
    Ok(lipschitz_scaled_l1(d)? * (d as f64 - 1.0))
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut correction = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            correction += (sum - t) + x;
        } else {
            correction += (x - t) + sum;
        }
        sum = t;
    }
    sum + correction
}

/// c_l1(Φ(|ψ⟩⟨ψ|)) for `samples` Haar-random ψ, in sample order.
pub fn coherence_samples(channel: &KrausChannel, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::out_of_range("samples", 0.0, "samples >= 1"));
    }
    let d = channel.dim();
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let per_chunk: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from_seed(sub_seed(seed, k as u64));
            let n = CHUNK_SIZE.min(samples - k * CHUNK_SIZE);
            (0..n)
                .map(|_| {
                    let psi = haar_random_vector(&mut rng, d);
                    let out = channel.apply_pure(&psi).expect("dimension matches channel");
                    l1_offdiag(&out)
                })
                .collect()
        })
        .collect();
    Ok(per_chunk.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl MeanEstimate {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = compensated_sum(values.iter().copied()) / n;
        let var = if values.len() > 1 {
            compensated_sum(values.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            stderr: (var / n).sqrt(),
        }
    }
}

pub fn estimate_mean_coherence(channel: &KrausChannel, samples: usize, seed: u64) -> Result<MeanEstimate> {
    Ok(MeanEstimate::from_values(&coherence_samples(channel, samples, seed)?))
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub samples: usize,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    /// Contraction coefficient of the channel in trace norm; 1 is always valid.
    pub eta_ch: f64,
    /// Free-form label recorded in the report.
    pub channel: String,
}

impl ExperimentConfig {
    pub fn new(dim: usize, samples: usize, epsilons: Vec<f64>, seed: u64, channel: impl Into<String>) -> Self {
        Self {
            dim,
            samples,
            epsilons,
            seed,
            eta_ch: 1.0,
            channel: channel.into(),
        }
    }
}

/// Tail estimates at one ε. `empirical_tail` and `levy_bound` refer to raw
/// c_l1 (Lipschitz constant d); the `_scaled` tail refers to c_l1/(d−1) and
/// is compared with `corollary_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub epsilon: f64,
    pub empirical_tail: f64,
    pub tail_interval: (f64, f64),
    pub levy_bound: f64,
    pub empirical_tail_scaled: f64,
    pub tail_interval_scaled: (f64, f64),
    pub corollary_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub dim: usize,
    pub samples: usize,
    pub seed: u64,
    pub channel: String,
    pub eta_c: f64,
    pub eta_c_scaled: f64,
    pub eta_ch: f64,
    pub mean: f64,
    pub mean_stderr: f64,
    pub mean_scaled: f64,
    pub rows: Vec<TailRow>,
}

impl ConcentrationReport {
    /// Rows whose empirical tail lies above a non-vacuous bound by more than
    /// `sigmas` binomial standard deviations.
    pub fn bound_violations(&self, sigmas: f64) -> Vec<String> {
        let n = self.samples as f64;
        let exceeds = |tail: f64, bound: f64| {
            let sd = (tail * (1.0 - tail) / n).sqrt();
            bound < 1.0 && tail - sigmas * sd > bound
        };
        let mut out = Vec::new();
        for row in &self.rows {
            if exceeds(row.empirical_tail, row.levy_bound) {
                out.push(format!("eps={} raw tail {} > levy {}", row.epsilon, row.empirical_tail, row.levy_bound));
            }
            if exceeds(row.empirical_tail_scaled, row.corollary_bound) {
                out.push(format!(
                    "eps={} scaled tail {} > corollary {}",
                    row.epsilon, row.empirical_tail_scaled, row.corollary_bound
                ));
            }
        }
        out
    }
}

pub fn run_concentration_experiment(channel: &KrausChannel, config: &ExperimentConfig) -> Result<ConcentrationReport> {
    let d = config.dim;
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    if channel.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: channel.dim(),
        });
    }
    if config.epsilons.is_empty() {
        return Err(Error::out_of_range("epsilons", 0.0, "at least one epsilon"));
    }
    for &eps in &config.epsilons {
        check_epsilon(eps)?;
    }
    check_positive("eta_ch", config.eta_ch)?;

    let values = coherence_samples(channel, config.samples, config.seed)?;
    let estimate = MeanEstimate::from_values(&values);
    let scale = 1.0 / (d as f64 - 1.0);
    let eta_c = lipschitz_raw_l1(d)?;
    let n = values.len();

    let mut rows = Vec::with_capacity(config.epsilons.len());
    for &eps in &config.epsilons {
        let raw_hits = values.iter().filter(|c| (*c - estimate.mean).abs() > eps).count();
        let scaled_hits = values
            .iter()
            .filter(|c| ((*c - estimate.mean) * scale).abs() > eps)
            .count();
        rows.push(TailRow {
            epsilon: eps,
            empirical_tail: raw_hits as f64 / n as f64,
            tail_interval: wilson_interval(raw_hits, n, WILSON_Z),
            levy_bound: levy_bound(d, eps, eta_c, config.eta_ch)?,
            empirical_tail_scaled: scaled_hits as f64 / n as f64,
            tail_interval_scaled: wilson_interval(scaled_hits, n, WILSON_Z),
            corollary_bound: corollary_bound(d, eps, config.eta_ch)?,
        });
    }
    Ok(ConcentrationReport {
        dim: d,
        samples: config.samples,
        seed: config.seed,
        channel: config.channel.clone(),
        eta_c,
        eta_c_scaled: lipschitz_scaled_l1(d)?,
        eta_ch: config.eta_ch,
        mean: estimate.mean,
        mean_stderr: estimate.stderr,
        mean_scaled: estimate.mean * scale,
        rows,
    })
}

/// Largest ‖Φ(ρ) − Φ(σ)‖₁ / ‖ρ − σ‖₁ over sampled pairs of Haar-random pure
/// states.
pub fn contraction_check(channel: &KrausChannel, samples: usize, seed: u64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::out_of_range("samples", 0.0, "samples >= 1"));
    }
    let d = channel.dim();
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < samples {
        let a = haar_random_vector(&mut rng, d);
        let b = haar_random_vector(&mut rng, d);
        let diff = &a * a.adjoint() - &b * b.adjoint();
        let before = trace_norm_hermitian(&diff)?;
        if before < 1e-8 {
            continue;
        }
        let after = trace_norm_hermitian(&channel.apply_operator(&diff)?)?;
        worst = worst.max(after / before);
        taken += 1;
    }
    Ok(worst)
}
