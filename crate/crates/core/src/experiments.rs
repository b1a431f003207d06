//! Monte Carlo experiment drivers: empirical test size under the null,
//! contamination robustness, parameter-sensitivity sweeps, and block pairing
//! for testing within a single recorded sample.
//!
//! Every replica draws its seed from (base seed, measure, cell, replica), so
//! result tables are bitwise reproducible regardless of worker count.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::distances::{self, DistanceMeasure};
use crate::error::{Error, Result};
use crate::estimation;
use crate::hermitian::HermitianMatrix;
use crate::hypothesis;
use crate::rng;
use crate::wishart::{self, ContaminationSpec, MatrixSample, WishartParams};

/// Grid description for the size and robustness studies.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeExperimentConfig {
    pub p: usize,
    pub looks: Vec<f64>,
    pub sigma: HermitianMatrix,
    pub sample_size_pairs: Vec<(usize, usize)>,
    pub alpha_levels: Vec<f64>,
    pub replicas: usize,
    pub measures: Vec<DistanceMeasure>,
    pub base_seed: u64,
    /// Leave false for bitwise-reproducible tables; timing then reads 0.
    pub measure_timing: bool,
}

impl SizeExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p != self.sigma.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: self.sigma.dim(),
            });
        }
        if self.replicas == 0 {
            return Err(Error::ValidationError(
                "replicas must be at least 1".into(),
            ));
        }
        if self.sample_size_pairs.iter().any(|&(x, y)| x == 0 || y == 0) {
            return Err(Error::ValidationError(
                "sample sizes must be at least 1".into(),
            ));
        }
        if self.looks.is_empty() || self.measures.is_empty() || self.sample_size_pairs.is_empty() {
            return Err(Error::ValidationError(
                "looks, measures, and sample size pairs must all be nonempty".into(),
            ));
        }
        for measure in &self.measures {
            measure.validate()?;
        }
        for &alpha in &self.alpha_levels {
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Error::ValidationError(format!(
                    "alpha levels must lie strictly between 0 and 1, got {alpha}"
                )));
            }
        }
        Ok(())
    }
}

/// One cell of the empirical-size table.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeResultRow {
    pub measure: DistanceMeasure,
    pub n_x: usize,
    pub n_y: usize,
    pub looks: f64,
    /// (alpha, rejection fraction over all configured replicas).
    pub empirical_size: Vec<(f64, f64)>,
    pub mean_distance: f64,
    pub coefficient_of_variation: f64,
    /// Milliseconds per replica; 0 unless timing was requested.
    pub wall_time_ms: f64,
    /// Replicas whose chi-square distance diverged; these produce no
    /// decision and are reported rather than dropped silently.
    pub diverged: usize,
}

/// One cell of the contamination-robustness table.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessResultRow {
    pub n_x: usize,
    pub n_y: usize,
    pub looks: f64,
    pub empirical_size: Vec<(f64, f64)>,
    pub mean_distance: f64,
    pub coefficient_of_variation: f64,
    pub mse_looks_x: f64,
    pub mse_looks_y: f64,
    /// mse_looks_x / mse_looks_y.
    pub looks_mse_ratio: f64,
    pub rmse_sigma_x: f64,
    pub rmse_sigma_y: f64,
    /// rmse_sigma_x / rmse_sigma_y.
    pub sigma_rmse_ratio: f64,
    pub wall_time_ms: f64,
}

enum ReplicaVerdict {
    Decided { distance: f64, rejections: Vec<bool> },
    Diverged,
}

fn decide_replica(
    x: &MatrixSample,
    y: &MatrixSample,
    measure: DistanceMeasure,
    alpha_levels: &[f64],
) -> Result<ReplicaVerdict> {
    let fit_x = estimation::fit(x)?;
    let fit_y = estimation::fit(y)?;
    let distance = match distances::distance(measure, &fit_x.params, &fit_y.params) {
        Ok(d) => d,
        Err(Error::ChiSquareDiverges) => return Ok(ReplicaVerdict::Diverged),
        Err(e) => return Err(e),
    };
    let statistic = hypothesis::statistic_from_distance(measure, distance, x.len(), y.len())?;
    let dof = hypothesis::degrees_of_freedom(x.dim(), true);
    let outcome = hypothesis::outcome_from_statistic(statistic, dof, alpha_levels)?;
    Ok(ReplicaVerdict::Decided {
        distance,
        rejections: outcome.reject_at.into_iter().map(|(_, r)| r).collect(),
    })
}

struct DistanceSummary {
    sizes: Vec<(f64, f64)>,
    mean_distance: f64,
    coefficient_of_variation: f64,
    diverged: usize,
}

fn summarize_verdicts(
    verdicts: &[ReplicaVerdict],
    alpha_levels: &[f64],
    replicas: usize,
) -> DistanceSummary {
    let mut reject_counts = vec![0usize; alpha_levels.len()];
    let mut decided = Vec::with_capacity(verdicts.len());
    let mut diverged = 0usize;
    for verdict in verdicts {
        match verdict {
            ReplicaVerdict::Decided { distance, rejections } => {
                decided.push(*distance);
                for (count, &reject) in reject_counts.iter_mut().zip(rejections) {
                    if reject {
                        *count += 1;
                    }
                }
            }
            ReplicaVerdict::Diverged => diverged += 1,
        }
    }
    let total = replicas as f64;
    let sizes = alpha_levels
        .iter()
        .zip(&reject_counts)
        .map(|(&alpha, &count)| (alpha, count as f64 / total))
        .collect();
    let (mean, cv) = if decided.is_empty() {
        (0.0, 0.0)
    } else {
        let n = decided.len() as f64;
        let mean = decided.iter().sum::<f64>() / n;
        let cv = if decided.len() < 2 || mean == 0.0 {
            0.0
        } else {
            let ss = decided.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>();
            (ss / (n - 1.0)).sqrt() / mean
        };
        (mean, cv)
    };
    DistanceSummary {
        sizes,
        mean_distance: mean,
        coefficient_of_variation: cv,
        diverged,
    }
}

fn per_replica_ms(started: Instant, replicas: usize, enabled: bool) -> f64 {
    if enabled {
        started.elapsed().as_secs_f64() * 1e3 / replicas as f64
    } else {
        0.0
    }
}

fn empirical_size_with<F>(config: &SizeExperimentConfig, replica: &F) -> Result<Vec<SizeResultRow>>
where
    F: Fn(&MatrixSample, &MatrixSample, DistanceMeasure, &[f64]) -> Result<ReplicaVerdict> + Sync,
{
    config.validate()?;
    let mut rows = Vec::new();
    for (measure_idx, &measure) in config.measures.iter().enumerate() {
        let mut cell_idx = 0u64;
        for &looks in &config.looks {
            let params = WishartParams::new(looks, config.sigma.clone())?;
            for &(n_x, n_y) in &config.sample_size_pairs {
                let started = Instant::now();
                let verdicts = (0..config.replicas as u64)
                    .into_par_iter()
                    .map(|k| {
                        let m = measure_idx as u64;
                        let seed_x = rng::derive_seed(&[config.base_seed, m, cell_idx, k, 0]);
                        let seed_y = rng::derive_seed(&[config.base_seed, m, cell_idx, k, 1]);
                        let x = wishart::sample(&params, n_x, seed_x)?;
                        let y = wishart::sample(&params, n_y, seed_y)?;
                        replica(&x, &y, measure, &config.alpha_levels)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let summary = summarize_verdicts(&verdicts, &config.alpha_levels, config.replicas);
                rows.push(SizeResultRow {
                    measure,
                    n_x,
                    n_y,
                    looks,
                    empirical_size: summary.sizes,
                    mean_distance: summary.mean_distance,
                    coefficient_of_variation: summary.coefficient_of_variation,
                    wall_time_ms: per_replica_ms(started, config.replicas, config.measure_timing),
                    diverged: summary.diverged,
                });
                cell_idx += 1;
            }
        }
    }
    Ok(rows)
}

/// Empirical size of every configured test under the null of equal laws:
/// both samples are drawn from the same parameters, fitted, and tested.
pub fn empirical_size(config: &SizeExperimentConfig) -> Result<Vec<SizeResultRow>> {
    empirical_size_with(config, &decide_replica)
}

struct RobustReplica {
    distance: f64,
    rejections: Vec<bool>,
    sq_looks_x: f64,
    sq_looks_y: f64,
    weighted_sq_sigma_x: f64,
    weighted_sq_sigma_y: f64,
}

fn diagonal_weighted_error(estimate: &HermitianMatrix, truth: &HermitianMatrix) -> f64 {
    let mut acc = 0.0;
    for h in 0..truth.dim() {
        let err = estimate.entry(h, h).re - truth.entry(h, h).re;
        acc += err * err / truth.entry(h, h).re;
    }
    acc
}

/// Contamination study: X is drawn from the epsilon-mixture, Y stays clean,
/// and the Kullback-Leibler test plus both fits are summarized per cell.
pub fn robustness_study(
    config: &SizeExperimentConfig,
    contamination: &ContaminationSpec,
) -> Result<Vec<RobustnessResultRow>> {
    config.validate()?;
    let measure = DistanceMeasure::KullbackLeibler;
    let mut rows = Vec::new();
    let mut cell_idx = 0u64;
    for &looks in &config.looks {
        let params = WishartParams::new(looks, config.sigma.clone())?;
        for &(n_x, n_y) in &config.sample_size_pairs {
            let started = Instant::now();
            let replicas = (0..config.replicas as u64)
                .into_par_iter()
                .map(|k| {
                    let seed_x = rng::derive_seed(&[config.base_seed, 0, cell_idx, k, 0]);
                    let seed_y = rng::derive_seed(&[config.base_seed, 0, cell_idx, k, 1]);
                    let x = wishart::sample_contaminated(&params, contamination, n_x, seed_x)?;
                    let y = wishart::sample(&params, n_y, seed_y)?;
                    let fit_x = estimation::fit(&x)?;
                    let fit_y = estimation::fit(&y)?;
                    let distance =
                        distances::distance(measure, &fit_x.params, &fit_y.params)?;
                    let statistic = hypothesis::statistic_from_distance(
                        measure,
                        distance,
                        x.len(),
                        y.len(),
                    )?;
                    let outcome = hypothesis::outcome_from_statistic(
                        statistic,
                        hypothesis::degrees_of_freedom(x.dim(), true),
                        &config.alpha_levels,
                    )?;
                    Ok(RobustReplica {
                        distance,
                        rejections: outcome.reject_at.into_iter().map(|(_, r)| r).collect(),
                        sq_looks_x: (fit_x.params.looks() - looks).powi(2),
                        sq_looks_y: (fit_y.params.looks() - looks).powi(2),
                        weighted_sq_sigma_x: diagonal_weighted_error(
                            fit_x.params.sigma(),
                            &config.sigma,
                        ),
                        weighted_sq_sigma_y: diagonal_weighted_error(
                            fit_y.params.sigma(),
                            &config.sigma,
                        ),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let verdicts: Vec<ReplicaVerdict> = replicas
                .iter()
                .map(|r| ReplicaVerdict::Decided {
                    distance: r.distance,
                    rejections: r.rejections.clone(),
                })
                .collect();
            let summary = summarize_verdicts(&verdicts, &config.alpha_levels, config.replicas);
            let total = config.replicas as f64;
            let mse_looks_x = replicas.iter().map(|r| r.sq_looks_x).sum::<f64>() / total;
            let mse_looks_y = replicas.iter().map(|r| r.sq_looks_y).sum::<f64>() / total;
            let rmse_sigma_x =
                replicas.iter().map(|r| r.weighted_sq_sigma_x).sum::<f64>() / total;
            let rmse_sigma_y =
                replicas.iter().map(|r| r.weighted_sq_sigma_y).sum::<f64>() / total;
            rows.push(RobustnessResultRow {
                n_x,
                n_y,
                looks,
                empirical_size: summary.sizes,
                mean_distance: summary.mean_distance,
                coefficient_of_variation: summary.coefficient_of_variation,
                mse_looks_x,
                mse_looks_y,
                looks_mse_ratio: mse_looks_x / mse_looks_y,
                rmse_sigma_x,
                rmse_sigma_y,
                sigma_rmse_ratio: rmse_sigma_x / rmse_sigma_y,
                wall_time_ms: per_replica_ms(started, config.replicas, config.measure_timing),
            });
            cell_idx += 1;
        }
    }
    Ok(rows)
}

/// Which scalar quantity a sensitivity sweep perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Real part of one covariance entry (the mirrored entry follows).
    SigmaEntry { row: usize, col: usize },
    Looks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStatus {
    Ok,
    NotPositiveDefinite,
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub grid_value: f64,
    pub measure: DistanceMeasure,
    /// Absent when the grid point was flagged.
    pub distance: Option<f64>,
    pub status: SweepStatus,
}

fn perturbed_params(
    fixed: &WishartParams,
    vary: SweepVariable,
    value: f64,
) -> Result<WishartParams> {
    match vary {
        SweepVariable::SigmaEntry { row, col } => {
            let p = fixed.dim();
            if row >= p || col >= p {
                return Err(Error::DomainError(format!(
                    "entry ({row}, {col}) is outside a {p}x{p} matrix"
                )));
            }
            let mut entries = fixed.sigma().entries().to_vec();
            if row == col {
                entries[row * p + col] = Complex64::new(value, 0.0);
            } else {
                let imag = entries[row * p + col].im;
                entries[row * p + col] = Complex64::new(value, imag);
                entries[col * p + row] = Complex64::new(value, -imag);
            }
            let sigma = HermitianMatrix::new(p, entries)?;
            WishartParams::new(fixed.looks(), sigma)
        }
        SweepVariable::Looks => WishartParams::new(value, fixed.sigma().clone()),
    }
}

/// Distance from a fixed parameter set to a one-variable perturbation of
/// itself, for every grid value and measure. Grid points where the perturbed
/// matrix loses positive definiteness are flagged and skipped, not fatal.
pub fn sensitivity_sweep(
    fixed: &WishartParams,
    vary: SweepVariable,
    grid: &[f64],
    measures: &[DistanceMeasure],
) -> Result<Vec<SensitivityRow>> {
    let mut rows = Vec::with_capacity(grid.len() * measures.len());
    for &value in grid {
        match perturbed_params(fixed, vary, value) {
            Ok(params) => {
                for &measure in measures {
                    match distances::distance(measure, fixed, &params) {
                        Ok(d) => rows.push(SensitivityRow {
                            grid_value: value,
                            measure,
                            distance: Some(d),
                            status: SweepStatus::Ok,
                        }),
                        Err(Error::ChiSquareDiverges) => rows.push(SensitivityRow {
                            grid_value: value,
                            measure,
                            distance: None,
                            status: SweepStatus::Diverged,
                        }),
                        Err(e) => return Err(e),
                    }
                }
            }
            Err(Error::NotPositiveDefinite) => {
                for &measure in measures {
                    rows.push(SensitivityRow {
                        grid_value: value,
                        measure,
                        distance: None,
                        status: SweepStatus::NotPositiveDefinite,
                    });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

/// Splits `total` recorded observations into disjoint X-blocks of n_x
/// consecutive indices; for each X-block the remaining observations,
/// concatenated in order, are chunked into disjoint Y-blocks of n_y. Small
/// totals yield an empty pairing, which callers report rather than error on.
pub fn block_pairs(
    total: usize,
    n_x: usize,
    n_y: usize,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if n_x == 0 || n_y == 0 {
        return Err(Error::DomainError(
            "block sizes must be at least 1".into(),
        ));
    }
    let mut pairs = Vec::new();
    for bx in 0..total / n_x {
        let x_start = bx * n_x;
        let x_indices: Vec<usize> = (x_start..x_start + n_x).collect();
        let complement: Vec<usize> = (0..x_start)
            .chain(x_start + n_x..total)
            .collect();
        for chunk in complement.chunks_exact(n_y) {
            pairs.push((x_indices.clone(), chunk.to_vec()));
        }
    }
    Ok(pairs)
}
