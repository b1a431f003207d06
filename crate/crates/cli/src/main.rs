//! Command-line interface over the sarwish library: simulation, estimation,
//! distances, homogeneity tests, and the Monte Carlo experiment harnesses.
//!
//! Exit codes: 0 success, 1 domain or validation error (stderr line
//! `error[Code]: message`), 2 usage error.

#![forbid(unsafe_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sarwish::dataio;
use sarwish::distances::{self, DistanceMeasure};
use sarwish::estimation;
use sarwish::experiments::{self, SweepVariable};
use sarwish::hypothesis::{self, TestOutcome};
use sarwish::wishart::{self, ContaminationSpec, MatrixSample, WishartParams};
use sarwish::{Error, HermitianMatrix, Result};

#[derive(Parser)]
#[command(
    name = "sarwish",
    version,
    about = "Multilook complex Wishart toolkit: simulation, ML estimation, \
             stochastic distances, and homogeneity tests",
    after_help = "Exit codes: 0 success, 1 domain/validation error, 2 usage error.\n\
                  Results never depend on --workers; identical seeds give identical output."
)]
struct Cli {
    /// Worker threads for Monte Carlo subcommands (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a reproducible sample from W(L, Σ) and write it to a sample file.
    Simulate {
        /// Number of looks L; sampling needs an integer L ≥ p.
        #[arg(long)]
        looks: f64,
        /// Sample file holding exactly one matrix: the scale Σ (E[Z] = Σ).
        #[arg(long, value_name = "FILE")]
        sigma: PathBuf,
        /// Number of observations to draw.
        #[arg(long)]
        n: usize,
        /// RNG seed; identical seeds give identical samples.
        #[arg(long)]
        seed: u64,
        /// Draw from W(L, SCALE·Σ) with probability EPS, independently per observation.
        #[arg(long, num_args = 2, value_names = ["EPS", "SCALE"])]
        contaminate: Option<Vec<f64>>,
        /// Scale the covariance to (1+K)·Σ before sampling.
        #[arg(long = "scale-k", value_name = "K", allow_hyphen_values = true)]
        scale_k: Option<f64>,
        /// Output sample file.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Overwrite the output file if it already exists.
        #[arg(long)]
        force: bool,
    },
    /// Maximum-likelihood fit: prints looks, Σ entries, CRLB variance of the
    /// looks estimate, and solver diagnostics as `key = value` lines.
    Estimate {
        /// Input sample file.
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Hold looks fixed at this value and estimate only Σ.
        #[arg(long = "fixed-looks", value_name = "L")]
        fixed_looks: Option<f64>,
    },
    /// ML-fit both samples, then print the closed-form distance between the fits.
    Distance {
        #[arg(long, value_name = "FILE")]
        a: PathBuf,
        #[arg(long, value_name = "FILE")]
        b: PathBuf,
        /// kl | chi2 | renyi | renyi=<β> | bhattacharyya | hellinger (β defaults to 0.9).
        #[arg(long)]
        measure: String,
    },
    /// Two-sample homogeneity test; prints statistic, dof, p-value, decisions.
    Test {
        #[arg(long, value_name = "FILE")]
        a: PathBuf,
        #[arg(long, value_name = "FILE")]
        b: PathBuf,
        /// kl | chi2 | renyi | renyi=<β> | bhattacharyya | hellinger.
        #[arg(long)]
        measure: String,
        /// Comma-separated significance levels, e.g. 0.05,0.01.
        #[arg(long, value_name = "LIST")]
        alpha: String,
        /// Impose known looks instead of estimating them (drops one dof).
        #[arg(long = "fixed-looks", value_name = "L")]
        fixed_looks: Option<f64>,
    },
    /// Empirical-size Monte Carlo study from a TOML config; writes a CSV table.
    McSize {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall time per test (makes the CSV time-dependent).
        #[arg(long)]
        timing: bool,
        /// Overwrite the output file if it already exists.
        #[arg(long)]
        force: bool,
    },
    /// Contamination robustness study from a TOML config with a
    /// [contamination] block; writes a CSV table.
    Robustness {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall time per test (makes the CSV time-dependent).
        #[arg(long)]
        timing: bool,
        /// Overwrite the output file if it already exists.
        #[arg(long)]
        force: bool,
    },
    /// Distance sweep around a fixed parameter point; writes a CSV table.
    Sensitivity {
        /// "sigma-entry=<i,j>" to vary the real part of Σ[i][j], or "looks".
        #[arg(long, value_name = "WHAT")]
        vary: String,
        /// Inclusive grid "start:stop:points" with points ≥ 2.
        #[arg(long, value_name = "A:B:STEPS")]
        grid: String,
        /// Looks of the fixed reference parameters.
        #[arg(long = "fixed-looks", value_name = "L")]
        fixed_looks: f64,
        /// Sample file holding exactly one matrix: the reference Σ.
        #[arg(long, value_name = "FILE")]
        sigma: PathBuf,
        /// Comma-separated measures (default: all five).
        #[arg(long, value_name = "LIST")]
        measures: Option<String>,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Overwrite the output file if it already exists.
        #[arg(long)]
        force: bool,
    },
    /// Split one recorded sample into disjoint X/Y blocks and test every pair.
    Blocks {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// X-block size.
        #[arg(long)]
        nx: usize,
        /// Y-block size.
        #[arg(long)]
        ny: usize,
        /// kl | chi2 | renyi | renyi=<β> | bhattacharyya | hellinger.
        #[arg(long)]
        measure: String,
        /// Comma-separated significance levels.
        #[arg(long, value_name = "LIST")]
        alpha: String,
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// Overwrite the output file if it already exists.
        #[arg(long)]
        force: bool,
        /// Impose known looks instead of estimating them.
        #[arg(long = "fixed-looks", value_name = "L")]
        fixed_looks: Option<f64>,
    },
}

fn read_single_matrix(path: &Path) -> Result<HermitianMatrix> {
    let sample = dataio::read_sample(path)?;
    if sample.len() != 1 {
        return Err(Error::ValidationError(format!(
            "{}: expected exactly one matrix, found {}",
            path.display(),
            sample.len()
        )));
    }
    Ok(sample.items()[0].clone())
}

fn parse_measure(text: &str) -> Result<DistanceMeasure> {
    text.parse()
}

fn parse_alphas(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|token| {
            token.trim().parse::<f64>().map_err(|_| {
                Error::ParseError(format!("invalid significance level '{token}'"))
            })
        })
        .collect()
}

fn parse_measures(text: Option<&str>) -> Result<Vec<DistanceMeasure>> {
    match text {
        None => Ok(DistanceMeasure::standard_set()),
        Some(list) => list.split(',').map(|token| parse_measure(token.trim())).collect(),
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, points] = parts.as_slice() else {
        return Err(Error::ParseError(format!(
            "grid '{text}' must look like start:stop:points"
        )));
    };
    let start: f64 = start
        .parse()
        .map_err(|_| Error::ParseError(format!("invalid grid start '{start}'")))?;
    let stop: f64 = stop
        .parse()
        .map_err(|_| Error::ParseError(format!("invalid grid stop '{stop}'")))?;
    let points: usize = points
        .parse()
        .map_err(|_| Error::ParseError(format!("invalid grid point count '{points}'")))?;
    if points < 2 {
        return Err(Error::DomainError("grid needs at least 2 points".into()));
    }
    if !(stop > start) {
        return Err(Error::DomainError("grid stop must exceed start".into()));
    }
    let mut grid = Vec::with_capacity(points);
    for i in 0..points {
        let x = if i == points - 1 {
            stop
        } else {
            start + (stop - start) * i as f64 / (points - 1) as f64
        };
        grid.push(x);
    }
    Ok(grid)
}

fn parse_vary(text: &str) -> Result<SweepVariable> {
    if text == "looks" {
        return Ok(SweepVariable::Looks);
    }
    if let Some(rest) = text.strip_prefix("sigma-entry=") {
        let (row, col) = rest.split_once(',').ok_or_else(|| {
            Error::ParseError(format!("sigma entry '{rest}' must look like <i,j>"))
        })?;
        let row: usize = row
            .parse()
            .map_err(|_| Error::ParseError(format!("invalid row index '{row}'")))?;
        let col: usize = col
            .parse()
            .map_err(|_| Error::ParseError(format!("invalid column index '{col}'")))?;
        return Ok(SweepVariable::SigmaEntry { row, col });
    }
    Err(Error::ParseError(format!(
        "vary '{text}' must be 'looks' or 'sigma-entry=<i,j>'"
    )))
}

fn write_text(path: &Path, text: &str, force: bool) -> Result<()> {
    if !force && path.exists() {
        return Err(Error::FileExists(path.to_path_buf()));
    }
    fs::write(path, text)?;
    Ok(())
}

fn subsample(sample: &MatrixSample, indices: &[usize]) -> Result<MatrixSample> {
    MatrixSample::new(indices.iter().map(|&i| sample.items()[i].clone()).collect())
}

fn print_outcome(outcome: &TestOutcome) {
    println!("statistic = {}", outcome.statistic);
    println!("dof = {}", outcome.dof);
    println!("p_value = {}", outcome.p_value);
    for &(alpha, reject) in &outcome.reject_at {
        println!("reject_at[{alpha}] = {reject}");
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            looks,
            sigma,
            n,
            seed,
            contaminate,
            scale_k,
            out,
            force,
        } => {
            let mut matrix = read_single_matrix(&sigma)?;
            if let Some(k) = scale_k {
                matrix = matrix.scale(1.0 + k);
            }
            let params = WishartParams::new(looks, matrix)?;
            let sample = match contaminate {
                Some(values) => {
                    let spec = ContaminationSpec::new(values[0], values[1])?;
                    wishart::sample_contaminated(&params, &spec, n, seed)?
                }
                None => wishart::sample(&params, n, seed)?,
            };
            dataio::write_sample(&sample, &out, force)
        }
        Command::Estimate { input, fixed_looks } => {
            let sample = dataio::read_sample(&input)?;
            let fit = match fixed_looks {
                Some(looks) => estimation::fit_fixed_looks(&sample, looks)?,
                None => estimation::fit(&sample)?,
            };
            println!("looks = {}", fit.params.looks());
            println!("iterations = {}", fit.iterations);
            println!("score_residual = {}", fit.score_residual);
            println!("crlb_looks_variance = {}", fit.crlb_looks_variance);
            let p = fit.params.dim();
            for i in 0..p {
                for j in 0..p {
                    let entry = fit.params.sigma().entry(i, j);
                    println!("sigma[{i}][{j}] = {} {}", entry.re, entry.im);
                }
            }
            Ok(())
        }
        Command::Distance { a, b, measure } => {
            let measure = parse_measure(&measure)?;
            let fit_a = estimation::fit(&dataio::read_sample(&a)?)?;
            let fit_b = estimation::fit(&dataio::read_sample(&b)?)?;
            let d = distances::distance(measure, &fit_a.params, &fit_b.params)?;
            println!("{d}");
            Ok(())
        }
        Command::Test {
            a,
            b,
            measure,
            alpha,
            fixed_looks,
        } => {
            let measure = parse_measure(&measure)?;
            let alphas = parse_alphas(&alpha)?;
            let sample_a = dataio::read_sample(&a)?;
            let sample_b = dataio::read_sample(&b)?;
            let outcome = match fixed_looks {
                Some(looks) => hypothesis::run_test_fixed_looks(
                    measure, &sample_a, &sample_b, looks, &alphas,
                )?,
                None => hypothesis::run_test(measure, &sample_a, &sample_b, &alphas)?,
            };
            print_outcome(&outcome);
            Ok(())
        }
        Command::McSize {
            config,
            out,
            seed,
            timing,
            force,
        } => {
            let mut file = dataio::read_config(&config)?;
            if let Some(seed) = seed {
                file.experiment.base_seed = seed;
            }
            if timing {
                file.experiment.measure_timing = true;
            }
            let rows = experiments::empirical_size(&file.experiment)?;
            write_text(&out, &dataio::size_table_csv(&rows), force)?;
            println!("rows={}", rows.len());
            Ok(())
        }
        Command::Robustness {
            config,
            out,
            seed,
            timing,
            force,
        } => {
            let mut file = dataio::read_config(&config)?;
            if let Some(seed) = seed {
                file.experiment.base_seed = seed;
            }
            if timing {
                file.experiment.measure_timing = true;
            }
            let contamination = file.contamination.ok_or_else(|| {
                Error::ValidationError(
                    "robustness needs a [contamination] block in the config".into(),
                )
            })?;
            let rows = experiments::robustness_study(&file.experiment, &contamination)?;
            write_text(&out, &dataio::robustness_table_csv(&rows), force)?;
            println!("rows={}", rows.len());
            Ok(())
        }
        Command::Sensitivity {
            vary,
            grid,
            fixed_looks,
            sigma,
            measures,
            out,
            force,
        } => {
            let matrix = read_single_matrix(&sigma)?;
            let fixed = WishartParams::new(fixed_looks, matrix)?;
            let vary = parse_vary(&vary)?;
            let grid = parse_grid(&grid)?;
            let measures = parse_measures(measures.as_deref())?;
            let rows = experiments::sensitivity_sweep(&fixed, vary, &grid, &measures)?;
            write_text(&out, &dataio::sensitivity_table_csv(&rows), force)?;
            println!("rows={}", rows.len());
            Ok(())
        }
        Command::Blocks {
            input,
            nx,
            ny,
            measure,
            alpha,
            out,
            force,
            fixed_looks,
        } => {
            let sample = dataio::read_sample(&input)?;
            let measure = parse_measure(&measure)?;
            let alphas = parse_alphas(&alpha)?;
            let pairs = experiments::block_pairs(sample.len(), nx, ny)?;
            let mut csv = String::from("pair,x_start,y_start,statistic,dof,p_value");
            for alpha in &alphas {
                let _ = write!(csv, ",reject_at_{alpha}");
            }
            csv.push_str(",status\n");
            for (index, (x_indices, y_indices)) in pairs.iter().enumerate() {
                let x = subsample(&sample, x_indices)?;
                let y = subsample(&sample, y_indices)?;
                let outcome = match fixed_looks {
                    Some(looks) => {
                        hypothesis::run_test_fixed_looks(measure, &x, &y, looks, &alphas)
                    }
                    None => hypothesis::run_test(measure, &x, &y, &alphas),
                };
                let _ = write!(csv, "{index},{},{}", x_indices[0], y_indices[0]);
                match outcome {
                    Ok(outcome) => {
                        let _ = write!(
                            csv,
                            ",{},{},{}",
                            outcome.statistic, outcome.dof, outcome.p_value
                        );
                        for &(_, reject) in &outcome.reject_at {
                            let _ = write!(csv, ",{reject}");
                        }
                        csv.push_str(",ok\n");
                    }
                    Err(Error::ChiSquareDiverges) => {
                        let _ = write!(csv, ",,,");
                        for _ in &alphas {
                            csv.push(',');
                        }
                        csv.push_str("diverged\n");
                    }
                    Err(e) => return Err(e),
                }
            }
            write_text(&out, &csv, force)?;
            if pairs.is_empty() {
                println!("pairs=0 status=EmptyPairing");
            } else {
                println!("pairs={}", pairs.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.workers {
        Some(workers) => match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => Err(Error::ValidationError(format!("workers: {e}"))),
        },
        None => run(cli.command),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error[{}]: {error}", error.code());
            ExitCode::from(1)
        }
    }
}
