//! Plain-text persistence: matrix samples, TOML experiment configs, and CSV
//! emission for result tables.
//!
//! Sample format, one observation per line after the header:
//!
//! ```text
//! wishart-sample v1 p=<dim> n=<count>
//! <re> <im> <re> <im> ...   (2·p² floats, row-major)
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distances::DistanceMeasure;
use crate::error::{Error, Result};
use crate::experiments::{
    RobustnessResultRow, SensitivityRow, SizeExperimentConfig, SizeResultRow, SweepStatus,
};
use crate::hermitian::HermitianMatrix;
use crate::wishart::{ContaminationSpec, MatrixSample};

const SAMPLE_MAGIC: &str = "wishart-sample";
const SAMPLE_VERSION: &str = "v1";

fn check_destination(path: &Path, overwrite: bool) -> Result<()> {
    if !overwrite && path.exists() {
        return Err(Error::FileExists(path.to_path_buf()));
    }
    Ok(())
}

/// Writes a sample with 17 significant digits per component, enough to
/// reproduce every double exactly on read.
pub fn write_sample(sample: &MatrixSample, path: &Path, overwrite: bool) -> Result<()> {
    check_destination(path, overwrite)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{SAMPLE_MAGIC} {SAMPLE_VERSION} p={} n={}",
        sample.dim(),
        sample.len()
    );
    for item in sample.iter() {
        let mut first = true;
        for entry in item.entries() {
            if !first {
                text.push(' ');
            }
            let _ = write!(text, "{:.16e} {:.16e}", entry.re, entry.im);
            first = false;
        }
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn parse_header_field(field: &str, key: &str) -> Result<usize> {
    let value = field
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| {
            Error::ParseError(format!("header field '{field}' should look like {key}=<int>"))
        })?;
    value
        .parse()
        .map_err(|_| Error::ParseError(format!("header field '{field}' has a non-integer value")))
}

/// Reads a sample file, validating shape, finiteness, conjugate symmetry,
/// and positive definiteness of every observation.
pub fn read_sample(path: &Path) -> Result<MatrixSample> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::ParseError("sample file is empty".into()))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 || parts[0] != SAMPLE_MAGIC || parts[1] != SAMPLE_VERSION {
        return Err(Error::ParseError(format!(
            "bad header '{header}': expected '{SAMPLE_MAGIC} {SAMPLE_VERSION} p=<dim> n=<count>'"
        )));
    }
    let p = parse_header_field(parts[2], "p")?;
    let n = parse_header_field(parts[3], "n")?;
    if p == 0 {
        return Err(Error::ValidationError("header dimension p must be positive".into()));
    }
    let mut items = Vec::with_capacity(n);
    for (offset, line) in lines.enumerate() {
        let line_no = offset + 2;
        let mut values = Vec::with_capacity(2 * p * p);
        for token in line.split_whitespace() {
            let value: f64 = token.parse().map_err(|_| {
                Error::ParseError(format!("line {line_no}: '{token}' is not a number"))
            })?;
            values.push(value);
        }
        if values.len() != 2 * p * p {
            return Err(Error::ParseError(format!(
                "line {line_no}: expected {} values for p={p}, got {}",
                2 * p * p,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::ValidationError(format!(
                "line {line_no}: non-finite component"
            )));
        }
        let entries: Vec<Complex64> = values
            .chunks_exact(2)
            .map(|pair| Complex64::new(pair[0], pair[1]))
            .collect();
        let matrix = HermitianMatrix::new(p, entries)
            .map_err(|e| Error::ValidationError(format!("line {line_no}: {e}")))?;
        matrix.cholesky().map_err(|_| {
            Error::ValidationError(format!("line {line_no}: matrix is not positive definite"))
        })?;
        items.push(matrix);
    }
    if items.len() != n {
        return Err(Error::ValidationError(format!(
            "header says n={n} but the file holds {} observations",
            items.len()
        )));
    }
    MatrixSample::new(items)
}

/// Fully resolved experiment description read from a TOML config.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfigFile {
    pub experiment: SizeExperimentConfig,
    pub contamination: Option<ContaminationSpec>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<usize>,
    looks: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_file: Option<String>,
    pairs: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alphas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replicas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measures: Option<Vec<String>>,
    base_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    timing: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contamination: Option<RawContamination>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawContamination {
    epsilon: f64,
    scale: f64,
}

fn sigma_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<HermitianMatrix> {
    let p = rows.len();
    if rows.iter().any(|row| row.len() != p) {
        return Err(Error::ValidationError(
            "sigma: rows must form a square matrix".into(),
        ));
    }
    let entries: Vec<Complex64> = rows
        .iter()
        .flatten()
        .map(|pair| Complex64::new(pair[0], pair[1]))
        .collect();
    HermitianMatrix::new(p, entries)
        .map_err(|e| Error::ValidationError(format!("sigma: {e}")))
}

fn resolve_sigma(raw: &RawConfig, config_dir: &Path) -> Result<HermitianMatrix> {
    match (&raw.sigma, &raw.sigma_file) {
        (Some(rows), None) => sigma_from_rows(rows),
        (None, Some(file)) => {
            let mut path = PathBuf::from(file);
            if path.is_relative() {
                path = config_dir.join(path);
            }
            let sample = read_sample(&path)
                .map_err(|e| Error::ValidationError(format!("sigma_file: {e}")))?;
            if sample.len() != 1 {
                return Err(Error::ValidationError(format!(
                    "sigma_file: expected exactly one matrix, found {}",
                    sample.len()
                )));
            }
            Ok(sample.items()[0].clone())
        }
        _ => Err(Error::ValidationError(
            "config must set exactly one of sigma and sigma_file".into(),
        )),
    }
}

/// Reads and resolves a TOML experiment config. Omitted fields take their
/// defaults: 1000 replicas, alphas {0.01, 0.05}, all five measures, timing
/// off.
pub fn read_config(path: &Path) -> Result<ExperimentConfigFile> {
    let text = fs::read_to_string(path)?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| Error::ParseError(format!("config: {e}")))?;
    let config_dir = path.parent().unwrap_or_else(|| Path::new("."));
    let sigma = resolve_sigma(&raw, config_dir)?;
    let p = match raw.p {
        Some(p) if p != sigma.dim() => {
            return Err(Error::ValidationError(format!(
                "p: declared {p} but sigma is {0}x{0}",
                sigma.dim()
            )));
        }
        Some(p) => p,
        None => sigma.dim(),
    };
    let measures = match &raw.measures {
        Some(names) => {
            let mut parsed = Vec::with_capacity(names.len());
            for name in names {
                parsed.push(name.parse::<DistanceMeasure>()?);
            }
            parsed
        }
        None => DistanceMeasure::standard_set(),
    };
    let contamination = raw
        .contamination
        .as_ref()
        .map(|c| {
            ContaminationSpec::new(c.epsilon, c.scale)
                .map_err(|e| Error::ValidationError(format!("contamination: {e}")))
        })
        .transpose()?;
    let experiment = SizeExperimentConfig {
        p,
        looks: raw.looks.clone(),
        sigma,
        sample_size_pairs: raw.pairs.iter().map(|&[x, y]| (x, y)).collect(),
        alpha_levels: raw.alphas.clone().unwrap_or_else(|| vec![0.01, 0.05]),
        replicas: raw.replicas.unwrap_or(1000),
        measures,
        base_seed: raw.base_seed,
        measure_timing: raw.timing.unwrap_or(false),
    };
    experiment.validate()?;
    Ok(ExperimentConfigFile {
        experiment,
        contamination,
    })
}

/// Writes a resolved config back out; reading it again yields an identical
/// resolved config.
pub fn write_config(config: &ExperimentConfigFile, path: &Path, overwrite: bool) -> Result<()> {
    check_destination(path, overwrite)?;
    let exp = &config.experiment;
    let p = exp.sigma.dim();
    let sigma_rows: Vec<Vec<[f64; 2]>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let e = exp.sigma.entry(i, j);
                    [e.re, e.im]
                })
                .collect()
        })
        .collect();
    let raw = RawConfig {
        p: Some(exp.p),
        looks: exp.looks.clone(),
        sigma: Some(sigma_rows),
        sigma_file: None,
        pairs: exp.sample_size_pairs.iter().map(|&(x, y)| [x, y]).collect(),
        alphas: Some(exp.alpha_levels.clone()),
        replicas: Some(exp.replicas),
        measures: Some(exp.measures.iter().map(|m| m.to_string()).collect()),
        base_seed: exp.base_seed,
        timing: Some(exp.measure_timing),
        contamination: config.contamination.map(|c| RawContamination {
            epsilon: c.epsilon(),
            scale: c.scale(),
        }),
    };
    let text = toml::to_string_pretty(&raw)
        .map_err(|e| Error::ValidationError(format!("config serialization: {e}")))?;
    fs::write(path, text)?;
    Ok(())
}

fn push_alpha_headers(header: &mut String, levels: &[(f64, f64)]) {
    for (alpha, _) in levels {
        let _ = write!(header, ",size_at_{alpha}");
    }
}

fn push_alpha_values(line: &mut String, levels: &[(f64, f64)]) {
    for (_, size) in levels {
        let _ = write!(line, ",{size}");
    }
}

/// CSV for the empirical-size table. Columns are stable and values use the
/// shortest representation that parses back to the same double.
pub fn size_table_csv(rows: &[SizeResultRow]) -> String {
    let mut out = String::from("measure,n_x,n_y,looks");
    if let Some(first) = rows.first() {
        push_alpha_headers(&mut out, &first.empirical_size);
    }
    out.push_str(",mean_distance,cv,wall_time_ms,diverged\n");
    for row in rows {
        let _ = write!(out, "{},{},{},{}", row.measure, row.n_x, row.n_y, row.looks);
        push_alpha_values(&mut out, &row.empirical_size);
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            row.mean_distance, row.coefficient_of_variation, row.wall_time_ms, row.diverged
        );
    }
    out
}

/// CSV for the contamination-robustness table.
pub fn robustness_table_csv(rows: &[RobustnessResultRow]) -> String {
    let mut out = String::from("n_x,n_y,looks");
    if let Some(first) = rows.first() {
        push_alpha_headers(&mut out, &first.empirical_size);
    }
    out.push_str(
        ",mean_distance,cv,mse_looks_x,mse_looks_y,looks_mse_ratio,\
         rmse_sigma_x,rmse_sigma_y,sigma_rmse_ratio,wall_time_ms\n",
    );
    for row in rows {
        let _ = write!(out, "{},{},{}", row.n_x, row.n_y, row.looks);
        push_alpha_values(&mut out, &row.empirical_size);
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{},{},{},{}",
            row.mean_distance,
            row.coefficient_of_variation,
            row.mse_looks_x,
            row.mse_looks_y,
            row.looks_mse_ratio,
            row.rmse_sigma_x,
            row.rmse_sigma_y,
            row.sigma_rmse_ratio,
            row.wall_time_ms
        );
    }
    out
}

fn sweep_status_name(status: SweepStatus) -> &'static str {
    match status {
        SweepStatus::Ok => "ok",
        SweepStatus::NotPositiveDefinite => "not_positive_definite",
        SweepStatus::Diverged => "diverged",
    }
}

/// CSV for a sensitivity sweep; flagged points carry an empty distance.
pub fn sensitivity_table_csv(rows: &[SensitivityRow]) -> String {
    let mut out = String::from("grid_value,measure,distance,status\n");
    for row in rows {
        let distance = row.distance.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            row.grid_value,
            row.measure,
            distance,
            sweep_status_name(row.status)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::wishart::{self, WishartParams};
    use std::fs;

    fn temp_dir() -> tempfile::TempDir {
        tempfile::tempdir().expect("temp dir")
    }

    fn forest_sample(n: usize, seed: u64) -> MatrixSample {
        let params = WishartParams::new(8.0, presets::forest_covariance()).unwrap();
        wishart::sample(&params, n, seed).unwrap()
    }

    #[test]
    fn sample_roundtrip_is_bitwise_exact() {
        let dir = temp_dir();
        let path = dir.path().join("sample.txt");
        let sample = forest_sample(100, 4001);
        write_sample(&sample, &path, false).unwrap();
        let back = read_sample(&path).unwrap();
        assert_eq!(back.dim(), sample.dim());
        assert_eq!(back.len(), sample.len());
        for (a, b) in sample.iter().zip(back.iter()) {
            assert_eq!(a.entries(), b.entries());
        }
    }

    #[test]
    fn overwrite_requires_explicit_flag() {
        let dir = temp_dir();
        let path = dir.path().join("sample.txt");
        let sample = forest_sample(3, 1);
        write_sample(&sample, &path, false).unwrap();
        assert!(matches!(
            write_sample(&sample, &path, false),
            Err(Error::FileExists(_))
        ));
        write_sample(&sample, &path, true).unwrap();
    }

    #[test]
    fn malformed_samples_are_rejected_with_context() {
        let dir = temp_dir();
        let write = |name: &str, text: &str| {
            let path = dir.path().join(name);
            fs::write(&path, text).unwrap();
            path
        };
        let empty = write("empty.txt", "");
        assert!(matches!(read_sample(&empty), Err(Error::ParseError(_))));
        let bad_header = write("header.txt", "wishart-sample v2 p=1 n=1\n1.0 0.0\n");
        assert!(matches!(read_sample(&bad_header), Err(Error::ParseError(_))));
        let bad_token = write(
            "token.txt",
            "wishart-sample v1 p=1 n=1\nbanana 0.0\n",
        );
        match read_sample(&bad_token) {
            Err(Error::ParseError(message)) => assert!(message.contains("line 2")),
            other => panic!("unexpected {other:?}"),
        }
        let short_line = write("short.txt", "wishart-sample v1 p=2 n=1\n1.0 0.0 0.0\n");
        assert!(matches!(read_sample(&short_line), Err(Error::ParseError(_))));
        let wrong_count = write("count.txt", "wishart-sample v1 p=1 n=3\n1.0 0.0\n");
        assert!(matches!(
            read_sample(&wrong_count),
            Err(Error::ValidationError(_))
        ));
        let non_finite = write("nan.txt", "wishart-sample v1 p=1 n=1\nNaN 0.0\n");
        assert!(matches!(
            read_sample(&non_finite),
            Err(Error::ValidationError(_))
        ));
        let not_hermitian = write(
            "herm.txt",
            "wishart-sample v1 p=2 n=1\n1.0 0.0 0.5 0.25 0.5 0.2501 1.0 0.0\n",
        );
        match read_sample(&not_hermitian) {
            Err(Error::ValidationError(message)) => assert!(message.contains("line 2")),
            other => panic!("unexpected {other:?}"),
        }
        let not_pd = write(
            "pd.txt",
            "wishart-sample v1 p=1 n=1\n-2.0 0.0\n",
        );
        assert!(matches!(read_sample(&not_pd), Err(Error::ValidationError(_))));
    }

    #[test]
    fn single_matrix_file_recovers_preset_exactly() {
        let dir = temp_dir();
        let path = dir.path().join("sigma.txt");
        let sigma = presets::forest_covariance();
        let sample = MatrixSample::new(vec![sigma.clone()]).unwrap();
        write_sample(&sample, &path, false).unwrap();
        let back = read_sample(&path).unwrap();
        assert_eq!(back.items()[0].entries(), sigma.entries());
        assert_eq!(back.items()[0].entry(0, 1).re, 11050.0);
        assert_eq!(back.items()[0].entry(0, 1).im, 3759.0);
    }

    const MINIMAL_CONFIG: &str = r#"
looks = [8.0]
pairs = [[400, 400]]
base_seed = 42
sigma = [[[2.0, 0.0], [0.5, 0.25]], [[0.5, -0.25], [1.0, 0.0]]]
"#;

    #[test]
    fn config_defaults_are_applied() {
        let dir = temp_dir();
        let path = dir.path().join("config.toml");
        fs::write(&path, MINIMAL_CONFIG).unwrap();
        let config = read_config(&path).unwrap();
        let exp = &config.experiment;
        assert_eq!(exp.p, 2);
        assert_eq!(exp.replicas, 1000);
        assert_eq!(exp.alpha_levels, vec![0.01, 0.05]);
        assert_eq!(exp.measures, DistanceMeasure::standard_set());
        assert_eq!(exp.base_seed, 42);
        assert!(!exp.measure_timing);
        assert!(config.contamination.is_none());
    }

    #[test]
    fn config_full_roundtrip_is_idempotent() {
        let dir = temp_dir();
        let path = dir.path().join("config.toml");
        fs::write(
            &path,
            r#"
p = 2
looks = [4.0, 8.0]
pairs = [[49, 49], [49, 400]]
base_seed = 7
replicas = 250
alphas = [0.05]
measures = ["kl", "renyi=0.35"]
timing = false
sigma = [[[2.0, 0.0], [0.5, 0.25]], [[0.5, -0.25], [1.0, 0.0]]]

[contamination]
epsilon = 1e-5
scale = 1000.0
"#,
        )
        .unwrap();
        let first = read_config(&path).unwrap();
        assert_eq!(
            first.contamination,
            Some(ContaminationSpec::new(1e-5, 1000.0).unwrap())
        );
        let rewritten = dir.path().join("rewritten.toml");
        write_config(&first, &rewritten, false).unwrap();
        let second = read_config(&rewritten).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn config_sigma_file_is_resolved_relative_to_config() {
        let dir = temp_dir();
        let sigma_path = dir.path().join("sigma.txt");
        let sample = MatrixSample::new(vec![presets::forest_covariance()]).unwrap();
        write_sample(&sample, &sigma_path, false).unwrap();
        let config_path = dir.path().join("config.toml");
        fs::write(
            &config_path,
            "looks = [8.0]\npairs = [[49, 49]]\nbase_seed = 1\nsigma_file = \"sigma.txt\"\n",
        )
        .unwrap();
        let config = read_config(&config_path).unwrap();
        assert_eq!(config.experiment.p, 3);
        assert_eq!(
            config.experiment.sigma.entries(),
            presets::forest_covariance().entries()
        );
    }

    #[test]
    fn config_errors_name_the_offending_key() {
        let dir = temp_dir();
        let check = |name: &str, text: &str| -> Error {
            let path = dir.path().join(name);
            fs::write(&path, text).unwrap();
            read_config(&path).unwrap_err()
        };
        let err = check(
            "unknown.toml",
            &format!("{MINIMAL_CONFIG}\nmystery = 3\n"),
        );
        assert!(matches!(err, Error::ParseError(_)), "{err}");
        let err = check(
            "replicas.toml",
            &format!("{MINIMAL_CONFIG}\nreplicas = 0\n"),
        );
        match err {
            Error::ValidationError(message) => assert!(message.contains("replicas")),
            other => panic!("unexpected {other:?}"),
        }
        let err = check(
            "measure.toml",
            &format!("{MINIMAL_CONFIG}\nmeasures = [\"manhattan\"]\n"),
        );
        assert!(matches!(err, Error::ParseError(_)));
        let err = check(
            "nosigma.toml",
            "looks = [8.0]\npairs = [[49, 49]]\nbase_seed = 1\n",
        );
        match err {
            Error::ValidationError(message) => assert!(message.contains("sigma")),
            other => panic!("unexpected {other:?}"),
        }
        let err = check(
            "badp.toml",
            &format!("{MINIMAL_CONFIG}\np = 3\n"),
        );
        match err {
            Error::ValidationError(message) => assert!(message.contains('p')),
            other => panic!("unexpected {other:?}"),
        }
        let err = check(
            "badcontam.toml",
            &format!("{MINIMAL_CONFIG}\n[contamination]\nepsilon = 2.0\nscale = 10.0\n"),
        );
        match err {
            Error::ValidationError(message) => assert!(message.contains("contamination")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_tables_have_stable_layout() {
        let row = SizeResultRow {
            measure: DistanceMeasure::KullbackLeibler,
            n_x: 49,
            n_y: 400,
            looks: 8.0,
            empirical_size: vec![(0.01, 0.012), (0.05, 0.055)],
            mean_distance: 0.0125,
            coefficient_of_variation: 0.4375,
            wall_time_ms: 0.0,
            diverged: 0,
        };
        let csv = size_table_csv(&[row]);
        assert_eq!(
            csv,
            "measure,n_x,n_y,looks,size_at_0.01,size_at_0.05,mean_distance,cv,wall_time_ms,diverged\n\
             kl,49,400,8,0.012,0.055,0.0125,0.4375,0,0\n"
        );
        let sensitivity = SensitivityRow {
            grid_value: 360932.0,
            measure: DistanceMeasure::Hellinger,
            distance: None,
            status: SweepStatus::NotPositiveDefinite,
        };
        let csv = sensitivity_table_csv(&[sensitivity]);
        assert_eq!(
            csv,
            "grid_value,measure,distance,status\n360932,hellinger,,not_positive_definite\n"
        );
    }
}
