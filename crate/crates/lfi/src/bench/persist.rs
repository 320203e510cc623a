//! Run persistence: a TOML manifest (seed, config echo, counts, metrics),
//! the posterior mixture as a text parameter file, and raw ABC samples as
//! CSV. A rerun of the same manifest's seed+config reproduces every metric
//! bit-identically; wall-clock timings live in a separate file so the
//! comparison stays byte-exact.

use super::{BenchError, Experiment, ExperimentConfig, Method, RunResult};
use crate::gmath::{Gaussian, GaussianMixture};
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: Experiment,
    pub method: Method,
    pub seed: u64,
    pub n_simulations: u64,
    pub ess: Option<f64>,
    pub epsilon: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub config: ExperimentConfig,
}

/// Everything plotting needs from a persisted run.
#[derive(Debug, Clone)]
pub struct PlotRecord {
    pub manifest: Manifest,
    pub posterior: GaussianMixture,
}

/// Write `manifest.toml`, `posterior.txt`, `timings.txt`, and (for ABC
/// methods) `samples.csv` under `dir`.
pub fn persist_run(result: &RunResult, cfg: &ExperimentConfig, dir: &Path) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir)?;
    let manifest = Manifest {
        experiment: result.experiment,
        method: result.method,
        seed: result.seed,
        n_simulations: result.n_simulations,
        ess: result.ess,
        epsilon: result.epsilon,
        metrics: result.metrics.clone(),
        config: cfg.clone(),
    };
    std::fs::write(
        dir.join("manifest.toml"),
        toml::to_string(&manifest).expect("manifest serializes"),
    )?;
    save_mixture(&result.posterior, &dir.join("posterior.txt"))?;
    let mut tw = BufWriter::new(std::fs::File::create(dir.join("timings.txt"))?);
    for (k, v) in &result.timings {
        writeln!(tw, "{k} {v:.3}")?;
    }
    if let (Some(samples), Some(weights)) = (&result.samples, &result.weights) {
        let mut w = BufWriter::new(std::fs::File::create(dir.join("samples.csv"))?);
        let d = samples[0].len();
        let header: Vec<String> = (0..d).map(|i| format!("theta_{i}")).collect();
        writeln!(w, "{},weight", header.join(","))?;
        for (s, wt) in samples.iter().zip(weights) {
            let row: Vec<String> = s.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{},{wt}", row.join(","))?;
        }
    }
    Ok(())
}

/// Record a failed run so sweeps remain auditable.
pub fn persist_failure(cfg: &ExperimentConfig, dir: &Path, err: &BenchError) -> Result<(), BenchError> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(std::fs::File::create(dir.join("manifest.toml"))?);
    writeln!(w, "error = {:?}", err.to_string())?;
    write!(w, "{}", toml::to_string(cfg).expect("config serializes"))?;
    Ok(())
}

/// Load a persisted run directory.
pub fn load_plot_record(dir: &Path) -> Result<PlotRecord, BenchError> {
    let manifest: Manifest = toml::from_str(&std::fs::read_to_string(dir.join("manifest.toml"))?)
        .map_err(|e| BenchError::Parse(format!("{}: {e}", dir.display())))?;
    let posterior = load_mixture(&dir.join("posterior.txt"))?;
    Ok(PlotRecord { manifest, posterior })
}

const MIXTURE_MAGIC: &str = "lfi-mixture v1";

/// Mixture parameter file: weights, then per component the mean and the
/// rows of the upper-triangular precision factor. Values round-trip
/// bit-exactly.
pub fn save_mixture(m: &GaussianMixture, path: &Path) -> Result<(), BenchError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{MIXTURE_MAGIC}")?;
    writeln!(w, "dim {}", m.dim())?;
    writeln!(w, "components {}", m.n_components())?;
    let ws: Vec<String> = m.weights().iter().map(|v| format!("{v}")).collect();
    writeln!(w, "weights {}", ws.join(" "))?;
    for c in m.components() {
        let mean: Vec<String> = c.mean().iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", mean.join(" "))?;
        for row in c.prec_chol().rows() {
            let r: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", r.join(" "))?;
        }
    }
    Ok(())
}

pub fn load_mixture(path: &Path) -> Result<GaussianMixture, BenchError> {
    let f = std::fs::File::open(path)?;
    let mut lines = BufReader::new(f).lines();
    let mut next = || -> Result<String, BenchError> {
        lines
            .next()
            .ok_or_else(|| BenchError::Parse("unexpected end of mixture file".into()))?
            .map_err(BenchError::from)
    };
    let magic = next()?;
    if magic.trim() != MIXTURE_MAGIC {
        return Err(BenchError::Parse(format!("bad mixture magic `{magic}`")));
    }
    let dim: usize = field(&next()?, "dim")?;
    let k: usize = field(&next()?, "components")?;
    let weights_line = next()?;
    let weights: Vec<f64> = weights_line
        .strip_prefix("weights ")
        .ok_or_else(|| BenchError::Parse("missing weights line".into()))?
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| BenchError::Parse(format!("bad weight: {e}")))?;
    if weights.len() != k {
        return Err(BenchError::Parse("weight count mismatch".into()));
    }
    let parse_row = |line: &str| -> Result<Vec<f64>, BenchError> {
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| BenchError::Parse(format!("bad value: {e}")))?;
        if vals.len() != dim {
            return Err(BenchError::Parse("row length mismatch".into()));
        }
        Ok(vals)
    };
    let mut comps = Vec::with_capacity(k);
    for _ in 0..k {
        let mean = Array1::from_vec(parse_row(&next()?)?);
        let mut u = Array2::zeros((dim, dim));
        for i in 0..dim {
            let row = parse_row(&next()?)?;
            for (j, v) in row.into_iter().enumerate() {
                u[[i, j]] = v;
            }
        }
        comps.push(Gaussian::new(mean, u));
    }
    GaussianMixture::new(weights, comps).map_err(BenchError::from)
}

fn field<T: std::str::FromStr>(line: &str, key: &str) -> Result<T, BenchError>
where
    T::Err: std::fmt::Display,
{
    line.strip_prefix(key)
        .ok_or_else(|| BenchError::Parse(format!("expected `{key}` in `{line}`")))?
        .trim()
        .parse::<T>()
        .map_err(|e| BenchError::Parse(format!("bad `{key}`: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn mixture_roundtrip_is_bit_exact() {
        let mut rng = seeded(3);
        let comps: Vec<Gaussian> = (0..3)
            .map(|_| {
                let mut u = Array2::zeros((2, 2));
                u[[0, 0]] = rng.random_range(0.5..2.0);
                u[[1, 1]] = rng.random_range(0.5..2.0);
                u[[0, 1]] = rng.random_range(-0.5..0.5);
                Gaussian::new(
                    ndarray::arr1(&[rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]),
                    u,
                )
            })
            .collect();
        let m = GaussianMixture::new(vec![0.25, 0.5, 0.25], comps).unwrap();
        let dir = std::env::temp_dir().join("lfi-mixture-io");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mix.txt");
        save_mixture(&m, &path).unwrap();
        let back = load_mixture(&path).unwrap();
        assert_eq!(m, back);
    }
}
