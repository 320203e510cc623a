//! The four benchmark generative models, their priors, summary statistics,
//! pilot normalization, and analytic reference posteriors where they exist.
//!
//! A simulator maps a parameter vector to a data vector (summary statistics
//! are part of the data-generating process), already normalized or whitened
//! with persisted pilot-run statistics; inference code can rely on plain
//! Euclidean geometry in x-space.

mod blr;
mod gillespie;
mod lv;
mod mg1;
mod mog;

pub use blr::BlrProblem;
pub use gillespie::{gillespie_on_grid, GillespieOutcome};
pub use lv::{gillespie_lv, lv_summary, pilot_normalize, LvPilot, LvProblem, LV_MAX_EVENTS};
pub use mg1::{pilot_whiten, sim_mg1, Mg1Pilot, Mg1Problem};
pub use mog::{MogPosterior, MogProblem};

use ndarray::Array1;
use rand_chacha::ChaCha8Rng;
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// Event budget exceeded; callers treat the draw as failed and resample.
    #[error("simulation exploded: event count exceeded {max_events}")]
    Exploded { max_events: usize },
    #[error("pilot statistics are degenerate: {0}")]
    PilotDegenerate(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed artifact file: {0}")]
    Malformed(String),
}

/// A generative model: consumes θ, emits a finite x of fixed dimension.
pub trait Simulator {
    fn theta_dim(&self) -> usize;
    fn x_dim(&self) -> usize;

    /// One forward simulation. An `Exploded` error marks a failed draw the
    /// caller should resample; any returned vector is finite with length
    /// `x_dim`.
    fn simulate(&self, theta: &Array1<f64>, rng: &mut ChaCha8Rng) -> Result<Array1<f64>, SimError>;

    /// Whether the simulator is defined at `theta`. Proposal distributions
    /// can wander outside the simulator's domain (e.g. a negative service
    /// rate); such draws are rejected before simulating, which amounts to
    /// sampling the proposal truncated to the domain.
    fn theta_valid(&self, _theta: &Array1<f64>) -> bool {
        true
    }
}

// -- small text-artifact helpers ---------------------------------------------

pub(crate) fn write_vector(w: &mut impl Write, v: &Array1<f64>) -> Result<(), SimError> {
    let line: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    writeln!(w, "{}", line.join(" "))?;
    Ok(())
}

pub(crate) fn read_vector(line: &str, expect: usize) -> Result<Array1<f64>, SimError> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| SimError::Malformed(format!("bad number in `{line}`: {e}")))?;
    if vals.len() != expect {
        return Err(SimError::Malformed(format!(
            "expected {expect} values, found {} in `{line}`",
            vals.len()
        )));
    }
    Ok(Array1::from_vec(vals))
}

pub(crate) fn read_data_line(
    lines: &mut impl Iterator<Item = std::io::Result<String>>,
) -> Result<String, SimError> {
    for line in lines {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        return Ok(line);
    }
    Err(SimError::Malformed("unexpected end of file".into()))
}

pub(crate) fn open_lines(
    path: &std::path::Path,
) -> Result<std::io::Lines<std::io::BufReader<std::fs::File>>, SimError> {
    Ok(std::io::BufReader::new(std::fs::File::open(path)?).lines())
}
