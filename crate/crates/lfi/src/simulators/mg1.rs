//! M/G/1 queue: a single server processes jobs whose service times are
//! uniform on `[θ₁, θ₂]` while jobs arrive with exponential interarrival
//! times of rate `θ₃`. Only the interdeparture times are observed, through
//! five equally spaced percentiles, whitened with pilot-run moments.
//!
//! Inference uses the box coordinates `ψ = (θ₁, θ₂−θ₁, θ₃)`, in which the
//! paper's prior `θ₁ ~ U(0,10)`, `θ₂−θ₁ ~ U(0,10)`, `θ₃ ~ U(0,⅓)` is an
//! axis-aligned box. The map to θ has unit Jacobian, so densities (and log
//! probabilities of the true parameters) are unchanged.

use super::{open_lines, read_data_line, read_vector, write_vector, SimError, Simulator};
use crate::gmath::UniformBoxPrior;
use crate::linalg::{cholesky_lower, solve_lower};
use crate::rng::substream;
use ndarray::{arr1, Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;

pub const MG1_N_JOBS: usize = 50;
pub const MG1_N_PERCENTILES: usize = 5;

/// Simulate `n_jobs` jobs (v₀ = d₀ = 0) and return the 0/25/50/75/100th
/// percentiles of the interdeparture times, by linear interpolation between
/// order statistics.
pub fn sim_mg1(theta: &[f64; 3], n_jobs: usize, rng: &mut ChaCha8Rng) -> [f64; 5] {
    let (t1, t2, t3) = (theta[0], theta[1], theta[2]);
    assert!(0.0 <= t1 && t1 <= t2, "need 0 <= theta1 <= theta2");
    assert!(t3 > 0.0, "arrival rate must be positive");
    let mut arrival = 0.0;
    let mut departure = 0.0;
    let mut inter = Vec::with_capacity(n_jobs);
    for _ in 0..n_jobs {
        let service = if t2 > t1 {
            rng.random_range(t1..t2)
        } else {
            t1
        };
        arrival += -(1.0 - rng.random::<f64>()).ln() / t3;
        let gap = service + (arrival - departure).max(0.0);
        departure += gap;
        inter.push(gap);
    }
    inter.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let pick = |p: f64| -> f64 {
        let rank = p / 100.0 * (inter.len() - 1) as f64;
        let lo = rank.floor() as usize;
        let frac = rank - lo as f64;
        if lo + 1 < inter.len() {
            inter[lo] + frac * (inter[lo + 1] - inter[lo])
        } else {
            inter[lo]
        }
    };
    [pick(0.0), pick(25.0), pick(50.0), pick(75.0), pick(100.0)]
}

/// Whitening constants from a pilot run: mean vector and covariance of the
/// raw percentiles.
#[derive(Debug, Clone, PartialEq)]
pub struct Mg1Pilot {
    pub mean: Array1<f64>,
    pub cov: Array2<f64>,
}

/// `x = L⁻¹(p − μ)` with `L` the Cholesky factor of the pilot covariance.
pub fn pilot_whiten(percentiles: &Array1<f64>, pilot: &Mg1Pilot) -> Result<Array1<f64>, SimError> {
    assert_eq!(percentiles.len(), pilot.mean.len(), "percentile count mismatch");
    let l = cholesky_lower(&pilot.cov).ok_or_else(|| {
        SimError::PilotDegenerate("pilot covariance is not positive definite".into())
    })?;
    Ok(solve_lower(&l, &(percentiles - &pilot.mean)))
}

/// The benchmark instance in ψ-coordinates.
#[derive(Debug, Clone)]
pub struct Mg1Problem {
    pub pilot: Mg1Pilot,
    pub x_o: Array1<f64>,
}

impl Mg1Problem {
    /// True generating parameters θ = (1, 5, 0.2), i.e. ψ = (1, 4, 0.2).
    pub const THETA_TRUE: [f64; 3] = [1.0, 5.0, 0.2];

    pub fn psi_true() -> Array1<f64> {
        arr1(&[1.0, 4.0, 0.2])
    }

    pub fn prior() -> UniformBoxPrior {
        UniformBoxPrior::new(arr1(&[0.0, 0.0, 0.0]), arr1(&[10.0, 10.0, 1.0 / 3.0]))
    }

    fn psi_to_theta(psi: &Array1<f64>) -> [f64; 3] {
        [psi[0], psi[0] + psi[1], psi[2]]
    }

    /// Build the instance under `seed`: `n_pilot` prior simulations for the
    /// whitening moments, then the observation at the true parameters.
    pub fn generate(seed: u64, n_pilot: usize) -> Self {
        let prior = Self::prior();
        let mut rng = substream(seed, 0x20);
        let mut sum = Array1::<f64>::zeros(MG1_N_PERCENTILES);
        let mut raws = Vec::with_capacity(n_pilot);
        for _ in 0..n_pilot {
            let psi = prior.sample(&mut rng);
            let p = sim_mg1(&Self::psi_to_theta(&psi), MG1_N_JOBS, &mut rng);
            let v = arr1(&p);
            sum += &v;
            raws.push(v);
        }
        let mean = sum / n_pilot as f64;
        let mut cov = Array2::<f64>::zeros((MG1_N_PERCENTILES, MG1_N_PERCENTILES));
        for v in &raws {
            let d = v - &mean;
            for i in 0..MG1_N_PERCENTILES {
                for j in 0..=i {
                    cov[[i, j]] += d[i] * d[j] / n_pilot as f64;
                }
            }
        }
        for i in 0..MG1_N_PERCENTILES {
            for j in 0..i {
                cov[[j, i]] = cov[[i, j]];
            }
        }
        let pilot = Mg1Pilot { mean, cov };

        let mut rng = substream(seed, 0x21);
        let raw = arr1(&sim_mg1(&Self::THETA_TRUE, MG1_N_JOBS, &mut rng));
        let x_o = pilot_whiten(&raw, &pilot).expect("pilot covariance is SPD");
        Self { pilot, x_o }
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            w,
            "# mg1 problem theta_true={:?} rows=pilot_mean(5),pilot_cov(5x5),x_o(5) percentiles=0,25,50,75,100",
            Self::THETA_TRUE
        )?;
        write_vector(&mut w, &self.pilot.mean)?;
        for row in self.pilot.cov.rows() {
            write_vector(&mut w, &row.to_owned())?;
        }
        write_vector(&mut w, &self.x_o)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let mut lines = open_lines(path)?;
        let mean = read_vector(&read_data_line(&mut lines)?, MG1_N_PERCENTILES)?;
        let mut cov = Array2::zeros((MG1_N_PERCENTILES, MG1_N_PERCENTILES));
        for i in 0..MG1_N_PERCENTILES {
            let row = read_vector(&read_data_line(&mut lines)?, MG1_N_PERCENTILES)?;
            cov.row_mut(i).assign(&row);
        }
        let x_o = read_vector(&read_data_line(&mut lines)?, MG1_N_PERCENTILES)?;
        Ok(Self {
            pilot: Mg1Pilot { mean, cov },
            x_o,
        })
    }
}

impl Simulator for Mg1Problem {
    fn theta_dim(&self) -> usize {
        3
    }

    fn x_dim(&self) -> usize {
        MG1_N_PERCENTILES
    }

    fn simulate(&self, psi: &Array1<f64>, rng: &mut ChaCha8Rng) -> Result<Array1<f64>, SimError> {
        assert!(self.theta_valid(psi), "psi outside the simulator domain");
        let raw = arr1(&sim_mg1(&Self::psi_to_theta(psi), MG1_N_JOBS, rng));
        pilot_whiten(&raw, &self.pilot)
    }

    fn theta_valid(&self, psi: &Array1<f64>) -> bool {
        psi[0] >= 0.0 && psi[1] >= 0.0 && psi[2] > 0.0
    }
}
