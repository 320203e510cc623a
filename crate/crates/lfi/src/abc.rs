//! Classical ABC baselines: rejection sampling, likelihood-free MCMC, and
//! sequential Monte Carlo, plus the effective-sample-size estimators used
//! to put their simulation costs on a common footing.
//!
//! All three accept a simulated parameter exactly when `‖x − x_o‖ < ε` in
//! plain Euclidean norm — simulators hand back already normalized or
//! whitened statistics. `n_simulations` counts every simulator call,
//! including rejected and failed ones.

use crate::inference::Prior;
use crate::simulators::{SimError, Simulator};
use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AbcError {
    #[error("simulation budget exhausted after {n_simulations} calls ({n_accepted} acceptances)")]
    BudgetExhausted {
        n_simulations: u64,
        n_accepted: usize,
    },
    #[error("chain is degenerate: a component has zero variance")]
    DegenerateChain,
}

/// Default cap on simulator calls per run.
pub const DEFAULT_SIM_BUDGET: u64 = 10_000_000;

/// Output of any ABC run: samples with weights on the simplex (uniform for
/// rejection/MCMC), the full simulation count, the final tolerance, and the
/// effective sample size.
#[derive(Debug, Clone)]
pub struct AbcResult {
    pub samples: Vec<Array1<f64>>,
    pub weights: Vec<f64>,
    pub n_simulations: u64,
    pub epsilon: f64,
    pub ess: f64,
    /// MCMC only: accepted moves over the whole run.
    pub n_accepted_moves: Option<u64>,
    /// Set when an MCMC chain never moved (zero-variance components).
    pub degenerate_chain: bool,
    /// Set when SMC stopped early on the simulation budget; the last
    /// completed round is returned.
    pub truncated: bool,
}

impl AbcResult {
    fn new(samples: Vec<Array1<f64>>, weights: Vec<f64>, n_simulations: u64, epsilon: f64) -> Self {
        Self {
            samples,
            weights,
            n_simulations,
            epsilon,
            ess: 0.0,
            n_accepted_moves: None,
            degenerate_chain: false,
            truncated: false,
        }
    }
}

fn euclid(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let d = a - b;
    d.dot(&d).sqrt()
}

// ---------------------------------------------------------------------------
// Rejection ABC
// ---------------------------------------------------------------------------

/// Propose from the prior, accept when `‖x − x_o‖ < ε`, stop at
/// `n_accept_target` acceptances. Samples are independent, so the effective
/// sample size equals the sample count.
pub fn rejection_abc(
    sim: &dyn Simulator,
    prior: &Prior,
    x_o: &Array1<f64>,
    epsilon: f64,
    n_accept_target: usize,
    budget: u64,
    rng: &mut ChaCha8Rng,
) -> Result<AbcResult, AbcError> {
    assert!(epsilon > 0.0, "tolerance must be positive");
    let mut samples = Vec::with_capacity(n_accept_target);
    let mut calls = 0u64;
    while samples.len() < n_accept_target {
        if calls >= budget {
            return Err(AbcError::BudgetExhausted {
                n_simulations: calls,
                n_accepted: samples.len(),
            });
        }
        let theta = prior.sample(rng);
        if !sim.theta_valid(&theta) {
            continue;
        }
        calls += 1;
        match sim.simulate(&theta, rng) {
            Ok(x) if euclid(&x, x_o) < epsilon => samples.push(theta),
            Ok(_) | Err(SimError::Exploded { .. }) => {}
            Err(e) => panic!("simulator failed irrecoverably: {e}"),
        }
    }
    let n = samples.len();
    let mut out = AbcResult::new(samples, vec![1.0 / n as f64; n], calls, epsilon);
    out.ess = n as f64;
    Ok(out)
}

// ---------------------------------------------------------------------------
// MCMC-ABC
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Standard deviation of the spherical Gaussian proposal.
    pub proposal_std: f64,
    pub n_steps: usize,
}

/// Likelihood-free Metropolis–Hastings: perturb the current parameters with
/// a spherical Gaussian, simulate, and accept when the simulation lands
/// inside the ε-ball *and* a uniform draw passes the prior ratio. `init`
/// should be a rejection-ABC sample so no burn-in is needed. Proposals with
/// zero prior density are rejected without costing a simulation.
pub fn mcmc_abc(
    sim: &dyn Simulator,
    prior: &Prior,
    x_o: &Array1<f64>,
    epsilon: f64,
    init: Array1<f64>,
    cfg: &McmcConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AbcResult, AbcError> {
    assert!(cfg.proposal_std > 0.0, "proposal std must be positive");
    assert!(epsilon > 0.0);
    let d = init.len();
    let mut chain = Vec::with_capacity(cfg.n_steps);
    let mut current = init;
    let mut current_prior = prior.logpdf(&current);
    let mut calls = 0u64;
    let mut accepted = 0u64;
    chain.push(current.clone());
    while chain.len() < cfg.n_steps {
        let prop = Array1::from_iter(
            current
                .iter()
                .map(|c| c + cfg.proposal_std * rng.sample::<f64, _>(StandardNormal)),
        );
        let prop_prior = prior.logpdf(&prop);
        let mut accept = false;
        if prop_prior.is_finite() && sim.theta_valid(&prop) {
            calls += 1;
            match sim.simulate(&prop, rng) {
                Ok(x) if euclid(&x, x_o) < epsilon => {
                    let log_ratio = prop_prior - current_prior;
                    accept = log_ratio >= 0.0 || rng.random::<f64>() < log_ratio.exp();
                }
                Ok(_) | Err(SimError::Exploded { .. }) => {}
                Err(e) => panic!("simulator failed irrecoverably: {e}"),
            }
        }
        if accept {
            current = prop;
            current_prior = prop_prior;
            accepted += 1;
        }
        chain.push(current.clone());
    }

    let n = chain.len();
    let (ess, degenerate) = match ess_mcmc(&chain) {
        Ok(v) => (v, false),
        Err(AbcError::DegenerateChain) => (1.0, true),
        Err(e) => return Err(e),
    };
    let mut out = AbcResult::new(chain, vec![1.0 / n as f64; n], calls, epsilon);
    out.ess = ess;
    out.n_accepted_moves = Some(accepted);
    out.degenerate_chain = degenerate || accepted == 0;
    let _ = d;
    Ok(out)
}

// ---------------------------------------------------------------------------
// SMC-ABC
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmcConfig {
    pub n_particles: usize,
    pub eps_initial: f64,
    /// Multiplicative tolerance decay per round, in (0, 1).
    pub eps_decay: f64,
    pub n_rounds: usize,
    pub budget: u64,
}

/// Sequential Monte Carlo ABC. Round 0 is rejection ABC at `eps_initial`;
/// each later round resamples the previous weighted population, perturbs
/// with a diagonal Gaussian kernel whose per-dimension variance is twice
/// the weighted empirical variance, re-simulates until the tightened
/// tolerance accepts, and importance-reweights by prior over kernel
/// mixture. Exhausting the budget returns the last completed round, flagged
/// as truncated.
pub fn smc_abc(
    sim: &dyn Simulator,
    prior: &Prior,
    x_o: &Array1<f64>,
    cfg: &SmcConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AbcResult, AbcError> {
    assert!(cfg.n_particles >= 2, "need at least two particles");
    assert!(cfg.eps_decay > 0.0 && cfg.eps_decay < 1.0);
    assert!(cfg.n_rounds >= 1);
    let d = prior.dim();

    let round0 = rejection_abc(
        sim,
        prior,
        x_o,
        cfg.eps_initial,
        cfg.n_particles,
        cfg.budget,
        rng,
    )?;
    let mut calls = round0.n_simulations;
    let mut particles = round0.samples;
    let mut weights = round0.weights;
    let mut epsilon = cfg.eps_initial;

    for round in 1..cfg.n_rounds {
        let eps_r = cfg.eps_initial * cfg.eps_decay.powi(round as i32);
        // Kernel bandwidth: twice the weighted variance per dimension.
        let mut mean = Array1::<f64>::zeros(d);
        for (w, p) in weights.iter().zip(&particles) {
            mean.scaled_add(*w, p);
        }
        let mut var = Array1::<f64>::zeros(d);
        for (w, p) in weights.iter().zip(&particles) {
            let diff = p - &mean;
            var.scaled_add(*w, &(&diff * &diff));
        }
        let kernel_std = var.mapv(|v| (2.0 * v).sqrt().max(1e-12));

        let mut new_particles = Vec::with_capacity(cfg.n_particles);
        while new_particles.len() < cfg.n_particles {
            if calls >= cfg.budget {
                // Return the last completed round.
                let mut out = AbcResult::new(particles, weights, calls, epsilon);
                out.ess = ess_weighted(&out.weights);
                out.truncated = true;
                return Ok(out);
            }
            // Resample a seed particle by weight, then perturb.
            let pick = categorical(&weights, rng);
            let prop = Array1::from_iter(
                particles[pick]
                    .iter()
                    .zip(kernel_std.iter())
                    .map(|(p, s)| p + s * rng.sample::<f64, _>(StandardNormal)),
            );
            if !prior.logpdf(&prop).is_finite() || !sim.theta_valid(&prop) {
                continue;
            }
            calls += 1;
            match sim.simulate(&prop, rng) {
                Ok(x) if euclid(&x, x_o) < eps_r => new_particles.push(prop),
                Ok(_) | Err(SimError::Exploded { .. }) => {}
                Err(e) => panic!("simulator failed irrecoverably: {e}"),
            }
        }
        // Reweight: prior density over the kernel mixture of the previous
        // round.
        let mut new_weights = Vec::with_capacity(cfg.n_particles);
        for p in &new_particles {
            let mut kernel_mix = 0.0;
            for (w, q) in weights.iter().zip(&particles) {
                let mut logk = 0.0;
                for i in 0..d {
                    let z = (p[i] - q[i]) / kernel_std[i];
                    logk += -0.5 * z * z - kernel_std[i].ln() - 0.5 * crate::gmath::LN_2PI;
                }
                kernel_mix += w * logk.exp();
            }
            new_weights.push(prior.logpdf(p).exp() / kernel_mix.max(1e-300));
        }
        let total: f64 = new_weights.iter().sum();
        for w in &mut new_weights {
            *w /= total;
        }
        particles = new_particles;
        weights = new_weights;
        epsilon = eps_r;
    }

    let mut out = AbcResult::new(particles, weights, calls, epsilon);
    out.ess = ess_weighted(&out.weights);
    Ok(out)
}

fn categorical(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1
}

// ---------------------------------------------------------------------------
// Effective sample size
// ---------------------------------------------------------------------------

/// ESS of an autocorrelated chain: per dimension,
/// `N_eff,d = N / (1 + 2 Σ_{l=1}^{L_d} r_dl)` with the sum over leading
/// strictly positive autocorrelation estimates (`L_d` ends at the first
/// nonpositive one; if `r₁ ≤ 0` already, `N_eff,d = N`). Returns the
/// minimum over dimensions.
pub fn ess_mcmc(chain: &[Array1<f64>]) -> Result<f64, AbcError> {
    assert!(chain.len() >= 10, "chain too short for an ESS estimate");
    let n = chain.len();
    let d = chain[0].len();
    let mut min_ess = f64::INFINITY;
    for dim in 0..d {
        let xs: Vec<f64> = chain.iter().map(|s| s[dim]).collect();
        if xs.iter().all(|&x| x == xs[0]) {
            return Err(AbcError::DegenerateChain);
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let c0 = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        if c0 <= 0.0 {
            return Err(AbcError::DegenerateChain);
        }
        let mut sum_r = 0.0;
        for lag in 1..n {
            let c: f64 = (0..n - lag)
                .map(|t| (xs[t] - mean) * (xs[t + lag] - mean))
                .sum::<f64>()
                / n as f64;
            let r = c / c0;
            if r <= 0.0 {
                break;
            }
            sum_r += r;
        }
        min_ess = min_ess.min(n as f64 / (1.0 + 2.0 * sum_r));
    }
    Ok(min_ess)
}

/// ESS of a weighted population: `1 / Σ w²` for weights on the simplex
/// (computed self-normalized, `(Σw)²/Σw²`, so scaling is harmless). Exactly
/// equal weights give exactly `N`, one-hot weights exactly 1.
pub fn ess_weighted(weights: &[f64]) -> f64 {
    assert!(!weights.is_empty());
    if weights.iter().all(|w| *w == weights[0]) {
        return weights.len() as f64;
    }
    let total: f64 = weights.iter().sum();
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    total * total / sq
}

#[cfg(test)]
mod tests;
