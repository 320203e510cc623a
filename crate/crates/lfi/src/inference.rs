//! Posterior learning with adaptive proposal priors.
//!
//! Parameters are drawn from a *proposal prior* p̃(θ), simulated, and a
//! conditional density estimate q(θ|x) is trained on the pairs by maximum
//! likelihood. In the large-sample limit q converges to the posterior the
//! problem would have if p̃ were the prior, so the posterior under the real
//! prior is recovered analytically:
//!
//! ```text
//! p̂(θ | x = x_o) ∝ p(θ) / p̃(θ) · q(θ | x_o).
//! ```
//!
//! Two training loops build on this identity. The proposal-training loop
//! (`run_algorithm1`) keeps a single-Gaussian proposal and a one-component
//! MDN-SVI, alternating simulate → retrain (warm started) → posterior
//! update, until the proposal stops moving; simulations concentrate on the
//! plausible region within a few hundred draws per iteration. The posterior
//! training run (`run_algorithm2`) then spends the main simulation budget
//! at the final proposal and fits the full K-component posterior, seeded by
//! replicating the proposal net's single component.

use crate::dataset::SimDataset;
use crate::gmath::{
    divide_mixture_by_gaussian, kl_gaussian, multiply_mixture_by_gaussian, Gaussian,
    GaussianMixture, GmathError, UniformBoxPrior,
};
use crate::mdn::{replicate_components, train_mdn, MdnDims, MdnNet, TrainConfig, TrainError};
use crate::rng::substream;
use crate::simulators::Simulator;
use crate::svi::{replicate_components_svi, train_mdn_svi, SviNet};
use ndarray::Array1;
use rand::Rng as _;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InferenceError {
    /// Posterior update failed twice in one iteration (fresh batch retried
    /// once); the run's parameters are misconfigured.
    #[error("proposal update failed at iteration {iteration} (after one fresh-batch retry): {source}")]
    ProposalUpdateFailed {
        iteration: usize,
        source: GmathError,
    },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Gmath(#[from] GmathError),
}

/// Model prior: uniform box or Gaussian, with density and exact sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    Uniform(UniformBoxPrior),
    Gaussian(Gaussian),
}

impl Prior {
    pub fn dim(&self) -> usize {
        match self {
            Prior::Uniform(b) => b.dim(),
            Prior::Gaussian(g) => g.dim(),
        }
    }

    pub fn logpdf(&self, theta: &Array1<f64>) -> f64 {
        match self {
            Prior::Uniform(b) => b.logpdf(theta),
            Prior::Gaussian(g) => g.logpdf(theta),
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Array1<f64> {
        match self {
            Prior::Uniform(b) => b.sample(rng),
            Prior::Gaussian(g) => g.sample(rng),
        }
    }
}

/// Either kind of trained conditional density network.
#[derive(Debug, Clone)]
pub enum DensityNet {
    Mdn(MdnNet),
    Svi(SviNet),
}

impl DensityNet {
    pub fn forward_predict(&self, x: &Array1<f64>) -> GaussianMixture {
        match self {
            DensityNet::Mdn(n) => n.forward(x),
            DensityNet::Svi(n) => n.forward_predict(x),
        }
    }

    pub fn dims(&self) -> &MdnDims {
        match self {
            DensityNet::Mdn(n) => n.dims(),
            DensityNet::Svi(n) => n.dims(),
        }
    }
}

/// Settings shared by both training loops.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Simulations per proposal-training iteration.
    pub n_per_iteration: usize,
    pub max_iterations: usize,
    /// Symmetrized-KL threshold between successive proposals.
    pub convergence_kl_tol: f64,
    /// Components of the final posterior mixture.
    pub k_final: usize,
    /// Simulations for the posterior training run.
    pub n_final: usize,
    pub rng_seed: u64,
    /// Hidden layer widths of the proposal net (always one component).
    pub proposal_hidden: Vec<usize>,
    /// Hidden layer widths of the posterior net.
    pub posterior_hidden: Vec<usize>,
    /// Bayesian prior precision for MDN-SVI weights.
    pub lambda: f64,
    pub proposal_epochs: usize,
    pub posterior_epochs: usize,
    pub learning_rate: f64,
    pub minibatch_size: usize,
    /// Symmetry-breaking noise when replicating a one-component net.
    pub replicate_noise: f64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            n_per_iteration: 300,
            max_iterations: 10,
            convergence_kl_tol: 0.05,
            k_final: 1,
            n_final: 2000,
            rng_seed: 0,
            proposal_hidden: vec![50],
            posterior_hidden: vec![50],
            lambda: 0.01,
            proposal_epochs: 1000,
            posterior_epochs: 1000,
            learning_rate: crate::opt::ADAM_DEFAULT_LR,
            minibatch_size: 100,
            replicate_noise: 1e-3,
        }
    }
}

impl InferenceConfig {
    fn train_cfg(&self, epochs: usize, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            minibatch_size: self.minibatch_size,
            n_epochs: epochs,
            rng_seed: seed,
            holdout_fraction: 0.0,
        }
    }

    pub(crate) fn validate(&self) {
        assert!(self.n_per_iteration >= 1);
        assert!(self.max_iterations >= 1);
        assert!(self.convergence_kl_tol > 0.0);
        assert!(self.k_final >= 1);
        assert!(self.n_final >= 1);
        assert!(self.lambda > 0.0);
    }
}

// ---------------------------------------------------------------------------
// Posterior estimator
// ---------------------------------------------------------------------------

/// The analytic posterior correction: `p̂(θ|x_o) ∝ p(θ)/p̃(θ) · q(θ|x_o)`.
///
/// - no proposal (trained on prior draws): the ratio cancels, `q` returned
///   unchanged;
/// - uniform prior: a ratio of the mixture by the Gaussian proposal (the
///   broad-box prior is treated as improper-uniform; no truncation);
/// - Gaussian prior: the prior's precision and precision-weighted mean fold
///   into each component before the proposal's are subtracted, with exact
///   cancellation when prior and proposal coincide.
pub fn posterior_estimate(
    q_at_xo: &GaussianMixture,
    prior: &Prior,
    proposal: Option<&Gaussian>,
) -> Result<GaussianMixture, GmathError> {
    let Some(p0) = proposal else {
        return Ok(q_at_xo.clone());
    };
    assert_eq!(q_at_xo.dim(), p0.dim(), "proposal dimension mismatch");
    match prior {
        Prior::Uniform(_) => divide_mixture_by_gaussian(q_at_xo, p0),
        Prior::Gaussian(pg) if pg == p0 => Ok(q_at_xo.clone()),
        Prior::Gaussian(pg) => {
            divide_mixture_by_gaussian(&multiply_mixture_by_gaussian(q_at_xo, pg), p0)
        }
    }
}

/// Convergence rule for the proposal loop: symmetrized KL below `tol`.
pub fn proposal_converged(prev: &Gaussian, next: &Gaussian, tol: f64) -> bool {
    0.5 * (kl_gaussian(prev, next) + kl_gaussian(next, prev)) < tol
}

// ---------------------------------------------------------------------------
// Simulation plumbing
// ---------------------------------------------------------------------------

/// Where parameter draws come from.
#[derive(Debug, Clone, Copy)]
pub enum ThetaSource<'a> {
    Prior(&'a Prior),
    Proposal(&'a Gaussian),
}

/// Draw `n` (θ, x) pairs. Draws outside the simulator's domain are rejected
/// before simulating (truncated proposal); exploded simulations count
/// toward the returned simulator-call total and are resampled with a fresh
/// θ. Returns the dataset and the number of simulator calls.
pub fn simulate_dataset(
    sim: &dyn Simulator,
    source: ThetaSource,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (SimDataset, u64) {
    let mut pairs = Vec::with_capacity(n);
    let mut calls = 0u64;
    while pairs.len() < n {
        let theta = match source {
            ThetaSource::Prior(p) => p.sample(rng),
            ThetaSource::Proposal(g) => g.sample(rng),
        };
        if !sim.theta_valid(&theta) {
            continue;
        }
        calls += 1;
        match sim.simulate(&theta, rng) {
            Ok(x) => pairs.push((theta, x)),
            Err(crate::simulators::SimError::Exploded { .. }) => continue,
            Err(e) => panic!("simulator failed irrecoverably: {e}"),
        }
    }
    let proposal_used = match source {
        ThetaSource::Prior(_) => None,
        ThetaSource::Proposal(g) => Some(g.clone()),
    };
    (SimDataset::new(pairs, proposal_used), calls)
}

// ---------------------------------------------------------------------------
// Algorithm 1: proposal-prior training
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct Algorithm1Result {
    pub proposal: Gaussian,
    pub net: SviNet,
    /// Every intermediate proposal, in order.
    pub trace: Vec<Gaussian>,
    pub n_simulations: u64,
    pub converged: bool,
    pub iterations: usize,
}

/// Fixed-point training of the proposal prior. Starts from the model prior
/// and a fresh one-component MDN-SVI; each iteration draws
/// `n_per_iteration` pairs from the current proposal, retrains the net
/// (warm started, so training effectively continues across iterations), and
/// replaces the proposal with the corrected posterior estimate at `x_o`.
/// Stops when successive proposals agree within the symmetrized-KL
/// tolerance or after `max_iterations`.
///
/// A non-positive-definite posterior update is retried once with a fresh
/// batch under the same proposal; a second failure aborts the run, since
/// repeated failure signals a misconfigured setup rather than bad luck.
pub fn run_algorithm1(
    sim: &dyn Simulator,
    prior: &Prior,
    x_o: &Array1<f64>,
    cfg: &InferenceConfig,
) -> Result<Algorithm1Result, InferenceError> {
    cfg.validate();
    assert_eq!(prior.dim(), sim.theta_dim(), "prior dimension mismatch");
    assert_eq!(x_o.len(), sim.x_dim(), "observation dimension mismatch");

    let dims = MdnDims::new(sim.x_dim(), sim.theta_dim(), 1, cfg.proposal_hidden.clone());
    let mut net = SviNet::random_init(dims, cfg.lambda, &mut substream(cfg.rng_seed, 0xA1_0));
    let mut rng = substream(cfg.rng_seed, 0xA1_1);

    let mut proposal: Option<Gaussian> = None;
    let mut trace: Vec<Gaussian> = Vec::new();
    let mut n_simulations = 0u64;
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..cfg.max_iterations {
        iterations = it + 1;
        let mut attempt = 0u64;
        let next = loop {
            let source = match &proposal {
                Some(g) => ThetaSource::Proposal(g),
                None => ThetaSource::Prior(prior),
            };
            let (data, calls) = simulate_dataset(sim, source, cfg.n_per_iteration, &mut rng);
            n_simulations += calls;
            let seed = substream(cfg.rng_seed, 0xA1_2 + (it as u64) * 4 + attempt).random();
            net = train_mdn_svi(&net, &data, &cfg.train_cfg(cfg.proposal_epochs, seed))?;
            let q = net.forward_predict(x_o);
            match posterior_estimate(&q, prior, proposal.as_ref()) {
                Ok(post) => {
                    assert_eq!(post.n_components(), 1, "proposal net has one component");
                    break post.components()[0].clone();
                }
                Err(GmathError::NonPositiveDefinite { .. }) if attempt == 0 => {
                    // Keep the previous proposal, draw a fresh batch, retry.
                    attempt = 1;
                }
                Err(e) => {
                    return Err(InferenceError::ProposalUpdateFailed {
                        iteration: it,
                        source: e,
                    })
                }
            }
        };
        if let Some(prev) = trace.last() {
            converged = proposal_converged(prev, &next, cfg.convergence_kl_tol);
        }
        trace.push(next.clone());
        proposal = Some(next);
        if converged {
            break;
        }
    }
    Ok(Algorithm1Result {
        proposal: proposal.expect("at least one iteration ran"),
        net,
        trace,
        n_simulations,
        converged,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// Algorithm 2: posterior training
// ---------------------------------------------------------------------------

/// How the posterior net starts.
#[derive(Debug, Clone)]
pub enum NetInit {
    /// Fresh conventional MDN with random weights.
    FreshMdn,
    /// Fresh MDN-SVI.
    FreshSvi,
    /// Continue from a trained net (replicated to `k_final` components when
    /// it has one and more are requested).
    Warm(DensityNet),
}

#[derive(Debug, Clone)]
pub struct Algorithm2Result {
    /// The corrected posterior estimate at `x_o`.
    pub posterior: GaussianMixture,
    /// The uncorrected conditional `q(θ|x_o)`.
    pub raw_conditional: GaussianMixture,
    pub net: DensityNet,
    pub n_simulations: u64,
}

/// Posterior training: draw `n_final` pairs from the proposal (or the prior
/// when none is given), train the density estimator, and return the
/// corrected posterior estimate at `x_o`.
pub fn run_algorithm2(
    sim: &dyn Simulator,
    prior: &Prior,
    proposal: Option<&Gaussian>,
    init: NetInit,
    x_o: &Array1<f64>,
    cfg: &InferenceConfig,
) -> Result<Algorithm2Result, InferenceError> {
    cfg.validate();
    let mut rng = substream(cfg.rng_seed, 0xA2_1);
    let source = match proposal {
        Some(g) => ThetaSource::Proposal(g),
        None => ThetaSource::Prior(prior),
    };
    let (data, n_simulations) = simulate_dataset(sim, source, cfg.n_final, &mut rng);

    let dims = MdnDims::new(
        sim.x_dim(),
        sim.theta_dim(),
        cfg.k_final,
        cfg.posterior_hidden.clone(),
    );
    let mut init_rng = substream(cfg.rng_seed, 0xA2_2);
    let net = match init {
        NetInit::FreshMdn => DensityNet::Mdn(MdnNet::init_random(dims, &mut init_rng)),
        NetInit::FreshSvi => DensityNet::Svi(SviNet::random_init(dims, cfg.lambda, &mut init_rng)),
        NetInit::Warm(DensityNet::Svi(n)) => {
            if n.dims().k == 1 && cfg.k_final > 1 {
                DensityNet::Svi(replicate_components_svi(
                    &n,
                    cfg.k_final,
                    &mut init_rng,
                    cfg.replicate_noise,
                ))
            } else {
                assert_eq!(n.dims().k, cfg.k_final, "warm net component mismatch");
                DensityNet::Svi(n)
            }
        }
        NetInit::Warm(DensityNet::Mdn(n)) => {
            if n.dims().k == 1 && cfg.k_final > 1 {
                DensityNet::Mdn(replicate_components(
                    &n,
                    cfg.k_final,
                    &mut init_rng,
                    cfg.replicate_noise,
                ))
            } else {
                assert_eq!(n.dims().k, cfg.k_final, "warm net component mismatch");
                DensityNet::Mdn(n)
            }
        }
    };

    let seed = substream(cfg.rng_seed, 0xA2_3).random();
    let tcfg = cfg.train_cfg(cfg.posterior_epochs, seed);
    let net = match net {
        DensityNet::Mdn(n) => DensityNet::Mdn(train_mdn(&n, &data, &tcfg)?),
        DensityNet::Svi(n) => DensityNet::Svi(train_mdn_svi(&n, &data, &tcfg)?),
    };

    let raw_conditional = net.forward_predict(x_o);
    let posterior = posterior_estimate(&raw_conditional, prior, proposal)?;
    Ok(Algorithm2Result {
        posterior,
        raw_conditional,
        net,
        n_simulations,
    })
}
