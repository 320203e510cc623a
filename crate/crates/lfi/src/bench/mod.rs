//! Experiment orchestration: configuration, method dispatch, metrics,
//! persistence, and plot-table emission for the four benchmark problems and
//! six methods (three density-estimation strategies, three ABC baselines).

pub mod metrics;
mod persist;
mod plots;

pub use persist::{load_plot_record, persist_failure, persist_run, PlotRecord};
pub use plots::{emit_plot_data, PlotKind};

use crate::abc::{
    ess_weighted, mcmc_abc, rejection_abc, smc_abc, AbcError, AbcResult, McmcConfig, SmcConfig,
    DEFAULT_SIM_BUDGET,
};
use crate::gmath::{fit_gaussian_weighted, fit_mixture_em, Gaussian, GaussianMixture, GmathError};
use crate::inference::{
    run_algorithm1, run_algorithm2, DensityNet, InferenceConfig, InferenceError, NetInit, Prior,
};
use crate::rng::substream;
use crate::simulators::{
    BlrProblem, LvProblem, Mg1Problem, MogProblem, SimError, Simulator,
};
use metrics::{mass_outside_box, metric_kl_to_true, metric_neg_logprob_true, tv_to_mog_truth};
use ndarray::Array1;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Abc(#[from] AbcError),
    #[error(transparent)]
    Gmath(#[from] GmathError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Mog,
    Blr,
    Lv,
    Mg1,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Mog => "mog",
            Experiment::Blr => "blr",
            Experiment::Lv => "lv",
            Experiment::Mg1 => "mg1",
        }
    }

    pub fn parse(s: &str) -> Result<Self, BenchError> {
        match s {
            "mog" => Ok(Experiment::Mog),
            "blr" => Ok(Experiment::Blr),
            "lv" => Ok(Experiment::Lv),
            "mg1" => Ok(Experiment::Mg1),
            other => Err(BenchError::InvalidConfig(format!(
                "unknown experiment `{other}` (expected mog|blr|lv|mg1)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MdnPrior,
    ProposalPrior,
    MdnProposal,
    Rejection,
    Mcmc,
    Smc,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::MdnPrior => "mdn_prior",
            Method::ProposalPrior => "proposal_prior",
            Method::MdnProposal => "mdn_proposal",
            Method::Rejection => "rejection",
            Method::Mcmc => "mcmc",
            Method::Smc => "smc",
        }
    }

    pub fn is_abc(&self) -> bool {
        matches!(self, Method::Rejection | Method::Mcmc | Method::Smc)
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MdnSettings {
    /// Mixture components of the posterior net.
    pub k: Option<usize>,
    pub hidden: Option<Vec<usize>>,
    /// Simulation budget for posterior training.
    pub n_train: Option<usize>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub minibatch: Option<usize>,
    pub lambda: Option<f64>,
    pub replicate_noise: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct Alg1Settings {
    pub n_per_iteration: Option<usize>,
    pub max_iterations: Option<usize>,
    pub kl_tol: Option<f64>,
    pub hidden: Option<Vec<usize>>,
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AbcSettings {
    pub epsilon: Option<f64>,
    /// Rejection: acceptances to collect.
    pub n_accept: Option<usize>,
    pub mcmc_steps: Option<usize>,
    /// MCMC: spherical proposal standard deviation (tuned per experiment).
    pub proposal_std: Option<f64>,
    pub budget: Option<u64>,
    pub smc: Option<SmcSettings>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SmcSettings {
    pub n_particles: usize,
    pub eps_initial: f64,
    pub eps_decay: f64,
    pub n_rounds: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSettings {
    /// One run per ε (ABC methods).
    pub epsilon: Option<Vec<f64>>,
    /// One run per training budget (density-estimation methods).
    pub n_train: Option<Vec<usize>>,
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub method: Method,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub mdn: MdnSettings,
    #[serde(default)]
    pub alg1: Alg1Settings,
    #[serde(default)]
    pub abc: AbcSettings,
    #[serde(default)]
    pub sweep: Option<SweepSettings>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, method: Method, seed: u64) -> Self {
        Self {
            experiment,
            method,
            seed,
            data_dir: default_data_dir(),
            out_dir: None,
            mdn: MdnSettings::default(),
            alg1: Alg1Settings::default(),
            abc: AbcSettings::default(),
            sweep: None,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, BenchError> {
        let cfg: Self = toml::from_str(s).map_err(|e| BenchError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Method-specific settings check; rejects configs whose required knobs
    /// are missing or that carry sweep values for the wrong method family.
    pub fn validate(&self) -> Result<(), BenchError> {
        let missing = |what: &str| {
            Err(BenchError::InvalidConfig(format!(
                "method `{}` requires `{what}`",
                self.method.as_str()
            )))
        };
        match self.method {
            Method::Rejection => {
                if self.abc.epsilon.is_none() {
                    return missing("abc.epsilon");
                }
                if self.abc.n_accept.is_none() {
                    return missing("abc.n_accept");
                }
            }
            Method::Mcmc => {
                if self.abc.epsilon.is_none() {
                    return missing("abc.epsilon");
                }
                if self.abc.mcmc_steps.is_none() {
                    return missing("abc.mcmc_steps");
                }
                if self.abc.proposal_std.is_none() {
                    return missing("abc.proposal_std");
                }
            }
            Method::Smc => {
                if self.abc.smc.is_none() {
                    return missing("abc.smc");
                }
            }
            _ => {}
        }
        if let Some(sweep) = &self.sweep {
            if sweep.epsilon.is_some() && !self.method.is_abc() {
                return Err(BenchError::InvalidConfig(
                    "sweep.epsilon applies only to ABC methods".into(),
                ));
            }
            if sweep.n_train.is_some() && self.method.is_abc() {
                return Err(BenchError::InvalidConfig(
                    "sweep.n_train applies only to density-estimation methods".into(),
                ));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Per-experiment defaults (network shapes follow the benchmark protocol)
// ---------------------------------------------------------------------------

struct Defaults {
    k: usize,
    hidden_prior_net: Vec<usize>,
    hidden_proposal_net: Vec<usize>,
    n_train_prior: usize,
    n_train_proposal: usize,
    n_per_iteration: usize,
}

fn defaults_for(experiment: Experiment) -> Defaults {
    match experiment {
        Experiment::Mog => Defaults {
            k: 2,
            hidden_prior_net: vec![20],
            hidden_proposal_net: vec![20],
            n_train_prior: 10_000,
            n_train_proposal: 1_000,
            n_per_iteration: 200,
        },
        Experiment::Blr => Defaults {
            k: 1,
            hidden_prior_net: vec![50],
            hidden_proposal_net: vec![50],
            n_train_prior: 10_000,
            n_train_proposal: 2_000,
            n_per_iteration: 300,
        },
        Experiment::Lv => Defaults {
            k: 1,
            hidden_prior_net: vec![50, 50],
            hidden_proposal_net: vec![50],
            n_train_prior: 10_000,
            n_train_proposal: 2_000,
            n_per_iteration: 300,
        },
        Experiment::Mg1 => Defaults {
            k: 8,
            hidden_prior_net: vec![50, 50],
            hidden_proposal_net: vec![50],
            n_train_prior: 10_000,
            n_train_proposal: 2_000,
            n_per_iteration: 300,
        },
    }
}

/// Pilot sizes for the simulator artifacts.
pub const LV_PILOT_SIMS: usize = 1_000;
pub const MG1_PILOT_SIMS: usize = 100_000;

// ---------------------------------------------------------------------------
// Problem instances
// ---------------------------------------------------------------------------

/// A fully materialized benchmark problem: simulator plus persisted
/// artifacts (pilot constants, observation).
pub enum ProblemInstance {
    Mog(MogProblem),
    Blr(BlrProblem),
    Lv(LvProblem),
    Mg1(Mg1Problem),
}

impl ProblemInstance {
    pub fn simulator(&self) -> &dyn Simulator {
        match self {
            ProblemInstance::Mog(p) => p,
            ProblemInstance::Blr(p) => p,
            ProblemInstance::Lv(p) => p,
            ProblemInstance::Mg1(p) => p,
        }
    }

    pub fn prior(&self) -> Prior {
        match self {
            ProblemInstance::Mog(p) => Prior::Uniform(p.prior()),
            ProblemInstance::Blr(p) => Prior::Gaussian(p.prior()),
            ProblemInstance::Lv(_) => Prior::Uniform(LvProblem::prior()),
            ProblemInstance::Mg1(_) => Prior::Uniform(Mg1Problem::prior()),
        }
    }

    pub fn x_o(&self) -> Array1<f64> {
        match self {
            ProblemInstance::Mog(p) => p.x_o(),
            ProblemInstance::Blr(p) => p.x_o.clone(),
            ProblemInstance::Lv(p) => p.x_o.clone(),
            ProblemInstance::Mg1(p) => p.x_o.clone(),
        }
    }

    /// Generating parameters in the inference coordinates, where defined.
    pub fn theta_true(&self) -> Option<Array1<f64>> {
        match self {
            ProblemInstance::Mog(_) => None,
            ProblemInstance::Blr(p) => Some(p.theta_true.clone()),
            ProblemInstance::Lv(_) => Some(LvProblem::theta_true_log()),
            ProblemInstance::Mg1(_) => Some(Mg1Problem::psi_true()),
        }
    }
}

/// Load the experiment's persisted artifacts for `seed`, generating and
/// saving them first when absent. The mixture-of-Gaussians problem has
/// fixed constants and needs no files.
pub fn ensure_problem(
    experiment: Experiment,
    seed: u64,
    data_dir: &Path,
) -> Result<ProblemInstance, BenchError> {
    std::fs::create_dir_all(data_dir)?;
    let path = |name: &str| data_dir.join(format!("{name}_seed{seed}.txt"));
    Ok(match experiment {
        Experiment::Mog => ProblemInstance::Mog(MogProblem::default()),
        Experiment::Blr => {
            let p = path("blr");
            if p.exists() {
                ProblemInstance::Blr(BlrProblem::load(&p)?)
            } else {
                let problem = BlrProblem::generate(seed);
                problem.save(&p)?;
                ProblemInstance::Blr(problem)
            }
        }
        Experiment::Lv => {
            let p = path("lv");
            if p.exists() {
                ProblemInstance::Lv(LvProblem::load(&p)?)
            } else {
                let problem = LvProblem::generate(seed, LV_PILOT_SIMS);
                problem.save(&p)?;
                ProblemInstance::Lv(problem)
            }
        }
        Experiment::Mg1 => {
            let p = path("mg1");
            if p.exists() {
                ProblemInstance::Mg1(Mg1Problem::load(&p)?)
            } else {
                let problem = Mg1Problem::generate(seed, MG1_PILOT_SIMS);
                problem.save(&p)?;
                ProblemInstance::Mg1(problem)
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Run result
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RunResult {
    pub experiment: Experiment,
    pub method: Method,
    pub seed: u64,
    pub posterior: GaussianMixture,
    /// ABC methods: raw parameter samples and their weights.
    pub samples: Option<Vec<Array1<f64>>>,
    pub weights: Option<Vec<f64>>,
    pub n_simulations: u64,
    pub ess: Option<f64>,
    pub epsilon: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    /// Wall-clock seconds per phase; excluded from reproducibility checks.
    pub timings: BTreeMap<String, f64>,
}

// ---------------------------------------------------------------------------
// Experiment driver
// ---------------------------------------------------------------------------

/// Run one configured experiment end to end: materialize artifacts,
/// dispatch to the method, fit an ABC posterior where needed, and compute
/// the experiment's metrics. Fully deterministic for a fixed config+seed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult, BenchError> {
    cfg.validate()?;
    let t0 = Instant::now();
    let problem = ensure_problem(cfg.experiment, cfg.seed, &cfg.data_dir)?;
    let prior = problem.prior();
    let x_o = problem.x_o();
    let mut timings = BTreeMap::new();
    timings.insert("artifacts_s".to_string(), t0.elapsed().as_secs_f64());

    let d = defaults_for(cfg.experiment);
    let t1 = Instant::now();
    let mut metrics: BTreeMap<String, f64> = BTreeMap::new();

    let (posterior, samples, weights, n_simulations, ess, epsilon) = match cfg.method {
        Method::MdnPrior => {
            let icfg = inference_cfg(cfg, &d, d.n_train_prior, d.hidden_prior_net.clone());
            let out = run_algorithm2(
                problem.simulator(),
                &prior,
                None,
                NetInit::FreshMdn,
                &x_o,
                &icfg,
            )?;
            (out.posterior, None, None, out.n_simulations, None, None)
        }
        Method::ProposalPrior => {
            let icfg = inference_cfg(cfg, &d, d.n_train_proposal, d.hidden_proposal_net.clone());
            let out = run_algorithm1(problem.simulator(), &prior, &x_o, &icfg)?;
            metrics.insert("alg1_iterations".into(), out.iterations as f64);
            metrics.insert("alg1_converged".into(), f64::from(out.converged));
            (
                GaussianMixture::single(out.proposal),
                None,
                None,
                out.n_simulations,
                None,
                None,
            )
        }
        Method::MdnProposal => {
            let mut icfg =
                inference_cfg(cfg, &d, d.n_train_proposal, d.hidden_proposal_net.clone());
            let alg1 = run_algorithm1(problem.simulator(), &prior, &x_o, &icfg)?;
            metrics.insert("alg1_iterations".into(), alg1.iterations as f64);
            metrics.insert("alg1_converged".into(), f64::from(alg1.converged));
            icfg.rng_seed = substream(cfg.seed, 0xB2).random();
            let out = run_algorithm2(
                problem.simulator(),
                &prior,
                Some(&alg1.proposal),
                NetInit::Warm(DensityNet::Svi(alg1.net)),
                &x_o,
                &icfg,
            )?;
            (
                out.posterior,
                None,
                None,
                alg1.n_simulations + out.n_simulations,
                None,
                None,
            )
        }
        Method::Rejection => {
            let eps = cfg.abc.epsilon.expect("validated");
            let n_accept = cfg.abc.n_accept.expect("validated");
            let budget = cfg.abc.budget.unwrap_or(DEFAULT_SIM_BUDGET);
            let mut rng = substream(cfg.seed, 0xC1);
            let out = rejection_abc(
                problem.simulator(),
                &prior,
                &x_o,
                eps,
                n_accept,
                budget,
                &mut rng,
            )?;
            abc_to_tuple(cfg, out)?
        }
        Method::Mcmc => {
            let eps = cfg.abc.epsilon.expect("validated");
            let budget = cfg.abc.budget.unwrap_or(DEFAULT_SIM_BUDGET);
            let mut rng = substream(cfg.seed, 0xC2);
            // One rejection-ABC acceptance seeds the chain (no burn-in).
            let seed_sample = rejection_abc(
                problem.simulator(),
                &prior,
                &x_o,
                eps,
                1,
                budget,
                &mut rng,
            )?;
            let mcfg = McmcConfig {
                proposal_std: cfg.abc.proposal_std.expect("validated"),
                n_steps: cfg.abc.mcmc_steps.expect("validated"),
            };
            let mut out = mcmc_abc(
                problem.simulator(),
                &prior,
                &x_o,
                eps,
                seed_sample.samples[0].clone(),
                &mcfg,
                &mut rng,
            )?;
            out.n_simulations += seed_sample.n_simulations;
            if let Some(acc) = out.n_accepted_moves {
                metrics.insert("mcmc_accepted_moves".into(), acc as f64);
            }
            if out.degenerate_chain {
                metrics.insert("mcmc_degenerate_chain".into(), 1.0);
            }
            abc_to_tuple(cfg, out)?
        }
        Method::Smc => {
            let s = cfg.abc.smc.as_ref().expect("validated");
            let scfg = SmcConfig {
                n_particles: s.n_particles,
                eps_initial: s.eps_initial,
                eps_decay: s.eps_decay,
                n_rounds: s.n_rounds,
                budget: cfg.abc.budget.unwrap_or(DEFAULT_SIM_BUDGET),
            };
            let mut rng = substream(cfg.seed, 0xC3);
            let out = smc_abc(problem.simulator(), &prior, &x_o, &scfg, &mut rng)?;
            if out.truncated {
                metrics.insert("smc_truncated".into(), 1.0);
            }
            abc_to_tuple(cfg, out)?
        }
    };
    timings.insert("method_s".to_string(), t1.elapsed().as_secs_f64());

    // Experiment metrics.
    let t2 = Instant::now();
    match &problem {
        ProblemInstance::Mog(p) => {
            let truth = p.true_posterior();
            metrics.insert(
                "tv_to_true".into(),
                tv_to_mog_truth(&posterior, &truth, p.theta_lo, p.theta_hi, 2001),
            );
        }
        ProblemInstance::Blr(p) => {
            let learned = if posterior.n_components() == 1 {
                posterior.components()[0].clone()
            } else {
                posterior.moment_matched_gaussian()?
            };
            metrics.insert(
                "kl_to_true".into(),
                metric_kl_to_true(&p.true_posterior(), &learned),
            );
        }
        ProblemInstance::Lv(_) => {
            metrics.insert(
                "neg_logprob_true".into(),
                metric_neg_logprob_true(&posterior, &LvProblem::theta_true_log()),
            );
            let max_w = posterior
                .weights()
                .iter()
                .cloned()
                .fold(f64::MIN, f64::max);
            metrics.insert("max_weight".into(), max_w);
        }
        ProblemInstance::Mg1(_) => {
            metrics.insert(
                "neg_logprob_true".into(),
                metric_neg_logprob_true(&posterior, &Mg1Problem::psi_true()),
            );
        }
    }
    if let Prior::Uniform(b) = &prior {
        let mut rng = substream(cfg.seed, 0xD1);
        metrics.insert(
            "mass_outside_prior_box".into(),
            mass_outside_box(&posterior, b, &mut rng),
        );
    }
    timings.insert("metrics_s".to_string(), t2.elapsed().as_secs_f64());

    Ok(RunResult {
        experiment: cfg.experiment,
        method: cfg.method,
        seed: cfg.seed,
        posterior,
        samples,
        weights,
        n_simulations,
        ess,
        epsilon,
        metrics,
        timings,
    })
}

type MethodOutput = (
    GaussianMixture,
    Option<Vec<Array1<f64>>>,
    Option<Vec<f64>>,
    u64,
    Option<f64>,
    Option<f64>,
);

/// Fit the parametric posterior an ABC sample set feeds into the metrics:
/// a Gaussian moment fit for the Gaussian-like problems, an EM mixture for
/// the multimodal ones (weighted populations are resampled first).
fn abc_to_tuple(cfg: &ExperimentConfig, out: AbcResult) -> Result<MethodOutput, BenchError> {
    let posterior = fit_abc_posterior(cfg, &out)?;
    Ok((
        posterior,
        Some(out.samples),
        Some(out.weights),
        out.n_simulations,
        Some(out.ess),
        Some(out.epsilon),
    ))
}

fn fit_abc_posterior(cfg: &ExperimentConfig, out: &AbcResult) -> Result<GaussianMixture, BenchError> {
    let em_k = match cfg.experiment {
        Experiment::Mog => Some(2),
        Experiment::Mg1 => Some(8),
        Experiment::Blr | Experiment::Lv => None,
    };
    match em_k {
        None => {
            let g = fit_gaussian_weighted(&out.samples, &out.weights)?;
            Ok(GaussianMixture::single(g))
        }
        Some(k) => {
            let mut rng = substream(cfg.seed, 0xE1);
            let uniform = out.weights.iter().all(|w| *w == out.weights[0]);
            let samples = if uniform {
                out.samples.clone()
            } else {
                // Weighted population: resample to an unweighted set for EM.
                (0..out.samples.len())
                    .map(|_| {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        let mut idx = out.samples.len() - 1;
                        for (i, w) in out.weights.iter().enumerate() {
                            acc += w;
                            if u < acc {
                                idx = i;
                                break;
                            }
                        }
                        out.samples[idx].clone()
                    })
                    .collect()
            };
            Ok(fit_mixture_em(&samples, k, &mut rng, 5)?)
        }
    }
}

fn inference_cfg(
    cfg: &ExperimentConfig,
    d: &Defaults,
    default_n_train: usize,
    default_hidden: Vec<usize>,
) -> InferenceConfig {
    let base = InferenceConfig::default();
    InferenceConfig {
        n_per_iteration: cfg.alg1.n_per_iteration.unwrap_or(d.n_per_iteration),
        max_iterations: cfg.alg1.max_iterations.unwrap_or(base.max_iterations),
        convergence_kl_tol: cfg.alg1.kl_tol.unwrap_or(base.convergence_kl_tol),
        k_final: cfg.mdn.k.unwrap_or(d.k),
        n_final: cfg.mdn.n_train.unwrap_or(default_n_train),
        rng_seed: substream(cfg.seed, 0xB1).random(),
        proposal_hidden: cfg
            .alg1
            .hidden
            .clone()
            .unwrap_or_else(|| d.hidden_proposal_net.clone()),
        posterior_hidden: cfg.mdn.hidden.clone().unwrap_or(default_hidden),
        lambda: cfg.mdn.lambda.unwrap_or(base.lambda),
        proposal_epochs: cfg.alg1.epochs.unwrap_or(base.proposal_epochs),
        posterior_epochs: cfg.mdn.epochs.unwrap_or(base.posterior_epochs),
        learning_rate: cfg.mdn.learning_rate.unwrap_or(base.learning_rate),
        minibatch_size: cfg.mdn.minibatch.unwrap_or(base.minibatch_size),
        replicate_noise: cfg.mdn.replicate_noise.unwrap_or(base.replicate_noise),
    }
}
