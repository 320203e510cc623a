//! # lfi — likelihood-free inference with neural conditional density estimation
//!
//! This crate learns parametric posteriors of simulator-based models whose
//! likelihoods are intractable. Instead of accepting simulations that land
//! inside an ε-ball around the observed data (classical ABC), it trains a
//! mixture density network (MDN) on simulated (θ, x) pairs and reads the
//! posterior off the network at the observed x. A proposal prior — a single
//! Gaussian adapted over a fixed-point loop — concentrates simulations on the
//! plausible parameter region, and the reweighting that the proposal induces
//! is undone analytically (a mixture of Gaussians divided by a Gaussian is
//! again a mixture of Gaussians).
//!
//! ## Module map
//!
//! - [`gmath`] — exact Gaussian / Gaussian-mixture algebra: densities,
//!   sampling, KL, moment and EM fits, and the analytic mixture-by-Gaussian
//!   ratio.
//! - [`mdn`] — conventional mixture density networks: forward pass,
//!   log-likelihood, reverse-mode gradients, Adam training.
//! - [`svi`] — Bayesian MDNs trained by stochastic variational inference
//!   with the local reparameterization trick.
//! - [`inference`] — the proposal-prior fixed point (training loop that
//!   adapts where simulations are spent) and posterior training.
//! - [`abc`] — rejection ABC, MCMC-ABC, SMC-ABC baselines and effective
//!   sample size estimators.
//! - [`simulators`] — four benchmark generative models: a 1-D mixture of
//!   two Gaussians, Bayesian linear regression, the Lotka–Volterra predator
//!   prey model (Gillespie simulation), and the M/G/1 queue.
//! - [`bench`] — experiment orchestration, metrics, persistence, and plot
//!   table emission behind the `lfi` command line tool.
//!
//! ## Example: correcting for a proposal analytically
//!
//! ```rust
//! use lfi::gmath::{divide_mixture_by_gaussian, Gaussian, GaussianMixture};
//!
//! // A density estimate learnt from draws of a broad proposal N(0, 2)...
//! let learnt = GaussianMixture::single(Gaussian::scalar(1.0, 0.5));
//! let proposal = Gaussian::scalar(0.0, 2.0);
//!
//! // ...is reweighted back to the prior in closed form.
//! let posterior = divide_mixture_by_gaussian(&learnt, &proposal).unwrap();
//! let g = &posterior.components()[0];
//! assert!((g.cov()[[0, 0]] - 2.0 / 3.0).abs() < 1e-12);
//! ```
//!
//! Runnable demonstrations of every major capability live under
//! `examples/`; the `lfi` binary drives full benchmark experiments from
//! TOML configs.

pub mod abc;
pub mod bench;
pub mod dataset;
pub mod gmath;
pub mod inference;
pub mod linalg;
pub mod mdn;
pub mod opt;
pub mod rng;
pub mod simulators;
pub mod svi;
