use super::*;
use crate::gmath::UniformBoxPrior;
use crate::rng::seeded;
use ndarray::arr1;

/// x = θ exactly; the acceptance region is the ε-ball around x_o.
struct Identity {
    dim: usize,
}

impl Simulator for Identity {
    fn theta_dim(&self) -> usize {
        self.dim
    }
    fn x_dim(&self) -> usize {
        self.dim
    }
    fn simulate(&self, theta: &Array1<f64>, _rng: &mut ChaCha8Rng) -> Result<Array1<f64>, SimError> {
        Ok(theta.clone())
    }
}

fn unit_prior() -> Prior {
    Prior::Uniform(UniformBoxPrior::new(arr1(&[-1.0]), arr1(&[1.0])))
}

#[test]
fn rejection_accept_everything_returns_the_prior() {
    let sim = Identity { dim: 1 };
    let prior = unit_prior();
    let mut rng = seeded(1);
    let out = rejection_abc(&sim, &prior, &arr1(&[0.0]), 1e9, 4000, 1_000_000, &mut rng).unwrap();
    assert_eq!(out.n_simulations, 4000, "acceptance rate 1");
    assert_eq!(out.ess, 4000.0);
    let mean: f64 = out.samples.iter().map(|s| s[0]).sum::<f64>() / 4000.0;
    let var: f64 = out.samples.iter().map(|s| (s[0] - mean).powi(2)).sum::<f64>() / 4000.0;
    assert!(mean.abs() < 0.03, "prior mean {mean}");
    assert!((var - 1.0 / 3.0).abs() < 0.02, "prior var {var}");
}

#[test]
fn rejection_acceptance_region_geometry() {
    let sim = Identity { dim: 1 };
    let prior = unit_prior();
    let mut rng = seeded(2);
    let out = rejection_abc(&sim, &prior, &arr1(&[0.0]), 0.1, 1000, 1_000_000, &mut rng).unwrap();
    // Acceptance rate ≈ |(−0.1, 0.1)| / |(−1, 1)| = 0.1.
    let rate = 1000.0 / out.n_simulations as f64;
    assert!((rate - 0.1).abs() < 0.02, "acceptance rate {rate}");
    for s in &out.samples {
        assert!(s[0].abs() < 0.1);
    }
    // Uniform on the acceptance region.
    let var: f64 = out.samples.iter().map(|s| s[0] * s[0]).sum::<f64>() / 1000.0;
    assert!((var - 0.01 / 3.0).abs() < 0.0005, "accepted var {var}");
}

#[test]
fn rejection_budget_exhaustion_reports_progress() {
    let sim = Identity { dim: 1 };
    let prior = unit_prior();
    let mut rng = seeded(3);
    match rejection_abc(&sim, &prior, &arr1(&[0.0]), 1e-6, 1000, 500, &mut rng) {
        Err(AbcError::BudgetExhausted {
            n_simulations: 500, ..
        }) => {}
        other => panic!("expected budget exhaustion, got {other:?}"),
    }
}

#[test]
fn mcmc_accept_all_walk_does_not_drift() {
    let sim = Identity { dim: 1 };
    let prior = Prior::Uniform(UniformBoxPrior::new(arr1(&[-1e6]), arr1(&[1e6])));
    let mut rng = seeded(5);
    let cfg = McmcConfig {
        proposal_std: 0.001,
        n_steps: 10_000,
    };
    let out = mcmc_abc(&sim, &prior, &arr1(&[0.0]), 1e9, arr1(&[0.5]), &cfg, &mut rng).unwrap();
    assert_eq!(out.n_accepted_moves, Some(9_999), "symmetric flat walk accepts everything");
    let mean: f64 = out.samples.iter().map(|s| s[0]).sum::<f64>() / out.samples.len() as f64;
    // Random-walk mean has standard deviation ≈ σ√(N/3).
    let tol = 4.0 * 0.001 * (10_000.0_f64 / 3.0).sqrt();
    assert!((mean - 0.5).abs() < tol, "walk drifted: {mean}");
}

#[test]
fn mcmc_frozen_chain_is_flagged_degenerate() {
    let sim = Identity { dim: 1 };
    let prior = unit_prior();
    let mut rng = seeded(7);
    let cfg = McmcConfig {
        proposal_std: 1e-300,
        n_steps: 200,
    };
    let out = mcmc_abc(&sim, &prior, &arr1(&[0.0]), 0.1, arr1(&[0.05]), &cfg, &mut rng).unwrap();
    assert!(out.degenerate_chain);
    assert_eq!(out.ess, 1.0);
}

#[test]
fn mcmc_stationary_distribution_matches_acceptance_region() {
    let sim = Identity { dim: 1 };
    let prior = Prior::Uniform(UniformBoxPrior::new(arr1(&[-1e6]), arr1(&[1e6])));
    let mut rng = seeded(11);
    let cfg = McmcConfig {
        proposal_std: 0.05,
        n_steps: 40_000,
    };
    let out = mcmc_abc(&sim, &prior, &arr1(&[0.0]), 0.1, arr1(&[0.0]), &cfg, &mut rng).unwrap();
    assert!(out.samples.iter().all(|s| s[0].abs() < 0.1));
    let mean: f64 = out.samples.iter().map(|s| s[0]).sum::<f64>() / out.samples.len() as f64;
    let var: f64 = out
        .samples
        .iter()
        .map(|s| (s[0] - mean).powi(2))
        .sum::<f64>()
        / out.samples.len() as f64;
    assert!(mean.abs() < 0.01, "stationary mean {mean}");
    assert!((var - 0.01 / 3.0).abs() < 0.0005, "stationary var {var}");

    // Detailed balance on the acceptance region: transitions between the
    // negative and positive halves are symmetric up to Monte Carlo error.
    let mut ab = 0.0_f64;
    let mut ba = 0.0_f64;
    for w in out.samples.windows(2) {
        if w[0][0] < 0.0 && w[1][0] >= 0.0 {
            ab += 1.0;
        }
        if w[0][0] >= 0.0 && w[1][0] < 0.0 {
            ba += 1.0;
        }
    }
    let imbalance = (ab - ba).abs() / (ab + ba).sqrt();
    assert!(imbalance < 4.0, "detailed balance violated: {ab} vs {ba}");
}

#[test]
fn smc_single_round_reduces_to_rejection() {
    let sim = Identity { dim: 1 };
    let prior = unit_prior();
    let cfg = SmcConfig {
        n_particles: 500,
        eps_initial: 0.5,
        eps_decay: 0.5,
        n_rounds: 1,
        budget: 1_000_000,
    };
    let smc = smc_abc(&sim, &prior, &arr1(&[0.0]), &cfg, &mut seeded(13)).unwrap();
    let rej = rejection_abc(&sim, &prior, &arr1(&[0.0]), 0.5, 500, 1_000_000, &mut seeded(13))
        .unwrap();
    assert_eq!(smc.n_simulations, rej.n_simulations);
    assert_eq!(smc.epsilon, 0.5);
    assert_eq!(smc.ess, 500.0);
    for (a, b) in smc.samples.iter().zip(&rej.samples) {
        assert_eq!(a, b, "round 0 follows the same acceptance law");
    }
}

#[test]
fn smc_population_concentrates_on_final_tolerance() {
    let sim = Identity { dim: 1 };
    let prior = unit_prior();
    let cfg = SmcConfig {
        n_particles: 300,
        eps_initial: 0.8,
        eps_decay: 0.5,
        n_rounds: 4,
        budget: 10_000_000,
    };
    let out = smc_abc(&sim, &prior, &arr1(&[0.0]), &cfg, &mut seeded(17)).unwrap();
    let eps_final = 0.8 * 0.5_f64.powi(3);
    assert!((out.epsilon - eps_final).abs() < 1e-12);
    assert!(!out.truncated);
    for s in &out.samples {
        assert!(s[0].abs() < eps_final, "particle {} outside tolerance", s[0]);
    }
    let total: f64 = out.weights.iter().sum();
    assert!((total - 1.0).abs() < 1e-12, "weights normalized");
    assert!(out.ess <= 300.0 && out.ess > 10.0, "ess {}", out.ess);
}

#[test]
fn smc_budget_exhaustion_returns_last_completed_round() {
    let sim = Identity { dim: 1 };
    let prior = unit_prior();
    let cfg = SmcConfig {
        n_particles: 200,
        eps_initial: 0.5,
        // Decay so aggressive that a later round cannot finish in budget.
        eps_decay: 1e-6,
        n_rounds: 3,
        budget: 20_000,
    };
    let out = smc_abc(&sim, &prior, &arr1(&[0.0]), &cfg, &mut seeded(19)).unwrap();
    assert!(out.truncated);
    assert_eq!(out.samples.len(), 200);
    assert_eq!(out.epsilon, 0.5, "round 0 was the last completed round");
}

#[test]
fn ess_mcmc_iid_chain_is_near_n() {
    let mut rng = seeded(23);
    let g = crate::gmath::Gaussian::scalar(0.0, 1.0);
    let chain = g.sample_n(&mut rng, 10_000);
    let ess = ess_mcmc(&chain).unwrap();
    assert!(
        (ess - 10_000.0).abs() / 10_000.0 < 0.15,
        "iid chain ESS {ess}"
    );
}

#[test]
fn ess_mcmc_duplicated_chain_halves() {
    let mut rng = seeded(29);
    let g = crate::gmath::Gaussian::scalar(0.0, 1.0);
    let base = g.sample_n(&mut rng, 5_000);
    let mut chain = Vec::with_capacity(10_000);
    for s in base {
        chain.push(s.clone());
        chain.push(s);
    }
    // r₁ ≈ ½, higher lags ≈ 0: N_eff ≈ N/(1+2·½) = N/2.
    let ess = ess_mcmc(&chain).unwrap();
    assert!(
        (ess - 5_000.0).abs() / 5_000.0 < 0.2,
        "duplicated chain ESS {ess}"
    );
}

#[test]
fn ess_mcmc_constant_chain_is_degenerate() {
    let chain = vec![arr1(&[1.0, 2.0]); 100];
    assert!(matches!(ess_mcmc(&chain), Err(AbcError::DegenerateChain)));
}

#[test]
fn ess_weighted_limits_and_arithmetic() {
    assert_eq!(ess_weighted(&vec![0.01; 100]), 100.0);
    let mut onehot = vec![0.0; 50];
    onehot[7] = 1.0;
    assert_eq!(ess_weighted(&onehot), 1.0);
    let ess = ess_weighted(&[0.5, 0.25, 0.25]);
    assert!((ess - 8.0 / 3.0).abs() < 1e-12, "{ess}");
}
