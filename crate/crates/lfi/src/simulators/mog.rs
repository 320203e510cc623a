//! Mixture-of-two-Gaussians toy problem: infer the common mean θ of
//! `p(x|θ) = α N(x|θ, σ₁²) + (1−α) N(x|θ, σ₂²)` from a single observation,
//! under a uniform prior on a box. The posterior is known in closed form —
//! an equal mixture of two Gaussians centred at `x_o`, truncated to the
//! box — which makes this the correctness benchmark for the whole pipeline.

use super::{SimError, Simulator};
use crate::gmath::{normal_cdf, normal_pdf, UniformBoxPrior};
use ndarray::{arr1, Array1};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct MogProblem {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub alpha: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub x_o: f64,
}

impl Default for MogProblem {
    fn default() -> Self {
        Self {
            theta_lo: -10.0,
            theta_hi: 10.0,
            alpha: 0.5,
            sigma1: 1.0,
            sigma2: 0.1,
            x_o: 0.0,
        }
    }
}

impl MogProblem {
    pub fn prior(&self) -> UniformBoxPrior {
        UniformBoxPrior::new(arr1(&[self.theta_lo]), arr1(&[self.theta_hi]))
    }

    pub fn x_o(&self) -> Array1<f64> {
        arr1(&[self.x_o])
    }

    /// The exact posterior density at the observation.
    pub fn true_posterior(&self) -> MogPosterior {
        MogPosterior::new(self)
    }
}

impl Simulator for MogProblem {
    fn theta_dim(&self) -> usize {
        1
    }

    fn x_dim(&self) -> usize {
        1
    }

    fn simulate(&self, theta: &Array1<f64>, rng: &mut ChaCha8Rng) -> Result<Array1<f64>, SimError> {
        assert_eq!(theta.len(), 1);
        let sigma = if rng.random::<f64>() < self.alpha {
            self.sigma1
        } else {
            self.sigma2
        };
        let z: f64 = rng.sample(StandardNormal);
        Ok(arr1(&[theta[0] + sigma * z]))
    }
}

/// Analytic truncated posterior: proportional to an equal mixture of
/// `N(θ|x_o, σ₁²)` and `N(θ|x_o, σ₂²)` on `[θ_lo, θ_hi]`, zero outside;
/// the normalizer comes from Gaussian CDFs over the box.
#[derive(Debug, Clone)]
pub struct MogPosterior {
    x_o: f64,
    alpha: f64,
    var1: f64,
    var2: f64,
    lo: f64,
    hi: f64,
    normalizer: f64,
}

impl MogPosterior {
    fn new(p: &MogProblem) -> Self {
        let mass = |sigma: f64| {
            normal_cdf(p.theta_hi, p.x_o, sigma) - normal_cdf(p.theta_lo, p.x_o, sigma)
        };
        let normalizer = p.alpha * mass(p.sigma1) + (1.0 - p.alpha) * mass(p.sigma2);
        Self {
            x_o: p.x_o,
            alpha: p.alpha,
            var1: p.sigma1 * p.sigma1,
            var2: p.sigma2 * p.sigma2,
            lo: p.theta_lo,
            hi: p.theta_hi,
            normalizer,
        }
    }

    pub fn density(&self, theta: f64) -> f64 {
        if theta < self.lo || theta > self.hi {
            return 0.0;
        }
        (self.alpha * normal_pdf(theta, self.x_o, self.var1)
            + (1.0 - self.alpha) * normal_pdf(theta, self.x_o, self.var2))
            / self.normalizer
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_noise_collapses_to_theta() {
        let p = MogProblem {
            sigma1: 1e-12,
            sigma2: 1e-12,
            ..MogProblem::default()
        };
        let mut rng = seeded(1);
        for theta in [-3.0, 0.0, 2.5] {
            let x = p.simulate(&arr1(&[theta]), &mut rng).unwrap();
            assert!((x[0] - theta).abs() < 1e-10);
        }
    }

    #[test]
    fn draw_moments_match_mixture() {
        let p = MogProblem::default();
        let mut rng = seeded(2);
        let n = 100_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let x = p.simulate(&arr1(&[0.0]), &mut rng).unwrap()[0];
            sum += x;
            sumsq += x * x;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // α σ₁² + (1−α) σ₂² = 0.505
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 0.505).abs() / 0.505 < 0.03, "var {var}");
    }

    #[test]
    fn posterior_density_reference_value() {
        let post = MogProblem::default().true_posterior();
        // ½(φ(0;0,1) + φ(0;0,0.01)) / Z with Z ≈ 1 on the wide box.
        assert!((post.density(0.0) - 2.194).abs() < 1e-3, "{}", post.density(0.0));
        // Symmetric around x_o = 0.
        for t in [0.05, 0.5, 3.0] {
            assert!((post.density(t) - post.density(-t)).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_density_normalizes_and_truncates() {
        let post = MogProblem::default().true_posterior();
        // Composite Simpson over the box; the narrow σ=0.1 peak needs a fine
        // step for 1e-6 accuracy.
        let n = 200_001;
        let h = 20.0 / (n - 1) as f64;
        let mut total = 0.0;
        for i in 0..n {
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            total += w * post.density(-10.0 + i as f64 * h);
        }
        total *= h / 3.0;
        assert!((total - 1.0).abs() < 1e-6, "integral {total}");
        assert_eq!(post.density(10.0001), 0.0);
        assert_eq!(post.density(-10.0001), 0.0);
    }
}
