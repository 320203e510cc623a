//! Posterior-quality metrics. Each experiment has one headline metric:
//! total variation to the analytic posterior where a closed form exists on
//! a grid (mixture of two Gaussians), exact Gaussian KL where the posterior
//! is conjugate (linear regression), and negative log probability of the
//! true parameters elsewhere.

use crate::gmath::{kl_gaussian, Gaussian, GaussianMixture, UniformBoxPrior};
use crate::simulators::MogPosterior;
use ndarray::Array1;
use rand_chacha::ChaCha8Rng;

/// `KL(true ‖ learned)` between the analytic posterior and a Gaussian fit.
pub fn metric_kl_to_true(true_post: &Gaussian, learned: &Gaussian) -> f64 {
    kl_gaussian(true_post, learned)
}

/// Negative log probability of the true parameters under the learnt
/// posterior.
pub fn metric_neg_logprob_true(posterior: &GaussianMixture, theta_true: &Array1<f64>) -> f64 {
    -posterior.logpdf(theta_true)
}

/// Total variation distance `½∫|p̂ − p|` between a mixture and the analytic
/// truncated posterior, by midpoint sums on an `n_grid`-point grid.
pub fn tv_to_mog_truth(
    posterior: &GaussianMixture,
    truth: &MogPosterior,
    lo: f64,
    hi: f64,
    n_grid: usize,
) -> f64 {
    assert!(n_grid >= 3);
    let h = (hi - lo) / (n_grid - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n_grid {
        let t = lo + i as f64 * h;
        let p_hat = posterior.logpdf(&ndarray::arr1(&[t])).exp();
        let w = if i == 0 || i == n_grid - 1 { 0.5 } else { 1.0 };
        acc += w * (p_hat - truth.density(t)).abs();
    }
    0.5 * acc * h
}

/// Fraction of mixture mass outside a uniform prior's box; reported as a
/// diagnostic because posterior estimates are left untruncated. Analytic in
/// one dimension, Monte Carlo above it.
pub fn mass_outside_box(
    posterior: &GaussianMixture,
    prior_box: &UniformBoxPrior,
    rng: &mut ChaCha8Rng,
) -> f64 {
    if posterior.dim() == 1 {
        let (lo, hi) = (prior_box.lower()[0], prior_box.upper()[0]);
        return posterior
            .weights()
            .iter()
            .zip(posterior.components())
            .map(|(w, c)| {
                let std = c.cov()[[0, 0]].sqrt();
                let inside = crate::gmath::normal_cdf(hi, c.mean()[0], std)
                    - crate::gmath::normal_cdf(lo, c.mean()[0], std);
                w * (1.0 - inside)
            })
            .sum();
    }
    let n = 20_000;
    let outside = posterior
        .sample_n(rng, n)
        .iter()
        .filter(|t| !prior_box.contains(t))
        .count();
    outside as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmath::fit_gaussian_moments;
    use crate::rng::seeded;
    use crate::simulators::MogProblem;
    use ndarray::{arr1, Array2};

    #[test]
    fn kl_metric_zero_at_truth_and_positive_at_prior() {
        let truth = Gaussian::scalar(0.5, 0.01);
        assert_eq!(metric_kl_to_true(&truth, &truth), 0.0);
        let prior = Gaussian::scalar(0.0, 1.0);
        // Closed form: ½(σ²/σq² + Δm²/σq² − 1 + ln σq²/σ²).
        let want = 0.5 * (0.01 / 1.0 + 0.25 / 1.0 - 1.0 + (1.0 / 0.01_f64).ln());
        assert!((metric_kl_to_true(&truth, &prior) - want).abs() < 1e-12);
    }

    #[test]
    fn kl_metric_vanishes_for_large_sample_fits() {
        let truth = Gaussian::scalar(0.3, 0.02);
        let mut rng = seeded(3);
        let samples = truth.sample_n(&mut rng, 100_000);
        let fitted = fit_gaussian_moments(&samples).unwrap();
        assert!(metric_kl_to_true(&truth, &fitted) < 0.01);
    }

    #[test]
    fn nlp_reference_values() {
        let theta = arr1(&[0.1, -0.2, 0.3, 0.4]);
        // N(θ_true, I) in four dimensions: NLP at the mean is 2 ln 2π.
        let at_mean = GaussianMixture::single(
            Gaussian::from_mean_cov(theta.clone(), &Array2::eye(4)).unwrap(),
        );
        let nlp = metric_neg_logprob_true(&at_mean, &theta);
        assert!((nlp - 2.0 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-12);

        // Broadening the covariance 4× raises the NLP at the mean by D ln 2.
        let broad = GaussianMixture::single(
            Gaussian::from_mean_cov(theta.clone(), &(Array2::eye(4) * 4.0)).unwrap(),
        );
        let diff = metric_neg_logprob_true(&broad, &theta) - nlp;
        assert!((diff - 4.0 * 2.0_f64.ln()).abs() < 1e-12);

        // A near-point-mass at the truth is extremely confident.
        let tight = GaussianMixture::single(
            Gaussian::from_mean_cov(theta.clone(), &(Array2::eye(4) * 1e-6)).unwrap(),
        );
        assert!(metric_neg_logprob_true(&tight, &theta) < -20.0);
    }

    #[test]
    fn tv_distance_zero_against_itself_like_mixture() {
        // A mixture matching the analytic posterior almost exactly (wide box
        // ⇒ truncation negligible) has near-zero TV.
        let problem = MogProblem::default();
        let truth = problem.true_posterior();
        let close = GaussianMixture::new(
            vec![0.5, 0.5],
            vec![Gaussian::scalar(0.0, 1.0), Gaussian::scalar(0.0, 0.01)],
        )
        .unwrap();
        let tv = tv_to_mog_truth(&close, &truth, -10.0, 10.0, 2001);
        assert!(tv < 1e-4, "tv {tv}");
        // A displaced unimodal fit is far.
        let off = GaussianMixture::single(Gaussian::scalar(3.0, 1.0));
        let tv = tv_to_mog_truth(&off, &truth, -10.0, 10.0, 2001);
        assert!(tv > 0.5, "tv {tv}");
    }

    #[test]
    fn mass_outside_box_analytic_1d() {
        let post = GaussianMixture::single(Gaussian::scalar(0.0, 1.0));
        let prior = UniformBoxPrior::new(arr1(&[-1.0]), arr1(&[1.0]));
        let mut rng = seeded(5);
        let got = mass_outside_box(&post, &prior, &mut rng);
        let want = 2.0 * (1.0 - crate::gmath::normal_cdf(1.0, 0.0, 1.0));
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn mass_outside_box_monte_carlo_2d() {
        let post = GaussianMixture::single(Gaussian::standard(2));
        let prior = UniformBoxPrior::new(arr1(&[-1.0, -1.0]), arr1(&[1.0, 1.0]));
        let mut rng = seeded(7);
        let got = mass_outside_box(&post, &prior, &mut rng);
        let inside_1d = crate::gmath::normal_cdf(1.0, 0.0, 1.0) - crate::gmath::normal_cdf(-1.0, 0.0, 1.0);
        let want = 1.0 - inside_1d * inside_1d;
        assert!((got - want).abs() < 0.02, "{got} vs {want}");
    }
}
