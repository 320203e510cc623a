//! Exact Gaussian and Gaussian-mixture algebra.
//!
//! Gaussians are stored through the upper-triangular Cholesky factor `U` of
//! their *precision*, `S⁻¹ = Uᵀ U`. The density, the KL divergence and the
//! mixture-by-Gaussian ratio all consume precisions directly, so this
//! representation makes them cheap and keeps positive definiteness explicit
//! (a factor with positive diagonal exists iff the precision is SPD).
//!
//! The ratio operation is what turns a density estimate trained under a
//! Gaussian proposal back into a posterior under the original prior: a
//! mixture of `K` Gaussians divided by a single Gaussian is again a mixture
//! of `K` Gaussians, obtained by subtracting precisions componentwise.

mod em;

pub use em::{fit_mixture_em, fit_mixture_em_with_trace};

use crate::linalg::{cholesky_lower, invert_upper, logsumexp, solve_lower, solve_upper, spd_inverse};
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;
use thiserror::Error;

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Error)]
pub enum GmathError {
    /// The precision difference `S_k⁻¹ − S_0⁻¹` of a mixture division has a
    /// non-PD component; the proposal is narrower than the estimate along
    /// some direction, which signals a misconfigured run.
    #[error("precision difference for mixture component {component} is not positive definite")]
    NonPositiveDefinite { component: usize },
    /// A matrix that must be SPD (covariance or precision) is not.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("degenerate sample set: {0}")]
    DegenerateSample(String),
    #[error("EM failed: {0}")]
    EmFailure(String),
    #[error("mixture weights must be strictly positive and sum to 1")]
    InvalidWeights,
}

// ---------------------------------------------------------------------------
// Gaussian
// ---------------------------------------------------------------------------

/// Full-covariance Gaussian, parameterized by mean and the upper-triangular
/// Cholesky factor `U` of the precision matrix (`S⁻¹ = Uᵀ U`, diag `U` > 0).
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Array1<f64>,
    prec_chol: Array2<f64>,
}

impl Gaussian {
    /// Build from mean and precision factor. Panics if `prec_chol` is not
    /// upper triangular with a strictly positive finite diagonal.
    pub fn new(mean: Array1<f64>, prec_chol: Array2<f64>) -> Self {
        let d = mean.len();
        assert_eq!(prec_chol.nrows(), d, "precision factor dimension mismatch");
        assert_eq!(prec_chol.ncols(), d, "precision factor must be square");
        for i in 0..d {
            assert!(
                prec_chol[[i, i]] > 0.0 && prec_chol[[i, i]].is_finite(),
                "precision factor diagonal must be positive and finite"
            );
            for j in 0..i {
                assert_eq!(prec_chol[[i, j]], 0.0, "precision factor must be upper triangular");
            }
        }
        Self { mean, prec_chol }
    }

    /// Build from mean and covariance matrix.
    pub fn from_mean_cov(mean: Array1<f64>, cov: &Array2<f64>) -> Result<Self, GmathError> {
        let prec = spd_inverse(cov).ok_or(GmathError::NotPositiveDefinite)?;
        Self::from_mean_precision(mean, &prec)
    }

    /// Build from mean and precision matrix.
    pub fn from_mean_precision(mean: Array1<f64>, prec: &Array2<f64>) -> Result<Self, GmathError> {
        let l = cholesky_lower(prec).ok_or(GmathError::NotPositiveDefinite)?;
        Ok(Self::new(mean, l.t().to_owned()))
    }

    /// Standard normal in `dim` dimensions.
    pub fn standard(dim: usize) -> Self {
        Self::new(Array1::zeros(dim), Array2::eye(dim))
    }

    /// 1-D Gaussian with the given mean and variance.
    pub fn scalar(mean: f64, var: f64) -> Self {
        assert!(var > 0.0, "variance must be positive");
        Self::new(
            ndarray::arr1(&[mean]),
            ndarray::arr2(&[[1.0 / var.sqrt()]]),
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    /// Upper-triangular `U` with `S⁻¹ = Uᵀ U`.
    pub fn prec_chol(&self) -> &Array2<f64> {
        &self.prec_chol
    }

    /// Precision matrix `S⁻¹`.
    pub fn precision(&self) -> Array2<f64> {
        self.prec_chol.t().dot(&self.prec_chol)
    }

    /// Covariance matrix `S = U⁻¹ U⁻ᵀ`.
    pub fn cov(&self) -> Array2<f64> {
        let r = invert_upper(&self.prec_chol);
        let rt = r.t().to_owned();
        r.dot(&rt)
    }

    /// `log det S`, read off the factor diagonal.
    pub fn log_det_cov(&self) -> f64 {
        -2.0 * (0..self.dim())
            .map(|i| self.prec_chol[[i, i]].ln())
            .sum::<f64>()
    }

    /// Log density at `theta`.
    pub fn logpdf(&self, theta: &Array1<f64>) -> f64 {
        let d = self.dim();
        assert_eq!(theta.len(), d, "point dimension mismatch");
        let v = theta - &self.mean;
        let u = self.prec_chol.dot(&v);
        let log_diag: f64 = (0..d).map(|i| self.prec_chol[[i, i]].ln()).sum();
        -0.5 * d as f64 * LN_2PI + log_diag - 0.5 * u.dot(&u)
    }

    /// One draw: `m + U⁻¹ z` with `z ~ N(0, I)`, so the covariance is
    /// `U⁻¹ U⁻ᵀ = S`.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Array1<f64> {
        let z = Array1::from_iter((0..self.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)));
        &self.mean + &solve_upper(&self.prec_chol, &z)
    }

    pub fn sample_n(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Array1<f64>> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    /// `mᵀ S⁻¹ m = ‖U m‖²` for this Gaussian's own mean.
    fn mean_quad_form(&self) -> f64 {
        let u = self.prec_chol.dot(&self.mean);
        u.dot(&u)
    }
}

/// Analytic `KL(p ‖ q)` between Gaussians of the same dimension.
pub fn kl_gaussian(p: &Gaussian, q: &Gaussian) -> f64 {
    let d = p.dim();
    assert_eq!(q.dim(), d, "KL requires matching dimensions");
    // tr(S_q⁻¹ S_p) = ‖U_q U_p⁻¹‖²_F
    let a = q.prec_chol.dot(&invert_upper(&p.prec_chol));
    let trace: f64 = a.iter().map(|x| x * x).sum();
    let dm = q.mean() - p.mean();
    let w = q.prec_chol.dot(&dm);
    let quad = w.dot(&w);
    0.5 * (trace + quad - d as f64 + q.log_det_cov() - p.log_det_cov())
}

// ---------------------------------------------------------------------------
// GaussianMixture
// ---------------------------------------------------------------------------

/// Mixture of full-covariance Gaussians; the universal posterior
/// representation in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    components: Vec<Gaussian>,
}

impl GaussianMixture {
    /// Build from weights and components. Weights must be nonnegative with
    /// at least one strictly positive entry and sum to 1 within 1e-12 (they
    /// are renormalized exactly afterwards); all components must share one
    /// dimension. Zero weights are tolerated so that degenerate mixtures
    /// remain representable; such components are never sampled.
    pub fn new(weights: Vec<f64>, components: Vec<Gaussian>) -> Result<Self, GmathError> {
        if weights.len() != components.len() || weights.is_empty() {
            return Err(GmathError::InvalidWeights);
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite())
            || !weights.iter().any(|&w| w > 0.0)
        {
            return Err(GmathError::InvalidWeights);
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(GmathError::InvalidWeights);
        }
        let d = components[0].dim();
        assert!(
            components.iter().all(|c| c.dim() == d),
            "mixture components must share one dimension"
        );
        let weights = weights.iter().map(|w| w / total).collect();
        Ok(Self { weights, components })
    }

    /// Single-component mixture.
    pub fn single(g: Gaussian) -> Self {
        Self {
            weights: vec![1.0],
            components: vec![g],
        }
    }

    pub fn dim(&self) -> usize {
        self.components[0].dim()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Gaussian] {
        &self.components
    }

    /// Log density `log Σ_k α_k N(θ | m_k, S_k)` via log-sum-exp.
    pub fn logpdf(&self, theta: &Array1<f64>) -> f64 {
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w.ln() + c.logpdf(theta))
            .collect();
        logsumexp(&terms)
    }

    /// `n` iid draws: categorical component choice, then a Gaussian draw.
    pub fn sample_n(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Array1<f64>> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Array1<f64> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        // Fallback for u beyond the rounded cumulative sum: heaviest component.
        let mut idx = self
            .weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(k, _)| k)
            .unwrap();
        for (k, w) in self.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                idx = k;
                break;
            }
        }
        self.components[idx].sample(rng)
    }

    /// Exact mean and covariance of the mixture:
    /// `m = Σ α_k m_k`, `S = Σ α_k (S_k + m_k m_kᵀ) − m mᵀ`.
    pub fn moments(&self) -> (Array1<f64>, Array2<f64>) {
        let d = self.dim();
        let mut mean = Array1::<f64>::zeros(d);
        for (w, c) in self.weights.iter().zip(&self.components) {
            mean.scaled_add(*w, c.mean());
        }
        let mut cov = Array2::<f64>::zeros((d, d));
        for (w, c) in self.weights.iter().zip(&self.components) {
            let ck = c.cov();
            let mk = c.mean();
            for i in 0..d {
                for j in 0..d {
                    cov[[i, j]] += w * (ck[[i, j]] + mk[i] * mk[j]);
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                cov[[i, j]] -= mean[i] * mean[j];
            }
        }
        (mean, cov)
    }

    /// Single Gaussian with the mixture's mean and covariance.
    pub fn moment_matched_gaussian(&self) -> Result<Gaussian, GmathError> {
        let (mean, cov) = self.moments();
        Gaussian::from_mean_cov(mean, &cov)
    }

    /// Analytic 1-D marginal for parameter `index`: the mixture of the
    /// component marginals `N(m_k[i], S_k[i,i])`.
    pub fn marginal(&self, index: usize) -> GaussianMixture {
        assert!(index < self.dim(), "marginal index out of range");
        let comps = self
            .components
            .iter()
            .map(|c| Gaussian::scalar(c.mean()[index], c.cov()[[index, index]]))
            .collect();
        GaussianMixture::new(self.weights.clone(), comps).expect("weights already valid")
    }
}

// ---------------------------------------------------------------------------
// Mixture ratio and product
// ---------------------------------------------------------------------------

/// Normalized ratio `q(θ) / p0(θ)` of a Gaussian mixture and a Gaussian,
/// which is again a mixture of the same size:
///
/// ```text
/// S_k′ = (S_k⁻¹ − S_0⁻¹)⁻¹
/// m_k′ = S_k′ (S_k⁻¹ m_k − S_0⁻¹ m_0)
/// α_k′ ∝ α_k exp(−½ c_k)
/// c_k  = log det S_k − log det S_0 − log det S_k′
///        + m_kᵀ S_k⁻¹ m_k − m_0ᵀ S_0⁻¹ m_0 − m_k′ᵀ S_k′⁻¹ m_k′
/// ```
///
/// Fails with [`GmathError::NonPositiveDefinite`] when any precision
/// difference is not PD, i.e. when `p0` is narrower than a component of `q`
/// along some direction.
pub fn divide_mixture_by_gaussian(
    q: &GaussianMixture,
    p0: &Gaussian,
) -> Result<GaussianMixture, GmathError> {
    assert_eq!(q.dim(), p0.dim(), "ratio requires matching dimensions");
    let p0_prec = p0.precision();
    let p0_h = p0_prec.dot(p0.mean());
    let p0_quad = p0.mean_quad_form();

    let mut comps = Vec::with_capacity(q.n_components());
    let mut log_w = Vec::with_capacity(q.n_components());
    for (k, (alpha, c)) in q.weights().iter().zip(q.components()).enumerate() {
        let c_prec = c.precision();
        let prec_new = &c_prec - &p0_prec;
        let l = cholesky_lower(&prec_new)
            .ok_or(GmathError::NonPositiveDefinite { component: k })?;
        let u_new = l.t().to_owned();
        let h = &c_prec.dot(c.mean()) - &p0_h;
        // m′ solves (Uᵀ U) m′ = h: forward with Uᵀ, then back with U.
        let m_new = solve_upper(&u_new, &solve_lower(&l, &h));
        let g_new = Gaussian::new(m_new, u_new);
        let c_k = c.log_det_cov() - p0.log_det_cov() - g_new.log_det_cov() + c.mean_quad_form()
            - p0_quad
            - g_new.mean_quad_form();
        log_w.push(alpha.ln() - 0.5 * c_k);
        comps.push(g_new);
    }
    let norm = logsumexp(&log_w);
    let weights = log_w.iter().map(|lw| (lw - norm).exp()).collect();
    GaussianMixture::new(weights, comps)
}

/// Normalized product `q(θ) · g(θ)` of a Gaussian mixture and a Gaussian.
/// Always well defined: precisions add.
pub fn multiply_mixture_by_gaussian(q: &GaussianMixture, g: &Gaussian) -> GaussianMixture {
    assert_eq!(q.dim(), g.dim(), "product requires matching dimensions");
    let g_prec = g.precision();
    let g_h = g_prec.dot(g.mean());
    let g_quad = g.mean_quad_form();

    let mut comps = Vec::with_capacity(q.n_components());
    let mut log_w = Vec::with_capacity(q.n_components());
    for (alpha, c) in q.weights().iter().zip(q.components()) {
        let c_prec = c.precision();
        let prec_new = &c_prec + &g_prec;
        let l = cholesky_lower(&prec_new).expect("sum of SPD matrices is SPD");
        let u_new = l.t().to_owned();
        let h = &c_prec.dot(c.mean()) + &g_h;
        let m_new = solve_upper(&u_new, &solve_lower(&l, &h));
        let g_new = Gaussian::new(m_new, u_new);
        // log of the product's normalizing constant, up to terms common to
        // all components (those cancel in the weight normalization).
        let c_k = c.log_det_cov() + g.log_det_cov() - g_new.log_det_cov() + c.mean_quad_form()
            + g_quad
            - g_new.mean_quad_form();
        log_w.push(alpha.ln() - 0.5 * c_k);
        comps.push(g_new);
    }
    let norm = logsumexp(&log_w);
    let weights = log_w.iter().map(|lw| (lw - norm).exp()).collect();
    GaussianMixture::new(weights, comps).expect("product weights are positive")
}

// ---------------------------------------------------------------------------
// Moment fits
// ---------------------------------------------------------------------------

/// Weighted mean / weighted covariance fit (normalized by total weight,
/// covariance diagonal floored at 1e-12 before factorization).
pub fn fit_gaussian_weighted(
    samples: &[Array1<f64>],
    weights: &[f64],
) -> Result<Gaussian, GmathError> {
    assert_eq!(samples.len(), weights.len(), "one weight per sample");
    assert!(
        weights.iter().all(|&w| w >= 0.0 && w.is_finite()),
        "weights must be nonnegative"
    );
    let active: Vec<usize> = (0..samples.len()).filter(|&i| weights[i] > 0.0).collect();
    if active.len() < 2 {
        return Err(GmathError::DegenerateSample(
            "need at least two samples with nonzero weight".into(),
        ));
    }
    let d = samples[0].dim();
    let total: f64 = weights.iter().sum();

    let mut mean = Array1::<f64>::zeros(d);
    for &i in &active {
        mean.scaled_add(weights[i] / total, &samples[i]);
    }
    let mut cov = Array2::<f64>::zeros((d, d));
    for &i in &active {
        let v = &samples[i] - &mean;
        let w = weights[i] / total;
        for r in 0..d {
            for c in 0..=r {
                cov[[r, c]] += w * v[r] * v[c];
            }
        }
    }
    for r in 0..d {
        for c in 0..r {
            cov[[c, r]] = cov[[r, c]];
        }
        cov[[r, r]] = cov[[r, r]].max(1e-12);
    }
    Gaussian::from_mean_cov(mean, &cov).map_err(|_| {
        GmathError::DegenerateSample("covariance not factorizable after flooring".into())
    })
}

/// Unweighted moment fit; literally the weighted fit with uniform weights.
pub fn fit_gaussian_moments(samples: &[Array1<f64>]) -> Result<Gaussian, GmathError> {
    let w = vec![1.0 / samples.len() as f64; samples.len()];
    fit_gaussian_weighted(samples, &w)
}

// ---------------------------------------------------------------------------
// UniformBoxPrior
// ---------------------------------------------------------------------------

/// Uniform density over an axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformBoxPrior {
    lower: Array1<f64>,
    upper: Array1<f64>,
}

impl UniformBoxPrior {
    pub fn new(lower: Array1<f64>, upper: Array1<f64>) -> Self {
        assert_eq!(lower.len(), upper.len(), "box bounds dimension mismatch");
        assert!(
            lower.iter().zip(upper.iter()).all(|(l, u)| l < u),
            "box bounds must satisfy lower < upper elementwise"
        );
        Self { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &Array1<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &Array1<f64> {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(self.upper.iter())
            .map(|(l, u)| u - l)
            .product()
    }

    pub fn contains(&self, theta: &Array1<f64>) -> bool {
        assert_eq!(theta.len(), self.dim(), "point dimension mismatch");
        theta
            .iter()
            .zip(self.lower.iter().zip(self.upper.iter()))
            .all(|(x, (l, u))| x >= l && x <= u)
    }

    /// `−log volume` inside the box, `−∞` outside.
    pub fn logpdf(&self, theta: &Array1<f64>) -> f64 {
        if self.contains(theta) {
            -self.volume().ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Array1<f64> {
        Array1::from_iter(
            self.lower
                .iter()
                .zip(self.upper.iter())
                .map(|(l, u)| rng.random_range(*l..*u)),
        )
    }
}

/// Normal CDF, used for truncation normalizers.
pub fn normal_cdf(x: f64, mean: f64, std: f64) -> f64 {
    0.5 * (1.0 + libm::erf((x - mean) / (std * std::f64::consts::SQRT_2)))
}

/// Density of N(mean, var) at x; convenience for 1-D reference posteriors.
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-0.5 * (x - mean) * (x - mean) / var).exp() / (2.0 * PI * var).sqrt()
}

#[cfg(test)]
mod tests;
