//! Expectation-Maximization fit of a full-covariance Gaussian mixture,
//! used to turn ABC sample sets into parametric posteriors.

use super::{Gaussian, GaussianMixture, GmathError};
use crate::linalg::logsumexp;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const LL_GAIN_TOL: f64 = 1e-6;
const MAX_ITERS: usize = 500;
const MAX_REINITS: usize = 10;

/// Best-of-`n_restarts` EM fit of a `k`-component mixture. Each restart
/// initializes component means at random samples (pooled covariance,
/// uniform weights), iterates until the mean log-likelihood gain drops
/// below 1e-6 or 500 iterations, and reinitializes any component that loses
/// all responsibility mass (at most 10 times before giving up on the
/// restart).
pub fn fit_mixture_em(
    samples: &[Array1<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
    n_restarts: usize,
) -> Result<GaussianMixture, GmathError> {
    fit_mixture_em_with_trace(samples, k, rng, n_restarts).map(|(m, _)| m)
}

/// As [`fit_mixture_em`], also returning the winning restart's per-iteration
/// log-likelihood sequence (non-decreasing absent reinitializations).
pub fn fit_mixture_em_with_trace(
    samples: &[Array1<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
    n_restarts: usize,
) -> Result<(GaussianMixture, Vec<f64>), GmathError> {
    assert!(k >= 1 && n_restarts >= 1);
    let n = samples.len();
    let d = samples[0].dim();
    assert!(
        n >= k * (d + 1),
        "EM needs at least K(D+1) samples ({} for K={k}, D={d})",
        k * (d + 1)
    );

    let pooled = pooled_cov(samples);
    let mut best: Option<(f64, GaussianMixture, Vec<f64>)> = None;
    let mut last_err = None;
    for _ in 0..n_restarts {
        match run_restart(samples, k, rng, &pooled) {
            Ok((ll, mix, trace)) => {
                if best.as_ref().map_or(true, |(b, _, _)| ll > *b) {
                    best = Some((ll, mix, trace));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some((_, mix, trace)) => Ok((mix, trace)),
        None => Err(last_err.unwrap_or_else(|| GmathError::EmFailure("no restart succeeded".into()))),
    }
}

fn run_restart(
    samples: &[Array1<f64>],
    k: usize,
    rng: &mut ChaCha8Rng,
    pooled: &Array2<f64>,
) -> Result<(f64, GaussianMixture, Vec<f64>), GmathError> {
    let n = samples.len();

    // Initial components: means at K distinct random samples, pooled
    // covariance, uniform weights. Responsibility-based random inits start
    // too close to the symmetric saddle and stall on separated clusters.
    let mut picks: Vec<usize> = Vec::with_capacity(k);
    while picks.len() < k {
        let i = rng.random_range(0..n);
        if !picks.contains(&i) {
            picks.push(i);
        }
    }
    let comps: Vec<Gaussian> = picks
        .iter()
        .map(|&i| {
            Gaussian::from_mean_cov(samples[i].clone(), pooled)
                .map_err(|_| GmathError::EmFailure("pooled covariance singular".into()))
        })
        .collect::<Result<_, _>>()?;
    let mut params: MixParams = (vec![1.0 / k as f64; k], comps);

    let mut resp = Array2::<f64>::zeros((n, k));
    let mut reinits = 0;
    let mut trace = Vec::new();
    let mut prev_ll = f64::NEG_INFINITY;
    for _ in 0..MAX_ITERS {
        let ll = e_step(samples, &params, &mut resp);
        trace.push(ll);
        if ll - prev_ll < LL_GAIN_TOL && prev_ll.is_finite() {
            break;
        }
        prev_ll = ll;
        params = m_step(samples, &resp, rng, pooled, &mut reinits)?;
    }
    let ll = *trace.last().expect("at least one iteration");
    let mix = GaussianMixture::new(params.0, params.1)?;
    Ok((ll, mix, trace))
}

type MixParams = (Vec<f64>, Vec<Gaussian>);

fn e_step(samples: &[Array1<f64>], params: &MixParams, resp: &mut Array2<f64>) -> f64 {
    let (weights, comps) = params;
    let k = comps.len();
    let mut ll = 0.0;
    let mut terms = vec![0.0; k];
    for (i, x) in samples.iter().enumerate() {
        for j in 0..k {
            terms[j] = weights[j].ln() + comps[j].logpdf(x);
        }
        let lse = logsumexp(&terms);
        ll += lse;
        for j in 0..k {
            resp[[i, j]] = (terms[j] - lse).exp();
        }
    }
    ll / samples.len() as f64
}

fn m_step(
    samples: &[Array1<f64>],
    resp: &Array2<f64>,
    rng: &mut ChaCha8Rng,
    pooled: &Array2<f64>,
    reinits: &mut usize,
) -> Result<MixParams, GmathError> {
    let n = samples.len();
    let d = samples[0].dim();
    let k = resp.ncols();
    let mut weights = vec![0.0; k];
    let mut comps = Vec::with_capacity(k);
    for j in 0..k {
        let mass: f64 = (0..n).map(|i| resp[[i, j]]).sum();
        let fitted = if mass > 1e-12 {
            let mut mean = Array1::<f64>::zeros(d);
            for (i, x) in samples.iter().enumerate() {
                mean.scaled_add(resp[[i, j]] / mass, x);
            }
            let mut cov = Array2::<f64>::zeros((d, d));
            for (i, x) in samples.iter().enumerate() {
                let v = x - &mean;
                let w = resp[[i, j]] / mass;
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
            Gaussian::from_mean_cov(mean, &cov).ok()
        } else {
            None
        };
        match fitted {
            Some(g) => {
                weights[j] = mass / n as f64;
                comps.push(g);
            }
            None => {
                // Empty or singular component: restart it from a random
                // sample with the pooled covariance.
                *reinits += 1;
                if *reinits > MAX_REINITS {
                    return Err(GmathError::EmFailure(format!(
                        "component {j} reinitialized more than {MAX_REINITS} times"
                    )));
                }
                let pick = rng.random_range(0..n);
                let g = Gaussian::from_mean_cov(samples[pick].clone(), pooled)
                    .map_err(|_| GmathError::EmFailure("pooled covariance singular".into()))?;
                weights[j] = 1.0 / n as f64;
                comps.push(g);
            }
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok((weights, comps))
}

fn pooled_cov(samples: &[Array1<f64>]) -> Array2<f64> {
    let n = samples.len();
    let d = samples[0].dim();
    let mut mean = Array1::<f64>::zeros(d);
    for x in samples {
        mean.scaled_add(1.0 / n as f64, x);
    }
    let mut cov = Array2::<f64>::zeros((d, d));
    for x in samples {
        let v = x - &mean;
        for r in 0..d {
            for c in 0..=r {
                cov[[r, c]] += v[r] * v[c] / n as f64;
            }
        }
    }
    for r in 0..d {
        for c in 0..r {
            cov[[c, r]] = cov[[r, c]];
        }
        cov[[r, r]] = cov[[r, r]].max(1e-12);
    }
    cov
}
