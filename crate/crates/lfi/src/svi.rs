//! Bayesian mixture density networks trained with stochastic variational
//! inference (MDN-SVI).
//!
//! Every MDN parameter gets an independent Gaussian posterior with mean
//! `φ_m` and log variance `φ_s`, under a zero-mean isotropic Gaussian prior
//! of precision `λ`. Training maximizes the variational lower bound
//!
//! ```text
//! (1/N) Σ_n E_u[ log q_φ(θ_n | x_n) ] − (1/N) KL(q(φ) ‖ p(φ)),
//! ```
//!
//! estimating the expectations with one noise draw per example via the
//! *local reparameterization trick*: instead of sampling weights, each unit
//! samples its activation from the induced Gaussian
//! `N(w_mᵀz + b_m, exp(w_s)ᵀ(z⊙z) + exp(b_s))`. At prediction time the noise
//! is off and the network behaves like a conventional MDN with `φ = φ_m`.
//!
//! The noise makes small-sample training robust to overfitting, which is
//! what lets the proposal-prior loop retrain on a few hundred simulations
//! per iteration without a validation set.

use crate::dataset::SimDataset;
use crate::gmath::{Gaussian, GaussianMixture};
use crate::linalg::logsumexp;
use crate::mdn::{
    accumulate_dense, forward_mixture, next_line, parse_field, read_dims_and_params,
    replicate_params, write_dims_and_params, Dense, MdnDims, MdnNet, MdnParams, NetIoError,
    TrainConfig, TrainError,
};
use crate::opt::{adam_step, AdamState};
use crate::rng::seeded;
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// MDN with a factorized Gaussian posterior over its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SviNet {
    dims: MdnDims,
    pub phi_m: MdnParams,
    pub phi_s: MdnParams,
    lambda: f64,
}

/// Fresh variational state: parameter means all zero, log variances all
/// `log λ⁻¹` (the prior variance), matching the prior exactly.
pub fn svi_init(dims: MdnDims, lambda: f64) -> SviNet {
    assert!(lambda > 0.0, "prior precision lambda must be positive");
    let phi_m = MdnParams::zeros(&dims);
    let phi_s = phi_m.map(|_| (1.0 / lambda).ln());
    SviNet {
        dims,
        phi_m,
        phi_s,
        lambda,
    }
}

/// Log variance used by [`SviNet::random_init`]. The prior-matching
/// initialization of [`svi_init`] puts noise of standard deviation `λ^{-½}`
/// (= 10 at the default λ) on every weight, which saturates the tanh stack
/// and stalls training; practical runs start from small noise and let the
/// KL term grow the variances of unused weights back toward the prior.
pub const SVI_INIT_LOG_VAR: f64 = -5.0;

/// Training entry point used by the inference algorithms: `φ_m` drawn like a
/// conventional MDN initialization, `φ_s` at a small constant.
impl SviNet {
    pub fn random_init(dims: MdnDims, lambda: f64, rng: &mut ChaCha8Rng) -> Self {
        let phi_m = MdnNet::init_random(dims.clone(), rng).params().clone();
        let phi_s = MdnParams::zeros(&dims).map(|_| SVI_INIT_LOG_VAR);
        Self::from_parts(dims, phi_m, phi_s, lambda)
    }

    pub fn from_parts(dims: MdnDims, phi_m: MdnParams, phi_s: MdnParams, lambda: f64) -> Self {
        assert!(lambda > 0.0);
        assert_eq!(phi_m.to_flat().len(), dims.param_count());
        assert_eq!(phi_s.to_flat().len(), dims.param_count());
        Self {
            dims,
            phi_m,
            phi_s,
            lambda,
        }
    }

    pub fn dims(&self) -> &MdnDims {
        &self.dims
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of parameters in each of `φ_m` and `φ_s`.
    pub fn param_count(&self) -> usize {
        self.dims.param_count()
    }

    /// Stochastic forward pass: one activation noise draw per unit.
    pub fn forward_train(&self, x: &Array1<f64>, rng: &mut ChaCha8Rng) -> GaussianMixture {
        let noise = SviNoise::draw(&self.dims, rng);
        let exp_s = self.phi_s.map(f64::exp);
        let tr = noisy_trace(&self.dims, &self.phi_m, &exp_s, x, &noise);
        mixture_from_activations(&self.dims, &tr)
    }

    /// Deterministic forward pass: exactly the conventional MDN with `φ_m`.
    pub fn forward_predict(&self, x: &Array1<f64>) -> GaussianMixture {
        forward_mixture(&self.dims, &self.phi_m, x)
    }

    /// The conventional network at the posterior means.
    pub fn predict_net(&self) -> MdnNet {
        MdnNet::new(self.dims.clone(), self.phi_m.clone())
    }

    /// Non-constant part of `KL(q(φ) ‖ p(φ))`:
    /// `λ/2 (‖φ_m‖² + Σ exp φ_s) − ½ Σ φ_s`.
    pub fn kl_term(&self) -> f64 {
        let m = self.phi_m.to_flat();
        let s = self.phi_s.to_flat();
        let sq: f64 = m.iter().map(|v| v * v).sum();
        let es: f64 = s.iter().map(|v| v.exp()).sum();
        let ss: f64 = s.iter().sum();
        0.5 * self.lambda * (sq + es) - 0.5 * ss
    }
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// One standard-normal draw per unit, in the canonical unit order (hidden
/// layers, alpha head, then per component mean / diagonal / upper-triangle
/// heads).
#[derive(Debug, Clone)]
pub struct SviNoise {
    pub layers: Vec<Array1<f64>>,
    pub alpha: Array1<f64>,
    pub comps: Vec<(Array1<f64>, Array1<f64>, Array1<f64>)>,
}

impl SviNoise {
    pub fn draw(dims: &MdnDims, rng: &mut ChaCha8Rng) -> Self {
        let mut gauss = |n: usize| -> Array1<f64> {
            Array1::from_iter((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
        };
        let layers = dims.hidden.iter().map(|&h| gauss(h)).collect();
        let alpha = gauss(dims.k);
        let comps = (0..dims.k)
            .map(|_| {
                (
                    gauss(dims.theta_dim),
                    gauss(dims.theta_dim),
                    gauss(dims.n_utri()),
                )
            })
            .collect();
        Self {
            layers,
            alpha,
            comps,
        }
    }
}

// ---------------------------------------------------------------------------
// Stochastic forward
// ---------------------------------------------------------------------------

struct SdCache {
    z2: Array1<f64>,
    var: Array1<f64>,
    u: Array1<f64>,
}

struct SviTrace {
    /// Post-tanh hidden activations.
    h: Vec<Array1<f64>>,
    layer_caches: Vec<SdCache>,
    alpha_cache: SdCache,
    log_alpha: Array1<f64>,
    alpha: Array1<f64>,
    comp_caches: Vec<(SdCache, SdCache, SdCache)>,
    /// Head activations: mean, pre-exp diagonal, upper triangle.
    comps: Vec<(Array1<f64>, Array1<f64>, Array1<f64>)>,
}

/// `a = w_mᵀz + b_m + sqrt(exp(w_s)ᵀ(z⊙z) + exp(b_s)) ⊙ u`.
fn sdense(wm: &Dense, es: &Dense, z: &Array1<f64>, u: &Array1<f64>) -> (Array1<f64>, SdCache) {
    let z2 = z * z;
    let var = es.w.dot(&z2) + &es.b;
    let a_m = wm.w.dot(z) + &wm.b;
    let a = Array1::from_iter(
        a_m.iter()
            .zip(var.iter())
            .zip(u.iter())
            .map(|((am, v), ui)| am + v.sqrt() * ui),
    );
    (a, SdCache { z2, var, u: u.clone() })
}

fn noisy_trace(
    dims: &MdnDims,
    phi_m: &MdnParams,
    exp_s: &MdnParams,
    x: &Array1<f64>,
    noise: &SviNoise,
) -> SviTrace {
    assert_eq!(x.len(), dims.x_dim, "input dimension mismatch");
    let mut h: Vec<Array1<f64>> = Vec::with_capacity(dims.hidden.len());
    let mut layer_caches = Vec::with_capacity(dims.hidden.len());
    let mut z = x;
    for (l, (wm, es)) in phi_m.hidden.iter().zip(&exp_s.hidden).enumerate() {
        let (a, cache) = sdense(wm, es, z, &noise.layers[l]);
        layer_caches.push(cache);
        h.push(a.mapv(f64::tanh));
        z = h.last().unwrap();
    }
    let y = z;
    let (z_alpha, alpha_cache) = sdense(&phi_m.alpha, &exp_s.alpha, y, &noise.alpha);
    let lse = logsumexp(z_alpha.as_slice().unwrap());
    let log_alpha = z_alpha.mapv(|v| v - lse);
    let alpha = log_alpha.mapv(f64::exp);
    let mut comp_caches = Vec::with_capacity(dims.k);
    let mut comps = Vec::with_capacity(dims.k);
    for (k, (cm, ce)) in phi_m.comps.iter().zip(&exp_s.comps).enumerate() {
        let (m, c1) = sdense(&cm.mean, &ce.mean, y, &noise.comps[k].0);
        let (d, c2) = sdense(&cm.diag_u, &ce.diag_u, y, &noise.comps[k].1);
        let (o, c3) = sdense(&cm.utri_u, &ce.utri_u, y, &noise.comps[k].2);
        comp_caches.push((c1, c2, c3));
        comps.push((m, d, o));
    }
    SviTrace {
        h,
        layer_caches,
        alpha_cache,
        log_alpha,
        alpha,
        comp_caches,
        comps,
    }
}

fn mixture_from_activations(dims: &MdnDims, tr: &SviTrace) -> GaussianMixture {
    let d = dims.theta_dim;
    let comps = tr
        .comps
        .iter()
        .map(|(m, dg, o)| {
            let mut u = Array2::zeros((d, d));
            for i in 0..d {
                u[[i, i]] = dg[i].exp();
            }
            let mut pos = 0;
            for i in 0..d {
                for j in i + 1..d {
                    u[[i, j]] = o[pos];
                    pos += 1;
                }
            }
            Gaussian::new(m.clone(), u)
        })
        .collect();
    GaussianMixture::new(tr.alpha.to_vec(), comps).expect("softmax weights valid")
}

// ---------------------------------------------------------------------------
// Objective and gradient
// ---------------------------------------------------------------------------

/// Value and gradients of the stochastic variational objective.
pub struct SviObjective {
    /// Lower-bound estimate: mean noisy log-likelihood − KL/N.
    pub value: f64,
    /// The likelihood part alone.
    pub mean_loglik: f64,
    pub grad_m: MdnParams,
    pub grad_s: MdnParams,
}

/// Objective with fresh noise per example (the training estimator).
pub fn svi_objective_grad(
    net: &SviNet,
    batch: &[(Array1<f64>, Array1<f64>)],
    n_total: usize,
    rng: &mut ChaCha8Rng,
) -> SviObjective {
    let noise: Vec<SviNoise> = batch.iter().map(|_| SviNoise::draw(&net.dims, rng)).collect();
    svi_objective_grad_fixed_noise(net, batch, n_total, &noise)
}

/// Same objective with caller-supplied noise; the finite-difference oracle
/// differentiates exactly this function at frozen noise.
pub fn svi_objective_grad_fixed_noise(
    net: &SviNet,
    batch: &[(Array1<f64>, Array1<f64>)],
    n_total: usize,
    noise: &[SviNoise],
) -> SviObjective {
    assert!(!batch.is_empty(), "objective needs a nonempty batch");
    assert!(n_total >= batch.len(), "N must cover the batch");
    assert_eq!(noise.len(), batch.len(), "one noise draw per example");

    let exp_s = net.phi_s.map(f64::exp);
    let mut grad_m = MdnParams::zeros(&net.dims);
    let mut grad_s = MdnParams::zeros(&net.dims);
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    for ((theta, x), nz) in batch.iter().zip(noise) {
        total += backprop_noisy(
            &net.dims, &net.phi_m, &exp_s, theta, x, nz, scale, &mut grad_m, &mut grad_s,
        );
    }
    let mean_loglik = total * scale;

    // KL part: ∂KL/∂φ_m = λφ_m, ∂KL/∂φ_s = λ/2·exp(φ_s) − ½, each weighted 1/N.
    let n = n_total as f64;
    let lambda = net.lambda;
    let value = mean_loglik - net.kl_term() / n;
    let grad_m = add_params(&grad_m, &net.phi_m.map(|v| -lambda * v / n));
    let grad_s = add_params(&grad_s, &net.phi_s.map(|v| -(0.5 * lambda * v.exp() - 0.5) / n));
    SviObjective {
        value,
        mean_loglik,
        grad_m,
        grad_s,
    }
}

fn add_params(a: &MdnParams, b: &MdnParams) -> MdnParams {
    let av = a.to_flat();
    let bv = b.to_flat();
    let sum: Vec<f64> = av.iter().zip(&bv).map(|(x, y)| x + y).collect();
    // Shapes of a and b agree by construction.
    let mut out = a.clone();
    out.assign_from_flat(&sum);
    out
}

/// Backward pass through one noisy sample; accumulates `scale · ∂loglik/∂φ`
/// and returns the sample's log-likelihood.
#[allow(clippy::too_many_arguments)]
fn backprop_noisy(
    dims: &MdnDims,
    phi_m: &MdnParams,
    exp_s: &MdnParams,
    theta: &Array1<f64>,
    x: &Array1<f64>,
    noise: &SviNoise,
    scale: f64,
    grad_m: &mut MdnParams,
    grad_s: &mut MdnParams,
) -> f64 {
    assert_eq!(theta.len(), dims.theta_dim, "parameter dimension mismatch");
    let d = dims.theta_dim;
    let tr = noisy_trace(dims, phi_m, exp_s, x, noise);
    let y: &Array1<f64> = tr.h.last().unwrap_or(x);

    // Joint log terms and responsibilities, as in the conventional MDN.
    let mut ell = Vec::with_capacity(dims.k);
    let mut cached_uv: Vec<(Array2<f64>, Array1<f64>, Array1<f64>)> = Vec::with_capacity(dims.k);
    for (m, dg, o) in &tr.comps {
        let mut u = Array2::zeros((d, d));
        for i in 0..d {
            u[[i, i]] = dg[i].exp();
        }
        let mut pos = 0;
        for i in 0..d {
            for j in i + 1..d {
                u[[i, j]] = o[pos];
                pos += 1;
            }
        }
        let v = theta - m;
        let uv = u.dot(&v);
        let lp = -0.5 * d as f64 * LN_2PI + dg.sum() - 0.5 * uv.dot(&uv);
        ell.push(lp);
        cached_uv.push((u, v, uv));
    }
    let joint: Vec<f64> = ell
        .iter()
        .zip(tr.log_alpha.iter())
        .map(|(lp, la)| lp + la)
        .collect();
    let logp = logsumexp(&joint);
    let r: Vec<f64> = joint.iter().map(|e| (e - logp).exp()).collect();

    // Alpha head.
    let g_zalpha = Array1::from_iter(r.iter().zip(tr.alpha.iter()).map(|(rk, ak)| rk - ak));
    let mut g_y = sdense_backward(
        &phi_m.alpha,
        &exp_s.alpha,
        &tr.alpha_cache,
        y,
        &g_zalpha,
        scale,
        &mut grad_m.alpha,
        &mut grad_s.alpha,
    );

    // Component heads.
    for k in 0..dims.k {
        if r[k] == 0.0 {
            continue;
        }
        let (u, v, uv) = &cached_uv[k];
        let g_m = u.t().dot(uv).mapv(|g| g * r[k]);
        let g_d = Array1::from_iter((0..d).map(|i| r[k] * (1.0 - uv[i] * v[i] * u[[i, i]])));
        let mut g_o = Array1::zeros(dims.n_utri());
        let mut pos = 0;
        for i in 0..d {
            for j in i + 1..d {
                g_o[pos] = -r[k] * uv[i] * v[j];
                pos += 1;
            }
        }
        let (cm, ce) = (&phi_m.comps[k], &exp_s.comps[k]);
        let (gcm, gcs) = (&mut grad_m.comps[k], &mut grad_s.comps[k]);
        let caches = &tr.comp_caches[k];
        g_y = g_y
            + sdense_backward(&cm.mean, &ce.mean, &caches.0, y, &g_m, scale, &mut gcm.mean, &mut gcs.mean)
            + sdense_backward(
                &cm.diag_u, &ce.diag_u, &caches.1, y, &g_d, scale, &mut gcm.diag_u, &mut gcs.diag_u,
            )
            + sdense_backward(
                &cm.utri_u, &ce.utri_u, &caches.2, y, &g_o, scale, &mut gcm.utri_u, &mut gcs.utri_u,
            );
    }

    // Hidden stack.
    let mut g_h = g_y;
    for l in (0..dims.hidden.len()).rev() {
        let g_a = Array1::from_iter(
            g_h.iter()
                .zip(tr.h[l].iter())
                .map(|(g, a)| g * (1.0 - a * a)),
        );
        let input = if l == 0 { x } else { &tr.h[l - 1] };
        g_h = sdense_backward(
            &phi_m.hidden[l],
            &exp_s.hidden[l],
            &tr.layer_caches[l],
            input,
            &g_a,
            scale,
            &mut grad_m.hidden[l],
            &mut grad_s.hidden[l],
        );
    }
    logp
}

/// Backward through one stochastic affine unit. Accumulates parameter
/// gradients (already scaled) and returns the gradient with respect to the
/// unit's input.
#[allow(clippy::too_many_arguments)]
fn sdense_backward(
    wm: &Dense,
    es: &Dense,
    cache: &SdCache,
    z: &Array1<f64>,
    g_a: &Array1<f64>,
    scale: f64,
    gm: &mut Dense,
    gs: &mut Dense,
) -> Array1<f64> {
    // Mean path.
    accumulate_dense(gm, g_a, z, scale);
    // Variance path: a = a_m + sqrt(t)·u with t = exp(w_s)ᵀz² + exp(b_s).
    let g_t = Array1::from_iter(
        g_a.iter()
            .zip(cache.u.iter())
            .zip(cache.var.iter())
            .map(|((g, u), t)| g * u / (2.0 * t.sqrt())),
    );
    for (i, gt) in g_t.iter().enumerate() {
        let gts = gt * scale;
        for (j, z2) in cache.z2.iter().enumerate() {
            // ∂t/∂φ_s[w ij] = exp(φ_s)·z_j².
            gs.w[[i, j]] += gts * es.w[[i, j]] * z2;
        }
        gs.b[i] += gts * es.b[i];
    }
    // Input gradient: w_mᵀ g_a + 2z ⊙ (exp(w_s)ᵀ g_t).
    let back_var = es.w.t().dot(&g_t);
    wm.w.t().dot(g_a) + &(2.0 * z * &back_var)
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Per-coordinate clip bound for the stochastic gradient. At the prior
/// initialization the activation noise reaches the diagonal heads' `exp`
/// link and produces rare gradient spikes of astronomical size; unclipped,
/// one spike freezes Adam's second-moment accumulator for ~1e5 steps.
/// Clipping keeps the sign information and restores ordinary step sizes.
const SVI_GRAD_CLIP: f64 = 100.0;

/// Minibatch Adam on the negated lower bound. Every sample is used for
/// training — the noise regularizes instead of a validation split — with the
/// KL term weighted by 1/N for the current dataset size. Bit-reproducible
/// for a fixed seed.
pub fn train_mdn_svi(
    net: &SviNet,
    data: &SimDataset,
    cfg: &TrainConfig,
) -> Result<SviNet, TrainError> {
    cfg.validate();
    assert!(!data.is_empty(), "training data must be nonempty");
    let dims = net.dims.clone();
    let p = dims.param_count();
    let mut flat = net.phi_m.to_flat();
    flat.extend(net.phi_s.to_flat());
    let mut work = net.clone();
    let mut adam = AdamState::new(flat.len());
    let mut rng = seeded(cfg.rng_seed);

    let n_total = data.len();
    let mut order: Vec<usize> = (0..n_total).collect();
    let mut neg = vec![0.0; flat.len()];
    for epoch in 0..cfg.n_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.minibatch_size) {
            let batch: Vec<(Array1<f64>, Array1<f64>)> =
                chunk.iter().map(|&i| data.pairs()[i].clone()).collect();
            let obj = svi_objective_grad(&work, &batch, n_total, &mut rng);
            if !obj.value.is_finite() {
                return Err(TrainError::Diverged { epoch });
            }
            let gm = obj.grad_m.to_flat();
            let gs = obj.grad_s.to_flat();
            for i in 0..p {
                neg[i] = (-gm[i]).clamp(-SVI_GRAD_CLIP, SVI_GRAD_CLIP);
                neg[p + i] = (-gs[i]).clamp(-SVI_GRAD_CLIP, SVI_GRAD_CLIP);
            }
            adam_step(&mut adam, &mut flat, &neg, cfg.learning_rate);
            work.phi_m.assign_from_flat(&flat[..p]);
            work.phi_s.assign_from_flat(&flat[p..]);
        }
    }
    Ok(work)
}

/// Mean objective value over a dataset with fresh noise; used for progress
/// checks in tests and experiment logs.
pub fn svi_mean_objective(net: &SviNet, data: &SimDataset, rng: &mut ChaCha8Rng) -> f64 {
    let batch: Vec<(Array1<f64>, Array1<f64>)> = data.pairs().to_vec();
    svi_objective_grad(net, &batch, data.len(), rng).value
}

// ---------------------------------------------------------------------------
// Component replication
// ---------------------------------------------------------------------------

/// Expand a single-component MDN-SVI to `k_new` components. The `φ_m` heads
/// replicate with symmetry-breaking noise exactly like the conventional MDN;
/// the replicated `φ_s` entries copy the originals so the learnt parameter
/// uncertainty carries over. The fresh zero-centred alpha mean head gets the
/// prior variance.
pub fn replicate_components_svi(
    net: &SviNet,
    k_new: usize,
    rng: &mut ChaCha8Rng,
    noise_scale: f64,
) -> SviNet {
    assert_eq!(net.dims.k, 1, "replication starts from a one-component net");
    let dims = MdnDims::new(
        net.dims.x_dim,
        net.dims.theta_dim,
        k_new,
        net.dims.hidden.clone(),
    );
    let phi_m = replicate_params(&net.phi_m, &dims, rng, noise_scale, false);
    let mut phi_s = replicate_params(&net.phi_s, &dims, rng, 0.0, true);
    for k in 0..k_new {
        for v in phi_s.alpha.w.row_mut(k).iter_mut() {
            *v = (1.0 / net.lambda).ln();
        }
        phi_s.alpha.b[k] = (1.0 / net.lambda).ln();
    }
    SviNet::from_parts(dims, phi_m, phi_s, net.lambda)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

const SVI_MAGIC: &str = "lfi-mdn-svi v1";

/// Text format: header (dims and λ), then the `φ_m` block and the `φ_s`
/// block in canonical parameter order.
pub fn save_svi(net: &SviNet, path: &Path) -> Result<(), NetIoError> {
    let f = std::fs::File::create(path)?;
    let mut w = BufWriter::new(f);
    writeln!(w, "{SVI_MAGIC}")?;
    writeln!(w, "lambda {}", net.lambda)?;
    write_dims_and_params(&mut w, &net.dims, &net.phi_m)?;
    let flat = net.phi_s.to_flat();
    writeln!(w, "params_s {}", flat.len())?;
    for v in flat {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn load_svi(path: &Path) -> Result<SviNet, NetIoError> {
    let f = std::fs::File::open(path)?;
    let mut lines = BufReader::new(f).lines();
    let magic = next_line(&mut lines)?;
    if magic.trim() != SVI_MAGIC {
        return Err(NetIoError::Malformed(format!("bad magic `{magic}`")));
    }
    let lambda = parse_field(&next_line(&mut lines)?, "lambda")?
        .parse::<f64>()
        .map_err(|e| NetIoError::Malformed(format!("bad lambda: {e}")))?;
    let (dims, phi_m) = read_dims_and_params(&mut lines)?;
    let count = parse_field(&next_line(&mut lines)?, "params_s")?
        .parse::<usize>()
        .map_err(|e| NetIoError::Malformed(format!("bad params_s: {e}")))?;
    if count != dims.param_count() {
        return Err(NetIoError::Malformed("phi_s count mismatch".into()));
    }
    let mut flat = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next_line(&mut lines)?;
        flat.push(
            line.trim()
                .parse::<f64>()
                .map_err(|e| NetIoError::Malformed(format!("bad value `{line}`: {e}")))?,
        );
    }
    let phi_s = MdnParams::from_flat(&dims, &flat);
    Ok(SviNet::from_parts(dims, phi_m, phi_s, lambda))
}
