//! Mixture density networks.
//!
//! A feedforward network with tanh hidden layers maps an observation `x` to
//! the parameters of a Gaussian mixture over `θ`: mixing coefficients through
//! a softmax, per-component means linearly, and per-component precision
//! factors as an upper-triangular `U_k` whose diagonal passes through `exp`
//! (so `S_k⁻¹ = U_kᵀU_k` is SPD by construction). The diagonal head doubles
//! as the log-determinant: `−½ log det S_k = Σ_i d_{k,i}` where `d_k` is the
//! pre-`exp` diagonal activation.
//!
//! Gradients are reverse-mode, written out by hand; `tests` checks every
//! coordinate against central finite differences.

use crate::dataset::SimDataset;
use crate::gmath::{Gaussian, GaussianMixture};
use crate::linalg::logsumexp;
use crate::opt::{adam_step, AdamState, ADAM_DEFAULT_LR};
use crate::rng::{seeded, substream};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

const LN_2PI: f64 = 1.837_877_066_409_345_3;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training diverged at epoch {epoch}: objective became non-finite")]
    Diverged { epoch: usize },
}

#[derive(Debug, Error)]
pub enum NetIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed parameter file: {0}")]
    Malformed(String),
}

/// Architecture: input size, parameter size, component count, hidden widths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MdnDims {
    pub x_dim: usize,
    pub theta_dim: usize,
    pub k: usize,
    pub hidden: Vec<usize>,
}

impl MdnDims {
    pub fn new(x_dim: usize, theta_dim: usize, k: usize, hidden: Vec<usize>) -> Self {
        assert!(x_dim >= 1 && theta_dim >= 1 && k >= 1);
        Self {
            x_dim,
            theta_dim,
            k,
            hidden,
        }
    }

    /// Number of strictly-upper-triangular entries of a `U_k`.
    pub fn n_utri(&self) -> usize {
        self.theta_dim * (self.theta_dim - 1) / 2
    }

    /// Width of the feature vector `y` the heads read (last hidden layer, or
    /// the input itself for a linear MDN).
    pub fn feature_dim(&self) -> usize {
        *self.hidden.last().unwrap_or(&self.x_dim)
    }

    pub fn param_count(&self) -> usize {
        let mut n = 0;
        let mut inp = self.x_dim;
        for &h in &self.hidden {
            n += h * inp + h;
            inp = h;
        }
        let f = self.feature_dim();
        n += self.k * f + self.k; // alpha head
        n += self.k * (self.theta_dim * f + self.theta_dim) * 2; // mean + diag heads
        n += self.k * (self.n_utri() * f + self.n_utri()); // utri heads
        n
    }
}

/// One affine map, `out = w·z + b`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    fn zeros(out: usize, inp: usize) -> Self {
        Self {
            w: Array2::zeros((out, inp)),
            b: Array1::zeros(out),
        }
    }

    fn apply(&self, z: &Array1<f64>) -> Array1<f64> {
        self.w.dot(z) + &self.b
    }

    fn map(&self, f: &mut impl FnMut(f64) -> f64) -> Self {
        Self {
            w: self.w.mapv(|x| f(x)),
            b: self.b.mapv(|x| f(x)),
        }
    }
}

/// Output heads for one mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentHead {
    pub mean: Dense,
    pub diag_u: Dense,
    pub utri_u: Dense,
}

/// Every adjustable parameter of an MDN, in the canonical order used by the
/// flat vector and the on-disk format: hidden layers, alpha head, then per
/// component the mean, diagonal and upper-triangle heads.
#[derive(Debug, Clone, PartialEq)]
pub struct MdnParams {
    pub hidden: Vec<Dense>,
    pub alpha: Dense,
    pub comps: Vec<ComponentHead>,
}

impl MdnParams {
    pub fn zeros(dims: &MdnDims) -> Self {
        let mut hidden = Vec::with_capacity(dims.hidden.len());
        let mut inp = dims.x_dim;
        for &h in &dims.hidden {
            hidden.push(Dense::zeros(h, inp));
            inp = h;
        }
        let f = dims.feature_dim();
        let comps = (0..dims.k)
            .map(|_| ComponentHead {
                mean: Dense::zeros(dims.theta_dim, f),
                diag_u: Dense::zeros(dims.theta_dim, f),
                utri_u: Dense::zeros(dims.n_utri(), f),
            })
            .collect();
        Self {
            hidden,
            alpha: Dense::zeros(dims.k, f),
            comps,
        }
    }

    fn for_each_dense(&self, mut f: impl FnMut(&Dense)) {
        for d in &self.hidden {
            f(d);
        }
        f(&self.alpha);
        for c in &self.comps {
            f(&c.mean);
            f(&c.diag_u);
            f(&c.utri_u);
        }
    }

    fn for_each_dense_mut(&mut self, mut f: impl FnMut(&mut Dense)) {
        for d in &mut self.hidden {
            f(d);
        }
        f(&mut self.alpha);
        for c in &mut self.comps {
            f(&mut c.mean);
            f(&mut c.diag_u);
            f(&mut c.utri_u);
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.for_each_dense(|d| {
            out.extend(d.w.iter());
            out.extend(d.b.iter());
        });
        out
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        let mut pos = 0;
        self.for_each_dense_mut(|d| {
            for v in d.w.iter_mut() {
                *v = flat[pos];
                pos += 1;
            }
            for v in d.b.iter_mut() {
                *v = flat[pos];
                pos += 1;
            }
        });
        assert_eq!(pos, flat.len(), "flat parameter count mismatch");
    }

    pub fn from_flat(dims: &MdnDims, flat: &[f64]) -> Self {
        let mut p = Self::zeros(dims);
        p.assign_from_flat(flat);
        p
    }

    /// Elementwise map over every parameter.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        let mut out = self.clone();
        out.for_each_dense_mut(|d| *d = d.map(&mut f));
        out
    }
}

/// Conventional mixture density network.
#[derive(Debug, Clone, PartialEq)]
pub struct MdnNet {
    dims: MdnDims,
    params: MdnParams,
}

impl MdnNet {
    pub fn new(dims: MdnDims, params: MdnParams) -> Self {
        assert_eq!(
            params.to_flat().len(),
            dims.param_count(),
            "parameter shape does not match architecture"
        );
        Self { dims, params }
    }

    /// All-zero parameters: uniform mixing, zero means, identity factors.
    pub fn zeros(dims: MdnDims) -> Self {
        let params = MdnParams::zeros(&dims);
        Self { dims, params }
    }

    /// Random initialization: weights iid `N(0, 1/fan_in)`, biases zero, so
    /// initial component covariances are the identity on whitened data.
    pub fn init_random(dims: MdnDims, rng: &mut ChaCha8Rng) -> Self {
        fn init_dense(d: &mut Dense, rng: &mut ChaCha8Rng) {
            let fan_in = d.w.ncols() as f64;
            let std = (1.0 / fan_in).sqrt();
            for v in d.w.iter_mut() {
                *v = std * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let mut params = MdnParams::zeros(&dims);
        for d in &mut params.hidden {
            init_dense(d, rng);
        }
        init_dense(&mut params.alpha, rng);
        for c in &mut params.comps {
            init_dense(&mut c.mean, rng);
            init_dense(&mut c.diag_u, rng);
            init_dense(&mut c.utri_u, rng);
        }
        Self { dims, params }
    }

    pub fn dims(&self) -> &MdnDims {
        &self.dims
    }

    pub fn params(&self) -> &MdnParams {
        &self.params
    }

    /// Mixture parameters at input `x`.
    pub fn forward(&self, x: &Array1<f64>) -> GaussianMixture {
        forward_mixture(&self.dims, &self.params, x)
    }

    /// `log q_φ(θ | x)`, using the log-determinant shortcut.
    pub fn logprob(&self, theta: &Array1<f64>, x: &Array1<f64>) -> f64 {
        let tr = forward_trace(&self.dims, &self.params, x);
        log_prob_from_trace(&self.dims, &tr, theta).0
    }

    /// Mean log probability over a batch and its gradient with respect to
    /// every parameter.
    pub fn grad(&self, batch: &[(Array1<f64>, Array1<f64>)]) -> (f64, MdnParams) {
        grad_of(&self.dims, &self.params, batch)
    }
}

pub(crate) fn grad_of(
    dims: &MdnDims,
    params: &MdnParams,
    batch: &[(Array1<f64>, Array1<f64>)],
) -> (f64, MdnParams) {
    assert!(!batch.is_empty(), "gradient needs a nonempty batch");
    let mut grad = MdnParams::zeros(dims);
    let mut total = 0.0;
    let scale = 1.0 / batch.len() as f64;
    for (theta, x) in batch {
        total += backprop_sample(dims, params, theta, x, scale, &mut grad);
    }
    (total * scale, grad)
}

// ---------------------------------------------------------------------------
// Forward
// ---------------------------------------------------------------------------

pub(crate) struct ForwardTrace {
    /// Post-tanh activations per hidden layer.
    pub h: Vec<Array1<f64>>,
    pub log_alpha: Array1<f64>,
    pub alpha: Array1<f64>,
    /// Per component: mean, pre-exp diagonal, upper-triangle entries.
    pub comps: Vec<(Array1<f64>, Array1<f64>, Array1<f64>)>,
}

impl ForwardTrace {
    pub fn feature<'a>(&'a self, x: &'a Array1<f64>) -> &'a Array1<f64> {
        self.h.last().unwrap_or(x)
    }
}

pub(crate) fn forward_trace(dims: &MdnDims, params: &MdnParams, x: &Array1<f64>) -> ForwardTrace {
    assert_eq!(x.len(), dims.x_dim, "input dimension mismatch");
    let mut h = Vec::with_capacity(params.hidden.len());
    let mut z = x;
    for layer in &params.hidden {
        let a = layer.apply(z).mapv(f64::tanh);
        h.push(a);
        z = h.last().unwrap();
    }
    let y = z;
    let z_alpha = params.alpha.apply(y);
    let lse = logsumexp(z_alpha.as_slice().unwrap());
    let log_alpha = z_alpha.mapv(|v| v - lse);
    let alpha = log_alpha.mapv(f64::exp);
    let comps = params
        .comps
        .iter()
        .map(|c| (c.mean.apply(y), c.diag_u.apply(y), c.utri_u.apply(y)))
        .collect();
    ForwardTrace {
        h,
        log_alpha,
        alpha,
        comps,
    }
}

/// Assemble `U_k` from the diagonal (post-exp) and upper-triangle activations.
/// Strictly-lower entries are identically zero. Upper entries are stored
/// row-major: (0,1), (0,2), …, (1,2), ….
fn assemble_u(d: usize, diag_pre_exp: &Array1<f64>, utri: &Array1<f64>) -> Array2<f64> {
    let mut u = Array2::zeros((d, d));
    for i in 0..d {
        u[[i, i]] = diag_pre_exp[i].exp();
    }
    let mut pos = 0;
    for i in 0..d {
        for j in i + 1..d {
            u[[i, j]] = utri[pos];
            pos += 1;
        }
    }
    u
}

pub(crate) fn forward_mixture(
    dims: &MdnDims,
    params: &MdnParams,
    x: &Array1<f64>,
) -> GaussianMixture {
    let tr = forward_trace(dims, params, x);
    let comps = tr
        .comps
        .iter()
        .map(|(m, d, o)| Gaussian::new(m.clone(), assemble_u(dims.theta_dim, d, o)))
        .collect();
    GaussianMixture::new(tr.alpha.to_vec(), comps)
        .expect("softmax weights are positive and normalized")
}

/// Per-component log densities and the total log probability at `theta`.
/// Returns `(log_prob, per-component joint terms ℓ_k)`.
fn log_prob_from_trace(
    dims: &MdnDims,
    tr: &ForwardTrace,
    theta: &Array1<f64>,
) -> (f64, Vec<f64>) {
    assert_eq!(theta.len(), dims.theta_dim, "parameter dimension mismatch");
    let d = dims.theta_dim;
    let mut ell = Vec::with_capacity(dims.k);
    for (k, (m, dg, o)) in tr.comps.iter().enumerate() {
        let u = assemble_u(d, dg, o);
        let v = theta - m;
        let uv = u.dot(&v);
        // −½ log det S_k = Σ_i d_{k,i}: the diagonal head pre-activation.
        let lp = -0.5 * d as f64 * LN_2PI + dg.sum() - 0.5 * uv.dot(&uv);
        ell.push(tr.log_alpha[k] + lp);
    }
    (logsumexp(&ell), ell)
}

// ---------------------------------------------------------------------------
// Backward
// ---------------------------------------------------------------------------

/// Accumulate `scale · ∂ log q(θ|x) / ∂params` into `grad`; returns the
/// sample's log probability.
fn backprop_sample(
    dims: &MdnDims,
    params: &MdnParams,
    theta: &Array1<f64>,
    x: &Array1<f64>,
    scale: f64,
    grad: &mut MdnParams,
) -> f64 {
    let d = dims.theta_dim;
    let tr = forward_trace(dims, params, x);
    let (logp, ell) = log_prob_from_trace(dims, &tr, theta);
    let y = tr.feature(x).clone();

    // Responsibilities r_k = exp(ℓ_k − L).
    let r: Vec<f64> = ell.iter().map(|e| (e - logp).exp()).collect();

    // Alpha head: ∂L/∂z_α = r − α.
    let g_zalpha = Array1::from_iter(r.iter().zip(tr.alpha.iter()).map(|(rk, ak)| rk - ak));
    accumulate_dense(&mut grad.alpha, &g_zalpha, &y, scale);
    let mut g_y = params.alpha.w.t().dot(&g_zalpha);

    for k in 0..dims.k {
        if r[k] == 0.0 {
            // Fully suppressed component (possibly −inf ℓ_k); no gradient.
            continue;
        }
        let (m, dg, o) = &tr.comps[k];
        let u = assemble_u(d, dg, o);
        let v = theta - m;
        let uv = u.dot(&v);

        // ∂lp/∂m = Uᵀ(Uv); ∂lp/∂d_i = 1 − (Uv)_i v_i U_ii; ∂lp/∂o_(i,j) = −(Uv)_i v_j.
        let g_m = u.t().dot(&uv).mapv(|g| g * r[k]);
        let g_d = Array1::from_iter((0..d).map(|i| r[k] * (1.0 - uv[i] * v[i] * u[[i, i]])));
        let mut g_o = Array1::zeros(dims.n_utri());
        let mut pos = 0;
        for i in 0..d {
            for j in i + 1..d {
                g_o[pos] = -r[k] * uv[i] * v[j];
                pos += 1;
            }
        }

        let head = &params.comps[k];
        let gh = &mut grad.comps[k];
        accumulate_dense(&mut gh.mean, &g_m, &y, scale);
        accumulate_dense(&mut gh.diag_u, &g_d, &y, scale);
        accumulate_dense(&mut gh.utri_u, &g_o, &y, scale);
        g_y = g_y + head.mean.w.t().dot(&g_m) + head.diag_u.w.t().dot(&g_d)
            + head.utri_u.w.t().dot(&g_o);
    }

    backprop_hidden(params, &tr.h, x, g_y, scale, grad);
    logp
}

/// Push a feature gradient back through the tanh stack, accumulating layer
/// parameter gradients.
pub(crate) fn backprop_hidden(
    params: &MdnParams,
    h: &[Array1<f64>],
    x: &Array1<f64>,
    mut g_h: Array1<f64>,
    scale: f64,
    grad: &mut MdnParams,
) {
    for l in (0..params.hidden.len()).rev() {
        let g_pre = Array1::from_iter(
            g_h.iter()
                .zip(h[l].iter())
                .map(|(g, a)| g * (1.0 - a * a)),
        );
        let input = if l == 0 { x } else { &h[l - 1] };
        accumulate_dense(&mut grad.hidden[l], &g_pre, input, scale);
        g_h = params.hidden[l].w.t().dot(&g_pre);
    }
}

pub(crate) fn accumulate_dense(g: &mut Dense, g_out: &Array1<f64>, input: &Array1<f64>, scale: f64) {
    for (i, go) in g_out.iter().enumerate() {
        let gs = go * scale;
        for (j, z) in input.iter().enumerate() {
            g.w[[i, j]] += gs * z;
        }
        g.b[i] += gs;
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

/// Minibatch training settings. `holdout_fraction` reserves a tail fraction
/// of the (seed-shuffled) data from training; the default path uses every
/// sample and no early stopping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub minibatch_size: usize,
    pub n_epochs: usize,
    pub rng_seed: u64,
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: ADAM_DEFAULT_LR,
            minibatch_size: 100,
            n_epochs: 1000,
            rng_seed: 0,
            holdout_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn with_epochs(mut self, n: usize) -> Self {
        self.n_epochs = n;
        self
    }

    pub(crate) fn validate(&self) {
        assert!(self.learning_rate > 0.0, "learning rate must be positive");
        assert!(self.minibatch_size >= 1, "minibatch size must be >= 1");
        assert!(
            (0.0..1.0).contains(&self.holdout_fraction),
            "holdout fraction must lie in [0, 1)"
        );
    }
}

/// Maximum-likelihood training with minibatch Adam over shuffled epochs.
/// Bit-reproducible for a fixed seed.
pub fn train_mdn(net: &MdnNet, data: &SimDataset, cfg: &TrainConfig) -> Result<MdnNet, TrainError> {
    cfg.validate();
    assert!(!data.is_empty(), "training data must be nonempty");
    let dims = net.dims.clone();
    let mut flat = net.params.to_flat();
    let mut params = net.params.clone();
    let mut adam = AdamState::new(flat.len());
    let mut rng = seeded(cfg.rng_seed);

    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_train = data.len() - (cfg.holdout_fraction * data.len() as f64).floor() as usize;
    let mut train_idx: Vec<usize> = order[..n_train].to_vec();

    let mut neg = vec![0.0; flat.len()];
    for epoch in 0..cfg.n_epochs {
        train_idx.shuffle(&mut rng);
        for chunk in train_idx.chunks(cfg.minibatch_size) {
            let batch: Vec<(Array1<f64>, Array1<f64>)> = chunk
                .iter()
                .map(|&i| data.pairs()[i].clone())
                .collect();
            let (value, grad) = grad_of(&dims, &params, &batch);
            if !value.is_finite() {
                return Err(TrainError::Diverged { epoch });
            }
            let gflat = grad.to_flat();
            for (n, g) in neg.iter_mut().zip(&gflat) {
                *n = -g;
            }
            adam_step(&mut adam, &mut flat, &neg, cfg.learning_rate);
            params.assign_from_flat(&flat);
        }
    }
    Ok(MdnNet::new(dims, params))
}

/// Mean log probability of a dataset under the network.
pub fn mean_logprob(net: &MdnNet, data: &SimDataset) -> f64 {
    data.pairs()
        .iter()
        .map(|(t, x)| net.logprob(t, x))
        .sum::<f64>()
        / data.len() as f64
}

// ---------------------------------------------------------------------------
// Component replication
// ---------------------------------------------------------------------------

/// Expand a single-component network to `k_new` components: per-component
/// heads are copies of the original plus iid `N(0, noise_scale²)` entries to
/// break symmetry; the alpha head starts at zeros-plus-noise (near-uniform
/// mixing); hidden layers are copied unchanged.
pub fn replicate_components(
    net: &MdnNet,
    k_new: usize,
    rng: &mut ChaCha8Rng,
    noise_scale: f64,
) -> MdnNet {
    assert_eq!(net.dims.k, 1, "replication starts from a one-component net");
    assert!(k_new >= 1);
    let dims = MdnDims::new(
        net.dims.x_dim,
        net.dims.theta_dim,
        k_new,
        net.dims.hidden.clone(),
    );
    let params = replicate_params(&net.params, &dims, rng, noise_scale, false);
    MdnNet::new(dims, params)
}

/// Shared replication logic; `copy_alpha_rows` copies the original alpha head
/// rows instead of zeroing them (used for SVI log-variances, which keep their
/// learnt values).
pub(crate) fn replicate_params(
    params: &MdnParams,
    dims: &MdnDims,
    rng: &mut ChaCha8Rng,
    noise_scale: f64,
    copy_alpha_rows: bool,
) -> MdnParams {
    fn noisy(d: &Dense, noise_scale: f64, rng: &mut ChaCha8Rng) -> Dense {
        let mut n = d.clone();
        for v in n.w.iter_mut() {
            *v += noise_scale * rng.sample::<f64, _>(StandardNormal);
        }
        for v in n.b.iter_mut() {
            *v += noise_scale * rng.sample::<f64, _>(StandardNormal);
        }
        n
    }
    let mut out = MdnParams::zeros(dims);
    out.hidden = params.hidden.clone();
    let src = &params.comps[0];
    for k in 0..dims.k {
        out.comps[k] = ComponentHead {
            mean: noisy(&src.mean, noise_scale, rng),
            diag_u: noisy(&src.diag_u, noise_scale, rng),
            utri_u: noisy(&src.utri_u, noise_scale, rng),
        };
        if copy_alpha_rows {
            out.alpha.w.row_mut(k).assign(&params.alpha.w.row(0));
            out.alpha.b[k] = params.alpha.b[0];
        } else {
            for v in out.alpha.w.row_mut(k).iter_mut() {
                *v = noise_scale * rng.sample::<f64, _>(StandardNormal);
            }
            out.alpha.b[k] = noise_scale * rng.sample::<f64, _>(StandardNormal);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

const MDN_MAGIC: &str = "lfi-mdn v1";

/// Write the network as a text parameter file: a header with the dimensions
/// followed by one value per line in canonical parameter order. Values use
/// Rust's shortest round-trip float formatting, so load/save is bit-exact.
pub fn save_mdn(net: &MdnNet, path: &Path) -> Result<(), NetIoError> {
    let f = std::fs::File::create(path)?;
    let mut w = BufWriter::new(f);
    writeln!(w, "{MDN_MAGIC}")?;
    write_dims_and_params(&mut w, &net.dims, &net.params)?;
    Ok(())
}

pub(crate) fn write_dims_and_params(
    w: &mut impl Write,
    dims: &MdnDims,
    params: &MdnParams,
) -> Result<(), NetIoError> {
    writeln!(w, "x_dim {}", dims.x_dim)?;
    writeln!(w, "theta_dim {}", dims.theta_dim)?;
    writeln!(w, "components {}", dims.k)?;
    write!(w, "hidden")?;
    for h in &dims.hidden {
        write!(w, " {h}")?;
    }
    writeln!(w)?;
    let flat = params.to_flat();
    writeln!(w, "params {}", flat.len())?;
    for v in flat {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn load_mdn(path: &Path) -> Result<MdnNet, NetIoError> {
    let f = std::fs::File::open(path)?;
    let mut lines = BufReader::new(f).lines();
    let magic = next_line(&mut lines)?;
    if magic.trim() != MDN_MAGIC {
        return Err(NetIoError::Malformed(format!("bad magic `{magic}`")));
    }
    let (dims, params) = read_dims_and_params(&mut lines)?;
    Ok(MdnNet::new(dims, params))
}

pub(crate) fn next_line(
    lines: &mut std::io::Lines<BufReader<std::fs::File>>,
) -> Result<String, NetIoError> {
    lines
        .next()
        .ok_or_else(|| NetIoError::Malformed("unexpected end of file".into()))?
        .map_err(NetIoError::from)
}

pub(crate) fn parse_field(line: &str, key: &str) -> Result<String, NetIoError> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(NetIoError::Malformed(format!("expected `{key}` in `{line}`")));
    }
    Ok(it.collect::<Vec<_>>().join(" "))
}

pub(crate) fn read_dims_and_params(
    lines: &mut std::io::Lines<BufReader<std::fs::File>>,
) -> Result<(MdnDims, MdnParams), NetIoError> {
    let parse_usize = |s: String| {
        s.trim()
            .parse::<usize>()
            .map_err(|e| NetIoError::Malformed(format!("bad integer: {e}")))
    };
    let x_dim = parse_usize(parse_field(&next_line(lines)?, "x_dim")?)?;
    let theta_dim = parse_usize(parse_field(&next_line(lines)?, "theta_dim")?)?;
    let k = parse_usize(parse_field(&next_line(lines)?, "components")?)?;
    let hidden_s = parse_field(&next_line(lines)?, "hidden")?;
    let hidden = hidden_s
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| NetIoError::Malformed(format!("bad hidden sizes: {e}")))?;
    let dims = MdnDims::new(x_dim, theta_dim, k, hidden);
    let count = parse_usize(parse_field(&next_line(lines)?, "params")?)?;
    if count != dims.param_count() {
        return Err(NetIoError::Malformed(format!(
            "parameter count {count} does not match architecture ({})",
            dims.param_count()
        )));
    }
    let mut flat = Vec::with_capacity(count);
    for _ in 0..count {
        let line = next_line(lines)?;
        flat.push(
            line.trim()
                .parse::<f64>()
                .map_err(|e| NetIoError::Malformed(format!("bad value `{line}`: {e}")))?,
        );
    }
    Ok((dims.clone(), MdnParams::from_flat(&dims, &flat)))
}

/// Deterministic per-call training seeds derived from a base seed.
pub fn train_seed(base: u64, stage: u64) -> u64 {
    use rand::RngCore;
    substream(base, stage).next_u64()
}
