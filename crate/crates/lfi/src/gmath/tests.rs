use super::*;
use crate::rng::seeded;
use ndarray::{arr1, arr2};

const LN_2PI_T: f64 = 1.8378770664093453;

fn assert_close(a: f64, b: f64, tol: f64, what: &str) {
    assert!((a - b).abs() < tol, "{what}: {a} vs {b}");
}

// -- independent scalar density oracles (no gmath types) --------------------

fn gpdf1(x: f64, m: f64, var: f64) -> f64 {
    (-0.5 * (x - m) * (x - m) / var).exp() / (2.0 * PI * var).sqrt()
}

fn gpdf2(x: [f64; 2], m: [f64; 2], cov: [[f64; 2]; 2]) -> f64 {
    let det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
    let inv = [
        [cov[1][1] / det, -cov[0][1] / det],
        [-cov[1][0] / det, cov[0][0] / det],
    ];
    let v = [x[0] - m[0], x[1] - m[1]];
    let q = v[0] * (inv[0][0] * v[0] + inv[0][1] * v[1]) + v[1] * (inv[1][0] * v[0] + inv[1][1] * v[1]);
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

/// Composite-Simpson weights over a uniform grid with an odd point count.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n % 2 == 1 && n >= 3);
    let mut w = vec![0.0; n];
    for i in 0..n {
        w[i] = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        } * h
            / 3.0;
    }
    w
}

// -- Gaussian basics ---------------------------------------------------------

#[test]
fn logpdf_standard_normal_at_mean() {
    let g = Gaussian::scalar(0.0, 1.0);
    assert_close(g.logpdf(&arr1(&[0.0])), -0.5 * LN_2PI_T, 1e-12, "N(0,1) at 0");
}

#[test]
fn logpdf_identity_2d_at_mean() {
    let g = Gaussian::standard(2);
    assert_close(g.logpdf(&arr1(&[0.0, 0.0])), -LN_2PI_T, 1e-12, "N(0,I2) at 0");
}

#[test]
fn logpdf_matches_direct_1d_formula() {
    // N(1, 4) at 1, by the direct density formula.
    let g = Gaussian::scalar(1.0, 4.0);
    let want = gpdf1(1.0, 1.0, 4.0).ln();
    assert_close(g.logpdf(&arr1(&[1.0])), want, 1e-12, "N(1,4) at 1");
    assert_close(want, -0.91894 - 0.5 * 4.0_f64.ln(), 1e-4, "frozen value");
}

#[test]
#[should_panic(expected = "point dimension mismatch")]
fn logpdf_rejects_wrong_dimension() {
    Gaussian::standard(2).logpdf(&arr1(&[0.0]));
}

#[test]
fn cov_roundtrip_is_tight() {
    let mut rng = seeded(11);
    for _ in 0..20 {
        let d = 1 + rng.random_range(0..4);
        let cov = random_spd(d, &mut rng);
        let mean = Array1::from_iter((0..d).map(|_| rng.random_range(-2.0..2.0)));
        let g = Gaussian::from_mean_cov(mean, &cov).unwrap();
        let back = g.cov();
        for (a, b) in cov.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "roundtrip {a} vs {b}");
        }
        // log det identity against direct 2x2/LU-free determinant for small d
        let direct = direct_det(&cov);
        assert_close(g.log_det_cov(), direct.ln(), 1e-10, "log det");
    }
}

fn direct_det(a: &Array2<f64>) -> f64 {
    // Gaussian elimination determinant, independent of the Cholesky path.
    let n = a.nrows();
    let mut m = a.clone();
    let mut det = 1.0;
    for i in 0..n {
        det *= m[[i, i]];
        for r in i + 1..n {
            let f = m[[r, i]] / m[[i, i]];
            for c in i..n {
                m[[r, c]] -= f * m[[i, c]];
            }
        }
    }
    det
}

fn random_spd(d: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Array2<f64> {
    // A Aᵀ + diag jitter keeps the spectrum comfortably positive.
    let mut a = Array2::<f64>::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            a[[i, j]] = rng.random_range(-1.0..1.0);
        }
    }
    let at = a.t().to_owned();
    let mut s = a.dot(&at);
    for i in 0..d {
        s[[i, i]] += 0.5;
    }
    s
}

#[test]
fn density_integrates_to_one_1d_and_2d() {
    let g1 = Gaussian::scalar(0.4, 0.7);
    let w = simpson_weights(4001, 20.0 / 4000.0);
    let total: f64 = (0..4001)
        .map(|i| {
            let x = -10.0 + i as f64 * 20.0 / 4000.0;
            w[i] * g1.logpdf(&arr1(&[x])).exp()
        })
        .sum();
    assert_close(total, 1.0, 1e-4, "1-D normalization");

    let g2 = Gaussian::from_mean_cov(arr1(&[0.2, -0.3]), &arr2(&[[1.0, 0.4], [0.4, 0.8]])).unwrap();
    let n = 401;
    let h = 16.0 / (n as f64 - 1.0);
    let wq = simpson_weights(n, h);
    let mut total2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = arr1(&[-8.0 + i as f64 * h, -8.0 + j as f64 * h]);
            total2 += wq[i] * wq[j] * g2.logpdf(&x).exp();
        }
    }
    assert_close(total2, 1.0, 1e-4, "2-D normalization");
}

#[test]
fn sampling_matches_moments() {
    let mut rng = seeded(3);
    let g = Gaussian::scalar(0.0, 1.0);
    let xs = g.sample_n(&mut rng, 100_000);
    let mean: f64 = xs.iter().map(|x| x[0]).sum::<f64>() / xs.len() as f64;
    let var: f64 = xs.iter().map(|x| (x[0] - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 0.02, "sample mean {mean}");
    assert!((var - 1.0).abs() < 0.05, "sample var {var}");
}

// -- mixtures ----------------------------------------------------------------

#[test]
fn single_component_mixture_matches_gaussian() {
    let g = Gaussian::scalar(0.3, 1.7);
    let m = GaussianMixture::single(g.clone());
    for x in [-2.0, 0.0, 1.4] {
        assert_close(m.logpdf(&arr1(&[x])), g.logpdf(&arr1(&[x])), 1e-14, "K=1");
    }
}

#[test]
fn duplicate_components_collapse() {
    let m = GaussianMixture::new(
        vec![0.5, 0.5],
        vec![Gaussian::scalar(0.0, 1.0), Gaussian::scalar(0.0, 1.0)],
    )
    .unwrap();
    assert_close(m.logpdf(&arr1(&[0.0])), -0.5 * LN_2PI_T, 1e-12, "duplicates");
}

#[test]
fn mixture_logpdf_matches_two_term_sum() {
    let m = GaussianMixture::new(
        vec![0.5, 0.5],
        vec![Gaussian::scalar(0.0, 1.0), Gaussian::scalar(0.0, 0.01)],
    )
    .unwrap();
    let want = (0.5 * (gpdf1(0.0, 0.0, 1.0) + gpdf1(0.0, 0.0, 0.01))).ln();
    assert_close(m.logpdf(&arr1(&[0.0])), want, 1e-12, "two-term sum");
    assert_close(want, 0.78583, 1e-4, "frozen value");
}

#[test]
fn mixture_sampling_empty_and_degenerate() {
    let mut rng = seeded(5);
    let m = GaussianMixture::single(Gaussian::scalar(0.0, 1.0));
    assert!(m.sample_n(&mut rng, 0).is_empty());

    // All weight on the first component: every draw comes from it.
    let far = GaussianMixture::new(
        vec![1.0, 0.0],
        vec![Gaussian::scalar(0.0, 1e-4), Gaussian::scalar(100.0, 1e-4)],
    )
    .unwrap();
    for x in far.sample_n(&mut rng, 200) {
        assert!(x[0].abs() < 1.0, "draw {x} leaked from the zero-weight component");
    }
}

#[test]
fn mixture_sampling_moments() {
    let mut rng = seeded(8);
    let m = GaussianMixture::single(Gaussian::scalar(0.0, 1.0));
    let xs = m.sample_n(&mut rng, 100_000);
    let mean: f64 = xs.iter().map(|x| x[0]).sum::<f64>() / xs.len() as f64;
    let var: f64 = xs.iter().map(|x| (x[0] - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.05);
}

// -- ratio and product -------------------------------------------------------

#[test]
fn divide_single_gaussians_closed_form() {
    // N(0,1) / N(0,2): precision 1 - 1/2 = 1/2, so variance 2, mean 0.
    let q = GaussianMixture::single(Gaussian::scalar(0.0, 1.0));
    let p0 = Gaussian::scalar(0.0, 2.0);
    let r = divide_mixture_by_gaussian(&q, &p0).unwrap();
    assert_eq!(r.n_components(), 1);
    assert_close(r.weights()[0], 1.0, 1e-15, "weight");
    assert_close(r.components()[0].mean()[0], 0.0, 1e-12, "mean");
    assert_close(r.components()[0].cov()[[0, 0]], 2.0, 1e-12, "variance");

    // N(1, 0.5) / N(0, 1): precision 2 - 1 = 1, mean 1·(2·1 − 0) = 2.
    let q = GaussianMixture::single(Gaussian::scalar(1.0, 0.5));
    let p0 = Gaussian::scalar(0.0, 1.0);
    let r = divide_mixture_by_gaussian(&q, &p0).unwrap();
    assert_close(r.components()[0].mean()[0], 2.0, 1e-12, "mean");
    assert_close(r.components()[0].cov()[[0, 0]], 1.0, 1e-12, "variance");
}

#[test]
fn divide_identical_gaussians_fails() {
    let q = GaussianMixture::single(Gaussian::scalar(0.0, 1.0));
    let p0 = Gaussian::scalar(0.0, 1.0);
    match divide_mixture_by_gaussian(&q, &p0) {
        Err(GmathError::NonPositiveDefinite { component: 0 }) => {}
        other => panic!("expected NonPositiveDefinite, got {other:?}"),
    }
}

/// Grid oracle for the 1-D ratio: pointwise exp(log q − log p0), Simpson
/// normalization, then density comparison. All densities recomputed from the
/// raw parameters with scalar formulas, independent of the gmath path.
fn check_divide_oracle_1d(
    weights: &[f64],
    comps: &[(f64, f64)],
    p0: (f64, f64),
    tol: f64,
) {
    let q = GaussianMixture::new(
        weights.to_vec(),
        comps.iter().map(|&(m, v)| Gaussian::scalar(m, v)).collect(),
    )
    .unwrap();
    let p0g = Gaussian::scalar(p0.0, p0.1);
    let r = divide_mixture_by_gaussian(&q, &p0g).unwrap();

    let n = 24_001;
    let h = 24.0 / (n as f64 - 1.0);
    let w = simpson_weights(n, h);
    let mut ratio = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n {
        let x = -12.0 + i as f64 * h;
        let qx: f64 = weights
            .iter()
            .zip(comps)
            .map(|(a, &(m, v))| a * gpdf1(x, m, v))
            .sum();
        ratio[i] = qx / gpdf1(x, p0.0, p0.1);
        z += w[i] * ratio[i];
    }
    for i in (0..n).step_by(10) {
        let x = -12.0 + i as f64 * h;
        let got = r.logpdf(&arr1(&[x])).exp();
        assert!(
            (got - ratio[i] / z).abs() < tol,
            "ratio density at {x}: {got} vs {}",
            ratio[i] / z
        );
    }
}

#[test]
fn divide_matches_grid_oracle_examples() {
    check_divide_oracle_1d(&[1.0], &[(0.0, 1.0)], (0.0, 2.0), 1e-6);
    check_divide_oracle_1d(&[1.0], &[(1.0, 0.5)], (0.0, 1.0), 1e-6);
    check_divide_oracle_1d(&[0.3, 0.7], &[(0.5, 0.4), (-0.3, 0.9)], (0.1, 3.0), 1e-6);
}

#[test]
fn divide_matches_grid_oracle_random_1d() {
    let mut rng = seeded(17);
    for _ in 0..10 {
        let k = 1 + rng.random_range(0..3);
        let mut weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let comps: Vec<(f64, f64)> = (0..k)
            .map(|_| (rng.random_range(-0.5..0.5), rng.random_range(0.3..1.0)))
            .collect();
        let p0 = (rng.random_range(-0.5..0.5), 3.0);
        check_divide_oracle_1d(&weights, &comps, p0, 1e-6);
    }
}

#[test]
fn multiply_matches_conjugate_update() {
    // N(1, 0.5) · N(0, 1): precision 3, mean (1/3)·2 = 2/3.
    let q = GaussianMixture::single(Gaussian::scalar(1.0, 0.5));
    let r = multiply_mixture_by_gaussian(&q, &Gaussian::scalar(0.0, 1.0));
    assert_close(r.components()[0].mean()[0], 2.0 / 3.0, 1e-12, "mean");
    assert_close(r.components()[0].cov()[[0, 0]], 1.0 / 3.0, 1e-12, "variance");
}

#[test]
fn multiply_then_divide_weights_track_grid_oracle() {
    // Two-component mixture times a Gaussian, checked against pointwise
    // products on a Simpson grid.
    let weights = [0.4, 0.6];
    let comps = [(0.8, 0.5), (-0.5, 0.7)];
    let g = (0.2, 1.5);
    let q = GaussianMixture::new(
        weights.to_vec(),
        comps.iter().map(|&(m, v)| Gaussian::scalar(m, v)).collect(),
    )
    .unwrap();
    let r = multiply_mixture_by_gaussian(&q, &Gaussian::scalar(g.0, g.1));

    let n = 24_001;
    let h = 24.0 / (n as f64 - 1.0);
    let w = simpson_weights(n, h);
    let mut prod = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n {
        let x = -12.0 + i as f64 * h;
        let qx: f64 = weights
            .iter()
            .zip(&comps)
            .map(|(a, &(m, v))| a * gpdf1(x, m, v))
            .sum();
        prod[i] = qx * gpdf1(x, g.0, g.1);
        z += w[i] * prod[i];
    }
    for i in (0..n).step_by(10) {
        let x = -12.0 + i as f64 * h;
        let got = r.logpdf(&arr1(&[x])).exp();
        assert!((got - prod[i] / z).abs() < 1e-6, "product density at {x}");
    }
}

#[test]
fn divide_matches_grid_oracle_2d() {
    let mut rng = seeded(23);
    for _ in 0..3 {
        let k = 1 + rng.random_range(0..2);
        let mut weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let mut means = Vec::new();
        let mut covs = Vec::new();
        for _ in 0..k {
            means.push([rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)]);
            // Correlated SPD with eigenvalues in roughly [0.3, 1.1].
            let c = rng.random_range(-0.25..0.25);
            covs.push([[rng.random_range(0.4..0.9), c], [c, rng.random_range(0.4..0.9)]]);
        }
        let p0m = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
        let p0cov = [[3.0, 0.0], [0.0, 3.0]];

        let q = GaussianMixture::new(
            weights.clone(),
            means
                .iter()
                .zip(&covs)
                .map(|(m, c)| {
                    Gaussian::from_mean_cov(
                        arr1(&[m[0], m[1]]),
                        &arr2(&[[c[0][0], c[0][1]], [c[1][0], c[1][1]]]),
                    )
                    .unwrap()
                })
                .collect(),
        )
        .unwrap();
        let p0 = Gaussian::from_mean_cov(arr1(&[p0m[0], p0m[1]]), &arr2(&p0cov)).unwrap();
        let r = divide_mixture_by_gaussian(&q, &p0).unwrap();

        let n = 601;
        let h = 24.0 / (n as f64 - 1.0);
        let w = simpson_weights(n, h);
        let mut z = 0.0;
        let ratio_at = |x: [f64; 2]| -> f64 {
            let qx: f64 = weights
                .iter()
                .zip(means.iter().zip(&covs))
                .map(|(a, (m, c))| a * gpdf2(x, *m, *c))
                .sum();
            qx / gpdf2(x, p0m, p0cov)
        };
        for i in 0..n {
            for j in 0..n {
                let x = [-12.0 + i as f64 * h, -12.0 + j as f64 * h];
                z += w[i] * w[j] * ratio_at(x);
            }
        }
        let mut rng2 = seeded(99);
        for _ in 0..200 {
            let x = [rng2.random_range(-4.0..4.0), rng2.random_range(-4.0..4.0)];
            let got = r.logpdf(&arr1(&[x[0], x[1]])).exp();
            let want = ratio_at(x) / z;
            assert!((got - want).abs() < 1e-6, "2-D ratio at {x:?}: {got} vs {want}");
        }
    }
}

#[test]
fn mixture_moments_match_monte_carlo() {
    let m = GaussianMixture::new(
        vec![0.3, 0.7],
        vec![Gaussian::scalar(-2.0, 0.5), Gaussian::scalar(1.0, 2.0)],
    )
    .unwrap();
    let (mean, cov) = m.moments();
    // Closed form: m = 0.3·(−2) + 0.7·1 = 0.1;
    // S = 0.3(0.5+4) + 0.7(2+1) − 0.01 = 3.44.
    assert_close(mean[0], 0.1, 1e-12, "mixture mean");
    assert_close(cov[[0, 0]], 3.44, 1e-12, "mixture variance");
    let g = m.moment_matched_gaussian().unwrap();
    assert_close(g.mean()[0], 0.1, 1e-12, "matched mean");
    assert_close(g.cov()[[0, 0]], 3.44, 1e-10, "matched variance");
}

// -- KL ----------------------------------------------------------------------

#[test]
fn kl_closed_forms() {
    let p = Gaussian::scalar(0.0, 1.0);
    assert_close(kl_gaussian(&p, &p), 0.0, 1e-14, "identical");
    let q = Gaussian::scalar(1.0, 1.0);
    assert_close(kl_gaussian(&p, &q), 0.5, 1e-13, "mean shift");
    let q2 = Gaussian::scalar(0.0, 2.0);
    assert_close(kl_gaussian(&p, &q2), 0.5 * (0.5 - 1.0 + 2.0_f64.ln()), 1e-13, "variance");
}

#[test]
fn kl_nonnegative_on_random_pairs() {
    let mut rng = seeded(31);
    for _ in 0..50 {
        let d = 1 + rng.random_range(0..3);
        let p = Gaussian::from_mean_cov(
            Array1::from_iter((0..d).map(|_| rng.random_range(-2.0..2.0))),
            &random_spd(d, &mut rng),
        )
        .unwrap();
        let q = Gaussian::from_mean_cov(
            Array1::from_iter((0..d).map(|_| rng.random_range(-2.0..2.0))),
            &random_spd(d, &mut rng),
        )
        .unwrap();
        let kl = kl_gaussian(&p, &q);
        assert!(kl >= 0.0, "KL must be nonnegative, got {kl}");
        assert!(kl > 1e-6, "distinct random pairs should have positive KL");
        assert!(kl_gaussian(&p, &p).abs() < 1e-12);
    }
}

// -- moment fits --------------------------------------------------------------

#[test]
fn weighted_fit_two_point_set() {
    let samples = vec![arr1(&[-1.0]), arr1(&[1.0])];
    let g = fit_gaussian_weighted(&samples, &[0.5, 0.5]).unwrap();
    assert_close(g.mean()[0], 0.0, 1e-15, "mean");
    assert_close(g.cov()[[0, 0]], 1.0, 1e-12, "variance");
}

#[test]
fn weighted_fit_point_mass_is_degenerate() {
    let samples = vec![arr1(&[0.3]), arr1(&[0.9])];
    assert!(matches!(
        fit_gaussian_weighted(&samples, &[1.0, 0.0]),
        Err(GmathError::DegenerateSample(_))
    ));
}

#[test]
fn weighted_fit_monte_carlo() {
    let mut rng = seeded(41);
    let g = Gaussian::scalar(3.0, 2.0);
    let xs = g.sample_n(&mut rng, 100_000);
    let fit = fit_gaussian_moments(&xs).unwrap();
    assert!((fit.mean()[0] - 3.0).abs() < 0.02, "mean {}", fit.mean()[0]);
    assert!((fit.cov()[[0, 0]] - 2.0).abs() < 0.05, "var {}", fit.cov()[[0, 0]]);
}

#[test]
fn uniform_weights_reproduce_unweighted_fit_bitwise() {
    let mut rng = seeded(43);
    let xs: Vec<_> = (0..37).map(|_| arr1(&[rng.random_range(-1.0..1.0f64), rng.random_range(0.0..2.0)])).collect();
    let w = vec![1.0 / 37.0; 37];
    let a = fit_gaussian_weighted(&xs, &w).unwrap();
    let b = fit_gaussian_moments(&xs).unwrap();
    assert_eq!(a.mean(), b.mean());
    assert_eq!(a.prec_chol(), b.prec_chol());
}

// -- EM ------------------------------------------------------------------------

#[test]
fn em_single_component_is_moment_fit() {
    let mut rng = seeded(53);
    let xs = Gaussian::scalar(0.0, 1.0).sample_n(&mut rng, 400);
    let mix = fit_mixture_em(&xs, 1, &mut rng, 1).unwrap();
    let direct = fit_gaussian_moments(&xs).unwrap();
    assert_close(mix.components()[0].mean()[0], direct.mean()[0], 1e-9, "mean");
    assert_close(
        mix.components()[0].cov()[[0, 0]],
        direct.cov()[[0, 0]],
        1e-9,
        "variance",
    );
}

#[test]
fn em_separates_two_clusters() {
    let mut rng = seeded(59);
    let mut xs = Gaussian::scalar(-10.0, 1.0).sample_n(&mut rng, 500);
    xs.extend(Gaussian::scalar(10.0, 1.0).sample_n(&mut rng, 500));
    let mix = fit_mixture_em(&xs, 2, &mut rng, 5).unwrap();
    let mut means: Vec<f64> = mix.components().iter().map(|c| c.mean()[0]).collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((means[0] + 10.0).abs() < 0.2, "left mean {}", means[0]);
    assert!((means[1] - 10.0).abs() < 0.2, "right mean {}", means[1]);
    for w in mix.weights() {
        assert!((w - 0.5).abs() < 0.05, "weight {w}");
    }
}

#[test]
fn em_loglik_is_nondecreasing() {
    let mut rng = seeded(61);
    let mut xs = Gaussian::scalar(-2.0, 0.5).sample_n(&mut rng, 300);
    xs.extend(Gaussian::scalar(2.0, 1.5).sample_n(&mut rng, 300));
    let (_, trace) = fit_mixture_em_with_trace(&xs, 2, &mut rng, 1).unwrap();
    for pair in trace.windows(2) {
        assert!(
            pair[1] >= pair[0] - 1e-9,
            "log-likelihood decreased: {} -> {}",
            pair[0],
            pair[1]
        );
    }
}

// -- uniform box ----------------------------------------------------------------

#[test]
fn uniform_box_density_and_sampling() {
    let b = UniformBoxPrior::new(arr1(&[-1.0, 0.0]), arr1(&[1.0, 4.0]));
    assert_close(b.volume(), 8.0, 1e-15, "volume");
    assert_close(b.logpdf(&arr1(&[0.0, 2.0])), -(8.0_f64.ln()), 1e-15, "inside");
    assert_eq!(b.logpdf(&arr1(&[0.0, 4.1])), f64::NEG_INFINITY);
    let mut rng = seeded(67);
    for _ in 0..200 {
        assert!(b.contains(&b.sample(&mut rng)));
    }
}

#[test]
fn normal_cdf_reference_values() {
    assert_close(normal_cdf(0.0, 0.0, 1.0), 0.5, 1e-15, "median");
    assert_close(normal_cdf(1.959963984540054, 0.0, 1.0), 0.975, 1e-9, "97.5%");
}
