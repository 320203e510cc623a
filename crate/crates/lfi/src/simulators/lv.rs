//! Lotka–Volterra predator–prey model: a Markov jump process over predator
//! count X and prey count Y with four reactions,
//!
//! ```text
//! X → X+1  at rate θ₁XY      (predator born)
//! X → X−1  at rate θ₂X       (predator dies)
//! Y → Y+1  at rate θ₃Y       (prey born)
//! Y → Y−1  at rate θ₄XY      (prey eaten)
//! ```
//!
//! simulated exactly with Gillespie's algorithm from X=50, Y=100 over 30
//! time units, recorded every 0.2 (151 values per series). The data vector
//! is 9 summary statistics normalized by pilot-run means and standard
//! deviations. Inference runs in the log domain: the simulator takes log θ
//! and the prior is a flat box on log θ ∈ [−5, 2]⁴.

use super::{
    gillespie_on_grid, open_lines, read_data_line, read_vector, write_vector, SimError, Simulator,
};
use crate::gmath::UniformBoxPrior;
use crate::rng::substream;
use ndarray::{arr1, Array1};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::path::Path;

pub const LV_MAX_EVENTS: usize = 100_000;
pub const LV_SERIES_LEN: usize = 151;
const LV_T_MAX: f64 = 30.0;
const LV_RECORD_EVERY: f64 = 0.2;

/// One exact simulation; errors with `Exploded` past 10⁵ reaction events.
pub fn gillespie_lv(
    theta: &[f64; 4],
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<u32>, Vec<u32>), SimError> {
    assert!(theta.iter().all(|&t| t >= 0.0), "rates must be nonnegative");
    let out = gillespie_on_grid(
        (50u32, 100u32),
        |&(x, y): &(u32, u32)| {
            let (xf, yf) = (x as f64, y as f64);
            [
                theta[0] * xf * yf,
                theta[1] * xf,
                theta[2] * yf,
                theta[3] * xf * yf,
            ]
        },
        |s: &mut (u32, u32), r| match r {
            0 => s.0 += 1,
            1 => s.0 -= 1,
            2 => s.1 += 1,
            _ => s.1 -= 1,
        },
        LV_T_MAX,
        LV_RECORD_EVERY,
        LV_MAX_EVENTS,
        rng,
    )?;
    Ok(out.records.into_iter().unzip())
}

/// The 9 statistics, in order: mean of each series, log variance of each
/// series (floored at log 1e-12), autocorrelations at lags 1 and 2 of each
/// series, and the cross-correlation. Correlations of a zero-variance series
/// are defined as 0 so degenerate simulations stay usable as training data.
pub fn lv_summary(xs: &[u32], ys: &[u32]) -> Array1<f64> {
    assert_eq!(xs.len(), LV_SERIES_LEN, "series length mismatch");
    assert_eq!(ys.len(), LV_SERIES_LEN, "series length mismatch");
    let xf: Vec<f64> = xs.iter().map(|&v| v as f64).collect();
    let yf: Vec<f64> = ys.iter().map(|&v| v as f64).collect();
    let (mx, vx) = mean_var(&xf);
    let (my, vy) = mean_var(&yf);
    arr1(&[
        mx,
        my,
        vx.max(1e-12).ln(),
        vy.max(1e-12).ln(),
        autocorr(&xf, mx, vx, 1),
        autocorr(&xf, mx, vx, 2),
        autocorr(&yf, my, vy, 1),
        autocorr(&yf, my, vy, 2),
        crosscorr(&xf, &yf, mx, my, vx, vy),
    ])
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

// Biased (divide-by-N) autocovariance normalized by lag 0; bounded in
// [−1, 1] and stable for short series.
fn autocorr(v: &[f64], mean: f64, var: f64, lag: usize) -> f64 {
    if var <= 0.0 {
        return 0.0;
    }
    let n = v.len();
    let c: f64 = (0..n - lag)
        .map(|t| (v[t] - mean) * (v[t + lag] - mean))
        .sum::<f64>()
        / n as f64;
    c / var
}

fn crosscorr(x: &[f64], y: &[f64], mx: f64, my: f64, vx: f64, vy: f64) -> f64 {
    if vx <= 0.0 || vy <= 0.0 {
        return 0.0;
    }
    let n = x.len() as f64;
    let c: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mx) * (b - my))
        .sum::<f64>()
        / n;
    c / (vx * vy).sqrt()
}

/// Per-statistic normalization constants from a pilot run.
#[derive(Debug, Clone, PartialEq)]
pub struct LvPilot {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

/// Elementwise `(s − μ) / σ`.
pub fn pilot_normalize(stats: &Array1<f64>, pilot: &LvPilot) -> Result<Array1<f64>, SimError> {
    assert_eq!(stats.len(), pilot.mean.len(), "statistic count mismatch");
    if pilot.std.iter().any(|&s| !(s > 0.0)) {
        return Err(SimError::PilotDegenerate(
            "pilot standard deviation is zero".into(),
        ));
    }
    Ok((stats - &pilot.mean) / &pilot.std)
}

/// The benchmark instance: pilot constants and the normalized observation
/// generated at the true rates.
#[derive(Debug, Clone)]
pub struct LvProblem {
    pub pilot: LvPilot,
    pub x_o: Array1<f64>,
}

impl LvProblem {
    pub const THETA_TRUE: [f64; 4] = [0.01, 0.5, 1.0, 0.01];
    pub const N_STATS: usize = 9;

    /// Flat prior over log θ.
    pub fn prior() -> UniformBoxPrior {
        UniformBoxPrior::new(arr1(&[-5.0; 4]), arr1(&[2.0; 4]))
    }

    pub fn theta_true_log() -> Array1<f64> {
        arr1(&Self::THETA_TRUE.map(f64::ln))
    }

    /// Build the instance under `seed`: `n_pilot` prior simulations for the
    /// normalization constants (exploded draws resampled), then the
    /// observation at the true parameters.
    pub fn generate(seed: u64, n_pilot: usize) -> Self {
        let prior = Self::prior();
        let mut rng = substream(seed, 0x10);
        let mut summaries = Vec::with_capacity(n_pilot);
        while summaries.len() < n_pilot {
            let log_theta = prior.sample(&mut rng);
            let theta = [
                log_theta[0].exp(),
                log_theta[1].exp(),
                log_theta[2].exp(),
                log_theta[3].exp(),
            ];
            match gillespie_lv(&theta, &mut rng) {
                Ok((xs, ys)) => summaries.push(lv_summary(&xs, &ys)),
                Err(SimError::Exploded { .. }) => continue,
                Err(e) => unreachable!("LV simulation only explodes: {e}"),
            }
        }
        let mut mean = Array1::zeros(Self::N_STATS);
        for s in &summaries {
            mean += &(s / n_pilot as f64);
        }
        let mut var = Array1::<f64>::zeros(Self::N_STATS);
        for s in &summaries {
            let d = s - &mean;
            var += &(&d * &d / n_pilot as f64);
        }
        let pilot = LvPilot {
            mean,
            std: var.mapv(f64::sqrt),
        };

        let mut rng = substream(seed, 0x11);
        let raw = loop {
            match gillespie_lv(&Self::THETA_TRUE, &mut rng) {
                Ok((xs, ys)) => break lv_summary(&xs, &ys),
                Err(_) => continue,
            }
        };
        let x_o = pilot_normalize(&raw, &pilot).expect("pilot spread is positive");
        Self { pilot, x_o }
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            w,
            "# lv problem theta_true={:?} rows=pilot_mean(9),pilot_std(9),x_o(9) order=meanX,meanY,logvarX,logvarY,acf1X,acf2X,acf1Y,acf2Y,ccfXY",
            Self::THETA_TRUE
        )?;
        write_vector(&mut w, &self.pilot.mean)?;
        write_vector(&mut w, &self.pilot.std)?;
        write_vector(&mut w, &self.x_o)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let mut lines = open_lines(path)?;
        let mean = read_vector(&read_data_line(&mut lines)?, Self::N_STATS)?;
        let std = read_vector(&read_data_line(&mut lines)?, Self::N_STATS)?;
        let x_o = read_vector(&read_data_line(&mut lines)?, Self::N_STATS)?;
        Ok(Self {
            pilot: LvPilot { mean, std },
            x_o,
        })
    }
}

impl Simulator for LvProblem {
    fn theta_dim(&self) -> usize {
        4
    }

    fn x_dim(&self) -> usize {
        Self::N_STATS
    }

    /// Takes log θ and exponentiates internally.
    fn simulate(
        &self,
        log_theta: &Array1<f64>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Array1<f64>, SimError> {
        assert_eq!(log_theta.len(), 4);
        let theta = [
            log_theta[0].exp(),
            log_theta[1].exp(),
            log_theta[2].exp(),
            log_theta[3].exp(),
        ];
        let (xs, ys) = gillespie_lv(&theta, rng)?;
        pilot_normalize(&lv_summary(&xs, &ys), &self.pilot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn zero_rates_keep_constant_populations() {
        let mut rng = seeded(1);
        let (xs, ys) = gillespie_lv(&[0.0; 4], &mut rng).unwrap();
        assert_eq!(xs.len(), LV_SERIES_LEN);
        assert!(xs.iter().all(|&x| x == 50));
        assert!(ys.iter().all(|&y| y == 100));
    }

    #[test]
    fn pure_death_process_matches_expectation() {
        // θ = (0, 0.5, 0, 0): prey constant, predators die independently at
        // rate 0.5, so E[X(t)] = 50·exp(−0.5t). Index 5 is t = 1.
        let mut rng = seeded(2);
        let mut sum = 0.0;
        let runs = 1000;
        for _ in 0..runs {
            let (xs, ys) = gillespie_lv(&[0.0, 0.5, 0.0, 0.0], &mut rng).unwrap();
            assert!(ys.iter().all(|&y| y == 100), "prey must stay constant");
            assert!(xs.windows(2).all(|w| w[1] <= w[0]), "deaths only");
            sum += xs[5] as f64;
        }
        let mean = sum / runs as f64;
        let expect = 50.0 * (-0.5_f64).exp();
        assert!(
            (mean - expect).abs() / expect < 0.05,
            "mean {mean} vs {expect}"
        );
    }

    #[test]
    fn true_parameters_oscillate_and_survive() {
        let mut rng = seeded(3);
        let mut survived = 0;
        for _ in 0..20 {
            match gillespie_lv(&LvProblem::THETA_TRUE, &mut rng) {
                Ok((xs, ys)) => {
                    if xs.iter().all(|&x| x > 0) && ys.iter().all(|&y| y > 0) {
                        survived += 1;
                    }
                }
                Err(_) => {}
            }
        }
        assert!(survived > 10, "only {survived}/20 runs kept both populations");
    }

    #[test]
    fn summary_of_degenerate_series() {
        let xs = [50u32; LV_SERIES_LEN];
        let ys = [100u32; LV_SERIES_LEN];
        let s = lv_summary(&xs, &ys);
        assert_eq!(s[0], 50.0);
        assert_eq!(s[1], 100.0);
        assert!((s[2] - 1e-12_f64.ln()).abs() < 1e-12);
        assert!((s[3] - 1e-12_f64.ln()).abs() < 1e-12);
        for i in 4..9 {
            assert_eq!(s[i], 0.0, "correlation {i} of constant series");
        }
    }

    #[test]
    fn summary_of_identical_series() {
        let mut rng = seeded(4);
        let xs: Vec<u32> = (0..LV_SERIES_LEN)
            .map(|_| 50 + (rng.random::<f64>() * 20.0) as u32)
            .collect();
        let s = lv_summary(&xs, &xs);
        assert!((s[8] - 1.0).abs() < 1e-12, "self cross-correlation {}", s[8]);
        assert_eq!(s[4], s[6], "lag-1 autocorrelations must match");
        assert_eq!(s[5], s[7], "lag-2 autocorrelations must match");
    }

    #[test]
    fn alternating_series_acf1_is_minus_one_up_to_bias() {
        // a,b,a,b,…: the divide-by-N estimator gives −(N−1)/N at lag 1.
        let xs: Vec<u32> = (0..LV_SERIES_LEN)
            .map(|i| if i % 2 == 0 { 40 } else { 60 })
            .collect();
        let ys = [100u32; LV_SERIES_LEN];
        let s = lv_summary(&xs, &ys);
        let n = LV_SERIES_LEN as f64;
        let want = -(n - 1.0) / n;
        assert!((s[4] - want).abs() < 1e-9, "acf1 {} vs {want}", s[4]);
    }

    #[test]
    fn pilot_normalization_centers_and_scales() {
        let pilot = LvPilot {
            mean: arr1(&[1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            std: arr1(&[2.0, 4.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
        };
        let z = pilot_normalize(&pilot.mean.clone(), &pilot).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));

        let mut s = pilot.mean.clone();
        s[0] += 1.0;
        let z = pilot_normalize(&s, &pilot).unwrap();
        assert_eq!(z[0], 0.5);
        assert!(z.iter().skip(1).all(|&v| v == 0.0));

        let bad = LvPilot {
            mean: pilot.mean.clone(),
            std: arr1(&[0.0; 9]),
        };
        assert!(matches!(
            pilot_normalize(&s, &bad),
            Err(SimError::PilotDegenerate(_))
        ));
    }

    #[test]
    fn pilot_self_normalization() {
        // Normalizing the pilot set by its own constants gives mean 0, std 1.
        let mut rng = seeded(5);
        let sims: Vec<Array1<f64>> = (0..40)
            .map(|_| {
                let (xs, ys) = gillespie_lv(&[0.005, 0.4, 0.8, 0.01], &mut rng)
                    .or_else(|_| gillespie_lv(&[0.005, 0.4, 0.8, 0.01], &mut rng))
                    .unwrap();
                lv_summary(&xs, &ys)
            })
            .collect();
        let n = sims.len() as f64;
        let mut mean = Array1::zeros(9);
        for s in &sims {
            mean += &(s / n);
        }
        let mut var = Array1::<f64>::zeros(9);
        for s in &sims {
            let d = s - &mean;
            var += &(&d * &d / n);
        }
        let pilot = LvPilot {
            mean,
            std: var.mapv(f64::sqrt),
        };
        let mut zm = Array1::<f64>::zeros(9);
        let mut zv = Array1::<f64>::zeros(9);
        for s in &sims {
            let z = pilot_normalize(s, &pilot).unwrap();
            zm += &(&z / n);
            zv += &(&z * &z / n);
        }
        for i in 0..9 {
            assert!(zm[i].abs() < 1e-10, "normalized mean {}", zm[i]);
            assert!((zv[i] - 1.0).abs() < 1e-10, "normalized var {}", zv[i]);
        }
    }

    #[test]
    fn problem_save_load_roundtrip() {
        let p = LvProblem::generate(6, 25);
        let dir = std::env::temp_dir().join("lfi-lv-io");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("lv.txt");
        p.save(&path).unwrap();
        let q = LvProblem::load(&path).unwrap();
        assert_eq!(p.pilot, q.pilot);
        assert_eq!(p.x_o, q.x_o);
    }
}
