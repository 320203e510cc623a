//! Bayesian linear regression: infer the weights of a noisy linear map from
//! one vector of outputs at known random inputs. The posterior is a single
//! Gaussian in closed form, which gives the exact KL metric used to compare
//! methods.

use super::{open_lines, read_data_line, read_vector, write_vector, SimError, Simulator};
use crate::gmath::Gaussian;
use crate::rng::substream;
use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::io::Write;
use std::path::Path;

/// Problem instance: persisted inputs `u_i` (rows), noise level, the
/// generating parameters, and the observation generated from them.
#[derive(Debug, Clone)]
pub struct BlrProblem {
    pub inputs: Array2<f64>,
    pub sigma: f64,
    pub theta_true: Array1<f64>,
    pub x_o: Array1<f64>,
}

impl BlrProblem {
    pub const THETA_DIM: usize = 6;
    pub const X_DIM: usize = 10;

    /// Fresh instance under `seed`: inputs from a standard Gaussian, true
    /// parameters from the prior, observation from the model.
    pub fn generate(seed: u64) -> Self {
        let mut rng = substream(seed, 0x01);
        let inputs = Array2::from_shape_fn((Self::X_DIM, Self::THETA_DIM), |_| {
            rng.sample::<f64, _>(StandardNormal)
        });
        let mut rng = substream(seed, 0x02);
        let theta_true =
            Array1::from_iter((0..Self::THETA_DIM).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let mut partial = Self {
            inputs,
            sigma: 0.1,
            theta_true: theta_true.clone(),
            x_o: Array1::zeros(Self::X_DIM),
        };
        let mut rng = substream(seed, 0x03);
        partial.x_o = partial
            .simulate(&theta_true, &mut rng)
            .expect("linear model cannot fail");
        partial
    }

    pub fn prior(&self) -> Gaussian {
        Gaussian::standard(self.inputs.ncols())
    }

    /// Conjugate posterior: precision `S⁻¹ + σ⁻² UᵀU`, mean
    /// `(precision)⁻¹ σ⁻² Uᵀ x_o` for the zero-mean unit prior.
    pub fn true_posterior(&self) -> Gaussian {
        let d = self.inputs.ncols();
        let ut = self.inputs.t();
        let prec = Array2::eye(d) + ut.dot(&self.inputs).mapv(|v| v / (self.sigma * self.sigma));
        let h = ut.dot(&self.x_o) / (self.sigma * self.sigma);
        let l = crate::linalg::cholesky_lower(&prec).expect("posterior precision is SPD");
        let mean = crate::linalg::solve_upper(
            &l.t().to_owned(),
            &crate::linalg::solve_lower(&l, &h),
        );
        Gaussian::from_mean_precision(mean, &prec).expect("posterior precision is SPD")
    }

    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(
            w,
            "# blr problem sigma={} rows=inputs({}x{}),theta_true({}),x_o({})",
            self.sigma,
            self.inputs.nrows(),
            self.inputs.ncols(),
            self.theta_true.len(),
            self.x_o.len()
        )?;
        for row in self.inputs.rows() {
            write_vector(&mut w, &row.to_owned())?;
        }
        write_vector(&mut w, &self.theta_true)?;
        write_vector(&mut w, &self.x_o)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let mut lines = open_lines(path)?;
        let mut inputs = Array2::zeros((Self::X_DIM, Self::THETA_DIM));
        for i in 0..Self::X_DIM {
            let row = read_vector(&read_data_line(&mut lines)?, Self::THETA_DIM)?;
            inputs.row_mut(i).assign(&row);
        }
        let theta_true = read_vector(&read_data_line(&mut lines)?, Self::THETA_DIM)?;
        let x_o = read_vector(&read_data_line(&mut lines)?, Self::X_DIM)?;
        Ok(Self {
            inputs,
            sigma: 0.1,
            theta_true,
            x_o,
        })
    }
}

impl Simulator for BlrProblem {
    fn theta_dim(&self) -> usize {
        self.inputs.ncols()
    }

    fn x_dim(&self) -> usize {
        self.inputs.nrows()
    }

    fn simulate(&self, theta: &Array1<f64>, rng: &mut ChaCha8Rng) -> Result<Array1<f64>, SimError> {
        assert_eq!(theta.len(), self.theta_dim());
        let clean = self.inputs.dot(theta);
        Ok(clean.mapv(|v| v + self.sigma * rng.sample::<f64, _>(StandardNormal)))
    }
}
