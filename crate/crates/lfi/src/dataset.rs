//! Simulated training data.

use crate::gmath::Gaussian;
use ndarray::Array1;

/// Ordered collection of `(θ_n, x_n)` pairs, each generated independently by
/// drawing `θ_n` from a proposal and `x_n` from the simulator at `θ_n`.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pairs: Vec<(Array1<f64>, Array1<f64>)>,
    /// Gaussian the parameters were drawn from; `None` when they came from
    /// the model prior itself.
    proposal_used: Option<Gaussian>,
}

impl SimDataset {
    pub fn new(pairs: Vec<(Array1<f64>, Array1<f64>)>, proposal_used: Option<Gaussian>) -> Self {
        assert!(!pairs.is_empty(), "dataset must be nonempty");
        let (td, xd) = (pairs[0].0.len(), pairs[0].1.len());
        assert!(
            pairs.iter().all(|(t, x)| t.len() == td && x.len() == xd),
            "all pairs must share dimensions"
        );
        Self {
            pairs,
            proposal_used,
        }
    }

    pub fn pairs(&self) -> &[(Array1<f64>, Array1<f64>)] {
        &self.pairs
    }

    pub fn proposal_used(&self) -> Option<&Gaussian> {
        self.proposal_used.as_ref()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn theta_dim(&self) -> usize {
        self.pairs[0].0.len()
    }

    pub fn x_dim(&self) -> usize {
        self.pairs[0].1.len()
    }
}
