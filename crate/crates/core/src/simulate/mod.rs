//! Data generators: bivariate Beta-Bernoulli XOR processes, Dirichlet
//! mechanisms over an arbitrary DAG, and the two-compartment causal urn.

mod bivariate;
mod general;
mod urn;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bivariate::sample_icm_bivariate;
pub use general::{sample_icm_general, DEFAULT_CONCENTRATION};
pub use urn::{polya_joint_log_prob, polya_urn_run, CausalUrn, UrnState, UrnTrace};

/// Beta(alpha, beta) prior over a Bernoulli mechanism parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaPrior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::invalid(format!(
                "Beta prior needs positive finite parameters, got ({alpha}, {beta})"
            )));
        }
        Ok(BetaPrior { alpha, beta })
    }

    /// Prior mean of the success probability.
    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Integer ball counts for the urn.
    pub fn as_counts(&self) -> Result<(u64, u64)> {
        let whole = |v: f64| v >= 1.0 && v.fract() == 0.0 && v < 1e15;
        if !(whole(self.alpha) && whole(self.beta)) {
            return Err(Error::invalid(format!(
                "urn needs integer alpha, beta >= 1, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        Ok((self.alpha as u64, self.beta as u64))
    }
}

impl Default for BetaPrior {
    fn default() -> Self {
        BetaPrior { alpha: 1.0, beta: 3.0 }
    }
}
