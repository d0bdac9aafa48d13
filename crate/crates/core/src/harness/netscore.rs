use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the NetScore metric `s * log(a^alpha / (p^beta * c^gamma))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetScoreParams {
    pub s: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub log_base: f64,
}

impl Default for NetScoreParams {
    fn default() -> Self {
        Self { s: 20.0, alpha: 2.0, beta: 0.25, gamma: 0.25, log_base: 10.0 }
    }
}

impl NetScoreParams {
    fn log(&self, v: f64) -> f64 {
        if self.log_base == 10.0 {
            v.log10()
        } else {
            v.ln() / self.log_base.ln()
        }
    }
}

/// NetScore with the default constants.
pub fn netscore(accuracy: f64, params: f64, runtime_s: f64) -> Result<f64> {
    netscore_with(&NetScoreParams::default(), accuracy, params, runtime_s)
}

/// Accuracy 0 yields negative infinity, which reports print as `null`.
pub fn netscore_with(k: &NetScoreParams, accuracy: f64, params: f64, runtime_s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::DomainError(format!("accuracy must lie in [0, 1], got {accuracy}")));
    }
    if !(params > 0.0 && params.is_finite()) {
        return Err(Error::DomainError(format!("parameter count must be positive, got {params}")));
    }
    if !(runtime_s > 0.0 && runtime_s.is_finite()) {
        return Err(Error::DomainError(format!("runtime must be positive, got {runtime_s}")));
    }
    if !(k.log_base > 0.0 && k.log_base != 1.0) {
        return Err(Error::DomainError(format!("log base must be positive and not 1, got {}", k.log_base)));
    }
    if accuracy == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    // Summing logs avoids overflow of p^beta for very large models.
    Ok(k.s * (k.alpha * k.log(accuracy) - k.beta * k.log(params) - k.gamma * k.log(runtime_s)))
}
