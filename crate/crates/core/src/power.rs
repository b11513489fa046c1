//! Finite-sample power lower bounds for MMD-type randomization tests.
//!
//! These are planning diagnostics. Nothing in the test procedures depends on
//! them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_common(n: usize, nu: f64, eta: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::invalid("nu must be positive"));
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::invalid("eta must be positive"));
    }
    Ok(())
}

/// The remainder `Rₙ(η)`.
pub fn r_n_eta(n: usize, nu: f64, eta: f64) -> Result<f64> {
    check_common(n, nu, eta)?;
    let nf = n as f64;
    let t1 = 4.5 * nu * nu / nf;
    let t2 = 16.0 * nu * nu * 2f64.sqrt() / nf.powf(1.5);
    let t3 = 6.0 * nu * (2.0 / nf).sqrt();
    let t4 = 1.5 * nu * eta.sqrt() * (2.0 / nf + 32.0 * (2.0 / (nf * nf * nf)).sqrt()).sqrt();
    let t5 = 4.0 * eta * nu / nf;
    Ok(t1 + t2 + t3 + t4 + t5)
}

/// `p_η(Δ) = min(1, exp(-(3/2)Δ + Rₙ(η)))`.
pub fn success_prob(delta: f64, n: usize, nu: f64, eta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::invalid("delta must be nonnegative"));
    }
    let r = r_n_eta(n, nu, eta)?;
    Ok((-1.5 * delta + r).exp().min(1.0))
}

/// Adaptive version over `L` kernels: `min(1, L exp(-(3/2)Δ̃ + Rₙ(η)))` with
/// `ν = max ν_ℓ`.
pub fn adaptive_success_prob(delta_tilde: f64, n: usize, nu_max: f64, eta: f64, l: usize) -> Result<f64> {
    if l < 1 {
        return Err(Error::invalid("L must be at least 1"));
    }
    if !(delta_tilde >= 0.0) {
        return Err(Error::invalid("delta must be nonnegative"));
    }
    let r = r_n_eta(n, nu_max, eta)?;
    Ok((l as f64 * (-1.5 * delta_tilde + r).exp()).min(1.0))
}

/// `⌊α(B+1) − 1⌋`, negative when `α(B+1) < 1`.
pub fn b_alpha(b: usize, alpha: f64) -> i64 {
    (alpha * (b + 1) as f64 - 1.0 + 1e-12).floor() as i64
}

/// `P(Bin(trials, p) ≤ k)`, summed in log space.
pub fn binomial_cdf(k: i64, trials: usize, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("probability outside [0, 1]"));
    }
    if k < 0 {
        return Ok(0.0);
    }
    let k = k as usize;
    if k >= trials {
        return Ok(1.0);
    }
    if p == 0.0 {
        return Ok(1.0);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut log_choose = 0.0;
    let mut terms = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            log_choose += ((trials - j + 1) as f64).ln() - (j as f64).ln();
        }
        terms.push(log_choose + j as f64 * lp + (trials - j) as f64 * lq);
    }
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = terms.iter().map(|t| (t - mx).exp()).sum();
    Ok((mx + s.ln()).exp().min(1.0))
}

/// Inputs of the power calculator. `l` switches to the adaptive bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundInputs {
    pub n: usize,
    pub b: usize,
    pub alpha: f64,
    #[serde(default = "one")]
    pub nu: f64,
    pub eta: f64,
    pub delta: f64,
    #[serde(default)]
    pub l: Option<usize>,
}

fn one() -> f64 {
    1.0
}

impl PowerBoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_common(self.n, self.nu, self.eta)?;
        if self.b < 1 {
            return Err(Error::invalid("B must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha must lie in (0, 1)"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta must be nonnegative"));
        }
        if self.l == Some(0) {
            return Err(Error::invalid("L must be at least 1"));
        }
        Ok(())
    }
}

/// All intermediate quantities of one bound evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBoundReport {
    pub inputs: PowerBoundInputs,
    pub r_n: f64,
    pub p_eta: f64,
    pub b_alpha: i64,
    pub delta_min: f64,
    pub below_threshold: bool,
    pub bound: f64,
}

/// Smallest separation for which the bound is stated, `2ν√(2/n)`.
pub fn delta_minimum(n: usize, nu: f64) -> f64 {
    2.0 * nu * (2.0 / n as f64).sqrt()
}

pub fn power_bound_report(inputs: &PowerBoundInputs) -> Result<PowerBoundReport> {
    inputs.validate()?;
    let r_n = r_n_eta(inputs.n, inputs.nu, inputs.eta)?;
    let p_eta = match inputs.l {
        Some(l) => adaptive_success_prob(inputs.delta, inputs.n, inputs.nu, inputs.eta, l)?,
        None => success_prob(inputs.delta, inputs.n, inputs.nu, inputs.eta)?,
    };
    let ba = b_alpha(inputs.b, inputs.alpha);
    let delta_min = delta_minimum(inputs.n, inputs.nu);
    let below_threshold = inputs.delta < delta_min;
    if below_threshold {
        log::warn!("delta {} is below 2 nu sqrt(2/n) = {delta_min}; the bound is not guaranteed", inputs.delta);
    }
    let bound = binomial_cdf(ba, inputs.b, p_eta)?;
    Ok(PowerBoundReport { inputs: inputs.clone(), r_n, p_eta, b_alpha: ba, delta_min, below_threshold, bound })
}

/// Lower bound on the conditional power, `F_{B, p_η(Δ)}(B_α)`.
pub fn power_lower_bound(inputs: &PowerBoundInputs) -> Result<f64> {
    Ok(power_bound_report(inputs)?.bound)
}

/// Separation that guarantees power at least `β`.
pub fn delta_threshold(beta: f64, b: usize, alpha: f64, n: usize, nu: f64, eta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("beta must lie in (0, 1)"));
    }
    if b < 1 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("need B >= 1 and alpha in (0, 1)"));
    }
    let ba = b_alpha(b, alpha);
    if ba < 1 {
        return Err(Error::domain(format!("B_alpha = {ba} must be at least 1")));
    }
    let ba = ba as f64;
    let c = -2.0 * (-beta).ln_1p() / ba;
    if !(c < 1.0) {
        return Err(Error::domain("beta too large for this B and alpha"));
    }
    let r = r_n_eta(n, nu, eta)?;
    Ok((2.0 / 3.0) * (r - (ba / b as f64).ln() - (1.0 - c.sqrt()).ln()))
}
