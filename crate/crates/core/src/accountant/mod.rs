//! Rényi-DP accounting for the Poisson-subsampled Gaussian mechanism.
//!
//! Per-step RDP is evaluated on a grid of orders, composed linearly over
//! steps and converted to (ε, δ) with
//! `ε = RDP(α) + ln((α−1)/α) − (ln δ + ln α)/(α−1)`, minimized over the grid.
//! Integer orders use the exact binomial expansion; fractional orders use
//! the two-sided erfc series. Everything is evaluated in log space.

use std::fmt;

use serde::{Serialize, Serializer};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 1e-5;

/// Terms of the fractional-order series are added until both fall below
/// `exp(SERIES_CUTOFF)`.
const SERIES_CUTOFF: f64 = -30.0;

/// `{1 + x/10 : x = 1..99} ∪ {12, …, 63}`
pub fn default_alpha_grid() -> Vec<f64> {
    (1..100)
        .map(|x| 1.0 + x as f64 / 10.0)
        .chain((12..64).map(f64::from))
        .collect()
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(exp(a) − exp(b))` for `a ≥ b`.
fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a <= b {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// `ln erfc(x)`, accurate in the far right tail where `erfc` underflows.
fn log_erfc(x: f64) -> f64 {
    if x < 25.0 {
        return erfc(x).ln();
    }
    let r = 1.0 / (x * x);
    -x * x - (x * std::f64::consts::PI.sqrt()).ln() + (-0.5 * r + 0.75 * r * r - 1.875 * r * r * r).ln_1p()
}

fn log_binomial(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `ln A_α` for integer α: `ln Σ_k C(α,k) (1−q)^{α−k} q^k exp((k²−k)/(2σ²))`.
fn log_a_integer(q: f64, sigma: f64, alpha: u64) -> f64 {
    let (lq, l1q) = (q.ln(), (-q).ln_1p());
    (0..=alpha).fold(f64::NEG_INFINITY, |acc, k| {
        let kf = k as f64;
        let term = log_binomial(alpha, k) + kf * lq + (alpha - k) as f64 * l1q + (kf * kf - kf) / (2.0 * sigma * sigma);
        log_add(acc, term)
    })
}

/// `ln A_α` for fractional α via the generalized binomial series split at
/// the likelihood-ratio crossing point `z0`.
fn log_a_fractional(q: f64, sigma: f64, alpha: f64) -> f64 {
    let (lq, l1q) = (q.ln(), (-q).ln_1p());
    let s2 = sigma * sigma;
    let z0 = s2 * (1.0 / q - 1.0).ln() + 0.5;
    let (mut pos0, mut neg0, mut pos1, mut neg1) = (
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    // generalized binomial coefficient C(α, i) kept as (ln|c|, sign)
    let (mut log_coef, mut positive) = (0.0f64, true);
    let mut i = 0u64;
    loop {
        let fi = i as f64;
        let j = alpha - fi;
        let log_t0 = log_coef + fi * lq + j * l1q;
        let log_t1 = log_coef + j * lq + fi * l1q;
        let log_e0 = 0.5f64.ln() + log_erfc((fi - z0) / (std::f64::consts::SQRT_2 * sigma));
        let log_e1 = 0.5f64.ln() + log_erfc((z0 - j) / (std::f64::consts::SQRT_2 * sigma));
        let log_s0 = log_t0 + (fi * fi - fi) / (2.0 * s2) + log_e0;
        let log_s1 = log_t1 + (j * j - j) / (2.0 * s2) + log_e1;
        if positive {
            pos0 = log_add(pos0, log_s0);
            pos1 = log_add(pos1, log_s1);
        } else {
            neg0 = log_add(neg0, log_s0);
            neg1 = log_add(neg1, log_s1);
        }
        if log_s0.max(log_s1) < SERIES_CUTOFF {
            break;
        }
        let ratio = (alpha - fi) / (fi + 1.0);
        log_coef += ratio.abs().ln();
        if ratio < 0.0 {
            positive = !positive;
        }
        i += 1;
    }
    log_add(log_sub(pos0, neg0), log_sub(pos1, neg1))
}

/// RDP of one step of the Poisson-subsampled Gaussian mechanism at order `alpha`.
///
/// Returns `+∞` for `sigma == 0` (no noise) and `0` for `q == 0`.
pub fn rdp_subsampled_gaussian(q: f64, sigma: f64, alpha: f64) -> f64 {
    if sigma == 0.0 {
        return f64::INFINITY;
    }
    if q == 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return alpha / (2.0 * sigma * sigma);
    }
    let log_a = if alpha.fract() == 0.0 {
        log_a_integer(q, sigma, alpha as u64)
    } else {
        log_a_fractional(q, sigma, alpha)
    };
    (log_a / (alpha - 1.0)).max(0.0)
}

/// RDP of `steps` adaptive compositions.
pub fn compose(rdp_per_step: &[f64], steps: u64) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0; rdp_per_step.len()];
    }
    rdp_per_step.iter().map(|r| r * steps as f64).collect()
}

/// Privacy spent so far. `epsilon` is `+∞` when no noise is added.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacySpent {
    pub epsilon: f64,
    /// Minimizing order; `None` when no step has touched data or ε is unbounded.
    pub best_alpha: Option<f64>,
}

impl PrivacySpent {
    pub fn is_private(&self) -> bool {
        self.epsilon.is_finite()
    }
}

impl fmt::Display for PrivacySpent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.is_private(), self.best_alpha) {
            (false, _) => write!(f, "epsilon=no DP"),
            (true, Some(a)) => write!(f, "epsilon={:.4} alpha={a}", self.epsilon),
            (true, None) => write!(f, "epsilon={:.4}", self.epsilon),
        }
    }
}

/// Per-step RDP of a fixed mechanism plus the number of steps taken.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyLedger {
    q: f64,
    sigma: f64,
    delta: f64,
    steps: u64,
    alpha_grid: Vec<f64>,
    rdp_per_step: Vec<f64>,
}

impl PrivacyLedger {
    pub fn new(q: f64, sigma: f64, delta: f64) -> Result<Self> {
        Self::with_grid(q, sigma, delta, default_alpha_grid())
    }

    pub fn with_grid(q: f64, sigma: f64, delta: f64, alpha_grid: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidConfig(format!("sampling rate {q} outside [0, 1]")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise multiplier {sigma} must be finite and nonnegative"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta {delta} outside (0, 1)")));
        }
        if alpha_grid.iter().any(|&a| !(a > 1.0 && a.is_finite())) || alpha_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "orders must be finite, > 1 and strictly increasing".into(),
            ));
        }
        let rdp_per_step = alpha_grid
            .iter()
            .map(|&a| rdp_subsampled_gaussian(q, sigma, a))
            .collect();
        Ok(Self {
            q,
            sigma,
            delta,
            steps: 0,
            alpha_grid,
            rdp_per_step,
        })
    }

    pub fn record_step(&mut self) {
        self.steps += 1;
    }

    pub fn record_steps(&mut self, n: u64) {
        self.steps += n;
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn alpha_grid(&self) -> &[f64] {
        &self.alpha_grid
    }

    pub fn rdp_per_step(&self) -> &[f64] {
        &self.rdp_per_step
    }

    pub fn total_rdp(&self) -> Vec<f64> {
        compose(&self.rdp_per_step, self.steps)
    }

    pub fn epsilon(&self) -> Result<PrivacySpent> {
        to_epsilon(self)
    }

    /// Ledger at a different step count.
    pub fn at_steps(&self, steps: u64) -> Self {
        Self { steps, ..self.clone() }
    }

    pub fn record(&self) -> Result<LedgerRecord> {
        let spent = self.epsilon()?;
        Ok(LedgerRecord {
            q: self.q,
            sigma: self.sigma,
            delta: self.delta,
            steps: self.steps,
            epsilon: spent.is_private().then_some(spent.epsilon),
            best_alpha: spent.best_alpha,
        })
    }
}

/// Serializable summary of a ledger; `epsilon` is written as `"no DP"` when unbounded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRecord {
    pub q: f64,
    pub sigma: f64,
    pub delta: f64,
    pub steps: u64,
    #[serde(serialize_with = "epsilon_or_sentinel")]
    pub epsilon: Option<f64>,
    pub best_alpha: Option<f64>,
}

pub(crate) fn epsilon_or_sentinel<S: Serializer>(eps: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match eps {
        Some(e) => s.serialize_f64(*e),
        None => s.serialize_str("no DP"),
    }
}

/// Converts composed RDP to (ε, δ)-DP, minimizing over the order grid.
pub fn to_epsilon(ledger: &PrivacyLedger) -> Result<PrivacySpent> {
    if ledger.alpha_grid.is_empty() {
        return Err(Error::InvalidConfig("empty order grid".into()));
    }
    let total = ledger.total_rdp();
    if total.iter().all(|&r| r == 0.0) {
        return Ok(PrivacySpent {
            epsilon: 0.0,
            best_alpha: None,
        });
    }
    let log_delta = ledger.delta.ln();
    let mut best = PrivacySpent {
        epsilon: f64::INFINITY,
        best_alpha: None,
    };
    for (&alpha, &rdp) in ledger.alpha_grid.iter().zip(&total) {
        let eps = rdp + ((alpha - 1.0) / alpha).ln() - (log_delta + alpha.ln()) / (alpha - 1.0);
        if eps < best.epsilon {
            best = PrivacySpent {
                epsilon: eps.max(0.0),
                best_alpha: Some(alpha),
            };
        }
    }
    Ok(best)
}

/// ε after each of `epochs` epochs; entry 0 is the untrained state.
pub fn epsilon_curve(q: f64, sigma: f64, delta: f64, steps_per_epoch: u64, epochs: u64) -> Result<Vec<f64>> {
    let ledger = PrivacyLedger::new(q, sigma, delta)?;
    (0..=epochs)
        .map(|e| Ok(ledger.at_steps(e * steps_per_epoch).epsilon()?.epsilon))
        .collect()
}
