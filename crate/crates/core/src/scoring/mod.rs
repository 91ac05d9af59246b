//! Beta-family proper scoring rules.
//!
//! For a predicted probability `p` of a label being present, the partial
//! losses are
//!
//! ```text
//! L(1|p) = ∫ₚ¹ t^(α-1) (1-t)^β   dt      (label present)
//! L(0|p) = ∫₀ᵖ t^α     (1-t)^(β-1) dt    (label absent)
//! ```
//!
//! `α = β = 1` gives half the squared error, `α = β = 0` gives log-loss, and
//! the default `α = 0.1, β = 3` penalises missed positives more heavily, which
//! suits imbalanced label spaces. Boundary cases with `α = 0` or `β = 0` are
//! evaluated in closed form or by series rather than through the integral
//! machinery.
//!
//! The binary-relevance score `S_BR` sums the per-label losses. The attention
//! score `S_AB` reweights each label's loss by how strongly other labels
//! depend on it:
//!
//! ```text
//! S_AB = Σ_m Σ_n Â(m,n) · S_BR^n
//! ```
//!
//! with `Â` the column-normalised positive correlation matrix (diagonal 1).
//! The printed form of this contraction, `Σ_m Â(m,:) S_BR^m`, is ambiguous;
//! the double sum above is the reading under which identity attention gives
//! back `S_BR`.

mod incomplete_beta;

pub use incomplete_beta::{incomplete_beta, ln_beta, ln_gamma, regularized_incomplete_beta};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use incomplete_beta::{incomplete_beta_b0, incomplete_beta_unchecked, upper_incomplete_beta_unchecked};

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_BETA: f64 = 3.0;
pub const DEFAULT_GAMMA: f64 = 2.0;

/// Shape parameters of the beta scoring family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BetaParams {
    fn default() -> Self {
        BetaParams {
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
        }
    }
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = BetaParams { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if ok(self.alpha) && ok(self.beta) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "beta scoring parameters must be finite and >= 0 (alpha={}, beta={})",
                self.alpha, self.beta
            )))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Family {
    /// α > 0, β > 0, with ln B(α, β+1) and ln B(α+1, β).
    Interior { ln_b_pos: f64, ln_b_neg: f64 },
    /// α = β = 0.
    LogLoss,
    /// α = 0 < β.
    AlphaZero,
    /// β = 0 < α.
    BetaZero,
}

/// Partial-loss evaluator with the parameter-dependent constants cached.
#[derive(Debug, Clone, Copy)]
pub struct BetaLoss {
    params: BetaParams,
    family: Family,
}

impl BetaLoss {
    pub fn new(params: BetaParams) -> Result<Self> {
        params.validate()?;
        let BetaParams { alpha, beta } = params;
        let family = match (alpha > 0.0, beta > 0.0) {
            (true, true) => Family::Interior {
                ln_b_pos: ln_beta(alpha, beta + 1.0),
                ln_b_neg: ln_beta(alpha + 1.0, beta),
            },
            (false, false) => Family::LogLoss,
            (false, true) => Family::AlphaZero,
            (true, false) => Family::BetaZero,
        };
        Ok(BetaLoss { params, family })
    }

    pub fn params(&self) -> BetaParams {
        self.params
    }

    /// `L(1|p)`; `p` must already lie in `[0, 1]`.
    #[inline]
    pub fn pos(&self, p: f64) -> f64 {
        let BetaParams { alpha, beta } = self.params;
        match self.family {
            Family::Interior { ln_b_pos, .. } => upper_incomplete_beta_unchecked(p, alpha, beta + 1.0, ln_b_pos),
            Family::LogLoss => -p.ln(),
            // ∫ₚ¹ (1-t)^β / t dt = ∫₀^{1-p} s^β / (1-s) ds
            Family::AlphaZero => incomplete_beta_b0(1.0 - p, beta + 1.0),
            // ∫ₚ¹ t^(α-1) dt
            Family::BetaZero => -(alpha * p.ln()).exp_m1() / alpha,
        }
    }

    /// `L(0|p)`; `p` must already lie in `[0, 1]`.
    #[inline]
    pub fn neg(&self, p: f64) -> f64 {
        let BetaParams { alpha, beta } = self.params;
        match self.family {
            Family::Interior { ln_b_neg, .. } => incomplete_beta_unchecked(p, alpha + 1.0, beta, ln_b_neg),
            Family::LogLoss => -(-p).ln_1p(),
            // ∫₀ᵖ (1-t)^(β-1) dt
            Family::AlphaZero => -(beta * (-p).ln_1p()).exp_m1() / beta,
            Family::BetaZero => incomplete_beta_b0(p, alpha + 1.0),
        }
    }

    /// Loss of predicting `p` for a label whose sign is `y`.
    #[inline]
    pub fn label_loss(&self, p: f64, y: i8) -> f64 {
        if y > 0 {
            self.pos(p)
        } else {
            self.neg(p)
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

/// `L(1|p)`. Returns `+∞` for `p = 0` under `α = 0`.
pub fn partial_loss_pos(p: f64, params: BetaParams) -> Result<f64> {
    check_probability(p)?;
    Ok(BetaLoss::new(params)?.pos(p))
}

/// `L(0|p)`. Returns `+∞` for `p = 1` under `β = 0`.
pub fn partial_loss_neg(p: f64, params: BetaParams) -> Result<f64> {
    check_probability(p)?;
    Ok(BetaLoss::new(params)?.neg(p))
}

/// Per-label losses `S_BR^k`.
pub fn label_scores(p: &[f64], y: &[i8], loss: &BetaLoss) -> Result<Vec<f64>> {
    if p.len() != y.len() {
        return Err(Error::dim(y.len(), p.len()));
    }
    p.iter()
        .zip(y)
        .map(|(&pk, &yk)| {
            check_probability(pk)?;
            Ok(loss.label_loss(pk, yk))
        })
        .collect()
}

/// Binary-relevance score: the sum of per-label partial losses.
pub fn br_score(p: &[f64], y: &[i8], params: BetaParams) -> Result<f64> {
    Ok(label_scores(p, y, &BetaLoss::new(params)?)?.iter().sum())
}

/// Column-normalised co-occurrence attention `Â` with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionMatrix {
    values: SquareMatrix,
    gamma: f64,
    /// Column sums of `values`; `S_AB = Σ_n column_weight[n] · S_BR^n`.
    column_weights: Vec<f64>,
}

impl AttentionMatrix {
    /// `Â(m,n) = A(m,n) / (γ · max_{m'≠n} A(m',n))` off the diagonal. The
    /// diagonal is excluded from the max and fixed to 1; a column whose
    /// off-diagonal maximum is 0 stays zero off the diagonal.
    pub fn from_positive(a: &SquareMatrix, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::Config(format!("attention gamma must be > 0, got {gamma}")));
        }
        let k = a.size();
        let mut values = SquareMatrix::identity(k);
        for n in 0..k {
            let max = (0..k).filter(|&m| m != n).map(|m| a.get(m, n)).fold(0.0, f64::max);
            if max > 0.0 {
                for m in (0..k).filter(|&m| m != n) {
                    values.set(m, n, a.get(m, n) / (gamma * max));
                }
            }
        }
        Ok(AttentionMatrix::from_values(values, gamma))
    }

    /// No cross-label influence; `S_AB` reduces to `S_BR`.
    pub fn identity(k: usize) -> Self {
        AttentionMatrix::from_values(SquareMatrix::identity(k), f64::INFINITY)
    }

    /// Wraps an explicit matrix, trusting the caller on the invariants.
    pub fn from_values(values: SquareMatrix, gamma: f64) -> Self {
        let column_weights = values.column_sums();
        AttentionMatrix {
            values,
            gamma,
            column_weights,
        }
    }

    pub fn values(&self) -> &SquareMatrix {
        &self.values
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn size(&self) -> usize {
        self.values.size()
    }

    pub fn column_weights(&self) -> &[f64] {
        &self.column_weights
    }
}

/// Attention-weighted score without input validation; used in the scoring
/// hot loop.
#[inline]
pub fn ab_score_unchecked(p: &[f64], y: &[i8], column_weights: &[f64], loss: &BetaLoss) -> f64 {
    p.iter()
        .zip(y)
        .zip(column_weights)
        .map(|((&pk, &yk), &w)| w * loss.label_loss(pk, yk))
        .sum()
}

/// `S_AB = Σ_m Σ_n Â(m,n) · S_BR^n(p, yⁿ)`.
pub fn ab_score(p: &[f64], y: &[i8], att: &AttentionMatrix, params: BetaParams) -> Result<f64> {
    if att.size() != p.len() {
        return Err(Error::dim(att.size(), p.len()));
    }
    let scores = label_scores(p, y, &BetaLoss::new(params)?)?;
    Ok(scores.iter().zip(att.column_weights()).map(|(s, w)| s * w).sum())
}
