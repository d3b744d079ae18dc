//! Mapping from (support, demandingness) levels to Beta-distributed
//! conditional probabilities.

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::levels::{DemandingnessLevel, SupportLevel};

/// Default pseudo-count scale `alpha + beta` of every conditional.
pub const DEFAULT_CONCENTRATION: f64 = 10.0;

/// Lower/upper clamp applied to the child-given-parent-present probability.
pub const CLAMP_EPSILON: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Option<Self> {
        (alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite())
            .then_some(Self { alpha, beta })
    }

    /// Beta with mean `p` and `alpha + beta = concentration`.
    pub fn from_mean(p: f64, concentration: f64) -> Self {
        Self {
            alpha: concentration * p,
            beta: concentration * (1.0 - p),
        }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn concentration(&self) -> f64 {
        self.alpha + self.beta
    }
}

/// Beta priors over `Pr(child | parent present)` (`pi1`) and
/// `Pr(child | parent absent)` (`pi0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPair {
    pub pi1: BetaParams,
    pub pi0: BetaParams,
}

impl ConditionalPair {
    pub fn from_means(p1: f64, p0: f64, concentration: f64) -> Self {
        Self {
            pi1: BetaParams::from_mean(p1, concentration),
            pi0: BetaParams::from_mean(p0, concentration),
        }
    }

    /// Likelihood ratio for observing the child present, at the prior means.
    pub fn lr_present(&self) -> f64 {
        self.pi1.mean() / self.pi0.mean()
    }

    /// Likelihood ratio for observing the child absent, at the prior means.
    pub fn lr_absent(&self) -> f64 {
        (1.0 - self.pi1.mean()) / (1.0 - self.pi0.mean())
    }
}

/// Initiation likelihood ratios `(LR+, LR-)` pinned for selected level
/// combinations. The closed-form rule does not reproduce these, so the
/// means are solved from the ratios directly.
pub const CALIBRATION: [(SupportLevel, DemandingnessLevel, f64, f64); 9] = {
    use DemandingnessLevel as D;
    use SupportLevel as S;
    [
        (S::Overwhelming, D::Overwhelmingly, 45.0, 0.1),
        (S::Overwhelming, D::Strongly, 8.5, 0.06),
        (S::Overwhelming, D::Neutral, 2.0, 0.04),
        (S::Strong, D::Strongly, 6.7, 0.3),
        (S::Strong, D::StronglyUndemanding, 1.1, 0.14),
        (S::Moderate, D::Overwhelmingly, 16.5, 0.69),
        (S::Moderate, D::Moderately, 2.4, 0.55),
        (S::Weak, D::Overwhelmingly, 9.8, 0.8),
        (S::Weak, D::Weakly, 1.2, 0.88),
    ]
};

/// Solve `p1 / p0 = lr_pos` and `(1 - p1) / (1 - p0) = lr_neg` for the means.
pub fn means_from_ratios(lr_pos: f64, lr_neg: f64) -> (f64, f64) {
    let p0 = (1.0 - lr_neg) / (lr_pos - lr_neg);
    (lr_pos * p0, p0)
}

fn calibrated_means(support: SupportLevel, demand: DemandingnessLevel) -> Option<(f64, f64)> {
    CALIBRATION
        .iter()
        .find(|(s, d, _, _)| *s == support && *d == demand)
        .map(|&(_, _, pos, neg)| means_from_ratios(pos, neg))
}

/// Closed-form means `(p1, p0)` before any calibration override.
pub fn closed_form_means(support: SupportLevel, demand: DemandingnessLevel) -> (f64, f64) {
    let (dn, dd) = demand.ratio_pair();
    let p0 = dd / (dn + dd);
    let s = support.ratio();
    let clamped = (s * p0).clamp(CLAMP_EPSILON, 1.0 - CLAMP_EPSILON);
    // When the clamp erases or inverts the ordering (e.g. supportive links on
    // overwhelmingly undemanding children), apply the ratio to the absence
    // side instead so the sign of the evidence survives.
    let p1 = if s > 1.0 && clamped <= p0 {
        1.0 - (1.0 - p0) / s
    } else if s < 1.0 && clamped >= p0 {
        s * p0
    } else if s == 1.0 {
        p0
    } else {
        clamped
    };
    (p1, p0)
}

/// Mean conditional probabilities `(p1, p0)` for a link.
pub fn link_means(support: SupportLevel, demand: DemandingnessLevel) -> (f64, f64) {
    calibrated_means(support, demand).unwrap_or_else(|| closed_form_means(support, demand))
}

pub fn conditionals_from_levels(
    support: SupportLevel,
    demand: DemandingnessLevel,
    concentration: f64,
) -> Result<ConditionalPair, ModelError> {
    if !(concentration > 0.0 && concentration.is_finite()) {
        return Err(ModelError::InvalidConcentration(concentration));
    }
    let (p1, p0) = link_means(support, demand);
    Ok(ConditionalPair::from_means(p1, p0, concentration))
}
