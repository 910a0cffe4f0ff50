//! Closed-form life events and reproduction.
//!
//! Lifespan, mating gap and the mating success threshold are functions of a
//! person's (frozen) happiness. Children inherit each trait from a uniformly
//! chosen parent, or with a small probability draw a fresh uniform value.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Person, TraitVector};

/// How the success threshold gates a mating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessRule {
    /// Succeeds iff the smaller of the two happiness values reaches the threshold.
    #[default]
    Threshold,
    /// Succeeds with probability `1 - clip(threshold, 0, 1)`.
    Probabilistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DemographicsParams {
    pub lifespan_a: f64,
    pub lifespan_b: f64,
    pub gap_a: f64,
    pub gap_epsilon: f64,
    pub success_a: f64,
    pub success_scale: f64,
    pub mutation_prob: f64,
    /// Time from birth to first availability; `None` means one mating period.
    pub maturity_age: Option<f64>,
    pub success_rule: SuccessRule,
}

impl Default for DemographicsParams {
    fn default() -> Self {
        DemographicsParams {
            lifespan_a: 150.0,
            lifespan_b: 10.0,
            gap_a: 0.8,
            gap_epsilon: 0.01,
            success_a: 0.002,
            success_scale: 20.0,
            mutation_prob: 0.1,
            maturity_age: None,
            success_rule: SuccessRule::Threshold,
        }
    }
}

impl DemographicsParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("demographics.lifespan_a", self.lifespan_a),
            ("demographics.lifespan_b", self.lifespan_b),
            ("demographics.gap_a", self.gap_a),
            ("demographics.gap_epsilon", self.gap_epsilon),
            ("demographics.success_a", self.success_a),
            ("demographics.success_scale", self.success_scale),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(field, format!("must be positive, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(Error::config(
                "demographics.mutation_prob",
                format!("must lie in [0, 1], got {}", self.mutation_prob),
            ));
        }
        if let Some(m) = self.maturity_age {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::config(
                    "demographics.maturity_age",
                    format!("must be positive, got {m}"),
                ));
            }
        }
        Ok(())
    }

    pub fn maturity(&self, mating_period: f64) -> f64 {
        self.maturity_age.unwrap_or(mating_period)
    }
}

pub fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// `max(0, a (1 - b e^{-h}))`. Zero for every `h <= ln b`.
pub fn lifespan(h: f64, params: &DemographicsParams) -> f64 {
    (params.lifespan_a * (1.0 - params.lifespan_b * (-h).exp())).max(0.0)
}

/// `a / (max(h, 0) + eps)`.
pub fn mating_gap(h: f64, params: &DemographicsParams) -> f64 {
    params.gap_a / (h.max(0.0) + params.gap_epsilon)
}

/// Minimum happiness both partners need for a mating to succeed at the
/// given population size.
pub fn mating_success_threshold(
    pop_size: usize,
    h_male: f64,
    h_female: f64,
    params: &DemographicsParams,
) -> f64 {
    let density = params.success_a * pop_size as f64;
    // 1 - logistic(x) == logistic(-x), without the cancellation.
    let reluctance = logistic(-params.success_scale * h_male)
        .max(logistic(-params.success_scale * h_female));
    density + reluctance
}

/// Deterministic success test: `min(h_male, h_female) >= threshold`.
pub fn mating_succeeds(
    pop_size: usize,
    male: &Person,
    female: &Person,
    params: &DemographicsParams,
) -> bool {
    let m = mating_success_threshold(pop_size, male.happiness, female.happiness, params);
    male.happiness.min(female.happiness) >= m
}

/// Success probability used by [`SuccessRule::Probabilistic`].
pub fn mating_success_probability(
    pop_size: usize,
    male: &Person,
    female: &Person,
    params: &DemographicsParams,
) -> f64 {
    1.0 - mating_success_threshold(pop_size, male.happiness, female.happiness, params).clamp(0.0, 1.0)
}

/// Draws a child's traits from its parents.
pub fn born<R: Rng + ?Sized>(
    father: &TraitVector,
    mother: &TraitVector,
    params: &DemographicsParams,
    rng: &mut R,
) -> TraitVector {
    debug_assert_eq!(father.dim(), mother.dim());
    let values = father
        .as_slice()
        .iter()
        .zip(mother.as_slice())
        .map(|(&f, &m)| {
            if rng.random::<f64>() < params.mutation_prob {
                rng.random::<f64>()
            } else if rng.random::<bool>() {
                f
            } else {
                m
            }
        })
        .collect();
    TraitVector::clipped(values)
}

/// Expectation of [`born`]: `(1 - p)(f + m)/2 + p/2` per coordinate.
pub fn expected_child(
    father: &TraitVector,
    mother: &TraitVector,
    params: &DemographicsParams,
) -> TraitVector {
    let p = params.mutation_prob;
    let values = father
        .as_slice()
        .iter()
        .zip(mother.as_slice())
        .map(|(&f, &m)| (1.0 - p) * (f + m) / 2.0 + p * 0.5)
        .collect();
    TraitVector::clipped(values)
}
