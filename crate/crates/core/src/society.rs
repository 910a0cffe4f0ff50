//! Gradient ascent of the society vector on mean population happiness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{clip_unit, InteractionMatrix, Person, TraitVector, FLEXIBILITY_TRAIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearningRateKind {
    #[default]
    Fixed,
    /// Scaled by the population's mean flexibility.
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearningRateSchedule {
    pub kind: LearningRateKind,
    pub base: f64,
    pub multiplier: f64,
    pub flexibility_trait: usize,
}

impl Default for LearningRateSchedule {
    fn default() -> Self {
        LearningRateSchedule {
            kind: LearningRateKind::Fixed,
            base: 1e-4,
            multiplier: 1.0,
            flexibility_trait: FLEXIBILITY_TRAIT,
        }
    }
}

impl LearningRateSchedule {
    pub fn validate(&self, individual_dim: usize) -> Result<()> {
        if !(self.base.is_finite() && self.base > 0.0) {
            return Err(Error::config("learning_rate.base", format!("must be positive, got {}", self.base)));
        }
        if !(self.multiplier.is_finite() && self.multiplier >= 0.0) {
            return Err(Error::config(
                "learning_rate.multiplier",
                format!("must be non-negative, got {}", self.multiplier),
            ));
        }
        if self.flexibility_trait >= individual_dim {
            return Err(Error::config(
                "learning_rate.flexibility_trait",
                format!("index {} out of range for {individual_dim} traits", self.flexibility_trait),
            ));
        }
        Ok(())
    }
}

/// Step size for this round.
pub fn effective_lambda(schedule: &LearningRateSchedule, population: &[Person]) -> f64 {
    let fixed = schedule.base * schedule.multiplier;
    match schedule.kind {
        LearningRateKind::Fixed => fixed,
        LearningRateKind::Dynamic => {
            if population.is_empty() {
                return 0.0;
            }
            let sum: f64 = population
                .iter()
                .map(|p| p.traits.as_slice().get(schedule.flexibility_trait).copied().unwrap_or(0.0))
                .sum();
            fixed * sum / population.len() as f64
        }
    }
}

/// Unclipped ascent step `lambda * x_bar^T I`.
pub fn society_step(x_bar: &TraitVector, matrix: &InteractionMatrix, lambda: f64) -> Result<Vec<f64>> {
    matrix.check_dims(x_bar.dim(), matrix.society_dim())?;
    Ok(matrix
        .society_gradient(x_bar.as_slice())
        .into_iter()
        .map(|g| lambda * g)
        .collect())
}

/// `clip(theta + lambda * x_bar^T I)` into the unit box.
pub fn society_update(
    theta: &TraitVector,
    x_bar: &TraitVector,
    matrix: &InteractionMatrix,
    lambda: f64,
) -> Result<TraitVector> {
    matrix.check_dims(x_bar.dim(), theta.dim())?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::config("learning_rate", format!("lambda must be non-negative, got {lambda}")));
    }
    let step = society_step(x_bar, matrix, lambda)?;
    Ok(TraitVector::clipped(
        theta
            .as_slice()
            .iter()
            .zip(step)
            .map(|(t, s)| clip_unit(t + s))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sex;

    fn with_flex(flex: f64) -> Person {
        let mut traits = vec![0.5; 8];
        traits[FLEXIBILITY_TRAIT] = flex;
        Person {
            id: 0,
            sex: Sex::Female,
            traits: TraitVector::clipped(traits),
            happiness: 0.0,
            birth_time: 0.0,
            death_time: 1.0,
            next_available_time: 0.0,
            location: None,
            group: None,
        }
    }

    #[test]
    fn update_examples() {
        let m = InteractionMatrix::default();
        let theta = TraitVector::splat(0.5, 13);
        assert_eq!(society_update(&theta, &TraitVector::splat(0.3, 8), &m, 0.0).unwrap(), theta);
        assert_eq!(society_update(&theta, &TraitVector::zeros(8), &m, 0.01).unwrap(), theta);

        let lambda = 1e-3;
        let next = society_update(&theta, &TraitVector::indicator(0, 8), &m, lambda).unwrap();
        let column_a = [0.9, 0.7, -0.1, -0.9, 0.7, -0.5, 0.6, 0.0, -0.5, 0.0, 0.0, -0.4, 0.2];
        for (s, c) in column_a.iter().enumerate() {
            assert!((next[s] - 0.5 - lambda * c).abs() < 1e-15);
        }
    }

    #[test]
    fn clipping_keeps_theta_in_box() {
        let m = InteractionMatrix::default();
        let mut theta = TraitVector::splat(0.5, 13);
        let x = TraitVector::indicator(0, 8);
        for _ in 0..100 {
            theta = society_update(&theta, &x, &m, 0.1).unwrap();
        }
        assert!(theta.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
        assert_eq!(theta[0], 1.0);
        assert_eq!(theta[3], 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = InteractionMatrix::default();
        assert!(society_update(&TraitVector::splat(0.5, 12), &TraitVector::zeros(8), &m, 0.1).is_err());
        assert!(society_update(&TraitVector::splat(0.5, 13), &TraitVector::zeros(7), &m, 0.1).is_err());
    }

    #[test]
    fn lambda_schedules() {
        let fixed = LearningRateSchedule { multiplier: 30.0, ..Default::default() };
        assert!((effective_lambda(&fixed, &[]) - 3e-3).abs() < 1e-18);
        let dynamic = LearningRateSchedule { kind: LearningRateKind::Dynamic, ..Default::default() };
        assert_eq!(effective_lambda(&dynamic, &[with_flex(1.0), with_flex(1.0)]), 1e-4);
        assert_eq!(effective_lambda(&dynamic, &[with_flex(0.0)]), 0.0);
        assert_eq!(effective_lambda(&dynamic, &[]), 0.0);
        assert!((effective_lambda(&dynamic, &[with_flex(0.2), with_flex(0.6)]) - 0.4e-4).abs() < 1e-18);
    }
}
