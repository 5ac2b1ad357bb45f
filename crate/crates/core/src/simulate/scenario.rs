use std::collections::BTreeMap;

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classify::ErrorType;

/// A distribution over non-negative integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Fixed {
        value: u64,
    },
    /// Inclusive on both ends.
    Uniform {
        min: u64,
        max: u64,
    },
    /// `weights[i]` is the relative weight of value `i`.
    Categorical {
        weights: Vec<f64>,
    },
}

impl Distribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            Distribution::Fixed { value } => *value,
            Distribution::Uniform { min, max } => rng.gen_range(*min..=*max),
            Distribution::Categorical { weights } => WeightedIndex::new(weights)
                .expect("validated weights")
                .sample(rng) as u64,
        }
    }

    pub fn max_value(&self) -> u64 {
        match self {
            Distribution::Fixed { value } => *value,
            Distribution::Uniform { max, .. } => *max,
            Distribution::Categorical { weights } => weights.len().saturating_sub(1) as u64,
        }
    }

    pub fn mode(&self) -> Option<u64> {
        match self {
            Distribution::Fixed { value } => Some(*value),
            Distribution::Uniform { .. } => None,
            Distribution::Categorical { weights } => weights
                .iter()
                .enumerate()
                .fold(None, |best: Option<(usize, f64)>, (i, &w)| match best {
                    Some((_, bw)) if bw >= w => best,
                    _ => Some((i, w)),
                })
                .map(|(i, _)| i as u64),
        }
    }

    fn validate(&self, name: &str) -> Result<(), String> {
        match self {
            Distribution::Fixed { .. } => Ok(()),
            Distribution::Uniform { min, max } if min > max => {
                Err(format!("{name}: uniform min {min} exceeds max {max}"))
            }
            Distribution::Uniform { .. } => Ok(()),
            Distribution::Categorical { weights } => {
                if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
                    return Err(format!("{name}: weights must be finite and non-negative"));
                }
                if weights.iter().sum::<f64>() <= 0.0 {
                    return Err(format!("{name}: weights must not all be zero"));
                }
                Ok(())
            }
        }
    }
}

/// Resolution size weights over 0..=12, peaking at 3.
pub const DEFAULT_SIZE_WEIGHTS: [f64; 13] = [
    0.02, 0.12, 0.20, 0.27, 0.15, 0.07, 0.05, 0.04, 0.02, 0.02, 0.02, 0.01, 0.01,
];

/// Error types in proportion to the reference taxonomy shares.
pub fn reference_mixture() -> BTreeMap<ErrorType, f64> {
    let total: f64 = ErrorType::CLASSIFIED
        .iter()
        .map(|t| t.reference_percent())
        .sum();
    ErrorType::CLASSIFIED
        .into_iter()
        .map(|t| (t, t.reference_percent() / total))
        .collect()
}

/// Parameters of a synthetic corpus. Every field has a default, so `{}` is
/// a valid scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub n_series: usize,
    /// Probability of each error type; defaults to the reference shares.
    pub type_mixture: BTreeMap<ErrorType, f64>,
    /// Seconds between the last failing build and the fix.
    pub delay_model: Distribution,
    /// Added plus deleted lines of each fix.
    pub size_model: Distribution,
    /// Lines between the error and the nearest fix line.
    pub distance_model: Distribution,
    /// Lines in the faulty source file.
    pub file_length_model: Distribution,
    /// Error line; uniform over the file when absent.
    pub error_line_model: Option<Distribution>,
    /// Failure series per change stream.
    pub series_per_change: Distribution,
    /// Chance of each additional failing build in a series.
    pub extra_fail_prob: f64,
    /// Chance that a series' error message matches no known type.
    pub alien_message_prob: f64,
    /// Chance that a change stream ends in failures that are never fixed.
    pub unresolved_prob: f64,
    /// Chance that a fix patch also touches an unrelated file.
    pub distractor_prob: f64,
    pub start_epoch: i64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            n_series: 1000,
            type_mixture: reference_mixture(),
            delay_model: Distribution::Uniform {
                min: 60,
                max: 3 * 86_400,
            },
            size_model: Distribution::Categorical {
                weights: DEFAULT_SIZE_WEIGHTS.to_vec(),
            },
            distance_model: Distribution::Uniform { min: 0, max: 120 },
            file_length_model: Distribution::Uniform { min: 150, max: 600 },
            error_line_model: None,
            series_per_change: Distribution::Uniform { min: 1, max: 3 },
            extra_fail_prob: 0.3,
            alien_message_prob: 0.0,
            unresolved_prob: 0.0,
            distractor_prob: 0.3,
            start_epoch: 1_700_000_000,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), String> {
        let total: f64 = self.type_mixture.values().sum();
        if self.type_mixture.is_empty() || (total - 1.0).abs() > 1e-9 {
            return Err(format!("type_mixture must sum to 1 (got {total})"));
        }
        if self.type_mixture.contains_key(&ErrorType::Unclassified) {
            return Err("type_mixture: use alien_message_prob for unclassified messages".into());
        }
        for (t, p) in &self.type_mixture {
            if !(0.0..=1.0).contains(p) {
                return Err(format!("type_mixture[{t}] = {p} is not a probability"));
            }
        }
        for (name, p) in [
            ("extra_fail_prob", self.extra_fail_prob),
            ("alien_message_prob", self.alien_message_prob),
            ("unresolved_prob", self.unresolved_prob),
            ("distractor_prob", self.distractor_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} = {p} is not a probability"));
            }
        }
        // extra failures are capped, so certainty would still terminate; keep it sane anyway
        self.delay_model.validate("delay_model")?;
        self.size_model.validate("size_model")?;
        self.distance_model.validate("distance_model")?;
        self.file_length_model.validate("file_length_model")?;
        if let Some(m) = &self.error_line_model {
            m.validate("error_line_model")?;
        }
        self.series_per_change.validate("series_per_change")?;
        if let Distribution::Fixed { value: 0 } = self.series_per_change {
            return Err("series_per_change must allow at least one series".into());
        }
        if self.file_length_model.max_value() == 0 {
            return Err("file_length_model must allow non-empty files".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| e.to_string())?;
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_json_is_default() {
        assert_eq!(
            ScenarioSpec::from_json("{}").unwrap(),
            ScenarioSpec::default()
        );
    }

    #[test]
    fn default_mixture_sums_to_one() {
        let total: f64 = reference_mixture().values().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!((reference_mixture()[&ErrorType::WasNotDeclared] - 0.4005).abs() < 1e-12);
    }

    #[test]
    fn default_size_mode_is_three() {
        assert_eq!(ScenarioSpec::default().size_model.mode(), Some(3));
    }

    #[test]
    fn rejects_bad_mixture() {
        let err =
            ScenarioSpec::from_json(r#"{"type_mixture":{"WasNotDeclared":0.5}}"#).unwrap_err();
        assert!(err.contains("sum to 1"));
        let err = ScenarioSpec::from_json(r#"{"extra_fail_prob": 1.5}"#).unwrap_err();
        assert!(err.contains("extra_fail_prob"));
        assert!(ScenarioSpec::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn parses_distributions() {
        let spec = ScenarioSpec::from_json(
            r#"{"n_series":1,"type_mixture":{"WasNotDeclared":1.0},
                "delay_model":{"kind":"fixed","value":7},
                "size_model":{"kind":"categorical","weights":[0,1]},
                "error_line_model":{"kind":"uniform","min":3,"max":9}}"#,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(spec.delay_model.sample(&mut rng), 7);
        assert_eq!(spec.size_model.sample(&mut rng), 1);
        let e = spec.error_line_model.unwrap().sample(&mut rng);
        assert!((3..=9).contains(&e));
    }
}
