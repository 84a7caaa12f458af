//! Analysis configuration, stored as TOML.
//!
//! ```toml
//! alpha = 0.05
//! aggregation = "mean"            # or "median"
//! observation_unit = "per_sample" # or "per_test_mean"
//! ruapi_scope = "study"           # or "revision"
//! top_k_tests = 100               # optional
//! reference_revision = "2.8.5"    # optional, defaults to the newest
//!
//! [[api_rules]]
//! prefix = "android."
//! label = "android"
//!
//! [power_clock_offset_us]
//! "com.example.FooTest::testBar" = 120.0
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apimetric::{ApiClassifier, ClassifierError};
use crate::energy::Aggregation;
use crate::evolution::{CompareOptions, EvolveOptions, ObservationUnit, RuapiScope};
use crate::trace::MethodId;

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("top_k_tests must be at least 1")]
    TopK,
    #[error("power_clock_offset_us: `{key}` is not a test name")]
    OffsetKey { key: String },
    #[error("power_clock_offset_us: offset for `{key}` is not finite")]
    OffsetValue { key: String },
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub aggregation: Aggregation,
    pub observation_unit: ObservationUnit,
    pub ruapi_scope: RuapiScope,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_k_tests: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_revision: Option<String>,
    pub api_rules: ApiClassifier,
    /// Per-test shift of the power clock against the trace clock.
    pub power_clock_offset_us: BTreeMap<String, f64>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            aggregation: Aggregation::Mean,
            observation_unit: ObservationUnit::PerSample,
            ruapi_scope: RuapiScope::Study,
            top_k_tests: None,
            reference_revision: None,
            api_rules: ApiClassifier::android_platform(),
            power_clock_offset_us: BTreeMap::new(),
        }
    }
}

impl AnalysisConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ConfigError::Alpha(self.alpha));
        }
        if self.top_k_tests == Some(0) {
            return Err(ConfigError::TopK);
        }
        for (key, value) in &self.power_clock_offset_us {
            if key.parse::<MethodId>().is_err() {
                return Err(ConfigError::OffsetKey { key: key.clone() });
            }
            if !value.is_finite() {
                return Err(ConfigError::OffsetValue { key: key.clone() });
            }
        }
        Ok(())
    }

    pub fn offset_for(&self, test: &MethodId) -> f64 {
        self.power_clock_offset_us
            .get(&test.to_string())
            .copied()
            .unwrap_or(0.0)
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            alpha: self.alpha,
            compare: CompareOptions {
                observation_unit: self.observation_unit,
                aggregation: self.aggregation,
            },
            ruapi_scope: self.ruapi_scope,
            top_k_tests: self.top_k_tests,
            reference_revision: self.reference_revision.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apimetric::ApiRule;

    #[test]
    fn empty_document_gives_defaults() {
        let c = AnalysisConfig::from_toml_str("").unwrap();
        assert_eq!(c, AnalysisConfig::default());
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.api_rules.rules().len(), 3);
    }

    #[test]
    fn full_document() {
        let c = AnalysisConfig::from_toml_str(
            r#"
alpha = 0.01
aggregation = "median"
observation_unit = "per_test_mean"
ruapi_scope = "revision"
top_k_tests = 100

[[api_rules]]
prefix = "java."
label = "java"

[[api_rules]]
prefix = "java.util."
label = "collections"

[power_clock_offset_us]
"com.example.FooTest::testBar" = 120.5
"#,
        )
        .unwrap();
        assert_eq!(c.aggregation, Aggregation::Median);
        assert_eq!(c.observation_unit, ObservationUnit::PerTestMean);
        assert_eq!(c.ruapi_scope, RuapiScope::Revision);
        assert_eq!(c.top_k_tests, Some(100));
        assert_eq!(c.api_rules.rules()[1], ApiRule::new("java.util.", "collections"));
        assert_eq!(c.offset_for(&"com.example.FooTest::testBar".parse().unwrap()), 120.5);
        assert_eq!(c.offset_for(&"com.example.FooTest::other".parse().unwrap()), 0.0);

        let again = AnalysisConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml_string().unwrap(), c.to_toml_string().unwrap());
    }

    #[test]
    fn rejects_bad_values() {
        for text in [
            "alpha = 1.0",
            "alpha = 0",
            "top_k_tests = 0",
            "aggregation = \"mode\"",
            "unknown = 1",
            "[[api_rules]]\nprefix = \"a.\"\nlabel = \"x\"\n[[api_rules]]\nprefix = \"a.\"\nlabel = \"y\"",
            "[power_clock_offset_us]\n\"not a test\" = 1.0",
        ] {
            assert!(AnalysisConfig::from_toml_str(text).is_err(), "{text}");
        }
    }
}
