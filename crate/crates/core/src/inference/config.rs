use std::fmt;
use std::str::FromStr;

use crate::config::{entry, parse_value, Settings};
use crate::error::{Error, Result};

/// How many of the highest-scoring classes to compare a query against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TopN {
    #[default]
    All,
    Count(usize),
}

impl TopN {
    /// Number of classes used out of `num_classes`.
    pub fn resolve(self, num_classes: usize) -> usize {
        match self {
            TopN::All => num_classes,
            TopN::Count(n) => n,
        }
    }
}

impl fmt::Display for TopN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopN::All => f.write_str("all"),
            TopN::Count(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for TopN {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(TopN::All);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(TopN::Count(n)),
            _ => Err(Error::contract(format!(
                "top-n must be a positive integer or \"all\", got {s:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InferenceConfig {
    /// Weight of the prototype in `x_r = (1 - a) q + a mu_r`.
    pub test_alpha: f64,
    pub top_n: TopN,
    /// Scores below this are reported novel. `None` emits scores only.
    pub threshold: Option<f64>,
    pub prototypes_per_class: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            test_alpha: 0.1,
            top_n: TopN::All,
            threshold: None,
            prototypes_per_class: 1,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self, num_classes: usize) -> Result<()> {
        if !(self.test_alpha > 0.0 && self.test_alpha < 1.0) {
            return Err(Error::contract(format!(
                "test alpha {} is not in (0, 1)",
                self.test_alpha
            )));
        }
        if let TopN::Count(n) = self.top_n {
            if n == 0 || n > num_classes {
                return Err(Error::contract(format!(
                    "top-n {n} is not in 1..={num_classes}"
                )));
            }
        }
        if let Some(t) = self.threshold {
            if !t.is_finite() {
                return Err(Error::contract("threshold must be finite"));
            }
        }
        if self.prototypes_per_class == 0 {
            return Err(Error::contract("prototypes per class must be at least 1"));
        }
        Ok(())
    }
}

impl Settings for InferenceConfig {
    fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "test-alpha" => self.test_alpha = parse_value(key, value)?,
            "top-n" => self.top_n = value.parse()?,
            "threshold" => {
                self.threshold = if value.trim().eq_ignore_ascii_case("none") {
                    None
                } else {
                    Some(parse_value(key, value)?)
                }
            }
            "prototypes-per-class" => self.prototypes_per_class = parse_value(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            entry("test-alpha", self.test_alpha),
            entry("top-n", self.top_n),
            entry(
                "threshold",
                self.threshold
                    .map_or_else(|| "none".to_string(), |t| t.to_string()),
            ),
            entry("prototypes-per-class", self.prototypes_per_class),
        ]
    }
}
