//! Experiment configuration and its line-oriented text format.
//!
//! ```text
//! # comment
//! n_neurons = 100
//! p = 0.1            # short aliases are accepted on input
//! method = composite-rls
//! ```
//!
//! Serialization always writes the canonical key names, one per line, in a
//! fixed order, so the output parses back to an equal config.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Online rule used to train the readout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    RlsForce,
    CompositeRls,
    CompositeLms,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::RlsForce, Method::CompositeRls, Method::CompositeLms];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::RlsForce => "rls-force",
            Method::CompositeRls => "composite-rls",
            Method::CompositeLms => "composite-lms",
        }
    }
}

/// Sign applied to the generalized error term of the composite rules.
///
/// `Paper` subtracts `P (e r - beta E)`; `Gradient` subtracts `P (e r + beta E)`,
/// i.e. both error terms push the weights in the same descent direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompositeSign {
    Paper,
    Gradient,
}

impl CompositeSign {
    pub fn as_str(self) -> &'static str {
        match self {
            CompositeSign::Paper => "paper",
            CompositeSign::Gradient => "gradient",
        }
    }

    /// Multiplier on `beta E` inside the parenthesised update direction.
    pub fn factor(self) -> f64 {
        match self {
            CompositeSign::Paper => -1.0,
            CompositeSign::Gradient => 1.0,
        }
    }
}

/// What drives the input weight once learning is switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AutonomousInput {
    SelfFeedback,
    GroundTruth,
}

impl AutonomousInput {
    pub fn as_str(self) -> &'static str {
        match self {
            AutonomousInput::SelfFeedback => "self-feedback",
            AutonomousInput::GroundTruth => "ground-truth",
        }
    }
}

macro_rules! parse_enum {
    ($ty:ty, $($name:literal => $v:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($v),)+
                    _ => Err(format!("expected one of: {}", [$($name),+].join(", "))),
                }
            }
        }
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

parse_enum!(Method, "rls-force" => Method::RlsForce, "composite-rls" => Method::CompositeRls,
    "composite-lms" => Method::CompositeLms);
parse_enum!(CompositeSign, "paper" => CompositeSign::Paper, "gradient" => CompositeSign::Gradient);
parse_enum!(AutonomousInput, "self-feedback" => AutonomousInput::SelfFeedback,
    "ground-truth" => AutonomousInput::GroundTruth);

/// Every scalar hyperparameter and protocol setting of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_neurons: usize,
    pub connectivity: f64,
    pub chaos_factor: f64,
    pub leak_rate: f64,
    pub rls_init: f64,
    pub composite_gain: f64,
    pub filter_const: f64,
    pub composite_sign: CompositeSign,
    pub lms_rate: f64,
    pub train_steps: usize,
    pub predict_steps: usize,
    pub mgs_tau: usize,
    pub mgs_init: f64,
    pub washout_steps: usize,
    pub autonomous_input: AutonomousInput,
    pub leak_uses_current_x: bool,
    pub seed: u64,
    pub method: Method,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_neurons: 100,
            connectivity: 0.1,
            chaos_factor: 2.5,
            leak_rate: 0.1,
            rls_init: 1.0,
            composite_gain: 3.0,
            filter_const: 0.5,
            composite_sign: CompositeSign::Paper,
            lms_rate: 0.01,
            train_steps: 6000,
            predict_steps: 6000,
            mgs_tau: 17,
            mgs_init: 1.2,
            washout_steps: 0,
            autonomous_input: AutonomousInput::SelfFeedback,
            leak_uses_current_x: false,
            seed: 0,
            method: Method::CompositeRls,
        }
    }
}

/// Canonical keys in serialization order, with accepted aliases.
const KEYS: &[(&str, &[&str])] = &[
    ("n_neurons", &["n", "N"]),
    ("connectivity", &["p"]),
    ("chaos_factor", &["g"]),
    ("leak_rate", &["alpha"]),
    ("rls_init", &["a"]),
    ("composite_gain", &["beta"]),
    ("filter_const", &["lambda"]),
    ("composite_sign", &[]),
    ("lms_rate", &["eta"]),
    ("train_steps", &[]),
    ("predict_steps", &[]),
    ("mgs_tau", &["tau"]),
    ("mgs_init", &["f0"]),
    ("washout_steps", &[]),
    ("autonomous_input", &[]),
    ("leak_uses_current_x", &[]),
    ("seed", &[]),
    ("method", &[]),
];

fn canonical_key(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(name, aliases)| *name == key || aliases.contains(&key)).map(|(name, _)| *name)
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>().map_err(|e| Error::Validation { key: key.to_string(), reason: format!("`{raw}`: {e}") })
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults and validates the result.
    pub fn load(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set_raw(key.trim(), value.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` assignment without validating the whole config.
    pub fn set_raw(&mut self, key: &str, value: &str) -> Result<()> {
        let canon = canonical_key(key).ok_or_else(|| Error::UnknownKey(key.to_string()))?;
        match canon {
            "n_neurons" => self.n_neurons = parse_value(canon, value)?,
            "connectivity" => self.connectivity = parse_value(canon, value)?,
            "chaos_factor" => self.chaos_factor = parse_value(canon, value)?,
            "leak_rate" => self.leak_rate = parse_value(canon, value)?,
            "rls_init" => self.rls_init = parse_value(canon, value)?,
            "composite_gain" => self.composite_gain = parse_value(canon, value)?,
            "filter_const" => self.filter_const = parse_value(canon, value)?,
            "composite_sign" => self.composite_sign = parse_value(canon, value)?,
            "lms_rate" => self.lms_rate = parse_value(canon, value)?,
            "train_steps" => self.train_steps = parse_value(canon, value)?,
            "predict_steps" => self.predict_steps = parse_value(canon, value)?,
            "mgs_tau" => self.mgs_tau = parse_value(canon, value)?,
            "mgs_init" => self.mgs_init = parse_value(canon, value)?,
            "washout_steps" => self.washout_steps = parse_value(canon, value)?,
            "autonomous_input" => self.autonomous_input = parse_value(canon, value)?,
            "leak_uses_current_x" => self.leak_uses_current_x = parse_value(canon, value)?,
            "seed" => self.seed = parse_value(canon, value)?,
            "method" => self.method = parse_value(canon, value)?,
            _ => unreachable!("every canonical key is handled"),
        }
        Ok(())
    }

    /// Checks every range constraint and reports the first offending key.
    pub fn validate(&self) -> Result<()> {
        fn bad(key: &str, reason: &str) -> Result<()> {
            Err(Error::Validation { key: key.to_string(), reason: reason.to_string() })
        }
        let finite = |v: f64| v.is_finite();
        if self.n_neurons == 0 {
            return bad("n_neurons", "must be positive");
        }
        if !(finite(self.connectivity) && self.connectivity > 0.0 && self.connectivity < 1.0) {
            return bad("connectivity", "must lie in (0, 1)");
        }
        if !(finite(self.chaos_factor) && self.chaos_factor > 0.0) {
            return bad("chaos_factor", "must be positive");
        }
        if !(finite(self.leak_rate) && self.leak_rate > 0.0 && self.leak_rate <= 1.0) {
            return bad("leak_rate", "must lie in (0, 1]");
        }
        if !(finite(self.rls_init) && self.rls_init > 0.0) {
            return bad("rls_init", "must be positive");
        }
        if !(finite(self.composite_gain) && self.composite_gain >= 0.0) {
            return bad("composite_gain", "must be nonnegative");
        }
        if !(finite(self.filter_const) && self.filter_const > 0.0 && self.filter_const <= 1.0) {
            return bad("filter_const", "must lie in (0, 1]");
        }
        if !(finite(self.lms_rate) && self.lms_rate > 0.0) {
            return bad("lms_rate", "must be positive");
        }
        if self.mgs_tau == 0 {
            return bad("mgs_tau", "must be at least 1");
        }
        if !finite(self.mgs_init) {
            return bad("mgs_init", "must be finite");
        }
        for w in self.warnings() {
            log::warn!("{w}");
        }
        Ok(())
    }

    /// Soft constraints that do not prevent a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.rls_init > self.n_neurons as f64 / 10.0 {
            out.push(format!(
                "rls_init = {} is not small relative to n_neurons = {} (expected a <= N/10)",
                self.rls_init, self.n_neurons
            ));
        }
        out
    }

    /// Canonical text form; `load(&cfg.to_text())` yields `cfg`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (key, _) in KEYS {
            let value = match *key {
                "n_neurons" => self.n_neurons.to_string(),
                "connectivity" => fmt_f64(self.connectivity),
                "chaos_factor" => fmt_f64(self.chaos_factor),
                "leak_rate" => fmt_f64(self.leak_rate),
                "rls_init" => fmt_f64(self.rls_init),
                "composite_gain" => fmt_f64(self.composite_gain),
                "filter_const" => fmt_f64(self.filter_const),
                "composite_sign" => self.composite_sign.to_string(),
                "lms_rate" => fmt_f64(self.lms_rate),
                "train_steps" => self.train_steps.to_string(),
                "predict_steps" => self.predict_steps.to_string(),
                "mgs_tau" => self.mgs_tau.to_string(),
                "mgs_init" => fmt_f64(self.mgs_init),
                "washout_steps" => self.washout_steps.to_string(),
                "autonomous_input" => self.autonomous_input.to_string(),
                "leak_uses_current_x" => self.leak_uses_current_x.to_string(),
                "seed" => self.seed.to_string(),
                "method" => self.method.to_string(),
                _ => unreachable!(),
            };
            s.push_str(key);
            s.push_str(" = ");
            s.push_str(&value);
            s.push('\n');
        }
        s
    }
}

// `{:?}` on f64 is the shortest representation that round-trips exactly.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = ExperimentConfig::load("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.n_neurons, 100);
        assert_eq!(cfg.connectivity, 0.1);
        assert_eq!(cfg.chaos_factor, 2.5);
        assert_eq!(cfg.leak_rate, 0.1);
        assert_eq!(cfg.rls_init, 1.0);
        assert_eq!(cfg.composite_gain, 3.0);
        assert_eq!(cfg.filter_const, 0.5);
        assert_eq!(cfg.mgs_tau, 17);
        assert_eq!(cfg.mgs_init, 1.2);
        assert_eq!(cfg.train_steps, 6000);
    }

    #[test]
    fn out_of_range_names_the_key() {
        match ExperimentConfig::load("p = 1.5") {
            Err(Error::Validation { key, .. }) => assert_eq!(key, "connectivity"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert_eq!(ExperimentConfig::load("bogus = 1"), Err(Error::UnknownKey("bogus".into())));
    }

    #[test]
    fn beta_zero_is_accepted() {
        let cfg = ExperimentConfig::load("beta = 0\n").unwrap();
        assert_eq!(cfg.composite_gain, 0.0);
    }

    #[test]
    fn comments_and_malformed_lines() {
        let cfg = ExperimentConfig::load("# header\nmethod = rls-force # trailing\n\n").unwrap();
        assert_eq!(cfg.method, Method::RlsForce);
        assert!(matches!(ExperimentConfig::load("just words"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            ExperimentConfig::load("method = sgd"),
            Err(Error::Validation { key, .. }) if key == "method"
        ));
    }

    #[test]
    fn large_rls_init_warns_but_loads() {
        let cfg = ExperimentConfig::load("a = 50").unwrap();
        assert_eq!(cfg.warnings().len(), 1);
        assert!(ExperimentConfig::default().warnings().is_empty());
    }

    #[test]
    fn text_round_trip() {
        let cfg = ExperimentConfig::load("g = 1.7\nseed = 99\ncomposite_sign = gradient\nlambda = 0.3").unwrap();
        assert_eq!(ExperimentConfig::load(&cfg.to_text()).unwrap(), cfg);
    }
}
