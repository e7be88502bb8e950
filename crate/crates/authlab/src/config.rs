//! Pipeline configuration: a TOML file with one table per stage. Every
//! field has a default, and command-line flags override file values.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use authlab_core::eval::{fine_fractions, EvalConfig, COARSE_FRACTIONS, DEFAULT_REPEATS};
use authlab_core::report::ReportConfig;
use authlab_core::similarity::{FeatureScaling, SimilarityKind};
use authlab_core::synth::SynthConfig;
use authlab_core::textproc::{stopwords, Stemmer, TextConfig};
use authlab_core::topics::{self, DocumentUnit, LdaConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub input: InputSettings,
    pub text: TextSettings,
    pub topics: TopicSettings,
    pub similarity: SimilaritySettings,
    pub classify: ClassifySettings,
    pub candidates: CandidateSettings,
    pub report: ReportConfig,
    pub eval: EvalSettings,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            input: InputSettings::default(),
            text: TextSettings::default(),
            topics: TopicSettings::default(),
            similarity: SimilaritySettings::default(),
            classify: ClassifySettings::default(),
            candidates: CandidateSettings::default(),
            report: ReportConfig::default(),
            eval: EvalSettings::default(),
            synth: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSettings {
    pub accounts: PathBuf,
    pub posts: PathBuf,
    pub min_posts: usize,
}

impl Default for InputSettings {
    fn default() -> Self {
        Self {
            accounts: PathBuf::from("accounts.jsonl"),
            posts: PathBuf::from("posts.jsonl"),
            min_posts: authlab_core::corpus::DEFAULT_MIN_POSTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextSettings {
    /// `en`, `english`, `porter`, or `none`.
    pub stemmer: String,
    /// `english` (bundled list), `none`, or a file with one term per line.
    pub stopwords: String,
    pub keep_mentions: bool,
    pub strip_retweet_marker: bool,
}

impl Default for TextSettings {
    fn default() -> Self {
        Self {
            stemmer: "en".into(),
            stopwords: "english".into(),
            keep_mentions: false,
            strip_retweet_marker: true,
        }
    }
}

impl TextSettings {
    pub fn resolve(&self) -> Result<TextConfig, Failure> {
        let stemmer = Stemmer::from_str(&self.stemmer).map_err(Failure::from)?;
        let stopwords: BTreeSet<String> = match self.stopwords.as_str() {
            "english" | "en" => stopwords::ENGLISH.iter().map(|s| s.to_string()).collect(),
            "none" => BTreeSet::new(),
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::config(format!("cannot read stop-word file `{path}`: {e}")))?;
                text.lines()
                    .map(|l| l.trim().to_lowercase())
                    .filter(|l| !l.is_empty())
                    .collect()
            }
        };
        Ok(TextConfig {
            stopwords,
            stemmer,
            keep_mentions: self.keep_mentions,
            strip_retweet_marker: self.strip_retweet_marker,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicSettings {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub fold_in_iterations: usize,
    pub min_term_freq: usize,
    pub unit: DocumentUnit,
}

impl Default for TopicSettings {
    fn default() -> Self {
        Self {
            k: topics::DEFAULT_K,
            alpha: topics::DEFAULT_ALPHA,
            beta: topics::DEFAULT_BETA,
            iterations: topics::DEFAULT_ITERATIONS,
            fold_in_iterations: topics::DEFAULT_FOLD_IN_ITERATIONS,
            min_term_freq: 1,
            unit: DocumentUnit::Post,
        }
    }
}

impl TopicSettings {
    pub fn lda(&self, seed: u64) -> LdaConfig {
        LdaConfig {
            k: self.k,
            alpha: self.alpha,
            beta: self.beta,
            iterations: self.iterations,
            seed,
            min_term_freq: self.min_term_freq,
            unit: self.unit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimilaritySettings {
    pub kind: SimilarityKind,
    pub scaling: FeatureScaling,
}

impl Default for SimilaritySettings {
    fn default() -> Self {
        Self {
            kind: SimilarityKind::BagOfWords,
            scaling: FeatureScaling::MinMax,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySettings {
    pub k: usize,
    /// Labeled accounts keep ±0.5 instead of being scored by neighbors.
    pub fix_labeled: bool,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            k: authlab_core::classify::DEFAULT_K,
            fix_labeled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CandidateSettings {
    pub clusters: usize,
    pub per_cluster: usize,
}

impl Default for CandidateSettings {
    fn default() -> Self {
        Self {
            clusters: 20,
            per_cluster: 5,
        }
    }
}

/// Training fractions: a preset name or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Fractions {
    Preset(String),
    List(Vec<f64>),
}

impl Fractions {
    pub fn resolve(&self) -> Result<Vec<f64>, Failure> {
        match self {
            Fractions::Preset(p) if p == "fine" => Ok(fine_fractions()),
            Fractions::Preset(p) if p == "coarse" => Ok(COARSE_FRACTIONS.to_vec()),
            Fractions::Preset(p) => Err(Failure::config(format!(
                "unknown fraction preset `{p}` (expected `fine`, `coarse`, or a list)"
            ))),
            Fractions::List(v) => Ok(v.clone()),
        }
    }
}

impl FromStr for Fractions {
    type Err = String;

    /// `fine`, `coarse`, or comma-separated numbers.
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "fine" || s == "coarse" {
            return Ok(Fractions::Preset(s.into()));
        }
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|e| format!("bad fraction `{x}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Fractions::List)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub fractions: Fractions,
    pub repeats: usize,
    pub ks: Vec<usize>,
    pub kinds: Vec<SimilarityKind>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            fractions: Fractions::Preset("fine".into()),
            repeats: DEFAULT_REPEATS,
            ks: (1..=5).collect(),
            kinds: SimilarityKind::ALL.to_vec(),
        }
    }
}

impl EvalSettings {
    pub fn resolve(&self, seed: u64) -> Result<EvalConfig, Failure> {
        let cfg = EvalConfig {
            fractions: self.fractions.resolve()?,
            repeats: self.repeats,
            ks: self.ks.clone(),
            kinds: self.kinds.clone(),
            seed,
        };
        cfg.validate().map_err(Failure::from)?;
        Ok(cfg)
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read config `{}`: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The resolved configuration as JSON, as recorded in artifact headers.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration serializes")
    }

    /// sha256 of the canonical JSON form. Thread count, output directory
    /// and log level are not part of the configuration and never affect it.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("configuration serializes"))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = PipelineConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
        assert_eq!(PipelineConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn partial_tables_and_presets() {
        let cfg = PipelineConfig::from_toml(
            "seed = 7\n[topics]\nk = 12\n[eval]\nfractions = \"coarse\"\nkinds = [\"bag-of-words\"]\n[synth]\nn_bots = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.topics.k, 12);
        assert_eq!(cfg.topics.iterations, topics::DEFAULT_ITERATIONS);
        assert_eq!(cfg.eval.fractions.resolve().unwrap(), COARSE_FRACTIONS.to_vec());
        assert_eq!(cfg.synth.n_bots, 3);
        let list = PipelineConfig::from_toml("[eval]\nfractions = [0.1, 0.4]\n").unwrap();
        assert_eq!(list.eval.fractions.resolve().unwrap(), vec![0.1, 0.4]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(PipelineConfig::from_toml("[topics]\nkk = 3\n").unwrap_err().is_config());
        assert!(PipelineConfig::from_toml("[similarity]\nkind = \"nope\"\n").is_err());
        let bad = TextSettings {
            stemmer: "klingon".into(),
            ..TextSettings::default()
        };
        assert!(bad.resolve().unwrap_err().is_config());
    }

    #[test]
    fn hash_tracks_content() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.classify.k = 5;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn fraction_flags() {
        assert_eq!("coarse".parse::<Fractions>().unwrap(), Fractions::Preset("coarse".into()));
        assert_eq!("0.1, 0.2".parse::<Fractions>().unwrap(), Fractions::List(vec![0.1, 0.2]));
        assert!("x".parse::<Fractions>().is_err());
    }
}
