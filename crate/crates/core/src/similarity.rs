//! The five account similarity functions `f: A² → [0, 1]` and dense
//! pairwise matrices.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Post};
use crate::error::{Error, Result};
use crate::features::{extract_behavior_features, extract_profile_features, Normalizer};
use crate::textproc::NormalizedPost;
use crate::topics::PostTopics;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SimilarityKind {
    #[serde(rename = "common-posts")]
    CommonPosts,
    #[serde(rename = "bag-of-words")]
    BagOfWords,
    #[serde(rename = "topic-distr")]
    TopicDistr,
    #[serde(rename = "profile-prop")]
    ProfileProp,
    #[serde(rename = "behavior-prop")]
    BehaviorProp,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 5] = [
        SimilarityKind::CommonPosts,
        SimilarityKind::BagOfWords,
        SimilarityKind::TopicDistr,
        SimilarityKind::ProfileProp,
        SimilarityKind::BehaviorProp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityKind::CommonPosts => "common-posts",
            SimilarityKind::BagOfWords => "bag-of-words",
            SimilarityKind::TopicDistr => "topic-distr",
            SimilarityKind::ProfileProp => "profile-prop",
            SimilarityKind::BehaviorProp => "behavior-prop",
        }
    }

    /// Stable one-byte code used by binary caches.
    pub fn code(self) -> u8 {
        match self {
            SimilarityKind::CommonPosts => 1,
            SimilarityKind::BagOfWords => 2,
            SimilarityKind::TopicDistr => 3,
            SimilarityKind::ProfileProp => 4,
            SimilarityKind::BehaviorProp => 5,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    pub fn needs_topics(self) -> bool {
        self == SimilarityKind::TopicDistr
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common-posts" => Ok(SimilarityKind::CommonPosts),
            "bag-of-words" => Ok(SimilarityKind::BagOfWords),
            "topic-distr" | "topic-distribution" => Ok(SimilarityKind::TopicDistr),
            "profile-prop" | "profile-properties" => Ok(SimilarityKind::ProfileProp),
            "behavior-prop" | "behavioral-properties" => Ok(SimilarityKind::BehaviorProp),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown similarity kind `{s}`"))),
        }
    }
}

/// Jaccard coefficient of two sorted, deduplicated id lists; 0 when both
/// are empty.
pub fn jaccard_sorted(a: &[u32], b: &[u32]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Cosine similarity clamped to `[0, 1]`; 0 if either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / libm::sqrt(na * nb)).clamp(0.0, 1.0)
}

/// Whether profile and behavior vectors are min-max scaled before cosine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureScaling {
    #[default]
    MinMax,
    Raw,
}

/// Per-account inputs of every similarity function, indexed by account
/// position in the dataset.
#[derive(Debug, Clone)]
pub struct SimilarityInputs {
    ids: Vec<String>,
    post_classes: Vec<Vec<u32>>,
    vocab: Vec<Vec<u32>>,
    profile: Vec<Vec<f64>>,
    behavior: Vec<Vec<f64>>,
    topics: Option<Vec<Option<Vec<f64>>>>,
}

impl SimilarityInputs {
    /// `normalized` must be aligned with `d.posts()`.
    pub fn new(d: &Dataset, normalized: &[NormalizedPost], scaling: FeatureScaling) -> Self {
        let mut classes: BTreeMap<&[String], u32> = BTreeMap::new();
        let mut terms: BTreeMap<&str, u32> = BTreeMap::new();
        for p in normalized {
            if !p.is_empty() {
                let next = classes.len() as u32;
                classes.entry(p.sorted_tokens()).or_insert(next);
            }
            for t in &p.terms {
                let next = terms.len() as u32;
                terms.entry(t.as_str()).or_insert(next);
            }
        }
        let n = d.accounts().len();
        let mut post_classes = Vec::with_capacity(n);
        let mut vocab = Vec::with_capacity(n);
        let mut profile = Vec::with_capacity(n);
        let mut behavior = Vec::with_capacity(n);
        for (a, account) in d.accounts().iter().enumerate() {
            let idx = d.post_indices_of(a);
            let mut pc: Vec<u32> = idx
                .iter()
                .filter(|&&p| !normalized[p].is_empty())
                .map(|&p| classes[normalized[p].sorted_tokens()])
                .collect();
            pc.sort_unstable();
            pc.dedup();
            let mut vs: Vec<u32> = idx
                .iter()
                .flat_map(|&p| normalized[p].terms.iter().map(|t| terms[t.as_str()]))
                .collect();
            vs.sort_unstable();
            vs.dedup();
            post_classes.push(pc);
            vocab.push(vs);
            let posts: Vec<&Post> = idx.iter().map(|&p| &d.posts()[p]).collect();
            profile.push(extract_profile_features(account, &posts).0.to_vec());
            behavior.push(extract_behavior_features(&posts).0.to_vec());
        }
        if scaling == FeatureScaling::MinMax {
            for vectors in [&mut profile, &mut behavior] {
                if let Some(norm) = Normalizer::fit(vectors.iter().map(|v| &v[..])) {
                    for v in vectors.iter_mut() {
                        *v = norm.apply(v);
                    }
                }
            }
        }
        Self {
            ids: d.accounts().iter().map(|a| a.id.clone()).collect(),
            post_classes,
            vocab,
            profile,
            behavior,
            topics: None,
        }
    }

    /// Attach per-post topic distributions, enabling [`SimilarityKind::TopicDistr`].
    pub fn with_topics(mut self, d: &Dataset, topics: &PostTopics) -> Self {
        self.topics = Some(
            (0..d.accounts().len())
                .map(|a| topics.account_vector(d, a).ok().map(|v| v.probs))
                .collect(),
        );
        self
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn has_topics(&self) -> bool {
        self.topics.is_some()
    }

    pub fn profile_vector(&self, a: usize) -> &[f64] {
        &self.profile[a]
    }

    pub fn behavior_vector(&self, a: usize) -> &[f64] {
        &self.behavior[a]
    }

    /// Jaccard over distinct post equivalence classes.
    pub fn common_posts(&self, x: usize, y: usize) -> f64 {
        jaccard_sorted(&self.post_classes[x], &self.post_classes[y])
    }

    /// Jaccard over vocabularies W(x), W(y).
    pub fn bag_of_words(&self, x: usize, y: usize) -> f64 {
        jaccard_sorted(&self.vocab[x], &self.vocab[y])
    }

    /// Cosine of the averaged topic vectors T'(x), T'(y).
    pub fn topic_distr(&self, x: usize, y: usize) -> Result<f64> {
        let topics = self.topics.as_ref().ok_or(Error::MissingArtifact {
            kind: SimilarityKind::TopicDistr,
            artifact: "a topic model",
        })?;
        let get = |a: usize| topics[a].as_deref().ok_or_else(|| Error::NoPosts(self.ids[a].clone()));
        Ok(cosine(get(x)?, get(y)?))
    }

    pub fn profile_prop(&self, x: usize, y: usize) -> f64 {
        cosine(&self.profile[x], &self.profile[y])
    }

    pub fn behavior_prop(&self, x: usize, y: usize) -> f64 {
        cosine(&self.behavior[x], &self.behavior[y])
    }

    pub fn similarity(&self, kind: SimilarityKind, x: usize, y: usize) -> Result<f64> {
        Ok(match kind {
            SimilarityKind::CommonPosts => self.common_posts(x, y),
            SimilarityKind::BagOfWords => self.bag_of_words(x, y),
            SimilarityKind::TopicDistr => self.topic_distr(x, y)?,
            SimilarityKind::ProfileProp => self.profile_prop(x, y),
            SimilarityKind::BehaviorProp => self.behavior_prop(x, y),
        })
    }

    /// Fail early when `kind` cannot be computed.
    pub fn check(&self, kind: SimilarityKind) -> Result<()> {
        if kind.needs_topics() {
            let topics = self.topics.as_ref().ok_or(Error::MissingArtifact {
                kind,
                artifact: "a topic model",
            })?;
            if let Some(a) = topics.iter().position(Option::is_none) {
                return Err(Error::NoPosts(self.ids[a].clone()));
            }
        }
        Ok(())
    }

    /// Similarities of `x` to accounts `x..n`, the upper-triangle row used
    /// to assemble a [`SimilarityMatrix`].
    pub fn upper_row(&self, kind: SimilarityKind, x: usize) -> Result<Vec<f64>> {
        (x..self.len()).map(|y| self.similarity(kind, x, y)).collect()
    }
}

/// Dense symmetric similarity matrix over a list of accounts.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub kind: SimilarityKind,
    ids: Vec<String>,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    /// Assemble from upper-triangle rows: `rows[i]` holds entries `i..n`.
    pub fn from_upper_rows(kind: SimilarityKind, ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = ids.len();
        if rows.len() != n || rows.iter().enumerate().any(|(i, r)| r.len() != n - i) {
            return Err(Error::InvalidParameter("similarity rows do not form an upper triangle".into()));
        }
        let mut values = alloc::vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                let j = i + off;
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Ok(Self { kind, ids, values })
    }

    /// Sequential fill over all accounts of `inputs`.
    pub fn compute(inputs: &SimilarityInputs, kind: SimilarityKind) -> Result<Self> {
        inputs.check(kind)?;
        let rows = (0..inputs.len())
            .map(|x| inputs.upper_row(kind, x))
            .collect::<Result<Vec<_>>>()?;
        Self::from_upper_rows(kind, inputs.ids().to_vec(), &rows)
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}
