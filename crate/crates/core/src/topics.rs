//! LDA topic modeling by collapsed Gibbs sampling.
//!
//! Documents are posts by default. A fitted [`TopicModel`] keeps only the
//! topic-term matrix φ; per-post topic distributions T(p,·) are obtained by
//! fold-in sampling against the fixed φ, and account vectors T'(x,·) are the
//! unweighted mean over the account's posts.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::rng::{fnv1a, rng_for};
use crate::textproc::NormalizedPost;

pub const DEFAULT_K: usize = 48;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_BETA: f64 = 0.01;
pub const DEFAULT_ITERATIONS: usize = 500;
pub const DEFAULT_FOLD_IN_ITERATIONS: usize = 50;

/// What counts as one LDA document during fitting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocumentUnit {
    #[default]
    Post,
    /// All posts of an account concatenated.
    Account,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Terms seen fewer times in the corpus are dropped from the vocabulary.
    pub min_term_freq: usize,
    pub unit: DocumentUnit,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            alpha: DEFAULT_ALPHA,
            beta: DEFAULT_BETA,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            min_term_freq: 1,
            unit: DocumentUnit::Post,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FitWarning {
    MoreTopicsThanTerms { k: usize, terms: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    vocab: Vec<String>,
    term_index: BTreeMap<String, u32>,
    /// Row-major K × V matrix φ.
    term_topic: Vec<f64>,
}

impl TopicModel {
    /// Assemble a model from stored parts, checking shapes and that every
    /// row of φ is a probability distribution.
    pub fn from_parts(
        k: usize,
        alpha: f64,
        beta: f64,
        seed: u64,
        iterations: usize,
        vocab: Vec<String>,
        term_topic: Vec<f64>,
    ) -> Result<Self> {
        if k == 0 || term_topic.len() != k * vocab.len() {
            return Err(Error::InvalidParameter(alloc::format!(
                "term-topic matrix has {} entries, expected {k} x {}",
                term_topic.len(),
                vocab.len()
            )));
        }
        let v = vocab.len();
        for row in term_topic.chunks(v.max(1)) {
            let s: f64 = row.iter().sum();
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (v > 0 && (s - 1.0).abs() > 1e-9) {
                return Err(Error::InvalidParameter("term-topic row is not a distribution".into()));
            }
        }
        let term_index = vocab.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Ok(Self {
            k,
            alpha,
            beta,
            seed,
            iterations,
            vocab,
            term_index,
            term_topic,
        })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn term_topic(&self) -> &[f64] {
        &self.term_topic
    }

    /// φ row of `topic`.
    pub fn phi(&self, topic: usize) -> &[f64] {
        let v = self.vocab.len();
        &self.term_topic[topic * v..(topic + 1) * v]
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_index.get(term).copied()
    }

    /// The `n` most probable terms of `topic`, ties broken by term.
    pub fn top_terms(&self, topic: usize, n: usize) -> Vec<(String, f64)> {
        let phi = self.phi(topic);
        let mut idx: Vec<usize> = (0..phi.len()).collect();
        // Vocabulary is sorted, so index order is term order.
        idx.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
        idx.into_iter().take(n).map(|i| (self.vocab[i].clone(), phi[i])).collect()
    }
}

/// Collapsed Gibbs sampler state over integer-coded documents.
pub struct GibbsSampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    doc_offsets: Vec<usize>,
    words: Vec<u32>,
    z: Vec<u32>,
    ndk: Vec<u32>,
    nkw: Vec<u32>,
    nk: Vec<u32>,
    weights: Vec<f64>,
    rng: ChaCha8Rng,
}

impl GibbsSampler {
    pub fn new(docs: &[Vec<u32>], v: usize, k: usize, alpha: f64, beta: f64, seed: u64) -> Self {
        let mut doc_offsets = Vec::with_capacity(docs.len() + 1);
        let mut words = Vec::new();
        doc_offsets.push(0);
        for d in docs {
            words.extend_from_slice(d);
            doc_offsets.push(words.len());
        }
        let mut rng = rng_for(seed, 0x1da);
        let mut s = Self {
            k,
            v,
            alpha,
            beta,
            z: vec![0; words.len()],
            ndk: vec![0; docs.len() * k],
            nkw: vec![0; k * v],
            nk: vec![0; k],
            weights: vec![0.0; k],
            doc_offsets,
            words,
            rng: rng.clone(),
        };
        for d in 0..docs.len() {
            for i in s.doc_offsets[d]..s.doc_offsets[d + 1] {
                let t = rng.random_range(0..k) as u32;
                s.z[i] = t;
                s.assign(d, i, 1);
            }
        }
        s.rng = rng;
        s
    }

    fn assign(&mut self, d: usize, i: usize, delta: i32) {
        let t = self.z[i] as usize;
        let w = self.words[i] as usize;
        let up = |c: &mut u32| *c = c.wrapping_add_signed(delta);
        up(&mut self.ndk[d * self.k + t]);
        up(&mut self.nkw[t * self.v + w]);
        up(&mut self.nk[t]);
    }

    /// One full pass resampling every token assignment.
    pub fn sweep(&mut self) {
        let vbeta = self.v as f64 * self.beta;
        for d in 0..self.doc_offsets.len() - 1 {
            for i in self.doc_offsets[d]..self.doc_offsets[d + 1] {
                self.assign(d, i, -1);
                let w = self.words[i] as usize;
                let mut total = 0.0;
                for t in 0..self.k {
                    let p = (self.ndk[d * self.k + t] as f64 + self.alpha)
                        * (self.nkw[t * self.v + w] as f64 + self.beta)
                        / (self.nk[t] as f64 + vbeta);
                    total += p;
                    self.weights[t] = total;
                }
                self.z[i] = sample_cumulative(&self.weights, total, &mut self.rng) as u32;
                self.assign(d, i, 1);
            }
        }
    }

    pub fn token_count(&self) -> usize {
        self.words.len()
    }

    /// Σ_k n_k, which must always equal the token count.
    pub fn assigned_count(&self) -> u64 {
        self.nk.iter().map(|&c| u64::from(c)).sum()
    }

    /// Topic counts of document `d`.
    pub fn doc_topic_counts(&self, d: usize) -> &[u32] {
        &self.ndk[d * self.k..(d + 1) * self.k]
    }

    /// φ estimated from the current state with β smoothing.
    pub fn phi(&self) -> Vec<f64> {
        let vbeta = self.v as f64 * self.beta;
        let mut phi = vec![0.0; self.k * self.v];
        for t in 0..self.k {
            let den = self.nk[t] as f64 + vbeta;
            for w in 0..self.v {
                phi[t * self.v + w] = (self.nkw[t * self.v + w] as f64 + self.beta) / den;
            }
        }
        phi
    }
}

fn sample_cumulative(cumulative: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// Token lists of the LDA documents for `unit`.
pub fn documents(d: &Dataset, normalized: &[NormalizedPost], unit: DocumentUnit) -> Vec<Vec<String>> {
    match unit {
        DocumentUnit::Post => normalized.iter().map(|p| p.tokens.clone()).collect(),
        DocumentUnit::Account => (0..d.accounts().len())
            .map(|a| {
                d.post_indices_of(a)
                    .iter()
                    .flat_map(|&pi| normalized[pi].tokens.iter().cloned())
                    .collect()
            })
            .collect(),
    }
}

/// Fit LDA on tokenized documents.
pub fn fit_lda(docs: &[Vec<String>], cfg: &LdaConfig) -> Result<(TopicModel, Vec<FitWarning>)> {
    if cfg.k == 0 || cfg.iterations == 0 {
        return Err(Error::InvalidParameter("k and iterations must be at least 1".into()));
    }
    if !(cfg.alpha > 0.0 && cfg.beta > 0.0) {
        return Err(Error::InvalidParameter("alpha and beta must be positive".into()));
    }
    let mut freq: BTreeMap<&str, usize> = BTreeMap::new();
    for t in docs.iter().flatten() {
        *freq.entry(t.as_str()).or_default() += 1;
    }
    let vocab: Vec<String> = freq
        .iter()
        .filter(|(_, &c)| c >= cfg.min_term_freq)
        .map(|(t, _)| String::from(*t))
        .collect();
    if vocab.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let index: BTreeMap<&str, u32> = vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i as u32)).collect();
    let coded: Vec<Vec<u32>> = docs
        .iter()
        .map(|d| d.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let mut warnings = Vec::new();
    if cfg.k > vocab.len() {
        warnings.push(FitWarning::MoreTopicsThanTerms {
            k: cfg.k,
            terms: vocab.len(),
        });
    }
    let mut sampler = GibbsSampler::new(&coded, vocab.len(), cfg.k, cfg.alpha, cfg.beta, cfg.seed);
    for _ in 0..cfg.iterations {
        sampler.sweep();
    }
    let model = TopicModel::from_parts(
        cfg.k,
        cfg.alpha,
        cfg.beta,
        cfg.seed,
        cfg.iterations,
        vocab,
        sampler.phi(),
    )?;
    Ok((model, warnings))
}

/// T(p,·) for one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostTopicDistribution {
    pub post_id: String,
    pub probs: Vec<f64>,
}

/// T'(x,·) for one account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountTopicVector {
    pub account_id: String,
    pub probs: Vec<f64>,
}

/// Fold-in Gibbs sampling of one post against the fixed φ. Posts without
/// in-vocabulary tokens get the uniform distribution.
pub fn infer_post_topics(model: &TopicModel, post: &NormalizedPost, iterations: usize, seed: u64) -> PostTopicDistribution {
    let k = model.k;
    let words: Vec<usize> = post
        .tokens
        .iter()
        .filter_map(|t| model.term_id(t))
        .map(|w| w as usize)
        .collect();
    if words.is_empty() {
        return PostTopicDistribution {
            post_id: post.post_id.clone(),
            probs: vec![1.0 / k as f64; k],
        };
    }
    let v = model.vocab.len();
    let phi = &model.term_topic;
    let mut rng = rng_for(seed, fnv1a(post.post_id.as_bytes()));
    let mut z: Vec<usize> = words.iter().map(|_| rng.random_range(0..k)).collect();
    let mut nk = vec![0u32; k];
    for &t in &z {
        nk[t] += 1;
    }
    let mut weights = vec![0.0; k];
    for _ in 0..iterations {
        for (i, &w) in words.iter().enumerate() {
            nk[z[i]] -= 1;
            let mut total = 0.0;
            for t in 0..k {
                total += (nk[t] as f64 + model.alpha) * phi[t * v + w];
                weights[t] = total;
            }
            z[i] = sample_cumulative(&weights, total, &mut rng);
            nk[z[i]] += 1;
        }
    }
    let den = words.len() as f64 + k as f64 * model.alpha;
    PostTopicDistribution {
        post_id: post.post_id.clone(),
        probs: nk.iter().map(|&c| (c as f64 + model.alpha) / den).collect(),
    }
}

/// Topic distributions for every post of a dataset, aligned with
/// [`Dataset::posts`].
#[derive(Debug, Clone, PartialEq)]
pub struct PostTopics {
    pub k: usize,
    pub dists: Vec<PostTopicDistribution>,
}

impl PostTopics {
    pub fn infer(model: &TopicModel, normalized: &[NormalizedPost], iterations: usize, seed: u64) -> Self {
        Self {
            k: model.k,
            dists: normalized
                .iter()
                .map(|p| infer_post_topics(model, p, iterations, seed))
                .collect(),
        }
    }

    pub fn probs(&self, post: usize) -> &[f64] {
        &self.dists[post].probs
    }

    /// T'(x,·) for the account at position `account`.
    pub fn account_vector(&self, d: &Dataset, account: usize) -> Result<AccountTopicVector> {
        let a = &d.accounts()[account];
        let posts = d.post_indices_of(account);
        if posts.is_empty() {
            return Err(Error::NoPosts(a.id.clone()));
        }
        Ok(AccountTopicVector {
            account_id: a.id.clone(),
            probs: mean_distribution(posts.iter().map(|&p| self.probs(p)), self.k),
        })
    }
}

/// Element-wise mean of equally long vectors.
pub fn mean_distribution<'a>(rows: impl Iterator<Item = &'a [f64]>, k: usize) -> Vec<f64> {
    let mut acc = vec![0.0; k];
    let mut n = 0usize;
    for r in rows {
        for (a, x) in acc.iter_mut().zip(r) {
            *a += x;
        }
        n += 1;
    }
    for a in &mut acc {
        *a /= n as f64;
    }
    acc
}

pub fn account_topic_vector(topics: &PostTopics, d: &Dataset, account_id: &str) -> Result<AccountTopicVector> {
    let a = d
        .account_index(account_id)
        .ok_or_else(|| Error::UnknownAccount(account_id.into()))?;
    topics.account_vector(d, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use rand::SeedableRng;

    /// Two disjoint 50-term vocabularies; post i is drawn from topic i % 2.
    fn planted(n_posts: usize, len: usize, seed: u64) -> (Vec<Vec<String>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut docs = Vec::new();
        let mut truth = Vec::new();
        for i in 0..n_posts {
            let t = i % 2;
            truth.push(t);
            docs.push((0..len).map(|_| format!("t{t}w{:02}", rng.random_range(0..50))).collect());
        }
        (docs, truth)
    }

    fn cfg(k: usize, iterations: usize, seed: u64) -> LdaConfig {
        LdaConfig {
            k,
            iterations,
            seed,
            ..LdaConfig::default()
        }
    }

    fn as_post(id: &str, tokens: &[String]) -> NormalizedPost {
        NormalizedPost::new(id, tokens.to_vec())
    }

    #[test]
    fn single_topic_is_corpus_frequency() {
        let docs: Vec<Vec<String>> = ["a a b", "b c", "a"]
            .iter()
            .map(|s| s.split(' ').map(|t| t.to_string()).collect())
            .collect();
        let (m, _) = fit_lda(&docs, &cfg(1, 5, 1)).unwrap();
        // counts a=3 b=2 c=1 of 6 tokens, smoothed by beta.
        let b = m.beta;
        let expected = [(3.0 + b) / (6.0 + 3.0 * b), (2.0 + b) / (6.0 + 3.0 * b), (1.0 + b) / (6.0 + 3.0 * b)];
        for (p, e) in m.phi(0).iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
        for (i, d) in docs.iter().enumerate() {
            let t = infer_post_topics(&m, &as_post(&format!("p{i}"), d), 10, 3);
            assert_eq!(t.probs, vec![1.0]);
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let (docs, _) = planted(60, 8, 4);
        let (a, _) = fit_lda(&docs, &cfg(3, 20, 9)).unwrap();
        let (b, _) = fit_lda(&docs, &cfg(3, 20, 9)).unwrap();
        let bits = |m: &TopicModel| m.term_topic().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn rows_are_distributions() {
        let (docs, _) = planted(40, 10, 5);
        let (m, _) = fit_lda(&docs, &cfg(4, 10, 2)).unwrap();
        for t in 0..4 {
            let s: f64 = m.phi(t).iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(m.phi(t).iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let docs = vec![Vec::<String>::new(); 3];
        assert_eq!(fit_lda(&docs, &cfg(2, 5, 0)).unwrap_err(), Error::EmptyCorpus);
    }

    #[test]
    fn too_many_topics_warns() {
        let docs = vec![vec!["a".to_string(), "b".to_string()]];
        let (_, w) = fit_lda(&docs, &cfg(5, 2, 0)).unwrap();
        assert_eq!(w, vec![FitWarning::MoreTopicsThanTerms { k: 5, terms: 2 }]);
    }

    #[test]
    fn gibbs_conserves_token_counts() {
        let (docs, _) = planted(30, 7, 8);
        let mut vocab: Vec<&String> = docs.iter().flatten().collect();
        vocab.sort();
        vocab.dedup();
        let coded: Vec<Vec<u32>> = docs
            .iter()
            .map(|d| d.iter().map(|t| vocab.binary_search(&t).unwrap() as u32).collect())
            .collect();
        let mut s = GibbsSampler::new(&coded, vocab.len(), 3, 0.1, 0.01, 1);
        for _ in 0..10 {
            s.sweep();
            assert_eq!(s.assigned_count(), s.token_count() as u64);
            for (d, doc) in coded.iter().enumerate() {
                let n: u32 = s.doc_topic_counts(d).iter().sum();
                assert_eq!(n as usize, doc.len());
            }
        }
    }

    #[test]
    fn empty_post_is_uniform() {
        let (docs, _) = planted(20, 5, 1);
        let (m, _) = fit_lda(&docs, &cfg(4, 5, 1)).unwrap();
        let t = infer_post_topics(&m, &as_post("e", &[]), 10, 0);
        assert_eq!(t.probs, vec![0.25; 4]);
        let t = infer_post_topics(&m, &as_post("oov", &["zzz".to_string()]), 10, 0);
        assert_eq!(t.probs, vec![0.25; 4]);
    }

    /// Map fitted topics onto planted ones by majority vote, then measure
    /// dominant-topic agreement.
    fn agreement(pred: &[usize], truth: &[usize]) -> f64 {
        let direct = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
        let flipped = pred.iter().zip(truth).filter(|(p, t)| **p == 1 - **t).count();
        direct.max(flipped) as f64 / truth.len() as f64
    }

    fn argmax(v: &[f64]) -> usize {
        let mut best = 0;
        for i in 1..v.len() {
            if v[i] > v[best] {
                best = i;
            }
        }
        best
    }

    #[test]
    fn recovers_planted_topics() {
        let (docs, truth) = planted(200, 12, 11);
        let (m, _) = fit_lda(&docs, &cfg(2, 100, 3)).unwrap();
        let pred: Vec<usize> = docs
            .iter()
            .enumerate()
            .map(|(i, d)| argmax(&infer_post_topics(&m, &as_post(&format!("p{i}"), d), 50, 5).probs))
            .collect();
        assert!(agreement(&pred, &truth) >= 0.95);

        // A post built only from one planted vocabulary is confidently assigned.
        let pure: Vec<String> = (0..10).map(|i| format!("t0w{i:02}")).collect();
        let t = infer_post_topics(&m, &as_post("pure", &pure), 50, 5);
        assert!(t.probs.iter().cloned().fold(0.0, f64::max) > 0.9);
        let j = argmax(&t.probs);
        let word_topic = argmax(&[m.phi(0)[m.term_id("t0w00").unwrap() as usize], m.phi(1)[m.term_id("t0w00").unwrap() as usize]]);
        assert_eq!(j, word_topic);
    }

    #[test]
    fn relabeling_is_a_consistent_permutation() {
        let (docs, _) = planted(120, 10, 2);
        let (a, _) = fit_lda(&docs, &cfg(2, 60, 1)).unwrap();
        let (b, _) = fit_lda(&docs, &cfg(2, 60, 99)).unwrap();
        // Greedy row alignment by φ dot product.
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let perm = if dot(a.phi(0), b.phi(0)) + dot(a.phi(1), b.phi(1)) >= dot(a.phi(0), b.phi(1)) + dot(a.phi(1), b.phi(0)) {
            [0, 1]
        } else {
            [1, 0]
        };
        for t in 0..2 {
            let diff: f64 = a.phi(t).iter().zip(b.phi(perm[t])).map(|(p, q)| (p - q).abs()).sum();
            assert!(diff < 0.2, "aligned rows differ by {diff}");
        }
        let mut agree = 0;
        for (i, d) in docs.iter().enumerate() {
            let p = as_post(&format!("p{i}"), d);
            let ta = argmax(&infer_post_topics(&a, &p, 30, 1).probs);
            let tb = argmax(&infer_post_topics(&b, &p, 30, 1).probs);
            if perm[ta] == tb {
                agree += 1;
            }
        }
        assert!(agree as f64 >= 0.95 * docs.len() as f64);
    }

    #[test]
    fn account_vector_is_mean() {
        use crate::corpus::fixtures::{account, post};
        use crate::corpus::Label;
        let d = Dataset::from_records(
            "mem",
            [account("a", Label::Unlabeled), account("b", Label::Unlabeled), account("c", Label::Unlabeled)],
            [post("p1", "a", "", 0), post("p2", "a", "", 1), post("p3", "b", "", 0)],
        )
        .unwrap();
        let pt = PostTopics {
            k: 2,
            dists: vec![
                PostTopicDistribution { post_id: "p1".into(), probs: vec![1.0, 0.0] },
                PostTopicDistribution { post_id: "p2".into(), probs: vec![0.0, 1.0] },
                PostTopicDistribution { post_id: "p3".into(), probs: vec![0.3, 0.7] },
            ],
        };
        assert_eq!(account_topic_vector(&pt, &d, "a").unwrap().probs, vec![0.5, 0.5]);
        assert_eq!(account_topic_vector(&pt, &d, "b").unwrap().probs, vec![0.3, 0.7]);
        assert_eq!(account_topic_vector(&pt, &d, "c").unwrap_err(), Error::NoPosts("c".into()));
    }

    #[test]
    fn mean_of_random_distributions_matches_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
                let s: f64 = raw.iter().sum();
                raw.iter().map(|x| x / s).collect()
            })
            .collect();
        let mean = mean_distribution(rows.iter().map(|r| &r[..]), 4);
        for j in 0..4 {
            let mut s = 0.0;
            for r in &rows {
                s += r[j];
            }
            assert!((mean[j] - s / 5.0).abs() < 1e-15);
        }
        assert!((mean.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
