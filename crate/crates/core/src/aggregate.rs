//! Topic authenticity: account scores aggregated per topic at post level
//! and at author level.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::topics::PostTopics;

/// Argmax of a distribution, lowest index on ties.
pub fn dominant_topic(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

fn check_topic(topics: &PostTopics, topic: usize) -> Result<()> {
    if topic >= topics.k {
        return Err(Error::TopicOutOfRange { topic, k: topics.k });
    }
    Ok(())
}

/// D(i): accounts with at least one post whose dominant topic is `topic`.
pub fn topic_members(d: &Dataset, topics: &PostTopics, topic: usize) -> BTreeSet<String> {
    (0..d.posts().len())
        .filter(|&p| dominant_topic(topics.probs(p)) == topic)
        .map(|p| d.accounts()[d.author_index(p)].id.clone())
        .collect()
}

/// Scores aligned with `d.accounts()`. Every account that authored a post
/// must have a score; post-less accounts may be missing.
pub(crate) fn aligned_scores(d: &Dataset, scores: &BTreeMap<String, f64>) -> Result<Vec<Option<f64>>> {
    d.accounts()
        .iter()
        .enumerate()
        .map(|(a, acc)| match scores.get(&acc.id) {
            Some(&s) => Ok(Some(s)),
            None if d.post_indices_of(a).is_empty() => Ok(None),
            None => Err(Error::MissingScore(acc.id.clone())),
        })
        .collect()
}

/// Σ_p T(p,i) · acc-auth(A(p)).
pub fn topic_auth_post_level(d: &Dataset, topics: &PostTopics, scores: &BTreeMap<String, f64>, topic: usize) -> Result<f64> {
    check_topic(topics, topic)?;
    let s = aligned_scores(d, scores)?;
    Ok((0..d.posts().len())
        .map(|p| topics.probs(p)[topic] * s[d.author_index(p)].unwrap_or(0.0))
        .sum())
}

/// Σ_{x ∈ D(i)} acc-auth(x).
pub fn topic_auth_author_level(d: &Dataset, topics: &PostTopics, scores: &BTreeMap<String, f64>, topic: usize) -> Result<f64> {
    check_topic(topics, topic)?;
    aligned_scores(d, scores)?;
    topic_members(d, topics, topic)
        .iter()
        .map(|id| scores.get(id).copied().ok_or_else(|| Error::MissingScore(id.clone())))
        .sum()
}

/// Both aggregates for one topic, with size-normalized means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicAuthenticity {
    pub topic: usize,
    /// Σ_p T(p,i) · acc-auth(A(p)).
    pub post_level: f64,
    /// Σ_{x ∈ D(i)} acc-auth(x).
    pub author_level: f64,
    /// `post_level / Σ_p T(p,i)`; absent when the weight is 0.
    pub post_level_mean: Option<f64>,
    /// `author_level / |D(i)|`; absent when D(i) is empty.
    pub author_level_mean: Option<f64>,
    /// Σ_p T(p,i).
    pub post_weight: f64,
    /// D(i), sorted.
    pub members: Vec<String>,
}

/// All topics in one pass over the posts.
pub fn aggregate_topics(d: &Dataset, topics: &PostTopics, scores: &BTreeMap<String, f64>) -> Result<Vec<TopicAuthenticity>> {
    let k = topics.k;
    let s = aligned_scores(d, scores)?;
    let mut post_level = vec![0.0; k];
    let mut weight = vec![0.0; k];
    let mut members: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for p in 0..d.posts().len() {
        let probs = topics.probs(p);
        let author = d.author_index(p);
        let score = s[author].unwrap_or(0.0);
        for i in 0..k {
            post_level[i] += probs[i] * score;
            weight[i] += probs[i];
        }
        members[dominant_topic(probs)].insert(author);
    }
    Ok((0..k)
        .map(|i| {
            let author_level: f64 = members[i].iter().map(|&a| s[a].unwrap_or(0.0)).sum();
            let n = members[i].len();
            TopicAuthenticity {
                topic: i,
                post_level: post_level[i],
                author_level,
                post_level_mean: (weight[i] > 0.0).then(|| post_level[i] / weight[i]),
                author_level_mean: (n > 0).then(|| author_level / n as f64),
                post_weight: weight[i],
                // Account positions are id-ordered.
                members: members[i].iter().map(|&a| d.accounts()[a].id.clone()).collect(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::{account, post};
    use crate::corpus::Label;
    use crate::topics::PostTopicDistribution;
    use alloc::format;
    use alloc::string::ToString;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn argmax_rules() {
        assert_eq!(dominant_topic(&[0.1, 0.7, 0.2]), 1);
        assert_eq!(dominant_topic(&[1.0 / 3.0; 3]), 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let v: Vec<f64> = (0..6).map(|_| rng.random_range(0..4) as f64).collect();
            let mut best = 0;
            for i in 0..v.len() {
                if v[i] > v[best] {
                    best = i;
                }
            }
            assert_eq!(dominant_topic(&v), best);
        }
    }

    /// Random fixture: `n_acc` accounts, `n_posts` posts, K topics.
    fn fixture(n_acc: usize, n_posts: usize, k: usize, seed: u64) -> (Dataset, PostTopics, BTreeMap<String, f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let accounts: Vec<_> = (0..n_acc).map(|i| account(&format!("a{i}"), Label::Unlabeled)).collect();
        let posts: Vec<_> = (0..n_posts)
            .map(|i| post(&format!("p{i:02}"), &format!("a{}", rng.random_range(0..n_acc)), "", i as i64))
            .collect();
        let d = Dataset::from_records("mem", accounts, posts).unwrap();
        let dists = d
            .posts()
            .iter()
            .map(|p| {
                let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
                let s: f64 = raw.iter().sum();
                PostTopicDistribution {
                    post_id: p.id.clone(),
                    probs: raw.iter().map(|x| x / s).collect(),
                }
            })
            .collect();
        let scores = (0..n_acc)
            .map(|i| (format!("a{i}"), rng.random_range(-0.5..=0.5)))
            .collect();
        (d, PostTopics { k, dists }, scores)
    }

    #[test]
    fn single_post_cases() {
        let d = Dataset::from_records("mem", [account("x", Label::Legitimate)], [post("p", "x", "", 0)]).unwrap();
        let t = PostTopics {
            k: 2,
            dists: alloc::vec![PostTopicDistribution { post_id: "p".into(), probs: alloc::vec![1.0, 0.0] }],
        };
        let scores: BTreeMap<String, f64> = [("x".to_string(), 0.5)].into_iter().collect();
        assert_eq!(topic_auth_post_level(&d, &t, &scores, 0).unwrap(), 0.5);
        assert_eq!(topic_members(&d, &t, 0).into_iter().collect::<Vec<_>>(), ["x"]);
        assert!(topic_members(&d, &t, 1).is_empty());
        assert_eq!(topic_auth_author_level(&d, &t, &scores, 1).unwrap(), 0.0);
        assert_eq!(
            topic_auth_post_level(&d, &t, &scores, 2).unwrap_err(),
            Error::TopicOutOfRange { topic: 2, k: 2 }
        );
        let missing = BTreeMap::new();
        assert_eq!(topic_auth_post_level(&d, &t, &missing, 0).unwrap_err(), Error::MissingScore("x".into()));
    }

    #[test]
    fn zero_scores_annihilate() {
        let (d, t, mut scores) = fixture(4, 10, 3, 1);
        for v in scores.values_mut() {
            *v = 0.0;
        }
        for i in 0..3 {
            assert_eq!(topic_auth_post_level(&d, &t, &scores, i).unwrap(), 0.0);
        }
    }

    #[test]
    fn cancellation() {
        let d = Dataset::from_records(
            "mem",
            [account("a", Label::Unlabeled), account("b", Label::Unlabeled)],
            [post("p1", "a", "", 0), post("p2", "b", "", 0)],
        )
        .unwrap();
        let t = PostTopics {
            k: 1,
            dists: alloc::vec![
                PostTopicDistribution { post_id: "p1".into(), probs: alloc::vec![1.0] },
                PostTopicDistribution { post_id: "p2".into(), probs: alloc::vec![1.0] },
            ],
        };
        let scores: BTreeMap<String, f64> = [("a".to_string(), 0.5), ("b".to_string(), -0.5)].into_iter().collect();
        assert_eq!(topic_auth_author_level(&d, &t, &scores, 0).unwrap(), 0.0);
    }

    #[test]
    fn matches_term_by_term_oracle() {
        for seed in 0..5 {
            let (d, t, scores) = fixture(5, 30, 4, seed);
            let agg = aggregate_topics(&d, &t, &scores).unwrap();
            for i in 0..4 {
                // Enumerate posts independently through the public lookups.
                let mut post_sum = 0.0;
                let mut members = BTreeSet::new();
                for (pi, p) in d.posts().iter().enumerate() {
                    let author = d.author_of(&p.id).unwrap();
                    post_sum += t.dists[pi].probs[i] * scores[&author.id];
                    let probs = &t.dists[pi].probs;
                    if probs.iter().all(|&q| q <= probs[i]) && probs[..i].iter().all(|&q| q < probs[i]) {
                        members.insert(author.id.clone());
                    }
                }
                let author_sum: f64 = members.iter().map(|m| scores[m]).sum();
                assert!((agg[i].post_level - post_sum).abs() < 1e-9);
                assert!((agg[i].author_level - author_sum).abs() < 1e-9);
                assert_eq!(agg[i].members, members.iter().cloned().collect::<Vec<_>>());
                assert_eq!(topic_members(&d, &t, i), members);
                assert!((topic_auth_post_level(&d, &t, &scores, i).unwrap() - post_sum).abs() < 1e-9);
                assert!((topic_auth_author_level(&d, &t, &scores, i).unwrap() - author_sum).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn conservation_and_linearity() {
        let (d, t, scores) = fixture(6, 25, 5, 11);
        let agg = aggregate_topics(&d, &t, &scores).unwrap();
        let total: f64 = agg.iter().map(|a| a.post_level).sum();
        let direct: f64 = d.posts().iter().map(|p| scores[&p.author_id]).sum();
        assert!((total - direct).abs() < 1e-9);

        let scaled: BTreeMap<String, f64> = scores.iter().map(|(k, v)| (k.clone(), v * 0.25)).collect();
        let agg2 = aggregate_topics(&d, &t, &scaled).unwrap();
        for (a, b) in agg.iter().zip(&agg2) {
            assert!((a.post_level * 0.25 - b.post_level).abs() < 1e-12);
            assert!((a.author_level * 0.25 - b.author_level).abs() < 1e-12);
        }

        // Every account with posts lands in at least one D(i).
        let covered: BTreeSet<&String> = agg.iter().flat_map(|a| &a.members).collect();
        for (a, acc) in d.accounts().iter().enumerate() {
            if !d.post_indices_of(a).is_empty() {
                assert!(covered.contains(&acc.id));
            }
        }
        for a in &agg {
            if let Some(m) = a.author_level_mean {
                assert!((-0.5..=0.5).contains(&m));
            }
            if let Some(m) = a.post_level_mean {
                assert!((-0.5 - 1e-12..=0.5 + 1e-12).contains(&m));
            }
        }
    }
}
