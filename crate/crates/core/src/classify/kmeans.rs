//! k-means with k-means++ seeding, used to pick diverse accounts for
//! manual labeling.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Post};
use crate::error::{Error, Result};
use crate::features::{extract_profile_features, Normalizer};
use crate::rng::rng_for;

pub const KMEANS_MAX_ITERATIONS: usize = 300;
pub const KMEANS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = dist2(p, centroid);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<KMeans> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one cluster".into()));
    }
    if k > points.len() {
        return Err(Error::TooManyClusters {
            clusters: k,
            points: points.len(),
        });
    }
    let mut rng = rng_for(seed, 0x6b6d);
    let mut chosen = vec![false; points.len()];
    let first = rng.random_range(0..points.len());
    chosen[first] = true;
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && u < acc {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            // Only duplicates of existing centroids remain.
            let free: Vec<usize> = (0..points.len()).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        centroids.push(points[next].clone());
        let c = centroids.last().unwrap();
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, c));
        }
    }

    let dim = points[0].len();
    let mut assignments = vec![0; points.len()];
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITERATIONS {
        iterations += 1;
        for (i, p) in points.iter().enumerate() {
            assignments[i] = nearest(p, &centroids);
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut moved: f64 = 0.0;
        for c in 0..k {
            // Empty clusters keep their centroid.
            if counts[c] == 0 {
                continue;
            }
            let next: Vec<f64> = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            moved = moved.max(libm::sqrt(dist2(&next, &centroids[c])));
            centroids[c] = next;
        }
        if moved < KMEANS_TOLERANCE {
            break;
        }
    }
    for (i, p) in points.iter().enumerate() {
        assignments[i] = nearest(p, &centroids);
    }
    Ok(KMeans {
        assignments,
        centroids,
        iterations,
    })
}

/// One line of `candidates.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterSample {
    pub cluster: usize,
    pub size: usize,
    pub account_ids: Vec<String>,
}

/// Cluster accounts on min-max normalized profile features and sample up to
/// `per_cluster` accounts from each cluster without replacement.
pub fn label_candidates_by_clustering(d: &Dataset, n_clusters: usize, per_cluster: usize, seed: u64) -> Result<Vec<ClusterSample>> {
    let raw: Vec<Vec<f64>> = d
        .accounts()
        .iter()
        .enumerate()
        .map(|(a, account)| {
            let posts: Vec<&Post> = d.post_indices_of(a).iter().map(|&p| &d.posts()[p]).collect();
            extract_profile_features(account, &posts).0.to_vec()
        })
        .collect();
    let points = match Normalizer::fit(raw.iter().map(|v| &v[..])) {
        Some(n) => raw.iter().map(|v| n.apply(v)).collect(),
        None => raw,
    };
    let km = kmeans(&points, n_clusters, seed)?;
    let mut rng = rng_for(seed, 0x5a4d);
    let mut out = Vec::with_capacity(n_clusters);
    for c in 0..n_clusters {
        let members: Vec<usize> = (0..points.len()).filter(|&i| km.assignments[i] == c).collect();
        let take = per_cluster.min(members.len());
        let mut picked: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), take)
            .into_iter()
            .map(|i| members[i])
            .collect();
        picked.sort_unstable();
        out.push(ClusterSample {
            cluster: c,
            size: members.len(),
            account_ids: picked.into_iter().map(|i| d.accounts()[i].id.clone()).collect(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::account;
    use crate::corpus::Label;
    use alloc::format;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Box-Muller standard normal.
    fn normal(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    #[test]
    fn two_blobs_are_separated() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut pts = Vec::new();
        let mut truth = Vec::new();
        for i in 0..200 {
            let center = if i % 2 == 0 { [0.0, 0.0, 0.0] } else { [5.0, 5.0, 5.0] };
            pts.push(center.iter().map(|c| c + 0.5 * normal(&mut rng)).collect::<Vec<f64>>());
            truth.push(i % 2);
        }
        let km = kmeans(&pts, 2, 1).unwrap();
        let agree = km.assignments.iter().zip(&truth).filter(|(a, t)| a == t).count();
        let agree = agree.max(200 - agree);
        assert!(agree as f64 >= 0.95 * 200.0);
        assert!(km.iterations <= KMEANS_MAX_ITERATIONS);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, (i * i) as f64]).collect();
        let km = kmeans(&pts, 6, 3).unwrap();
        let mut seen = km.assignments.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn too_many_clusters() {
        let pts = vec![vec![0.0], vec![1.0]];
        assert_eq!(kmeans(&pts, 3, 0).unwrap_err(), Error::TooManyClusters { clusters: 3, points: 2 });
    }

    #[test]
    fn candidate_sampling() {
        let accounts: Vec<_> = (0..30)
            .map(|i| {
                let mut a = account(&format!("acc{i:02}"), Label::Unlabeled);
                a.profile.followers = if i < 15 { 10 + i } else { 10_000 + i };
                a.profile.age_days = if i < 15 { 5 } else { 3000 };
                a
            })
            .collect();
        let d = Dataset::from_records("mem", accounts, []).unwrap();
        let a = label_candidates_by_clustering(&d, 2, 4, 9).unwrap();
        let b = label_candidates_by_clustering(&d, 2, 4, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        for c in &a {
            assert_eq!(c.size, 15);
            assert_eq!(c.account_ids.len(), 4);
        }
        let big = label_candidates_by_clustering(&d, 2, 100, 9).unwrap();
        assert!(big.iter().all(|c| c.account_ids.len() == c.size));
        assert!(label_candidates_by_clustering(&d, 31, 1, 0).is_err());
    }
}
