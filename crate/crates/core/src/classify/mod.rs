//! Similarity-driven KNN labeling and the account authenticity score.
//!
//! The authenticity of `x` is the KNN confidence that it is legitimate:
//!
//! ```text
//! acc-auth(x) = 0.5 - Σ_{y ∈ N_abuser(x)} f(x,y) / Σ_{y ∈ N(x)} f(x,y)
//! ```
//!
//! where `N(x)` are the `k` most similar labeled accounts and `N_abuser(x)`
//! the abusers among them. A zero denominator yields 0.

mod kmeans;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::similarity::{SimilarityKind, SimilarityMatrix};

pub use kmeans::{kmeans, label_candidates_by_clustering, ClusterSample, KMeans, KMEANS_MAX_ITERATIONS, KMEANS_TOLERANCE};

pub const DEFAULT_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnnConfig {
    pub k: usize,
    pub kind: SimilarityKind,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            kind: SimilarityKind::BagOfWords,
        }
    }
}

/// A labeled account offered as a potential neighbor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<'a> {
    pub id: &'a str,
    pub label: Label,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: String,
    pub label: Label,
    pub similarity: f64,
}

/// N^k(x), most similar first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub query: String,
    pub neighbors: Vec<Neighbor>,
}

/// acc-auth(x), in `[-0.5, 0.5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthenticityScore {
    pub account_id: String,
    pub value: f64,
}

/// The `k` most similar labeled candidates, ties at equal similarity
/// broken by ascending id. The query itself and unlabeled candidates are
/// skipped.
pub fn nearest_neighbors<'a>(
    query: &str,
    candidates: impl IntoIterator<Item = Candidate<'a>>,
    k: usize,
) -> Result<Neighborhood> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut pool: Vec<Candidate<'a>> = candidates
        .into_iter()
        .filter(|c| c.id != query && c.label.is_labeled())
        .collect();
    if pool.len() < k {
        return Err(Error::NotEnoughLabeled {
            needed: k,
            available: pool.len(),
        });
    }
    let order = |a: &Candidate<'_>, b: &Candidate<'_>| {
        b.similarity.total_cmp(&a.similarity).then_with(|| a.id.cmp(b.id))
    };
    if pool.len() > k {
        pool.select_nth_unstable_by(k - 1, order);
        pool.truncate(k);
    }
    pool.sort_by(order);
    Ok(Neighborhood {
        query: query.into(),
        neighbors: pool
            .into_iter()
            .map(|c| Neighbor {
                id: c.id.into(),
                label: c.label,
                similarity: c.similarity,
            })
            .collect(),
    })
}

/// Majority label of the neighborhood. A tied vote goes to the side with
/// the larger similarity sum, and a tie on that as well to `Abuser`.
pub fn knn_label(n: &Neighborhood) -> Label {
    let (mut votes_a, mut votes_l, mut mass_a, mut mass_l) = (0usize, 0usize, 0.0, 0.0);
    for nb in &n.neighbors {
        match nb.label {
            Label::Abuser => {
                votes_a += 1;
                mass_a += nb.similarity;
            }
            Label::Legitimate => {
                votes_l += 1;
                mass_l += nb.similarity;
            }
            Label::Unlabeled => {}
        }
    }
    match votes_a.cmp(&votes_l) {
        Ordering::Greater => Label::Abuser,
        Ordering::Less => Label::Legitimate,
        Ordering::Equal if mass_l > mass_a => Label::Legitimate,
        Ordering::Equal => Label::Abuser,
    }
}

/// acc-auth from the neighborhood similarities.
pub fn authenticity_value(neighbors: &[Neighbor]) -> f64 {
    let total: f64 = neighbors.iter().map(|n| n.similarity).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let abusive: f64 = neighbors
        .iter()
        .filter(|n| n.label == Label::Abuser)
        .map(|n| n.similarity)
        .sum();
    (0.5 - abusive / total).clamp(-0.5, 0.5)
}

pub fn account_authenticity(n: &Neighborhood) -> AuthenticityScore {
    AuthenticityScore {
        account_id: n.query.clone(),
        value: authenticity_value(&n.neighbors),
    }
}

/// Neighborhood of matrix row `x` among the matrix rows listed in
/// `labeled` (with their labels).
pub fn neighborhood_in(m: &SimilarityMatrix, x: usize, labeled: &[(usize, Label)], k: usize) -> Result<Neighborhood> {
    let ids = m.ids();
    let row = m.row(x);
    nearest_neighbors(
        &ids[x],
        labeled.iter().map(|&(j, label)| Candidate {
            id: &ids[j],
            label,
            similarity: row[j],
        }),
        k,
    )
}

/// One line of `scores.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountScore {
    pub account_id: String,
    pub value: f64,
    pub label_pred: Label,
}

/// Score every account of the matrix. `labels` is aligned with the matrix
/// ids. With `fix_labeled`, labeled accounts keep ±0.5 from their own label
/// instead of being scored by their neighbors.
pub fn score_accounts(m: &SimilarityMatrix, labels: &[Label], k: usize, fix_labeled: bool) -> Result<Vec<AccountScore>> {
    let labeled: Vec<(usize, Label)> = labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_labeled())
        .map(|(i, &l)| (i, l))
        .collect();
    (0..m.len()).map(|x| score_one(m, x, labels[x], &labeled, k, fix_labeled)).collect()
}

/// Score a single matrix row; see [`score_accounts`].
pub fn score_one(
    m: &SimilarityMatrix,
    x: usize,
    label: Label,
    labeled: &[(usize, Label)],
    k: usize,
    fix_labeled: bool,
) -> Result<AccountScore> {
    let id = m.ids()[x].clone();
    if fix_labeled && label.is_labeled() {
        let value = if label == Label::Legitimate { 0.5 } else { -0.5 };
        return Ok(AccountScore {
            account_id: id,
            value,
            label_pred: label,
        });
    }
    let n = neighborhood_in(m, x, labeled, k)?;
    Ok(AccountScore {
        account_id: id,
        value: authenticity_value(&n.neighbors),
        label_pred: knn_label(&n),
    })
}
