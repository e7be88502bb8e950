//! Profile and behavior feature vectors, and min-max normalization.
//!
//! Feature order is part of the output contract:
//!
//! | # | profile                      | behavior          |
//! |---|------------------------------|-------------------|
//! | 0 | age_days                     | total_retweets    |
//! | 1 | followers                    | avg_retweets      |
//! | 2 | friends                      | avg_hashtags      |
//! | 3 | friend_follower_ratio        | avg_hyperlinks    |
//! | 4 | statuses_total               | avg_user_mentions |
//! | 5 | default_profile              | avg_post_length   |
//! | 6 | default_image                |                   |
//! | 7 | listed_count                 |                   |
//! | 8 | verified                     |                   |
//! | 9 | screen_name_length           |                   |
//! |10 | avg_minutes_between_posts    |                   |
//! |11 | avg_posts_per_lifetime_day   |                   |
//! |12 | avg_posts_per_active_day     |                   |
//! |13 | retweets_received            |                   |
//!
//! Every ratio uses safe division: a zero denominator is replaced by 1.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Account, Post};

pub const PROFILE_FEATURES: [&str; 14] = [
    "age_days",
    "followers",
    "friends",
    "friend_follower_ratio",
    "statuses_total",
    "default_profile",
    "default_image",
    "listed_count",
    "verified",
    "screen_name_length",
    "avg_minutes_between_posts",
    "avg_posts_per_lifetime_day",
    "avg_posts_per_active_day",
    "retweets_received",
];

pub const BEHAVIOR_FEATURES: [&str; 6] = [
    "total_retweets",
    "avg_retweets",
    "avg_hashtags",
    "avg_hyperlinks",
    "avg_user_mentions",
    "avg_post_length",
];

const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFeatureVector(pub [f64; 14]);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorFeatureVector(pub [f64; 6]);

fn safe_div(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// `posts` may be in any order.
pub fn extract_profile_features(account: &Account, posts: &[&Post]) -> ProfileFeatureVector {
    let p = &account.profile;
    let mut ts: Vec<i64> = posts.iter().map(|p| p.timestamp).collect();
    ts.sort_unstable();
    let avg_minutes = if ts.len() < 2 {
        0.0
    } else {
        let gaps: f64 = ts.windows(2).map(|w| (w[1] - w[0]) as f64 / 60.0).sum();
        gaps / (ts.len() - 1) as f64
    };
    let active_days: BTreeSet<i64> = ts.iter().map(|t| t.div_euclid(SECONDS_PER_DAY)).collect();
    let per_active_day = safe_div(posts.len() as f64, active_days.len() as f64);
    let retweets_received: u64 = posts.iter().map(|p| p.retweet_count).sum();
    ProfileFeatureVector([
        p.age_days as f64,
        p.followers as f64,
        p.friends as f64,
        safe_div(p.friends as f64, p.followers as f64),
        p.statuses_total as f64,
        flag(p.default_profile),
        flag(p.default_image),
        p.listed_count as f64,
        flag(p.verified),
        p.screen_name_length as f64,
        avg_minutes,
        p.statuses_total as f64 / p.age_days.max(1) as f64,
        per_active_day,
        retweets_received as f64,
    ])
}

/// Averages over the account's posts. Hashtag, URL and mention counts come
/// from the posts' entity fields; post length counts characters of the raw
/// text.
pub fn extract_behavior_features(posts: &[&Post]) -> BehaviorFeatureVector {
    let n = posts.len() as f64;
    let total_retweets: u64 = posts.iter().map(|p| p.retweet_count).sum();
    let sum = |f: &dyn Fn(&Post) -> usize| posts.iter().map(|p| f(p) as f64).sum::<f64>();
    BehaviorFeatureVector([
        total_retweets as f64,
        safe_div(total_retweets as f64, n),
        safe_div(sum(&|p| p.hashtags.len()), n),
        safe_div(sum(&|p| p.urls.len()), n),
        safe_div(sum(&|p| p.mentions.len()), n),
        safe_div(sum(&|p| p.text.chars().count()), n),
    ])
}

/// Per-dimension min-max scaling to `[0, 1]`; constant dimensions map to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    /// Returns `None` for an empty collection.
    pub fn fit<'a, I>(vectors: I) -> Option<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut iter = vectors.into_iter();
        let first = iter.next()?;
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for v in iter {
            for (i, &x) in v.iter().enumerate() {
                min[i] = min[i].min(x);
                max[i] = max[i].max(x);
            }
        }
        Some(Self { min, max })
    }

    /// Values outside the fitted range are clamped.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .enumerate()
            .map(|(i, &x)| {
                let span = self.max[i] - self.min[i];
                if span <= 0.0 {
                    0.0
                } else {
                    ((x - self.min[i]) / span).clamp(0.0, 1.0)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::{account, post};
    use crate::corpus::Label;
    use alloc::vec;

    #[test]
    fn no_posts_gives_zero_rates() {
        let a = account("a", Label::Unlabeled);
        let f = extract_profile_features(&a, &[]);
        assert_eq!(f.0[10], 0.0);
        assert_eq!(f.0[12], 0.0);
        assert_eq!(extract_behavior_features(&[]).0, [0.0; 6]);
    }

    #[test]
    fn zero_followers_ratio_uses_denominator_one() {
        let mut a = account("a", Label::Unlabeled);
        a.profile.friends = 7;
        a.profile.followers = 0;
        assert_eq!(extract_profile_features(&a, &[]).0[3], 7.0);
        a.profile.followers = 2;
        assert_eq!(extract_profile_features(&a, &[]).0[3], 3.5);
    }

    #[test]
    fn minutes_between_posts() {
        let a = account("a", Label::Unlabeled);
        let ps = [post("1", "a", "", 1200), post("2", "a", "", 0), post("3", "a", "", 600)];
        let refs: Vec<&Post> = ps.iter().collect();
        let f = extract_profile_features(&a, &refs);
        assert_eq!(f.0[10], 10.0);
        // All three on the first UTC day.
        assert_eq!(f.0[12], 3.0);
    }

    #[test]
    fn lifetime_rate_uses_age_at_least_one() {
        let mut a = account("a", Label::Unlabeled);
        a.profile.statuses_total = 50;
        assert_eq!(extract_profile_features(&a, &[]).0[11], 50.0);
        a.profile.age_days = 10;
        assert_eq!(extract_profile_features(&a, &[]).0[11], 5.0);
    }

    #[test]
    fn average_hashtags() {
        let mut p1 = post("1", "a", "", 0);
        p1.hashtags = vec!["#a".into(), "#b".into()];
        let mut p2 = post("2", "a", "", 0);
        p2.hashtags = vec!["#a".into(), "#b".into(), "#c".into(), "#d".into()];
        assert_eq!(extract_behavior_features(&[&p1, &p2]).0[2], 3.0);
    }

    #[test]
    fn behavior_matches_spreadsheet_recompute() {
        let mk = |id: &str, text: &str, rt: u64, h: usize, u: usize, m: usize| {
            let mut p = post(id, "a", text, 0);
            p.retweet_count = rt;
            p.hashtags = vec!["#h".into(); h];
            p.urls = vec!["http://u".into(); u];
            p.mentions = vec!["@m".into(); m];
            p
        };
        let ps = [
            mk("1", "hello", 3, 1, 0, 2),
            mk("2", "héllo wörld", 0, 0, 1, 0),
            mk("3", "", 10, 2, 2, 1),
            mk("4", "abc", 1, 0, 0, 0),
        ];
        let refs: Vec<&Post> = ps.iter().collect();
        let f = extract_behavior_features(&refs);
        // Hand-tabulated columns: rt 3+0+10+1, hashtags 1+0+2+0, urls 0+1+2+0,
        // mentions 2+0+1+0, chars 5+11+0+3.
        assert_eq!(f.0, [14.0, 3.5, 0.75, 0.75, 0.75, 4.75]);
    }

    #[test]
    fn normalizer_rules() {
        let single = [1.0, 2.0, 3.0];
        let n = Normalizer::fit([&single[..]]).unwrap();
        assert_eq!(n.apply(&single), vec![0.0, 0.0, 0.0]);

        let vs = [[10.0], [20.0], [30.0]];
        let n = Normalizer::fit(vs.iter().map(|v| &v[..])).unwrap();
        let scaled: Vec<f64> = vs.iter().map(|v| n.apply(v)[0]).collect();
        assert_eq!(scaled, vec![0.0, 0.5, 1.0]);
        assert_eq!(n.apply(&[40.0]), vec![1.0]);
        assert!(Normalizer::fit(core::iter::empty()).is_none());
    }

    proptest::proptest! {
        #[test]
        fn normalization_is_idempotent(rows in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 4), 1..20)) {
            let n = Normalizer::fit(rows.iter().map(|r| &r[..])).unwrap();
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| n.apply(r)).collect();
            for s in &scaled {
                proptest::prop_assert!(s.iter().all(|x| (0.0..=1.0).contains(x)));
            }
            let again = Normalizer::fit(scaled.iter().map(|r| &r[..])).unwrap();
            for s in &scaled {
                let twice = again.apply(s);
                for (a, b) in s.iter().zip(&twice) {
                    proptest::prop_assert!((a - b).abs() < 1e-12);
                }
            }
        }
    }
}
