//! Synthetic corpora with known classes and planted topics.
//!
//! Posts are bags of opaque tokens. Topic `t` owns the words `t<t>w<j>`,
//! campaign `c` owns `c<c>w<j>`; both survive normalization unchanged.
//!
//! * legitimate accounts write topic posts drawn from one to three favourite
//!   topics, with a `topic_mixing` share of tokens from their other
//!   favourites;
//! * bots copy posts verbatim from a small per-campaign pool
//!   (`duplicate_rate`) and otherwise write fresh campaign posts;
//! * crowdturfers rewrite pool posts, resampling each token from the
//!   campaign vocabulary with probability `paraphrase_rate`.
//!
//! Non-bot posts are never equal to each other or to a pool post.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Account, Dataset, Label, Post, ProfileRaw};
use crate::error::{Error, Result};
use crate::rng::rng_for;

const EPOCH: i64 = 1_500_000_000;
const DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccountClass {
    Legitimate,
    Bot,
    Crowdturfer,
}

impl AccountClass {
    pub fn label(self) -> Label {
        match self {
            AccountClass::Legitimate => Label::Legitimate,
            _ => Label::Abuser,
        }
    }
}

/// Inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRange {
    pub min: usize,
    pub max: usize,
}

impl CountRange {
    fn sample(self, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(self.min..=self.max)
    }
}

/// Normal(mean, spread) clamped at 0 and rounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub mean: f64,
    pub spread: f64,
}

impl FieldSpec {
    const fn new(mean: f64, spread: f64) -> Self {
        Self { mean, spread }
    }

    fn sample(self, rng: &mut ChaCha8Rng) -> u64 {
        let x = self.mean + self.spread * standard_normal(rng);
        libm::round(x.max(0.0)) as u64
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Archetype {
    pub age_days: FieldSpec,
    pub followers: FieldSpec,
    pub friends: FieldSpec,
    pub statuses_total: FieldSpec,
    pub listed_count: FieldSpec,
    pub screen_name_length: FieldSpec,
    pub default_profile_rate: f64,
    pub default_image_rate: f64,
    pub verified_rate: f64,
    /// Probability that a post is flagged as a retweet.
    pub retweet_rate: f64,
    /// Mean retweets received per post.
    pub retweets_received: f64,
    /// Probability that a post carries a mention.
    pub mention_rate: f64,
    /// Probability that a post carries a hashtag.
    pub hashtag_rate: f64,
    /// Probability that a post carries a link.
    pub url_rate: f64,
    /// Days over which posts are spread.
    pub active_span_days: f64,
}

impl Archetype {
    fn sample_profile(&self, rng: &mut ChaCha8Rng) -> ProfileRaw {
        ProfileRaw {
            age_days: self.age_days.sample(rng).max(1),
            followers: self.followers.sample(rng),
            friends: self.friends.sample(rng),
            statuses_total: self.statuses_total.sample(rng),
            default_profile: rng.random_bool(self.default_profile_rate),
            default_image: rng.random_bool(self.default_image_rate),
            listed_count: self.listed_count.sample(rng),
            verified: rng.random_bool(self.verified_rate),
            screen_name_length: self.screen_name_length.sample(rng).clamp(1, 15),
        }
    }

    fn rates(&self) -> [f64; 7] {
        [
            self.default_profile_rate,
            self.default_image_rate,
            self.verified_rate,
            self.retweet_rate,
            self.mention_rate,
            self.hashtag_rate,
            self.url_rate,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Archetypes {
    pub legitimate: Archetype,
    pub bot: Archetype,
    pub crowdturfer: Archetype,
}

impl Default for Archetypes {
    fn default() -> Self {
        Self {
            legitimate: Archetype {
                age_days: FieldSpec::new(1500.0, 600.0),
                followers: FieldSpec::new(800.0, 500.0),
                friends: FieldSpec::new(400.0, 250.0),
                statuses_total: FieldSpec::new(5000.0, 3000.0),
                listed_count: FieldSpec::new(20.0, 15.0),
                screen_name_length: FieldSpec::new(10.0, 3.0),
                default_profile_rate: 0.2,
                default_image_rate: 0.05,
                verified_rate: 0.1,
                retweet_rate: 0.15,
                retweets_received: 3.0,
                mention_rate: 0.25,
                hashtag_rate: 0.2,
                url_rate: 0.15,
                active_span_days: 365.0,
            },
            bot: Archetype {
                age_days: FieldSpec::new(120.0, 100.0),
                followers: FieldSpec::new(80.0, 80.0),
                friends: FieldSpec::new(1200.0, 700.0),
                statuses_total: FieldSpec::new(12000.0, 8000.0),
                listed_count: FieldSpec::new(2.0, 2.0),
                screen_name_length: FieldSpec::new(13.0, 2.0),
                default_profile_rate: 0.7,
                default_image_rate: 0.4,
                verified_rate: 0.0,
                retweet_rate: 0.4,
                retweets_received: 0.5,
                mention_rate: 0.1,
                hashtag_rate: 0.6,
                url_rate: 0.6,
                active_span_days: 20.0,
            },
            crowdturfer: Archetype {
                age_days: FieldSpec::new(700.0, 500.0),
                followers: FieldSpec::new(400.0, 350.0),
                friends: FieldSpec::new(700.0, 400.0),
                statuses_total: FieldSpec::new(4000.0, 3000.0),
                listed_count: FieldSpec::new(8.0, 8.0),
                screen_name_length: FieldSpec::new(11.0, 3.0),
                default_profile_rate: 0.4,
                default_image_rate: 0.15,
                verified_rate: 0.02,
                retweet_rate: 0.15,
                retweets_received: 2.5,
                mention_rate: 0.25,
                hashtag_rate: 0.25,
                url_rate: 0.2,
                active_span_days: 90.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_legit: usize,
    pub n_bots: usize,
    pub n_crowdturfers: usize,
    pub posts_per_account: CountRange,
    pub tokens_per_post: CountRange,
    pub n_topics: usize,
    pub vocab_size_per_topic: usize,
    /// Share of a legitimate post's tokens drawn from the author's other
    /// favourite topics.
    pub topic_mixing: f64,
    pub n_campaigns: usize,
    pub campaign_vocab_size: usize,
    /// Posts in each campaign's shared pool.
    pub campaign_pool_size: usize,
    pub paraphrase_rate: f64,
    pub duplicate_rate: f64,
    /// Share of accounts in each class that keep their label.
    pub labeled_fraction: f64,
    pub profile_archetypes: Archetypes,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_legit: 200,
            n_bots: 150,
            n_crowdturfers: 150,
            posts_per_account: CountRange { min: 30, max: 60 },
            tokens_per_post: CountRange { min: 8, max: 14 },
            n_topics: 8,
            vocab_size_per_topic: 150,
            topic_mixing: 0.1,
            n_campaigns: 4,
            campaign_vocab_size: 60,
            campaign_pool_size: 10,
            paraphrase_rate: 1.0,
            duplicate_rate: 0.8,
            labeled_fraction: 0.6,
            profile_archetypes: Archetypes::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("synth: {msg}")));
        if self.n_legit + self.n_bots + self.n_crowdturfers == 0 {
            return bad("no accounts requested");
        }
        for (name, r) in [("posts_per_account", self.posts_per_account), ("tokens_per_post", self.tokens_per_post)] {
            if r.min > r.max {
                return bad(&format!("{name} min exceeds max"));
            }
        }
        if self.tokens_per_post.min == 0 {
            return bad("posts need at least one token");
        }
        if self.n_legit > 0 && (self.n_topics == 0 || self.vocab_size_per_topic == 0) {
            return bad("legitimate accounts need topics with a vocabulary");
        }
        if self.n_bots + self.n_crowdturfers > 0
            && (self.n_campaigns == 0 || self.campaign_vocab_size == 0 || self.campaign_pool_size == 0)
        {
            return bad("abusers need campaigns with a vocabulary and a post pool");
        }
        let a = &self.profile_archetypes;
        for x in [a.legitimate, a.bot, a.crowdturfer] {
            if !(x.retweets_received >= 0.0 && x.active_span_days >= 0.0) {
                return bad("retweets_received and active_span_days must be non-negative");
            }
        }
        let rates = [self.topic_mixing, self.paraphrase_rate, self.duplicate_rate, self.labeled_fraction]
            .into_iter()
            .chain([a.legitimate, a.bot, a.crowdturfer].into_iter().flat_map(|x| x.rates()));
        for r in rates {
            if !(0.0..=1.0).contains(&r) {
                return bad("rates must lie in [0, 1]");
            }
        }
        Ok(())
    }
}

/// Ground truth for one account.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub account_id: String,
    pub class: AccountClass,
    pub label: Label,
    /// Campaign index for abusers.
    pub campaign: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub dataset: Dataset,
    /// Sorted by account id.
    pub truth: Vec<TruthRecord>,
    /// Planted topic of every post. Campaign `c` is reported as topic
    /// `n_topics + c`.
    pub planted: BTreeMap<String, usize>,
}

impl SynthCorpus {
    pub fn true_labels(&self) -> BTreeMap<String, Label> {
        self.truth.iter().map(|t| (t.account_id.clone(), t.label)).collect()
    }

    /// True labels aligned with `dataset.accounts()`.
    pub fn true_label_vec(&self) -> Vec<Label> {
        let map = self.true_labels();
        self.dataset.accounts().iter().map(|a| map[&a.id]).collect()
    }
}

fn topic_word(t: usize, j: usize) -> String {
    format!("t{t:02}w{j:03}")
}

fn campaign_word(c: usize, j: usize) -> String {
    format!("c{c:02}w{j:03}")
}

fn bag_key(tokens: &[String]) -> Vec<String> {
    let mut v = tokens.to_vec();
    v.sort_unstable();
    v
}

/// Post text plus the entities it carries.
#[derive(Debug, Clone)]
struct Body {
    text: String,
    hashtags: Vec<String>,
    urls: Vec<String>,
    mentions: Vec<String>,
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
    /// Sorted token bags already used by non-bot posts and pool posts.
    seen: BTreeSet<Vec<String>>,
    n_accounts: usize,
    width: usize,
}

impl Generator<'_> {
    /// Join the bag and maybe append a hashtag, a link and a mention.
    fn decorate(&mut self, bag: &[String], arch: &Archetype, campaign: Option<usize>, topic: usize) -> Body {
        let mut body = Body {
            text: bag.join(" "),
            hashtags: Vec::new(),
            urls: Vec::new(),
            mentions: Vec::new(),
        };
        if self.rng.random_bool(arch.hashtag_rate) {
            let tag = match campaign {
                Some(c) => format!("#camp{c}"),
                None => format!("#topic{topic}"),
            };
            body.text.push(' ');
            body.text.push_str(&tag);
            body.hashtags.push(tag);
        }
        if self.rng.random_bool(arch.url_rate) {
            let url = match campaign {
                Some(c) => format!("http://camp{c}.example/{}", self.rng.random_range(0..5)),
                None => format!(
                    "http://site{}.example/{}",
                    self.rng.random_range(0..50),
                    self.rng.random_range(0..1000)
                ),
            };
            body.text.push(' ');
            body.text.push_str(&url);
            body.urls.push(url);
        }
        if self.rng.random_bool(arch.mention_rate) {
            let m = format!("@u{:0w$}", self.rng.random_range(0..self.n_accounts), w = self.width);
            body.text.push(' ');
            body.text.push_str(&m);
            body.mentions.push(m);
        }
        body
    }

    fn campaign_bag(&mut self, c: usize) -> Vec<String> {
        let n = self.cfg.tokens_per_post.sample(&mut self.rng);
        (0..n)
            .map(|_| campaign_word(c, self.rng.random_range(0..self.cfg.campaign_vocab_size)))
            .collect()
    }

    /// Mutate random positions until the bag is new.
    fn make_unique(&mut self, mut bag: Vec<String>, resample: impl Fn(&mut ChaCha8Rng) -> String) -> Vec<String> {
        loop {
            let key = bag_key(&bag);
            if self.seen.insert(key) {
                return bag;
            }
            let i = self.rng.random_range(0..bag.len());
            bag[i] = resample(&mut self.rng);
        }
    }

    fn topic_bag(&mut self, favourites: &[usize]) -> (usize, Vec<String>) {
        let main = favourites[self.rng.random_range(0..favourites.len())];
        let v = self.cfg.vocab_size_per_topic;
        let n = self.cfg.tokens_per_post.sample(&mut self.rng);
        let bag: Vec<String> = (0..n)
            .map(|_| {
                let t = if favourites.len() > 1 && self.rng.random_bool(self.cfg.topic_mixing) {
                    favourites[self.rng.random_range(0..favourites.len())]
                } else {
                    main
                };
                topic_word(t, self.rng.random_range(0..v))
            })
            .collect();
        let bag = self.make_unique(bag, |r| topic_word(main, r.random_range(0..v)));
        (main, bag)
    }
}

/// Generate a corpus. Deterministic per `cfg.seed`.
pub fn generate_corpus(cfg: &SynthConfig) -> Result<SynthCorpus> {
    cfg.validate()?;
    let mut g = Generator {
        cfg,
        rng: rng_for(cfg.seed, 0x5157),
        seen: BTreeSet::new(),
        n_accounts: 0,
        width: 4,
    };

    let mut classes: Vec<AccountClass> = core::iter::repeat_n(AccountClass::Legitimate, cfg.n_legit)
        .chain(core::iter::repeat_n(AccountClass::Bot, cfg.n_bots))
        .chain(core::iter::repeat_n(AccountClass::Crowdturfer, cfg.n_crowdturfers))
        .collect();
    classes.shuffle(&mut g.rng);
    let width = classes.len().to_string_width();
    g.n_accounts = classes.len();
    g.width = width;

    // Which accounts keep their label: a fixed share of each class.
    let mut labeled = alloc::vec![false; classes.len()];
    for class in [AccountClass::Legitimate, AccountClass::Bot, AccountClass::Crowdturfer] {
        let members: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == class).collect();
        let take = libm::round(cfg.labeled_fraction * members.len() as f64) as usize;
        for i in rand::seq::index::sample(&mut g.rng, members.len(), take.min(members.len())) {
            labeled[members[i]] = true;
        }
    }

    // Pool posts are decorated once, so bot copies are verbatim.
    let pools: Vec<Vec<(Vec<String>, Body)>> = (0..cfg.n_campaigns)
        .map(|c| {
            (0..cfg.campaign_pool_size)
                .map(|_| {
                    let bag = g.campaign_bag(c);
                    let v = cfg.campaign_vocab_size;
                    let bag = g.make_unique(bag, |r| campaign_word(c, r.random_range(0..v)));
                    let body = g.decorate(&bag, &cfg.profile_archetypes.bot, Some(c), cfg.n_topics + c);
                    (bag, body)
                })
                .collect()
        })
        .collect();

    let mut accounts = Vec::with_capacity(classes.len());
    let mut posts = Vec::new();
    let mut truth = Vec::with_capacity(classes.len());
    let mut planted = BTreeMap::new();
    for (i, &class) in classes.iter().enumerate() {
        let id = format!("u{i:0width$}");
        let arch = match class {
            AccountClass::Legitimate => &cfg.profile_archetypes.legitimate,
            AccountClass::Bot => &cfg.profile_archetypes.bot,
            AccountClass::Crowdturfer => &cfg.profile_archetypes.crowdturfer,
        };
        let profile = arch.sample_profile(&mut g.rng);
        let campaign = (class != AccountClass::Legitimate).then(|| g.rng.random_range(0..cfg.n_campaigns));
        let favourites: Vec<usize> = if class == AccountClass::Legitimate {
            let n = g.rng.random_range(1..=3usize).min(cfg.n_topics);
            let mut f: Vec<usize> = rand::seq::index::sample(&mut g.rng, cfg.n_topics, n).into_vec();
            f.sort_unstable();
            f
        } else {
            Vec::new()
        };

        let n_posts = cfg.posts_per_account.sample(&mut g.rng);
        let span = libm::round(arch.active_span_days.max(1.0) * DAY as f64) as i64;
        let start = EPOCH - g.rng.random_range(0..=span);
        for j in 0..n_posts {
            let (topic, body) = match (class, campaign) {
                (AccountClass::Legitimate, _) => {
                    let (t, bag) = g.topic_bag(&favourites);
                    (t, g.decorate(&bag, arch, None, t))
                }
                (AccountClass::Bot, Some(c)) => {
                    let body = if g.rng.random_bool(cfg.duplicate_rate) {
                        pools[c][g.rng.random_range(0..pools[c].len())].1.clone()
                    } else {
                        let bag = g.campaign_bag(c);
                        g.decorate(&bag, arch, Some(c), cfg.n_topics + c)
                    };
                    (cfg.n_topics + c, body)
                }
                (_, c) => {
                    let c = c.unwrap_or(0);
                    let mut bag = pools[c][g.rng.random_range(0..pools[c].len())].0.clone();
                    for t in bag.iter_mut() {
                        if g.rng.random_bool(cfg.paraphrase_rate) {
                            *t = campaign_word(c, g.rng.random_range(0..cfg.campaign_vocab_size));
                        }
                    }
                    let v = cfg.campaign_vocab_size;
                    let bag = g.make_unique(bag, |r| campaign_word(c, r.random_range(0..v)));
                    (cfg.n_topics + c, g.decorate(&bag, arch, Some(c), cfg.n_topics + c))
                }
            };
            let timestamp = if class == AccountClass::Bot {
                // Bursts of posts seconds apart.
                start + (j as i64 / 10) * DAY + (j as i64 % 10) * g.rng.random_range(1..120)
            } else {
                start + g.rng.random_range(0..=span)
            };
            let retweet_count = libm::round(-arch.retweets_received * libm::log(1.0 - g.rng.random::<f64>())) as u64;
            let post_id = format!("{id}-p{j:03}");
            planted.insert(post_id.clone(), topic);
            posts.push(Post {
                id: post_id,
                author_id: id.clone(),
                text: body.text,
                timestamp,
                is_retweet: g.rng.random_bool(arch.retweet_rate),
                retweet_count,
                hashtags: body.hashtags,
                urls: body.urls,
                mentions: body.mentions,
            });
        }
        truth.push(TruthRecord {
            account_id: id.clone(),
            class,
            label: class.label(),
            campaign,
        });
        accounts.push(Account {
            id,
            label: if labeled[i] { class.label() } else { Label::Unlabeled },
            profile,
        });
    }
    let dataset = Dataset::from_records("synthetic", accounts, posts)?;
    Ok(SynthCorpus { dataset, truth, planted })
}

trait Width {
    fn to_string_width(self) -> usize;
}

impl Width for usize {
    /// Decimal digits needed for ids `0..self`, at least 4.
    fn to_string_width(self) -> usize {
        let mut n = self.saturating_sub(1);
        let mut w = 1;
        while n >= 10 {
            n /= 10;
            w += 1;
        }
        w.max(4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{FeatureScaling, SimilarityInputs};
    use crate::textproc::{normalize_dataset, posts_equal, TextConfig};

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            n_legit: 12,
            n_bots: 8,
            n_crowdturfers: 8,
            posts_per_account: CountRange { min: 5, max: 9 },
            n_topics: 3,
            n_campaigns: 2,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_corpus(&small(3)).unwrap();
        let b = generate_corpus(&small(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(format!("{:?}", a.dataset.posts()), format!("{:?}", b.dataset.posts()));
        assert_ne!(a.dataset, generate_corpus(&small(4)).unwrap().dataset);
    }

    #[test]
    fn shape_and_labels() {
        let cfg = small(1);
        let c = generate_corpus(&cfg).unwrap();
        assert_eq!(c.dataset.accounts().len(), 28);
        assert_eq!(c.truth.len(), 28);
        for (a, t) in c.dataset.accounts().iter().zip(&c.truth) {
            assert_eq!(a.id, t.account_id);
            assert!(a.label == t.label || a.label == Label::Unlabeled);
            let n = c.dataset.posts_of(&a.id).unwrap().len();
            assert!((5..=9).contains(&n));
        }
        let labeled_legit = c
            .dataset
            .accounts()
            .iter()
            .zip(&c.truth)
            .filter(|(a, t)| t.class == AccountClass::Legitimate && a.label.is_labeled())
            .count();
        assert_eq!(labeled_legit, 7);
        assert_eq!(c.planted.len(), c.dataset.posts().len());
    }

    #[test]
    fn zero_accounts_is_an_error() {
        let cfg = SynthConfig {
            n_legit: 0,
            n_bots: 0,
            n_crowdturfers: 0,
            ..SynthConfig::default()
        };
        assert!(generate_corpus(&cfg).is_err());
        let bad = SynthConfig {
            duplicate_rate: 1.5,
            ..small(0)
        };
        assert!(generate_corpus(&bad).is_err());
    }

    #[test]
    fn non_bot_posts_are_pairwise_distinct() {
        for rate in [1.0, 0.05] {
            let cfg = SynthConfig {
                n_bots: 0,
                paraphrase_rate: rate,
                campaign_vocab_size: 500,
                ..small(7)
            };
            let c = generate_corpus(&cfg).unwrap();
            let norm = normalize_dataset(&c.dataset, &TextConfig::default());
            for i in 0..norm.len() {
                for j in i + 1..norm.len() {
                    assert!(!posts_equal(&norm[i], &norm[j]), "{} == {}", norm[i].post_id, norm[j].post_id);
                }
            }
        }
    }

    #[test]
    fn forced_duplication_gives_full_common_posts() {
        let cfg = SynthConfig {
            n_legit: 0,
            n_bots: 2,
            n_crowdturfers: 0,
            n_campaigns: 1,
            campaign_pool_size: 1,
            duplicate_rate: 1.0,
            posts_per_account: CountRange { min: 3, max: 6 },
            ..SynthConfig::default()
        };
        let c = generate_corpus(&cfg).unwrap();
        let norm = normalize_dataset(&c.dataset, &TextConfig::default());
        let inputs = SimilarityInputs::new(&c.dataset, &norm, FeatureScaling::MinMax);
        assert_eq!(inputs.common_posts(0, 1), 1.0);
    }

    #[test]
    fn crowdturfers_share_words_not_posts() {
        let cfg = SynthConfig {
            n_legit: 0,
            n_bots: 0,
            n_crowdturfers: 6,
            n_campaigns: 1,
            ..SynthConfig::default()
        };
        let c = generate_corpus(&cfg).unwrap();
        let norm = normalize_dataset(&c.dataset, &TextConfig::default());
        let inputs = SimilarityInputs::new(&c.dataset, &norm, FeatureScaling::MinMax);
        for x in 0..6 {
            for y in x + 1..6 {
                assert_eq!(inputs.common_posts(x, y), 0.0);
                assert!(inputs.bag_of_words(x, y) > 0.5);
            }
        }
    }

    #[test]
    fn id_width() {
        assert_eq!(10usize.to_string_width(), 4);
        assert_eq!(10_000usize.to_string_width(), 4);
        assert_eq!(10_001usize.to_string_width(), 5);
    }
}
