//! Text normalization: tokenization, stop-word removal, stemming, and
//! verbatim hashtag/URL terms. Defines post equality and vocabularies.

mod porter;
pub mod stopwords;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use unicode_segmentation::UnicodeSegmentation;

use crate::corpus::{Dataset, Post};
use crate::error::{Error, Result};
use crate::rng::fnv1a;

pub use porter::stem as porter_stem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stemmer {
    /// Porter suffix stripping for English.
    English,
    /// No stemming.
    Identity,
}

impl FromStr for Stemmer {
    type Err = Error;

    fn from_str(tag: &str) -> Result<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "en" | "english" | "porter" => Ok(Stemmer::English),
            "none" | "identity" => Ok(Stemmer::Identity),
            _ => Err(Error::UnknownStemmer(tag.into())),
        }
    }
}

impl Stemmer {
    pub fn tag(self) -> &'static str {
        match self {
            Stemmer::English => "en",
            Stemmer::Identity => "none",
        }
    }

    /// Stem to a fixed point so that normalizing normalized text is a no-op.
    fn apply(self, word: &str) -> String {
        match self {
            Stemmer::Identity => word.to_string(),
            Stemmer::English => {
                let mut cur = word.to_string();
                loop {
                    let next = porter::stem(&cur);
                    if next == cur {
                        return cur;
                    }
                    cur = next;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextConfig {
    pub stopwords: BTreeSet<String>,
    pub stemmer: Stemmer,
    /// Keep `@mentions` as terms.
    pub keep_mentions: bool,
    /// Drop a leading `RT @user:` retweet marker.
    pub strip_retweet_marker: bool,
}

impl Default for TextConfig {
    fn default() -> Self {
        Self::english()
    }
}

impl TextConfig {
    pub fn english() -> Self {
        Self {
            stopwords: stopwords::ENGLISH.iter().map(|s| s.to_string()).collect(),
            stemmer: Stemmer::English,
            keep_mentions: false,
            strip_retweet_marker: true,
        }
    }

    /// No stop words and no stemming; used for languages without a bundled
    /// list.
    pub fn passthrough() -> Self {
        Self {
            stopwords: BTreeSet::new(),
            stemmer: Stemmer::Identity,
            ..Self::english()
        }
    }

    /// Stable fingerprint of the configuration.
    pub fn fingerprint(&self) -> u64 {
        let mut buf = Vec::new();
        for w in &self.stopwords {
            buf.extend_from_slice(w.as_bytes());
            buf.push(0xff);
        }
        buf.extend_from_slice(self.stemmer.tag().as_bytes());
        buf.push(self.keep_mentions as u8);
        buf.push(self.strip_retweet_marker as u8);
        fnv1a(&buf)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedPost {
    pub post_id: String,
    /// Content terms in text order: stemmed words, hashtags and URLs.
    pub tokens: Vec<String>,
    /// W(p), the distinct terms.
    pub terms: BTreeSet<String>,
    /// Hash of the sorted token sequence.
    pub canonical_key: u64,
    sorted: Vec<String>,
}

impl NormalizedPost {
    pub fn new(post_id: impl Into<String>, tokens: Vec<String>) -> Self {
        let mut sorted = tokens.clone();
        sorted.sort();
        let mut buf = Vec::new();
        for t in &sorted {
            buf.extend_from_slice(t.as_bytes());
            // 0xff never occurs in UTF-8.
            buf.push(0xff);
        }
        Self {
            post_id: post_id.into(),
            terms: tokens.iter().cloned().collect(),
            canonical_key: fnv1a(&buf),
            tokens,
            sorted,
        }
    }

    /// The sorted token multiset, the identity used for post equality.
    pub fn sorted_tokens(&self) -> &[String] {
        &self.sorted
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// p_x = p_y: equal token multisets after normalization.
pub fn posts_equal(a: &NormalizedPost, b: &NormalizedPost) -> bool {
    a.canonical_key == b.canonical_key && a.sorted == b.sorted
}

/// Hashtags, URLs and mentions found by scanning raw text, as written.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Entities {
    pub hashtags: Vec<String>,
    pub urls: Vec<String>,
    pub mentions: Vec<String>,
}

const LEADING_PUNCT: &[char] = &['(', '[', '{', '"', '\'', '<', '\u{201c}', '\u{2018}'];
const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}', '"', '\'', '>', '\u{201d}', '\u{2019}'];

fn is_url(chunk: &str) -> bool {
    chunk.starts_with("http://") || chunk.starts_with("https://")
}

enum Piece<'a> {
    Url(&'a str),
    Hashtag(&'a str),
    Mention(&'a str),
    Word(&'a str),
}

/// Split text into URLs, hashtags, mentions and words. `known_urls` are
/// bare tokens (e.g. shortener links) to treat as URLs when they appear
/// verbatim.
fn pieces<'a>(text: &'a str, known_urls: &[String], mut f: impl FnMut(Piece<'a>)) {
    for chunk in text.split_whitespace() {
        let trimmed = chunk.trim_start_matches(LEADING_PUNCT).trim_end_matches(TRAILING_PUNCT);
        if is_url(trimmed) || (!trimmed.is_empty() && known_urls.iter().any(|u| u.eq_ignore_ascii_case(trimmed))) {
            f(Piece::Url(trimmed));
            continue;
        }
        let mut marker: Option<char> = None;
        for seg in chunk.split_word_bounds() {
            let is_word = seg.chars().any(char::is_alphanumeric);
            match (marker.take(), is_word) {
                (Some('#'), true) => f(Piece::Hashtag(seg)),
                (Some('@'), true) => f(Piece::Mention(seg)),
                (_, true) => f(Piece::Word(seg)),
                (_, false) => {
                    if seg == "#" || seg == "@" {
                        marker = seg.chars().next();
                    }
                }
            }
        }
    }
}

pub fn scan_entities(text: &str) -> Entities {
    let mut e = Entities::default();
    pieces(text, &[], |p| match p {
        Piece::Url(u) => e.urls.push(u.to_string()),
        Piece::Hashtag(h) => e.hashtags.push(alloc::format!("#{h}")),
        Piece::Mention(m) => e.mentions.push(alloc::format!("@{m}")),
        Piece::Word(_) => {}
    });
    e
}

fn strip_retweet_marker(text: &str) -> &str {
    let t = text.trim_start();
    let Some(rest) = t.strip_prefix("rt ") else {
        return text;
    };
    let rest = rest.trim_start();
    if !rest.starts_with('@') {
        return text;
    }
    match rest.find(char::is_whitespace) {
        Some(end) => rest[end..].trim_start(),
        None => "",
    }
}

fn lowercase(text: &str) -> String {
    text.chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .flat_map(char::to_lowercase)
        .collect()
}

/// Normalize raw text into content tokens.
pub fn normalize_text(text: &str, known_urls: &[String], cfg: &TextConfig) -> Vec<String> {
    let lower = lowercase(text);
    let body = if cfg.strip_retweet_marker {
        strip_retweet_marker(&lower)
    } else {
        &lower
    };
    let urls: Vec<String> = known_urls.iter().map(|u| lowercase(u)).collect();
    let mut tokens = Vec::new();
    pieces(body, &urls, |p| match p {
        Piece::Url(u) => tokens.push(u.to_string()),
        Piece::Hashtag(h) => tokens.push(alloc::format!("#{h}")),
        Piece::Mention(m) => {
            if cfg.keep_mentions {
                tokens.push(alloc::format!("@{m}"));
            }
        }
        Piece::Word(w) => {
            if cfg.stopwords.contains(w) {
                return;
            }
            let stemmed = cfg.stemmer.apply(w);
            if !stemmed.is_empty() && !cfg.stopwords.contains(&stemmed) {
                tokens.push(stemmed);
            }
        }
    });
    tokens
}

pub fn normalize_post(post: &Post, cfg: &TextConfig) -> NormalizedPost {
    NormalizedPost::new(post.id.clone(), normalize_text(&post.text, &post.urls, cfg))
}

/// Normalize every post of the dataset, aligned with [`Dataset::posts`].
pub fn normalize_dataset(d: &Dataset, cfg: &TextConfig) -> Vec<NormalizedPost> {
    d.posts().iter().map(|p| normalize_post(p, cfg)).collect()
}

/// W(x): every term the account used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub account_id: String,
    pub terms: BTreeSet<String>,
}

pub fn vocabulary_of(d: &Dataset, account_id: &str, cfg: &TextConfig) -> Result<Vocabulary> {
    let posts = d.posts_of(account_id)?;
    let terms = posts
        .into_iter()
        .flat_map(|p| normalize_post(p, cfg).terms)
        .collect();
    Ok(Vocabulary {
        account_id: account_id.into(),
        terms,
    })
}
