//! Accounts, posts, labels and the indexed [`Dataset`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of posts an account needs to be kept by the text-based
/// similarity functions.
pub const DEFAULT_MIN_POSTS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Abuser,
    Legitimate,
    Unlabeled,
}

impl Label {
    pub fn is_labeled(self) -> bool {
        !matches!(self, Label::Unlabeled)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Abuser => "abuser",
            Label::Legitimate => "legitimate",
            Label::Unlabeled => "unlabeled",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw profile fields as reported by the platform.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRaw {
    pub age_days: u64,
    pub followers: u64,
    pub friends: u64,
    pub statuses_total: u64,
    pub default_profile: bool,
    pub default_image: bool,
    pub listed_count: u64,
    pub verified: bool,
    pub screen_name_length: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: String,
    pub label: Label,
    #[serde(flatten)]
    pub profile: ProfileRaw,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub author_id: String,
    pub text: String,
    /// UTC epoch seconds.
    pub timestamp: i64,
    pub is_retweet: bool,
    pub retweet_count: u64,
    #[serde(default)]
    pub hashtags: Vec<String>,
    #[serde(default)]
    pub urls: Vec<String>,
    #[serde(default)]
    pub mentions: Vec<String>,
}

/// Where a dataset came from and what happened while loading it.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadManifest {
    pub source: String,
    pub accounts: usize,
    pub posts: usize,
    /// Posts dropped because their author is not in the account table.
    pub skipped_posts: usize,
    /// Posts whose timestamp was missing and defaulted to 0.
    pub defaulted_timestamps: usize,
}

impl fmt::Display for LoadManifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "loaded {} accounts, {} posts, skipped {} records ({} timestamps defaulted) from {}",
            self.accounts, self.posts, self.skipped_posts, self.defaulted_timestamps, self.source
        )
    }
}

/// Immutable corpus of accounts and posts with author/post indexes.
///
/// Accounts and posts are stored sorted by id, so positional indexes are
/// stable for a given input and ascending index order is ascending id order.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    accounts: Vec<Account>,
    account_index: BTreeMap<String, usize>,
    posts: Vec<Post>,
    post_index: BTreeMap<String, usize>,
    post_author: Vec<usize>,
    posts_by_author: Vec<Vec<usize>>,
    manifest: LoadManifest,
}

/// Incremental construction of a [`Dataset`]; accounts and posts may be added
/// in any order.
#[derive(Debug, Default)]
pub struct DatasetBuilder {
    source: String,
    accounts: BTreeMap<String, Account>,
    posts: BTreeMap<String, Post>,
    defaulted_timestamps: usize,
}

impl DatasetBuilder {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            ..Self::default()
        }
    }

    pub fn add_account(&mut self, account: Account) -> Result<()> {
        if self.accounts.contains_key(&account.id) {
            return Err(Error::DuplicateAccount(account.id));
        }
        self.accounts.insert(account.id.clone(), account);
        Ok(())
    }

    pub fn add_post(&mut self, post: Post) -> Result<()> {
        if self.posts.contains_key(&post.id) {
            return Err(Error::DuplicatePost(post.id));
        }
        self.posts.insert(post.id.clone(), post);
        Ok(())
    }

    pub fn note_defaulted_timestamp(&mut self) {
        self.defaulted_timestamps += 1;
    }

    /// Build the indexes. Posts whose author is unknown are dropped and
    /// counted in the manifest.
    pub fn build(self) -> Dataset {
        let accounts: Vec<Account> = self.accounts.into_values().collect();
        let posts_in = self.posts.into_values();
        let mut skipped = 0;
        let account_index: BTreeMap<String, usize> = accounts
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.clone(), i))
            .collect();
        let mut posts = Vec::new();
        for p in posts_in {
            if account_index.contains_key(&p.author_id) {
                posts.push(p);
            } else {
                skipped += 1;
            }
        }
        let manifest = LoadManifest {
            source: self.source,
            accounts: accounts.len(),
            posts: posts.len(),
            skipped_posts: skipped,
            defaulted_timestamps: self.defaulted_timestamps,
        };
        Dataset::index(accounts, account_index, posts, manifest)
    }
}

impl Dataset {
    /// Build a dataset from in-memory records.
    pub fn from_records(
        source: impl Into<String>,
        accounts: impl IntoIterator<Item = Account>,
        posts: impl IntoIterator<Item = Post>,
    ) -> Result<Self> {
        let mut b = DatasetBuilder::new(source);
        for a in accounts {
            b.add_account(a)?;
        }
        for p in posts {
            b.add_post(p)?;
        }
        Ok(b.build())
    }

    fn index(
        accounts: Vec<Account>,
        account_index: BTreeMap<String, usize>,
        posts: Vec<Post>,
        manifest: LoadManifest,
    ) -> Self {
        let post_index = posts
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.clone(), i))
            .collect();
        let post_author: Vec<usize> = posts.iter().map(|p| account_index[&p.author_id]).collect();
        let mut posts_by_author = alloc::vec![Vec::new(); accounts.len()];
        for (pi, &ai) in post_author.iter().enumerate() {
            posts_by_author[ai].push(pi);
        }
        for list in &mut posts_by_author {
            // Post indexes are id-ordered, so a stable sort breaks timestamp ties by id.
            list.sort_by_key(|&pi| posts[pi].timestamp);
        }
        Dataset {
            accounts,
            account_index,
            posts,
            post_index,
            post_author,
            posts_by_author,
            manifest,
        }
    }

    pub fn accounts(&self) -> &[Account] {
        &self.accounts
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn manifest(&self) -> &LoadManifest {
        &self.manifest
    }

    pub fn account(&self, id: &str) -> Option<&Account> {
        self.account_index.get(id).map(|&i| &self.accounts[i])
    }

    pub fn account_index(&self, id: &str) -> Option<usize> {
        self.account_index.get(id).copied()
    }

    pub fn post(&self, id: &str) -> Option<&Post> {
        self.post_index.get(id).map(|&i| &self.posts[i])
    }

    /// P(x): the posts authored by `account_id`, oldest first.
    pub fn posts_of(&self, account_id: &str) -> Result<Vec<&Post>> {
        let ai = self
            .account_index(account_id)
            .ok_or_else(|| Error::UnknownAccount(account_id.into()))?;
        Ok(self.posts_by_author[ai].iter().map(|&pi| &self.posts[pi]).collect())
    }

    /// Positions (into [`Dataset::posts`]) of the posts of the account at
    /// position `account`, oldest first.
    pub fn post_indices_of(&self, account: usize) -> &[usize] {
        &self.posts_by_author[account]
    }

    /// A(p): the author of post `post_id`.
    pub fn author_of(&self, post_id: &str) -> Result<&Account> {
        let pi = self
            .post_index
            .get(post_id)
            .ok_or_else(|| Error::UnknownPost(post_id.into()))?;
        Ok(&self.accounts[self.post_author[*pi]])
    }

    /// Position of the author of the post at position `post`.
    pub fn author_index(&self, post: usize) -> usize {
        self.post_author[post]
    }

    /// Keep only accounts with at least `min_posts` posts, and their posts.
    pub fn filter_min_posts(&self, min_posts: usize) -> Dataset {
        let keep: BTreeSet<&str> = self
            .accounts
            .iter()
            .enumerate()
            .filter(|(i, _)| self.posts_by_author[*i].len() >= min_posts)
            .map(|(_, a)| a.id.as_str())
            .collect();
        let accounts: Vec<Account> = self
            .accounts
            .iter()
            .filter(|a| keep.contains(a.id.as_str()))
            .cloned()
            .collect();
        let posts: Vec<Post> = self
            .posts
            .iter()
            .filter(|p| keep.contains(p.author_id.as_str()))
            .cloned()
            .collect();
        let account_index = accounts
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.clone(), i))
            .collect();
        let manifest = LoadManifest {
            accounts: accounts.len(),
            posts: posts.len(),
            ..self.manifest.clone()
        };
        Dataset::index(accounts, account_index, posts, manifest)
    }

    /// Positions of accounts carrying an abuser or legitimate label.
    pub fn labeled_accounts(&self) -> Vec<usize> {
        (0..self.accounts.len())
            .filter(|&i| self.accounts[i].label.is_labeled())
            .collect()
    }
}
