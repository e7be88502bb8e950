use alloc::string::String;

use crate::corpus::Label;
use crate::similarity::SimilarityKind;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate account id `{0}`")]
    DuplicateAccount(String),
    #[error("duplicate post id `{0}`")]
    DuplicatePost(String),
    #[error("unknown account `{0}`")]
    UnknownAccount(String),
    #[error("unknown post `{0}`")]
    UnknownPost(String),
    #[error("unknown stemmer language `{0}`")]
    UnknownStemmer(String),
    #[error("corpus has no non-empty posts after normalization")]
    EmptyCorpus,
    #[error("account `{0}` has no posts; filter the dataset by post count first")]
    NoPosts(String),
    #[error("similarity kind `{kind}` requires {artifact}")]
    MissingArtifact {
        kind: SimilarityKind,
        artifact: &'static str,
    },
    #[error("need at least {needed} labeled accounts, have {available}")]
    NotEnoughLabeled { needed: usize, available: usize },
    #[error("no labeled accounts of class {0}")]
    EmptyClass(Label),
    #[error("no authenticity score for account `{0}`")]
    MissingScore(String),
    #[error("topic {topic} out of range for a {k}-topic model")]
    TopicOutOfRange { topic: usize, k: usize },
    #[error("requested {clusters} clusters for {points} accounts")]
    TooManyClusters { clusters: usize, points: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by configuration rather than by the data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::UnknownStemmer(_)
                | Error::MissingArtifact { .. }
                | Error::InvalidParameter(_)
                | Error::TooManyClusters { .. }
                | Error::NotEnoughLabeled { .. }
        )
    }
}
