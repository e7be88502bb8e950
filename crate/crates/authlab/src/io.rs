//! Line-delimited JSON input and output.
//!
//! Every JSONL artifact starts with a header record
//! `{"header": {...}}`; readers skip such records, so artifacts can be fed
//! back in as inputs.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use authlab_core::corpus::{Account, Dataset, DatasetBuilder, Post};
use authlab_core::textproc::scan_entities;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::failure::{write_failure, Failure};

pub const TOOL: &str = "authlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance record at the top of every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub artifact: String,
    pub config_hash: String,
    pub config: Value,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub notes: Map<String, Value>,
}

impl Header {
    pub fn new(artifact: &str, config_hash: &str, config: &Value) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            artifact: artifact.into(),
            config_hash: config_hash.into(),
            config: config.clone(),
            notes: Map::new(),
        }
    }

    pub fn with_note(mut self, key: &str, value: impl Serialize) -> Self {
        self.notes
            .insert(key.into(), serde_json::to_value(value).expect("note serializes"));
        self
    }
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    header: Header,
}

fn is_header(v: &Value) -> bool {
    matches!(v, Value::Object(m) if m.len() == 1 && m.contains_key("header"))
}

/// Write `path` through a temporary sibling file and rename it into place.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| write_failure(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        fill(&mut w)?;
        w.flush()?;
        drop(w);
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        write_failure(path, e)
    })
}

pub fn write_jsonl<T: Serialize>(path: &Path, header: &Header, items: &[T]) -> Result<(), Failure> {
    write_atomic(path, |w| {
        serde_json::to_writer(&mut *w, &HeaderLine { header: header.clone() })?;
        w.write_all(b"\n")?;
        for item in items {
            serde_json::to_writer(&mut *w, item)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// A JSON document `{"header": ..., <key>: value}`.
pub fn write_json<T: Serialize>(path: &Path, header: &Header, key: &str, value: &T) -> Result<(), Failure> {
    let mut doc = Map::new();
    doc.insert("header".into(), serde_json::to_value(header).expect("header serializes"));
    doc.insert(key.into(), serde_json::to_value(value).map_err(|e| write_failure(path, e))?);
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        w.write_all(b"\n")
    })
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::data(format!("cannot open `{}`: {e}", path.display())))
}

/// Visit each non-blank, non-header record of a JSONL file with its
/// 1-based line number.
fn for_each_record(path: &Path, mut f: impl FnMut(usize, Value) -> Result<(), Failure>) -> Result<Option<Header>, Failure> {
    let mut header = None;
    for (i, line) in open(path)?.lines().enumerate() {
        let n = i + 1;
        let line = line.map_err(|e| Failure::data(format!("{}:{n}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line)
            .map_err(|e| Failure::data(format!("{}:{n}: malformed record: {e}", path.display())))?;
        if is_header(&v) {
            if header.is_none() {
                header = serde_json::from_value::<HeaderLine>(v).ok().map(|h| h.header);
            }
            continue;
        }
        f(n, v)?;
    }
    Ok(header)
}

/// Read a JSONL artifact written by [`write_jsonl`].
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<(Option<Header>, Vec<T>), Failure> {
    let mut items = Vec::new();
    let header = for_each_record(path, |n, v| {
        let item = serde_json::from_value(v)
            .map_err(|e| Failure::data(format!("{}:{n}: malformed record: {e}", path.display())))?;
        items.push(item);
        Ok(())
    })?;
    Ok((header, items))
}

/// Load accounts and posts. Posts without a timestamp get 0 (counted and
/// warned); absent entity arrays are derived from the text.
pub fn load_dataset(accounts: &Path, posts: &Path) -> Result<Dataset, Failure> {
    let source = format!("{} + {}", accounts.display(), posts.display());
    let mut b = DatasetBuilder::new(source);
    for_each_record(accounts, |n, v| {
        let a: Account = serde_json::from_value(v)
            .map_err(|e| Failure::data(format!("{}:{n}: malformed account: {e}", accounts.display())))?;
        b.add_account(a)
            .map_err(|e| Failure::from(e).context(format!("{}:{n}", accounts.display())))
    })?;
    for_each_record(posts, |n, mut v| {
        let obj = v
            .as_object_mut()
            .ok_or_else(|| Failure::data(format!("{}:{n}: record is not an object", posts.display())))?;
        if !obj.contains_key("timestamp") || obj["timestamp"].is_null() {
            obj.insert("timestamp".into(), Value::from(0));
            log::warn!("{}:{n}: missing timestamp, using 0", posts.display());
            b.note_defaulted_timestamp();
        }
        let derive = ["hashtags", "urls", "mentions"].map(|k| !obj.contains_key(k));
        let mut p: Post = serde_json::from_value(v)
            .map_err(|e| Failure::data(format!("{}:{n}: malformed post: {e}", posts.display())))?;
        if derive.iter().any(|&d| d) {
            let found = scan_entities(&p.text);
            if derive[0] {
                p.hashtags = found.hashtags;
            }
            if derive[1] {
                p.urls = found.urls;
            }
            if derive[2] {
                p.mentions = found.mentions;
            }
        }
        b.add_post(p)
            .map_err(|e| Failure::from(e).context(format!("{}:{n}", posts.display())))
    })?;
    let d = b.build();
    let m = d.manifest();
    if m.skipped_posts > 0 {
        log::warn!("skipped {} posts whose author is not in the account table", m.skipped_posts);
    }
    log::info!("{m}");
    Ok(d)
}

/// Write accounts and posts in the input format.
pub fn write_dataset(dir: &Path, d: &Dataset, header: &Header) -> Result<(), Failure> {
    let mut h = header.clone();
    h.artifact = "accounts".into();
    write_jsonl(&dir.join("accounts.jsonl"), &h, d.accounts())?;
    h.artifact = "posts".into();
    write_jsonl(&dir.join("posts.jsonl"), &h, d.posts())
}
