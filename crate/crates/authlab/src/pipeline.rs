//! Stage runner with on-disk caching.
//!
//! Every stage has a key: sha256 over the stage name, the configuration
//! sections it depends on, the input file contents and any stage extras
//! such as output paths. After a stage writes its outputs it records a
//! stamp in `<out_dir>/.stamps/<stage>.json` holding the key and the sha256
//! of every output. A later invocation skips the stage when the key matches
//! and the outputs are unchanged on disk. Results within a stage are
//! computed in parallel but always assembled in input order, so the thread
//! count never changes an output byte.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use authlab_core::aggregate::aggregate_topics;
use authlab_core::classify::{label_candidates_by_clustering, score_one, AccountScore};
use authlab_core::corpus::{Dataset, Label, Post};
use authlab_core::eval::{self, CellOutcome, EvalConfig, EvalReport};
use authlab_core::features::{extract_behavior_features, extract_profile_features, BEHAVIOR_FEATURES, PROFILE_FEATURES};
use authlab_core::report::{build_all_reports, rank_topics, render_donut_svg_annotated, ReportConfig};
use authlab_core::similarity::{SimilarityInputs, SimilarityKind, SimilarityMatrix};
use authlab_core::textproc::{normalize_post, NormalizedPost, TextConfig};
use authlab_core::topics::{documents, fit_lda, infer_post_topics, FitWarning, PostTopicDistribution, PostTopics, TopicModel};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{sha256_hex, PipelineConfig};
use crate::failure::{write_failure, Failure};
use crate::io::{self, write_atomic, write_json, write_jsonl, Header};
use crate::modelfile;
use crate::simcache::{self, CacheKey};

/// Where artifacts go. Unset paths default to fixed names in `out_dir`.
#[derive(Debug, Clone, Default)]
pub struct OutputPaths {
    pub model: Option<PathBuf>,
    pub features: Option<PathBuf>,
    /// Overrides the cache path of the configured similarity kind.
    pub similarity: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub topics: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
    pub results: Option<PathBuf>,
    pub reports: Option<PathBuf>,
}

/// Which topics the report stage renders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopicSelection {
    All,
    Only(BTreeSet<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Computed,
    Cached,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Stamp {
    stage: String,
    key: String,
    outputs: BTreeMap<String, String>,
}

/// One row of the features audit dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub account_id: String,
    pub profile: Vec<f64>,
    pub behavior: Vec<f64>,
}

#[derive(Serialize)]
struct ResultCsvRow {
    kind: String,
    k: usize,
    fraction: f64,
    repeat: usize,
    auc: Option<f64>,
    f1: f64,
    train_size: usize,
    test_size: usize,
}

#[derive(Serialize)]
struct SummaryCsvRow {
    kind: String,
    k: usize,
    fraction: f64,
    repeats: usize,
    auc_mean: Option<f64>,
    auc_std: Option<f64>,
    f1_mean: Option<f64>,
    f1_std: Option<f64>,
}

fn file_sha256(path: &Path) -> Option<String> {
    std::fs::read(path).ok().map(|b| sha256_hex(&b))
}

fn stage_error(stage: &str) -> impl Fn(Failure) -> Failure + '_ {
    move |e| e.context(format!("stage `{stage}`"))
}

pub struct Pipeline {
    pub cfg: PipelineConfig,
    pub out_dir: PathBuf,
    pub paths: OutputPaths,
    config_json: Value,
    config_hash: String,
    input_hash: Option<String>,
    text: Option<TextConfig>,
    dataset: Option<Dataset>,
    normalized: Option<Vec<NormalizedPost>>,
    topics: Option<(TopicModel, PostTopics)>,
    inputs: Option<SimilarityInputs>,
    matrices: BTreeMap<SimilarityKind, SimilarityMatrix>,
    scores: Option<Vec<AccountScore>>,
    records: Vec<StageRecord>,
}

impl Pipeline {
    pub fn new(cfg: PipelineConfig, out_dir: impl Into<PathBuf>) -> Self {
        let config_json = cfg.to_json();
        let config_hash = cfg.hash();
        Self {
            cfg,
            out_dir: out_dir.into(),
            paths: OutputPaths::default(),
            config_json,
            config_hash,
            input_hash: None,
            text: None,
            dataset: None,
            normalized: None,
            topics: None,
            inputs: None,
            matrices: BTreeMap::new(),
            scores: None,
            records: Vec::new(),
        }
    }

    pub fn records(&self) -> &[StageRecord] {
        &self.records
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn header(&self, artifact: &str) -> Header {
        Header::new(artifact, &self.config_hash, &self.config_json)
    }

    fn default_path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    pub fn model_path(&self) -> PathBuf {
        self.paths.model.clone().unwrap_or_else(|| self.default_path("model.lda"))
    }

    pub fn post_topics_path(&self) -> PathBuf {
        self.default_path("post_topics.jsonl")
    }

    pub fn similarity_path(&self, kind: SimilarityKind) -> PathBuf {
        match &self.paths.similarity {
            Some(p) if kind == self.cfg.similarity.kind => p.clone(),
            _ => self.default_path(&format!("similarity-{}.bin", kind.name())),
        }
    }

    pub fn scores_path(&self) -> PathBuf {
        self.paths.scores.clone().unwrap_or_else(|| self.default_path("scores.jsonl"))
    }

    pub fn topics_path(&self) -> PathBuf {
        self.paths.topics.clone().unwrap_or_else(|| self.default_path("topics.jsonl"))
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.paths.reports.clone().unwrap_or_else(|| self.default_path("reports"))
    }

    fn stamp_path(&self, stage: &str) -> PathBuf {
        self.out_dir.join(".stamps").join(format!("{stage}.json"))
    }

    // ---- inputs -------------------------------------------------------

    fn input_hash(&mut self) -> Result<String, Failure> {
        if let Some(h) = &self.input_hash {
            return Ok(h.clone());
        }
        let mut hasher = Sha256::new();
        let mut files = vec![self.cfg.input.accounts.clone(), self.cfg.input.posts.clone()];
        if !matches!(self.cfg.text.stopwords.as_str(), "english" | "en" | "none") {
            files.push(PathBuf::from(&self.cfg.text.stopwords));
        }
        for f in files {
            let bytes = std::fs::read(&f)
                .map_err(|e| Failure::data(format!("cannot read `{}`: {e}", f.display())))?;
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(&bytes);
        }
        let h: String = hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
        self.input_hash = Some(h.clone());
        Ok(h)
    }

    fn text_config(&mut self) -> Result<TextConfig, Failure> {
        if self.text.is_none() {
            self.text = Some(self.cfg.text.resolve()?);
        }
        Ok(self.text.clone().expect("just set"))
    }

    /// The loaded corpus after the minimum-post filter.
    pub fn dataset(&mut self) -> Result<&Dataset, Failure> {
        if self.dataset.is_none() {
            let full = io::load_dataset(&self.cfg.input.accounts, &self.cfg.input.posts)?;
            let d = full.filter_min_posts(self.cfg.input.min_posts);
            let dropped = full.accounts().len() - d.accounts().len();
            if dropped > 0 {
                log::info!(
                    "dropped {dropped} accounts with fewer than {} posts; {} remain",
                    self.cfg.input.min_posts,
                    d.accounts().len()
                );
            }
            if d.accounts().is_empty() {
                return Err(Failure::data(format!(
                    "no account has at least {} posts",
                    self.cfg.input.min_posts
                )));
            }
            self.dataset = Some(d);
        }
        Ok(self.dataset.as_ref().expect("just set"))
    }

    fn normalized(&mut self) -> Result<&[NormalizedPost], Failure> {
        if self.normalized.is_none() {
            let text = self.text_config()?;
            let d = self.dataset()?;
            let n: Vec<NormalizedPost> = d.posts().par_iter().map(|p| normalize_post(p, &text)).collect();
            self.normalized = Some(n);
        }
        Ok(self.normalized.as_deref().expect("just set"))
    }

    // ---- stamps -------------------------------------------------------

    fn sections(&self, names: &[&str]) -> Value {
        let mut out = serde_json::Map::new();
        for n in names {
            out.insert((*n).into(), self.config_json[*n].clone());
        }
        Value::Object(out)
    }

    fn key(&mut self, stage: &str, sections: &[&str], extras: &[String]) -> Result<CacheKey, Failure> {
        let input = self.input_hash()?;
        let mut h = Sha256::new();
        for part in [stage, &self.sections(sections).to_string(), &input] {
            h.update(part.as_bytes());
            h.update([0]);
        }
        for e in extras {
            h.update(e.as_bytes());
            h.update([0]);
        }
        Ok(h.finalize().into())
    }

    fn stamp_hit(&self, stage: &str, key: &CacheKey) -> bool {
        let Ok(text) = std::fs::read_to_string(self.stamp_path(stage)) else {
            return false;
        };
        let Ok(stamp) = serde_json::from_str::<Stamp>(&text) else {
            log::warn!("ignoring unreadable stamp for stage `{stage}`");
            return false;
        };
        stamp.stage == stage
            && stamp.key == hex(key)
            && stamp
                .outputs
                .iter()
                .all(|(p, h)| file_sha256(Path::new(p)).as_deref() == Some(h.as_str()))
    }

    fn write_stamp(&self, stage: &str, key: &CacheKey, outputs: &[PathBuf]) -> Result<(), Failure> {
        let stamp = Stamp {
            stage: stage.into(),
            key: hex(key),
            outputs: outputs
                .iter()
                .map(|p| {
                    let h = file_sha256(p).ok_or_else(|| Failure::stage(format!("output `{}` vanished", p.display())))?;
                    Ok((p.display().to_string(), h))
                })
                .collect::<Result<_, Failure>>()?,
        };
        let path = self.stamp_path(stage);
        let text = serde_json::to_string_pretty(&stamp).expect("stamp serializes");
        write_atomic(&path, |w| w.write_all(text.as_bytes()))
    }

    fn record(&mut self, stage: &str, status: StageStatus, outputs: &[PathBuf]) {
        log::info!(
            "stage {stage}: {}",
            match status {
                StageStatus::Computed => "computed",
                StageStatus::Cached => "cached",
                StageStatus::Failed => "failed",
            }
        );
        self.records.push(StageRecord {
            stage: stage.into(),
            status,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            error: None,
        });
    }

    /// Note a failure of `stage` in the run manifest.
    pub fn record_failure(&mut self, stage: &str, e: &Failure) {
        self.records.push(StageRecord {
            stage: stage.into(),
            status: StageStatus::Failed,
            outputs: Vec::new(),
            error: Some(e.to_string()),
        });
    }

    /// Run a leaf stage: skip when stamped, otherwise compute and stamp.
    fn leaf(
        &mut self,
        stage: &str,
        key: CacheKey,
        outputs: Vec<PathBuf>,
        compute: impl FnOnce(&mut Self) -> Result<Vec<PathBuf>, Failure>,
    ) -> Result<(), Failure> {
        if self.stamp_hit(stage, &key) {
            self.record(stage, StageStatus::Cached, &outputs);
            return Ok(());
        }
        let written = compute(self).map_err(stage_error(stage))?;
        self.write_stamp(stage, &key, &written)?;
        self.record(stage, StageStatus::Computed, &written);
        Ok(())
    }

    // ---- stages -------------------------------------------------------

    pub fn ingest(&mut self) -> Result<(), Failure> {
        let key = self.key("ingest", &["input", "text"], &[])?;
        let path = self.default_path("ingest.json");
        self.leaf("ingest", key, vec![path.clone()], |p| {
            let header = p.header("ingest");
            let min_posts = p.cfg.input.min_posts;
            let d = p.dataset()?;
            let labeled = d.labeled_accounts();
            let abusers = labeled.iter().filter(|&&i| d.accounts()[i].label == Label::Abuser).count();
            let summary = json!({
                "load": d.manifest(),
                "min_posts": min_posts,
                "accounts": d.accounts().len(),
                "posts": d.posts().len(),
                "abusers": abusers,
                "legitimate": labeled.len() - abusers,
                "unlabeled": d.accounts().len() - labeled.len(),
            });
            let empty = p.normalized()?.iter().filter(|n| n.is_empty()).count();
            let summary = {
                let mut s = summary;
                s["posts_without_terms"] = json!(empty);
                s
            };
            write_json(&path, &header, "summary", &summary)?;
            Ok(vec![path])
        })
    }

    fn topics_key(&mut self) -> Result<CacheKey, Failure> {
        let model = self.model_path().display().to_string();
        self.key("fit-topics", &["seed", "input", "text", "topics"], &[model])
    }

    /// Fitted model and per-post topic distributions.
    pub fn fit_topics(&mut self) -> Result<(), Failure> {
        if self.topics.is_some() {
            return Ok(());
        }
        let stage = "fit-topics";
        let key = self.topics_key()?;
        let outputs = vec![self.model_path(), self.post_topics_path()];
        if self.stamp_hit(stage, &key) {
            match self.load_topics() {
                Ok(t) => {
                    self.topics = Some(t);
                    self.record(stage, StageStatus::Cached, &outputs);
                    return Ok(());
                }
                Err(e) => log::warn!("cached topic model unusable ({e}); refitting"),
            }
        }
        let t = self.compute_topics().map_err(stage_error(stage))?;
        let header = self.header("model");
        modelfile::save_model(&outputs[0], &t.0, &header)?;
        write_jsonl(&outputs[1], &self.header("post_topics"), &t.1.dists)?;
        self.write_stamp(stage, &key, &outputs)?;
        self.topics = Some(t);
        self.record(stage, StageStatus::Computed, &outputs);
        Ok(())
    }

    fn load_topics(&mut self) -> Result<(TopicModel, PostTopics), Failure> {
        let model = modelfile::load_model(&self.model_path())?.model;
        let (_, dists): (_, Vec<PostTopicDistribution>) = io::read_jsonl(&self.post_topics_path())?;
        let d = self.dataset()?;
        let aligned = dists.len() == d.posts().len()
            && dists
                .iter()
                .zip(d.posts())
                .all(|(t, p)| t.post_id == p.id && t.probs.len() == model.k);
        if !aligned {
            return Err(Failure::data("post topics do not match the corpus"));
        }
        let k = model.k;
        Ok((model, PostTopics { k, dists }))
    }

    fn compute_topics(&mut self) -> Result<(TopicModel, PostTopics), Failure> {
        let lda = self.cfg.topics.lda(self.cfg.seed);
        let fold_in = self.cfg.topics.fold_in_iterations;
        self.normalized()?;
        let d = self.dataset.as_ref().expect("loaded");
        let normalized = self.normalized.as_deref().expect("loaded");
        let docs = documents(d, normalized, lda.unit);
        let (model, warnings) = fit_lda(&docs, &lda)?;
        for w in warnings {
            match w {
                FitWarning::MoreTopicsThanTerms { k, terms } => {
                    log::warn!("fitting {k} topics over only {terms} distinct terms")
                }
            }
        }
        let seed = lda.seed;
        let dists: Vec<PostTopicDistribution> = normalized
            .par_iter()
            .map(|p| infer_post_topics(&model, p, fold_in, seed))
            .collect();
        let k = model.k;
        Ok((model, PostTopics { k, dists }))
    }

    pub fn features(&mut self) -> Result<(), Failure> {
        let path = self.paths.features.clone().unwrap_or_else(|| self.default_path("features.jsonl"));
        let key = self.key("features", &["input"], &[path.display().to_string()])?;
        self.leaf("features", key, vec![path.clone()], |p| {
            let header = p
                .header("features")
                .with_note("profile", PROFILE_FEATURES)
                .with_note("behavior", BEHAVIOR_FEATURES);
            let d = p.dataset()?;
            let rows: Vec<FeatureRecord> = (0..d.accounts().len())
                .into_par_iter()
                .map(|a| {
                    let posts: Vec<&Post> = d.post_indices_of(a).iter().map(|&i| &d.posts()[i]).collect();
                    FeatureRecord {
                        account_id: d.accounts()[a].id.clone(),
                        profile: extract_profile_features(&d.accounts()[a], &posts).0.to_vec(),
                        behavior: extract_behavior_features(&posts).0.to_vec(),
                    }
                })
                .collect();
            write_jsonl(&path, &header, &rows)?;
            Ok(vec![path])
        })
    }

    fn similarity_key(&mut self, kind: SimilarityKind) -> Result<CacheKey, Failure> {
        // Scaling matters; the configured default kind does not.
        let scaling = serde_json::to_string(&self.cfg.similarity.scaling).expect("serializes");
        let topics = if kind.needs_topics() {
            self.sections(&["seed", "topics"]).to_string()
        } else {
            String::new()
        };
        self.key(&format!("similarity-{}", kind.name()), &["input", "text"], &[scaling, topics])
    }

    /// The similarity matrix of `kind`, from cache when valid.
    pub fn similarity(&mut self, kind: SimilarityKind) -> Result<&SimilarityMatrix, Failure> {
        if !self.matrices.contains_key(&kind) {
            let stage = format!("similarity-{}", kind.name());
            let key = self.similarity_key(kind)?;
            let path = self.similarity_path(kind);
            let ids: Vec<String> = self.dataset()?.accounts().iter().map(|a| a.id.clone()).collect();
            let m = match simcache::load(&path, kind, &key).filter(|m| m.ids() == ids.as_slice()) {
                Some(m) => {
                    self.record(&stage, StageStatus::Cached, &[path]);
                    m
                }
                None => {
                    let m = self.compute_similarity(kind).map_err(stage_error(&stage))?;
                    simcache::save(&path, &m, &key)?;
                    self.record(&stage, StageStatus::Computed, &[path]);
                    m
                }
            };
            self.matrices.insert(kind, m);
        }
        Ok(&self.matrices[&kind])
    }

    fn compute_similarity(&mut self, kind: SimilarityKind) -> Result<SimilarityMatrix, Failure> {
        if kind.needs_topics() {
            self.fit_topics()?;
        }
        self.normalized()?;
        if self.inputs.is_none() {
            let d = self.dataset.as_ref().expect("loaded");
            let n = self.normalized.as_deref().expect("loaded");
            self.inputs = Some(SimilarityInputs::new(d, n, self.cfg.similarity.scaling));
        }
        if kind.needs_topics() && !self.inputs.as_ref().expect("built").has_topics() {
            let d = self.dataset.as_ref().expect("loaded");
            let (_, topics) = self.topics.as_ref().expect("fitted");
            let inputs = self.inputs.take().expect("built").with_topics(d, topics);
            self.inputs = Some(inputs);
        }
        let inputs = self.inputs.as_ref().expect("built");
        inputs.check(kind)?;
        let rows = (0..inputs.len())
            .into_par_iter()
            .map(|x| inputs.upper_row(kind, x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SimilarityMatrix::from_upper_rows(kind, inputs.ids().to_vec(), &rows)?)
    }

    fn score_key(&mut self) -> Result<CacheKey, Failure> {
        let kind = self.cfg.similarity.kind;
        let sim = hex(&self.similarity_key(kind)?);
        let out = self.scores_path().display().to_string();
        self.key("score", &["classify"], &[sim, out])
    }

    pub fn score(&mut self) -> Result<&[AccountScore], Failure> {
        if self.scores.is_none() {
            let stage = "score";
            let key = self.score_key()?;
            let path = self.scores_path();
            let ids: Vec<String> = self.dataset()?.accounts().iter().map(|a| a.id.clone()).collect();
            let cached = if self.stamp_hit(stage, &key) {
                match io::read_jsonl::<AccountScore>(&path) {
                    Ok((_, s)) if s.iter().map(|x| &x.account_id).eq(ids.iter()) => Some(s),
                    _ => {
                        log::warn!("cached scores unusable; recomputing");
                        None
                    }
                }
            } else {
                None
            };
            let scores = match cached {
                Some(s) => {
                    self.record(stage, StageStatus::Cached, &[path]);
                    s
                }
                None => {
                    let s = self.compute_scores().map_err(stage_error(stage))?;
                    write_jsonl(&path, &self.header("scores"), &s)?;
                    self.write_stamp(stage, &key, &[path.clone()])?;
                    self.record(stage, StageStatus::Computed, &[path]);
                    s
                }
            };
            self.scores = Some(scores);
        }
        Ok(self.scores.as_deref().expect("just set"))
    }

    fn compute_scores(&mut self) -> Result<Vec<AccountScore>, Failure> {
        let kind = self.cfg.similarity.kind;
        let (k, fix) = (self.cfg.classify.k, self.cfg.classify.fix_labeled);
        self.similarity(kind)?;
        let d = self.dataset.as_ref().expect("loaded");
        let m = &self.matrices[&kind];
        let labels: Vec<Label> = d.accounts().iter().map(|a| a.label).collect();
        let labeled = eval::labeled_positions(&labels);
        if labeled.is_empty() {
            return Err(Failure::data("no labeled accounts to compare against"));
        }
        let scores = (0..m.len())
            .into_par_iter()
            .map(|x| score_one(m, x, labels[x], &labeled, k, fix))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(scores)
    }

    fn score_map(&mut self) -> Result<BTreeMap<String, f64>, Failure> {
        Ok(self.score()?.iter().map(|s| (s.account_id.clone(), s.value)).collect())
    }

    pub fn aggregate(&mut self) -> Result<(), Failure> {
        let path = self.topics_path();
        let extras = [hex(&self.topics_key()?), hex(&self.score_key()?), path.display().to_string()];
        let key = self.key("aggregate", &[], &extras)?;
        self.leaf("aggregate", key, vec![path.clone()], |p| {
            let scores = p.score_map()?;
            p.fit_topics()?;
            let d = p.dataset.as_ref().expect("loaded");
            let (_, topics) = p.topics.as_ref().expect("fitted");
            let agg = aggregate_topics(d, topics, &scores)?;
            write_jsonl(&path, &p.header("topics"), &agg)?;
            Ok(vec![path])
        })
    }

    /// Topic reports: SVG and JSON per selected topic plus a ranked index.
    pub fn report(&mut self, selection: &TopicSelection) -> Result<(), Failure> {
        let dir = self.reports_dir();
        let k = self.cfg.topics.k;
        let chosen: Vec<usize> = match selection {
            TopicSelection::All => (0..k).collect(),
            TopicSelection::Only(s) => {
                if let Some(&bad) = s.iter().find(|&&t| t >= k) {
                    return Err(Failure::config(format!("topic {bad} is out of range for {k} topics")));
                }
                s.iter().copied().collect()
            }
        };
        let mut outputs: Vec<PathBuf> = chosen
            .iter()
            .flat_map(|t| [dir.join(format!("topic_{t}.svg")), dir.join(format!("topic_{t}.json"))])
            .collect();
        outputs.push(dir.join("index.json"));
        let extras = [
            hex(&self.topics_key()?),
            hex(&self.score_key()?),
            dir.display().to_string(),
            format!("{chosen:?}"),
        ];
        let key = self.key("report", &["report"], &extras)?;
        let planned = outputs.clone();
        self.leaf("report", key, outputs, |p| {
            let cfg: ReportConfig = p.cfg.report.clone();
            let scores = p.score_map()?;
            p.fit_topics()?;
            let d = p.dataset.as_ref().expect("loaded");
            let (model, topics) = p.topics.as_ref().expect("fitted");
            let all = build_all_reports(model, d, &scores, topics, &cfg)?;
            let reports: Vec<_> = all.into_iter().filter(|r| chosen.contains(&r.topic)).collect();
            let note = format!(
                "{} {} artifact=topic_report config_hash={}",
                io::TOOL,
                io::VERSION,
                p.config_hash
            );
            let svgs: Vec<String> = reports
                .par_iter()
                .map(|r| render_donut_svg_annotated(r, Some(&note)))
                .collect();
            for (r, svg) in reports.iter().zip(&svgs) {
                let path = dir.join(format!("topic_{}.svg", r.topic));
                write_atomic(&path, |w| w.write_all(svg.as_bytes()))?;
                write_json(&dir.join(format!("topic_{}.json", r.topic)), &p.header("topic_report"), "report", r)?;
            }
            write_json(&dir.join("index.json"), &p.header("topic_index"), "topics", &rank_topics(&reports))?;
            Ok(planned)
        })
    }

    pub fn candidates(&mut self) -> Result<(), Failure> {
        let path = self.paths.candidates.clone().unwrap_or_else(|| self.default_path("candidates.jsonl"));
        let key = self.key("candidates", &["seed", "input", "candidates"], &[path.display().to_string()])?;
        self.leaf("candidates", key, vec![path.clone()], |p| {
            let c = p.cfg.candidates.clone();
            let seed = p.cfg.seed;
            let header = p.header("candidates");
            let samples = label_candidates_by_clustering(p.dataset()?, c.clusters, c.per_cluster, seed)?;
            write_jsonl(&path, &header, &samples)?;
            Ok(vec![path])
        })
    }

    /// Cross-validated sweep over similarity kinds, k and training
    /// fractions. Writes the metrics table, a per-group summary table and a
    /// JSON sidecar with provenance, summaries and skipped cells.
    pub fn eval(&mut self) -> Result<EvalReport, Failure> {
        let ecfg = self.cfg.eval.resolve(self.cfg.seed)?;
        let path = self.paths.results.clone().unwrap_or_else(|| self.default_path("results.csv"));
        let summary_path = sibling(&path, "summary.csv");
        let meta_path = sibling(&path, "meta.json");
        let stage = "eval";
        let report = (|| {
            for &kind in &ecfg.kinds {
                self.similarity(kind)?;
            }
            let d = self.dataset.as_ref().expect("loaded");
            let labels: Vec<Label> = d.accounts().iter().map(|a| a.label).collect();
            run_cells(&self.matrices, &labels, &ecfg)
        })()
        .map_err(stage_error(stage))?;
        let mut csv_out = csv::Writer::from_writer(Vec::new());
        for r in &report.rows {
            csv_out
                .serialize(ResultCsvRow {
                    kind: r.kind.name().into(),
                    k: r.k,
                    fraction: r.fraction,
                    repeat: r.repeat,
                    auc: r.auc,
                    f1: r.f1,
                    train_size: r.train_size,
                    test_size: r.test_size,
                })
                .map_err(|e| write_failure(&path, e))?;
        }
        let mut summary_out = csv::Writer::from_writer(Vec::new());
        for s in &report.summaries {
            summary_out
                .serialize(SummaryCsvRow {
                    kind: s.kind.name().into(),
                    k: s.k,
                    fraction: s.fraction,
                    repeats: s.repeats,
                    auc_mean: s.auc_mean,
                    auc_std: s.auc_std,
                    f1_mean: s.f1_mean,
                    f1_std: s.f1_std,
                })
                .map_err(|e| write_failure(&summary_path, e))?;
        }
        let table = csv_out.into_inner().map_err(|e| write_failure(&path, e))?;
        let summary = summary_out.into_inner().map_err(|e| write_failure(&summary_path, e))?;
        write_atomic(&path, |w| w.write_all(&table))?;
        write_atomic(&summary_path, |w| w.write_all(&summary))?;
        let meta = json!({
            "table": path.display().to_string(),
            "summary_table": summary_path.display().to_string(),
            "degenerate_rows": report.rows.iter().filter(|r| r.degenerate).count(),
            "summaries": report.summaries,
            "skipped": report.skipped,
        });
        write_json(&meta_path, &self.header("eval_results"), "eval", &meta)?;
        if !report.skipped.is_empty() {
            log::warn!(
                "{} evaluation cells skipped for lack of training accounts; see {}",
                report.skipped.len(),
                meta_path.display()
            );
        }
        self.record(stage, StageStatus::Computed, &[path, summary_path, meta_path]);
        Ok(report)
    }

    /// The scoring chain: ingest, topics, features, similarity, score,
    /// aggregate and report. A failing stage is recorded before the error
    /// is returned.
    pub fn run_all(&mut self) -> Result<(), Failure> {
        type Step = fn(&mut Pipeline) -> Result<(), Failure>;
        let steps: [(&str, Step); 7] = [
            ("ingest", |p| p.ingest()),
            ("fit-topics", |p| p.fit_topics()),
            ("features", |p| p.features()),
            ("similarity", |p| p.similarity(p.cfg.similarity.kind).map(|_| ())),
            ("score", |p| p.score().map(|_| ())),
            ("aggregate", |p| p.aggregate()),
            ("report", |p| p.report(&TopicSelection::All)),
        ];
        for (name, step) in steps {
            if let Err(e) = step(self) {
                self.record_failure(name, &e);
                return Err(e);
            }
        }
        Ok(())
    }

    pub fn write_manifest(&self, command: &str) -> Result<PathBuf, Failure> {
        let path = self.default_path("run_manifest.json");
        let body = json!({ "command": command, "stages": self.records });
        write_json(&path, &self.header("run_manifest"), "run", &body)?;
        Ok(path)
    }
}

/// `results.csv` → `results.<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Parallel version of the core sweep; cells are evaluated independently
/// and collected in plan order.
pub fn run_cells(
    matrices: &BTreeMap<SimilarityKind, SimilarityMatrix>,
    labels: &[Label],
    cfg: &EvalConfig,
) -> Result<EvalReport, Failure> {
    cfg.validate()?;
    let labeled = eval::labeled_positions(labels);
    for l in [Label::Abuser, Label::Legitimate] {
        if !labeled.iter().any(|p| p.1 == l) {
            return Err(authlab_core::Error::EmptyClass(l).into());
        }
    }
    let outcomes: Vec<CellOutcome> = eval::plan_cells(cfg)
        .par_iter()
        .map(|cell| {
            let m = matrices
                .get(&cell.kind)
                .ok_or_else(|| Failure::stage(format!("no {} matrix", cell.kind)))?;
            eval::evaluate_cell(m, labels, cell).map_err(Failure::from)
        })
        .collect::<Result<_, _>>()?;
    Ok(eval::collect(outcomes))
}
