//! Repeated train/test evaluation of the KNN authenticity classifier.
//!
//! Each cell is one (kind, k, fraction, repeat). The split depends only on
//! the master seed, the fraction and the repeat, so every kind and k is
//! evaluated on the same splits and cells can run in any order.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::classify::{account_authenticity, knn_label, neighborhood_in};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_for};
use crate::similarity::{SimilarityKind, SimilarityMatrix};

pub const COARSE_FRACTIONS: [f64; 5] = [0.05, 0.1, 0.2, 0.3, 0.4];
pub const DEFAULT_REPEATS: usize = 5;

/// 0.01, 0.02, ..., 0.40.
pub fn fine_fractions() -> Vec<f64> {
    (1..=40).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub fractions: Vec<f64>,
    pub repeats: usize,
    pub ks: Vec<usize>,
    pub kinds: Vec<SimilarityKind>,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            fractions: fine_fractions(),
            repeats: DEFAULT_REPEATS,
            ks: (1..=5).collect(),
            kinds: SimilarityKind::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(Error::InvalidParameter(format!("training fraction {f} outside (0, 1]")));
        }
        if self.ks.contains(&0) {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidParameter("repeats must be at least 1".into()));
        }
        Ok(())
    }
}

/// Positions (into the caller's index space) of training and test accounts,
/// both sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split. `labeled` pairs an index with its label; unlabeled
/// entries are ignored. The training set has round(fraction·n) accounts,
/// at least one per class, allocated to classes in proportion to size.
pub fn split_train_test(labeled: &[(usize, Label)], fraction: f64, seed: u64) -> Result<Split> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("training fraction {fraction} outside (0, 1]")));
    }
    let abusers: Vec<usize> = labeled.iter().filter(|(_, l)| *l == Label::Abuser).map(|p| p.0).collect();
    let legit: Vec<usize> = labeled.iter().filter(|(_, l)| *l == Label::Legitimate).map(|p| p.0).collect();
    if abusers.is_empty() {
        return Err(Error::EmptyClass(Label::Abuser));
    }
    if legit.is_empty() {
        return Err(Error::EmptyClass(Label::Legitimate));
    }
    let n = (abusers.len() + legit.len()) as f64;
    let total = libm::round(fraction * n);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (stream, class) in [(1u64, &abusers), (2u64, &legit)] {
        let want = libm::round(total * class.len() as f64 / n) as usize;
        let take = want.clamp(1, class.len());
        let mut rng = rng_for(seed, stream);
        let mut chosen = alloc::vec![false; class.len()];
        for i in sample(&mut rng, class.len(), take) {
            chosen[i] = true;
        }
        for (i, &idx) in class.iter().enumerate() {
            if chosen[i] {
                train.push(idx);
            } else {
                test.push(idx);
            }
        }
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Mann–Whitney AUC: the probability that a random legitimate account
/// scores above a random abuser, ties counting one half. `None` unless both
/// classes are present. Unlabeled entries are ignored.
pub fn auc(scores: &[(f64, Label)]) -> Option<f64> {
    let mut v: Vec<(f64, Label)> = scores.iter().copied().filter(|(_, l)| l.is_labeled()).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n_pos = v.iter().filter(|(_, l)| *l == Label::Legitimate).count();
    let n_neg = v.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let mut wins = 0.0;
    let mut neg_below = 0usize;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j].0 == v[i].0 {
            j += 1;
        }
        let pos = v[i..j].iter().filter(|(_, l)| *l == Label::Legitimate).count();
        let neg = (j - i) - pos;
        wins += pos as f64 * neg_below as f64 + 0.5 * pos as f64 * neg as f64;
        neg_below += neg;
        i = j;
    }
    Some(wins / (n_pos as f64 * n_neg as f64))
}

/// F1 of the `Abuser` class over (predicted, true) pairs. 0 when
/// precision + recall is 0.
pub fn f1(predictions: &[(Label, Label)]) -> f64 {
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for &(pred, truth) in predictions {
        match (pred == Label::Abuser, truth == Label::Abuser) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return 0.0;
    }
    let p = tp as f64 / (tp + fp) as f64;
    let r = tp as f64 / (tp + fneg) as f64;
    2.0 * p * r / (p + r)
}

/// One evaluation cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalCell {
    pub kind: SimilarityKind,
    pub k: usize,
    pub fraction: f64,
    pub repeat: usize,
    /// Split seed, shared by every kind and k at this (fraction, repeat).
    pub split_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub kind: SimilarityKind,
    pub k: usize,
    pub fraction: f64,
    pub repeat: usize,
    /// Absent when the test set lacks a class.
    pub auc: Option<f64>,
    pub f1: f64,
    pub train_size: usize,
    pub test_size: usize,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub cell: EvalCell,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CellOutcome {
    Row(MetricRow),
    Skipped(SkippedCell),
}

/// Mean and sample standard deviation over the non-degenerate repeats of a
/// (kind, k, fraction) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub kind: SimilarityKind,
    pub k: usize,
    pub fraction: f64,
    pub repeats: usize,
    pub auc_mean: Option<f64>,
    pub auc_std: Option<f64>,
    pub f1_mean: Option<f64>,
    pub f1_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<MetricRow>,
    pub summaries: Vec<MetricSummary>,
    pub skipped: Vec<SkippedCell>,
}

fn split_seed(master: u64, fraction_index: usize, repeat: usize) -> u64 {
    derive_seed(master, ((fraction_index as u64) << 32) | repeat as u64)
}

/// All cells in (kind, k, fraction, repeat) order.
pub fn plan_cells(cfg: &EvalConfig) -> Vec<EvalCell> {
    let mut cells = Vec::new();
    for &kind in &cfg.kinds {
        for &k in &cfg.ks {
            for (fi, &fraction) in cfg.fractions.iter().enumerate() {
                for repeat in 0..cfg.repeats {
                    cells.push(EvalCell {
                        kind,
                        k,
                        fraction,
                        repeat,
                        split_seed: split_seed(cfg.seed, fi, repeat),
                    });
                }
            }
        }
    }
    cells
}

/// Labeled positions of `labels`, paired with their label.
pub fn labeled_positions(labels: &[Label]) -> Vec<(usize, Label)> {
    labels
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_labeled())
        .map(|(i, &l)| (i, l))
        .collect()
}

/// Evaluate one cell on a similarity matrix whose rows align with
/// `labels`.
pub fn evaluate_cell(m: &SimilarityMatrix, labels: &[Label], cell: &EvalCell) -> Result<CellOutcome> {
    if m.kind != cell.kind {
        return Err(Error::InvalidParameter(format!(
            "matrix is {} but cell asks for {}",
            m.kind, cell.kind
        )));
    }
    if labels.len() != m.len() {
        return Err(Error::InvalidParameter("labels do not align with the matrix".into()));
    }
    let labeled = labeled_positions(labels);
    let split = split_train_test(&labeled, cell.fraction, cell.split_seed)?;
    let per_class = |l: Label| split.train.iter().filter(|&&i| labels[i] == l).count();
    let smallest = per_class(Label::Abuser).min(per_class(Label::Legitimate));
    if smallest < cell.k {
        return Ok(CellOutcome::Skipped(SkippedCell {
            cell: *cell,
            reason: format!("{smallest} training accounts in the smaller class, k = {}", cell.k),
        }));
    }
    let train: Vec<(usize, Label)> = split.train.iter().map(|&i| (i, labels[i])).collect();
    let mut scored = Vec::with_capacity(split.test.len());
    let mut predicted = Vec::with_capacity(split.test.len());
    for &x in &split.test {
        let n = neighborhood_in(m, x, &train, cell.k)?;
        scored.push((account_authenticity(&n).value, labels[x]));
        predicted.push((knn_label(&n), labels[x]));
    }
    let auc = auc(&scored);
    Ok(CellOutcome::Row(MetricRow {
        kind: cell.kind,
        k: cell.k,
        fraction: cell.fraction,
        repeat: cell.repeat,
        auc,
        f1: f1(&predicted),
        train_size: split.train.len(),
        test_size: split.test.len(),
        degenerate: auc.is_none(),
    }))
}

/// Mean and sample standard deviation (n − 1 denominator, 0 for a single
/// value).
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Some((mean, libm::sqrt(var)))
}

/// Group rows by (kind, k, fraction) in first-appearance order.
pub fn summarize(rows: &[MetricRow]) -> Vec<MetricSummary> {
    let mut groups: Vec<(SimilarityKind, usize, f64, Vec<&MetricRow>)> = Vec::new();
    for r in rows {
        match groups
            .iter_mut()
            .find(|g| g.0 == r.kind && g.1 == r.k && g.2.to_bits() == r.fraction.to_bits())
        {
            Some(g) => g.3.push(r),
            None => groups.push((r.kind, r.k, r.fraction, alloc::vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(kind, k, fraction, rows)| {
            let good: Vec<&MetricRow> = rows.into_iter().filter(|r| !r.degenerate).collect();
            let aucs: Vec<f64> = good.iter().filter_map(|r| r.auc).collect();
            let f1s: Vec<f64> = good.iter().map(|r| r.f1).collect();
            let a = mean_std(&aucs);
            let f = mean_std(&f1s);
            MetricSummary {
                kind,
                k,
                fraction,
                repeats: good.len(),
                auc_mean: a.map(|x| x.0),
                auc_std: a.map(|x| x.1),
                f1_mean: f.map(|x| x.0),
                f1_std: f.map(|x| x.1),
            }
        })
        .collect()
}

/// Collect cell outcomes (in plan order) into a report.
pub fn collect(outcomes: impl IntoIterator<Item = CellOutcome>) -> EvalReport {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            CellOutcome::Row(r) => rows.push(r),
            CellOutcome::Skipped(s) => skipped.push(s),
        }
    }
    let summaries = summarize(&rows);
    EvalReport { rows, summaries, skipped }
}

/// Sequential sweep. `matrices` must contain one matrix per configured
/// kind, rows aligned with `labels`.
pub fn run_evaluation(matrices: &[SimilarityMatrix], labels: &[Label], cfg: &EvalConfig) -> Result<EvalReport> {
    cfg.validate()?;
    let labeled = labeled_positions(labels);
    for l in [Label::Abuser, Label::Legitimate] {
        if !labeled.iter().any(|p| p.1 == l) {
            return Err(Error::EmptyClass(l));
        }
    }
    let mut outcomes = Vec::new();
    for cell in plan_cells(cfg) {
        let m = matrices
            .iter()
            .find(|m| m.kind == cell.kind)
            .ok_or(Error::MissingArtifact {
                kind: cell.kind,
                artifact: "similarity matrix",
            })?;
        outcomes.push(evaluate_cell(m, labels, &cell)?);
    }
    Ok(collect(outcomes))
}
