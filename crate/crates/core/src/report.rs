//! Per-topic reports and their donut-chart rendering.
//!
//! The inner ring shows how the authenticity of the topic's member
//! accounts is distributed, the outer ring the same for posts weighted by
//! T(p,i). Bins split [-0.5, 0.5] into equal widths; a score on an interior
//! edge goes to the higher bin and +0.5 to the top bin.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate_topics, aligned_scores, TopicAuthenticity};
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::topics::{PostTopics, TopicModel};

pub const DEFAULT_BINS: usize = 5;
pub const DEFAULT_TOP_TERMS: usize = 15;

/// Deep red (most abusive) to deep green (most authentic).
pub const PALETTE: [[u8; 3]; 5] = [
    [0xd7, 0x19, 0x1c],
    [0xfd, 0xae, 0x61],
    [0xff, 0xff, 0xbf],
    [0xa6, 0xd9, 0x6a],
    [0x1a, 0x96, 0x41],
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub bins: usize,
    pub top_terms: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            top_terms: DEFAULT_TOP_TERMS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermWeight {
    pub term: String,
    pub probability: f64,
}

/// Raw bin masses and their normalized shares. Shares are all zero when
/// the total mass is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub values: Vec<f64>,
    pub shares: Vec<f64>,
}

impl Histogram {
    fn from_values(values: Vec<f64>) -> Self {
        let total: f64 = values.iter().sum();
        let shares = if total > 0.0 {
            values.iter().map(|v| v / total).collect()
        } else {
            vec![0.0; values.len()]
        };
        Self { values, shares }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicReport {
    pub topic: usize,
    pub top_terms: Vec<TermWeight>,
    /// Member counts per bin.
    pub inner: Histogram,
    /// Post weights T(p,i) per bin of the author's score.
    pub outer: Histogram,
    pub bin_edges: Vec<f64>,
    pub authenticity: TopicAuthenticity,
}

/// B+1 equally spaced edges over [-0.5, 0.5].
pub fn bin_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| -0.5 + i as f64 / bins as f64).collect()
}

/// Bin of `score` given the edges.
pub fn bin_index(score: f64, edges: &[f64]) -> usize {
    let bins = edges.len() - 1;
    edges[1..bins].iter().filter(|&&e| score >= e).count()
}

fn validate(model: &TopicModel, topics: &PostTopics, topic: usize, cfg: &ReportConfig) -> Result<()> {
    if cfg.bins == 0 {
        return Err(Error::InvalidParameter("need at least one bin".into()));
    }
    if model.k != topics.k {
        return Err(Error::InvalidParameter(format!(
            "model has {} topics but distributions have {}",
            model.k, topics.k
        )));
    }
    if topic >= topics.k {
        return Err(Error::TopicOutOfRange { topic, k: topics.k });
    }
    Ok(())
}

fn report_from(
    model: &TopicModel,
    d: &Dataset,
    topics: &PostTopics,
    scores: &[Option<f64>],
    agg: TopicAuthenticity,
    cfg: &ReportConfig,
) -> TopicReport {
    let i = agg.topic;
    let edges = bin_edges(cfg.bins);
    let mut inner = vec![0.0; cfg.bins];
    for id in &agg.members {
        let a = d.account_index(id).expect("members come from the dataset");
        inner[bin_index(scores[a].unwrap_or(0.0), &edges)] += 1.0;
    }
    let mut outer = vec![0.0; cfg.bins];
    for p in 0..d.posts().len() {
        let s = scores[d.author_index(p)].unwrap_or(0.0);
        outer[bin_index(s, &edges)] += topics.probs(p)[i];
    }
    TopicReport {
        topic: i,
        top_terms: model
            .top_terms(i, cfg.top_terms)
            .into_iter()
            .map(|(term, probability)| TermWeight { term, probability })
            .collect(),
        inner: Histogram::from_values(inner),
        outer: Histogram::from_values(outer),
        bin_edges: edges,
        authenticity: agg,
    }
}

/// Report for one topic.
pub fn build_topic_report(
    model: &TopicModel,
    d: &Dataset,
    scores: &BTreeMap<String, f64>,
    topics: &PostTopics,
    topic: usize,
    cfg: &ReportConfig,
) -> Result<TopicReport> {
    validate(model, topics, topic, cfg)?;
    let aligned = aligned_scores(d, scores)?;
    let agg = aggregate_topics(d, topics, scores)?.swap_remove(topic);
    Ok(report_from(model, d, topics, &aligned, agg, cfg))
}

/// Reports for every topic.
pub fn build_all_reports(
    model: &TopicModel,
    d: &Dataset,
    scores: &BTreeMap<String, f64>,
    topics: &PostTopics,
    cfg: &ReportConfig,
) -> Result<Vec<TopicReport>> {
    validate(model, topics, 0, cfg)?;
    let aligned = aligned_scores(d, scores)?;
    Ok(aggregate_topics(d, topics, scores)?
        .into_iter()
        .map(|agg| report_from(model, d, topics, &aligned, agg, cfg))
        .collect())
}

/// One entry of the report index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub rank: usize,
    pub topic: usize,
    pub author_level_mean: Option<f64>,
    pub post_level_mean: Option<f64>,
    pub members: usize,
    pub top_terms: Vec<String>,
}

/// Topics ordered by author-level mean, least authentic first; topics
/// without members come last. Ties keep topic order.
pub fn rank_topics(reports: &[TopicReport]) -> Vec<IndexEntry> {
    let mut order: Vec<&TopicReport> = reports.iter().collect();
    order.sort_by(|a, b| {
        match (a.authenticity.author_level_mean, b.authenticity.author_level_mean) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => core::cmp::Ordering::Less,
            (None, Some(_)) => core::cmp::Ordering::Greater,
            (None, None) => core::cmp::Ordering::Equal,
        }
        .then(a.topic.cmp(&b.topic))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(rank, r)| IndexEntry {
            rank: rank + 1,
            topic: r.topic,
            author_level_mean: r.authenticity.author_level_mean,
            post_level_mean: r.authenticity.post_level_mean,
            members: r.authenticity.members.len(),
            top_terms: r.top_terms.iter().map(|t| t.term.clone()).collect(),
        })
        .collect()
}

/// Colour of bin `b` out of `bins`, interpolated along [`PALETTE`].
pub fn bin_color(b: usize, bins: usize) -> String {
    let rgb = if bins == PALETTE.len() {
        PALETTE[b]
    } else if bins == 1 {
        PALETTE[2]
    } else {
        let x = b as f64 / (bins - 1) as f64 * (PALETTE.len() - 1) as f64;
        let lo = (x as usize).min(PALETTE.len() - 2);
        let t = x - lo as f64;
        let mut c = [0u8; 3];
        for (ch, out) in c.iter_mut().enumerate() {
            let v = PALETTE[lo][ch] as f64 * (1.0 - t) + PALETTE[lo + 1][ch] as f64 * t;
            *out = libm::round(v) as u8;
        }
        c
    };
    format!("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2])
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

const WIDTH: f64 = 600.0;
const HEIGHT: f64 = 640.0;
const CX: f64 = 300.0;
const CY: f64 = 340.0;
pub const OUTER_RING: (f64, f64) = (240.0, 290.0);
pub const INNER_RING: (f64, f64) = (185.0, 235.0);

/// Point at `deg` degrees clockwise from twelve o'clock.
fn polar(r: f64, deg: f64) -> (f64, f64) {
    let rad = deg.to_radians();
    (CX + r * libm::sin(rad), CY - r * libm::cos(rad))
}

fn sector_path(ring: (f64, f64), start: f64, end: f64) -> String {
    let (ri, ro) = ring;
    let mut d = String::new();
    if end - start >= 360.0 - 1e-9 {
        // A full ring: two half-circle arcs per boundary.
        let _ = write!(
            d,
            "M {cx:.6} {t:.6} A {ro} {ro} 0 1 1 {cx:.6} {b:.6} A {ro} {ro} 0 1 1 {cx:.6} {t:.6} \
             M {cx:.6} {ti:.6} A {ri} {ri} 0 1 0 {cx:.6} {bi:.6} A {ri} {ri} 0 1 0 {cx:.6} {ti:.6} Z",
            cx = CX,
            t = CY - ro,
            b = CY + ro,
            ti = CY - ri,
            bi = CY + ri,
        );
        return d;
    }
    let large = u8::from(end - start > 180.0);
    let (x0, y0) = polar(ro, start);
    let (x1, y1) = polar(ro, end);
    let (x2, y2) = polar(ri, end);
    let (x3, y3) = polar(ri, start);
    let _ = write!(
        d,
        "M {x0:.6} {y0:.6} A {ro} {ro} 0 {large} 1 {x1:.6} {y1:.6} L {x2:.6} {y2:.6} A {ri} {ri} 0 {large} 0 {x3:.6} {y3:.6} Z"
    );
    d
}

fn ring(out: &mut String, name: &str, radii: (f64, f64), h: &Histogram) {
    let bins = h.shares.len();
    let _ = writeln!(out, "  <g class=\"ring\" data-ring=\"{name}\">");
    let mut start = 0.0;
    for (b, &share) in h.shares.iter().enumerate() {
        if share <= 0.0 {
            continue;
        }
        let end = if share >= 1.0 { 360.0 } else { start + 360.0 * share };
        let _ = writeln!(
            out,
            "    <path data-ring=\"{name}\" data-bin=\"{b}\" data-start=\"{start:.9}\" data-end=\"{end:.9}\" fill=\"{}\" fill-rule=\"evenodd\" stroke=\"#ffffff\" stroke-width=\"1\" d=\"{}\"/>",
            bin_color(b, bins),
            sector_path(radii, start, end)
        );
        start = end;
    }
    let _ = writeln!(out, "  </g>");
}

/// Standalone SVG donut chart for one topic.
pub fn render_donut_svg(r: &TopicReport) -> String {
    render_donut_svg_annotated(r, None)
}

/// As [`render_donut_svg`], with an optional XML comment after the prolog.
pub fn render_donut_svg_annotated(r: &TopicReport, note: Option<&str>) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    if let Some(note) = note {
        let _ = writeln!(out, "<!-- {} -->", note.replace("--", "- -"));
    }
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "  <title>Topic {} authenticity</title>", r.topic);
    let mean = |m: Option<f64>| m.map_or_else(|| String::from("n/a"), |v| format!("{v:.3}"));
    let _ = writeln!(
        out,
        "  <text x=\"{CX}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">Topic {} (author mean {}, post mean {})</text>",
        r.topic,
        mean(r.authenticity.author_level_mean),
        mean(r.authenticity.post_level_mean)
    );
    ring(&mut out, "outer", OUTER_RING, &r.outer);
    ring(&mut out, "inner", INNER_RING, &r.inner);

    let pmax = r.top_terms.iter().map(|t| t.probability).fold(0.0, f64::max);
    let sizes: Vec<f64> = r
        .top_terms
        .iter()
        .map(|t| if pmax > 0.0 { 6.0 + 8.0 * t.probability / pmax } else { 6.0 })
        .collect();
    let height: f64 = sizes.iter().map(|s| s + 1.0).sum();
    let mut y = CY - height / 2.0;
    let _ = writeln!(out, "  <g class=\"terms\" font-family=\"sans-serif\" text-anchor=\"middle\">");
    for (t, size) in r.top_terms.iter().zip(&sizes) {
        y += size + 1.0;
        let _ = writeln!(
            out,
            "    <text x=\"{CX}\" y=\"{y:.4}\" font-size=\"{size:.4}\" data-p=\"{:.6}\">{}</text>",
            t.probability,
            xml_escape(&t.term)
        );
    }
    let _ = writeln!(out, "  </g>");
    out.push_str("</svg>\n");
    out
}
