//! Plain-text storage of a fitted topic model.
//!
//! ```text
//! AUTHLAB-LDA 1
//! config_hash <hex>
//! config <json>
//! k 48
//! alpha 0.1
//! beta 0.01
//! seed 0
//! iterations 500
//! vocab 1234
//! <term>\t<phi_0> <phi_1> ... <phi_{k-1}>
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a saved model
//! reloads bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use authlab_core::topics::TopicModel;

use crate::failure::Failure;
use crate::io::{write_atomic, Header};

const MAGIC: &str = "AUTHLAB-LDA 1";

pub fn save_model(path: &Path, model: &TopicModel, header: &Header) -> Result<(), Failure> {
    let k = model.k;
    let v = model.vocab().len();
    let phi = model.term_topic();
    if let Some(bad) = model.vocab().iter().find(|t| t.contains(['\t', '\n', '\r'])) {
        return Err(Failure::stage(format!("term {bad:?} cannot be stored in a model file")));
    }
    write_atomic(path, |w| {
        let config = serde_json::to_string(&header.config)?;
        writeln!(w, "{MAGIC}")?;
        writeln!(w, "config_hash {}", header.config_hash)?;
        writeln!(w, "config {config}")?;
        writeln!(w, "k {k}")?;
        writeln!(w, "alpha {}", model.alpha)?;
        writeln!(w, "beta {}", model.beta)?;
        writeln!(w, "seed {}", model.seed)?;
        writeln!(w, "iterations {}", model.iterations)?;
        writeln!(w, "vocab {v}")?;
        let mut line = String::new();
        for (j, term) in model.vocab().iter().enumerate() {
            line.clear();
            line.push_str(term);
            line.push('\t');
            for t in 0..k {
                if t > 0 {
                    line.push(' ');
                }
                write!(line, "{}", phi[t * v + j]).expect("writing to a String");
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    })
}

/// A loaded model and the configuration hash it was fitted under.
#[derive(Debug)]
pub struct LoadedModel {
    pub model: TopicModel,
    pub config_hash: String,
}

pub fn load_model(path: &Path) -> Result<LoadedModel, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("cannot read model `{}`: {e}", path.display())))?;
    parse_model(&text).map_err(|e| e.context(format!("model file `{}`", path.display())))
}

fn field<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>, name: &str) -> Result<&'a str, Failure> {
    let (n, line) = lines
        .next()
        .ok_or_else(|| Failure::data(format!("truncated before `{name}`")))?;
    line.strip_prefix(name)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Failure::data(format!("line {n}: expected `{name}`")))
}

fn number<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, Failure>
where
    T::Err: std::fmt::Display,
{
    s.trim()
        .parse()
        .map_err(|e| Failure::data(format!("bad `{name}` value `{s}`: {e}")))
}

pub fn parse_model(text: &str) -> Result<LoadedModel, Failure> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC)) => {}
        _ => return Err(Failure::data("not an authlab topic model")),
    }
    let config_hash = field(&mut lines, "config_hash")?.to_string();
    field(&mut lines, "config")?;
    let k: usize = number(field(&mut lines, "k")?, "k")?;
    let alpha: f64 = number(field(&mut lines, "alpha")?, "alpha")?;
    let beta: f64 = number(field(&mut lines, "beta")?, "beta")?;
    let seed: u64 = number(field(&mut lines, "seed")?, "seed")?;
    let iterations: usize = number(field(&mut lines, "iterations")?, "iterations")?;
    let v: usize = number(field(&mut lines, "vocab")?, "vocab")?;
    let mut vocab = Vec::with_capacity(v);
    let mut phi = vec![0.0; k.saturating_mul(v)];
    for j in 0..v {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Failure::data(format!("expected {v} terms, found {j}")))?;
        let (term, values) = line
            .split_once('\t')
            .ok_or_else(|| Failure::data(format!("line {n}: missing tab after term")))?;
        let mut count = 0;
        for (t, x) in values.split(' ').enumerate() {
            if t >= k {
                return Err(Failure::data(format!("line {n}: more than {k} probabilities")));
            }
            phi[t * v + j] = number(x, "probability").map_err(|e| e.context(format!("line {n}")))?;
            count += 1;
        }
        if count != k {
            return Err(Failure::data(format!("line {n}: expected {k} probabilities, found {count}")));
        }
        vocab.push(term.to_string());
    }
    if let Some((n, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Failure::data(format!("line {n}: unexpected content after the vocabulary")));
    }
    let model = TopicModel::from_parts(k, alpha, beta, seed, iterations, vocab, phi)
        .map_err(|e| Failure::data(e.to_string()))?;
    Ok(LoadedModel { model, config_hash })
}

#[cfg(test)]
mod tests {
    use super::*;
    use authlab_core::topics::{fit_lda, LdaConfig};

    fn fitted() -> TopicModel {
        let docs: Vec<Vec<String>> = (0..30)
            .map(|i| {
                let base = if i % 2 == 0 { ["apple", "pear", "plum"] } else { ["car", "bus", "train"] };
                (0..6).map(|j| base[(i + j) % 3].to_string()).collect()
            })
            .collect();
        let cfg = LdaConfig {
            k: 3,
            iterations: 20,
            seed: 4,
            ..LdaConfig::default()
        };
        fit_lda(&docs, &cfg).unwrap().0
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.lda");
        let m = fitted();
        let h = Header::new("model", "hash0", &serde_json::json!({"k": 3}));
        save_model(&path, &m, &h).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back.config_hash, "hash0");
        assert_eq!(back.model, m);
        for (a, b) in back.model.term_topic().iter().zip(m.term_topic()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_damage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.lda");
        let h = Header::new("model", "h", &serde_json::Value::Null);
        save_model(&path, &fitted(), &h).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(parse_model("hello").is_err());
        let truncated: String = text.lines().take(12).map(|l| format!("{l}\n")).collect();
        assert!(parse_model(&truncated).is_err());
        let skewed = text.replacen('\t', "\t0.5 ", 1);
        assert!(parse_model(&skewed).is_err());
        let e = parse_model(&text.replace("alpha 0.1", "alpha x")).unwrap_err();
        assert_eq!(e.exit_code(), crate::failure::EXIT_DATA);
    }
}
