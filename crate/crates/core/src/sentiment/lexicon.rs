use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");

/// Token valences plus negation and intensity modifiers.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
    negators: HashSet<String>,
    intensifiers: HashMap<String, f64>,
}

#[derive(Clone, Copy)]
enum Section {
    Valence,
    Negators,
    Intensifiers,
}

impl Lexicon {
    /// The bundled English lexicon.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("bundled lexicon is valid")
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// `token<TAB>valence` lines, then optional `[negators]` (one token per
    /// line) and `[intensifiers]` (`token<TAB>multiplier`) sections.
    pub fn parse(source: &str) -> Result<Self> {
        let mut lex = Lexicon::default();
        let mut section = Section::Valence;
        for (idx, raw) in source.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Lexicon(format!("line {}: {msg}", idx + 1));
            match line {
                "[negators]" => {
                    section = Section::Negators;
                    continue;
                }
                "[intensifiers]" => {
                    section = Section::Intensifiers;
                    continue;
                }
                _ if line.starts_with('[') => return Err(err("unknown section")),
                _ => {}
            }
            match section {
                Section::Negators => {
                    lex.negators.insert(line.to_lowercase());
                }
                Section::Valence | Section::Intensifiers => {
                    let (token, value) = line
                        .split_once('\t')
                        .ok_or_else(|| err("expected token<TAB>value"))?;
                    let value: f64 = value
                        .trim()
                        .parse()
                        .map_err(|_| err("value is not a number"))?;
                    let token = token.trim().to_lowercase();
                    if let Section::Valence = section {
                        lex.insert(token, value).map_err(|e| err(&e.to_string()))?;
                    } else {
                        lex.insert_intensifier(token, value)
                            .map_err(|e| err(&e.to_string()))?;
                    }
                }
            }
        }
        Ok(lex)
    }

    pub fn insert(&mut self, token: impl Into<String>, valence: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&valence) {
            return Err(Error::Lexicon(format!("valence {valence} outside [-1, 1]")));
        }
        self.entries.insert(token.into(), valence);
        Ok(())
    }

    pub fn insert_negator(&mut self, token: impl Into<String>) {
        self.negators.insert(token.into());
    }

    pub fn insert_intensifier(&mut self, token: impl Into<String>, multiplier: f64) -> Result<()> {
        if !(multiplier.is_finite() && multiplier > 0.0) {
            return Err(Error::Lexicon(format!(
                "multiplier {multiplier} must be finite and positive"
            )));
        }
        self.intensifiers.insert(token.into(), multiplier);
        Ok(())
    }

    pub fn valence(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn is_negator(&self, token: &str) -> bool {
        self.negators.contains(token)
    }

    pub fn intensity(&self, token: &str) -> Option<f64> {
        self.intensifiers.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn normalize_token(raw: &str) -> String {
    raw.trim_matches(|c: char| !c.is_alphanumeric())
        .to_lowercase()
}

/// How one lexicon word contributed to a score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contribution {
    pub token: String,
    /// Lexicon valence of the word.
    pub valence: f64,
    /// Intensifier multiplier applied (1 when none).
    pub multiplier: f64,
    pub negated: bool,
    /// Signed amount added to the pre-squash sum.
    pub value: f64,
}

/// The scored words of `text` in order, with the negation and intensity
/// rules of [`score_text`] applied.
pub fn explain_text(text: &str, lexicon: &Lexicon) -> Vec<Contribution> {
    let tokens: Vec<String> = text.split_whitespace().map(normalize_token).collect();
    let mut out = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if lexicon.is_negator(tok) || lexicon.intensity(tok).is_some() {
            continue;
        }
        let Some(valence) = lexicon.valence(tok) else {
            continue;
        };
        let multiplier = i
            .checked_sub(1)
            .and_then(|j| lexicon.intensity(&tokens[j]))
            .unwrap_or(1.0);
        let negated = tokens[i.saturating_sub(2)..i]
            .iter()
            .any(|t| lexicon.is_negator(t));
        let value = if negated { -valence * multiplier } else { valence * multiplier };
        out.push(Contribution {
            token: tok.clone(),
            valence,
            multiplier,
            negated,
            value,
        });
    }
    out
}

/// Valence sum with negation and intensity rules, squashed by `tanh`.
///
/// A negator among the two preceding tokens flips the sign of a valence; an
/// intensifier directly before it scales it. Modifier tokens themselves carry
/// no valence, and unknown tokens contribute nothing.
pub fn score_text(text: &str, lexicon: &Lexicon) -> f64 {
    let sum: f64 = explain_text(text, lexicon).iter().map(|c| c.value).sum();
    if sum == 0.0 {
        return 0.0;
    }
    // tanh rounds to exactly ±1 for sums beyond ~19; keep the interval open.
    const BOUND: f64 = 1.0 - f64::EPSILON;
    sum.tanh().clamp(-BOUND, BOUND)
}
