//! Tweet text cleaning, CJK character splitting and COVID keyword filtering.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDateTime, SubsecRound, Utc};
use regex::Regex;

use crate::error::{csv_error, Error, Result};

/// Epidemic row of the crawl keyword table, in table order.
pub const EPIDEMIC_KEYWORDS: &[&str] = &[
    "covid-19",
    "corona",
    "virus",
    "sars-cov-2",
    "pandemic",
    "mask",
    "stay home",
    "work from home",
    "endemic",
    "breathing",
    "china",
    "wuhan",
    "lock down",
    "outbreak",
    "positive",
    "testing site",
    "asymptonmatic",
    "asymptomatic",
    "epidemic",
    "quarantine",
    "vaccine",
    "cdc",
    "isolation",
    "n95",
    "kn95",
    "transmission",
    "community spread",
    "flu shot",
];

/// Panic-buying row of the crawl keyword table, in table order.
pub const PANIC_BUYING_KEYWORDS: &[&str] = &[
    "toilet paper",
    "pasta",
    "rice",
    "flour",
    "hoarding",
    "fruit",
    "vegetables",
    "panic buying",
    "supermarket",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeywordGroup {
    Epidemic,
    PanicBuying,
}

/// Which keyword groups a tweet must hit to stay in the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterMode {
    #[default]
    Either,
    Epidemic,
    PanicBuying,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSet {
    epidemic: Vec<String>,
    panic_buying: Vec<String>,
}

fn normalize_phrase(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn push_unique(list: &mut Vec<String>, phrase: String) {
    if !phrase.is_empty() && !list.contains(&phrase) {
        list.push(phrase);
    }
}

impl Default for KeywordSet {
    fn default() -> Self {
        Self::new(
            EPIDEMIC_KEYWORDS.iter().copied(),
            PANIC_BUYING_KEYWORDS.iter().copied(),
        )
        .expect("default keyword table is non-empty")
    }
}

impl KeywordSet {
    pub fn new<'a>(
        epidemic: impl IntoIterator<Item = &'a str>,
        panic_buying: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self> {
        let mut set = KeywordSet {
            epidemic: Vec::new(),
            panic_buying: Vec::new(),
        };
        for p in epidemic {
            push_unique(&mut set.epidemic, normalize_phrase(p));
        }
        for p in panic_buying {
            push_unique(&mut set.panic_buying, normalize_phrase(p));
        }
        if set.epidemic.is_empty() && set.panic_buying.is_empty() {
            return Err(Error::Keywords("keyword set is empty".into()));
        }
        Ok(set)
    }

    /// Parses the sectioned keyword format: `[epidemic]` and `[panic-buying]`
    /// headers, one phrase per line, `#` starts a comment.
    pub fn parse(source: &str) -> Result<Self> {
        let mut epidemic = Vec::new();
        let mut panic = Vec::new();
        let mut section: Option<KeywordGroup> = None;
        for (idx, raw) in source.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = match line[1..line.len() - 1].trim().to_lowercase().as_str() {
                    "epidemic" => Some(KeywordGroup::Epidemic),
                    "panic-buying" | "panic_buying" => Some(KeywordGroup::PanicBuying),
                    other => {
                        return Err(Error::Keywords(format!(
                            "line {}: unknown section [{other}]",
                            idx + 1
                        )))
                    }
                };
                continue;
            }
            match section {
                Some(KeywordGroup::Epidemic) => epidemic.push(line),
                Some(KeywordGroup::PanicBuying) => panic.push(line),
                None => {
                    return Err(Error::Keywords(format!(
                        "line {}: phrase outside of a section",
                        idx + 1
                    )))
                }
            }
        }
        Self::new(epidemic, panic)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn epidemic(&self) -> &[String] {
        &self.epidemic
    }

    pub fn panic_buying(&self) -> &[String] {
        &self.panic_buying
    }

    /// Epidemic phrases first, then panic-buying phrases.
    pub fn iter(&self) -> impl Iterator<Item = (KeywordGroup, &str)> {
        self.epidemic
            .iter()
            .map(|p| (KeywordGroup::Epidemic, p.as_str()))
            .chain(
                self.panic_buying
                    .iter()
                    .map(|p| (KeywordGroup::PanicBuying, p.as_str())),
            )
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.epidemic.iter().chain(&self.panic_buying).any(|p| p == phrase)
    }

    pub fn group_of(&self, phrase: &str) -> Option<KeywordGroup> {
        self.iter().find(|(_, p)| *p == phrase).map(|(g, _)| g)
    }
}

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)https?://\S*").unwrap())
}

fn mention_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\B@\w+").unwrap())
}

/// Emoji, pictographs and the joiners/selectors that glue emoji sequences.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1F5FF   // misc symbols & pictographs
        | 0x1F600..=0x1F64F // emoticons
        | 0x1F680..=0x1F6FF // transport & map
        | 0x1F900..=0x1F9FF // supplemental symbols & pictographs
        | 0x1FA70..=0x1FAFF // symbols & pictographs extended-a
        | 0x1F1E6..=0x1F1FF // regional indicators
        | 0x2600..=0x26FF   // misc symbols
        | 0x2700..=0x27BF   // dingbats
        | 0xFE0E..=0xFE0F   // variation selectors
        | 0x200D            // zero width joiner
        | 0x20E3            // combining keycap
    )
}

fn clean_once(raw: &str) -> String {
    let decoded = html_escape::decode_html_entities(raw);
    let no_urls = url_re().replace_all(&decoded, " ");
    let no_mentions = mention_re().replace_all(&no_urls, " ");
    let mut out = String::with_capacity(no_mentions.len());
    let mut pending_space = false;
    for c in no_mentions.chars() {
        if is_emoji(c) {
            // emoji sit between words as often as not
            pending_space = true;
            continue;
        }
        if c.is_whitespace() || c.is_control() {
            pending_space = true;
            continue;
        }
        if pending_space && !out.is_empty() {
            out.push(' ');
        }
        pending_space = false;
        out.push(c);
    }
    out
}

/// Strips URLs, emoji and @-mentions, decodes HTML entities and collapses
/// whitespace. Case is preserved. Runs the passes to a fixed point so that
/// the result is stable under a second application.
pub fn clean_text(raw: &str) -> String {
    let mut current = clean_once(raw);
    // Every pass that changes the text shortens it, so this terminates;
    // the cap is only there to bound pathological entity chains.
    for _ in 0..16 {
        let next = clean_once(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// Han ideographs, Hangul syllables, Hiragana and Katakana.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xAC00..=0xD7AF | 0x3040..=0x309F | 0x30A0..=0x30FF
    )
}

/// Puts a single space on each side of every CJK character that does not
/// already have one. Non-CJK runs are left as they are.
pub fn split_cjk(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + text.len() / 2);
    let mut prev: Option<char> = None;
    for c in text.chars() {
        if let Some(p) = prev {
            let boundary = is_cjk(c) || is_cjk(p);
            if boundary && p != ' ' && c != ' ' {
                out.push(' ');
            }
        }
        out.push(c);
        prev = Some(c);
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn contains_phrase(haystack: &str, phrase: &str) -> bool {
    haystack.match_indices(phrase).any(|(start, m)| {
        let before = haystack[..start].chars().next_back();
        let after = haystack[start + m.len()..].chars().next();
        !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
    })
}

/// Every keyword phrase present in `text` on word boundaries, in keyword-set
/// order. Matching ignores case and treats any whitespace run as one space.
pub fn match_keywords(text: &str, keywords: &KeywordSet) -> Vec<String> {
    let normalized = normalize_phrase(text);
    keywords
        .iter()
        .filter(|(_, phrase)| contains_phrase(&normalized, phrase))
        .map(|(_, phrase)| phrase.to_string())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TweetRecord {
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub matched_keywords: Vec<String>,
}

impl TweetRecord {
    pub fn passes(&self, keywords: &KeywordSet, mode: FilterMode) -> bool {
        self.matched_keywords.iter().any(|k| match mode {
            FilterMode::Either => true,
            FilterMode::Epidemic => keywords.group_of(k) == Some(KeywordGroup::Epidemic),
            FilterMode::PanicBuying => keywords.group_of(k) == Some(KeywordGroup::PanicBuying),
        })
    }
}

/// Accepts RFC 3339 instants and offset-free `YYYY-MM-DDTHH:MM:SS` (read as
/// UTC). Sub-second precision is dropped.
pub fn parse_timestamp(value: &str) -> Option<DateTime<Utc>> {
    let value = value.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(value) {
        return Some(t.with_timezone(&Utc).trunc_subsecs(0));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(value, fmt) {
            return Some(t.and_utc().trunc_subsecs(0));
        }
    }
    None
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

/// Reads a `timestamp,text[,...]` CSV. Every text is cleaned, CJK-split and
/// keyword-matched; records come back in timestamp order.
pub fn read_tweets<R: Read>(reader: R, keywords: &KeywordSet) -> Result<Vec<TweetRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = Vec::new();
    let mut rows = rdr.records();
    match rows.next() {
        None => return Ok(records),
        Some(header) => {
            let header = header.map_err(csv_error)?;
            let ts = header.get(0).map(|s| s.trim().trim_start_matches('\u{feff}'));
            if ts != Some("timestamp") || header.get(1).map(str::trim) != Some("text") {
                return Err(Error::MalformedRow {
                    line: 1,
                    reason: "header must start with `timestamp,text`".into(),
                });
            }
        }
    }
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() < 2 {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected at least 2 fields, found {}", row.len()),
            });
        }
        let timestamp = parse_timestamp(&row[0]).ok_or_else(|| Error::Timestamp {
            value: row[0].to_string(),
            line,
        })?;
        let text = split_cjk(&clean_text(&row[1]));
        let matched_keywords = match_keywords(&text, keywords);
        records.push(TweetRecord {
            timestamp,
            text,
            matched_keywords,
        });
    }
    records.sort_by_key(|r| r.timestamp);
    Ok(records)
}

pub fn parse_tweet_file(path: impl AsRef<Path>, keywords: &KeywordSet) -> Result<Vec<TweetRecord>> {
    read_tweets(std::fs::File::open(path)?, keywords)
}

/// Writes `timestamp,text,keywords` with keywords joined by `;`.
pub fn write_tweets<W: Write>(writer: W, records: &[TweetRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "text", "keywords"]).map_err(csv_error)?;
    for r in records {
        w.write_record([
            format_timestamp(&r.timestamp),
            r.text.clone(),
            r.matched_keywords.join(";"),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
