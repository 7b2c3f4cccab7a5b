//! County name canonicalization.
//!
//! A raw county name goes through: ASCII transliteration, whitespace
//! collapse, suffix stripping ("County", "Parish", "County Police
//! Department", ...), the explicit rename table, and finally case folding to
//! title case. The result is the join key shared by every table.

use std::fmt;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::LinkError;
use crate::states::StateCode;

/// Join key for a county: state plus canonical name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CountyKey {
    pub state: StateCode,
    pub name: String,
}

impl fmt::Display for CountyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.name, self.state)
    }
}

/// Longest first, so "County Police Department" wins over "Police Department".
const SUFFIXES: [&str; 4] = [" county police department", " police department", " county", " parish"];

const DEFAULT_RENAMES: &str = include_str!("../../data/renames.csv");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenameEntry {
    /// `None` applies in every state.
    pub state: Option<StateCode>,
    pub from_name: String,
    pub to_name: String,
}

/// Explicit spelling fixes applied after suffix stripping.
///
/// Matching is case-insensitive on the whole stripped name. Entries that
/// only change capitalization are kept for the record but have no effect
/// once names are case folded.
#[derive(Debug, Clone)]
pub struct RenameTable {
    entries: Vec<RenameEntry>,
}

impl Default for RenameTable {
    fn default() -> Self {
        RenameTable::from_csv(DEFAULT_RENAMES.as_bytes()).expect("bundled rename table is valid")
    }
}

impl RenameTable {
    pub fn new(entries: Vec<RenameEntry>) -> Result<Self, LinkError> {
        // A target that is itself a source would make canonicalization
        // depend on how many times it is applied.
        for e in &entries {
            for other in &entries {
                let applies = other.state.is_none() || e.state.is_none() || other.state == e.state;
                if applies
                    && other.from_name.eq_ignore_ascii_case(&e.to_name)
                    && !other.from_name.eq_ignore_ascii_case(&other.to_name)
                {
                    return Err(LinkError::RenameChain {
                        name: e.to_name.clone(),
                    });
                }
            }
            if e.from_name.trim().is_empty() || e.to_name.trim().is_empty() {
                return Err(LinkError::EmptyName);
            }
        }
        Ok(RenameTable { entries })
    }

    /// Reads `state,from_name,to_name` rows; a state of `*` matches all states.
    pub fn from_csv<R: Read>(source: R) -> Result<Self, LinkError> {
        let mut rdr = csv::Reader::from_reader(source);
        let mut entries = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| LinkError::RenameTable(e.to_string()))?;
            if rec.len() != 3 {
                return Err(LinkError::RenameTable(format!("expected 3 fields, found {}", rec.len())));
            }
            let state = match rec[0].trim() {
                "*" => None,
                s => Some(StateCode::parse(s).ok_or_else(|| LinkError::UnknownState(s.to_string()))?),
            };
            entries.push(RenameEntry {
                state,
                from_name: normalize_spacing(&rec[1]),
                to_name: normalize_spacing(&rec[2]),
            });
        }
        RenameTable::new(entries)
    }

    pub fn entries(&self) -> &[RenameEntry] {
        &self.entries
    }

    fn rename<'a>(&'a self, state: StateCode, name: &'a str) -> &'a str {
        self.entries
            .iter()
            .find(|e| e.state.is_none_or(|s| s == state) && e.from_name.eq_ignore_ascii_case(name))
            .map_or(name, |e| e.to_name.as_str())
    }

    /// Canonical key for a raw county name. `state` may be a postal code or
    /// a full state name.
    pub fn canonicalize(&self, state: &str, raw_name: &str) -> Result<CountyKey, LinkError> {
        let state = StateCode::parse(state).ok_or_else(|| LinkError::UnknownState(state.to_string()))?;
        self.canonicalize_in(state, raw_name)
    }

    pub fn canonicalize_in(&self, state: StateCode, raw_name: &str) -> Result<CountyKey, LinkError> {
        let ascii = deunicode::deunicode(raw_name);
        let mut name = normalize_spacing(&ascii);
        while let Some(stripped) = strip_suffix(&name) {
            name = stripped;
        }
        if name.is_empty() {
            return Err(LinkError::EmptyName);
        }
        let renamed = self.rename(state, &name);
        Ok(CountyKey {
            state,
            name: title_case(renamed),
        })
    }
}

/// Canonicalizes with the bundled rename table.
pub fn canonicalize(state: &str, raw_name: &str) -> Result<CountyKey, LinkError> {
    thread_local! {
        static TABLE: RenameTable = RenameTable::default();
    }
    TABLE.with(|t| t.canonicalize(state, raw_name))
}

fn normalize_spacing(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn strip_suffix(name: &str) -> Option<String> {
    let lower = name.to_ascii_lowercase();
    SUFFIXES
        .iter()
        .find(|suf| lower.len() > suf.len() && lower.ends_with(*suf))
        .map(|suf| name[..name.len() - suf.len()].trim_end().to_string())
}

/// Upper-cases the first letter after a space or hyphen and lower-cases the rest.
fn title_case(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut at_start = true;
    for c in s.chars() {
        if at_start {
            out.push(c.to_ascii_uppercase());
        } else {
            out.push(c.to_ascii_lowercase());
        }
        at_start = c == ' ' || c == '-';
    }
    out
}
