//! Parsers for the source tables.
//!
//! Every parser takes a byte stream holding comma-delimited UTF-8 with a
//! header row. Columns are located by header name, so extra columns are
//! ignored and column order does not matter. Rows violating a type invariant
//! are rejected with the offending line number; nothing is coerced.

mod arrests;
mod cities;
mod codes;
mod demography;
mod lee;
mod shootings;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use arrests::{parse_arrests, write_arrests, RawArrestRow};
pub use cities::{parse_cities, write_cities, CityRow};
pub use codes::{parse_codes, write_codes, RawCodeRow};
pub use demography::{parse_demography, write_demography, RawDemographyRow};
pub use lee::{parse_lee, write_lee, RawLeeRow};
pub use shootings::{parse_shootings, write_shootings, RawShootingRow, FIRST_DATE, LAST_DATE};

/// Which demographic table a row or distribution comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vintage {
    /// 2010 census counts.
    Census2010,
    /// 2016 projections.
    Proj2016,
}

impl Vintage {
    pub const ALL: [Vintage; 2] = [Vintage::Census2010, Vintage::Proj2016];

    pub fn as_str(self) -> &'static str {
        match self {
            Vintage::Census2010 => "census2010",
            Vintage::Proj2016 => "proj2016",
        }
    }
}

impl fmt::Display for Vintage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The fixture files, in load order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dataset {
    Shootings,
    Dem2010,
    Dem2016,
    Lee,
    Arrest,
    Codes,
    Cities,
}

impl Dataset {
    pub const ALL: [Dataset; 7] = [
        Dataset::Shootings,
        Dataset::Dem2010,
        Dataset::Dem2016,
        Dataset::Lee,
        Dataset::Arrest,
        Dataset::Codes,
        Dataset::Cities,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            Dataset::Shootings => "wp.csv",
            Dataset::Dem2010 => "dem2010.csv",
            Dataset::Dem2016 => "dem2016.csv",
            Dataset::Lee => "lee.csv",
            Dataset::Arrest => "arrest.csv",
            Dataset::Codes => "codes.csv",
            Dataset::Cities => "cities.csv",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Dataset::Shootings => "wp",
            Dataset::Dem2010 => "dem2010",
            Dataset::Dem2016 => "dem2016",
            Dataset::Lee => "lee",
            Dataset::Arrest => "arrest",
            Dataset::Codes => "codes",
            Dataset::Cities => "cities",
        }
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("missing input file {}", path.display())]
    MissingFile { path: PathBuf },
    #[error("{dataset}: read failed: {source}")]
    Io {
        dataset: Dataset,
        #[source]
        source: io::Error,
    },
    #[error("{dataset}: header is missing column {column:?}")]
    MissingColumn { dataset: Dataset, column: String },
    #[error("{dataset} line {line}: {message}")]
    Malformed {
        dataset: Dataset,
        line: u64,
        message: String,
    },
    #[error("{dataset} line {line}: unknown race code {code:?}")]
    UnknownRace {
        dataset: Dataset,
        line: u64,
        code: String,
    },
    #[error("{dataset} line {line}: county {county:?}: {message}")]
    Consistency {
        dataset: Dataset,
        line: u64,
        county: String,
        message: String,
    },
    #[error("{dataset} line {line}: duplicate {key}")]
    Duplicate {
        dataset: Dataset,
        line: u64,
        key: String,
    },
}

impl IngestError {
    /// True when the input was absent rather than invalid.
    pub fn is_missing_input(&self) -> bool {
        matches!(self, IngestError::MissingFile { .. })
    }

    /// Line number of the offending row, if the error concerns one.
    pub fn line(&self) -> Option<u64> {
        match self {
            IngestError::Malformed { line, .. }
            | IngestError::UnknownRace { line, .. }
            | IngestError::Consistency { line, .. }
            | IngestError::Duplicate { line, .. } => Some(*line),
            _ => None,
        }
    }
}

pub type Result<T, E = IngestError> = std::result::Result<T, E>;

/// Canonical text form for free-text cells: ASCII, trimmed.
pub(crate) fn clean_text(s: &str) -> String {
    let t = s.trim();
    if t.is_ascii() {
        t.to_string()
    } else {
        deunicode::deunicode(t).trim().to_string()
    }
}

/// Header-name to column-index lookup for one table.
pub(crate) struct Columns {
    dataset: Dataset,
    idx: Vec<usize>,
}

impl Columns {
    pub(crate) fn resolve(
        dataset: Dataset,
        headers: &csv::StringRecord,
        names: &[&str],
    ) -> Result<Self> {
        let idx = names
            .iter()
            .map(|want| {
                headers
                    .iter()
                    .position(|h| h.trim().eq_ignore_ascii_case(want))
                    .ok_or_else(|| IngestError::MissingColumn {
                        dataset,
                        column: (*want).to_string(),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Columns { dataset, idx })
    }

    pub(crate) fn cell<'r>(&self, rec: &'r csv::StringRecord, col: usize, line: u64) -> Result<&'r str> {
        rec.get(self.idx[col]).ok_or_else(|| IngestError::Malformed {
            dataset: self.dataset,
            line,
            message: format!("row has only {} fields", rec.len()),
        })
    }

    /// Non-negative integer count. Blank cells are errors, never zero.
    pub(crate) fn count(&self, rec: &csv::StringRecord, col: usize, name: &str, line: u64) -> Result<u64> {
        let raw = self.cell(rec, col, line)?.trim();
        if raw.is_empty() {
            return Err(self.malformed(line, format!("blank count in column {name:?}")));
        }
        raw.parse::<u64>()
            .map_err(|_| self.malformed(line, format!("column {name:?}: {raw:?} is not a non-negative integer")))
    }

    pub(crate) fn integer(&self, rec: &csv::StringRecord, col: usize, name: &str, line: u64) -> Result<u32> {
        let raw = self.cell(rec, col, line)?.trim();
        raw.parse::<u32>()
            .map_err(|_| self.malformed(line, format!("column {name:?}: {raw:?} is not an integer code")))
    }

    pub(crate) fn text(&self, rec: &csv::StringRecord, col: usize, name: &str, line: u64) -> Result<String> {
        let t = clean_text(self.cell(rec, col, line)?);
        if t.is_empty() {
            return Err(self.malformed(line, format!("blank text in column {name:?}")));
        }
        Ok(t)
    }

    pub(crate) fn state(
        &self,
        rec: &csv::StringRecord,
        col: usize,
        line: u64,
    ) -> Result<crate::states::StateCode> {
        let raw = self.cell(rec, col, line)?.trim();
        crate::states::StateCode::parse(raw)
            .ok_or_else(|| self.malformed(line, format!("{raw:?} is not a US state or DC")))
    }

    pub(crate) fn malformed(&self, line: u64, message: String) -> IngestError {
        IngestError::Malformed {
            dataset: self.dataset,
            line,
            message,
        }
    }
}

/// Opens a CSV reader over a byte stream and resolves the wanted columns.
pub(crate) fn open<R: Read>(
    dataset: Dataset,
    source: R,
    names: &[&str],
) -> Result<(csv::Reader<R>, Columns)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(source);
    let headers = rdr.headers().map_err(|e| csv_error(dataset, e))?.clone();
    let cols = Columns::resolve(dataset, &headers, names)?;
    Ok((rdr, cols))
}

/// Iterates data rows as `(line, record)`.
pub(crate) fn rows<R: Read>(
    dataset: Dataset,
    rdr: &mut csv::Reader<R>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord)>> + '_ {
    rdr.records().map(move |r| {
        let rec = r.map_err(|e| csv_error(dataset, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        Ok((line, rec))
    })
}

pub(crate) fn csv_error(dataset: Dataset, e: csv::Error) -> IngestError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IngestError::Io { dataset, source },
        kind => IngestError::Malformed {
            dataset,
            line,
            message: match kind {
                csv::ErrorKind::Utf8 { err, .. } => format!("invalid UTF-8: {err}"),
                csv::ErrorKind::UnequalLengths {
                    expected_len, len, ..
                } => format!("expected {expected_len} fields, found {len}"),
                other => format!("{other:?}"),
            },
        },
    }
}

pub(crate) fn io_error(dataset: Dataset, e: csv::Error) -> io::Error {
    match csv_error(dataset, e) {
        IngestError::Io { source, .. } => source,
        other => io::Error::other(other.to_string()),
    }
}

/// All parsed fixture tables plus the SHA-256 of each source file.
#[derive(Debug, Clone)]
pub struct FixtureSet {
    pub shootings: Vec<RawShootingRow>,
    pub dem2010: Vec<RawDemographyRow>,
    pub dem2016: Vec<RawDemographyRow>,
    pub lee: Vec<RawLeeRow>,
    pub arrests: Vec<RawArrestRow>,
    pub codes: Vec<RawCodeRow>,
    pub cities: Vec<CityRow>,
    /// File name to lowercase hex SHA-256.
    pub checksums: BTreeMap<String, String>,
}

impl FixtureSet {
    /// Loads every fixture file from `dir`, failing fast on the first
    /// missing file (before any parsing) and then on the first invalid row.
    pub fn load(dir: &Path) -> Result<FixtureSet> {
        for ds in Dataset::ALL {
            let path = dir.join(ds.file_name());
            if !path.is_file() {
                return Err(IngestError::MissingFile { path });
            }
        }
        let mut checksums = BTreeMap::new();
        let mut read = |ds: Dataset| -> Result<Vec<u8>> {
            let bytes = fs::read(dir.join(ds.file_name())).map_err(|source| IngestError::Io {
                dataset: ds,
                source,
            })?;
            checksums.insert(ds.file_name().to_string(), sha256_hex(&bytes));
            Ok(bytes)
        };
        let shootings = parse_shootings(&read(Dataset::Shootings)?[..])?;
        let dem2010 = parse_demography(&read(Dataset::Dem2010)?[..], Vintage::Census2010)?;
        let dem2016 = parse_demography(&read(Dataset::Dem2016)?[..], Vintage::Proj2016)?;
        let lee = parse_lee(&read(Dataset::Lee)?[..])?;
        let arrests = parse_arrests(&read(Dataset::Arrest)?[..])?;
        let codes = parse_codes(&read(Dataset::Codes)?[..])?;
        let cities = parse_cities(&read(Dataset::Cities)?[..])?;
        Ok(FixtureSet {
            shootings,
            dem2010,
            dem2016,
            lee,
            arrests,
            codes,
            cities,
            checksums,
        })
    }

    pub fn demography(&self, vintage: Vintage) -> &[RawDemographyRow] {
        match vintage {
            Vintage::Census2010 => &self.dem2010,
            Vintage::Proj2016 => &self.dem2016,
        }
    }

    /// Row count per dataset, in load order.
    pub fn row_counts(&self) -> Vec<(Dataset, usize)> {
        vec![
            (Dataset::Shootings, self.shootings.len()),
            (Dataset::Dem2010, self.dem2010.len()),
            (Dataset::Dem2016, self.dem2016.len()),
            (Dataset::Lee, self.lee.len()),
            (Dataset::Arrest, self.arrests.len()),
            (Dataset::Codes, self.codes.len()),
            (Dataset::Cities, self.cities.len()),
        ]
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub(crate) fn parse_bool(raw: &str) -> Option<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "t" | "1" | "yes" => Some(true),
        "false" | "f" | "0" | "no" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_text_transliterates() {
        assert_eq!(clean_text("  Cañon City "), "Canon City");
        assert_eq!(clean_text("Travis"), "Travis");
    }

    #[test]
    fn load_reports_missing_file_first() {
        let dir = tempfile::tempdir().unwrap();
        let err = FixtureSet::load(dir.path()).unwrap_err();
        assert!(err.is_missing_input());
        assert!(err.to_string().contains("wp.csv"));
    }
}
