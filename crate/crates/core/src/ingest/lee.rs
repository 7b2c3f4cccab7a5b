use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{open, parse_bool, rows, Dataset, IngestError, Result};
use crate::states::StateCode;

/// Full-time law enforcement employment for one county agency row.
///
/// The source table is the reshaped FBI county employment table: one row per
/// county with the state repeated on each row and the metropolitan grouping
/// turned into a flag. County names are left as published (with "County",
/// "Parish" or "County Police Department" suffixes); they are cleaned during
/// linkage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawLeeRow {
    pub state: StateCode,
    pub county_name: String,
    pub metropolitan: bool,
    pub officers: u64,
    pub civilians: u64,
}

impl RawLeeRow {
    pub fn total_employees(&self) -> u64 {
        self.officers + self.civilians
    }
}

const COLUMNS: [&str; 6] = ["state", "metropolitan", "county", "total_employees", "officers", "civilians"];

pub fn parse_lee<R: Read>(source: R) -> Result<Vec<RawLeeRow>> {
    let ds = Dataset::Lee;
    let (mut rdr, cols) = open(ds, source, &COLUMNS)?;
    let mut out = Vec::new();
    for row in rows(ds, &mut rdr) {
        let (line, rec) = row?;
        let state = cols.state(&rec, 0, line)?;
        let raw_metro = cols.cell(&rec, 1, line)?;
        let metropolitan =
            parse_bool(raw_metro).ok_or_else(|| cols.malformed(line, format!("bad metropolitan flag {raw_metro:?}")))?;
        let county_name = cols.text(&rec, 2, "county", line)?;
        let total = cols.count(&rec, 3, "total_employees", line)?;
        let officers = cols.count(&rec, 4, "officers", line)?;
        let civilians = cols.count(&rec, 5, "civilians", line)?;
        if officers + civilians != total {
            return Err(IngestError::Consistency {
                dataset: ds,
                line,
                county: format!("{county_name}, {state}"),
                message: format!("officers {officers} + civilians {civilians} != total {total}"),
            });
        }
        out.push(RawLeeRow {
            state,
            county_name,
            metropolitan,
            officers,
            civilians,
        });
    }
    Ok(out)
}

pub fn write_lee<W: Write>(rows: &[RawLeeRow], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e| super::io_error(Dataset::Lee, e);
    w.write_record(COLUMNS).map_err(err)?;
    for r in rows {
        w.write_record([
            r.state.info().name,
            if r.metropolitan { "1" } else { "0" },
            &r.county_name,
            &r.total_employees().to_string(),
            &r.officers.to_string(),
            &r.civilians.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "state,metropolitan,county,total_employees,officers,civilians\n";

    #[test]
    fn parses_rows() {
        let src = format!("{HEADER}Louisiana,0,Assymption Parish,40,30,10\nGeorgia,1,Augusta-Richmond,5,5,0\n");
        let rows = parse_lee(src.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].state.as_str(), "LA");
        assert_eq!(rows[0].officers, 30);
        assert!(rows[1].metropolitan);
    }

    #[test]
    fn inconsistent_total_rejected() {
        let src = format!("{HEADER}Texas,1,Travis County,41,30,10\n");
        assert!(matches!(parse_lee(src.as_bytes()).unwrap_err(), IngestError::Consistency { line: 2, .. }));
    }

    #[test]
    fn negative_count_rejected() {
        let src = format!("{HEADER}Texas,1,Travis County,-1,30,10\n");
        assert!(matches!(parse_lee(src.as_bytes()).unwrap_err(), IngestError::Malformed { line: 2, .. }));
    }
}
