use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{open, rows, Dataset, IngestError, Result};
use crate::states::StateCode;

/// UCR and FIPS codes for one named county.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCodeRow {
    pub state: StateCode,
    pub county_name: String,
    pub ucr_code: u32,
    pub fips_code: u32,
}

const COLUMNS: [&str; 4] = ["state", "county", "ucr_code", "fips_code"];

pub fn parse_codes<R: Read>(source: R) -> Result<Vec<RawCodeRow>> {
    let ds = Dataset::Codes;
    let (mut rdr, cols) = open(ds, source, &COLUMNS)?;
    let mut ucr_seen = HashSet::new();
    let mut fips_seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(ds, &mut rdr) {
        let (line, rec) = row?;
        let state = cols.state(&rec, 0, line)?;
        let county_name = cols.text(&rec, 1, "county", line)?;
        let ucr_code = cols.integer(&rec, 2, "ucr_code", line)?;
        let fips_code = cols.integer(&rec, 3, "fips_code", line)?;
        if !ucr_seen.insert(ucr_code) {
            return Err(IngestError::Duplicate {
                dataset: ds,
                line,
                key: format!("ucr_code {ucr_code}"),
            });
        }
        if !fips_seen.insert(fips_code) {
            return Err(IngestError::Duplicate {
                dataset: ds,
                line,
                key: format!("fips_code {fips_code}"),
            });
        }
        out.push(RawCodeRow {
            state,
            county_name,
            ucr_code,
            fips_code,
        });
    }
    Ok(out)
}

pub fn write_codes<W: Write>(rows: &[RawCodeRow], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e| super::io_error(Dataset::Codes, e);
    w.write_record(COLUMNS).map_err(err)?;
    for r in rows {
        w.write_record([
            r.state.as_str(),
            &r.county_name,
            &r.ucr_code.to_string(),
            &r.fips_code.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()
}
