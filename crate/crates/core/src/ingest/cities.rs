use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{open, rows, Dataset, IngestError, Result};
use crate::states::StateCode;

/// One (city, county) pair of the city-to-county gazetteer. A city lying in
/// several counties has one row per county.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CityRow {
    pub city: String,
    pub state: StateCode,
    pub county: String,
}

const COLUMNS: [&str; 3] = ["city", "state", "county"];

pub fn parse_cities<R: Read>(source: R) -> Result<Vec<CityRow>> {
    let ds = Dataset::Cities;
    let (mut rdr, cols) = open(ds, source, &COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(ds, &mut rdr) {
        let (line, rec) = row?;
        let city = cols.text(&rec, 0, "city", line)?;
        let state = cols.state(&rec, 1, line)?;
        let county = cols.text(&rec, 2, "county", line)?;
        let key = (city.to_ascii_lowercase(), state, county.to_ascii_lowercase());
        if !seen.insert(key) {
            return Err(IngestError::Duplicate {
                dataset: ds,
                line,
                key: format!("{city}, {state} -> {county}"),
            });
        }
        out.push(CityRow { city, state, county });
    }
    Ok(out)
}

pub fn write_cities<W: Write>(rows: &[CityRow], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e| super::io_error(Dataset::Cities, e);
    w.write_record(COLUMNS).map_err(err)?;
    for r in rows {
        w.write_record([r.city.as_str(), r.state.as_str(), &r.county]).map_err(err)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_county_city_has_several_rows() {
        let src = "city,state,county\nKansas City,MO,Jackson County\nKansas City,MO,Clay County\n";
        let rows = parse_cities(src.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        let dup = "city,state,county\nA,MO,Clay County\na,MO,clay county\n";
        assert!(parse_cities(dup.as_bytes()).is_err());
    }
}
