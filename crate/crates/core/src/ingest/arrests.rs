use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{open, rows, Dataset, IngestError, Result};
use crate::race::{ArrestRace, ARREST_RACE_COUNT};

/// Arrests for one offense in one county, identified only by UCR code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArrestRow {
    pub ucr_code: u32,
    pub offense_code: String,
    pub offense: String,
    /// Indexed by [`ArrestRace::index`].
    pub arrests_by_race: [u64; ARREST_RACE_COUNT],
}

impl RawArrestRow {
    pub fn arrests(&self, race: ArrestRace) -> u64 {
        self.arrests_by_race[race.index()]
    }
}

const COLUMNS: [&str; 7] = [
    "ucr_code",
    "offense_code",
    "offense",
    "white",
    "black",
    "american_indian",
    "asian",
];

pub fn parse_arrests<R: Read>(source: R) -> Result<Vec<RawArrestRow>> {
    let ds = Dataset::Arrest;
    let (mut rdr, cols) = open(ds, source, &COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(ds, &mut rdr) {
        let (line, rec) = row?;
        let ucr_code = cols.integer(&rec, 0, "ucr_code", line)?;
        let offense_code = cols.text(&rec, 1, "offense_code", line)?;
        let offense = cols.text(&rec, 2, "offense", line)?;
        let mut arrests_by_race = [0u64; ARREST_RACE_COUNT];
        for (i, slot) in arrests_by_race.iter_mut().enumerate() {
            *slot = cols.count(&rec, 3 + i, COLUMNS[3 + i], line)?;
        }
        if !seen.insert((ucr_code, offense_code.clone())) {
            return Err(IngestError::Duplicate {
                dataset: ds,
                line,
                key: format!("offense {offense_code} for UCR county {ucr_code}"),
            });
        }
        out.push(RawArrestRow {
            ucr_code,
            offense_code,
            offense,
            arrests_by_race,
        });
    }
    Ok(out)
}

pub fn write_arrests<W: Write>(rows: &[RawArrestRow], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e| super::io_error(Dataset::Arrest, e);
    w.write_record(COLUMNS).map_err(err)?;
    for r in rows {
        let mut rec = vec![r.ucr_code.to_string(), r.offense_code.clone(), r.offense.clone()];
        rec.extend(r.arrests_by_race.iter().map(u64::to_string));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "ucr_code,offense_code,offense,white,black,american_indian,asian\n";

    #[test]
    fn parses_offense_rows() {
        let src = format!("{HEADER}42227,011,Murder,10,5,0,0\n42227,18,Drug abuse violations,2,3,0,1\n");
        let rows = parse_arrests(src.as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1].arrests(ArrestRace::Asian), 1);
        assert_eq!(rows[0].offense_code, "011");
    }

    #[test]
    fn duplicate_offense_rejected() {
        let src = format!("{HEADER}1,011,Murder,1,0,0,0\n1,011,Murder,1,0,0,0\n");
        assert!(matches!(parse_arrests(src.as_bytes()).unwrap_err(), IngestError::Duplicate { line: 3, .. }));
    }

    #[test]
    fn blank_count_rejected() {
        let src = format!("{HEADER}1,011,Murder,1,,0,0\n");
        assert!(matches!(parse_arrests(src.as_bytes()).unwrap_err(), IngestError::Malformed { line: 2, .. }));
    }
}
