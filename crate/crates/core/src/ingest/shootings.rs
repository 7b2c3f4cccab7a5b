use std::collections::HashSet;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{open, parse_bool, rows, Dataset, IngestError, Result};
use crate::race::Race;
use crate::states::StateCode;

/// First and last dates covered by the shootings snapshot.
pub const FIRST_DATE: NaiveDate = match NaiveDate::from_ymd_opt(2015, 1, 1) {
    Some(d) => d,
    None => panic!("valid date"),
};
pub const LAST_DATE: NaiveDate = match NaiveDate::from_ymd_opt(2016, 7, 11) {
    Some(d) => d,
    None => panic!("valid date"),
};

/// One fatal-shooting record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawShootingRow {
    pub id: u32,
    pub date: NaiveDate,
    pub city: String,
    pub state: StateCode,
    /// `None` when the source leaves race blank.
    pub race: Option<Race>,
    pub body_camera: bool,
}

const COLUMNS: [&str; 6] = ["id", "date", "city", "state", "race", "body_camera"];

pub fn parse_shootings<R: Read>(source: R) -> Result<Vec<RawShootingRow>> {
    let ds = Dataset::Shootings;
    let (mut rdr, cols) = open(ds, source, &COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(ds, &mut rdr) {
        let (line, rec) = row?;
        let id = cols.integer(&rec, 0, "id", line)?;
        if !seen.insert(id) {
            return Err(IngestError::Duplicate {
                dataset: ds,
                line,
                key: format!("id {id}"),
            });
        }
        let raw_date = cols.cell(&rec, 1, line)?.trim();
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|_| cols.malformed(line, format!("bad date {raw_date:?}")))?;
        if date < FIRST_DATE || date > LAST_DATE {
            return Err(cols.malformed(line, format!("date {date} outside {FIRST_DATE}..={LAST_DATE}")));
        }
        let city = cols.text(&rec, 2, "city", line)?;
        let state = cols.state(&rec, 3, line)?;
        let code = cols.cell(&rec, 4, line)?.trim();
        let race = if code.is_empty() {
            None
        } else {
            Some(Race::from_incident_code(code).ok_or_else(|| IngestError::UnknownRace {
                dataset: ds,
                line,
                code: code.to_string(),
            })?)
        };
        let raw_cam = cols.cell(&rec, 5, line)?;
        let body_camera =
            parse_bool(raw_cam).ok_or_else(|| cols.malformed(line, format!("bad body_camera flag {raw_cam:?}")))?;
        out.push(RawShootingRow {
            id,
            date,
            city,
            state,
            race,
            body_camera,
        });
    }
    Ok(out)
}

pub fn write_shootings<W: Write>(rows: &[RawShootingRow], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(COLUMNS).map_err(|e| super::io_error(Dataset::Shootings, e))?;
    for r in rows {
        let id = r.id.to_string();
        let date = r.date.format("%Y-%m-%d").to_string();
        let race = r.race.map(Race::incident_code).unwrap_or("");
        let cam = if r.body_camera { "True" } else { "False" };
        w.write_record([id.as_str(), &date, &r.city, r.state.as_str(), race, cam])
            .map_err(|e| super::io_error(Dataset::Shootings, e))?;
    }
    w.flush()
}
