use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{open, rows, Dataset, IngestError, Result, Vintage};
use crate::race::{CensusRace, CENSUS_RACE_COUNT};
use crate::states::StateCode;

/// County population by census race, one vintage.
///
/// Column names follow the census county-characteristics file: `WA`, `BA`,
/// `IA`, `AA`, `NA`, `TOM` are White, Black, American Indian, Asian, Native
/// Hawaiian and two-or-more (male and female already summed), and the `H_`
/// columns count the Hispanic residents of each race.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDemographyRow {
    pub state: StateCode,
    pub county_name: String,
    pub vintage: Vintage,
    pub total_pop: u64,
    /// Indexed by [`CensusRace::index`].
    pub pop_by_race: [u64; CENSUS_RACE_COUNT],
    pub hispanic_by_race: [u64; CENSUS_RACE_COUNT],
}

impl RawDemographyRow {
    pub fn pop(&self, race: CensusRace) -> u64 {
        self.pop_by_race[race.index()]
    }

    pub fn hispanic(&self, race: CensusRace) -> u64 {
        self.hispanic_by_race[race.index()]
    }

    pub fn hispanic_total(&self) -> u64 {
        self.hispanic_by_race.iter().sum()
    }
}

const COLUMNS: [&str; 15] = [
    "STNAME", "CTYNAME", "TOT_POP", "WA", "BA", "IA", "AA", "NA", "TOM", "H_WA", "H_BA", "H_IA", "H_AA", "H_NA",
    "H_TOM",
];

pub fn parse_demography<R: Read>(source: R, vintage: Vintage) -> Result<Vec<RawDemographyRow>> {
    let ds = match vintage {
        Vintage::Census2010 => Dataset::Dem2010,
        Vintage::Proj2016 => Dataset::Dem2016,
    };
    let (mut rdr, cols) = open(ds, source, &COLUMNS)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rows(ds, &mut rdr) {
        let (line, rec) = row?;
        let state = cols.state(&rec, 0, line)?;
        let county_name = cols.text(&rec, 1, "CTYNAME", line)?;
        let total_pop = cols.count(&rec, 2, "TOT_POP", line)?;
        let mut pop_by_race = [0u64; CENSUS_RACE_COUNT];
        let mut hispanic_by_race = [0u64; CENSUS_RACE_COUNT];
        for i in 0..CENSUS_RACE_COUNT {
            pop_by_race[i] = cols.count(&rec, 3 + i, COLUMNS[3 + i], line)?;
            hispanic_by_race[i] = cols.count(&rec, 9 + i, COLUMNS[9 + i], line)?;
        }
        let consistency = |message: String| IngestError::Consistency {
            dataset: ds,
            line,
            county: format!("{county_name}, {state}"),
            message,
        };
        let race_sum: u64 = pop_by_race.iter().sum();
        if race_sum != total_pop {
            return Err(consistency(format!(
                "race totals sum to {race_sum} but TOT_POP is {total_pop}"
            )));
        }
        for race in CensusRace::ALL {
            let (p, h) = (pop_by_race[race.index()], hispanic_by_race[race.index()]);
            if h > p {
                return Err(consistency(format!(
                    "{h} Hispanic residents of race {} exceed its population {p}",
                    race.label()
                )));
            }
        }
        if !seen.insert((state, county_name.to_ascii_lowercase())) {
            return Err(IngestError::Duplicate {
                dataset: ds,
                line,
                key: format!("county {county_name}, {state}"),
            });
        }
        out.push(RawDemographyRow {
            state,
            county_name,
            vintage,
            total_pop,
            pop_by_race,
            hispanic_by_race,
        });
    }
    Ok(out)
}

pub fn write_demography<W: Write>(rows: &[RawDemographyRow], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let err = |e| super::io_error(Dataset::Dem2010, e);
    w.write_record(COLUMNS).map_err(err)?;
    for r in rows {
        let mut rec = vec![
            r.state.info().name.to_string(),
            r.county_name.clone(),
            r.total_pop.to_string(),
        ];
        rec.extend(r.pop_by_race.iter().map(u64::to_string));
        rec.extend(r.hispanic_by_race.iter().map(u64::to_string));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "STNAME,CTYNAME,TOT_POP,WA,BA,IA,AA,NA,TOM,H_WA,H_BA,H_IA,H_AA,H_NA,H_TOM\n";

    #[test]
    fn two_county_file() {
        // 100 = 60+20+5+5+4+6 ; 50 = 50+0+0+0+0+0
        let src = format!(
            "{HEADER}Texas,Travis County,100,60,20,5,5,4,6,30,1,0,0,0,2\nLouisiana,Assumption Parish,50,50,0,0,0,0,0,0,0,0,0,0,0\n"
        );
        let rows = parse_demography(src.as_bytes(), Vintage::Census2010).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].state.as_str(), "TX");
        assert_eq!(rows[0].pop(CensusRace::TwoOrMore), 6);
        assert_eq!(rows[0].hispanic_total(), 33);
        assert_eq!(rows[1].total_pop, 50);
        assert_eq!(rows[1].vintage, Vintage::Census2010);
    }

    #[test]
    fn race_sum_mismatch_names_county() {
        let src = format!("{HEADER}Texas,Travis County,101,60,20,5,5,4,6,0,0,0,0,0,0\n");
        let err = parse_demography(src.as_bytes(), Vintage::Proj2016).unwrap_err();
        match &err {
            IngestError::Consistency { county, line, .. } => {
                assert_eq!(county, "Travis County, TX");
                assert_eq!(*line, 2);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn hispanic_exceeding_race_population_rejected() {
        let src = format!("{HEADER}Texas,Travis County,10,10,0,0,0,0,0,0,1,0,0,0,0\n");
        assert!(matches!(
            parse_demography(src.as_bytes(), Vintage::Census2010).unwrap_err(),
            IngestError::Consistency { .. }
        ));
    }

    #[test]
    fn blank_count_is_error_not_zero() {
        let src = format!("{HEADER}Texas,Travis County,10,10,,0,0,0,0,0,0,0,0,0,0\n");
        assert!(matches!(
            parse_demography(src.as_bytes(), Vintage::Census2010).unwrap_err(),
            IngestError::Malformed { line: 2, .. }
        ));
    }

    #[test]
    fn duplicate_county_rejected() {
        let src = format!(
            "{HEADER}Texas,Travis County,1,1,0,0,0,0,0,0,0,0,0,0,0\nTX,travis county,1,1,0,0,0,0,0,0,0,0,0,0,0\n"
        );
        assert!(matches!(
            parse_demography(src.as_bytes(), Vintage::Census2010).unwrap_err(),
            IngestError::Duplicate { line: 3, .. }
        ));
    }
}
