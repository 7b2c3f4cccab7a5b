use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::{CountyKey, LinkError, RenameTable};
use crate::ingest::{RawArrestRow, RawCodeRow, RawDemographyRow, RawLeeRow, Vintage};
use crate::race::ARREST_RACE_COUNT;

/// Everything known about one county after linkage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountyProfile {
    pub key: CountyKey,
    pub fips: Option<u32>,
    pub ucr: Option<u32>,
    pub demography: BTreeMap<Vintage, RawDemographyRow>,
    pub officers: Option<u64>,
    pub civilians: Option<u64>,
    /// Arrests per [`crate::race::ArrestRace`], summed over offenses.
    pub arrests: Option<[u64; ARREST_RACE_COUNT]>,
}

impl CountyProfile {
    pub fn new(key: CountyKey) -> Self {
        CountyProfile {
            key,
            fips: None,
            ucr: None,
            demography: BTreeMap::new(),
            officers: None,
            civilians: None,
            arrests: None,
        }
    }

    pub fn demography(&self, vintage: Vintage) -> Option<&RawDemographyRow> {
        self.demography.get(&vintage)
    }

    pub fn total_employees(&self) -> Option<u64> {
        match (self.officers, self.civilians) {
            (Some(o), Some(c)) => Some(o + c),
            _ => None,
        }
    }

    pub fn total_arrests(&self) -> Option<u64> {
        self.arrests.map(|a| a.iter().sum())
    }

    /// Population used to weight counties of a multi-county city: the 2010
    /// count, falling back to the projection.
    pub fn population_weight(&self) -> u64 {
        self.demography(Vintage::Census2010)
            .or_else(|| self.demography(Vintage::Proj2016))
            .map_or(0, |d| d.total_pop)
    }
}

/// Immutable, key-sorted collection of county profiles.
#[derive(Debug, Clone, Default)]
pub struct ProfileTable {
    profiles: Vec<CountyProfile>,
    index: HashMap<CountyKey, usize>,
}

impl ProfileTable {
    pub fn from_profiles(mut profiles: Vec<CountyProfile>) -> Self {
        profiles.sort_by(|a, b| a.key.cmp(&b.key));
        profiles.dedup_by(|a, b| a.key == b.key);
        let index = profiles.iter().enumerate().map(|(i, p)| (p.key.clone(), i)).collect();
        ProfileTable { profiles, index }
    }

    pub fn get(&self, key: &CountyKey) -> Option<&CountyProfile> {
        self.index.get(key).map(|&i| &self.profiles[i])
    }

    pub fn position(&self, key: &CountyKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &CountyProfile> {
        self.profiles.iter()
    }

    pub fn as_slice(&self) -> &[CountyProfile] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Employment rows removed before linkage: the county has no counterpart in
/// the demography or incident tables.
pub const LEE_EXCLUSIONS: &[(&str, &str, &str)] = &[
    ("SD", "Shannon", "no demography row (county renamed)"),
    ("NM", "Dona Ana", "no incident-side demography match"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeeExclusion {
    pub county: CountyKey,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnlinkedArrest {
    pub ucr_code: u32,
    pub reason: String,
}

/// What linkage could not join, and what it merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LinkReport {
    pub lee_excluded: Vec<LeeExclusion>,
    /// Employment rows whose county has no demography row.
    pub lee_unlinked: Vec<CountyKey>,
    /// Counties with several employment rows, summed into one.
    pub lee_merged: Vec<CountyKey>,
    pub arrests_unlinked: Vec<UnlinkedArrest>,
    /// Code rows whose county has no demography row.
    pub codes_unlinked: Vec<CountyKey>,
}

/// Joins demography, employment, arrest and code tables into profiles keyed
/// by canonical county.
///
/// Arrest rows reach a county only through the UCR code of the codes table.
/// Offense rows are summed per race. Unlinkable rows are reported, never
/// fatal; two distinct raw names collapsing onto one key within a single
/// demography table is an error.
pub fn build_profiles(
    dem2010: &[RawDemographyRow],
    dem2016: &[RawDemographyRow],
    lee: &[RawLeeRow],
    arrests: &[RawArrestRow],
    codes: &[RawCodeRow],
    renames: &RenameTable,
) -> Result<(ProfileTable, LinkReport), LinkError> {
    let mut report = LinkReport::default();
    let mut by_key: BTreeMap<CountyKey, CountyProfile> = BTreeMap::new();

    for rows in [dem2010, dem2016] {
        let mut raw_names: HashMap<CountyKey, &str> = HashMap::new();
        for row in rows {
            let key = renames.canonicalize_in(row.state, &row.county_name)?;
            if let Some(prev) = raw_names.insert(key.clone(), &row.county_name) {
                return Err(LinkError::KeyCollision {
                    dataset: "demography",
                    key,
                    first: prev.to_string(),
                    second: row.county_name.clone(),
                });
            }
            by_key
                .entry(key.clone())
                .or_insert_with(|| CountyProfile::new(key))
                .demography
                .insert(row.vintage, row.clone());
        }
    }

    let mut ucr_to_key: HashMap<u32, CountyKey> = HashMap::new();
    for row in codes {
        let key = renames.canonicalize_in(row.state, &row.county_name)?;
        ucr_to_key.insert(row.ucr_code, key.clone());
        match by_key.get_mut(&key) {
            Some(p) => {
                p.fips.get_or_insert(row.fips_code);
                p.ucr.get_or_insert(row.ucr_code);
            }
            None => report.codes_unlinked.push(key),
        }
    }

    let exclusions: Vec<(CountyKey, &str)> = LEE_EXCLUSIONS
        .iter()
        .map(|(st, name, why)| Ok((renames.canonicalize(st, name)?, *why)))
        .collect::<Result<_, LinkError>>()?;
    let mut employment: BTreeMap<CountyKey, (u64, u64, usize)> = BTreeMap::new();
    for row in lee {
        let key = renames.canonicalize_in(row.state, &row.county_name)?;
        if let Some((_, why)) = exclusions.iter().find(|(k, _)| *k == key) {
            report.lee_excluded.push(LeeExclusion {
                county: key,
                reason: (*why).to_string(),
            });
            continue;
        }
        let e = employment.entry(key).or_insert((0, 0, 0));
        e.0 += row.officers;
        e.1 += row.civilians;
        e.2 += 1;
    }
    for (key, (officers, civilians, rows)) in employment {
        if rows > 1 {
            report.lee_merged.push(key.clone());
        }
        match by_key.get_mut(&key) {
            Some(p) => {
                p.officers = Some(officers);
                p.civilians = Some(civilians);
            }
            None => report.lee_unlinked.push(key),
        }
    }

    let mut per_ucr: BTreeMap<u32, [u64; ARREST_RACE_COUNT]> = BTreeMap::new();
    for row in arrests {
        let acc = per_ucr.entry(row.ucr_code).or_insert([0; ARREST_RACE_COUNT]);
        for (a, r) in acc.iter_mut().zip(row.arrests_by_race) {
            *a += r;
        }
    }
    for (ucr, totals) in per_ucr {
        let Some(key) = ucr_to_key.get(&ucr) else {
            report.arrests_unlinked.push(UnlinkedArrest {
                ucr_code: ucr,
                reason: "ucr code absent from codes table".into(),
            });
            continue;
        };
        match by_key.get_mut(key) {
            Some(p) => {
                p.ucr = Some(ucr);
                let acc = p.arrests.get_or_insert([0; ARREST_RACE_COUNT]);
                for (a, t) in acc.iter_mut().zip(totals) {
                    *a += t;
                }
            }
            None => report.arrests_unlinked.push(UnlinkedArrest {
                ucr_code: ucr,
                reason: format!("{key} absent from demography"),
            }),
        }
    }

    Ok((ProfileTable::from_profiles(by_key.into_values().collect()), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::race::CENSUS_RACE_COUNT;
    use crate::states::StateCode;

    fn dem(state: &str, name: &str, vintage: Vintage, w: u64) -> RawDemographyRow {
        let mut pop = [0; CENSUS_RACE_COUNT];
        pop[0] = w;
        RawDemographyRow {
            state: StateCode::parse(state).unwrap(),
            county_name: name.into(),
            vintage,
            total_pop: w,
            pop_by_race: pop,
            hispanic_by_race: [0; CENSUS_RACE_COUNT],
        }
    }

    fn code(state: &str, name: &str, ucr: u32, fips: u32) -> RawCodeRow {
        RawCodeRow {
            state: StateCode::parse(state).unwrap(),
            county_name: name.into(),
            ucr_code: ucr,
            fips_code: fips,
        }
    }

    fn arrest(ucr: u32, off: &str, w: u64, b: u64) -> RawArrestRow {
        RawArrestRow {
            ucr_code: ucr,
            offense_code: off.into(),
            offense: off.into(),
            arrests_by_race: [w, b, 0, 0],
        }
    }

    fn lee(state: &str, name: &str, officers: u64) -> RawLeeRow {
        RawLeeRow {
            state: StateCode::parse(state).unwrap(),
            county_name: name.into(),
            metropolitan: false,
            officers,
            civilians: 1,
        }
    }

    #[test]
    fn offense_rows_are_summed_through_codes() {
        let d10 = vec![dem("TX", "Travis County", Vintage::Census2010, 10)];
        let codes = vec![code("TX", "TRAVIS", 42227, 48453)];
        let arrests = vec![arrest(42227, "01", 10, 5), arrest(42227, "02", 2, 3), arrest(99999, "01", 1, 1)];
        let (table, report) = build_profiles(&d10, &[], &[], &arrests, &codes, &RenameTable::default()).unwrap();
        let p = table.get(&super::super::canonicalize("TX", "Travis").unwrap()).unwrap();
        assert_eq!(p.arrests, Some([12, 8, 0, 0]));
        assert_eq!(p.ucr, Some(42227));
        assert_eq!(p.fips, Some(48453));
        assert_eq!(report.arrests_unlinked.len(), 1);
        assert_eq!(report.arrests_unlinked[0].ucr_code, 99999);
    }

    #[test]
    fn lee_cleanup_merge_and_exclusions() {
        let d10 = vec![
            dem("LA", "Assumption Parish", Vintage::Census2010, 10),
            dem("GA", "Richmond County", Vintage::Census2010, 10),
            dem("NM", "Do\u{FFFD}a Ana County", Vintage::Census2010, 10),
        ];
        let lee_rows = vec![
            lee("LA", "Assymption Parish", 5),
            lee("GA", "Augusta-Richmond", 7),
            lee("GA", "Richmond County Police Department", 3),
            lee("SD", "Shannon", 4),
            lee("NM", "Dona Ana", 9),
            lee("TX", "Nowhere County", 1),
        ];
        let (table, report) = build_profiles(&d10, &[], &lee_rows, &[], &[], &RenameTable::default()).unwrap();
        let rich = table.get(&super::super::canonicalize("GA", "Richmond").unwrap()).unwrap();
        assert_eq!(rich.officers, Some(10));
        assert_eq!(rich.civilians, Some(2));
        assert_eq!(report.lee_merged.len(), 1);
        assert_eq!(report.lee_excluded.len(), 2);
        assert_eq!(report.lee_unlinked.len(), 1);
        let la = table.get(&super::super::canonicalize("LA", "Assumption").unwrap()).unwrap();
        assert_eq!(la.officers, Some(5));
    }

    #[test]
    fn two_vintages_share_a_profile() {
        let d10 = vec![dem("TX", "Travis County", Vintage::Census2010, 10)];
        let d16 = vec![dem("TX", "Travis County", Vintage::Proj2016, 12)];
        let (table, _) = build_profiles(&d10, &d16, &[], &[], &[], &RenameTable::default()).unwrap();
        assert_eq!(table.len(), 1);
        let p = table.iter().next().unwrap();
        assert_eq!(p.demography.len(), 2);
        assert_eq!(p.population_weight(), 10);
    }

    #[test]
    fn colliding_demography_names_rejected() {
        let d10 = vec![
            dem("IL", "De Kalb County", Vintage::Census2010, 10),
            dem("IL", "DeKalb County", Vintage::Census2010, 10),
        ];
        assert!(matches!(
            build_profiles(&d10, &[], &[], &[], &[], &RenameTable::default()),
            Err(LinkError::KeyCollision { .. })
        ));
    }
}
