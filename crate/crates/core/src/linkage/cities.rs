use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CountyKey, LinkError, ProfileTable, RenameTable};
use crate::ingest::{CityRow, RawShootingRow};
use crate::rng::StreamFactory;
use crate::sampling::AliasTable;
use crate::states::StateCode;

/// How an incident's county was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    /// The city lies in a single county.
    Direct,
    /// The city spans several counties; one was drawn weighted by population.
    MultiCountySampled,
    /// The city spans several counties, none with a known population; one
    /// was drawn uniformly.
    Imputed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedIncident {
    pub incident: RawShootingRow,
    pub county: CountyKey,
    pub resolution: Resolution,
}

/// City-to-county gazetteer keyed by (state, case-folded city).
#[derive(Debug, Clone, Default)]
pub struct CityCountyMap {
    map: HashMap<(StateCode, String), Vec<CountyKey>>,
}

impl CityCountyMap {
    pub fn from_rows(rows: &[CityRow], renames: &RenameTable) -> Result<Self, LinkError> {
        let mut map: HashMap<(StateCode, String), Vec<CountyKey>> = HashMap::new();
        for row in rows {
            let county = renames.canonicalize_in(row.state, &row.county)?;
            let counties = map.entry((row.state, city_key(&row.city))).or_default();
            if !counties.contains(&county) {
                counties.push(county);
            }
        }
        Ok(CityCountyMap { map })
    }

    pub fn counties(&self, city: &str, state: StateCode) -> Option<&[CountyKey]> {
        self.map.get(&(state, city_key(city))).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Resolves one city. Single-county cities resolve directly; otherwise a
    /// county is drawn with probability proportional to `population`.
    pub fn resolve_city<R, F>(
        &self,
        city: &str,
        state: StateCode,
        population: F,
        rng: &mut R,
    ) -> Result<(CountyKey, Resolution), LinkError>
    where
        R: Rng + ?Sized,
        F: Fn(&CountyKey) -> u64,
    {
        let counties = self.counties(city, state).ok_or_else(|| LinkError::UnmappedCity {
            city: city.to_string(),
            state: state.to_string(),
        })?;
        if let [only] = counties {
            return Ok((only.clone(), Resolution::Direct));
        }
        let weights: Vec<f64> = counties.iter().map(|c| population(c) as f64).collect();
        match AliasTable::new(&weights) {
            Ok(table) => Ok((counties[table.sample(rng)].clone(), Resolution::MultiCountySampled)),
            Err(_) => Ok((counties[rng.gen_range(0..counties.len())].clone(), Resolution::Imputed)),
        }
    }
}

fn city_key(city: &str) -> String {
    deunicode::deunicode(city)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_ascii_lowercase()
}

/// Incidents after county resolution.
#[derive(Debug, Clone, Default)]
pub struct IncidentSet {
    pub resolved: Vec<ResolvedIncident>,
    /// Incidents whose city is not in the gazetteer.
    pub unresolved: Vec<RawShootingRow>,
}

impl IncidentSet {
    pub fn len(&self) -> usize {
        self.resolved.len() + self.unresolved.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Resolves every incident once for the whole run. Multi-county draws use
/// the stream of the incident id, so a draw does not depend on which other
/// incidents are present; the result is reused by every replication.
pub fn resolve_incidents(
    incidents: &[RawShootingRow],
    cities: &CityCountyMap,
    profiles: &ProfileTable,
    master_seed: u64,
) -> IncidentSet {
    let streams = StreamFactory::new(master_seed, "city-resolution");
    let population = |k: &CountyKey| profiles.get(k).map_or(0, |p| p.population_weight());
    let mut set = IncidentSet::default();
    for inc in incidents {
        let mut rng = streams.stream(u64::from(inc.id));
        match cities.resolve_city(&inc.city, inc.state, population, &mut rng) {
            Ok((county, resolution)) => set.resolved.push(ResolvedIncident {
                incident: inc.clone(),
                county,
                resolution,
            }),
            Err(_) => set.unresolved.push(inc.clone()),
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{RawDemographyRow, Vintage};
    use crate::linkage::CountyProfile;
    use crate::race::CENSUS_RACE_COUNT;

    fn st(s: &str) -> StateCode {
        StateCode::parse(s).unwrap()
    }

    fn rows(spec: &[(&str, &str, &str)]) -> Vec<CityRow> {
        spec.iter()
            .map(|(c, s, k)| CityRow {
                city: (*c).into(),
                state: st(s),
                county: (*k).into(),
            })
            .collect()
    }

    fn profile(state: &str, name: &str, pop: u64) -> CountyProfile {
        let key = crate::linkage::canonicalize(state, name).unwrap();
        let mut p = CountyProfile::new(key.clone());
        let mut by_race = [0; CENSUS_RACE_COUNT];
        by_race[0] = pop;
        p.demography.insert(
            Vintage::Census2010,
            RawDemographyRow {
                state: key.state,
                county_name: name.into(),
                vintage: Vintage::Census2010,
                total_pop: pop,
                pop_by_race: by_race,
                hispanic_by_race: [0; CENSUS_RACE_COUNT],
            },
        );
        p
    }

    #[test]
    fn single_county_resolves_directly() {
        let map = CityCountyMap::from_rows(&rows(&[("Las Cruces", "NM", "Doña Ana County")]), &RenameTable::default())
            .unwrap();
        let mut rng = StreamFactory::new(0, "t").stream(0);
        let (county, how) = map.resolve_city("las  cruces", st("NM"), |_| 0, &mut rng).unwrap();
        assert_eq!(county.name, "Dona Ana");
        assert_eq!(how, Resolution::Direct);
    }

    #[test]
    fn unmapped_city_is_an_error() {
        let map = CityCountyMap::default();
        let mut rng = StreamFactory::new(0, "t").stream(0);
        assert!(matches!(
            map.resolve_city("Atlantis", st("FL"), |_| 1, &mut rng),
            Err(LinkError::UnmappedCity { .. })
        ));
    }

    #[test]
    fn multi_county_draw_is_population_weighted() {
        // Populations 900000 and 100000: P(first) = 0.9; 3-sigma binomial
        // band over 1e5 independent seeded draws.
        let map = CityCountyMap::from_rows(
            &rows(&[("Twin", "MO", "Big County"), ("Twin", "MO", "Small County")]),
            &RenameTable::default(),
        )
        .unwrap();
        let table = ProfileTable::from_profiles(vec![profile("MO", "Big", 900_000), profile("MO", "Small", 100_000)]);
        let pop = |k: &CountyKey| table.get(k).map_or(0, |p| p.population_weight());
        let streams = StreamFactory::new(99, "city-resolution");
        let n = 100_000u64;
        let mut first = 0u64;
        for i in 0..n {
            let (county, how) = map.resolve_city("Twin", st("MO"), pop, &mut streams.stream(i)).unwrap();
            assert_eq!(how, Resolution::MultiCountySampled);
            if county.name == "Big" {
                first += 1;
            }
        }
        let freq = first as f64 / n as f64;
        let sigma = (0.9f64 * 0.1 / n as f64).sqrt();
        assert!((freq - 0.9).abs() < 3.0 * sigma, "freq {freq}");
    }

    #[test]
    fn unknown_populations_fall_back_to_uniform() {
        let map =
            CityCountyMap::from_rows(&rows(&[("Twin", "MO", "A"), ("Twin", "MO", "B")]), &RenameTable::default())
                .unwrap();
        let mut rng = StreamFactory::new(0, "t").stream(0);
        let (_, how) = map.resolve_city("Twin", st("MO"), |_| 0, &mut rng).unwrap();
        assert_eq!(how, Resolution::Imputed);
    }

    #[test]
    fn resolution_is_reproducible_per_incident() {
        let map = CityCountyMap::from_rows(
            &rows(&[("Twin", "MO", "Big County"), ("Twin", "MO", "Small County")]),
            &RenameTable::default(),
        )
        .unwrap();
        let table = ProfileTable::from_profiles(vec![profile("MO", "Big", 500), profile("MO", "Small", 500)]);
        let inc = |id| RawShootingRow {
            id,
            date: crate::ingest::FIRST_DATE,
            city: "Twin".into(),
            state: st("MO"),
            race: None,
            body_camera: false,
        };
        let all: Vec<_> = (1..50).map(inc).collect();
        let a = resolve_incidents(&all, &map, &table, 7);
        let b = resolve_incidents(&all[10..], &map, &table, 7);
        assert_eq!(a.resolved[10..], b.resolved[..]);
    }
}
