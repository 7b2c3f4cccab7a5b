//! Deterministic synthetic input tables shaped like the real sources.
//!
//! The generator starts from the census county list and published state
//! totals, then lays out incidents so that every structural count the
//! pipeline reports (rows kept and dropped per stage, race totals, body-camera
//! split, linkage exceptions) matches the real snapshot. Nothing is fitted to
//! downstream test statistics.

mod params;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{self, Read};
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{LogNormal, Normal};
use resample_core::ingest::{
    write_arrests, write_cities, write_codes, write_demography, write_lee, write_shootings, CityRow, Dataset,
    RawArrestRow, RawCodeRow, RawDemographyRow, RawLeeRow, RawShootingRow, Vintage,
};
use resample_core::race::{Race, RACE_COUNT};
use resample_core::rng::derive_seed;
use resample_core::states::StateCode;
use serde::Deserialize;

pub use params::{
    ARREST_EXCLUDED_RACES, ARREST_REPORTING_CODES, BODY_CAMERA_RACES, KEPT_RACES, LEE_LINKABLE_ROWS, MISSING_RACE,
    MISSING_RACE_BODY_CAMERA,
};
use params::*;

pub const DEFAULT_SEED: u64 = 20_160_711;

/// Id of the incident whose county is missing from the demography tables.
pub const UNLINKED_DEMOGRAPHY_ID: u32 = 686;

/// One row of the census county list.
#[derive(Debug, Clone, Deserialize)]
pub struct GazetteerCounty {
    pub state_fips: u16,
    pub county_fips: u16,
    pub state: StateCode,
    pub name: String,
}

#[derive(Debug)]
pub enum GenerateError {
    Gazetteer(csv::Error),
    UnknownCounty { state: String, name: String },
    UnknownState(String),
    DuplicateCity(String),
    Io { path: PathBuf, source: io::Error },
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateError::Gazetteer(e) => write!(f, "county list: {e}"),
            GenerateError::UnknownCounty { state, name } => write!(f, "county list has no {name}, {state}"),
            GenerateError::UnknownState(s) => write!(f, "no state mix for {s}"),
            GenerateError::DuplicateCity(c) => write!(f, "synthetic city name {c} is not unique"),
            GenerateError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for GenerateError {}

pub fn read_gazetteer<R: Read>(source: R) -> Result<Vec<GazetteerCounty>, GenerateError> {
    csv::Reader::from_reader(source)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(GenerateError::Gazetteer)
}

/// The seven generated tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixtures {
    pub shootings: Vec<RawShootingRow>,
    pub dem2010: Vec<RawDemographyRow>,
    pub dem2016: Vec<RawDemographyRow>,
    pub lee: Vec<RawLeeRow>,
    pub arrests: Vec<RawArrestRow>,
    pub codes: Vec<RawCodeRow>,
    pub cities: Vec<CityRow>,
}

impl Fixtures {
    /// Writes every table under `dir` with the file names the loader expects.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, GenerateError> {
        fs::create_dir_all(dir).map_err(|source| GenerateError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        for ds in Dataset::ALL {
            let path = dir.join(ds.file_name());
            let mut buf = Vec::new();
            let res = match ds {
                Dataset::Shootings => write_shootings(&self.shootings, &mut buf),
                Dataset::Dem2010 => write_demography(&self.dem2010, &mut buf),
                Dataset::Dem2016 => write_demography(&self.dem2016, &mut buf),
                Dataset::Lee => write_lee(&self.lee, &mut buf),
                Dataset::Arrest => write_arrests(&self.arrests, &mut buf),
                Dataset::Codes => write_codes(&self.codes, &mut buf),
                Dataset::Cities => write_cities(&self.cities, &mut buf),
            };
            res.and_then(|()| fs::write(&path, &buf))
                .map_err(|source| GenerateError::Io { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Census race shares of one county: non-Hispanic W, B, NA, A, NH, T plus the
/// Hispanic share of any race. All seven sum to one.
#[derive(Debug, Clone, Copy)]
struct Shares {
    nonhispanic: [f64; 6],
    hispanic: f64,
}

impl Shares {
    fn other(&self) -> f64 {
        self.nonhispanic[4] + self.nonhispanic[5]
    }

    fn rebalance_white(&mut self) {
        let minority: f64 = self.nonhispanic[1..].iter().sum::<f64>() + self.hispanic;
        if minority > 0.97 {
            let f = 0.97 / minority;
            self.nonhispanic[1..].iter_mut().for_each(|s| *s *= f);
            self.hispanic *= f;
        }
        self.nonhispanic[0] = 1.0 - self.nonhispanic[1..].iter().sum::<f64>() - self.hispanic;
    }
}

struct County {
    state: StateCode,
    name: String,
    fips: u32,
    ucr: u32,
    pop10: u64,
    pop16: u64,
    shares10: Shares,
    shares16: Shares,
    officers: u64,
    civilians: u64,
    metropolitan: bool,
    arrests: [u64; 4],
    city: String,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Group {
    Kept,
    ArrestExcluded,
    MissingRace,
    UnlinkedDemography,
}

struct Incident {
    county: usize,
    city: String,
    group: Group,
    race: Option<Race>,
    body_camera: bool,
    id: Option<u32>,
}

struct Index<'a> {
    counties: &'a [County],
    by_name: HashMap<(StateCode, &'a str), usize>,
}

impl<'a> Index<'a> {
    fn new(counties: &'a [County]) -> Self {
        let by_name = counties
            .iter()
            .enumerate()
            .map(|(i, c)| ((c.state, c.name.as_str()), i))
            .collect();
        Index { counties, by_name }
    }

    fn get(&self, state: &str, name: &str) -> Result<usize, GenerateError> {
        let code = StateCode::parse(state).ok_or_else(|| GenerateError::UnknownState(state.to_string()))?;
        self.by_name
            .get(&(code, name))
            .copied()
            .ok_or_else(|| GenerateError::UnknownCounty {
                state: state.to_string(),
                name: name.to_string(),
            })
    }

    fn in_state(&self, state: &str) -> impl Iterator<Item = usize> + '_ {
        let code = StateCode::parse(state);
        self.counties
            .iter()
            .enumerate()
            .filter(move |(_, c)| Some(c.state) == code)
            .map(|(i, _)| i)
    }
}

fn rng_for(seed: u64, stage: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stage))
}

/// Largest-remainder rounding of `total` in proportion to `weights`.
pub fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let mut out = vec![0u64; weights.len()];
    if weights.is_empty() {
        return out;
    }
    if sum <= 0.0 {
        out[0] = total;
        return out;
    }
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut assigned = 0u64;
    for (o, e) in out.iter_mut().zip(&exact) {
        *o = e.floor() as u64;
        assigned += *o;
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

/// Mean-one lognormal factor.
fn jitter(rng: &mut ChaCha8Rng, sigma: f64) -> f64 {
    LogNormal::new(-sigma * sigma / 2.0, sigma).expect("finite sigma").sample(rng)
}

fn base_name(name: &str) -> &str {
    [" County", " Parish"]
        .iter()
        .find_map(|s| name.strip_suffix(s))
        .unwrap_or(name)
}

fn synthetic_city(c: &GazetteerCounty) -> String {
    if c.state.as_str() == "DC" {
        "Washington".to_string()
    } else if let Some(city) = c.name.strip_suffix(" city") {
        city.to_string()
    } else {
        format!("{} Center", base_name(&c.name))
    }
}

fn populations(gaz: &[GazetteerCounty], seed: u64) -> Result<Vec<u64>, GenerateError> {
    let mut rng = rng_for(seed, "populations");
    let mut pops = vec![0u64; gaz.len()];
    let mut pinned = HashSet::new();
    for &(state, name, pop) in PINNED_POPULATIONS {
        let i = gaz
            .iter()
            .position(|c| c.state.as_str() == state && c.name == name)
            .ok_or_else(|| GenerateError::UnknownCounty {
                state: state.to_string(),
                name: name.to_string(),
            })?;
        pops[i] = pop;
        pinned.insert(i);
    }
    for mix in STATE_MIX {
        let members: Vec<usize> = (0..gaz.len())
            .filter(|&i| gaz[i].state.as_str() == mix.postal && !pinned.contains(&i))
            .collect();
        let fixed: u64 = (0..gaz.len())
            .filter(|i| gaz[*i].state.as_str() == mix.postal && pinned.contains(i))
            .map(|i| pops[i])
            .sum();
        let weights: Vec<f64> = members.iter().map(|_| jitter(&mut rng, 1.1)).collect();
        let shares = apportion(mix.pop.saturating_sub(fixed), &weights);
        for (&i, p) in members.iter().zip(shares) {
            pops[i] = p.max(80);
        }
    }
    Ok(pops)
}

fn shares_2010(gaz: &[GazetteerCounty], pops: &[u64], seed: u64) -> Result<Vec<Shares>, GenerateError> {
    let mut rng = rng_for(seed, "shares");
    let logs: Vec<f64> = pops.iter().map(|&p| (p as f64).ln()).collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let sd = (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / logs.len() as f64).sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    // (slope on standardized log population, spread) for B, NA, A, NH, T, H.
    let shape = [(0.25, 1.0), (-0.2, 1.1), (0.45, 0.7), (0.1, 0.6), (0.05, 0.35), (0.2, 0.8)];
    let caps = [0.85, 0.9, 0.6, 0.3, 0.3, 0.95];
    let mut out = Vec::with_capacity(gaz.len());
    for (c, l) in gaz.iter().zip(&logs) {
        let mix = STATE_MIX
            .iter()
            .find(|m| m.postal == c.state.as_str())
            .ok_or_else(|| GenerateError::UnknownState(c.state.to_string()))?;
        let base = [mix.b, mix.na, mix.a, mix.nh, mix.t, mix.h];
        let z = (l - mean) / sd;
        let mut v = [0.0; 6];
        for k in 0..6 {
            let (slope, spread) = shape[k];
            let eps: f64 = normal.sample(&mut rng);
            v[k] = (base[k] / 100.0 * (slope * z + spread * eps - spread * spread / 2.0).exp()).min(caps[k]);
        }
        let mut s = Shares {
            nonhispanic: [0.0, v[0], v[1], v[2], v[3], v[4]],
            hispanic: v[5],
        };
        s.rebalance_white();
        out.push(s);
    }
    Ok(out)
}

fn calibrate_other(shares: &mut [Shares], target: f64) {
    for _ in 0..4 {
        let mean = shares.iter().map(Shares::other).sum::<f64>() / shares.len() as f64;
        let f = target / mean;
        for s in shares.iter_mut() {
            s.nonhispanic[4] *= f;
            s.nonhispanic[5] *= f;
            s.rebalance_white();
        }
    }
}

fn project_2016(shares10: &[Shares], seed: u64) -> Vec<Shares> {
    let mut rng = rng_for(seed, "projection");
    // Growth factors for non-Hispanic B, NA, A, NH, T and Hispanic.
    let growth = [1.03, 1.0, 1.16, 1.08, 1.15, 1.12];
    let mut out: Vec<Shares> = shares10
        .iter()
        .map(|s| {
            let mut n = *s;
            for k in 1..6 {
                n.nonhispanic[k] *= growth[k - 1] * jitter(&mut rng, 0.05);
            }
            n.hispanic *= growth[5] * jitter(&mut rng, 0.05);
            n.rebalance_white();
            n
        })
        .collect();
    calibrate_other(&mut out, OTHER_SHARE_2016);
    out
}

/// Per-race arrest rate multipliers that bring the national arrest shares to
/// `NATIONAL_ARREST_SHARES`, by fixed-point iteration.
fn arrest_multipliers(draws: &[(u64, [f64; 4])]) -> [f64; 4] {
    let mut m = [1.0; 4];
    for _ in 0..50 {
        let mut national = [0.0; 4];
        for (total, w) in draws {
            let norm: f64 = (0..4).map(|k| w[k] * m[k]).sum();
            if norm > 0.0 {
                for k in 0..4 {
                    national[k] += *total as f64 * w[k] * m[k] / norm;
                }
            }
        }
        let sum: f64 = national.iter().sum();
        for k in 0..4 {
            m[k] *= NATIONAL_ARREST_SHARES[k] / (national[k] / sum);
        }
    }
    m
}

fn demography_row(c: &County, vintage: Vintage, mangled: bool) -> RawDemographyRow {
    let (total, s) = match vintage {
        Vintage::Census2010 => (c.pop10, c.shares10),
        Vintage::Proj2016 => (c.pop16, c.shares16),
    };
    let hisp_total = (total as f64 * s.hispanic).round() as u64;
    let nonhisp = apportion(total - hisp_total, &s.nonhispanic);
    let hisp = apportion(hisp_total, &HISPANIC_ALLOCATION);
    let mut pop_by_race = [0u64; 6];
    let mut hispanic_by_race = [0u64; 6];
    for k in 0..6 {
        pop_by_race[k] = nonhisp[k] + hisp[k];
        hispanic_by_race[k] = hisp[k];
    }
    let county_name = if mangled {
        c.name.replace('ñ', "\u{FFFD}")
    } else {
        c.name.clone()
    };
    RawDemographyRow {
        state: c.state,
        county_name,
        vintage,
        total_pop: total,
        pop_by_race,
        hispanic_by_race,
    }
}

/// Victim-race law used to label incidents: Hispanic and Other follow the
/// population, the remaining mass follows arrests.
fn victim_law(c: &County) -> [f64; RACE_COUNT] {
    let s = c.shares10;
    let h = s.hispanic;
    let o = s.other();
    let rest = (1.0 - h - o).max(0.0);
    let arrests: f64 = c.arrests.iter().sum::<u64>() as f64;
    let mut law = [0.0; RACE_COUNT];
    for k in 0..4 {
        law[k] = if arrests > 0.0 {
            rest * c.arrests[k] as f64 / arrests
        } else {
            s.nonhispanic[k]
        };
    }
    law[Race::Hispanic.index()] = h;
    law[Race::Other.index()] = o;
    law
}

/// Draws races for `members` so that the totals equal `quota` exactly,
/// weighting each draw by the county law times the remaining quota.
fn assign_races(
    incidents: &mut [Incident],
    members: &[usize],
    quota: [u64; RACE_COUNT],
    laws: &[[f64; RACE_COUNT]],
    rng: &mut ChaCha8Rng,
) {
    let mut remaining = quota;
    let mut order = members.to_vec();
    order.shuffle(rng);
    for i in order {
        let law = laws[incidents[i].county];
        let mut w: Vec<f64> = (0..RACE_COUNT).map(|r| law[r] * remaining[r] as f64).collect();
        if w.iter().all(|&x| x <= 0.0) {
            w = remaining.iter().map(|&r| r as f64).collect();
        }
        let r = WeightedIndex::new(&w).expect("quota not exhausted").sample(rng);
        remaining[r] -= 1;
        incidents[i].race = Race::from_index(r);
    }
    debug_assert!(remaining.iter().all(|&r| r == 0));
}

fn sample_counties(pool: &[usize], counties: &[County], n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let weights: Vec<f64> = pool.iter().map(|&i| counties[i].officers as f64).collect();
    let dist = WeightedIndex::new(&weights).expect("non-empty pool with officers");
    (0..n).map(|_| pool[dist.sample(rng)]).collect()
}

/// Picks `n` counties from `pool`, favouring small ones.
fn pick_small(pool: &[usize], counties: &[County], n: usize, rng: &mut ChaCha8Rng) -> BTreeSet<usize> {
    let mut keyed: Vec<(f64, usize)> = pool
        .iter()
        .map(|&i| {
            // Weighted sampling without replacement by exponential keys.
            let w = 1.0 / (counties[i].pop10 as f64).sqrt();
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            (u.ln() / w, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0));
    keyed.into_iter().take(n).map(|(_, i)| i).collect()
}

pub fn generate(gaz: &[GazetteerCounty], seed: u64) -> Result<Fixtures, GenerateError> {
    let pops = populations(gaz, seed)?;
    let mut shares10 = shares_2010(gaz, &pops, seed)?;
    calibrate_other(&mut shares10, OTHER_SHARE_2010);
    let shares16 = project_2016(&shares10, seed);

    let mut rng = rng_for(seed, "agencies");
    let state_growth: HashMap<StateCode, f64> = STATE_MIX
        .iter()
        .map(|m| {
            let g: f64 = Normal::new(0.045, 0.03).expect("finite").sample(&mut rng);
            (StateCode::parse(m.postal).expect("known state"), 1.0 + g.clamp(-0.03, 0.15))
        })
        .collect();
    let mut ucr_rank: HashMap<StateCode, Vec<usize>> = HashMap::new();
    for (i, c) in gaz.iter().enumerate() {
        ucr_rank.entry(c.state).or_default().push(i);
    }
    let mut ucr = vec![0u32; gaz.len()];
    for (state, members) in ucr_rank.iter_mut() {
        members.sort_by(|&a, &b| gaz[a].name.cmp(&gaz[b].name));
        for (rank, &i) in members.iter().enumerate() {
            ucr[i] = u32::from(state.info().ucr) * 1000 + rank as u32 + 1;
        }
    }

    let mut counties = Vec::with_capacity(gaz.len());
    let mut arrest_draws = Vec::with_capacity(gaz.len());
    let mut seen_cities = HashSet::new();
    for (i, g) in gaz.iter().enumerate() {
        let pop10 = pops[i];
        let pop16 = ((pop10 as f64) * state_growth[&g.state] * jitter(&mut rng, 0.04)).round() as u64;
        let officers = ((pop10 as f64) * 0.0023 * jitter(&mut rng, 0.3)).round().max(1.0) as u64;
        let civilians = ((officers as f64) * 0.45 * jitter(&mut rng, 0.35)).round() as u64;
        let metropolitan = pop10 >= 100_000 || (pop10 >= 50_000 && rng.gen_bool(0.5));
        let s = shares10[i];
        let total_arrests = ((pop10 as f64) * 0.035 * jitter(&mut rng, 0.6)).round().max(1.0) as u64;
        let mut w = [0.0; 4];
        for k in 0..4 {
            let resident = s.nonhispanic[k] + s.hispanic * HISPANIC_ALLOCATION[k];
            w[k] = resident * jitter(&mut rng, 0.25);
        }
        arrest_draws.push((total_arrests, w));
        let city = synthetic_city(g);
        if !seen_cities.insert((g.state, city.to_ascii_lowercase())) {
            return Err(GenerateError::DuplicateCity(city));
        }
        counties.push(County {
            state: g.state,
            name: g.name.clone(),
            fips: u32::from(g.state_fips) * 1000 + u32::from(g.county_fips),
            ucr: ucr[i],
            pop10,
            pop16,
            shares10: s,
            shares16: shares16[i],
            officers,
            civilians,
            metropolitan,
            arrests: [0; 4],
            city,
        });
    }
    let multipliers = arrest_multipliers(&arrest_draws);
    for (c, (total, w)) in counties.iter_mut().zip(&arrest_draws) {
        let scaled: Vec<f64> = (0..4).map(|k| w[k] * multipliers[k]).collect();
        let a = apportion(*total, &scaled);
        c.arrests = [a[0], a[1], a[2], a[3]];
    }
    let laws: Vec<[f64; RACE_COUNT]> = counties.iter().map(victim_law).collect();
    let idx = Index::new(&counties);

    // Special counties.
    let dona_ana = idx.get("NM", "Doña Ana County")?;
    let oglala = idx.get("SD", "Oglala Lakota County")?;
    let saline = idx.get("IL", "Saline County")?;
    let grady = idx.get("OK", "Grady County")?;
    let fremont = idx.get("CO", "Fremont County")?;

    let mut non_reporting: BTreeSet<usize> = BTreeSet::new();
    for st in NON_REPORTING_STATES {
        non_reporting.extend(idx.in_state(st));
    }
    for (st, keep) in PARTIALLY_REPORTING_STATES {
        let keep: Vec<usize> = keep.iter().map(|n| idx.get(st, n)).collect::<Result<_, _>>()?;
        non_reporting.extend(idx.in_state(st).filter(|i| !keep.contains(i)));
    }
    let mut named_non_reporting = Vec::new();
    for (st, name) in NON_REPORTING_COUNTIES {
        let i = idx.get(st, name)?;
        non_reporting.insert(i);
        named_non_reporting.push(i);
    }
    let mut multi: Vec<(StateCode, &str, Vec<usize>)> = Vec::new();
    let mut multi_member: HashMap<usize, usize> = HashMap::new();
    for (m, (st, city, names)) in MULTI_COUNTY_CITIES.iter().enumerate() {
        let members: Vec<usize> = names.iter().map(|n| idx.get(st, n)).collect::<Result<_, _>>()?;
        for &i in &members {
            multi_member.insert(i, m);
        }
        multi.push((StateCode::parse(st).expect("known state"), city, members));
    }
    let excluded_pool: Vec<usize> = non_reporting.iter().copied().collect();
    let kept_pool: Vec<usize> = (0..counties.len())
        .filter(|i| !non_reporting.contains(i) && *i != dona_ana && *i != oglala)
        .collect();

    let mut rng = rng_for(seed, "incidents");
    let mut incidents: Vec<Incident> = Vec::new();
    let mut push = |county: usize, city: Option<String>, group: Group, id: Option<u32>, rng: &mut ChaCha8Rng| {
        let city = city.unwrap_or_else(|| match multi_member.get(&county) {
            Some(&m) if rng.gen_bool(0.5) => multi[m].1.to_string(),
            _ => counties[county].city.clone(),
        });
        incidents.push(Incident {
            county,
            city,
            group,
            race: None,
            body_camera: false,
            id,
        });
    };

    push(dona_ana, Some("Las Cruces".into()), Group::UnlinkedDemography, Some(UNLINKED_DEMOGRAPHY_ID), &mut rng);

    let mut forced_excluded = named_non_reporting.clone();
    for st in NON_REPORTING_STATES.iter().chain(["AL"].iter()) {
        let pool: Vec<usize> = idx.in_state(st).filter(|i| non_reporting.contains(i)).collect();
        forced_excluded.extend(sample_counties(&pool, &counties, 1, &mut rng));
    }
    push(saline, Some("Harrisburg".into()), Group::ArrestExcluded, Some(1541), &mut rng);
    for &c in &forced_excluded {
        push(c, None, Group::ArrestExcluded, None, &mut rng);
    }
    let excluded_total: u64 = ARREST_EXCLUDED_RACES.iter().sum();
    let rest = excluded_total as usize - forced_excluded.len() - 1;
    for c in sample_counties(&excluded_pool, &counties, rest, &mut rng) {
        push(c, None, Group::ArrestExcluded, None, &mut rng);
    }

    push(grady, Some("Rush Springs".into()), Group::Kept, Some(1696), &mut rng);
    push(fremont, Some("Cañon City".into()), Group::Kept, None, &mut rng);
    let multi_cities: Vec<(usize, String)> = multi.iter().map(|(_, city, m)| (m[0], city.to_string())).collect();
    for (c, city) in &multi_cities {
        push(*c, Some(city.clone()), Group::Kept, None, &mut rng);
    }
    let kept_total: u64 = KEPT_RACES.iter().sum();
    let rest = kept_total as usize - multi_cities.len() - 2;
    for c in sample_counties(&kept_pool, &counties, rest, &mut rng) {
        push(c, None, Group::Kept, None, &mut rng);
    }
    let any_pool: Vec<usize> = kept_pool.iter().chain(&excluded_pool).copied().collect();
    for c in sample_counties(&any_pool, &counties, MISSING_RACE, &mut rng) {
        push(c, None, Group::MissingRace, None, &mut rng);
    }

    let members = |g: Group, incidents: &[Incident]| -> Vec<usize> {
        (0..incidents.len()).filter(|&i| incidents[i].group == g).collect()
    };
    let kept = members(Group::Kept, &incidents);
    let excluded = members(Group::ArrestExcluded, &incidents);
    assign_races(&mut incidents, &kept, KEPT_RACES, &laws, &mut rng);
    assign_races(&mut incidents, &excluded, ARREST_EXCLUDED_RACES, &laws, &mut rng);
    incidents[0].race = Some(Race::Hispanic);

    for race in Race::ALL {
        let mut pool: Vec<usize> = (1..incidents.len()).filter(|&i| incidents[i].race == Some(race)).collect();
        pool.shuffle(&mut rng);
        for &i in pool.iter().take(BODY_CAMERA_RACES[race.index()] as usize) {
            incidents[i].body_camera = true;
        }
    }
    let mut missing = members(Group::MissingRace, &incidents);
    missing.shuffle(&mut rng);
    for &i in missing.iter().take(MISSING_RACE_BODY_CAMERA) {
        incidents[i].body_camera = true;
    }

    let shootings = shooting_rows(&mut incidents, &counties, &mut rng);

    let used: HashSet<usize> = incidents.iter().map(|i| i.county).collect();
    let protected: HashSet<usize> = EMPLOYEE_SPELLINGS
        .iter()
        .map(|(st, name, _)| idx.get(st, name))
        .collect::<Result<_, _>>()?;
    let quiet: Vec<usize> = (0..counties.len())
        .filter(|i| {
            !used.contains(i)
                && !protected.contains(i)
                && !multi_member.contains_key(i)
                && *i != dona_ana
                && *i != oglala
        })
        .collect();
    let mut rng = rng_for(seed, "coverage");
    let lee_missing = counties.len() - 2 - LEE_LINKABLE_ROWS;
    let without_lee = pick_small(&quiet, &counties, lee_missing, &mut rng);
    let quiet_reporting: Vec<usize> = quiet.iter().copied().filter(|i| !non_reporting.contains(i)).collect();
    let extra = counties.len() - non_reporting.len() - ARREST_REPORTING_CODES;
    let without_arrests = pick_small(&quiet_reporting, &counties, extra, &mut rng);

    let dem2010 = counties
        .iter()
        .enumerate()
        .map(|(i, c)| demography_row(c, Vintage::Census2010, i == dona_ana))
        .collect();
    let dem2016 = counties
        .iter()
        .enumerate()
        .map(|(i, c)| demography_row(c, Vintage::Proj2016, i == dona_ana))
        .collect();
    let lee = lee_rows(&counties, &without_lee, dona_ana, oglala, &mut rng);
    let codes = counties
        .iter()
        .enumerate()
        .map(|(i, c)| RawCodeRow {
            state: c.state,
            county_name: if i == oglala {
                "SHANNON".to_string()
            } else {
                base_name(&c.name).to_uppercase()
            },
            ucr_code: c.ucr,
            fips_code: c.fips,
        })
        .collect();
    let arrests = arrest_rows(&counties, |i| !non_reporting.contains(&i) && !without_arrests.contains(&i), &mut rng);
    let cities = city_rows(&counties, &multi, dona_ana, saline, grady, fremont);

    Ok(Fixtures {
        shootings,
        dem2010,
        dem2016,
        lee,
        arrests,
        codes,
        cities,
    })
}

fn shooting_rows(incidents: &mut [Incident], counties: &[County], rng: &mut ChaCha8Rng) -> Vec<RawShootingRow> {
    let fixed: BTreeSet<u32> = incidents.iter().filter_map(|i| i.id).collect();
    let mut free: Vec<u32> = (ID_RANGE.0..=ID_RANGE.1).filter(|id| !fixed.contains(id)).collect();
    free.shuffle(rng);
    let mut free = free.into_iter();
    for inc in incidents.iter_mut() {
        if inc.id.is_none() {
            inc.id = free.next();
        }
    }
    let first = resample_core::ingest::FIRST_DATE;
    let span = (resample_core::ingest::LAST_DATE - first).num_days();
    let mut days: Vec<i64> = (0..incidents.len()).map(|_| rng.gen_range(0..=span)).collect();
    days.sort_unstable();
    let mut order: Vec<usize> = (0..incidents.len()).collect();
    order.sort_by_key(|&i| incidents[i].id);
    order
        .iter()
        .zip(days)
        .map(|(&i, day)| {
            let inc = &incidents[i];
            let id = inc.id.expect("id assigned");
            let date = if id == 1696 {
                NaiveDate::from_ymd_opt(2016, 7, 6).expect("valid date")
            } else {
                first + Duration::days(day)
            };
            RawShootingRow {
                id,
                date,
                city: inc.city.clone(),
                state: counties[inc.county].state,
                race: inc.race,
                body_camera: inc.body_camera,
            }
        })
        .collect()
}

fn lee_rows(
    counties: &[County],
    without: &BTreeSet<usize>,
    dona_ana: usize,
    oglala: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<RawLeeRow> {
    let spellings: HashMap<(&str, &str), &str> = EMPLOYEE_SPELLINGS
        .iter()
        .map(|(st, name, alt)| ((*st, *name), *alt))
        .collect();
    let mut rows = Vec::new();
    for (i, c) in counties.iter().enumerate() {
        if without.contains(&i) {
            continue;
        }
        let county_name = if i == dona_ana {
            "Dona Ana".to_string()
        } else if i == oglala {
            "Shannon".to_string()
        } else if let Some(alt) = spellings.get(&(c.state.as_str(), c.name.as_str())) {
            alt.to_string()
        } else {
            let u: f64 = rng.gen();
            let base = base_name(&c.name);
            match u {
                u if u < 0.12 && base != c.name => base.to_string(),
                u if u < 0.20 && c.name.ends_with(" County") => format!("{base} County Police Department"),
                u if u < 0.25 => c.name.to_uppercase(),
                _ => c.name.clone(),
            }
        };
        rows.push(RawLeeRow {
            state: c.state,
            county_name,
            metropolitan: c.metropolitan,
            officers: c.officers,
            civilians: c.civilians,
        });
    }
    rows.sort_by(|a, b| (a.state, &a.county_name).cmp(&(b.state, &b.county_name)));
    rows
}

fn arrest_rows<F: Fn(usize) -> bool>(counties: &[County], reports: F, rng: &mut ChaCha8Rng) -> Vec<RawArrestRow> {
    let mut rows = Vec::new();
    for (i, c) in counties.iter().enumerate() {
        if !reports(i) {
            continue;
        }
        let mix: Vec<f64> = OFFENSES.iter().map(|(_, _, w)| w * jitter(rng, 0.3)).collect();
        let per_race: Vec<Vec<u64>> = c.arrests.iter().map(|&n| apportion(n, &mix)).collect();
        let start = rows.len();
        for (k, (code, name, _)) in OFFENSES.iter().enumerate() {
            let by_race = [per_race[0][k], per_race[1][k], per_race[2][k], per_race[3][k]];
            if by_race.iter().sum::<u64>() > 0 {
                rows.push(RawArrestRow {
                    ucr_code: c.ucr,
                    offense_code: code.to_string(),
                    offense: name.to_string(),
                    arrests_by_race: by_race,
                });
            }
        }
        debug_assert!(rows.len() > start);
    }
    rows.sort_by_key(|r| r.ucr_code);
    rows
}

fn city_rows(
    counties: &[County],
    multi: &[(StateCode, &str, Vec<usize>)],
    dona_ana: usize,
    saline: usize,
    grady: usize,
    fremont: usize,
) -> Vec<CityRow> {
    let row = |city: &str, i: usize| CityRow {
        city: city.to_string(),
        state: counties[i].state,
        county: counties[i].name.clone(),
    };
    let mut rows: Vec<CityRow> = counties.iter().enumerate().map(|(i, c)| row(&c.city, i)).collect();
    rows.push(row("Las Cruces", dona_ana));
    rows.push(row("Harrisburg", saline));
    rows.push(row("Rush Springs", grady));
    rows.push(row("Canon City", fremont));
    for (_, city, members) in multi {
        rows.extend(members.iter().map(|&i| row(city, i)));
    }
    rows.sort_by(|a, b| (a.state, &a.city, &a.county).cmp(&(b.state, &b.city, &b.county)));
    rows
}

/// Loads the county list from `source` and generates with `seed`.
pub fn generate_from_path(source: &Path, seed: u64) -> Result<Fixtures, GenerateError> {
    let file = fs::File::open(source).map_err(|e| GenerateError::Io {
        path: source.to_path_buf(),
        source: e,
    })?;
    generate(&read_gazetteer(file)?, seed)
}
