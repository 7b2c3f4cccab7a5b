//! Monte Carlo replications of victim race totals.
//!
//! Replication `r` of an experiment draws from stream `r` of the
//! experiment's `"replication"` domain, so a result matrix depends only on
//! the inputs and the seed, never on how rayon schedules the work.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demography::{distribution, Mode, RaceDistribution};
use crate::ingest::Vintage;
use crate::linkage::{CountyProfile, ProfileTable, ResolvedIncident};
use crate::race::{Race, RaceCounts, RACE_COUNT};
use crate::rng::StreamFactory;
use crate::sampling::AliasTable;

pub const REPLICATION_DOMAIN: &str = "replication";
pub const DEFAULT_FIXED_REPLICATIONS: u64 = 1000;
pub const DEFAULT_RANDOM_REPLICATIONS: u64 = 2000;
pub const DEFAULT_BODYCAM_REPLICATIONS: u64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    /// Incident counties stay as observed.
    Fixed,
    /// Every draw picks a county at random, weighted by employment.
    Random,
}

impl Location {
    pub fn as_str(self) -> &'static str {
        match self {
            Location::Fixed => "fixed",
            Location::Random => "random",
        }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// County weight used by random-location draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Officers,
    TotalEmployment,
}

impl Weighting {
    pub fn weight(self, profile: &CountyProfile) -> u64 {
        match self {
            Weighting::Officers => profile.officers.unwrap_or(0),
            Weighting::TotalEmployment => profile.total_employees().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub name: String,
    pub mode: Mode,
    pub location: Location,
    pub vintage: Vintage,
    pub replications: u64,
    pub master_seed: u64,
    #[serde(default)]
    pub weighting: Weighting,
}

/// Resampling of race totals from a reference stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BodycamConfig {
    pub replications: u64,
    pub draws_per_replication: u64,
    pub reference_counts: RaceCounts,
    pub master_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Simulation(SimulationConfig),
    Bodycam(BodycamConfig),
}

/// Replication-by-race matrix of totals. Every row sums to `n_incidents`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub config: ExperimentConfig,
    pub counts: Vec<RaceCounts>,
    pub n_incidents: u64,
}

impl SimulationResult {
    pub fn replications(&self) -> usize {
        self.counts.len()
    }

    /// Totals of one race across replications.
    pub fn column(&self, race: Race) -> Vec<u64> {
        self.counts.iter().map(|row| row[race.index()]).collect()
    }

    /// Writes `replication,W,B,NA,A,H,O`.
    pub fn write_csv<W: Write>(&self, sink: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        let mut header = vec!["replication".to_string()];
        header.extend(Race::ALL.iter().map(|r| r.label().to_string()));
        w.write_record(&header)?;
        for (i, row) in self.counts.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(u64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()
    }

    /// JSON sidecar with the configuration that produced the matrix.
    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "n_incidents": self.n_incidents,
            "replications": self.counts.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("replications must be at least 1")]
    ZeroReplications,
    #[error("experiment {name} is configured for {actual} locations")]
    WrongLocation { name: String, actual: Location },
    #[error("counties without a usable distribution: {}", counties.join("; "))]
    UnusableCounties { counties: Vec<String> },
    #[error("no county has positive weight and a usable {mode} distribution for {vintage}")]
    NoEligibleCounties { mode: Mode, vintage: Vintage },
    #[error("reference counts sum to zero")]
    ZeroReference,
    #[error("draws per replication must be at least 1")]
    ZeroDraws,
}

/// Fixed-location resampling: each incident keeps its county and redraws its
/// race from that county's law.
pub fn run_fixed(
    incidents: &[ResolvedIncident],
    profiles: &ProfileTable,
    config: &SimulationConfig,
) -> Result<SimulationResult, EngineError> {
    if config.location != Location::Fixed {
        return Err(EngineError::WrongLocation {
            name: config.name.clone(),
            actual: config.location,
        });
    }
    let mut slots: HashMap<&crate::linkage::CountyKey, usize> = HashMap::new();
    let mut dists = Vec::new();
    let mut bad = Vec::new();
    let mut assignment = Vec::with_capacity(incidents.len());
    for inc in incidents {
        if let Some(&slot) = slots.get(&inc.county) {
            assignment.push(slot);
            continue;
        }
        let dist = profiles
            .get(&inc.county)
            .ok_or_else(|| format!("{}: no profile", inc.county))
            .and_then(|p| distribution(p, config.mode, config.vintage).map_err(|e| e.to_string()));
        match dist {
            Ok(d) => {
                slots.insert(&inc.county, dists.len());
                assignment.push(dists.len());
                dists.push(d);
            }
            Err(e) => {
                if !bad.contains(&e) {
                    bad.push(e);
                }
            }
        }
    }
    if !bad.is_empty() {
        return Err(EngineError::UnusableCounties { counties: bad });
    }
    let per_incident: Vec<&RaceDistribution> = assignment.iter().map(|&i| &dists[i]).collect();
    let counts = simulate_fixed(&per_incident, config.replications, config.master_seed)?;
    Ok(SimulationResult {
        config: ExperimentConfig::Simulation(config.clone()),
        counts,
        n_incidents: incidents.len() as u64,
    })
}

/// Random-location resampling: each of `n_incidents` draws picks a county in
/// proportion to its weight, then a race from that county's law. Counties
/// without a usable law for the mode or without positive weight are not
/// eligible.
pub fn run_random(
    n_incidents: u64,
    profiles: &ProfileTable,
    config: &SimulationConfig,
) -> Result<SimulationResult, EngineError> {
    if config.location != Location::Random {
        return Err(EngineError::WrongLocation {
            name: config.name.clone(),
            actual: config.location,
        });
    }
    let (dists, weights) = eligible_counties(profiles, config.mode, config.vintage, config.weighting);
    if dists.is_empty() {
        return Err(EngineError::NoEligibleCounties {
            mode: config.mode,
            vintage: config.vintage,
        });
    }
    let counts = simulate_random(&dists, &weights, n_incidents, config.replications, config.master_seed)?;
    Ok(SimulationResult {
        config: ExperimentConfig::Simulation(config.clone()),
        counts,
        n_incidents,
    })
}

/// Counties a random-location draw may land in, with their weights.
pub fn eligible_counties(
    profiles: &ProfileTable,
    mode: Mode,
    vintage: Vintage,
    weighting: Weighting,
) -> (Vec<RaceDistribution>, Vec<f64>) {
    profiles
        .iter()
        .filter_map(|p| {
            let w = weighting.weight(p);
            if w == 0 {
                return None;
            }
            distribution(p, mode, vintage).ok().map(|d| (d, w as f64))
        })
        .unzip()
}

/// Draws `draws_per_replication` races i.i.d. from the reference proportions.
pub fn run_bodycam(config: &BodycamConfig) -> Result<SimulationResult, EngineError> {
    if config.replications == 0 {
        return Err(EngineError::ZeroReplications);
    }
    if config.draws_per_replication == 0 {
        return Err(EngineError::ZeroDraws);
    }
    let weights: Vec<f64> = config.reference_counts.iter().map(|&c| c as f64).collect();
    let table = AliasTable::new(&weights).map_err(|_| EngineError::ZeroReference)?;
    let streams = StreamFactory::new(config.master_seed, REPLICATION_DOMAIN);
    let counts = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.stream(r);
            let mut row = [0u64; RACE_COUNT];
            for _ in 0..config.draws_per_replication {
                row[table.sample(&mut rng)] += 1;
            }
            row
        })
        .collect();
    Ok(SimulationResult {
        config: ExperimentConfig::Bodycam(config.clone()),
        counts,
        n_incidents: config.draws_per_replication,
    })
}

/// Core of fixed-location resampling over one law per incident.
pub fn simulate_fixed(
    per_incident: &[&RaceDistribution],
    replications: u64,
    seed: u64,
) -> Result<Vec<RaceCounts>, EngineError> {
    if replications == 0 {
        return Err(EngineError::ZeroReplications);
    }
    let streams = StreamFactory::new(seed, REPLICATION_DOMAIN);
    Ok((0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.stream(r);
            let mut row = [0u64; RACE_COUNT];
            for dist in per_incident {
                row[dist.sample(&mut rng).index()] += 1;
            }
            row
        })
        .collect())
}

/// Core of random-location resampling over weighted county laws.
pub fn simulate_random(
    dists: &[RaceDistribution],
    weights: &[f64],
    n_incidents: u64,
    replications: u64,
    seed: u64,
) -> Result<Vec<RaceCounts>, EngineError> {
    if replications == 0 {
        return Err(EngineError::ZeroReplications);
    }
    assert_eq!(dists.len(), weights.len(), "one weight per county");
    let Ok(table) = AliasTable::new(weights) else {
        let (mode, vintage) = dists.first().map_or((Mode::Population, Vintage::Census2010), |d| (d.mode, d.vintage));
        return Err(EngineError::NoEligibleCounties { mode, vintage });
    };
    let streams = StreamFactory::new(seed, REPLICATION_DOMAIN);
    Ok((0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.stream(r);
            let mut row = [0u64; RACE_COUNT];
            for _ in 0..n_incidents {
                let county = table.sample(&mut rng);
                row[dists[county].sample(&mut rng).index()] += 1;
            }
            row
        })
        .collect())
}
