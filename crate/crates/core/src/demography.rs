//! Per-county categorical laws over the six victim race labels.
//!
//! Under population weighting a census race is drawn first and then turned
//! into Hispanic with that race's local Hispanic share. The two steps are
//! folded into one distribution here: the non-Hispanic part of each race
//! keeps its label (NH and two-or-more both become Other) and the Hispanic
//! parts of all races pool into H. Under arrest weighting H and O keep their
//! population probabilities and the rest of the mass is spread over W, B,
//! NA, A in proportion to aggregated arrests.

use std::fmt;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Vintage;
use crate::linkage::{CountyKey, CountyProfile};
use crate::race::{ArrestRace, CensusRace, Race, RACE_COUNT};

/// What victim race is assumed to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Population,
    Arrest,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Population => "population",
            Mode::Arrest => "arrest",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DemographyError {
    #[error("{county}: no {vintage} demography")]
    MissingDemography { county: CountyKey, vintage: Vintage },
    #[error("{county}: total population is zero in {vintage}")]
    ZeroPopulation { county: CountyKey, vintage: Vintage },
    #[error("{county}: no arrest data")]
    MissingArrests { county: CountyKey },
    #[error("{county}: all arrest counts are zero; county unusable in arrest mode")]
    ZeroArrests { county: CountyKey },
    #[error("probabilities must be finite, non-negative and sum to 1 (sum {sum})")]
    InvalidProbabilities { sum: f64 },
}

/// Tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A county's law over [`Race::ALL`] under one mode and vintage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaceDistribution {
    pub county: CountyKey,
    pub mode: Mode,
    pub vintage: Vintage,
    probs: [f64; RACE_COUNT],
    cumulative: [f64; RACE_COUNT],
}

impl RaceDistribution {
    pub fn new(
        county: CountyKey,
        mode: Mode,
        vintage: Vintage,
        probs: [f64; RACE_COUNT],
    ) -> Result<Self, DemographyError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) || (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(DemographyError::InvalidProbabilities { sum });
        }
        let mut cumulative = [0.0; RACE_COUNT];
        let mut acc = 0.0;
        for (c, p) in cumulative.iter_mut().zip(probs) {
            acc += p;
            *c = acc;
        }
        Ok(RaceDistribution {
            county,
            mode,
            vintage,
            probs,
            cumulative,
        })
    }

    pub fn probs(&self) -> &[f64; RACE_COUNT] {
        &self.probs
    }

    pub fn prob(&self, race: Race) -> f64 {
        self.probs[race.index()]
    }

    /// Draws one race using exactly one uniform from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Race {
        let u: f64 = rng.gen();
        let target = u * self.cumulative[RACE_COUNT - 1];
        let idx = self
            .cumulative
            .iter()
            .position(|&c| target < c)
            .unwrap_or_else(|| self.last_supported());
        Race::ALL[idx]
    }

    fn last_supported(&self) -> usize {
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

/// Draws one race from `dist`.
pub fn sample_race<R: Rng + ?Sized>(dist: &RaceDistribution, rng: &mut R) -> Race {
    dist.sample(rng)
}

/// Population-weighted law with Hispanic substitution and NH/T mapped to Other.
pub fn population_distribution(
    profile: &CountyProfile,
    vintage: Vintage,
) -> Result<RaceDistribution, DemographyError> {
    let probs = population_probs(profile, vintage)?;
    RaceDistribution::new(profile.key.clone(), Mode::Population, vintage, probs)
}

fn population_probs(profile: &CountyProfile, vintage: Vintage) -> Result<[f64; RACE_COUNT], DemographyError> {
    let dem = profile
        .demography(vintage)
        .ok_or_else(|| DemographyError::MissingDemography {
            county: profile.key.clone(),
            vintage,
        })?;
    if dem.total_pop == 0 {
        return Err(DemographyError::ZeroPopulation {
            county: profile.key.clone(),
            vintage,
        });
    }
    // Integer masses first so each probability is a single division.
    let mut mass = [0u64; RACE_COUNT];
    for race in CensusRace::ALL {
        let hispanic = dem.hispanic(race);
        mass[race.harmonized().index()] += dem.pop(race) - hispanic;
        mass[Race::Hispanic.index()] += hispanic;
    }
    let total = dem.total_pop as f64;
    Ok(mass.map(|m| m as f64 / total))
}

/// Arrest-weighted law. H and O take their population-mode probabilities;
/// the remaining mass goes to W, B, NA, A proportional to arrests.
pub fn arrest_distribution(profile: &CountyProfile, vintage: Vintage) -> Result<RaceDistribution, DemographyError> {
    let arrests = profile.arrests.ok_or_else(|| DemographyError::MissingArrests {
        county: profile.key.clone(),
    })?;
    let total_arrests: u64 = arrests.iter().sum();
    if total_arrests == 0 {
        return Err(DemographyError::ZeroArrests {
            county: profile.key.clone(),
        });
    }
    let pop = population_probs(profile, vintage)?;
    let (p_h, p_o) = (pop[Race::Hispanic.index()], pop[Race::Other.index()]);
    let remaining = (1.0 - p_h - p_o).max(0.0);
    let mut probs = [0.0; RACE_COUNT];
    probs[Race::Hispanic.index()] = p_h;
    probs[Race::Other.index()] = p_o;
    for race in ArrestRace::ALL {
        probs[race.harmonized().index()] = remaining * arrests[race.index()] as f64 / total_arrests as f64;
    }
    RaceDistribution::new(profile.key.clone(), Mode::Arrest, vintage, probs)
}

/// Distribution of `profile` under `mode`.
pub fn distribution(profile: &CountyProfile, mode: Mode, vintage: Vintage) -> Result<RaceDistribution, DemographyError> {
    match mode {
        Mode::Population => population_distribution(profile, vintage),
        Mode::Arrest => arrest_distribution(profile, vintage),
    }
}

/// Writes distributions as `state,county,mode,vintage,W,B,NA,A,H,O`.
pub fn write_distributions<W: Write>(dists: &[RaceDistribution], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    let mut header = vec!["state", "county", "mode", "vintage"];
    header.extend(Race::ALL.iter().map(|r| r.label()));
    w.write_record(&header)?;
    for d in dists {
        let mut rec = vec![
            d.county.state.to_string(),
            d.county.name.clone(),
            d.mode.to_string(),
            d.vintage.to_string(),
        ];
        rec.extend(d.probs.iter().map(|p| format!("{p:.12}")));
        w.write_record(&rec)?;
    }
    w.flush()
}
