//! Race labels shared by every dataset.
//!
//! Incident records use six labels. The census tables use a different six
//! (no Hispanic category, but NH and "two or more"), and the arrest tables
//! only report four. The label sets are kept as separate enums so a value
//! from one vocabulary cannot be mistaken for another.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Harmonized victim race label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Race {
    #[serde(rename = "W")]
    White,
    #[serde(rename = "B")]
    Black,
    #[serde(rename = "NA")]
    NativeAmerican,
    #[serde(rename = "A")]
    Asian,
    #[serde(rename = "H")]
    Hispanic,
    #[serde(rename = "O")]
    Other,
}

pub const RACE_COUNT: usize = 6;

impl Race {
    pub const ALL: [Race; RACE_COUNT] = [
        Race::White,
        Race::Black,
        Race::NativeAmerican,
        Race::Asian,
        Race::Hispanic,
        Race::Other,
    ];

    /// Column position used by every `[_; 6]` array in the crate.
    pub const fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(idx: usize) -> Option<Race> {
        Race::ALL.get(idx).copied()
    }

    /// Short label used in tables and CSV headers.
    pub const fn label(self) -> &'static str {
        match self {
            Race::White => "W",
            Race::Black => "B",
            Race::NativeAmerican => "NA",
            Race::Asian => "A",
            Race::Hispanic => "H",
            Race::Other => "O",
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Race::White => "White",
            Race::Black => "Black",
            Race::NativeAmerican => "Native American",
            Race::Asian => "Asian",
            Race::Hispanic => "Hispanic",
            Race::Other => "Other",
        }
    }

    /// Parses the single-letter code used by the shootings file, where
    /// Native American is `N`.
    pub fn from_incident_code(code: &str) -> Option<Race> {
        match code {
            "W" => Some(Race::White),
            "B" => Some(Race::Black),
            "N" => Some(Race::NativeAmerican),
            "A" => Some(Race::Asian),
            "H" => Some(Race::Hispanic),
            "O" => Some(Race::Other),
            _ => None,
        }
    }

    pub const fn incident_code(self) -> &'static str {
        match self {
            Race::NativeAmerican => "N",
            other => other.label(),
        }
    }
}

impl fmt::Display for Race {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Race {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Race::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown race label {s:?}"))
    }
}

/// Race categories of the county demography tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CensusRace {
    White,
    Black,
    NativeAmerican,
    Asian,
    /// Native Hawaiian and other Pacific Islander.
    PacificIslander,
    TwoOrMore,
}

pub const CENSUS_RACE_COUNT: usize = 6;

impl CensusRace {
    pub const ALL: [CensusRace; CENSUS_RACE_COUNT] = [
        CensusRace::White,
        CensusRace::Black,
        CensusRace::NativeAmerican,
        CensusRace::Asian,
        CensusRace::PacificIslander,
        CensusRace::TwoOrMore,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    /// Incident label receiving this census race's non-Hispanic mass.
    /// NH and two-or-more both collapse to Other.
    pub const fn harmonized(self) -> Race {
        match self {
            CensusRace::White => Race::White,
            CensusRace::Black => Race::Black,
            CensusRace::NativeAmerican => Race::NativeAmerican,
            CensusRace::Asian => Race::Asian,
            CensusRace::PacificIslander | CensusRace::TwoOrMore => Race::Other,
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            CensusRace::White => "W",
            CensusRace::Black => "B",
            CensusRace::NativeAmerican => "NA",
            CensusRace::Asian => "A",
            CensusRace::PacificIslander => "NH",
            CensusRace::TwoOrMore => "T",
        }
    }
}

/// Race categories reported by the arrest tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrestRace {
    White,
    Black,
    NativeAmerican,
    Asian,
}

pub const ARREST_RACE_COUNT: usize = 4;

impl ArrestRace {
    pub const ALL: [ArrestRace; ARREST_RACE_COUNT] = [
        ArrestRace::White,
        ArrestRace::Black,
        ArrestRace::NativeAmerican,
        ArrestRace::Asian,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn harmonized(self) -> Race {
        match self {
            ArrestRace::White => Race::White,
            ArrestRace::Black => Race::Black,
            ArrestRace::NativeAmerican => Race::NativeAmerican,
            ArrestRace::Asian => Race::Asian,
        }
    }
}

/// Per-race tally in `Race::ALL` order.
pub type RaceCounts = [u64; RACE_COUNT];

/// Tallies an iterator of races.
pub fn tally<I: IntoIterator<Item = Race>>(races: I) -> RaceCounts {
    let mut counts = [0u64; RACE_COUNT];
    for r in races {
        counts[r.index()] += 1;
    }
    counts
}
