//! Joining the source tables into per-county profiles and resolving
//! incidents to counties.

mod canonical;
mod cities;
mod profiles;
mod subset;

use thiserror::Error;

pub use canonical::{canonicalize, CountyKey, RenameEntry, RenameTable};
pub use cities::{resolve_incidents, CityCountyMap, IncidentSet, Resolution, ResolvedIncident};
pub use profiles::{
    build_profiles, CountyProfile, LeeExclusion, LinkReport, ProfileTable, UnlinkedArrest, LEE_EXCLUSIONS,
};
pub use subset::{subset_incidents, write_exclusions, Exclusion, ExclusionStage, Subset};

#[derive(Debug, Error)]
pub enum LinkError {
    #[error("county name is empty")]
    EmptyName,
    #[error("unknown state {0:?}")]
    UnknownState(String),
    #[error("rename table: {0}")]
    RenameTable(String),
    #[error("rename target {name:?} is also a rename source")]
    RenameChain { name: String },
    #[error("{dataset}: rows {first:?} and {second:?} both canonicalize to {key}")]
    KeyCollision {
        dataset: &'static str,
        key: CountyKey,
        first: String,
        second: String,
    },
    #[error("city {city:?}, {state} is not in the city-to-county map")]
    UnmappedCity { city: String, state: String },
}
