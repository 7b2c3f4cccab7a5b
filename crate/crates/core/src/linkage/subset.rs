use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use super::{IncidentSet, ProfileTable, ResolvedIncident};
use crate::demography::Mode;
use crate::ingest::Vintage;

/// Pipeline stage at which an incident was dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionStage {
    Race,
    Resolution,
    Demography,
    Arrest,
}

impl ExclusionStage {
    /// Stages in the order they are applied.
    pub const ALL: [ExclusionStage; 4] = [
        ExclusionStage::Race,
        ExclusionStage::Resolution,
        ExclusionStage::Demography,
        ExclusionStage::Arrest,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionStage::Race => "race",
            ExclusionStage::Resolution => "resolution",
            ExclusionStage::Demography => "demography",
            ExclusionStage::Arrest => "arrest",
        }
    }
}

impl fmt::Display for ExclusionStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exclusion {
    pub incident_id: u32,
    pub stage: ExclusionStage,
    pub reason: String,
}

/// Incidents usable in one mode, plus everything dropped on the way.
#[derive(Debug, Clone, Default)]
pub struct Subset {
    pub kept: Vec<ResolvedIncident>,
    pub excluded: Vec<Exclusion>,
}

impl Subset {
    /// Exclusion counts per stage.
    pub fn stage_counts(&self) -> BTreeMap<ExclusionStage, usize> {
        let mut m = BTreeMap::new();
        for e in &self.excluded {
            *m.entry(e.stage).or_insert(0) += 1;
        }
        m
    }

    /// Exclusion counts per (stage, reason).
    pub fn reason_counts(&self) -> BTreeMap<(ExclusionStage, String), usize> {
        let mut m = BTreeMap::new();
        for e in &self.excluded {
            *m.entry((e.stage, e.reason.clone())).or_insert(0) += 1;
        }
        m
    }
}

/// Keeps the incidents usable under `mode`.
///
/// Population mode drops incidents with unknown race, unmapped cities, and
/// counties lacking a usable demography row in either vintage. Arrest mode
/// additionally drops counties without positive aggregated arrests. Every
/// input incident ends up in exactly one of `kept` or `excluded`.
pub fn subset_incidents(incidents: &IncidentSet, profiles: &ProfileTable, mode: Mode) -> Subset {
    let mut subset = Subset::default();
    let mut exclude = |id, stage, reason: &str| {
        subset.excluded.push(Exclusion {
            incident_id: id,
            stage,
            reason: reason.to_string(),
        })
    };
    // Resolved and unresolved incidents interleave in file order.
    let mut order: Vec<(u32, Option<&ResolvedIncident>)> = incidents
        .resolved
        .iter()
        .map(|r| (r.incident.id, Some(r)))
        .chain(incidents.unresolved.iter().map(|u| (u.id, None)))
        .collect();
    order.sort_by_key(|(id, _)| *id);
    let unresolved_race: BTreeMap<u32, bool> =
        incidents.unresolved.iter().map(|u| (u.id, u.race.is_some())).collect();

    let mut kept = Vec::new();
    for (id, resolved) in order {
        let Some(r) = resolved else {
            if unresolved_race[&id] {
                exclude(id, ExclusionStage::Resolution, "unmapped city");
            } else {
                exclude(id, ExclusionStage::Race, "race missing");
            }
            continue;
        };
        if r.incident.race.is_none() {
            exclude(id, ExclusionStage::Race, "race missing");
            continue;
        }
        let Some(profile) = profiles.get(&r.county) else {
            exclude(id, ExclusionStage::Demography, "county absent from demography");
            continue;
        };
        let usable = Vintage::ALL
            .iter()
            .all(|v| profile.demography(*v).is_some_and(|d| d.total_pop > 0));
        if !usable {
            exclude(id, ExclusionStage::Demography, "county lacks population in a vintage");
            continue;
        }
        if mode == Mode::Arrest && profile.total_arrests().unwrap_or(0) == 0 {
            exclude(id, ExclusionStage::Arrest, "county lacks arrest data");
            continue;
        }
        kept.push(r.clone());
    }
    subset.kept = kept;
    subset
}

/// Writes the exclusion report as `incident_id,stage,reason`.
pub fn write_exclusions<W: Write>(excluded: &[Exclusion], sink: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["incident_id", "stage", "reason"])?;
    for e in excluded {
        w.write_record([e.incident_id.to_string().as_str(), e.stage.as_str(), &e.reason])?;
    }
    w.flush()
}
