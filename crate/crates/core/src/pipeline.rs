//! End-to-end orchestration: ingest, link, simulate, test, report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::demography::{distribution, Mode, RaceDistribution};
use crate::engine::{run_bodycam, run_fixed, run_random, BodycamConfig, EngineError, Location, SimulationResult};
use crate::ingest::{sha256_hex, FixtureSet, IngestError, Vintage};
use crate::inference::{chi_square, pearson, InferenceError};
use crate::linkage::{
    build_profiles, resolve_incidents, subset_incidents, CityCountyMap, IncidentSet, LinkError, LinkReport,
    ProfileTable, RenameTable, Subset,
};
use crate::race::{tally, ArrestRace, CensusRace, Race, RaceCounts, RACE_COUNT};
use crate::report::{
    build_test_report, densities, emit_figures, ContingencyOutput, Correlation, ExclusionSummary, ExperimentOutput,
    NationalShares, ReportBundle, ReportError,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("ingest: {0}")]
    Ingest(#[from] IngestError),
    #[error("linkage: {0}")]
    Linkage(#[from] LinkError),
    #[error("simulation {experiment}: {source}")]
    Simulation { experiment: String, source: EngineError },
    #[error("inference: {0}")]
    Inference(#[from] InferenceError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
    #[error("output {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
}

impl PipelineError {
    pub fn is_missing_input(&self) -> bool {
        match self {
            PipelineError::Config(e) => e.is_missing_input(),
            PipelineError::Ingest(e) => e.is_missing_input(),
            _ => false,
        }
    }

    /// Invalid input data or configuration, as opposed to a runtime failure.
    pub fn is_schema_error(&self) -> bool {
        match self {
            PipelineError::Config(e) => !e.is_missing_input(),
            PipelineError::Ingest(e) => !e.is_missing_input() && !matches!(e, IngestError::Io { .. }),
            _ => false,
        }
    }
}

/// Fixtures after linkage and incident resolution.
#[derive(Debug, Clone)]
pub struct Linked {
    pub fixtures: FixtureSet,
    pub profiles: ProfileTable,
    pub link_report: LinkReport,
    pub incidents: IncidentSet,
    pub population: Subset,
    pub arrest: Subset,
}

impl Linked {
    pub fn subset(&self, mode: Mode) -> &Subset {
        match mode {
            Mode::Population => &self.population,
            Mode::Arrest => &self.arrest,
        }
    }

    /// Race tally of the incidents kept under `mode`.
    pub fn observed(&self, mode: Mode) -> RaceCounts {
        tally(self.subset(mode).kept.iter().filter_map(|r| r.incident.race))
    }

    pub fn exclusion_summary(&self, mode: Mode) -> ExclusionSummary {
        let s = self.subset(mode);
        ExclusionSummary {
            mode,
            input: self.incidents.len(),
            kept: s.kept.len(),
            kept_by_race: self.observed(mode),
            excluded: s.excluded.clone(),
        }
    }
}

/// Loads the fixtures in `dir` and links them. City draws for multi-county
/// cities use `master_seed`.
pub fn link(dir: &Path, master_seed: u64) -> Result<Linked, PipelineError> {
    let fixtures = FixtureSet::load(dir)?;
    link_fixtures(fixtures, master_seed)
}

pub fn link_fixtures(fixtures: FixtureSet, master_seed: u64) -> Result<Linked, PipelineError> {
    let renames = RenameTable::default();
    let (profiles, link_report) = build_profiles(
        &fixtures.dem2010,
        &fixtures.dem2016,
        &fixtures.lee,
        &fixtures.arrests,
        &fixtures.codes,
        &renames,
    )?;
    let cities = CityCountyMap::from_rows(&fixtures.cities, &renames)?;
    let incidents = resolve_incidents(&fixtures.shootings, &cities, &profiles, master_seed);
    let population = subset_incidents(&incidents, &profiles, Mode::Population);
    let arrest = subset_incidents(&incidents, &profiles, Mode::Arrest);
    Ok(Linked {
        fixtures,
        profiles,
        link_report,
        incidents,
        population,
        arrest,
    })
}

/// Race by body-camera table over every race-known incident, rows
/// (camera, no camera).
pub fn bodycam_table(fixtures: &FixtureSet) -> [RaceCounts; 2] {
    let mut t = [[0u64; RACE_COUNT]; 2];
    for inc in &fixtures.shootings {
        if let Some(race) = inc.race {
            t[usize::from(!inc.body_camera)][race.index()] += 1;
        }
    }
    t
}

/// Correlations of county officer counts with total employment (over
/// employment rows) and with each race's arrest total (over counties with
/// both).
pub fn correlations(linked: &Linked) -> Result<Vec<Correlation>, InferenceError> {
    let lee = &linked.fixtures.lee;
    let officers: Vec<f64> = lee.iter().map(|r| r.officers as f64).collect();
    let total: Vec<f64> = lee.iter().map(|r| (r.officers + r.civilians) as f64).collect();
    let mut out = vec![Correlation {
        x: "officers".into(),
        y: "total_employees".into(),
        n: officers.len(),
        r: pearson(&officers, &total)?,
    }];
    let pairs: Vec<(f64, [u64; 4])> = linked
        .profiles
        .iter()
        .filter_map(|p| Some((p.officers? as f64, p.arrests?)))
        .collect();
    let x: Vec<f64> = pairs.iter().map(|(o, _)| *o).collect();
    for race in ArrestRace::ALL {
        let y: Vec<f64> = pairs.iter().map(|(_, a)| a[race.index()] as f64).collect();
        out.push(Correlation {
            x: "officers".into(),
            y: format!("arrests_{}", race.harmonized().label()),
            n: x.len(),
            r: pearson(&x, &y)?,
        });
    }
    Ok(out)
}

/// National race shares of the population (Hispanic folded as in the
/// county laws) and of race-known victims.
pub fn national_shares(linked: &Linked, vintage: Vintage) -> NationalShares {
    let mut pop = [0u64; RACE_COUNT];
    let mut total = 0u64;
    for row in linked.fixtures.demography(vintage) {
        total += row.total_pop;
        for c in CensusRace::ALL {
            let i = c.index();
            pop[c.harmonized().index()] += row.pop_by_race[i] - row.hispanic_by_race[i];
            pop[Race::Hispanic.index()] += row.hispanic_by_race[i];
        }
    }
    let victims = tally(linked.fixtures.shootings.iter().filter_map(|s| s.race));
    let known: u64 = victims.iter().sum();
    let share = |c: u64, t: u64| if t == 0 { 0.0 } else { c as f64 / t as f64 };
    NationalShares {
        vintage,
        population: pop.map(|c| share(c, total)),
        victims: victims.map(|c| share(c, known)),
    }
}

/// Runs every configured experiment on linked data.
pub fn run_experiments(linked: &Linked, config: &RunConfig) -> Result<Vec<ExperimentOutput>, PipelineError> {
    let mut outputs = Vec::new();
    for sim in config.simulations() {
        let subset = linked.subset(sim.mode);
        let result = match sim.location {
            Location::Fixed => run_fixed(&subset.kept, &linked.profiles, &sim),
            Location::Random => run_random(subset.kept.len() as u64, &linked.profiles, &sim),
        }
        .map_err(|source| PipelineError::Simulation {
            experiment: sim.name.clone(),
            source,
        })?;
        let observed = linked.observed(sim.mode);
        outputs.push(finish(&sim.name, observed, result, config, Some(sim.mode))?);
    }
    if let (Some(spec), Some(seed)) = (&config.bodycam, config.bodycam_seed()) {
        let [camera, no_camera] = bodycam_table(&linked.fixtures);
        let bc = BodycamConfig {
            replications: spec.replications,
            draws_per_replication: spec.draws_per_replication.unwrap_or_else(|| camera.iter().sum()),
            reference_counts: no_camera,
            master_seed: seed,
        };
        let result = run_bodycam(&bc).map_err(|source| PipelineError::Simulation {
            experiment: "bodycam".into(),
            source,
        })?;
        outputs.push(finish("bodycam", camera, result, config, None)?);
    }
    Ok(outputs)
}

fn finish(
    name: &str,
    observed: RaceCounts,
    result: SimulationResult,
    config: &RunConfig,
    mode: Option<Mode>,
) -> Result<ExperimentOutput, PipelineError> {
    let report = build_test_report(name, &observed, &result, config.alpha, config.family_size(mode), config.ties)?;
    let densities = densities(&result, config.kde_points);
    Ok(ExperimentOutput {
        name: name.to_string(),
        result,
        observed,
        report,
        densities,
    })
}

/// Assembles every output of a run.
pub fn build_bundle(linked: &Linked, config: &RunConfig) -> Result<ReportBundle, PipelineError> {
    let experiments = run_experiments(linked, config)?;
    let contingency = if config.chi_square {
        let t = bodycam_table(&linked.fixtures);
        let counts: Vec<Vec<u64>> = t.iter().map(|r| r.to_vec()).collect();
        Some(ContingencyOutput {
            row_labels: vec!["body_camera".into(), "no_body_camera".into()],
            result: chi_square(&counts)?,
            counts,
        })
    } else {
        None
    };
    let correlations = if config.correlations {
        correlations(linked)?
    } else {
        Vec::new()
    };
    let mut distributions = Vec::new();
    if config.export_distributions {
        for mode in [Mode::Population, Mode::Arrest] {
            for vintage in Vintage::ALL {
                let d: Vec<RaceDistribution> = linked
                    .profiles
                    .iter()
                    .filter_map(|p| distribution(p, mode, vintage).ok())
                    .collect();
                distributions.push((mode, vintage, d));
            }
        }
    }
    Ok(ReportBundle {
        experiments,
        contingency,
        correlations,
        exclusions: vec![
            linked.exclusion_summary(Mode::Population),
            linked.exclusion_summary(Mode::Arrest),
        ],
        national: Vintage::ALL.iter().map(|&v| national_shares(linked, v)).collect(),
        distributions,
    })
}

#[derive(Debug, Clone, Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    datasets: &'a BTreeMap<String, String>,
    row_counts: BTreeMap<String, usize>,
    outputs: BTreeMap<String, String>,
}

/// What a finished run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub bundle: ReportBundle,
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Output {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Runs the configuration against `fixture_dir` and writes the output tree
/// to `out_dir`. Outputs are staged in a sibling directory and moved into
/// place only on success; on failure nothing is left behind. An existing
/// `out_dir` is replaced only if it is empty or holds a previous run.
pub fn run(config: &RunConfig, fixture_dir: &Path, out_dir: &Path) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    if out_dir.exists() {
        let reusable = out_dir.join("run.json").is_file()
            || fs::read_dir(out_dir).map_err(|e| output_error(out_dir, e))?.next().is_none();
        if !reusable {
            return Err(output_error(out_dir, "exists and does not hold a previous run"));
        }
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = config.threads {
            b = b.num_threads(n);
        }
        b.build().map_err(|e| output_error(out_dir, e))?
    };
    let linked = link(fixture_dir, config.master_seed)?;
    let bundle = pool.install(|| build_bundle(&linked, config))?;

    let name = out_dir
        .file_name()
        .map_or_else(|| "out".into(), |n| n.to_string_lossy().into_owned());
    let parent = out_dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| output_error(parent, e))?;
    let staging = parent.join(format!(".{name}.staging-{}", std::process::id()));
    let result = write_tree(&bundle, &linked, config, &staging);
    let files = match result {
        Ok(files) => files,
        Err(e) => {
            let _ = fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    if out_dir.exists() {
        fs::remove_dir_all(out_dir).map_err(|e| output_error(out_dir, e))?;
    }
    fs::rename(&staging, out_dir).map_err(|e| {
        let _ = fs::remove_dir_all(&staging);
        output_error(out_dir, e)
    })?;
    Ok(RunSummary {
        out_dir: out_dir.to_path_buf(),
        files,
        bundle,
    })
}

fn write_tree(
    bundle: &ReportBundle,
    linked: &Linked,
    config: &RunConfig,
    dir: &Path,
) -> Result<Vec<PathBuf>, PipelineError> {
    let mut files = emit_figures(bundle, dir)?;
    let link_path = dir.join("tables/link_report.json");
    let text = serde_json::to_string_pretty(&linked.link_report).map_err(|e| output_error(&link_path, e))?;
    fs::write(&link_path, text + "\n").map_err(|e| output_error(&link_path, e))?;
    files.push(PathBuf::from("tables/link_report.json"));

    let mut outputs = BTreeMap::new();
    for rel in &files {
        let path = dir.join(rel);
        let bytes = fs::read(&path).map_err(|e| output_error(&path, e))?;
        outputs.insert(rel.to_string_lossy().replace('\\', "/"), sha256_hex(&bytes));
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config,
        datasets: &linked.fixtures.checksums,
        row_counts: linked
            .fixtures
            .row_counts()
            .into_iter()
            .map(|(d, n)| (d.short_name().to_string(), n))
            .collect(),
        outputs,
    };
    let run_json = dir.join("run.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| output_error(&run_json, e))?;
    fs::write(&run_json, text + "\n").map_err(|e| output_error(&run_json, e))?;
    files.push(PathBuf::from("run.json"));
    Ok(files)
}
