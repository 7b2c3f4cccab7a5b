//! Subcommands of the `resample` binary.
//!
//! Exit codes: 0 success, 2 missing input file, 3 invalid input or
//! configuration, 4 any other failure. Command-line usage errors are reported
//! by the argument parser with its own exit code 2.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use resample_core::config::{BonferroniFamily, RunConfig};
use resample_core::demography::Mode;
use resample_core::ingest::FixtureSet;
use resample_core::linkage::{write_exclusions, ExclusionStage};
use resample_core::pipeline::{self, Linked, PipelineError, RunSummary};
use resample_core::race::{Race, RaceCounts};

pub const EXIT_OK: u8 = 0;
pub const EXIT_MISSING_INPUT: u8 = 2;
pub const EXIT_SCHEMA: u8 = 3;
pub const EXIT_RUNTIME: u8 = 4;

const DEFAULT_FIXTURES: &str = "fixtures";
const DEFAULT_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "resample", version, about = "County-level resampling tests of victim race")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and link every input table and print row counts.
    Ingest {
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Print per-stage exclusion counts for both modes.
    Exclusions {
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Also write exclusions_<mode>.csv under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for multi-county city resolution.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run all configured experiments and write the output tree.
    Run {
        /// TOML run configuration, or a previous run.json. Defaults to the
        /// full replication set.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; outputs do not depend on this.
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Pipeline(PipelineError),
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(e) if e.is_missing_input() => EXIT_MISSING_INPUT,
            CliError::Pipeline(e) if e.is_schema_error() => EXIT_SCHEMA,
            _ => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Pipeline(e) => e.fmt(f),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

impl<E: Into<PipelineError>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Pipeline(e.into())
    }
}

fn stdout_error(e: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Ingest { fixtures } => ingest(&fixtures.unwrap_or_else(|| DEFAULT_FIXTURES.into()), out),
        Command::Exclusions { fixtures, out: dir, seed } => exclusions(
            &fixtures.unwrap_or_else(|| DEFAULT_FIXTURES.into()),
            dir.as_deref(),
            seed.unwrap_or(resample_core::config::DEFAULT_SEED),
            out,
        ),
        Command::Run {
            config,
            fixtures,
            out: dir,
            seed,
            threads,
        } => {
            let mut cfg = match &config {
                Some(path) => RunConfig::load(path)?,
                None => RunConfig::replication_default(),
            };
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if threads.is_some() {
                cfg.threads = threads;
            }
            let fixture_dir = fixtures
                .or_else(|| cfg.fixture_dir.clone())
                .unwrap_or_else(|| DEFAULT_FIXTURES.into());
            let out_dir = dir.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| DEFAULT_OUT.into());
            let summary = pipeline::run(&cfg, &fixture_dir, &out_dir)?;
            print_summary(&summary, &cfg, out).map_err(stdout_error)
        }
    }
}

fn ingest(dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let fixtures = FixtureSet::load(dir)?;
    let counts = fixtures.row_counts();
    let linked = pipeline::link_fixtures(fixtures, resample_core::config::DEFAULT_SEED)?;
    let w = |out: &mut dyn Write| -> io::Result<()> {
        for (ds, n) in &counts {
            writeln!(out, "{ds}: {n} rows")?;
        }
        let r = &linked.link_report;
        writeln!(out, "counties linked: {}", linked.profiles.len())?;
        writeln!(out, "employee rows excluded: {}", r.lee_excluded.len())?;
        writeln!(out, "employee rows without demography: {}", r.lee_unlinked.len())?;
        writeln!(out, "employee rows merged: {}", r.lee_merged.len())?;
        writeln!(out, "arrest codes unlinked: {}", r.arrests_unlinked.len())?;
        writeln!(out, "code rows without demography: {}", r.codes_unlinked.len())?;
        writeln!(out, "incidents in unmapped cities: {}", linked.incidents.unresolved.len())?;
        Ok(())
    };
    w(out).map_err(stdout_error)
}

fn race_list(counts: &RaceCounts) -> String {
    Race::ALL
        .iter()
        .map(|r| format!("{} {}", r.label(), counts[r.index()]))
        .collect::<Vec<_>>()
        .join(", ")
}

fn exclusions(dir: &Path, write_to: Option<&Path>, seed: u64, out: &mut dyn Write) -> Result<(), CliError> {
    let linked = pipeline::link(dir, seed)?;
    print_exclusions(&linked, out).map_err(stdout_error)?;
    if let Some(target) = write_to {
        fs::create_dir_all(target).map_err(|source| CliError::Io {
            path: target.to_path_buf(),
            source,
        })?;
        for mode in [Mode::Population, Mode::Arrest] {
            let path = target.join(format!("exclusions_{mode}.csv"));
            let file = fs::File::create(&path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            write_exclusions(&linked.subset(mode).excluded, file).map_err(|source| CliError::Io { path, source })?;
        }
    }
    Ok(())
}

fn print_exclusions(linked: &Linked, out: &mut dyn Write) -> io::Result<()> {
    for mode in [Mode::Population, Mode::Arrest] {
        let summary = linked.exclusion_summary(mode);
        let stages = linked.subset(mode).stage_counts();
        writeln!(out, "{mode} mode: {} incidents", summary.input)?;
        for stage in ExclusionStage::ALL {
            writeln!(out, "  excluded at {:<11} {:>5}", stage.as_str(), stages.get(&stage).copied().unwrap_or(0))?;
        }
        writeln!(out, "  kept {:>23}  ({})", summary.kept, race_list(&summary.kept_by_race))?;
    }
    Ok(())
}

fn print_summary(summary: &RunSummary, cfg: &RunConfig, out: &mut dyn Write) -> io::Result<()> {
    let bundle = &summary.bundle;
    write!(out, "{:<34} {:>6}", "experiment", "N")?;
    for r in Race::ALL {
        write!(out, " {:>8}", r.label())?;
    }
    writeln!(out)?;
    for exp in &bundle.experiments {
        write!(out, "{:<34} {:>6}", exp.name, exp.report.n_replications)?;
        for t in &exp.report.races {
            let mark = if t.bonferroni_significant {
                "**"
            } else if t.raw_significant {
                "*"
            } else {
                ""
            };
            write!(out, " {:>8}", format!("{:.3}{mark}", t.p_unbiased))?;
        }
        writeln!(out)?;
    }
    if let Some(c) = &bundle.contingency {
        writeln!(
            out,
            "chi-square {}: statistic {:.3}, dof {}, p {:.3}",
            c.row_labels.join(" vs "),
            c.result.statistic,
            c.result.dof,
            c.result.p_value
        )?;
    }
    for c in &bundle.correlations {
        writeln!(out, "correlation {} ~ {}: r = {:.3} (n = {})", c.x, c.y, c.r, c.n)?;
    }
    let family = match cfg.bonferroni {
        BonferroniFamily::Experiment => "per-experiment",
        BonferroniFamily::Mode => "per-mode",
    };
    writeln!(out, "* p < {}; ** significant after {family} Bonferroni correction", cfg.alpha)?;
    writeln!(out, "wrote {} files to {}", summary.files.len(), summary.out_dir.display())
}
