//! Summaries of simulation results and the plot-ready output tree.
//!
//! Layout written by [`emit_figures`] under the output directory:
//!
//! ```text
//! tables/      p-value tables per mode, SD distances, contingency table,
//!              chi-square and randomization results, correlations,
//!              exclusion reports, per-experiment test reports, distributions
//! densities/   kernel density curves per experiment (race, x, density)
//! figures/     observed vs expected totals, density markers, national shares
//! simulations/ replication matrices with JSON sidecars
//! ```

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::demography::{write_distributions, Mode, RaceDistribution};
use crate::engine::{ExperimentConfig, SimulationResult, Weighting};
use crate::ingest::Vintage;
use crate::inference::{self, bonferroni_family, empirical_pvalue_with, ChiSquareResult, InferenceError, TieRule};
use crate::linkage::{write_exclusions, Exclusion};
use crate::race::{Race, RaceCounts, RACE_COUNT};

/// Minimum number of KDE grid points.
pub const MIN_GRID_POINTS: usize = 512;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("nothing to report")]
    NothingToReport,
    #[error("simulation result has no replications")]
    EmptyResult,
    #[error("density estimate needs at least two samples")]
    TooFewSamples,
    #[error("density estimate needs samples with nonzero variance")]
    ZeroVariance,
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

/// Per-race column means rounded half away from zero.
pub fn expected_totals(result: &SimulationResult) -> Result<RaceCounts, ReportError> {
    if result.counts.is_empty() {
        return Err(ReportError::EmptyResult);
    }
    let n = result.counts.len() as f64;
    let mut out = [0u64; RACE_COUNT];
    for (i, slot) in out.iter_mut().enumerate() {
        let sum: u64 = result.counts.iter().map(|r| r[i]).sum();
        *slot = (sum as f64 / n).round() as u64;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub race: Race,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityEstimate {
    /// Trapezoidal integral of the density over its grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| (x[1] - x[0]) * (y[0] + y[1]) / 2.0)
            .sum()
    }

    /// Density at the grid point nearest `x`.
    pub fn value_near(&self, x: f64) -> f64 {
        let i = self.grid.partition_point(|&g| g < x).min(self.grid.len() - 1);
        let j = i.saturating_sub(1);
        if (self.grid[j] - x).abs() <= (self.grid[i] - x).abs() {
            self.density[j]
        } else {
            self.density[i]
        }
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (the default definition of most statistics environments).
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Silverman's rule `0.9 min(sd, IQR / 1.34) n^(-1/5)`; when the IQR is
/// zero the standard deviation alone is used.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<f64, ReportError> {
    if samples.len() < 2 {
        return Err(ReportError::TooFewSamples);
    }
    let (_, sd) = inference::mean_sd(samples)?;
    if sd == 0.0 {
        return Err(ReportError::ZeroVariance);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (samples.len() as f64).powf(-0.2))
}

/// Gaussian kernel density estimate on `points` (at least
/// [`MIN_GRID_POINTS`]) evenly spaced points over `[min - 3h, max + 3h]`.
pub fn kde(race: Race, samples: &[f64], points: usize) -> Result<DensityEstimate, ReportError> {
    let h = silverman_bandwidth(samples)?;
    let points = points.max(MIN_GRID_POINTS);
    let mut distinct: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for &s in samples {
        distinct.entry(s.to_bits()).or_insert((s, 0.0)).1 += 1.0;
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min) - 3.0 * h;
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 3.0 * h;
    let step = (hi - lo) / (points - 1) as f64;
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let density = grid
        .iter()
        .map(|&x| {
            norm * distinct
                .values()
                .map(|&(s, weight)| weight * (-0.5 * ((x - s) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    Ok(DensityEstimate {
        race,
        grid,
        density,
        bandwidth: h,
    })
}

/// One race's line of a [`TestReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaceTest {
    pub race: Race,
    pub observed: u64,
    pub expected: u64,
    pub mean: f64,
    pub sd: f64,
    pub n_greater: u64,
    pub n_less: u64,
    pub n_ties: u64,
    pub p_unbiased: f64,
    pub p_biased: f64,
    pub se_bound: f64,
    /// Absent when the resampled totals have zero spread.
    pub sd_distance: Option<f64>,
    pub raw_significant: bool,
    pub bonferroni_significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub experiment: String,
    pub n_replications: u64,
    pub alpha: f64,
    /// Number of tests the Bonferroni correction divides alpha by.
    pub family_size: usize,
    pub bonferroni_threshold: f64,
    pub ties: TieRule,
    pub races: Vec<RaceTest>,
}

impl TestReport {
    pub fn race(&self, race: Race) -> &RaceTest {
        &self.races[race.index()]
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(sink);
        w.write_record([
            "race",
            "observed",
            "expected",
            "mean",
            "sd",
            "n_greater",
            "n_less",
            "n_ties",
            "p_unbiased",
            "p_biased",
            "se_bound",
            "sd_distance",
            "raw_significant",
            "bonferroni_significant",
        ])?;
        for r in &self.races {
            w.write_record([
                r.race.label().to_string(),
                r.observed.to_string(),
                r.expected.to_string(),
                r.mean.to_string(),
                r.sd.to_string(),
                r.n_greater.to_string(),
                r.n_less.to_string(),
                r.n_ties.to_string(),
                r.p_unbiased.to_string(),
                r.p_biased.to_string(),
                r.se_bound.to_string(),
                r.sd_distance.map_or(String::new(), |d| d.to_string()),
                r.raw_significant.to_string(),
                r.bonferroni_significant.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Tests every race's observed total against the resampled totals.
pub fn build_test_report(
    experiment: &str,
    observed: &RaceCounts,
    result: &SimulationResult,
    alpha: f64,
    family_size: usize,
    ties: TieRule,
) -> Result<TestReport, ReportError> {
    let expected = expected_totals(result)?;
    let mut pvalues = Vec::with_capacity(RACE_COUNT);
    for race in Race::ALL {
        pvalues.push(empirical_pvalue_with(race, observed[race.index()], &result.column(race), ties)?);
    }
    let flags = bonferroni_family(&pvalues, alpha, family_size)?;
    let mut races = Vec::with_capacity(RACE_COUNT);
    for ((race, p), f) in Race::ALL.into_iter().zip(pvalues).zip(flags) {
        let column: Vec<f64> = result.column(race).iter().map(|&v| v as f64).collect();
        let (mean, sd) = if column.len() >= 2 {
            inference::mean_sd(&column)?
        } else {
            (column[0], 0.0)
        };
        let obs = observed[race.index()];
        races.push(RaceTest {
            race,
            observed: obs,
            expected: expected[race.index()],
            mean,
            sd,
            n_greater: p.n_greater,
            n_less: p.n_less,
            n_ties: p.n_ties,
            p_unbiased: p.p_unbiased,
            p_biased: p.p_biased,
            se_bound: p.se_bound,
            sd_distance: (sd > 0.0).then(|| (obs as f64 - mean).abs() / sd),
            raw_significant: f.raw,
            bonferroni_significant: f.bonferroni,
        });
    }
    Ok(TestReport {
        experiment: experiment.to_string(),
        n_replications: result.counts.len() as u64,
        alpha,
        family_size,
        bonferroni_threshold: alpha / family_size.max(1) as f64,
        ties,
        races,
    })
}

/// Density curves for every race whose resampled totals vary.
pub fn densities(result: &SimulationResult, points: usize) -> Vec<DensityEstimate> {
    Race::ALL
        .iter()
        .filter_map(|&race| {
            let column: Vec<f64> = result.column(race).iter().map(|&v| v as f64).collect();
            kde(race, &column, points).ok()
        })
        .collect()
}

/// Everything reported for one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub name: String,
    pub result: SimulationResult,
    pub observed: RaceCounts,
    pub report: TestReport,
    pub densities: Vec<DensityEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContingencyOutput {
    pub row_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub result: ChiSquareResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub x: String,
    pub y: String,
    pub n: usize,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExclusionSummary {
    pub mode: Mode,
    pub input: usize,
    pub kept: usize,
    pub kept_by_race: RaceCounts,
    pub excluded: Vec<Exclusion>,
}

/// National race shares of the population versus of the victims.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NationalShares {
    pub vintage: Vintage,
    pub population: [f64; RACE_COUNT],
    pub victims: [f64; RACE_COUNT],
}

#[derive(Debug, Clone, Default)]
pub struct ReportBundle {
    pub experiments: Vec<ExperimentOutput>,
    pub contingency: Option<ContingencyOutput>,
    pub correlations: Vec<Correlation>,
    pub exclusions: Vec<ExclusionSummary>,
    pub national: Vec<NationalShares>,
    pub distributions: Vec<(Mode, Vintage, Vec<RaceDistribution>)>,
}

impl ReportBundle {
    pub fn is_empty(&self) -> bool {
        self.experiments.is_empty() && self.contingency.is_none()
    }
}

struct Emitter {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl Emitter {
    fn file<F>(&mut self, rel: &str, body: F) -> Result<(), ReportError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.root.join(rel);
        let io = |source| ReportError::Io {
            path: path.clone(),
            source,
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io)?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(io)?);
        body(&mut w).and_then(|_| w.flush()).map_err(io)?;
        self.written.push(PathBuf::from(rel));
        Ok(())
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), ReportError> {
        let text = serde_json::to_string_pretty(value).map_err(|source| ReportError::Json {
            path: self.root.join(rel),
            source,
        })?;
        self.file(rel, |w| writeln!(w, "{text}"))
    }
}

fn csv_rows<W: Write>(sink: W, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Column label for a simulation within a mode's tables.
fn slot_label(config: &ExperimentConfig) -> Option<(Mode, String)> {
    match config {
        ExperimentConfig::Simulation(c) => {
            let mut label = format!("{}_{}", c.location, c.vintage.as_str());
            if c.location == crate::engine::Location::Random && c.weighting == Weighting::TotalEmployment {
                label.push_str("_total_employment");
            }
            Some((c.mode, label))
        }
        ExperimentConfig::Bodycam(_) => None,
    }
}

/// Writes the output tree under `out_dir` and returns the written files
/// relative to it, in write order.
pub fn emit_figures(bundle: &ReportBundle, out_dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    if bundle.is_empty() {
        return Err(ReportError::NothingToReport);
    }
    let mut e = Emitter {
        root: out_dir.to_path_buf(),
        written: Vec::new(),
    };

    for x in &bundle.experiments {
        let name = &x.name;
        e.file(&format!("simulations/{name}.csv"), |w| x.result.write_csv(w))?;
        e.json(&format!("simulations/{name}.json"), &x.result.sidecar_json())?;
        e.file(&format!("tables/reports/{name}.csv"), |w| x.report.write_csv(w))?;
        e.json(&format!("tables/reports/{name}.json"), &x.report)?;
        e.file(&format!("densities/{name}.csv"), |w| {
            let rows: Vec<Vec<String>> = x
                .densities
                .iter()
                .flat_map(|d| {
                    d.grid
                        .iter()
                        .zip(&d.density)
                        .map(|(g, v)| vec![d.race.label().to_string(), g.to_string(), v.to_string()])
                })
                .collect();
            csv_rows(w, &strings(&["race", "x", "density"]), &rows)
        })?;
        e.file(&format!("figures/density_markers_{name}.csv"), |w| {
            let rows: Vec<Vec<String>> = x
                .densities
                .iter()
                .map(|d| {
                    let obs = x.observed[d.race.index()];
                    vec![
                        d.race.label().to_string(),
                        obs.to_string(),
                        d.value_near(obs as f64).to_string(),
                        d.bandwidth.to_string(),
                    ]
                })
                .collect();
            csv_rows(w, &strings(&["race", "observed", "density_at_observed", "bandwidth"]), &rows)
        })?;
        e.file(&format!("figures/expected_vs_observed_{name}.csv"), |w| {
            let rows: Vec<Vec<String>> = x
                .report
                .races
                .iter()
                .map(|r| vec![r.race.label().to_string(), r.observed.to_string(), r.expected.to_string()])
                .collect();
            csv_rows(w, &strings(&["race", "observed", "expected"]), &rows)
        })?;
    }

    emit_pvalue_tables(&mut e, bundle)?;
    emit_sd_table(&mut e, bundle)?;
    emit_long_table(&mut e, bundle)?;

    if let Some(c) = &bundle.contingency {
        e.file("tables/contingency.csv", |w| {
            let mut header = strings(&["group", "kind"]);
            header.extend(Race::ALL.iter().map(|r| r.label().to_string()));
            header.push("total".into());
            let mut rows = Vec::new();
            for (i, label) in c.row_labels.iter().enumerate() {
                let mut obs = vec![label.clone(), "observed".into()];
                obs.extend(c.counts[i].iter().map(u64::to_string));
                obs.push(c.counts[i].iter().sum::<u64>().to_string());
                rows.push(obs);
                let mut exp = vec![label.clone(), "expected".into()];
                exp.extend(c.result.expected[i].iter().map(|v| format!("{v:.1}")));
                exp.push(c.counts[i].iter().sum::<u64>().to_string());
                rows.push(exp);
            }
            csv_rows(w, &header, &rows)
        })?;
        e.file("tables/chi_square.csv", |w| {
            csv_rows(
                w,
                &strings(&["statistic", "dof", "p_value"]),
                &[vec![
                    c.result.statistic.to_string(),
                    c.result.dof.to_string(),
                    c.result.p_value.to_string(),
                ]],
            )
        })?;
    }

    if !bundle.correlations.is_empty() {
        e.file("tables/correlations.csv", |w| {
            let rows: Vec<Vec<String>> = bundle
                .correlations
                .iter()
                .map(|c| vec![c.x.clone(), c.y.clone(), c.n.to_string(), c.r.to_string()])
                .collect();
            csv_rows(w, &strings(&["x", "y", "n", "r"]), &rows)
        })?;
    }

    if !bundle.exclusions.is_empty() {
        for s in &bundle.exclusions {
            e.file(&format!("tables/exclusions_{}.csv", s.mode), |w| write_exclusions(&s.excluded, w))?;
        }
        e.file("tables/exclusion_summary.csv", |w| {
            let mut rows = Vec::new();
            for s in &bundle.exclusions {
                let mut per: BTreeMap<(String, String), usize> = BTreeMap::new();
                for x in &s.excluded {
                    *per.entry((x.stage.to_string(), x.reason.clone())).or_default() += 1;
                }
                rows.push(vec![s.mode.to_string(), "input".into(), String::new(), s.input.to_string()]);
                for ((stage, reason), n) in per {
                    rows.push(vec![s.mode.to_string(), stage, reason, n.to_string()]);
                }
                rows.push(vec![s.mode.to_string(), "kept".into(), String::new(), s.kept.to_string()]);
                for race in Race::ALL {
                    rows.push(vec![
                        s.mode.to_string(),
                        "kept".into(),
                        race.label().to_string(),
                        s.kept_by_race[race.index()].to_string(),
                    ]);
                }
            }
            csv_rows(w, &strings(&["mode", "stage", "reason", "count"]), &rows)
        })?;
    }

    for n in &bundle.national {
        e.file(&format!("figures/national_shares_{}.csv", n.vintage.as_str()), |w| {
            let rows: Vec<Vec<String>> = Race::ALL
                .iter()
                .map(|r| {
                    vec![
                        r.label().to_string(),
                        n.population[r.index()].to_string(),
                        n.victims[r.index()].to_string(),
                    ]
                })
                .collect();
            csv_rows(w, &strings(&["race", "population_share", "victim_share"]), &rows)
        })?;
    }

    for (mode, vintage, dists) in &bundle.distributions {
        e.file(&format!("tables/distributions_{mode}_{}.csv", vintage.as_str()), |w| {
            write_distributions(dists, w)
        })?;
    }

    Ok(e.written)
}

/// One wide p-value table per mode (races by experiments), plus the
/// randomization test table.
fn emit_pvalue_tables(e: &mut Emitter, bundle: &ReportBundle) -> Result<(), ReportError> {
    for mode in [Mode::Population, Mode::Arrest] {
        let cols: Vec<&ExperimentOutput> = bundle
            .experiments
            .iter()
            .filter(|x| slot_label(&x.result.config).is_some_and(|(m, _)| m == mode))
            .collect();
        if cols.is_empty() {
            continue;
        }
        e.file(&format!("tables/pvalues_{mode}.csv"), |w| {
            let mut header = vec!["race".to_string()];
            header.extend(cols.iter().map(|x| x.name.clone()));
            let rows: Vec<Vec<String>> = Race::ALL
                .iter()
                .map(|r| {
                    let mut row = vec![r.label().to_string()];
                    row.extend(cols.iter().map(|x| x.report.race(*r).p_unbiased.to_string()));
                    row
                })
                .collect();
            csv_rows(w, &header, &rows)
        })?;
    }
    for x in &bundle.experiments {
        if matches!(x.result.config, ExperimentConfig::Bodycam(_)) {
            e.file(&format!("tables/randomization_{}.csv", x.name), |w| {
                let header: Vec<String> = std::iter::once("statistic".to_string())
                    .chain(Race::ALL.iter().map(|r| r.label().to_string()))
                    .collect();
                let mut p = vec!["p_value".to_string()];
                p.extend(x.report.races.iter().map(|r| r.p_unbiased.to_string()));
                let mut o = vec!["observed".to_string()];
                o.extend(x.report.races.iter().map(|r| r.observed.to_string()));
                csv_rows(w, &header, &[p, o])
            })?;
        }
    }
    Ok(())
}

/// SD distances with one row per (mode, race) and one column per
/// location/vintage slot.
fn emit_sd_table(e: &mut Emitter, bundle: &ReportBundle) -> Result<(), ReportError> {
    let mut slots: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(Mode, String), &ExperimentOutput> = BTreeMap::new();
    for x in &bundle.experiments {
        if let Some((mode, slot)) = slot_label(&x.result.config) {
            if !slots.contains(&slot) {
                slots.push(slot.clone());
            }
            cells.entry((mode, slot)).or_insert(x);
        }
    }
    if slots.is_empty() {
        return Ok(());
    }
    e.file("tables/sd_distances.csv", |w| {
        let mut header = strings(&["mode", "race"]);
        header.extend(slots.iter().cloned());
        let mut rows = Vec::new();
        for mode in [Mode::Population, Mode::Arrest] {
            if !cells.keys().any(|(m, _)| *m == mode) {
                continue;
            }
            for race in Race::ALL {
                let mut row = vec![mode.to_string(), race.label().to_string()];
                for slot in &slots {
                    row.push(
                        cells
                            .get(&(mode, slot.clone()))
                            .and_then(|x| x.report.race(race).sd_distance)
                            .map_or(String::new(), |d| format!("{d:.3}")),
                    );
                }
                rows.push(row);
            }
        }
        csv_rows(w, &header, &rows)
    })
}

/// Every experiment and race in one long table.
fn emit_long_table(e: &mut Emitter, bundle: &ReportBundle) -> Result<(), ReportError> {
    e.file("tables/tests.csv", |w| {
        let header = strings(&[
            "experiment",
            "race",
            "observed",
            "expected",
            "p_unbiased",
            "p_biased",
            "se_bound",
            "sd_distance",
            "raw_significant",
            "bonferroni_significant",
            "family_size",
        ]);
        let rows: Vec<Vec<String>> = bundle
            .experiments
            .iter()
            .flat_map(|x| {
                x.report.races.iter().map(move |r| {
                    vec![
                        x.name.clone(),
                        r.race.label().to_string(),
                        r.observed.to_string(),
                        r.expected.to_string(),
                        r.p_unbiased.to_string(),
                        r.p_biased.to_string(),
                        r.se_bound.to_string(),
                        r.sd_distance.map_or(String::new(), |d| d.to_string()),
                        r.raw_significant.to_string(),
                        r.bonferroni_significant.to_string(),
                        x.report.family_size.to_string(),
                    ]
                })
            })
            .collect();
        csv_rows(w, &header, &rows)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{BodycamConfig, ExperimentConfig};

    fn result(rows: Vec<RaceCounts>) -> SimulationResult {
        let n = rows.first().map_or(0, |r| r.iter().sum());
        SimulationResult {
            config: ExperimentConfig::Bodycam(BodycamConfig {
                replications: rows.len() as u64,
                draws_per_replication: n,
                reference_counts: [1; RACE_COUNT],
                master_seed: 0,
            }),
            counts: rows,
            n_incidents: n,
        }
    }

    #[test]
    fn expected_totals_round_half_away() {
        let r = result(vec![[7, 1, 0, 0, 0, 0], [7, 2, 0, 0, 0, 0]]);
        assert_eq!(expected_totals(&r).unwrap(), [7, 2, 0, 0, 0, 0]);
        assert!(matches!(expected_totals(&result(vec![])), Err(ReportError::EmptyResult)));
    }

    #[test]
    fn expected_totals_permutation_invariant() {
        let rows: Vec<RaceCounts> = (0..9).map(|i| [i, 9 - i, 0, 0, 0, 0]).collect();
        let mut rev = rows.clone();
        rev.reverse();
        assert_eq!(expected_totals(&result(rows)).unwrap(), expected_totals(&result(rev)).unwrap());
    }

    #[test]
    fn kde_normalized_and_symmetric() {
        let samples: Vec<f64> = (1..=50).flat_map(|k| [-(k as f64), k as f64]).collect();
        let d = kde(Race::White, &samples, 1001).unwrap();
        assert!((d.integral() - 1.0).abs() < 0.01, "{}", d.integral());
        let n = d.density.len();
        for i in 0..n / 2 {
            assert!((d.density[i] - d.density[n - 1 - i]).abs() < 1e-9);
        }
        assert!(d.density.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn kde_mode_near_cluster_center() {
        // Deterministic normal-shaped cluster at 100 with sd 10: quantiles
        // of N(100, 10) at (i + 0.5) / n. The oracle evaluates the kernel sum
        // directly at every grid point.
        use statrs::distribution::{ContinuousCDF, Normal};
        let normal = Normal::new(100.0, 10.0).unwrap();
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
        let d = kde(Race::Black, &samples, 512).unwrap();
        let h = d.bandwidth;
        let direct = |x: f64| {
            samples.iter().map(|s| (-0.5 * ((x - s) / h).powi(2)).exp()).sum::<f64>()
                / (n as f64 * h * (2.0 * std::f64::consts::PI).sqrt())
        };
        for (x, v) in d.grid.iter().zip(&d.density).step_by(37) {
            assert!((direct(*x) - v).abs() < 1e-12);
        }
        let argmax = (0..d.grid.len()).max_by(|&a, &b| d.density[a].total_cmp(&d.density[b])).unwrap();
        let step = d.grid[1] - d.grid[0];
        assert!((d.grid[argmax] - 100.0).abs() <= step, "mode {}", d.grid[argmax]);
        assert!((d.integral() - 1.0).abs() < 0.01);
    }

    #[test]
    fn bandwidth_rule() {
        // sd of 1..=5 is sqrt(2.5); IQR = 4 - 2 = 2, 2 / 1.34 < sqrt(2.5).
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        let want = 0.9 * (2.0f64 / 1.34) * 5f64.powf(-0.2);
        assert!((silverman_bandwidth(&s).unwrap() - want).abs() < 1e-12);
        // Zero IQR falls back to the standard deviation.
        let s = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        let sd = (7.0f64 / 64.0 * 8.0 / 7.0).sqrt();
        let want = 0.9 * sd * 8f64.powf(-0.2);
        assert!((silverman_bandwidth(&s).unwrap() - want).abs() < 1e-12);
        assert!(matches!(kde(Race::Asian, &[3.0, 3.0], 512), Err(ReportError::ZeroVariance)));
        assert!(matches!(kde(Race::Asian, &[3.0], 512), Err(ReportError::TooFewSamples)));
    }

    #[test]
    fn report_flags_and_distances() {
        let rows: Vec<RaceCounts> = (0..100u64).map(|i| [10 + i % 5, 5, 0, 0, 0, 0]).collect();
        let r = result(rows);
        let rep = build_test_report("x", &[30, 5, 0, 0, 0, 0], &r, 0.05, 6, TieRule::Exclude).unwrap();
        let w = rep.race(Race::White);
        assert_eq!(w.p_unbiased, 0.0);
        assert!(w.raw_significant && w.bonferroni_significant);
        assert!(w.sd_distance.unwrap() > 10.0);
        let b = rep.race(Race::Black);
        assert_eq!(b.sd_distance, None);
        assert_eq!(b.p_unbiased, 0.0);
        assert!((rep.bonferroni_threshold - 0.05 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn empty_bundle_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_figures(&ReportBundle::default(), dir.path()).unwrap_err();
        assert_eq!(err.to_string(), "nothing to report");
    }
}
