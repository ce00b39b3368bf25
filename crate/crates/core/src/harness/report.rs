use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::PolicyKind;
use super::{csv_err, io_err, HarnessError};
use crate::envs::Termination;
use crate::stats::Summary;

/// One evaluation episode as stored in the per-episode CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub env_seed: u64,
    /// Terminal distance from the target, m.
    pub r_f: f64,
    /// Terminal speed, m/s.
    pub v_f: f64,
    pub glideslope: f64,
    /// Propellant consumed, kg.
    pub fuel: f64,
    pub cause: String,
}

pub fn write_episode_csv(path: &Path, records: &[EpisodeRecord]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in records {
        w.serialize(r).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_episode_csv(path: &Path) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let mut rd = csv::Reader::from_path(path).map_err(csv_err(path))?;
    rd.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

/// Monte Carlo statistics over evaluation episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsTable {
    pub episodes: usize,
    pub successes: usize,
    pub position: Summary,
    pub velocity: Summary,
    pub glideslope: Summary,
    pub fuel: Summary,
}

impl StatsTable {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let col = |f: fn(&EpisodeRecord) -> f64| Summary::of(&records.iter().map(f).collect::<Vec<_>>());
        Self {
            episodes: records.len(),
            successes: records.iter().filter(|r| r.cause == Termination::LandedSuccess.as_str()).count(),
            position: col(|r| r.r_f),
            velocity: col(|r| r.v_f),
            glideslope: col(|r| r.glideslope),
            fuel: col(|r| r.fuel),
        }
    }

    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.episodes.max(1) as f64
    }

    pub const CSV_HEADER: [&'static str; 6] = ["metric", "mean", "std", "min", "max", "count"];

    /// Rows of `metric,mean,std,min,max,count`.
    pub fn csv_rows(&self) -> Vec<[String; 6]> {
        [
            ("terminal_position_m", &self.position),
            ("terminal_velocity_mps", &self.velocity),
            ("glideslope", &self.glideslope),
            ("fuel_kg", &self.fuel),
        ]
        .into_iter()
        .map(|(name, s)| {
            [
                name.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
                s.min.to_string(),
                s.max.to_string(),
                s.count.to_string(),
            ]
        })
        .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
        w.write_record(Self::CSV_HEADER).map_err(csv_err(path))?;
        for row in self.csv_rows() {
            w.write_record(&row).map_err(csv_err(path))?;
        }
        w.write_record(["success_rate", &self.success_rate().to_string(), "", "", "", &self.episodes.to_string()])
            .map_err(csv_err(path))?;
        w.flush().map_err(io_err(path))
    }
}

/// One table per scenario, one row per policy.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub scenario: String,
    pub rows: Vec<(PolicyKind, StatsTable)>,
}

impl CompareReport {
    pub const CSV_HEADER: [&'static str; 15] = [
        "policy",
        "episodes",
        "success_rate",
        "r_f_mean",
        "r_f_std",
        "r_f_max",
        "v_f_mean",
        "v_f_std",
        "v_f_max",
        "gs_mean",
        "gs_std",
        "gs_min",
        "fuel_mean",
        "fuel_std",
        "fuel_max",
    ];

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|(p, t)| {
                let f = |x: f64| x.to_string();
                vec![
                    p.label(),
                    t.episodes.to_string(),
                    f(t.success_rate()),
                    f(t.position.mean),
                    f(t.position.std),
                    f(t.position.max),
                    f(t.velocity.mean),
                    f(t.velocity.std),
                    f(t.velocity.max),
                    f(t.glideslope.mean),
                    f(t.glideslope.std),
                    f(t.glideslope.min),
                    f(t.fuel.mean),
                    f(t.fuel.std),
                    f(t.fuel.max),
                ]
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
        w.write_record(Self::CSV_HEADER).map_err(csv_err(path))?;
        for row in self.csv_rows() {
            w.write_record(&row).map_err(csv_err(path))?;
        }
        w.flush().map_err(io_err(path))
    }

    /// Fixed-width text rendering.
    pub fn render(&self) -> String {
        let mut s = format!("{}\n", self.scenario);
        let _ = writeln!(
            s,
            "{:<14} {:>6} {:>7} | {:>9} {:>9} {:>9} | {:>8} {:>8} {:>8} | {:>8} {:>8} {:>8} | {:>7} {:>7} {:>7}",
            "policy", "n", "success", "r mean", "r std", "r max", "v mean", "v std", "v max", "gs mean", "gs std",
            "gs min", "fuel", "f std", "f max"
        );
        for (p, t) in &self.rows {
            let _ = writeln!(
                s,
                "{:<14} {:>6} {:>7.3} | {:>9.3} {:>9.3} {:>9.3} | {:>8.3} {:>8.3} {:>8.3} | {:>8.2} {:>8.2} {:>8.2} | {:>7.1} {:>7.1} {:>7.1}",
                p.label(),
                t.episodes,
                t.success_rate(),
                t.position.mean,
                t.position.std,
                t.position.max,
                t.velocity.mean,
                t.velocity.std,
                t.velocity.max,
                t.glideslope.mean,
                t.glideslope.std,
                t.glideslope.min,
                t.fuel.mean,
                t.fuel.std,
                t.fuel.max
            );
        }
        s
    }
}

/// Builds the comparison from the per-episode CSVs stored under
/// `out/<scenario>/<policy>/`, writes `compare.csv` next to them, and returns
/// the report. Rows are ordered DR/DV, MLP, then RNN by unroll length.
pub fn compare(out_dir: &Path, scenario: &str, policies: &[PolicyKind]) -> Result<CompareReport, HarnessError> {
    let mut ordered = policies.to_vec();
    ordered.sort();
    ordered.dedup();
    let base = out_dir.join(scenario);
    let mut rows = Vec::with_capacity(ordered.len());
    for p in ordered {
        let path: PathBuf = base.join(p.key()).join(super::EVAL_FILE);
        if !path.exists() {
            return Err(HarnessError::MissingRun {
                policy: p.key(),
                path,
            });
        }
        rows.push((p, StatsTable::from_records(&read_episode_csv(&path)?)));
    }
    let report = CompareReport {
        scenario: scenario.to_string(),
        rows,
    };
    std::fs::create_dir_all(&base).map_err(io_err(&base))?;
    report.write_csv(&base.join("compare.csv"))?;
    Ok(report)
}
