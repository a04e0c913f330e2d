//! File formats: events CSV, plays CSV, model and system JSON, report CSVs.
//!
//! All writers are deterministic: identical inputs produce identical
//! bytes. Model JSON round-trips bit-exactly through read/write.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::aggregation::{AggregatedZoneSystem, AggZone};
use crate::analysis::{ReproStudy, ZScoreProfile};
use crate::error::{Error, Result};
use crate::geometry::{GridZoneSystem, Rect, ZoneId, ZoneSystem};
use crate::ingest::{Play, RawEvent, TerminalMarker};
use crate::valuation::EpvModel;

pub const EVENTS_HEADER: &str = "match_id,team_id,set_number,play_number,x,y,action,outcome";
pub const PLAYS_HEADER: &str = "match_id,team_id,order,x,y,marker";

/// Writes events in the canonical CSV schema.
pub fn write_events<W: Write>(mut writer: W, events: &[RawEvent]) -> Result<()> {
    writeln!(writer, "{EVENTS_HEADER}")?;
    for e in events {
        writeln!(
            writer,
            "{},{},{},{},{},{},{},{}",
            e.match_id,
            e.team_id,
            e.set_number,
            e.play_number,
            e.x,
            e.y,
            e.action.token(),
            e.outcome.map_or("", |o| o.token()),
        )?;
    }
    Ok(())
}

fn marker_token(marker: TerminalMarker) -> &'static str {
    match marker {
        TerminalMarker::None => "none",
        TerminalMarker::Error => "error",
        TerminalMarker::Handover => "handover",
        TerminalMarker::FieldKick => "field_kick",
        TerminalMarker::PenaltyGoalAttempt { scored: true } => "penalty_goal_made",
        TerminalMarker::PenaltyGoalAttempt { scored: false } => "penalty_goal_missed",
        TerminalMarker::DropGoalAttempt { scored: true } => "drop_goal_made",
        TerminalMarker::DropGoalAttempt { scored: false } => "drop_goal_missed",
        TerminalMarker::TryScored { converted: true } => "try_converted",
        TerminalMarker::TryScored { converted: false } => "try_unconverted",
    }
}

fn marker_from_token(token: &str, line: u64) -> Result<TerminalMarker> {
    Ok(match token {
        "none" => TerminalMarker::None,
        "error" => TerminalMarker::Error,
        "handover" => TerminalMarker::Handover,
        "field_kick" => TerminalMarker::FieldKick,
        "penalty_goal_made" => TerminalMarker::PenaltyGoalAttempt { scored: true },
        "penalty_goal_missed" => TerminalMarker::PenaltyGoalAttempt { scored: false },
        "drop_goal_made" => TerminalMarker::DropGoalAttempt { scored: true },
        "drop_goal_missed" => TerminalMarker::DropGoalAttempt { scored: false },
        "try_converted" => TerminalMarker::TryScored { converted: true },
        "try_unconverted" => TerminalMarker::TryScored { converted: false },
        _ => {
            return Err(Error::Parse {
                line,
                message: format!("unknown marker token '{token}'"),
            })
        }
    })
}

/// Writes the canonical play store.
pub fn write_plays<W: Write>(mut writer: W, plays: &[Play]) -> Result<()> {
    writeln!(writer, "{PLAYS_HEADER}")?;
    for p in plays {
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            p.match_id,
            p.team_id,
            p.order,
            p.x,
            p.y,
            marker_token(p.marker),
        )?;
    }
    Ok(())
}

/// Reads a play store written by [`write_plays`].
pub fn read_plays<R: Read>(reader: R) -> Result<Vec<Play>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let expected: Vec<&str> = PLAYS_HEADER.split(',').collect();
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected play store header '{PLAYS_HEADER}'"),
        });
    }
    let mut plays = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| Error::Parse {
                line,
                message: "row has too few fields".into(),
            })
        };
        let number = |i: usize, name: &str| -> Result<f64> {
            field(i)?.parse().map_err(|_| Error::Parse {
                line,
                message: format!("invalid {name}"),
            })
        };
        plays.push(Play {
            match_id: field(0)?.to_string(),
            team_id: field(1)?.to_string(),
            order: number(2, "order")? as u32,
            x: number(3, "x")?,
            y: number(4, "y")?,
            marker: marker_from_token(field(5)?, line)?,
        });
    }
    Ok(plays)
}

/// Zone-system identification carried inside model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemInfo {
    pub kind: String,
    pub cell_m: Option<u32>,
    pub zone_count: usize,
}

impl SystemInfo {
    pub fn of(system: &ZoneSystem) -> Self {
        match system {
            ZoneSystem::Grid(g) => SystemInfo {
                kind: "grid".into(),
                cell_m: Some(g.cell_length_m()),
                zone_count: g.zone_count(),
            },
            ZoneSystem::Aggregated(a) => SystemInfo {
                kind: "aggregated".into(),
                cell_m: None,
                zone_count: a.zone_count(),
            },
        }
    }
}

/// One zone of a serialised model: geometry plus estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneEntry {
    pub id: u32,
    pub bounds: Vec<Rect>,
    pub epv: Option<f64>,
    pub visits: u64,
}

/// Serialised EPV model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub system: SystemInfo,
    pub gamma: f64,
    pub zones: Vec<ZoneEntry>,
}

impl ModelFile {
    pub fn new(system: &ZoneSystem, model: &EpvModel) -> Self {
        let zones = (0..model.zone_count())
            .map(|idx| {
                let id = ZoneId::new(idx as u32 + 1);
                ZoneEntry {
                    id: id.get(),
                    bounds: system.zone_rects(id),
                    epv: model.values[idx],
                    visits: model.visits[idx],
                }
            })
            .collect();
        ModelFile {
            system: SystemInfo::of(system),
            gamma: model.gamma,
            zones,
        }
    }

    pub fn to_model(&self) -> EpvModel {
        EpvModel {
            gamma: self.gamma,
            values: self.zones.iter().map(|z| z.epv).collect(),
            visits: self.zones.iter().map(|z| z.visits).collect(),
        }
    }
}

pub fn write_model<W: Write>(mut writer: W, file: &ModelFile) -> Result<()> {
    serde_json::to_writer(&mut writer, file)?;
    writeln!(writer)?;
    Ok(())
}

pub fn read_model<R: Read>(reader: R) -> Result<ModelFile> {
    Ok(serde_json::from_reader(reader)?)
}

/// Serialised aggregated zone system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    pub source: SystemInfo,
    pub column_groups: Vec<Vec<u32>>,
    pub row_groups: Vec<Vec<u32>>,
    pub full_width_rows: Vec<u32>,
    pub zones: Vec<AggZone>,
}

impl SystemFile {
    pub fn new(system: &AggregatedZoneSystem) -> Self {
        SystemFile {
            source: SystemInfo {
                kind: "grid".into(),
                cell_m: Some(system.base_grid().cell_length_m()),
                zone_count: system.base_grid().zone_count(),
            },
            column_groups: system.column_groups().to_vec(),
            row_groups: system.row_groups().to_vec(),
            full_width_rows: system.full_width_rows().to_vec(),
            zones: system.zones().to_vec(),
        }
    }

    pub fn to_system(&self) -> Result<AggregatedZoneSystem> {
        AggregatedZoneSystem::from_parts(
            self.zones.clone(),
            self.column_groups.clone(),
            self.row_groups.clone(),
            self.full_width_rows.clone(),
        )
    }
}

pub fn write_system<W: Write>(mut writer: W, file: &SystemFile) -> Result<()> {
    serde_json::to_writer(&mut writer, file)?;
    writeln!(writer)?;
    Ok(())
}

pub fn read_system<R: Read>(reader: R) -> Result<SystemFile> {
    Ok(serde_json::from_reader(reader)?)
}

/// Grid geometry export: one rectangle per zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSystemFile {
    pub kind: String,
    pub cell_m: u32,
    pub zone_count: usize,
    pub zones: Vec<GridZoneEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridZoneEntry {
    pub id: u32,
    pub bounds: Rect,
}

impl GridSystemFile {
    pub fn new(grid: &GridZoneSystem) -> Self {
        GridSystemFile {
            kind: "grid".into(),
            cell_m: grid.cell_length_m(),
            zone_count: grid.zone_count(),
            zones: (1..=grid.zone_count() as u32)
                .map(|id| GridZoneEntry {
                    id,
                    bounds: grid.zone_bounds(ZoneId::new(id)),
                })
                .collect(),
        }
    }
}

/// Long-format reproducibility CSV: one row per comparison.
pub fn write_repro_csv<W: Write>(mut writer: W, study: &ReproStudy) -> Result<()> {
    writeln!(writer, "team_id,k,target_match,kl,is_infinite")?;
    for report in &study.reports {
        for c in &report.comparisons {
            writeln!(
                writer,
                "{},{},{},{},{}",
                report.team_id,
                report.k,
                c.target_match,
                c.kl,
                c.kl.is_infinite(),
            )?;
        }
    }
    Ok(())
}

/// Across-team summary CSV: one row per window length.
pub fn write_repro_summary_csv<W: Write>(mut writer: W, study: &ReproStudy) -> Result<()> {
    writeln!(writer, "k,mean_pct_non_infinity,sd_pct_non_infinity")?;
    for s in &study.summaries {
        writeln!(
            writer,
            "{},{},{}",
            s.k, s.mean_pct_non_infinity, s.sd_pct_non_infinity
        )?;
    }
    Ok(())
}

/// JSON mirror of the reproducibility study. Infinite divergences are
/// carried as `null` with an explicit flag, since JSON has no infinity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproStudyJson {
    pub reports: Vec<ReproReportJson>,
    pub summaries: Vec<LeagueSummaryJson>,
    pub excluded_matches: Vec<(String, String)>,
    pub skipped: Vec<(String, usize)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReproReportJson {
    pub team_id: String,
    pub k: usize,
    pub pct_non_infinity: f64,
    pub comparisons: Vec<ComparisonJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonJson {
    pub target_match: String,
    pub window: Vec<String>,
    pub kl: Option<f64>,
    pub is_infinite: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeagueSummaryJson {
    pub k: usize,
    pub mean_pct_non_infinity: f64,
    pub sd_pct_non_infinity: f64,
}

impl ReproStudyJson {
    pub fn new(study: &ReproStudy) -> Self {
        ReproStudyJson {
            reports: study
                .reports
                .iter()
                .map(|r| ReproReportJson {
                    team_id: r.team_id.clone(),
                    k: r.k,
                    pct_non_infinity: r.pct_non_infinity,
                    comparisons: r
                        .comparisons
                        .iter()
                        .map(|c| ComparisonJson {
                            target_match: c.target_match.clone(),
                            window: c.window.clone(),
                            kl: c.kl.is_finite().then_some(c.kl),
                            is_infinite: c.kl.is_infinite(),
                        })
                        .collect(),
                })
                .collect(),
            summaries: study
                .summaries
                .iter()
                .map(|s| LeagueSummaryJson {
                    k: s.k,
                    mean_pct_non_infinity: s.mean_pct_non_infinity,
                    sd_pct_non_infinity: s.sd_pct_non_infinity,
                })
                .collect(),
            excluded_matches: study.excluded_matches.clone(),
            skipped: study.skipped.clone(),
        }
    }
}

/// Per-play-index EPV breakdown file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerPlayFile {
    pub system: SystemInfo,
    pub gamma: f64,
    pub per_play: Vec<PerPlayEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerPlayEntry {
    pub t: usize,
    pub values: Vec<Option<f64>>,
    pub visits: Vec<u64>,
}

impl PerPlayFile {
    pub fn new(
        system: &ZoneSystem,
        gamma: f64,
        breakdown: &[crate::valuation::PlayIndexValues],
    ) -> Self {
        PerPlayFile {
            system: SystemInfo::of(system),
            gamma,
            per_play: breakdown
                .iter()
                .map(|b| PerPlayEntry {
                    t: b.t,
                    values: b.values.clone(),
                    visits: b.visits.clone(),
                })
                .collect(),
        }
    }
}

/// Long-format z-score CSV: one row per (team, zone).
pub fn write_zscore_csv<W: Write>(mut writer: W, profile: &ZScoreProfile) -> Result<()> {
    writeln!(writer, "team_id,zone,z")?;
    for (zone, row) in profile.z.iter().enumerate() {
        for (team_idx, z) in row.iter().enumerate() {
            writeln!(writer, "{},{},{}", profile.teams[team_idx], zone + 1, z)?;
        }
    }
    Ok(())
}
