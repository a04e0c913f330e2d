//! `epv` — expected possession value models for rugby league event data.
//!
//! Subcommands cover the full pipeline: ingest events, estimate zone
//! values on the 5m/10m grids or an aggregated system, build the
//! aggregated system, run reproducibility and z-score analyses, render
//! heatmaps, and generate synthetic seasons.
//!
//! Exit codes: 0 success, 1 analysis error, 2 input error.

mod svg;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use epv_core::aggregation::{build_aggregated_system, FullWidthRule};
use epv_core::analysis::{pooled_distribution, reproducibility_study, team_seasons, zscore_profile};
use epv_core::error::{Error, Result};
use epv_core::io as fio;
use epv_core::stats::MinimalEffectConfig;
use epv_core::synth::{generate_season, SynthConfig};
use epv_core::valuation::{estimate_epv, estimate_epv_by_play_index, season_returns, ValuationConfig};
use epv_core::{normalize, parse_events, segment_matches, GridZoneSystem, Orientation, ZoneSystem};

#[derive(Parser)]
#[command(name = "epv", version, about = "Expected possession value models for rugby league")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientArg {
    /// Input already oriented attacking toward y = 100.
    AttackingFrame,
    /// Input carries a per-row `direction` column.
    Raw,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an events CSV, writing the canonical play store.
    Ingest {
        #[arg(long)]
        events: PathBuf,
        #[arg(long, value_enum, default_value = "attacking-frame")]
        orient: OrientArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate zone values from a play store.
    Epv {
        #[arg(long)]
        plays: PathBuf,
        /// Zone system: 5, 10 or agg (with --system FILE).
        #[arg(long)]
        grid: String,
        /// Aggregated system JSON, required with --grid agg.
        #[arg(long)]
        system: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write a per-play-index value breakdown.
        #[arg(long)]
        per_play_out: Option<PathBuf>,
    },
    /// Build the aggregated zone system from 5m-grid match returns.
    Aggregate {
        #[arg(long)]
        plays: PathBuf,
        /// Smallest effect size of interest, in match-return units.
        #[arg(long, default_value_t = 1.0)]
        threshold: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Row groups below this share of plays become full-width zones.
        #[arg(long, default_value_t = 0.05)]
        max_row_share: f64,
        /// Force these 10m row groups (1-11) into full-width zones.
        #[arg(long, value_delimiter = ',')]
        force_full_width: Vec<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Between-match reproducibility of reward distributions.
    Repro {
        #[arg(long)]
        plays: PathBuf,
        /// Zone system: 5, 10 or a path to an aggregated system JSON.
        #[arg(long)]
        system: String,
        /// Window lengths, e.g. 6 or 1..10 (inclusive).
        #[arg(long, default_value = "1..10")]
        k: String,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        summary_out: Option<PathBuf>,
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Z-score zone-dependence profiles across teams.
    Zscore {
        #[arg(long)]
        plays: PathBuf,
        /// Zone system: 5, 10 or a path to an aggregated system JSON.
        #[arg(long)]
        system: String,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json_out: Option<PathBuf>,
        #[arg(long)]
        svg_out: Option<PathBuf>,
    },
    /// Render a model JSON as an SVG pitch heatmap.
    Heatmap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic season with ground truth.
    Synth {
        /// uniform, gradient, regimes or styles.
        #[arg(long, default_value = "uniform")]
        preset: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        teams: Option<usize>,
        #[arg(long)]
        matches: Option<usize>,
        #[arg(long)]
        possessions: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Export grid zone geometry as JSON.
    System {
        #[arg(long)]
        grid: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn load_possessions(plays_path: &Path) -> Result<Vec<epv_core::Possession>> {
    let plays = fio::read_plays(open(plays_path)?)?;
    segment_matches(&plays)
}

/// Accepts "5", "10", or a path to an aggregated system JSON.
fn resolve_system(spec: &str) -> Result<ZoneSystem> {
    match spec {
        "5" => Ok(ZoneSystem::grid5()),
        "10" => Ok(ZoneSystem::grid10()),
        path => {
            let file = fio::read_system(open(Path::new(path))?)?;
            Ok(ZoneSystem::Aggregated(file.to_system()?))
        }
    }
}

/// Parses "k" or "a..b" (inclusive).
fn parse_k_range(spec: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let invalid = || Error::Config(format!("invalid window spec '{spec}', expected k or a..b"));
    if let Some((a, b)) = spec.split_once("..") {
        let lo: usize = a.parse().map_err(|_| invalid())?;
        let hi: usize = b.parse().map_err(|_| invalid())?;
        if lo < 1 || hi < lo {
            return Err(invalid());
        }
        Ok(lo..=hi)
    } else {
        let k: usize = spec.parse().map_err(|_| invalid())?;
        if k < 1 {
            return Err(invalid());
        }
        Ok(k..=k)
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest { events, orient, out } => {
            let raw = parse_events(open(&events)?)?;
            let orientation = match orient {
                OrientArg::AttackingFrame => Orientation::AttackingFrame,
                OrientArg::Raw => Orientation::Raw,
            };
            let plays = normalize(&raw, orientation)?;
            let possessions = segment_matches(&plays)?;
            fio::write_plays(create(&out)?, &plays)?;
            println!(
                "ingested {} events -> {} plays, {} possessions",
                raw.len(),
                plays.len(),
                possessions.len()
            );
            Ok(())
        }

        Command::Epv {
            plays,
            grid,
            system,
            gamma,
            out,
            per_play_out,
        } => {
            let zone_system = match grid.as_str() {
                "agg" => {
                    let path = system.ok_or_else(|| {
                        Error::Config("--grid agg requires --system FILE".into())
                    })?;
                    let file = fio::read_system(open(&path)?)?;
                    ZoneSystem::Aggregated(file.to_system()?)
                }
                other => resolve_system(other)?,
            };
            let config = ValuationConfig::new(gamma)?;
            let possessions = load_possessions(&plays)?;
            let model = estimate_epv(&possessions, &zone_system, &config)?;
            fio::write_model(create(&out)?, &fio::ModelFile::new(&zone_system, &model))?;
            if let Some(path) = per_play_out {
                let breakdown = estimate_epv_by_play_index(&possessions, &zone_system, &config)?;
                let file = fio::PerPlayFile::new(&zone_system, gamma, &breakdown);
                let mut writer = create(&path)?;
                serde_json::to_writer(&mut writer, &file).map_err(Error::from)?;
                writeln!(writer)?;
            }
            println!(
                "estimated {} zones from {} possessions (gamma {})",
                model.zone_count(),
                possessions.len(),
                gamma
            );
            Ok(())
        }

        Command::Aggregate {
            plays,
            threshold,
            alpha,
            gamma,
            max_row_share,
            force_full_width,
            out,
        } => {
            let me_config = MinimalEffectConfig::new(threshold, alpha)?;
            let rule = FullWidthRule {
                max_play_share: max_row_share,
                force_rows: force_full_width,
                ..FullWidthRule::default()
            };
            let possessions = load_possessions(&plays)?;
            let grid = GridZoneSystem::grid5();
            let matrices = season_returns(
                &possessions,
                &ZoneSystem::grid5(),
                &ValuationConfig::new(gamma)?,
            )?;
            let system = build_aggregated_system(&matrices, &grid, &me_config, &rule)?;
            fio::write_system(create(&out)?, &fio::SystemFile::new(&system))?;
            println!(
                "aggregated {} zones ({} column groups x {} row groups, {} full-width)",
                system.zone_count(),
                system.column_groups().len(),
                system.row_groups().len(),
                system.full_width_rows().len()
            );
            Ok(())
        }

        Command::Repro {
            plays,
            system,
            k,
            gamma,
            out,
            summary_out,
            json_out,
        } => {
            let zone_system = resolve_system(&system)?;
            let k_range = parse_k_range(&k)?;
            let possessions = load_possessions(&plays)?;
            let matrices = season_returns(&possessions, &zone_system, &ValuationConfig::new(gamma)?)?;
            let seasons = team_seasons(matrices);
            let study = reproducibility_study(&seasons, &zone_system, k_range)?;
            for (team, match_id) in &study.excluded_matches {
                eprintln!("warning: excluded zero-return match {match_id} for team {team}");
            }
            for (team, k) in &study.skipped {
                eprintln!("warning: team {team} has too few matches for k = {k}");
            }
            fio::write_repro_csv(create(&out)?, &study)?;
            if let Some(path) = summary_out {
                fio::write_repro_summary_csv(create(&path)?, &study)?;
            }
            if let Some(path) = json_out {
                let mut writer = create(&path)?;
                serde_json::to_writer(&mut writer, &fio::ReproStudyJson::new(&study))
                    .map_err(Error::from)?;
                writeln!(writer)?;
            }
            for summary in &study.summaries {
                println!(
                    "k={}: non-infinity {:.1}% +- {:.1}%",
                    summary.k, summary.mean_pct_non_infinity, summary.sd_pct_non_infinity
                );
            }
            Ok(())
        }

        Command::Zscore {
            plays,
            system,
            gamma,
            out,
            json_out,
            svg_out,
        } => {
            let zone_system = resolve_system(&system)?;
            let possessions = load_possessions(&plays)?;
            let matrices = season_returns(&possessions, &zone_system, &ValuationConfig::new(gamma)?)?;
            let seasons = team_seasons(matrices);
            let distributions: Result<Vec<_>> = seasons
                .iter()
                .map(|season| {
                    let refs: Vec<&epv_core::MatchReturnMatrix> = season.matrices.iter().collect();
                    pooled_distribution(&refs, &zone_system)
                })
                .collect();
            let profile = zscore_profile(&distributions?)?;
            fio::write_zscore_csv(create(&out)?, &profile)?;
            if let Some(path) = json_out {
                let mut writer = create(&path)?;
                serde_json::to_writer(&mut writer, &profile).map_err(Error::from)?;
                writeln!(writer)?;
            }
            if let Some(path) = svg_out {
                let mut writer = create(&path)?;
                writer.write_all(svg::render_zscore(&profile).as_bytes())?;
            }
            println!(
                "z-scores for {} teams over {} zones",
                profile.teams.len(),
                profile.z.len()
            );
            Ok(())
        }

        Command::Heatmap { model, out } => {
            let file = fio::read_model(open(&model)?)?;
            let rendered = svg::render_heatmap(&file)?;
            let mut writer = create(&out)?;
            writer.write_all(rendered.as_bytes())?;
            println!("rendered {} zones", file.zones.len());
            Ok(())
        }

        Command::Synth {
            preset,
            seed,
            teams,
            matches,
            possessions,
            out,
            truth,
        } => {
            let mut config = match preset.as_str() {
                "uniform" => SynthConfig::uniform(seed),
                "gradient" => SynthConfig::gradient(seed),
                "regimes" => SynthConfig::regimes(seed),
                "styles" => SynthConfig::varied_styles(seed),
                other => {
                    return Err(Error::Config(format!(
                        "unknown preset '{other}' (uniform, gradient, regimes, styles)"
                    )))
                }
            };
            if let Some(n) = teams {
                config.n_teams = n;
                // Styles are sized per team; regenerate for the new count.
                if preset == "styles" {
                    config = config.with_varied_styles();
                }
            }
            if let Some(n) = matches {
                config.n_matches_per_team = n;
            }
            if let Some(n) = possessions {
                config.possessions_per_team_match = n;
            }
            let season = generate_season(&config)?;
            fio::write_events(create(&out)?, &season.events)?;
            if let Some(path) = truth {
                let mut writer = create(&path)?;
                serde_json::to_writer(&mut writer, &season.ground_truth).map_err(Error::from)?;
                writeln!(writer)?;
            }
            println!(
                "generated {} events, {} possessions",
                season.events.len(),
                season.ground_truth.possession_count
            );
            Ok(())
        }

        Command::System { grid, out } => {
            let grid_system = epv_core::build_grid(grid, &epv_core::Pitch::standard())?;
            let file = fio::GridSystemFile::new(&grid_system);
            let mut writer = create(&out)?;
            serde_json::to_writer(&mut writer, &file).map_err(Error::from)?;
            writeln!(writer)?;
            println!("exported {} zones", file.zone_count);
            Ok(())
        }
    }
}
