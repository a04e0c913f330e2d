//! Expected possession value (EPV) models for rugby league event data.
//!
//! Builds zone-value models over three zone systems (5m grid, 10m grid,
//! and a data-driven aggregated partition), measures between-match
//! reproducibility of attacking reward distributions with KL divergence,
//! and profiles team zone-dependence with z-scores. A seeded synthetic
//! season generator with closed-form zone values backs the test suite.
//!
//! Data-parallel inner loops use rayon when the default `parallel`
//! feature is enabled; disabling it gives a dependency-free sequential
//! build with bit-identical results.

pub mod aggregation;
pub mod analysis;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod io;
pub mod possession;
pub mod stats;
pub mod synth;
pub mod valuation;

pub use error::{Error, Result};
pub use geometry::{build_grid, mirror_class, GridZoneSystem, Pitch, ZoneId, ZoneSystem};
pub use ingest::{normalize, parse_events, Orientation, Play, RawEvent, TerminalMarker};
pub use possession::{assign_reward, segment, segment_matches, Possession};
pub use valuation::{
    estimate_epv, estimate_epv_sequential, match_returns, play_return, season_returns, EpvModel,
    MatchReturnMatrix, ValuationConfig,
};
pub use aggregation::{
    aggregated_values, build_aggregated_system, fold_and_pair, marginal_returns, merge_scan,
    AggregatedZoneSystem, FullWidthRule,
};
pub use analysis::{
    kl_divergence, pooled_distribution, reproducibility_study, reward_distribution, team_seasons,
    zscore_profile, ReproStudy, RewardDistribution, TeamSeason, ZScoreProfile,
};
pub use stats::{minimal_effect_outcome, minimal_effect_separate, MinimalEffectConfig};
pub use synth::{analytic_epv, generate_possessions, generate_season, GroundTruth, SynthConfig};
