//! Deterministic synthetic seasons with known ground truth.
//!
//! The generator is a first-order Markov walk over 5m-grid zones: each
//! possession draws its length from a categorical distribution, walks
//! zones sampled from team-weighted zone preferences, and ends with an
//! absorbing scoring event decided by the final zone. Because the zone
//! draws are independent of history, the expected value of every zone has
//! a closed form, which serves as the oracle for the estimators.
//!
//! Randomness comes from ChaCha8 (rand_chacha), seeded from the config
//! seed with one stream per match, so output is reproducible across
//! platforms and independent of generation order.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GridZoneSystem;
use crate::ingest::{normalize, Action, Orientation, OutcomeToken, RawEvent};
use crate::possession::{segment, Possession};

/// Maximum possession length (plays).
pub const MAX_POSSESSION_LENGTH: usize = 26;

/// Truncated-geometric play-count distribution with median 4 over 1..=26.
pub fn default_length_probs() -> Vec<f64> {
    let q: f64 = 0.81;
    (0..MAX_POSSESSION_LENGTH)
        .map(|k| (1.0 - q) * q.powi(k as i32))
        .collect()
}

/// Generator configuration. Zone preferences factorise into folded column
/// class weights, 10m row group weights and per-team style multipliers,
/// which keeps regime structure and left-right symmetry exact.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    /// Must be even so every team plays every round.
    pub n_teams: usize,
    pub n_matches_per_team: usize,
    pub possessions_per_team_match: usize,
    /// Categorical over play counts 1..=len.
    pub possession_length_probs: Vec<f64>,
    /// Weights over the 7 folded column classes (outermost first).
    pub column_class_weights: Vec<f64>,
    /// Weights over the 11 10m row groups (own try line first).
    pub row_group_weights: Vec<f64>,
    /// Per-team multipliers over column classes; empty means all ones.
    pub team_column_style: Vec<Vec<f64>>,
    /// Per-team multipliers over row groups; empty means all ones.
    pub team_row_style: Vec<Vec<f64>>,
    /// Probability a possession ending in a given 5m zone scores a try.
    pub try_prob: Vec<f64>,
    pub conversion_prob: f64,
    pub penalty_attempt_prob: f64,
    pub penalty_success_prob: f64,
    pub drop_attempt_prob: f64,
    pub drop_success_prob: f64,
    /// Declared regime counts; must match the runs of equal weights.
    pub column_regimes: usize,
    pub row_regimes: usize,
}

impl SynthConfig {
    /// Uniform zone preferences and a flat try probability: every zone's
    /// analytic EPV is identical.
    pub fn uniform(seed: u64) -> Self {
        SynthConfig {
            seed,
            n_teams: 12,
            n_matches_per_team: 29,
            possessions_per_team_match: 28,
            possession_length_probs: default_length_probs(),
            column_class_weights: vec![1.0 / 7.0; 7],
            row_group_weights: vec![1.0 / 11.0; 11],
            team_column_style: Vec::new(),
            team_row_style: Vec::new(),
            try_prob: vec![0.16; 308],
            conversion_prob: 0.74,
            penalty_attempt_prob: 0.03,
            penalty_success_prob: 0.88,
            drop_attempt_prob: 0.01,
            drop_success_prob: 0.47,
            column_regimes: 1,
            row_regimes: 1,
        }
    }

    /// Try probability rising linearly toward the opposition try line, so
    /// zone value increases with attacking progress.
    pub fn gradient(seed: u64) -> Self {
        let grid = GridZoneSystem::grid5();
        let n_rows = grid.n_rows() as f64;
        let try_prob = (0..grid.zone_count())
            .map(|idx| {
                let row = idx / grid.n_columns();
                0.01 + 0.69 * (row as f64 + 0.5) / n_rows
            })
            .collect();
        SynthConfig {
            try_prob,
            ..SynthConfig::uniform(seed)
        }
    }

    /// Blocky zone-preference weights with 6 column regimes and 4 row
    /// regimes; adjacent regime levels differ by several match-return
    /// units at the default scale, and the bottom row regime draws under
    /// 5% of plays.
    pub fn regimes(seed: u64) -> Self {
        SynthConfig {
            column_class_weights: vec![0.05, 0.05, 0.09, 0.13, 0.17, 0.21, 0.30],
            row_group_weights: vec![
                0.02, 0.02, 0.06, 0.06, 0.06, 0.11, 0.11, 0.11, 0.15, 0.15, 0.15,
            ],
            column_regimes: 6,
            row_regimes: 4,
            ..SynthConfig::uniform(seed)
        }
    }

    /// Uniform base weights with distinct per-team styles, for
    /// between-team analyses.
    pub fn varied_styles(seed: u64) -> Self {
        SynthConfig::uniform(seed).with_varied_styles()
    }

    /// Replaces the team styles with deterministic distinct profiles for
    /// the current team count.
    pub fn with_varied_styles(mut self) -> Self {
        self.team_column_style = (0..self.n_teams)
            .map(|team| {
                (0..7)
                    .map(|class| 1.0 + 0.5 * (((team + 1) * (class + 3)) as f64).sin())
                    .collect()
            })
            .collect();
        self.team_row_style = (0..self.n_teams)
            .map(|team| {
                (0..11)
                    .map(|group| 1.0 + 0.4 * (((team + 2) * (group + 5)) as f64).cos())
                    .collect()
            })
            .collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_teams < 2 || self.n_teams % 2 != 0 {
            return fail(format!("n_teams must be even and >= 2, got {}", self.n_teams));
        }
        if self.n_matches_per_team == 0 || self.possessions_per_team_match == 0 {
            return fail("matches and possessions per team-match must be positive".into());
        }
        if self.possession_length_probs.is_empty()
            || self.possession_length_probs.len() > MAX_POSSESSION_LENGTH
            || self.possession_length_probs.iter().any(|p| *p < 0.0)
            || self.possession_length_probs.iter().sum::<f64>() <= 0.0
        {
            return fail("possession length distribution is invalid".into());
        }
        if self.column_class_weights.len() != 7
            || self.row_group_weights.len() != 11
            || self.column_class_weights.iter().any(|w| *w <= 0.0)
            || self.row_group_weights.iter().any(|w| *w <= 0.0)
        {
            return fail("zone weights must be positive, 7 classes and 11 row groups".into());
        }
        for styles in [&self.team_column_style, &self.team_row_style] {
            if !styles.is_empty() && styles.len() != self.n_teams {
                return fail("style lists must be empty or one entry per team".into());
            }
            if styles.iter().flatten().any(|s| *s <= 0.0) {
                return fail("style multipliers must be positive".into());
            }
        }
        if self.team_column_style.iter().any(|s| s.len() != 7)
            || self.team_row_style.iter().any(|s| s.len() != 11)
        {
            return fail("style entries must cover 7 classes / 11 row groups".into());
        }
        if self.try_prob.len() != 308
            || self.try_prob.iter().any(|p| !(0.0..=1.0).contains(p))
        {
            return fail("try_prob must give one probability per 5m zone".into());
        }
        for (name, p) in [
            ("conversion_prob", self.conversion_prob),
            ("penalty_attempt_prob", self.penalty_attempt_prob),
            ("penalty_success_prob", self.penalty_success_prob),
            ("drop_attempt_prob", self.drop_attempt_prob),
            ("drop_success_prob", self.drop_success_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if weight_runs(&self.column_class_weights).len() != self.column_regimes {
            return fail("column_regimes does not match the weight structure".into());
        }
        if weight_runs(&self.row_group_weights).len() != self.row_regimes {
            return fail("row_regimes does not match the weight structure".into());
        }
        Ok(())
    }

    fn normalized_lengths(&self) -> Vec<f64> {
        let total: f64 = self.possession_length_probs.iter().sum();
        self.possession_length_probs.iter().map(|p| p / total).collect()
    }

    /// Expected possession length.
    pub fn expected_length(&self) -> f64 {
        self.normalized_lengths()
            .iter()
            .enumerate()
            .map(|(k, p)| (k + 1) as f64 * p)
            .sum()
    }

    /// Normalised zone preference distribution for one team.
    fn zone_weights(&self, team: usize) -> Vec<f64> {
        let grid = GridZoneSystem::grid5();
        let n_cols = grid.n_columns();
        let ones7 = vec![1.0; 7];
        let ones11 = vec![1.0; 11];
        let col_style = self.team_column_style.get(team).unwrap_or(&ones7);
        let row_style = self.team_row_style.get(team).unwrap_or(&ones11);
        let mut weights = Vec::with_capacity(grid.zone_count());
        for row in 0..grid.n_rows() {
            let group = row / 2;
            for col in 0..n_cols {
                let class = col.min(n_cols - 1 - col);
                // Each class and row group splits evenly over its two members.
                let w = self.column_class_weights[class] / 2.0
                    * col_style[class]
                    * (self.row_group_weights[group] / 2.0)
                    * row_style[group];
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        weights
    }

    /// Expected reward of a possession that ends in `zone`.
    fn end_reward_mean(&self, zone: usize) -> f64 {
        let tp = self.try_prob[zone];
        let try_points = self.conversion_prob * 6.0 + (1.0 - self.conversion_prob) * 4.0;
        let pa = self.penalty_attempt_prob;
        let da = self.drop_attempt_prob;
        tp * try_points
            + (1.0 - tp)
                * (pa * self.penalty_success_prob * 2.0
                    + (1.0 - pa) * da * self.drop_success_prob)
    }
}

/// Maximal runs of exactly equal adjacent weights, as 1-based index sets.
pub fn weight_runs(weights: &[f64]) -> Vec<Vec<u32>> {
    let mut runs: Vec<Vec<u32>> = Vec::new();
    for (i, w) in weights.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if weights[(run[run.len() - 1] - 1) as usize] == *w => {
                run.push(i as u32 + 1)
            }
            _ => runs.push(vec![i as u32 + 1]),
        }
    }
    runs
}

/// Closed-form expected zone values implied by the generator.
///
/// For a visit to zone `s`, the estimator's target is
/// `(r_end(s) + R_bar * S_gamma) / E[T]` per team, mixed across teams in
/// proportion to their visit rates, where `S_gamma` is the expected
/// discounted count of later plays and `R_bar` the preference-weighted
/// mean end reward.
pub fn analytic_epv(config: &SynthConfig, gamma: f64) -> Result<Vec<f64>> {
    config.validate()?;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Config(format!("gamma must be in (0, 1], got {gamma}")));
    }
    let lengths = config.normalized_lengths();
    let expected_length = config.expected_length();
    // Tail probabilities P(T >= d + 1) weighted by gamma^d.
    let mut s_gamma = 0.0;
    for d in 1..lengths.len() {
        let tail: f64 = lengths[d..].iter().sum();
        s_gamma += gamma.powi(d as i32) * tail;
    }

    let zone_count = config.try_prob.len();
    let r_end: Vec<f64> = (0..zone_count).map(|z| config.end_reward_mean(z)).collect();
    let team_weights: Vec<Vec<f64>> = (0..config.n_teams)
        .map(|team| config.zone_weights(team))
        .collect();
    let r_bar: Vec<f64> = team_weights
        .iter()
        .map(|pi| pi.iter().zip(&r_end).map(|(p, r)| p * r).sum())
        .collect();

    Ok((0..zone_count)
        .map(|z| {
            let visit_rate: f64 = team_weights.iter().map(|pi| pi[z]).sum();
            let mixed: f64 = team_weights
                .iter()
                .zip(&r_bar)
                .map(|(pi, rb)| pi[z] * rb)
                .sum();
            (r_end[z] * visit_rate + s_gamma * mixed) / (expected_length * visit_rate)
        })
        .collect())
}

/// What the generator knows to be true about its output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub possession_count: usize,
    pub play_count: usize,
    /// Closed-form zone values at gamma = 1, per 5m zone.
    pub analytic_epv: Vec<f64>,
    /// True folded-column regime partition (1-based class indexes).
    pub column_partition: Vec<Vec<u32>>,
    /// True 10m row-group regime partition (1-based group indexes).
    pub row_partition: Vec<Vec<u32>>,
}

/// A generated season: canonical events plus ground truth.
#[derive(Debug, Clone)]
pub struct SynthSeason {
    pub events: Vec<RawEvent>,
    pub ground_truth: GroundTruth,
}

/// Round-robin pairings via the circle method; every team plays once per
/// round.
fn schedule(n_teams: usize, rounds: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n_teams).collect();
    let mut pairs = Vec::with_capacity(rounds * n_teams / 2);
    for _ in 0..rounds {
        for i in 0..n_teams / 2 {
            pairs.push((order[i], order[n_teams - 1 - i]));
        }
        let last = order.pop().expect("teams");
        order.insert(1, last);
    }
    pairs
}

struct MatchContext<'a> {
    config: &'a SynthConfig,
    grid: GridZoneSystem,
    length_dist: WeightedIndex<f64>,
    zone_dists: Vec<WeightedIndex<f64>>,
}

impl<'a> MatchContext<'a> {
    fn new(config: &'a SynthConfig) -> Result<Self> {
        let bad = |e: rand::distributions::WeightedError| {
            Error::Config(format!("invalid sampling weights: {e}"))
        };
        Ok(MatchContext {
            config,
            grid: GridZoneSystem::grid5(),
            length_dist: WeightedIndex::new(config.normalized_lengths()).map_err(bad)?,
            zone_dists: (0..config.n_teams)
                .map(|team| WeightedIndex::new(config.zone_weights(team)).map_err(bad))
                .collect::<Result<_>>()?,
        })
    }

    /// Uniform integer-metre point inside a zone; maps back to the zone
    /// under the half-open boundary convention.
    fn zone_point(&self, zone_idx: usize, rng: &mut ChaCha8Rng) -> (i32, i32) {
        let bounds = self
            .grid
            .zone_bounds(crate::geometry::ZoneId::new(zone_idx as u32 + 1));
        let x = rng.gen_range(bounds.x0 as i32..bounds.x1 as i32);
        let y = rng.gen_range(bounds.y0 as i32..bounds.y1 as i32);
        (x, y)
    }

    fn match_events(&self, match_idx: usize, home: usize, away: usize) -> Vec<RawEvent> {
        let config = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(match_idx as u64 + 1);

        let match_id = format!("M{:04}", match_idx + 1);
        let mut events = Vec::new();
        let mut set_number = 0u32;
        for p in 0..2 * config.possessions_per_team_match {
            let team = if p % 2 == 0 { home } else { away };
            let team_id = format!("T{:02}", team + 1);
            let length = self.length_dist.sample(&mut rng) + 1;
            let zones: Vec<usize> = (0..length)
                .map(|_| self.zone_dists[team].sample(&mut rng))
                .collect();

            let final_zone = *zones.last().expect("length >= 1");
            let (action, outcome) = self.end_cause(final_zone, &mut rng);

            set_number += 1;
            let mut play_number = 0u32;
            for (t, zone) in zones.iter().enumerate() {
                play_number += 1;
                if play_number > 6 {
                    // A set lasts at most six plays.
                    set_number += 1;
                    play_number = 1;
                }
                let (x, y) = self.zone_point(*zone, &mut rng);
                let last = t + 1 == length;
                events.push(RawEvent {
                    match_id: match_id.clone(),
                    team_id: team_id.clone(),
                    set_number,
                    play_number,
                    x: f64::from(x),
                    y: f64::from(y),
                    action: if last { action } else { Action::Play },
                    outcome: if last { outcome } else { None },
                    direction: None,
                    line: 0,
                });
            }
        }
        events
    }

    fn end_cause(&self, zone: usize, rng: &mut ChaCha8Rng) -> (Action, Option<OutcomeToken>) {
        let config = self.config;
        if rng.gen::<f64>() < config.try_prob[zone] {
            let converted = rng.gen_bool(config.conversion_prob);
            let token = if converted {
                OutcomeToken::Converted
            } else {
                OutcomeToken::Unconverted
            };
            (Action::Try, Some(token))
        } else if rng.gen_bool(config.penalty_attempt_prob) {
            let made = rng.gen_bool(config.penalty_success_prob);
            (Action::PenaltyGoal, Some(made_token(made)))
        } else if rng.gen_bool(config.drop_attempt_prob) {
            let made = rng.gen_bool(config.drop_success_prob);
            (Action::DropGoal, Some(made_token(made)))
        } else {
            let action = match rng.gen_range(0..3u8) {
                0 => Action::Error,
                1 => Action::Handover,
                _ => Action::FieldKick,
            };
            (action, None)
        }
    }
}

fn made_token(made: bool) -> OutcomeToken {
    if made {
        OutcomeToken::Made
    } else {
        OutcomeToken::Missed
    }
}

fn ground_truth(config: &SynthConfig, play_count: usize) -> Result<GroundTruth> {
    let matches = config.n_matches_per_team * config.n_teams / 2;
    Ok(GroundTruth {
        possession_count: matches * 2 * config.possessions_per_team_match,
        play_count,
        analytic_epv: analytic_epv(config, 1.0)?,
        column_partition: weight_runs(&config.column_class_weights),
        row_partition: weight_runs(&config.row_group_weights),
    })
}

/// Generates the full event stream for a season. Deterministic per seed.
pub fn generate_season(config: &SynthConfig) -> Result<SynthSeason> {
    config.validate()?;
    let ctx = MatchContext::new(config)?;
    let pairs = schedule(config.n_teams, config.n_matches_per_team);
    let mut events = Vec::new();
    for (match_idx, (home, away)) in pairs.iter().enumerate() {
        events.extend(ctx.match_events(match_idx, *home, *away));
    }
    let ground_truth = ground_truth(config, events.len())?;
    Ok(SynthSeason { events, ground_truth })
}

/// Generates possessions directly, match by match, without holding the
/// whole event stream. Identical content to `generate_season` run through
/// ingest and segmentation.
pub fn generate_possessions(config: &SynthConfig) -> Result<(Vec<Possession>, GroundTruth)> {
    config.validate()?;
    let ctx = MatchContext::new(config)?;
    let pairs = schedule(config.n_teams, config.n_matches_per_team);
    let mut possessions = Vec::new();
    let mut play_count = 0usize;
    for (match_idx, (home, away)) in pairs.iter().enumerate() {
        let events = ctx.match_events(match_idx, *home, *away);
        play_count += events.len();
        let plays = normalize(&events, Orientation::AttackingFrame)?;
        possessions.extend(segment(&plays)?);
    }
    Ok((possessions, ground_truth(config, play_count)?))
}
