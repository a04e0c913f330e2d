//! Possession returns, per-match zone returns and the every-visit
//! Monte Carlo EPV estimate.
//!
//! Each play of a possession credits its opening zone with the discounted
//! terminal reward `gamma^(T - t) * R`, so the final play is undiscounted
//! and each earlier play picks up one extra factor of gamma. The EPV of a
//! zone is the mean credited return over all recorded visits, pooled over
//! play indexes.
//!
//! Per-possession contributions are independent, so they may be computed
//! on worker threads; partial results are always folded in possession
//! order with a zone-index-ordered accumulator, which keeps outputs
//! bit-identical regardless of worker count.

use indexmap::IndexMap;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ZoneSystem;
use crate::possession::Possession;

/// Estimation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationConfig {
    /// Discount factor in (0, 1]. 1 means undiscounted expected points.
    pub gamma: f64,
}

impl ValuationConfig {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Config(format!(
                "gamma must be in (0, 1], got {gamma}"
            )));
        }
        Ok(ValuationConfig { gamma })
    }
}

impl Default for ValuationConfig {
    fn default() -> Self {
        ValuationConfig { gamma: 1.0 }
    }
}

/// Accumulated zone returns and visit counts for one team in one match.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReturnMatrix {
    pub match_id: String,
    pub team_id: String,
    /// Dense by zone index; zones never visited carry 0.
    pub returns: Vec<f64>,
    pub visits: Vec<u64>,
}

impl MatchReturnMatrix {
    pub fn zone_count(&self) -> usize {
        self.returns.len()
    }

    pub fn total_return(&self) -> f64 {
        self.returns.iter().sum()
    }

    pub fn total_visits(&self) -> u64 {
        self.visits.iter().sum()
    }
}

/// Per-zone expected possession value with visit counts.
///
/// Zones never visited carry `None`, never a silent 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EpvModel {
    pub gamma: f64,
    pub values: Vec<Option<f64>>,
    pub visits: Vec<u64>,
}

impl EpvModel {
    pub fn zone_count(&self) -> usize {
        self.values.len()
    }
}

/// Discounted return credited to play `t` (1-based) of a possession.
pub fn play_return(possession: &Possession, t: usize, gamma: f64) -> Result<f64> {
    let len = possession.len();
    if t < 1 || t > len {
        return Err(Error::ContractViolation(format!(
            "play index {t} out of range 1..={len}"
        )));
    }
    Ok(gamma.powi((len - t) as i32) * f64::from(possession.reward))
}

/// Per-possession zone contributions: (zone index, discounted return) per
/// play, plus which zones were visited. Pure and deterministic.
fn possession_contribution(
    possession: &Possession,
    system: &ZoneSystem,
    gamma: f64,
) -> Result<Vec<(usize, f64)>> {
    let len = possession.len();
    let reward = f64::from(possession.reward);
    let mut out = Vec::with_capacity(len);
    for (i, play) in possession.plays.iter().enumerate() {
        let zone = system.zone_of(play.x, play.y)?;
        let weight = gamma.powi((len - 1 - i) as i32);
        out.push((zone.index0(), weight * reward));
    }
    Ok(out)
}

fn contributions(
    possessions: &[Possession],
    system: &ZoneSystem,
    gamma: f64,
) -> Result<Vec<Vec<(usize, f64)>>> {
    #[cfg(feature = "parallel")]
    {
        possessions
            .par_iter()
            .map(|p| possession_contribution(p, system, gamma))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        possessions
            .iter()
            .map(|p| possession_contribution(p, system, gamma))
            .collect()
    }
}

fn fold_in_order(
    contribs: &[Vec<(usize, f64)>],
    zone_count: usize,
) -> (Vec<f64>, Vec<u64>) {
    let mut returns = vec![0.0; zone_count];
    let mut visits = vec![0u64; zone_count];
    for contribution in contribs {
        for &(zone, value) in contribution {
            returns[zone] += value;
            visits[zone] += 1;
        }
    }
    (returns, visits)
}

/// Match return matrix for one team's possessions in one match.
pub fn match_returns(
    possessions: &[Possession],
    system: &ZoneSystem,
    config: &ValuationConfig,
) -> Result<MatchReturnMatrix> {
    let first = possessions.first().ok_or_else(|| {
        Error::ContractViolation("match_returns needs at least one possession".into())
    })?;
    if possessions
        .iter()
        .any(|p| p.match_id != first.match_id || p.team_id != first.team_id)
    {
        return Err(Error::ContractViolation(
            "match_returns expects possessions from a single team-match".into(),
        ));
    }
    let contribs = contributions(possessions, system, config.gamma)?;
    let (returns, visits) = fold_in_order(&contribs, system.zone_count());
    Ok(MatchReturnMatrix {
        match_id: first.match_id.clone(),
        team_id: first.team_id.clone(),
        returns,
        visits,
    })
}

/// Match return matrices for a whole sample, grouped by (match, team) in
/// first-appearance order.
pub fn season_returns(
    possessions: &[Possession],
    system: &ZoneSystem,
    config: &ValuationConfig,
) -> Result<Vec<MatchReturnMatrix>> {
    let mut groups: IndexMap<(String, String), Vec<&Possession>> = IndexMap::new();
    for p in possessions {
        groups
            .entry((p.match_id.clone(), p.team_id.clone()))
            .or_default()
            .push(p);
    }
    let groups: Vec<_> = groups.into_values().collect();

    let build = |group: &Vec<&Possession>| -> Result<MatchReturnMatrix> {
        let contribs: Result<Vec<_>> = group
            .iter()
            .map(|p| possession_contribution(p, system, config.gamma))
            .collect();
        let (returns, visits) = fold_in_order(&contribs?, system.zone_count());
        Ok(MatchReturnMatrix {
            match_id: group[0].match_id.clone(),
            team_id: group[0].team_id.clone(),
            returns,
            visits,
        })
    };

    #[cfg(feature = "parallel")]
    {
        groups.par_iter().map(build).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        groups.iter().map(build).collect()
    }
}

/// Every-visit Monte Carlo EPV estimate over the full sample.
///
/// Uses worker threads when the `parallel` feature is enabled; results are
/// bit-identical to [`estimate_epv_sequential`].
pub fn estimate_epv(
    possessions: &[Possession],
    system: &ZoneSystem,
    config: &ValuationConfig,
) -> Result<EpvModel> {
    if possessions.is_empty() {
        return Err(Error::ContractViolation(
            "estimate_epv needs at least one possession".into(),
        ));
    }
    let contribs = contributions(possessions, system, config.gamma)?;
    Ok(model_from_fold(&contribs, system.zone_count(), config.gamma))
}

/// Single-threaded reference path for [`estimate_epv`].
pub fn estimate_epv_sequential(
    possessions: &[Possession],
    system: &ZoneSystem,
    config: &ValuationConfig,
) -> Result<EpvModel> {
    if possessions.is_empty() {
        return Err(Error::ContractViolation(
            "estimate_epv needs at least one possession".into(),
        ));
    }
    let contribs: Result<Vec<_>> = possessions
        .iter()
        .map(|p| possession_contribution(p, system, config.gamma))
        .collect();
    Ok(model_from_fold(&contribs?, system.zone_count(), config.gamma))
}

fn model_from_fold(contribs: &[Vec<(usize, f64)>], zone_count: usize, gamma: f64) -> EpvModel {
    let (returns, visits) = fold_in_order(contribs, zone_count);
    let values = returns
        .iter()
        .zip(&visits)
        .map(|(ret, n)| (*n > 0).then(|| ret / *n as f64))
        .collect();
    EpvModel {
        gamma,
        values,
        visits,
    }
}

/// EPV values at one play index.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayIndexValues {
    /// 1-based play index within possessions.
    pub t: usize,
    pub values: Vec<Option<f64>>,
    pub visits: Vec<u64>,
}

/// Per-play-index EPV breakdown (visits at play `t` only, not pooled).
pub fn estimate_epv_by_play_index(
    possessions: &[Possession],
    system: &ZoneSystem,
    config: &ValuationConfig,
) -> Result<Vec<PlayIndexValues>> {
    if possessions.is_empty() {
        return Err(Error::ContractViolation(
            "estimate_epv_by_play_index needs at least one possession".into(),
        ));
    }
    let max_len = possessions.iter().map(Possession::len).max().unwrap_or(0);
    let zone_count = system.zone_count();
    let mut returns = vec![vec![0.0; zone_count]; max_len];
    let mut visits = vec![vec![0u64; zone_count]; max_len];
    for possession in possessions {
        for (i, play) in possession.plays.iter().enumerate() {
            let zone = system.zone_of(play.x, play.y)?.index0();
            let weight = config.gamma.powi((possession.len() - 1 - i) as i32);
            returns[i][zone] += weight * f64::from(possession.reward);
            visits[i][zone] += 1;
        }
    }
    Ok(returns
        .into_iter()
        .zip(visits)
        .enumerate()
        .map(|(i, (ret, vis))| PlayIndexValues {
            t: i + 1,
            values: ret
                .iter()
                .zip(&vis)
                .map(|(r, n)| (*n > 0).then(|| r / *n as f64))
                .collect(),
            visits: vis,
        })
        .collect())
}
