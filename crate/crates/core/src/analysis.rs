//! Reward distributions, between-match reproducibility via KL divergence,
//! and z-score zone-dependence profiles.

use indexmap::IndexMap;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ZoneSystem;
use crate::valuation::MatchReturnMatrix;

/// A team's per-zone share of total match return, normalised to sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardDistribution {
    pub team_id: String,
    /// Matches the distribution was pooled from.
    pub source: Vec<String>,
    pub probs: Vec<f64>,
}

/// Normalises one match's returns into a reward distribution.
pub fn reward_distribution(
    matrix: &MatchReturnMatrix,
    zones: &ZoneSystem,
) -> Result<RewardDistribution> {
    if matrix.zone_count() != zones.zone_count() {
        return Err(Error::ContractViolation(
            "matrix zone count does not match the zone system".into(),
        ));
    }
    pooled_distribution(&[matrix], zones)
}

/// Pools k matches by summing returns before normalising (not an average
/// of per-match distributions).
pub fn pooled_distribution(
    matrices: &[&MatchReturnMatrix],
    zones: &ZoneSystem,
) -> Result<RewardDistribution> {
    let first = matrices.first().ok_or_else(|| {
        Error::ContractViolation("pooled_distribution needs at least one match".into())
    })?;
    if matrices.iter().any(|m| {
        m.zone_count() != zones.zone_count() || m.team_id != first.team_id
    }) {
        return Err(Error::ContractViolation(
            "pooled matrices must share the zone system and team".into(),
        ));
    }

    let mut sums = vec![0.0; zones.zone_count()];
    for matrix in matrices {
        for (sum, r) in sums.iter_mut().zip(&matrix.returns) {
            *sum += r;
        }
    }
    let total: f64 = sums.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroReturnMatch {
            match_id: matrices
                .iter()
                .map(|m| m.match_id.clone())
                .collect::<Vec<_>>()
                .join("+"),
            team_id: first.team_id.clone(),
        });
    }
    for sum in &mut sums {
        *sum /= total;
    }
    Ok(RewardDistribution {
        team_id: first.team_id.clone(),
        source: matrices.iter().map(|m| m.match_id.clone()).collect(),
        probs: sums,
    })
}

/// KL divergence D(p||q) in nats. Terms with p(s) = 0 contribute nothing;
/// any zone with p(s) > 0 and q(s) = 0 makes the divergence infinite.
pub fn kl_divergence(p: &RewardDistribution, q: &RewardDistribution) -> Result<f64> {
    if p.probs.len() != q.probs.len() {
        return Err(Error::ContractViolation(
            "KL divergence needs distributions on the same zone system".into(),
        ));
    }
    let mut divergence = 0.0;
    for (ps, qs) in p.probs.iter().zip(&q.probs) {
        if *ps > 0.0 {
            if *qs <= 0.0 {
                return Ok(f64::INFINITY);
            }
            divergence += ps * (ps / qs).ln();
        }
    }
    Ok(divergence)
}

/// A team's chronologically ordered match return matrices.
#[derive(Debug, Clone)]
pub struct TeamSeason {
    pub team_id: String,
    pub matrices: Vec<MatchReturnMatrix>,
}

/// Groups matrices by team, preserving first-appearance (chronological)
/// order of both teams and matches.
pub fn team_seasons(matrices: Vec<MatchReturnMatrix>) -> Vec<TeamSeason> {
    let mut by_team: IndexMap<String, Vec<MatchReturnMatrix>> = IndexMap::new();
    for matrix in matrices {
        by_team
            .entry(matrix.team_id.clone())
            .or_default()
            .push(matrix);
    }
    by_team
        .into_iter()
        .map(|(team_id, matrices)| TeamSeason { team_id, matrices })
        .collect()
}

/// One window-vs-target comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub target_match: String,
    pub window: Vec<String>,
    /// May be infinite when the window lacks support the target has.
    pub kl: f64,
}

/// All comparisons for one team at one window length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproReport {
    pub team_id: String,
    pub k: usize,
    pub comparisons: Vec<Comparison>,
    pub pct_non_infinity: f64,
}

/// Across-team summary for one window length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeagueSummary {
    pub k: usize,
    pub mean_pct_non_infinity: f64,
    /// Sample standard deviation across teams (n-1).
    pub sd_pct_non_infinity: f64,
}

/// Full reproducibility study output.
#[derive(Debug, Clone, Serialize)]
pub struct ReproStudy {
    pub reports: Vec<ReproReport>,
    pub summaries: Vec<LeagueSummary>,
    /// Matches with zero total return, excluded from windows and targets.
    pub excluded_matches: Vec<(String, String)>,
    /// (team, k) pairs skipped because the team has too few matches.
    pub skipped: Vec<(String, usize)>,
}

/// Reproducibility of attacking reward distributions across sliding
/// windows of prior fixtures.
///
/// For each team and each k in `k_range`, every window of k consecutive
/// prior matches is pooled and compared to the next match via
/// `kl_divergence(target, pooled)`. A team with N matches yields N - k
/// comparisons.
pub fn reproducibility_study(
    seasons: &[TeamSeason],
    zones: &ZoneSystem,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<ReproStudy> {
    if *k_range.start() < 1 {
        return Err(Error::Config("window lengths start at 1".into()));
    }

    let mut excluded = Vec::new();
    let mut usable: Vec<(&str, Vec<&MatchReturnMatrix>)> = Vec::new();
    for season in seasons {
        let mut kept = Vec::new();
        for matrix in &season.matrices {
            if matrix.total_return() > 0.0 {
                kept.push(matrix);
            } else {
                excluded.push((season.team_id.clone(), matrix.match_id.clone()));
            }
        }
        usable.push((season.team_id.as_str(), kept));
    }

    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for k in k_range {
        for (team_id, matrices) in &usable {
            if matrices.len() <= k {
                skipped.push((team_id.to_string(), k));
            } else {
                jobs.push((k, *team_id, matrices));
            }
        }
    }

    let run = |&(k, team_id, ref matrices): &(usize, &str, &Vec<&MatchReturnMatrix>)| -> Result<ReproReport> {
        let mut comparisons = Vec::with_capacity(matrices.len() - k);
        for i in k..matrices.len() {
            let target = reward_distribution(matrices[i], zones)?;
            let window = &matrices[i - k..i];
            let pooled = pooled_distribution(window, zones)?;
            comparisons.push(Comparison {
                target_match: matrices[i].match_id.clone(),
                window: window.iter().map(|m| m.match_id.clone()).collect(),
                kl: kl_divergence(&target, &pooled)?,
            });
        }
        let finite = comparisons.iter().filter(|c| c.kl.is_finite()).count();
        let pct_non_infinity = 100.0 * finite as f64 / comparisons.len() as f64;
        Ok(ReproReport {
            team_id: team_id.to_string(),
            k,
            comparisons,
            pct_non_infinity,
        })
    };

    #[cfg(feature = "parallel")]
    let reports: Result<Vec<ReproReport>> = jobs.par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let reports: Result<Vec<ReproReport>> = jobs.iter().map(run).collect();
    let reports = reports?;

    let mut summaries = Vec::new();
    let mut by_k: IndexMap<usize, Vec<f64>> = IndexMap::new();
    for report in &reports {
        by_k.entry(report.k).or_default().push(report.pct_non_infinity);
    }
    for (k, pcts) in by_k {
        let n = pcts.len() as f64;
        let mean = pcts.iter().sum::<f64>() / n;
        let sd = if pcts.len() > 1 {
            (pcts.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        summaries.push(LeagueSummary {
            k,
            mean_pct_non_infinity: mean,
            sd_pct_non_infinity: sd,
        });
    }

    Ok(ReproStudy {
        reports,
        summaries,
        excluded_matches: excluded,
        skipped,
    })
}

/// Single-threaded reference path for [`reproducibility_study`].
/// Produces bit-identical output.
pub fn reproducibility_study_sequential(
    seasons: &[TeamSeason],
    zones: &ZoneSystem,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<ReproStudy> {
    let mut excluded = Vec::new();
    let mut usable: Vec<(&str, Vec<&MatchReturnMatrix>)> = Vec::new();
    for season in seasons {
        let mut kept = Vec::new();
        for matrix in &season.matrices {
            if matrix.total_return() > 0.0 {
                kept.push(matrix);
            } else {
                excluded.push((season.team_id.clone(), matrix.match_id.clone()));
            }
        }
        usable.push((season.team_id.as_str(), kept));
    }

    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    for k in k_range {
        for (team_id, matrices) in &usable {
            if matrices.len() <= k {
                skipped.push((team_id.to_string(), k));
                continue;
            }
            let mut comparisons = Vec::with_capacity(matrices.len() - k);
            for i in k..matrices.len() {
                let target = reward_distribution(matrices[i], zones)?;
                let window = &matrices[i - k..i];
                let pooled = pooled_distribution(window, zones)?;
                comparisons.push(Comparison {
                    target_match: matrices[i].match_id.clone(),
                    window: window.iter().map(|m| m.match_id.clone()).collect(),
                    kl: kl_divergence(&target, &pooled)?,
                });
            }
            let finite = comparisons.iter().filter(|c| c.kl.is_finite()).count();
            let pct_non_infinity = 100.0 * finite as f64 / comparisons.len() as f64;
            reports.push(ReproReport {
                team_id: team_id.to_string(),
                k,
                comparisons,
                pct_non_infinity,
            });
        }
    }

    let mut summaries = Vec::new();
    let mut by_k: IndexMap<usize, Vec<f64>> = IndexMap::new();
    for report in &reports {
        by_k.entry(report.k).or_default().push(report.pct_non_infinity);
    }
    for (k, pcts) in by_k {
        let n = pcts.len() as f64;
        let mean = pcts.iter().sum::<f64>() / n;
        let sd = if pcts.len() > 1 {
            (pcts.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        summaries.push(LeagueSummary {
            k,
            mean_pct_non_infinity: mean,
            sd_pct_non_infinity: sd,
        });
    }

    Ok(ReproStudy {
        reports,
        summaries,
        excluded_matches: excluded,
        skipped,
    })
}

/// Per-zone, per-team standardised reward shares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZScoreProfile {
    pub teams: Vec<String>,
    /// `z[zone][team]`.
    pub z: Vec<Vec<f64>>,
    /// Zones where all teams agree exactly; their z-scores are 0 by fiat.
    pub zero_spread: Vec<bool>,
}

/// Standardises each team's season reward share per zone against the
/// league, using the sample standard deviation (n-1).
pub fn zscore_profile(distributions: &[RewardDistribution]) -> Result<ZScoreProfile> {
    if distributions.len() < 2 {
        return Err(Error::InsufficientTeams);
    }
    let zone_count = distributions[0].probs.len();
    if distributions.iter().any(|d| d.probs.len() != zone_count) {
        return Err(Error::ContractViolation(
            "all season distributions must share the zone system".into(),
        ));
    }
    let n = distributions.len() as f64;
    let mut z = Vec::with_capacity(zone_count);
    let mut zero_spread = Vec::with_capacity(zone_count);
    for zone in 0..zone_count {
        let mean = distributions.iter().map(|d| d.probs[zone]).sum::<f64>() / n;
        let var = distributions
            .iter()
            .map(|d| (d.probs[zone] - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        let sd = var.sqrt();
        if sd == 0.0 {
            zero_spread.push(true);
            z.push(vec![0.0; distributions.len()]);
        } else {
            zero_spread.push(false);
            z.push(
                distributions
                    .iter()
                    .map(|d| (d.probs[zone] - mean) / sd)
                    .collect(),
            );
        }
    }
    Ok(ZScoreProfile {
        teams: distributions.iter().map(|d| d.team_id.clone()).collect(),
        z,
        zero_spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(match_id: &str, team: &str, returns: Vec<f64>) -> MatchReturnMatrix {
        let visits = returns.iter().map(|r| u64::from(*r > 0.0)).collect();
        MatchReturnMatrix {
            match_id: match_id.into(),
            team_id: team.into(),
            returns,
            visits,
        }
    }

    fn two_zone_system() -> ZoneSystem {
        // Aggregated system with two zones standing in for a tiny system.
        use crate::aggregation::{AggZone, AggregatedZoneSystem};
        use crate::geometry::ZoneId;
        let zones = vec![
            AggZone {
                id: ZoneId::new(1),
                full_width: false,
                members: (1..=154).map(ZoneId::new).collect(),
            },
            AggZone {
                id: ZoneId::new(2),
                full_width: false,
                members: (155..=308).map(ZoneId::new).collect(),
            },
        ];
        ZoneSystem::Aggregated(
            AggregatedZoneSystem::from_parts(zones, vec![], vec![], vec![]).unwrap(),
        )
    }

    #[test]
    fn normalisation() {
        let zones = two_zone_system();
        let d = reward_distribution(&matrix("M1", "A", vec![6.0, 2.0]), &zones).unwrap();
        assert_eq!(d.probs, vec![0.75, 0.25]);

        let d = reward_distribution(&matrix("M1", "A", vec![4.0, 0.0]), &zones).unwrap();
        assert_eq!(d.probs, vec![1.0, 0.0]);
    }

    #[test]
    fn zero_return_match_is_an_error() {
        let zones = two_zone_system();
        assert!(matches!(
            reward_distribution(&matrix("M1", "A", vec![0.0, 0.0]), &zones),
            Err(Error::ZeroReturnMatch { .. })
        ));
    }

    #[test]
    fn pooling_sums_before_normalising() {
        let zones = two_zone_system();
        let m1 = matrix("M1", "A", vec![6.0, 2.0]);
        let m2 = matrix("M2", "A", vec![0.0, 4.0]);
        let d = pooled_distribution(&[&m1, &m2], &zones).unwrap();
        assert_eq!(d.probs, vec![0.5, 0.5]);

        let d1 = pooled_distribution(&[&m1], &zones).unwrap();
        let r1 = reward_distribution(&m1, &zones).unwrap();
        assert_eq!(d1.probs, r1.probs);
    }

    #[test]
    fn pooling_disjoint_supports() {
        let zones = two_zone_system();
        let m1 = matrix("M1", "A", vec![6.0, 0.0]);
        let m2 = matrix("M2", "A", vec![0.0, 6.0]);
        let d = pooled_distribution(&[&m1, &m2], &zones).unwrap();
        assert_eq!(d.probs, vec![0.5, 0.5]);
    }

    fn dist(team: &str, probs: Vec<f64>) -> RewardDistribution {
        RewardDistribution {
            team_id: team.into(),
            source: vec!["M1".into()],
            probs,
        }
    }

    #[test]
    fn kl_identity_is_zero() {
        let p = dist("A", vec![0.3, 0.3, 0.4]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn kl_worked_pair() {
        let p = dist("A", vec![0.5, 0.5]);
        let q = dist("A", vec![0.25, 0.75]);
        let d = kl_divergence(&p, &q).unwrap();
        // 0.5 ln 2 + 0.5 ln(2/3) = 0.5 ln(4/3)
        assert!((d - 0.143841).abs() < 1e-6);
    }

    #[test]
    fn kl_support_violation_is_infinite() {
        let p = dist("A", vec![1.0, 0.0]);
        let q = dist("A", vec![0.0, 1.0]);
        assert_eq!(kl_divergence(&p, &q).unwrap(), f64::INFINITY);
    }

    fn season(team: &str, n: usize, probs: impl Fn(usize) -> Vec<f64>) -> TeamSeason {
        TeamSeason {
            team_id: team.into(),
            matrices: (0..n)
                .map(|i| matrix(&format!("M{i:02}"), team, probs(i)))
                .collect(),
        }
    }

    #[test]
    fn comparison_counts_match_window_arithmetic() {
        let zones = two_zone_system();
        let seasons = vec![season("A", 29, |_| vec![3.0, 1.0])];
        let study = reproducibility_study(&seasons, &zones, 1..=10).unwrap();
        for report in &study.reports {
            assert_eq!(report.comparisons.len(), 29 - report.k);
        }
        let k1 = study.reports.iter().find(|r| r.k == 1).unwrap();
        assert_eq!(k1.comparisons.len(), 28);
        let k10 = study.reports.iter().find(|r| r.k == 10).unwrap();
        assert_eq!(k10.comparisons.len(), 19);
    }

    #[test]
    fn identical_matches_are_perfectly_reproducible() {
        let zones = two_zone_system();
        let seasons = vec![season("A", 12, |_| vec![2.0, 6.0])];
        let study = reproducibility_study(&seasons, &zones, 1..=10).unwrap();
        for report in &study.reports {
            assert_eq!(report.pct_non_infinity, 100.0);
            assert!(report.comparisons.iter().all(|c| c.kl == 0.0));
        }
    }

    #[test]
    fn short_seasons_are_skipped_with_warning() {
        let zones = two_zone_system();
        let seasons = vec![season("A", 5, |_| vec![1.0, 1.0])];
        let study = reproducibility_study(&seasons, &zones, 1..=10).unwrap();
        assert!(study.skipped.iter().any(|(t, k)| t == "A" && *k == 5));
        assert!(study.reports.iter().all(|r| r.k < 5));
    }

    #[test]
    fn zero_return_matches_are_excluded() {
        let zones = two_zone_system();
        let mut s = season("A", 6, |_| vec![1.0, 1.0]);
        s.matrices[2].returns = vec![0.0, 0.0];
        let study = reproducibility_study(&[s], &zones, 1..=1).unwrap();
        assert_eq!(study.excluded_matches, vec![("A".to_string(), "M02".to_string())]);
        assert_eq!(study.reports[0].comparisons.len(), 4); // 5 usable - 1
    }

    #[test]
    fn infinities_counted_in_pct() {
        let zones = two_zone_system();
        // Alternate support: every window misses the target's zone.
        let seasons = vec![season("A", 4, |i| {
            if i % 2 == 0 {
                vec![1.0, 0.0]
            } else {
                vec![0.0, 1.0]
            }
        })];
        let study = reproducibility_study(&seasons, &zones, 1..=1).unwrap();
        assert_eq!(study.reports[0].pct_non_infinity, 0.0);
    }

    #[test]
    fn zscore_all_identical_teams_is_zero() {
        let dists: Vec<_> = (0..12)
            .map(|i| dist(&format!("T{i}"), vec![0.25, 0.75]))
            .collect();
        let profile = zscore_profile(&dists).unwrap();
        assert!(profile.z.iter().flatten().all(|z| *z == 0.0));
        assert!(profile.zero_spread.iter().all(|f| *f));
    }

    #[test]
    fn zscore_worked_case() {
        // Zone 0 probs: mean 0.1, sample sd 0.05, one team at 0.2 -> z = 2.
        let probs = [0.2, 0.085, 0.085, 0.085, 0.085, 0.06];
        let dists: Vec<_> = probs
            .iter()
            .enumerate()
            .map(|(i, p)| dist(&format!("T{i}"), vec![*p, 1.0 - p]))
            .collect();
        let profile = zscore_profile(&dists).unwrap();
        assert!((profile.z[0][0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zscore_column_statistics() {
        let probs = [0.3, 0.1, 0.25, 0.15, 0.2];
        let dists: Vec<_> = probs
            .iter()
            .enumerate()
            .map(|(i, p)| dist(&format!("T{i}"), vec![*p, 1.0 - p]))
            .collect();
        let profile = zscore_profile(&dists).unwrap();
        for zone in 0..2 {
            let zs = &profile.z[zone];
            let mean = zs.iter().sum::<f64>() / zs.len() as f64;
            let sd = (zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>()
                / (zs.len() as f64 - 1.0))
                .sqrt();
            assert!(mean.abs() < 1e-9);
            assert!((sd - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zscore_single_team_rejected() {
        let dists = vec![dist("A", vec![1.0])];
        assert!(matches!(
            zscore_profile(&dists),
            Err(Error::InsufficientTeams)
        ));
    }

    #[test]
    fn twelve_teams_give_twelve_entries_per_zone() {
        let dists: Vec<_> = (0..12)
            .map(|i| dist(&format!("T{i}"), vec![0.2 + 0.01 * i as f64, 0.8 - 0.01 * i as f64]))
            .collect();
        let profile = zscore_profile(&dists).unwrap();
        assert_eq!(profile.teams.len(), 12);
        assert_eq!(profile.z[0].len(), 12);
    }
}
