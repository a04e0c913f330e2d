//! Data-driven aggregated zone system built from 5m-grid match returns.
//!
//! Pipeline: marginal column/row returns per team-match, symmetric column
//! folding and 10m row pairing, then an iterative left-to-right merge scan
//! driven by minimal-effects testing. Surviving column groups are crossed
//! with row groups; infrequently visited row groups collapse to a single
//! full-width zone.
//!
//! Folded column classes join the two mirrored 5m strips, so an aggregated
//! zone may cover two disjoint rectangles; the system treats them as one
//! state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GridZoneSystem, Rect, ZoneId};
use crate::stats::{minimal_effect_separate, MinimalEffectConfig};
use crate::valuation::{EpvModel, MatchReturnMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Column,
    Row,
}

/// One team-match value of a marginal return series.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub match_id: String,
    pub team_id: String,
    pub value: f64,
}

/// Per-team-match returns summed over one column, row, or group thereof.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalReturnSeries {
    pub axis: Axis,
    /// 1-based column / row / class / group index.
    pub group_index: u32,
    pub observations: Vec<Observation>,
}

impl MarginalReturnSeries {
    pub fn total(&self) -> f64 {
        self.observations.iter().map(|o| o.value).sum()
    }
}

/// Contiguous partition of group indexes along one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergePartition {
    pub axis: Axis,
    /// Ordered, contiguous, 1-based index sets.
    pub groups: Vec<Vec<u32>>,
}

/// Column and row marginal return series from 5m-grid match matrices.
///
/// Column series sum each column's 22 zones per team-match; row series sum
/// each row's 14 zones. Observations follow the input matrix order, so all
/// series are aligned.
pub fn marginal_returns(
    matrices: &[MatchReturnMatrix],
    grid: &GridZoneSystem,
) -> Result<(Vec<MarginalReturnSeries>, Vec<MarginalReturnSeries>)> {
    let n_cols = grid.n_columns();
    let n_rows = grid.n_rows();
    if matrices.iter().any(|m| m.zone_count() != grid.zone_count()) {
        return Err(Error::ContractViolation(
            "all match return matrices must share the grid's zone count".into(),
        ));
    }

    let mut columns: Vec<MarginalReturnSeries> = (1..=n_cols as u32)
        .map(|c| MarginalReturnSeries {
            axis: Axis::Column,
            group_index: c,
            observations: Vec::with_capacity(matrices.len()),
        })
        .collect();
    let mut rows: Vec<MarginalReturnSeries> = (1..=n_rows as u32)
        .map(|r| MarginalReturnSeries {
            axis: Axis::Row,
            group_index: r,
            observations: Vec::with_capacity(matrices.len()),
        })
        .collect();

    for matrix in matrices {
        let mut col_sums = vec![0.0; n_cols];
        let mut row_sums = vec![0.0; n_rows];
        for row in 0..n_rows {
            for col in 0..n_cols {
                let v = matrix.returns[row * n_cols + col];
                col_sums[col] += v;
                row_sums[row] += v;
            }
        }
        for (series, value) in columns.iter_mut().zip(col_sums) {
            series.observations.push(Observation {
                match_id: matrix.match_id.clone(),
                team_id: matrix.team_id.clone(),
                value,
            });
        }
        for (series, value) in rows.iter_mut().zip(row_sums) {
            series.observations.push(Observation {
                match_id: matrix.match_id.clone(),
                team_id: matrix.team_id.clone(),
                value,
            });
        }
    }
    Ok((columns, rows))
}

/// Folds mirrored columns into classes (outermost first) and pairs
/// adjacent 5m rows into 10m groups. Values are summed per team-match.
pub fn fold_and_pair(
    columns: &[MarginalReturnSeries],
    rows: &[MarginalReturnSeries],
) -> (Vec<MarginalReturnSeries>, Vec<MarginalReturnSeries>) {
    let n_cols = columns.len();
    let n_classes = n_cols.div_ceil(2);
    let classes = (1..=n_classes)
        .map(|class| {
            let partner = n_cols + 1 - class;
            let observations = columns[class - 1]
                .observations
                .iter()
                .enumerate()
                .map(|(i, o)| Observation {
                    match_id: o.match_id.clone(),
                    team_id: o.team_id.clone(),
                    value: if partner == class {
                        o.value
                    } else {
                        o.value + columns[partner - 1].observations[i].value
                    },
                })
                .collect();
            MarginalReturnSeries {
                axis: Axis::Column,
                group_index: class as u32,
                observations,
            }
        })
        .collect();

    let n_groups = rows.len().div_ceil(2);
    let groups = (1..=n_groups)
        .map(|g| {
            let lo = 2 * g - 2;
            let hi = 2 * g - 1;
            let observations = rows[lo]
                .observations
                .iter()
                .enumerate()
                .map(|(i, o)| Observation {
                    match_id: o.match_id.clone(),
                    team_id: o.team_id.clone(),
                    value: if hi < rows.len() {
                        o.value + rows[hi].observations[i].value
                    } else {
                        o.value
                    },
                })
                .collect();
            MarginalReturnSeries {
                axis: Axis::Row,
                group_index: g as u32,
                observations,
            }
        })
        .collect();

    (classes, groups)
}

/// Elementwise mean of member series (the "averaged" merged group).
fn mean_series(members: &[&MarginalReturnSeries]) -> MarginalReturnSeries {
    let first = members[0];
    let k = members.len() as f64;
    let observations = first
        .observations
        .iter()
        .enumerate()
        .map(|(i, o)| Observation {
            match_id: o.match_id.clone(),
            team_id: o.team_id.clone(),
            value: members.iter().map(|s| s.observations[i].value).sum::<f64>() / k,
        })
        .collect();
    MarginalReturnSeries {
        axis: first.axis,
        group_index: first.group_index,
        observations,
    }
}

/// Single left-to-right merge pass.
///
/// The running group is represented by the mean of its member series; a
/// neighbour that does not test as separate is absorbed, otherwise the
/// group closes and a new one starts. Only adjacent groups ever merge.
pub fn merge_scan(
    groups: &[MarginalReturnSeries],
    config: &MinimalEffectConfig,
) -> Result<MergePartition> {
    let axis = groups.first().map_or(Axis::Column, |g| g.axis);
    if groups.is_empty() {
        return Ok(MergePartition {
            axis,
            groups: Vec::new(),
        });
    }

    let mut partition: Vec<Vec<u32>> = Vec::new();
    let mut members: Vec<&MarginalReturnSeries> = vec![&groups[0]];

    for next in &groups[1..] {
        let current = mean_series(&members);
        if minimal_effect_separate(&current, next, config)? {
            partition.push(members.iter().map(|s| s.group_index).collect());
            members = vec![next];
        } else {
            members.push(next);
        }
    }
    partition.push(members.iter().map(|s| s.group_index).collect());
    Ok(MergePartition {
        axis,
        groups: partition,
    })
}

/// When a merged row group becomes one full-width zone instead of being
/// split by the column groups.
#[derive(Debug, Clone, PartialEq)]
pub struct FullWidthRule {
    /// Row groups whose share of all plays falls below this become
    /// full-width.
    pub max_play_share: f64,
    /// Row groups with fewer team-match observations carrying any visit
    /// than this cannot support a within-row column test and become
    /// full-width.
    pub min_observations: usize,
    /// Manual overrides, as 1-based 10m row-group indexes; a merged group
    /// containing any of them becomes full-width.
    pub force_rows: Vec<u32>,
}

impl Default for FullWidthRule {
    fn default() -> Self {
        FullWidthRule {
            max_play_share: 0.05,
            min_observations: 2,
            force_rows: Vec::new(),
        }
    }
}

/// One aggregated zone: a set of 5m-grid zones treated as a single state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggZone {
    pub id: ZoneId,
    pub full_width: bool,
    pub members: Vec<ZoneId>,
}

/// Aggregated partition of the 5m grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedZoneSystem {
    base: GridZoneSystem,
    zones: Vec<AggZone>,
    /// 5m zone index -> aggregated zone id.
    lookup: Vec<u32>,
    column_groups: Vec<Vec<u32>>,
    row_groups: Vec<Vec<u32>>,
    /// 1-based positions of full-width merged row groups.
    full_width_rows: Vec<u32>,
}

impl AggregatedZoneSystem {
    /// Rebuilds a system from its parts, validating that the members
    /// partition the base grid.
    pub fn from_parts(
        zones: Vec<AggZone>,
        column_groups: Vec<Vec<u32>>,
        row_groups: Vec<Vec<u32>>,
        full_width_rows: Vec<u32>,
    ) -> Result<Self> {
        let base = GridZoneSystem::grid5();
        let mut lookup = vec![0u32; base.zone_count()];
        for (pos, zone) in zones.iter().enumerate() {
            if zone.id.index0() != pos {
                return Err(Error::ContractViolation(format!(
                    "aggregated zone ids must run 1..=n in order, found {} at position {}",
                    zone.id,
                    pos + 1
                )));
            }
            if zone.members.is_empty() {
                return Err(Error::ContractViolation(format!(
                    "aggregated zone {} has no members",
                    zone.id
                )));
            }
            for member in &zone.members {
                let idx = member.index0();
                if idx >= lookup.len() {
                    return Err(Error::ContractViolation(format!(
                        "member zone {member} outside the 5m grid"
                    )));
                }
                if lookup[idx] != 0 {
                    return Err(Error::ContractViolation(format!(
                        "grid zone {member} assigned to two aggregated zones"
                    )));
                }
                lookup[idx] = zone.id.get();
            }
        }
        if let Some(hole) = lookup.iter().position(|v| *v == 0) {
            return Err(Error::ContractViolation(format!(
                "grid zone {} not covered by any aggregated zone",
                hole + 1
            )));
        }
        Ok(AggregatedZoneSystem {
            base,
            zones,
            lookup,
            column_groups,
            row_groups,
            full_width_rows,
        })
    }

    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn zones(&self) -> &[AggZone] {
        &self.zones
    }

    pub fn column_groups(&self) -> &[Vec<u32>] {
        &self.column_groups
    }

    pub fn row_groups(&self) -> &[Vec<u32>] {
        &self.row_groups
    }

    pub fn full_width_rows(&self) -> &[u32] {
        &self.full_width_rows
    }

    pub fn base_grid(&self) -> &GridZoneSystem {
        &self.base
    }

    pub fn zone_of(&self, x: f64, y: f64) -> Result<ZoneId> {
        let grid_zone = self.base.zone_of(x, y)?;
        Ok(ZoneId::new(self.lookup[grid_zone.index0()]))
    }

    /// Aggregated id of a 5m-grid zone.
    pub fn zone_of_grid(&self, grid_zone: ZoneId) -> ZoneId {
        ZoneId::new(self.lookup[grid_zone.index0()])
    }

    pub fn zone_rects(&self, zone: ZoneId) -> Vec<Rect> {
        self.zones[zone.index0()]
            .members
            .iter()
            .map(|m| self.base.zone_bounds(*m))
            .collect()
    }
}

/// Builds the aggregated zone system from a season of 5m-grid match
/// return matrices.
///
/// Columns merge scanning from the outermost class inward; rows scan from
/// the own-try-line end toward the opposition line. Zone ids count from
/// the own-try-line row upward, and within a split row from the outermost
/// column group inward.
pub fn build_aggregated_system(
    matrices: &[MatchReturnMatrix],
    grid: &GridZoneSystem,
    config: &MinimalEffectConfig,
    rule: &FullWidthRule,
) -> Result<AggregatedZoneSystem> {
    if grid.cell_length_m() != 5 {
        return Err(Error::ContractViolation(
            "aggregation is defined on the 5m grid".into(),
        ));
    }
    let (columns, rows) = marginal_returns(matrices, grid)?;
    let (classes, row_groups_10m) = fold_and_pair(&columns, &rows);
    let column_partition = merge_scan(&classes, config)?;
    let row_partition = merge_scan(&row_groups_10m, config)?;

    // Visit bookkeeping for the full-width rule, per 10m row group.
    let n_cols = grid.n_columns();
    let group_of_row = |row0: usize| row0 / 2; // 0-based 5m row -> 0-based 10m group
    let n_groups = grid.n_rows().div_ceil(2);
    let mut group_visits = vec![0u64; n_groups];
    let mut per_matrix_group_visits: Vec<Vec<u64>> = Vec::with_capacity(matrices.len());
    for matrix in matrices {
        let mut this = vec![0u64; n_groups];
        for row in 0..grid.n_rows() {
            for col in 0..n_cols {
                this[group_of_row(row)] += matrix.visits[row * n_cols + col];
            }
        }
        for (total, v) in group_visits.iter_mut().zip(&this) {
            *total += v;
        }
        per_matrix_group_visits.push(this);
    }
    let grand_total: u64 = group_visits.iter().sum();

    let is_full_width = |merged: &[u32]| -> bool {
        if merged.iter().any(|g| rule.force_rows.contains(g)) {
            return true;
        }
        let visits: u64 = merged.iter().map(|g| group_visits[(*g - 1) as usize]).sum();
        if grand_total == 0 {
            return true;
        }
        let share = visits as f64 / grand_total as f64;
        if share < rule.max_play_share {
            return true;
        }
        let observations = per_matrix_group_visits
            .iter()
            .filter(|per| merged.iter().any(|g| per[(*g - 1) as usize] > 0))
            .count();
        observations < rule.min_observations
    };

    // Assemble zones: row groups from the own try line upward, columns
    // from the outermost class inward.
    let mut zones = Vec::new();
    let mut full_width_rows = Vec::new();
    let mut next_id = 1u32;
    for (pos, merged_rows) in row_partition.groups.iter().enumerate() {
        let rows_5m: Vec<usize> = merged_rows
            .iter()
            .flat_map(|g| {
                let g0 = (*g - 1) as usize;
                [2 * g0, 2 * g0 + 1]
            })
            .filter(|r| *r < grid.n_rows())
            .collect();

        if is_full_width(merged_rows) {
            full_width_rows.push(pos as u32 + 1);
            let mut members: Vec<ZoneId> = rows_5m
                .iter()
                .flat_map(|row| (0..n_cols).map(move |col| (row, col)))
                .map(|(row, col)| grid.zone_at(*row, col))
                .collect();
            members.sort_unstable();
            zones.push(AggZone {
                id: ZoneId::new(next_id),
                full_width: true,
                members,
            });
            next_id += 1;
        } else {
            for class_group in &column_partition.groups {
                let mut cols0: Vec<usize> = class_group
                    .iter()
                    .flat_map(|class| {
                        let c = *class as usize;
                        let partner = n_cols + 1 - c;
                        if partner == c {
                            vec![c - 1]
                        } else {
                            vec![c - 1, partner - 1]
                        }
                    })
                    .collect();
                cols0.sort_unstable();
                let mut members: Vec<ZoneId> = rows_5m
                    .iter()
                    .flat_map(|row| cols0.iter().map(move |col| grid.zone_at(*row, *col)))
                    .collect();
                members.sort_unstable();
                zones.push(AggZone {
                    id: ZoneId::new(next_id),
                    full_width: false,
                    members,
                });
                next_id += 1;
            }
        }
    }

    AggregatedZoneSystem::from_parts(
        zones,
        column_partition.groups,
        row_partition.groups,
        full_width_rows,
    )
}

/// Aggregated zone values as visit-weighted averages of member 5m values.
pub fn aggregated_values(epv_5m: &EpvModel, system: &AggregatedZoneSystem) -> Result<EpvModel> {
    if epv_5m.zone_count() != system.base_grid().zone_count() {
        return Err(Error::ContractViolation(
            "model is not on the system's base 5m grid".into(),
        ));
    }
    let mut values = Vec::with_capacity(system.zone_count());
    let mut visits = Vec::with_capacity(system.zone_count());
    for zone in system.zones() {
        if zone.members.is_empty() {
            return Err(Error::ContractViolation(format!(
                "aggregated zone {} has no members",
                zone.id
            )));
        }
        let mut weighted = 0.0;
        let mut total: u64 = 0;
        for member in &zone.members {
            let idx = member.index0();
            if let Some(v) = epv_5m.values[idx] {
                weighted += v * epv_5m.visits[idx] as f64;
                total += epv_5m.visits[idx];
            }
        }
        values.push((total > 0).then(|| weighted / total as f64));
        visits.push(total);
    }
    Ok(EpvModel {
        gamma: epv_5m.gamma,
        values,
        visits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(match_id: &str, team_id: &str, entries: &[(usize, usize, f64, u64)]) -> MatchReturnMatrix {
        let grid = GridZoneSystem::grid5();
        let mut returns = vec![0.0; grid.zone_count()];
        let mut visits = vec![0u64; grid.zone_count()];
        for &(row, col, ret, vis) in entries {
            let idx = grid.zone_at(row, col).index0();
            returns[idx] = ret;
            visits[idx] = vis;
        }
        MatchReturnMatrix {
            match_id: match_id.into(),
            team_id: team_id.into(),
            returns,
            visits,
        }
    }

    #[test]
    fn marginal_returns_single_entry() {
        let grid = GridZoneSystem::grid5();
        // col 3 (0-based 2), row 10 (0-based 9), return 4.
        let m = matrix("M1", "A", &[(9, 2, 4.0, 1)]);
        let (cols, rows) = marginal_returns(&[m], &grid).unwrap();
        assert_eq!(cols.len(), 14);
        assert_eq!(rows.len(), 22);
        for (i, c) in cols.iter().enumerate() {
            let expected = if i == 2 { 4.0 } else { 0.0 };
            assert_eq!(c.observations[0].value, expected);
        }
        for (i, r) in rows.iter().enumerate() {
            let expected = if i == 9 { 4.0 } else { 0.0 };
            assert_eq!(r.observations[0].value, expected);
        }
    }

    #[test]
    fn marginal_returns_empty_input() {
        let grid = GridZoneSystem::grid5();
        let (cols, rows) = marginal_returns(&[], &grid).unwrap();
        assert_eq!(cols.len(), 14);
        assert_eq!(rows.len(), 22);
        assert!(cols.iter().all(|c| c.observations.is_empty()));
    }

    #[test]
    fn marginal_conservation() {
        let grid = GridZoneSystem::grid5();
        let m = matrix(
            "M1",
            "A",
            &[(0, 0, 2.0, 1), (9, 2, 4.0, 2), (21, 13, 1.5, 1), (11, 7, 3.25, 3)],
        );
        let total: f64 = m.returns.iter().sum();
        let (cols, rows) = marginal_returns(&[m], &grid).unwrap();
        let col_total: f64 = cols.iter().map(|c| c.observations[0].value).sum();
        let row_total: f64 = rows.iter().map(|r| r.observations[0].value).sum();
        assert!((col_total - total).abs() < 1e-12);
        assert!((row_total - total).abs() < 1e-12);
    }

    #[test]
    fn fold_sums_mirrored_columns() {
        let grid = GridZoneSystem::grid5();
        let m = matrix("M1", "A", &[(0, 0, 2.0, 1), (0, 13, 2.0, 1)]);
        let (cols, rows) = marginal_returns(&[m], &grid).unwrap();
        let (classes, groups) = fold_and_pair(&cols, &rows);
        assert_eq!(classes.len(), 7);
        assert_eq!(groups.len(), 11);
        assert_eq!(classes[0].observations[0].value, 4.0);
    }

    #[test]
    fn fold_symmetric_input_doubles() {
        let grid = GridZoneSystem::grid5();
        let entries: Vec<(usize, usize, f64, u64)> = (0..14)
            .map(|c| (5, c, f64::from((c as u32).min(13 - c as u32) + 1), 1))
            .collect();
        let m = matrix("M1", "A", &entries);
        let (cols, rows) = marginal_returns(&[m], &grid).unwrap();
        let (classes, _) = fold_and_pair(&cols, &rows);
        for (i, class) in classes.iter().enumerate() {
            let one_side = cols[i].observations[0].value;
            assert_eq!(class.observations[0].value, 2.0 * one_side);
        }
    }

    #[test]
    fn pair_adjacent_rows() {
        let grid = GridZoneSystem::grid5();
        let m = matrix("M1", "A", &[(0, 3, 3.0, 1), (1, 5, 5.0, 1)]);
        let (cols, rows) = marginal_returns(&[m], &grid).unwrap();
        let (_, groups) = fold_and_pair(&cols, &rows);
        assert_eq!(groups[0].observations[0].value, 8.0);
    }

    #[test]
    fn fold_conservation() {
        let grid = GridZoneSystem::grid5();
        let m = matrix(
            "M1",
            "A",
            &[(0, 0, 2.0, 1), (9, 2, 4.0, 2), (21, 13, 1.5, 1), (11, 7, 3.25, 3)],
        );
        let total: f64 = m.returns.iter().sum();
        let (cols, rows) = marginal_returns(&[m], &grid).unwrap();
        let (classes, groups) = fold_and_pair(&cols, &rows);
        let class_total: f64 = classes.iter().map(|c| c.observations[0].value).sum();
        let group_total: f64 = groups.iter().map(|g| g.observations[0].value).sum();
        assert!((class_total - total).abs() < 1e-9);
        assert!((group_total - total).abs() < 1e-9);
    }

    fn flat_series(group_index: u32, values: &[f64]) -> MarginalReturnSeries {
        MarginalReturnSeries {
            axis: Axis::Column,
            group_index,
            observations: values
                .iter()
                .enumerate()
                .map(|(i, v)| Observation {
                    match_id: format!("M{i}"),
                    team_id: "A".into(),
                    value: *v,
                })
                .collect(),
        }
    }

    #[test]
    fn merge_scan_identical_groups_collapse() {
        let groups: Vec<_> = (1..=7).map(|i| flat_series(i, &[2.0, 3.0, 4.0, 5.0])).collect();
        let partition = merge_scan(&groups, &MinimalEffectConfig::default()).unwrap();
        assert_eq!(partition.groups, vec![vec![1, 2, 3, 4, 5, 6, 7]]);
    }

    #[test]
    fn merge_scan_alternating_extremes_stay_apart() {
        let groups: Vec<_> = (1..=7)
            .map(|i| {
                let base = if i % 2 == 0 { 100.0 } else { 0.0 };
                // Tiny, non-zero variance.
                let values: Vec<f64> = (0..10).map(|j| base + f64::from(j % 2) * 1e-6).collect();
                flat_series(i, &values)
            })
            .collect();
        let partition = merge_scan(&groups, &MinimalEffectConfig::default()).unwrap();
        assert_eq!(partition.groups.len(), 7);
        assert!(partition.groups.iter().all(|g| g.len() == 1));
    }

    #[test]
    fn merge_scan_contiguity() {
        let groups: Vec<_> = vec![
            flat_series(1, &[0.0, 0.1, 0.0, 0.1]),
            flat_series(2, &[0.1, 0.0, 0.1, 0.0]),
            flat_series(3, &[50.0, 50.1, 50.0, 50.1]),
            flat_series(4, &[50.1, 50.0, 50.1, 50.0]),
        ];
        let partition = merge_scan(&groups, &MinimalEffectConfig::default()).unwrap();
        assert_eq!(partition.groups, vec![vec![1, 2], vec![3, 4]]);
        // Contiguity: each group is a run of consecutive indexes.
        for group in &partition.groups {
            for pair in group.windows(2) {
                assert_eq!(pair[1], pair[0] + 1);
            }
        }
    }

    #[test]
    fn merge_scan_propagates_insufficient_data() {
        let groups = vec![flat_series(1, &[1.0]), flat_series(2, &[1.0])];
        assert!(matches!(
            merge_scan(&groups, &MinimalEffectConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    /// Synthetic matrices with blocky row/column structure for end-to-end
    /// aggregation tests: `col_level[class] + row_level[group]` per zone,
    /// plus a deterministic per-match wobble.
    fn structured_matrices(
        n_obs: usize,
        class_levels: &[f64; 7],
        group_levels: &[f64; 11],
    ) -> Vec<MatchReturnMatrix> {
        let grid = GridZoneSystem::grid5();
        (0..n_obs)
            .map(|i| {
                let wobble = (i as f64 * 0.37).sin() * 0.01;
                let mut returns = vec![0.0; grid.zone_count()];
                let mut visits = vec![0u64; grid.zone_count()];
                for row in 0..22 {
                    for col in 0..14 {
                        let class = col.min(13 - col); // 0-based
                        let group = row / 2;
                        let idx = grid.zone_at(row, col).index0();
                        // Spread the class/group level over its members.
                        returns[idx] = class_levels[class] / 44.0
                            + group_levels[group] / 28.0
                            + wobble;
                        visits[idx] = 1;
                    }
                }
                MatchReturnMatrix {
                    match_id: format!("M{i}"),
                    team_id: format!("T{}", i % 4),
                    returns,
                    visits,
                }
            })
            .collect()
    }

    #[test]
    fn build_recovers_blocky_structure() {
        // 2 column regimes, 2 row regimes; every row visited heavily so
        // the full-width rule stays quiet.
        let matrices = structured_matrices(
            30,
            &[0.0, 0.0, 0.0, 44.0, 44.0, 44.0, 44.0],
            &[0.0, 0.0, 0.0, 0.0, 0.0, 28.0, 28.0, 28.0, 28.0, 28.0, 28.0],
        );
        let grid = GridZoneSystem::grid5();
        let system = build_aggregated_system(
            &matrices,
            &grid,
            &MinimalEffectConfig::default(),
            &FullWidthRule::default(),
        )
        .unwrap();
        assert_eq!(system.column_groups(), &[vec![1, 2, 3], vec![4, 5, 6, 7]]);
        assert_eq!(system.row_groups(), &[vec![1, 2, 3, 4, 5], (6..=11).collect::<Vec<u32>>()]);
        assert!(system.full_width_rows().is_empty());
        assert_eq!(system.zone_count(), 4);
    }

    #[test]
    fn degenerate_partitions() {
        let grid = GridZoneSystem::grid5();
        // Everything merges: identical matrices.
        let matrices = structured_matrices(20, &[1.0; 7], &[1.0; 11]);
        let system = build_aggregated_system(
            &matrices,
            &grid,
            &MinimalEffectConfig::default(),
            &FullWidthRule::default(),
        )
        .unwrap();
        assert_eq!(system.zone_count(), 1);

        // Nothing merges: alternating extreme levels -> 7 x 11 ceiling.
        let class_levels = [0.0, 500.0, 0.0, 500.0, 0.0, 500.0, 0.0];
        let group_levels = [0.0, 500.0, 0.0, 500.0, 0.0, 500.0, 0.0, 500.0, 0.0, 500.0, 0.0];
        let matrices = structured_matrices(30, &class_levels, &group_levels);
        let rule = FullWidthRule {
            max_play_share: 0.0,
            ..FullWidthRule::default()
        };
        let system =
            build_aggregated_system(&matrices, &grid, &MinimalEffectConfig::default(), &rule)
                .unwrap();
        assert_eq!(system.zone_count(), 77);
    }

    #[test]
    fn zone_ids_count_from_own_line_outermost_first() {
        let matrices = structured_matrices(
            30,
            &[0.0, 0.0, 0.0, 44.0, 44.0, 44.0, 44.0],
            &[0.0, 0.0, 0.0, 0.0, 0.0, 28.0, 28.0, 28.0, 28.0, 28.0, 28.0],
        );
        let grid = GridZoneSystem::grid5();
        let system = build_aggregated_system(
            &matrices,
            &grid,
            &MinimalEffectConfig::default(),
            &FullWidthRule::default(),
        )
        .unwrap();
        // Zone 1: bottom row group x outermost columns {1,2,3,12,13,14}.
        let zone1 = &system.zones()[0];
        assert!(zone1.members.contains(&grid.zone_at(0, 0)));
        assert!(zone1.members.contains(&grid.zone_at(0, 13)));
        assert!(!zone1.members.contains(&grid.zone_at(0, 6)));
        // Last zone: top rows x central columns.
        let last = system.zones().last().unwrap();
        assert!(last.members.contains(&grid.zone_at(21, 6)));
    }

    #[test]
    fn full_width_by_play_share() {
        // Bottom row group barely visited -> full width.
        let grid = GridZoneSystem::grid5();
        let matrices: Vec<MatchReturnMatrix> = (0..20)
            .map(|i| {
                let wobble = (i as f64 * 0.59).sin() * 0.01;
                let mut returns = vec![0.0; grid.zone_count()];
                let mut visits = vec![0u64; grid.zone_count()];
                for row in 0..22 {
                    for col in 0..14 {
                        let idx = grid.zone_at(row, col).index0();
                        if row < 2 {
                            // one visit in the corner only, tiny share
                            if row == 0 && col == 0 {
                                returns[idx] = 0.1 + wobble;
                                visits[idx] = 1;
                            }
                        } else {
                            returns[idx] = 1.0 + wobble;
                            visits[idx] = 10;
                        }
                    }
                }
                MatchReturnMatrix {
                    match_id: format!("M{i}"),
                    team_id: "A".into(),
                    returns,
                    visits,
                }
            })
            .collect();
        let system = build_aggregated_system(
            &matrices,
            &grid,
            &MinimalEffectConfig::default(),
            &FullWidthRule::default(),
        )
        .unwrap();
        assert_eq!(system.full_width_rows(), &[1]);
        let zone1 = &system.zones()[0];
        assert!(zone1.full_width);
        assert_eq!(zone1.members.len(), 28); // 2 rows x 14 columns
    }

    #[test]
    fn aggregated_values_weighted_average() {
        let grid = GridZoneSystem::grid5();
        let mut values = vec![None; grid.zone_count()];
        let mut visits = vec![0u64; grid.zone_count()];
        values[0] = Some(2.0);
        visits[0] = 10;
        values[1] = Some(6.0);
        visits[1] = 30;
        let epv = EpvModel {
            gamma: 1.0,
            values,
            visits,
        };
        let zones = vec![
            AggZone {
                id: ZoneId::new(1),
                full_width: false,
                members: vec![ZoneId::new(1), ZoneId::new(2)],
            },
            AggZone {
                id: ZoneId::new(2),
                full_width: false,
                members: (3..=grid.zone_count() as u32).map(ZoneId::new).collect(),
            },
        ];
        let system = AggregatedZoneSystem::from_parts(zones, vec![], vec![], vec![]).unwrap();
        let agg = aggregated_values(&epv, &system).unwrap();
        assert_eq!(agg.values[0], Some(5.0));
        assert_eq!(agg.visits[0], 40);
        assert_eq!(agg.values[1], None); // no member data -> no-data flag
        assert_eq!(agg.visits[1], 0);
    }

    #[test]
    fn from_parts_rejects_non_partition() {
        let zones = vec![AggZone {
            id: ZoneId::new(1),
            full_width: false,
            members: vec![ZoneId::new(1)],
        }];
        assert!(AggregatedZoneSystem::from_parts(zones, vec![], vec![], vec![]).is_err());

        let zones = vec![
            AggZone {
                id: ZoneId::new(1),
                full_width: false,
                members: (1..=308).map(ZoneId::new).collect(),
            },
            AggZone {
                id: ZoneId::new(2),
                full_width: false,
                members: vec![ZoneId::new(5)],
            },
        ];
        assert!(AggregatedZoneSystem::from_parts(zones, vec![], vec![], vec![]).is_err());
    }
}
