//! Pitch coordinate frame and fixed-grid zone systems.
//!
//! The coordinate frame puts `x` across the pitch width (0 to 68m) and `y`
//! along its length, with `y = 0` the attacking team's own try line and
//! `y = 100` the opposition try line. In-goal areas are 10m deep, so the
//! full pitch spans `y` in [-10, 110]. Zone systems cover [-10, 100) only:
//! the opposition in-goal carries no zones.

use serde::{Deserialize, Serialize};

use crate::aggregation::AggregatedZoneSystem;
use crate::error::{Error, Result};

/// Standardised pitch dimensions in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pitch {
    pub width_m: f64,
    pub length_m: f64,
    pub own_in_goal_depth_m: f64,
    pub opp_in_goal_depth_m: f64,
}

impl Pitch {
    /// The 68m x 120m frame every supplier feed is normalised to.
    pub fn standard() -> Self {
        Pitch {
            width_m: 68.0,
            length_m: 120.0,
            own_in_goal_depth_m: 10.0,
            opp_in_goal_depth_m: 10.0,
        }
    }

    /// Lowest modelled y (own dead-ball line).
    pub fn y_min(&self) -> f64 {
        -self.own_in_goal_depth_m
    }

    /// Upper y bound of the modelled area (opposition try line, exclusive).
    pub fn y_model_max(&self) -> f64 {
        self.length_m - self.own_in_goal_depth_m - self.opp_in_goal_depth_m
    }

    /// Highest coordinate the feed may carry (opposition dead-ball line).
    pub fn y_max(&self) -> f64 {
        self.length_m - self.own_in_goal_depth_m
    }
}

impl Default for Pitch {
    fn default() -> Self {
        Pitch::standard()
    }
}

/// One-based zone identifier, row-major from the own dead-ball line
/// upward, left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(u32);

impl ZoneId {
    pub fn new(index: u32) -> Self {
        assert!(index >= 1, "zone ids are 1-based");
        ZoneId(index)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based position for dense vectors.
    pub fn index0(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl std::fmt::Display for ZoneId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Axis-aligned rectangle in pitch metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Fixed rectangular grid over the modelled pitch area.
///
/// Cells are half-open (`[lo, hi)`) along both axes; the final x boundary
/// (x = 68) belongs to the last column so integer-metre feeds resolve
/// deterministically. Rows never face the closure case because y = 100
/// is already outside the modelled area.
#[derive(Debug, Clone, PartialEq)]
pub struct GridZoneSystem {
    cell_length_m: u32,
    column_edges: Vec<f64>,
    row_edges: Vec<f64>,
}

/// Builds the 5m (308-zone) or 10m (77-zone) grid.
///
/// The two widest columns are 1m narrower than the interior ones so that
/// integer-metre locations split evenly: 68 = 4 + 12x5 + 4 = 9 + 5x10 + 9.
pub fn build_grid(cell_length_m: u32, pitch: &Pitch) -> Result<GridZoneSystem> {
    if *pitch != Pitch::standard() {
        return Err(Error::Config(
            "zone grids are defined for the standard 68m x 120m pitch".into(),
        ));
    }
    let (edge_col_m, n_interior) = match cell_length_m {
        5 => (4.0, 12u32),
        10 => (9.0, 5u32),
        other => {
            return Err(Error::Config(format!(
                "unsupported cell length {other}m (expected 5 or 10)"
            )))
        }
    };

    let mut column_edges = vec![0.0, edge_col_m];
    for i in 1..=n_interior {
        column_edges.push(edge_col_m + f64::from(i * cell_length_m));
    }
    column_edges.push(pitch.width_m);

    let n_rows = ((pitch.y_model_max() - pitch.y_min()) / f64::from(cell_length_m)) as u32;
    let row_edges = (0..=n_rows)
        .map(|i| pitch.y_min() + f64::from(i * cell_length_m))
        .collect();

    Ok(GridZoneSystem {
        cell_length_m,
        column_edges,
        row_edges,
    })
}

impl GridZoneSystem {
    pub fn grid5() -> Self {
        build_grid(5, &Pitch::standard()).expect("standard 5m grid")
    }

    pub fn grid10() -> Self {
        build_grid(10, &Pitch::standard()).expect("standard 10m grid")
    }

    pub fn cell_length_m(&self) -> u32 {
        self.cell_length_m
    }

    pub fn n_columns(&self) -> usize {
        self.column_edges.len() - 1
    }

    pub fn n_rows(&self) -> usize {
        self.row_edges.len() - 1
    }

    pub fn zone_count(&self) -> usize {
        self.n_columns() * self.n_rows()
    }

    pub fn column_edges(&self) -> &[f64] {
        &self.column_edges
    }

    pub fn row_edges(&self) -> &[f64] {
        &self.row_edges
    }

    /// Zone at (zero-based) row and column.
    pub fn zone_at(&self, row: usize, column: usize) -> ZoneId {
        debug_assert!(row < self.n_rows() && column < self.n_columns());
        ZoneId::new((row * self.n_columns() + column + 1) as u32)
    }

    /// Zero-based (row, column) of a zone.
    pub fn row_col(&self, zone: ZoneId) -> (usize, usize) {
        let idx = zone.index0();
        (idx / self.n_columns(), idx % self.n_columns())
    }

    pub fn zone_bounds(&self, zone: ZoneId) -> Rect {
        let (row, col) = self.row_col(zone);
        Rect {
            x0: self.column_edges[col],
            y0: self.row_edges[row],
            x1: self.column_edges[col + 1],
            y1: self.row_edges[row + 1],
        }
    }

    /// Maps a pitch point to its zone.
    pub fn zone_of(&self, x: f64, y: f64) -> Result<ZoneId> {
        let pitch = Pitch::standard();
        if !x.is_finite()
            || !y.is_finite()
            || x < 0.0
            || x > pitch.width_m
            || y < pitch.y_min()
            || y > pitch.y_max()
        {
            return Err(Error::InvalidCoordinate { x, y, line: None });
        }
        if y >= pitch.y_model_max() {
            return Err(Error::OutOfModelArea { x, y });
        }
        let col = cell_of(&self.column_edges, x);
        let row = cell_of(&self.row_edges, y);
        Ok(self.zone_at(row, col))
    }
}

/// Half-open cell lookup; a point on the final edge falls in the last cell.
fn cell_of(edges: &[f64], v: f64) -> usize {
    let cells = edges.len() - 1;
    let pos = edges.partition_point(|e| *e <= v);
    // pos == 0 cannot happen for validated input; pos == edges.len() only
    // when v equals the final edge.
    (pos - 1).min(cells - 1)
}

/// A left-right symmetric pair of grid columns, counted from the outside in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MirrorClass {
    pub class_index: u32,
    pub member_columns: (u32, u32),
}

/// Pairs column `c` with column `n + 1 - c`.
///
/// On an odd-width grid the central column pairs with itself.
pub fn mirror_class(column: u32, n_columns: u32) -> Result<MirrorClass> {
    if column < 1 || column > n_columns {
        return Err(Error::InvalidCoordinate {
            x: f64::from(column),
            y: f64::NAN,
            line: None,
        });
    }
    let partner = n_columns + 1 - column;
    let class_index = column.min(partner);
    Ok(MirrorClass {
        class_index,
        member_columns: (column.min(partner), column.max(partner)),
    })
}

/// Number of mirror classes on an `n_columns`-wide grid.
pub fn mirror_class_count(n_columns: u32) -> u32 {
    n_columns.div_ceil(2)
}

/// A partition of the modelled pitch area into zones: either a fixed grid
/// or a data-driven aggregated system built on the 5m grid.
#[derive(Debug, Clone)]
pub enum ZoneSystem {
    Grid(GridZoneSystem),
    Aggregated(AggregatedZoneSystem),
}

impl ZoneSystem {
    pub fn grid5() -> Self {
        ZoneSystem::Grid(GridZoneSystem::grid5())
    }

    pub fn grid10() -> Self {
        ZoneSystem::Grid(GridZoneSystem::grid10())
    }

    pub fn zone_count(&self) -> usize {
        match self {
            ZoneSystem::Grid(g) => g.zone_count(),
            ZoneSystem::Aggregated(a) => a.zone_count(),
        }
    }

    pub fn zone_of(&self, x: f64, y: f64) -> Result<ZoneId> {
        match self {
            ZoneSystem::Grid(g) => g.zone_of(x, y),
            ZoneSystem::Aggregated(a) => a.zone_of(x, y),
        }
    }

    /// Rectangles covered by a zone. Grid zones own one rectangle;
    /// aggregated zones own one per member 5m zone.
    pub fn zone_rects(&self, zone: ZoneId) -> Vec<Rect> {
        match self {
            ZoneSystem::Grid(g) => vec![g.zone_bounds(zone)],
            ZoneSystem::Aggregated(a) => a.zone_rects(zone),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ZoneSystem::Grid(g) => format!("grid{}", g.cell_length_m()),
            ZoneSystem::Aggregated(a) => format!("aggregated{}", a.zone_count()),
        }
    }
}
