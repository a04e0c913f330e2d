//! Event CSV parsing, validation and normalisation into the attacking frame.
//!
//! Canonical schema (UTF-8, comma-separated, integer-metre coordinates):
//!
//! ```text
//! match_id,team_id,set_number,play_number,x,y,action,outcome
//! ```
//!
//! Raw-orientation feeds carry one extra `direction` column (`up`/`down`).
//! Actions form a closed vocabulary; unknown tokens fail loudly.

use std::io::Read;

use crate::error::{Error, Result};
use crate::geometry::Pitch;

/// Closed action vocabulary. `Play` is the generic continuation action;
/// the rest end the possession.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Play,
    Error,
    Handover,
    FieldKick,
    PenaltyGoal,
    DropGoal,
    Try,
}

impl Action {
    pub fn from_token(token: &str, line: u64) -> Result<Self> {
        match token {
            "play" => Ok(Action::Play),
            "error" => Ok(Action::Error),
            "handover" => Ok(Action::Handover),
            "field_kick" => Ok(Action::FieldKick),
            "penalty_goal" => Ok(Action::PenaltyGoal),
            "drop_goal" => Ok(Action::DropGoal),
            "try" => Ok(Action::Try),
            _ => Err(Error::UnknownAction {
                token: token.to_string(),
                line,
            }),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Action::Play => "play",
            Action::Error => "error",
            Action::Handover => "handover",
            Action::FieldKick => "field_kick",
            Action::PenaltyGoal => "penalty_goal",
            Action::DropGoal => "drop_goal",
            Action::Try => "try",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeToken {
    Made,
    Missed,
    Converted,
    Unconverted,
}

impl OutcomeToken {
    pub fn from_token(token: &str, line: u64) -> Result<Option<Self>> {
        match token {
            "" => Ok(None),
            "made" => Ok(Some(OutcomeToken::Made)),
            "missed" => Ok(Some(OutcomeToken::Missed)),
            "converted" => Ok(Some(OutcomeToken::Converted)),
            "unconverted" => Ok(Some(OutcomeToken::Unconverted)),
            _ => Err(Error::UnknownOutcome {
                token: token.to_string(),
                line,
            }),
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            OutcomeToken::Made => "made",
            OutcomeToken::Missed => "missed",
            OutcomeToken::Converted => "converted",
            OutcomeToken::Unconverted => "unconverted",
        }
    }
}

/// Attack direction of the acting team, for raw-orientation feeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackDirection {
    Up,
    Down,
}

/// One validated event row.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEvent {
    pub match_id: String,
    pub team_id: String,
    pub set_number: u32,
    pub play_number: u32,
    pub x: f64,
    pub y: f64,
    pub action: Action,
    pub outcome: Option<OutcomeToken>,
    pub direction: Option<AttackDirection>,
    /// 1-based source line, for diagnostics.
    pub line: u64,
}

/// How the final play of a possession ended it, if it did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalMarker {
    None,
    Error,
    Handover,
    FieldKick,
    PenaltyGoalAttempt { scored: bool },
    DropGoalAttempt { scored: bool },
    TryScored { converted: bool },
}

impl TerminalMarker {
    pub fn is_terminal(self) -> bool {
        self != TerminalMarker::None
    }
}

/// One play, oriented so its team attacks toward y = 100.
#[derive(Debug, Clone, PartialEq)]
pub struct Play {
    pub match_id: String,
    pub team_id: String,
    /// 1-based chronological index within the match.
    pub order: u32,
    pub x: f64,
    pub y: f64,
    pub marker: TerminalMarker,
}

/// Coordinate-frame handling for `normalize`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Input already oriented attacking toward y = 100.
    AttackingFrame,
    /// Input carries a per-row `direction` column; `down` rows are reflected.
    Raw,
}

/// Parses the events CSV. Rows come back in file order; every row either
/// parses fully or the first failure is reported with its line number.
pub fn parse_events<R: Read>(reader: R) -> Result<Vec<RawEvent>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv_reader.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let required = [
        "match_id",
        "team_id",
        "set_number",
        "play_number",
        "x",
        "y",
        "action",
        "outcome",
    ];
    let mut idx = [0usize; 8];
    for (i, name) in required.iter().enumerate() {
        idx[i] = col(name).ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("missing required column '{name}'"),
        })?;
    }
    let direction_idx = col("direction");

    let pitch = Pitch::standard();
    let mut events = Vec::new();
    for record in csv_reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str> {
            record.get(idx[i]).ok_or_else(|| Error::Parse {
                line,
                message: "row has too few fields".into(),
            })
        };

        let set_number = parse_u32(field(2)?, "set_number", line)?;
        let play_number = parse_u32(field(3)?, "play_number", line)?;
        if play_number < 1 {
            return Err(Error::Parse {
                line,
                message: "play_number must be >= 1".into(),
            });
        }
        // Supplier precision is one metre; the schema carries integers.
        let x = f64::from(parse_i32(field(4)?, "x", line)?);
        let y = f64::from(parse_i32(field(5)?, "y", line)?);
        if x < 0.0 || x > pitch.width_m || y < pitch.y_min() || y > pitch.y_max() {
            return Err(Error::InvalidCoordinate {
                x,
                y,
                line: Some(line),
            });
        }

        let action = Action::from_token(field(6)?, line)?;
        let outcome = OutcomeToken::from_token(field(7)?, line)?;
        let direction = match direction_idx.and_then(|i| record.get(i)) {
            None | Some("") => None,
            Some("up") => Some(AttackDirection::Up),
            Some("down") => Some(AttackDirection::Down),
            Some(other) => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown direction token '{other}'"),
                })
            }
        };

        events.push(RawEvent {
            match_id: field(0)?.to_string(),
            team_id: field(1)?.to_string(),
            set_number,
            play_number,
            x,
            y,
            action,
            outcome,
            direction,
            line,
        });
    }
    Ok(events)
}

fn parse_u32(s: &str, name: &str, line: u64) -> Result<u32> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} '{s}'"),
    })
}

fn parse_i32(s: &str, name: &str, line: u64) -> Result<i32> {
    s.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {name} '{s}'"),
    })
}

/// Reflects a point into the opposite attacking frame. Involutive.
pub fn reflect(x: f64, y: f64) -> (f64, f64) {
    (68.0 - x, 100.0 - y)
}

/// Orients every event into its team's attacking frame and attaches
/// terminal markers from the action/outcome tokens. Output order equals
/// input order; `order` counts plays per match.
pub fn normalize(events: &[RawEvent], orientation: Orientation) -> Result<Vec<Play>> {
    let mut plays = Vec::with_capacity(events.len());
    let mut match_counters: indexmap::IndexMap<&str, u32> = indexmap::IndexMap::new();

    for event in events {
        let (x, y) = match orientation {
            Orientation::AttackingFrame => (event.x, event.y),
            Orientation::Raw => match event.direction {
                Some(AttackDirection::Up) => (event.x, event.y),
                Some(AttackDirection::Down) => reflect(event.x, event.y),
                None => return Err(Error::MissingDirection { line: event.line }),
            },
        };

        let marker = marker_of(event)?;
        let counter = match_counters.entry(event.match_id.as_str()).or_insert(0);
        *counter += 1;

        plays.push(Play {
            match_id: event.match_id.clone(),
            team_id: event.team_id.clone(),
            order: *counter,
            x,
            y,
            marker,
        });
    }
    Ok(plays)
}

fn marker_of(event: &RawEvent) -> Result<TerminalMarker> {
    let line = event.line;
    let bad_outcome = |token: &str| Error::Parse {
        line,
        message: format!(
            "action '{}' does not take outcome '{token}'",
            event.action.token()
        ),
    };
    let missing_outcome = || Error::Parse {
        line,
        message: format!("action '{}' requires an outcome", event.action.token()),
    };

    match (event.action, event.outcome) {
        (Action::Play, None) => Ok(TerminalMarker::None),
        (Action::Error, None) => Ok(TerminalMarker::Error),
        (Action::Handover, None) => Ok(TerminalMarker::Handover),
        (Action::FieldKick, None) => Ok(TerminalMarker::FieldKick),
        (Action::PenaltyGoal, Some(OutcomeToken::Made)) => {
            Ok(TerminalMarker::PenaltyGoalAttempt { scored: true })
        }
        (Action::PenaltyGoal, Some(OutcomeToken::Missed)) => {
            Ok(TerminalMarker::PenaltyGoalAttempt { scored: false })
        }
        (Action::DropGoal, Some(OutcomeToken::Made)) => {
            Ok(TerminalMarker::DropGoalAttempt { scored: true })
        }
        (Action::DropGoal, Some(OutcomeToken::Missed)) => {
            Ok(TerminalMarker::DropGoalAttempt { scored: false })
        }
        (Action::Try, Some(OutcomeToken::Converted)) => {
            Ok(TerminalMarker::TryScored { converted: true })
        }
        (Action::Try, Some(OutcomeToken::Unconverted)) => {
            Ok(TerminalMarker::TryScored { converted: false })
        }
        (_, Some(o)) => Err(bad_outcome(o.token())),
        (_, None) => Err(missing_outcome()),
    }
}
