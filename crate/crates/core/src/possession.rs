//! Possession segmentation and terminal rewards.
//!
//! An attacking possession is a maximal run of plays by one team ending in
//! an error, handover, field kick, goal attempt, or try. A change of team
//! with no explicit marker on the previous play is treated as a handover.

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::ingest::{Play, TerminalMarker};

/// One Markov-chain episode: ordered plays plus the terminal reward.
#[derive(Debug, Clone, PartialEq)]
pub struct Possession {
    pub match_id: String,
    pub team_id: String,
    pub plays: Vec<Play>,
    /// Points from the terminal marker: 0, 1, 2, 4 or 6.
    pub reward: u8,
}

impl Possession {
    pub fn len(&self) -> usize {
        self.plays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plays.is_empty()
    }
}

/// Points awarded for a possession-ending marker.
pub fn assign_reward(marker: TerminalMarker) -> Result<u8> {
    match marker {
        TerminalMarker::TryScored { converted: true } => Ok(6),
        TerminalMarker::TryScored { converted: false } => Ok(4),
        TerminalMarker::PenaltyGoalAttempt { scored: true } => Ok(2),
        TerminalMarker::DropGoalAttempt { scored: true } => Ok(1),
        TerminalMarker::PenaltyGoalAttempt { scored: false }
        | TerminalMarker::DropGoalAttempt { scored: false }
        | TerminalMarker::Error
        | TerminalMarker::Handover
        | TerminalMarker::FieldKick => Ok(0),
        TerminalMarker::None => Err(Error::ContractViolation(
            "assign_reward called with a non-terminal marker".into(),
        )),
    }
}

/// Segments one match's plays (chronological order) into possessions.
///
/// A possession closes at a terminal marker or when the next play belongs
/// to the other team (implied handover, reward 0). A terminal marker
/// followed by a same-team play indicates a corrupt feed.
pub fn segment(plays: &[Play]) -> Result<Vec<Possession>> {
    let mut possessions = Vec::new();
    let mut current: Vec<Play> = Vec::new();
    let mut closed_by_marker = false;

    for play in plays {
        if let Some(prev) = current.last() {
            if prev.match_id != play.match_id {
                return Err(Error::ContractViolation(
                    "segment expects plays from a single match".into(),
                ));
            }
            if closed_by_marker {
                if prev.team_id == play.team_id {
                    return Err(Error::Segmentation(format!(
                        "terminal marker at play {} of match {} followed by a same-team play",
                        prev.order, prev.match_id
                    )));
                }
                close(&mut possessions, &mut current, false)?;
            } else if prev.team_id != play.team_id {
                close(&mut possessions, &mut current, true)?;
            }
        }
        closed_by_marker = play.marker.is_terminal();
        current.push(play.clone());
    }
    if !current.is_empty() {
        let implied = !closed_by_marker;
        close(&mut possessions, &mut current, implied)?;
    }
    Ok(possessions)
}

fn close(
    possessions: &mut Vec<Possession>,
    current: &mut Vec<Play>,
    implied_handover: bool,
) -> Result<()> {
    let mut plays = std::mem::take(current);
    if implied_handover {
        let last = plays.last_mut().expect("close called with plays");
        debug_assert_eq!(last.marker, TerminalMarker::None);
        last.marker = TerminalMarker::Handover;
    }
    let last = plays.last().expect("close called with plays");
    let reward = assign_reward(last.marker)?;
    possessions.push(Possession {
        match_id: last.match_id.clone(),
        team_id: last.team_id.clone(),
        reward,
        plays,
    });
    Ok(())
}

/// Groups plays by match (first-appearance order) and segments each match.
pub fn segment_matches(plays: &[Play]) -> Result<Vec<Possession>> {
    let mut by_match: IndexMap<&str, Vec<Play>> = IndexMap::new();
    for play in plays {
        by_match
            .entry(play.match_id.as_str())
            .or_default()
            .push(play.clone());
    }
    let mut possessions = Vec::new();
    for match_plays in by_match.into_values() {
        possessions.extend(segment(&match_plays)?);
    }
    Ok(possessions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn play(team: &str, order: u32, marker: TerminalMarker) -> Play {
        Play {
            match_id: "M1".into(),
            team_id: team.into(),
            order,
            x: 34.0,
            y: 50.0,
            marker,
        }
    }

    #[test]
    fn field_kick_ends_one_possession() {
        let plays = vec![
            play("A", 1, TerminalMarker::None),
            play("A", 2, TerminalMarker::None),
            play("A", 3, TerminalMarker::None),
            play("A", 4, TerminalMarker::FieldKick),
        ];
        let possessions = segment(&plays).unwrap();
        assert_eq!(possessions.len(), 1);
        assert_eq!(possessions[0].len(), 4);
        assert_eq!(possessions[0].reward, 0);
    }

    #[test]
    fn try_then_opponent_error() {
        let plays = vec![
            play("A", 1, TerminalMarker::None),
            play("A", 2, TerminalMarker::None),
            play("A", 3, TerminalMarker::TryScored { converted: true }),
            play("B", 4, TerminalMarker::None),
            play("B", 5, TerminalMarker::Error),
        ];
        let possessions = segment(&plays).unwrap();
        assert_eq!(possessions.len(), 2);
        assert_eq!(possessions[0].reward, 6);
        assert_eq!(possessions[1].reward, 0);
    }

    #[test]
    fn single_play_drop_goal() {
        let plays = vec![play("A", 1, TerminalMarker::DropGoalAttempt { scored: true })];
        let possessions = segment(&plays).unwrap();
        assert_eq!(possessions.len(), 1);
        assert_eq!(possessions[0].len(), 1);
        assert_eq!(possessions[0].reward, 1);
    }

    #[test]
    fn team_change_implies_handover() {
        let plays = vec![
            play("A", 1, TerminalMarker::None),
            play("B", 2, TerminalMarker::Handover),
        ];
        let possessions = segment(&plays).unwrap();
        assert_eq!(possessions.len(), 2);
        assert_eq!(possessions[0].reward, 0);
        assert_eq!(
            possessions[0].plays.last().unwrap().marker,
            TerminalMarker::Handover
        );
    }

    #[test]
    fn marker_followed_by_same_team_is_corrupt() {
        let plays = vec![
            play("A", 1, TerminalMarker::FieldKick),
            play("A", 2, TerminalMarker::None),
        ];
        assert!(matches!(segment(&plays), Err(Error::Segmentation(_))));
    }

    #[test]
    fn empty_input_empty_output() {
        assert!(segment(&[]).unwrap().is_empty());
    }

    #[test]
    fn unterminated_tail_closes_with_zero_reward() {
        let plays = vec![play("A", 1, TerminalMarker::None), play("A", 2, TerminalMarker::None)];
        let possessions = segment(&plays).unwrap();
        assert_eq!(possessions.len(), 1);
        assert_eq!(possessions[0].reward, 0);
    }

    #[test]
    fn partition_preserves_play_order() {
        let plays = vec![
            play("A", 1, TerminalMarker::None),
            play("A", 2, TerminalMarker::TryScored { converted: false }),
            play("B", 3, TerminalMarker::None),
            play("A", 4, TerminalMarker::Error),
            play("B", 5, TerminalMarker::None),
        ];
        let possessions = segment(&plays).unwrap();
        let flattened: Vec<u32> = possessions
            .iter()
            .flat_map(|p| p.plays.iter().map(|pl| pl.order))
            .collect();
        assert_eq!(flattened, vec![1, 2, 3, 4, 5]);
        assert!(possessions.iter().all(|p| [0u8, 1, 2, 4, 6].contains(&p.reward)));
    }

    #[test]
    fn reward_mapping() {
        assert_eq!(assign_reward(TerminalMarker::TryScored { converted: true }).unwrap(), 6);
        assert_eq!(assign_reward(TerminalMarker::TryScored { converted: false }).unwrap(), 4);
        assert_eq!(assign_reward(TerminalMarker::PenaltyGoalAttempt { scored: true }).unwrap(), 2);
        assert_eq!(assign_reward(TerminalMarker::PenaltyGoalAttempt { scored: false }).unwrap(), 0);
        assert_eq!(assign_reward(TerminalMarker::DropGoalAttempt { scored: true }).unwrap(), 1);
        assert!(assign_reward(TerminalMarker::None).is_err());
    }

    #[test]
    fn segment_matches_groups_interleaved_matches() {
        let mut plays = vec![
            play("A", 1, TerminalMarker::Error),
            play("B", 2, TerminalMarker::Handover),
        ];
        let mut other = play("C", 1, TerminalMarker::Error);
        other.match_id = "M2".into();
        plays.insert(1, other);
        let possessions = segment_matches(&plays).unwrap();
        assert_eq!(possessions.len(), 3);
        assert_eq!(possessions[0].match_id, "M1");
        assert_eq!(possessions[2].match_id, "M2");
    }
}
