//! Turn-by-turn tipping monitor.
//!
//! A session fixes a basin pair and accumulates one state vector per
//! conversation turn. After every turn the running context (the mean of all
//! turn states so far) is re-forecast against the basins. Sessions can be
//! persisted as one JSON file each in a state directory.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::basin::{tip_forecast, BasinPair, Case, ConversationState, TipForecast};
use crate::corpus::Role;
use crate::error::{Error, Result};
use crate::hsf::{self, Label, LabeledStateSet};

pub const DEFAULT_WARN_THRESHOLD: u64 = 3;

/// Where a turn state was read from when it came from a fixture file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRef {
    pub file: PathBuf,
    /// Index into the file's conversation (`C`) groups.
    pub group: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub state: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_ref: Option<FixtureRef>,
}

/// Serialises as the forecast's fields plus `turn_index` and `warning`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnForecast {
    pub turn_index: usize,
    #[serde(flatten)]
    pub forecast: TipForecast,
    pub warning: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub turn_index: usize,
    pub x: f64,
    pub case: Case,
    /// `None` stands for `+∞`.
    pub n_star_ceil: Option<u64>,
    pub warning: bool,
}

impl From<&TurnForecast> for TraceEntry {
    fn from(t: &TurnForecast) -> Self {
        Self {
            turn_index: t.turn_index,
            x: t.forecast.x,
            case: t.forecast.case,
            n_star_ceil: t.forecast.n_star_ceil,
            warning: t.warning,
        }
    }
}

/// Warning rule: `D` already favoured, or a delayed tip within `threshold`
/// steps.
pub fn is_warning(f: &TipForecast, threshold: u64) -> bool {
    match f.case {
        Case::Immediate => true,
        Case::Delayed => f.n_star_ceil.is_some_and(|n| n <= threshold),
        Case::Never => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basin_file: Option<PathBuf>,
    pub basins: BasinPair,
    pub warn_threshold_n: u64,
    pub turns: Vec<Turn>,
    /// Mean of all turn states; empty before the first turn.
    pub running_c: Vec<f64>,
    pub forecasts: Vec<TurnForecast>,
}

impl Session {
    pub fn new(id: String, basins: BasinPair, warn_threshold_n: u64) -> Self {
        Self {
            id,
            basin_file: None,
            basins,
            warn_threshold_n,
            turns: Vec::new(),
            running_c: Vec::new(),
            forecasts: Vec::new(),
        }
    }

    /// Adds one turn and forecasts from the updated running context.
    pub fn append(&mut self, turn: Turn) -> Result<TurnForecast> {
        if turn.state.len() != self.basins.dim() {
            return Err(Error::DimMismatch {
                expected: self.basins.dim(),
                actual: turn.state.len(),
            });
        }
        if let Some(v) = turn.state.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite turn state value {v}")));
        }
        let mut states: Vec<&[f64]> = self.turns.iter().map(|t| t.state.as_slice()).collect();
        states.push(&turn.state);
        let running = ConversationState::from_turns(self.basins.layer, &states)?;
        let forecast = tip_forecast(&running.c, &self.basins.b, &self.basins.d)?;
        let out = TurnForecast {
            turn_index: self.turns.len(),
            warning: is_warning(&forecast, self.warn_threshold_n),
            forecast,
        };
        self.turns.push(turn);
        self.running_c = running.c;
        self.forecasts.push(out.clone());
        Ok(out)
    }

    pub fn trace(&self) -> Vec<TraceEntry> {
        self.forecasts.iter().map(TraceEntry::from).collect()
    }
}

/// Basins at the penultimate layer of an HSF basin file.
pub fn load_basins(path: impl AsRef<Path>) -> Result<BasinPair> {
    let set = hsf::load(path)?;
    BasinPair::from_set(&set, set.penultimate_layer())
}

/// Per-turn states of a conversation fixture: the token mean of every `C`
/// group at `layer`.
pub fn turn_states(set: &LabeledStateSet, layer: usize) -> Result<Vec<Vec<f64>>> {
    set.check_layer(layer)?;
    let states: Vec<Vec<f64>> = set.groups_with(Label::C).map(|g| g.mean_at(layer)).collect();
    if states.is_empty() {
        return Err(Error::MissingLabel(Label::C));
    }
    Ok(states)
}

/// Roles of the turns in a conversation fixture: `meta.roles` when present,
/// otherwise alternating user/assistant starting with the user.
pub fn turn_roles(set: &LabeledStateSet, turns: usize) -> Result<Vec<Role>> {
    let listed = set
        .meta
        .as_ref()
        .and_then(|m| m.get("roles"))
        .and_then(|r| r.as_array());
    match listed {
        Some(roles) => {
            if roles.len() != turns {
                return Err(Error::ShapeMismatch {
                    expected: turns,
                    actual: roles.len(),
                });
            }
            roles
                .iter()
                .map(|r| r.as_str().ok_or_else(|| Error::UnknownRole(r.to_string()))?.parse())
                .collect()
        }
        None => Ok((0..turns)
            .map(|i| if i % 2 == 0 { Role::User } else { Role::Assistant })
            .collect()),
    }
}

/// Replays every conversation turn of `conversation` against `basins`.
pub fn replay(conversation: &LabeledStateSet, basins: &BasinPair, warn_threshold_n: u64) -> Result<Vec<TraceEntry>> {
    let states = turn_states(conversation, basins.layer)?;
    let roles = turn_roles(conversation, states.len())?;
    let mut session = Session::new(String::new(), basins.clone(), warn_threshold_n);
    for (state, role) in states.into_iter().zip(roles) {
        session.append(Turn {
            role,
            state,
            fixture_ref: None,
        })?;
    }
    Ok(session.trace())
}

/// Index of the first warning turn, if any.
pub fn warning_onset(trace: &[TraceEntry]) -> Option<usize> {
    trace.iter().find(|e| e.warning).map(|e| e.turn_index)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub id: String,
    pub turns: usize,
    pub warn_threshold_n: u64,
    pub warning: bool,
}

/// Concurrent session registry. Appends to one session are serialised by
/// that session's lock; different sessions proceed independently.
#[derive(Debug, Default)]
pub struct SessionStore {
    dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl SessionStore {
    /// Store without persistence.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Store persisting to `dir`, loading any sessions already there.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let session: Session = serde_json::from_slice(&fs::read(&path)?)?;
                sessions.insert(session.id.clone(), Arc::new(Mutex::new(session)));
            }
        }
        Ok(Self {
            dir: Some(dir),
            sessions: RwLock::new(sessions),
        })
    }

    pub fn state_dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn persist(&self, session: &Session) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let tmp = dir.join(format!("{}.json.tmp", session.id));
        fs::write(&tmp, serde_json::to_vec_pretty(session)?)?;
        fs::rename(&tmp, dir.join(format!("{}.json", session.id)))?;
        Ok(())
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>> {
        self.sessions
            .read()
            .expect("session map lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Error::UnknownSession(id.to_owned()))
    }

    pub fn create_with_basins(&self, basins: BasinPair, warn_threshold_n: u64) -> Result<String> {
        let id = uuid::Uuid::new_v4().to_string();
        let session = Session::new(id.clone(), basins, warn_threshold_n);
        self.persist(&session)?;
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    /// New session with basins from the penultimate layer of `basin_file`.
    pub fn create_session(&self, basin_file: impl AsRef<Path>, warn_threshold_n: u64) -> Result<String> {
        let path = basin_file.as_ref();
        let basins = load_basins(path)?;
        let id = uuid::Uuid::new_v4().to_string();
        let mut session = Session::new(id.clone(), basins, warn_threshold_n);
        session.basin_file = Some(path.to_path_buf());
        self.persist(&session)?;
        self.sessions
            .write()
            .expect("session map lock")
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        Ok(id)
    }

    pub fn append_turn(&self, id: &str, role: Role, state: Vec<f64>) -> Result<TurnForecast> {
        self.append(
            id,
            Turn {
                role,
                state,
                fixture_ref: None,
            },
        )
    }

    /// Appends the state of conversation group `fixture.group` of an HSF
    /// file, read at the session's basin layer.
    pub fn append_fixture_turn(&self, id: &str, role: Role, fixture: FixtureRef) -> Result<TurnForecast> {
        let layer = self.get(id)?.lock().expect("session lock").basins.layer;
        let set = hsf::load(&fixture.file)?;
        let states = turn_states(&set, layer)?;
        let state = states.get(fixture.group).cloned().ok_or_else(|| {
            Error::InvalidParameter(format!(
                "fixture {} has {} conversation groups, group {} requested",
                fixture.file.display(),
                states.len(),
                fixture.group
            ))
        })?;
        self.append(
            id,
            Turn {
                role,
                state,
                fixture_ref: Some(fixture),
            },
        )
    }

    fn append(&self, id: &str, turn: Turn) -> Result<TurnForecast> {
        let handle = self.get(id)?;
        let mut session = handle.lock().expect("session lock");
        let mut updated = session.clone();
        let out = updated.append(turn)?;
        self.persist(&updated)?;
        *session = updated;
        Ok(out)
    }

    pub fn trace(&self, id: &str) -> Result<Vec<TraceEntry>> {
        Ok(self.get(id)?.lock().expect("session lock").trace())
    }

    pub fn session(&self, id: &str) -> Result<Session> {
        Ok(self.get(id)?.lock().expect("session lock").clone())
    }

    /// Summaries ordered by id.
    pub fn list(&self) -> Vec<SessionSummary> {
        let handles: Vec<_> = self
            .sessions
            .read()
            .expect("session map lock")
            .values()
            .cloned()
            .collect();
        let mut out: Vec<SessionSummary> = handles
            .iter()
            .map(|h| {
                let s = h.lock().expect("session lock");
                SessionSummary {
                    id: s.id.clone(),
                    turns: s.turns.len(),
                    warn_threshold_n: s.warn_threshold_n,
                    warning: s.forecasts.last().is_some_and(|f| f.warning),
                }
            })
            .collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basins() -> BasinPair {
        BasinPair::new(0, vec![1.0, 0.0], vec![2.0, 1.0]).unwrap()
    }

    #[test]
    fn first_turn_matches_direct_forecast() {
        let store = SessionStore::in_memory();
        let id = store.create_with_basins(basins(), 3).unwrap();
        let f = store.append_turn(&id, Role::User, vec![1.0, 0.0]).unwrap();
        let direct = tip_forecast(&[1.0, 0.0], &[1.0, 0.0], &[2.0, 1.0]).unwrap();
        assert_eq!(f.forecast, direct);
        assert_eq!(f.turn_index, 0);
    }

    #[test]
    fn cancelling_turns_warn() {
        let store = SessionStore::in_memory();
        let id = store
            .create_with_basins(BasinPair::new(0, vec![1.0, 0.0], vec![0.0, 1.0]).unwrap(), 3)
            .unwrap();
        store.append_turn(&id, Role::User, vec![0.5, -0.25]).unwrap();
        let f = store.append_turn(&id, Role::Assistant, vec![-0.5, 0.25]).unwrap();
        assert_eq!(f.forecast.x, 0.0);
        assert_eq!(f.forecast.case, Case::Immediate);
        assert!(f.warning);
    }

    #[test]
    fn unknown_session_and_dim_errors() {
        let store = SessionStore::in_memory();
        assert!(matches!(store.trace("nope"), Err(Error::UnknownSession(_))));
        let id = store.create_with_basins(basins(), 3).unwrap();
        assert!(store.trace(&id).unwrap().is_empty());
        assert!(matches!(
            store.append_turn(&id, Role::User, vec![1.0]),
            Err(Error::DimMismatch { .. })
        ));
        assert!(store.trace(&id).unwrap().is_empty());
    }

    #[test]
    fn warning_rule() {
        let delayed = |n| TipForecast {
            x: -1.0,
            b_drive: 1.0,
            case: Case::Delayed,
            n_star: n as f64,
            n_star_ceil: Some(n),
            saturated: false,
        };
        assert!(is_warning(&delayed(3), 3));
        assert!(!is_warning(&delayed(4), 3));
    }
}
