//! Event logs, trace variants and activity statistics.

mod variants;
mod xes;

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use variants::{extract_variants, list_activities, ActivityStat, TraceVariant};
pub use xes::{parse_xes, parse_xes_file, XesError};

/// A typed attribute value carried on an event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum AttributeValue {
    String(String),
    Int(i64),
    Float(f64),
    Boolean(bool),
    Date(DateTime<Utc>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub case_id: String,
    pub activity: String,
    pub complete_time: Option<DateTime<Utc>>,
    /// Every attribute except the activity name and the timestamp.
    pub attributes: BTreeMap<String, AttributeValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub events: Vec<Event>,
}

impl Trace {
    pub fn activities(&self) -> Vec<String> {
        self.events.iter().map(|e| e.activity.clone()).collect()
    }

    /// Reorders events by completion time. Timestamped events are stably
    /// sorted among the positions they occupy; events without a timestamp
    /// keep their position.
    pub(crate) fn order_by_time(&mut self) {
        let slots: Vec<usize> = (0..self.events.len())
            .filter(|&i| self.events[i].complete_time.is_some())
            .collect();
        if slots.len() < 2 {
            return;
        }
        let mut timed: Vec<Event> = slots.iter().map(|&i| self.events[i].clone()).collect();
        if timed.windows(2).all(|w| w[0].complete_time <= w[1].complete_time) {
            return;
        }
        timed.sort_by_key(|e| e.complete_time);
        for (slot, event) in slots.into_iter().zip(timed) {
            self.events[slot] = event;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub traces: Vec<Trace>,
    pub activity_alphabet: BTreeSet<String>,
    pub source_name: String,
}

impl EventLog {
    /// Builds a log and derives its alphabet.
    pub fn new(source_name: impl Into<String>, traces: Vec<Trace>) -> Self {
        let activity_alphabet = traces
            .iter()
            .flat_map(|t| t.events.iter().map(|e| e.activity.clone()))
            .collect();
        EventLog {
            traces,
            activity_alphabet,
            source_name: source_name.into(),
        }
    }

    /// A log of untimestamped traces, one case per sequence, with case ids
    /// `case_<index>`.
    pub fn from_sequences<I, T, S>(source_name: &str, sequences: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let traces = sequences
            .into_iter()
            .enumerate()
            .map(|(i, seq)| {
                let case_id = format!("case_{i}");
                Trace {
                    events: seq
                        .into_iter()
                        .map(|a| Event {
                            case_id: case_id.clone(),
                            activity: a.into(),
                            complete_time: None,
                            attributes: BTreeMap::new(),
                        })
                        .collect(),
                    case_id,
                }
            })
            .collect();
        EventLog::new(source_name, traces)
    }

    pub fn event_count(&self) -> usize {
        self.traces.iter().map(|t| t.events.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn event(activity: &str, time: Option<i64>) -> Event {
        Event {
            case_id: "c".into(),
            activity: activity.into(),
            complete_time: time.map(|t| Utc.timestamp_opt(t, 0).unwrap()),
            attributes: BTreeMap::new(),
        }
    }

    #[test]
    fn ordering_keeps_untimed_positions() {
        let mut trace = Trace {
            case_id: "c".into(),
            events: vec![
                event("a", Some(30)),
                event("x", None),
                event("b", Some(10)),
                event("c", Some(10)),
                event("d", Some(20)),
            ],
        };
        trace.order_by_time();
        assert_eq!(trace.activities(), ["b", "x", "c", "d", "a"]);
    }

    #[test]
    fn alphabet_is_union() {
        let log = EventLog::from_sequences("t", [vec!["a", "b"], vec!["c"]]);
        assert_eq!(log.activity_alphabet, ["a", "b", "c"].map(String::from).into());
        assert_eq!(log.event_count(), 3);
    }
}
