use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::EventLog;
use crate::process_tree::ProcessTree;

/// A distinct activity sequence and the cases that follow it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceVariant {
    pub variant_id: usize,
    pub activities: Vec<String>,
    pub case_count: usize,
    pub case_ids: Vec<String>,
    /// `case_count` divided by the number of traces in the log.
    pub frequency_share: f64,
}

/// Groups traces by activity sequence. Variants are ranked by case count,
/// most frequent first, equal counts ordered by the activity sequence;
/// ids follow that rank.
pub fn extract_variants(log: &EventLog) -> Vec<TraceVariant> {
    let mut groups: HashMap<Vec<&str>, Vec<&str>> = HashMap::new();
    for trace in &log.traces {
        let key = trace.events.iter().map(|e| e.activity.as_str()).collect();
        groups.entry(key).or_default().push(trace.case_id.as_str());
    }
    let mut groups: Vec<_> = groups.into_iter().collect();
    groups.sort_by(|(a_acts, a_cases), (b_acts, b_cases)| {
        b_cases.len().cmp(&a_cases.len()).then_with(|| a_acts.cmp(b_acts))
    });
    let total = log.traces.len() as f64;
    groups
        .into_iter()
        .enumerate()
        .map(|(variant_id, (activities, cases))| TraceVariant {
            variant_id,
            activities: activities.into_iter().map(String::from).collect(),
            case_count: cases.len(),
            frequency_share: cases.len() as f64 / total,
            case_ids: cases.into_iter().map(String::from).collect(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityStat {
    pub activity: String,
    /// Number of events with this activity.
    pub count: usize,
    /// Whether some leaf of the model carries this label.
    pub in_model: bool,
}

/// One row per activity of the log's alphabet, in alphabetical order.
pub fn list_activities(log: &EventLog, model: Option<&ProcessTree>) -> Vec<ActivityStat> {
    let mut counts: BTreeMap<&str, usize> = log.activity_alphabet.iter().map(|a| (a.as_str(), 0)).collect();
    for event in log.traces.iter().flat_map(|t| &t.events) {
        *counts.entry(event.activity.as_str()).or_default() += 1;
    }
    let in_model = model.map(ProcessTree::activities).unwrap_or_default();
    counts
        .into_iter()
        .map(|(activity, count)| ActivityStat {
            activity: activity.to_string(),
            count,
            in_model: in_model.contains(activity),
        })
        .collect()
}
