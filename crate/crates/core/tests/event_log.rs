use std::io::Write;
use std::path::PathBuf;

use arbor_core::event_log::{extract_variants, list_activities, parse_xes, parse_xes_file, AttributeValue, EventLog};
use arbor_core::process_tree::ProcessTree;
use arbor_testkit::{write_xes, XesCase};
use flate2::write::GzEncoder;
use flate2::Compression;
use proptest::prelude::*;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/road_fines_fragment.xes")
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn fine_fragment_parses_into_three_traces() {
    let log = parse_xes_file(&fixture()).unwrap();
    assert_eq!(log.traces.len(), 3);
    let a1 = &log.traces[0];
    assert_eq!(a1.case_id, "A1");
    assert_eq!(a1.activities(), strings(&["Create Fine", "Send Fine"]));
    assert_eq!(log.traces[1].events.len(), 5);
    assert_eq!(log.traces[2].events.len(), 4);
    assert_eq!(log.activity_alphabet.len(), 6);
    assert_eq!(
        a1.events[0].attributes.get("amount"),
        Some(&AttributeValue::Float(35.0))
    );
}

#[test]
fn fine_fragment_variants() {
    let log = parse_xes_file(&fixture()).unwrap();
    let variants = extract_variants(&log);
    assert_eq!(variants.len(), 3);
    assert!(variants.iter().all(|v| v.case_count == 1));
    let a100 = variants.iter().find(|v| v.case_ids == ["A100"]).unwrap();
    assert_eq!(
        a100.activities,
        strings(&["Create Fine", "Send Fine", "Insert Fine Notification", "Add penalty", "Send for Credit Collection"])
    );
    let ids: Vec<usize> = variants.iter().map(|v| v.variant_id).collect();
    assert_eq!(ids, [0, 1, 2]);
}

#[test]
fn fine_model_lacks_credit_collection() {
    let log = parse_xes_file(&fixture()).unwrap();
    let model: ProcessTree = "->('Create Fine', X('Send Fine', tau), 'Insert Fine Notification', \
                              +('Add penalty', X(tau, *('Payment', tau))))"
        .parse()
        .unwrap();
    let rows = list_activities(&log, Some(&model));
    let flag = |name: &str| rows.iter().find(|r| r.activity == name).unwrap().in_model;
    assert!(!flag("Send for Credit Collection"));
    assert!(flag("Create Fine"));
    assert!(flag("Payment"));
    assert_eq!(rows.iter().find(|r| r.activity == "Create Fine").unwrap().count, 3);
}

#[test]
fn gzip_input_is_detected() {
    let raw = std::fs::read(fixture()).unwrap();
    let mut encoder = GzEncoder::new(Vec::new(), Compression::default());
    encoder.write_all(&raw).unwrap();
    let compressed = encoder.finish().unwrap();
    let plain = parse_xes(raw.as_slice(), "plain").unwrap();
    let gz = parse_xes(compressed.as_slice(), "gz").unwrap();
    assert_eq!(extract_variants(&plain), extract_variants(&gz));
}

#[test]
fn events_are_ordered_by_completion_time() {
    let xes = write_xes(&[(
        "c".into(),
        vec![
            ("late".into(), Some("2020-01-03T00:00:00Z".into())),
            ("early".into(), Some("2020-01-01T00:00:00Z".into())),
            ("middle".into(), Some("2020-01-02T00:00:00Z".into())),
        ],
    )]);
    let log = parse_xes(xes.as_bytes(), "t").unwrap();
    assert_eq!(log.traces[0].activities(), strings(&["early", "middle", "late"]));
}

fn arb_case() -> impl Strategy<Value = Vec<(String, Option<String>)>> {
    prop::collection::vec(
        (
            prop::sample::select(vec!["a", "b", "c", "d & e", "<f>"]),
            prop::option::of(0u32..5),
        ),
        0..6,
    )
    .prop_map(|events| {
        events
            .into_iter()
            .map(|(a, day)| (a.to_string(), day.map(|d| format!("2021-03-0{}T10:00:00.000+00:00", d + 1))))
            .collect()
    })
}

proptest! {
    #[test]
    fn xes_round_trip_preserves_variants(cases in prop::collection::vec(arb_case(), 0..12)) {
        let cases: Vec<XesCase> = cases.into_iter().enumerate().map(|(i, e)| (format!("c{i}"), e)).collect();
        let log = parse_xes(write_xes(&cases).as_bytes(), "generated").unwrap();
        for trace in &log.traces {
            let times: Vec<_> = trace.events.iter().filter_map(|e| e.complete_time).collect();
            prop_assert!(times.windows(2).all(|w| w[0] <= w[1]));
        }
        let variants = extract_variants(&log);
        prop_assert_eq!(variants.iter().map(|v| v.case_count).sum::<usize>(), log.traces.len());

        // Rewriting the parsed log (already ordered) and reparsing is stable.
        let rewritten: Vec<XesCase> = log
            .traces
            .iter()
            .map(|t| {
                let events = t
                    .events
                    .iter()
                    .map(|e| (e.activity.clone(), e.complete_time.map(|ts| ts.to_rfc3339())))
                    .collect();
                (t.case_id.clone(), events)
            })
            .collect();
        let again = parse_xes(write_xes(&rewritten).as_bytes(), "again").unwrap();
        prop_assert_eq!(extract_variants(&again), variants);
    }

    #[test]
    fn variants_partition_the_log(seqs in prop::collection::vec(prop::collection::vec(0u8..3, 0..4), 0..20)) {
        let log = EventLog::from_sequences("seq", seqs.iter().map(|s| s.iter().map(|x| x.to_string()).collect::<Vec<_>>()));
        let variants = extract_variants(&log);
        prop_assert_eq!(variants.iter().map(|v| v.case_count).sum::<usize>(), seqs.len());
        for pair in variants.windows(2) {
            prop_assert!(
                pair[0].case_count > pair[1].case_count
                    || (pair[0].case_count == pair[1].case_count && pair[0].activities < pair[1].activities)
            );
        }
    }
}
