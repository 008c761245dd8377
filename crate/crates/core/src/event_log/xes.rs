//! XES reader. Only `concept:name` (trace and event level) and
//! `time:timestamp` (event level) are interpreted; other event attributes are
//! carried as typed values, nested attributes and log-level metadata are
//! skipped. Gzip input is detected from its magic bytes.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use flate2::read::MultiGzDecoder;
use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;
use thiserror::Error;

use super::{AttributeValue, Event, EventLog, Trace};

#[derive(Debug, Error)]
pub enum XesError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("event without concept:name in trace {trace_index}")]
    MissingActivity { trace_index: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const CONCEPT_NAME: &str = "concept:name";
const TIMESTAMP: &str = "time:timestamp";

#[derive(Clone, Copy, PartialEq)]
enum Scope {
    Log,
    Trace,
    Event,
    Other,
}

#[derive(Default)]
struct PendingTrace {
    case_id: Option<String>,
    events: Vec<Event>,
}

#[derive(Default)]
struct PendingEvent {
    activity: Option<String>,
    time: Option<DateTime<Utc>>,
    attributes: BTreeMap<String, AttributeValue>,
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    let parsed = DateTime::parse_from_rfc3339(raw)
        .or_else(|_| DateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f%z"))
        .map(|t| t.with_timezone(&Utc))
        .ok()
        .or_else(|| {
            NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S%.f")
                .ok()
                .map(|t| t.and_utc())
        })?;
    // Millisecond precision.
    let millis = parsed.timestamp_millis();
    DateTime::from_timestamp_millis(millis)
}

fn typed_value(tag: &str, raw: String) -> Option<AttributeValue> {
    Some(match tag {
        "string" | "id" => AttributeValue::String(raw),
        "int" => raw
            .parse()
            .map(AttributeValue::Int)
            .unwrap_or(AttributeValue::String(raw)),
        "float" => raw
            .parse()
            .map(AttributeValue::Float)
            .unwrap_or(AttributeValue::String(raw)),
        "boolean" => match raw.as_str() {
            "true" => AttributeValue::Boolean(true),
            "false" => AttributeValue::Boolean(false),
            _ => AttributeValue::String(raw),
        },
        "date" => parse_timestamp(&raw)
            .map(AttributeValue::Date)
            .unwrap_or(AttributeValue::String(raw)),
        _ => return None,
    })
}

fn key_value(element: &BytesStart) -> Result<(Option<String>, Option<String>), XesError> {
    let mut key = None;
    let mut value = None;
    for attr in element.attributes() {
        let attr = attr.map_err(|e| XesError::MalformedXml(e.to_string()))?;
        let slot = match attr.key.as_ref() {
            b"key" => &mut key,
            b"value" => &mut value,
            _ => continue,
        };
        let text: Cow<str> = attr
            .unescape_value()
            .map_err(|e| XesError::MalformedXml(e.to_string()))?;
        *slot = Some(text.into_owned());
    }
    Ok((key, value))
}

struct XesReader {
    stack: Vec<Scope>,
    traces: Vec<Trace>,
    trace: Option<PendingTrace>,
    event: Option<PendingEvent>,
    saw_log: bool,
}

impl XesReader {
    fn parent(&self) -> Option<Scope> {
        self.stack.last().copied()
    }

    /// Handles an opening (or self-closing) element and returns the scope
    /// it opens.
    fn open(&mut self, element: &BytesStart) -> Result<Scope, XesError> {
        let name = element.local_name();
        let scope = match (self.parent(), name.as_ref()) {
            (None, b"log") => {
                self.saw_log = true;
                Scope::Log
            }
            (Some(Scope::Log), b"trace") => {
                self.trace = Some(PendingTrace::default());
                Scope::Trace
            }
            (Some(Scope::Trace), b"event") => {
                self.event = Some(PendingEvent::default());
                Scope::Event
            }
            (Some(parent @ (Scope::Trace | Scope::Event)), tag) => {
                let tag = std::str::from_utf8(tag).unwrap_or_default();
                if let (Some(key), Some(raw)) = key_value(element)? {
                    self.attribute(parent, tag, key, raw);
                }
                Scope::Other
            }
            _ => Scope::Other,
        };
        Ok(scope)
    }

    fn attribute(&mut self, parent: Scope, tag: &str, key: String, raw: String) {
        match parent {
            Scope::Trace => {
                if key == CONCEPT_NAME {
                    if let Some(trace) = self.trace.as_mut() {
                        trace.case_id = Some(raw);
                    }
                }
            }
            Scope::Event => {
                let Some(event) = self.event.as_mut() else { return };
                if key == CONCEPT_NAME && tag == "string" {
                    event.activity = Some(raw);
                } else if key == TIMESTAMP && tag == "date" {
                    match parse_timestamp(&raw) {
                        Some(time) => event.time = Some(time),
                        None => {
                            event.attributes.insert(key, AttributeValue::String(raw));
                        }
                    }
                } else if let Some(value) = typed_value(tag, raw) {
                    event.attributes.insert(key, value);
                }
            }
            _ => {}
        }
    }

    fn close(&mut self, scope: Scope) -> Result<(), XesError> {
        match scope {
            Scope::Event => {
                let pending = self.event.take().unwrap_or_default();
                let trace_index = self.traces.len();
                let activity = pending
                    .activity
                    .filter(|a| !a.is_empty())
                    .ok_or(XesError::MissingActivity { trace_index })?;
                if let Some(trace) = self.trace.as_mut() {
                    trace.events.push(Event {
                        case_id: String::new(),
                        activity,
                        complete_time: pending.time,
                        attributes: pending.attributes,
                    });
                }
            }
            Scope::Trace => {
                let pending = self.trace.take().unwrap_or_default();
                let case_id = pending
                    .case_id
                    .unwrap_or_else(|| format!("case_{}", self.traces.len()));
                let mut trace = Trace {
                    events: pending
                        .events
                        .into_iter()
                        .map(|e| Event {
                            case_id: case_id.clone(),
                            ..e
                        })
                        .collect(),
                    case_id,
                };
                trace.order_by_time();
                self.traces.push(trace);
            }
            _ => {}
        }
        Ok(())
    }
}

/// Parses an XES document, plain or gzip-compressed.
pub fn parse_xes<R: Read>(input: R, source_name: &str) -> Result<EventLog, XesError> {
    let mut buffered = BufReader::with_capacity(1 << 16, input);
    let gzip = buffered.fill_buf()?.starts_with(&[0x1f, 0x8b]);
    if gzip {
        parse_plain(BufReader::with_capacity(1 << 16, MultiGzDecoder::new(buffered)), source_name)
    } else {
        parse_plain(buffered, source_name)
    }
}

pub fn parse_xes_file(path: &Path) -> Result<EventLog, XesError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_xes(File::open(path)?, &name)
}

fn parse_plain<R: BufRead>(input: R, source_name: &str) -> Result<EventLog, XesError> {
    let mut reader = Reader::from_reader(input);
    let mut state = XesReader {
        stack: Vec::new(),
        traces: Vec::new(),
        trace: None,
        event: None,
        saw_log: false,
    };
    let mut buf = Vec::new();
    loop {
        let event = reader.read_event_into(&mut buf).map_err(|e| match e {
            quick_xml::Error::Io(io) => XesError::Io(std::io::Error::new(io.kind(), io.to_string())),
            other => XesError::MalformedXml(other.to_string()),
        })?;
        match event {
            XmlEvent::Start(element) => {
                let scope = state.open(&element)?;
                state.stack.push(scope);
            }
            XmlEvent::Empty(element) => {
                let scope = state.open(&element)?;
                state.close(scope)?;
            }
            XmlEvent::End(_) => {
                let scope = state
                    .stack
                    .pop()
                    .ok_or_else(|| XesError::MalformedXml("unexpected closing tag".into()))?;
                state.close(scope)?;
            }
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if !state.stack.is_empty() {
        return Err(XesError::MalformedXml("unexpected end of document".into()));
    }
    if !state.saw_log {
        return Err(XesError::MalformedXml("no <log> root element".into()));
    }
    Ok(EventLog::new(source_name, state.traces))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(xml: &str) -> Result<EventLog, XesError> {
        parse_xes(xml.as_bytes(), "test.xes")
    }

    #[test]
    fn minimal() {
        let log = parse(
            r#"<?xml version="1.0"?>
<log xes.version="1.0">
  <trace>
    <event><string key="concept:name" value="a"/></event>
    <event><string key="concept:name" value="b"/></event>
  </trace>
</log>"#,
        )
        .unwrap();
        assert_eq!(log.traces.len(), 1);
        assert_eq!(log.traces[0].case_id, "case_0");
        assert_eq!(log.traces[0].activities(), ["a", "b"]);
        assert_eq!(log.activity_alphabet, ["a", "b"].map(String::from).into());
    }

    #[test]
    fn attributes_and_ordering() {
        let log = parse(
            r#"<log>
  <string key="concept:name" value="ignored log name"/>
  <global scope="event"><string key="concept:name" value="x"/></global>
  <trace>
    <string key="concept:name" value="A1"/>
    <event>
      <string key="concept:name" value="Send Fine"/>
      <date key="time:timestamp" value="2006-12-05T00:00:00.000+01:00"/>
      <float key="expense" value="11.0"/>
    </event>
    <event>
      <string key="concept:name" value="Create Fine"/>
      <date key="time:timestamp" value="2006-07-24T00:00:00.000+02:00"/>
      <float key="amount" value="35.0"/>
      <int key="article" value="157"/>
      <boolean key="paid" value="false"/>
      <string key="vehicleClass" value="A"><string key="meta" value="nested"/></string>
      <list key="l"><values><string key="x" value="y"/></values></list>
    </event>
  </trace>
</log>"#,
        )
        .unwrap();
        let trace = &log.traces[0];
        assert_eq!(trace.case_id, "A1");
        assert_eq!(trace.activities(), ["Create Fine", "Send Fine"]);
        let create = &trace.events[0];
        assert_eq!(create.case_id, "A1");
        assert_eq!(create.attributes["amount"], AttributeValue::Float(35.0));
        assert_eq!(create.attributes["article"], AttributeValue::Int(157));
        assert_eq!(create.attributes["paid"], AttributeValue::Boolean(false));
        assert_eq!(create.attributes["vehicleClass"], AttributeValue::String("A".into()));
        assert!(!create.attributes.contains_key("meta"));
        assert!(!create.attributes.contains_key("x"));
        assert_eq!(
            create.complete_time.unwrap().to_rfc3339(),
            "2006-07-23T22:00:00+00:00"
        );
    }

    #[test]
    fn missing_activity_names_the_trace() {
        let err = parse(
            r#"<log><trace><event><string key="concept:name" value="a"/></event></trace>
<trace><event><int key="x" value="1"/></event></trace></log>"#,
        )
        .unwrap_err();
        assert!(matches!(err, XesError::MissingActivity { trace_index: 1 }));
        assert!(matches!(
            parse("<log><trace><event/></trace></log>"),
            Err(XesError::MissingActivity { trace_index: 0 })
        ));
    }

    #[test]
    fn empty_log_is_legal() {
        let log = parse("<log/>").unwrap();
        assert!(log.traces.is_empty());
        let log = parse("<log><trace/></log>").unwrap();
        assert_eq!(log.traces.len(), 1);
        assert!(log.traces[0].events.is_empty());
    }

    #[test]
    fn malformed() {
        assert!(matches!(parse("<log><trace></log>"), Err(XesError::MalformedXml(_))));
        assert!(matches!(parse("<log><trace>"), Err(XesError::MalformedXml(_))));
        assert!(matches!(parse("just text"), Err(XesError::MalformedXml(_))));
    }

    #[test]
    fn gzip_input() {
        use flate2::write::GzEncoder;
        use std::io::Write;
        let xml = r#"<log><trace><event><string key="concept:name" value="z"/></event></trace></log>"#;
        let mut encoder = GzEncoder::new(Vec::new(), flate2::Compression::default());
        encoder.write_all(xml.as_bytes()).unwrap();
        let bytes = encoder.finish().unwrap();
        let log = parse_xes(bytes.as_slice(), "x.xes.gz").unwrap();
        assert_eq!(log.traces[0].activities(), ["z"]);
    }

    #[test]
    fn timestamp_formats() {
        assert!(parse_timestamp("2006-07-24T00:00:00.000+02:00").is_some());
        assert!(parse_timestamp("2006-07-24T00:00:00.000+0200").is_some());
        assert!(parse_timestamp("2006-07-24T00:00:00").is_some());
        assert!(parse_timestamp("yesterday").is_none());
        let t = parse_timestamp("2006-07-24T00:00:00.123456Z").unwrap();
        assert_eq!(t.timestamp_subsec_micros(), 123_000);
    }
}
