//! Minimal XES import.
//!
//! Reads the subset needed for next-event prediction: `trace` and `event`
//! elements with `string` / `date` attributes for `concept:name`,
//! `lifecycle:transition` and `time:timestamp`. Anything else is skipped
//! with a one-time warning per construct. Files may be plain XML or gzipped.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use quick_xml::events::{BytesStart, Event as XmlEvent};
use quick_xml::Reader;

use crate::error::{Error, Result};

use super::{compose_event_type, group_into_traces, parse_timestamp, Event, EventLog, Trace};

#[derive(Default)]
struct PendingEvent {
    name: Option<String>,
    lifecycle: Option<String>,
    timestamp_ms: Option<i64>,
}

struct XesParser {
    compose_lifecycle: bool,
    warned: HashSet<String>,
    traces: Vec<Trace>,
    case_counter: usize,
    skipped_events: usize,
}

impl XesParser {
    fn warn_once(&mut self, construct: &str) {
        if self.warned.insert(construct.to_string()) {
            log::warn!("ignoring unsupported XES construct: {construct}");
        }
    }

    fn attr_pair(&mut self, tag: &BytesStart) -> Option<(String, String)> {
        let mut key = None;
        let mut value = None;
        for attr in tag.attributes().flatten() {
            match attr.key.as_ref() {
                b"key" => key = attr.unescape_value().ok().map(|v| v.into_owned()),
                b"value" => value = attr.unescape_value().ok().map(|v| v.into_owned()),
                _ => {}
            }
        }
        Some((key?, value?))
    }
}

/// Parses an XES event log (plain or gzipped XML).
pub fn parse_xes_log(path: &Path, compose_lifecycle: bool, source_name: &str) -> Result<EventLog> {
    let file = File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let mut buffered = BufReader::new(file);
    let is_gzip = {
        let head = buffered.fill_buf()?;
        head.len() >= 2 && head[0] == 0x1f && head[1] == 0x8b
    };
    let reader: Box<dyn Read> = if is_gzip {
        Box::new(flate2::read::GzDecoder::new(buffered))
    } else {
        Box::new(buffered)
    };
    parse_xes_reader(BufReader::new(reader), compose_lifecycle, source_name)
        .map_err(|e| match e {
            Error::Data(msg) => Error::Data(format!("{}: {msg}", path.display())),
            other => other,
        })
}

fn parse_xes_reader<R: BufRead>(input: R, compose_lifecycle: bool, source_name: &str) -> Result<EventLog> {
    let mut xml = Reader::from_reader(input);
    xml.trim_text(true);

    let mut parser = XesParser {
        compose_lifecycle,
        warned: HashSet::new(),
        traces: Vec::new(),
        case_counter: 0,
        skipped_events: 0,
    };

    let mut buf = Vec::new();
    let mut in_trace = false;
    let mut in_event = false;
    let mut case_id: Option<String> = None;
    let mut pending_events: Vec<PendingEvent> = Vec::new();

    loop {
        let ev = xml
            .read_event_into(&mut buf)
            .map_err(|e| Error::Data(format!("malformed XES XML at byte {}: {e}", xml.buffer_position())))?;
        match ev {
            XmlEvent::Start(ref tag) | XmlEvent::Empty(ref tag) => {
                let self_closing = matches!(ev, XmlEvent::Empty(_));
                match tag.name().as_ref() {
                    b"log" => {}
                    b"trace" => {
                        in_trace = true;
                        in_event = false;
                        case_id = None;
                        pending_events.clear();
                    }
                    b"event" if in_trace => {
                        in_event = true;
                        pending_events.push(PendingEvent::default());
                    }
                    b"string" | b"date" => {
                        if let Some((key, value)) = parser.attr_pair(tag) {
                            if in_event {
                                let current = pending_events.last_mut().expect("event open");
                                match key.as_str() {
                                    "concept:name" => current.name = Some(value),
                                    "lifecycle:transition" => current.lifecycle = Some(value),
                                    "time:timestamp" => match parse_timestamp(&value, None) {
                                        Ok(ms) => current.timestamp_ms = Some(ms),
                                        Err(_) => parser.warn_once("unparseable time:timestamp value"),
                                    },
                                    other => parser.warn_once(&format!("event attribute {other}")),
                                }
                            } else if in_trace {
                                if key == "concept:name" {
                                    case_id = Some(value);
                                } else {
                                    parser.warn_once(&format!("trace attribute {key}"));
                                }
                            } else {
                                parser.warn_once(&format!("log attribute {key}"));
                            }
                        }
                    }
                    other => {
                        let name = String::from_utf8_lossy(other).into_owned();
                        parser.warn_once(&format!("element {name}"));
                        if !self_closing {
                            // skip silently; nested content of unknown elements
                            // is handled by the same match arms
                        }
                    }
                }
            }
            XmlEvent::End(ref tag) => match tag.name().as_ref() {
                b"event" => in_event = false,
                b"trace" => {
                    in_trace = false;
                    parser.case_counter += 1;
                    let case = case_id.take().unwrap_or_else(|| format!("case_{}", parser.case_counter));
                    let mut events = Vec::new();
                    for pe in pending_events.drain(..) {
                        let (name, ts) = match (pe.name, pe.timestamp_ms) {
                            (Some(n), Some(t)) => (n, t),
                            _ => {
                                parser.skipped_events += 1;
                                parser.warn_once("event without concept:name or time:timestamp");
                                continue;
                            }
                        };
                        let event_type = if parser.compose_lifecycle {
                            compose_event_type(&name, pe.lifecycle.as_deref().unwrap_or(""))?
                        } else {
                            name
                        };
                        events.push(Event::new(case.clone(), event_type, ts));
                    }
                    if events.is_empty() {
                        parser.warn_once("trace without usable events");
                    } else {
                        parser.traces.push(Trace::new(case, events)?);
                    }
                }
                _ => {}
            },
            XmlEvent::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    if parser.skipped_events > 0 {
        log::warn!("skipped {} XES events lacking name or timestamp", parser.skipped_events);
    }
    // XES permits duplicate trace names; disambiguate instead of rejecting.
    let mut seen = HashSet::new();
    let mut loose = Vec::new();
    for trace in parser.traces {
        if seen.insert(trace.case_id.clone()) {
            loose.push(trace);
        } else {
            let mut n = 2;
            let fresh = loop {
                let candidate = format!("{}#{n}", trace.case_id);
                if seen.insert(candidate.clone()) {
                    break candidate;
                }
                n += 1;
            };
            let events = trace
                .events()
                .iter()
                .map(|e| Event { case_id: fresh.clone(), ..e.clone() })
                .collect();
            loose.push(Trace::new(fresh, events)?);
        }
    }
    let all_events: Vec<Event> = loose
        .into_iter()
        .flat_map(|t| t.events().to_vec())
        .collect();
    if all_events.is_empty() {
        return Err(Error::Data("XES file contains no usable events".into()));
    }
    EventLog::from_traces(source_name, group_into_traces(all_events)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    const SAMPLE: &str = r#"<?xml version="1.0" encoding="UTF-8"?>
<log xes.version="1.0">
  <extension name="Concept" prefix="concept" uri="http://www.xes-standard.org/concept.xesext"/>
  <string key="concept:name" value="sample log"/>
  <trace>
    <string key="concept:name" value="42"/>
    <event>
      <string key="concept:name" value="register"/>
      <string key="lifecycle:transition" value="COMPLETE"/>
      <date key="time:timestamp" value="2011-10-01T19:45:00+00:00"/>
    </event>
    <event>
      <string key="concept:name" value="review"/>
      <string key="lifecycle:transition" value="START"/>
      <date key="time:timestamp" value="2011-10-01T20:17:00+00:00"/>
      <int key="org:cost" value="5"/>
    </event>
  </trace>
  <trace>
    <string key="concept:name" value="43"/>
    <event>
      <string key="concept:name" value="register"/>
      <date key="time:timestamp" value="2011-10-02T08:00:00+00:00"/>
    </event>
  </trace>
</log>"#;

    #[test]
    fn parses_plain_xes() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(SAMPLE.as_bytes()).unwrap();
        let log = parse_xes_log(f.path(), false, "sample").unwrap();
        assert_eq!(log.traces().len(), 2);
        assert_eq!(log.traces()[0].case_id, "42");
        assert_eq!(log.alphabet(), ["register", "review"]);
    }

    #[test]
    fn parses_with_lifecycle_composition() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(SAMPLE.as_bytes()).unwrap();
        let log = parse_xes_log(f.path(), true, "sample").unwrap();
        // second trace's event has no lifecycle, so the bare name remains
        assert_eq!(log.alphabet(), ["register+COMPLETE", "review+START", "register"]);
    }

    #[test]
    fn parses_gzipped_xes() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(SAMPLE.as_bytes()).unwrap();
        f.write_all(&enc.finish().unwrap()).unwrap();
        let log = parse_xes_log(f.path(), false, "sample").unwrap();
        assert_eq!(log.traces().len(), 2);
        assert_eq!(log.num_events(), 3);
    }

    #[test]
    fn empty_log_is_data_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(br#"<?xml version="1.0"?><log></log>"#).unwrap();
        assert!(matches!(parse_xes_log(f.path(), false, "x"), Err(Error::Data(_))));
    }
}
