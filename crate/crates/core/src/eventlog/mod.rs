//! Event-log ingestion and case-level statistics.
//!
//! An event log is an ordered collection of traces; each trace is the
//! time-ordered event sequence of one process case. Logs are immutable once
//! constructed and safe to share across threads.

mod csv;
mod variability;
mod xes;

pub use self::csv::{parse_csv_log, ColumnSpec, EventTypeColumns};
pub use self::variability::{profile_variability, VariabilityLevel, VariabilityProfile};
pub use self::xes::parse_xes_log;

use std::collections::{BTreeMap, HashSet};

use crate::error::{Error, Result};

/// Milliseconds per minute; durations are reported in fractional minutes.
pub(crate) const MS_PER_MINUTE: f64 = 60_000.0;

/// A single recorded process event.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub case_id: String,
    pub event_type: String,
    /// Epoch milliseconds. Only differences matter downstream, so naive
    /// timestamps are interpreted as UTC.
    pub timestamp_ms: i64,
    /// Additional attributes carried through untouched.
    pub attrs: BTreeMap<String, String>,
}

impl Event {
    pub fn new(case_id: impl Into<String>, event_type: impl Into<String>, timestamp_ms: i64) -> Self {
        Event {
            case_id: case_id.into(),
            event_type: event_type.into(),
            timestamp_ms,
            attrs: BTreeMap::new(),
        }
    }
}

/// The time-ordered event sequence of one case.
#[derive(Debug, Clone)]
pub struct Trace {
    pub case_id: String,
    events: Vec<Event>,
}

impl Trace {
    /// Builds a trace, sorting events by timestamp. The sort is stable, so
    /// input order is preserved among tied timestamps.
    pub fn new(case_id: impl Into<String>, mut events: Vec<Event>) -> Result<Self> {
        let case_id = case_id.into();
        if events.is_empty() {
            return Err(Error::Data(format!("trace {case_id} has no events")));
        }
        if let Some(bad) = events.iter().find(|e| e.case_id != case_id) {
            return Err(Error::Data(format!(
                "trace {case_id} contains event of case {}",
                bad.case_id
            )));
        }
        if events.iter().any(|e| e.event_type.is_empty()) {
            return Err(Error::Data(format!("trace {case_id} contains an event with empty type")));
        }
        events.sort_by_key(|e| e.timestamp_ms);
        Ok(Trace { case_id, events })
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// The sequence of event types, i.e. this trace's variant.
    pub fn event_types(&self) -> impl Iterator<Item = &str> {
        self.events.iter().map(|e| e.event_type.as_str())
    }
}

/// An immutable event log plus its event-type alphabet.
#[derive(Debug, Clone)]
pub struct EventLog {
    pub source_name: String,
    traces: Vec<Trace>,
    /// Event types in first-appearance order over the canonical trace
    /// traversal; positions double as integer codes downstream.
    alphabet: Vec<String>,
}

impl EventLog {
    /// Assembles a log from traces, deriving the alphabet in first-appearance
    /// order and rejecting duplicate case ids.
    pub fn from_traces(source_name: impl Into<String>, traces: Vec<Trace>) -> Result<Self> {
        let source_name = source_name.into();
        if traces.is_empty() {
            return Err(Error::Data(format!("event log {source_name} has no traces")));
        }
        let mut seen_cases = HashSet::new();
        for t in &traces {
            if !seen_cases.insert(t.case_id.as_str()) {
                return Err(Error::Data(format!(
                    "duplicate case id {} in log {source_name}",
                    t.case_id
                )));
            }
        }
        let mut alphabet = Vec::new();
        let mut seen = HashSet::new();
        for t in &traces {
            for ty in t.event_types() {
                if seen.insert(ty.to_string()) {
                    alphabet.push(ty.to_string());
                }
            }
        }
        Ok(EventLog { source_name, traces, alphabet })
    }

    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn num_events(&self) -> usize {
        self.traces.iter().map(Trace::len).sum()
    }
}

/// Composes an event type from an activity name and a lifecycle transition.
///
/// The lifecycle may be empty, in which case the name stands alone. The "+"
/// separator is fixed; changing it would silently remap every composed code.
pub fn compose_event_type(name: &str, lifecycle: &str) -> Result<String> {
    if name.is_empty() {
        return Err(Error::Data("event type name must not be empty".into()));
    }
    if lifecycle.is_empty() {
        Ok(name.to_string())
    } else {
        Ok(format!("{name}+{lifecycle}"))
    }
}

/// Parses a timestamp into epoch milliseconds.
///
/// With an explicit pattern only that pattern is accepted. Otherwise the
/// built-in patterns are tried in order: RFC 3339 / ISO-8601 (with or without
/// offset), then `MM/dd/yyyy HH:mm`.
pub fn parse_timestamp(raw: &str, format: Option<&str>) -> Result<i64> {
    use chrono::{DateTime, NaiveDateTime};

    let raw = raw.trim();
    if let Some(fmt) = format {
        if let Ok(dt) = DateTime::parse_from_str(raw, fmt) {
            return Ok(dt.timestamp_millis());
        }
        return NaiveDateTime::parse_from_str(raw, fmt)
            .map(|dt| dt.and_utc().timestamp_millis())
            .map_err(|e| Error::Data(format!("timestamp {raw:?} does not match {fmt:?}: {e}")));
    }

    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.timestamp_millis());
    }
    const NAIVE_PATTERNS: [&str; 5] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y/%m/%d %H:%M:%S%.f",
        "%m/%d/%Y %H:%M:%S",
        "%m/%d/%Y %H:%M",
    ];
    for pat in NAIVE_PATTERNS {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, pat) {
            return Ok(dt.and_utc().timestamp_millis());
        }
    }
    Err(Error::Data(format!("unparseable timestamp {raw:?}")))
}

/// Groups loose events into traces keyed by case id, preserving the order in
/// which cases first appear. Shared by the CSV and XES readers.
pub(crate) fn group_into_traces(events: Vec<Event>) -> Result<Vec<Trace>> {
    let mut order: Vec<String> = Vec::new();
    let mut buckets: std::collections::HashMap<String, Vec<Event>> = std::collections::HashMap::new();
    for ev in events {
        if !buckets.contains_key(&ev.case_id) {
            order.push(ev.case_id.clone());
        }
        buckets.entry(ev.case_id.clone()).or_default().push(ev);
    }
    order
        .into_iter()
        .map(|case| {
            let evs = buckets.remove(&case).expect("bucket exists for ordered case");
            Trace::new(case, evs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(min: i64) -> i64 {
        min * 60_000
    }

    #[test]
    fn compose_with_lifecycle() {
        assert_eq!(compose_event_type("A_SUBMITTED", "COMPLETE").unwrap(), "A_SUBMITTED+COMPLETE");
    }

    #[test]
    fn compose_empty_lifecycle_passthrough() {
        assert_eq!(compose_event_type("Queued", "").unwrap(), "Queued");
    }

    #[test]
    fn compose_empty_name_is_error() {
        assert!(matches!(compose_event_type("", "COMPLETE"), Err(Error::Data(_))));
    }

    #[test]
    fn trace_sorts_by_timestamp_stably() {
        let events = vec![
            Event::new("c", "B", ts(5)),
            Event::new("c", "A", ts(1)),
            Event::new("c", "C", ts(5)),
        ];
        let trace = Trace::new("c", events).unwrap();
        let types: Vec<_> = trace.event_types().collect();
        // ties keep input order: B before C
        assert_eq!(types, ["A", "B", "C"]);
    }

    #[test]
    fn log_rejects_duplicate_case_ids() {
        let t1 = Trace::new("c", vec![Event::new("c", "A", 0)]).unwrap();
        let t2 = Trace::new("c", vec![Event::new("c", "B", 0)]).unwrap();
        assert!(EventLog::from_traces("dup", vec![t1, t2]).is_err());
    }

    #[test]
    fn alphabet_in_first_appearance_order() {
        let t1 = Trace::new("1", vec![Event::new("1", "B", 0), Event::new("1", "A", 1)]).unwrap();
        let t2 = Trace::new("2", vec![Event::new("2", "C", 0), Event::new("2", "B", 1)]).unwrap();
        let log = EventLog::from_traces("log", vec![t1, t2]).unwrap();
        assert_eq!(log.alphabet(), ["B", "A", "C"]);
    }

    #[test]
    fn timestamp_patterns() {
        // the MM/dd/yyyy HH:mm pattern used by the toy log
        let a = parse_timestamp("10/01/2011 19:45", None).unwrap();
        let b = parse_timestamp("2011-10-01T19:45:00", None).unwrap();
        assert_eq!(a, b);
        // ISO with offset
        let c = parse_timestamp("2011-10-01T19:45:00+00:00", None).unwrap();
        assert_eq!(a, c);
        // fractional seconds
        parse_timestamp("2011-10-01 19:45:00.250", None).unwrap();
        // explicit custom pattern
        let d = parse_timestamp("01.10.2011 19-45", Some("%d.%m.%Y %H-%M")).unwrap();
        assert_eq!(a, d);
        assert!(parse_timestamp("not a time", None).is_err());
    }
}
