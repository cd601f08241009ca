//! CSV event-log reader.
//!
//! Expects UTF-8, a header row, comma delimiters and RFC 4180 quoting. The
//! caller maps roles to column names; the event type is either a single
//! column or an activity/lifecycle pair composed with [`compose_event_type`].

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

use super::{compose_event_type, group_into_traces, parse_timestamp, Event, EventLog};

/// How the event type is read from a row.
#[derive(Debug, Clone)]
pub enum EventTypeColumns {
    /// One column holds the full event type.
    Single(String),
    /// Compose `name` and `lifecycle` columns; an empty lifecycle cell leaves
    /// the name unchanged.
    Composed { name: String, lifecycle: String },
}

/// Maps mandatory roles to column names.
#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub case_id: String,
    pub event_type: EventTypeColumns,
    pub timestamp: String,
    /// Optional chrono pattern; `None` tries the built-in patterns.
    pub timestamp_format: Option<String>,
}

impl ColumnSpec {
    pub fn simple(case_id: &str, event_type: &str, timestamp: &str) -> Self {
        ColumnSpec {
            case_id: case_id.into(),
            event_type: EventTypeColumns::Single(event_type.into()),
            timestamp: timestamp.into(),
            timestamp_format: None,
        }
    }
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Config(format!("missing mandatory column {name:?}")))
}

/// Parses a CSV event log. Rows are grouped by case id into traces; within a
/// trace events are sorted by timestamp, keeping file order among ties.
pub fn parse_csv_log(path: &Path, spec: &ColumnSpec, source_name: &str) -> Result<EventLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("cannot read header of {}: {e}", path.display())))?
        .clone();

    let case_idx = find_column(&headers, &spec.case_id)?;
    let ts_idx = find_column(&headers, &spec.timestamp)?;
    let type_idx = match &spec.event_type {
        EventTypeColumns::Single(col) => (find_column(&headers, col)?, None),
        EventTypeColumns::Composed { name, lifecycle } => {
            (find_column(&headers, name)?, Some(find_column(&headers, lifecycle)?))
        }
    };
    let role_columns: Vec<usize> = {
        let mut cols = vec![case_idx, ts_idx, type_idx.0];
        if let Some(lc) = type_idx.1 {
            cols.push(lc);
        }
        cols
    };

    let mut events = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        // +2: one for the header, one for 1-based numbering
        let line = row_no + 2;
        let record = record.map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        let field = |idx: usize| -> Result<&str> {
            record
                .get(idx)
                .ok_or_else(|| Error::Data(format!("line {line}: missing field {idx}")))
        };

        let case_id = field(case_idx)?.trim().to_string();
        if case_id.is_empty() {
            return Err(Error::Data(format!("line {line}: empty case id")));
        }
        let event_type = match (&spec.event_type, type_idx.1) {
            (EventTypeColumns::Single(_), _) => {
                let ty = field(type_idx.0)?.trim();
                if ty.is_empty() {
                    return Err(Error::Data(format!("line {line}: empty event type")));
                }
                ty.to_string()
            }
            (EventTypeColumns::Composed { .. }, Some(lc_idx)) => {
                let name = field(type_idx.0)?.trim();
                let lifecycle = field(lc_idx)?.trim();
                compose_event_type(name, lifecycle)
                    .map_err(|e| Error::Data(format!("line {line}: {e}")))?
            }
            _ => unreachable!("composed spec always resolves a lifecycle column"),
        };
        let timestamp_ms = parse_timestamp(field(ts_idx)?, spec.timestamp_format.as_deref())
            .map_err(|e| Error::Data(format!("line {line}: {e}")))?;

        let mut attrs = BTreeMap::new();
        for (idx, value) in record.iter().enumerate() {
            if !role_columns.contains(&idx) && !value.is_empty() {
                if let Some(name) = headers.get(idx) {
                    attrs.insert(name.to_string(), value.to_string());
                }
            }
        }

        events.push(Event { case_id, event_type, timestamp_ms, attrs });
    }

    if events.is_empty() {
        return Err(Error::Data(format!("{} contains no event rows", path.display())));
    }
    EventLog::from_traces(source_name, group_into_traces(events)?)
}
