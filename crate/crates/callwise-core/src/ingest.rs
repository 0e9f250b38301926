//! Raw call-log ingestion: parses delimited event rows and converts them
//! into categorical context datasets.
//!
//! The raw format is one event per line, comma-separated:
//!
//! ```text
//! timestamp,direction,duration_seconds,counterpart,location,situation[,event_type]
//! 2004-03-05T09:12:44,incoming,0,047XXXX231,Office,Meeting
//! ```
//!
//! Timestamps are `%Y-%m-%dT%H:%M:%S`. Location and situation may be
//! empty; they become the reserved `unspecified` value. The optional
//! seventh column distinguishes unanswered rings (`missed`) from declined
//! calls, since both have duration zero. Counterparts stay opaque: each
//! distinct identifier is renamed to `Rel_1`, `Rel_2`, ... in first-seen
//! order so datasets carry relationships, not phone numbers.

use alloc::borrow::ToOwned;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use chrono::{Datelike, NaiveDateTime, Timelike, Weekday};
use thiserror::Error;

use crate::model::{AttributeSchema, Dataset, Instance};

/// Reserved categorical value for absent optional contexts. Participates
/// in counting like any other value.
pub const UNSPECIFIED: &str = "unspecified";

/// Header line the raw format starts with; the seventh column may be
/// omitted row by row even though the header names it.
pub const RAW_LOG_HEADER: &str =
    "timestamp,direction,duration_seconds,counterpart,location,situation,event_type";

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Incoming,
    Outgoing,
}

/// Source marker distinguishing an unanswered ring from an ordinary call
/// row. Only meaningful for incoming events with duration zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventKind {
    #[default]
    Call,
    Missed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCallEvent {
    pub timestamp: NaiveDateTime,
    pub direction: Direction,
    pub duration_seconds: u32,
    pub counterpart: String,
    pub location: Option<String>,
    pub situation: Option<String>,
    pub kind: EventKind,
}

/// The four call outcomes, in the fixed class order datasets use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    Accept,
    Reject,
    Missed,
    Outgoing,
}

impl Behavior {
    pub const ALL: [Behavior; 4] = [
        Behavior::Accept,
        Behavior::Reject,
        Behavior::Missed,
        Behavior::Outgoing,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Behavior::Accept => "Accept",
            Behavior::Reject => "Reject",
            Behavior::Missed => "Missed",
            Behavior::Outgoing => "Outgoing",
        }
    }
}

/// Outcome of one event. Outgoing direction decides first; for incoming
/// calls a positive duration means the call was taken, and zero duration
/// splits on the missed marker.
pub fn derive_behavior(event: &RawCallEvent) -> Behavior {
    match event.direction {
        Direction::Outgoing => Behavior::Outgoing,
        Direction::Incoming if event.duration_seconds > 0 => Behavior::Accept,
        Direction::Incoming if event.kind == EventKind::Missed => Behavior::Missed,
        Direction::Incoming => Behavior::Reject,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("line {line}: expected the raw-log header {RAW_LOG_HEADER:?}")]
    BadHeader { line: usize },
    #[error("line {line}: expected 6 or 7 fields, found {found}")]
    WrongFieldCount { line: usize, found: usize },
    #[error("line {line}: bad timestamp {value:?} (expected {TIMESTAMP_FORMAT})")]
    BadTimestamp { line: usize, value: String },
    #[error("line {line}: bad direction {value:?} (expected incoming or outgoing)")]
    BadDirection { line: usize, value: String },
    #[error("line {line}: bad duration {value:?} (expected a non-negative integer)")]
    BadDuration { line: usize, value: String },
    #[error("line {line}: counterpart must not be empty")]
    EmptyCounterpart { line: usize },
    #[error("line {line}: bad event type {value:?} (expected call or missed)")]
    BadEventKind { line: usize, value: String },
}

/// Parses a whole raw log. The first non-blank line must be the header;
/// blank lines are skipped; a completely empty input yields an empty list.
/// Errors carry 1-based line numbers.
pub fn parse_call_log(input: &str) -> Result<Vec<RawCallEvent>, IngestError> {
    let mut events = Vec::new();
    let mut saw_header = false;
    for (idx, raw_line) in input.lines().enumerate() {
        let line = idx + 1;
        let text = raw_line.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if text != RAW_LOG_HEADER {
                return Err(IngestError::BadHeader { line });
            }
            saw_header = true;
            continue;
        }
        events.push(parse_row(line, text)?);
    }
    Ok(events)
}

fn parse_row(line: usize, text: &str) -> Result<RawCallEvent, IngestError> {
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != 6 && fields.len() != 7 {
        return Err(IngestError::WrongFieldCount {
            line,
            found: fields.len(),
        });
    }
    let timestamp = NaiveDateTime::parse_from_str(fields[0], TIMESTAMP_FORMAT).map_err(|_| {
        IngestError::BadTimestamp {
            line,
            value: fields[0].to_owned(),
        }
    })?;
    let direction = match fields[1] {
        "incoming" => Direction::Incoming,
        "outgoing" => Direction::Outgoing,
        other => {
            return Err(IngestError::BadDirection {
                line,
                value: other.to_owned(),
            })
        }
    };
    let duration_seconds: u32 = fields[2].parse().map_err(|_| IngestError::BadDuration {
        line,
        value: fields[2].to_owned(),
    })?;
    if fields[3].is_empty() {
        return Err(IngestError::EmptyCounterpart { line });
    }
    let optional = |s: &str| {
        if s.is_empty() {
            None
        } else {
            Some(s.to_owned())
        }
    };
    let kind = match fields.get(6).copied() {
        None | Some("") | Some("call") => EventKind::Call,
        Some("missed") => EventKind::Missed,
        Some(other) => {
            return Err(IngestError::BadEventKind {
                line,
                value: other.to_owned(),
            })
        }
    };
    Ok(RawCallEvent {
        timestamp,
        direction,
        duration_seconds,
        counterpart: fields[3].to_owned(),
        location: optional(fields[4]),
        situation: optional(fields[5]),
        kind,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DayGranularity {
    #[default]
    DayOfWeek,
    WeekdayWeekend,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SegmentationError {
    #[error("segment cut points must be strictly increasing and end at 24:00")]
    InvalidCuts,
}

/// Fixed time-of-day segmentation: cut points are segment end minutes,
/// strictly increasing, the last one exactly 1440. The implicit first
/// segment starts at midnight; each segment is start-inclusive,
/// end-exclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationConfig {
    cuts: Vec<u16>,
    pub day_granularity: DayGranularity,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            cuts: vec![360, 720, 1080, 1440],
            day_granularity: DayGranularity::DayOfWeek,
        }
    }
}

impl SegmentationConfig {
    pub fn new(
        cuts: Vec<u16>,
        day_granularity: DayGranularity,
    ) -> Result<Self, SegmentationError> {
        let increasing = cuts.windows(2).all(|w| w[0] < w[1]);
        if cuts.is_empty() || !increasing || *cuts.last().unwrap() != 1440 || cuts[0] == 0 {
            return Err(SegmentationError::InvalidCuts);
        }
        Ok(Self {
            cuts,
            day_granularity,
        })
    }

    pub fn cuts(&self) -> &[u16] {
        &self.cuts
    }

    fn day_label(&self, day: Weekday) -> &'static str {
        match self.day_granularity {
            DayGranularity::DayOfWeek => match day {
                Weekday::Mon => "Mon",
                Weekday::Tue => "Tue",
                Weekday::Wed => "Wed",
                Weekday::Thu => "Thu",
                Weekday::Fri => "Fri",
                Weekday::Sat => "Sat",
                Weekday::Sun => "Sun",
            },
            DayGranularity::WeekdayWeekend => match day {
                Weekday::Sat | Weekday::Sun => "Weekend",
                _ => "Weekday",
            },
        }
    }
}

fn fmt_minutes(out: &mut String, minutes: u16) {
    let h = minutes / 60;
    let m = minutes % 60;
    let push_two = |out: &mut String, v: u16| {
        out.push((b'0' + (v / 10) as u8) as char);
        out.push((b'0' + (v % 10) as u8) as char);
    };
    push_two(out, h);
    out.push(':');
    push_two(out, m);
}

/// Day-time segment label such as `Fri[06:00-12:00]`. Every timestamp
/// lands in exactly one segment.
pub fn segment_time(timestamp: NaiveDateTime, config: &SegmentationConfig) -> String {
    let minute_of_day = (timestamp.time().hour() * 60 + timestamp.time().minute()) as u16;
    let seg = config
        .cuts
        .iter()
        .position(|&end| minute_of_day < end)
        .expect("cut points cover the full day");
    let start = if seg == 0 { 0 } else { config.cuts[seg - 1] };
    let mut label = String::new();
    label.push_str(config.day_label(timestamp.date().weekday()));
    label.push('[');
    fmt_minutes(&mut label, start);
    label.push('-');
    fmt_minutes(&mut label, config.cuts[seg]);
    label.push(']');
    label
}

/// First-seen assignment of opaque counterpart identifiers to `Rel_k`
/// labels. One registry per source log; labels are never shared across
/// users.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationshipRegistry {
    /// (counterpart, label) in minted order.
    entries: Vec<(String, String)>,
}

impl RelationshipRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the counterpart's label, minting the next `Rel_k` on first
    /// sight.
    pub fn map(&mut self, counterpart: &str) -> &str {
        if let Some(pos) = self.entries.iter().position(|(c, _)| c == counterpart) {
            return &self.entries[pos].1;
        }
        let mut label = String::from("Rel_");
        label.push_str(&(self.entries.len() + 1).to_string());
        self.entries.push((counterpart.to_owned(), label));
        &self.entries.last().unwrap().1
    }

    pub fn lookup(&self, counterpart: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(c, _)| c == counterpart)
            .map(|(_, l)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Minted pairs in first-seen order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(c, l)| (c.as_str(), l.as_str()))
    }
}

/// Converts events into a dataset with attributes (daytime, location,
/// situation, relationship) and the fixed four-class label set. Attribute
/// domains are the observed values in first-seen order; absent optional
/// contexts appear as [`UNSPECIFIED`]. Also returns the relationship
/// registry backing the fourth attribute.
pub fn build_dataset(
    events: &[RawCallEvent],
    config: &SegmentationConfig,
) -> (Dataset, RelationshipRegistry) {
    let mut registry = RelationshipRegistry::new();
    let mut rows: Vec<([String; 4], Behavior)> = Vec::with_capacity(events.len());
    for event in events {
        let daytime = segment_time(event.timestamp, config);
        let location = event.location.as_deref().unwrap_or(UNSPECIFIED).to_owned();
        let situation = event.situation.as_deref().unwrap_or(UNSPECIFIED).to_owned();
        let relationship = registry.map(&event.counterpart).to_owned();
        rows.push((
            [daytime, location, situation, relationship],
            derive_behavior(event),
        ));
    }

    let attr_names = ["daytime", "location", "situation", "relationship"];
    let mut domains: Vec<Vec<String>> = vec![Vec::new(); attr_names.len()];
    for (values, _) in &rows {
        for (a, value) in values.iter().enumerate() {
            if !domains[a].iter().any(|v| v == value) {
                domains[a].push(value.clone());
            }
        }
    }
    let schema = AttributeSchema::from_observed(
        attr_names
            .iter()
            .zip(domains)
            .map(|(&n, d)| (n.to_owned(), d))
            .collect(),
        Behavior::ALL.iter().map(|b| b.as_str().to_owned()).collect(),
    );
    let instances = rows
        .into_iter()
        .map(|(values, behavior)| {
            let refs: Vec<&str> = values.iter().map(String::as_str).collect();
            schema
                .encode_instance(&refs, behavior.as_str())
                .expect("observed values are in the minted domains")
        })
        .collect::<Vec<Instance>>();
    (Dataset::new(schema, instances), registry)
}
