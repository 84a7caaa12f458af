//! Call-trace event model and the line-oriented `#trace v1` file format.
//!
//! A trace file holds the enter/exit events of one test execution:
//!
//! ```text
//! #trace v1;com.example.FooTest::testBar;3
//! E;1;0;com.example;Foo;run
//! X;1;950;com.example;Foo;run
//! ```
//!
//! Timestamps are nanoseconds relative to the start of the test. Every
//! `X` line repeats the method it closes so that corrupted traces are
//! detected instead of silently re-nested.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRACE_HEADER_PREFIX: &str = "#trace ";
pub const TRACE_FORMAT_VERSION: &str = "v1";

/// A fully qualified method: `package.Class::method`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct MethodId {
    package: String,
    class: String,
    method: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MethodIdError {
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("{part} `{value}` contains forbidden character {ch:?}")]
    ForbiddenChar {
        part: &'static str,
        value: String,
        ch: char,
    },
    #[error("package `{0}` has an empty segment")]
    EmptySegment(String),
    #[error("`{0}` is not of the form package.Class::method")]
    Malformed(String),
}

fn check_ident(part: &'static str, value: &str, allow_dot: bool) -> Result<(), MethodIdError> {
    if value.is_empty() {
        return Err(MethodIdError::Empty(part));
    }
    if let Some(ch) = value
        .chars()
        .find(|c| c.is_whitespace() || *c == ';' || *c == ':' || (!allow_dot && *c == '.'))
    {
        return Err(MethodIdError::ForbiddenChar {
            part,
            value: value.to_owned(),
            ch,
        });
    }
    Ok(())
}

impl MethodId {
    pub fn new(
        package: impl Into<String>,
        class: impl Into<String>,
        method: impl Into<String>,
    ) -> Result<Self, MethodIdError> {
        let (package, class, method) = (package.into(), class.into(), method.into());
        check_ident("package", &package, true)?;
        if package.split('.').any(str::is_empty) {
            return Err(MethodIdError::EmptySegment(package));
        }
        check_ident("class", &class, false)?;
        check_ident("method", &method, false)?;
        Ok(Self {
            package,
            class,
            method,
        })
    }

    pub fn package(&self) -> &str {
        &self.package
    }

    pub fn class(&self) -> &str {
        &self.class
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    /// `package.Class`, the string API prefix rules are matched against.
    pub fn qualified_class(&self) -> String {
        format!("{}.{}", self.package, self.class)
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}::{}", self.package, self.class, self.method)
    }
}

impl FromStr for MethodId {
    type Err = MethodIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (qualified, method) = s
            .rsplit_once("::")
            .ok_or_else(|| MethodIdError::Malformed(s.to_owned()))?;
        let (package, class) = qualified
            .rsplit_once('.')
            .ok_or_else(|| MethodIdError::Malformed(s.to_owned()))?;
        MethodId::new(package, class, method)
    }
}

impl TryFrom<String> for MethodId {
    type Error = MethodIdError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<MethodId> for String {
    fn from(value: MethodId) -> Self {
        value.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Enter,
    Exit,
}

impl EventKind {
    fn tag(self) -> char {
        match self {
            EventKind::Enter => 'E',
            EventKind::Exit => 'X',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub kind: EventKind,
    pub method: MethodId,
    pub thread: u64,
    pub t_ns: u64,
}

impl TraceEvent {
    pub fn enter(method: MethodId, thread: u64, t_ns: u64) -> Self {
        Self {
            kind: EventKind::Enter,
            method,
            thread,
            t_ns,
        }
    }

    pub fn exit(method: MethodId, thread: u64, t_ns: u64) -> Self {
        Self {
            kind: EventKind::Exit,
            method,
            thread,
            t_ns,
        }
    }
}

/// The recorded events of one execution of one test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestTrace {
    pub test_name: MethodId,
    pub sample_index: u32,
    pub events: Vec<TraceEvent>,
}

impl TestTrace {
    pub fn new(test_name: MethodId, sample_index: u32) -> Self {
        Self {
            test_name,
            sample_index,
            events: Vec::new(),
        }
    }

    pub fn enter_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Enter)
            .count()
    }
}

/// One broken invariant, located by event index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    /// An exit event with no open frame on its thread.
    ExitWithoutEnter { event: usize, method: MethodId },
    /// An exit event that does not close the innermost open frame.
    MismatchedExit {
        event: usize,
        expected: MethodId,
        found: MethodId,
    },
    /// Timestamp went backwards on a thread.
    NonMonotonic {
        event: usize,
        thread: u64,
        previous_ns: u64,
        t_ns: u64,
    },
    /// A frame still open at the end of the trace.
    Unclosed {
        thread: u64,
        method: MethodId,
        enter_event: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ExitWithoutEnter { event, method } => {
                write!(f, "event {event}: exit of {method} without matching enter")
            }
            Violation::MismatchedExit {
                event,
                expected,
                found,
            } => write!(
                f,
                "event {event}: exit of {found} while {expected} is the innermost open frame"
            ),
            Violation::NonMonotonic {
                event,
                thread,
                previous_ns,
                t_ns,
            } => write!(
                f,
                "event {event}: timestamp {t_ns} on thread {thread} precedes {previous_ns}"
            ),
            Violation::Unclosed {
                thread,
                method,
                enter_event,
            } => write!(
                f,
                "event {enter_event}: {method} on thread {thread} is never exited"
            ),
        }
    }
}

#[derive(Default)]
struct ThreadState {
    last_ns: Option<u64>,
    open: Vec<(usize, MethodId)>,
}

/// Incremental checker shared by the parser and [`validate_trace`].
#[derive(Default)]
struct NestingChecker {
    threads: BTreeMap<u64, ThreadState>,
}

impl NestingChecker {
    fn push(&mut self, index: usize, event: &TraceEvent) -> Option<Violation> {
        let state = self.threads.entry(event.thread).or_default();
        if let Some(previous_ns) = state.last_ns {
            if event.t_ns < previous_ns {
                return Some(Violation::NonMonotonic {
                    event: index,
                    thread: event.thread,
                    previous_ns,
                    t_ns: event.t_ns,
                });
            }
        }
        state.last_ns = Some(event.t_ns);
        match event.kind {
            EventKind::Enter => {
                state.open.push((index, event.method.clone()));
                None
            }
            EventKind::Exit => match state.open.last() {
                None => Some(Violation::ExitWithoutEnter {
                    event: index,
                    method: event.method.clone(),
                }),
                Some((_, open)) if *open != event.method => Some(Violation::MismatchedExit {
                    event: index,
                    expected: open.clone(),
                    found: event.method.clone(),
                }),
                Some(_) => {
                    state.open.pop();
                    None
                }
            },
        }
    }

    fn finish(self) -> Vec<Violation> {
        let mut unclosed: Vec<Violation> = self
            .threads
            .into_iter()
            .flat_map(|(thread, state)| {
                state
                    .open
                    .into_iter()
                    .map(move |(enter_event, method)| Violation::Unclosed {
                        thread,
                        method,
                        enter_event,
                    })
            })
            .collect();
        unclosed.sort_by_key(|v| match v {
            Violation::Unclosed { enter_event, .. } => *enter_event,
            _ => usize::MAX,
        });
        unclosed
    }
}

/// Lists every invariant violation of `trace`; an empty list means valid.
///
/// After a nesting or ordering violation the offending event is skipped and
/// checking resumes, so one corrupted line does not cascade.
pub fn validate_trace(trace: &TestTrace) -> Vec<Violation> {
    let mut checker = NestingChecker::default();
    let mut violations: Vec<Violation> = trace
        .events
        .iter()
        .enumerate()
        .filter_map(|(i, e)| checker.push(i, e))
        .collect();
    violations.extend(checker.finish());
    violations
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace is not valid UTF-8 (byte {0})")]
    Utf8(usize),
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line 1: unsupported trace format version `{0}`")]
    UnknownVersion(String),
    #[error("line {line}: {violation}")]
    Invariant { line: usize, violation: Violation },
    #[error("trace violates {} invariant(s), first: {}", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
}

fn malformed(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Malformed {
        line,
        message: message.into(),
    }
}

/// Splits text into LF-terminated lines; the final terminator is optional.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n').enumerate().map(|(i, l)| (i + 1, l))
}

fn parse_header<'a>(line: &'a str, tag: &str) -> Result<Vec<&'a str>, TraceError> {
    let rest = line
        .strip_prefix('#')
        .and_then(|l| l.strip_prefix(tag))
        .and_then(|l| l.strip_prefix(' '))
        .ok_or_else(|| malformed(1, format!("expected header `#{tag} v1;...`")))?;
    let fields: Vec<&str> = rest.split(';').collect();
    if fields[0] != TRACE_FORMAT_VERSION {
        return Err(TraceError::UnknownVersion(fields[0].to_owned()));
    }
    Ok(fields)
}

pub(crate) fn parse_u64(field: &str) -> Option<u64> {
    if field.is_empty() || !field.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    field.parse().ok()
}

/// Parses a `#trace v1` document and enforces every trace invariant.
pub fn parse_trace(bytes: &[u8]) -> Result<TestTrace, TraceError> {
    let text = std::str::from_utf8(bytes).map_err(|e| TraceError::Utf8(e.valid_up_to()))?;
    let mut lines = lines(text);
    let (_, header) = lines.next().unwrap_or((1, ""));
    let fields = parse_header(header, "trace")?;
    if fields.len() != 3 {
        return Err(malformed(1, "header needs exactly version;test_name;sample_index"));
    }
    let test_name: MethodId = fields[1]
        .parse()
        .map_err(|e: MethodIdError| malformed(1, format!("test name: {e}")))?;
    let sample_index = parse_u64(fields[2])
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| malformed(1, format!("invalid sample index `{}`", fields[2])))?;

    let mut trace = TestTrace::new(test_name, sample_index);
    let mut checker = NestingChecker::default();
    let mut line_of_event = Vec::new();
    for (line_no, line) in lines {
        if line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split(';').collect();
        if parts.len() != 6 {
            return Err(malformed(
                line_no,
                format!("expected 6 `;`-separated fields, found {}", parts.len()),
            ));
        }
        let kind = match parts[0] {
            "E" => EventKind::Enter,
            "X" => EventKind::Exit,
            other => return Err(malformed(line_no, format!("unknown event kind `{other}`"))),
        };
        let thread = parse_u64(parts[1])
            .ok_or_else(|| malformed(line_no, format!("invalid thread id `{}`", parts[1])))?;
        let t_ns = parse_u64(parts[2])
            .ok_or_else(|| malformed(line_no, format!("invalid timestamp `{}`", parts[2])))?;
        let method = MethodId::new(parts[3], parts[4], parts[5])
            .map_err(|e| malformed(line_no, e.to_string()))?;
        let event = TraceEvent {
            kind,
            method,
            thread,
            t_ns,
        };
        if let Some(violation) = checker.push(trace.events.len(), &event) {
            return Err(TraceError::Invariant {
                line: line_no,
                violation,
            });
        }
        line_of_event.push(line_no);
        trace.events.push(event);
    }
    if let Some(violation) = checker.finish().into_iter().next() {
        let line = match &violation {
            Violation::Unclosed { enter_event, .. } => line_of_event[*enter_event],
            _ => 1,
        };
        return Err(TraceError::Invariant { line, violation });
    }
    Ok(trace)
}

/// Renders `trace` in canonical form; fails if it violates an invariant.
pub fn write_trace(trace: &TestTrace) -> Result<String, TraceError> {
    let violations = validate_trace(trace);
    if !violations.is_empty() {
        return Err(TraceError::Invalid(violations));
    }
    let mut out = String::with_capacity(64 + trace.events.len() * 48);
    out.push_str(&format!(
        "{TRACE_HEADER_PREFIX}{TRACE_FORMAT_VERSION};{};{}\n",
        trace.test_name, trace.sample_index
    ));
    for e in &trace.events {
        out.push_str(&format!(
            "{};{};{};{};{};{}\n",
            e.kind.tag(),
            e.thread,
            e.t_ns,
            e.method.package,
            e.method.class,
            e.method.method
        ));
    }
    Ok(out)
}
