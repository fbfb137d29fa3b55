//! CSV files produced and consumed by the experiments.
//!
//! Every file starts with a `# etm-wave <kind> v1` schema line. Numbers use
//! the shortest representation that parses back to the same `f64`; optional
//! values are written as empty fields.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{TraceMeta, TraceRecord, TraceRow};
use crate::error::{Error, Result};
use crate::simulation::Snapshot;
use crate::trigger::EventRecord;

pub const TRACE_SCHEMA: &str = "# etm-wave trace v1";
pub const EVENTS_SCHEMA: &str = "# etm-wave events v1";
pub const SNAPSHOT_SCHEMA: &str = "# etm-wave snapshots v1";
pub const COMPARE_SCHEMA: &str = "# etm-wave compare v1";
pub const SWEEP_SCHEMA: &str = "# etm-wave sweep v1";

pub const TRACE_HEADER: &str = "t,energy,lyapunov,lyapunov_rate,error_norm_sq,threshold,control_norm,event";
pub const EVENTS_HEADER: &str = "k,t_k,dwell,error_norm_sq_at_trigger,energy_at_trigger";
pub const COMPARE_HEADER: &str = "t,continuous,event_triggered,fixed,periodic";

/// Locale-independent, round-trip exact.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn trace_to_csv(trace: &TraceRecord) -> String {
    let m = &trace.meta;
    let mut out = String::new();
    let _ = writeln!(out, "{TRACE_SCHEMA}");
    let _ = writeln!(out, "# policy={}", m.policy);
    let _ = writeln!(out, "# alpha={}", fmt_num(m.alpha));
    let _ = writeln!(out, "# gamma={}", fmt_opt(m.gamma));
    let _ = writeln!(out, "# tau={}", fmt_opt(m.tau));
    let _ = writeln!(out, "# epsilon={}", fmt_opt(m.epsilon));
    let _ = writeln!(out, "# length={}", fmt_num(m.length));
    let _ = writeln!(out, "# n_interior={}", m.n_interior);
    let _ = writeln!(out, "# dt={}", fmt_num(m.dt));
    let _ = writeln!(out, "# horizon={}", fmt_num(m.horizon));
    let _ = writeln!(out, "# e0={}", fmt_num(m.e0));
    let _ = writeln!(out, "# c1={}", fmt_num(m.c1));
    let _ = writeln!(out, "{TRACE_HEADER}");
    for r in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt_num(r.t),
            fmt_num(r.energy),
            fmt_opt(r.lyapunov),
            fmt_opt(r.lyapunov_rate),
            fmt_num(r.error_norm_sq),
            fmt_opt(r.threshold),
            fmt_num(r.control_norm),
            u8::from(r.event)
        );
    }
    out
}

pub fn write_trace(path: &Path, trace: &TraceRecord) -> Result<()> {
    write_text(path, &trace_to_csv(trace))
}

struct LineReader<'a> {
    name: String,
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
}

impl<'a> LineReader<'a> {
    fn new(name: &str, text: &'a str) -> Self {
        LineReader {
            name: name.to_string(),
            lines: text.lines().enumerate().peekable(),
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.name.clone(),
            line,
            message: message.into(),
        }
    }

    fn expect_line(&mut self, expected: &str) -> Result<()> {
        match self.lines.next() {
            Some((_, l)) if l.trim_end() == expected => Ok(()),
            Some((i, l)) => Err(self.err(i + 1, format!("expected '{expected}', found '{l}'"))),
            None => Err(self.err(0, format!("missing '{expected}'"))),
        }
    }
}

fn field_f64(reader: &LineReader, line: usize, name: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| reader.err(line, format!("bad {name} value '{s}'")))
}

fn field_opt(reader: &LineReader, line: usize, name: &str, s: &str) -> Result<Option<f64>> {
    if s.trim().is_empty() {
        Ok(None)
    } else {
        field_f64(reader, line, name, s).map(Some)
    }
}

pub fn trace_from_csv(name: &str, text: &str) -> Result<TraceRecord> {
    let mut reader = LineReader::new(name, text);
    reader.expect_line(TRACE_SCHEMA)?;
    let mut kv = std::collections::HashMap::new();
    while let Some((i, l)) = reader.lines.peek().copied() {
        let Some(body) = l.strip_prefix('#') else { break };
        reader.lines.next();
        let (k, v) = body
            .trim()
            .split_once('=')
            .ok_or_else(|| reader.err(i + 1, format!("bad metadata line '{l}'")))?;
        kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let get = |key: &str| -> Result<(usize, String)> {
        kv.get(key)
            .cloned()
            .ok_or_else(|| reader.err(0, format!("missing metadata '{key}'")))
    };
    let num = |key: &str| -> Result<f64> {
        let (line, v) = get(key)?;
        field_f64(&reader, line, key, &v)
    };
    let opt = |key: &str| -> Result<Option<f64>> {
        let (line, v) = get(key)?;
        field_opt(&reader, line, key, &v)
    };
    let (line, n) = get("n_interior")?;
    let n_interior = n
        .parse::<usize>()
        .map_err(|_| reader.err(line, format!("bad n_interior '{n}'")))?;
    let meta = TraceMeta {
        policy: get("policy")?.1,
        alpha: num("alpha")?,
        gamma: opt("gamma")?,
        tau: opt("tau")?,
        epsilon: opt("epsilon")?,
        length: num("length")?,
        n_interior,
        dt: num("dt")?,
        horizon: num("horizon")?,
        e0: num("e0")?,
        c1: num("c1")?,
    };
    reader.expect_line(TRACE_HEADER)?;
    let mut rows = Vec::new();
    while let Some((i, l)) = reader.lines.next() {
        if l.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 8 {
            return Err(reader.err(lineno, format!("expected 8 fields, found {}", f.len())));
        }
        let event = match f[7].trim() {
            "0" => false,
            "1" => true,
            other => return Err(reader.err(lineno, format!("bad event flag '{other}'"))),
        };
        rows.push(TraceRow {
            t: field_f64(&reader, lineno, "t", f[0])?,
            energy: field_f64(&reader, lineno, "energy", f[1])?,
            lyapunov: field_opt(&reader, lineno, "lyapunov", f[2])?,
            lyapunov_rate: field_opt(&reader, lineno, "lyapunov_rate", f[3])?,
            error_norm_sq: field_f64(&reader, lineno, "error_norm_sq", f[4])?,
            threshold: field_opt(&reader, lineno, "threshold", f[5])?,
            control_norm: field_f64(&reader, lineno, "control_norm", f[6])?,
            event,
        });
    }
    Ok(TraceRecord { meta, rows })
}

pub fn read_trace(path: &Path) -> Result<TraceRecord> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    trace_from_csv(&path.display().to_string(), &text)
}

pub fn events_to_csv(events: &[EventRecord]) -> String {
    let mut out = format!("{EVENTS_SCHEMA}\n{EVENTS_HEADER}\n");
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            e.k,
            fmt_num(e.t),
            fmt_opt(e.dwell),
            fmt_num(e.error_norm_sq),
            fmt_num(e.energy)
        );
    }
    out
}

pub fn write_events(path: &Path, events: &[EventRecord]) -> Result<()> {
    write_text(path, &events_to_csv(events))
}

/// First data row: an empty cell then the node coordinates. Each later row:
/// `t` then the nodal `z` values.
pub fn snapshots_to_csv(nodes: &[f64], snapshots: &[Snapshot]) -> String {
    let mut out = format!("{SNAPSHOT_SCHEMA}\n");
    for x in nodes {
        out.push(',');
        out.push_str(&fmt_num(*x));
    }
    out.push('\n');
    for s in snapshots {
        out.push_str(&fmt_num(s.t));
        for z in &s.z {
            out.push(',');
            out.push_str(&fmt_num(*z));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TraceRecord {
        TraceRecord {
            meta: TraceMeta {
                policy: "event_triggered".into(),
                alpha: 1.0,
                gamma: Some(0.1136),
                tau: None,
                epsilon: Some(0.5),
                length: std::f64::consts::PI,
                n_interior: 3,
                dt: 0.1,
                horizon: 0.2,
                e0: 1.5,
                c1: 2.25,
            },
            rows: vec![
                TraceRow {
                    t: 0.0,
                    energy: 1.5,
                    lyapunov: Some(1.6),
                    lyapunov_rate: Some(-0.7),
                    error_norm_sq: 0.0,
                    threshold: Some(0.3408),
                    control_norm: 1.2345678901234567,
                    event: true,
                },
                TraceRow {
                    t: 0.1,
                    energy: 1.4e-17,
                    lyapunov: None,
                    lyapunov_rate: None,
                    error_norm_sq: 3e-5,
                    threshold: None,
                    control_norm: 0.0,
                    event: false,
                },
            ],
        }
    }

    #[test]
    fn trace_round_trip_is_exact() {
        let t = sample();
        let back = trace_from_csv("mem", &trace_to_csv(&t)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn corrupted_trace_reports_line() {
        let text = trace_to_csv(&sample()).replace("1.4e-17", "abc");
        let err = trace_from_csv("bad.csv", &text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad.csv") && msg.contains("line 15") && msg.contains("energy"), "{msg}");
        assert!(trace_from_csv("x", "t,energy\n1,2\n").is_err());
    }

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.0, 1.0, -0.5, 1e-20, 123456.789, 1e300, std::f64::consts::PI / 7.0] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn events_and_snapshots_layout() {
        let ev = vec![
            EventRecord { k: 0, t: 0.0, dwell: None, error_norm_sq: 0.0, energy: 1.0 },
            EventRecord { k: 1, t: 0.5, dwell: Some(0.5), error_norm_sq: 0.25, energy: 0.9 },
        ];
        let csv = events_to_csv(&ev);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], EVENTS_HEADER);
        assert_eq!(lines[2], "0,0,,0,1");
        assert_eq!(lines[3], "1,0.5,0.5,0.25,0.9");

        let snaps = vec![Snapshot { t: 0.0, z: vec![1.0, 2.0] }];
        let csv = snapshots_to_csv(&[0.5, 1.0], &snaps);
        assert_eq!(csv.lines().nth(1).unwrap(), ",0.5,1");
        assert_eq!(csv.lines().nth(2).unwrap(), "0,1,2");
    }
}
