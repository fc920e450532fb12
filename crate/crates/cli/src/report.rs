use std::fmt::Write as _;

use serde::Serialize;
use symmc::counter::CounterState;
use symmc::ctl::{Trace, Verdict};
use symmc::explore::{ComparisonReport, ExplorationStats, Mode};
use symmc::frontend::Program;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// The machine-readable report. Field order is the JSON key order.
#[derive(Debug, Serialize)]
pub struct Report {
    pub tool_version: &'static str,
    pub command: &'static str,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<StatsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<TraceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<TraceJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, model: String) -> Self {
        Self {
            tool_version: TOOL_VERSION,
            command,
            model,
            mode: None,
            property: None,
            verdict: None,
            stats: None,
            counterexample: None,
            witness: None,
            comparison: None,
            error: None,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct StatsJson {
    pub states_reached: usize,
    pub edges: usize,
    pub deadlocks: usize,
    pub frontier_peak: usize,
    pub duration_ms: u64,
    pub bad_reached: bool,
}

impl From<&ExplorationStats> for StatsJson {
    fn from(s: &ExplorationStats) -> Self {
        Self {
            states_reached: s.states_reached,
            edges: s.edges,
            deadlocks: s.deadlocks,
            frontier_peak: s.frontier_peak,
            duration_ms: s.duration.as_millis() as u64,
            bad_reached: s.bad_reached,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct TraceJson {
    pub length: usize,
    pub states: Vec<String>,
    pub actions: Vec<String>,
}

impl TraceJson {
    pub fn new(program: &Program, trace: &Trace) -> Self {
        Self {
            length: trace.len(),
            states: trace.states.iter().map(|s| program.render_state(s)).collect(),
            actions: trace.actions.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ComparisonJson {
    pub full: StatsJson,
    pub quotient: StatsJson,
    pub counter: Option<StatsJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counter_unsupported: Option<String>,
    pub reduction_factor: f64,
}

impl From<&ComparisonReport> for ComparisonJson {
    fn from(c: &ComparisonReport) -> Self {
        Self {
            full: (&c.full).into(),
            quotient: (&c.quotient).into(),
            counter: c.counter.as_ref().map(Into::into),
            counter_unsupported: c.counter_unsupported.clone(),
            reduction_factor: c.reduction_factor,
        }
    }
}

pub fn render_counter(program: &Program, state: &CounterState) -> String {
    let counts: Vec<String> = state
        .counts
        .iter()
        .map(|(record, count)| format!("{}:{count}", program.render_local(record)))
        .collect();
    let counts = format!("{{{}}}", counts.join(", "));
    if program.shared.is_empty() {
        return counts;
    }
    let shared: Vec<String> = program
        .shared
        .iter()
        .zip(&state.shared)
        .map(|(d, v)| format!("{}={}", d.name, program.render_value(v)))
        .collect();
    format!("{} | {counts}", shared.join(", "))
}

fn stats_line(s: &StatsJson) -> String {
    format!(
        "{} states, {} edges, {} deadlocks, frontier peak {}, {} ms{}",
        s.states_reached,
        s.edges,
        s.deadlocks,
        s.frontier_peak,
        s.duration_ms,
        if s.bad_reached { ", bad reached" } else { "" }
    )
}

fn trace_lines(out: &mut String, title: &str, t: &TraceJson) {
    let _ = writeln!(out, "{title} ({} steps):", t.length);
    for (i, state) in t.states.iter().enumerate() {
        let _ = writeln!(out, "  {i:>3}  {state}");
        if let Some(a) = t.actions.get(i) {
            let _ = writeln!(out, "       -- {a} -->");
        }
    }
}

pub fn render_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model: {}", r.model);
    if let Some(mode) = r.mode {
        let _ = writeln!(out, "mode: {mode}");
    }
    if let Some(p) = &r.property {
        let _ = writeln!(out, "property: {p}");
    }
    if let Some(v) = r.verdict {
        let _ = writeln!(
            out,
            "verdict: {}",
            match v {
                Verdict::Holds => "holds",
                Verdict::Fails => "fails",
            }
        );
    }
    if let Some(s) = &r.stats {
        let _ = writeln!(out, "stats: {}", stats_line(s));
    }
    if let Some(c) = &r.comparison {
        let _ = writeln!(out, "full:     {}", stats_line(&c.full));
        let _ = writeln!(out, "quotient: {}", stats_line(&c.quotient));
        match (&c.counter, &c.counter_unsupported) {
            (Some(s), _) => {
                let _ = writeln!(out, "counter:  {}", stats_line(s));
            }
            (None, Some(why)) => {
                let _ = writeln!(out, "counter:  unsupported ({why})");
            }
            (None, None) => {}
        }
        let _ = writeln!(out, "reduction factor: {:.1}", c.reduction_factor);
    }
    if let Some(t) = &r.counterexample {
        trace_lines(&mut out, "counterexample", t);
    }
    if let Some(t) = &r.witness {
        trace_lines(&mut out, "witness", t);
    }
    if let Some(e) = &r.error {
        let _ = writeln!(out, "error: {e}");
    }
    out
}
