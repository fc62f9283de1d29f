use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;

use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Leader feeds the bus alone; follower tracks the measured bus phase.
    PreSync,
    /// Both machines on the bus under their primary controls.
    PostSync,
    /// Both machines on the bus under the shared integral loop.
    Agc,
    /// Phase-dependent damping: follower tracks the leader directly.
    Tracking,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::PreSync => "presync",
            Mode::PostSync => "postsync",
            Mode::Agc => "agc",
            Mode::Tracking => "tracking",
        }
    }
}

/// One sample. `e` is always `omega2 - omega3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    pub t: f64,
    pub theta1: f64,
    pub omega1: f64,
    pub theta3: f64,
    pub omega3: f64,
    pub theta2: f64,
    pub omega2: f64,
    pub e: f64,
    pub ell: f64,
    pub d: f64,
    pub mode: Mode,
    pub u1: f64,
    pub u2: f64,
    pub p1: f64,
    pub p2: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Connection,
    AgcEngaged,
    NoConnection,
    /// The detailed model is integrated only up to connection.
    RunEnded,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Connection => "connection",
            EventKind::AgcEngaged => "agc_engaged",
            EventKind::NoConnection => "no_connection",
            EventKind::RunEnded => "run_ended",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub kind: EventKind,
    pub record: Record,
    /// Wrapped `theta2 - theta3` at connection, i.e. including the part of
    /// the phase error the supervisor could not see.
    pub true_phase_error: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub events: Vec<Event>,
    pub horizon: f64,
}

pub const CSV_COLUMNS: [&str; 16] =
    ["t", "theta1", "omega1", "theta3", "omega3", "theta2", "omega2", "e", "ell", "d", "mode", "u1", "u2", "p1", "p2", "z"];

/// Fraction of the horizon, counted from its end, that defines steady state.
pub const TAIL_FRACTION: f64 = 0.2;

fn push_row(out: &mut String, r: &Record, mode: &str) {
    // `{:?}` round-trips f64 exactly and is stable across runs.
    let _ = writeln!(
        out,
        "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?},{:?},{:?},{:?},{:?}",
        r.t, r.theta1, r.omega1, r.theta3, r.omega3, r.theta2, r.omega2, r.e, r.ell, r.d, mode, r.u1, r.u2, r.p1, r.p2, r.z
    );
}

impl Trajectory {
    pub fn connection(&self) -> Option<&Event> {
        self.events.iter().find(|e| e.kind == EventKind::Connection)
    }

    pub fn connection_time(&self) -> Option<f64> {
        self.connection().map(|e| e.record.t)
    }

    pub fn tail_start(&self) -> f64 {
        self.horizon * (1.0 - TAIL_FRACTION)
    }

    pub fn tail(&self) -> impl Iterator<Item = &Record> {
        let start = self.tail_start();
        self.records.iter().filter(move |r| r.t >= start)
    }

    /// `sup |e|` over the last fifth of the horizon; `None` if the run ended
    /// before it.
    pub fn tail_sup_abs_e(&self) -> Option<f64> {
        self.tail().map(|r| r.e.abs()).reduce(f64::max)
    }

    pub fn max_freq_deviation(&self, omega0: f64) -> f64 {
        self.records.iter().map(|r| (r.omega3 - omega0).abs()).fold(0.0, f64::max)
    }

    /// Data rows in time order, then one flagged row per event
    /// (`mode` = `event:<kind>`).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(200 * (self.records.len() + 1));
        out.push_str(&CSV_COLUMNS.join(","));
        out.push('\n');
        for r in &self.records {
            push_row(&mut out, r, r.mode.as_str());
        }
        for e in &self.events {
            push_row(&mut out, &e.record, &format!("event:{}", e.kind.as_str()));
        }
        out
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_csv_string().as_bytes())?;
        Ok(())
    }
}
