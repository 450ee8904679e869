use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::cloud::{CloudId, CloudModel};
use crate::graph::SocialGraph;
use crate::objective::Assignment;
use crate::partition::Telemetry;

use super::ExperimentError;

fn csv_err(path: &str, e: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Io { path: path.to_string(), message: e.to_string() }
}

/// `user_label,cloud_label` with a header row, users in index order.
pub fn write_assignment_csv<W: Write>(
    w: W,
    graph: &SocialGraph,
    model: &CloudModel,
    assignment: &Assignment,
) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(w);
    let err = |e| csv_err("assignment", e);
    w.write_record(["user_label", "cloud_label"]).map_err(err)?;
    for u in graph.users() {
        w.write_record([graph.label(u), model.cloud_label(assignment.cloud(u))]).map_err(err)?;
    }
    w.flush().map_err(|e| csv_err("assignment", e))
}

/// Inverse of [`write_assignment_csv`]. Every user must appear exactly once.
pub fn read_assignment_csv<R: Read>(r: R, graph: &SocialGraph, model: &CloudModel) -> Result<Assignment, ExperimentError> {
    let bad = |m: String| ExperimentError::Input { path: "assignment".into(), message: m };
    let mut host: Vec<Option<CloudId>> = vec![None; graph.n_users()];
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(bad(format!("line {line}: expected 2 fields, found {}", rec.len())));
        }
        let u = graph.user_id(&rec[0]).ok_or_else(|| bad(format!("line {line}: unknown user `{}`", &rec[0])))?;
        let c = model.cloud_id(&rec[1]).ok_or_else(|| bad(format!("line {line}: unknown cloud `{}`", &rec[1])))?;
        if host[u.0].replace(c).is_some() {
            return Err(bad(format!("line {line}: user `{}` assigned twice", &rec[0])));
        }
    }
    let missing = host.iter().filter(|h| h.is_none()).count();
    if missing > 0 {
        return Err(bad(format!("{missing} users have no cloud")));
    }
    Ok(Assignment::new(host.into_iter().flatten().collect()))
}

pub fn write_rows_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), ExperimentError> {
    let file = File::create(path).map_err(|e| ExperimentError::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    for row in rows {
        w.serialize(row).map_err(|e| ExperimentError::io(path, e))?;
    }
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

#[derive(Serialize)]
struct TelemetrySummary<'a> {
    total_connections: usize,
    initial_cross_cloud: usize,
    touched: usize,
    skipped_same_cloud: usize,
    stop: &'a crate::partition::StopReason,
    moves: usize,
}

/// One summary line, then one line per applied move.
pub fn write_telemetry_jsonl<W: Write>(mut w: W, telemetry: &Telemetry) -> Result<(), ExperimentError> {
    let err = |e: std::io::Error| csv_err("telemetry", e);
    let summary = TelemetrySummary {
        total_connections: telemetry.total_connections,
        initial_cross_cloud: telemetry.initial_cross_cloud,
        touched: telemetry.touched,
        skipped_same_cloud: telemetry.skipped_same_cloud,
        stop: &telemetry.stop,
        moves: telemetry.moves.len(),
    };
    serde_json::to_writer(&mut w, &summary).map_err(|e| csv_err("telemetry", e))?;
    writeln!(w).map_err(err)?;
    for m in &telemetry.moves {
        serde_json::to_writer(&mut w, m).map_err(|e| csv_err("telemetry", e))?;
        writeln!(w).map_err(err)?;
    }
    w.flush().map_err(err)
}
