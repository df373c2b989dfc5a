//! On-disk run artifacts.
//!
//! A run directory holds three files:
//!
//! - `trace.csv`: one row per vehicle per step with columns
//!   `step, vehicle, x, y, v, theta, accel, steer, cell_i, cell_j`. Step 0 is
//!   the initial state and leaves the control and cell columns empty; row `t`
//!   holds the state after executing step `t`'s control.
//! - `belief.jsonl`: one [`BeliefLine`] per step.
//! - `summary.json`: a [`RunSummary`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use active_altruism::{
    ActionEvaluation, Episode, EpisodeSummary, IntervalBelief, Scenario, VehicleState,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const TRACE_FILE: &str = "trace.csv";
pub const BELIEF_FILE: &str = "belief.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub vehicle: String,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub accel: Option<f64>,
    pub steer: Option<f64>,
    pub cell_i: Option<usize>,
    pub cell_j: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefLine {
    pub step: usize,
    /// `[leader_action, predicted_response]`.
    pub cell: [usize; 2],
    pub follower_action: usize,
    pub likelihoods: Vec<f64>,
    pub belief: IntervalBelief,
    pub evaluations: Vec<ActionEvaluation>,
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary<'a> {
    #[serde(flatten)]
    pub episode: &'a EpisodeSummary,
    pub leader_actions: &'a [String],
    pub follower_actions: &'a [String],
    /// Left and right lane centre lines.
    pub lane_centers: [f64; 2],
}

/// The parts of `summary.json` the plotter needs.
#[derive(Debug, Clone, Deserialize)]
pub struct SummaryView {
    pub leader_actions: Vec<String>,
    pub lane_centers: [f64; 2],
}

fn state_row(step: usize, vehicle: &str, s: &VehicleState) -> TraceRow {
    TraceRow {
        step,
        vehicle: vehicle.to_owned(),
        x: s.x,
        y: s.y,
        v: s.v,
        theta: s.theta,
        accel: None,
        steer: None,
        cell_i: None,
        cell_j: None,
    }
}

pub fn trace_rows(scenario: &Scenario, episode: &Episode) -> Vec<TraceRow> {
    let mut rows = vec![
        state_row(0, "leader", &scenario.initial_leader),
        state_row(0, "follower", &scenario.initial_follower),
    ];
    for r in &episode.records {
        let [i, j] = r.chosen_cell();
        for (vehicle, state, control) in [
            ("leader", &r.leader_state, r.leader_control),
            ("follower", &r.follower_state, r.follower_control),
        ] {
            rows.push(TraceRow {
                accel: Some(control.accel),
                steer: Some(control.steer),
                cell_i: Some(i),
                cell_j: Some(j),
                ..state_row(r.step + 1, vehicle, state)
            });
        }
    }
    rows
}

pub fn belief_lines(episode: &Episode) -> Vec<BeliefLine> {
    episode
        .records
        .iter()
        .map(|r| BeliefLine {
            step: r.step + 1,
            cell: r.chosen_cell(),
            follower_action: r.follower_action,
            likelihoods: r.likelihoods.clone(),
            belief: r.belief.clone(),
            evaluations: r.evaluations.clone(),
            warning: r.warning.clone(),
        })
        .collect()
}

pub fn write_run(dir: &Path, scenario: &Scenario, episode: &Episode) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;

    let path = dir.join(TRACE_FILE);
    let mut csv = csv::Writer::from_path(&path).map_err(CliError::csv(&path))?;
    for row in trace_rows(scenario, episode) {
        csv.serialize(row).map_err(CliError::csv(&path))?;
    }
    csv.flush().map_err(CliError::io(&path))?;

    let path = dir.join(BELIEF_FILE);
    let mut out = BufWriter::new(File::create(&path).map_err(CliError::io(&path))?);
    for line in belief_lines(episode) {
        let text = serde_json::to_string(&line).map_err(|source| CliError::JsonLine {
            path: path.clone(),
            line: line.step,
            source,
        })?;
        writeln!(out, "{text}").map_err(CliError::io(&path))?;
    }
    out.flush().map_err(CliError::io(&path))?;

    let path = dir.join(SUMMARY_FILE);
    let summary = RunSummary {
        episode: &episode.summary,
        leader_actions: scenario.game.leader_actions(),
        follower_actions: scenario.game.follower_actions(),
        lane_centers: [
            scenario.planner.features.x_left,
            scenario.planner.features.x_right,
        ],
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|source| CliError::Json {
        path: path.clone(),
        source,
    })?;
    std::fs::write(&path, text + "\n").map_err(CliError::io(&path))
}

pub fn read_trace(dir: &Path) -> CliResult<Vec<TraceRow>> {
    let path = dir.join(TRACE_FILE);
    let mut reader = csv::Reader::from_path(&path).map_err(CliError::csv(&path))?;
    reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(CliError::csv(&path))
}

pub fn read_beliefs(dir: &Path) -> CliResult<Vec<BeliefLine>> {
    let path = dir.join(BELIEF_FILE);
    let file = File::open(&path).map_err(CliError::io(&path))?;
    let mut lines = Vec::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(CliError::io(&path))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(&line).map_err(|source| CliError::JsonLine {
            path: path.clone(),
            line: k + 1,
            source,
        })?;
        lines.push(parsed);
    }
    Ok(lines)
}

pub fn read_summary(dir: &Path) -> CliResult<SummaryView> {
    let path = dir.join(SUMMARY_FILE);
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path, source })
}
