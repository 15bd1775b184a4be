use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::TrialRecord;
use crate::error::{Error, Result};
use crate::negotiation::agent_pair;

/// Bumped whenever the trial CSV columns change.
pub const CSV_VERSION: u32 = 1;

const HEADER: [&str; 21] = [
    "csv_version",
    "trial_index",
    "scenario",
    "anchor_strategy",
    "memory_policy",
    "result",
    "rounds_used",
    "fallback",
    "eta",
    "latency_ms",
    "energy_saving_pct",
    "agent_a",
    "agent_a_anchor",
    "agent_a_alloc",
    "agent_a_distance",
    "agent_b",
    "agent_b_anchor",
    "agent_b_alloc",
    "agent_b_distance",
    "retrieved",
    "retrieved_failures",
];

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// One row per trial. `agent_a` is the opener; empty cells mean "not applicable"
/// (no agreement, or a diverged queue).
pub fn write_csv<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(HEADER).map_err(csv_err)?;
    for r in records {
        let mut row = vec![
            CSV_VERSION.to_string(),
            r.trial_index.to_string(),
            r.scenario.as_str().to_string(),
            r.anchor_strategy.to_string(),
            r.memory_policy.to_string(),
            r.result.to_string(),
            r.rounds_used.to_string(),
            r.fallback.to_string(),
            r.eta.to_string(),
            opt(r.latency_ms),
            r.energy_saving_pct.to_string(),
        ];
        for a in agent_pair(r.scenario) {
            row.push(a.to_string());
            row.push(opt(r.anchors.get(&a).copied()));
            row.push(opt(r.allocations.get(&a).copied()));
            row.push(opt(r.distance_from_anchor.get(&a).copied()));
        }
        row.push(r.retrievals.len().to_string());
        row.push(r.retrievals.iter().filter(|x| x.was_failure).count().to_string());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush().map_err(|e| Error::io("csv output", e))?;
    Ok(())
}

/// One row per retrieved memory.
pub fn write_retrievals_csv<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["csv_version", "trial_index", "rank", "record_id", "was_failure", "age", "score"])
        .map_err(csv_err)?;
    for r in records {
        for (rank, m) in r.retrievals.iter().enumerate() {
            out.write_record([
                CSV_VERSION.to_string(),
                r.trial_index.to_string(),
                (rank + 1).to_string(),
                m.record_id.clone(),
                m.was_failure.to_string(),
                m.age.to_string(),
                m.score.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    out.flush().map_err(|e| Error::io("csv output", e))?;
    Ok(())
}

pub fn write_json<W: Write>(records: &[TrialRecord], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, records).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<R: Read>(r: R) -> Result<Vec<TrialRecord>> {
    serde_json::from_reader(r).map_err(|e| Error::Parse(e.to_string()))
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Renders the trial CSV: latency CDF, energy-saving CDF, anchor distances
and retrieved-memory ages. Usage: plot.py [trials.csv] [retrievals.csv]"""
import csv
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def ecdf(xs):
    xs = sorted(xs)
    n = len(xs)
    return xs, [(i + 1) / n for i in range(n)]


def load(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def main():
    trials = sys.argv[1] if len(sys.argv) > 1 else "__TRIALS__"
    retrievals = sys.argv[2] if len(sys.argv) > 2 else "__RETRIEVALS__"
    rows = load(trials)
    fig, ax = plt.subplots(2, 2, figsize=(10, 8))

    lat = [float(r["latency_ms"]) for r in rows if r["latency_ms"]]
    if lat:
        ax[0][0].step(*ecdf(lat), where="post")
    ax[0][0].set(title="Latency CDF", xlabel="ms", ylabel="F")

    es = [float(r["energy_saving_pct"]) for r in rows]
    ax[0][1].step(*ecdf(es), where="post")
    ax[0][1].set(title="Energy saving CDF", xlabel="%", ylabel="F")

    for side in ("a", "b"):
        d = [float(r[f"agent_{side}_distance"]) for r in rows if r[f"agent_{side}_distance"]]
        if d:
            ax[1][0].hist(d, bins=20, alpha=0.6, label=rows[0][f"agent_{side}"])
    ax[1][0].set(title="Distance from anchor", xlabel="resource units")
    ax[1][0].legend()

    try:
        ages = [int(r["age"]) for r in load(retrievals)]
    except FileNotFoundError:
        ages = []
    if ages:
        ax[1][1].hist(ages, bins=range(0, max(ages) + 2))
    ax[1][1].set(title="Retrieved memory age", xlabel="trials")

    fig.tight_layout()
    fig.savefig(trials.rsplit(".", 1)[0] + ".png", dpi=120)


if __name__ == "__main__":
    main()
"#;

/// Writes the matplotlib renderer for `trials_csv` / `retrievals_csv`.
pub fn write_plot_script<W: Write>(mut w: W, trials_csv: &str, retrievals_csv: &str) -> Result<()> {
    let body = PLOT_SCRIPT
        .replace("__TRIALS__", trials_csv)
        .replace("__RETRIEVALS__", retrievals_csv);
    w.write_all(body.as_bytes()).map_err(|e| Error::io("plot script", e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `trials.csv`, `retrievals.csv`, `trials.json` and `plot.py` into `dir`.
pub fn emit_report(records: &[TrialRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Empty("report needs at least one trial"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = ["trials.csv", "retrievals.csv", "trials.json", "plot.py"]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_csv(records, create(&paths[0])?)?;
    write_retrievals_csv(records, create(&paths[1])?)?;
    write_json(records, create(&paths[2])?)?;
    write_plot_script(create(&paths[3])?, "trials.csv", "retrievals.csv")?;
    Ok(paths)
}
