//! Artifact writers: path CSV/JSON and form dumps. Every artifact carries run metadata.

use crate::error::{Error, Result};
use crate::forms::{NormalForm, SequenceForm};
use crate::refine::PerturbationFamily;
use crate::solve::{RunMetadata, SolveReport};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;

/// Column names `p<i>:<label>` for the nonroot sequences, in state order.
pub fn gamma_columns(labels: &[Vec<String>]) -> Vec<String> {
    labels
        .iter()
        .enumerate()
        .flat_map(|(i, ls)| ls.iter().skip(1).map(move |l| format!("p{}:{}", i + 1, l)))
        .collect()
}

/// `step,t,residual,<gamma labels...>`, preceded by `#` lines holding the metadata JSON.
pub fn write_path_csv<W: Write>(report: &SolveReport, mut out: W) -> Result<()> {
    let meta = serde_json::to_string(&report.metadata).map_err(json_err)?;
    writeln!(out, "# metadata: {meta}")?;
    let cols = gamma_columns(&report.gamma_labels);
    let n = cols.len();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["step".to_string(), "t".into(), "residual".into()];
    header.extend(cols);
    w.write_record(&header).map_err(csv_err)?;
    for (k, p) in report.trace.points.iter().enumerate() {
        let mut row = vec![k.to_string(), format!("{:e}", p.state.t), format!("{:e}", p.residual)];
        row.extend(p.state.z[..n].iter().map(|v| format!("{v:e}")));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct PathJson<'a> {
    metadata: &'a RunMetadata,
    status: &'a str,
    gamma_columns: Vec<String>,
    report: &'a SolveReport,
    points: &'a [crate::tracer::TracePoint],
}

/// Full states (γ, x, ν, t) of every accepted point.
pub fn path_json(report: &SolveReport) -> Result<Value> {
    serde_json::to_value(PathJson {
        metadata: &report.metadata,
        status: report.status.name(),
        gamma_columns: gamma_columns(&report.gamma_labels),
        report,
        points: &report.trace.points,
    })
    .map_err(json_err)
}

/// Writes CSV or JSON by extension.
pub fn write_path_file(report: &SolveReport, path: &std::path::Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => write_path_csv(report, f),
        Some("json") => serde_json::to_writer_pretty(f, &path_json(report)?).map_err(json_err),
        _ => Err(Error::InvalidParameter(format!("export path {} must end in .csv or .json", path.display()))),
    }
}

pub fn normal_form_json(nf: &NormalForm) -> Value {
    let labels: Vec<Vec<&str>> =
        nf.strategies.players.iter().map(|ps| ps.iter().map(|p| p.label.as_str()).collect()).collect();
    let payoffs: Vec<Value> = (0..nf.num_profiles())
        .map(|k| {
            let prof = nf.unflatten(k);
            json!({ "profile": prof, "payoff": nf.payoff(&prof) })
        })
        .collect();
    json!({ "players": nf.num_players, "shape": nf.shape, "strategies": labels, "payoffs": payoffs })
}

pub fn sequence_form_json(sf: &SequenceForm) -> Value {
    let players: Vec<Value> = sf
        .players
        .iter()
        .enumerate()
        .map(|(i, p)| {
            // one (info set, leading sequence, extensions) triple per flow row
            let constraints: Vec<Value> = p
                .infosets
                .iter()
                .map(|h| {
                    json!({
                        "infoset": h.name,
                        "parent": p.sequences[h.parent_seq].label,
                        "extensions": h.extensions().map(|s| p.sequences[s].label.clone()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({
                "player": i + 1,
                "sequences": p.sequences.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
                "constraints": constraints,
            })
        })
        .collect();
    let entries: Vec<Value> = sf
        .entries
        .iter()
        .map(|e| {
            let seqs: Vec<&str> =
                e.seqs.iter().enumerate().map(|(i, &s)| sf.players[i].sequences[s].label.as_str()).collect();
            json!({ "sequences": seqs, "payoff": e.payoff })
        })
        .collect();
    json!({
        "players": players,
        "n0": sf.n0(),
        "m0": sf.m0(),
        "payoff_entries": entries,
        "chance_plan": sf.chance_plan,
    })
}

pub fn perturbation_json(sf: &SequenceForm, fam: &PerturbationFamily) -> Value {
    let players: Vec<Value> = fam
        .players
        .iter()
        .enumerate()
        .map(|(i, pf)| {
            let sets: Vec<Value> = pf
                .sets
                .iter()
                .zip(&pf.q)
                .map(|(set, q)| {
                    json!({
                        "sequences": set.iter().map(|&s| sf.players[i].sequences[s].label.clone()).collect::<Vec<_>>(),
                        "q": q,
                    })
                })
                .collect();
            json!({ "player": i + 1, "count": pf.len(), "kappa_root": pf.kappa_root, "kappa": fam.kappa.players[i], "sets": sets })
        })
        .collect();
    json!({ "counts": fam.counts(), "total": fam.total(), "max_set_size": fam.max_set_size(), "players": players })
}

pub(crate) fn json_err(e: serde_json::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}
