//! File formats: signal CSV, edge-list CSV, NDJSON streams, price CSV, and
//! tracking-report CSV. Writers are deterministic so reruns with the same
//! inputs produce byte-identical files.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{edge_dim, pair_index, pair_iter, EdgeVector, SignalMatrix};
use crate::online::{StreamSample, TrackingReport};

/// Writes one signal per row under a `node_0..node_{N-1}` header.
pub fn write_signals_csv(path: &Path, x: &SignalMatrix) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let header: Vec<String> = (0..x.n()).map(|i| format!("node_{i}")).collect();
    writer.write_record(&header)?;
    for p in 0..x.p() {
        let row: Vec<String> = (0..x.n()).map(|i| x.data()[(i, p)].to_string()).collect();
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads signals (one per row, header optional) into columns.
pub fn read_signals_csv(path: &Path) -> Result<SignalMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => rows.push(row),
            Err(_) if idx == 0 => continue, // header row
            Err(e) => return Err(Error::Parse(format!("signal csv row {idx}: {e}"))),
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse("signal csv has no data rows".into()));
    }
    let n = rows[0].len();
    for (idx, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse(format!(
                "signal csv row {idx} has {} fields, expected {n}",
                row.len()
            )));
        }
    }
    let p = rows.len();
    let data = DMatrix::from_fn(n, p, |i, c| rows[c][i]);
    SignalMatrix::new(data)
}

/// Writes nonzero edges as `i,j,weight` rows; absent rows mean zero weight.
pub fn write_edges_csv(path: &Path, w: &EdgeVector) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["i", "j", "weight"])?;
    for (k, (i, j)) in pair_iter(w.n()).enumerate() {
        let weight = w.weights()[k];
        if weight != 0.0 {
            writer.write_record(&[i.to_string(), j.to_string(), weight.to_string()])?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Reads an `i,j,weight` edge list (header optional). When `n` is absent it
/// is inferred as the largest node index plus one.
pub fn read_edges_csv(path: &Path, n: Option<usize>) -> Result<EdgeVector> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut triples: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != 3 {
            return Err(Error::Parse(format!(
                "edge csv row {idx} has {} fields, expected 3",
                record.len()
            )));
        }
        let parse = || -> std::result::Result<(usize, usize, f64), String> {
            let i = record[0].trim().parse::<usize>().map_err(|e| e.to_string())?;
            let j = record[1].trim().parse::<usize>().map_err(|e| e.to_string())?;
            let w = record[2].trim().parse::<f64>().map_err(|e| e.to_string())?;
            Ok((i, j, w))
        };
        match parse() {
            Ok(triple) => triples.push(triple),
            Err(_) if idx == 0 => continue, // header row
            Err(e) => return Err(Error::Parse(format!("edge csv row {idx}: {e}"))),
        }
    }
    let n = match n {
        Some(n) => n,
        None => triples
            .iter()
            .map(|&(i, j, _)| i.max(j) + 1)
            .max()
            .ok_or_else(|| Error::Parse("edge csv has no edges and no node count".into()))?,
    };
    let mut w = DVector::zeros(edge_dim(n));
    for (i, j, weight) in triples {
        w[pair_index(i, j, n)?] = weight;
    }
    EdgeVector::new(n, w)
}

/// One `{"t": .., "class": .., "x": [..]}` object per line.
pub fn write_stream_ndjson(path: &Path, samples: &[StreamSample]) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    for sample in samples {
        serde_json::to_writer(&mut out, sample)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_stream_ndjson(path: &Path) -> Result<Vec<StreamSample>> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut samples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let sample: StreamSample = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("stream line {idx}: {e}")))?;
        samples.push(sample);
    }
    Ok(samples)
}

/// Price table with a leading `date` column and one column per node.
/// Returns the dates and a `T x N` value matrix.
pub fn read_prices_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let n = reader.headers()?.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::Parse("price csv needs date plus node columns".into()));
    }
    let mut dates = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != n + 1 {
            return Err(Error::Parse(format!(
                "price csv row {idx} has {} fields, expected {}",
                record.len(),
                n + 1
            )));
        }
        dates.push(record[0].to_string());
        for field in record.iter().skip(1) {
            let v = field
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("price csv row {idx}: {e}")))?;
            values.push(v);
        }
    }
    if dates.is_empty() {
        return Err(Error::Parse("price csv has no data rows".into()));
    }
    let t = dates.len();
    let matrix = DMatrix::from_fn(t, n, |r, c| values[r * n + c]);
    Ok((dates, matrix))
}

/// Tracking report rows as `time,distance,bound,objective_gap`.
pub fn write_tracking_report_csv(path: &Path, report: &TrackingReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["time", "distance", "bound", "objective_gap"])?;
    for cp in &report.checkpoints {
        writer.write_record(&[
            cp.time.to_string(),
            cp.distance.to_string(),
            cp.bound.to_string(),
            cp.objective_gap().to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
