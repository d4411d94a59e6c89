//! Trace persistence and CSV inputs.
//!
//! A run directory holds one `trace_<seed>.csv` per episode plus an
//! `episodes.csv` index carrying the terminal flags. Step costs are
//! recomputed from the token counts on read, so metrics computed from disk
//! match the in-memory metrics exactly despite the 9-digit rounding.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Writer};
use nalgebra::DMatrix;

use crate::action::{Action, ActionBuffer, Source};
use crate::config::CostModel;
use crate::error::{Error, Result};
use crate::sim::{cost_of_step, EpisodeTrace, StepRecord};

pub const TRACE_COLUMNS: [&str; 15] = [
    "step",
    "source",
    "ax",
    "ay",
    "az",
    "rx",
    "ry",
    "rz",
    "gripper",
    "speed",
    "tokens_total",
    "tokens_kept",
    "retain_ratio",
    "cost",
    "cum_cost",
];

pub const BUFFER_COLUMNS: [&str; 7] = ["ax", "ay", "az", "rx", "ry", "rz", "gripper"];

const INDEX_COLUMNS: [&str; 4] = ["seed", "success", "steps_used", "final_error"];

/// Formats like C's `%.9g`: nine significant digits, trailing zeros
/// dropped, exponent notation outside `1e-4 ..< 1e9`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn close_at_sig9(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-300)
}

pub fn write_trace<W: Write>(trace: &EpisodeTrace, sink: W) -> Result<()> {
    let mut w = Writer::from_writer(sink);
    w.write_record(TRACE_COLUMNS)?;
    for r in &trace.records {
        let a = &r.action;
        let mut row = vec![r.step.to_string(), r.source.as_str().to_string()];
        row.extend(a.continuous().iter().map(|&v| format_sig9(v)));
        row.push(a.gripper.to_string());
        row.push(format_sig9(r.speed));
        row.push(r.tokens_total.to_string());
        row.push(r.tokens_kept.to_string());
        row.push(format_sig9(r.retain_ratio));
        row.push(format_sig9(r.cost));
        row.push(format_sig9(r.cum_cost));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: std::str::FromStr>(
    rec: &StringRecord,
    i: usize,
    line: u64,
    names: &[&str],
) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| Error::format(format!("line {line}: bad {} value {raw:?}", names[i])))
}

fn check_header(rec: &StringRecord, expected: &[&str], what: &str) -> Result<()> {
    let got: Vec<&str> = rec.iter().map(str::trim).collect();
    if got != expected {
        return Err(Error::format(format!(
            "{what}: expected header {}, got {}",
            expected.join(","),
            got.join(",")
        )));
    }
    Ok(())
}

/// Reads the step records of one trace. Each cost is recomputed from the
/// source and token counts and must agree with the stored column.
pub fn read_trace<R: Read>(source: R, cm: &CostModel) -> Result<Vec<StepRecord>> {
    let mut rdr = ReaderBuilder::new().has_headers(true).from_reader(source);
    check_header(rdr.headers()?, &TRACE_COLUMNS, "trace")?;
    let mut records: Vec<StepRecord> = Vec::new();
    let mut cum_cost = 0.0;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != TRACE_COLUMNS.len() {
            return Err(Error::format(format!("line {line}: expected 15 fields")));
        }
        let f = |i| field::<f64>(&rec, i, line, &TRACE_COLUMNS);
        let step: usize = field(&rec, 0, line, &TRACE_COLUMNS)?;
        let src = Source::parse(rec[1].trim())
            .ok_or_else(|| Error::format(format!("line {line}: unknown source {:?}", &rec[1])))?;
        let gripper: u8 = field(&rec, 8, line, &TRACE_COLUMNS)?;
        let action = Action::new([f(2)?, f(3)?, f(4)?], [f(5)?, f(6)?, f(7)?], gripper, src)
            .map_err(|e| Error::format(format!("line {line}: {e}")))?;
        let tokens_total: usize = field(&rec, 10, line, &TRACE_COLUMNS)?;
        let tokens_kept: usize = field(&rec, 11, line, &TRACE_COLUMNS)?;
        if tokens_kept > tokens_total {
            return Err(Error::format(format!(
                "line {line}: tokens_kept exceeds tokens_total"
            )));
        }
        if records.last().is_some_and(|p| p.step >= step) {
            return Err(Error::format(format!("line {line}: steps must increase")));
        }
        let cost = cost_of_step(src, tokens_kept, tokens_total, cm);
        if !close_at_sig9(cost, f(13)?) {
            return Err(Error::format(format!(
                "line {line}: cost column {} disagrees with the cost model ({cost})",
                &rec[13]
            )));
        }
        cum_cost += cost;
        if !close_at_sig9(cum_cost, f(14)?) {
            return Err(Error::format(format!(
                "line {line}: cum_cost is not the prefix sum of cost"
            )));
        }
        records.push(StepRecord {
            step,
            source: src,
            action,
            speed: f(9)?,
            tokens_total,
            tokens_kept,
            retain_ratio: f(12)?,
            cost,
            cum_cost,
        });
    }
    Ok(records)
}

/// Terminal flags of one persisted episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeIndexRow {
    pub seed: u64,
    pub success: bool,
    pub steps_used: usize,
    pub final_error: f64,
}

pub fn write_episode_index<W: Write>(traces: &[EpisodeTrace], sink: W) -> Result<()> {
    let mut w = Writer::from_writer(sink);
    w.write_record(INDEX_COLUMNS)?;
    for t in traces {
        w.write_record([
            t.seed.to_string(),
            u8::from(t.success).to_string(),
            t.steps_used.to_string(),
            format_sig9(t.final_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_episode_index<R: Read>(source: R) -> Result<Vec<EpisodeIndexRow>> {
    let mut rdr = ReaderBuilder::new().from_reader(source);
    check_header(rdr.headers()?, &INDEX_COLUMNS, "episode index")?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let success: u8 = field(&rec, 1, line, &INDEX_COLUMNS)?;
        if success > 1 {
            return Err(Error::format(format!(
                "line {line}: success must be 0 or 1"
            )));
        }
        rows.push(EpisodeIndexRow {
            seed: field(&rec, 0, line, &INDEX_COLUMNS)?,
            success: success == 1,
            steps_used: field(&rec, 2, line, &INDEX_COLUMNS)?,
            final_error: field(&rec, 3, line, &INDEX_COLUMNS)?,
        });
    }
    Ok(rows)
}

pub fn trace_path(dir: &Path, seed: u64) -> PathBuf {
    dir.join(format!("trace_{seed}.csv"))
}

/// Writes every trace and the episode index into `dir`, creating it.
pub fn write_run(dir: &Path, traces: &[EpisodeTrace]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for t in traces {
        write_trace(t, BufWriter::new(File::create(trace_path(dir, t.seed))?))?;
    }
    write_episode_index(
        traces,
        BufWriter::new(File::create(dir.join("episodes.csv"))?),
    )
}

/// Loads a run written by [`write_run`]. Routing decisions and rejections
/// are not persisted and come back empty.
pub fn read_run(dir: &Path, cm: &CostModel) -> Result<Vec<EpisodeTrace>> {
    let index = read_episode_index(File::open(dir.join("episodes.csv"))?)?;
    index
        .into_iter()
        .map(|row| {
            let records = read_trace(File::open(trace_path(dir, row.seed))?, cm)?;
            if records.len() != row.steps_used {
                return Err(Error::format(format!(
                    "trace {} has {} rows but the index says {}",
                    row.seed,
                    records.len(),
                    row.steps_used
                )));
            }
            Ok(EpisodeTrace {
                seed: row.seed,
                records,
                success: row.success,
                steps_used: row.steps_used,
                final_error: row.final_error,
                decisions: Vec::new(),
                rejections: Vec::new(),
            })
        })
        .collect()
}

/// Square attention-weight matrix, one row per line, no header.
pub fn read_attention_csv<R: Read>(source: R) -> Result<DMatrix<f64>> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::format(format!("attention line {line}: bad value {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::format("attention csv is empty"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::format(format!(
            "attention matrix must be {n}x{n}; row {} has {} columns",
            i + 1,
            rows[i].len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
}

/// Action buffer from a CSV with header `ax,ay,az,rx,ry,rz,gripper`, oldest
/// row first. The buffer capacity equals the row count.
pub fn read_buffer_csv<R: Read>(source: R) -> Result<ActionBuffer> {
    let mut rdr = ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    check_header(rdr.headers()?, &BUFFER_COLUMNS, "buffer")?;
    let mut actions = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let f = |i| field::<f64>(&rec, i, line, &BUFFER_COLUMNS);
        let gripper: u8 = field(&rec, 6, line, &BUFFER_COLUMNS)?;
        let a = Action::new(
            [f(0)?, f(1)?, f(2)?],
            [f(3)?, f(4)?, f(5)?],
            gripper,
            Source::Vla,
        )
        .map_err(|e| Error::format(format!("buffer line {line}: {e}")))?;
        actions.push(a);
    }
    if actions.is_empty() {
        return Err(Error::format("buffer csv has no rows"));
    }
    let mut buf = ActionBuffer::new(actions.len())?;
    actions.into_iter().for_each(|a| buf.push(a));
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RunConfig;
    use crate::sim::{compute_metrics, run_episode};

    #[test]
    fn sig9_matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.7, "0.7"),
            (-0.25, "-0.25"),
            (1.0 / 3.0, "0.333333333"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e9"),
            (0.000123456789123, "0.000123456789"),
            (0.0000123456789123, "1.23456789e-5"),
            (999999999.5, "1e9"),
            (0.001, "0.001"),
        ];
        for (x, s) in cases {
            assert_eq!(format_sig9(x), s, "{x}");
        }
    }

    #[test]
    fn sig9_keeps_nine_digits() {
        for x in [
            0.1 + 0.2,
            std::f64::consts::PI,
            12.345678901,
            -7.77e-7,
            6.02e23,
        ] {
            let y: f64 = format_sig9(x).parse().unwrap();
            assert!(close_at_sig9(x, y), "{x} vs {y}");
        }
    }

    fn one_step_trace() -> EpisodeTrace {
        let t = run_episode(&RunConfig::default(), 1).unwrap();
        EpisodeTrace {
            records: t.records[..1].to_vec(),
            steps_used: 1,
            ..t
        }
    }

    #[test]
    fn one_step_trace_has_two_lines() {
        let mut out = Vec::new();
        write_trace(&one_step_trace(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert_eq!(text.lines().next().unwrap(), TRACE_COLUMNS.join(","));
    }

    #[test]
    fn metrics_survive_the_round_trip() {
        let cfg = RunConfig::default();
        let traces: Vec<_> = (0..4).map(|s| run_episode(&cfg, s).unwrap()).collect();
        let dir = tempfile::tempdir().unwrap();
        write_run(dir.path(), &traces).unwrap();
        let back = read_run(dir.path(), &cfg.cost).unwrap();
        assert_eq!(
            compute_metrics(&traces, cfg.cost.c_full).unwrap(),
            compute_metrics(&back, cfg.cost.c_full).unwrap()
        );
    }

    #[test]
    fn tampered_cost_is_rejected() {
        let mut out = Vec::new();
        write_trace(&one_step_trace(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        let mut fields: Vec<&str> = lines[1].split(',').collect();
        fields[13] = "0.5";
        lines[1] = fields.join(",");
        let bad = lines.join("\n");
        assert!(matches!(
            read_trace(bad.as_bytes(), &CostModel::default()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn buffer_csv() {
        let text = "ax,ay,az,rx,ry,rz,gripper\n0.1,0,0,0,0,0,1\n0.2,0,0,0,0,0,1\n";
        let buf = read_buffer_csv(text.as_bytes()).unwrap();
        assert_eq!(buf.len(), 2);
        assert!(buf.is_full());
        assert_eq!(buf.last().unwrap().trans[0], 0.2);
        assert!(read_buffer_csv("ax,ay\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn attention_csv_must_be_square() {
        let m = read_attention_csv("0.5,0.5\n0.25,0.75\n".as_bytes()).unwrap();
        assert_eq!(m[(1, 1)], 0.75);
        assert!(read_attention_csv("0.5,0.5\n1\n".as_bytes()).is_err());
    }
}
