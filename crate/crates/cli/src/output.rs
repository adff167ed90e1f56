// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use prutf::sim::ExperimentReport;
use prutf::{DetectionF64, EventKind};
use serde::Serialize;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}

pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

#[derive(Serialize)]
struct EventRecord {
    lambda: f64,
    kind: &'static str,
    /// 1-based dual coordinate.
    coordinate: usize,
    /// Primal change point the coordinate maps to.
    location: usize,
    sign: i8,
}

#[derive(Serialize)]
pub struct DetectReport<'a> {
    pub method: &'a str,
    pub order: usize,
    pub alpha: f64,
    pub n: usize,
    pub change_points: &'a [usize],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub change_labels: Option<Vec<String>>,
    pub signs: &'a [i8],
    pub lambda_stop: f64,
    pub sigma: f64,
    pub sigma_source: &'a str,
    pub stop_reason: &'a str,
    pub zeroed: &'a [usize],
    pub fitted: &'a [f64],
    events: Vec<EventRecord>,
}

impl<'a> DetectReport<'a> {
    pub fn new(res: &'a DetectionF64, r: usize, meta: (&'a str, f64, &'a str), labels: Option<&[String]>) -> Self {
        let r_a = (r + 1) / 2;
        let events = res
            .events
            .iter()
            .map(|e| EventRecord {
                lambda: e.lambda,
                kind: match e.kind {
                    EventKind::Join => "join",
                    EventKind::Leave => "leave",
                    EventKind::ZeroSign => "zero_sign",
                },
                coordinate: e.tau + 1,
                location: e.tau + r_a + 1,
                sign: e.sign,
            })
            .collect();
        Self {
            method: meta.0,
            order: r,
            alpha: meta.1,
            n: res.fitted.len(),
            change_points: &res.change_points,
            change_labels: labels.map(|l| res.change_points.iter().map(|&c| l[c - 1].clone()).collect()),
            signs: &res.signs,
            lambda_stop: res.lambda_stop,
            sigma: res.sigma,
            sigma_source: meta.2,
            stop_reason: match res.stop_reason {
                prutf::StopReason::Threshold => "threshold",
                prutf::StopReason::PathEnd => "path_end",
            },
            zeroed: &res.zeroed,
            fitted: &res.fitted,
            events,
        }
    }
}

/// Plot-ready per-observation table.
pub fn write_detect_csv(out: &mut dyn Write, y: &[f64], res: &DetectionF64) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "y", "fitted", "change"])?;
    let mut next = res.change_points.iter().peekable();
    for (i, (&yi, &fi)) in y.iter().zip(&res.fitted).enumerate() {
        let t = i + 1;
        let change = next.next_if_eq(&&t).is_some();
        w.write_record([t.to_string(), fmt17(yi), fmt17(fi), u8::from(change).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub const SIMULATE_HEADER: [&str; 5] = ["sigma", "mean_ncpts", "mean_mse", "mean_hausdorff", "mean_runtime_s"];

pub fn write_aggregate_csv(out: &mut dyn Write, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SIMULATE_HEADER)?;
    for row in &report.rows {
        w.write_record([row.sigma, row.mean_ncpts, row.mean_mse, row.mean_hausdorff, row.mean_runtime_s].map(fmt17))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_detail_csv(out: &mut dyn Write, report: &ExperimentReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma", "replicate", "detected_count", "mse", "hausdorff", "runtime_s", "change_points"])?;
    for run in &report.runs {
        let cps: Vec<String> = run.change_points.iter().map(usize::to_string).collect();
        w.write_record([
            fmt17(run.sigma),
            run.replicate.to_string(),
            run.detected_count.to_string(),
            fmt17(run.mse),
            fmt17(run.hausdorff),
            fmt17(run.runtime_seconds),
            cps.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::fmt17;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
    }
}
