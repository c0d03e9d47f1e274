//! CSV and text writers. Floats use Rust's shortest round-trip formatting,
//! so a fixed seed always produces the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use d2d_rica_core::auction::PriceEvent;
use d2d_rica_core::baselines::Algorithm;

use crate::experiment::SweepResult;

pub const RESULTS_HEADER: [&str; 10] = [
    "sweep_variable",
    "value",
    "algorithm",
    "mean_sum_rate",
    "std_sum_rate",
    "mean_eta",
    "mean_E",
    "mean_rounds",
    "drops",
    "master_seed",
];

pub const TRACE_HEADER: [&str; 6] = [
    "drop_seed",
    "event_index",
    "round_t",
    "item",
    "price",
    "phase",
];

/// One row per (sweep point, algorithm). `mean_rounds` is empty for
/// algorithms that are not auctions.
pub fn write_results_csv<W: Write>(result: &SweepResult, out: W) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for point in &result.points {
        for a in &point.algorithms {
            w.write_record([
                point.variable.as_str().to_owned(),
                point.value.to_string(),
                a.algorithm.as_str().to_owned(),
                a.sum_rate.mean.to_string(),
                a.sum_rate.std.to_string(),
                a.eta.mean.to_string(),
                a.efficiency.mean.to_string(),
                a.mean_rounds.map(|r| r.to_string()).unwrap_or_default(),
                a.drops.to_string(),
                result.spec.master_seed.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Price events of the full auction for every drop that kept its trace.
pub fn write_trace_csv<W: Write>(result: &SweepResult, out: W) -> anyhow::Result<()> {
    let traces = result
        .drops
        .iter()
        .flatten()
        .filter_map(|d| d.rica_trace.as_deref().map(|t| (d.seed, t)));
    write_price_events(traces, out)
}

/// Writes `(drop seed, events)` groups as price-trace rows.
pub fn write_price_events<'a, W: Write>(
    traces: impl IntoIterator<Item = (u64, &'a [PriceEvent])>,
    out: W,
) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for (seed, trace) in traces {
        for e in trace {
            w.write_record([
                seed.to_string(),
                e.index.to_string(),
                e.round.to_string(),
                e.item.to_string(),
                e.price.to_string(),
                e.phase.as_str().to_owned(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn summary_text(result: &SweepResult) -> String {
    let spec = &result.spec;
    let mut s = String::new();
    let other = match spec.variable {
        crate::experiment::SweepVariable::NumD2dPairs => "resource units",
        crate::experiment::SweepVariable::NumResourceUnits => "D2D pairs",
    };
    let _ = writeln!(
        s,
        "sweep {} over {:?}, {} {other}, {} drops per point, master seed {}",
        spec.variable, spec.values, spec.fixed_other, spec.drops, spec.master_seed
    );
    for p in &result.points {
        let _ = writeln!(
            s,
            "\n{} = {} (C = {}, D = {})",
            p.variable, p.value, p.num_cellular, p.num_pairs
        );
        let _ = writeln!(
            s,
            "  {:<13} {:>12} {:>10} {:>8} {:>8} {:>8}",
            "algorithm", "sum rate", "std err", "eta", "E", "rounds"
        );
        for a in &p.algorithms {
            let rounds = a
                .mean_rounds
                .map(|r| format!("{r:.1}"))
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "  {:<13} {:>12.4} {:>10.4} {:>8.4} {:>8.4} {:>8}",
                a.algorithm.as_str(),
                a.sum_rate.mean,
                a.sum_rate.std_err,
                a.eta.mean,
                a.efficiency.mean,
                rounds
            );
        }
        if !p.violations.is_empty() {
            let _ = writeln!(s, "  {} invariant violations", p.violations.len());
            for v in &p.violations {
                let _ = writeln!(s, "    {v}");
            }
        }
    }
    let rica_vs_opt: Vec<String> = result
        .points
        .iter()
        .map(|p| {
            let eta = p
                .algorithms
                .iter()
                .find(|a| a.algorithm == Algorithm::Rica)
                .map(|a| a.eta.mean);
            format!("{}:{:.4}", p.value, eta.unwrap_or(f64::NAN))
        })
        .collect();
    let _ = writeln!(s, "\nrica eta by point: {}", rica_vs_opt.join(" "));
    let _ = writeln!(
        s,
        "total invariant violations: {}",
        result.violation_count()
    );
    s
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub results: PathBuf,
    pub trace: Option<PathBuf>,
    pub summary: PathBuf,
}

pub fn write_outputs(result: &SweepResult, dir: &Path, trace: bool) -> anyhow::Result<OutputPaths> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let results = dir.join("results.csv");
    write_results_csv(
        result,
        fs::File::create(&results).with_context(|| format!("creating {}", results.display()))?,
    )?;
    let trace = if trace {
        let path = dir.join("price_trace.csv");
        write_trace_csv(
            result,
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        )?;
        Some(path)
    } else {
        None
    };
    let summary = dir.join("summary.txt");
    fs::write(&summary, summary_text(result))
        .with_context(|| format!("writing {}", summary.display()))?;
    Ok(OutputPaths {
        results,
        trace,
        summary,
    })
}
