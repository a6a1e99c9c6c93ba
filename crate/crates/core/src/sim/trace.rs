use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::domain::UnitKind;

use super::SimReport;

/// One executed task instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub pipeline: String,
    pub run: u32,
    pub task_index: usize,
    pub kind: String,
    pub device: String,
    pub unit: UnitKind,
    pub ready_ns: u64,
    pub start_ns: u64,
    pub end_ns: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("trace violation at {pipeline} run {run} task {task_index}: {reason}")]
pub struct TraceViolation {
    pub pipeline: String,
    pub run: u32,
    pub task_index: usize,
    pub reason: String,
}

impl TraceViolation {
    fn at(record: &TraceRecord, reason: impl Into<String>) -> Self {
        TraceViolation {
            pipeline: record.pipeline.clone(),
            run: record.run,
            task_index: record.task_index,
            reason: reason.into(),
        }
    }
}

pub fn write_trace_jsonl<W: Write>(records: &[TraceRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl<R: BufRead>(input: R) -> io::Result<Vec<TraceRecord>> {
    let mut records = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

/// Checks exclusivity, precedence, link pairing and FIFO order of a trace.
pub fn validate_trace(report: &SimReport) -> Result<(), TraceViolation> {
    let records = report.trace.as_deref().ok_or_else(|| TraceViolation {
        pipeline: String::new(),
        run: 0,
        task_index: 0,
        reason: "trace recording was not enabled".to_string(),
    })?;
    check_records(records)
}

pub fn check_records(records: &[TraceRecord]) -> Result<(), TraceViolation> {
    for r in records {
        if r.end_ns < r.start_ns || r.start_ns < r.ready_ns {
            return Err(TraceViolation::at(
                r,
                "instance ends before it starts or starts before it is ready",
            ));
        }
    }

    let mut per_unit: BTreeMap<(&str, UnitKind), Vec<&TraceRecord>> = BTreeMap::new();
    for r in records {
        per_unit.entry((&r.device, r.unit)).or_default().push(r);
    }
    for list in per_unit.values_mut() {
        list.sort_by_key(|r| (r.start_ns, r.end_ns));
        for pair in list.windows(2) {
            if pair[1].start_ns < pair[0].end_ns {
                return Err(TraceViolation::at(
                    pair[1],
                    "overlaps another instance on the same unit",
                ));
            }
        }
        // FIFO: a strictly earlier ready time never starts later.
        let mut by_ready = list.clone();
        by_ready.sort_by_key(|r| (r.ready_ns, r.start_ns));
        let mut max_start_before = None::<u64>;
        let mut group_max = 0u64;
        let mut group_ready = None::<u64>;
        for r in by_ready {
            if group_ready != Some(r.ready_ns) {
                if group_ready.is_some() {
                    max_start_before =
                        Some(max_start_before.map_or(group_max, |m| m.max(group_max)));
                }
                group_ready = Some(r.ready_ns);
                group_max = 0;
            }
            if max_start_before.is_some_and(|m| r.start_ns < m) {
                return Err(TraceViolation::at(
                    r,
                    "overtook an instance that was ready earlier",
                ));
            }
            group_max = group_max.max(r.start_ns);
        }
    }

    let mut chains: BTreeMap<(&str, u32), Vec<&TraceRecord>> = BTreeMap::new();
    for r in records {
        chains.entry((&r.pipeline, r.run)).or_default().push(r);
    }
    for chain in chains.values_mut() {
        chain.sort_by_key(|r| r.task_index);
        for (i, r) in chain.iter().enumerate() {
            if r.task_index != i {
                return Err(TraceViolation::at(r, "missing task instance in chain"));
            }
            if r.kind == "rx" {
                let tx = i.checked_sub(1).map(|j| chain[j]);
                match tx {
                    Some(tx) if tx.kind == "tx" => {
                        if tx.start_ns != r.start_ns || tx.end_ns != r.end_ns {
                            return Err(TraceViolation::at(
                                r,
                                "rx does not share its tx's link occupation",
                            ));
                        }
                    }
                    _ => return Err(TraceViolation::at(r, "rx without preceding tx")),
                }
                continue;
            }
            if i > 0 {
                let pred = chain[i - 1];
                if r.start_ns < pred.end_ns {
                    return Err(TraceViolation::at(
                        r,
                        "starts before its predecessor finished",
                    ));
                }
            }
        }
    }
    Ok(())
}
