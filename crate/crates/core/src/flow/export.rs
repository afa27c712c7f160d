use serde::Serialize;

use super::state::TraceEvent;

#[derive(Serialize)]
struct Row {
    step: u64,
    rule: String,
    diam: String,
    block_index: u64,
    phase: String,
    level: u64,
}

/// CSV with columns `step,rule,diam,block_index,phase,level`.
pub fn trace_to_csv(events: &[TraceEvent]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in events {
        w.serialize(Row {
            step: e.step,
            rule: e.rule.to_string(),
            diam: e.diam_after.to_string(),
            block_index: e.block_index,
            phase: e.phase.to_string(),
            level: e.level,
        })?;
    }
    if events.is_empty() {
        w.write_record(["step", "rule", "diam", "block_index", "phase", "level"])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// JSON array with the same fields as the CSV export.
pub fn trace_to_json(events: &[TraceEvent]) -> serde_json::Value {
    serde_json::Value::Array(
        events
            .iter()
            .map(|e| {
                serde_json::json!({
                    "step": e.step,
                    "rule": e.rule,
                    "diam": e.diam_after,
                    "block_index": e.block_index,
                    "phase": e.phase,
                    "level": e.level,
                })
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::propagate;
    use crate::scale::{Exponent, PrimeParams, Schedule};

    #[test]
    fn csv_rows_match_trace() {
        let s = Schedule::new(PrimeParams::derive(2).unwrap(), "id".parse().unwrap());
        let run = propagate(&s, Exponent::ratio(-29, 15), 8).unwrap();
        let text = trace_to_csv(&run.trace.events).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "step,rule,diam,block_index,phase,level");
        assert_eq!(lines[1], "0,wild,-43/15,0,zero_block,5");
        assert_eq!(lines.last().unwrap(), &"7,affine,-239/120,0,one_block,0");
        let json = trace_to_json(&run.trace.events);
        assert_eq!(json[7]["diam"], "-239/120");
        assert_eq!(json[0]["phase"], "zero_block");
    }

    #[test]
    fn empty_trace_still_has_header() {
        assert_eq!(
            trace_to_csv(&[]).unwrap().trim(),
            "step,rule,diam,block_index,phase,level"
        );
    }
}
