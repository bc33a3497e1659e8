use crate::error::{Result, SimError};

use super::ProbeSeries;

/// `tick,<name>...` header then one LF-terminated row per tick. Numbers use
/// Rust's shortest round-trip formatting (`3`, `0.1`, `NaN`).
pub fn export_csv(series: &[ProbeSeries]) -> Result<String> {
    let first = series
        .first()
        .ok_or_else(|| SimError::Invalid("no probe series to export".into()))?;
    let ticks: Vec<u64> = first.samples.iter().map(|s| s.0).collect();
    for s in series {
        if s.samples.len() != ticks.len() || s.samples.iter().zip(&ticks).any(|(a, t)| a.0 != *t) {
            return Err(SimError::Invalid(format!(
                "probe series `{}` does not cover the same ticks as `{}`",
                s.name, first.name
            )));
        }
    }
    let mut out = String::from("tick");
    for s in series {
        out.push(',');
        out.push_str(&s.name);
    }
    out.push('\n');
    for (row, tick) in ticks.iter().enumerate() {
        out.push_str(&tick.to_string());
        for s in series {
            out.push(',');
            out.push_str(&s.samples[row].1.to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_csv(text: &str) -> Result<Vec<ProbeSeries>> {
    let bad = |m: String| SimError::Invalid(format!("probe csv: {m}"));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
    let mut cols = header.split(',');
    if cols.next() != Some("tick") {
        return Err(bad("first column must be `tick`".into()));
    }
    let mut series: Vec<ProbeSeries> = cols
        .map(|n| ProbeSeries {
            name: n.to_owned(),
            samples: Vec::new(),
        })
        .collect();
    for (ln, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != series.len() + 1 {
            return Err(bad(format!("row {} has {} fields", ln + 1, fields.len())));
        }
        let tick: u64 = fields[0].parse().map_err(|_| bad(format!("bad tick `{}`", fields[0])))?;
        for (s, f) in series.iter_mut().zip(&fields[1..]) {
            let v: f64 = f.parse().map_err(|_| bad(format!("bad value `{f}`")))?;
            s.samples.push((tick, v));
        }
    }
    Ok(series)
}
