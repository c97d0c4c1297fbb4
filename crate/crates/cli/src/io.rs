//! File and argument parsing for the command line.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use eulerian_shape::{parse_landmark_file, CorrelationSample, LandmarkConfiguration};

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn read_landmarks(path: &Path) -> Result<Vec<LandmarkConfiguration>, CliError> {
    parse_landmark_file(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// One sample per line, `K` whitespace-separated roots; `#` comments and
/// blank lines are ignored.
pub fn parse_samples(text: &str, origin: &str) -> Result<Vec<CorrelationSample>, CliError> {
    let mut out = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let at = |msg: String| CliError::Input(format!("{origin}: line {}: {msg}", i + 1));
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| at(format!("'{t}' is not a number"))))
            .collect::<Result<Vec<_>, _>>()?;
        if *width.get_or_insert(values.len()) != values.len() {
            return Err(at(format!(
                "expected {} values, found {}",
                width.unwrap_or(0),
                values.len()
            )));
        }
        out.push(CorrelationSample::new(values).map_err(|e| at(e.to_string()))?);
    }
    Ok(out)
}

pub fn write_samples(samples: &[CorrelationSample]) -> String {
    let mut out = String::new();
    for s in samples {
        let row: Vec<String> = s.values().iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(" ")).expect("writing to a String");
    }
    out
}

/// `"1-13;1-11;1-3,5"` into 0-based index lists.
pub fn parse_schedule(text: &str) -> Result<Vec<Vec<usize>>, CliError> {
    let bad = |msg: String| CliError::Input(format!("schedule: {msg}"));
    let mut schedule = Vec::new();
    for (s, subset) in text.split(';').enumerate() {
        let subset = subset.trim();
        if subset.is_empty() {
            return Err(bad(format!("subset {} is empty", s + 1)));
        }
        let mut indices = Vec::new();
        for item in subset.split(',') {
            let item = item.trim();
            let index = |t: &str| -> Result<usize, CliError> {
                match t.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(bad(format!("'{t}' is not a 1-based landmark index"))),
                }
            };
            match item.split_once('-') {
                Some((a, b)) => {
                    let (a, b) = (index(a)?, index(b)?);
                    if a > b {
                        return Err(bad(format!("range '{item}' is decreasing")));
                    }
                    indices.extend(a..=b);
                }
                None => indices.push(index(item)?),
            }
        }
        schedule.push(indices);
    }
    Ok(schedule)
}
