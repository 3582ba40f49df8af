use serde::{Deserialize, Serialize};

use super::GenerationStats;
use crate::error::{Error, Result};

const HEADER: &str = "# generation evaluations best_fitness";

/// One line of a convergence log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub generation: usize,
    pub evaluations: usize,
    pub best_fitness: f64,
}

impl From<&HistoryRecord> for HistoryRecord {
    fn from(r: &HistoryRecord) -> Self {
        *r
    }
}

impl From<&GenerationStats> for HistoryRecord {
    fn from(s: &GenerationStats) -> Self {
        Self {
            generation: s.generation,
            evaluations: s.evaluations,
            best_fitness: s.best_fitness,
        }
    }
}

/// Line-oriented convergence log: a comment header, then one
/// `generation evaluations best_fitness` line per generation. Fitness is
/// printed in shortest round-trip form so parsing is exact.
pub fn write_history<'a, T>(history: impl IntoIterator<Item = &'a T>) -> String
where
    T: 'a,
    HistoryRecord: From<&'a T>,
{
    let mut out = String::from(HEADER);
    out.push('\n');
    for s in history {
        let r = HistoryRecord::from(s);
        out.push_str(&format!("{} {} {}\n", r.generation, r.evaluations, r.best_fitness));
    }
    out
}

pub fn parse_history(text: &str) -> Result<Vec<HistoryRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(n, line)| {
            let bad = || Error::data(format!("history line {}: cannot parse {line:?}", n + 1));
            let mut parts = line.split_whitespace();
            let generation = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let evaluations = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            let best_fitness = parts.next().and_then(|v| v.parse().ok()).ok_or_else(bad)?;
            if parts.next().is_some() {
                return Err(bad());
            }
            Ok(HistoryRecord {
                generation,
                evaluations,
                best_fitness,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        let history: Vec<GenerationStats> = [(0, 5, 0.1 + 0.2), (1, 35, -93.91), (2, 65, 1e-300)]
            .into_iter()
            .map(|(generation, evaluations, best_fitness)| GenerationStats {
                generation,
                best_fitness,
                evaluations,
                spark_counts: vec![],
                firework_fitness: vec![],
                archive_fitness: vec![],
            })
            .collect();
        let text = write_history(&history);
        assert!(text.starts_with(HEADER));
        let parsed = parse_history(&text).unwrap();
        let expected: Vec<HistoryRecord> = history.iter().map(HistoryRecord::from).collect();
        assert_eq!(parsed, expected);
        assert_eq!(write_history(&parsed), text);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_history("0 5\n").is_err());
        assert!(parse_history("0 5 x\n").is_err());
        assert!(parse_history("0 5 1.0 extra\n").is_err());
    }
}
