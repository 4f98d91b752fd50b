use std::io::Write;
use std::path::Path;

use super::{EvalReport, HarnessError};
use crate::formats::FormatError;

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, HarnessError> {
    csv::Writer::from_path(path).map_err(csv_error(path))
}

fn finish<W: Write>(mut w: csv::Writer<W>, path: &Path) -> Result<(), HarnessError> {
    w.flush().map_err(|source| {
        HarnessError::Format(FormatError::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

/// `step,q25,q50,q75,n_episodes`, one row per evaluation round.
pub fn write_results(path: &Path, reports: &[EvalReport]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    let err = csv_error(path);
    w.write_record(["step", "q25", "q50", "q75", "n_episodes"]).map_err(&err)?;
    for r in reports {
        w.write_record([
            r.step.to_string(),
            r.q25.to_string(),
            r.q50.to_string(),
            r.q75.to_string(),
            r.n_episodes.to_string(),
        ])
        .map_err(&err)?;
    }
    finish(w, path)
}

/// `step,seed,episode,true_return,scaled_return`, one row per evaluation
/// episode.
pub fn write_returns(path: &Path, seeds: &[u64], reports: &[EvalReport]) -> Result<(), HarnessError> {
    let mut w = writer(path)?;
    let err = csv_error(path);
    w.write_record(["step", "seed", "episode", "true_return", "scaled_return"])
        .map_err(&err)?;
    for r in reports {
        for ((seed, raw), scaled) in seeds.iter().zip(&r.per_seed).zip(&r.scaled) {
            for (episode, (t, s)) in raw.iter().zip(scaled).enumerate() {
                w.write_record([
                    r.step.to_string(),
                    seed.to_string(),
                    episode.to_string(),
                    t.to_string(),
                    s.to_string(),
                ])
                .map_err(&err)?;
            }
        }
    }
    finish(w, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Baselines;

    #[test]
    fn writes_both_tables() {
        let dir = tempfile::tempdir().unwrap();
        let b = Baselines {
            random: 0.0,
            expert: 1.0,
        };
        let reports = vec![
            EvalReport::from_points(10, vec![vec![0.0, 1.0], vec![1.0, 1.0]], b).unwrap(),
            EvalReport::from_points(20, vec![vec![1.0, 1.0], vec![1.0, 1.0]], b).unwrap(),
        ];
        let results = dir.path().join("results.csv");
        let returns = dir.path().join("returns.csv");
        write_results(&results, &reports).unwrap();
        write_returns(&returns, &[4, 9], &reports).unwrap();
        let text = std::fs::read_to_string(&results).unwrap();
        assert_eq!(text, "step,q25,q50,q75,n_episodes\n10,0.75,1,1,4\n20,1,1,1,4\n");
        let text = std::fs::read_to_string(&returns).unwrap();
        assert_eq!(text.lines().count(), 9);
        assert_eq!(text.lines().nth(1), Some("10,4,0,0,0"));
        assert_eq!(text.lines().nth(3), Some("10,9,0,1,1"));
    }
}
