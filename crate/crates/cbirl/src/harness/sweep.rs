use std::path::Path;

use rayon::prelude::*;

use super::{run_cbirl, ExperimentResult, HarnessError, Prepared};
use crate::config::{ExperimentConfig, SweepVariant};

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub variant: SweepVariant,
    pub result: ExperimentResult,
}

impl SweepOutcome {
    pub fn final_median(&self) -> f64 {
        self.result.final_report().map_or(f64::NEG_INFINITY, |r| r.q50)
    }
}

/// Runs every sweep variant on one shared case base. Returns the outcomes
/// in variant order and the index of the best final median (first wins on
/// ties).
pub fn run_sweep(cfg: &ExperimentConfig, prepared: &Prepared) -> Result<(Vec<SweepOutcome>, usize), HarnessError> {
    let outcomes = cfg
        .sweep_variants()
        .into_par_iter()
        .map(|variant| {
            let result = run_cbirl(&cfg.apply(&variant)?, prepared)?;
            Ok(SweepOutcome { variant, result })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.final_median() > outcomes[best].final_median() {
            best = i;
        }
    }
    Ok((outcomes, best))
}

/// `variant,step,q25,q50,q75,n_episodes`.
pub fn write_sweep(path: &Path, outcomes: &[SweepOutcome]) -> Result<(), HarnessError> {
    let err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(["variant", "step", "q25", "q50", "q75", "n_episodes"])
        .map_err(err)?;
    for o in outcomes {
        for r in &o.result.reports {
            w.write_record([
                o.variant.name.clone(),
                r.step.to_string(),
                r.q25.to_string(),
                r.q50.to_string(),
                r.q75.to_string(),
                r.n_episodes.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| err(e.into()))
}
