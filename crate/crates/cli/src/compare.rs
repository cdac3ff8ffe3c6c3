use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gpim::vtol::RegulatorChoice;

use crate::config::{ConfigError, ExperimentConfig};
use crate::export::{export_arc, fmt_f64};
use crate::run::{run_experiment, RunError, RunSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub gp: RunSummary,
    pub baseline: RunSummary,
    /// `tail_sup_e(gp) / tail_sup_e(baseline)`.
    pub ratio: f64,
}

/// Rejects pairs that differ in anything the comparison holds fixed.
pub fn check_pair(gp: &ExperimentConfig, baseline: &ExperimentConfig) -> Result<(), ConfigError> {
    let mismatch = |key: &str| {
        Err(ConfigError::Invalid {
            key: key.to_string(),
            msg: "differs between the compared runs".into(),
        })
    };
    if gp.regulator != RegulatorChoice::Gp || baseline.regulator != RegulatorChoice::Baseline {
        return mismatch("experiment.regulator");
    }
    if gp.exosystem != baseline.exosystem {
        return mismatch("experiment.exosystem");
    }
    if gp.preset != baseline.preset {
        return mismatch("experiment.preset");
    }
    if gp.sim.t_end != baseline.sim.t_end {
        return mismatch("hybrid_engine.t_end");
    }
    if gp.tail_fraction != baseline.tail_fraction {
        return mismatch("experiment.tail_fraction");
    }
    if gp.initial != baseline.initial {
        return mismatch("experiment initial state");
    }
    if gp.vtol != baseline.vtol {
        return mismatch("vtol_testbed");
    }
    if gp.reg != baseline.reg {
        return mismatch("regulator_core");
    }
    Ok(())
}

/// The GP and baseline variants of one configuration.
pub fn pair_from(cfg: &ExperimentConfig) -> (ExperimentConfig, ExperimentConfig) {
    let mut gp = cfg.clone();
    gp.regulator = RegulatorChoice::Gp;
    let mut base = cfg.clone();
    base.regulator = RegulatorChoice::Baseline;
    (gp, base)
}

/// Runs both loops. When `out` is given, each run is exported to its own
/// subdirectory next to a report and an overlay plot script.
pub fn compare(
    gp_cfg: &ExperimentConfig,
    base_cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<Comparison, RunError> {
    check_pair(gp_cfg, base_cfg)?;
    if !base_cfg.baseline.enabled {
        return Err(ConfigError::Invalid {
            key: "baseline.enabled".into(),
            msg: "the baseline is disabled".into(),
        }
        .into());
    }
    let gp = run_experiment(gp_cfg)?;
    let base = run_experiment(base_cfg)?;
    let ratio = gp.summary.tail_sup_e / base.summary.tail_sup_e;
    let cmp = Comparison {
        gp: gp.summary.clone(),
        baseline: base.summary.clone(),
        ratio,
    };
    if let Some(dir) = out {
        export_arc(&gp.arc, gp.layout, &gp.summary, &dir.join("gp"))?;
        export_arc(&base.arc, base.layout, &base.summary, &dir.join("baseline"))?;
        fs::write(dir.join("comparison.txt"), report(&cmp))?;
        fs::write(dir.join("overlay.gp"), gnuplot_script())?;
    }
    Ok(cmp)
}

pub fn report(c: &Comparison) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "exosystem = {}", c.gp.exosystem);
    let _ = writeln!(s, "t_end = {}", fmt_f64(c.gp.t_end));
    let _ = writeln!(s, "tail_fraction = {}", fmt_f64(c.gp.tail_fraction));
    let _ = writeln!(s, "tail_sup_e_gp = {}", fmt_f64(c.gp.tail_sup_e));
    let _ = writeln!(s, "tail_sup_e_baseline = {}", fmt_f64(c.baseline.tail_sup_e));
    let _ = writeln!(s, "ratio = {}", fmt_f64(c.ratio));
    let _ = writeln!(s, "jump_count_gp = {}", c.gp.jump_count);
    s
}

/// Overlays the regulation errors of `gp/trace.csv` and `baseline/trace.csv`.
pub fn gnuplot_script() -> String {
    "set datafile separator ','\n\
     set key autotitle columnhead\n\
     set xlabel 't [s]'\n\
     set ylabel 'e'\n\
     set grid\n\
     plot 'gp/trace.csv' using 1:3 with lines title 'e (GP)', \\\n\
     \x20    'baseline/trace.csv' using 1:3 with lines title 'e (baseline)'\n"
        .to_string()
}
