//! Experiment configuration.
//!
//! Grammar (one item per line, `#` starts a comment):
//!
//! ```text
//! [section]
//! key = value
//! key = v1, v2, v3
//! ```
//!
//! Sections: `experiment`, `gp_identifier`, `regulator_core`, `baseline`,
//! `hybrid_engine`, `vtol_testbed`. `experiment.preset` selects the base
//! parameter set; every other key overrides it regardless of order.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use gpim::gp::KernelParams;
use gpim::hybrid::IntegratorConfig;
use gpim::linalg::Matrix;
use gpim::regulator::{
    check_sigma_condition, InternalModelParams, ObserverParams, StabilizerParams, StructureParams,
};
use gpim::vtol::{ExoVariant, LoopParams, RegulatorChoice, VtolParams};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("line {line}: unknown key {key}")]
    UnknownKey { line: usize, key: String },
    #[error("{key}: {msg}")]
    Value { key: String, msg: String },
    #[error("{key}: {msg}")]
    Invalid { key: String, msg: String },
}

impl ConfigError {
    fn value(key: &str, msg: impl Into<String>) -> Self {
        ConfigError::Value {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    fn invalid(key: &str, msg: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    /// The offending `section.key`, when known.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Value { key, .. } | ConfigError::Invalid { key, .. } | ConfigError::UnknownKey { key, .. } => {
                Some(key)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Regulator gains of the reference tables.
    Table2,
    /// Reduced gains that keep the closed loop tractable for an explicit integrator.
    Desk,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::Table2, Preset::Desk];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table2 => "table2",
            Preset::Desk => "desk",
        }
    }
}

impl FromStr for Preset {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "table2" => Ok(Preset::Table2),
            "desk" => Ok(Preset::Desk),
            _ => Err(format!("unknown preset '{s}' (expected table2 or desk)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSettings {
    pub n_ds: usize,
    pub lambda_eta: Vec<f64>,
    pub lambda_tau: f64,
    pub sigma_p2: f64,
    pub sigma_n2: f64,
    pub sigma_thr2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegulatorSettings {
    pub c: Vec<f64>,
    pub l: f64,
    pub delta: f64,
    /// Input gain ℒ of the testbed law.
    pub l_input: f64,
    pub h: Vec<f64>,
    pub g: f64,
    pub m1: f64,
    pub m2: f64,
    pub rho: f64,
    pub k_w: Vec<f64>,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSettings {
    pub enabled: bool,
    pub forgetting: f64,
    pub p0: f64,
    pub p_cap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub w0: [f64; 4],
    pub chi0: [f64; 3],
    pub zeta0: f64,
    /// Empty means zero.
    pub eta0: Vec<f64>,
    pub xi0: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub exosystem: ExoVariant,
    pub preset: Preset,
    pub regulator: RegulatorChoice,
    pub tail_fraction: f64,
    pub output_dir: PathBuf,
    pub initial: InitialState,
    pub gp: GpSettings,
    pub reg: RegulatorSettings,
    pub baseline: BaselineSettings,
    pub sim: IntegratorConfig<f64>,
    pub vtol: VtolParams<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_preset(Preset::Table2)
    }
}

impl ExperimentConfig {
    /// Base configuration of a preset. Both presets share the kernel and
    /// plant parameters of the reference tables.
    pub fn from_preset(preset: Preset) -> Self {
        let gp = GpSettings {
            n_ds: 100,
            lambda_eta: vec![0.1, 0.1],
            lambda_tau: 2.0,
            sigma_p2: 1.0,
            sigma_n2: 0.01,
            sigma_thr2: 0.1,
        };
        let table2 = RegulatorSettings {
            c: vec![15.0, 75.0, 125.0],
            l: 250.0,
            delta: 150.0,
            l_input: 20.0,
            h: vec![15.0, 70.0],
            g: 2.0,
            m1: 20.0,
            m2: 20.0,
            rho: 2.0,
            k_w: Vec::new(),
            nu: Vec::new(),
        };
        let (reg, sim) = match preset {
            Preset::Table2 => (
                table2,
                IntegratorConfig {
                    step_initial: 1e-9,
                    tol_rel: 1e-6,
                    tol_abs: 1e-8,
                    event_tol: 1e-10,
                    t_end: 1.0,
                    max_jumps: 200_000,
                    max_step: 1e-2,
                    min_step: 1e-15,
                    sample_dt: 1e-3,
                    event_probes: 3,
                },
            ),
            Preset::Desk => (
                RegulatorSettings {
                    l: 5.0,
                    delta: 20.0,
                    g: 0.25,
                    ..table2
                },
                IntegratorConfig {
                    step_initial: 1e-6,
                    tol_rel: 1e-6,
                    tol_abs: 1e-8,
                    event_tol: 1e-9,
                    t_end: 50.0,
                    max_jumps: 500_000,
                    max_step: 1e-2,
                    min_step: 1e-15,
                    sample_dt: 1e-2,
                    event_probes: 3,
                },
            ),
        };
        Self {
            exosystem: ExoVariant::Linear,
            preset,
            regulator: RegulatorChoice::Gp,
            tail_fraction: 0.2,
            output_dir: PathBuf::from("out"),
            initial: InitialState {
                w0: [1.0, 0.0, 1.0, 0.0],
                chi0: [0.0; 3],
                zeta0: 0.0,
                eta0: Vec::new(),
                xi0: [0.0; 2],
            },
            gp,
            reg,
            baseline: BaselineSettings {
                enabled: true,
                forgetting: 1.0,
                p0: 1.0,
                p_cap: 1e4,
            },
            sim,
            vtol: VtolParams::reference(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let entries = tokenize(text)?;
        let preset = match entries.iter().find(|e| e.section == "experiment" && e.key == "preset") {
            Some(e) => e.value.parse().map_err(|m: String| ConfigError::value("experiment.preset", m))?,
            None => Preset::Table2,
        };
        let mut cfg = Self::from_preset(preset);
        for e in &entries {
            cfg.apply(e)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Ok(Self::parse(&text)?)
    }

    fn apply(&mut self, e: &Entry) -> Result<(), ConfigError> {
        let full = format!("{}.{}", e.section, e.key);
        let k = full.as_str();
        let v = e.value.as_str();
        match k {
            "experiment.preset" => {}
            "experiment.exosystem" => {
                self.exosystem = v.parse().map_err(|err: gpim::vtol::VtolError| ConfigError::value(k, err.to_string()))?
            }
            "experiment.regulator" => {
                self.regulator = match v {
                    "gp" => RegulatorChoice::Gp,
                    "baseline" => RegulatorChoice::Baseline,
                    _ => return Err(ConfigError::value(k, format!("expected gp or baseline, got '{v}'"))),
                }
            }
            "experiment.tail_fraction" => self.tail_fraction = num(k, v)?,
            "experiment.output_dir" => self.output_dir = PathBuf::from(v),
            "experiment.w0" => self.initial.w0 = array(k, v)?,
            "experiment.chi0" => self.initial.chi0 = array(k, v)?,
            "experiment.zeta0" => self.initial.zeta0 = num(k, v)?,
            "experiment.eta0" => self.initial.eta0 = list(k, v)?,
            "experiment.xi0" => self.initial.xi0 = array(k, v)?,

            "gp_identifier.n_ds" => self.gp.n_ds = count(k, v)?,
            "gp_identifier.lambda_eta" => self.gp.lambda_eta = list(k, v)?,
            "gp_identifier.lambda_tau" => self.gp.lambda_tau = num(k, v)?,
            "gp_identifier.sigma_p2" => self.gp.sigma_p2 = num(k, v)?,
            "gp_identifier.sigma_n2" => self.gp.sigma_n2 = num(k, v)?,
            "gp_identifier.sigma_thr2" => self.gp.sigma_thr2 = num(k, v)?,

            "regulator_core.c" => self.reg.c = list(k, v)?,
            "regulator_core.l" => self.reg.l = num(k, v)?,
            "regulator_core.delta" => self.reg.delta = num(k, v)?,
            "regulator_core.L" => self.reg.l_input = num(k, v)?,
            "regulator_core.h" => self.reg.h = list(k, v)?,
            "regulator_core.g" => self.reg.g = num(k, v)?,
            "regulator_core.m1" => self.reg.m1 = num(k, v)?,
            "regulator_core.m2" => self.reg.m2 = num(k, v)?,
            "regulator_core.rho" => self.reg.rho = num(k, v)?,
            "regulator_core.k_w" => self.reg.k_w = list(k, v)?,
            "regulator_core.nu" => self.reg.nu = list(k, v)?,

            "baseline.enabled" => {
                self.baseline.enabled = match v {
                    "true" => true,
                    "false" => false,
                    _ => return Err(ConfigError::value(k, format!("expected true or false, got '{v}'"))),
                }
            }
            "baseline.forgetting" => self.baseline.forgetting = num(k, v)?,
            "baseline.p0" => self.baseline.p0 = num(k, v)?,
            "baseline.p_cap" => self.baseline.p_cap = num(k, v)?,

            "hybrid_engine.step_initial" => self.sim.step_initial = num(k, v)?,
            "hybrid_engine.tol_rel" => self.sim.tol_rel = num(k, v)?,
            "hybrid_engine.tol_abs" => self.sim.tol_abs = num(k, v)?,
            "hybrid_engine.event_tol" => self.sim.event_tol = num(k, v)?,
            "hybrid_engine.t_end" => self.sim.t_end = num(k, v)?,
            "hybrid_engine.max_jumps" => self.sim.max_jumps = count(k, v)?,
            "hybrid_engine.max_step" => self.sim.max_step = num(k, v)?,
            "hybrid_engine.min_step" => self.sim.min_step = num(k, v)?,
            "hybrid_engine.sample_dt" => self.sim.sample_dt = num(k, v)?,
            "hybrid_engine.event_probes" => self.sim.event_probes = count(k, v)?,

            "vtol_testbed.M" => self.vtol.mass = num(k, v)?,
            "vtol_testbed.J" => self.vtol.inertia = num(k, v)?,
            "vtol_testbed.wing_l" => self.vtol.wing_l = num(k, v)?,
            "vtol_testbed.grav" => self.vtol.grav = num(k, v)?,
            "vtol_testbed.dist_w1" => self.vtol.dist_w1 = num(k, v)?,
            "vtol_testbed.dist_w3" => self.vtol.dist_w3 = num(k, v)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: e.line,
                    key: full,
                })
            }
        }
        Ok(())
    }

    /// Checks every parameter group; the threshold window is enforced when
    /// the GP regulator is selected.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(ConfigError::invalid("experiment.tail_fraction", "must lie in (0, 1]"));
        }
        let d = self.reg.h.len();
        if !self.initial.eta0.is_empty() && self.initial.eta0.len() != d {
            return Err(ConfigError::invalid(
                "experiment.eta0",
                format!("expected {d} values, got {}", self.initial.eta0.len()),
            ));
        }
        if self.gp.n_ds == 0 {
            return Err(ConfigError::invalid("gp_identifier.n_ds", "must be positive"));
        }
        if self.gp.lambda_eta.len() != d {
            return Err(ConfigError::invalid(
                "gp_identifier.lambda_eta",
                format!("expected one length scale per internal-model state ({d}), got {}", self.gp.lambda_eta.len()),
            ));
        }
        self.kernel()
            .validate()
            .map_err(|e| ConfigError::invalid("gp_identifier", e.to_string()))?;
        if self.regulator == RegulatorChoice::Gp {
            self.check_threshold()?;
        }
        InternalModelParams::new(self.reg.g, self.reg.h.clone())
            .map_err(|e| ConfigError::invalid("regulator_core.h", e.to_string()))?;
        ObserverParams::new(self.reg.m1, self.reg.m2, self.reg.rho)
            .map_err(|e| ConfigError::invalid("regulator_core.m1/m2/rho", e.to_string()))?;
        if self.reg.c.len() != 3 {
            return Err(ConfigError::invalid("regulator_core.c", "the testbed chain needs three coefficients"));
        }
        if self.reg.k_w.len() != self.reg.nu.len() {
            return Err(ConfigError::invalid("regulator_core.k_w", "k_w and nu must have equal length"));
        }
        let structure = StructureParams::new(1, vec![3], d, 1).expect("fixed testbed structure");
        self.stabilizer()
            .validate(&structure)
            .map_err(|e| ConfigError::invalid("regulator_core", e.to_string()))?;
        if !(self.baseline.forgetting > 0.0 && self.baseline.forgetting <= 1.0) {
            return Err(ConfigError::invalid("baseline.forgetting", "must lie in (0, 1]"));
        }
        if !(self.baseline.p0 > 0.0) || !(self.baseline.p_cap > 0.0) {
            return Err(ConfigError::invalid("baseline.p0", "p0 and p_cap must be positive"));
        }
        self.sim
            .validate()
            .map_err(|e| ConfigError::invalid("hybrid_engine", e.to_string()))?;
        self.vtol
            .validate()
            .map_err(|e| ConfigError::invalid("vtol_testbed", e.to_string()))?;
        Ok(())
    }

    pub fn check_threshold(&self) -> Result<(), ConfigError> {
        let c = check_sigma_condition(&self.kernel(), self.gp.sigma_thr2);
        if c.holds {
            Ok(())
        } else {
            Err(ConfigError::invalid(
                "gp_identifier.sigma_thr2",
                format!(
                    "{} is outside the admissible window ({:.7}, {}): it must exceed the variance \
                     left at a fresh sample and stay below the prior variance",
                    self.gp.sigma_thr2, c.lower, c.upper
                ),
            ))
        }
    }

    pub fn kernel(&self) -> KernelParams<f64> {
        KernelParams {
            sigma_p2: self.gp.sigma_p2,
            sigma_n2: self.gp.sigma_n2,
            lambda_eta: self.gp.lambda_eta.clone(),
            lambda_tau: self.gp.lambda_tau,
        }
    }

    pub fn stabilizer(&self) -> StabilizerParams<f64> {
        let mut s = StabilizerParams::scalar(self.reg.l, self.reg.delta, self.reg.c.clone(), self.reg.l_input);
        if !self.reg.k_w.is_empty() {
            s.k_w = Some(Matrix::from_row_slice(1, self.reg.k_w.len(), &self.reg.k_w));
            s.nu = self.reg.nu.clone();
        }
        s
    }

    pub fn loop_params(&self) -> LoopParams<f64> {
        LoopParams {
            vtol: self.vtol.clone(),
            variant: self.exosystem,
            internal_model: InternalModelParams {
                g: self.reg.g,
                h: self.reg.h.clone(),
            },
            observer: ObserverParams {
                m1: self.reg.m1,
                m2: self.reg.m2,
                rho: self.reg.rho,
            },
            stabilizer: self.stabilizer(),
            kernel: self.kernel(),
            sigma_thr2: self.gp.sigma_thr2,
            capacity: self.gp.n_ds,
            baseline_forgetting: self.baseline.forgetting,
            baseline_p0: self.baseline.p0,
            baseline_p_cap: self.baseline.p_cap,
        }
    }

    /// Serialises every key; `parse(to_text())` reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let l = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let regulator = match self.regulator {
            RegulatorChoice::Gp => "gp",
            RegulatorChoice::Baseline => "baseline",
        };
        let _ = writeln!(s, "[experiment]");
        let _ = writeln!(s, "preset = {}", self.preset.name());
        let _ = writeln!(s, "exosystem = {}", self.exosystem);
        let _ = writeln!(s, "regulator = {regulator}");
        let _ = writeln!(s, "tail_fraction = {:?}", self.tail_fraction);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "w0 = {}", l(&self.initial.w0));
        let _ = writeln!(s, "chi0 = {}", l(&self.initial.chi0));
        let _ = writeln!(s, "zeta0 = {:?}", self.initial.zeta0);
        if !self.initial.eta0.is_empty() {
            let _ = writeln!(s, "eta0 = {}", l(&self.initial.eta0));
        }
        let _ = writeln!(s, "xi0 = {}", l(&self.initial.xi0));
        let _ = writeln!(s, "\n[gp_identifier]");
        let _ = writeln!(s, "n_ds = {}", self.gp.n_ds);
        let _ = writeln!(s, "lambda_eta = {}", l(&self.gp.lambda_eta));
        let _ = writeln!(s, "lambda_tau = {:?}", self.gp.lambda_tau);
        let _ = writeln!(s, "sigma_p2 = {:?}", self.gp.sigma_p2);
        let _ = writeln!(s, "sigma_n2 = {:?}", self.gp.sigma_n2);
        let _ = writeln!(s, "sigma_thr2 = {:?}", self.gp.sigma_thr2);
        let _ = writeln!(s, "\n[regulator_core]");
        let _ = writeln!(s, "c = {}", l(&self.reg.c));
        let _ = writeln!(s, "l = {:?}", self.reg.l);
        let _ = writeln!(s, "delta = {:?}", self.reg.delta);
        let _ = writeln!(s, "L = {:?}", self.reg.l_input);
        let _ = writeln!(s, "h = {}", l(&self.reg.h));
        let _ = writeln!(s, "g = {:?}", self.reg.g);
        let _ = writeln!(s, "m1 = {:?}", self.reg.m1);
        let _ = writeln!(s, "m2 = {:?}", self.reg.m2);
        let _ = writeln!(s, "rho = {:?}", self.reg.rho);
        if !self.reg.k_w.is_empty() {
            let _ = writeln!(s, "k_w = {}", l(&self.reg.k_w));
            let _ = writeln!(s, "nu = {}", l(&self.reg.nu));
        }
        let _ = writeln!(s, "\n[baseline]");
        let _ = writeln!(s, "enabled = {}", self.baseline.enabled);
        let _ = writeln!(s, "forgetting = {:?}", self.baseline.forgetting);
        let _ = writeln!(s, "p0 = {:?}", self.baseline.p0);
        let _ = writeln!(s, "p_cap = {:?}", self.baseline.p_cap);
        let _ = writeln!(s, "\n[hybrid_engine]");
        let _ = writeln!(s, "t_end = {:?}", self.sim.t_end);
        let _ = writeln!(s, "step_initial = {:?}", self.sim.step_initial);
        let _ = writeln!(s, "tol_rel = {:?}", self.sim.tol_rel);
        let _ = writeln!(s, "tol_abs = {:?}", self.sim.tol_abs);
        let _ = writeln!(s, "event_tol = {:?}", self.sim.event_tol);
        let _ = writeln!(s, "max_jumps = {}", self.sim.max_jumps);
        let _ = writeln!(s, "max_step = {:?}", self.sim.max_step);
        let _ = writeln!(s, "min_step = {:?}", self.sim.min_step);
        let _ = writeln!(s, "sample_dt = {:?}", self.sim.sample_dt);
        let _ = writeln!(s, "event_probes = {}", self.sim.event_probes);
        let _ = writeln!(s, "\n[vtol_testbed]");
        let _ = writeln!(s, "M = {:?}", self.vtol.mass);
        let _ = writeln!(s, "J = {:?}", self.vtol.inertia);
        let _ = writeln!(s, "wing_l = {:?}", self.vtol.wing_l);
        let _ = writeln!(s, "grav = {:?}", self.vtol.grav);
        let _ = writeln!(s, "dist_w1 = {:?}", self.vtol.dist_w1);
        let _ = writeln!(s, "dist_w3 = {:?}", self.vtol.dist_w3);
        s
    }
}

const SECTIONS: [&str; 6] = [
    "experiment",
    "gp_identifier",
    "regulator_core",
    "baseline",
    "hybrid_engine",
    "vtol_testbed",
];

struct Entry {
    line: usize,
    section: String,
    key: String,
    value: String,
}

fn tokenize(text: &str) -> Result<Vec<Entry>, ConfigError> {
    let mut section: Option<String> = None;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or(ConfigError::Syntax {
                line,
                msg: "unterminated section header".into(),
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::UnknownSection {
                    line,
                    section: name.to_string(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = body.split_once('=').ok_or(ConfigError::Syntax {
            line,
            msg: format!("expected 'key = value', got '{body}'"),
        })?;
        let section = section.clone().ok_or(ConfigError::Syntax {
            line,
            msg: "key outside of any section".into(),
        })?;
        let key = key.trim().to_string();
        if out.iter().any(|e: &Entry| e.section == section && e.key == key) {
            return Err(ConfigError::Syntax {
                line,
                msg: format!("duplicate key {section}.{key}"),
            });
        }
        out.push(Entry {
            line,
            section,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

fn num(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| ConfigError::value(key, format!("'{v}' is not a number")))
}

fn count(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>()
        .map_err(|_| ConfigError::value(key, format!("'{v}' is not a non-negative integer")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|p| num(key, p.trim())).collect()
}

fn array<const N: usize>(key: &str, v: &str) -> Result<[f64; N], ConfigError> {
    let l = list(key, v)?;
    l.as_slice()
        .try_into()
        .map_err(|_| ConfigError::value(key, format!("expected {N} values, got {}", l.len())))
}
