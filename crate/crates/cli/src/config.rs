//! Run documents: a JSON config, overridden by command-line flags, resolved
//! against per-command defaults and validated before anything is computed.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use piezo::loops::{Loop, LoopSpec};
use piezo::model::{HoppingModel, ModelSpec};
use piezo::polarization::DynamicalOptions;
use piezo::spectral::Region;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    GapMap,
    Chern,
    Polarization,
    Disorder,
    Symmetry,
    LoopInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolarizationMethod {
    Quantized,
    Riemann,
    Dynamical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Brillouin-zone grid size (plaquette grid for `chern`).
    pub n_k: Option<usize>,
    /// Loop-time samples.
    pub n_t: Option<usize>,
    /// Linear size of the real-space lattice.
    pub l: usize,
    /// Integrator steps for the dynamical method; defaults to ⌈50 T⌉.
    pub steps: Option<usize>,
    /// Period `T` of the slow driving.
    pub period: f64,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { n_k: None, n_t: None, l: 12, steps: None, period: 200.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Disorder {
    pub lambdas: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for Disorder {
    fn default() -> Self {
        Disorder { lambdas: vec![0.0, 0.1, 0.2], seeds: vec![1, 2, 3, 4, 5] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Symmetry {
    /// Clifford rank to classify.
    pub m: usize,
    /// Parameter point for the inversion check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
}

impl Default for Symmetry {
    fn default() -> Self {
        Symmetry { m: 1, q: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub model: ModelSpec,
    #[serde(rename = "loop")]
    pub loop_spec: LoopSpec,
    pub e_f: f64,
    pub grids: Grids,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    pub method: PolarizationMethod,
    pub disorder: Disorder,
    pub symmetry: Symmetry,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    /// Record wall-clock time in reports (breaks byte-identical output).
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            model: ModelSpec::default(),
            loop_spec: LoopSpec::Eta1 { eps: 0.5 },
            e_f: 0.0,
            grids: Grids::default(),
            region: None,
            method: PolarizationMethod::Quantized,
            disorder: Disorder::default(),
            symmetry: Symmetry::default(),
            seed: 0,
            threads: None,
            out: None,
            timing: false,
        }
    }
}

/// Flags shared by every subcommand; each one overrides the config document.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON run document.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file for the main result (CSV or report); standard output if absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Seed for basepoints and other random draws.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Brillouin-zone grid size.
    #[arg(long, global = true, value_name = "N")]
    pub nk: Option<usize>,
    /// Loop-time samples.
    #[arg(long, global = true, value_name = "N")]
    pub nt: Option<usize>,
    /// Distance ε of a generator loop from the gapless set.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Disorder strengths, comma separated.
    #[arg(long, global = true, value_delimiter = ',', num_args = 1..)]
    pub lambda: Vec<f64>,
    /// Polarization method.
    #[arg(long, global = true, value_enum)]
    pub method: Option<PolarizationMethod>,
    /// Record wall-clock time in reports.
    #[arg(long, global = true)]
    pub timing: bool,
}

/// A validated run: the effective config plus what was built from it.
pub struct Run {
    pub config: RunConfig,
    pub model: HoppingModel,
    pub path: Loop,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, command: Command, flags: &Overrides) -> Result<(), CliError> {
        if let Some(c) = self.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config is for '{}' but '{}' was requested",
                    name(c),
                    name(command)
                )));
            }
        }
        self.command = Some(command);
        if let Some(out) = &flags.out {
            self.out = Some(out.clone());
        }
        if flags.threads.is_some() {
            self.threads = flags.threads;
        }
        if let Some(seed) = flags.seed {
            self.seed = seed;
        }
        if flags.nk.is_some() {
            self.grids.n_k = flags.nk;
        }
        if flags.nt.is_some() {
            self.grids.n_t = flags.nt;
        }
        if let Some(eps) = flags.eps {
            match &mut self.loop_spec {
                LoopSpec::Eta1 { eps: e } | LoopSpec::Eta2 { eps: e } => *e = eps,
                _ => return Err(CliError::Config("--eps applies only to eta-1 and eta-2 loops".into())),
            }
        }
        if !flags.lambda.is_empty() {
            self.disorder.lambdas = flags.lambda.clone();
        }
        if let Some(m) = flags.method {
            self.method = m;
        }
        self.timing |= flags.timing;
        self.fill_defaults(command);
        Ok(())
    }

    fn fill_defaults(&mut self, command: Command) {
        let (n_k, n_t) = match command {
            Command::GapMap => (Some(128), None),
            Command::Chern | Command::LoopInfo => (Some(64), None),
            Command::Polarization => match self.method {
                PolarizationMethod::Quantized => (Some(64), None),
                PolarizationMethod::Riemann => (Some(48), Some(48)),
                PolarizationMethod::Dynamical => (Some(24), None),
            },
            Command::Disorder => (None, Some(32)),
            Command::Symmetry => (Some(64), None),
        };
        self.grids.n_k = self.grids.n_k.or(n_k);
        self.grids.n_t = self.grids.n_t.or(n_t);
    }

    pub fn n_k(&self) -> usize {
        self.grids.n_k.expect("filled by apply")
    }

    pub fn n_t(&self) -> usize {
        self.grids.n_t.expect("filled by apply")
    }

    pub fn dynamical(&self) -> DynamicalOptions {
        DynamicalOptions { period: self.grids.period, n_k: self.n_k(), steps: self.grids.steps }
    }

    /// Checks everything the command will use and builds the model and loop.
    pub fn validate(self) -> Result<Run, CliError> {
        let command = self.command.expect("set by apply");
        let model = self.model.build().map_err(config_error)?;
        let path = self.loop_spec.build().map_err(config_error)?;
        if path.dimension() != model.parameters() {
            return Err(CliError::Config(format!(
                "loop has {} coordinates but model '{}' has {} parameters",
                path.dimension(),
                model.name(),
                model.parameters()
            )));
        }
        if !self.e_f.is_finite() {
            return Err(CliError::Config("e_f must be finite".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be positive".into()));
        }
        if let Some(n) = self.grids.n_k {
            if n < 8 {
                return Err(CliError::Config(format!("n_k must be at least 8, got {n}")));
            }
        }
        if let Some(n) = self.grids.n_t {
            if n < 3 {
                return Err(CliError::Config(format!("n_t must be at least 3, got {n}")));
            }
        }
        match command {
            Command::GapMap => {
                let region = self.region.as_ref().ok_or_else(|| CliError::Config("gap-map needs a region".into()))?;
                region.validate(&model).map_err(config_error)?;
            }
            Command::Polarization if self.method == PolarizationMethod::Dynamical => {
                self.dynamical().resolved_steps().map_err(config_error)?;
            }
            Command::Disorder => {
                if self.disorder.lambdas.is_empty() || self.disorder.seeds.is_empty() {
                    return Err(CliError::Config("disorder needs at least one λ and one seed".into()));
                }
                if let Some(bad) = self.disorder.lambdas.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                    return Err(CliError::Config(format!("λ must be finite and non-negative, got {bad}")));
                }
                let hop = model.max_hop();
                if (self.grids.l as i64) < 2 * hop.max(1) {
                    return Err(CliError::Config(format!("L = {} is too small for hopping range {hop}", self.grids.l)));
                }
            }
            Command::Symmetry => {
                if self.symmetry.m == 0 {
                    return Err(CliError::Config("symmetry.m must be positive".into()));
                }
                if let Some(q) = &self.symmetry.q {
                    if q.len() != model.parameters() {
                        return Err(CliError::Config(format!(
                            "symmetry.q has {} coordinates, model has {} parameters",
                            q.len(),
                            model.parameters()
                        )));
                    }
                    model.symbol(q).map_err(config_error)?;
                }
            }
            _ => {}
        }
        Ok(Run { config: self, model, path })
    }
}

pub fn name(c: Command) -> &'static str {
    match c {
        Command::GapMap => "gap-map",
        Command::Chern => "chern",
        Command::Polarization => "polarization",
        Command::Disorder => "disorder",
        Command::Symmetry => "symmetry",
        Command::LoopInfo => "loop-info",
    }
}

fn config_error(e: piezo::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(json: &str, command: Command, flags: &Overrides) -> Result<Run, CliError> {
        let mut c: RunConfig = serde_json::from_str(json).map_err(|e| CliError::Config(e.to_string()))?;
        c.apply(command, flags)?;
        c.validate()
    }

    #[test]
    fn flags_override_document() {
        let flags = Overrides { nk: Some(32), eps: Some(0.3), seed: Some(7), ..Default::default() };
        let run = resolved(r#"{"grids": {"n_k": 16}, "seed": 1}"#, Command::Chern, &flags).unwrap();
        assert_eq!(run.config.n_k(), 32);
        assert_eq!(run.config.seed, 7);
        assert_eq!(run.config.loop_spec, LoopSpec::Eta1 { eps: 0.3 });
    }

    #[test]
    fn defaults_depend_on_method() {
        let flags = Overrides { method: Some(PolarizationMethod::Riemann), ..Default::default() };
        let run = resolved("{}", Command::Polarization, &flags).unwrap();
        assert_eq!((run.config.n_k(), run.config.n_t()), (48, 48));
    }

    #[test]
    fn rejects_bad_documents() {
        let none = Overrides::default();
        assert!(resolved(r#"{"bogus": 1}"#, Command::Chern, &none).is_err());
        assert!(resolved(r#"{"model": "nope"}"#, Command::Chern, &none).is_err());
        assert!(resolved(r#"{"loop": {"type": "constant", "point": [1, 0]}}"#, Command::Chern, &none).is_err());
        assert!(resolved("{}", Command::GapMap, &none).is_err());
        let region = r#"{"region": {"lower": [0, 2, 0], "upper": [2, 0, 0], "resolution": [3, 3, 1]}}"#;
        assert!(resolved(region, Command::GapMap, &none).is_err());
        assert!(resolved(r#"{"command": "chern"}"#, Command::Symmetry, &none).is_err());
        let short = r#"{"grids": {"period": 10, "steps": 5}, "method": "dynamical"}"#;
        assert!(resolved(short, Command::Polarization, &none).is_err());
    }

    #[test]
    fn eps_needs_a_generator_loop() {
        let flags = Overrides { eps: Some(0.2), ..Default::default() };
        let json = r#"{"loop": {"type": "constant", "point": [1, 0, 0.5]}}"#;
        assert!(matches!(resolved(json, Command::Chern, &flags), Err(CliError::Config(_))));
    }
}
