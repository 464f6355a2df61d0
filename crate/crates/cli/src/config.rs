//! Run configuration: flags over an optional TOML file over defaults.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use p4lab_core::{ClassifierParams, EquationId, Span, State, StepControl};
use serde::Deserialize;

use crate::CliError;

pub const CONFIG_ENV: &str = "P4LAB_CONFIG";
pub const DEFAULT_HORIZON: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Keys accepted in the config file; every one is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub eq: Option<String>,
    pub t0: Option<f64>,
    pub y0: Option<f64>,
    pub v0: Option<f64>,
    pub to: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub min_crossings: Option<usize>,
    pub linger_dist: Option<f64>,
    pub linger_span: Option<f64>,
    pub max_samples: Option<usize>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }
}

fn parse_eq(s: &str) -> Result<EquationId, String> {
    s.parse()
        .map_err(|e: p4lab_core::EquationError| e.to_string())
}

/// Flags shared by every computing subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Equation: p, pbar, phalf or pbarhalf [default: phalf].
    #[arg(long, value_parser = parse_eq)]
    pub eq: Option<EquationId>,
    /// Initial time [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    /// Initial value [default: 0].
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    /// Initial slope.
    #[arg(long, allow_negative_numbers = true)]
    pub v0: Option<f64>,
    /// End of the integration span [default: t0 - 40].
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML config file; falls back to $P4LAB_CONFIG.
    #[arg(long, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Crossings of a half-parabola needed for oscillation.
    #[arg(long)]
    pub min_crossings: Option<usize>,
    #[arg(long)]
    pub linger_dist: Option<f64>,
    #[arg(long)]
    pub linger_span: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub eq: EquationId,
    pub t0: f64,
    pub y0: f64,
    pub v0: Option<f64>,
    pub to: f64,
    pub control: StepControl,
    pub params: ClassifierParams,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub file: FileConfig,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let eq = match (&self.eq, &file.eq) {
            (Some(eq), _) => *eq,
            (None, Some(s)) => parse_eq(s).map_err(CliError::Usage)?,
            (None, None) => EquationId::Phalf,
        };
        let t0 = self.t0.or(file.t0).unwrap_or(0.0);
        let mut control = StepControl::default();
        control.rtol = self.rtol.or(file.rtol).unwrap_or(control.rtol);
        control.atol = self.atol.or(file.atol).unwrap_or(control.atol);
        control
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let defaults = ClassifierParams::default();
        let params = ClassifierParams {
            min_crossings: self
                .min_crossings
                .or(file.min_crossings)
                .unwrap_or(defaults.min_crossings),
            linger_dist: self
                .linger_dist
                .or(file.linger_dist)
                .unwrap_or(defaults.linger_dist),
            linger_span: self
                .linger_span
                .or(file.linger_span)
                .unwrap_or(defaults.linger_span),
        };
        Ok(RunConfig {
            eq,
            t0,
            y0: self.y0.or(file.y0).unwrap_or(0.0),
            v0: self.v0.or(file.v0),
            to: self.to.or(file.to).unwrap_or(t0 - DEFAULT_HORIZON),
            control,
            params,
            format: self.format.or(file.format).unwrap_or(Format::Json),
            out: self.out.clone().or_else(|| file.out.clone()),
            file,
        })
    }
}

impl RunConfig {
    pub fn v0(&self) -> Result<f64, CliError> {
        self.v0
            .ok_or_else(|| CliError::Usage("missing --v0 (or v0 in the config file)".into()))
    }

    pub fn ic(&self) -> Result<State, CliError> {
        Ok(State::new(self.t0, self.y0, self.v0()?))
    }

    pub fn span(&self) -> Result<Span, CliError> {
        Span::new(self.t0, self.to).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Refuses `P`/`P̄` data at a zero before any integration starts.
    pub fn check_well_posed(&self, ic: State) -> Result<(), CliError> {
        if let Err(e) = self.eq.rhs(ic.t, ic.y, ic.v) {
            let hint = if self.eq.is_half() {
                String::new()
            } else {
                format!(
                    "\nhint: use --eq {} and square the result (`p4lab transform --op square`)",
                    self.eq.half()
                )
            };
            return Err(CliError::Usage(format!("{e}{hint}")));
        }
        Ok(())
    }
}
