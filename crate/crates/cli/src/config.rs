//! Run configuration: an optional JSON file overridden by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use orthochain::opt::OptimizerOptions;
use orthochain::process::GeneratorKind;
use orthochain::series::{CoefficientSequence, CoefficientSpec, Depth};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_BASE_DEPTH: u32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Coefficients as written in a config file: a spec object, a bare list, or
/// the same text accepted by `--coeffs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffsInput {
    Spec(CoefficientSpec),
    List(Vec<f64>),
    Text(String),
}

/// `"auto"` or a level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DepthInput {
    Level(u32),
    Text(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub coeffs: Option<CoeffsInput>,
    pub depth: Option<DepthInput>,
    /// `uniform`, `optimize`, `point:I`, `dirichlet:SEED`, or a file path.
    pub measure: Option<String>,
    /// Subset of `strong`, `weak`, `dyadic`, `filtered`, `rm` to report.
    pub functionals: Option<Vec<String>>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub generator: Option<GeneratorKind>,
    pub base_depth: Option<u32>,
    pub random_measures: Option<usize>,
    pub optimizer: Option<OptimizerOptions>,
}

/// Flags shared by every subcommand.
#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Coefficient file, JSON spec, comma list, power:P:N or geometric:Q:N.
    #[arg(long, value_name = "FILE|INLINE", allow_hyphen_values = true)]
    pub coeffs: Option<String>,
    /// Partition depth (or base depth for `adversarial`): a level or `auto`.
    #[arg(long, value_name = "K|auto")]
    pub depth: Option<String>,
    /// uniform, optimize, point:I, dirichlet:SEED, or a weights file.
    #[arg(long, value_name = "uniform|FILE|optimize")]
    pub measure: Option<String>,
    #[arg(long, value_name = "P")]
    pub paths: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "W")]
    pub workers: Option<usize>,
    /// Leave the timestamp out of the report.
    #[arg(long)]
    pub no_timestamp: bool,
    #[arg(long, value_name = "N")]
    pub max_iters: Option<usize>,
    #[arg(long, value_name = "T")]
    pub tol: Option<f64>,
    #[arg(long, value_name = "R")]
    pub restarts: Option<usize>,
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, Serialize)]
pub struct Settings {
    #[serde(skip)]
    pub coeffs: Option<CoefficientSequence>,
    pub coeffs_source: Option<CoeffsInput>,
    pub depth: Option<DepthSetting>,
    pub measure: Option<String>,
    pub functionals: Option<Vec<String>>,
    pub paths: usize,
    pub seed: Option<u64>,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub workers: Option<usize>,
    pub generator: GeneratorKind,
    pub base_depth: Option<u32>,
    pub random_measures: usize,
    pub optimizer: OptimizerOptions,
    #[serde(skip)]
    pub timestamp: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DepthSetting {
    Auto,
    Level(u32),
}

impl DepthSetting {
    pub fn partition(self) -> Depth {
        match self {
            DepthSetting::Auto => Depth::Auto,
            DepthSetting::Level(k) => Depth::Fixed(k),
        }
    }
}

impl Serialize for DepthSetting {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            DepthSetting::Auto => s.serialize_str("auto"),
            DepthSetting::Level(k) => s.serialize_u32(*k),
        }
    }
}

const FUNCTIONALS: [&str; 5] = ["strong", "weak", "dyadic", "filtered", "rm"];

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_config(path)?,
            None => RunConfig::default(),
        };
        let coeffs_source = match &args.coeffs {
            Some(text) => Some(CoeffsInput::Text(text.clone())),
            None => file.coeffs.clone(),
        };
        let coeffs = coeffs_source.as_ref().map(parse_coeffs).transpose()?;
        let depth = match (&args.depth, &file.depth) {
            (Some(text), _) => Some(parse_depth(text)?),
            (None, Some(DepthInput::Level(k))) => Some(DepthSetting::Level(*k)),
            (None, Some(DepthInput::Text(text))) => Some(parse_depth(text)?),
            (None, None) => None,
        };
        if let Some(sel) = &file.functionals {
            if let Some(bad) = sel.iter().find(|s| !FUNCTIONALS.contains(&s.as_str())) {
                return Err(CliError::Usage(format!(
                    "unknown functional '{bad}' (expected one of {})",
                    FUNCTIONALS.join(", ")
                )));
            }
        }
        let mut optimizer = file.optimizer.clone().unwrap_or_default();
        if let Some(v) = args.max_iters {
            optimizer.max_iters = v;
        }
        if let Some(v) = args.tol {
            optimizer.tol = v;
        }
        if let Some(v) = args.restarts {
            optimizer.restarts = v;
        }
        let seed = args.seed.or(file.seed);
        if let Some(s) = seed {
            optimizer.seed = s;
        }
        optimizer
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let workers = args.workers.or(file.workers);
        if workers == Some(0) {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        Ok(Settings {
            coeffs,
            coeffs_source,
            depth,
            measure: args.measure.clone().or(file.measure),
            functionals: file.functionals,
            paths: args.paths.or(file.paths).unwrap_or(DEFAULT_PATHS),
            seed,
            format: args.format.or(file.format).unwrap_or_default(),
            out: args.out.clone().or(file.out),
            workers,
            generator: file.generator.unwrap_or(GeneratorKind::Gaussian),
            base_depth: file.base_depth,
            random_measures: file.random_measures.unwrap_or(100),
            optimizer,
            timestamp: !args.no_timestamp,
        })
    }

    /// Partition depth; `auto` unless given.
    pub fn partition_depth(&self) -> Depth {
        self.depth.map_or(Depth::Auto, DepthSetting::partition)
    }

    pub fn coeffs(&self) -> Result<&CoefficientSequence, CliError> {
        self.coeffs
            .as_ref()
            .ok_or_else(|| CliError::Usage("--coeffs is required".into()))
    }

    pub fn seed(&self, command: &str) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Usage(format!("{command} is stochastic: --seed is required")))
    }
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn parse_depth(text: &str) -> Result<DepthSetting, CliError> {
    if text == "auto" {
        return Ok(DepthSetting::Auto);
    }
    text.parse()
        .map(DepthSetting::Level)
        .map_err(|_| CliError::Usage(format!("depth must be a level or 'auto', got '{text}'")))
}

pub fn parse_coeffs(input: &CoeffsInput) -> Result<CoefficientSequence, CliError> {
    let seq = match input {
        CoeffsInput::Spec(spec) => CoefficientSequence::from_spec(spec),
        CoeffsInput::List(values) => CoefficientSequence::explicit(values.clone()),
        CoeffsInput::Text(text) => return parse_coeffs_text(text),
    };
    seq.map_err(CliError::from)
}

fn parse_coeffs_text(text: &str) -> Result<CoefficientSequence, CliError> {
    let text = text.trim();
    let path = Path::new(text);
    if !text.is_empty() && path.is_file() {
        let body = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let input: CoeffsInput = serde_json::from_str(&body).map_err(|e| {
            CliError::Usage(format!("invalid coefficient file {}: {e}", path.display()))
        })?;
        return match input {
            CoeffsInput::Text(inner) => parse_coeffs_text(&inner),
            other => parse_coeffs(&other),
        };
    }
    if text.starts_with('{') || text.starts_with('[') {
        let input: CoeffsInput = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("invalid coefficients: {e}")))?;
        return parse_coeffs(&input);
    }
    if let Some((family, rest)) = text.split_once(':') {
        let (param, count) = rest.split_once(':').ok_or_else(|| {
            CliError::Usage(format!("expected {family}:PARAM:COUNT, got '{text}'"))
        })?;
        let param: f64 = param
            .parse()
            .map_err(|_| CliError::Usage(format!("bad parameter '{param}'")))?;
        let count: usize = count
            .parse()
            .map_err(|_| CliError::Usage(format!("bad count '{count}'")))?;
        let seq = match family {
            "power" => CoefficientSequence::power(param, count),
            "geometric" => CoefficientSequence::geometric(param, count),
            other => return Err(CliError::Usage(format!("unknown family '{other}'"))),
        };
        return seq.map_err(CliError::from);
    }
    let values = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad coefficient '{s}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    CoefficientSequence::explicit(values).map_err(CliError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text(s: &str) -> Result<CoefficientSequence, CliError> {
        parse_coeffs(&CoeffsInput::Text(s.into()))
    }

    #[test]
    fn coefficient_forms() {
        assert_eq!(text("0.5,0.5").unwrap().len(), 2);
        assert_eq!(text("[0.5, 0.5]").unwrap().len(), 2);
        assert_eq!(text("power:1:64").unwrap().len(), 64);
        assert_eq!(text("geometric:0.5:16").unwrap().len(), 16);
        assert_eq!(
            text(r#"{"kind":"power","exponent":1.0,"count":3}"#)
                .unwrap()
                .len(),
            3
        );
        assert!(text("wobble:1:2").is_err());
        assert!(text("1,x").is_err());
    }

    #[test]
    fn empty_coefficients_message() {
        for s in ["", "[]", " , "] {
            let err = text(s).unwrap_err();
            assert_eq!(err.to_string(), "at least one coefficient required");
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let bad = serde_json::from_str::<RunConfig>(r#"{"coeffs": [1.0], "colour": "red"}"#);
        assert!(bad.is_err());
        let good: RunConfig =
            serde_json::from_str(r#"{"coeffs": "power:1:8", "depth": "auto", "seed": 3, "optimizer": {"max_iters": 10}}"#)
                .unwrap();
        assert_eq!(good.seed, Some(3));
        assert_eq!(good.optimizer.unwrap().max_iters, 10);
    }

    #[test]
    fn depth_parsing() {
        assert_eq!(parse_depth("auto").unwrap(), DepthSetting::Auto);
        assert_eq!(parse_depth("3").unwrap(), DepthSetting::Level(3));
        assert!(parse_depth("deep").is_err());
    }
}
