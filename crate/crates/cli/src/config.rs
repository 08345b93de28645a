use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use triway_core::{Conditionality, RankScope, SymmetryDecl};

/// Misuse of the command line, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

#[derive(Debug, Parser)]
#[command(name = "triway", version, about = "h-plot embedding, archetypoids and k-medoids for three-way dissimilarities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed the profiles and report asymmetry and nearest profiles.
    Project(ProjectArgs),
    /// Archetypoid analysis of the profile matrix.
    Ada(AdaArgs),
    /// k-medoids clustering of the profile matrix.
    Cluster(ClusterArgs),
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV of `label,value` rows correlated with each embedding dimension.
    #[arg(long, value_name = "CSV")]
    pub covariate: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AdaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of archetypoids; `auto` or absent picks the elbow of the RSS curve.
    #[arg(long, value_name = "N|auto")]
    pub k: Option<KChoice>,
    /// Largest k on the RSS curve.
    #[arg(long, value_name = "N")]
    pub kmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of clusters, or `auto` for the best average silhouette.
    #[arg(long, value_name = "N|auto", default_value = "auto")]
    pub k: KChoice,
    /// Largest k tried by `auto`.
    #[arg(long, value_name = "N")]
    pub kmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Long CSV or JSON file, or `builtin:journals` / `builtin:artificial`.
    #[arg(long, value_name = "PATH")]
    pub input: String,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<InputFormat>,
    #[arg(long, value_enum, default_value = "unconditional")]
    pub conditionality: ConditionalityArg,
    #[arg(long, value_enum, default_value = "auto")]
    pub symmetry: SymmetryArg,
    /// `none`, `rank:global`, `rank:occasion` or `power:<p>`.
    #[arg(long, default_value = "none")]
    pub transform: Transform,
    /// Treat the input as similarities and convert with `max - s`.
    #[arg(long, value_name = "V")]
    pub similarity_max: Option<f64>,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Result JSON file.
    #[arg(long, value_name = "JSON")]
    pub out: PathBuf,
    /// Scatter plot of the embedding.
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionalityArg {
    Conditional,
    Unconditional,
}

impl From<ConditionalityArg> for Conditionality {
    fn from(c: ConditionalityArg) -> Self {
        match c {
            ConditionalityArg::Conditional => Conditionality::Conditional,
            ConditionalityArg::Unconditional => Conditionality::Unconditional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SymmetryArg {
    Auto,
    Symmetric,
    Asymmetric,
}

impl From<SymmetryArg> for SymmetryDecl {
    fn from(s: SymmetryArg) -> Self {
        match s {
            SymmetryArg::Auto => SymmetryDecl::Auto,
            SymmetryArg::Symmetric => SymmetryDecl::Symmetric,
            SymmetryArg::Asymmetric => SymmetryDecl::Asymmetric,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    None,
    Rank(RankScope),
    Power(f64),
}

impl FromStr for Transform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Transform::None),
            "rank:global" => Ok(Transform::Rank(RankScope::Global)),
            "rank:occasion" => Ok(Transform::Rank(RankScope::PerOccasion)),
            _ => {
                let p = s
                    .strip_prefix("power:")
                    .ok_or_else(|| format!("unknown transform {s:?}"))?;
                let p: f64 = p.parse().map_err(|_| format!("invalid power {p:?}"))?;
                if p > 0.0 && p.is_finite() {
                    Ok(Transform::Power(p))
                } else {
                    Err(format!("power must be positive and finite, got {p}"))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

impl FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(KChoice::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("k must be at least 1".into()),
            Ok(k) => Ok(KChoice::Fixed(k)),
            Err(_) => Err(format!("expected a positive integer or `auto`, got {s:?}")),
        }
    }
}

/// Where the data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Builtin(&'static str),
    File(PathBuf),
}

impl CommonArgs {
    pub fn source(&self) -> anyhow::Result<Source> {
        match self.input.strip_prefix("builtin:") {
            Some(name) => match name {
                "journals" => Ok(Source::Builtin("journals")),
                "artificial" => Ok(Source::Builtin("artificial")),
                _ => Err(usage(format!(
                    "unknown builtin dataset {name:?} (expected journals or artificial)"
                ))),
            },
            None => Ok(Source::File(PathBuf::from(&self.input))),
        }
    }

    pub fn input_format(&self, source: &Source) -> InputFormat {
        if let Some(f) = self.format {
            return f;
        }
        match source {
            Source::File(path) if has_extension(path, "json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.dims == 0 {
            return Err(usage("--dims must be at least 1"));
        }
        if let Some(svg) = &self.svg {
            if same_path(svg, &self.out) {
                return Err(usage("--out and --svg must name different files"));
            }
        }
        if let Some(v) = self.similarity_max {
            if !v.is_finite() {
                return Err(usage("--similarity-max must be finite"));
            }
        }
        Ok(())
    }
}

fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn same_path(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}
