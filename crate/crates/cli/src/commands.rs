use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use serde::Serialize;
use triway_core::records::{AdaRecord, ClusterRecord, ElbowSelection, EmbeddingRecord, POOLED_OCCASION};
use triway_core::{
    ada, asymmetry_report, auto_k_with_scores, correlate_covariate, elbow, fixtures, nearest_profiles, pam,
    power_transform, project, rank_transform, rss_curve, Case, DirectionChoice, LoadOptions, ProfileMatrix,
    ThreeWayDissimilarity,
};

use crate::config::{usage, AdaArgs, ClusterArgs, Command, CommonArgs, InputFormat, KChoice, ProjectArgs, Source, Transform};
use crate::svg;

const NEAREST_PAIRS: usize = 5;
const DEFAULT_K_MAX: usize = 10;

/// Result file layout shared by all commands.
#[derive(Debug, Serialize)]
struct Output<'a, T: Serialize> {
    command: &'static str,
    case: Case,
    objects: &'a [String],
    occasions: &'a [String],
    dims: usize,
    result: T,
}

#[derive(Debug, Serialize)]
struct ProjectResult {
    embedding: EmbeddingRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    asymmetry: Option<AsymmetryRecord>,
    nearest_profiles: Vec<PairRecord>,
}

#[derive(Debug, Serialize)]
struct AsymmetryRecord {
    most_symmetric: ScoreRecord,
    most_asymmetric: ScoreRecord,
    /// Nonincreasing by score.
    scores: Vec<ScoreRecord>,
}

#[derive(Debug, Serialize)]
struct ScoreRecord {
    label: String,
    occasion: String,
    score: f64,
}

#[derive(Debug, Serialize)]
struct PairRecord {
    first: String,
    second: String,
    distance: f64,
}

pub fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Project(args) => cmd_project(&args),
        Command::Ada(args) => cmd_ada(&args),
        Command::Cluster(args) => cmd_cluster(&args),
    }
}

pub fn load(common: &CommonArgs) -> anyhow::Result<ThreeWayDissimilarity> {
    common.validate()?;
    let source = common.source()?;
    let mut options = LoadOptions {
        similarity_max: common.similarity_max,
        conditionality: common.conditionality.into(),
        symmetry: common.symmetry.into(),
    };
    let data = match &source {
        Source::Builtin(name) => {
            if *name == "artificial" && options.similarity_max.is_none() {
                options.similarity_max = Some(fixtures::ARTIFICIAL_SIMILARITY_MAX);
            }
            let text = fixtures::by_name(name).expect("builtin names are validated");
            ThreeWayDissimilarity::read_long_csv(text.as_bytes(), options)?
        }
        Source::File(path) => match common.input_format(&source) {
            InputFormat::Csv => ThreeWayDissimilarity::load_long_csv(path, options)?,
            InputFormat::Json => ThreeWayDissimilarity::load_json(path, options)?,
        },
    };
    Ok(match common.transform {
        Transform::None => data,
        Transform::Rank(scope) => rank_transform(&data, scope)?,
        Transform::Power(p) => power_transform(&data, p)?,
    })
}

fn profiles(common: &CommonArgs, data: &ThreeWayDissimilarity) -> anyhow::Result<ProfileMatrix> {
    Ok(project(data, common.dims)?)
}

fn cmd_project(args: &ProjectArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let data = load(common)?;
    let profile = profiles(common, &data)?;
    let mut embedding = EmbeddingRecord::from_profile(&profile);
    if let Some(path) = &args.covariate {
        let values = read_covariate(path, &profile.labels)?;
        let choice = if profile.case.is_asymmetric() {
            DirectionChoice::Both
        } else {
            DirectionChoice::To
        };
        let mut all = Vec::new();
        for dim in 0..profile.dims {
            all.extend(correlate_covariate(&profile, &values, dim, choice)?);
        }
        embedding = embedding.with_correlations(&profile, &all);
    }
    let asymmetry = if profile.case.is_asymmetric() {
        let report = asymmetry_report(&profile)?;
        let score = |s: &triway_core::threeway::AsymmetryScore| ScoreRecord {
            label: profile.labels[s.object].clone(),
            occasion: occasion_name(&profile, s.occasion),
            score: s.score,
        };
        Some(AsymmetryRecord {
            most_symmetric: score(&report.most_symmetric),
            most_asymmetric: score(&report.most_asymmetric),
            scores: report.scores.iter().map(score).collect(),
        })
    } else {
        None
    };
    let nearest = nearest_profiles(&profile, NEAREST_PAIRS, false)
        .into_iter()
        .map(|p| PairRecord {
            first: profile.describe(&p.first),
            second: profile.describe(&p.second),
            distance: p.distance,
        })
        .collect();
    let result = ProjectResult {
        embedding,
        asymmetry,
        nearest_profiles: nearest,
    };
    finish("project", common, &profile, result)
}

fn cmd_ada(args: &AdaArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let data = load(common)?;
    let profile = profiles(common, &data)?;
    let n = profile.y.nrows();
    let (result, selection) = match args.k.unwrap_or(KChoice::Auto) {
        KChoice::Fixed(k) => {
            if args.kmax.is_some() {
                return Err(usage("--kmax only applies when k is chosen automatically"));
            }
            if k > n {
                return Err(usage(format!("--k {k} exceeds the {n} objects")));
            }
            (ada(profile.y.view(), k)?, None)
        }
        KChoice::Auto => {
            let k_max = args.kmax.unwrap_or(n.min(DEFAULT_K_MAX));
            if !(3..=n).contains(&k_max) {
                return Err(usage(format!(
                    "--kmax must lie in 3..={n} to locate an elbow, got {k_max}"
                )));
            }
            let curve = rss_curve(profile.y.view(), k_max)?;
            let bend = elbow(&curve)?;
            let rule = if bend.no_elbow {
                log::warn!("the RSS curve has no elbow; using k = {}", bend.k);
                "no elbow: smallest k"
            } else {
                "elbow: farthest point from the chord"
            };
            let result = ada(profile.y.view(), bend.k)?;
            (
                result,
                Some(ElbowSelection {
                    rule,
                    curve,
                    elbow: bend,
                }),
            )
        }
    };
    let record = AdaRecord::new(&profile.labels, &result, selection);
    finish("ada", common, &profile, record)
}

fn cmd_cluster(args: &ClusterArgs) -> anyhow::Result<()> {
    let common = &args.common;
    let data = load(common)?;
    let profile = profiles(common, &data)?;
    let n = profile.y.nrows();
    let record = match args.k {
        KChoice::Fixed(k) => {
            if args.kmax.is_some() {
                return Err(usage("--kmax only applies with --k auto"));
            }
            if k > n {
                return Err(usage(format!("--k {k} exceeds the {n} objects")));
            }
            ClusterRecord::new(&profile.labels, &pam(profile.y.view(), k)?)
        }
        KChoice::Auto => {
            let k_max = args.kmax.unwrap_or(n.saturating_sub(1).min(DEFAULT_K_MAX));
            if k_max < 2 || k_max + 1 > n {
                return Err(usage(format!(
                    "--kmax must lie in 2..={} for {n} objects, got {k_max}",
                    n.saturating_sub(1)
                )));
            }
            let (best, scores) = auto_k_with_scores(profile.y.view(), k_max)?;
            let mut record = ClusterRecord::new(&profile.labels, &best);
            record.silhouette_by_k = Some(scores);
            record
        }
    };
    finish("cluster", common, &profile, record)
}

fn occasion_name(profile: &ProfileMatrix, occasion: Option<usize>) -> String {
    match occasion {
        Some(o) if !profile.case.is_conditional() => profile.occasions[o].clone(),
        _ => POOLED_OCCASION.to_owned(),
    }
}

/// Reads `label,value` rows (an optional header is skipped) and orders the
/// values like `labels`.
fn read_covariate(path: &Path, labels: &[String]) -> anyhow::Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read covariate file {}", path.display()))?;
    let mut values: Vec<Option<f64>> = vec![None; labels.len()];
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: malformed row {}", path.display(), i + 1))?;
        if record.len() != 2 {
            return Err(anyhow!("{}: row {} must have 2 fields", path.display(), i + 1));
        }
        let Ok(value) = record[1].parse::<f64>() else {
            if i == 0 {
                continue;
            }
            return Err(anyhow!("{}: row {} has non-numeric value {:?}", path.display(), i + 1, &record[1]));
        };
        let slot = labels
            .iter()
            .position(|l| l == &record[0])
            .ok_or_else(|| anyhow!("{}: unknown object {:?}", path.display(), &record[0]))?;
        if values[slot].replace(value).is_some() {
            return Err(anyhow!("{}: object {:?} listed twice", path.display(), &record[0]));
        }
    }
    labels
        .iter()
        .zip(values)
        .map(|(l, v)| v.ok_or_else(|| anyhow!("{}: no value for object {l:?}", path.display())))
        .collect()
}

/// Writes the optional SVG, then the result JSON.
fn finish<T: Serialize>(command: &'static str, common: &CommonArgs, profile: &ProfileMatrix, result: T) -> anyhow::Result<()> {
    if let Some(path) = &common.svg {
        let palette = svg::palette_from_env()?;
        write_atomically(path, svg::render(profile, &palette).as_bytes())?;
    }
    let output = Output {
        command,
        case: profile.case,
        objects: &profile.labels,
        occasions: &profile.occasions,
        dims: profile.dims,
        result,
    };
    let mut text = serde_json::to_string_pretty(&output)?;
    text.push('\n');
    write_atomically(&common.out, text.as_bytes())
}

fn write_atomically(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("{} is not a file path", path.display()))?;
    tmp.set_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        anyhow!("cannot write {}: {e}", path.display())
    })
}
