//! Arrangement of three-way dissimilarities into a single data matrix `D`,
//! its h-plot, and the per-object profile matrix `Y` built from it.
//!
//! | case                     | `D`                                       | h-plot rows | `Y` width |
//! |--------------------------|-------------------------------------------|-------------|-----------|
//! | unconditional symmetric  | `[Δ1 | … | ΔL]`, `n x Ln`                 | `Ln`        | `2L`      |
//! | unconditional asymmetric | `[Δ1 | Δ1ᵀ | … | ΔL | ΔLᵀ]`, `n x 2Ln`    | `2Ln`       | `4L`      |
//! | conditional symmetric    | `Δ1; …; ΔL` stacked, `Ln x n`             | `n`         | `2`       |
//! | conditional asymmetric   | `[Δ1 | Δ1ᵀ]; …; [ΔL | ΔLᵀ]`, `Ln x 2n`    | `2n`        | `4`       |
//!
//! Column `j` of `Δl` holds the dissimilarities towards object `j` (the
//! "to" or received profile); column `j` of `Δlᵀ` holds those from `j`
//! (the "from" or sending profile). Widths assume two dimensions; in
//! general each profile contributes `dims` columns to `Y`.
//!
//! A single-occasion dataset always takes the unconditional route.

use std::cmp::Ordering;

use ndarray::{s, Array2, ArrayView1};
use serde::Serialize;

use crate::dataset::{Conditionality, ThreeWayDissimilarity};
use crate::error::{Error, Result};
use crate::hplot::{hplot, HPlotResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    UnconditionalSymmetric,
    UnconditionalAsymmetric,
    ConditionalSymmetric,
    ConditionalAsymmetric,
}

impl Case {
    pub fn of(dataset: &ThreeWayDissimilarity) -> Self {
        let conditional = dataset.conditionality() == Conditionality::Conditional && dataset.n_occasions() > 1;
        match (conditional, dataset.is_symmetric()) {
            (false, true) => Case::UnconditionalSymmetric,
            (false, false) => Case::UnconditionalAsymmetric,
            (true, true) => Case::ConditionalSymmetric,
            (true, false) => Case::ConditionalAsymmetric,
        }
    }

    pub fn is_asymmetric(self) -> bool {
        matches!(self, Case::UnconditionalAsymmetric | Case::ConditionalAsymmetric)
    }

    pub fn is_conditional(self) -> bool {
        matches!(self, Case::ConditionalSymmetric | Case::ConditionalAsymmetric)
    }
}

/// Direction of a dissimilarity profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Dissimilarities from every object towards this one.
    To,
    /// Dissimilarities from this object towards every other.
    From,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::To => "to",
            Direction::From => "from",
        }
    }
}

/// Identifies one dissimilarity variable: a column of `D` and a row of the
/// h-plot coordinates. `occasion` is `None` when all occasions are pooled
/// (conditional arrangements).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProfileTag {
    pub object: usize,
    pub direction: Direction,
    pub occasion: Option<usize>,
}

impl ProfileTag {
    /// Ordering key: object label order, then occasion, then direction.
    fn key(&self) -> (usize, usize, Direction) {
        (self.object, self.occasion.map_or(0, |o| o + 1), self.direction)
    }
}

/// Observation tag for a row of a conditional `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowTag {
    pub object: usize,
    pub occasion: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrangedMatrix {
    pub case: Case,
    pub data: Array2<f64>,
    /// One tag per column of `data`.
    pub block_map: Vec<ProfileTag>,
    /// Present for conditional arrangements only.
    pub row_map: Option<Vec<RowTag>>,
}

/// Builds the arranged matrix `D` for the dataset's case.
pub fn arrange(dataset: &ThreeWayDissimilarity) -> ArrangedMatrix {
    let case = Case::of(dataset);
    let n = dataset.n_objects();
    let big_l = dataset.n_occasions();
    let mats = dataset.matrices();

    let directions: &[Direction] = if case.is_asymmetric() {
        &[Direction::To, Direction::From]
    } else {
        &[Direction::To]
    };
    let blocks = directions.len();

    if case.is_conditional() {
        let mut data = Array2::zeros((big_l * n, blocks * n));
        let mut row_map = Vec::with_capacity(big_l * n);
        for (l, m) in mats.iter().enumerate() {
            let rows = s![l * n..(l + 1) * n, ..n];
            data.slice_mut(rows).assign(m);
            if case.is_asymmetric() {
                data.slice_mut(s![l * n..(l + 1) * n, n..]).assign(&m.t());
            }
            row_map.extend((0..n).map(|object| RowTag { object, occasion: l }));
        }
        let block_map = directions
            .iter()
            .flat_map(|&direction| {
                (0..n).map(move |object| ProfileTag {
                    object,
                    direction,
                    occasion: None,
                })
            })
            .collect();
        ArrangedMatrix {
            case,
            data,
            block_map,
            row_map: Some(row_map),
        }
    } else {
        let width = blocks * n;
        let mut data = Array2::zeros((n, big_l * width));
        let mut block_map = Vec::with_capacity(big_l * width);
        for (l, m) in mats.iter().enumerate() {
            let base = l * width;
            data.slice_mut(s![.., base..base + n]).assign(m);
            if case.is_asymmetric() {
                data.slice_mut(s![.., base + n..base + 2 * n]).assign(&m.t());
            }
            for &direction in directions {
                block_map.extend((0..n).map(|object| ProfileTag {
                    object,
                    direction,
                    occasion: Some(l),
                }));
            }
        }
        ArrangedMatrix {
            case,
            data,
            block_map,
            row_map: None,
        }
    }
}

/// Per-object profile coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileMatrix {
    pub case: Case,
    pub labels: Vec<String>,
    pub occasions: Vec<String>,
    pub dims: usize,
    /// `n x w`; per object row, occasion-major, within an occasion the
    /// to-profile coordinates then the from-profile coordinates.
    pub y: Array2<f64>,
    /// Tag of each h-plot coordinate row (same order as the columns of `D`).
    pub tags: Vec<ProfileTag>,
    pub hplot: HPlotResult,
}

impl ProfileMatrix {
    /// Coordinates of the profile at h-plot row `row`.
    pub fn point(&self, row: usize) -> ArrayView1<'_, f64> {
        self.hplot.coordinates.row(row)
    }

    /// Number of occasion blocks in `Y` (1 for conditional cases).
    pub fn occasion_blocks(&self) -> usize {
        if self.case.is_conditional() {
            1
        } else {
            self.occasions.len()
        }
    }

    pub fn directions(&self) -> &'static [Direction] {
        if self.case.is_asymmetric() {
            &[Direction::To, Direction::From]
        } else {
            &[Direction::To]
        }
    }

    /// Column offset in `Y` of the given occasion block and direction.
    pub fn y_offset(&self, occasion_block: usize, direction: Direction) -> usize {
        let per_occasion = self.directions().len() * self.dims;
        let within = match direction {
            Direction::To => 0,
            Direction::From => self.dims,
        };
        occasion_block * per_occasion + within
    }

    /// h-plot row index of a tag.
    pub fn row_of(&self, tag: &ProfileTag) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    /// Human-readable name such as `to-D@2` or `from-A`.
    pub fn describe(&self, tag: &ProfileTag) -> String {
        match tag.occasion {
            Some(o) if !self.case.is_conditional() => format!(
                "{}-{}@{}",
                tag.direction.as_str(),
                self.labels[tag.object],
                self.occasions[o]
            ),
            _ => format!("{}-{}", tag.direction.as_str(), self.labels[tag.object]),
        }
    }
}

/// h-plots the arranged matrix in `dims` dimensions and assembles `Y`.
pub fn project(dataset: &ThreeWayDissimilarity, dims: usize) -> Result<ProfileMatrix> {
    let arranged = arrange(dataset);
    let hp = hplot(arranged.data.view(), dims)?;
    Ok(assemble(dataset, arranged, hp))
}

fn assemble(dataset: &ThreeWayDissimilarity, arranged: ArrangedMatrix, hp: HPlotResult) -> ProfileMatrix {
    let n = dataset.n_objects();
    let dims = hp.dims;
    let mut profile = ProfileMatrix {
        case: arranged.case,
        labels: dataset.labels().to_vec(),
        occasions: dataset.occasions().to_vec(),
        dims,
        y: Array2::zeros((0, 0)),
        tags: arranged.block_map,
        hplot: hp,
    };
    let width = profile.occasion_blocks() * profile.directions().len() * dims;
    let mut y = Array2::zeros((n, width));
    for (row, tag) in profile.tags.iter().enumerate() {
        let block = if profile.case.is_conditional() {
            0
        } else {
            tag.occasion.expect("unconditional tags carry an occasion")
        };
        let off = profile.y_offset(block, tag.direction);
        y.slice_mut(s![tag.object, off..off + dims])
            .assign(&profile.hplot.coordinates.row(row));
    }
    profile.y = y;
    profile
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymmetryScore {
    pub object: usize,
    pub occasion: Option<usize>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryReport {
    /// Sorted by nonincreasing score; ties by label order then occasion.
    pub scores: Vec<AsymmetryScore>,
    pub most_symmetric: AsymmetryScore,
    pub most_asymmetric: AsymmetryScore,
}

/// Distance between each object's to-profile and from-profile.
pub fn asymmetry_report(profile: &ProfileMatrix) -> Result<AsymmetryReport> {
    if !profile.case.is_asymmetric() {
        return Err(Error::NoAsymmetry);
    }
    let mut scores = Vec::new();
    for (row, tag) in profile.tags.iter().enumerate() {
        if tag.direction != Direction::To {
            continue;
        }
        let partner = ProfileTag {
            direction: Direction::From,
            ..*tag
        };
        let other = profile.row_of(&partner).expect("asymmetric arrangement has both directions");
        scores.push(AsymmetryScore {
            object: tag.object,
            occasion: tag.occasion,
            score: euclidean(profile.point(row), profile.point(other)),
        });
    }
    let tie_key = |s: &AsymmetryScore| (s.object, s.occasion);
    let most_symmetric = scores
        .iter()
        .min_by(|a, b| a.score.total_cmp(&b.score).then(tie_key(a).cmp(&tie_key(b))))
        .cloned()
        .expect("at least one object");
    scores.sort_by(|a, b| b.score.total_cmp(&a.score).then(tie_key(a).cmp(&tie_key(b))));
    let most_asymmetric = scores[0].clone();
    Ok(AsymmetryReport {
        scores,
        most_symmetric,
        most_asymmetric,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilePair {
    pub first: ProfileTag,
    pub second: ProfileTag,
    pub distance: f64,
}

/// The `k` closest pairs of profiles in the h-plot, ascending by distance.
///
/// Pairs of the same object's to- and from-profile are included unless
/// `exclude_self_pairs` is set.
pub fn nearest_profiles(profile: &ProfileMatrix, k: usize, exclude_self_pairs: bool) -> Vec<ProfilePair> {
    let tags = &profile.tags;
    let mut pairs = Vec::new();
    for a in 0..tags.len() {
        for b in (a + 1)..tags.len() {
            if exclude_self_pairs && tags[a].object == tags[b].object && tags[a].occasion == tags[b].occasion {
                continue;
            }
            let (first, second) = if tags[a].key() <= tags[b].key() {
                (tags[a], tags[b])
            } else {
                (tags[b], tags[a])
            };
            pairs.push(ProfilePair {
                first,
                second,
                distance: euclidean(profile.point(a), profile.point(b)),
            });
        }
    }
    pairs.sort_by(|x, y| {
        x.distance
            .total_cmp(&y.distance)
            .then_with(|| x.first.key().cmp(&y.first.key()))
            .then_with(|| x.second.key().cmp(&y.second.key()))
    });
    pairs.truncate(k);
    pairs
}

/// Which profile blocks a covariate is correlated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionChoice {
    To,
    From,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CovariateCorrelation {
    pub direction: Direction,
    /// `None` for conditional arrangements.
    pub occasion: Option<usize>,
    /// Zero-based h-plot dimension.
    pub dimension: usize,
    pub r: f64,
}

/// Pearson correlation between a per-object covariate and coordinate
/// `dimension` (zero-based) of the selected profile blocks, one value per
/// occasion block and direction.
pub fn correlate_covariate(
    profile: &ProfileMatrix,
    covariate: &[f64],
    dimension: usize,
    choice: DirectionChoice,
) -> Result<Vec<CovariateCorrelation>> {
    let n = profile.labels.len();
    if covariate.len() != n {
        return Err(Error::CovariateLength {
            got: covariate.len(),
            expected: n,
        });
    }
    if dimension >= profile.dims {
        return Err(Error::InvalidDims {
            dims: dimension + 1,
            max: profile.dims,
        });
    }
    let wanted: &[Direction] = match choice {
        DirectionChoice::To => &[Direction::To],
        DirectionChoice::From => &[Direction::From],
        DirectionChoice::Both => &[Direction::To, Direction::From],
    };
    if !profile.case.is_asymmetric() && wanted.contains(&Direction::From) {
        return Err(Error::NoAsymmetry);
    }
    let mut out = Vec::new();
    for block in 0..profile.occasion_blocks() {
        for &direction in wanted {
            let col = profile.y_offset(block, direction) + dimension;
            let r = pearson(covariate, profile.y.column(col))?;
            out.push(CovariateCorrelation {
                direction,
                occasion: (!profile.case.is_conditional()).then_some(block),
                dimension,
                r,
            });
        }
    }
    Ok(out)
}

fn pearson(x: &[f64], y: ArrayView1<'_, f64>) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.sum() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y.iter()) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("covariate"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("coordinate column"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

pub(crate) fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl PartialOrd for ProfileTag {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ProfileTag {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}
