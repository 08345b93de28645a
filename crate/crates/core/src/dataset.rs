//! Two-mode three-way dissimilarity data: a labeled stack of `L` square
//! `n x n` matrices, one per occasion.
//!
//! Entry `[l][i][j]` is the dissimilarity from object `i` to object `j` at
//! occasion `l`. Self-dissimilarities on the diagonal are kept as data and
//! never forced to zero.
//!
//! Two on-disk formats are supported, both UTF-8 with `.` as the decimal
//! separator and no thousands separators:
//!
//! * long CSV with header `occasion,from,to,value`, one row per entry;
//!   label and occasion order is the order of first appearance
//!   (`from` before `to` within a row);
//! * JSON `{"labels": [...], "occasions": [...], "matrices": [[[...]]]}`
//!   with matrices indexed `[occasion][row][col]`.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use log::warn;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetry requested by the caller. `Auto` resolves to symmetric only when
/// every matrix equals its transpose exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryDecl {
    #[default]
    Auto,
    Symmetric,
    Asymmetric,
}

/// Whether entries of different occasions are comparable (`Unconditional`)
/// or only entries within the same occasion (`Conditional`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Conditionality {
    Conditional,
    #[default]
    Unconditional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankScope {
    /// Rank all `L * n * n` entries jointly.
    Global,
    /// Rank each occasion's matrix independently.
    PerOccasion,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub similarity_max: Option<f64>,
    pub conditionality: Conditionality,
    pub symmetry: SymmetryDecl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreeWayDissimilarity {
    labels: Vec<String>,
    occasions: Vec<String>,
    matrices: Vec<Array2<f64>>,
    declared: SymmetryDecl,
    conditionality: Conditionality,
    symmetric: bool,
}

#[derive(Serialize, Deserialize)]
struct JsonDataset {
    labels: Vec<String>,
    occasions: Vec<String>,
    matrices: Vec<Vec<Vec<f64>>>,
}

impl ThreeWayDissimilarity {
    /// Validates and builds a dataset.
    pub fn new(
        labels: Vec<String>,
        occasions: Vec<String>,
        matrices: Vec<Array2<f64>>,
        declared: SymmetryDecl,
        conditionality: Conditionality,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Shape("at least one object label is required".into()));
        }
        if occasions.is_empty() {
            return Err(Error::Shape("at least one occasion is required".into()));
        }
        if matrices.len() != occasions.len() {
            return Err(Error::Shape(format!(
                "{} occasions but {} matrices",
                occasions.len(),
                matrices.len()
            )));
        }
        let mut negative = false;
        for (l, m) in matrices.iter().enumerate() {
            if m.dim() != (n, n) {
                return Err(Error::Shape(format!(
                    "occasion {:?} matrix is {}x{}, expected {n}x{n}",
                    occasions[l],
                    m.nrows(),
                    m.ncols()
                )));
            }
            for ((i, j), &v) in m.indexed_iter() {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        occasion: l,
                        row: i,
                        col: j,
                    });
                }
                negative |= v < 0.0;
            }
        }
        if negative {
            warn!("dataset contains negative dissimilarities; they are kept as-is");
        }

        let first_asymmetry = find_asymmetry(&matrices);
        let symmetric = match (declared, first_asymmetry) {
            (SymmetryDecl::Asymmetric, _) => false,
            (SymmetryDecl::Auto, found) => found.is_none(),
            (SymmetryDecl::Symmetric, None) => true,
            (SymmetryDecl::Symmetric, Some((l, i, j))) => {
                return Err(Error::NotSymmetric {
                    occasion: occasions[l].clone(),
                    from: labels[i].clone(),
                    to: labels[j].clone(),
                })
            }
        };

        Ok(Self {
            labels,
            occasions,
            matrices,
            declared,
            conditionality,
            symmetric,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn occasions(&self) -> &[String] {
        &self.occasions
    }

    pub fn matrices(&self) -> &[Array2<f64>] {
        &self.matrices
    }

    pub fn n_objects(&self) -> usize {
        self.labels.len()
    }

    pub fn n_occasions(&self) -> usize {
        self.occasions.len()
    }

    pub fn declared_symmetry(&self) -> SymmetryDecl {
        self.declared
    }

    pub fn conditionality(&self) -> Conditionality {
        self.conditionality
    }

    /// Resolved symmetry: `true` when the dataset is treated as symmetric.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn with_conditionality(mut self, conditionality: Conditionality) -> Self {
        self.conditionality = conditionality;
        self
    }

    /// Rebuilds with new values but the same labels and metadata.
    fn map_matrices(&self, matrices: Vec<Array2<f64>>) -> Result<Self> {
        Self::new(
            self.labels.clone(),
            self.occasions.clone(),
            matrices,
            self.declared,
            self.conditionality,
        )
    }

    /// Reads a long-format CSV file.
    pub fn load_long_csv(path: impl AsRef<Path>, options: LoadOptions) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::read_long_csv(file, options)
    }

    pub fn read_long_csv<R: Read>(reader: R, options: LoadOptions) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = rdr.headers().map_err(|e| csv_error(&e, 1))?.clone();
        let expected = ["occasion", "from", "to", "value"];
        if headers.len() != 4 || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `occasion,from,to,value`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }

        let mut labels = Interner::default();
        let mut occasions = Interner::default();
        let mut entries: HashMap<(usize, usize, usize), f64> = HashMap::new();

        for record in rdr.records() {
            let record = record.map_err(|e| csv_error(&e, 0))?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != 4 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 4 fields, got {}", record.len()),
                });
            }
            let value: f64 = record[3].parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric value {:?}", &record[3]),
            })?;
            let l = occasions.intern(&record[0]);
            let i = labels.intern(&record[1]);
            let j = labels.intern(&record[2]);
            if entries.insert((l, i, j), value).is_some() {
                return Err(Error::DuplicateEntry {
                    line,
                    occasion: record[0].to_owned(),
                    from: record[1].to_owned(),
                    to: record[2].to_owned(),
                });
            }
        }

        let n = labels.names.len();
        let mut matrices = Vec::with_capacity(occasions.names.len());
        for (l, occ) in occasions.names.iter().enumerate() {
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    m[[i, j]] = *entries.get(&(l, i, j)).ok_or_else(|| Error::IncompleteMatrix {
                        occasion: occ.clone(),
                        from: labels.names[i].clone(),
                        to: labels.names[j].clone(),
                    })?;
                }
            }
            matrices.push(m);
        }

        let dataset = Self::new(
            labels.names,
            occasions.names,
            matrices,
            // symmetry is resolved after the optional similarity conversion
            SymmetryDecl::Asymmetric,
            options.conditionality,
        )?;
        dataset.finish_load(options)
    }

    fn finish_load(self, options: LoadOptions) -> Result<Self> {
        let converted = match options.similarity_max {
            Some(max) => similarity_to_dissimilarity(&self, max)?,
            None => self,
        };
        Self::new(
            converted.labels,
            converted.occasions,
            converted.matrices,
            options.symmetry,
            options.conditionality,
        )
    }

    /// Writes the long CSV format, occasion-major then row-major.
    ///
    /// Values use Rust's shortest round-trip float formatting, so reading
    /// the output back yields bit-identical values.
    pub fn write_long_csv<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writeln!(writer, "occasion,from,to,value")?;
        for (occ, m) in self.occasions.iter().zip(&self.matrices) {
            for (i, from) in self.labels.iter().enumerate() {
                for (j, to) in self.labels.iter().enumerate() {
                    writeln!(writer, "{},{},{},{}", csv_field(occ), csv_field(from), csv_field(to), m[[i, j]])?;
                }
            }
        }
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>, options: LoadOptions) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json_str(&text, options)
    }

    pub fn from_json_str(text: &str, options: LoadOptions) -> Result<Self> {
        let raw: JsonDataset = serde_json::from_str(text)?;
        let n = raw.labels.len();
        let mut matrices = Vec::with_capacity(raw.matrices.len());
        for (l, rows) in raw.matrices.into_iter().enumerate() {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Shape(format!("matrix {l} is not {n}x{n}")));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            matrices.push(Array2::from_shape_vec((n, n), flat).expect("checked shape"));
        }
        let dataset = Self::new(
            raw.labels,
            raw.occasions,
            matrices,
            SymmetryDecl::Asymmetric,
            options.conditionality,
        )?;
        dataset.finish_load(options)
    }

    pub fn to_json_string(&self) -> String {
        let raw = JsonDataset {
            labels: self.labels.clone(),
            occasions: self.occasions.clone(),
            matrices: self
                .matrices
                .iter()
                .map(|m| m.rows().into_iter().map(|r| r.to_vec()).collect())
                .collect(),
        };
        serde_json::to_string(&raw).expect("dataset serialization cannot fail")
    }
}

/// Converts similarities to dissimilarities as `max_value - s`.
pub fn similarity_to_dissimilarity(
    dataset: &ThreeWayDissimilarity,
    max_value: f64,
) -> Result<ThreeWayDissimilarity> {
    let mut out = Vec::with_capacity(dataset.matrices.len());
    for m in &dataset.matrices {
        if let Some(&bad) = m.iter().find(|&&s| s > max_value) {
            return Err(Error::SimilarityRange {
                value: bad,
                max: max_value,
            });
        }
        out.push(m.mapv(|s| max_value - s));
    }
    dataset.map_matrices(out)
}

/// Replaces entries by their average ranks (1-based). Ties share the mean
/// of the rank positions they occupy; diagonal entries take part.
pub fn rank_transform(
    dataset: &ThreeWayDissimilarity,
    scope: RankScope,
) -> Result<ThreeWayDissimilarity> {
    let matrices = match scope {
        RankScope::PerOccasion => dataset
            .matrices
            .iter()
            .map(|m| {
                let values: Vec<f64> = m.iter().copied().collect();
                let ranks = average_ranks(&values);
                Array2::from_shape_vec(m.raw_dim(), ranks).expect("same length")
            })
            .collect(),
        RankScope::Global => {
            let all: Vec<f64> = dataset.matrices.iter().flat_map(|m| m.iter().copied()).collect();
            let ranks = average_ranks(&all);
            let n = dataset.n_objects();
            ranks
                .chunks(n * n)
                .map(|c| Array2::from_shape_vec((n, n), c.to_vec()).expect("chunk size"))
                .collect()
        }
    };
    dataset.map_matrices(matrices)
}

/// Raises every entry to the power `p`.
pub fn power_transform(dataset: &ThreeWayDissimilarity, p: f64) -> Result<ThreeWayDissimilarity> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::InvalidPower(p));
    }
    let integer = p.fract() == 0.0;
    let mut out = Vec::with_capacity(dataset.matrices.len());
    for m in &dataset.matrices {
        if !integer {
            if let Some(&v) = m.iter().find(|&&v| v < 0.0) {
                return Err(Error::PowerDomain { value: v, power: p });
            }
        }
        out.push(if p == 1.0 { m.clone() } else { m.mapv(|v| v.powf(p)) });
    }
    dataset.map_matrices(out)
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let v = values[order[start]];
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == v {
            end += 1;
        }
        // positions start+1 ..= end, averaged
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

fn find_asymmetry(matrices: &[Array2<f64>]) -> Option<(usize, usize, usize)> {
    for (l, m) in matrices.iter().enumerate() {
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if m[[i, j]] != m[[j, i]] {
                    return Some((l, i, j));
                }
            }
        }
    }
    None
}

#[derive(Default)]
struct Interner {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        i
    }
}

fn csv_error(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

fn csv_field(s: &str) -> std::borrow::Cow<'_, str> {
    if s.contains([',', '"', '\n', '\r']) || s.trim() != s {
        format!("\"{}\"", s.replace('"', "\"\"")).into()
    } else {
        s.into()
    }
}
