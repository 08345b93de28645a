//! Small datasets bundled in the long CSV format.

use crate::dataset::{Conditionality, LoadOptions, SymmetryDecl, ThreeWayDissimilarity};
use crate::error::Result;

/// Citation-based dissimilarities between four statistics journals (AP, SF,
/// SU, TH); rows cite, columns are cited. Asymmetric and non-reflexive.
pub const JOURNALS_CSV: &str = include_str!("../data/journals.csv");

/// Message exchanges among four people (A-D) on two occasions, given as
/// similarities with maximum 50.
pub const ARTIFICIAL_CSV: &str = include_str!("../data/artificial.csv");

pub const ARTIFICIAL_SIMILARITY_MAX: f64 = 50.0;

pub fn journals() -> Result<ThreeWayDissimilarity> {
    ThreeWayDissimilarity::read_long_csv(JOURNALS_CSV.as_bytes(), LoadOptions::default())
}

/// The artificial exchange data converted to dissimilarities.
pub fn artificial(conditionality: Conditionality) -> Result<ThreeWayDissimilarity> {
    ThreeWayDissimilarity::read_long_csv(
        ARTIFICIAL_CSV.as_bytes(),
        LoadOptions {
            similarity_max: Some(ARTIFICIAL_SIMILARITY_MAX),
            conditionality,
            symmetry: SymmetryDecl::Auto,
        },
    )
}

/// Looks up a bundled fixture by name (`journals` or `artificial`).
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "journals" => Some(JOURNALS_CSV),
        "artificial" => Some(ARTIFICIAL_CSV),
        _ => None,
    }
}
