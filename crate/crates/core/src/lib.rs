//! Euclidean embedding of two-mode three-way dissimilarity data by h-plots,
//! with archetypoid analysis and k-medoids clustering of the resulting
//! profiles.
//!
//! The usual pipeline is
//!
//! ```
//! use triway_core::{fixtures, threeway, archetypoid, clustering, Conditionality};
//!
//! let data = fixtures::artificial(Conditionality::Unconditional).unwrap();
//! let profiles = threeway::project(&data, 2).unwrap();
//! assert_eq!(profiles.y.dim(), (4, 8));
//!
//! let ada = archetypoid::ada(profiles.y.view(), 2).unwrap();
//! let pam = clustering::pam(profiles.y.view(), 2).unwrap();
//! assert_eq!(ada.indices.len(), pam.medoids.len());
//! ```

pub mod archetypoid;
pub mod clustering;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod hplot;
pub mod oracle;
pub mod records;
pub mod threeway;

pub use archetypoid::{ada, elbow, rss_curve, solve_alphas, AdaResult, Elbow};
pub use clustering::{auto_k, auto_k_with_scores, pam, silhouette, ClusterResult, Quality};
pub use dataset::{
    power_transform, rank_transform, similarity_to_dissimilarity, Conditionality, LoadOptions, RankScope,
    SymmetryDecl, ThreeWayDissimilarity,
};
pub use error::{Error, Result};
pub use hplot::{covariance, gof, hplot, sym_eigen, HPlotResult};
pub use threeway::{
    arrange, asymmetry_report, correlate_covariate, nearest_profiles, project, ArrangedMatrix, AsymmetryReport,
    Case, Direction, DirectionChoice, ProfileMatrix, ProfileTag,
};
