//! Molecular descriptors: physicochemical properties, QED and synthetic
//! accessibility.

pub mod crippen;
pub mod properties;
pub mod qed;
pub mod sa;

pub use crippen::crippen_logp;
pub use properties::{compute_properties, matched_alerts, PropertyVector};
pub use qed::{qed, qed_from_properties, QED_EPSILON};
pub use sa::{sa_breakdown, sa_score, stereo_center_count, FragmentScoreTable, SaBreakdown, SaError};
