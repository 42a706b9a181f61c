//! Evaluation protocol: rediscovery rates, generation-volume sweeps, motif
//! search, warhead distances and chemical-space projection.

pub mod motifs;
pub mod pose;
pub mod projection;
pub mod run;

pub use motifs::{builtin_motifs, motif_search, motif_table, MotifHit, MotifHits, BUILTIN_MOTIFS};
pub use pose::{warhead_distance, PoseFile};
pub use projection::{project_chemical_space, projection_csv, projection_svg, Projection};
pub use run::{
    format_rate, rediscovery_rate, rediscovery_table, reference_keys, sweep_table, volume_sweep, GenerationRun,
    Rediscovery, RunCounts, RunRecord, SweepRow,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("run table line {line}: {message}")]
    Run { line: usize, message: String },
    #[error("pose file line {line}: {message}")]
    Pose { line: usize, message: String },
    #[error("pose has {pose} atoms but the molecule has {molecule}")]
    AtomCountMismatch { pose: usize, molecule: usize },
    #[error("no warhead atoms tagged")]
    NoWarhead,
    #[error("projection needs at least 2 molecules, got {0}")]
    TooFewMolecules(usize),
    #[error("projection: {0}")]
    Projection(String),
    #[error("volume sweep: {0}")]
    Scales(String),
}
