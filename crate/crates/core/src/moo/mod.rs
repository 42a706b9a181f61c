//! Multi-objective reinforcement learning: Pareto ranking with crowding
//! distance, episode selection, REINFORCE updates and the training loop.

pub mod pareto;
pub mod policy;
pub mod rl;

pub use pareto::{
    crowding_distance, dominates, non_dominated_sort, objective_matrix, rank_population, select_by_reward,
    select_episodes, ParetoRanking,
};
pub use policy::{policy_gradient, policy_gradient_update};
pub use rl::{fraction_desirable, reports_csv, rl_train, sample_and_score, RlConfig, RlIterationReport};

use thiserror::Error;

use crate::neural::NeuralError;
use crate::scorers::ScorerError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MooError {
    #[error("empty population")]
    EmptyPopulation,
    #[error("objectives: {0}")]
    Objectives(String),
    #[error("no episodes to learn from")]
    EmptyEpisodes,
    #[error("reward {0} outside [0, 1]")]
    RewardRange(f64),
    #[error("iteration {iteration}: {source}")]
    Scoring { iteration: usize, source: ScorerError },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("{0}")]
    Io(String),
}
