//! REINFORCE objective and update for the sequence generator.

use ndarray::Array2;

use super::MooError;
use crate::neural::{GeneratorModel, Sgd, TokenSequence};

/// `J = (1/N) sum_i R_i * log p(seq_i)` and its gradient.
pub fn policy_gradient(g: &GeneratorModel, episodes: &[(TokenSequence, f64)]) -> Result<(f64, Vec<Array2<f64>>), MooError> {
    if episodes.is_empty() {
        return Err(MooError::EmptyEpisodes);
    }
    if let Some(&(_, r)) = episodes.iter().find(|(_, r)| !(0.0..=1.0).contains(r)) {
        return Err(MooError::RewardRange(r));
    }
    let n = episodes.len() as f64;
    let seqs: Vec<TokenSequence> = episodes.iter().map(|(s, _)| s.clone()).collect();
    let weights: Vec<f64> = episodes.iter().map(|(_, r)| r / n).collect();
    Ok(g.weighted_log_prob_gradient(&seqs, &weights))
}

/// One ascent step on `J`. A zero gradient leaves the parameters untouched.
/// Returns `J` at the pre-update parameters.
pub fn policy_gradient_update(
    g: &mut GeneratorModel,
    opt: &mut Sgd,
    episodes: &[(TokenSequence, f64)],
) -> Result<f64, MooError> {
    let (j, grads) = policy_gradient(g, episodes)?;
    if grads.iter().all(|a| a.iter().all(|&x| x == 0.0)) {
        return Ok(j);
    }
    let ascent: Vec<Array2<f64>> = grads.into_iter().map(|a| -a).collect();
    opt.step(&mut g.params, &ascent);
    Ok(j)
}
