//! The sample, score, rank, select, update loop.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pareto::{objective_matrix, rank_population, select_by_reward, select_episodes};
use super::policy::policy_gradient_update;
use super::MooError;
use crate::neural::{GeneratorModel, Sgd, SgdConfig, TokenSequence};
use crate::scorers::{ScoreVector, ScorerError, ScorerRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RlConfig {
    pub iterations: usize,
    pub batch_size: usize,
    /// Share of each batch entering the gradient step.
    pub select_fraction: f64,
    pub temperature: f64,
    pub sgd: SgdConfig,
    /// Rank by Pareto front and crowding distance; otherwise by reward alone.
    pub crowding: bool,
    /// Save a checkpoint every this many iterations; 0 disables.
    pub checkpoint_every: usize,
    pub seed: u64,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            iterations: 50,
            batch_size: 512,
            select_fraction: 0.5,
            temperature: 1.0,
            sgd: SgdConfig { learning_rate: 0.05, momentum: 0.9, clip_norm: 5.0 },
            crowding: true,
            checkpoint_every: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RlIterationReport {
    pub iteration: usize,
    pub mean_reward: f64,
    pub fraction_valid: f64,
    pub fraction_desirable: f64,
    /// Mean clipped value per active objective.
    pub objective_means: Vec<(String, f64)>,
    pub selected: usize,
}

/// Samples `n` sequences and scores their SMILES; ids are `{prefix}{k:05}`.
pub fn sample_and_score(
    g: &GeneratorModel,
    registry: &ScorerRegistry,
    n: usize,
    temperature: f64,
    rng: &mut ChaCha8Rng,
    prefix: &str,
) -> Result<(Vec<TokenSequence>, Vec<ScoreVector>), ScorerError> {
    let seqs = g.sample(n, temperature, rng);
    let items: Vec<(String, String)> =
        seqs.iter().enumerate().map(|(k, s)| (format!("{prefix}{k:05}"), g.smiles(s))).collect();
    let vectors = registry.evaluate_batch(&items)?;
    Ok((seqs, vectors))
}

pub fn fraction_desirable(vectors: &[ScoreVector]) -> f64 {
    vectors.iter().filter(|v| v.desirable).count() as f64 / vectors.len().max(1) as f64
}

/// Runs `config.iterations` policy-gradient iterations on `g` in place.
pub fn rl_train(
    g: &mut GeneratorModel,
    registry: &ScorerRegistry,
    config: &RlConfig,
    checkpoint_dir: Option<&Path>,
) -> Result<Vec<RlIterationReport>, MooError> {
    let objectives: Vec<String> = registry.active_names().iter().map(|s| s.to_string()).collect();
    if objectives.is_empty() {
        return Err(MooError::Scoring { iteration: 0, source: ScorerError::EmptyActiveSet });
    }
    let obj_refs: Vec<&str> = objectives.iter().map(String::as_str).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut opt = Sgd::new(config.sgd, &g.params);
    let mut reports = Vec::with_capacity(config.iterations);
    for iteration in 1..=config.iterations {
        let scoring = |source| MooError::Scoring { iteration, source };
        let prefix = format!("it{iteration:04}_");
        let (seqs, vectors) =
            sample_and_score(g, registry, config.batch_size, config.temperature, &mut rng, &prefix).map_err(scoring)?;
        let rewards = vectors.iter().map(|v| registry.reward(v)).collect::<Result<Vec<_>, _>>().map_err(scoring)?;
        let ids: Vec<&str> = vectors.iter().map(|v| v.id.as_str()).collect();
        let selected = if config.crowding {
            let points = objective_matrix(&vectors, &obj_refs).map_err(scoring)?;
            select_episodes(&rank_population(&points)?, &ids, config.select_fraction)
        } else {
            select_by_reward(&rewards, &ids, config.select_fraction)
        };
        let episodes: Vec<(TokenSequence, f64)> = selected.iter().map(|&i| (seqs[i].clone(), rewards[i])).collect();
        policy_gradient_update(g, &mut opt, &episodes)?;

        let n = vectors.len().max(1) as f64;
        let objective_means = objectives
            .iter()
            .map(|o| {
                let s: f64 = vectors.iter().map(|v| v.clipped(o).unwrap_or(0.0)).sum();
                (o.clone(), s / n)
            })
            .collect();
        let report = RlIterationReport {
            iteration,
            mean_reward: rewards.iter().sum::<f64>() / n,
            fraction_valid: vectors.iter().filter(|v| v.valid).count() as f64 / n,
            fraction_desirable: fraction_desirable(&vectors),
            objective_means,
            selected: episodes.len(),
        };
        log::info!(
            "rl iteration {} reward {:.4} valid {:.3} desirable {:.3}",
            iteration,
            report.mean_reward,
            report.fraction_valid,
            report.fraction_desirable
        );
        reports.push(report);
        if let Some(dir) = checkpoint_dir {
            if config.checkpoint_every > 0 && iteration % config.checkpoint_every == 0 {
                g.save(&dir.join(format!("rl_iter{iteration:04}.ckpt")))?;
            }
        }
    }
    Ok(reports)
}

/// Iteration log: `iteration,mean_reward,fraction_valid,fraction_desirable,selected,<objective>_mean...`.
pub fn reports_csv(reports: &[RlIterationReport], config_hash: &str) -> String {
    let mut out = format!("# config_hash={config_hash}\niteration,mean_reward,fraction_valid,fraction_desirable,selected");
    if let Some(first) = reports.first() {
        for (name, _) in &first.objective_means {
            out.push_str(&format!(",{name}_mean"));
        }
    }
    out.push('\n');
    for r in reports {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{}",
            r.iteration, r.mean_reward, r.fraction_valid, r.fraction_desirable, r.selected
        ));
        for (_, v) in &r.objective_means {
            out.push_str(&format!(",{v:.6}"));
        }
        out.push('\n');
    }
    out
}
