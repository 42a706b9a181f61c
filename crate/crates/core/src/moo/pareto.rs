//! Non-dominated sorting, crowding distance and episode selection. Every
//! objective is maximised.

use std::cmp::Ordering;

use super::MooError;
use crate::scorers::{ScoreVector, ScorerError};

/// True when `a` is at least as good as `b` everywhere and better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut better = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            better = true;
        }
    }
    better
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoRanking {
    /// Fronts of solution indices, front 0 non-dominated; ascending within a front.
    pub fronts: Vec<Vec<usize>>,
    /// Front index per solution.
    pub rank: Vec<usize>,
    /// Crowding distance per solution, computed within its front.
    pub crowding: Vec<f64>,
}

/// Clipped objective values, one row per score vector.
pub fn objective_matrix(pop: &[ScoreVector], objectives: &[&str]) -> Result<Vec<Vec<f64>>, ScorerError> {
    pop.iter()
        .map(|v| objectives.iter().map(|o| v.clipped(o)).collect::<Result<Vec<_>, _>>())
        .collect()
}

/// Fast non-dominated sort.
pub fn non_dominated_sort(points: &[Vec<f64>]) -> Result<Vec<Vec<usize>>, MooError> {
    let n = points.len();
    if n == 0 {
        return Err(MooError::EmptyPopulation);
    }
    let m = points[0].len();
    if points.iter().any(|p| p.len() != m) {
        return Err(MooError::Objectives("objective counts differ across solutions".into()));
    }
    if points.iter().flatten().any(|x| !x.is_finite()) {
        return Err(MooError::Objectives("non-finite objective value".into()));
    }
    let mut dominated_by = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&points[i], &points[j]) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominates_list[j].push(i);
                dominated_by[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(fronts)
}

/// Crowding distance of each member of `front`, in `front` order. Per
/// objective, the extreme members get +inf and interior members add the
/// neighbour gap divided by the objective's range over the front; a
/// zero-range objective adds nothing.
pub fn crowding_distance(points: &[Vec<f64>], front: &[usize]) -> Vec<f64> {
    let k = front.len();
    let mut cd = vec![0.0; k];
    if k == 0 {
        return cd;
    }
    let m = points[front[0]].len();
    let mut order: Vec<usize> = (0..k).collect();
    for obj in 0..m {
        let val = |i: usize| points[front[i]][obj];
        order.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(front[a].cmp(&front[b])));
        let (lo, hi) = (val(order[0]), val(order[k - 1]));
        cd[order[0]] = f64::INFINITY;
        cd[order[k - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..k.saturating_sub(1) {
            let i = order[w];
            if cd[i].is_finite() {
                cd[i] += (val(order[w + 1]) - val(order[w - 1])) / range;
            }
        }
    }
    cd
}

/// Fronts plus crowding distances for a population.
pub fn rank_population(points: &[Vec<f64>]) -> Result<ParetoRanking, MooError> {
    let fronts = non_dominated_sort(points)?;
    let mut rank = vec![0; points.len()];
    let mut crowding = vec![0.0; points.len()];
    for (r, front) in fronts.iter().enumerate() {
        for (&i, d) in front.iter().zip(crowding_distance(points, front)) {
            rank[i] = r;
            crowding[i] = d;
        }
    }
    Ok(ParetoRanking { fronts, rank, crowding })
}

/// The first `ceil(fraction * n)` solutions ordered by front rank ascending,
/// crowding distance descending, then `ids` ascending.
pub fn select_episodes<K: Ord>(ranking: &ParetoRanking, ids: &[K], fraction: f64) -> Vec<usize> {
    let n = ranking.rank.len();
    let take = ((fraction.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        ranking.rank[a]
            .cmp(&ranking.rank[b])
            .then_with(|| ranking.crowding[b].partial_cmp(&ranking.crowding[a]).unwrap_or(Ordering::Equal))
            .then_with(|| ids[a].cmp(&ids[b]))
    });
    order.truncate(take);
    order
}

/// Selection without crowding: reward descending, then `ids` ascending.
pub fn select_by_reward<K: Ord>(rewards: &[f64], ids: &[K], fraction: f64) -> Vec<usize> {
    let n = rewards.len();
    let take = ((fraction.clamp(0.0, 1.0) * n as f64).ceil() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| rewards[b].total_cmp(&rewards[a]).then_with(|| ids[a].cmp(&ids[b])));
    order.truncate(take);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutual_non_dominance() {
        let p = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]];
        assert_eq!(non_dominated_sort(&p).unwrap(), vec![vec![0, 1, 2]]);
        assert_eq!(non_dominated_sort(&[vec![0.3]]).unwrap(), vec![vec![0]]);
        assert!(non_dominated_sort(&[]).is_err());
    }

    #[test]
    fn crowding_examples() {
        let p = vec![vec![0.0], vec![0.4], vec![1.0]];
        assert_eq!(crowding_distance(&p, &[0, 1, 2]), vec![f64::INFINITY, 1.0, f64::INFINITY]);
        let two = vec![vec![0.2, 0.8], vec![0.8, 0.2]];
        assert!(crowding_distance(&two, &[0, 1]).iter().all(|d| d.is_infinite()));
        let same = vec![vec![0.5, 0.5]; 4];
        let cd = crowding_distance(&same, &[0, 1, 2, 3]);
        assert_eq!(cd.iter().filter(|d| d.is_infinite()).count(), 2);
        assert_eq!(cd.iter().filter(|&&d| d == 0.0).count(), 2);
    }

    #[test]
    fn selection_examples() {
        let p = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0], vec![0.5, 0.5]];
        let r = rank_population(&p).unwrap();
        let ids = ["a", "b", "c", "d"];
        assert_eq!(select_episodes(&r, &ids, 1.0).len(), 4);
        let mut front0 = select_episodes(&r, &ids, 0.75);
        front0.sort_unstable();
        assert_eq!(front0, vec![0, 1, 3]);
    }
}
