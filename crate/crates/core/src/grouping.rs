//! Coalition structure over the training data: partitioning (by label or by
//! k-means on service-model logits), Owen-style mask re-expansion, and the
//! grouped exact Shapley values used as oracles for the grouped explainers.

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{self, ModelParams};
use crate::rng;
use crate::shapley::{exact_shapley, ShapleyVector};
use crate::utility::{Game, SubsetMask, MAX_ENUM_PLAYERS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupingMethod {
    ByLabel,
    KmeansLogits,
}

/// N disjoint, nonempty index groups covering {0,…,n−1}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    #[serde(rename = "N")]
    pub n_groups: usize,
    pub groups: Vec<Vec<usize>>,
    pub method: GroupingMethod,
    #[serde(skip)]
    group_of: Vec<usize>,
}

impl GroupPartition {
    pub fn new(groups: Vec<Vec<usize>>, n: usize, method: GroupingMethod) -> Result<Self> {
        let n_groups = groups.len();
        if n_groups == 0 || n_groups > n {
            return Err(Error::Partition(format!("invalid group count {n_groups} for n={n}")));
        }
        let mut group_of = vec![usize::MAX; n];
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::Partition(format!("group {g} is empty")));
            }
            for &i in members {
                if i >= n {
                    return Err(Error::Partition(format!("index {i} out of range")));
                }
                if group_of[i] != usize::MAX {
                    return Err(Error::Partition(format!("index {i} appears twice")));
                }
                group_of[i] = g;
            }
        }
        if group_of.contains(&usize::MAX) {
            return Err(Error::Partition("groups do not cover all indices".into()));
        }
        Ok(GroupPartition { n_groups, groups, method, group_of })
    }

    /// Rebuild the index→group map (needed after deserialization).
    pub fn reindex(self, n: usize) -> Result<Self> {
        Self::new(self.groups, n, self.method)
    }

    pub fn n(&self) -> usize {
        self.group_of.len()
    }

    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    /// Reduced player count when a datum of group g plays: |G_g| + N − 1.
    pub fn coalition_size(&self, g: usize) -> usize {
        self.groups[g].len() + self.n_groups - 1
    }
}

/// Group the training data: by true label (requires N = class count) or by
/// k-means over the service model's logits (k-means++ init, 100 iterations,
/// lowest-index tie-breaking, empty clusters repaired from the largest).
pub fn psi_partition(
    data: &Dataset,
    params: &ModelParams,
    n_groups: usize,
    method: GroupingMethod,
    seed: u64,
) -> Result<GroupPartition> {
    let n = data.n();
    if n_groups == 0 || n_groups > n {
        return Err(Error::Partition(format!("N={n_groups} out of range for n={n}")));
    }
    match method {
        GroupingMethod::ByLabel => {
            if n_groups != data.m {
                return Err(Error::Partition(format!(
                    "by-label requires N = m ({}), got {n_groups}",
                    data.m
                )));
            }
            let mut groups = vec![Vec::new(); n_groups];
            for (i, &l) in data.labels.iter().enumerate() {
                groups[l].push(i);
            }
            // A class absent from the data leaves an empty group; reject.
            GroupPartition::new(groups, n, method)
        }
        GroupingMethod::KmeansLogits => {
            let points: Vec<Vec<f64>> = data
                .features
                .iter()
                .map(|x| model::logits(params, x))
                .collect::<Result<_>>()?;
            let assignment = kmeans(&points, n_groups, seed);
            let mut groups = vec![Vec::new(); n_groups];
            for (i, &g) in assignment.iter().enumerate() {
                groups[g].push(i);
            }
            GroupPartition::new(groups, n, method)
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<usize> {
    use rand::Rng;
    let n = points.len();
    let mut rng = rng::rng_from(rng::combine(seed, 0x6b6d_6561_6e73));
    // k-means++ seeding
    let mut centers: Vec<Vec<f64>> = vec![points[rng.gen_range(0..n)].clone()];
    while centers.len() < k {
        let d2: Vec<f64> = points
            .iter()
            .map(|p| centers.iter().map(|c| sq_dist(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut u = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in d2.iter().enumerate() {
                if u < *w {
                    pick = i;
                    break;
                }
                u -= w;
            }
            pick
        };
        centers.push(points[next].clone());
    }

    let mut assignment = vec![0usize; n];
    for _iter in 0..100 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(p, center);
                if d < best_d {
                    // strict inequality: ties go to the lowest cluster index
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        // recompute centers
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter().enumerate() {
            counts[assignment[i]] += 1;
            for (s, v) in sums[assignment[i]].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }

    // Repair empty clusters by stealing from the largest.
    loop {
        let mut counts = vec![0usize; k];
        for &g in &assignment {
            counts[g] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else { break };
        let largest = counts
            .iter()
            .enumerate()
            .max_by_key(|(_, &c)| c)
            .map(|(g, _)| g)
            .unwrap();
        let victim = assignment.iter().position(|&g| g == largest).unwrap();
        assignment[victim] = empty;
    }
    assignment
}

/// Expand a reduced coalition mask to the full n players. The reduced
/// player order for datum j is: members of j's group in ascending index
/// order, then the other groups in group order as atomic macro-players.
pub fn gfds_expand(
    datum: usize,
    partition: &GroupPartition,
    reduced: &SubsetMask,
) -> Result<SubsetMask> {
    let g = partition.group_of(datum);
    expand_for_group(g, partition, reduced)
}

fn expand_for_group(
    g: usize,
    partition: &GroupPartition,
    reduced: &SubsetMask,
) -> Result<SubsetMask> {
    let expected = partition.coalition_size(g);
    if reduced.len() != expected {
        return Err(Error::Dimension { expected, got: reduced.len() });
    }
    let n = partition.n();
    let mut full = SubsetMask::zeros(n);
    let in_group = &partition.groups[g];
    for (t, &i) in in_group.iter().enumerate() {
        if reduced.get(t) {
            full.set(i, true);
        }
    }
    let mut t = in_group.len();
    for (other, members) in partition.groups.iter().enumerate() {
        if other == g {
            continue;
        }
        if reduced.get(t) {
            for &i in members {
                full.set(i, true);
            }
        }
        t += 1;
    }
    Ok(full)
}

/// Reduced game for one group: in-group players individual, other groups atomic.
struct ReducedGame<'a, G: Game> {
    game: &'a G,
    partition: &'a GroupPartition,
    group: usize,
}

impl<G: Game> Game for ReducedGame<'_, G> {
    fn num_players(&self) -> usize {
        self.partition.coalition_size(self.group)
    }

    fn eval(&self, mask: &SubsetMask) -> f64 {
        let full = expand_for_group(self.group, self.partition, mask).expect("sized by contract");
        self.game.eval(&full)
    }
}

/// Group-as-player game over N macro-players.
struct GroupGame<'a, G: Game> {
    game: &'a G,
    partition: &'a GroupPartition,
}

impl<G: Game> Game for GroupGame<'_, G> {
    fn num_players(&self) -> usize {
        self.partition.n_groups
    }

    fn eval(&self, mask: &SubsetMask) -> f64 {
        let mut full = SubsetMask::zeros(self.partition.n());
        for g in mask.members() {
            for &i in &self.partition.groups[g] {
                full.set(i, true);
            }
        }
        self.game.eval(&full)
    }
}

/// Exact per-datum values under the grouped coalition structure: each datum
/// is scored as a player of its reduced |G|+N−1 game. With N=1 or N=n this
/// coincides with the plain exact Shapley values.
pub fn gfds_exact_values<G: Game>(game: &G, partition: &GroupPartition) -> Result<Vec<f64>> {
    let n = partition.n();
    if let Some(g) = (0..partition.n_groups).find(|&g| partition.coalition_size(g) > MAX_ENUM_PLAYERS)
    {
        return Err(Error::Capacity(format!(
            "group {g} needs {} players (> {MAX_ENUM_PLAYERS})",
            partition.coalition_size(g)
        )));
    }
    let mut values = vec![0.0; n];
    for g in 0..partition.n_groups {
        let reduced = ReducedGame { game, partition, group: g };
        let sv = exact_shapley(&reduced)?;
        for (t, &i) in partition.groups[g].iter().enumerate() {
            values[i] = sv.values[t];
        }
    }
    Ok(values)
}

/// Group-level exact Shapley values over the N-player macro game, split
/// evenly inside each group.
pub fn gfds_plus_values<G: Game>(game: &G, partition: &GroupPartition) -> Result<Vec<f64>> {
    if partition.n_groups > MAX_ENUM_PLAYERS {
        return Err(Error::Capacity(format!(
            "N={} macro-players exceeds {MAX_ENUM_PLAYERS}",
            partition.n_groups
        )));
    }
    let sv = group_shapley(game, partition)?;
    let mut values = vec![0.0; partition.n()];
    for (g, members) in partition.groups.iter().enumerate() {
        let share = sv.values[g] / members.len() as f64;
        for &i in members {
            values[i] = share;
        }
    }
    Ok(values)
}

/// Exact Shapley values of the N macro-players themselves.
pub fn group_shapley<G: Game>(game: &G, partition: &GroupPartition) -> Result<ShapleyVector> {
    exact_shapley(&GroupGame { game, partition })
}

/// Per-group reduced coalition sizes |G_j|+N−1 and the group attaining the
/// minimum, for overhead reporting.
pub fn coalition_sizes(partition: &GroupPartition) -> (Vec<usize>, usize) {
    let sizes: Vec<usize> = (0..partition.n_groups).map(|g| partition.coalition_size(g)).collect();
    let argmin = sizes
        .iter()
        .enumerate()
        .min_by_key(|(_, &s)| s)
        .map(|(g, _)| g)
        .unwrap();
    (sizes, argmin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate, SyntheticKind, SyntheticSpec};
    use crate::model::{init, Architecture};
    use crate::utility::TabularGame;

    fn singleton_partition(n: usize) -> GroupPartition {
        GroupPartition::new((0..n).map(|i| vec![i]).collect(), n, GroupingMethod::ByLabel).unwrap()
    }

    fn whole_partition(n: usize) -> GroupPartition {
        GroupPartition::new(vec![(0..n).collect()], n, GroupingMethod::ByLabel).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn partition_invariants_enforced() {
        assert!(GroupPartition::new(vec![vec![0], vec![0]], 2, GroupingMethod::ByLabel).is_err());
        assert!(GroupPartition::new(vec![vec![0], vec![]], 2, GroupingMethod::ByLabel).is_err());
        assert!(GroupPartition::new(vec![vec![0]], 2, GroupingMethod::ByLabel).is_err());
        assert!(GroupPartition::new(vec![vec![0], vec![5]], 2, GroupingMethod::ByLabel).is_err());
    }

    #[test]
    fn by_label_partition_balanced() {
        let data = generate(&SyntheticSpec {
            kind: SyntheticKind::GaussianBlobs,
            n: 20,
            d: 2,
            m: 2,
            noise_std: 0.3,
            seed: 4,
        })
        .unwrap();
        let params = init(Architecture::logistic(2, 2), 1).unwrap();
        let p = psi_partition(&data, &params, 2, GroupingMethod::ByLabel, 0).unwrap();
        assert_eq!(p.groups[0].len(), 10);
        assert_eq!(p.groups[1].len(), 10);
        assert!(psi_partition(&data, &params, 3, GroupingMethod::ByLabel, 0).is_err());
        assert!(psi_partition(&data, &params, 21, GroupingMethod::ByLabel, 0).is_err());
    }

    #[test]
    fn kmeans_partition_deterministic() {
        let data = generate(&SyntheticSpec {
            kind: SyntheticKind::GaussianBlobs,
            n: 18,
            d: 2,
            m: 3,
            noise_std: 0.3,
            seed: 6,
        })
        .unwrap();
        let params = init(Architecture::logistic(2, 3), 2).unwrap();
        let a = psi_partition(&data, &params, 3, GroupingMethod::KmeansLogits, 11).unwrap();
        let b = psi_partition(&data, &params, 3, GroupingMethod::KmeansLogits, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.groups.iter().all(|g| !g.is_empty()));
    }

    #[test]
    fn expand_hand_example() {
        // n=4, groups {0,1},{2,3}, datum 0, reduced (1,0 | 1) → (1,0,1,1)
        let p = GroupPartition::new(vec![vec![0, 1], vec![2, 3]], 4, GroupingMethod::ByLabel)
            .unwrap();
        let reduced = SubsetMask::from_bits(vec![true, false, true]);
        let full = gfds_expand(0, &p, &reduced).unwrap();
        assert_eq!(full.members(), vec![0, 2, 3]);

        let zeros = gfds_expand(0, &p, &SubsetMask::zeros(3)).unwrap();
        assert!(zeros.is_empty());
        let ones = gfds_expand(0, &p, &SubsetMask::ones(3)).unwrap();
        assert!(ones.is_full());

        assert!(gfds_expand(0, &p, &SubsetMask::zeros(4)).is_err());
    }

    #[test]
    fn expand_is_injective() {
        let p = GroupPartition::new(vec![vec![0, 2], vec![1], vec![3, 4]], 5, GroupingMethod::ByLabel)
            .unwrap();
        let size = p.coalition_size(0);
        let mut seen = std::collections::HashSet::new();
        for idx in 0..1u64 << size {
            let full = gfds_expand(0, &p, &SubsetMask::from_index(idx, size)).unwrap();
            assert!(seen.insert(full.to_index()), "collision at {idx}");
        }
    }

    #[test]
    fn degenerate_partitions_match_exact() {
        for seed in 0..5u64 {
            let game = TabularGame::random(6, 40 + seed).unwrap();
            let exact = exact_shapley(&game).unwrap();
            let one = gfds_exact_values(&game, &whole_partition(6)).unwrap();
            assert_close(&one, &exact.values, 1e-9);
            let n = gfds_exact_values(&game, &singleton_partition(6)).unwrap();
            assert_close(&n, &exact.values, 1e-9);
            // glove-style check through GFDS+ with singletons
            let plus = gfds_plus_values(&game, &singleton_partition(6)).unwrap();
            assert_close(&plus, &exact.values, 1e-9);
        }
    }

    #[test]
    fn gfds_plus_additive_split() {
        let game = TabularGame::additive(&[0.2, 0.5, 0.3]).unwrap();
        let p = GroupPartition::new(vec![vec![0], vec![1, 2]], 3, GroupingMethod::ByLabel).unwrap();
        let plus = gfds_plus_values(&game, &p).unwrap();
        assert_close(&plus, &[0.2, 0.4, 0.4], 1e-12);

        let constant = TabularGame::new(3, vec![0.4; 8]).unwrap();
        let plus = gfds_plus_values(&constant, &p).unwrap();
        assert_close(&plus, &[0.0, 0.0, 0.0], 1e-12);
    }

    /// Inter-group additive game: v(s) = Σ_g u_g(s ∩ G_g) with random
    /// per-group tables. Satisfies the decomposition condition exactly.
    pub(crate) fn inter_group_additive(
        partition: &GroupPartition,
        seed: u64,
    ) -> TabularGame {
        use rand::Rng;
        let n = partition.n();
        let mut rng = rng::rng_from(seed);
        // per-group utility tables over the group's local masks, u_g(∅)=0
        let tables: Vec<Vec<f64>> = partition
            .groups
            .iter()
            .map(|g| {
                let mut t: Vec<f64> = (0..1usize << g.len()).map(|_| rng.gen::<f64>()).collect();
                t[0] = 0.0;
                t
            })
            .collect();
        let table = (0..1u64 << n)
            .map(|idx| {
                partition
                    .groups
                    .iter()
                    .zip(&tables)
                    .map(|(members, t)| {
                        let local = members
                            .iter()
                            .enumerate()
                            .fold(0usize, |acc, (b, &i)| {
                                if idx >> i & 1 == 1 {
                                    acc | 1 << b
                                } else {
                                    acc
                                }
                            });
                        t[local]
                    })
                    .sum()
            })
            .collect();
        TabularGame::new(n, table).unwrap()
    }

    #[test]
    fn lemma_group_value_equals_member_sum() {
        for seed in 0..10u64 {
            let p = GroupPartition::new(
                vec![vec![0, 1, 2], vec![3, 4], vec![5]],
                6,
                GroupingMethod::ByLabel,
            )
            .unwrap();
            let game = inter_group_additive(&p, 500 + seed);
            let exact = exact_shapley(&game).unwrap();
            let group_sv = group_shapley(&game, &p).unwrap();
            for (g, members) in p.groups.iter().enumerate() {
                let member_sum: f64 = members.iter().map(|&i| exact.values[i]).sum();
                assert!(
                    (group_sv.values[g] - member_sum).abs() < 1e-9,
                    "group {g}: {} vs {}",
                    group_sv.values[g],
                    member_sum
                );
                // and equals v(G_g) − v(∅)
                let mut mask = SubsetMask::zeros(6);
                for &i in members {
                    mask.set(i, true);
                }
                let direct = game.eval(&mask) - game.v_zero();
                assert!((group_sv.values[g] - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn theorem_spread_bound() {
        for seed in 0..10u64 {
            let p = GroupPartition::new(
                vec![vec![0, 1, 2, 3], vec![4, 5, 6]],
                7,
                GroupingMethod::ByLabel,
            )
            .unwrap();
            let game = inter_group_additive(&p, 900 + seed);
            let exact = exact_shapley(&game).unwrap();
            let plus = gfds_plus_values(&game, &p).unwrap();
            for (g, members) in p.groups.iter().enumerate() {
                let values = &exact.values;
                let eps = members
                    .iter()
                    .flat_map(|&k| members.iter().map(move |&j| (values[k] - values[j]).abs()))
                    .fold(0.0, f64::max);
                let bound = (1.0 - 1.0 / members.len() as f64) * eps;
                for &j in members {
                    assert!(
                        (plus[j] - exact.values[j]).abs() <= bound + 1e-9,
                        "group {g}, datum {j}"
                    );
                }
            }
        }
    }

    #[test]
    fn coalition_size_formula() {
        let equal = |n: usize, k: usize| -> GroupPartition {
            let groups = (0..k).map(|g| (g * n / k..(g + 1) * n / k).collect()).collect();
            GroupPartition::new(groups, n, GroupingMethod::ByLabel).unwrap()
        };
        let (sizes, _) = coalition_sizes(&equal(100, 10));
        assert!(sizes.iter().all(|&s| s == 19));
        let (sizes, _) = coalition_sizes(&equal(100, 5));
        assert!(sizes.iter().all(|&s| s == 24));
        let (sizes, _) = coalition_sizes(&equal(100, 20));
        assert!(sizes.iter().all(|&s| s == 24));
        let (sizes, _) = coalition_sizes(&whole_partition(7));
        assert_eq!(sizes, vec![7]);
    }

    #[test]
    fn partition_json_format() {
        let p = GroupPartition::new(vec![vec![0, 1], vec![2]], 3, GroupingMethod::ByLabel).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"N\":2"));
        assert!(json.contains("\"groups\":[[0,1],[2]]"));
        assert!(json.contains("\"method\":\"by-label\""));
        let back: GroupPartition = serde_json::from_str(&json).unwrap();
        let back = back.reindex(3).unwrap();
        assert_eq!(back, p);
    }
}
