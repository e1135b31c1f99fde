//! Least-squares gradient boosted regression trees.
//!
//! Each round fits one depth-limited tree to the current residuals with
//! exact greedy variance-reduction splits. Candidate thresholds are the
//! midpoints between consecutive distinct values of a feature inside the
//! node. Missing values (NaN) go to whichever side gives the larger gain and
//! the choice is stored on the split. Ties in gain keep the lowest feature
//! index, then the lowest threshold, then "missing goes left".
//!
//! Trees are grown level by level: per level, every feature's presorted row
//! order is scanned once and each row updates the running statistics of the
//! node it currently sits in.

use serde::{Deserialize, Serialize};

use super::encoding::{encode_in_time_order, TargetEncoding, DEFAULT_SMOOTHING};
use super::ModelError;
use crate::features::{FeatureSchema, FeatureTable};
use crate::matrix::Matrix;
use crate::scalar::{shifted_mean, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub rounds: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
    /// Recorded with the model. Training itself has no random steps.
    pub seed: u64,
    /// Smoothing weight of the topic target encoding.
    #[serde(default = "default_smoothing")]
    pub encoding_smoothing: f64,
}

fn default_smoothing() -> f64 {
    DEFAULT_SMOOTHING
}

impl Default for TrainParams {
    fn default() -> Self {
        Self {
            rounds: 500,
            max_depth: 6,
            learning_rate: 0.05,
            min_samples_leaf: 20,
            seed: 42,
            encoding_smoothing: DEFAULT_SMOOTHING,
        }
    }
}

impl TrainParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: &str| Err(ModelError::InvalidParams(what.to_string()));
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be positive");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if !(self.encoding_smoothing > 0.0) {
            return bad("encoding_smoothing must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node<T> {
    Split {
        feature: usize,
        threshold: T,
        missing_left: bool,
        left: usize,
        right: usize,
    },
    Leaf {
        value: T,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree<T> {
    pub nodes: Vec<Node<T>>,
}

impl<T: Scalar> Tree<T> {
    /// Index of the leaf `row` lands in.
    pub fn leaf_index(&self, row: &[T]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { .. } => return at,
                Node::Split {
                    feature,
                    threshold,
                    missing_left,
                    left,
                    right,
                } => {
                    let v = row[*feature];
                    let go_left = if v.is_nan() {
                        *missing_left
                    } else {
                        v <= *threshold
                    };
                    at = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, row: &[T]) -> T {
        match self.nodes[self.leaf_index(row)] {
            Node::Leaf { value } => value,
            Node::Split { .. } => unreachable!("leaf_index ends on a leaf"),
        }
    }

    /// Length of the longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        fn walk<T>(nodes: &[Node<T>], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Split { feature, .. } => Some(*feature),
            Node::Leaf { .. } => None,
        })
    }
}

/// The boosted ensemble on a plain numeric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Booster<T> {
    pub initial: T,
    pub learning_rate: T,
    pub trees: Vec<Tree<T>>,
    /// Training MSE after the initial prediction and after each round.
    pub train_mse: Vec<T>,
}

impl<T: Scalar> Booster<T> {
    pub fn fit(x: &Matrix<T>, y: &[T], params: &TrainParams) -> Result<Self, ModelError> {
        params.validate()?;
        let n = x.nrows();
        if n == 0 {
            return Err(ModelError::EmptyTable);
        }
        if n != y.len() {
            return Err(ModelError::LengthMismatch {
                rows: n,
                targets: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteTarget);
        }

        let initial = shifted_mean(y).ok_or(ModelError::EmptyTable)?;
        let learning_rate = T::of(params.learning_rate);
        let grower = Grower::new(x, params);
        let mut leaf_sums = vec![T::zero(); n];
        let mut residual: Vec<T> = y.iter().map(|&v| v - initial).collect();
        let mut train_mse = vec![mse(&residual)];
        let mut trees = Vec::with_capacity(params.rounds);

        for round in 0..params.rounds {
            let tree = grower.grow(&residual);
            for i in 0..n {
                leaf_sums[i] = leaf_sums[i] + tree.predict(x.row(i));
                residual[i] = y[i] - (initial + learning_rate * leaf_sums[i]);
            }
            let loss = mse(&residual);
            let prev = *train_mse.last().expect("seeded with initial loss");
            if loss > prev + prev * T::of(1e-12) {
                return Err(ModelError::LossIncreased {
                    round,
                    before: prev.as_f64(),
                    after: loss.as_f64(),
                });
            }
            train_mse.push(loss);
            trees.push(tree);
        }

        Ok(Self {
            initial,
            learning_rate,
            trees,
            train_mse,
        })
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        let total: T = self.trees.iter().map(|t| t.predict(row)).sum();
        self.initial + self.learning_rate * total
    }

    pub fn predict_matrix(&self, x: &Matrix<T>) -> Vec<T> {
        (0..x.nrows()).map(|i| self.predict_row(x.row(i))).collect()
    }
}

fn mse<T: Scalar>(residual: &[T]) -> T {
    residual.iter().map(|&r| r * r).sum::<T>() / T::of_usize(residual.len())
}

const NO_SLOT: usize = usize::MAX;

/// Presorted column data shared by every round.
struct Grower<T> {
    n: usize,
    columns: Vec<Vec<T>>,
    /// Per feature: (row, value) for rows with a value, ascending by value.
    sorted: Vec<Vec<(usize, T)>>,
    /// Per feature: rows with a missing value.
    missing: Vec<Vec<usize>>,
    max_depth: usize,
    min_leaf: usize,
}

#[derive(Clone, Copy)]
struct NodeStats<T> {
    node: usize,
    sum: T,
    sum_sq: T,
    count: usize,
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    gain: T,
    feature: usize,
    threshold: T,
    missing_left: bool,
}

#[derive(Clone, Copy)]
struct Running<T> {
    sum: T,
    count: usize,
    prev: T,
}

impl<T: Scalar> Grower<T> {
    fn new(x: &Matrix<T>, params: &TrainParams) -> Self {
        let n = x.nrows();
        let mut columns = Vec::with_capacity(x.ncols());
        let mut sorted = Vec::with_capacity(x.ncols());
        let mut missing = Vec::with_capacity(x.ncols());
        for j in 0..x.ncols() {
            let col = x.column(j);
            let (mut present, absent): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| !col[i].is_nan());
            present.sort_by(|&a, &b| {
                col[a]
                    .partial_cmp(&col[b])
                    .expect("NaN filtered")
                    .then(a.cmp(&b))
            });
            sorted.push(present.into_iter().map(|i| (i, col[i])).collect());
            columns.push(col);
            missing.push(absent);
        }
        Self {
            n,
            columns,
            sorted,
            missing,
            max_depth: params.max_depth,
            min_leaf: params.min_samples_leaf,
        }
    }

    fn stats(&self, node: usize, residual: &[T], rows: impl Iterator<Item = usize>) -> NodeStats<T> {
        let mut s = NodeStats {
            node,
            sum: T::zero(),
            sum_sq: T::zero(),
            count: 0,
        };
        for i in rows {
            s.sum = s.sum + residual[i];
            s.sum_sq = s.sum_sq + residual[i] * residual[i];
            s.count += 1;
        }
        s
    }

    fn leaf(stats: &NodeStats<T>) -> Node<T> {
        Node::Leaf {
            value: stats.sum / T::of_usize(stats.count),
        }
    }

    fn splittable(&self, s: &NodeStats<T>) -> bool {
        s.count >= 2 * self.min_leaf && s.count >= 2
    }

    fn grow(&self, residual: &[T]) -> Tree<T> {
        let root = self.stats(0, residual, 0..self.n);
        let mut nodes = vec![Self::leaf(&root)];
        let mut node_of = vec![0usize; self.n];
        let mut frontier: Vec<NodeStats<T>> = if self.splittable(&root) {
            vec![root]
        } else {
            Vec::new()
        };

        for depth in 0..self.max_depth {
            if frontier.is_empty() {
                break;
            }
            let mut slot_of = vec![NO_SLOT; nodes.len()];
            for (slot, s) in frontier.iter().enumerate() {
                slot_of[s.node] = slot;
            }
            let row_slot: Vec<usize> = node_of
                .iter()
                .map(|&node| slot_of.get(node).copied().unwrap_or(NO_SLOT))
                .collect();
            let best = self.best_splits(residual, &row_slot, &frontier);

            // Materialize the chosen splits.
            let mut children: Vec<Option<(usize, usize)>> = vec![None; frontier.len()];
            for (slot, cand) in best.iter().enumerate() {
                let Some(c) = cand else { continue };
                let left = nodes.len();
                let right = left + 1;
                nodes.push(Node::Leaf { value: T::zero() });
                nodes.push(Node::Leaf { value: T::zero() });
                nodes[frontier[slot].node] = Node::Split {
                    feature: c.feature,
                    threshold: c.threshold,
                    missing_left: c.missing_left,
                    left,
                    right,
                };
                children[slot] = Some((left, right));
            }

            let mut child_stats: Vec<NodeStats<T>> = Vec::new();
            let mut child_slot = vec![NO_SLOT; nodes.len()];
            for (slot, pair) in children.iter().enumerate() {
                if let Some((l, r)) = *pair {
                    for node in [l, r] {
                        child_slot[node] = child_stats.len();
                        child_stats.push(NodeStats {
                            node,
                            sum: T::zero(),
                            sum_sq: T::zero(),
                            count: 0,
                        });
                    }
                    let _ = slot;
                }
            }
            for i in 0..self.n {
                let slot = row_slot[i];
                if slot == NO_SLOT {
                    continue;
                }
                let (Some((l, r)), Some(c)) = (children[slot], best[slot]) else {
                    continue;
                };
                let v = self.columns[c.feature][i];
                let go_left = if v.is_nan() {
                    c.missing_left
                } else {
                    v <= c.threshold
                };
                let child = if go_left { l } else { r };
                node_of[i] = child;
                let s = &mut child_stats[child_slot[child]];
                s.sum = s.sum + residual[i];
                s.sum_sq = s.sum_sq + residual[i] * residual[i];
                s.count += 1;
            }
            for s in &child_stats {
                nodes[s.node] = Self::leaf(s);
            }
            frontier = if depth + 1 < self.max_depth {
                child_stats
                    .into_iter()
                    .filter(|s| self.splittable(s))
                    .collect()
            } else {
                Vec::new()
            };
        }
        Tree { nodes }
    }

    fn best_splits(
        &self,
        residual: &[T],
        row_slot: &[usize],
        frontier: &[NodeStats<T>],
    ) -> Vec<Option<Candidate<T>>> {
        let min_leaf = self.min_leaf;
        let mut best: Vec<Option<Candidate<T>>> = vec![None; frontier.len()];
        // Splits must remove more than round-off from the node's squared error.
        let floor: Vec<T> = frontier
            .iter()
            .map(|s| {
                let sse = s.sum_sq - s.sum * s.sum / T::of_usize(s.count);
                sse.max(T::zero()) * T::of(1e-10)
            })
            .collect();
        let parent_score: Vec<T> = frontier
            .iter()
            .map(|s| s.sum * s.sum / T::of_usize(s.count))
            .collect();
        let mut running = vec![
            Running {
                sum: T::zero(),
                count: 0,
                prev: T::zero(),
            };
            frontier.len()
        ];
        let mut miss = vec![(T::zero(), 0usize); frontier.len()];

        for feature in 0..self.columns.len() {
            for r in running.iter_mut() {
                r.sum = T::zero();
                r.count = 0;
            }
            for m in miss.iter_mut() {
                *m = (T::zero(), 0);
            }
            for &i in &self.missing[feature] {
                let slot = row_slot[i];
                if slot != NO_SLOT {
                    miss[slot].0 = miss[slot].0 + residual[i];
                    miss[slot].1 += 1;
                }
            }
            for &(i, v) in &self.sorted[feature] {
                let slot = row_slot[i];
                if slot == NO_SLOT {
                    continue;
                }
                let run = running[slot];
                if run.count > 0 && v > run.prev {
                    let stats = &frontier[slot];
                    let (miss_sum, miss_count) = miss[slot];
                    let right_sum = stats.sum - miss_sum - run.sum;
                    let right_count = stats.count - miss_count - run.count;
                    let mut threshold = run.prev + (v - run.prev) / T::of(2.0);
                    if !(threshold < v) {
                        threshold = run.prev;
                    }
                    for missing_left in [true, false] {
                        let (ls, lc, rs, rc) = if missing_left {
                            (run.sum + miss_sum, run.count + miss_count, right_sum, right_count)
                        } else {
                            (run.sum, run.count, right_sum + miss_sum, right_count + miss_count)
                        };
                        if lc < min_leaf || rc < min_leaf {
                            continue;
                        }
                        let gain = ls * ls / T::of_usize(lc) + rs * rs / T::of_usize(rc)
                            - parent_score[slot];
                        if !(gain > floor[slot]) {
                            continue;
                        }
                        if best[slot].is_none_or(|b| gain > b.gain) {
                            best[slot] = Some(Candidate {
                                gain,
                                feature,
                                threshold,
                                missing_left,
                            });
                        }
                    }
                }
                let run = &mut running[slot];
                run.sum = run.sum + residual[i];
                run.count += 1;
                run.prev = v;
            }
        }
        best
    }
}

/// Boosted trees over a feature table, with the topic entering through an
/// ordered target encoding appended as the last input column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbdtModel<T> {
    pub schema: FeatureSchema,
    pub params: TrainParams,
    pub booster: Booster<T>,
    pub encoding: TargetEncoding<T>,
}

/// Name of the encoded topic column inside the booster's input.
pub const TOPIC_ENCODING_FEATURE: &str = "topic_target_encoding";

impl<T: Scalar> GbdtModel<T> {
    pub fn fit(table: &FeatureTable, targets: &[T], params: &TrainParams) -> Result<Self, ModelError> {
        params.validate()?;
        if table.rows.len() != targets.len() {
            return Err(ModelError::LengthMismatch {
                rows: table.rows.len(),
                targets: targets.len(),
            });
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteTarget);
        }
        let years: Vec<i32> = table.rows.iter().map(|r| r.base_year).collect();
        let topics = table.topic_ids();
        let (encoded, encoding) =
            encode_in_time_order(&years, &topics, targets, T::of(params.encoding_smoothing));
        let x = table.to_matrix::<T>().with_column(&encoded);
        let booster = Booster::fit(&x, targets, params)?;
        Ok(Self {
            schema: table.schema.clone(),
            params: params.clone(),
            booster,
            encoding,
        })
    }

    /// Inputs in schema order followed by the topic encoding.
    pub fn input_row(&self, features: &[Option<f64>], topic: &str) -> Vec<T> {
        let mut row: Vec<T> = features
            .iter()
            .map(|v| v.map_or_else(T::nan, T::of))
            .collect();
        row.push(self.encoding.encode(topic));
        row
    }

    /// Names of the booster's input columns.
    pub fn input_names(&self) -> Vec<String> {
        let mut names = self.schema.names().to_vec();
        names.push(TOPIC_ENCODING_FEATURE.to_string());
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(rounds: usize, depth: usize, min_leaf: usize) -> TrainParams {
        TrainParams {
            rounds,
            max_depth: depth,
            min_samples_leaf: min_leaf,
            ..TrainParams::default()
        }
    }

    fn is_non_increasing(curve: &[f64]) -> bool {
        curve.windows(2).all(|w| w[1] <= w[0])
    }

    #[test]
    fn constant_target_is_a_fixpoint() {
        let x = Matrix::from_fn(50, 3, |i, j| (i * 7 + j * 3) as f64 % 11.0);
        let y = vec![0.1; 50];
        let model = Booster::fit(&x, &y, &params(20, 3, 5)).unwrap();
        assert_eq!(model.initial, 0.1);
        for i in 0..50 {
            assert_eq!(model.predict_row(x.row(i)), 0.1);
        }
        assert!(model.train_mse.iter().all(|&m| m == 0.0));
        assert_eq!(model.predict_row(&[f64::NAN, 1e9, -3.0]), 0.1);
    }

    #[test]
    fn step_function_is_learned() {
        // 200 deterministic rows, target jumps at x0 = 0.5.
        let x = Matrix::from_fn(200, 2, |i, j| {
            if j == 0 {
                i as f64 / 200.0
            } else {
                ((i * 37) % 200) as f64
            }
        });
        let y: Vec<f64> = (0..200).map(|i| if x.get(i, 0) < 0.5 { 1.0 } else { 5.0 }).collect();
        let var = {
            let m = y.iter().sum::<f64>() / 200.0;
            y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / 200.0
        };
        let model = Booster::fit(&x, &y, &params(200, 6, 20)).unwrap();
        assert!(*model.train_mse.last().unwrap() < 0.01 * var);
        assert!(is_non_increasing(&model.train_mse));
        assert_eq!(model.train_mse.len(), 201);
        assert!(model.trees.iter().all(|t| t.depth() <= 6));
        match &model.trees[0].nodes[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                // midpoint between 99/200 and 100/200
                assert!((threshold - 0.4975).abs() < 1e-12);
            }
            other => panic!("expected a split, got {other:?}"),
        }
    }

    #[test]
    fn loss_curve_non_increasing_on_noisy_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = Matrix::from_fn(300, 5, |_, _| {
            if rng.random_bool(0.1) {
                f64::NAN
            } else {
                rng.random_range(-3.0..3.0)
            }
        });
        let y: Vec<f64> = (0..300)
            .map(|i| {
                let a = x.get(i, 0);
                let base = if a.is_nan() { 2.0 } else { a.sin() * 3.0 };
                base + rng.random_range(-1.0..1.0)
            })
            .collect();
        for lr in [0.05, 0.5, 1.0] {
            let p = TrainParams {
                learning_rate: lr,
                ..params(100, 4, 5)
            };
            let model = Booster::fit(&x, &y, &p).unwrap();
            assert!(is_non_increasing(&model.train_mse), "lr={lr}");
        }
    }

    #[test]
    fn missing_values_follow_the_learned_direction() {
        // Missing rows share the target of the high group.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            rows.push(vec![i as f64]);
            y.push(if i < 20 { 0.0 } else { 10.0 });
        }
        for _ in 0..10 {
            rows.push(vec![f64::NAN]);
            y.push(10.0);
        }
        let x = Matrix::from_rows(&rows);
        let model = Booster::fit(&x, &y, &params(1, 1, 5)).unwrap();
        match model.trees[0].nodes[0] {
            Node::Split { missing_left, threshold, .. } => {
                assert!(!missing_left);
                assert_eq!(threshold, 19.5);
            }
            _ => panic!("expected split"),
        }
        let high = model.predict_row(&[30.0]);
        assert_eq!(model.predict_row(&[f64::NAN]), high);
    }

    #[test]
    fn zero_trees_predict_the_initial_value() {
        let model = Booster::<f64> {
            initial: 3.25,
            learning_rate: 0.05,
            trees: Vec::new(),
            train_mse: vec![0.0],
        };
        assert_eq!(model.predict_row(&[1.0, 2.0]), 3.25);
    }

    #[test]
    fn hand_traced_two_leaf_tree() {
        let tree = Tree {
            nodes: vec![
                Node::Split {
                    feature: 1,
                    threshold: 2.5,
                    missing_left: false,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { value: -4.0 },
                Node::Leaf { value: 6.0 },
            ],
        };
        let model = Booster {
            initial: 10.0,
            learning_rate: 0.5,
            trees: vec![tree],
            train_mse: vec![],
        };
        assert_eq!(model.predict_row(&[0.0, 2.0]), 10.0 + 0.5 * -4.0);
        assert_eq!(model.predict_row(&[0.0, 2.5]), 8.0);
        assert_eq!(model.predict_row(&[0.0, 3.0]), 13.0);
        assert_eq!(model.predict_row(&[0.0, f64::NAN]), 13.0);
    }

    #[test]
    fn min_leaf_size_is_respected() {
        let x = Matrix::from_fn(30, 1, |i, _| i as f64);
        let y: Vec<f64> = (0..30).map(|i| (i % 7) as f64).collect();
        let model = Booster::fit(&x, &y, &params(5, 6, 8)).unwrap();
        for tree in &model.trees {
            let mut counts = vec![0usize; tree.nodes.len()];
            for i in 0..30 {
                counts[tree.leaf_index(x.row(i))] += 1;
            }
            for (idx, node) in tree.nodes.iter().enumerate() {
                if matches!(node, Node::Leaf { .. }) {
                    assert!(counts[idx] >= 8, "leaf {idx} has {}", counts[idx]);
                }
            }
        }
    }

    #[test]
    fn thresholds_lie_between_observed_values() {
        // Powers of two: the midpoint of two distinct values is never a value.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Matrix::from_fn(120, 3, |_, _| 2f64.powi(rng.random_range(0..20)));
        let y: Vec<f64> = (0..120).map(|i| x.get(i, 0).log2() * 2.0 - x.get(i, 2).log2()).collect();
        let model = Booster::fit(&x, &y, &params(30, 4, 3)).unwrap();
        let mut splits = 0;
        for tree in &model.trees {
            for node in &tree.nodes {
                if let Node::Split { feature, threshold, .. } = node {
                    splits += 1;
                    let col = x.column(*feature);
                    assert!(!col.contains(threshold));
                    let is_midpoint = col
                        .iter()
                        .any(|&u| u < *threshold && col.contains(&(2.0 * threshold - u)));
                    assert!(is_midpoint, "threshold {threshold}");
                }
            }
        }
        assert!(splits > 0);
    }

    #[test]
    fn fitting_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Matrix::from_fn(150, 4, |_, _| rng.random_range(-1.0_f64..1.0));
        let y: Vec<f64> = (0..150).map(|i| x.get(i, 1).powi(2) + x.get(i, 3)).collect();
        let a = Booster::fit(&x, &y, &params(40, 5, 4)).unwrap();
        let b = Booster::fit(&x, &y, &params(40, 5, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = Matrix::<f64>::zeros(0, 2);
        assert!(matches!(Booster::fit(&x, &[], &TrainParams::default()), Err(ModelError::EmptyTable)));
        let x = Matrix::from_fn(3, 1, |i, _| i as f64);
        assert!(matches!(
            Booster::fit(&x, &[1.0, f64::NAN, 2.0], &TrainParams::default()),
            Err(ModelError::NonFiniteTarget)
        ));
        let p = TrainParams {
            learning_rate: 1.5,
            ..TrainParams::default()
        };
        assert!(matches!(Booster::fit(&x, &[1.0, 2.0, 3.0], &p), Err(ModelError::InvalidParams(_))));
    }

    #[test]
    fn single_precision_booster() {
        let x = Matrix::from_fn(100, 1, |i, _| i as f32);
        let y: Vec<f32> = (0..100).map(|i| if i < 50 { -1.0 } else { 1.0 }).collect();
        let model = Booster::fit(&x, &y, &params(100, 2, 10)).unwrap();
        assert!(model.predict_row(&[10.0]) < -0.9);
        assert!(model.predict_row(&[90.0]) > 0.9);
    }
}
