//! CART classification trees with Gini impurity.
//!
//! Two split strategies are supported. `Best` scans every feature and every
//! midpoint between consecutive distinct values. `Random` draws one threshold
//! per non-constant feature, uniformly inside the open interval spanned by the
//! node's values, and keeps the best of those draws. Rows with
//! `value <= threshold` go left.
//!
//! Class labels are `1..=n_classes`; leaf histograms are indexed by `label - 1`.
//! Ties are broken towards the lowest feature index, then the smallest
//! threshold, and at the leaves towards the lowest class id.

use std::cmp::Ordering;

use rand::distr::Open01;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of real features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl FeatureMatrix {
    pub fn from_vec(data: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::LengthMismatch {
                expected: n_rows * n_cols,
                actual: data.len(),
            });
        }
        Ok(Self { data, n_rows, n_cols })
    }

    pub fn from_rows<S: AsRef<[f64]>>(rows: &[S]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::LengthMismatch {
                    expected: n_cols,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(data, rows.len(), n_cols)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitStrategy {
    Best,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub split_strategy: SplitStrategy,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    /// Per-node feature subsample size. `None` considers every feature,
    /// which is what spline trees use; the random forest baseline sets it.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            split_strategy: SplitStrategy::Best,
            min_samples_split: 2,
            max_depth: None,
            max_features: None,
        }
    }
}

impl TreeParams {
    pub fn with_strategy(split_strategy: SplitStrategy) -> Self {
        Self {
            split_strategy,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::InvalidConfig(format!(
                "min_samples_split must be >= 2, got {}",
                self.min_samples_split
            )));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidConfig("max_depth must be >= 1".into()));
        }
        if self.max_features == Some(0) {
            return Err(Error::InvalidConfig("max_features must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature_index: usize,
    pub threshold: f64,
    pub impurity_decrease: f64,
}

/// Exact impurity decrease of a split, scaled by the node size:
/// `n * decrease = num / den`. Candidates at one node share `n`, so ranking
/// by this fraction ranks by decrease without rounding, and exact ties fall
/// through to the feature/threshold rule.
#[derive(Debug, Clone, Copy)]
struct Gain {
    num: u128,
    den: u128,
}

impl Gain {
    fn cmp(&self, other: &Gain) -> Ordering {
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => (self.num as f64 / self.den as f64).total_cmp(&(other.num as f64 / other.den as f64)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Scored {
    candidate: SplitCandidate,
    gain: Gain,
}

impl Scored {
    fn beats(&self, other: &Scored) -> bool {
        match self.gain.cmp(&other.gain) {
            Ordering::Equal => {
                let (a, b) = (&self.candidate, &other.candidate);
                (a.feature_index, a.threshold) < (b.feature_index, b.threshold)
            }
            ord => ord == Ordering::Greater,
        }
    }
}

/// Gini impurity `1 - sum_z (n_z / n)^2` of a class histogram.
pub fn gini(counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(gini_of(counts, n))
}

fn gini_of(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

fn impurity_decrease(parent_gini: f64, left: &[usize], n_left: usize, right: &[usize], n_right: usize) -> f64 {
    let n = (n_left + n_right) as f64;
    parent_gini - (n_left as f64 / n) * gini_of(left, n_left) - (n_right as f64 / n) * gini_of(right, n_right)
}

/// Exact gain of a split, or `None` unless it strictly lowers weighted Gini
/// impurity.
///
/// `n * decrease = sum l^2 / n_l + sum r^2 / n_r - sum p^2 / n`, held in
/// integers after clearing denominators.
fn exact_gain(parent: &[usize], left: &[usize], n_left: usize, right: &[usize], n_right: usize) -> Option<Gain> {
    let sq = |h: &[usize]| h.iter().map(|&c| (c as u128) * (c as u128)).sum::<u128>();
    let (nl, nr) = (n_left as u128, n_right as u128);
    let n = nl + nr;
    let pos = sq(left) * nr * n + sq(right) * nl * n;
    let neg = sq(parent) * nl * nr;
    (pos > neg).then(|| Gain {
        num: pos - neg,
        den: nl * nr * n,
    })
}

fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    // adjacent floats: keep the threshold strictly below b
    if mid >= b {
        a
    } else {
        mid
    }
}

fn check_labels(labels: &[usize], n_classes: usize) -> Result<()> {
    match labels.iter().find(|&&l| l == 0 || l > n_classes) {
        Some(&label) => Err(Error::InvalidLabel { label, n_classes }),
        None => Ok(()),
    }
}

/// Outcome of scanning one feature.
enum FeatureScan {
    Constant,
    Scanned(Option<Scored>),
}

struct Splitter<'a> {
    x: &'a FeatureMatrix,
    labels: &'a [usize],
    n_classes: usize,
    pairs: Vec<(f64, usize)>,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl<'a> Splitter<'a> {
    fn new(x: &'a FeatureMatrix, labels: &'a [usize], n_classes: usize) -> Self {
        Self {
            x,
            labels,
            n_classes,
            pairs: Vec::new(),
            left: vec![0; n_classes],
            right: vec![0; n_classes],
        }
    }

    fn histogram(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.labels[r] - 1] += 1;
        }
        counts
    }

    fn scan_best(&mut self, rows: &[usize], feature: usize, parent: &[usize], parent_gini: f64) -> FeatureScan {
        self.pairs.clear();
        self.pairs
            .extend(rows.iter().map(|&r| (self.x.get(r, feature), self.labels[r])));
        self.pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = self.pairs.len();
        if self.pairs[0].0 == self.pairs[n - 1].0 {
            return FeatureScan::Constant;
        }
        self.left.fill(0);
        let mut best: Option<Scored> = None;
        for i in 0..n - 1 {
            self.left[self.pairs[i].1 - 1] += 1;
            let (a, b) = (self.pairs[i].0, self.pairs[i + 1].0);
            if a == b {
                continue;
            }
            for z in 0..self.n_classes {
                self.right[z] = parent[z] - self.left[z];
            }
            let (n_left, n_right) = (i + 1, n - i - 1);
            let Some(gain) = exact_gain(parent, &self.left, n_left, &self.right, n_right) else {
                continue;
            };
            // thresholds ascend, so a strict comparison keeps the smallest on ties
            if best.is_none_or(|b| gain.cmp(&b.gain) == Ordering::Greater) {
                best = Some(Scored {
                    candidate: SplitCandidate {
                        feature_index: feature,
                        threshold: midpoint(a, b),
                        impurity_decrease: impurity_decrease(parent_gini, &self.left, n_left, &self.right, n_right),
                    },
                    gain,
                });
            }
        }
        FeatureScan::Scanned(best)
    }

    fn scan_random<R: Rng + ?Sized>(
        &mut self,
        rows: &[usize],
        feature: usize,
        parent: &[usize],
        parent_gini: f64,
        rng: &mut R,
    ) -> FeatureScan {
        let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            let v = self.x.get(r, feature);
            (lo.min(v), hi.max(v))
        });
        if lo == hi {
            return FeatureScan::Constant;
        }
        let u: f64 = rng.sample(Open01);
        let threshold = lo + u * (hi - lo);
        if !(lo < threshold && threshold < hi) {
            return FeatureScan::Scanned(None);
        }
        self.left.fill(0);
        let mut n_left = 0;
        for &r in rows {
            if self.x.get(r, feature) <= threshold {
                self.left[self.labels[r] - 1] += 1;
                n_left += 1;
            }
        }
        for z in 0..self.n_classes {
            self.right[z] = parent[z] - self.left[z];
        }
        let n_right = rows.len() - n_left;
        FeatureScan::Scanned(
            exact_gain(parent, &self.left, n_left, &self.right, n_right).map(|gain| Scored {
                candidate: SplitCandidate {
                    feature_index: feature,
                    threshold,
                    impurity_decrease: impurity_decrease(parent_gini, &self.left, n_left, &self.right, n_right),
                },
                gain,
            }),
        )
    }

    fn scan<R: Rng + ?Sized>(
        &mut self,
        strategy: SplitStrategy,
        rows: &[usize],
        feature: usize,
        parent: &[usize],
        parent_gini: f64,
        rng: &mut R,
    ) -> FeatureScan {
        match strategy {
            SplitStrategy::Best => self.scan_best(rows, feature, parent, parent_gini),
            SplitStrategy::Random => self.scan_random(rows, feature, parent, parent_gini, rng),
        }
    }

    /// Best candidate over the features allowed by `max_features`.
    ///
    /// Without subsampling every feature is scanned in ascending order. With
    /// a subsample size `m < K`, features are visited in a fresh random
    /// permutation and the search stops once `m` non-constant features have
    /// been scanned and some valid split has been found.
    fn find<R: Rng + ?Sized>(
        &mut self,
        params: &TreeParams,
        rows: &[usize],
        parent: &[usize],
        rng: &mut R,
    ) -> Option<SplitCandidate> {
        let k = self.x.n_cols();
        let parent_gini = gini_of(parent, rows.len());
        let mut best: Option<Scored> = None;
        let consider = |scan: FeatureScan, best: &mut Option<Scored>| -> bool {
            match scan {
                FeatureScan::Constant => false,
                FeatureScan::Scanned(cand) => {
                    if let Some(c) = cand {
                        if best.is_none_or(|b| c.beats(&b)) {
                            *best = Some(c);
                        }
                    }
                    true
                }
            }
        };
        match params.max_features.filter(|&m| m < k) {
            None => {
                for f in 0..k {
                    let scan = self.scan(params.split_strategy, rows, f, parent, parent_gini, rng);
                    consider(scan, &mut best);
                }
            }
            Some(m) => {
                let mut order: Vec<usize> = (0..k).collect();
                order.shuffle(rng);
                let mut visited = 0;
                for f in order {
                    if visited >= m && best.is_some() {
                        break;
                    }
                    let scan = self.scan(params.split_strategy, rows, f, parent, parent_gini, rng);
                    if consider(scan, &mut best) {
                        visited += 1;
                    }
                }
            }
        }
        best.map(|b| b.candidate)
    }
}

fn check_subset(x: &FeatureMatrix, labels: &[usize], n_classes: usize, rows: &[usize]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptySubset);
    }
    if labels.len() != x.n_rows() {
        return Err(Error::LengthMismatch {
            expected: x.n_rows(),
            actual: labels.len(),
        });
    }
    if let Some(&bad) = rows.iter().find(|&&r| r >= x.n_rows()) {
        return Err(Error::InvalidConfig(format!("row index {bad} out of range")));
    }
    check_labels(labels, n_classes)
}

/// Exhaustive split search over every feature and midpoint.
pub fn best_split(
    x: &FeatureMatrix,
    labels: &[usize],
    n_classes: usize,
    rows: &[usize],
) -> Result<Option<SplitCandidate>> {
    check_subset(x, labels, n_classes, rows)?;
    let mut splitter = Splitter::new(x, labels, n_classes);
    let parent = splitter.histogram(rows);
    // the best strategy never touches the generator
    let mut unused = ChaCha8Rng::seed_from_u64(0);
    Ok(splitter.find(&TreeParams::default(), rows, &parent, &mut unused))
}

/// One uniform threshold per non-constant feature, in ascending feature
/// order, one `Open01` draw each; returns the best of the drawn candidates.
pub fn random_split<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    labels: &[usize],
    n_classes: usize,
    rows: &[usize],
    rng: &mut R,
) -> Result<Option<SplitCandidate>> {
    check_subset(x, labels, n_classes, rows)?;
    let mut splitter = Splitter::new(x, labels, n_classes);
    let parent = splitter.histogram(rows);
    Ok(splitter.find(&TreeParams::with_strategy(SplitStrategy::Random), rows, &parent, rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    n_features: usize,
    n_classes: usize,
    params: TreeParams,
    seed: u64,
}

impl DecisionTree {
    /// Grows a tree on all rows of `x`, seeding its generator from `seed`.
    pub fn fit(x: &FeatureMatrix, labels: &[usize], n_classes: usize, params: &TreeParams, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..x.n_rows()).collect();
        Self::fit_rows(x, labels, n_classes, rows, params, &mut rng, seed)
    }

    /// Grows a tree on a row multiset (duplicates allowed, as produced by
    /// bootstrap resampling), drawing any randomness from `rng`.
    ///
    /// Nodes are expanded depth-first, left child before right, so the order
    /// of generator draws is fixed by the data alone.
    pub fn fit_rows<R: Rng + ?Sized>(
        x: &FeatureMatrix,
        labels: &[usize],
        n_classes: usize,
        rows: Vec<usize>,
        params: &TreeParams,
        rng: &mut R,
        seed: u64,
    ) -> Result<Self> {
        params.validate()?;
        if rows.is_empty() || x.n_rows() == 0 {
            return Err(Error::EmptyTrainingSet);
        }
        check_subset(x, labels, n_classes, &rows)?;

        let mut splitter = Splitter::new(x, labels, n_classes);
        let mut nodes = vec![Node::Leaf { counts: Vec::new() }];
        let mut stack = vec![(0usize, rows, 0usize)];
        while let Some((id, rows, depth)) = stack.pop() {
            let counts = splitter.histogram(&rows);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
            let split = if pure || rows.len() < params.min_samples_split || depth_reached {
                None
            } else {
                splitter.find(params, &rows, &counts, rng)
            };
            let Some(split) = split else {
                nodes[id] = Node::Leaf { counts };
                continue;
            };
            let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                .iter()
                .partition(|&&r| x.get(r, split.feature_index) <= split.threshold);
            debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
            let left = nodes.len();
            let right = left + 1;
            nodes.push(Node::Leaf { counts: Vec::new() });
            nodes.push(Node::Leaf { counts: Vec::new() });
            nodes[id] = Node::Split {
                feature: split.feature_index,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, right_rows, depth + 1));
            stack.push((left, left_rows, depth + 1));
        }
        Ok(Self {
            nodes,
            n_features: x.n_cols(),
            n_classes,
            params: params.clone(),
            seed,
        })
    }

    /// Assembles a tree from explicit nodes; node 0 is the root.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize, n_classes: usize) -> Result<Self> {
        let tree = Self {
            nodes,
            n_features,
            n_classes,
            params: TreeParams::default(),
            seed: 0,
        };
        tree.validate()?;
        Ok(tree)
    }

    /// Structural checks used when trees come from outside (files, hand-built).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Format(msg));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut seen[id], true) {
                return bad(format!("node {id} is reachable twice"));
            }
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= self.n_features || !threshold.is_finite() {
                        return bad(format!("node {id} has an invalid split"));
                    }
                    for &child in [left, right] {
                        if child >= self.nodes.len() || child == 0 {
                            return bad(format!("node {id} has an invalid child {child}"));
                        }
                        stack.push(child);
                    }
                }
                Node::Leaf { counts } => {
                    if counts.len() != self.n_classes || counts.iter().all(|&c| c == 0) {
                        return bad(format!("leaf {id} has an invalid histogram"));
                    }
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return bad("tree has unreachable nodes".into());
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, d)) = stack.pop() {
            max = max.max(d);
            if let Node::Split { left, right, .. } = self.nodes[id] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        max
    }

    /// Class histogram of the leaf `row` lands in.
    pub fn leaf_counts(&self, row: &[f64]) -> Result<&[usize]> {
        self.check_width(row)?;
        Ok(self.leaf_unchecked(row))
    }

    pub fn predict(&self, row: &[f64]) -> Result<usize> {
        self.check_width(row)?;
        Ok(self.predict_unchecked(row))
    }

    pub(crate) fn predict_unchecked(&self, row: &[f64]) -> usize {
        majority(self.leaf_unchecked(row))
    }

    fn leaf_unchecked(&self, row: &[f64]) -> &[usize] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features {
            return Err(Error::LengthMismatch {
                expected: self.n_features,
                actual: row.len(),
            });
        }
        Ok(())
    }
}

/// 1-based class id with the most counts; ties go to the lowest id.
pub fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (z, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = z;
        }
    }
    best + 1
}
