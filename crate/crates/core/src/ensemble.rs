//! Randomized spline tree ensembles and a random forest baseline.
//!
//! Each RST member draws its own spline order `o_t` and basis count `K_t`,
//! fits every training series on that basis and grows a CART tree on the
//! resulting coefficient matrix. New series are refitted on each member's
//! basis (same sample grid as training) and the members vote.
//!
//! Randomness is per member: member `t` owns a ChaCha8 stream seeded with
//! [`tree_seed`]`(master_seed, t)` and consumes it in a fixed order: the
//! order draw, the basis-count draw, `N` bootstrap indices when enabled, and
//! then whatever the split strategy needs while the tree grows. Results do
//! not depend on how members are scheduled across threads.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bspline::{BSplineBasis, CoefficientMatrix, DesignMatrix};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tree::{DecisionTree, FeatureMatrix, SplitStrategy, TreeParams};

pub const FORMAT_NAME: &str = "rst-ensemble";
pub const FORMAT_VERSION: u32 = 1;

/// The four named RST configurations: split strategy and bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// best splits, no bootstrap
    RstB,
    /// random splits, no bootstrap
    RstR,
    /// best splits with bootstrap
    RstBB,
    /// random splits with bootstrap
    RstRB,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::RstB, Variant::RstR, Variant::RstBB, Variant::RstRB];

    pub fn name(self) -> &'static str {
        match self {
            Variant::RstB => "RST-B",
            Variant::RstR => "RST-R",
            Variant::RstBB => "RST-BB",
            Variant::RstRB => "RST-RB",
        }
    }

    /// Name the same configuration carries in listings that swap the two
    /// bootstrap labels (best+bootstrap called "RST-RB" and vice versa).
    pub fn swapped_label(self) -> &'static str {
        match self {
            Variant::RstBB => "RST-RB",
            Variant::RstRB => "RST-BB",
            other => other.name(),
        }
    }

    pub fn split_strategy(self) -> SplitStrategy {
        match self {
            Variant::RstB | Variant::RstBB => SplitStrategy::Best,
            Variant::RstR | Variant::RstRB => SplitStrategy::Random,
        }
    }

    pub fn bootstrap(self) -> bool {
        matches!(self, Variant::RstBB | Variant::RstRB)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown RST variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RstConfig {
    pub n_estimators: usize,
    pub o_min: usize,
    pub o_max: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Caps each drawn basis count at the series length. When off, counts
    /// above the length give rank-deficient designs fitted by minimum norm.
    pub cap_num_basis: bool,
    pub split_strategy: SplitStrategy,
    pub bootstrap: bool,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub master_seed: u64,
}

impl Default for RstConfig {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            o_min: 3,
            o_max: 9,
            k_min: 11,
            k_max: 50,
            cap_num_basis: true,
            split_strategy: SplitStrategy::Best,
            bootstrap: false,
            min_samples_split: 2,
            max_depth: None,
            master_seed: 0,
        }
    }
}

impl RstConfig {
    pub fn for_variant(variant: Variant) -> Self {
        Self {
            split_strategy: variant.split_strategy(),
            bootstrap: variant.bootstrap(),
            ..Self::default()
        }
    }

    pub fn variant(&self) -> Variant {
        match (self.split_strategy, self.bootstrap) {
            (SplitStrategy::Best, false) => Variant::RstB,
            (SplitStrategy::Random, false) => Variant::RstR,
            (SplitStrategy::Best, true) => Variant::RstBB,
            (SplitStrategy::Random, true) => Variant::RstRB,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_estimators == 0 {
            return Err(Error::InvalidConfig("n_estimators must be >= 1".into()));
        }
        let ok = 1 <= self.o_min && self.o_min <= self.o_max && self.o_max <= self.k_min && self.k_min <= self.k_max;
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= o_min <= o_max <= k_min <= k_max, got o in [{}, {}], K in [{}, {}]",
                self.o_min, self.o_max, self.k_min, self.k_max
            )));
        }
        self.tree_params().validate()
    }

    pub fn tree_params(&self) -> TreeParams {
        TreeParams {
            split_strategy: self.split_strategy,
            min_samples_split: self.min_samples_split,
            max_depth: self.max_depth,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfConfig {
    pub n_estimators: usize,
    /// Features tried per node; `None` means `ceil(sqrt(P))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    pub seed: u64,
}

impl Default for RfConfig {
    fn default() -> Self {
        Self {
            n_estimators: 100,
            max_features: None,
            bootstrap: true,
            min_samples_split: 2,
            max_depth: None,
            seed: 0,
        }
    }
}

/// What an ensemble was trained as.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelSpec {
    Rst(RstConfig),
    RandomForest(RfConfig),
}

/// One member's basis parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaDraw {
    pub order: usize,
    /// Effective basis count: the drawn count, capped at `P` when capping is on.
    pub num_basis: usize,
    pub drawn_num_basis: usize,
    pub clamped: bool,
}

/// Draws `o ~ U{o_min..=o_max}` then `K ~ U{k_min..=k_max}`, capping `K` at
/// the series length when the config asks for it.
pub fn sample_theta<R: Rng + ?Sized>(rng: &mut R, config: &RstConfig, series_length: usize) -> ThetaDraw {
    let order = rng.random_range(config.o_min..=config.o_max);
    let drawn = rng.random_range(config.k_min..=config.k_max);
    let num_basis = if config.cap_num_basis {
        drawn.min(series_length)
    } else {
        drawn
    };
    ThetaDraw {
        order,
        num_basis,
        drawn_num_basis: drawn,
        clamped: num_basis < drawn,
    }
}

/// Seed of member `index` (0-based): SplitMix64 finalizer over the master
/// seed combined with the mixed index.
pub fn tree_seed(master_seed: u64, index: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(master_seed ^ mix(index as u64))
}

/// Majority vote over 1-based class ids; ties go to the lowest id.
pub fn vote<I: IntoIterator<Item = usize>>(predictions: I, n_classes: usize) -> usize {
    let mut tally = vec![0usize; n_classes];
    for p in predictions {
        tally[p - 1] += 1;
    }
    crate::tree::majority(&tally)
}

#[derive(Debug, Clone)]
enum Representation {
    Spline(DesignMatrix),
    Raw,
}

impl Representation {
    fn features(&self, series: &[f64]) -> Vec<f64> {
        match self {
            Representation::Spline(dm) => {
                let mut out = vec![0.0; dm.num_basis()];
                dm.fit_into(series, &mut out);
                out
            }
            Representation::Raw => series.to_vec(),
        }
    }

    fn width(&self, series_length: usize) -> usize {
        match self {
            Representation::Spline(dm) => dm.num_basis(),
            Representation::Raw => series_length,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Member {
    theta: Option<ThetaDraw>,
    representation: usize,
    tree: DecisionTree,
    seed: u64,
}

impl Member {
    pub fn theta(&self) -> Option<ThetaDraw> {
        self.theta
    }

    pub fn tree(&self) -> &DecisionTree {
        &self.tree
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchPrediction {
    pub labels: Vec<usize>,
    pub accuracy: f64,
}

/// Range of drawn parameters across an RST ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThetaSummary {
    pub order_min: usize,
    pub order_max: usize,
    pub num_basis_min: usize,
    pub num_basis_max: usize,
    pub distinct_bases: usize,
    pub clamped: usize,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    spec: ModelSpec,
    representations: Vec<Representation>,
    members: Vec<Member>,
    n_classes: usize,
    series_length: usize,
}

impl Ensemble {
    /// Trains a randomized spline tree ensemble.
    pub fn fit_rst(train: &Dataset, config: &RstConfig) -> Result<Self> {
        config.validate()?;
        let p = train.series_length();
        if config.o_max > p {
            return Err(Error::InvalidConfig(format!(
                "o_max = {} exceeds the series length {p}",
                config.o_max
            )));
        }

        let mut streams = Vec::with_capacity(config.n_estimators);
        let mut thetas = Vec::with_capacity(config.n_estimators);
        for t in 0..config.n_estimators {
            let seed = tree_seed(config.master_seed, t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            thetas.push(sample_theta(&mut rng, config, p));
            streams.push((seed, rng));
        }

        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut unique = Vec::new();
        let rep_of: Vec<usize> = thetas
            .iter()
            .map(|th| {
                *index.entry((th.order, th.num_basis)).or_insert_with(|| {
                    unique.push((th.order, th.num_basis));
                    unique.len() - 1
                })
            })
            .collect();

        let built: Vec<(DesignMatrix, FeatureMatrix)> = unique
            .par_iter()
            .map(|&(o, k)| {
                let dm = DesignMatrix::new(&BSplineBasis::new(o, k)?, p)?;
                let coeffs = CoefficientMatrix::from_design(&dm, train.series())?;
                Ok((dm, coeffs.into_features()))
            })
            .collect::<Result<_>>()?;

        let params = config.tree_params();
        let features: Vec<&FeatureMatrix> = built.iter().map(|(_, f)| f).collect();
        let members = grow_members(train, &params, config.bootstrap, streams, &rep_of, &features)?
            .into_iter()
            .zip(&thetas)
            .map(|(mut m, th)| {
                m.theta = Some(*th);
                m
            })
            .collect();

        Ok(Self {
            spec: ModelSpec::Rst(config.clone()),
            representations: built.into_iter().map(|(dm, _)| Representation::Spline(dm)).collect(),
            members,
            n_classes: train.n_classes(),
            series_length: p,
        })
    }

    /// Trains a random forest on raw series values: bootstrap rows, per-node
    /// feature subsampling, exhaustive splits.
    pub fn fit_rf(train: &Dataset, config: &RfConfig) -> Result<Self> {
        if config.n_estimators == 0 {
            return Err(Error::InvalidConfig("n_estimators must be >= 1".into()));
        }
        let p = train.series_length();
        let mtry = config
            .max_features
            .unwrap_or_else(|| (p as f64).sqrt().ceil() as usize)
            .clamp(1, p);
        let params = TreeParams {
            split_strategy: SplitStrategy::Best,
            min_samples_split: config.min_samples_split,
            max_depth: config.max_depth,
            max_features: Some(mtry),
        };
        params.validate()?;
        let raw = FeatureMatrix::from_rows(train.series())?;
        let streams = (0..config.n_estimators)
            .map(|t| {
                let seed = tree_seed(config.seed, t);
                (seed, ChaCha8Rng::seed_from_u64(seed))
            })
            .collect();
        let rep_of = vec![0; config.n_estimators];
        let members = grow_members(train, &params, config.bootstrap, streams, &rep_of, &[&raw])?;
        Ok(Self {
            spec: ModelSpec::RandomForest(config.clone()),
            representations: vec![Representation::Raw],
            members,
            n_classes: train.n_classes(),
            series_length: p,
        })
    }

    /// Forest of `n_estimators` bootstrapped trees with `mtry` features per
    /// node (`None` for `ceil(sqrt(P))`).
    pub fn fit_rf_baseline(train: &Dataset, n_estimators: usize, mtry: Option<usize>, seed: u64) -> Result<Self> {
        let config = RfConfig {
            n_estimators,
            max_features: mtry,
            seed,
            ..RfConfig::default()
        };
        Self::fit_rf(train, &config)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn n_members(&self) -> usize {
        self.members.len()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn series_length(&self) -> usize {
        self.series_length
    }

    /// Number of distinct feature representations (distinct bases for RST).
    pub fn n_representations(&self) -> usize {
        self.representations.len()
    }

    /// Design matrix member `i` fits new series with; `None` for raw-value members.
    pub fn member_design(&self, i: usize) -> Option<&DesignMatrix> {
        match &self.representations[self.members[i].representation] {
            Representation::Spline(dm) => Some(dm),
            Representation::Raw => None,
        }
    }

    pub fn member_basis(&self, i: usize) -> Option<&BSplineBasis> {
        self.member_design(i).map(DesignMatrix::basis)
    }

    /// Distinct spline designs with the number of members using each.
    pub(crate) fn spline_groups(&self) -> Result<Vec<(&DesignMatrix, usize)>> {
        let mut counts = vec![0usize; self.representations.len()];
        for m in &self.members {
            counts[m.representation] += 1;
        }
        self.representations
            .iter()
            .zip(counts)
            .filter(|(_, c)| *c > 0)
            .map(|(r, c)| match r {
                Representation::Spline(dm) => Ok((dm, c)),
                Representation::Raw => Err(Error::NoSplineRepresentation),
            })
            .collect()
    }

    /// First `n` members as a standalone ensemble.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.members.len() {
            return Err(Error::InvalidConfig(format!(
                "prefix size {n} outside 1..={}",
                self.members.len()
            )));
        }
        let mut out = self.clone();
        out.members.truncate(n);
        Ok(out)
    }

    fn check_length(&self, series: &[f64]) -> Result<()> {
        if series.len() != self.series_length {
            return Err(Error::LengthMismatch {
                expected: self.series_length,
                actual: series.len(),
            });
        }
        Ok(())
    }

    /// Each member's predicted class for `series`, in member order. Fits are
    /// shared between members with identical bases.
    pub fn member_votes(&self, series: &[f64]) -> Result<Vec<usize>> {
        self.check_length(series)?;
        let features: Vec<Vec<f64>> = self.representations.iter().map(|r| r.features(series)).collect();
        Ok(self
            .members
            .iter()
            .map(|m| m.tree.predict_unchecked(&features[m.representation]))
            .collect())
    }

    pub fn predict(&self, series: &[f64]) -> Result<usize> {
        Ok(vote(self.member_votes(series)?, self.n_classes))
    }

    pub fn predict_batch(&self, data: &Dataset) -> Result<BatchPrediction> {
        let labels = data
            .series()
            .par_iter()
            .map(|s| self.predict(s))
            .collect::<Result<Vec<_>>>()?;
        let accuracy = accuracy(&labels, data.labels());
        Ok(BatchPrediction { labels, accuracy })
    }

    /// Accuracy of the first-`n` vote for every `n` in `sizes`, from one pass
    /// over the members.
    pub fn prefix_accuracies(&self, data: &Dataset, sizes: &[usize]) -> Result<Vec<f64>> {
        if let Some(&bad) = sizes.iter().find(|&&n| n == 0 || n > self.members.len()) {
            return Err(Error::InvalidConfig(format!(
                "prefix size {bad} outside 1..={}",
                self.members.len()
            )));
        }
        let votes = data
            .series()
            .par_iter()
            .map(|s| self.member_votes(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(sizes
            .iter()
            .map(|&n| {
                let preds: Vec<usize> = votes
                    .iter()
                    .map(|v| vote(v[..n].iter().copied(), self.n_classes))
                    .collect();
                accuracy(&preds, data.labels())
            })
            .collect())
    }

    pub fn theta_summary(&self) -> Option<ThetaSummary> {
        let thetas: Vec<ThetaDraw> = self.members.iter().filter_map(|m| m.theta).collect();
        if thetas.is_empty() {
            return None;
        }
        Some(ThetaSummary {
            order_min: thetas.iter().map(|t| t.order).min()?,
            order_max: thetas.iter().map(|t| t.order).max()?,
            num_basis_min: thetas.iter().map(|t| t.num_basis).min()?,
            num_basis_max: thetas.iter().map(|t| t.num_basis).max()?,
            distinct_bases: self.representations.len(),
            clamped: thetas.iter().filter(|t| t.clamped).count(),
        })
    }

    pub fn to_writer<W: Write>(&self, w: W) -> Result<()> {
        let file = EnsembleFile {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            spec: self.spec.clone(),
            n_classes: self.n_classes,
            series_length: self.series_length,
            members: self
                .members
                .iter()
                .enumerate()
                .map(|(i, m)| MemberRecord {
                    seed: m.seed,
                    theta: m.theta,
                    knots: self.member_basis(i).map(|b| b.knots().to_vec()),
                    tree: m.tree.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self> {
        let file: EnsembleFile = serde_json::from_reader(r)?;
        if file.format != FORMAT_NAME {
            return Err(Error::Format(format!("unexpected format tag {:?}", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", file.version)));
        }
        if file.members.is_empty() || file.n_classes == 0 || file.series_length < 2 {
            return Err(Error::Format("empty or degenerate ensemble".into()));
        }
        let p = file.series_length;
        let mut representations = Vec::new();
        let mut index: HashMap<Option<(usize, usize)>, usize> = HashMap::new();
        let mut members = Vec::with_capacity(file.members.len());
        for rec in file.members {
            let key = rec.theta.map(|t| (t.order, t.num_basis));
            let rep = match index.get(&key) {
                Some(&r) => r,
                None => {
                    let representation = match rec.theta {
                        Some(th) => {
                            let basis = BSplineBasis::new(th.order, th.num_basis)?;
                            Representation::Spline(DesignMatrix::new(&basis, p)?)
                        }
                        None => Representation::Raw,
                    };
                    representations.push(representation);
                    index.insert(key, representations.len() - 1);
                    representations.len() - 1
                }
            };
            if let (Representation::Spline(dm), Some(knots)) = (&representations[rep], &rec.knots) {
                if dm.basis().knots() != knots.as_slice() {
                    return Err(Error::Format("stored knots do not match the basis parameters".into()));
                }
            }
            rec.tree.validate()?;
            if rec.tree.n_features() != representations[rep].width(p) || rec.tree.n_classes() != file.n_classes {
                return Err(Error::Format("tree shape does not match its representation".into()));
            }
            members.push(Member {
                theta: rec.theta,
                representation: rep,
                tree: rec.tree,
                seed: rec.seed,
            });
        }
        Ok(Self {
            spec: file.spec,
            representations,
            members,
            n_classes: file.n_classes,
            series_length: p,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
        self.to_writer(&mut w)?;
        w.flush().map_err(io_err)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(BufReader::new(file))
    }
}

#[derive(Serialize, Deserialize)]
struct EnsembleFile {
    format: String,
    version: u32,
    spec: ModelSpec,
    n_classes: usize,
    series_length: usize,
    members: Vec<MemberRecord>,
}

#[derive(Serialize, Deserialize)]
struct MemberRecord {
    seed: u64,
    theta: Option<ThetaDraw>,
    knots: Option<Vec<f64>>,
    tree: DecisionTree,
}

fn grow_members(
    train: &Dataset,
    params: &TreeParams,
    bootstrap: bool,
    streams: Vec<(u64, ChaCha8Rng)>,
    rep_of: &[usize],
    features: &[&FeatureMatrix],
) -> Result<Vec<Member>> {
    let n = train.n_series();
    streams
        .into_par_iter()
        .zip(rep_of.par_iter())
        .map(|((seed, mut rng), &rep)| {
            let rows: Vec<usize> = if bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let tree = DecisionTree::fit_rows(
                features[rep],
                train.labels(),
                train.n_classes(),
                rows,
                params,
                &mut rng,
                seed,
            )?;
            Ok(Member {
                theta: None,
                representation: rep,
                tree,
                seed,
            })
        })
        .collect()
}

/// Fraction of positions where `predicted` equals `truth`.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    let correct = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    correct as f64 / truth.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_dataset, Split};

    fn tiny() -> Dataset {
        let series = vec![
            vec![0.0, 0.1, 0.3, 0.2, 0.0, -0.1],
            vec![0.0, 0.2, 0.2, 0.1, 0.1, -0.2],
            vec![1.0, 0.5, -0.5, -1.0, -0.5, 0.5],
            vec![0.9, 0.4, -0.6, -0.9, -0.4, 0.4],
        ];
        Dataset::from_class_ids("tiny", Split::Train, series, vec![1, 1, 2, 2], vec![0.0, 1.0]).unwrap()
    }

    #[test]
    fn variant_grid() {
        let configs: Vec<(SplitStrategy, bool)> = Variant::ALL
            .iter()
            .map(|v| (v.split_strategy(), v.bootstrap()))
            .collect();
        assert_eq!(
            configs,
            vec![
                (SplitStrategy::Best, false),
                (SplitStrategy::Random, false),
                (SplitStrategy::Best, true),
                (SplitStrategy::Random, true),
            ]
        );
        for v in Variant::ALL {
            assert_eq!(RstConfig::for_variant(v).variant(), v);
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert_eq!(Variant::RstBB.swapped_label(), "RST-RB");
        assert!("RST-X".parse::<Variant>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(RstConfig::default().validate().is_ok());
        let bad = RstConfig {
            o_max: 12,
            ..RstConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RstConfig {
            n_estimators: 0,
            ..RstConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RstConfig {
            o_min: 0,
            ..RstConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn degenerate_ranges_fix_theta() {
        let cfg = RstConfig {
            o_min: 3,
            o_max: 3,
            k_min: 11,
            k_max: 11,
            ..RstConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let th = sample_theta(&mut rng, &cfg, 100);
        assert_eq!((th.order, th.num_basis, th.clamped), (3, 11, false));
    }

    #[test]
    fn basis_count_is_capped_at_series_length() {
        let cfg = RstConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut clamped = 0;
        for _ in 0..1000 {
            let th = sample_theta(&mut rng, &cfg, 24);
            assert!(th.num_basis <= 24 && th.num_basis >= th.order);
            assert!((3..=9).contains(&th.order));
            assert!((11..=50).contains(&th.drawn_num_basis));
            clamped += th.clamped as usize;
        }
        assert!(clamped > 0);
    }

    #[test]
    fn order_draws_are_uniform() {
        let cfg = RstConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let mut counts = [0usize; 7];
        for _ in 0..n {
            counts[sample_theta(&mut rng, &cfg, 64).order - 3] += 1;
        }
        let p = 1.0 / 7.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - p).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn tree_seeds_are_stable_and_distinct() {
        assert_eq!(tree_seed(0, 0), tree_seed(0, 0));
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|t| tree_seed(7, t)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(tree_seed(1, 0), tree_seed(0, 1));
    }

    #[test]
    fn voting_rules() {
        assert_eq!(vote([1, 1, 2], 2), 1);
        assert_eq!(vote([2, 1], 2), 1);
        assert_eq!(vote([3, 2, 3, 2], 3), 2);
    }

    #[test]
    fn single_member_with_fixed_basis_is_one_tree() {
        let data = tiny();
        let cfg = RstConfig {
            n_estimators: 1,
            o_min: 3,
            o_max: 3,
            k_min: 5,
            k_max: 5,
            ..RstConfig::default()
        };
        let ens = Ensemble::fit_rst(&data, &cfg).unwrap();
        let cm = CoefficientMatrix::from_series(data.series(), 3, 5).unwrap();
        let tree = DecisionTree::fit(cm.features(), data.labels(), 2, &TreeParams::default(), 0).unwrap();
        assert_eq!(ens.members()[0].tree().nodes(), tree.nodes());
        for s in data.series() {
            let c = ens.member_design(0).unwrap().fit(s).unwrap();
            assert_eq!(ens.predict(s).unwrap(), tree.predict(&c).unwrap());
        }
    }

    #[test]
    fn fitting_is_deterministic_and_members_stay_in_their_representation() {
        let (train, test) = synth_dataset(10, 40, 0.3, 1).unwrap();
        for v in Variant::ALL {
            let cfg = RstConfig {
                n_estimators: 15,
                k_max: 30,
                ..RstConfig::for_variant(v)
            };
            let a = Ensemble::fit_rst(&train, &cfg).unwrap();
            let b = Ensemble::fit_rst(&train, &cfg).unwrap();
            assert_eq!(a.predict_batch(&test).unwrap(), b.predict_batch(&test).unwrap());
            for (i, (ma, mb)) in a.members().iter().zip(b.members()).enumerate() {
                assert_eq!(ma.tree(), mb.tree());
                let th = ma.theta().unwrap();
                assert!((cfg.o_min..=cfg.o_max).contains(&th.order));
                assert!((cfg.k_min..=cfg.k_max).contains(&th.drawn_num_basis));
                let basis = a.member_basis(i).unwrap();
                assert_eq!((basis.order(), basis.num_basis()), (th.order, th.num_basis));
                for node in ma.tree().nodes() {
                    if let crate::tree::Node::Split { feature, .. } = node {
                        assert!(*feature < th.num_basis);
                    }
                }
            }
            let votes = a.member_votes(&test.series()[0]).unwrap();
            assert_eq!(votes.len(), 15);
        }
    }

    #[test]
    fn master_seed_changes_draws_not_ranges() {
        let (train, _) = synth_dataset(6, 40, 0.3, 1).unwrap();
        let cfg = RstConfig {
            n_estimators: 20,
            k_max: 30,
            ..RstConfig::default()
        };
        let a = Ensemble::fit_rst(&train, &cfg).unwrap();
        let b = Ensemble::fit_rst(
            &train,
            &RstConfig {
                master_seed: 99,
                ..cfg.clone()
            },
        )
        .unwrap();
        let ta: Vec<_> = a.members().iter().map(|m| m.theta().unwrap()).collect();
        let tb: Vec<_> = b.members().iter().map(|m| m.theta().unwrap()).collect();
        assert_ne!(ta, tb);
        for th in ta.iter().chain(&tb) {
            assert!((3..=9).contains(&th.order) && (11..=30).contains(&th.num_basis));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = tiny();
        let ens = Ensemble::fit_rst(
            &data,
            &RstConfig {
                n_estimators: 2,
                o_min: 2,
                o_max: 3,
                k_min: 4,
                k_max: 6,
                ..RstConfig::default()
            },
        )
        .unwrap();
        assert!(matches!(
            ens.predict(&[0.0; 5]),
            Err(Error::LengthMismatch { expected: 6, actual: 5 })
        ));
        // order 9 cannot fit on length-6 series
        assert!(Ensemble::fit_rst(&data, &RstConfig::default()).is_err());
        assert!(ens.truncated(0).is_err());
        assert!(ens.prefix_accuracies(&data, &[3]).is_err());
    }

    #[test]
    fn training_set_is_recovered_without_bootstrap() {
        let (train, _) = synth_dataset(20, 48, 0.5, 4).unwrap();
        let cfg = RstConfig {
            n_estimators: 25,
            k_max: 40,
            ..RstConfig::default()
        };
        let ens = Ensemble::fit_rst(&train, &cfg).unwrap();
        assert_eq!(ens.predict_batch(&train).unwrap().accuracy, 1.0);
    }

    #[test]
    fn identical_series_get_identical_labels() {
        let (train, _) = synth_dataset(10, 32, 0.3, 2).unwrap();
        let ens = Ensemble::fit_rst(
            &train,
            &RstConfig {
                n_estimators: 10,
                k_max: 30,
                ..RstConfig::for_variant(Variant::RstRB)
            },
        )
        .unwrap();
        let same = vec![train.series()[3].clone(); 5];
        let ds = Dataset::from_class_ids("same", Split::Test, same, vec![1, 2, 1, 2, 1], vec![1.0, 2.0]).unwrap();
        let pred = ens.predict_batch(&ds).unwrap();
        assert!(pred.labels.iter().all(|&l| l == pred.labels[0]));
    }

    #[test]
    fn accuracy_matches_confusion_recount() {
        let (train, test) = synth_dataset(12, 32, 1.0, 8).unwrap();
        let ens = Ensemble::fit_rst(
            &train,
            &RstConfig {
                n_estimators: 9,
                k_max: 30,
                ..RstConfig::for_variant(Variant::RstR)
            },
        )
        .unwrap();
        let pred = ens.predict_batch(&test).unwrap();
        let swapped: Vec<usize> = test.labels().iter().map(|&l| 3 - l).collect();
        let permuted =
            Dataset::from_class_ids("p", Split::Test, test.series().to_vec(), swapped, vec![1.0, 2.0]).unwrap();
        let pred_p = ens.predict_batch(&permuted).unwrap();
        assert_eq!(pred.labels, pred_p.labels);

        let mut confusion = [[0usize; 2]; 2];
        for (&t, &p) in test.labels().iter().zip(&pred.labels) {
            confusion[t - 1][p - 1] += 1;
        }
        let n = test.n_series() as f64;
        let diag = (confusion[0][0] + confusion[1][1]) as f64 / n;
        let off = (confusion[0][1] + confusion[1][0]) as f64 / n;
        assert_eq!(pred.accuracy, diag);
        assert_eq!(pred_p.accuracy, off);
        assert!((pred.accuracy + pred_p.accuracy - 1.0).abs() < 1e-15);
    }

    #[test]
    fn prefix_votes_match_truncated_and_fresh_ensembles() {
        let (train, test) = synth_dataset(8, 32, 0.8, 6).unwrap();
        let cfg = RstConfig {
            n_estimators: 12,
            k_max: 30,
            ..RstConfig::for_variant(Variant::RstRB)
        };
        let full = Ensemble::fit_rst(&train, &cfg).unwrap();
        let prefixes = full.prefix_accuracies(&test, &[1, 5, 12]).unwrap();
        for (&n, &acc) in [1usize, 5, 12].iter().zip(&prefixes) {
            let fresh = Ensemble::fit_rst(
                &train,
                &RstConfig {
                    n_estimators: n,
                    ..cfg.clone()
                },
            )
            .unwrap();
            assert_eq!(fresh.predict_batch(&test).unwrap().accuracy, acc);
            assert_eq!(full.truncated(n).unwrap().predict_batch(&test).unwrap().accuracy, acc);
        }
    }

    #[test]
    fn single_unsampled_forest_tree_is_cart_on_raw_values() {
        let (train, test) = synth_dataset(10, 16, 0.5, 3).unwrap();
        let cfg = RfConfig {
            n_estimators: 1,
            max_features: Some(16),
            bootstrap: false,
            ..RfConfig::default()
        };
        let rf = Ensemble::fit_rf(&train, &cfg).unwrap();
        let raw = FeatureMatrix::from_rows(train.series()).unwrap();
        let cart = DecisionTree::fit(&raw, train.labels(), 2, &TreeParams::default(), 0).unwrap();
        assert_eq!(rf.members()[0].tree().nodes(), cart.nodes());
        for s in test.series() {
            assert_eq!(rf.predict(s).unwrap(), cart.predict(s).unwrap());
        }
        assert!(rf.theta_summary().is_none());
        assert!(rf.member_basis(0).is_none());
    }

    #[test]
    fn forest_is_seeded() {
        let (train, test) = synth_dataset(10, 16, 0.5, 3).unwrap();
        let cfg = RfConfig {
            n_estimators: 10,
            seed: 5,
            ..RfConfig::default()
        };
        let a = Ensemble::fit_rf(&train, &cfg).unwrap().predict_batch(&test).unwrap();
        let b = Ensemble::fit_rf(&train, &cfg).unwrap().predict_batch(&test).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_round_trip_preserves_predictions() {
        let (train, test) = synth_dataset(10, 40, 0.5, 9).unwrap();
        let rst = Ensemble::fit_rst(
            &train,
            &RstConfig {
                n_estimators: 12,
                k_max: 40,
                ..RstConfig::for_variant(Variant::RstRB)
            },
        )
        .unwrap();
        let rf = Ensemble::fit_rf(
            &train,
            &RfConfig {
                n_estimators: 5,
                ..RfConfig::default()
            },
        )
        .unwrap();
        for ens in [rst, rf] {
            let mut buf = Vec::new();
            ens.to_writer(&mut buf).unwrap();
            let back = Ensemble::from_reader(buf.as_slice()).unwrap();
            assert_eq!(back.spec(), ens.spec());
            assert_eq!(back.n_representations(), ens.n_representations());
            for s in test.series() {
                assert_eq!(back.member_votes(s).unwrap(), ens.member_votes(s).unwrap());
            }
        }
    }

    #[test]
    fn corrupt_artifacts_are_rejected() {
        let (train, _) = synth_dataset(4, 20, 0.5, 9).unwrap();
        let ens = Ensemble::fit_rst(
            &train,
            &RstConfig {
                n_estimators: 2,
                k_max: 20,
                ..RstConfig::default()
            },
        )
        .unwrap();
        let mut buf = Vec::new();
        ens.to_writer(&mut buf).unwrap();
        let mut value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        value["version"] = 99.into();
        assert!(Ensemble::from_reader(value.to_string().as_bytes()).is_err());

        let mut value: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        value["members"][0]["knots"][0] = 0.5.into();
        assert!(matches!(
            Ensemble::from_reader(value.to_string().as_bytes()),
            Err(Error::Format(_))
        ));
    }
}
