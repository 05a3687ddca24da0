//! Built-in ensemble learner: bagged depth-limited Gini trees.
//!
//! Each member is fit on its own subsample drawn without replacement, tries a
//! random subset of features at every split and stores add-`laplace` smoothed
//! class frequencies in its leaves. Leaves hold at least `min_samples_leaf`
//! rows so the smoothing does not swamp the counts.

use ordunc_core::{ClassScale, EnsemblePrediction, ProbabilityVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnerConfig {
    pub members: usize,
    pub max_depth: usize,
    /// Fraction of training rows each member sees.
    pub subsample: f64,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub laplace: f64,
}

/// Features drawn at random for each split search.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    All,
    /// `floor(sqrt(D))`, at least one.
    #[default]
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        match self {
            MaxFeatures::All => d,
            MaxFeatures::Sqrt => ((d as f64).sqrt().floor() as usize).max(1),
            MaxFeatures::Count(m) => m.min(d),
        }
    }
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            members: 10,
            max_depth: 6,
            subsample: 0.5,
            min_samples_leaf: 20,
            max_features: MaxFeatures::Sqrt,
            laplace: 1.0,
        }
    }
}

impl LearnerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(PipelineError::Config(m.into()));
        if self.members == 0 {
            return bad("learner needs at least one member");
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return bad("subsample must lie in (0, 1]");
        }
        if self.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be positive");
        }
        if self.max_features == MaxFeatures::Count(0) {
            return bad("max_features must be positive");
        }
        if !(self.laplace > 0.0 && self.laplace.is_finite()) {
            return bad("laplace must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf(ProbabilityVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> &ProbabilityVector {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
                Node::Leaf(p) => return p,
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    k: usize,
    cfg: &'a LearnerConfig,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct Split {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<f64> {
        let mut c = vec![0.0; self.k];
        for &i in idx {
            c[self.y[i] - 1] += 1.0;
        }
        c
    }

    fn leaf(&self, idx: &[usize]) -> Node {
        let c = self.counts(idx);
        let denom = idx.len() as f64 + self.k as f64 * self.cfg.laplace;
        let probs = c.iter().map(|v| (v + self.cfg.laplace) / denom).collect();
        Node::Leaf(ProbabilityVector::renormalized(probs, 1e-9).expect("smoothed counts form a distribution"))
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.x[0].len();
        let m = self.cfg.max_features.resolve(d);
        if m >= d {
            return (0..d).collect();
        }
        let mut f = sample(&mut self.rng, d, m).into_vec();
        f.sort_unstable();
        f
    }

    /// Lowest weighted Gini impurity split, scored as `Σ n_side − Σ c²/n_side`.
    fn best_split(&mut self, idx: &[usize]) -> Option<Split> {
        let n = idx.len();
        let min_leaf = self.cfg.min_samples_leaf;
        let total = self.counts(idx);
        let parent = n as f64 - total.iter().map(|c| c * c).sum::<f64>() / n as f64;
        let mut best: Option<Split> = None;
        let mut sorted = idx.to_vec();
        for f in self.candidate_features() {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]).then(a.cmp(&b)));
            let mut left = vec![0.0; self.k];
            for p in 0..n - 1 {
                left[self.y[sorted[p]] - 1] += 1.0;
                let (lo, hi) = (self.x[sorted[p]][f], self.x[sorted[p + 1]][f]);
                let nl = p + 1;
                if lo == hi || nl < min_leaf || n - nl < min_leaf {
                    continue;
                }
                let (nl, nr) = (nl as f64, (n - nl) as f64);
                let sl: f64 = left.iter().map(|c| c * c).sum();
                let sr: f64 = left.iter().zip(&total).map(|(l, t)| (t - l) * (t - l)).sum();
                let impurity = (nl - sl / nl) + (nr - sr / nr);
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    best = Some(Split { feature: f, threshold: 0.5 * (lo + hi), impurity });
                }
            }
        }
        best.filter(|b| b.impurity < parent - 1e-12)
    }

    fn grow(&mut self, idx: &[usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let pure = idx.iter().all(|&i| self.y[i] == self.y[idx[0]]);
        let split = if pure || depth >= self.cfg.max_depth || idx.len() < 2 * self.cfg.min_samples_leaf {
            None
        } else {
            self.best_split(idx)
        };
        match split {
            None => {
                let leaf = self.leaf(idx);
                self.nodes.push(leaf);
            }
            Some(s) => {
                self.nodes.push(Node::Leaf(ProbabilityVector::uniform(self.k).expect("k >= 2")));
                let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][s.feature] <= s.threshold);
                let left = self.grow(&l, depth + 1);
                let right = self.grow(&r, depth + 1);
                self.nodes[at] = Node::Split { feature: s.feature, threshold: s.threshold, left, right };
            }
        }
        at
    }
}

/// Fits one tree on rows `idx` of `x`.
pub fn fit_tree(
    x: &[Vec<f64>],
    y: &[usize],
    k: ClassScale,
    idx: &[usize],
    cfg: &LearnerConfig,
    rng: ChaCha8Rng,
) -> Tree {
    let mut b = Builder { x, y, k: k.k(), cfg, rng, nodes: Vec::new() };
    b.grow(idx, 0);
    Tree { nodes: b.nodes }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapEnsemble {
    pub trees: Vec<Tree>,
    pub scale: ClassScale,
    pub n_features: usize,
}

impl BootstrapEnsemble {
    pub fn predict(&self, x: &[f64]) -> EnsemblePrediction {
        assert_eq!(x.len(), self.n_features, "feature width differs from training");
        EnsemblePrediction::new(self.trees.iter().map(|t| t.predict(x).clone()).collect())
            .expect("members share the class scale")
    }
}

/// Fits `cfg.members` trees on seeded subsamples of `(x, y)`.
pub fn train_bootstrap_ensemble(
    x: &[Vec<f64>],
    y: &[usize],
    scale: ClassScale,
    seed: u64,
    cfg: &LearnerConfig,
) -> Result<BootstrapEnsemble> {
    cfg.validate()?;
    if x.is_empty() || x.len() != y.len() {
        return Err(PipelineError::Config(format!("{} feature rows for {} labels", x.len(), y.len())));
    }
    let d = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != d) {
        return Err(PipelineError::Config(format!("ragged feature rows: {} vs {d}", row.len())));
    }
    for &label in y {
        scale.check_class(label)?;
    }
    if y.iter().all(|&l| l == y[0]) {
        log::warn!("training data holds only class {}; the ensemble predicts a constant", y[0]);
    }
    let n = x.len();
    let take = ((n as f64 * cfg.subsample).round() as usize).clamp(1, n);
    let trees = (0..cfg.members)
        .map(|m| {
            let mut rng = rng_for(seed, &format!("member/{m}"));
            let mut idx = sample(&mut rng, n, take).into_vec();
            idx.sort_unstable();
            let tree_rng = rng_for(rng.random(), "features");
            fit_tree(x, y, scale, &idx, cfg, tree_rng)
        })
        .collect();
    Ok(BootstrapEnsemble { trees, scale, n_features: d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ordunc_core::{compute_uncertainty, LogBase, MeasureKind};

    fn separable(n: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
        let x = (0..n).map(|i| vec![i as f64]).collect();
        let y = (0..n).map(|i| if i < n / 2 { 1 } else { 2 }).collect();
        (x, y)
    }

    #[test]
    fn separable_data_is_learned_by_every_member() {
        let (x, y) = separable(100);
        let k = ClassScale::new(2).unwrap();
        let model = train_bootstrap_ensemble(&x, &y, k, 3, &LearnerConfig::default()).unwrap();
        for (row, &label) in x.iter().zip(&y) {
            if (45..=54).contains(&(row[0] as usize)) {
                // members place the cut at different gaps near the boundary
                continue;
            }
            let pred = model.predict(row);
            for member in pred.members() {
                let best = if member.as_slice()[0] > member.as_slice()[1] { 1 } else { 2 };
                assert_eq!(best, label);
            }
            let eu = compute_uncertainty(&pred, MeasureKind::Entropy, LogBase::BITS).eu;
            assert!(eu < 0.05, "eu {eu} at {}", row[0]);
        }
    }

    #[test]
    fn deterministic() {
        let (x, y) = separable(60);
        let k = ClassScale::new(2).unwrap();
        let a = train_bootstrap_ensemble(&x, &y, k, 11, &LearnerConfig::default()).unwrap();
        let b = train_bootstrap_ensemble(&x, &y, k, 11, &LearnerConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_gives_constant_predictor() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64]).collect();
        let y = vec![2; 10];
        let k = ClassScale::new(3).unwrap();
        let model = train_bootstrap_ensemble(&x, &y, k, 0, &LearnerConfig::default()).unwrap();
        assert!(model.trees.iter().all(|t| t.n_leaves() == 1));
        // add-1 smoothing over 5 rows and 3 classes
        let p = model.predict(&[100.0]).posterior_mean();
        assert!((p.as_slice()[1] - 6.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn depth_is_bounded() {
        let x: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..200).map(|i| 1 + i % 2).collect();
        let cfg = LearnerConfig { max_depth: 3, ..Default::default() };
        let model = train_bootstrap_ensemble(&x, &y, ClassScale::new(2).unwrap(), 0, &cfg).unwrap();
        assert!(model.trees.iter().all(|t| t.n_leaves() <= 8));
    }

    #[test]
    fn feature_subset_sizes() {
        assert_eq!(MaxFeatures::Sqrt.resolve(7), 2);
        assert_eq!(MaxFeatures::Sqrt.resolve(1), 1);
        assert_eq!(MaxFeatures::All.resolve(7), 7);
        assert_eq!(MaxFeatures::Count(9).resolve(7), 7);
        let cfg: LearnerConfig = serde_json::from_str(r#"{"max_features": {"count": 3}}"#).unwrap();
        assert_eq!(cfg.max_features, MaxFeatures::Count(3));
    }

    #[test]
    fn rejects_bad_config() {
        let (x, y) = separable(10);
        let k = ClassScale::new(2).unwrap();
        let cfg = LearnerConfig { subsample: 0.0, ..Default::default() };
        assert!(train_bootstrap_ensemble(&x, &y, k, 0, &cfg).is_err());
        assert!(train_bootstrap_ensemble(&x, &[1, 2], k, 0, &LearnerConfig::default()).is_err());
    }
}
