use serde::{Deserialize, Serialize};

use crate::prob::ProbabilityVector;

/// Slack when comparing a cumulative probability against 1/2, so that
/// `0.1 + 0.2 + 0.2` still counts as reaching the median.
const MEDIAN_SLACK: f64 = 1e-12;

/// Expected-loss-minimizing decision rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionRule {
    /// Mode (0/1 loss). Ties go to the lowest class.
    Argmax,
    /// Lowest median (absolute loss).
    L1,
    /// Mean rounded half-up, clipped to the scale (squared loss).
    L2,
    /// The two most probable classes, most probable first.
    Top2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Class(usize),
    Pair(usize, usize),
}

impl Decision {
    /// The single decided class, or the first of a pair.
    pub fn class(self) -> usize {
        match self {
            Decision::Class(c) | Decision::Pair(c, _) => c,
        }
    }

    pub fn contains(self, class: usize) -> bool {
        match self {
            Decision::Class(c) => c == class,
            Decision::Pair(a, b) => a == class || b == class,
        }
    }
}

pub fn decide(p: &ProbabilityVector, rule: DecisionRule) -> Decision {
    match rule {
        DecisionRule::Argmax => Decision::Class(argmax(p.as_slice())),
        DecisionRule::L1 => Decision::Class(lowest_median(p)),
        DecisionRule::L2 => {
            let k = p.k() as f64;
            Decision::Class((p.mean_class() + 0.5).floor().clamp(1.0, k) as usize)
        }
        DecisionRule::Top2 => {
            let first = argmax(p.as_slice());
            let second = p
                .as_slice()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i + 1 != first)
                .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
                    Some((_, bv)) if bv >= v => best,
                    _ => Some((i, v)),
                })
                .map(|(i, _)| i + 1)
                .expect("at least two classes");
            Decision::Pair(first, second)
        }
    }
}

pub(crate) fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in probs.iter().enumerate() {
        if v > probs[best] {
            best = i;
        }
    }
    best + 1
}

fn lowest_median(p: &ProbabilityVector) -> usize {
    p.cdf().iter().position(|&f| f >= 0.5 - MEDIAN_SLACK).map_or(p.k(), |i| i + 1)
}
