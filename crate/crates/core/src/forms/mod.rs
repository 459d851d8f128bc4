//! Reduced normal form, sequence form, and conversions between mixed
//! strategies and realization plans.

mod normal;
mod ordering;
mod sequence;

pub use normal::{build_normal_form, expected_payoff_nf, NfPayoffs, NormalForm, PureStrategy, StrategySets};
pub use ordering::{mixed_from_plan, ordering_of, MixedFromPlan, PlayerOrdering, SequenceOrdering};
pub use sequence::{
    build_sequence_form, expected_payoff_sf, realization_of, PayoffEntry, PlayerSequences, SequenceForm, SfInfoset,
    SfPayoffs, Sequence,
};

use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

/// Per-player weights over reduced pure strategies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub weights: Vec<Vec<f64>>,
}

/// Per-player weights over sequences, index 0 being the empty sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationProfile {
    pub plans: Vec<Vec<f64>>,
}

impl MixedProfile {
    pub fn new(weights: Vec<Vec<f64>>) -> Self {
        MixedProfile { weights }
    }

    pub fn num_players(&self) -> usize {
        self.weights.len()
    }

    /// Largest deviation from the simplex over all players.
    pub fn simplex_violation(&self) -> f64 {
        let mut v: f64 = 0.0;
        for w in &self.weights {
            v = v.max((w.iter().sum::<f64>() - 1.0).abs());
            for &x in w {
                v = v.max(-x);
            }
        }
        v
    }

    /// L∞ distance, or infinity on shape mismatch.
    pub fn distance(&self, other: &MixedProfile) -> f64 {
        linf(&self.weights, &other.weights)
    }
}

impl RealizationProfile {
    pub fn new(plans: Vec<Vec<f64>>) -> Self {
        RealizationProfile { plans }
    }

    pub fn num_players(&self) -> usize {
        self.plans.len()
    }

    pub fn distance(&self, other: &RealizationProfile) -> f64 {
        linf(&self.plans, &other.plans)
    }

    pub fn min_weight(&self) -> f64 {
        self.plans.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

pub(crate) fn linf(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x.len() != y.len()) {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

impl Index<usize> for MixedProfile {
    type Output = Vec<f64>;
    fn index(&self, i: usize) -> &Vec<f64> {
        &self.weights[i]
    }
}

impl IndexMut<usize> for MixedProfile {
    fn index_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.weights[i]
    }
}

impl Index<usize> for RealizationProfile {
    type Output = Vec<f64>;
    fn index(&self, i: usize) -> &Vec<f64> {
        &self.plans[i]
    }
}

impl IndexMut<usize> for RealizationProfile {
    fn index_mut(&mut self, i: usize) -> &mut Vec<f64> {
        &mut self.plans[i]
    }
}
