use super::payoff_slack;
use crate::error::{Error, Result};
use crate::forms::{RealizationProfile, SequenceForm};
use serde::Serialize;

/// Backward-induction values for one player against fixed opponents.
#[derive(Debug, Clone, Serialize)]
pub struct CommittedValues {
    /// g^i(ϖ, γ^{-i}).
    pub g: Vec<f64>,
    /// Best value reachable from ϖ downward, including g(ϖ).
    pub w: Vec<f64>,
    /// Per info set, max over its extensions of `w`.
    pub v: Vec<f64>,
    /// g_m(ϖ, γ^{-i}).
    pub cm: Vec<f64>,
}

pub fn committed_values(sf: &SequenceForm, gamma: &RealizationProfile, player: usize) -> CommittedValues {
    let p = &sf.players[player];
    let g = sf.sequence_payoffs(gamma, player);
    let mut w = g.clone();
    let mut v = vec![f64::NEG_INFINITY; p.infosets.len()];
    for k in (0..p.infosets.len()).rev() {
        for s in p.infosets[k].extensions() {
            for &c in &p.child_infosets[s] {
                w[s] += v[c];
            }
            v[k] = v[k].max(w[s]);
        }
    }
    for &c in &p.child_infosets[0] {
        w[0] += v[c];
    }
    let mut cm = vec![0.0; p.len()];
    cm[0] = w[0];
    for s in 1..p.len() {
        let seq = &p.sequences[s];
        cm[s] = cm[seq.parent] - v[seq.infoset.unwrap()] + w[s];
    }
    CommittedValues { g, w, v, cm }
}

fn check_seq(sf: &SequenceForm, player: usize, seq: usize) -> Result<()> {
    if player >= sf.num_players || seq >= sf.players[player].len() {
        return Err(Error::UnknownSequence(format!("player {} sequence {seq}", player + 1)));
    }
    Ok(())
}

/// Σ over extensions ϖ̃ ⊇ ϖ of γ(ϖ̃)·g(ϖ̃, γ^{-i}).
pub fn lead_payoff(sf: &SequenceForm, gamma: &RealizationProfile, player: usize, seq: usize) -> Result<f64> {
    check_seq(sf, player, seq)?;
    let p = &sf.players[player];
    let g = sf.sequence_payoffs(gamma, player);
    Ok((0..p.len()).filter(|&t| p.is_prefix(seq, t)).map(|t| gamma[player][t] * g[t]).sum())
}

/// Best payoff against γ^{-i} among own plans that play ϖ with probability one.
pub fn committed_max(sf: &SequenceForm, gamma: &RealizationProfile, player: usize, seq: usize) -> Result<f64> {
    check_seq(sf, player, seq)?;
    Ok(committed_values(sf, gamma, player).cm[seq])
}

/// Every action along ϖ is locally optimal at its info set.
pub fn is_best_response_sequence(sf: &SequenceForm, gamma: &RealizationProfile, player: usize, seq: usize) -> Result<bool> {
    check_seq(sf, player, seq)?;
    let cv = committed_values(sf, gamma, player);
    let p = &sf.players[player];
    let slack = payoff_slack(sf);
    let chain = p.chain(seq);
    let local = chain.iter().all(|&s| cv.w[s] >= cv.v[p.sequences[s].infoset.unwrap()] - slack);
    if cfg!(debug_assertions) {
        let global = cv.cm[seq] >= cv.cm[0] - slack;
        let near_tie = (cv.cm[seq] - cv.cm[0]).abs() <= slack * (chain.len() as f64 + 1.0);
        debug_assert!(local == global || near_tie, "local and global best-response tests disagree");
    }
    Ok(local)
}

/// g_m(ϖ) attains the maximum of g_m over all own sequences.
pub fn is_global_best_response(sf: &SequenceForm, gamma: &RealizationProfile, player: usize, seq: usize) -> Result<bool> {
    check_seq(sf, player, seq)?;
    let cv = committed_values(sf, gamma, player);
    let best = cv.cm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(cv.cm[seq] >= best - payoff_slack(sf))
}
