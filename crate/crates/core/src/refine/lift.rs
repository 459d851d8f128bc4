use super::{check_eps_proper_nf, Certificate};
use crate::error::{Error, Result};
use crate::forms::{expected_payoff_nf, linf, mixed_from_plan, realization_of, MixedProfile, NormalForm, RealizationProfile, SequenceForm};
use serde::Serialize;

/// Totally mixed profile with the same realization as an ε-proper plan.
#[derive(Debug, Clone, Serialize)]
pub struct ProperLift {
    pub profile: MixedProfile,
    /// w₀ = max_i |Sⁱ| − κ_i(∅) + 1.
    pub w0: usize,
    /// Cascade factor ε^{1/w₀}.
    pub eps_tilde: f64,
    /// √ε̃, the level the lift is tested at.
    pub epsilon_nf: f64,
    pub realization_error: f64,
    pub certificate: Certificate,
}

/// Lift the ordering's companion profile to a totally mixed one: strategies are
/// ranked by payoff, each off-chain strategy gets ε̃ times the weight of the one
/// ranked above it, and the chain weights absorb the added realization.
pub fn proper_lift(sf: &SequenceForm, nf: &NormalForm, gamma: &RealizationProfile, eps: f64) -> Result<ProperLift> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {eps}")));
    }
    let strategies = &nf.strategies;
    let base = mixed_from_plan(sf, strategies, gamma)?;
    let w0 = (0..sf.num_players)
        .map(|i| strategies.players[i].len() + 1 - base.ordering.players[i].order.len())
        .max()
        .unwrap_or(1)
        .max(1);
    let eps_tilde = eps.powf(1.0 / w0 as f64);
    let u = expected_payoff_nf(nf, &base.profile)?;
    let slack = 1e-9 * nf.payoffs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut weights = Vec::with_capacity(sf.num_players);
    for (i, o) in base.ordering.players.iter().enumerate() {
        let sigma = &base.profile[i];
        let chain: Vec<usize> = o.companions.iter().map(|c| strategies.index_of(i, c).unwrap()).collect();
        let top = *chain.last().unwrap();
        let pos = |s: usize| chain.iter().position(|&c| c == s);
        // ascending payoff with ties (within the comparison slack) grouped; inside a
        // group off-chain strategies come first; the chain's last strategy on top
        let ui = &u.per_pure[i];
        let mut sorted: Vec<usize> = (0..sigma.len()).filter(|&s| s != top).collect();
        sorted.sort_by(|&a, &b| ui[a].total_cmp(&ui[b]));
        let mut group = vec![0usize; sigma.len()];
        for k in 1..sorted.len() {
            let (a, b) = (sorted[k - 1], sorted[k]);
            group[b] = if ui[b] - ui[a] <= slack { group[a] } else { group[a] + 1 };
        }
        let mut rank = sorted;
        rank.sort_by_key(|&s| (group[s], pos(s).is_some(), pos(s)));
        rank.push(top);
        let mut w = sigma.clone();
        let mut added = vec![0.0; sigma.len()];
        for q in (0..rank.len().saturating_sub(1)).rev() {
            let s = rank[q];
            if pos(s).is_none() {
                let v = sigma[s].max(eps_tilde * w[rank[q + 1]]);
                added[s] = v - sigma[s];
                w[s] = v;
            }
        }
        // realization of the added mass, pulled back onto the chain
        let mut dg = vec![0.0; sf.players[i].len()];
        for (s, &m) in added.iter().enumerate() {
            if m > 0.0 {
                for (d, x) in dg.iter_mut().zip(strategies.indicator(sf, i, &strategies.players[i][s])) {
                    *d += m * x;
                }
            }
        }
        let mut prev = 0.0;
        for (l, &k) in chain.iter().enumerate() {
            let cur: f64 = o.reduced[l].iter().map(|&s| dg[s]).sum();
            w[k] -= cur - prev;
            prev = cur;
        }
        if let Some(s) = w.iter().position(|&x| !(x > 0.0)) {
            return Err(Error::Precondition(format!(
                "lift leaves strategy {} of player {} without weight; epsilon too large",
                strategies.players[i][s].label,
                i + 1
            )));
        }
        weights.push(w);
    }
    let profile = MixedProfile::new(weights);
    let realization_error = linf(&realization_of(sf, strategies, &profile)?.plans, &gamma.plans);
    let epsilon_nf = eps_tilde.sqrt();
    let certificate = check_eps_proper_nf(nf, &profile, epsilon_nf)?;
    Ok(ProperLift { profile, w0, eps_tilde, epsilon_nf, realization_error, certificate })
}
