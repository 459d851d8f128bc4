use super::{MixedProfile, RealizationProfile, SequenceForm, StrategySets};
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct PlayerOrdering {
    /// Sequence indices in ascending weight order, empty sequence last.
    pub order: Vec<usize>,
    /// Per local info set, the removed maximal extension.
    pub removed: Vec<usize>,
    /// Companion pure strategy (choices per local info set) for each position.
    pub companions: Vec<Vec<Option<usize>>>,
    /// `reduced[l - 1]`: containment-minimal elements among the first `l`.
    pub reduced: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceOrdering {
    pub players: Vec<PlayerOrdering>,
}

fn check_interior(sf: &SequenceForm, gamma: &RealizationProfile) -> Result<()> {
    sf.check_shape(gamma)?;
    if let Some((i, s)) = gamma
        .plans
        .iter()
        .enumerate()
        .find_map(|(i, g)| g.iter().position(|&x| !(x > 0.0)).map(|s| (i, s)))
    {
        return Err(Error::NotInterior(format!(
            "player {} sequence {}",
            i + 1,
            sf.players[i].sequences[s].label
        )));
    }
    Ok(())
}

pub fn ordering_of(sf: &SequenceForm, gamma: &RealizationProfile) -> Result<SequenceOrdering> {
    check_interior(sf, gamma)?;
    let players = sf
        .players
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let g = &gamma[i];
            let mut removed = Vec::with_capacity(p.infosets.len());
            let mut kept = Vec::new();
            for info in &p.infosets {
                let mut best = info.first_seq;
                for s in info.extensions() {
                    if g[s] >= g[best] {
                        best = s;
                    }
                }
                removed.push(best);
                kept.extend(info.extensions().filter(|&s| s != best));
            }
            kept.sort_by(|&a, &b| g[a].total_cmp(&g[b]).then(a.cmp(&b)));
            kept.push(0);
            let companions = kept
                .iter()
                .map(|&s| {
                    let chain = p.chain(s);
                    let mut choices: Vec<Option<usize>> = p
                        .infosets
                        .iter()
                        .enumerate()
                        .map(|(k, info)| {
                            let on_chain = chain.iter().find(|&&c| p.sequences[c].infoset == Some(k));
                            Some(on_chain.copied().unwrap_or(removed[k]) - info.first_seq)
                        })
                        .collect();
                    for (k, info) in p.infosets.iter().enumerate() {
                        let par = info.parent_seq;
                        if par != 0 {
                            let seq = &p.sequences[par];
                            let pk = seq.infoset.unwrap();
                            if choices[pk] != Some(seq.action) {
                                choices[k] = None;
                            }
                        }
                    }
                    choices
                })
                .collect();
            let mut reduced = Vec::with_capacity(kept.len());
            for l in 1..=kept.len() {
                let prefix = &kept[..l];
                let minimal: Vec<usize> = prefix
                    .iter()
                    .copied()
                    .filter(|&s| !prefix.iter().any(|&t| t != s && p.is_prefix(t, s)))
                    .collect();
                reduced.push(minimal);
            }
            PlayerOrdering { order: kept, removed, companions, reduced }
        })
        .collect();
    Ok(SequenceOrdering { players })
}

impl SequenceOrdering {
    /// Both structural conditions: |A|−1 extensions of every info set are
    /// present, and no sequence is followed by one of its strict extensions.
    pub fn satisfies_conditions(&self, sf: &SequenceForm) -> bool {
        self.players.iter().zip(&sf.players).all(|(o, p)| {
            let counts_ok = p
                .infosets
                .iter()
                .all(|info| info.extensions().filter(|s| o.order.contains(s)).count() == info.num_actions - 1);
            let chain_ok = o.order.iter().enumerate().all(|(l, &s)| {
                o.order[l + 1..].iter().all(|&t| t == s || !p.is_prefix(s, t))
            });
            counts_ok && chain_ok && o.order.last() == Some(&0)
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MixedFromPlan {
    pub profile: MixedProfile,
    /// False when some raw weight fell below the clamping threshold.
    pub clean: bool,
    pub min_raw: f64,
    pub ordering: SequenceOrdering,
}

pub const NEGATIVE_CLAMP: f64 = 1e-7;

/// Mixed profile supported on the companion strategies of the plan's ordering.
pub fn mixed_from_plan(sf: &SequenceForm, strategies: &StrategySets, gamma: &RealizationProfile) -> Result<MixedFromPlan> {
    check_interior(sf, gamma)?;
    if sf.flow_violation(gamma) > 1e-9 {
        return Err(Error::Precondition("realization plan violates the flow constraints".into()));
    }
    let ordering = ordering_of(sf, gamma)?;
    let mut min_raw = f64::INFINITY;
    let mut weights = Vec::with_capacity(sf.num_players);
    for (i, o) in ordering.players.iter().enumerate() {
        let mut w = vec![0.0; strategies.players[i].len()];
        let mut prev = 0.0;
        for (l, choices) in o.companions.iter().enumerate() {
            let cur: f64 = o.reduced[l].iter().map(|&s| gamma[i][s]).sum();
            let k = strategies
                .index_of(i, choices)
                .ok_or_else(|| Error::Precondition("companion strategy not in the reduced strategy set".into()))?;
            w[k] += cur - prev;
            prev = cur;
        }
        min_raw = min_raw.min(w.iter().copied().fold(f64::INFINITY, f64::min));
        for x in w.iter_mut() {
            *x = x.max(0.0);
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        weights.push(w);
    }
    Ok(MixedFromPlan { profile: MixedProfile::new(weights), clean: min_raw >= -NEGATIVE_CLAMP, min_raw, ordering })
}
