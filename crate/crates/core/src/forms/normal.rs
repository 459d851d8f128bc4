use super::{MixedProfile, SequenceForm};
use crate::error::{Error, Result};
use crate::game::{GameTree, NodeKind};
use serde::Serialize;
use std::collections::HashMap;

/// Reduced pure strategy: an action at each own info set reachable under its own choices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PureStrategy {
    /// Per local info set.
    pub choices: Vec<Option<usize>>,
    pub label: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategySets {
    pub players: Vec<Vec<PureStrategy>>,
    #[serde(skip)]
    lookup: Vec<HashMap<Vec<Option<usize>>, usize>>,
}

impl StrategySets {
    /// Enumerate reduced strategies in lexicographic (info set, action) order.
    pub fn enumerate(g: &GameTree, cap: usize) -> Result<Self> {
        let mut players = Vec::with_capacity(g.num_players);
        for (i, js) in g.player_infosets.iter().enumerate() {
            let required: Vec<Vec<(usize, usize)>> = js
                .iter()
                .map(|&j| {
                    g.experience(i, g.infosets[j].nodes[0])
                        .into_iter()
                        .map(|(pj, a)| (g.infosets[pj].local, a))
                        .collect()
                })
                .collect();
            let mut partial: Vec<Vec<Option<usize>>> = vec![Vec::new()];
            for (k, &j) in js.iter().enumerate() {
                let mut next = Vec::with_capacity(partial.len());
                for p in partial {
                    if required[k].iter().all(|&(pk, a)| p[pk] == Some(a)) {
                        for a in 0..g.infosets[j].actions.len() {
                            let mut q = p.clone();
                            q.push(Some(a));
                            next.push(q);
                        }
                    } else {
                        let mut q = p;
                        q.push(None);
                        next.push(q);
                    }
                }
                if next.len() > cap {
                    return Err(Error::NormalFormTooLarge { count: next.len() as f64, cap });
                }
                partial = next;
            }
            let strategies = partial
                .into_iter()
                .map(|choices| {
                    let names: Vec<&str> = choices
                        .iter()
                        .zip(js)
                        .filter_map(|(c, &j)| c.map(|a| g.infosets[j].actions[a].as_str()))
                        .collect();
                    PureStrategy { label: format!("{{{}}}", names.join(",")), choices }
                })
                .collect();
            players.push(strategies);
        }
        let lookup = players
            .iter()
            .map(|ps: &Vec<PureStrategy>| ps.iter().enumerate().map(|(k, s)| (s.choices.clone(), k)).collect())
            .collect();
        Ok(StrategySets { players, lookup })
    }

    pub fn counts(&self) -> Vec<usize> {
        self.players.iter().map(Vec::len).collect()
    }

    pub fn index_of(&self, i: usize, choices: &[Option<usize>]) -> Option<usize> {
        self.lookup[i].get(choices).copied()
    }

    /// 0/1 realization plan of a pure strategy.
    pub fn indicator(&self, sf: &SequenceForm, i: usize, s: &PureStrategy) -> Vec<f64> {
        let p = &sf.players[i];
        let mut g = vec![0.0; p.len()];
        g[0] = 1.0;
        for (k, info) in p.infosets.iter().enumerate() {
            for (a, q) in info.extensions().enumerate() {
                if s.choices[k] == Some(a) {
                    g[q] = g[info.parent_seq];
                }
            }
        }
        g
    }

    /// Mixed profile with all weight on the given strategy indices.
    pub fn pure_profile(&self, profile: &[usize]) -> MixedProfile {
        MixedProfile::new(
            self.players
                .iter()
                .zip(profile)
                .map(|(ps, &k)| {
                    let mut w = vec![0.0; ps.len()];
                    w[k] = 1.0;
                    w
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalForm {
    pub strategies: StrategySets,
    pub shape: Vec<usize>,
    /// Row-major over joint profiles (player 1 most significant), `n` payoffs each.
    pub payoffs: Vec<f64>,
    pub num_players: usize,
}

impl NormalForm {
    pub fn num_profiles(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn flat_index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.shape).fold(0, |acc, (&s, &m)| acc * m + s)
    }

    pub fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        for (slot, &m) in out.iter_mut().zip(&self.shape).rev() {
            *slot = k % m;
            k /= m;
        }
        out
    }

    pub fn payoff(&self, profile: &[usize]) -> &[f64] {
        let k = self.flat_index(profile) * self.num_players;
        &self.payoffs[k..k + self.num_players]
    }
}

/// Reduced normal form with payoffs summed directly over the tree's leaves.
pub fn build_normal_form(g: &GameTree, cap: usize) -> Result<NormalForm> {
    let strategies = StrategySets::enumerate(g, cap)?;
    let shape = strategies.counts();
    let total = shape.iter().fold(1.0f64, |a, &m| a * m as f64);
    if total > cap as f64 {
        return Err(Error::NormalFormTooLarge { count: total, cap });
    }
    let n = g.num_players;
    let mut nf = NormalForm { strategies, shape, payoffs: vec![0.0; total as usize * n], num_players: n };
    for (v, node) in g.nodes.iter().enumerate() {
        let NodeKind::Terminal { payoffs } = &node.kind else { continue };
        let mut w = 1.0;
        let mut own: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (h, a) in g.path_to(v) {
            match &g.nodes[h].kind {
                NodeKind::Decision { player, infoset } => own[*player].push((g.infosets[*infoset].local, a)),
                NodeKind::Chance { probs } => w *= probs[a],
                NodeKind::Terminal { .. } => unreachable!(),
            }
        }
        let consistent: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                nf.strategies.players[i]
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| own[i].iter().all(|&(k, a)| s.choices[k] == Some(a)))
                    .map(|(k, _)| k)
                    .collect()
            })
            .collect();
        if consistent.iter().any(Vec::is_empty) {
            continue;
        }
        let mut pos = vec![0usize; n];
        'odometer: loop {
            let profile: Vec<usize> = pos.iter().enumerate().map(|(i, &p)| consistent[i][p]).collect();
            let k = nf.flat_index(&profile) * n;
            for (x, u) in nf.payoffs[k..k + n].iter_mut().zip(payoffs) {
                *x += w * u;
            }
            for d in (0..n).rev() {
                pos[d] += 1;
                if pos[d] < consistent[d].len() {
                    continue 'odometer;
                }
                pos[d] = 0;
            }
            break;
        }
    }
    Ok(nf)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NfPayoffs {
    pub total: Vec<f64>,
    /// `per_pure[i][s]` is u^i(s, σ^{-i}).
    pub per_pure: Vec<Vec<f64>>,
}

/// Multilinear evaluation of a mixed profile.
pub fn expected_payoff_nf(nf: &NormalForm, sigma: &MixedProfile) -> Result<NfPayoffs> {
    let n = nf.num_players;
    if sigma.num_players() != n || sigma.weights.iter().zip(&nf.shape).any(|(w, &m)| w.len() != m) {
        return Err(Error::Dimension("mixed profile does not match the normal form".into()));
    }
    let mut per_pure: Vec<Vec<f64>> = nf.shape.iter().map(|&m| vec![0.0; m]).collect();
    for k in 0..nf.num_profiles() {
        let profile = nf.unflatten(k);
        let u = &nf.payoffs[k * n..(k + 1) * n];
        for i in 0..n {
            let mut w = 1.0;
            for (q, &s) in profile.iter().enumerate() {
                if q != i {
                    w *= sigma[q][s];
                }
            }
            if w != 0.0 {
                per_pure[i][profile[i]] += w * u[i];
            }
        }
    }
    let total = per_pure.iter().zip(&sigma.weights).map(|(u, s)| u.iter().zip(s).map(|(a, b)| a * b).sum()).collect();
    Ok(NfPayoffs { total, per_pure })
}
