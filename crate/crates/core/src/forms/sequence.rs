use super::{MixedProfile, RealizationProfile, StrategySets};
use crate::error::{Error, Result};
use crate::game::{GameTree, NodeKind};
use rand::{Rng, RngExt};
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Serialize)]
pub struct Sequence {
    /// Local info set index, `None` for the empty sequence.
    pub infoset: Option<usize>,
    pub action: usize,
    pub parent: usize,
    pub label: String,
    pub depth: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SfInfoset {
    pub global: usize,
    pub name: String,
    /// Leading sequence.
    pub parent_seq: usize,
    /// Extensions occupy `first_seq..first_seq + num_actions`.
    pub first_seq: usize,
    pub num_actions: usize,
}

impl SfInfoset {
    pub fn extensions(&self) -> std::ops::Range<usize> {
        self.first_seq..self.first_seq + self.num_actions
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayerSequences {
    pub sequences: Vec<Sequence>,
    pub infosets: Vec<SfInfoset>,
    /// Info sets whose leading sequence is exactly this sequence.
    pub child_infosets: Vec<Vec<usize>>,
    /// Info sets whose leading sequence extends (or equals) this sequence.
    pub followers: Vec<Vec<usize>>,
}

impl PlayerSequences {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    /// True when `a` is a prefix of `b` (including `a == b`).
    pub fn is_prefix(&self, a: usize, b: usize) -> bool {
        let mut cur = b;
        loop {
            if cur == a {
                return true;
            }
            if cur == 0 || cur < a {
                return false;
            }
            cur = self.sequences[cur].parent;
        }
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.child_infosets[s].is_empty()
    }

    /// Nonempty prefixes of `s`, shortest first.
    pub fn chain(&self, s: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = s;
        while cur != 0 {
            out.push(cur);
            cur = self.sequences[cur].parent;
        }
        out.reverse();
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PayoffEntry {
    /// Joint sequence indices, one per strategic player.
    pub seqs: Vec<usize>,
    /// Payoffs with chance weight folded in.
    pub payoff: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceForm {
    pub num_players: usize,
    pub players: Vec<PlayerSequences>,
    pub entries: Vec<PayoffEntry>,
    /// Per player, per sequence, indices of entries involving that sequence.
    #[serde(skip)]
    pub by_seq: Vec<Vec<Vec<usize>>>,
    /// Chance sequences with their realization probability.
    pub chance_plan: Vec<(String, f64)>,
    pub max_abs_payoff: f64,
}

pub fn build_sequence_form(g: &GameTree) -> SequenceForm {
    let n = g.num_players;
    let mut players = Vec::with_capacity(n);
    // per global info set: first sequence index
    let mut first_of = vec![0usize; g.infosets.len()];
    for (i, js) in g.player_infosets.iter().enumerate() {
        let mut seqs = vec![Sequence { infoset: None, action: 0, parent: 0, label: "∅".into(), depth: 0 }];
        let mut infosets = Vec::with_capacity(js.len());
        for (k, &j) in js.iter().enumerate() {
            let s = &g.infosets[j];
            let parent_seq = match g.experience(i, s.nodes[0]).last() {
                Some(&(pj, pa)) => first_of[pj] + pa,
                None => 0,
            };
            first_of[j] = seqs.len();
            infosets.push(SfInfoset {
                global: j,
                name: g.infoset_name(j),
                parent_seq,
                first_seq: seqs.len(),
                num_actions: s.actions.len(),
            });
            for (a, label) in s.actions.iter().enumerate() {
                let parent = &seqs[parent_seq];
                let label = if parent_seq == 0 { label.clone() } else { format!("{}.{}", parent.label, label) };
                let depth = parent.depth + 1;
                seqs.push(Sequence { infoset: Some(k), action: a, parent: parent_seq, label, depth });
            }
        }
        let mut seen: HashMap<String, usize> = HashMap::new();
        for s in &seqs {
            *seen.entry(s.label.clone()).or_default() += 1;
        }
        for s in seqs.iter_mut().skip(1) {
            if seen[&s.label] > 1 {
                s.label = format!("{}@{}", s.label, infosets[s.infoset.unwrap()].name);
            }
        }
        let mut child_infosets = vec![Vec::new(); seqs.len()];
        for (k, info) in infosets.iter().enumerate() {
            child_infosets[info.parent_seq].push(k);
        }
        let mut followers = vec![Vec::new(); seqs.len()];
        for (k, info) in infosets.iter().enumerate() {
            let mut cur = info.parent_seq;
            loop {
                followers[cur].push(k);
                if cur == 0 {
                    break;
                }
                cur = seqs[cur].parent;
            }
        }
        for f in &mut followers {
            f.sort_unstable();
        }
        players.push(PlayerSequences { sequences: seqs, infosets, child_infosets, followers });
    }

    let mut table: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
    let mut chance: BTreeMap<String, f64> = BTreeMap::new();
    for (v, node) in g.nodes.iter().enumerate() {
        match &node.kind {
            NodeKind::Terminal { payoffs } => {
                let mut seqs = vec![0usize; n];
                let mut w = 1.0;
                for (h, a) in g.path_to(v) {
                    match &g.nodes[h].kind {
                        NodeKind::Decision { player, infoset } => seqs[*player] = first_of[*infoset] + a,
                        NodeKind::Chance { probs } => w *= probs[a],
                        NodeKind::Terminal { .. } => unreachable!(),
                    }
                }
                let e = table.entry(seqs).or_insert_with(|| vec![0.0; n]);
                for (x, u) in e.iter_mut().zip(payoffs) {
                    *x += w * u;
                }
            }
            NodeKind::Chance { probs } => {
                let mut labels = Vec::new();
                let mut w = 1.0;
                for (h, a) in g.path_to(v) {
                    if let NodeKind::Chance { probs } = &g.nodes[h].kind {
                        labels.push(g.nodes[h].actions[a].clone());
                        w *= probs[a];
                    }
                }
                for (a, p) in probs.iter().enumerate() {
                    let mut l = labels.clone();
                    l.push(node.actions[a].clone());
                    chance.insert(l.join("."), w * p);
                }
            }
            NodeKind::Decision { .. } => {}
        }
    }
    let entries: Vec<PayoffEntry> = table.into_iter().map(|(seqs, payoff)| PayoffEntry { seqs, payoff }).collect();
    let mut by_seq: Vec<Vec<Vec<usize>>> = players.iter().map(|p| vec![Vec::new(); p.len()]).collect();
    for (e, entry) in entries.iter().enumerate() {
        for (i, &s) in entry.seqs.iter().enumerate() {
            by_seq[i][s].push(e);
        }
    }
    SequenceForm {
        num_players: n,
        players,
        entries,
        by_seq,
        chance_plan: chance.into_iter().collect(),
        max_abs_payoff: g.max_abs_payoff(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SfPayoffs {
    pub total: Vec<f64>,
    /// `per_sequence[i][s]` is g^i(s, γ^{-i}).
    pub per_sequence: Vec<Vec<f64>>,
}

impl SequenceForm {
    pub fn num_sequences(&self, i: usize) -> usize {
        self.players[i].len()
    }

    /// Nonroot sequence count n₀.
    pub fn n0(&self) -> usize {
        self.players.iter().map(|p| p.len() - 1).sum()
    }

    /// Info set count m₀.
    pub fn m0(&self) -> usize {
        self.players.iter().map(|p| p.infosets.len()).sum()
    }

    pub fn sequence_index(&self, i: usize, label: &str) -> Option<usize> {
        self.players[i].sequences.iter().position(|s| s.label == label)
    }

    pub fn check_shape(&self, gamma: &RealizationProfile) -> Result<()> {
        if gamma.num_players() != self.num_players
            || gamma.plans.iter().zip(&self.players).any(|(g, p)| g.len() != p.len())
        {
            return Err(Error::Dimension("realization profile does not match the sequence form".into()));
        }
        Ok(())
    }

    /// g^i(s, γ^{-i}) for every sequence of `player`.
    pub fn sequence_payoffs(&self, gamma: &RealizationProfile, player: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.players[player].len()];
        for e in &self.entries {
            let mut w = e.payoff[player];
            for (k, &s) in e.seqs.iter().enumerate() {
                if k != player {
                    w *= gamma[k][s];
                }
            }
            out[e.seqs[player]] += w;
        }
        out
    }

    /// Largest violation of γ(∅) = 1 and the flow equations.
    pub fn flow_violation(&self, gamma: &RealizationProfile) -> f64 {
        let mut v: f64 = 0.0;
        for (i, p) in self.players.iter().enumerate() {
            v = v.max((gamma[i][0] - 1.0).abs());
            for info in &p.infosets {
                let sum: f64 = info.extensions().map(|s| gamma[i][s]).sum();
                v = v.max((sum - gamma[i][info.parent_seq]).abs());
            }
        }
        v
    }

    /// Plan induced by per-info-set behavior probabilities.
    pub fn plan_from_behavior(&self, behavior: &[Vec<Vec<f64>>]) -> RealizationProfile {
        let plans = self
            .players
            .iter()
            .zip(behavior)
            .map(|(p, beh)| {
                let mut g = vec![0.0; p.len()];
                g[0] = 1.0;
                for (k, info) in p.infosets.iter().enumerate() {
                    for (a, s) in info.extensions().enumerate() {
                        g[s] = g[info.parent_seq] * beh[k][a];
                    }
                }
                g
            })
            .collect();
        RealizationProfile::new(plans)
    }

    /// Plan from uniform behavior at every info set.
    pub fn uniform_plan(&self) -> RealizationProfile {
        let beh: Vec<Vec<Vec<f64>>> = self
            .players
            .iter()
            .map(|p| p.infosets.iter().map(|info| vec![1.0 / info.num_actions as f64; info.num_actions]).collect())
            .collect();
        self.plan_from_behavior(&beh)
    }

    /// Random strictly positive plan; behavior probabilities are at least `floor / |A|`.
    pub fn random_plan<R: Rng + ?Sized>(&self, rng: &mut R, floor: f64) -> RealizationProfile {
        let beh: Vec<Vec<Vec<f64>>> = self
            .players
            .iter()
            .map(|p| {
                p.infosets
                    .iter()
                    .map(|info| {
                        let raw: Vec<f64> = (0..info.num_actions).map(|_| floor + rng.random::<f64>()).collect();
                        let s: f64 = raw.iter().sum();
                        raw.into_iter().map(|x| x / s).collect()
                    })
                    .collect()
            })
            .collect();
        self.plan_from_behavior(&beh)
    }

    /// Payoff table scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> SequenceForm {
        let mut out = self.clone();
        for e in &mut out.entries {
            for u in &mut e.payoff {
                *u *= factor;
            }
        }
        out.max_abs_payoff *= factor.abs();
        out
    }
}

/// Realization plan of a mixed profile.
pub fn realization_of(sf: &SequenceForm, strategies: &StrategySets, sigma: &MixedProfile) -> Result<RealizationProfile> {
    if sigma.num_players() != sf.num_players {
        return Err(Error::Dimension("mixed profile player count".into()));
    }
    let mut plans = Vec::with_capacity(sf.num_players);
    for (i, p) in sf.players.iter().enumerate() {
        let set = &strategies.players[i];
        if sigma[i].len() != set.len() {
            return Err(Error::Dimension(format!("player {} has {} strategies", i + 1, set.len())));
        }
        let mut g = vec![0.0; p.len()];
        for (s, &w) in set.iter().zip(&sigma[i]) {
            for (q, x) in strategies.indicator(sf, i, s).iter().zip(g.iter_mut()) {
                *x += q * w;
            }
        }
        plans.push(g);
    }
    Ok(RealizationProfile::new(plans))
}

/// Expected payoffs in the sequence form, plus g^i(s, γ^{-i}) per sequence.
pub fn expected_payoff_sf(sf: &SequenceForm, gamma: &RealizationProfile) -> Result<SfPayoffs> {
    sf.check_shape(gamma)?;
    let per_sequence: Vec<Vec<f64>> = (0..sf.num_players).map(|i| sf.sequence_payoffs(gamma, i)).collect();
    let total = per_sequence
        .iter()
        .enumerate()
        .map(|(i, g)| g.iter().zip(&gamma[i]).map(|(a, b)| a * b).sum())
        .collect();
    Ok(SfPayoffs { total, per_sequence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn labels(p: &PlayerSequences) -> Vec<&str> {
        p.sequences.iter().map(|s| s.label.as_str()).collect()
    }

    fn entry<'a>(sf: &'a SequenceForm, seqs: &[&str]) -> Option<&'a Vec<f64>> {
        let idx: Vec<usize> = seqs.iter().enumerate().map(|(i, l)| sf.sequence_index(i, l).unwrap()).collect();
        sf.entries.iter().find(|e| e.seqs == idx).map(|e| &e.payoff)
    }

    #[test]
    fn fig1_sequences_and_table() {
        let sf = build_sequence_form(&fixtures::fig1());
        assert_eq!(labels(&sf.players[0]), vec!["∅", "C", "E", "C.L1", "C.R1", "C.L2", "C.R2"]);
        assert_eq!(labels(&sf.players[1]), vec!["∅", "l", "r"]);
        assert_eq!(sf.entries.len(), 6);
        assert_eq!(entry(&sf, &["E", "l"]), Some(&vec![0.0, 2.0]));
        assert_eq!(entry(&sf, &["C.R2", "r"]), Some(&vec![5.0, 2.0]));
        assert_eq!(entry(&sf, &["C.L1", "l"]), Some(&vec![2.0, 0.0]));
        assert_eq!(entry(&sf, &["C.L1", "r"]), None);
        assert_eq!((sf.n0(), sf.m0()), (8, 4));
    }

    #[test]
    fn fig2_player3_entry() {
        let sf = build_sequence_form(&fixtures::fig2());
        assert_eq!(labels(&sf.players[2]), vec!["∅", "L3", "R3"]);
        assert_eq!(entry(&sf, &["R", "∅", "R3"]), Some(&vec![3.0, 0.0, 3.0]));
    }

    #[test]
    fn chance_folding() {
        let sf = build_sequence_form(&fixtures::fig3());
        assert_eq!(entry(&sf, &["R.S", "b"]), Some(&vec![0.0, 5.0]));
        assert_eq!(entry(&sf, &["R.S", "f"]), Some(&vec![12.0, 0.0]));
        assert_eq!(sf.chance_plan, vec![("h".to_string(), 0.5), ("t".to_string(), 0.5)]);
        let text = "game c players 1 chance\nnode r parent - action - owner c probs 0.25,0.75 actions x,y\n\
            leaf a parent r action x payoffs 4\nleaf b parent r action y payoffs 8\n";
        let sf = build_sequence_form(&crate::game::parse_game(text).unwrap());
        assert_eq!(sf.entries.len(), 1);
        assert_eq!(sf.entries[0].payoff, vec![7.0]);
    }

    #[test]
    fn fig1_pure_payoff() {
        let sf = build_sequence_form(&fixtures::fig1());
        let g = RealizationProfile::new(vec![vec![1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 1.0]]);
        assert_eq!(expected_payoff_sf(&sf, &g).unwrap().total, vec![6.0, 2.0]);
        let zero = RealizationProfile::new(vec![vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], vec![1.0, 0.5, 0.5]]);
        assert_eq!(expected_payoff_sf(&sf, &zero).unwrap().total, vec![0.0, 0.0]);
    }

    #[test]
    fn followers_and_terminals() {
        let sf = build_sequence_form(&fixtures::fig1());
        let p = &sf.players[0];
        assert_eq!(p.followers[0], vec![0, 1, 2]);
        assert_eq!(p.followers[1], vec![1, 2]);
        assert!(p.followers[2].is_empty());
        assert!(p.is_terminal(3) && !p.is_terminal(1));
        assert!(p.is_prefix(1, 6) && !p.is_prefix(2, 6) && p.is_prefix(0, 2));
        let u = sf.uniform_plan();
        assert!(sf.flow_violation(&u) < 1e-15);
        assert_eq!(u[0][3], 0.25);
    }
}
