use super::KappaTable;
use crate::error::{Error, Result};
use crate::forms::{ordering_of, RealizationProfile, SequenceForm};
use serde::Serialize;

pub const DEFAULT_FAMILY_CAP: usize = 200_000;

#[derive(Debug, Clone, Serialize)]
pub struct PlayerFamily {
    /// Sorted sequence index sets.
    pub sets: Vec<Vec<usize>>,
    /// q(E) = Σ κ(ϖ) over E.
    pub q: Vec<usize>,
    /// Per sequence, indices of the sets containing it.
    pub containing: Vec<Vec<usize>>,
    pub kappa_root: usize,
}

impl PlayerFamily {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn max_set_size(&self) -> usize {
        self.sets.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationFamily {
    pub players: Vec<PlayerFamily>,
    pub kappa: KappaTable,
}

impl PerturbationFamily {
    pub fn counts(&self) -> Vec<usize> {
        self.players.iter().map(PlayerFamily::len).collect()
    }

    /// e₀.
    pub fn total(&self) -> usize {
        self.players.iter().map(PlayerFamily::len).sum()
    }

    /// Largest set size over all players (ρ₀).
    pub fn max_set_size(&self) -> usize {
        self.players.iter().map(PlayerFamily::max_set_size).max().unwrap_or(0)
    }
}

/// All antichains of nonempty sequences that contain no full sibling set,
/// in lexicographic order of their sorted index vectors.
pub fn enumerate_perturbation_sets(sf: &SequenceForm, cap: usize) -> Result<PerturbationFamily> {
    let kappa = KappaTable::new(sf);
    let mut players = Vec::with_capacity(sf.num_players);
    for (i, p) in sf.players.iter().enumerate() {
        let n = p.len();
        let mut sets: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        // per info set, number of its extensions currently chosen
        let mut chosen = vec![0usize; p.infosets.len()];
        fn extend(
            p: &crate::forms::PlayerSequences,
            start: usize,
            current: &mut Vec<usize>,
            chosen: &mut [usize],
            sets: &mut Vec<Vec<usize>>,
            cap: usize,
        ) -> bool {
            for t in start..p.len() {
                if current.iter().any(|&s| p.is_prefix(s, t) || p.is_prefix(t, s)) {
                    continue;
                }
                let k = p.sequences[t].infoset.unwrap();
                if chosen[k] + 1 == p.infosets[k].num_actions {
                    continue;
                }
                chosen[k] += 1;
                current.push(t);
                sets.push(current.clone());
                if sets.len() > cap || !extend(p, t + 1, current, chosen, sets, cap) {
                    return false;
                }
                current.pop();
                chosen[k] -= 1;
            }
            true
        }
        if n > 1 && !extend(p, 1, &mut current, &mut chosen, &mut sets, cap) {
            return Err(Error::FamilyCap { player: i + 1, cap });
        }
        let q = sets.iter().map(|e| e.iter().map(|&s| kappa.players[i][s]).sum()).collect();
        let mut containing = vec![Vec::new(); n];
        for (e, set) in sets.iter().enumerate() {
            for &s in set {
                containing[s].push(e);
            }
        }
        players.push(PlayerFamily { sets, q, containing, kappa_root: kappa.root(i) });
    }
    Ok(PerturbationFamily { players, kappa })
}

/// Per player δ_1..δ_{κ−1}; r_l = Π_{q ≤ κ−l} δ_q and r_κ = 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaVector {
    pub players: Vec<Vec<f64>>,
}

impl DeltaVector {
    /// Every entry equal to `eps`.
    pub fn uniform(kappa: &KappaTable, eps: f64) -> Self {
        DeltaVector { players: kappa.players.iter().map(|k| vec![eps; k[0].saturating_sub(1)]).collect() }
    }

    /// r_1..r_κ for one player.
    pub fn r(&self, i: usize) -> Vec<f64> {
        let d = &self.players[i];
        let kappa = d.len() + 1;
        (1..=kappa).map(|l| d[..kappa - l].iter().product()).collect()
    }

    /// Prefix sums Σ_{q ≤ l} r_q, index l−1.
    pub fn r_cumulative(&self, i: usize) -> Vec<f64> {
        let mut acc = 0.0;
        self.r(i)
            .into_iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    pub min_slack: f64,
    /// Player (1-based) and the labels of the most violated set.
    pub witness: Option<(usize, Vec<String>)>,
    pub flow_violation: f64,
}

const MEMBER_TOL: f64 = 1e-12;

/// Σ_{ϖ∈E} γ(ϖ) ≥ Σ_{q ≤ q(E)} r_q for every E, plus the flow equations.
pub fn polytope_membership(sf: &SequenceForm, fam: &PerturbationFamily, delta: &DeltaVector, gamma: &RealizationProfile) -> Result<MembershipReport> {
    sf.check_shape(gamma)?;
    let mut min_slack = f64::INFINITY;
    let mut witness = None;
    for (i, pf) in fam.players.iter().enumerate() {
        let cum = delta.r_cumulative(i);
        for (e, set) in pf.sets.iter().enumerate() {
            let lhs: f64 = set.iter().map(|&s| gamma[i][s]).sum();
            let slack = lhs - cum[pf.q[e] - 1];
            if slack < min_slack {
                min_slack = slack;
                witness = Some((i + 1, set.iter().map(|&s| sf.players[i].sequences[s].label.clone()).collect()));
            }
        }
    }
    let flow = sf.flow_violation(gamma);
    let member = min_slack >= -MEMBER_TOL && flow <= 1e-9;
    Ok(MembershipReport { member, min_slack, witness: if member { None } else { witness }, flow_violation: flow })
}

/// Only the reduced-subset constraints of the plan's own ordering, l = 1..κ−1.
pub fn reduced_membership(sf: &SequenceForm, gamma: &RealizationProfile, delta: &DeltaVector) -> Result<MembershipReport> {
    let ordering = ordering_of(sf, gamma)?;
    let mut min_slack = f64::INFINITY;
    let mut witness = None;
    for (i, o) in ordering.players.iter().enumerate() {
        let cum = delta.r_cumulative(i);
        for l in 1..o.order.len() {
            let lhs: f64 = o.reduced[l - 1].iter().map(|&s| gamma[i][s]).sum();
            let slack = lhs - cum[l - 1];
            if slack < min_slack {
                min_slack = slack;
                witness = Some((i + 1, o.reduced[l - 1].iter().map(|&s| sf.players[i].sequences[s].label.clone()).collect()));
            }
        }
    }
    let flow = sf.flow_violation(gamma);
    let member = min_slack >= -MEMBER_TOL && flow <= 1e-9;
    Ok(MembershipReport { member, min_slack, witness: if member { None } else { witness }, flow_violation: flow })
}
