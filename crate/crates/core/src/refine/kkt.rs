use super::{DeltaVector, PerturbationFamily};
use crate::error::{Error, Result};
use crate::forms::{RealizationProfile, SequenceForm};
use serde::Serialize;

/// Primal-dual point of the perturbed game's best-response programs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktPoint {
    pub gamma: RealizationProfile,
    /// Per player, one multiplier per perturbation set.
    pub lambda: Vec<Vec<f64>>,
    /// Per player, one multiplier per info set.
    pub nu: Vec<Vec<f64>>,
}

impl KktPoint {
    /// ζ for sequence `s`: ν summed over the info sets led by `s`.
    pub fn zeta(&self, sf: &SequenceForm, i: usize, s: usize) -> f64 {
        sf.players[i].child_infosets[s].iter().map(|&k| self.nu[i][k]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktResidual {
    pub stationarity: Vec<f64>,
    pub flow: Vec<f64>,
    pub complementarity: Vec<f64>,
    /// Largest violation of γ ≥ 0, λ ≥ 0 and the set constraints.
    pub infeasibility: f64,
}

impl KktResidual {
    pub fn norm(&self) -> f64 {
        self.stationarity
            .iter()
            .chain(&self.flow)
            .chain(&self.complementarity)
            .fold(self.infeasibility, |m, x| m.max(x.abs()))
    }
}

pub fn perturbed_kkt_residual(sf: &SequenceForm, fam: &PerturbationFamily, delta: &DeltaVector, point: &KktPoint) -> Result<KktResidual> {
    sf.check_shape(&point.gamma)?;
    if point.lambda.len() != sf.num_players
        || point.nu.len() != sf.num_players
        || point.lambda.iter().zip(&fam.players).any(|(l, f)| l.len() != f.len())
        || point.nu.iter().zip(&sf.players).any(|(n, p)| n.len() != p.infosets.len())
    {
        return Err(Error::Dimension("multipliers do not match the family".into()));
    }
    let gamma = &point.gamma;
    let mut res = KktResidual { stationarity: Vec::new(), flow: Vec::new(), complementarity: Vec::new(), infeasibility: 0.0 };
    for (i, p) in sf.players.iter().enumerate() {
        let g = sf.sequence_payoffs(gamma, i);
        let pf = &fam.players[i];
        for s in 1..p.len() {
            let k = p.sequences[s].infoset.unwrap();
            let lam: f64 = pf.containing[s].iter().map(|&e| point.lambda[i][e]).sum();
            res.stationarity.push(g[s] + lam - point.nu[i][k] + point.zeta(sf, i, s));
            res.infeasibility = res.infeasibility.max(-gamma[i][s]);
        }
        res.flow.push(gamma[i][0] - 1.0);
        for info in &p.infosets {
            res.flow.push(info.extensions().map(|s| gamma[i][s]).sum::<f64>() - gamma[i][info.parent_seq]);
        }
        let cum = delta.r_cumulative(i);
        for (e, set) in pf.sets.iter().enumerate() {
            let slack = set.iter().map(|&s| gamma[i][s]).sum::<f64>() - cum[pf.q[e] - 1];
            res.complementarity.push(slack * point.lambda[i][e]);
            res.infeasibility = res.infeasibility.max(-slack).max(-point.lambda[i][e]);
        }
    }
    Ok(res)
}
