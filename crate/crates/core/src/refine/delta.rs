use super::{check_eps_proper_sf, committed_values, payoff_slack, reduced_membership, DeltaVector};
use crate::error::{Error, Result};
use crate::forms::{ordering_of, RealizationProfile, SequenceForm};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct DeltaConstruction {
    pub delta: DeltaVector,
    /// ε̃ = ε^{1/w₀}, w₀ = max_i |Wⁱ|.
    pub eps_tilde: f64,
    /// 0 < δ ≤ ε̃ for every entry.
    pub bounds_ok: bool,
    /// The removed extensions are local best responses and the strict steps are tight.
    pub nash_conditions_ok: bool,
    /// The plan lies in the perturbed polytope of `delta`.
    pub member: bool,
    /// Largest |Σ_{π_l}γ − Σ_{q≤l} r_q| over the strict steps.
    pub tightness_error: f64,
}

impl DeltaConstruction {
    pub fn valid(&self) -> bool {
        self.bounds_ok && self.nash_conditions_ok && self.member
    }
}

/// Perturbation vector under which an ε-proper plan is an equilibrium of the perturbed game.
pub fn delta_from_eps_proper(sf: &SequenceForm, gamma: &RealizationProfile, eps: f64) -> Result<DeltaConstruction> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let cert = check_eps_proper_sf(sf, gamma, eps)?;
    if !cert.pass {
        return Err(Error::Precondition(format!("plan is not {eps}-proper ({} violations)", cert.num_violations)));
    }
    let w0 = sf.players.iter().map(|p| p.len()).max().unwrap_or(1);
    let eps_tilde = eps.powf(1.0 / w0 as f64);
    let ordering = ordering_of(sf, gamma)?;
    let slack = payoff_slack(sf);
    let mut players = Vec::with_capacity(sf.num_players);
    let mut bounds_ok = true;
    let mut local_ok = true;
    let mut strict_steps = Vec::new();
    for (i, o) in ordering.players.iter().enumerate() {
        let cv = committed_values(sf, gamma, i);
        let kappa = o.order.len();
        let min_g = gamma[i].iter().copied().fold(f64::INFINITY, f64::min);
        let mut r = vec![0.0; kappa + 1];
        r[0] = eps * min_g;
        r[kappa] = 1.0;
        let mut prefix = 0.0;
        let mut strict = Vec::new();
        for l in 1..kappa {
            let (a, b) = (o.order[l - 1], o.order[l]);
            if cv.cm[a] < cv.cm[b] - slack {
                let sum: f64 = o.reduced[l - 1].iter().map(|&s| gamma[i][s]).sum();
                r[l] = sum - prefix;
                strict.push(l);
            } else {
                r[l] = r[l - 1] / eps_tilde;
            }
            prefix += r[l];
        }
        let delta: Vec<f64> = (1..kappa).map(|l| r[kappa - l] / r[kappa - l + 1]).collect();
        bounds_ok &= delta.iter().all(|&d| d > 0.0 && d <= eps_tilde * (1.0 + 1e-12));
        let p = &sf.players[i];
        for (k, info) in p.infosets.iter().enumerate() {
            let rem = o.removed[k];
            let best = info.extensions().map(|s| cv.w[s]).fold(f64::NEG_INFINITY, f64::max);
            local_ok &= cv.w[rem] >= best - slack;
        }
        strict_steps.push(strict);
        players.push(delta);
    }
    let delta = DeltaVector { players };
    let mut tightness_error: f64 = 0.0;
    for (i, steps) in strict_steps.iter().enumerate() {
        let cum = delta.r_cumulative(i);
        let o = &ordering.players[i];
        for &l in steps {
            let sum: f64 = o.reduced[l - 1].iter().map(|&s| gamma[i][s]).sum();
            tightness_error = tightness_error.max((sum - cum[l - 1]).abs() / sum.max(1e-300));
        }
    }
    let member = reduced_membership(sf, gamma, &delta)?.member;
    Ok(DeltaConstruction {
        delta,
        eps_tilde,
        bounds_ok,
        nash_conditions_ok: local_ok && tightness_error <= 1e-9,
        member,
        tightness_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::forms::build_sequence_form;
    use crate::game::parse_game;

    #[test]
    fn no_choice_player_gets_empty_delta() {
        let g = parse_game("game s players 1\nnode r parent - action - owner 1 infoset 1.1 actions a\nleaf x parent r action a payoffs 3\n").unwrap();
        let sf = build_sequence_form(&g);
        let d = delta_from_eps_proper(&sf, &RealizationProfile::new(vec![vec![1.0, 1.0]]), 0.1).unwrap();
        assert!(d.delta.players[0].is_empty());
        assert!(d.valid());
    }

    #[test]
    fn rejects_non_proper() {
        let sf = build_sequence_form(&fixtures::fig1());
        assert!(matches!(delta_from_eps_proper(&sf, &sf.uniform_plan(), 1e-3), Err(Error::Precondition(_))));
    }
}
