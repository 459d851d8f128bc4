//! Refinement machinery in the sequence form: lead and committed-max payoffs,
//! best-response sequences, ε-certificates, the perturbation family and the
//! perturbed polytope with its KKT system.

mod certify;
mod delta;
mod kkt;
mod lift;
mod payoff;
mod perturb;

pub use certify::{
    check_eps_perfect_sf, check_eps_proper_nf, check_eps_proper_nf_closure, check_eps_proper_sf, check_eps_quasi_perfect_sf,
    check_eps_quasi_proper_sf, check_nash_sequence_form, Certificate, Definition, Violation,
};
pub use delta::{delta_from_eps_proper, DeltaConstruction};
pub use kkt::{perturbed_kkt_residual, KktPoint, KktResidual};
pub use lift::{proper_lift, ProperLift};
pub use payoff::{
    committed_max, committed_values, is_best_response_sequence, is_global_best_response, lead_payoff,
    CommittedValues,
};
pub use perturb::{
    enumerate_perturbation_sets, polytope_membership, reduced_membership, DeltaVector, MembershipReport,
    PerturbationFamily, PlayerFamily, DEFAULT_FAMILY_CAP,
};

use crate::forms::SequenceForm;
use serde::Serialize;

/// κ_i(ϖ): one plus the free variables of all info sets following ϖ.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KappaTable {
    pub players: Vec<Vec<usize>>,
}

impl KappaTable {
    pub fn new(sf: &SequenceForm) -> Self {
        let players = sf
            .players
            .iter()
            .map(|p| {
                p.followers
                    .iter()
                    .map(|js| 1 + js.iter().map(|&k| p.infosets[k].num_actions - 1).sum::<usize>())
                    .collect()
            })
            .collect();
        KappaTable { players }
    }

    /// κ_i(∅).
    pub fn root(&self, i: usize) -> usize {
        self.players[i][0]
    }
}

/// Comparison slack for strict payoff inequalities.
pub fn payoff_slack(sf: &SequenceForm) -> f64 {
    1e-9 * sf.max_abs_payoff.max(1.0)
}
