mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plans_satisfy_flow(seed in 0u64..10_000, floor in 0.0f64..1.0) {
        flow_invariants(seed, floor);
    }

    #[test]
    fn local_and_global_best_response_agree(seed in 0u64..10_000) {
        best_response_agreement(seed);
    }
}

#[test]
fn payoff_equivalence() {
    normal_and_sequence_payoffs_agree();
}

#[test]
fn nash_equivalence() {
    sequence_nash_matches_normal_form_nash();
}

#[test]
fn membership_equivalence() {
    reduced_and_full_membership_agree();
}

#[test]
fn perturbation_family() {
    family_enumeration_matches_subset_filter();
}

#[test]
fn homotopy_identities() {
    assert!(substitution_identities() >= 20_000);
}

#[test]
fn start_points() {
    assert!(start_residuals() <= 1e-10);
}

#[test]
fn jacobians() {
    assert!(jacobian_fd() <= 1e-5);
}
