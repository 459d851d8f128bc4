#![allow(dead_code)]

use properpath::forms::{
    build_normal_form, build_sequence_form, expected_payoff_nf, expected_payoff_sf, realization_of, MixedProfile,
    NormalForm, SequenceForm,
};
use properpath::game::{generate_random, GeneratorKind, GeneratorParams};
use properpath::homotopy::{c_of_t, psi, sample_alpha, HomotopyConfig, HomotopyState, HomotopySystem};
use properpath::oracles::{brute_force_best_response, finite_difference};
use properpath::refine::{
    check_nash_sequence_form, enumerate_perturbation_sets, is_best_response_sequence, is_global_best_response,
    polytope_membership, reduced_membership, DeltaVector, KappaTable, DEFAULT_FAMILY_CAP,
};
use properpath::solve::flow_exact;
use properpath::{fixtures, GameTree, Method};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn small_game(seed: u64) -> GameTree {
    let kind = if seed % 2 == 0 { GeneratorKind::Type1 } else { GeneratorKind::Type2 };
    let depth = 2 + (seed / 2 % 2) as usize;
    let depth = if kind == GeneratorKind::Type2 { 2 } else { depth };
    generate_random(&GeneratorParams::new(kind, 2, depth, 2, seed)).unwrap()
}

pub fn random_mixed(nf: &NormalForm, rng: &mut ChaCha8Rng) -> MixedProfile {
    MixedProfile::new(
        nf.shape
            .iter()
            .map(|&m| {
                let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|x| x / s).collect()
            })
            .collect(),
    )
}

pub fn games() -> Vec<GameTree> {
    let mut g = vec![fixtures::fig1(), fixtures::fig2(), fixtures::fig3()];
    g.extend((0..12).map(small_game));
    g
}

/// Flow and normalization of random, repaired and mixed-induced plans.
pub fn flow_invariants(seed: u64, floor: f64) {
    let g = small_game(seed);
    let sf = build_sequence_form(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan = sf.random_plan(&mut rng, floor);
    assert!(sf.flow_violation(&plan) < 1e-12);
    assert!(plan.plans.iter().all(|p| p[0] == 1.0 && p.iter().all(|&x| x > 0.0 && x <= 1.0)));
    // noisy plans are repaired exactly, keeping behavior ratios
    let mut noisy = plan.clone();
    for p in noisy.plans.iter_mut() {
        for x in p.iter_mut().skip(1) {
            *x *= 1.0 + 1e-3 * (rng.random::<f64>() - 0.5);
        }
    }
    assert!(sf.flow_violation(&flow_exact(&sf, &noisy)) < 1e-12);
    let nf = build_normal_form(&g, 100_000).unwrap();
    let sigma = random_mixed(&nf, &mut rng);
    let gamma = realization_of(&sf, &nf.strategies, &sigma).unwrap();
    assert!(sf.flow_violation(&gamma) < 1e-12);
}

/// Local recursion and global committed-max argmax pick the same sequences.
pub fn best_response_agreement(seed: u64) {
    let g = small_game(seed);
    let sf = build_sequence_form(&g);
    let plan = sf.random_plan(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed), 0.05);
    for i in 0..sf.num_players {
        for s in 0..sf.players[i].len() {
            assert_eq!(
                is_best_response_sequence(&sf, &plan, i, s).unwrap(),
                is_global_best_response(&sf, &plan, i, s).unwrap(),
                "seed {seed} player {i} seq {s}"
            );
        }
    }
}

fn fixture_systems() -> Vec<(SequenceForm, Method)> {
    let mut out = Vec::new();
    for g in [fixtures::fig1(), fixtures::fig2(), fixtures::fig3()] {
        let sf = build_sequence_form(&g);
        let m = sf.max_abs_payoff;
        for method in Method::ALL {
            out.push((sf.scaled(1.0 / m), method));
        }
    }
    out
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// ψ₁ψ₂ = (τ₀r)^κ₀ and the complementarity products y·λ (or b·λ) over 10⁴ random states.
pub fn substitution_identities() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut n = 0;
    for _ in 0..10_000 {
        let v = rng.random_range(-20.0..20.0);
        let r = rng.random_range(1e-6..10.0);
        let tau = rng.random_range(1e-6..10.0);
        let k = rng.random_range(1.1..4.0);
        let p = psi(v, r, tau, k);
        let want = (tau * r).powf(k);
        assert!((p.psi1 * p.psi2 - want).abs() <= 1e-10 * want);
        n += 1;
    }
    let systems = fixture_systems();
    let per_system = 10_000 / systems.len() + 1;
    for (sf, method) in &systems {
        let fam = enumerate_perturbation_sets(sf, DEFAULT_FAMILY_CAP).unwrap();
        let cfg = HomotopyConfig::new(*method);
        let k0 = cfg.kappa0;
        let sys = HomotopySystem::new(sf, &fam, cfg, vec![0.0; sf.n0()], sf.uniform_plan()).unwrap();
        let (y0, _) = sys.multipliers(&sys.start().z, 1.0);
        let layout = sys.layout().clone();
        for _ in 0..per_system {
            let t = rng.random_range(0.05..1.0);
            let z: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
            let (y, lam) = sys.multipliers(&z, t);
            let c = c_of_t(t);
            for i in 0..sf.num_players {
                for e in 0..y[i].len() {
                    let (got, want) = match method {
                        Method::Lgpr => (y[i][e] * lam[i][e], c * y0[i][e]),
                        Method::Etpr => (psi(z[layout.x[i] + e], c.powf(1.0 / k0), 1.0, k0).psi1 * lam[i][e], c),
                    };
                    assert!((got - want).abs() <= 1e-10 * want, "{method}: {got} vs {want}");
                    n += 1;
                }
            }
        }
    }
    n
}

/// Closed-form starts solve H(·,1) = 0 and the start Jacobian is invertible.
pub fn start_residuals() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for (sf, method) in fixture_systems() {
        let fam = enumerate_perturbation_sets(&sf, DEFAULT_FAMILY_CAP).unwrap();
        let cfg = HomotopyConfig::new(method);
        for g0 in [sf.uniform_plan(), sf.random_plan(&mut rng, 0.1)] {
            let sys = HomotopySystem::new(&sf, &fam, cfg.clone(), sample_alpha(&cfg, sf.n0()), g0).unwrap();
            let st = sys.start();
            let r = inf_norm(&sys.residual(&st).unwrap());
            assert!(r <= 1e-10, "{method}: {r}");
            worst = worst.max(r);
            let j = sys.jacobian(&st).unwrap();
            assert!(j.columns(0, sys.dim()).into_owned().lu().try_inverse().is_some());
        }
    }
    worst
}

/// Analytic Jacobian against central differences, relative to the largest entry.
pub fn jacobian_fd() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for (sf, method) in fixture_systems() {
        let fam = enumerate_perturbation_sets(&sf, DEFAULT_FAMILY_CAP).unwrap();
        let cfg = HomotopyConfig { alpha_seed: 9, ..HomotopyConfig::new(method) };
        let alpha = sample_alpha(&cfg, sf.n0());
        let sys = HomotopySystem::new(&sf, &fam, cfg, alpha, sf.random_plan(&mut rng, 0.2)).unwrap();
        for _ in 0..20 {
            let mut st = sys.start();
            st.t = rng.random_range(0.1..1.0);
            for v in &mut st.z {
                *v += rng.random_range(-0.3..0.3);
            }
            let j = sys.jacobian(&st).unwrap();
            let mut point = st.z.clone();
            point.push(st.t);
            let fd = finite_difference(
                |p: &[f64]| sys.residual(&HomotopyState { z: p[..p.len() - 1].to_vec(), t: p[p.len() - 1] }).unwrap(),
                &point,
                1e-6,
            );
            let err = (&j - &fd).abs().max() / fd.abs().max().max(1.0);
            assert!(err <= 1e-5, "{method}: {err}");
            worst = worst.max(err);
        }
    }
    worst
}

pub fn normal_and_sequence_payoffs_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for seed in 0..20u64 {
        let g = small_game(seed + 100);
        let sf = build_sequence_form(&g);
        let nf = build_normal_form(&g, 100_000).unwrap();
        let scale = sf.max_abs_payoff.max(1.0);
        for _ in 0..100 {
            let sigma = random_mixed(&nf, &mut rng);
            let u = expected_payoff_nf(&nf, &sigma).unwrap().total;
            let gamma = realization_of(&sf, &nf.strategies, &sigma).unwrap();
            let gs = expected_payoff_sf(&sf, &gamma).unwrap().total;
            for (a, b) in u.iter().zip(&gs) {
                assert!((a - b).abs() <= 1e-9 * scale, "game {seed}: {a} vs {b}");
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 2000);
}

pub fn nf_is_nash(nf: &NormalForm, sigma: &MixedProfile, tol: f64) -> bool {
    let u = expected_payoff_nf(nf, sigma).unwrap().total;
    (0..nf.num_players).all(|i| brute_force_best_response(nf, sigma, i).unwrap().value <= u[i] + tol)
}

pub fn sequence_nash_matches_normal_form_nash() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut games: Vec<GameTree> = vec![fixtures::fig1(), fixtures::fig3()];
    games.extend((0..50).map(|s| small_game(200 + 2 * s)));
    let (mut agree_pass, mut agree_fail) = (0, 0);
    for g in &games {
        let sf = build_sequence_form(g);
        let nf = build_normal_form(g, 100_000).unwrap();
        let scale = sf.max_abs_payoff.max(1e-300);
        let tol = 1e-8;
        let mut candidates: Vec<MixedProfile> = (0..nf.num_profiles()).map(|k| nf.strategies.pure_profile(&nf.unflatten(k))).collect();
        candidates.extend((0..5).map(|_| random_mixed(&nf, &mut rng)));
        for sigma in &candidates {
            let gamma = realization_of(&sf, &nf.strategies, sigma).unwrap();
            let sfc = check_nash_sequence_form(&sf, &gamma, tol).unwrap().pass;
            let nfc = nf_is_nash(&nf, sigma, tol * scale);
            assert_eq!(sfc, nfc, "{} {:?}", g.name, sigma.weights);
            if sfc {
                agree_pass += 1;
            } else {
                agree_fail += 1;
            }
        }
    }
    for (g, cat) in [(fixtures::fig1(), fixtures::fig1_catalog()), (fixtures::fig3(), fixtures::fig3_catalog())] {
        let sf = build_sequence_form(&g);
        let nf = build_normal_form(&g, 100_000).unwrap();
        for w in cat {
            let sigma = MixedProfile::new(w);
            let gamma = realization_of(&sf, &nf.strategies, &sigma).unwrap();
            assert!(check_nash_sequence_form(&sf, &gamma, 1e-8).unwrap().pass);
            assert!(nf_is_nash(&nf, &sigma, 1e-8 * sf.max_abs_payoff));
        }
    }
    assert!(agree_pass > 50 && agree_fail > 50, "{agree_pass} {agree_fail}");
}

pub fn reduced_and_full_membership_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut members, mut non_members) = (0, 0);
    for g in [fixtures::fig1(), fixtures::fig2(), fixtures::fig3()] {
        let sf = build_sequence_form(&g);
        let fam = enumerate_perturbation_sets(&sf, DEFAULT_FAMILY_CAP).unwrap();
        for _ in 0..100 {
            let floor = rng.random_range(0.0..0.3);
            let plan = sf.random_plan(&mut rng, floor);
            let eps = 10f64.powf(rng.random_range(-3.0..-0.5));
            let delta = DeltaVector::uniform(&fam.kappa, eps);
            let full = polytope_membership(&sf, &fam, &delta, &plan).unwrap();
            let reduced = reduced_membership(&sf, &plan, &delta).unwrap();
            assert_eq!(full.member, reduced.member, "{} eps {eps}", g.name);
            assert!(reduced.min_slack >= full.min_slack - 1e-12);
            if full.member {
                members += 1;
            } else {
                non_members += 1;
            }
        }
    }
    assert!(members > 0 && non_members > 0, "{members} {non_members}");
}

/// Every subset of nonempty sequences that is an antichain and contains no full
/// sibling set, by exhaustive filtering.
pub fn brute_force_family(sf: &SequenceForm, i: usize) -> Vec<Vec<usize>> {
    let p = &sf.players[i];
    let w: Vec<usize> = (1..p.len()).collect();
    assert!(w.len() <= 12);
    let mut out = Vec::new();
    for mask in 1u32..(1 << w.len()) {
        let set: Vec<usize> = w.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &s)| s).collect();
        let antichain = set.iter().all(|&a| set.iter().all(|&b| a == b || !p.is_prefix(a, b)));
        let no_full_siblings = p.infosets.iter().all(|h| !h.extensions().all(|s| set.contains(&s)));
        if antichain && no_full_siblings {
            out.push(set);
        }
    }
    out.sort();
    out
}

pub fn family_enumeration_matches_subset_filter() {
    let mut checked = 0;
    for g in games() {
        let sf = build_sequence_form(&g);
        let fam = enumerate_perturbation_sets(&sf, DEFAULT_FAMILY_CAP).unwrap();
        let kappa = KappaTable::new(&sf);
        for i in 0..sf.num_players {
            if sf.players[i].len() - 1 > 12 {
                continue;
            }
            let mut got = fam.players[i].sets.clone();
            got.sort();
            assert_eq!(got, brute_force_family(&sf, i), "{} player {}", g.name, i + 1);
            for (set, &q) in fam.players[i].sets.iter().zip(&fam.players[i].q) {
                assert_eq!(q, set.iter().map(|&s| kappa.players[i][s]).sum::<usize>());
            }
            checked += 1;
        }
    }
    let sf = build_sequence_form(&fixtures::fig1());
    assert_eq!(brute_force_family(&sf, 0).len(), 18);
    assert!(checked >= 20, "{checked}");
}
