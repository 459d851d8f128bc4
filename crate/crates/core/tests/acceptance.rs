//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use properpath::bench::{run_bench, BenchConfig};
use properpath::forms::{build_normal_form, build_sequence_form, realization_of, NormalForm, SequenceForm};
use properpath::refine::{check_eps_proper_nf, check_eps_proper_sf, enumerate_perturbation_sets, DEFAULT_FAMILY_CAP};
use properpath::{fixtures, solve, GameTree, Method, MixedProfile, RealizationProfile, SolveOptions, SolveReport};
use rayon::prelude::*;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

const CATALOG_TOL: f64 = 1e-2;
const EXCLUDED_TOL: f64 = 5e-2;
const T_END: f64 = 1e-4;
const C1_RUNS: u64 = 50;
const C1_BUDGET_S: f64 = 120.0;
const C2_RUNS: u64 = 10;
const C3_RUNS: u64 = 20;

struct Fixture {
    game: GameTree,
    sf: SequenceForm,
    nf: NormalForm,
    catalog: Vec<MixedProfile>,
    catalog_plans: Vec<RealizationProfile>,
}

impl Fixture {
    fn new(game: GameTree, catalog: Vec<Vec<Vec<f64>>>) -> Self {
        let sf = build_sequence_form(&game);
        let nf = build_normal_form(&game, 1_000_000).unwrap();
        let catalog: Vec<MixedProfile> = catalog.into_iter().map(MixedProfile::new).collect();
        let catalog_plans = catalog.iter().map(|s| realization_of(&sf, &nf.strategies, s).unwrap()).collect();
        Fixture { game, sf, nf, catalog, catalog_plans }
    }

    fn run(&self, method: Method, seed: u64) -> SolveReport {
        let mut opts = SolveOptions::seeded(method, seed);
        opts.catalog = Some(self.catalog.clone());
        opts.catalog_tol = CATALOG_TOL;
        solve(&self.game, &opts).unwrap()
    }

    /// Index of the catalog entry within tolerance, in mixed or plan space.
    fn classify(&self, r: &SolveReport) -> Option<usize> {
        let eq = r.equilibrium.as_ref()?;
        (0..self.catalog.len()).find(|&k| {
            let mixed = eq.sigma.as_ref().is_some_and(|s| s.distance(&self.catalog[k]) <= CATALOG_TOL);
            mixed || eq.gamma.distance(&self.catalog_plans[k]) <= CATALOG_TOL
        })
    }

    fn runs(&self, n: u64) -> Vec<(Method, u64, SolveReport)> {
        let jobs: Vec<(Method, u64)> = Method::ALL.iter().flat_map(|&m| (0..n).map(move |s| (m, s))).collect();
        jobs.into_par_iter().map(|(m, s)| (m, s, self.run(m, s))).collect()
    }
}

fn converged(r: &SolveReport) -> bool {
    r.converged() && r.final_t < T_END && r.equilibrium.is_some()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, title: &str, o: &Outcome) {
    println!("criterion {id} [{}] {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn criterion1(fx: &Fixture, runs: &[(Method, u64, SolveReport)], secs: f64) -> Outcome {
    let excluded = MixedProfile::new(fixtures::fig1_excluded());
    let excluded_plan = realization_of(&fx.sf, &fx.nf.strategies, &excluded).unwrap();
    let mut hits = vec![0usize; fx.catalog.len()];
    let (mut bad, mut near_excluded) = (0, 0);
    for (_, _, r) in runs {
        match (converged(r), fx.classify(r)) {
            (true, Some(k)) => hits[k] += 1,
            _ => bad += 1,
        }
        if let Some(eq) = &r.equilibrium {
            let mixed = eq.sigma.as_ref().is_some_and(|s| s.distance(&excluded) <= EXCLUDED_TOL);
            if mixed || eq.gamma.distance(&excluded_plan) <= EXCLUDED_TOL {
                near_excluded += 1;
            }
        }
    }
    Outcome {
        pass: bad == 0 && near_excluded == 0 && secs < C1_BUDGET_S,
        detail: format!(
            "{} runs, {bad} outside catalog, catalog hits {hits:?}, {near_excluded} near excluded profile, {secs:.1}s",
            runs.len()
        ),
    }
}

fn criterion2(fx: &Fixture, runs: &[(Method, u64, SolveReport)]) -> Outcome {
    let table_ok = fig2_table_matches(&fx.nf);
    let bad = runs.iter().filter(|(_, _, r)| !(converged(r) && fx.classify(r) == Some(0))).count();
    Outcome {
        pass: table_ok && bad == 0,
        detail: format!("normal form matches table: {table_ok}; {} runs, {bad} off the equilibrium", runs.len()),
    }
}

fn criterion3(fx: &Fixture, runs: &[(Method, u64, SolveReport)]) -> Outcome {
    let table_ok = fig3_table_matches(&fx.nf);
    let mut hits = vec![0usize; fx.catalog.len()];
    let mut bad = 0;
    for (_, _, r) in runs {
        match (converged(r), fx.classify(r)) {
            (true, Some(k)) => hits[k] += 1,
            _ => bad += 1,
        }
    }
    let distinct = hits.iter().filter(|&&h| h > 0).count();
    Outcome {
        pass: table_ok && bad == 0 && distinct >= 2,
        detail: format!(
            "normal form matches table: {table_ok}; {} runs, {bad} outside catalog, hits {hits:?}, {distinct} distinct",
            runs.len()
        ),
    }
}

fn fig2_table_matches(nf: &NormalForm) -> bool {
    let t = [
        [[1., 3., 0.], [1., 3., 0.], [2., 0., 0.], [2., 0., 0.]],
        [[1., 3., 0.], [1., 3., 0.], [0., 0., 5.], [4., 4., 0.]],
        [[0., 0., 0.], [3., 0., 3.], [0., 0., 0.], [3., 0., 3.]],
    ];
    nf.shape == vec![3, 2, 2]
        && t.iter().enumerate().all(|(s1, row)| row.iter().enumerate().all(|(c, u)| nf.payoff(&[s1, c / 2, c % 2]) == u))
}

fn fig3_table_matches(nf: &NormalForm) -> bool {
    let t = [
        [[11., 3.], [11., 3.], [3., 0.], [3., 0.]],
        [[0., 2.], [12., 0.], [0., 7.], [12., 5.]],
        [[6., 0.], [0., 1.], [6., 0.], [0., 1.]],
    ];
    nf.shape == vec![3, 4] && t.iter().enumerate().all(|(a, row)| row.iter().enumerate().all(|(b, u)| nf.payoff(&[a, b]) == u))
}

fn criterion4() -> Outcome {
    let cfg = BenchConfig::default();
    let rep = run_bench(&cfg).unwrap();
    let failures: usize = rep.summaries.iter().map(|s| s.failures).sum();
    let cells: Vec<String> = rep
        .summaries
        .iter()
        .map(|s| format!("{} {} {}/{} median {} iters", s.cell, s.method, s.runs - s.failures, s.runs, s.iterations.median))
        .collect();
    Outcome {
        pass: failures == 0 && rep.summaries.iter().all(|s| s.runs == cfg.runs),
        detail: format!(
            "caps {} iterations / {}s; {failures} failures; {}",
            cfg.max_iterations,
            cfg.max_time_s,
            cells.join(", ")
        ),
    }
}

fn criterion5() -> Outcome {
    let checks: Vec<(&str, Box<dyn Fn() -> String>)> = vec![
        ("flow invariants", Box::new(|| {
            (0..100).for_each(|s| common::flow_invariants(s, (s % 10) as f64 / 10.0));
            "100 seeds".into()
        })),
        ("u=g equivalence", Box::new(|| {
            common::normal_and_sequence_payoffs_agree();
            "20 games x 100 profiles".into()
        })),
        ("substitution identities", Box::new(|| format!("{} samples", common::substitution_identities()))),
        ("start residuals", Box::new(|| format!("max {:.1e}", common::start_residuals()))),
        ("jacobian vs differences", Box::new(|| format!("max rel {:.1e}", common::jacobian_fd()))),
        ("local vs global best response", Box::new(|| {
            (0..100).for_each(common::best_response_agreement);
            "100 seeds".into()
        })),
        ("reduced vs full membership", Box::new(|| {
            common::reduced_and_full_membership_agree();
            "300 plans".into()
        })),
        ("sequence vs normal-form nash", Box::new(|| {
            common::sequence_nash_matches_normal_form_nash();
            "52 games".into()
        })),
        ("perturbation family enumeration", Box::new(|| {
            common::family_enumeration_matches_subset_filter();
            let sf = build_sequence_form(&fixtures::fig1());
            let fam = enumerate_perturbation_sets(&sf, DEFAULT_FAMILY_CAP).unwrap();
            format!("fig1 counts {:?}", fam.counts())
        })),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, f) in &checks {
        match catch_unwind(AssertUnwindSafe(f)) {
            Ok(d) => parts.push(format!("{name} ok ({d})")),
            Err(_) => {
                pass = false;
                parts.push(format!("{name} FAILED"));
            }
        }
    }
    Outcome { pass, detail: parts.join("; ") }
}

fn criterion6(all: &[(&Fixture, &[(Method, u64, SolveReport)])]) -> Outcome {
    let (mut total, mut sf_fail, mut nf_fail, mut missing, mut companion_fail) = (0, 0, 0, 0, 0);
    for (fx, runs) in all {
        for (_, _, r) in runs.iter() {
            if !converged(r) {
                continue;
            }
            total += 1;
            let Some(w) = r.equilibrium.as_ref().and_then(|e| e.proper.as_ref()) else {
                missing += 1;
                continue;
            };
            // re-check independently of the stored certificates
            if !(w.t >= 10.0 * T_END && w.epsilon < 1.0 && check_eps_proper_sf(&fx.sf, &w.plan, w.epsilon).unwrap().pass) {
                sf_fail += 1;
            }
            match &w.lift {
                Some(l) if check_eps_proper_nf(&fx.nf, &l.profile, l.epsilon_nf).map(|c| c.pass).unwrap_or(false) => {}
                _ => nf_fail += 1,
            }
            if !w.companion.as_ref().is_some_and(|c| c.pass) {
                companion_fail += 1;
            }
        }
    }
    Outcome {
        pass: total > 0 && sf_fail == 0 && nf_fail == 0 && missing == 0,
        detail: format!(
            "{total} converged runs; sequence-form failures {sf_fail}, normal-form (lift) failures {nf_fail}, \
             missing witness {missing}; diagnostic closure check on the companion profile failed on {companion_fail}"
        ),
    }
}

fn main() {
    let start = Instant::now();
    let fig1 = Fixture::new(fixtures::fig1(), fixtures::fig1_catalog());
    let fig2 = Fixture::new(fixtures::fig2(), fixtures::fig2_catalog());
    let fig3 = Fixture::new(fixtures::fig3(), fixtures::fig3_catalog());

    let t1 = Instant::now();
    let runs1 = fig1.runs(C1_RUNS);
    let secs1 = t1.elapsed().as_secs_f64();
    let runs2 = fig2.runs(C2_RUNS);
    let runs3 = fig3.runs(C3_RUNS);

    let outcomes = [
        (1, "fig1 runs land on cataloged proper equilibria", criterion1(&fig1, &runs1, secs1)),
        (2, "fig2 runs reach the unique equilibrium", criterion2(&fig2, &runs2)),
        (3, "fig3 runs spread over cataloged equilibria", criterion3(&fig3, &runs3)),
        (4, "benchmark smoke cells finish within caps", criterion4()),
        (5, "property suites", criterion5()),
        (6, "certificate chain at the last interior iterate", criterion6(&[(&fig1, &runs1), (&fig2, &runs2), (&fig3, &runs3)])),
    ];
    for (id, title, o) in &outcomes {
        report(*id, title, o);
    }
    let failed = outcomes.iter().filter(|(_, _, o)| !o.pass).count();
    println!("acceptance: {} of {} criteria passed in {:.1}s", outcomes.len() - failed, outcomes.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
