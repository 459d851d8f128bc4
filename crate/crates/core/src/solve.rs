//! End-to-end pipeline: game → sequence form → homotopy → trace → certified equilibrium.

use crate::error::{Error, Result};
use crate::forms::{
    build_normal_form, build_sequence_form, expected_payoff_sf, mixed_from_plan, MixedProfile, NormalForm,
    RealizationProfile, SequenceForm,
};
use crate::game::{validate_game, GameTree};
use crate::homotopy::{sample_alpha, HomotopyConfig, HomotopySystem, Method};
use crate::oracles::{compare_catalog, CatalogMatch};
use crate::refine::{
    check_eps_proper_nf_closure, check_eps_proper_sf, check_nash_sequence_form, enumerate_perturbation_sets,
    proper_lift, Certificate, ProperLift, DEFAULT_FAMILY_CAP,
};
use crate::tracer::{trace, PathTrace, TraceStatus, TracerOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    Uniform,
    Random,
    /// Explicit start plan (unscaled game, strictly positive).
    Plan(RealizationProfile),
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveOptions {
    pub homotopy: HomotopyConfig,
    pub tracer: TracerOptions,
    pub start: StartKind,
    /// Seed for the random start.
    pub seed: u64,
    pub family_cap: usize,
    /// Cap on joint reduced-strategy profiles for the normal-form outputs.
    pub normal_form_cap: usize,
    /// Nash tolerance for the endpoint certificate.
    pub nash_tol: f64,
    pub certify: bool,
    #[serde(skip)]
    pub catalog: Option<Vec<MixedProfile>>,
    pub catalog_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            homotopy: HomotopyConfig::default(),
            tracer: TracerOptions::default(),
            start: StartKind::Uniform,
            seed: 0,
            family_cap: DEFAULT_FAMILY_CAP,
            normal_form_cap: 1_000_000,
            nash_tol: 1e-4,
            certify: true,
            catalog: None,
            catalog_tol: 1e-2,
        }
    }
}

impl SolveOptions {
    /// Method, random start and α all keyed by `seed`.
    pub fn seeded(method: Method, seed: u64) -> Self {
        let mut o = SolveOptions { start: StartKind::Random, seed, ..Default::default() };
        o.homotopy.method = method;
        o.homotopy.alpha_seed = seed;
        o
    }
}

/// Proper-test witness taken from the path before its final stretch.
#[derive(Debug, Clone, Serialize)]
pub struct ProperWitness {
    pub t: f64,
    pub epsilon: f64,
    pub sequence_form: Certificate,
    /// Totally mixed lift with the same realization, tested at ε^{1/(2w₀)}.
    pub lift: Option<ProperLift>,
    /// √ε test of the companion profile itself (zero entries allowed).
    pub companion: Option<Certificate>,
    #[serde(skip)]
    pub plan: RealizationProfile,
}

impl ProperWitness {
    /// Sequence-form test and the normal-form test of the lift both pass.
    pub fn pass(&self) -> bool {
        self.sequence_form.pass && self.epsilon < 1.0 && self.lift.as_ref().is_some_and(|l| l.certificate.pass)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Equilibrium {
    /// Per player, (sequence label, weight).
    pub plan: Vec<Vec<(String, f64)>>,
    #[serde(skip)]
    pub gamma: RealizationProfile,
    /// Mixed profile over reduced strategies with their labels.
    pub mixed: Option<Vec<Vec<(String, f64)>>>,
    #[serde(skip)]
    pub sigma: Option<MixedProfile>,
    pub payoffs: Vec<f64>,
    pub nash: Certificate,
    pub proper: Option<ProperWitness>,
    pub catalog: Option<CatalogMatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub game: String,
    pub method: Method,
    pub homotopy: HomotopyConfig,
    pub tracer: TracerOptions,
    pub start: String,
    pub seed: u64,
    pub alpha: Vec<f64>,
    pub payoff_scale: f64,
    pub family_sizes: Vec<usize>,
    pub dimension: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub metadata: RunMetadata,
    pub status: TraceStatus,
    pub iterations: usize,
    pub rejected: usize,
    pub elapsed_s: f64,
    pub final_t: f64,
    pub equilibrium: Option<Equilibrium>,
    #[serde(skip)]
    pub trace: PathTrace,
    #[serde(skip)]
    pub gamma_labels: Vec<Vec<String>>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.status == TraceStatus::Converged
    }
}

/// Rescale each info set's extensions so flow holds exactly, keeping the behavior ratios.
pub fn flow_exact(sf: &SequenceForm, gamma: &RealizationProfile) -> RealizationProfile {
    let beh: Vec<Vec<Vec<f64>>> = sf
        .players
        .iter()
        .enumerate()
        .map(|(i, p)| {
            p.infosets
                .iter()
                .map(|info| {
                    let w: Vec<f64> = info.extensions().map(|s| gamma[i][s].max(0.0)).collect();
                    let s: f64 = w.iter().sum();
                    if s > 0.0 {
                        w.into_iter().map(|x| x / s).collect()
                    } else {
                        vec![1.0 / info.num_actions as f64; info.num_actions]
                    }
                })
                .collect()
        })
        .collect();
    sf.plan_from_behavior(&beh)
}

/// Euclidean projection of `w` onto {x ≥ 0, Σx = total}.
fn project_simplex(w: &[f64], total: f64) -> Vec<f64> {
    let mut u = w.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        acc += x;
        let th = (acc - total) / (k + 1) as f64;
        if x - th > 0.0 {
            theta = th;
        }
    }
    w.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Zero every weight below `threshold`, then restore flow top-down by projecting
/// each info set's surviving extensions onto the parent's mass.
pub fn clamp_plan(sf: &SequenceForm, gamma: &RealizationProfile, threshold: f64) -> RealizationProfile {
    let plans = sf
        .players
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut out = vec![0.0; p.len()];
            out[0] = 1.0;
            let mut order: Vec<usize> = (0..p.infosets.len()).collect();
            order.sort_by_key(|&k| p.sequences[p.infosets[k].parent_seq].depth);
            for k in order {
                let info = &p.infosets[k];
                let mass = out[info.parent_seq];
                if mass == 0.0 {
                    continue;
                }
                let ext: Vec<usize> = info.extensions().collect();
                let support: Vec<usize> = ext.iter().copied().filter(|&s| gamma[i][s] >= threshold).collect();
                if support.is_empty() {
                    let best = *ext.iter().max_by(|&&a, &&b| gamma[i][a].total_cmp(&gamma[i][b])).unwrap();
                    out[best] = mass;
                    continue;
                }
                let w: Vec<f64> = support.iter().map(|&s| gamma[i][s]).collect();
                for (&s, x) in support.iter().zip(project_simplex(&w, mass)) {
                    out[s] = x;
                }
            }
            out
        })
        .collect();
    RealizationProfile::new(plans)
}

fn labeled(labels: &[Vec<String>], values: &[Vec<f64>]) -> Vec<Vec<(String, f64)>> {
    labels.iter().zip(values).map(|(l, v)| l.iter().cloned().zip(v.iter().copied()).collect()).collect()
}

pub fn solve(game: &GameTree, opts: &SolveOptions) -> Result<SolveReport> {
    let report = validate_game(game);
    if !report.perfect_recall {
        let v = &report.violations[0];
        return Err(Error::InvalidGame(format!("player {} lacks perfect recall at information set {}", v.player, v.infoset)));
    }
    let sf = build_sequence_form(game);
    let scale = if sf.max_abs_payoff > 0.0 { sf.max_abs_payoff } else { 1.0 };
    let scaled = sf.scaled(1.0 / scale);
    let fam = enumerate_perturbation_sets(&scaled, opts.family_cap)?;
    let gamma0 = match &opts.start {
        StartKind::Uniform => sf.uniform_plan(),
        StartKind::Random => sf.random_plan(&mut ChaCha8Rng::seed_from_u64(opts.seed), 0.1),
        StartKind::Plan(p) => p.clone(),
    };
    let alpha = sample_alpha(&opts.homotopy, sf.n0());
    let sys = HomotopySystem::new(&scaled, &fam, opts.homotopy.clone(), alpha.clone(), gamma0)?;
    let tr = trace(&sys, sys.start(), &opts.tracer)?;
    let gamma_labels: Vec<Vec<String>> =
        sf.players.iter().map(|p| p.sequences.iter().map(|s| s.label.clone()).collect()).collect();
    let metadata = RunMetadata {
        game: game.name.clone(),
        method: opts.homotopy.method,
        homotopy: opts.homotopy.clone(),
        tracer: opts.tracer.clone(),
        start: match &opts.start {
            StartKind::Uniform => "uniform".into(),
            StartKind::Random => "random".into(),
            StartKind::Plan(_) => "file".into(),
        },
        seed: opts.seed,
        alpha,
        payoff_scale: scale,
        family_sizes: fam.counts(),
        dimension: sys.dim(),
    };
    let equilibrium = if tr.converged() { Some(extract(game, &sf, &sys, &tr, opts, &gamma_labels)?) } else { None };
    let last = tr.last().state.t;
    Ok(SolveReport {
        metadata,
        status: tr.status,
        iterations: tr.iterations,
        rejected: tr.rejected,
        elapsed_s: tr.elapsed_s,
        final_t: last,
        equilibrium,
        trace: tr,
        gamma_labels,
    })
}

fn extract(
    game: &GameTree,
    sf: &SequenceForm,
    sys: &HomotopySystem,
    tr: &PathTrace,
    opts: &SolveOptions,
    labels: &[Vec<String>],
) -> Result<Equilibrium> {
    let t_end = opts.tracer.t_end;
    let threshold = 1e-3 * t_end / opts.homotopy.omega0;
    let raw = flow_exact(sf, &sys.gamma_of(&tr.last().state.z));
    let gamma = clamp_plan(sf, &raw, threshold);
    let payoffs = expected_payoff_sf(sf, &gamma)?.total;
    let nash = check_nash_sequence_form(sf, &gamma, opts.nash_tol)?;
    let nf: Option<NormalForm> = build_normal_form(game, opts.normal_form_cap).ok();
    let sigma = match &nf {
        Some(nf) if raw.min_weight() > 0.0 => {
            let m = mixed_from_plan(sf, &nf.strategies, &raw)?;
            let weights = m
                .profile
                .weights
                .into_iter()
                .map(|w| {
                    let w: Vec<f64> = w.into_iter().map(|x| if x < threshold { 0.0 } else { x }).collect();
                    let s: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / s).collect()
                })
                .collect();
            Some(MixedProfile::new(weights))
        }
        _ => None,
    };
    let proper = if opts.certify {
        tr.last_with_t_at_least(10.0 * t_end)
            .map(|pt| proper_witness(sf, nf.as_ref(), &flow_exact(sf, &sys.gamma_of(&pt.state.z)), pt.state.t))
            .transpose()?
    } else {
        None
    };
    let catalog = match (&opts.catalog, &nf, &sigma) {
        (Some(cat), Some(nf), Some(s)) => Some(compare_catalog(sf, &nf.strategies, s, cat, opts.catalog_tol)?),
        _ => None,
    };
    let mixed = match (&nf, &sigma) {
        (Some(nf), Some(s)) => {
            let names: Vec<Vec<String>> =
                nf.strategies.players.iter().map(|ps| ps.iter().map(|p| p.label.clone()).collect()).collect();
            Some(labeled(&names, &s.weights))
        }
        _ => None,
    };
    Ok(Equilibrium { plan: labeled(labels, &gamma.plans), gamma, mixed, sigma, payoffs, nash, proper, catalog })
}

/// ε-proper test of an interior path plan at its realized ε, plus the √ε test of its mixed image.
pub fn proper_witness(sf: &SequenceForm, nf: Option<&NormalForm>, plan: &RealizationProfile, t: f64) -> Result<ProperWitness> {
    let probe = check_eps_proper_sf(sf, plan, 1.0)?;
    let epsilon = probe.realized_epsilon.unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let sequence_form = check_eps_proper_sf(sf, plan, epsilon)?;
    let (lift, companion) = match nf {
        Some(nf) => {
            let m = mixed_from_plan(sf, &nf.strategies, plan)?;
            let companion = check_eps_proper_nf_closure(nf, &m.profile, epsilon.sqrt())?;
            let lift = if epsilon < 1.0 { proper_lift(sf, nf, plan, epsilon).ok() } else { None };
            (lift, Some(companion))
        }
        None => (None, None),
    };
    Ok(ProperWitness { t, epsilon, sequence_form, lift, companion, plan: plan.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn clamp_keeps_flow() {
        let sf = build_sequence_form(&fixtures::fig1());
        let g = RealizationProfile::new(vec![
            vec![1.0, 1e-9, 1.0 - 1e-9, 1e-12, 1e-9 - 1e-12, 0.4, 0.6 - 1e-9],
            vec![1.0, 3e-10, 1.0 - 3e-10],
        ]);
        let c = clamp_plan(&sf, &g, 5e-8);
        assert_eq!(sf.flow_violation(&c), 0.0);
        assert_eq!(c.plans[0][1], 0.0);
        assert_eq!(c.plans[1], vec![1.0, 0.0, 1.0]);
        assert!(c.plans.iter().flatten().all(|&x| x >= 0.0));
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.3], 1.0);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15);
        let p = project_simplex(&[2.0, 0.1], 1.0);
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn fig1_default_run() {
        let opts = SolveOptions { catalog: Some(fixtures::fig1_catalog().into_iter().map(MixedProfile::new).collect()), ..Default::default() };
        let r = solve(&fixtures::fig1(), &opts).unwrap();
        assert!(r.converged());
        let eq = r.equilibrium.unwrap();
        assert!(eq.nash.pass, "{:?}", eq.nash.violations);
        assert!(eq.nash.complementarity.unwrap() <= 1e-4);
        let m = eq.catalog.unwrap();
        assert!(m.within_tol, "{m:?} {:?}", eq.mixed);
        let w = eq.proper.unwrap();
        assert!(w.pass(), "{:?}", w.lift);
    }

    #[test]
    fn rejects_imperfect_recall() {
        let g = crate::game::parse_game(
            "game ir players 1\nnode r parent - action - owner 1 infoset 1.1 actions a,b\nnode x parent r action a owner 1 infoset 1.2 actions c,d\nnode y parent r action b owner 1 infoset 1.2 actions c,d\nleaf p parent x action c payoffs 1\nleaf q parent x action d payoffs 0\nleaf s parent y action c payoffs 0\nleaf u parent y action d payoffs 1\n",
        )
        .unwrap();
        assert!(matches!(solve(&g, &SolveOptions::default()), Err(Error::InvalidGame(_))));
    }
}
