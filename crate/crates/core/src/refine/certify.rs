use super::payoff::committed_values;
use super::payoff_slack;
use crate::error::{Error, Result};
use crate::forms::{expected_payoff_nf, MixedProfile, NormalForm, RealizationProfile, SequenceForm};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definition {
    ProperNf,
    ProperSf,
    PerfectSf,
    QuasiPerfect,
    QuasiProper,
    Nash,
}

impl Definition {
    pub fn name(self) -> &'static str {
        match self {
            Definition::ProperNf => "proper-nf",
            Definition::ProperSf => "proper-sf",
            Definition::PerfectSf => "perfect-sf",
            Definition::QuasiPerfect => "quasi-perfect",
            Definition::QuasiProper => "quasi-proper",
            Definition::Nash => "nash",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Definition::ProperNf,
            Definition::ProperSf,
            Definition::PerfectSf,
            Definition::QuasiPerfect,
            Definition::QuasiProper,
            Definition::Nash,
        ]
        .into_iter()
        .find(|d| d.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// 1-based player id.
    pub player: usize,
    /// Worse item first, then the better one when the definition compares pairs.
    pub items: Vec<String>,
    pub payoff_gap: f64,
    pub weight_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub definition: Definition,
    pub epsilon: f64,
    pub pass: bool,
    pub violations: Vec<Violation>,
    /// Total count; `violations` is truncated to `MAX_LISTED`.
    pub num_violations: usize,
    /// Smallest strict payoff gap that triggered a weight condition.
    pub margin: Option<f64>,
    /// Largest weight ratio (or weight, for perfect tests) over the strict
    /// comparisons: the smallest ε the profile passes with.
    pub realized_epsilon: Option<f64>,
    /// Largest γ(ϖ)·(g_m(∅) − g_m(ϖ)) scaled by the payoff range (Nash only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complementarity: Option<f64>,
}

const MAX_LISTED: usize = 1000;
/// Relative slack on weight comparisons.
const WEIGHT_SLACK: f64 = 1e-9;

struct Collector {
    violations: Vec<Violation>,
    count: usize,
    margin: Option<f64>,
    worst: Option<f64>,
}

impl Collector {
    fn new() -> Self {
        Collector { violations: Vec::new(), count: 0, margin: None, worst: None }
    }

    fn strict(&mut self, gap: f64) {
        self.margin = Some(self.margin.map_or(gap, |m: f64| m.min(gap)));
    }

    fn observe(&mut self, ratio: f64) {
        if !ratio.is_nan() {
            self.worst = Some(self.worst.map_or(ratio, |w: f64| w.max(ratio)));
        }
    }

    fn push(&mut self, v: Violation) {
        self.count += 1;
        if self.violations.len() < MAX_LISTED {
            self.violations.push(v);
        }
    }

    fn finish(self, definition: Definition, epsilon: f64) -> Certificate {
        Certificate {
            definition,
            epsilon,
            pass: self.count == 0,
            violations: self.violations,
            num_violations: self.count,
            margin: self.margin,
            realized_epsilon: self.worst,
            complementarity: None,
        }
    }
}

fn interior_plan(sf: &SequenceForm, gamma: &RealizationProfile) -> Result<()> {
    sf.check_shape(gamma)?;
    if gamma.min_weight() <= 0.0 {
        return Err(Error::NotInterior("realization plan has a zero entry".into()));
    }
    Ok(())
}

/// Ratio test over all pairs; `items` holds payoffs, `weights` the masses.
fn pairwise(
    c: &mut Collector,
    player: usize,
    labels: &dyn Fn(usize) -> String,
    items: &[usize],
    value: &[f64],
    weight: &[f64],
    eps: f64,
    slack: f64,
) {
    for &a in items {
        for &b in items {
            let gap = value[b] - value[a];
            if gap > slack {
                c.strict(gap);
                let ratio = weight[a] / weight[b];
                c.observe(ratio);
                if ratio > eps * (1.0 + WEIGHT_SLACK) {
                    c.push(Violation { player: player + 1, items: vec![labels(a), labels(b)], payoff_gap: gap, weight_ratio: ratio });
                }
            }
        }
    }
}

/// σ(s) ≤ ε σ(s̃) whenever u(s, σ^{-i}) < u(s̃, σ^{-i}).
pub fn check_eps_proper_nf(nf: &NormalForm, sigma: &MixedProfile, eps: f64) -> Result<Certificate> {
    if sigma.weights.iter().flatten().any(|&x| !(x > 0.0)) {
        return Err(Error::NotInterior("mixed profile is not totally mixed".into()));
    }
    check_eps_proper_nf_closure(nf, sigma, eps)
}

/// Same weight inequalities on a profile that may have zero entries: a zero
/// worse strategy passes, a zero better strategy fails against a positive worse one.
pub fn check_eps_proper_nf_closure(nf: &NormalForm, sigma: &MixedProfile, eps: f64) -> Result<Certificate> {
    let u = expected_payoff_nf(nf, sigma)?;
    if sigma.weights.iter().flatten().any(|&x| !(x >= 0.0)) {
        return Err(Error::InvalidParameter("mixed profile has a negative entry".into()));
    }
    let scale = nf.payoffs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let slack = 1e-9 * scale;
    let mut c = Collector::new();
    for i in 0..nf.num_players {
        let items: Vec<usize> = (0..nf.shape[i]).collect();
        let labels = |k: usize| nf.strategies.players[i][k].label.clone();
        pairwise(&mut c, i, &labels, &items, &u.per_pure[i], &sigma[i], eps, slack);
    }
    Ok(c.finish(Definition::ProperNf, eps))
}

fn sf_check(sf: &SequenceForm, gamma: &RealizationProfile, eps: f64, def: Definition) -> Result<Certificate> {
    interior_plan(sf, gamma)?;
    let slack = payoff_slack(sf);
    let mut c = Collector::new();
    for (i, p) in sf.players.iter().enumerate() {
        let cv = committed_values(sf, gamma, i);
        let labels = |k: usize| p.sequences[k].label.clone();
        let w = &gamma[i];
        match def {
            Definition::ProperSf => {
                let items: Vec<usize> = (0..p.len()).collect();
                pairwise(&mut c, i, &labels, &items, &cv.cm, w, eps, slack);
            }
            Definition::QuasiProper => {
                for info in &p.infosets {
                    let items: Vec<usize> = info.extensions().collect();
                    pairwise(&mut c, i, &labels, &items, &cv.cm, w, eps, slack);
                }
            }
            Definition::PerfectSf | Definition::QuasiPerfect => {
                let groups: Vec<Vec<usize>> = if def == Definition::PerfectSf {
                    vec![(0..p.len()).collect()]
                } else {
                    p.infosets.iter().map(|info| info.extensions().collect()).collect()
                };
                for items in groups {
                    let best = items.iter().map(|&k| cv.cm[k]).fold(f64::NEG_INFINITY, f64::max);
                    for &a in &items {
                        let gap = best - cv.cm[a];
                        if gap > slack {
                            c.strict(gap);
                            c.observe(w[a]);
                            if w[a] > eps * (1.0 + WEIGHT_SLACK) {
                                c.push(Violation { player: i + 1, items: vec![labels(a)], payoff_gap: gap, weight_ratio: w[a] });
                            }
                        }
                    }
                }
            }
            Definition::ProperNf | Definition::Nash => unreachable!(),
        }
    }
    Ok(c.finish(def, eps))
}

/// γ(ϖ) ≤ ε γ(ϖ̃) whenever g_m(ϖ) < g_m(ϖ̃).
pub fn check_eps_proper_sf(sf: &SequenceForm, gamma: &RealizationProfile, eps: f64) -> Result<Certificate> {
    sf_check(sf, gamma, eps, Definition::ProperSf)
}

/// γ(ϖ) ≤ ε whenever ϖ is not a global best-response sequence.
pub fn check_eps_perfect_sf(sf: &SequenceForm, gamma: &RealizationProfile, eps: f64) -> Result<Certificate> {
    sf_check(sf, gamma, eps, Definition::PerfectSf)
}

/// Perfect test restricted to extensions of a common info set.
pub fn check_eps_quasi_perfect_sf(sf: &SequenceForm, gamma: &RealizationProfile, eps: f64) -> Result<Certificate> {
    sf_check(sf, gamma, eps, Definition::QuasiPerfect)
}

/// Proper test restricted to extensions of a common info set.
pub fn check_eps_quasi_proper_sf(sf: &SequenceForm, gamma: &RealizationProfile, eps: f64) -> Result<Certificate> {
    sf_check(sf, gamma, eps, Definition::QuasiProper)
}

/// Zero weight on every sequence whose committed max falls short of the best,
/// up to `tol` in both payoff (relative to the payoff range) and weight.
pub fn check_nash_sequence_form(sf: &SequenceForm, gamma: &RealizationProfile, tol: f64) -> Result<Certificate> {
    sf.check_shape(gamma)?;
    let scale = sf.max_abs_payoff.max(1e-300);
    let mut c = Collector::new();
    let mut comp: f64 = 0.0;
    for (i, p) in sf.players.iter().enumerate() {
        let cv = committed_values(sf, gamma, i);
        let best = cv.cm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for s in 0..p.len() {
            let gap = best - cv.cm[s];
            let w = gamma[i][s].max(0.0);
            comp = comp.max(w * gap / scale);
            if gap > tol * scale {
                c.strict(gap);
                if w > tol {
                    c.push(Violation {
                        player: i + 1,
                        items: vec![p.sequences[s].label.clone()],
                        payoff_gap: gap,
                        weight_ratio: w,
                    });
                }
            }
        }
    }
    let mut cert = c.finish(Definition::Nash, tol);
    cert.complementarity = Some(comp);
    Ok(cert)
}
