//! Brute-force oracles independent of the homotopy code paths.

use crate::error::{Error, Result};
use crate::forms::{linf, realization_of, MixedProfile, NormalForm, RealizationProfile, SequenceForm, StrategySets};
use crate::refine::{check_eps_proper_sf, Certificate};
use nalgebra::DMatrix;
use serde::Serialize;

/// Central-difference Jacobian of `f` at `point`.
pub fn finite_difference<F: Fn(&[f64]) -> Vec<f64>>(f: F, point: &[f64], h: f64) -> DMatrix<f64> {
    let m = f(point).len();
    let n = point.len();
    let mut out = DMatrix::zeros(m, n);
    let mut p = point.to_vec();
    for j in 0..n {
        let x = p[j];
        p[j] = x + h;
        let up = f(&p);
        p[j] = x - h;
        let dn = f(&p);
        p[j] = x;
        for i in 0..m {
            out[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    pub argmax: Vec<usize>,
    pub value: f64,
}

/// Exact scan of uⁱ(sⁱ, σ⁻ⁱ) over the player's pure strategies, straight from the payoff table.
pub fn brute_force_best_response(nf: &NormalForm, sigma: &MixedProfile, player: usize) -> Result<BestResponse> {
    if player >= nf.num_players || sigma.num_players() != nf.num_players {
        return Err(Error::Dimension("player or profile does not match the normal form".into()));
    }
    if sigma.weights.iter().zip(&nf.shape).any(|(w, &m)| w.len() != m) {
        return Err(Error::Dimension("mixed profile does not match the normal form".into()));
    }
    let mut values = vec![0.0; nf.shape[player]];
    for k in 0..nf.num_profiles() {
        let prof = nf.unflatten(k);
        let mut w = 1.0;
        for (j, &s) in prof.iter().enumerate() {
            if j != player {
                w *= sigma[j][s];
            }
        }
        if w != 0.0 {
            values[prof[player]] += w * nf.payoff(&prof)[player];
        }
    }
    let value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * value.abs().max(1.0);
    let argmax = (0..values.len()).filter(|&s| values[s] >= value - tol).collect();
    Ok(BestResponse { argmax, value })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogMatch {
    pub index: usize,
    /// L∞ distance in mixed-strategy space.
    pub distance: f64,
    /// L∞ distance between the realization plans.
    pub plan_distance: f64,
    pub within_tol: bool,
}

/// Nearest catalog entry; an entry matches when either its mixed profile or its
/// realization plan is within `tol`.
pub fn compare_catalog(
    sf: &SequenceForm,
    strategies: &StrategySets,
    sigma: &MixedProfile,
    catalog: &[MixedProfile],
    tol: f64,
) -> Result<CatalogMatch> {
    if catalog.is_empty() {
        return Err(Error::InvalidParameter("catalog is empty".into()));
    }
    let plan = realization_of(sf, strategies, sigma)?;
    let mut best: Option<CatalogMatch> = None;
    for (index, entry) in catalog.iter().enumerate() {
        let distance = sigma.distance(entry);
        let plan_distance = plan.distance(&realization_of(sf, strategies, entry)?);
        let key = distance.min(plan_distance);
        if best.as_ref().is_none_or(|b| key < b.distance.min(b.plan_distance)) {
            best = Some(CatalogMatch { index, distance, plan_distance, within_tol: key <= tol });
        }
    }
    Ok(best.unwrap())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRung {
    pub epsilon: f64,
    pub pass: bool,
    /// Index of the accepted witness, else of the nearest one tried.
    pub witness: Option<usize>,
    pub distance: f64,
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderReport {
    pub rungs: Vec<LadderRung>,
    pub pass: bool,
    pub note: &'static str,
}

pub const DEFAULT_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// For each ε, look for an interior witness plan within L∞ distance 10ε of
/// the candidate that passes the ε-proper sequence-form test.
pub fn certificate_ladder(
    sf: &SequenceForm,
    candidate: &RealizationProfile,
    witnesses: &[RealizationProfile],
    ladder: &[f64],
) -> Result<LadderReport> {
    sf.check_shape(candidate)?;
    let mut rungs = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let mut rung = LadderRung { epsilon: eps, pass: false, witness: None, distance: f64::INFINITY, certificate: None };
        for (k, w) in witnesses.iter().enumerate() {
            sf.check_shape(w)?;
            let d = linf(&candidate.plans, &w.plans);
            if d > 10.0 * eps || w.min_weight() <= 0.0 {
                if d < rung.distance && !rung.pass {
                    rung.distance = d;
                    rung.witness = Some(k);
                }
                continue;
            }
            let cert = check_eps_proper_sf(sf, w, eps)?;
            let ok = cert.pass;
            if ok || rung.certificate.is_none() || d < rung.distance {
                rung.distance = d;
                rung.witness = Some(k);
                rung.certificate = Some(cert);
            }
            if ok {
                rung.pass = true;
                break;
            }
        }
        rungs.push(rung);
    }
    let pass = !rungs.is_empty() && rungs.iter().all(|r| r.pass);
    Ok(LadderReport {
        rungs,
        pass,
        note: "passing every rung is evidence of properness along a vanishing sequence, not a proof",
    })
}
