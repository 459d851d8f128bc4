//! Arclength predictor–corrector continuation of a homotopy path from t = 1 toward 0.

use crate::error::{Error, Result};
use crate::homotopy::{HomotopyState, HomotopySystem};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracerOptions {
    /// Step bound is `step_base · t^step_exp`.
    pub step_base: f64,
    pub step_exp: f64,
    /// Corrector tolerance is `min(tol_base · t^tol_exp, tol_cap)`.
    pub tol_base: f64,
    pub tol_exp: f64,
    pub tol_cap: f64,
    pub t_end: f64,
    pub max_iterations: usize,
    pub max_time_s: f64,
    pub min_step: f64,
    pub shrink: f64,
    pub grow: f64,
    pub max_corrector_iters: usize,
    pub max_halvings: usize,
}

impl Default for TracerOptions {
    fn default() -> Self {
        TracerOptions {
            step_base: 0.05,
            step_exp: 0.3,
            tol_base: 0.5,
            tol_exp: 0.3,
            tol_cap: 1e-9,
            t_end: 1e-4,
            max_iterations: 100_000,
            max_time_s: 600.0,
            min_step: 1e-12,
            shrink: 0.5,
            grow: 1.2,
            max_corrector_iters: 20,
            max_halvings: 6,
        }
    }
}

impl TracerOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end < 1.0) {
            return Err(Error::InvalidParameter(format!("t_end must lie in (0, 1), got {}", self.t_end)));
        }
        if !(self.step_base > 0.0) || !(self.min_step > 0.0) || !(self.tol_base > 0.0) || !(self.tol_cap > 0.0) {
            return Err(Error::InvalidParameter("step sizes and tolerances must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) || !(self.grow >= 1.0) {
            return Err(Error::InvalidParameter("step adaptation factors out of range".into()));
        }
        Ok(())
    }

    pub fn max_step(&self, t: f64) -> f64 {
        self.step_base * t.powf(self.step_exp)
    }

    pub fn tolerance(&self, t: f64) -> f64 {
        (self.tol_base * t.max(0.0).powf(self.tol_exp)).min(self.tol_cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceStatus {
    Converged,
    StepUnderflow,
    IterationCap,
    TimeCap,
}

impl TraceStatus {
    pub fn name(self) -> &'static str {
        match self {
            TraceStatus::Converged => "converged",
            TraceStatus::StepUnderflow => "step_underflow",
            TraceStatus::IterationCap => "iteration_cap",
            TraceStatus::TimeCap => "time_cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub state: HomotopyState,
    pub residual: f64,
    pub corrector_iters: usize,
    pub step: f64,
    /// t-component of the unit tangent (negative while t decreases).
    pub tangent_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathTrace {
    pub points: Vec<TracePoint>,
    pub status: TraceStatus,
    /// Predictor steps attempted.
    pub iterations: usize,
    pub rejected: usize,
    pub elapsed_s: f64,
}

impl PathTrace {
    pub fn last(&self) -> &TracePoint {
        self.points.last().unwrap()
    }

    pub fn converged(&self) -> bool {
        self.status == TraceStatus::Converged
    }

    /// Last accepted point with t ≥ `t_min`.
    pub fn last_with_t_at_least(&self, t_min: f64) -> Option<&TracePoint> {
        self.points.iter().rev().find(|p| p.state.t >= t_min)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solve with the LU factors plus one pass of iterative refinement.
fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.clone().lu();
    let mut x = lu.solve(b)?;
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        if dx.iter().all(|v| v.is_finite()) {
            x += dx;
        }
    }
    Some(x)
}

/// Rows of J with `last` appended as the final row.
fn bordered(j: &DMatrix<f64>, last: &DVector<f64>) -> DMatrix<f64> {
    let n = j.nrows();
    let mut a = j.clone().insert_row(n, 0.0);
    a.row_mut(n).copy_from(&last.transpose());
    a
}

fn tangent(j: &DMatrix<f64>, reference: &DVector<f64>) -> Option<DVector<f64>> {
    let n = j.nrows();
    let mut e = DVector::zeros(n + 1);
    e[n] = 1.0;
    let tau = solve(&bordered(j, reference), &e)?;
    let norm = tau.norm();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    Some(tau / norm)
}

fn to_state(w: &DVector<f64>) -> HomotopyState {
    let n = w.len() - 1;
    HomotopyState { z: w.as_slice()[..n].to_vec(), t: w[n] }
}

fn to_vec(s: &HomotopyState) -> DVector<f64> {
    let mut v = DVector::from_row_slice(&s.z);
    v = v.push(s.t);
    v
}

struct Corrected {
    w: DVector<f64>,
    jac: DMatrix<f64>,
    residual: f64,
    iters: usize,
}

fn correct(sys: &HomotopySystem, w0: DVector<f64>, tau: &DVector<f64>, opts: &TracerOptions) -> Option<Corrected> {
    let n = w0.len() - 1;
    let mut w = w0;
    let (mut h, mut jac) = sys.residual_and_jacobian(&to_state(&w)).ok()?;
    let mut norm = inf_norm(&h);
    for it in 0..=opts.max_corrector_iters {
        if !norm.is_finite() {
            return None;
        }
        if norm <= opts.tolerance(w[n]) {
            return Some(Corrected { w, jac, residual: norm, iters: it });
        }
        if it == opts.max_corrector_iters {
            break;
        }
        let mut rhs = DVector::from_vec(h.iter().map(|x| -x).collect::<Vec<_>>());
        rhs = rhs.push(0.0);
        let dw = solve(&bordered(&jac, tau), &rhs)?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let trial = &w + &dw * step;
            if trial[n] > 0.0 {
                if let Ok(ht) = sys.residual(&to_state(&trial)) {
                    let nt = inf_norm(&ht);
                    if nt < norm {
                        w = trial;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return None;
        }
        let (h2, j2) = sys.residual_and_jacobian(&to_state(&w)).ok()?;
        h = h2;
        jac = j2;
        norm = inf_norm(&h);
    }
    None
}

/// Follow the path from `start` until t < t_end or a cap triggers.
pub fn trace(sys: &HomotopySystem, start: HomotopyState, opts: &TracerOptions) -> Result<PathTrace> {
    opts.validate()?;
    let clock = Instant::now();
    let n = sys.dim();
    let (h0, j0) = sys.residual_and_jacobian(&start)?;
    let r0 = inf_norm(&h0);
    if r0 > 1e-8 {
        return Err(Error::Precondition(format!("start residual {r0:e} exceeds 1e-8")));
    }
    let mut e_t = DVector::zeros(n + 1);
    e_t[n] = 1.0;
    let mut tau = tangent(&j0, &e_t).ok_or_else(|| Error::Singular("jacobian is singular at the start point".into()))?;
    if tau[n] > 0.0 {
        tau = -tau;
    }
    let mut w = to_vec(&start);
    let mut points = vec![TracePoint { state: start, residual: r0, corrector_iters: 0, step: 0.0, tangent_t: tau[n] }];
    let mut step = opts.max_step(1.0);
    let mut iterations = 0;
    let mut rejected = 0;
    let status = loop {
        let t = w[n];
        if t < opts.t_end {
            break TraceStatus::Converged;
        }
        if iterations >= opts.max_iterations {
            break TraceStatus::IterationCap;
        }
        if clock.elapsed().as_secs_f64() > opts.max_time_s {
            break TraceStatus::TimeCap;
        }
        if step < opts.min_step {
            break TraceStatus::StepUnderflow;
        }
        iterations += 1;
        let mut h = step.min(opts.max_step(t));
        // keep the predicted t inside (0.1 t, 1]
        if tau[n] < 0.0 && t + h * tau[n] < 0.1 * t {
            h = 0.9 * t / -tau[n];
        }
        if tau[n] > 0.0 && t + h * tau[n] > 1.0 {
            h = (1.0 - t) / tau[n];
        }
        let pred = &w + &tau * h;
        let outcome = correct(sys, pred.clone(), &tau, opts).and_then(|c| {
            // reject jumps far off the predicted point
            let drift = (&c.w - &pred).norm();
            if drift > 2.0 * h.max(opts.min_step) || c.w[n] > 1.0 {
                return None;
            }
            let new_tau = tangent(&c.jac, &tau)?;
            if new_tau.dot(&tau) < 0.5 {
                return None;
            }
            Some((c, new_tau))
        });
        match outcome {
            Some((c, new_tau)) => {
                w = c.w;
                tau = new_tau;
                points.push(TracePoint { state: to_state(&w), residual: c.residual, corrector_iters: c.iters, step: h, tangent_t: tau[n] });
                step = if c.iters <= 3 { h * opts.grow } else { h };
            }
            None => {
                rejected += 1;
                step = h * opts.shrink;
            }
        }
    };
    Ok(PathTrace { points, status, iterations, rejected, elapsed_s: clock.elapsed().as_secs_f64() })
}
