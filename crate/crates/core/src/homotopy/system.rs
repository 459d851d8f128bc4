use super::kernel::{c_of_t, dc_dt, dphi, phi, psi};
use super::{HomotopyConfig, Method};
use crate::error::{Error, Result};
use crate::forms::{RealizationProfile, SequenceForm};
use crate::refine::PerturbationFamily;
use nalgebra::DMatrix;
use serde::Serialize;

/// Point (z, t) with z = (γ nonroot, x, ν).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyState {
    pub z: Vec<f64>,
    pub t: f64,
}

/// Block offsets of the unknown vector: γ by player and sequence, x by player
/// and family order, ν by player and info set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub gamma: Vec<usize>,
    pub x: Vec<usize>,
    pub nu: Vec<usize>,
    pub n0: usize,
    pub e0: usize,
    pub m0: usize,
}

impl Layout {
    fn new(sf: &SequenceForm, fam: &PerturbationFamily) -> Self {
        let n0 = sf.n0();
        let e0 = fam.total();
        let m0 = sf.m0();
        let mut gamma = Vec::new();
        let mut x = Vec::new();
        let mut nu = Vec::new();
        let (mut g, mut e, mut m) = (0, n0, n0 + e0);
        for (p, f) in sf.players.iter().zip(&fam.players) {
            gamma.push(g);
            x.push(e);
            nu.push(m);
            g += p.len() - 1;
            e += f.len();
            m += p.infosets.len();
        }
        Layout { gamma, x, nu, n0, e0, m0 }
    }

    pub fn dim(&self) -> usize {
        self.n0 + self.e0 + self.m0
    }

    /// Column of γⁱ(s) for a nonroot sequence.
    pub fn gamma_col(&self, i: usize, s: usize) -> usize {
        self.gamma[i] + s - 1
    }
}

pub struct HomotopySystem<'a> {
    sf: &'a SequenceForm,
    fam: &'a PerturbationFamily,
    cfg: HomotopyConfig,
    alpha: Vec<f64>,
    gamma0: RealizationProfile,
    y0: Vec<Vec<f64>>,
    tau0: Vec<Vec<f64>>,
    /// Σ_{E ∋ s} ln y⁰(E), per player and sequence (entropy barrier only).
    ln_y0_sum: Vec<Vec<f64>>,
    ln_rho0: f64,
    rho0: f64,
    layout: Layout,
}

impl<'a> HomotopySystem<'a> {
    pub fn new(
        sf: &'a SequenceForm,
        fam: &'a PerturbationFamily,
        cfg: HomotopyConfig,
        alpha: Vec<f64>,
        gamma0: RealizationProfile,
    ) -> Result<Self> {
        cfg.validate()?;
        sf.check_shape(&gamma0)?;
        let layout = Layout::new(sf, fam);
        if alpha.len() != layout.n0 {
            return Err(Error::Dimension(format!("alpha has {} entries, expected {}", alpha.len(), layout.n0)));
        }
        if alpha.iter().any(|a| !(a.abs() <= cfg.alpha_max)) {
            return Err(Error::InvalidParameter("alpha exceeds alpha_max".into()));
        }
        if gamma0.plans.iter().flatten().any(|&w| !(w > 0.0)) {
            return Err(Error::NotInterior("start plan has a nonpositive weight".into()));
        }
        let fv = sf.flow_violation(&gamma0);
        if fv > 1e-9 {
            return Err(Error::Precondition(format!("start plan violates flow constraints by {fv:e}")));
        }
        let y0: Vec<Vec<f64>> = fam
            .players
            .iter()
            .enumerate()
            .map(|(i, f)| f.sets.iter().map(|e| e.iter().map(|&s| gamma0[i][s]).sum()).collect())
            .collect();
        let tau0 = y0
            .iter()
            .map(|ys| {
                ys.iter()
                    .map(|&y| match cfg.method {
                        Method::Lgpr => y.powf(1.0 / cfg.kappa0),
                        Method::Etpr => 1.0,
                    })
                    .collect()
            })
            .collect();
        let ln_y0_sum = fam
            .players
            .iter()
            .enumerate()
            .map(|(i, f)| f.containing.iter().map(|es| es.iter().map(|&e| y0[i][e].ln()).sum()).collect())
            .collect();
        let rho0 = fam.max_set_size().max(1) as f64;
        Ok(HomotopySystem { sf, fam, cfg, alpha, gamma0, y0, tau0, ln_y0_sum, ln_rho0: rho0.ln(), rho0, layout })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn config(&self) -> &HomotopyConfig {
        &self.cfg
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn sequence_form(&self) -> &SequenceForm {
        self.sf
    }

    pub fn family(&self) -> &PerturbationFamily {
        self.fam
    }

    pub fn gamma0(&self) -> &RealizationProfile {
        &self.gamma0
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// Closed-form solution at t = 1.
    pub fn start(&self) -> HomotopyState {
        let l = &self.layout;
        let mut z = vec![0.0; l.dim()];
        for (i, p) in self.sf.players.iter().enumerate() {
            for s in 1..p.len() {
                z[l.gamma_col(i, s)] = self.gamma0[i][s];
            }
            for (e, &y) in self.y0[i].iter().enumerate() {
                z[l.x[i] + e] = match self.cfg.method {
                    Method::Lgpr => y.powf(1.0 / self.cfg.kappa0) - 1.0,
                    Method::Etpr => {
                        let big_l = self.ln_rho0 + 1.0 - y.ln();
                        big_l.powf(-1.0 / self.cfg.kappa0) - big_l.powf(1.0 / self.cfg.kappa0)
                    }
                };
            }
        }
        HomotopyState { z, t: 1.0 }
    }

    /// γ part of z with γ(∅) = 1 restored.
    pub fn gamma_of(&self, z: &[f64]) -> RealizationProfile {
        let plans = self
            .sf
            .players
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let mut g = Vec::with_capacity(p.len());
                g.push(1.0);
                g.extend_from_slice(&z[self.layout.gamma[i]..self.layout.gamma[i] + p.len() - 1]);
                g
            })
            .collect();
        RealizationProfile::new(plans)
    }

    /// (y, λ) per player and perturbation set.
    pub fn multipliers(&self, z: &[f64], t: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let r = c_of_t(t).powf(1.0 / self.cfg.kappa0);
        let mut ys = Vec::new();
        let mut ls = Vec::new();
        for (i, f) in self.fam.players.iter().enumerate() {
            let mut y = Vec::with_capacity(f.len());
            let mut lam = Vec::with_capacity(f.len());
            for e in 0..f.len() {
                let p = psi(z[self.layout.x[i] + e], r, self.tau0[i][e], self.cfg.kappa0);
                y.push(match self.cfg.method {
                    Method::Lgpr => p.psi1,
                    Method::Etpr => self.rho0 * phi(p.psi1),
                });
                lam.push(p.psi2);
            }
            ys.push(y);
            ls.push(lam);
        }
        (ys, ls)
    }

    /// Σ_{q ≤ q(E)} r_q(t) and its t-derivative.
    fn r_sum(&self, i: usize, e: usize, t: f64) -> (f64, f64) {
        let kappa = self.fam.players[i].kappa_root as i32;
        let qe = self.fam.players[i].q[e] as i32;
        let u = t / self.cfg.omega0;
        let mut sum = 0.0;
        let mut der = 0.0;
        for q in 1..=qe {
            let k = kappa - q;
            sum += u.powi(k);
            if k != 0 {
                der += k as f64 * u.powi(k - 1) / self.cfg.omega0;
            }
        }
        (sum, der)
    }

    pub fn residual(&self, state: &HomotopyState) -> Result<Vec<f64>> {
        Ok(self.eval(&state.z, state.t, false)?.0)
    }

    /// Jacobian with respect to (z, t); the last column is ∂/∂t.
    pub fn jacobian(&self, state: &HomotopyState) -> Result<DMatrix<f64>> {
        Ok(self.eval(&state.z, state.t, true)?.1.unwrap())
    }

    pub fn residual_and_jacobian(&self, state: &HomotopyState) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (h, j) = self.eval(&state.z, state.t, true)?;
        Ok((h, j.unwrap()))
    }

    fn eval(&self, z: &[f64], t: f64, want_jac: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!("homotopy parameter must be positive, got {t}")));
        }
        let l = &self.layout;
        let n = l.dim();
        if z.len() != n {
            return Err(Error::Dimension(format!("state has {} entries, expected {n}", z.len())));
        }
        let sf = self.sf;
        let np = sf.num_players;
        let k0 = self.cfg.kappa0;
        let c = c_of_t(t);
        let dc = dc_dt(t);
        let r = c.powf(1.0 / k0);
        let dr = r / (k0 * t * t);
        let gamma = self.gamma_of(z);
        let mut h = vec![0.0; n];
        let mut jac = if want_jac { Some(DMatrix::<f64>::zeros(n, n + 1)) } else { None };

        // g^i(s, γ^{-i}) accumulated by row, with its γ-partials
        let mut g = vec![0.0; l.n0];
        for e in &sf.entries {
            for i in 0..np {
                let si = e.seqs[i];
                if si == 0 {
                    continue;
                }
                let row = l.gamma_col(i, si);
                let mut w = e.payoff[i];
                for k in 0..np {
                    if k != i {
                        w *= gamma[k][e.seqs[k]];
                    }
                }
                g[row] += w;
                if let Some(j) = jac.as_mut() {
                    for k in 0..np {
                        let sk = e.seqs[k];
                        if k == i || sk == 0 {
                            continue;
                        }
                        let mut d = e.payoff[i];
                        for m in 0..np {
                            if m != i && m != k {
                                d *= gamma[m][e.seqs[m]];
                            }
                        }
                        j[(row, l.gamma_col(k, sk))] += (1.0 - c) * d;
                    }
                }
            }
        }

        // per-set substitution values
        let mut lam = Vec::with_capacity(np);
        let mut dlam_dx = Vec::with_capacity(np);
        let mut dlam_dt = Vec::with_capacity(np);
        for (i, f) in self.fam.players.iter().enumerate() {
            let (mut a, mut b, mut d) = (Vec::new(), Vec::new(), Vec::new());
            for e in 0..f.len() {
                let col = l.x[i] + e;
                let p = psi(z[col], r, self.tau0[i][e], k0);
                let (y, dy_dx, dy_dt) = match self.cfg.method {
                    Method::Lgpr => (p.psi1, p.d1_dv, p.d1_dr * dr),
                    Method::Etpr => {
                        let dp = self.rho0 * dphi(p.psi1);
                        (self.rho0 * phi(p.psi1), dp * p.d1_dv, dp * p.d1_dr * dr)
                    }
                };
                a.push(p.psi2);
                b.push(p.d2_dv);
                d.push(p.d2_dr * dr);
                // constraint row
                let row = col;
                let members: f64 = f.sets[e].iter().map(|&s| gamma[i][s]).sum();
                let (rs, drs) = self.r_sum(i, e, t);
                let delta0 = self.cfg.delta0;
                h[row] = members - delta0 * (1.0 - t) * rs - y;
                if let Some(j) = jac.as_mut() {
                    for &s in &f.sets[e] {
                        j[(row, l.gamma_col(i, s))] += 1.0;
                    }
                    j[(row, col)] = -dy_dx;
                    j[(row, n)] = delta0 * rs - delta0 * (1.0 - t) * drs - dy_dt;
                }
            }
            lam.push(a);
            dlam_dx.push(b);
            dlam_dt.push(d);
        }

        // stationarity and flow
        for (i, p) in sf.players.iter().enumerate() {
            let f = &self.fam.players[i];
            for s in 1..p.len() {
                let row = l.gamma_col(i, s);
                let k = p.sequences[s].infoset.unwrap();
                let count = f.containing[s].len() as f64;
                let lam_sum: f64 = f.containing[s].iter().map(|&e| lam[i][e]).sum();
                let zeta: f64 = p.child_infosets[s].iter().map(|&kk| z[l.nu[i] + kk]).sum();
                let a = self.alpha[row];
                let (barrier, dbarrier) = match self.cfg.method {
                    Method::Lgpr => (-c * count, -dc * count),
                    Method::Etpr => {
                        let v = self.ln_y0_sum[i][s] - (self.ln_rho0 + 1.0) * count;
                        (c * v, dc * v)
                    }
                };
                h[row] = (1.0 - c) * g[row] + lam_sum + barrier - z[l.nu[i] + k] + zeta - c * (1.0 - t) * a;
                if let Some(j) = jac.as_mut() {
                    let mut dt = -dc * g[row] + dbarrier - (dc * (1.0 - t) - c) * a;
                    for &e in &f.containing[s] {
                        j[(row, l.x[i] + e)] += dlam_dx[i][e];
                        dt += dlam_dt[i][e];
                    }
                    j[(row, l.nu[i] + k)] -= 1.0;
                    for &kk in &p.child_infosets[s] {
                        j[(row, l.nu[i] + kk)] += 1.0;
                    }
                    j[(row, n)] = dt;
                }
            }
            for (k, info) in p.infosets.iter().enumerate() {
                let row = l.nu[i] + k;
                let sum: f64 = info.extensions().map(|s| gamma[i][s]).sum();
                h[row] = sum - gamma[i][info.parent_seq];
                if let Some(j) = jac.as_mut() {
                    for s in info.extensions() {
                        j[(row, l.gamma_col(i, s))] = 1.0;
                    }
                    if info.parent_seq != 0 {
                        j[(row, l.gamma_col(i, info.parent_seq))] = -1.0;
                    }
                }
            }
        }
        Ok((h, jac))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::forms::build_sequence_form;
    use crate::homotopy::sample_alpha;
    use crate::oracles::finite_difference;
    use crate::refine::enumerate_perturbation_sets;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inf_norm(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn fixture_forms() -> Vec<SequenceForm> {
        [fixtures::fig1(), fixtures::fig2(), fixtures::fig3()]
            .iter()
            .map(|g| {
                let sf = build_sequence_form(g);
                let m = sf.max_abs_payoff;
                sf.scaled(1.0 / m)
            })
            .collect()
    }

    #[test]
    fn starts_have_zero_residual() {
        for sf in fixture_forms() {
            let fam = enumerate_perturbation_sets(&sf, 10_000).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for method in Method::ALL {
                let cfg = HomotopyConfig::new(method);
                for g0 in [sf.uniform_plan(), sf.random_plan(&mut rng, 0.1)] {
                    let sys = HomotopySystem::new(&sf, &fam, cfg.clone(), sample_alpha(&cfg, sf.n0()), g0).unwrap();
                    let st = sys.start();
                    assert!(inf_norm(&sys.residual(&st).unwrap()) <= 1e-10, "{method}");
                    let (y, lam) = sys.multipliers(&st.z, 1.0);
                    for (i, ys) in y.iter().enumerate() {
                        for (e, &v) in ys.iter().enumerate() {
                            assert!((v - sys.y0[i][e]).abs() < 1e-12);
                            if method == Method::Lgpr {
                                assert!((lam[i][e] - 1.0).abs() < 1e-12);
                            }
                        }
                    }
                    let j = sys.jacobian(&st).unwrap();
                    let n = sys.dim();
                    assert!(j.columns(0, n).into_owned().lu().try_inverse().is_some());
                }
            }
        }
    }

    #[test]
    fn fig1_start_values() {
        let sf = build_sequence_form(&fixtures::fig1());
        let fam = enumerate_perturbation_sets(&sf, 1000).unwrap();
        let l_idx = fam.players[1].sets.iter().position(|e| sf.players[1].sequences[e[0]].label == "l" && e.len() == 1).unwrap();
        for method in Method::ALL {
            let cfg = HomotopyConfig::new(method);
            let sys = HomotopySystem::new(&sf, &fam, cfg.clone(), vec![0.0; sf.n0()], sf.uniform_plan()).unwrap();
            assert_eq!(sys.rho0(), 3.0);
            let x = sys.start().z[sys.layout().x[1] + l_idx];
            let want = match method {
                Method::Lgpr => 0.5f64.sqrt() - 1.0,
                Method::Etpr => {
                    let big_l = 3f64.ln() + 1.0 - 0.5f64.ln();
                    big_l.powf(-0.5) - big_l.sqrt()
                }
            };
            assert!((x - want).abs() < 1e-14);
        }
    }

    #[test]
    fn substitution_identities_along_random_states() {
        let sf = build_sequence_form(&fixtures::fig1());
        let fam = enumerate_perturbation_sets(&sf, 1000).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for method in Method::ALL {
            let sys = HomotopySystem::new(&sf, &fam, HomotopyConfig::new(method), vec![0.0; sf.n0()], sf.uniform_plan()).unwrap();
            for _ in 0..1000 {
                let t = rng.random_range(0.05..1.0);
                let z: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-1.5..1.5)).collect();
                let (y, lam) = sys.multipliers(&z, t);
                let c = c_of_t(t);
                for i in 0..2 {
                    for e in 0..y[i].len() {
                        let want = match method {
                            Method::Lgpr => c * sys.y0[i][e],
                            Method::Etpr => c,
                        };
                        let got = match method {
                            Method::Lgpr => y[i][e] * lam[i][e],
                            Method::Etpr => {
                                let b = psi(z[sys.layout.x[i] + e], c.sqrt(), 1.0, 2.0).psi1;
                                b * lam[i][e]
                            }
                        };
                        assert!((got - want).abs() <= 1e-10 * want.max(1e-300), "{method}");
                    }
                }
            }
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for sf in fixture_forms() {
            let fam = enumerate_perturbation_sets(&sf, 10_000).unwrap();
            for method in Method::ALL {
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
                }
            }
        }
    }

    #[test]
    fn zero_payoffs_leave_payoff_block_empty() {
        let sf = build_sequence_form(&fixtures::fig1()).scaled(0.0);
        let fam = enumerate_perturbation_sets(&sf, 1000).unwrap();
        let sys = HomotopySystem::new(&sf, &fam, HomotopyConfig::default(), vec![0.0; sf.n0()], sf.uniform_plan()).unwrap();
        let mut st = sys.start();
        st.t = 0.5;
        let j = sys.jacobian(&st).unwrap();
        let n0 = sys.layout().n0;
        assert_eq!(j.view((0, 0), (n0, n0)).abs().max(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sf = build_sequence_form(&fixtures::fig1());
        let fam = enumerate_perturbation_sets(&sf, 1000).unwrap();
        let mut g = sf.uniform_plan();
        g.plans[1][1] = 0.0;
        g.plans[1][2] = 1.0;
        assert!(matches!(
            HomotopySystem::new(&sf, &fam, HomotopyConfig::default(), vec![0.0; sf.n0()], g),
            Err(Error::NotInterior(_))
        ));
        let sys = HomotopySystem::new(&sf, &fam, HomotopyConfig::default(), vec![0.0; sf.n0()], sf.uniform_plan()).unwrap();
        let mut st = sys.start();
        st.t = 0.0;
        assert!(sys.residual(&st).is_err());
    }
}
