//! Smooth substitutions that turn the complementarity pairs into equations.

/// c(t) = exp(1 − 1/t), c(0) = 0.
pub fn c_of_t(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / t).exp()
    }
}

/// dc/dt = c(t)/t².
pub fn dc_dt(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        c_of_t(t) / (t * t)
    }
}

/// φ(v) = e^{1−1/v} for v > 0, else 0.
pub fn phi(v: f64) -> f64 {
    if v > 0.0 {
        (1.0 - 1.0 / v).exp()
    } else {
        0.0
    }
}

pub fn dphi(v: f64) -> f64 {
    let f = phi(v);
    if f > 0.0 {
        // (f / v) / v avoids the v² underflow
        f / v / v
    } else {
        0.0
    }
}

/// ψ₁, ψ₂ and their partials at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psi {
    pub psi1: f64,
    pub psi2: f64,
    pub d1_dv: f64,
    pub d1_dr: f64,
    pub d2_dv: f64,
    pub d2_dr: f64,
}

/// ψ₁ = ((v + √(v²+4τ₀r))/2)^κ₀, ψ₂ = ((−v + √(v²+4τ₀r))/2)^κ₀.
pub fn psi(v: f64, r: f64, tau0: f64, kappa0: f64) -> Psi {
    let tr = tau0 * r;
    let s = v.hypot(2.0 * tr.sqrt());
    // p·m = τ₀r; take the well-conditioned root first
    let (p, m) = if s == 0.0 {
        (0.0, 0.0)
    } else if v >= 0.0 {
        let p = 0.5 * (v + s);
        (p, tr / p)
    } else {
        let m = 0.5 * (s - v);
        (tr / m, m)
    };
    let pk1 = if kappa0 == 2.0 { p } else { p.powf(kappa0 - 1.0) };
    let mk1 = if kappa0 == 2.0 { m } else { m.powf(kappa0 - 1.0) };
    let inv_s = if s > 0.0 { 1.0 / s } else { 0.0 };
    Psi {
        psi1: pk1 * p,
        psi2: mk1 * m,
        d1_dv: kappa0 * pk1 * p * inv_s,
        d1_dr: kappa0 * pk1 * tau0 * inv_s,
        d2_dv: -kappa0 * mk1 * m * inv_s,
        d2_dr: kappa0 * mk1 * tau0 * inv_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn product_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let v = rng.random_range(-20.0..20.0);
            let r = rng.random_range(1e-6..10.0);
            let tau = rng.random_range(1e-6..10.0);
            let k = if rng.random::<bool>() { 2.0 } else { rng.random_range(1.1..4.0) };
            let p = psi(v, r, tau, k);
            let want = (tau * r).powf(k);
            assert!((p.psi1 * p.psi2 - want).abs() <= 1e-10 * want, "{v} {r} {tau} {k}");
            assert!(p.psi1 > 0.0 && p.psi2 > 0.0);
        }
    }

    #[test]
    fn partials_match_differences() {
        let h = 1e-6;
        for &(v, r, tau, k) in &[(0.3, 0.7, 1.2, 2.0), (-2.0, 0.01, 0.5, 2.5), (5.0, 3.0, 1.0, 1.5), (0.0, 1.0, 1.0, 2.0)] {
            let p = psi(v, r, tau, k);
            let dv1 = (psi(v + h, r, tau, k).psi1 - psi(v - h, r, tau, k).psi1) / (2.0 * h);
            let dv2 = (psi(v + h, r, tau, k).psi2 - psi(v - h, r, tau, k).psi2) / (2.0 * h);
            let dr1 = (psi(v, r + h, tau, k).psi1 - psi(v, r - h, tau, k).psi1) / (2.0 * h);
            let dr2 = (psi(v, r + h, tau, k).psi2 - psi(v, r - h, tau, k).psi2) / (2.0 * h);
            for (a, b) in [(p.d1_dv, dv1), (p.d2_dv, dv2), (p.d1_dr, dr1), (p.d2_dr, dr2)] {
                assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn phi_continuity() {
        assert_eq!(phi(0.0), 0.0);
        assert_eq!(phi(-1.0), 0.0);
        assert!(phi(1e-3) < 1e-300);
        assert!(dphi(1e-3) < 1e-290);
        assert_eq!(dphi(1e-200), 0.0);
        assert!((phi(1.0) - 1.0).abs() < 1e-15);
        let h = 1e-6;
        assert!((dphi(0.5) - (phi(0.5 + h) - phi(0.5 - h)) / (2.0 * h)).abs() < 1e-6);
    }

    #[test]
    fn c_limits() {
        assert_eq!(c_of_t(1.0), 1.0);
        assert_eq!(c_of_t(0.0), 0.0);
        assert!(c_of_t(1e-2) < 1e-40);
        let h = 1e-7;
        assert!((dc_dt(0.4) - (c_of_t(0.4 + h) - c_of_t(0.4 - h)) / (2.0 * h)).abs() < 1e-6);
    }
}
