//! Independent oracles shared by the integration tests.
//!
//! The radial integral forms below are evaluated with a self-contained
//! adaptive Simpson rule, so they share no numerical code with the crate.

#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavsec::NetworkParams;

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson on `[a, b]` to relative tolerance `rel_tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    // Pre-split into panels so narrow features are not missed, and scale
    // the tolerance by a coarse first estimate.
    let panels = 64;
    let w = (b - a) / panels as f64;
    let coarse: Vec<_> = (0..panels)
        .map(|i| {
            let lo = a + i as f64 * w;
            let hi = lo + w;
            let m = 0.5 * (lo + hi);
            let (flo, fm, fhi) = (f(lo), f(m), f(hi));
            (lo, flo, hi, fhi, m, fm, (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi))
        })
        .collect();
    let magnitude: f64 = coarse.iter().map(|c| c.6.abs()).sum();
    if magnitude == 0.0 {
        return 0.0;
    }
    let tol = rel_tol * magnitude / panels as f64;
    coarse
        .into_iter()
        .map(|(lo, flo, hi, fhi, m, fm, whole)| simpson_step(&f, lo, flo, hi, fhi, m, fm, whole, tol, 40))
        .sum()
}

/// `∫_a^∞ f(r) dr` through `r = a + L·u/(1 − u)` with length scale `L`.
pub fn simpson_tail<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, rel_tol: f64) -> f64 {
    simpson(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let v = 1.0 - u;
            scale * f(a + scale * u / v) / (v * v)
        },
        0.0,
        1.0,
        rel_tol,
    )
}

const REL_TOL: f64 = 1e-11;

/// Connection probability from its radial integral over the LoS disk and
/// the NLoS exterior, with every link Rayleigh-faded.
pub fn pc_radial(p: &NetworkParams, beta_t: f64) -> f64 {
    let h2 = p.h * p.h;
    let k = p.los_radius();
    let rho = p.eta_n / p.eta_l;
    let los = |r: f64| {
        let x = beta_t * h2 / (r * r + h2);
        x / (1.0 + x) * r
    };
    let nlos = |r: f64| {
        let s2 = r * r + h2;
        let x = beta_t * h2 * rho / (s2 * s2);
        x / (1.0 + x) * r
    };
    let inner = simpson(los, 0.0, k, REL_TOL);
    // The NLoS integrand decays like r^{-3} beyond r ≈ (βt·ρ)^{1/4}·√H.
    let scale = ((beta_t * rho).sqrt() * h2).sqrt().max(p.h).max(k);
    let outer = simpson_tail(nlos, k, scale, REL_TOL);
    (-2.0 * PI * p.lambda_u * (inner + outer)).exp()
}

/// Secrecy outage probability from its radial integral with eavesdroppers
/// excluded from the disk of radius `d`.
pub fn pso_radial(p: &NetworkParams, beta_e: f64, d: f64) -> f64 {
    let h2 = p.h * p.h;
    let k = p.los_radius();
    let sqrt_rho = (p.eta_n / p.eta_l).sqrt();
    let sb = beta_e.sqrt();
    let los = |r: f64| {
        let s = (r * r + h2).sqrt();
        (-(PI / 2.0) * p.lambda_u * s * sb * (PI * sqrt_rho - 2.0 * h2 / (s * sb))).exp() * r
    };
    let nlos = |r: f64| {
        let s2 = r * r + h2;
        (-(PI / 2.0) * p.lambda_u * s2 * sb * (PI - 2.0 * h2 / (s2 * sb))).exp() * r
    };
    let lo = d.max(k);
    let los_part = if d < k { simpson(los, d, k, REL_TOL) } else { 0.0 };
    // Decay length of the NLoS integrand, kept short relative to the start
    // point so the mapped integrand is not concentrated near u = 0.
    let q1 = p.lambda_u * PI * PI * sb / 2.0;
    let scale = (1.0 / q1).sqrt().min(1.0 / (2.0 * q1 * lo)).max(1e-3);
    let nlos_part = simpson_tail(nlos, lo, scale, REL_TOL);
    -(-2.0 * PI * p.lambda_e * (los_part + nlos_part)).exp_m1()
}

/// Deterministic generator for random parameter sets.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// A random network drawn from broad but physically sensible ranges.
pub fn random_params<R: Rng>(rng: &mut R) -> NetworkParams {
    let h = rng.random_range(10.0..100.0);
    NetworkParams {
        lambda_u: log_uniform(rng, 1e-4, 1e-2),
        lambda_e: log_uniform(rng, 1e-5, 1e-2),
        theta_c: rng.random_range(PI / 8.0..3.0 * PI / 8.0),
        h,
        eta_n: log_uniform(rng, 1e-3, 1.0),
        ..NetworkParams::default()
    }
}

pub fn threshold(rate: f64) -> f64 {
    2f64.powf(rate) - 1.0
}
